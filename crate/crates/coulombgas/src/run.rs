//! Command execution: (λ, seed) sweeps in a thread pool, gathered in a fixed
//! order so that artifacts do not depend on scheduling.

use coulombgas_core::coulomb::{self, PopulationState, SolverOptions};
use coulombgas_core::cumulants::{self, CumulantVector, ExpansionSeries, MomentVector, Q};
use coulombgas_core::denoise::{self, HciBackend, HfOptions, MiReport};
use coulombgas_core::ensembles::{self, Beta, DenoisingInstance, EnsembleKind, EnsembleSpec};
use coulombgas_core::freeprob;
use coulombgas_core::hciz::{self, HcizEstimate, McPartial, PairConvention, MC_CHUNK};
use coulombgas_core::linalg::CMatrix;
use coulombgas_core::rng::{self, Rng};
use coulombgas_core::Error as CoreError;
use num_traits::{FromPrimitive, ToPrimitive};
use rayon::prelude::*;

use crate::config::{BackendArg, CommandKind, ConfigError, EnsembleArg, ExperimentConfig};
use crate::io::{mi_row, version_string, Cell, Header, Table, MI_COLUMNS};

/// A finished run: provenance, rows and task counts.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub header: Header,
    pub table: Table,
    pub ok: usize,
    pub failed: usize,
}

/// Pool sized by `COULOMBGAS_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, ConfigError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("COULOMBGAS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| ConfigError::Invalid(format!("COULOMBGAS_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| ConfigError::Invalid(e.to_string()))
}

type Rows = Vec<Vec<Cell>>;

struct Sweep {
    lambda: f64,
    seed: u64,
    result: Result<Rows, CoreError>,
}

/// Run `f` on every (λ, seed) pair and return results sorted by (λ, seed).
fn sweep<F>(pool: &rayon::ThreadPool, lambdas: &[f64], seeds: &[u64], f: F) -> Vec<Sweep>
where
    F: Fn(f64, u64) -> Result<Rows, CoreError> + Sync,
{
    let tasks: Vec<(f64, u64)> = lambdas.iter().flat_map(|&l| seeds.iter().map(move |&s| (l, s))).collect();
    let mut out: Vec<Sweep> =
        pool.install(|| tasks.par_iter().map(|&(lambda, seed)| Sweep { lambda, seed, result: f(lambda, seed) }).collect());
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.seed.cmp(&b.seed)));
    out
}

fn status_cells(e: &CoreError) -> [Cell; 2] {
    [format!("error:{}", e.code()).into(), e.to_string().into()]
}

/// Collect rows; a failed task becomes one row with `lead` cells, blanks and
/// the error status.
fn gather(table: &mut Table, results: Vec<Sweep>, lead: impl Fn(f64, u64) -> Vec<Cell>, hash: &str) -> (usize, usize) {
    let (mut ok, mut failed) = (0, 0);
    let width = table.columns.len();
    let hash_col = table.column("config_hash");
    for s in results {
        match s.result {
            Ok(rows) => {
                ok += 1;
                rows.into_iter().for_each(|r| table.push(r));
            }
            Err(e) => {
                failed += 1;
                let mut row = lead(s.lambda, s.seed);
                row.resize(width - 2, Cell::Empty);
                if let Some(h) = hash_col {
                    row[h] = hash.into();
                }
                row.extend(status_cells(&e));
                table.push(row);
            }
        }
    }
    (ok, failed)
}

fn ok_cells() -> [Cell; 2] {
    ["ok".into(), Cell::Empty]
}

/// Signal matrix for `seed`, with the generator positioned for the noise.
/// The equally spaced prior is used in diagonal form: the noise is rotation
/// invariant, so the data spectrum has the same law.
fn sample_signal(spec: &EnsembleSpec, seed: u64) -> Result<(CMatrix, Vec<f64>, Rng), CoreError> {
    let mut r = rng::from_seed(seed);
    if spec.kind == EnsembleKind::UniformSpectrum {
        let v = ensembles::uniform_spectrum_values(spec.n);
        return Ok((ensembles::diagonal_signal(&v), v, r));
    }
    let m = ensembles::sample_ensemble(spec, &mut r)?;
    let mut v = m.spectrum.values.clone();
    v.sort_by(f64::total_cmp);
    Ok((m.matrix, v, r))
}

fn instance(spec: &EnsembleSpec, lambda: f64, seed: u64) -> Result<(DenoisingInstance, Vec<f64>), CoreError> {
    let (s, v, mut r) = sample_signal(spec, seed)?;
    Ok((ensembles::make_denoising_instance(&s, lambda, spec.beta, &mut r)?, v))
}

fn default_backend(beta: Beta) -> BackendArg {
    match beta {
        Beta::Complex => BackendArg::Exact,
        Beta::Real => BackendArg::Bh(PairConvention::HalfUpper),
    }
}

/// Monte-Carlo spherical integral with chunks spread over the pool and merged
/// in chunk order; identical to the serial estimator.
pub fn hciz_mc_parallel(a: &[f64], b: &[f64], gamma: f64, beta: Beta, k: usize, seed: u64) -> Result<HcizEstimate, CoreError> {
    if k < 2 || a.is_empty() || a.len() != b.len() || !gamma.is_finite() {
        // delegate argument errors to the serial routine
        return hciz::hciz_mc(a, b, gamma, beta, k, seed);
    }
    let chunks = k.div_ceil(MC_CHUNK);
    let parts: Vec<McPartial> =
        (0..chunks).into_par_iter().map(|c| hciz::mc_partial(a, b, gamma, beta, seed, c, k, false)).collect();
    Ok(parts.into_iter().fold(McPartial::empty(a.len(), false), McPartial::merge).estimate(a.len()))
}

fn solver_rows(st: &PopulationState) -> [Cell; 3] {
    [st.iter.into(), (if st.converged { "true" } else { "false" }).into(), st.residual.into()]
}

fn pot_of(spec: &EnsembleSpec) -> Result<ensembles::Potential, CoreError> {
    spec.potential().ok_or_else(|| CoreError::InvalidArgument("the uniform prior has no confining potential".into()))
}

fn run_equilibrium(cfg: &ExperimentConfig, spec: &EnsembleSpec, pool: &rayon::ThreadPool, hash: &str) -> (Table, usize, usize) {
    let mut t = Table::new(&[
        "seed", "index", "eigenvalue", "iter", "converged", "residual", "method", "config_hash", "status", "message",
    ]);
    let res = sweep(pool, &[0.0], &cfg.seeds, |_, seed| {
        let pot = pot_of(spec)?;
        let mut r = rng::from_seed(seed);
        let init = coulomb::default_init(&pot, spec.n, &mut r);
        let st = coulomb::solve_warmup(&pot, &init, &cfg.solver)?;
        let mut lam = st.lam.clone();
        lam.sort_by(f64::total_cmp);
        Ok(lam
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut row: Vec<Cell> = vec![seed.into(), i.into(), (*v).into()];
                row.extend(solver_rows(&st));
                row.extend(["warmup".into(), hash.into()]);
                row.extend(ok_cells());
                row
            })
            .collect())
    });
    let (ok, failed) = gather(&mut t, res, |_, s| vec![s.into()], hash);
    (t, ok, failed)
}

fn run_denoise_solve(cfg: &ExperimentConfig, spec: &EnsembleSpec, pool: &rayon::ThreadPool, hash: &str) -> (Table, usize, usize) {
    let mut t = Table::new(&[
        "lambda",
        "seed",
        "index",
        "eigenvalue",
        "data_eigenvalue",
        "iter",
        "converged",
        "residual",
        "method",
        "config_hash",
        "status",
        "message",
    ]);
    let backend = cfg.backend.unwrap_or_else(|| default_backend(spec.beta));
    let res = sweep(pool, &cfg.lambda, &cfg.seeds, |lambda, seed| {
        let pot = pot_of(spec)?;
        let (inst, _) = instance(spec, lambda, seed)?;
        let y = inst.lam_y.values.clone();
        let (st, method) = match (spec.beta, backend) {
            (Beta::Complex, BackendArg::Exact) => (coulomb::solve_denoise_exact(&y, lambda, &pot, &cfg.solver)?, "exact".to_string()),
            (Beta::Real, BackendArg::Bh(c)) => {
                (coulomb::solve_denoise_bh(&y, lambda, &pot, c, &cfg.solver)?, BackendArg::Bh(c).to_string())
            }
            _ => return Err(CoreError::InvalidArgument(format!("no fixed-point operator for backend {backend} at this beta"))),
        };
        let mut lam = st.lam.clone();
        lam.sort_by(f64::total_cmp);
        Ok(lam
            .iter()
            .zip(&y)
            .enumerate()
            .map(|(i, (v, yv))| {
                let mut row: Vec<Cell> = vec![lambda.into(), seed.into(), i.into(), (*v).into(), (*yv).into()];
                row.extend(solver_rows(&st));
                row.extend([method.as_str().into(), hash.into()]);
                row.extend(ok_cells());
                row
            })
            .collect())
    });
    let (ok, failed) = gather(&mut t, res, |l, s| vec![l.into(), s.into()], hash);
    (t, ok, failed)
}

fn run_hciz(cfg: &ExperimentConfig, spec: &EnsembleSpec, pool: &rayon::ThreadPool, hash: &str) -> (Table, usize, usize) {
    let mut t = Table::new(&[
        "lambda",
        "beta",
        "n",
        "seed",
        "value",
        "stderr",
        "method",
        "log_condition",
        "ess",
        "bh_violations",
        "config_hash",
        "status",
        "message",
    ]);
    let backend = cfg.backend.unwrap_or_else(|| default_backend(spec.beta));
    let beta = spec.beta;
    let res = sweep(pool, &cfg.lambda, &cfg.seeds, |lambda, seed| {
        let (inst, s) = instance(spec, lambda, seed)?;
        let y = &inst.lam_y.values;
        let est = match backend {
            BackendArg::Mc(k) => hciz_mc_parallel(&s, y, lambda.sqrt(), beta, k, seed)?,
            b => denoise::hciz_value(&s, y, lambda, beta, b.to_core(seed))?,
        };
        let mut row: Vec<Cell> = vec![
            lambda.into(),
            (beta.value() as usize).into(),
            spec.n.into(),
            seed.into(),
            est.value.into(),
            est.stderr.into(),
            backend.to_string().into(),
            est.log_condition.into(),
            est.ess.into(),
        ];
        row.push(est.validity.as_ref().map_or(Cell::Empty, |v| v.len().into()));
        row.push(hash.into());
        row.extend(ok_cells());
        Ok(vec![row])
    });
    let lead = |l: f64, s: u64| vec![l.into(), (beta.value() as usize).into(), spec.n.into(), s.into()];
    let (ok, failed) = gather(&mut t, res, lead, hash);
    (t, ok, failed)
}

fn is_uniform(cfg: &ExperimentConfig) -> bool {
    cfg.ensemble == Some(EnsembleArg::Uniform)
}

fn run_mi(cfg: &ExperimentConfig, spec: &EnsembleSpec, pool: &rayon::ThreadPool, hash: &str, with_mmse: bool) -> (Table, usize, usize) {
    let mut t = Table::new(&MI_COLUMNS);
    let beta = spec.beta;
    let res = sweep(pool, &cfg.lambda, &cfg.seeds, |lambda, seed| {
        let mut rep = if with_mmse { mmse_task(cfg, spec, lambda, seed)? } else { mi_task(cfg, spec, lambda, seed)? };
        rep.seed = Some(seed);
        rep.n = spec.n;
        Ok(vec![mi_row(&rep, hash)])
    });
    let lead = |l: f64, s: u64| vec![l.into(), (beta.value() as usize).into(), spec.n.into(), s.into()];
    let (ok, failed) = gather(&mut t, res, lead, hash);
    (t, ok, failed)
}

fn mi_task(cfg: &ExperimentConfig, spec: &EnsembleSpec, lambda: f64, seed: u64) -> Result<MiReport, CoreError> {
    let beta = spec.beta;
    match cfg.backend {
        Some(BackendArg::Closed) => denoise::mi_from_spectra(&[0.0], &[0.0], lambda, beta, HciBackend::SemicircleClosed),
        None if is_uniform(cfg) && beta == Beta::Complex => {
            let mut r = rng::from_seed(seed);
            let noise = ensembles::sample_wigner(spec.n, beta, &mut r);
            let v = ensembles::uniform_spectrum_values(spec.n);
            let y = ensembles::diagonal_data_eigenvalues(&v, &noise, lambda)?;
            denoise::mi_uniform_finite_n(&y, lambda)
        }
        b => {
            let b = b.unwrap_or_else(|| default_backend(beta));
            let (inst, s) = instance(spec, lambda, seed)?;
            denoise::mi_from_spectra(&s, &inst.lam_y.values, lambda, beta, b.to_core(seed))
        }
    }
}

fn mmse_task(cfg: &ExperimentConfig, spec: &EnsembleSpec, lambda: f64, seed: u64) -> Result<MiReport, CoreError> {
    let beta = spec.beta;
    if beta != Beta::Complex {
        return Err(CoreError::InvalidArgument("MMSE evaluators need beta = 2".into()));
    }
    match cfg.backend {
        Some(BackendArg::Closed) => {
            if cfg.ensemble != Some(EnsembleArg::Wigner) {
                return Err(CoreError::InvalidArgument("the closed MMSE is for the Wigner prior".into()));
            }
            let mut rep = denoise::mi_from_spectra(&[0.0], &[0.0], lambda, beta, HciBackend::SemicircleClosed)?;
            rep.mmse = Some(denoise::mmse_wigner_closed(lambda));
            Ok(rep)
        }
        None if is_uniform(cfg) => {
            let (inst, _) = instance(spec, lambda, seed)?;
            denoise::mmse_uniform_finite_n(&inst)
        }
        Some(BackendArg::Exact) | None => {
            let (inst, s) = instance(spec, lambda, seed)?;
            let lam_s = match spec.potential() {
                Some(pot) => {
                    let st = coulomb::solve_denoise_exact(&inst.lam_y.values, lambda, &pot, &cfg.solver)?;
                    let mut v = st.lam;
                    v.sort_by(f64::total_cmp);
                    v
                }
                None => s,
            };
            let hf = denoise::mmse_hf(&inst, &lam_s, &HfOptions::default())?;
            let mut rep = denoise::mi_from_spectra(&lam_s, &inst.lam_y.values, lambda, beta, HciBackend::ExactDet)?;
            rep.method = "hf-exact".into();
            rep.mmse = Some(hf.mmse);
            Ok(rep)
        }
        Some(b) => Err(CoreError::InvalidArgument(format!("no MMSE evaluator for backend {b}"))),
    }
}

fn theta_for(cfg: &ExperimentConfig) -> Result<MomentVector, CoreError> {
    match &cfg.ensemble {
        Some(EnsembleArg::Wigner) => Ok(MomentVector::semicircle()),
        Some(EnsembleArg::Uniform) => Ok(MomentVector::uniform()),
        Some(EnsembleArg::Wishart(a)) => {
            let phi = Q::from_f64(*a).ok_or_else(|| CoreError::InvalidArgument("bad Wishart ratio".into()))?;
            Ok(cumulants::moments_from_cumulants(&CumulantVector::marchenko_pastur(phi)))
        }
        _ => Err(CoreError::InvalidArgument("expand needs wigner, wishart:<alpha> or uniform".into())),
    }
}

fn run_expand(cfg: &ExperimentConfig, hash: &str) -> (Table, usize, usize) {
    let mut t = Table::new(&["quantity", "exponent", "coefficient", "value", "seed", "method", "config_hash", "status", "message"]);
    let series = theta_for(cfg).and_then(|th| Ok((cumulants::mi_expansion(&th, 4)?, cumulants::mmse_expansion(&th)?)));
    match series {
        Ok((mi, mmse)) => {
            let mut push = |name: &str, s: &ExpansionSeries| {
                for (half, c) in &s.terms {
                    t.push(vec![
                        name.into(),
                        ExpansionSeries::exponent_label(*half).into(),
                        c.to_string().into(),
                        c.to_f64().unwrap_or(f64::NAN).into(),
                        cfg.seeds[0].into(),
                        "exact-rational".into(),
                        hash.into(),
                        "ok".into(),
                        Cell::Empty,
                    ]);
                }
            };
            push("mi", &mi);
            push("beta_mmse", &mmse);
            (t, 1, 0)
        }
        Err(e) => {
            let mut row = vec![Cell::Empty; 6];
            row.push(hash.into());
            row.extend(status_cells(&e));
            t.push(row);
            (t, 0, 1)
        }
    }
}

/// Grid half-width covering the support of `ρ_Y` for the equally spaced prior.
fn density_half_width(lambda: f64) -> f64 {
    (3.0 * lambda).sqrt() + 2.5
}

fn run_density(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, hash: &str, notes: &mut Vec<(String, String)>) -> (Table, usize, usize) {
    let mut t = Table::new(&["x", "rho", "lambda", "seed", "method", "config_hash", "status", "message"]);
    let res = sweep(pool, &cfg.lambda, &cfg.seeds[..1], |lambda, seed| {
        let l = density_half_width(lambda);
        let m = (2.0 * l / cfg.grid_step).ceil() as usize;
        let grid: Vec<f64> = (0..=m).map(|i| -l + i as f64 * cfg.grid_step).collect();
        let gd = freeprob::density_from_green(lambda, &grid, cfg.eps)?;
        let d = &gd.density;
        let mut rows: Rows = Vec::new();
        if let freeprob::DensityKind::Sampled { grid, values, .. } = &d.kind {
            for (x, r) in grid.iter().zip(values) {
                rows.push(vec![(*x).into(), (*r).into(), lambda.into(), seed.into(), "green".into(), hash.into(), "ok".into(), Cell::Empty]);
            }
        }
        // summary carried in the first row's message column
        if let Some(first) = rows.first_mut() {
            first[7] = format!("mass={:?};dropped={};richardson_gap={:?}", d.mass, gd.dropped.len(), gd.richardson_gap).into();
        }
        Ok(rows)
    });
    for s in &res {
        if let Ok(rows) = &s.result {
            if let Some(Cell::Text(m)) = rows.first().map(|r| &r[7]) {
                notes.push((format!("lambda={:?}", s.lambda), m.clone()));
            }
        }
    }
    let (ok, failed) = gather(&mut t, res, |l, s| vec![Cell::Empty, Cell::Empty, l.into(), s.into()], hash);
    (t, ok, failed)
}

/// Execute a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifact, ConfigError> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let hash = cfg.hash();
    let mut notes = Vec::new();
    let needs_spec = !matches!(cfg.command, CommandKind::Expand | CommandKind::Density);
    let spec = if needs_spec { Some(cfg.ensemble_spec()?) } else { None };
    let spec_ref = || spec.as_ref().expect("ensemble checked by validate");
    let (table, ok, failed) = match cfg.command {
        CommandKind::Equilibrium => run_equilibrium(cfg, spec_ref(), &pool, &hash),
        CommandKind::DenoiseSolve => run_denoise_solve(cfg, spec_ref(), &pool, &hash),
        CommandKind::Hciz => run_hciz(cfg, spec_ref(), &pool, &hash),
        CommandKind::Mi => run_mi(cfg, spec_ref(), &pool, &hash, false),
        CommandKind::Mmse => run_mi(cfg, spec_ref(), &pool, &hash, true),
        CommandKind::Expand => run_expand(cfg, &hash),
        CommandKind::Density => run_density(cfg, &pool, &hash, &mut notes),
    };
    let header = Header {
        version: version_string(),
        command: cfg.command.name().to_string(),
        config_hash: hash,
        seeds: cfg.seeds.clone(),
        notes,
    };
    Ok(Artifact { header, table, ok, failed })
}

/// Default solver options, re-exported for callers building configs in code.
pub fn default_solver() -> SolverOptions {
    SolverOptions::default()
}
