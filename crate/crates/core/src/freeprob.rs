//! Free-probability tools: the Green function of a uniform spectrum plus a
//! Wigner matrix, density extraction, Tricomi equilibrium densities, moments of
//! the arcsine law, and potentials recovered from densities.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::Potential;
use crate::error::{invalid, Error, Result};
use crate::math::{self, PI};

/// Parameters of the Tricomi solution. `g = (G₋₁, G₀, G₁, G₂, G₃)` are the
/// coefficients of `G′(x) = G₋₁/x + G₀ + G₁x + G₂x² + G₃x³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TricomiInput {
    pub g: [f64; 5],
    pub a: f64,
    pub b: f64,
    pub c: TricomiConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TricomiConstant {
    Value(f64),
    Normalize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityKind {
    /// Semicircle of the given variance.
    Semicircle { variance: f64 },
    /// Marchenko–Pastur with ratio `α ∈ (0, 1]`, mean 1 and variance `α`.
    MarchenkoPastur { alpha: f64 },
    Uniform { a: f64, b: f64 },
    /// Tricomi solution with `c` already resolved to a value.
    Tricomi { g: [f64; 5], c: f64 },
    /// Tabulated values; linear between nodes, or cubic Hermite when slopes
    /// are given.
    Sampled { grid: Vec<f64>, values: Vec<f64>, slopes: Option<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub kind: DensityKind,
    pub support: (f64, f64),
    /// Total mass as computed at construction.
    pub mass: f64,
}

/// Mass tolerance for sampled densities.
pub const MASS_TOL: f64 = 2e-3;

impl Density {
    pub fn semicircle(variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(invalid("semicircle variance must be positive"));
        }
        let r = 2.0 * math::sqrt(variance);
        Ok(Density { kind: DensityKind::Semicircle { variance }, support: (-r, r), mass: 1.0 })
    }

    pub fn marchenko_pastur(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("Marchenko-Pastur ratio must lie in (0, 1]"));
        }
        let sa = math::sqrt(alpha);
        Ok(Density {
            kind: DensityKind::MarchenkoPastur { alpha },
            support: ((1.0 - sa) * (1.0 - sa), (1.0 + sa) * (1.0 + sa)),
            mass: 1.0,
        })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(invalid("need a < b"));
        }
        Ok(Density { kind: DensityKind::Uniform { a, b }, support: (a, b), mass: 1.0 })
    }

    /// Tabulated density evaluated linearly between nodes.
    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid, &values, 2)?;
        let mass = math::trapezoid(&grid, &values);
        let support = (grid[0], grid[grid.len() - 1]);
        Ok(Density { kind: DensityKind::Sampled { grid, values, slopes: None }, support, mass })
    }

    pub fn normalization_ok(&self) -> bool {
        (self.mass - 1.0).abs() <= MASS_TOL
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if !(x > a && x < b) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Semicircle { variance } => {
                math::sqrt((4.0 * variance - x * x).max(0.0)) / (2.0 * PI * variance)
            }
            DensityKind::MarchenkoPastur { alpha } => math::sqrt(((b - x) * (x - a)).max(0.0)) / (2.0 * PI * alpha * x),
            DensityKind::Uniform { .. } => 1.0 / (b - a),
            DensityKind::Tricomi { g, c } => tricomi_eval(g, *c, a, b, x),
            DensityKind::Sampled { grid, values, slopes } => {
                let i = grid.partition_point(|&t| t <= x).clamp(1, grid.len() - 1) - 1;
                let h = grid[i + 1] - grid[i];
                let u = (x - grid[i]) / h;
                let v = match slopes {
                    None => values[i] + u * (values[i + 1] - values[i]),
                    Some(d) => {
                        let (u2, u3) = (u * u, u * u * u);
                        (2.0 * u3 - 3.0 * u2 + 1.0) * values[i]
                            + (u3 - 2.0 * u2 + u) * h * d[i]
                            + (-2.0 * u3 + 3.0 * u2) * values[i + 1]
                            + (u3 - u2) * h * d[i + 1]
                    }
                };
                v.max(0.0)
            }
        }
    }

    /// Distribution function by Gauss–Legendre on `θ` with `t = m − s cos θ`,
    /// exact enough for closed kinds; cumulative trapezoid for sampled ones.
    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return self.mass;
        }
        match &self.kind {
            DensityKind::Sampled { grid, .. } => {
                let mut acc = 0.0;
                for w in grid.windows(2) {
                    if w[1] <= x {
                        acc += 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1]));
                    } else {
                        acc += 0.5 * (x - w[0]) * (self.eval(w[0]) + self.eval(x));
                        break;
                    }
                }
                acc
            }
            _ => {
                let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
                let th_x = acos_clamped((m - x) / s);
                let (nodes, weights) = math::gauss_legendre_on(400, 0.0, th_x);
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&th, w)| w * s * math::sin(th) * self.eval(m - s * math::cos(th)))
                    .sum()
            }
        }
    }

    /// Sup over samples of `|F_emp − F|`, checking both sides of each jump.
    pub fn kolmogorov_distance(&self, samples: &[f64]) -> f64 {
        let mut xs = samples.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = self.cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn acos_clamped(x: f64) -> f64 {
    libm::acos(x.clamp(-1.0, 1.0))
}

fn check_grid(grid: &[f64], values: &[f64], min: usize) -> Result<()> {
    if grid.len() != values.len() || grid.len() < min {
        return Err(Error::InvalidArgument(format!("need at least {min} points with matching lengths")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("density values must be finite"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Green function of Y = √λ S + ξ, S uniform on [−√3, √3]

fn green_eq(a: f64, g: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let w = g * a;
    let one = Complex64::new(1.0, 0.0);
    if w.norm() < 1e-4 {
        // a coth(a g) = 1/g + a² g/3 − a⁴ g³/45 + ...
        let (a2, a4) = (a * a, a * a * a * a);
        let f = one / g + g * (a2 / 3.0) - g * g * g * (a4 / 45.0) + g - z;
        let df = -one / (g * g) + a2 / 3.0 - g * g * (a4 / 15.0) + one;
        (f, df)
    } else {
        let coth = one / w.tanh();
        let f = coth * a + g - z;
        let df = one + (one - coth * coth) * (a * a);
        (f, df)
    }
}

/// Newton from `init` on `z = √(3λ) coth(G√(3λ)) + G`. Returns `G` and the
/// final residual; the branch is not checked.
pub fn newton_green(lambda: f64, z: Complex64, init: Complex64) -> Result<(Complex64, f64)> {
    let a = math::sqrt(3.0 * lambda);
    let mut g = init;
    let (mut f, mut df) = green_eq(a, g, z);
    for iter in 0..200 {
        let r = f.norm();
        if r <= 1e-13 * z.norm().max(1.0) * 0.01 || !r.is_finite() {
            break;
        }
        let step = f / df;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = g - step * t;
            let (fc, dfc) = green_eq(a, cand, z);
            if fc.norm() < r || (t < 1e-6 && fc.norm().is_finite()) {
                let small = (cand - g).norm() <= 1e-16 * g.norm().max(1e-300);
                g = cand;
                f = fc;
                df = dfc;
                accepted = true;
                if small {
                    break;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iters: iter, residual: r });
        }
    }
    let r = f.norm();
    if !(r < 1e-12) {
        return Err(Error::NoConvergence { iters: 200, residual: r });
    }
    Ok((g, r))
}

/// Semicircle Green function of variance `v`, branch with `G ~ 1/z`.
pub fn semicircle_green(v: f64, z: Complex64) -> Complex64 {
    let r = 2.0 * math::sqrt(v);
    let sq = (z - r).sqrt() * (z + r).sqrt();
    (z - sq) / (2.0 * v)
}

fn stieltjes_branch(g: Complex64, z: Complex64) -> bool {
    g.im * z.im <= 1e-14 * g.norm() * z.norm().max(1.0)
}

/// Green function of `ρ_Y` at `z` (not on the real support), trying `init`
/// first, then the semicircle of variance `1 + λ`, then fixed imaginary starts.
pub fn solve_green_from(lambda: f64, z: Complex64, init: Option<Complex64>) -> Result<Complex64> {
    if !(lambda >= 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("need lambda >= 0 and finite z"));
    }
    let sgn = if z.im > 0.0 { -1.0 } else { 1.0 };
    let mut starts: Vec<Complex64> = Vec::new();
    starts.extend(init);
    starts.push(semicircle_green(1.0 + lambda, z));
    starts.push(Complex64::new(0.0, 0.2 * sgn));
    starts.push(Complex64::new(0.1, 0.5 * sgn));
    starts.push(Complex64::new(-0.1, 0.5 * sgn));
    let mut last = Error::NoConvergence { iters: 0, residual: f64::INFINITY };
    let mut k = 0;
    while k < starts.len() {
        match newton_green(lambda, z, starts[k]) {
            Ok((g, _)) if stieltjes_branch(g, z) => return Ok(g),
            Ok((g, r)) => {
                // wrong sheet: its mirror image is usually close to the right root
                if k < 8 {
                    starts.insert(k + 1, Complex64::new(g.re, -g.im));
                }
                last = Error::Breakdown(format!("only non-Stieltjes roots found near z = {z} (residual {r:e})"));
            }
            Err(e) => last = e,
        }
        k += 1;
    }
    Err(last)
}

pub fn solve_green_uniform_plus_wigner(lambda: f64, z: Complex64) -> Result<Complex64> {
    solve_green_from(lambda, z, None)
}

/// Output of [`density_from_green`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenDensity {
    pub density: Density,
    /// Grid points where no Stieltjes root was found; they are left out.
    pub dropped: Vec<f64>,
    /// `max |ρ_ε − ρ_{2ε}|` over the grid.
    pub richardson_gap: f64,
}

/// `ρ_Y(x) = |Im G(x − iε)|/π` along `grid`, continuing each root from the
/// previous grid point.
pub fn density_from_green(lambda: f64, grid: &[f64], eps: f64) -> Result<GreenDensity> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be strictly increasing with at least two points"));
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut rho = Vec::with_capacity(grid.len());
    let mut dropped = Vec::new();
    let mut gap: f64 = 0.0;
    let (mut prev, mut prev2) = (None, None);
    for &x in grid {
        let g1 = solve_green_from(lambda, Complex64::new(x, -eps), prev);
        let g2 = solve_green_from(lambda, Complex64::new(x, -2.0 * eps), prev2);
        match (g1, g2) {
            (Ok(g1), Ok(g2)) => {
                let (r1, r2) = (g1.im.abs() / PI, g2.im.abs() / PI);
                gap = gap.max((r1 - r2).abs());
                xs.push(x);
                rho.push(r1);
                prev = Some(g1);
                prev2 = Some(g2);
            }
            _ => {
                dropped.push(x);
                prev = None;
                prev2 = None;
            }
        }
    }
    let density = Density::sampled(xs, rho)?;
    Ok(GreenDensity { density, dropped, richardson_gap: gap })
}

/// `R(z) = √(3λ) coth(z√(3λ)) − 1/z`, the R-transform of the uniform law on
/// `[−√(3λ), √(3λ)]`.
pub fn r_transform_uniform(lambda: f64, z: Complex64) -> Result<Complex64> {
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be non-negative"));
    }
    let a = math::sqrt(3.0 * lambda);
    let w = z * a;
    if w.norm() < 1e-4 {
        // a coth(w) − 1/z = a² z/3 − a⁴ z³/45 + ...
        return Ok(z * (a * a / 3.0) - z * z * z * (a * a * a * a / 45.0));
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(1.0, 0.0) / w.tanh() * a - Complex64::new(1.0, 0.0) / z)
}

// ---------------------------------------------------------------------------
// Tricomi formula and the arcsine law

fn sgn_term(a: f64, b: f64) -> f64 {
    (if 0.0 < a { 1.0 } else { 0.0 }) - (if 0.0 > b { 1.0 } else { 0.0 })
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a < b && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(invalid("need finite a < b"))
    }
}

/// `∫ (dx/π) √((x−a)(b−x)) x^k` on `[a, b]`.
fn semicircle_weight_moment(a: f64, b: f64, k: u32) -> f64 {
    let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for l in (0..=k).step_by(2) {
        let w = binom(l, l / 2) / math::powi(2.0, l as i32) - binom(l + 2, l / 2 + 1) / math::powi(2.0, l as i32 + 2);
        acc += binom(k, l) * math::powi(s, l as i32) * math::powi(m, (k - l) as i32) * w;
    }
    s * s * acc
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `I_p(y) = PV ∫ (dx/π) √((x−a)(b−x)) x^p / (y − x)` for `p ∈ [−1, 3]`.
pub fn tricomi_ip(y: f64, a: f64, b: f64, p: i32) -> Result<f64> {
    check_interval(a, b)?;
    let m = 0.5 * (a + b);
    let ind = (if y < a { 1.0 } else { 0.0 }) - (if y > b { 1.0 } else { 0.0 });
    let outer = if ind != 0.0 { ind * math::sqrt((y - a) * (y - b)) } else { 0.0 };
    let i0 = (y - m) + outer;
    match p {
        -1 => {
            if a <= 0.0 && 0.0 <= b {
                return Err(Error::Domain(0.0));
            }
            if y == 0.0 {
                return Err(Error::Domain(y));
            }
            Ok(1.0 + outer / y - sgn_term(a, b) * math::sqrt(a * b) / y)
        }
        0..=3 => {
            let p = p as u32;
            let mut v = math::powi(y, p as i32) * i0;
            for k in 0..p {
                v -= math::powi(y, (p - 1 - k) as i32) * semicircle_weight_moment(a, b, k);
            }
            Ok(v)
        }
        _ => Err(Error::Range(format!("I_p is implemented for p in -1..=3, got {p}"))),
    }
}

/// `d_p = ∫ y^p dy / (π√((y−a)(b−y)))`, `p ≥ −1`.
pub fn arcsine_moments(a: f64, b: f64, p: i32) -> Result<f64> {
    check_interval(a, b)?;
    if p == -1 {
        if a <= 0.0 && 0.0 <= b {
            return Err(Error::Domain(0.0));
        }
        return Ok(sgn_term(a, b) / math::sqrt(a * b));
    }
    if p < -1 {
        return Err(Error::Range(format!("d_p needs p >= -1, got {p}")));
    }
    let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
    let p = p as u32;
    let mut acc = 0.0;
    for l in (0..=p).step_by(2) {
        acc += binom(p, l) * math::powi(m, (p - l) as i32) * math::powi(s, l as i32) * binom(l, l / 2) / math::powi(2.0, l as i32);
    }
    Ok(acc)
}

/// Numerator polynomial coefficients `(κ₀, κ₁, κ₂, κ₃, κ₄)` of the in-support
/// Tricomi expression, without `C` and the `G₋₁ √(ab)/y` term.
fn tricomi_poly(g: &[f64; 5], a: f64, b: f64) -> [f64; 5] {
    let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
    let s2 = s * s;
    let [gm1, g0, g1, g2, g3] = *g;
    [
        -gm1 + g0 * m + g1 * s2 / 2.0 + g2 * m * s2 / 2.0 + g3 * (m * m * s2 / 2.0 + s2 * s2 / 8.0),
        -g0 + g1 * m + g2 * s2 / 2.0 + g3 * m * s2 / 2.0,
        -g1 + g2 * m + g3 * s2 / 2.0,
        -g2 + g3 * m,
        -g3,
    ]
}

fn tricomi_eval(g: &[f64; 5], c: f64, a: f64, b: f64, y: f64) -> f64 {
    let k = tricomi_poly(g, a, b);
    let mut num = c + k[0] + y * (k[1] + y * (k[2] + y * (k[3] + y * k[4])));
    if g[0] != 0.0 {
        num += g[0] * sgn_term(a, b) * math::sqrt(a * b) / y;
    }
    num / (PI * math::sqrt((y - a) * (b - y)))
}

/// Equilibrium density on `[a, b]` from the Tricomi formula. With
/// [`TricomiConstant::Normalize`], `C` is fixed from the arcsine moments so that
/// the mass is exactly one.
pub fn tricomi_density(input: &TricomiInput) -> Result<Density> {
    let (a, b) = (input.a, input.b);
    check_interval(a, b)?;
    if input.g[0] != 0.0 && a <= 0.0 && 0.0 <= b {
        return Err(invalid("a 1/x term in G' needs 0 outside [a, b]"));
    }
    let k = tricomi_poly(&input.g, a, b);
    // mass without C: Σ κ_p d_p, plus G₋₁ sgn √(ab) d₋₁ = G₋₁
    let mut rest = input.g[0];
    for (p, kp) in k.iter().enumerate() {
        rest += kp * arcsine_moments(a, b, p as i32)?;
    }
    let c = match input.c {
        TricomiConstant::Value(c) => c,
        TricomiConstant::Normalize => 1.0 - rest,
    };
    let mass = c + rest;
    let s = 0.5 * (b - a);
    let margin = 1e-6 * s;
    let n = 2000;
    for i in 0..=n {
        let y = a + margin + (b - a - 2.0 * margin) * i as f64 / n as f64;
        let v = tricomi_eval(&input.g, c, a, b, y);
        if v < -1e-12 * (1.0 + v.abs()) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("Tricomi density is negative at y = {y}: {v:e}")));
        }
    }
    Ok(Density { kind: DensityKind::Tricomi { g: input.g, c }, support: (a, b), mass })
}

// ---------------------------------------------------------------------------
// Potentials from densities and interpolation

/// `V(x)` tabulated on a grid inside the support of a density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPotential {
    pub grid: Vec<f64>,
    /// `V`, with `V(grid[0]) = 0`.
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

impl TabulatedPotential {
    /// Least-squares view of the tabulated values as `V` plus a constant.
    pub fn compare_up_to_constant(&self, pot: &Potential) -> Result<f64> {
        let diffs: Vec<f64> = self.grid.iter().zip(&self.v).map(|(&x, v)| Ok(v - pot.value(x)?)).collect::<Result<_>>()?;
        let c = math::mean(&diffs);
        Ok(diffs.iter().fold(0.0, |m: f64, d| m.max((d - c).abs())))
    }
}

/// Principal-value Hilbert transform `H(x) = PV ∫ ρ(t)/(x − t) dt` for `x`
/// inside the support, by subtracting `ρ(x)` and integrating in `θ` with
/// `t = m − s cos θ`.
pub fn hilbert_transform(rho: &Density, x: f64, nodes: usize) -> Result<f64> {
    let (a, b) = rho.support;
    if !(x > a && x < b) {
        return Err(Error::Domain(x));
    }
    let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
    let rx = rho.eval(x);
    let (th, w) = math::gauss_legendre_on(nodes, 0.0, PI);
    let mut acc = 0.0;
    for (&t, wt) in th.iter().zip(&w) {
        let u = m - s * math::cos(t);
        let d = x - u;
        if d == 0.0 {
            continue;
        }
        acc += wt * s * math::sin(t) * (rho.eval(u) - rx) / d;
    }
    let v = acc + rx * math::ln((x - a) / (b - x));
    if !v.is_finite() {
        return Err(Error::NoConvergence { iters: nodes, residual: v });
    }
    Ok(v)
}

/// `V′ = 4H` and `V = ∫ V′` on `grid` (inside the support). The constant 4
/// sends the semicircle of variance 1 to `V(x) = x²`; see the crate README for
/// how this relates to β.
pub fn potential_from_density(rho: &Density, grid: &[f64]) -> Result<TabulatedPotential> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be strictly increasing with at least two points"));
    }
    let dv: Vec<f64> = grid.iter().map(|&x| Ok(4.0 * hilbert_transform(rho, x, 4000)?)).collect::<Result<_>>()?;
    // integrate V′ with cubic Hermite cells using the end slopes of V′ from
    // finite differences, i.e. Simpson-like accuracy
    let d2 = fd_slopes(grid, &dv);
    let mut v = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        let h = grid[i] - grid[i - 1];
        v[i] = v[i - 1] + h * (dv[i - 1] + dv[i]) / 2.0 + h * h * (d2[i - 1] - d2[i]) / 12.0;
    }
    Ok(TabulatedPotential { grid: grid.to_vec(), v, dv })
}

/// Three-point slopes on a non-uniform grid, one-sided at the ends.
fn fd_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let d = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![d, d];
    }
    let three = |i0: usize, at: usize| {
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let (y0, y1, y2) = (y[i0], y[i0 + 1], y[i0 + 2]);
        let t = x[at];
        y0 * ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2))
            + y1 * ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2))
            + y2 * ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                three(0, 0)
            } else if i == n - 1 {
                three(n - 3, n - 1)
            } else {
                three(i - 1, i)
            }
        })
        .collect()
}

/// Cubic Hermite interpolant through `(x, ρ)` with finite-difference slopes.
/// The recorded mass is the exact integral of the interpolant.
pub fn interpolate_density(points: &[(f64, f64)]) -> Result<Density> {
    let grid: Vec<f64> = points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    check_grid(&grid, &values, 4)?;
    let d = fd_slopes(&grid, &values);
    let mut mass = 0.0;
    for i in 1..grid.len() {
        let h = grid[i] - grid[i - 1];
        mass += h * (values[i - 1] + values[i]) / 2.0 + h * h * (d[i - 1] - d[i]) / 12.0;
    }
    let support = (grid[0], grid[grid.len() - 1]);
    Ok(Density { kind: DensityKind::Sampled { grid, values, slopes: Some(d) }, support, mass })
}
