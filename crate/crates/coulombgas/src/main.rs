use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use coulombgas::config::{parse_config, Cli, ConfigError, Format};
use coulombgas::io::{write_csv, write_json};
use coulombgas::run::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match parse_config(&cli) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let art = match run(&cfg) {
        Ok(a) => a,
        Err(e) => return config_failure(&e),
    };
    let written = match &cfg.out {
        Some(p) => File::create(p).and_then(|f| emit(BufWriter::new(f), cfg.format, &art)),
        None => emit(io::stdout().lock(), cfg.format, &art),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    if art.failed > 0 {
        eprintln!("{} of {} tasks failed; see the status column", art.failed, art.failed + art.ok);
    }
    if art.ok == 0 && art.failed > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn emit<W: Write>(mut w: W, format: Format, art: &coulombgas::run::Artifact) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(&mut w, &art.header, &art.table)?,
        Format::Json => write_json(&mut w, &art.header, &art.table)?,
    }
    w.flush()
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}
