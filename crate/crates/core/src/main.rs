use std::fs;
use std::process::ExitCode;

use clap::Parser;

use sixvertex_q::cli::Args;
use sixvertex_q::verify::{dump_matrices, run_suite};

fn main() -> ExitCode {
    let config = match Args::parse().into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_suite(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = &config.dump_matrices {
        if let Err(e) = dump_matrices(&config, dir) {
            eprintln!("matrix dump failed: {e}");
        }
    }
    let json = report.to_json();
    match &config.out {
        Some(path) => {
            if let Err(e) = fs::write(path, json + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let failed: Vec<_> = report.suites.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        match (&r.residual, &r.error) {
            (_, Some(e)) => eprintln!("FAIL {} {}: {e}", r.name, r.params),
            (Some(v), None) => eprintln!("FAIL {} {}: residual {v:.3e} >= {:.0e}", r.name, r.params, r.tolerance),
            _ => eprintln!("FAIL {} {}", r.name, r.params),
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
