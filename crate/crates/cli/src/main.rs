use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use henonlab_cli::args::{Cli, Command};
use henonlab_cli::commands::{execute, Failure};
use henonlab_cli::manifest::{manifest_path, RunManifest, Versions};
use henonlab_cli::{serve, threads_from_env};

fn fail(f: &Failure) -> ExitCode {
    eprintln!("henonlab: {f}");
    ExitCode::from(f.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return fail(&Failure::Validation(e)),
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Failure::Other(e.to_string()));
        }
    }
    if let Command::Serve(s) = &cli.command {
        return match serve::run(s, threads) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => fail(&f),
        };
    }

    let start = Instant::now();
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    let path = cli.out.clone().unwrap_or_else(|| out.default_name.into());
    if let Err(e) = std::fs::write(&path, &out.artifact) {
        return fail(&Failure::Other(format!("writing {}: {e}", path.display())));
    }
    let status = if out.partial { 3 } else { 0 };
    let manifest = RunManifest {
        argv: std::env::args().collect(),
        config: &cli,
        artifact: path.clone(),
        partial: out.partial,
        exit_status: status,
        threads: rayon::current_num_threads(),
        versions: Versions::current(),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    text.push(b'\n');
    let mpath = manifest_path(&path);
    if let Err(e) = std::fs::write(&mpath, text) {
        return fail(&Failure::Other(format!("writing {}: {e}", mpath.display())));
    }
    print!("{}", out.summary);
    if out.partial {
        eprintln!(
            "henonlab: budget exhausted, partial result written to {}",
            path.display()
        );
    }
    ExitCode::from(status as u8)
}
