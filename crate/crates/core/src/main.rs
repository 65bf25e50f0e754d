use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stlab::harness::{export, run_scenario, selftest, ScenarioSpec, SAMPLING_NOTE};
use stlab::target::{verify_certificate, Regime};
use stlab::visit::{
    boundary_witness_search, collapse_diagnostic, open_witness_search, BoundaryWitness, BoundaryWitnessParams,
    OpenWitness, OpenWitnessParams,
};
use stlab::{cb::fmt_real, Error};

#[derive(Parser)]
#[command(name = "stlab", version, about = "Shrinking-target first-visit experiments")]
struct Cli {
    /// Output directory for exported files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the scenario's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and export traces, classifications and a summary.
    Run { config: PathBuf },
    /// Check the separation certificate only.
    Verify { config: PathBuf },
    /// Search for first-visit witnesses near a preimage of a center.
    Witness {
        config: PathBuf,
        #[arg(long)]
        center: usize,
        #[arg(long)]
        m: u64,
    },
    /// Fraction of a ball covered by the balls of the centers it contains.
    Collapse {
        config: PathBuf,
        #[arg(long)]
        center: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-5)]
        grid_eps: f64,
    },
    /// Emit the scenario's centers table.
    Construct { config: PathBuf },
    /// Run the built-in invariant suite.
    Selftest,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Failed,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioSpec, Error> {
    let mut spec = ScenarioSpec::load(path)?;
    if let Some(s) = seed {
        spec.run.seed = s;
    }
    Ok(spec)
}

fn write_out(out: &Option<PathBuf>, name: &str, body: &str) -> Result<(), Error> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<Status, Error> {
    match cli.command {
        Command::Run { config } => {
            let spec = load(&config, cli.seed)?;
            let (family, result) = run_scenario(&spec, cli.threads)?;
            let exports = export(&result);
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("out"));
            exports.write_to(&dir)?;
            std::fs::write(dir.join("centers.txt"), family.to_text())?;
            print!("{}", exports.summary);
            eprintln!("wall clock {:.3} s, outputs in {}", result.wall_clock.as_secs_f64(), dir.display());
            Ok(Status::Ok)
        }
        Command::Verify { config } => {
            let spec = load(&config, cli.seed)?;
            let family = spec.target_family()?;
            let cert = verify_certificate(&family);
            write_out(&cli.out, "certificate.csv", &cert.to_csv())?;
            let min = cert.min_margin().map_or_else(|| "none".to_string(), fmt_real);
            println!("{} constraints, {} violated, min margin {min}", cert.constraints.len(), cert.violations());
            if let Some(v) = cert.first_violation() {
                println!("first violation: {} ({}, {}) margin {}", v.kind, v.i, v.j, fmt_real(v.margin));
            }
            if cert.verified() {
                Ok(Status::Ok)
            } else if spec.run.regime == Regime::SomewhereDense {
                println!("violations are expected for centers dense in an interval");
                Ok(Status::Ok)
            } else {
                Err(Error::Config("separation certificate fails".into()))
            }
        }
        Command::Witness { config, center, m } => {
            let spec = load(&config, cli.seed)?;
            let map = spec.dynamical_map()?;
            let family = spec.target_family()?;
            let seed = spec.run.seed;
            if center == 0 || center > family.len() {
                return Err(Error::Usage(format!("center {center} outside 1..={}", family.len())));
            }
            let found = if family.centers().level(center) == 0 {
                let params = OpenWitnessParams { seed, ..OpenWitnessParams::default() };
                match open_witness_search(&map, &family, center, m, &params)? {
                    OpenWitness::Found { n, center: c, radius, fraction } => {
                        println!("open witness: scale {n}, ball of radius {radius:e} around {:?}, {fraction} of samples in C_n", c.coords());
                        true
                    }
                    OpenWitness::Exhausted { best_n, best_radius, best_fraction } => {
                        println!("no open witness; best scale {best_n}, radius {best_radius:e}, fraction {best_fraction}");
                        false
                    }
                }
            } else {
                let params = BoundaryWitnessParams { seed, ..BoundaryWitnessParams::default() };
                match boundary_witness_search(&map, &family, center, m, &params)? {
                    BoundaryWitness::Found { n, target, points } => {
                        println!("boundary witnesses at scale {n} approaching {:?}", target.coords());
                        for (t, p) in points.iter().enumerate() {
                            println!("  t={} distance {:e} point {:?}", t + 1, p.dist(&target), p.coords());
                        }
                        true
                    }
                    BoundaryWitness::Exhausted { best_n, reached } => {
                        println!("no boundary witness; best scale {best_n} reached {reached} approach points");
                        false
                    }
                }
            };
            Ok(if found { Status::Ok } else { Status::Failed })
        }
        Command::Collapse { config, center, n, grid_eps } => {
            let spec = load(&config, cli.seed)?;
            let family = spec.target_family()?;
            let coverage = collapse_diagnostic(&family, center, n, grid_eps)?;
            println!("coverage {coverage:.6}");
            Ok(Status::Ok)
        }
        Command::Construct { config } => {
            let spec = load(&config, cli.seed)?;
            let table = stlab::harness::generate_centers(&spec)?.to_table();
            match &cli.out {
                Some(_) => write_out(&cli.out, "centers.txt", &table)?,
                None => print!("{table}"),
            }
            Ok(Status::Ok)
        }
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { Status::Ok } else { Status::Failed })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if matches!(cli.command, Command::Run { .. }) {
        eprintln!("note: {SAMPLING_NOTE}");
    }
    match execute(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
