//! Command-line front end: simulate, batch, audit, witness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rheo::scenario::{
    audit_csv, gnuplot_script, run_batch, run_scenario, write_atomic, Manifest, Scenario,
};
use rheo::thermo::negative_dissipation_witness;
use rheo::{Error, MaterialParams, ModelKind, SymMat3};

const EXIT_INVALID: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rheo",
    version,
    about = "Viscoelastic internal-variable simulator and second-law auditor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write `<name>.csv` and `<name>.summary.json`.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write a gnuplot script `<name>.gp`.
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Run every scenario of a manifest.
    Batch {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Recompute the sign and PSD events of a trajectory CSV.
    Audit { csv: PathBuf },
    /// Search for a state with negative dissipation at a given initial value.
    Witness {
        #[arg(long, value_enum)]
        model: WitnessModel,
        /// Six entries (11, 22, 33, 12, 13, 23).
        #[arg(long, num_args = 6, allow_negative_numbers = true, required = true)]
        xi0: Vec<f64>,
        /// Exponent for `--model nl`.
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 10.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.1)]
        eta_s: f64,
        #[arg(long, default_value_t = 1.9)]
        eta_p: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessModel {
    Zj,
    Oa,
    Ob,
    Nl,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 1,
                _ => EXIT_INVALID,
            })
        }
    }
}

fn run(cmd: Command) -> rheo::Result<u8> {
    match cmd {
        Command::Simulate {
            scenario,
            out,
            emit_gnuplot,
        } => {
            let mut s = Scenario::load(&scenario)?;
            s.apply_seed_env()?;
            let result = run_scenario(&s)?;
            std::fs::create_dir_all(&out)?;
            write_outputs(
                &out,
                &s,
                &result.csv,
                &result.summary.to_json(),
                emit_gnuplot,
            )?;
            println!("{}", result.summary.to_json());
            Ok(if result.summary.blowup_time.is_some() {
                EXIT_BLOWUP
            } else {
                0
            })
        }
        Command::Batch {
            manifest,
            out,
            jobs,
            emit_gnuplot,
        } => {
            let mut scenarios = Manifest::load(&manifest)?;
            for s in &mut scenarios {
                s.apply_seed_env()?;
            }
            let results = run_batch(&scenarios, jobs.max(1));
            std::fs::create_dir_all(&out)?;
            let mut code = 0;
            for (s, r) in scenarios.iter().zip(&results) {
                match (&r.summary, &r.csv) {
                    (Some(summary), Some(csv)) => {
                        write_outputs(&out, s, csv, &summary.to_json(), emit_gnuplot)?;
                        if summary.blowup_time.is_some() && code == 0 {
                            code = EXIT_BLOWUP;
                        }
                    }
                    _ => {
                        eprintln!("{}: {}", r.name, r.error.as_deref().unwrap_or("failed"));
                        code = EXIT_INVALID;
                    }
                }
            }
            let index = serde_json::to_string_pretty(&results).expect("serializable");
            write_atomic(&out.join("batch_summary.json"), &index)?;
            println!("{index}");
            Ok(code)
        }
        Command::Audit { csv } => {
            let report = audit_csv(&std::fs::read_to_string(&csv)?)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable")
            );
            Ok(0)
        }
        Command::Witness {
            model,
            xi0,
            k,
            lambda1,
            eta_s,
            eta_p,
            mu,
        } => {
            let model = match model {
                WitnessModel::Zj => ModelKind::ZarembaJaumann,
                WitnessModel::Oa => ModelKind::OldroydA,
                WitnessModel::Ob => ModelKind::OldroydB,
                WitnessModel::Nl => ModelKind::NonlinearOldroydB { k },
            };
            model.validate()?;
            let p = MaterialParams::new(lambda1, eta_s, eta_p, mu)?;
            let xi0 = SymMat3([xi0[0], xi0[1], xi0[2], xi0[3], xi0[4], xi0[5]]);
            let w = negative_dissipation_witness(model, &xi0, &p)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&w).expect("serializable")
            );
            Ok(0)
        }
    }
}

fn write_outputs(
    dir: &Path,
    s: &Scenario,
    csv: &str,
    summary: &str,
    gnuplot: bool,
) -> rheo::Result<()> {
    write_atomic(&dir.join(format!("{}.csv", s.name)), csv)?;
    write_atomic(&dir.join(format!("{}.summary.json", s.name)), summary)?;
    if gnuplot {
        let script = gnuplot_script(&s.name, &s.columns()?);
        write_atomic(&dir.join(format!("{}.gp", s.name)), &script)?;
    }
    Ok(())
}
