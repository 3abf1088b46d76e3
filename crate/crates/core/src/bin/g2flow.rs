use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use g2flow::cli::{self, CliError, Outcome, RunStatus};

#[derive(Parser)]
#[command(
    name = "g2flow",
    version,
    about = "Modified Laplacian coflow on the flat 7-torus"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config from its initial data.
    Run { config: PathBuf },
    /// Run the built-in numerical self-checks.
    Verify,
    /// Continue a run from a checkpoint.
    Resume {
        checkpoint: PathBuf,
        config: PathBuf,
    },
    /// Fit the factorial derivative bound to each row of a time series.
    Fit { timeseries: PathBuf },
}

fn finish(out: Outcome) -> ExitCode {
    let r = &out.report;
    match &r.status {
        RunStatus::Completed => println!(
            "completed {} steps to t = {} (dt = {:e}); sup Lambda = {:e}, Phi_N = {}",
            r.last.step, r.last.t, r.dt, r.last.lambda_sup, r.last.aggregates.phi_n
        ),
        RunStatus::Failed { step, reason } => eprintln!("run stopped at step {step}: {reason}"),
    }
    if let Some(d) = r.route_discrepancy {
        println!("route discrepancy {d:e}");
    }
    if let Some(f) = &r.fit {
        println!("analyticity fit: C = {:e}, L = {:e}", f.c_fit, f.l_fit);
    }
    println!("outputs in {}", r.config.output.dir.display());
    ExitCode::from(out.exit_code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result: Result<ExitCode, CliError> = (|| match args.command {
        Command::Run { config } => Ok(finish(cli::execute(&cli::load_config(&config)?)?)),
        Command::Resume { checkpoint, config } => Ok(finish(cli::resume(
            &checkpoint,
            &cli::load_config(&config)?,
        )?)),
        Command::Verify => {
            let checks = cli::verify_all();
            print!("{}", cli::format_table(&checks));
            Ok(if checks.iter().all(|c| c.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Fit { timeseries } => {
            println!("step,t,c_fit,l_fit,orders,consistent,note");
            for row in cli::read_series(&timeseries)? {
                match row.fit() {
                    Ok(f) if f.degenerate => println!(
                        "{},{},0,0,{},true,all entries zero",
                        row.step, row.t, f.samples_used
                    ),
                    Ok(f) => println!(
                        "{},{},{:e},{:e},{},{},",
                        row.step, row.t, f.c_fit, f.l_fit, f.samples_used, f.consistent
                    ),
                    Err(e) => println!("{},{},,,,,{e}", row.step, row.t),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    })();
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
