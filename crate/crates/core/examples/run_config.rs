//! Loads a TOML run config (default configs/flat.toml), runs it in-process
//! and prints the summary the `g2flow run` command writes to report.json.

use std::path::PathBuf;

use g2flow::cli::{execute, format_table, load_config, read_series, verify_all, SERIES_FILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/flat.toml")
        });
    let mut cfg = load_config(&path)?;
    cfg.output.dir = std::env::temp_dir().join(format!("g2flow-run-{}", std::process::id()));
    let out = execute(&cfg)?;
    let r = &out.report;
    println!("status {:?}, {} steps of {:.3e}", r.status, r.n_steps, r.dt);
    println!(
        "final t = {}, sup|T| = {:.3e}, Phi_N = {:.4}",
        r.last.t, r.last.torsion_sup, r.last.aggregates.phi_n
    );
    let rows = read_series(&cfg.output.dir.join(SERIES_FILE))?;
    println!(
        "{} time-series rows in {}",
        rows.len(),
        cfg.output.dir.display()
    );
    print!("{}", format_table(&verify_all()));
    std::fs::remove_dir_all(&cfg.output.dir)?;
    Ok(())
}
