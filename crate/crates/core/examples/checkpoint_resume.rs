//! Runs a small config with periodic checkpoints, resumes from the middle
//! one and checks that the final states agree bit for bit.

use g2flow::cli::{checkpoint_name, execute, parse_config, resume, Checkpoint, FINAL_CHECKPOINT};

const CONFIG: &str = r#"
t_end = 0.15
c_cfl = 0.01
route = "both"

[grid]
dims = [16, 1, 1, 1, 1, 1, 1]

[initial]
kind = "perturbation"
amplitude = 1e-2
modes = [1, 2]
seed = 7
axes = [1]

[monitors]
every = 20
fit_kmax = 0

[output]
checkpoint_every = 50
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = std::env::temp_dir().join(format!("g2flow-resume-{}", std::process::id()));
    let mut cfg = parse_config(CONFIG)?;
    cfg.output.dir = base.join("whole");
    let whole = execute(&cfg)?;
    println!(
        "uninterrupted run: {} steps, exit {}",
        whole.report.n_steps, whole.exit_code
    );

    let mid = cfg.output.dir.join(checkpoint_name(50));
    let ck = Checkpoint::load(&mid)?;
    println!(
        "checkpoint at step {}, t = {:.4}, {} psi fields",
        ck.step,
        ck.t,
        ck.psi.len()
    );

    let mut again = cfg.clone();
    again.output.dir = base.join("resumed");
    let resumed = resume(&mid, &again)?;
    let a = std::fs::read(cfg.output.dir.join(FINAL_CHECKPOINT))?;
    let b = std::fs::read(again.output.dir.join(FINAL_CHECKPOINT))?;
    println!(
        "resumed from step {:?}: final checkpoints identical = {}",
        resumed.report.resumed_from,
        a == b
    );
    std::fs::remove_dir_all(&base)?;
    Ok(())
}
