//! Config-driven runs, writing the same files as the `gpbt` binary.

use gp_backlund::config::ExperimentConfig;
use gp_backlund::experiment::{run_solve, run_transform, run_wavefunction};

const CONFIG: &str = "
params.n = 1
params.eta = 1.0
params.mu = 0.5
grid.x_min = 1.0
grid.x_max = 2.0
grid.points = 501
k_schedule = 0.25, 0.25
seed.kind = integrate
seed.x0 = 1.0
seed.r0 = 0.7
seed.rp0 = -0.2
outputs.solution_csv = seed.csv
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join("gpbt-example");
    let solve = run_solve(&cfg, &out)?;
    println!("seed residual {:.3e}", solve.checks[0].deviation);
    let transform = run_transform(&cfg, &out)?;
    for e in &transform.elements {
        println!("{}: K = {}, residual {:.3e}, fixed point {}", e.csv, e.k, e.residual_max, e.fixed_point);
    }
    run_wavefunction(&cfg, &out, &[0.0, 1.0])?;
    println!("files in {}", out.display());
    for entry in std::fs::read_dir(&out)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}
