//! The end-to-end pipeline: simulate count files, read them back, certify.
//!
//! cargo run --example pipeline -- [output dir]

use fano_steering::harness::{cmd_certify, cmd_simulate, ConfigFile, RunConfig};

fn main() -> fano_steering::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fanosteer-pipeline"));
    let text = format!(
        "sigma_plus = 1.0\nsigma_minus = 0.02\npixels_per_axis = 40\nwindow_pixels = 32\n\
         total_counts = 1000000\nseed = 7\noutput_dir = {:?}\n",
        dir.display().to_string()
    );
    let sim = cmd_simulate(&RunConfig::resolve(ConfigFile::parse(&text)?)?)?;
    println!(
        "wrote {} and {}",
        sim.position_path.display(),
        sim.momentum_path.display()
    );

    let record = cmd_certify(&RunConfig::load(&sim.config_path)?)?;
    for axis in [&record.position, &record.momentum].into_iter().flatten() {
        println!(
            "{:<8} eta {:.4} ({:?}), mu {:.5} from fits, {} kept counts",
            axis.label,
            axis.eta_used,
            axis.best_ordering,
            axis.mu,
            axis.kept_counts.unwrap_or(0)
        );
    }
    let c = &record.certificate;
    println!(
        "lhs {:.4}, rhs {:.4}, violation {:.4} bits: {}",
        c.lhs, c.rhs, c.violation, record.verdict
    );
    Ok(())
}
