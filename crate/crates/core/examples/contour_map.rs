//! Violation map over the applicable agreements, written as TSV, with the
//! zero and +-5 sigma level crossings at 10^4 counts per observable.
//!
//! cargo run --example contour_map -- [out.tsv]

use fano_steering::harness::save_contour;
use fano_steering::stats::contour_grid;
use fano_steering::DetectorGeometry;

fn main() -> fano_steering::Result<()> {
    let g = DetectorGeometry::from_rhs_bits(8.284, 256)?;
    let grid = contour_grid(&g, 0.997 * 0.92, 0.952, 61, Some((10_000, 10_000)))?;
    println!(
        "grid {:?}, violation at the measured point: {:.4} bits",
        grid.shape(),
        grid.violation_at(0.694, 0.751).unwrap_or(f64::NAN)
    );
    for (label, k) in [("zero", 0.0), ("+5 sigma", 5.0), ("-5 sigma", -5.0)] {
        let crossings = grid.level_crossings(0.0, k);
        let sample: Vec<String> = crossings
            .iter()
            .step_by((crossings.len() / 4).max(1))
            .map(|(x, k)| format!("({x:.3}, {k:.3})"))
            .collect();
        println!(
            "{label:<9} {:>3} crossings, e.g. {}",
            crossings.len(),
            sample.join(" ")
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        save_contour(&grid, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
