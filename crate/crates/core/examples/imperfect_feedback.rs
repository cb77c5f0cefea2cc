//! Delayed feedback: the transmitter selects from `αh + √(1−α²)e` with
//! `α = J₀(2π f_dT_c Δ)`, the receiver sees the true `h`.

use ghcb::channel::FeedbackModel;
use ghcb::codebook::{CodebookFamily, CodebookSpec};
use ghcb::sim::{run_sweep, SimConfig};

fn main() -> ghcb::Result<()> {
    for delta in [0.0, 4.0, 12.0, 20.0] {
        let fm = FeedbackModel::delayed(0.01, delta);
        println!("delta = {delta:>4}  alpha = {:.4}", fm.alpha()?);
    }

    let grid = vec![10.0, 14.0, 18.0];
    for family in CodebookFamily::ALL {
        let mut cfg = SimConfig::default_for(CodebookSpec::new(family, 4, 2, 64));
        cfg.snr_grid_db = grid.clone();
        cfg.min_bit_errors = 100;
        cfg.max_trials = 1_000_000;
        let perfect = run_sweep(&cfg)?;
        cfg.feedback = FeedbackModel::delayed(0.01, 12.0);
        let delayed = run_sweep(&cfg)?;
        let row: Vec<String> = perfect
            .points
            .iter()
            .zip(&delayed.points)
            .map(|(p, d)| format!("{:.2e} -> {:.2e}", p.ber, d.ber))
            .collect();
        println!("{:<12} {}", family.as_str(), row.join("   "));
    }
    Ok(())
}
