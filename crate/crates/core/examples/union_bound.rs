//! Chernoff pairwise bound and BER union bound next to simulation.
//!
//! The bound is averaged over sampled channels after codebook selection,
//! using the two-entry effective channel `hᵀW`.

use ghcb::channel::{sample_channel, Rng};
use ghcb::codebook::{build_codebook, CodebookFamily, CodebookSpec};
use ghcb::metrics::{ber_union_bound, effective_norm, theta_sq_corrected, FeedbackBit, THETA_SQ_LITERAL};
use ghcb::sim::{run_sweep, select_precoder, SimConfig};
use ghcb::stbc::make_constellation;
use ghcb::{ComplexMatrix, ComplexScalar};

fn main() -> ghcb::Result<()> {
    let qam = make_constellation(4, true)?;
    let spec = CodebookSpec::new(CodebookFamily::GhcReal, 4, 2, 64);
    let cb = build_codebook(&spec)?;
    let eff: Vec<ComplexMatrix> = (0..1000)
        .map(|t| {
            let h = sample_channel(&mut Rng::new(3, t), 4);
            let (_, w) = select_precoder(&h, &cb)?;
            Ok(h.transpose().matmul(&w)?.transpose())
        })
        .collect::<ghcb::Result<_>>()?;

    let mut cfg = SimConfig::default_for(spec);
    cfg.snr_grid_db = vec![0.0, 5.0, 10.0, 15.0, 20.0];
    cfg.min_bit_errors = 100;
    cfg.max_trials = 1_000_000;
    let sim = run_sweep(&cfg)?;

    println!("{:>6} {:>12} {:>14} {:>14}", "snr", "simulated", "bound(1.618)", "bound(2.618)");
    for p in &sim.points {
        let lin = 10f64.powf(p.snr_db / 10.0);
        let avg = |theta_sq: f64| -> ghcb::Result<f64> {
            let mut s = 0.0;
            for h in &eff {
                s += ber_union_bound(&qam, h, lin, 2, theta_sq)?.raw;
            }
            Ok(s / eff.len() as f64)
        };
        println!(
            "{:>6.1} {:>12.3e} {:>14.3e} {:>14.3e}",
            p.snr_db,
            p.ber,
            avg(THETA_SQ_LITERAL)?,
            avg(theta_sq_corrected())?
        );
    }

    let h = ComplexMatrix::column_vector(&[ComplexScalar::new(1.0, 0.0), ComplexScalar::new(2.0, 0.0)]);
    let theta = ComplexScalar::new(THETA_SQ_LITERAL.sqrt(), 0.0);
    println!(
        "\neffective norm for h = [1, 2]: correct {:.3}, incorrect {:.3}",
        effective_norm(&h, theta, FeedbackBit::Correct)?,
        effective_norm(&h, theta, FeedbackBit::Incorrect)?
    );
    Ok(())
}
