//! Perfect-feedback BER curves for GHC (real) and DFTC, their array gain at
//! 1e-3, and CSV output.
//!
//! ```text
//! cargo run --release --example ber_sweep [out_dir]
//! ```

use ghcb::codebook::{CodebookFamily, CodebookSpec};
use ghcb::sim::{array_gain, run_sweep_with, SimConfig};

fn main() -> ghcb::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let mut results = Vec::new();
    for family in [CodebookFamily::GhcReal, CodebookFamily::Dftc] {
        let mut cfg = SimConfig::default_for(CodebookSpec::new(family, 4, 2, 64));
        cfg.snr_grid_db = (0..=9).map(|k| 2.0 * k as f64).collect();
        cfg.min_bit_errors = 100;
        cfg.max_trials = 2_000_000;
        cfg.seed = 7;
        let progress = |snr: f64, trials: u64, errors: u64| {
            eprint!("\r{:<12} {snr:>4} dB  trials {trials:>8}  errors {errors:>6}", family.as_str());
        };
        let r = run_sweep_with(&cfg, None, Some(&progress))?;
        eprintln!();
        println!("{} (column gain {:.3}, {:.1} s)", family.as_str(), r.precoder_column_gain, r.wallclock);
        print!("{}", r.to_csv());
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.csv", family.slug())), r.to_csv())?;
        }
        results.push(r);
    }
    let gain = array_gain(&results[0], &results[1], 1e-3)?;
    println!("array gain of GHC over DFTC at BER 1e-3: {gain:.2} dB");
    Ok(())
}
