//! Block-diagonal pattern of precoded Alamouti codewords.
//!
//! Golden-Hadamard precoding of the pair `(s, -s)` leaves every 2×2 block
//! with a zero diagonal; the rotated DFT precoder does not. For generic pairs
//! neither does, which the survey at the end shows.

use ghcb::codebook::{build_codebook, gh_matrix, CodebookFamily, CodebookSpec, GoldenCase};
use ghcb::metrics::{codeword_distortion, distortion_over_pairs};
use ghcb::stbc::{alamouti_encode, make_constellation, precode};

fn main() -> ghcb::Result<()> {
    let qam = make_constellation(4, true)?;
    let s = qam.points[5];

    let ghc = gh_matrix(2, GoldenCase::Real)?.select_columns(&[0, 1])?;
    let dftc = build_codebook(&CodebookSpec::new(CodebookFamily::Dftc, 4, 2, 64))?;
    let w3 = dftc.get(3).expect("third precoder");

    for (name, w) in [("GHC real", &ghc), ("DFTC i=3", w3)] {
        let x = precode(w, &alamouti_encode(s, -s))?;
        let p = codeword_distortion(&x)?;
        println!("{name}: s = {s:.4}");
        println!("  diag      {:?}", round(&p.diag_magnitudes));
        println!("  anti-diag {:?}", round(&p.anti_diag_magnitudes));
        println!("  distortion free: {}", p.is_distortion_free);
    }

    println!("\nall 256 symbol pairs:");
    for (name, w) in [("GHC real", &ghc), ("DFTC i=3", w3)] {
        let survey = distortion_over_pairs(w, &qam)?;
        println!(
            "  {name}: {}/{} distortion free, worst diagonal {:.4}",
            survey.distortion_free_pairs, survey.pairs, survey.max_diag_magnitude
        );
    }
    Ok(())
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
