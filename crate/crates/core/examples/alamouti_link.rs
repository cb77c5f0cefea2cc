//! One precoded Alamouti block end to end: bits, QAM, codebook selection,
//! channel, combining and slicing.

use ghcb::channel::{apply_channel, sample_channel, Rng};
use ghcb::codebook::{build_codebook, CodebookFamily, CodebookSpec};
use ghcb::sim::select_precoder;
use ghcb::stbc::{alamouti_encode, make_constellation, ml_decode, modulate, precode};

fn main() -> ghcb::Result<()> {
    let qam = make_constellation(4, true)?;
    let cb = build_codebook(&CodebookSpec::new(CodebookFamily::GhcReal, 4, 2, 64))?;
    let mut rng = Rng::new(42, 0);

    let bits = rng.bits(8);
    let s = modulate(&bits, &qam)?;
    let h = sample_channel(&mut rng, 4);
    let (idx, w) = select_precoder(&h, &cb)?;
    let x = precode(&w, &alamouti_encode(s[0], s[1]))?;

    for snr_db in [5.0, 15.0, 30.0] {
        let y = apply_channel(&h, &x, snr_db, &mut rng)?;
        let h_eff = h.transpose().matmul(&w)?;
        let d = ml_decode(&y, &h_eff, &qam)?;
        let errors = bits.iter().zip(&d.bits).filter(|(a, b)| a != b).count();
        println!("precoder {idx:>2}  {snr_db:>4} dB  sent {bits:?}  got {:?}  ({errors} bit errors)", d.bits);
    }
    Ok(())
}
