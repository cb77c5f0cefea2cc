//! Build every codebook family at the reference size, save one to disk and
//! read it back.
//!
//! ```text
//! cargo run --example codebook_design [out.ghcb]
//! ```

use ghcb::codebook::{build_codebook, load_codebook, save_codebook, CodebookFamily, CodebookSpec};
use ghcb::metrics::min_chordal_distance;

fn main() -> ghcb::Result<()> {
    for family in CodebookFamily::ALL {
        let spec = CodebookSpec::new(family, 4, 2, 64);
        let cb = build_codebook(&spec)?;
        let w1 = &cb.matrices()[0];
        let col_gain = w1.frobenius_norm_sq() / 2.0;
        // Six precoders cover the distinct column subsets; the rest are
        // scalar rotations of those, so the full codebook's MCD collapses.
        let head = build_codebook(&CodebookSpec::new(family, 4, 2, 6))?;
        println!(
            "{:<12} L={} column gain={:.4} MCD(first 6)={:.4} MCD(all)={:.4}",
            family.as_str(),
            cb.len(),
            col_gain,
            min_chordal_distance(&head)?.value,
            min_chordal_distance(&cb)?.value,
        );
    }

    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("ghc-real.ghcb").display().to_string());
    let cb = build_codebook(&CodebookSpec::new(CodebookFamily::GhcReal, 4, 2, 64))?;
    save_codebook(&cb, &path)?;
    assert_eq!(load_codebook(&path)?, cb);
    println!("wrote and re-read {path}");
    println!("W_1 =\n{:?}", cb.get(1).unwrap());
    Ok(())
}
