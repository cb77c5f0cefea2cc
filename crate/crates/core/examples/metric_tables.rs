//! Minimum chordal distance and minimum determinant for every family.

use ghcb::codebook::{build_codebook, subset_count, CodebookFamily, CodebookSpec};
use ghcb::metrics::{min_chordal_distance, min_determinant};

fn main() -> ghcb::Result<()> {
    let l = subset_count(4, 2);
    println!("{:<12} {:>7} {:>9} {:>9}", "family", "MCD", "MD b=4", "MD b=6");
    for family in CodebookFamily::ALL {
        let cb = build_codebook(&CodebookSpec::new(family, 4, 2, l))?;
        let mcd = min_chordal_distance(&cb)?;
        let md4 = min_determinant(&cb, 4)?;
        let md6 = min_determinant(&cb, 6)?;
        println!(
            "{:<12} {:>7.4} {:>9.4} {:>9.4}",
            family.as_str(),
            mcd.value,
            md4.reported,
            md6.reported
        );
    }
    let cb = build_codebook(&CodebookSpec::new(CodebookFamily::GhcReal, 4, 2, l))?;
    print!("\n{}", min_determinant(&cb, 4)?.to_kv());
    Ok(())
}
