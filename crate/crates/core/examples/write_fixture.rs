//! Regenerates `fixtures/ratings.csv` from the built-in histograms.

use conjoint_core::ratings::{fixture, write_ratings_csv};

fn main() -> conjoint_core::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ratings.csv");
    let file = std::fs::File::create(&path)?;
    write_ratings_csv(file, &fixture::fixture_records())?;
    println!("wrote {}", path.display());
    Ok(())
}
