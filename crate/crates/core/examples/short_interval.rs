use muweyl::arith::MultiplicativeSpec;
use muweyl::stats::short_interval_stat;
use muweyl::torus::PolySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"])?; // sqrt(2) n^2
    let s = short_interval_stat(&poly, &MultiplicativeSpec::Moebius, 10_000, 21, 1)?;
    assert!((s - 1.515948285293e-1).abs() < 1e-9);
    println!("ok: S = {s:.12e}");
    Ok(())
}
