//! A fast self-check battery (a few seconds): every layer is exercised
//! against an independent reference — trial division for the sieves, the
//! closed-form binomial jump for streams, a from-scratch window sum for the
//! sliding estimator, and the geometric series for the rotation correlation.

use crate::CliError;
use muweyl::arith::{self, MultiplicativeSpec};
use muweyl::models::SwitchedOrbit;
use muweyl::quasi::{check_tr_lemma, QuasiEig};
use muweyl::stats::{
    kbsz_correlation, naive_short_interval_stat, short_interval_stat, BlockScheme, GapRule,
    TorusPhases,
};
use muweyl::torus::{
    poly_to_initial, AffineSkewMap, BinomialRow, Frac64, OrbitStream, PolySpec, TorusPoint,
};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn trial_division_mu_lambda(n: u64) -> (i8, i8) {
    let mut m = n;
    let mut omega = 0u32;
    let mut squarefree = true;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            omega += e;
            if e > 1 {
                squarefree = false;
            }
        }
        p += 1;
    }
    if m > 1 {
        omega += 1;
    }
    let lambda = if omega % 2 == 0 { 1 } else { -1 };
    let mu = if squarefree { lambda } else { 0 };
    (mu, lambda)
}

fn check_sieves() -> Result<(), String> {
    let hi = 20_001;
    let mu = arith::sieve_moebius(1, hi).map_err(|e| e.to_string())?;
    let lam = arith::sieve_liouville(1, hi).map_err(|e| e.to_string())?;
    let (mu, lam) = (mu.signs().unwrap(), lam.signs().unwrap());
    for n in 1..hi {
        let (m, l) = trial_division_mu_lambda(n);
        let i = (n - 1) as usize;
        if mu[i] != m || lam[i] != l {
            return Err(format!("sieve disagrees with trial division at n = {n}"));
        }
    }
    let mert = arith::mertens(1000).map_err(|e| e.to_string())?;
    if mert != 2 {
        return Err(format!("Mertens(1000) = {mert}, expected 2"));
    }
    Ok(())
}

fn check_stream_vs_jump() -> Result<(), String> {
    let poly = PolySpec::from_tokens(&["sqrt2", "1/3", "0", "1/7"]).map_err(|e| e.to_string())?;
    let (map, origin) = poly_to_initial(&poly);
    let mut stream = OrbitStream::new(map, &origin, 0).map_err(|e| e.to_string())?;
    let mut row = BinomialRow::new(map.dim());
    for n in 0..2000u64 {
        let jumped = map.jump_with_row(&origin, &row).map_err(|e| e.to_string())?;
        if stream.point_coords() != jumped.coords() {
            return Err(format!("stream and binomial jump disagree at n = {n}"));
        }
        stream.advance();
        row.advance();
    }
    Ok(())
}

fn check_tr_lemma_grid() -> Result<(), String> {
    let alpha = Frac64::from_rational(&muweyl::real::sqrt2());
    let map = AffineSkewMap::new(3, alpha).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..32 {
        let mut m: Vec<i64> = (0..3).map(|_| rng.gen_range(-20..=20)).collect();
        while m.iter().all(|&mi| mi == 0) {
            m = (0..3).map(|_| rng.gen_range(-20..=20)).collect();
        }
        let f = QuasiEig::new(m, Frac64::from_raw(rng.gen()));
        for r in 1..=8 {
            if !check_tr_lemma(&map, &f, r, 3).map_err(|e| e.to_string())? {
                return Err(format!("tr-lemma failed for r = {r}, f = {f:?}"));
            }
        }
    }
    Ok(())
}

fn check_sliding_window() -> Result<(), String> {
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).map_err(|e| e.to_string())?;
    let nu = MultiplicativeSpec::Moebius;
    let fast = short_interval_stat(&poly, &nu, 2000, 25, 2).map_err(|e| e.to_string())?;
    let naive = naive_short_interval_stat(&poly, &nu, 2000, 25).map_err(|e| e.to_string())?;
    if (fast - naive).abs() > 1e-9 {
        return Err(format!("sliding window drifted: fast {fast}, naive {naive}"));
    }
    Ok(())
}

fn check_switched_equal_seeds() -> Result<(), String> {
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).map_err(|e| e.to_string())?;
    let (map, base) = poly_to_initial(&poly);
    let scheme = BlockScheme::from_rule(&GapRule::Sqrt, 3000).map_err(|e| e.to_string())?;
    let k = scheme.max_blocks_within(3000);
    let orbit = SwitchedOrbit::new(map, scheme, vec![base.clone(); k])
        .map_err(|e| e.to_string())?;
    let count = orbit.coverage_end() - 1;
    let mut plain = OrbitStream::new(map, &base, 1).map_err(|e| e.to_string())?;
    for (n, y) in orbit.stream(count).map_err(|e| e.to_string())?.enumerate() {
        let x = plain.next().unwrap();
        if x != y {
            return Err(format!("switched orbit with equal seeds differs at n = {}", n + 1));
        }
    }
    Ok(())
}

fn check_rotation_correlation() -> Result<(), String> {
    let alpha = Frac64::from_raw(0x9E37_79B9_7F4A_7C15);
    let map = AffineSkewMap::new(1, alpha).map_err(|e| e.to_string())?;
    let source =
        TorusPhases::new(map, TorusPoint::zero(1)).map_err(|e| e.to_string())?;
    let n = 10_000u64;
    let (r, s) = (2u64, 3u64);
    let c = kbsz_correlation(&source, r, s, n, 2).map_err(|e| e.to_string())?;
    // geometric series for theta = (r - s) alpha, with N theta reduced
    // exactly on the grid before the only float exit
    let theta = alpha.mul_i64(r as i64 - s as i64);
    let z = Complex64::from_polar(1.0, TAU * theta.to_f64());
    let zn = Complex64::from_polar(1.0, TAU * theta.mul_u64(n).to_f64());
    let reference = (zn * z - z) / (z - Complex64::new(1.0, 0.0)) / n as f64;
    if (c - reference).norm() > 1e-9 {
        return Err(format!("rotation correlation {c} differs from closed form {reference}"));
    }
    Ok(())
}

/// Runs the battery, printing one line per check; any failure exits with
/// the comparison-failure status.
pub fn run() -> Result<(), CliError> {
    let checks: [(&str, fn() -> Result<(), String>); 6] = [
        ("sieves vs trial division", check_sieves),
        ("stream vs binomial jump", check_stream_vs_jump),
        ("tr-lemma grid", check_tr_lemma_grid),
        ("sliding window vs naive", check_sliding_window),
        ("switched equal seeds", check_switched_equal_seeds),
        ("rotation correlation vs geometric series", check_rotation_correlation),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("selftest {name}: ok"),
            Err(msg) => {
                println!("selftest {name}: FAILED: {msg}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Mismatch(format!("{failures} selftest check(s) failed")));
    }
    Ok(())
}
