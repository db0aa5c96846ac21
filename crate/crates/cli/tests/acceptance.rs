//! Acceptance battery: ten numbered criteria, one test and one printed
//! verdict line each (run with `--nocapture` to see them). Every criterion
//! checks library output against an independent oracle computed here —
//! trial division, exact big-integer register simulation, geometric series
//! — or against a committed fixture, plus the runtime budget where one is
//! pinned.

use muweyl::arith::{self, CustomTable, MultiplicativeSpec};
use muweyl::models::{aligned_seeds, invariance_defect, SwitchedOrbit};
use muweyl::quasi::{check_tr_lemma, ek_degree, key_lemma_search, QuasiEig};
use muweyl::stats::{
    basic_average, default_window, kbsz_correlation, short_interval_stat, weighted_block_stat,
    BlockScheme, GapRule, TorusPhases,
};
use muweyl::torus::{
    poly_to_initial, AffineSkewMap, BinomialRow, Frac64, OrbitStream, PolySpec, TorusPoint,
};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::f64::consts::TAU;
use std::time::Instant;

fn pass(criterion: u32, detail: &str, t0: Instant, budget_secs: Option<f64>) {
    let elapsed = t0.elapsed().as_secs_f64();
    println!("[acceptance] criterion {criterion:2}: PASS - {detail} ({elapsed:.2}s)");
    if let Some(budget) = budget_secs {
        assert!(
            elapsed <= budget,
            "criterion {criterion} exceeded its {budget}s budget: {elapsed:.2}s"
        );
    }
}

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
    let lambda = if omega % 2 == 0 { 1i8 } else { -1i8 };
    ((if squarefree { lambda } else { 0 }), lambda)
}

#[test]
fn criterion_01_sieve_oracle_equivalence() {
    let t0 = Instant::now();
    let hi = 1_000_001u64;
    let mu = arith::sieve_moebius(1, hi).unwrap();
    let lam = arith::sieve_liouville(1, hi).unwrap();
    let (mu, lam) = (mu.signs().unwrap(), lam.signs().unwrap());
    for n in 1..hi {
        let (m, l) = trial_division_mu_lambda(n);
        let i = (n - 1) as usize;
        assert_eq!(mu[i], m, "mu({n})");
        assert_eq!(lam[i], l, "lambda({n})");
    }
    for (n, expected) in [(1_000, 2i64), (10_000, -23), (100_000, -48), (1_000_000, 212)] {
        assert_eq!(arith::mertens(n).unwrap(), expected, "Mertens({n})");
    }
    pass(1, "mu/lambda equal trial division to 1e6; Mertens checkpoints", t0, Some(10.0));
}

#[test]
fn criterion_02_orbit_formula_exactness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in 1..=5usize {
        let alpha = Frac64::from_raw(rng.gen());
        let map = AffineSkewMap::new(d, alpha).unwrap();
        let origin =
            TorusPoint::new((0..d).map(|_| Frac64::from_raw(rng.gen())).collect()).unwrap();
        // stepped stream vs the closed binomial form, every n
        let mut stream = OrbitStream::new(map, &origin, 0).unwrap();
        let mut row = BinomialRow::new(d);
        for n in 0..=100_000u64 {
            let jumped = map.jump_with_row(&origin, &row).unwrap();
            assert_eq!(
                stream.point_coords(),
                jumped.coords(),
                "d = {d}, n = {n}: stream and closed form disagree"
            );
            stream.advance();
            row.advance();
        }
        // binomial_eval (fresh Pascal row per call) spot checks, bit-for-bit
        // through the float exit as well
        let mut check = OrbitStream::new(map, &origin, 0).unwrap();
        let samples: Vec<u64> = (0..40).map(|_| rng.gen_range(0..=100_000)).collect();
        let mut prev = 0u64;
        let mut sorted = samples;
        sorted.sort_unstable();
        sorted.dedup();
        for n in sorted {
            for _ in prev..n {
                check.advance();
            }
            prev = n;
            let direct = map.binomial_eval(&origin, n).unwrap();
            assert_eq!(check.last_coord(), direct, "d = {d}, n = {n}");
            let (sp, dp) = (check.last_coord().phase(), direct.phase());
            assert_eq!(sp.re.to_bits(), dp.re.to_bits());
            assert_eq!(sp.im.to_bits(), dp.im.to_bits());
        }
    }
    pass(2, "streams equal the binomial closed form bit-for-bit, d <= 5, n <= 1e5", t0, Some(5.0));
}

/// Nearest-grid rounding of a rational in [0, 1), ties away from zero,
/// wrapping 2^64 -> 0 — the documented register quantization, recomputed
/// here from scratch on big integers.
fn round_register(frac: &BigRational) -> u64 {
    assert!(!frac.is_negative() && frac < &BigRational::one());
    let two = BigInt::from(2);
    let scaled_num = frac.numer() << 65u32;
    let rounded = (scaled_num + frac.denom()) / (frac.denom() * two);
    (&rounded % (BigInt::one() << 64u32)).to_u64().unwrap()
}

/// Forward differences `Delta^k P(0)` for `k = 0..=d`, reduced mod 1.
fn register_fracs(poly: &PolySpec) -> Vec<BigRational> {
    let d = poly.degree();
    let mut table: Vec<BigRational> = (0..=d as u64).map(|j| poly.eval(j)).collect();
    let mut out = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        let head = table[0].clone();
        out.push(&head - head.floor());
        for i in 0..table.len() - 1 {
            table[i] = &table[i + 1] - &table[i];
        }
        table.pop();
    }
    out
}

#[test]
fn criterion_03_poly_to_initial_correctness() {
    let t0 = Instant::now();

    // (a) P(n) = n^3 / 7: the stream must track, exactly, the big-integer
    // simulation of the rounded registers advanced by exact binomials.
    let poly = PolySpec::from_tokens(&["1/7", "0", "0", "0"]).unwrap();
    let (map, origin) = poly_to_initial(&poly);
    let fracs = register_fracs(&poly); // [P(0), dP(0), d2P(0), d3P(0)] mod 1
    let alpha_reg = round_register(&fracs[3]);
    let x_regs: Vec<u64> = (1..=3).map(|j| round_register(&fracs[3 - j])).collect();
    assert_eq!(map.alpha().raw(), alpha_reg, "alpha register");
    for (j, &reg) in x_regs.iter().enumerate() {
        assert_eq!(origin.coord(j).raw(), reg, "register x_{}", j + 1);
    }
    let mut stream = OrbitStream::new(map, &origin, 0).unwrap();
    let mut row = [1u128, 0, 0, 0]; // C(n, 0..=3)
    for n in 0..=10_000u64 {
        let mut oracle = (row[3] as u64).wrapping_mul(alpha_reg);
        for (j, &reg) in x_regs.iter().enumerate() {
            oracle = oracle.wrapping_add((row[2 - j] as u64).wrapping_mul(reg));
        }
        assert_eq!(stream.last_coord().raw(), oracle, "n^3/7 at n = {n}");
        stream.advance();
        for k in (1..=3).rev() {
            row[k] += row[k - 1];
        }
    }

    // (b) P(n) = beta n^2 with beta exactly on the grid: the stream equals
    // the true value n^2 beta mod 1 with no error at all.
    let beta_raw = 0xDEAD_BEEF_CAFE_F00Du64;
    let beta = BigRational::new(BigInt::from(beta_raw), BigInt::one() << 64);
    let poly = PolySpec::new(vec![BigRational::zero(), BigRational::zero(), beta]).unwrap();
    let (map, origin) = poly_to_initial(&poly);
    assert_eq!(map.alpha().raw(), beta_raw.wrapping_mul(2));
    assert_eq!(origin.coord(0).raw(), beta_raw);
    assert_eq!(origin.coord(1).raw(), 0);
    let mut stream = OrbitStream::new(map, &origin, 0).unwrap();
    for n in 0..=10_000u64 {
        assert_eq!(
            stream.last_coord().raw(),
            beta_raw.wrapping_mul(n * n),
            "dyadic beta n^2 at n = {n}"
        );
        stream.advance();
    }

    // (c) beta = sqrt2: against a 128-fractional-bit oracle at sampled n,
    // within the drift bound C(n,2) * 3 * 2^-63.
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).unwrap();
    let (map, origin) = poly_to_initial(&poly);
    let sqrt2_128: BigInt = (BigInt::from(2u8) << 256u32).sqrt(); // floor(sqrt2 * 2^128)
    let modulus = BigInt::one() << 128u32;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: HashSet<u64> = (0..1_000).map(|_| rng.gen_range(1..=1_000_000u64)).collect();
    let mut stream = OrbitStream::new(map, &origin, 0).unwrap();
    for n in 0..=1_000_000u64 {
        if samples.contains(&n) {
            let oracle = (BigInt::from(n) * BigInt::from(n) * &sqrt2_128) % &modulus;
            let value = BigInt::from(stream.last_coord().raw()) << 64u32;
            let dist = (&value - &oracle).abs();
            let dist = (&dist).min(&(&modulus - &dist)).clone();
            let c_n_2 = BigInt::from(n) * BigInt::from(n - 1) / BigInt::from(2);
            let bound = c_n_2 * BigInt::from(3u8) * (BigInt::one() << 65u32);
            assert!(dist <= bound, "sqrt2 n^2 drift exceeded at n = {n}");
        }
        stream.advance();
    }

    pass(3, "registers and streams match rational/128-bit oracles", t0, None);
}

#[test]
fn criterion_04_quasi_calculus() {
    let t0 = Instant::now();
    let alpha = Frac64::from_rational(&muweyl::real::sqrt2());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // 250 random characters per dimension (1000 total), full power grid
    for d in 1..=4usize {
        let map = AffineSkewMap::new(d, alpha).unwrap();
        for _ in 0..250 {
            let mut m: Vec<i64> = (0..d).map(|_| rng.gen_range(-100..=100)).collect();
            while m.iter().all(|&mi| mi == 0) {
                m = (0..d).map(|_| rng.gen_range(-100..=100)).collect();
            }
            let f = QuasiEig::new(m, Frac64::from_raw(rng.gen()));
            for r in 1..=20 {
                assert!(
                    check_tr_lemma(&map, &f, r, d).unwrap(),
                    "tr-lemma failed: d = {d}, r = {r}, f = {f:?}"
                );
            }
        }
    }
    for d in 1..=6usize {
        let map = AffineSkewMap::new(d, alpha).unwrap();
        let mut m = vec![0i64; d];
        m[d - 1] = 1;
        assert_eq!(ek_degree(&map, &QuasiEig::character(m)).unwrap(), d, "ek_degree, d = {d}");
    }
    // planted key-lemma inputs: c1 = a gamma, c2 = b gamma with gamma odd
    let gamma = Frac64::from_raw(rng.gen::<u64>() | 1);
    let mut planted = 0;
    for a in 1..=10u64 {
        for b in 1..=10u64 {
            if num::integer::gcd(a, b) != 1 {
                continue;
            }
            let hits = key_lemma_search(gamma.mul_u64(a), gamma.mul_u64(b), 50, 0.0);
            assert_eq!(hits, vec![(b, a)], "a = {a}, b = {b}");
            planted += 1;
        }
    }
    assert_eq!(planted, 63);
    pass(4, "tr-lemma on 1000 characters, E_k degrees, unique key-lemma pairs", t0, None);
}

#[test]
fn criterion_05_kbsz_rotation_bound() {
    let t0 = Instant::now();
    // alpha = floor((sqrt5 - 1)/2 * 2^64) / 2^64, derived independently here
    let sqrt5_64: BigInt = (BigInt::from(5u8) << 128u32).sqrt();
    let alpha_raw = ((sqrt5_64 - (BigInt::one() << 64u32)) / BigInt::from(2)).to_u64().unwrap();
    assert_eq!(alpha_raw, 0x9E37_79B9_7F4A_7C15);
    let alpha = Frac64::from_raw(alpha_raw);
    let map = AffineSkewMap::new(1, alpha).unwrap();
    let source = TorusPhases::new(map, TorusPoint::zero(1)).unwrap();
    let n = 100_000u64;
    let primes = arith::primes_up_to(50);
    let mut pairs = 0;
    for (i, &r) in primes.iter().enumerate() {
        for &s in &primes[i + 1..] {
            let c = kbsz_correlation(&source, r, s, n, 4).unwrap();
            let theta = alpha.mul_i64(r as i64 - s as i64);
            assert!(
                c.norm() <= 1.0 / (2.0 * n as f64 * theta.norm()) + 1e-12,
                "geometric bound violated for (r, s) = ({r}, {s}): |C| = {}",
                c.norm()
            );
            // closed form z (z^N - 1)/(z - 1)/N with N theta reduced exactly
            // on the grid before the float exit
            let z = Complex64::from_polar(1.0, TAU * theta.to_f64());
            let zn = Complex64::from_polar(1.0, TAU * theta.mul_u64(n).to_f64());
            let reference = (zn * z - z) / (z - Complex64::new(1.0, 0.0)) / n as f64;
            assert!(
                (c - reference).norm() <= 1e-9,
                "closed form mismatch for (r, s) = ({r}, {s}): {c} vs {reference}"
            );
            pairs += 1;
        }
    }
    assert_eq!(pairs, 105);
    pass(5, "105 prime pairs obey the geometric bound and closed form", t0, Some(30.0));
}

/// Multiplicative evaluation by trial division against a value table —
/// independent of the sieve machinery under test.
fn trial_division_nu(n: u64, nu: &MultiplicativeSpec) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut m = n;
    let mut p = 2u64;
    let apply = |p: u64, e: u32, acc: &mut Complex64| match nu {
        MultiplicativeSpec::Moebius => {
            *acc *= if e > 1 { Complex64::new(0.0, 0.0) } else { Complex64::new(-1.0, 0.0) }
        }
        MultiplicativeSpec::Liouville => {
            if e % 2 == 1 {
                *acc = -*acc;
            }
        }
        MultiplicativeSpec::Archimedean { t } => {
            *acc *= Complex64::from_polar(1.0, t * e as f64 * (p as f64).ln())
        }
        MultiplicativeSpec::Custom(table) => *acc *= table.get(p.pow(e)).unwrap(),
    };
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            apply(p, e, &mut acc);
        }
        p += 1;
    }
    if m > 1 {
        apply(m, 1, &mut acc);
    }
    acc
}

#[test]
fn criterion_06_sliding_window_equivalence() {
    let t0 = Instant::now();
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).unwrap();
    let (map, origin) = poly_to_initial(&poly);
    let ms = [1_000u64, 2_500, 5_000, 7_500, 10_000];
    let hs = [2u64, 11, 50, 120, 200];
    let specs = [
        MultiplicativeSpec::Moebius,
        MultiplicativeSpec::Custom(CustomTable::random_unimodular(2 * 10_000 + 200, 42)),
    ];
    for nu in &specs {
        for &m in &ms {
            // one phase pass and one trial-division pass per M
            let top = 2 * m + 200;
            let phases: Vec<Complex64> = OrbitStream::new(map, &origin, m)
                .unwrap()
                .take((top - m) as usize)
                .map(Frac64::phase)
                .collect();
            let weights: Vec<Complex64> =
                (m..top).map(|idx| trial_division_nu(idx, nu)).collect();
            for &h in &hs {
                let mut total = 0.0f64;
                for start in 0..m {
                    let mut window = Complex64::new(0.0, 0.0);
                    for off in start..start + h {
                        let i = off as usize;
                        window += phases[i] * weights[i];
                    }
                    total += window.norm();
                }
                let naive = total / h as f64 / m as f64;
                let fast = short_interval_stat(&poly, nu, m, h, 3).unwrap();
                assert!(
                    (fast - naive).abs() <= 1e-9,
                    "M = {m}, H = {h}: fast {fast} vs naive {naive}"
                );
            }
        }
    }
    pass(6, "sliding window equals from-scratch recomputation on the 5x5 grid", t0, None);
}

#[test]
fn criterion_07_decay_fixture() {
    let t0 = Instant::now();
    let fixture = include_str!("fixtures/decay_sqrt2_moebius.csv");
    let rows: Vec<(u64, u64, f64)> = fixture
        .lines()
        .skip(2)
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![10_000, 100_000, 1_000_000]);
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).unwrap();
    let mut computed = Vec::new();
    for &(m, h, s_expected) in &rows {
        assert_eq!(default_window(m), h, "window rule changed for M = {m}");
        let s = short_interval_stat(&poly, &MultiplicativeSpec::Moebius, m, h, 4).unwrap();
        assert!(
            (s - s_expected).abs() <= 1e-9,
            "S({m}, {h}) = {s} drifted from fixture {s_expected}"
        );
        computed.push(s);
    }
    assert!(
        computed.windows(2).all(|w| w[1] < w[0]),
        "decay statistic is not strictly decreasing: {computed:?}"
    );
    pass(7, "S(M, M^(1/3)) strictly decreasing and on the committed fixture", t0, Some(60.0));
}

#[test]
fn criterion_08_block_statistic() {
    let t0 = Instant::now();
    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).unwrap();
    let source = TorusPhases::from_poly(&poly);
    let nu = MultiplicativeSpec::Moebius;
    let mut ws = Vec::new();
    for (limit, k_expected) in [(10_000u64, 595usize), (100_000, 2795), (1_000_000, 13045)] {
        let scheme = BlockScheme::from_rule(&GapRule::SqrtPlusOne, limit).unwrap();
        let k = scheme.max_blocks_within(limit);
        assert_eq!(k, k_expected, "block count at limit {limit}");
        ws.push(weighted_block_stat(&source, &nu, &scheme, k, 4).unwrap());
    }
    assert!(ws.windows(2).all(|w| w[1] < w[0]), "W is not strictly decreasing: {ws:?}");

    // aligned seeds turn every block sum positive-real, so the switched
    // orbit's plain average recovers the absolute-value statistic
    let scheme = BlockScheme::from_rule(&GapRule::SqrtPlusOne, 10_000).unwrap();
    let k = scheme.max_blocks_within(10_000);
    let b_end = scheme.boundary(k + 1);
    let (map, base) = poly_to_initial(&poly);
    let seeds = aligned_seeds(&map, &base, &scheme, &nu, k).unwrap();
    let orbit = SwitchedOrbit::new(map, scheme, seeds).unwrap();
    let avg = basic_average(&orbit, Some(&nu), b_end - 1, 4).unwrap();
    let reproduced = avg.re * (b_end - 1) as f64 / b_end as f64;
    assert!(avg.im.abs() <= 1e-9, "aligned average has imaginary part {}", avg.im);
    assert!(
        (reproduced - ws[0]).abs() <= 1e-9,
        "aligned average {reproduced} does not reproduce W = {}",
        ws[0]
    );
    pass(8, "W strictly decreasing over three scales; aligned seeds reproduce it", t0, None);
}

#[test]
fn criterion_09_switching_defect_and_identity() {
    let t0 = Instant::now();
    let scheme = BlockScheme::from_rule(&GapRule::Sqrt, 100_000).unwrap();
    let defects: Vec<f64> =
        [1_000u64, 10_000, 100_000].iter().map(|&n| invariance_defect(&scheme, n)).collect();
    assert!(
        defects.windows(2).all(|w| w[1] < w[0]),
        "defect is not strictly decreasing: {defects:?}"
    );

    let poly = PolySpec::from_tokens(&["sqrt2", "0", "0"]).unwrap();
    let (map, base) = poly_to_initial(&poly);
    let k = scheme.max_blocks_within(100_000);
    let orbit = SwitchedOrbit::new(map, scheme, vec![base.clone(); k]).unwrap();
    let count = 100_000.min(orbit.coverage_end() - 1);
    let plain = OrbitStream::new(map, &base, 1).unwrap();
    for (i, (y, x)) in orbit.stream(count).unwrap().zip(plain).enumerate() {
        assert_eq!(y, x, "equal-seed switched orbit differs at n = {}", i + 1);
    }
    pass(9, "defect decreasing over 1e3..1e5; equal seeds reproduce the plain orbit", t0, None);
}

#[test]
fn criterion_10_cli_worker_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_muweyl");
    let dir = tempfile::tempdir().unwrap();
    let experiments: &[(&str, &[&str])] = &[
        ("sieve", &["sieve", "--kind", "liouville", "--from", "1", "--to", "3e5"]),
        ("phase", &["phase", "--poly", "sqrt2,0,0", "--count", "2e4"]),
        ("quasi-tr", &["quasi", "--check", "tr-lemma", "--d", "3", "--r-max", "10"]),
        ("quasi-bk", &["quasi", "--birkhoff", "--freq", "0,1", "--alpha", "sqrt2", "--N", "2e4"]),
        ("kbsz", &["kbsz", "--poly", "sqrt2,0,0", "--primes-up-to", "20", "--N", "2e4"]),
        ("short-interval", &["short-interval", "--poly", "sqrt2,0,0", "--nu", "moebius", "--M", "1e5"]),
        ("block-stat", &["block-stat", "--poly", "sqrt2,0,0", "--nu", "moebius", "--scheme", "sqrt-plus-one", "--limit", "1e5"]),
        ("switched", &["switched", "--poly", "sqrt2,0,0", "--nu", "moebius", "--scheme", "sqrt-plus-one", "--seeds", "aligned", "--limit", "1e4"]),
        ("defect", &["switched", "--mode", "defect", "--scheme", "sqrt", "--N", "1e3,1e4,1e5"]),
    ];
    // worker counts 1, 4, and 0 = everything available
    for (name, args) in experiments {
        let mut outputs = Vec::new();
        for workers in ["1", "4", "0"] {
            let out = dir.path().join(format!("{name}-{workers}.csv"));
            let status = std::process::Command::new(bin)
                .args(*args)
                .args(["--workers", workers, "--out", out.to_str().unwrap()])
                .stderr(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.success(), "{name} with {workers} workers failed");
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert!(
            outputs[0] == outputs[1] && outputs[1] == outputs[2],
            "{name}: CSV bytes differ across worker counts"
        );
        assert!(!outputs[0].is_empty());
    }
    pass(10, "all nine CLI experiments byte-identical across workers {1, 4, max}", t0, None);
}
