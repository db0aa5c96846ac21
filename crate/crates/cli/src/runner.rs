//! Executes experiments: renders each kind to a CSV document (line 1 the
//! config hash, line 2 the column header), writes it to the configured
//! destination, and compares against a fixture when one is given.
//!
//! Rendering is a pure function of the experiment table and therefore
//! byte-identical across runs and worker counts; the worker count is
//! reported on stderr so it never perturbs the CSV.

use crate::config::{
    config_hash, BlockStatSpec, ExperimentConfig, ExperimentSpec, KbszSpec, NuToken, PhaseSpec,
    QuasiMode, QuasiSpec, SchemeToken, SeedMode, ShortIntervalSpec, SieveSpec, SwitchedMode,
    SwitchedSpec, Window,
};
use crate::fixture::{self, CompareMode};
use crate::CliError;
use muweyl::arith::{self, CustomTable, MultiplicativeSpec, NuCursor};
use muweyl::models::{aligned_seeds, invariance_defect, SwitchedOrbit};
use muweyl::quasi::{birkhoff_average, check_tr_lemma, QuasiEig};
use muweyl::real;
use muweyl::stats::{
    default_window, kbsz_correlation, short_interval_stat, weighted_block_stat, BlockScheme,
    GapRule, TorusPhases,
};
use muweyl::torus::{poly_to_initial, AffineSkewMap, Frac64, PolySpec, TorusPoint};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Hard cap on emitted rows; keeps outputs at desk scale.
const MAX_ROWS: u64 = 1 << 27;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Fixed-width float formatting used for every CSV float column.
fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

fn poly_from_tokens(tokens: &[String]) -> Result<PolySpec, CliError> {
    PolySpec::from_tokens(tokens).map_err(usage)
}

fn alpha_from_token(token: &str) -> Result<Frac64, CliError> {
    let r = real::parse_real_token(token).map_err(usage)?;
    Ok(Frac64::from_rational(&r))
}

/// Resolves a nu token into an evaluator; `limit` bounds the arguments it
/// will see (a random-unimodular table is generated up to that limit).
fn nu_spec(token: &NuToken, limit: u64) -> MultiplicativeSpec {
    match token {
        NuToken::Moebius => MultiplicativeSpec::Moebius,
        NuToken::Liouville => MultiplicativeSpec::Liouville,
        NuToken::Archimedean(t) => MultiplicativeSpec::Archimedean { t: *t },
        NuToken::RandomUnimodular(seed) => {
            MultiplicativeSpec::Custom(CustomTable::random_unimodular(limit, *seed))
        }
    }
}

fn gap_rule(token: &SchemeToken) -> GapRule {
    match token {
        SchemeToken::Sqrt => GapRule::Sqrt,
        SchemeToken::SqrtPlusOne => GapRule::SqrtPlusOne,
        SchemeToken::Log2PlusOne => GapRule::LogSquaredPlusOne,
        SchemeToken::Power(theta) => GapRule::Power(*theta),
    }
}

/// `b_{K+1}` for a rule: `1 + sum_{k<=K} gap(k)`, checked.
fn boundary_after(rule: &GapRule, k: usize) -> Result<u64, CliError> {
    rule.validate().map_err(usage)?;
    let mut b: u64 = 1;
    for j in 1..=k as u64 {
        b = b
            .checked_add(rule.gap(j))
            .ok_or_else(|| CliError::Usage(format!("K = {k} overflows the block scheme")))?;
    }
    Ok(b)
}

/// Renders the CSV document for one experiment. Pure; the worker count only
/// affects scheduling, never bytes.
pub fn render(spec: &ExperimentSpec, workers: usize) -> Result<String, CliError> {
    let mut csv = String::new();
    let _ = writeln!(csv, "# config {}", config_hash(spec));
    match spec {
        ExperimentSpec::Sieve(s) => render_sieve(s, &mut csv)?,
        ExperimentSpec::Phase(s) => render_phase(s, &mut csv)?,
        ExperimentSpec::Quasi(s) => render_quasi(s, &mut csv)?,
        ExperimentSpec::Kbsz(s) => render_kbsz(s, workers, &mut csv)?,
        ExperimentSpec::ShortInterval(s) => render_short_interval(s, workers, &mut csv)?,
        ExperimentSpec::BlockStat(s) => render_block_stat(s, workers, &mut csv)?,
        ExperimentSpec::Switched(s) => render_switched(s, &mut csv)?,
    }
    Ok(csv)
}

fn render_sieve(s: &SieveSpec, csv: &mut String) -> Result<(), CliError> {
    let (from, to) = (s.from.get(), s.to.get());
    if from < 1 {
        return Err(CliError::Usage("sieve range starts at 1".into()));
    }
    if to <= from {
        return Err(CliError::Usage(format!("empty sieve range [{from}, {to})")));
    }
    if to - from > MAX_ROWS {
        return Err(CliError::Usage(format!("sieve range longer than {MAX_ROWS} values")));
    }
    let nu = nu_spec(&s.kind, to);
    let plain_mu = matches!(s.kind, NuToken::Moebius);
    csv.push_str(if plain_mu { "n,value\n" } else { "n,value_re,value_im\n" });
    let mut lo = from;
    while lo < to {
        let hi = (lo + arith::DEFAULT_SEGMENT_CAPACITY as u64).min(to);
        let seg = arith::eval_multiplicative(&nu, lo, hi).map_err(usage)?;
        if plain_mu {
            for (i, v) in seg.signs().expect("mu sieves to signs").iter().enumerate() {
                let _ = writeln!(csv, "{},{v}", lo + i as u64);
            }
        } else {
            for n in lo..hi {
                let v = seg.value(n);
                let _ = writeln!(csv, "{n},{},{}", fmt_f(v.re), fmt_f(v.im));
            }
        }
        lo = hi;
    }
    Ok(())
}

fn render_phase(s: &PhaseSpec, csv: &mut String) -> Result<(), CliError> {
    if s.count.get() < 1 {
        return Err(CliError::Usage("phase count must be at least 1".into()));
    }
    if s.count.get() > MAX_ROWS {
        return Err(CliError::Usage(format!("phase count larger than {MAX_ROWS}")));
    }
    let poly = poly_from_tokens(&s.poly)?;
    let (map, origin) = poly_to_initial(&poly);
    let stream = muweyl::torus::OrbitStream::new(map, &origin, s.from.get()).map_err(usage)?;
    csv.push_str("n,phase_re,phase_im\n");
    for (i, x) in stream.take(s.count.get() as usize).enumerate() {
        let p = x.phase();
        let _ = writeln!(csv, "{},{},{}", s.from.get() + i as u64, fmt_f(p.re), fmt_f(p.im));
    }
    Ok(())
}

fn render_quasi(s: &QuasiSpec, csv: &mut String) -> Result<(), CliError> {
    match s.mode {
        QuasiMode::TrLemma => {
            let d = s
                .d
                .ok_or_else(|| CliError::Usage("quasi tr-lemma requires d".into()))?
                .get() as usize;
            let r_max = s
                .r_max
                .ok_or_else(|| CliError::Usage("quasi tr-lemma requires r-max".into()))?
                .get();
            if r_max < 1 {
                return Err(CliError::Usage("r-max must be at least 1".into()));
            }
            let chars = s.chars.map_or(64, |c| c.get());
            if chars < 1 {
                return Err(CliError::Usage("chars must be at least 1".into()));
            }
            let seed = s.seed.map_or(1, |c| c.get());
            let alpha = alpha_from_token(s.alpha.as_deref().unwrap_or("sqrt2"))?;
            let map = AffineSkewMap::new(d, alpha).map_err(usage)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut fs = Vec::with_capacity(chars as usize);
            for _ in 0..chars {
                let mut m: Vec<i64> = (0..d).map(|_| rng.gen_range(-50..=50)).collect();
                while m.iter().all(|&mi| mi == 0) {
                    m = (0..d).map(|_| rng.gen_range(-50..=50)).collect();
                }
                fs.push(QuasiEig::new(m, Frac64::from_raw(rng.gen())));
            }
            csv.push_str("d,r,ok\n");
            for r in 1..=r_max {
                let mut ok = true;
                for f in &fs {
                    if !check_tr_lemma(&map, f, r, d).map_err(usage)? {
                        ok = false;
                        break;
                    }
                }
                let _ = writeln!(csv, "{d},{r},{}", ok as u8);
            }
            Ok(())
        }
        QuasiMode::Birkhoff => {
            let freq = s
                .freq
                .as_ref()
                .ok_or_else(|| CliError::Usage("quasi birkhoff requires freq".into()))?;
            let alpha_tok = s
                .alpha
                .as_deref()
                .ok_or_else(|| CliError::Usage("quasi birkhoff requires alpha".into()))?;
            let n = s
                .n
                .ok_or_else(|| CliError::Usage("quasi birkhoff requires N".into()))?
                .get();
            if n < 1 {
                return Err(CliError::Usage("N must be at least 1".into()));
            }
            if n > MAX_ROWS {
                return Err(CliError::Usage(format!("N larger than {MAX_ROWS}")));
            }
            let map = AffineSkewMap::new(freq.len(), alpha_from_token(alpha_tok)?).map_err(usage)?;
            let f = QuasiEig::character(freq.clone());
            let origin = TorusPoint::zero(freq.len());
            let avg = birkhoff_average(&map, &f, &origin, n).map_err(usage)?;
            csv.push_str("N,re,im,abs\n");
            let _ = writeln!(csv, "{n},{},{},{}", fmt_f(avg.re), fmt_f(avg.im), fmt_f(avg.norm()));
            Ok(())
        }
    }
}

fn render_kbsz(s: &KbszSpec, workers: usize, csv: &mut String) -> Result<(), CliError> {
    let n = s.n.get();
    if n < 1 {
        return Err(CliError::Usage("N must be at least 1".into()));
    }
    let primes = arith::primes_up_to(s.primes_up_to.get());
    if primes.len() < 2 {
        return Err(CliError::Usage(format!(
            "no prime pair r < s <= {}; primes-up-to must be at least 3",
            s.primes_up_to.get()
        )));
    }
    let poly = poly_from_tokens(&s.poly)?;
    let source = TorusPhases::from_poly(&poly);
    csv.push_str("r,s,re,im,abs\n");
    for (i, &r) in primes.iter().enumerate() {
        for &sp in &primes[i + 1..] {
            let c = kbsz_correlation(&source, r, sp, n, workers).map_err(usage)?;
            let _ =
                writeln!(csv, "{r},{sp},{},{},{}", fmt_f(c.re), fmt_f(c.im), fmt_f(c.norm()));
        }
    }
    Ok(())
}

fn render_short_interval(
    s: &ShortIntervalSpec,
    workers: usize,
    csv: &mut String,
) -> Result<(), CliError> {
    if s.m.is_empty() {
        return Err(CliError::Usage("short-interval requires at least one M".into()));
    }
    let ms: Vec<u64> = s.m.iter().map(|c| c.get()).collect();
    let hs: Vec<u64> = match &s.h {
        Window::Auto => ms.iter().map(|&m| default_window(m)).collect(),
        Window::Fixed(v) if v.len() == 1 => vec![v[0].get(); ms.len()],
        Window::Fixed(v) if v.len() == ms.len() => v.iter().map(|c| c.get()).collect(),
        Window::Fixed(v) => {
            return Err(CliError::Usage(format!(
                "H list has {} entries but M list has {}",
                v.len(),
                ms.len()
            )))
        }
    };
    let poly = poly_from_tokens(&s.poly)?;
    csv.push_str("M,H,S\n");
    for (&m, &h) in ms.iter().zip(&hs) {
        let nu = nu_spec(&s.nu, 2 * m + h);
        let stat = short_interval_stat(&poly, &nu, m, h, workers).map_err(usage)?;
        let _ = writeln!(csv, "{m},{h},{}", fmt_f(stat));
    }
    Ok(())
}

/// Resolves the `K`-or-`limit` choice into concrete `(scheme, K)` pairs.
fn scheme_rows(
    rule: &GapRule,
    k: &Option<Vec<crate::config::Count>>,
    limit: &Option<Vec<crate::config::Count>>,
) -> Result<Vec<(BlockScheme, usize)>, CliError> {
    let mut out = Vec::new();
    match (k, limit) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give K or limit, not both".into()));
        }
        (None, None) => {
            return Err(CliError::Usage("block scheme requires K or limit".into()));
        }
        (Some(ks), None) => {
            for k in ks {
                let k = k.get() as usize;
                if k < 1 {
                    return Err(CliError::Usage("K must be at least 1".into()));
                }
                let b = boundary_after(rule, k)?;
                let scheme = BlockScheme::from_rule(rule, b).map_err(usage)?;
                out.push((scheme, k));
            }
        }
        (None, Some(limits)) => {
            for l in limits {
                let scheme = BlockScheme::from_rule(rule, l.get()).map_err(usage)?;
                let k = scheme.max_blocks_within(l.get());
                if k < 1 {
                    return Err(CliError::Usage(format!(
                        "limit {} does not cover a full block",
                        l.get()
                    )));
                }
                out.push((scheme, k));
            }
        }
    }
    Ok(out)
}

fn render_block_stat(s: &BlockStatSpec, workers: usize, csv: &mut String) -> Result<(), CliError> {
    let poly = poly_from_tokens(&s.poly)?;
    let source = TorusPhases::from_poly(&poly);
    let rule = gap_rule(&s.scheme);
    csv.push_str("K,W\n");
    for (scheme, k) in scheme_rows(&rule, &s.k, &s.limit)? {
        let nu = nu_spec(&s.nu, scheme.boundary(k + 1));
        let w = weighted_block_stat(&source, &nu, &scheme, k, workers).map_err(usage)?;
        let _ = writeln!(csv, "{k},{}", fmt_f(w));
    }
    Ok(())
}

fn render_switched(s: &SwitchedSpec, csv: &mut String) -> Result<(), CliError> {
    let rule = gap_rule(&s.scheme);
    match s.mode {
        SwitchedMode::Defect => {
            let ns = s
                .n
                .as_ref()
                .ok_or_else(|| CliError::Usage("switched defect mode requires N".into()))?;
            if ns.is_empty() {
                return Err(CliError::Usage("switched defect mode requires N".into()));
            }
            let max_n = ns.iter().map(|c| c.get()).max().unwrap();
            if ns.iter().any(|c| c.get() < 1) {
                return Err(CliError::Usage("N must be at least 1".into()));
            }
            let scheme = BlockScheme::from_rule(&rule, max_n).map_err(usage)?;
            csv.push_str("N,defect\n");
            for c in ns {
                let _ = writeln!(csv, "{},{}", c.get(), fmt_f(invariance_defect(&scheme, c.get())));
            }
            Ok(())
        }
        SwitchedMode::Blocks => {
            let poly_tokens = s
                .poly
                .as_ref()
                .ok_or_else(|| CliError::Usage("switched blocks mode requires poly".into()))?;
            let nu_token = s
                .nu
                .as_ref()
                .ok_or_else(|| CliError::Usage("switched blocks mode requires nu".into()))?;
            let seed_mode = s
                .seeds
                .ok_or_else(|| CliError::Usage("switched blocks mode requires seeds".into()))?;
            let k_one = s.k.map(|c| vec![c]);
            let limit_one = s.limit.map(|c| vec![c]);
            let mut rows = scheme_rows(&rule, &k_one, &limit_one)?;
            let (scheme, k) = rows.pop().expect("scheme_rows yields one entry");
            let b_end = scheme.boundary(k + 1);
            let nu = nu_spec(nu_token, b_end);
            let poly = poly_from_tokens(poly_tokens)?;
            let (map, base) = poly_to_initial(&poly);
            let seeds = match seed_mode {
                SeedMode::Equal => vec![base.clone(); k],
                SeedMode::Aligned => {
                    aligned_seeds(&map, &base, &scheme, &nu, k).map_err(usage)?
                }
            };
            let orbit = SwitchedOrbit::new(map, scheme, seeds).map_err(usage)?;
            let mut stream = orbit.stream(b_end - 1).map_err(usage)?;
            let mut cursor = NuCursor::new(&nu);
            csv.push_str("k,lo,hi,re,im,abs\n");
            for block in 1..=k {
                let range = orbit.scheme().block_range(block);
                let (lo, hi) = (range.start, range.end);
                let mut acc = Complex64::new(0.0, 0.0);
                for idx in range {
                    let y = stream
                        .next()
                        .ok_or_else(|| CliError::Internal("switched stream ended early".into()))?;
                    acc += y.phase() * cursor.value(idx).map_err(usage)?;
                }
                let _ = writeln!(
                    csv,
                    "{block},{lo},{hi},{},{},{}",
                    fmt_f(acc.re),
                    fmt_f(acc.im),
                    fmt_f(acc.norm())
                );
            }
            Ok(())
        }
    }
}

/// Worker-count resolution: 0 means all available parallelism.
pub fn resolve_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Per-kind fixture comparison policy: sieve outputs are exact integers and
/// compare byte-for-byte; everything else is numeric within `1e-9`.
pub fn compare_mode(spec: &ExperimentSpec) -> CompareMode {
    match spec {
        ExperimentSpec::Sieve(_) => CompareMode::Exact,
        _ => CompareMode::Numeric(1e-9),
    }
}

/// Runs one experiment end to end: render, write, compare.
pub fn execute(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let workers = resolve_workers(cfg.workers);
    eprintln!(
        "muweyl: {} with {workers} worker{}{}",
        cfg.experiment.kind(),
        if workers == 1 { "" } else { "s" },
        if cfg.workers == 0 { " (auto)" } else { "" }
    );
    let csv = render(&cfg.experiment, workers)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliError::Internal(format!("writing {path}: {e}")))?,
        None => print!("{csv}"),
    }
    if let Some(fx) = &cfg.fixture {
        let path = fixture::resolve_fixture_path(fx);
        let expected = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("reading fixture {}: {e}", path.display())))?;
        fixture::compare_csv(&expected, &csv, compare_mode(&cfg.experiment))
            .map_err(CliError::Mismatch)?;
        eprintln!("muweyl: fixture match: {}", path.display());
    }
    Ok(())
}
