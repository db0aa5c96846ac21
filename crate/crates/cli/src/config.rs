//! Strict TOML experiment configuration.
//!
//! A config document has one `[experiment.<kind>]` table naming the
//! experiment plus optional top-level `workers`, `out`, and `fixture` keys.
//! Unknown keys anywhere are hard errors. Values round-trip losslessly
//! through [`ExperimentConfig::to_toml`], and the experiment table alone
//! feeds the config hash recorded in every CSV, so `out`, `fixture`, and
//! `workers` never change the hash (nor, by the determinism contract, the
//! output bytes).

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

/// A positive-or-zero integer parameter. Accepts plain TOML integers and
/// strings in scientific notation (`"1e6"`, `"2.5e5"`) that denote exact
/// integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub u64);

impl Count {
    pub fn get(self) -> u64 {
        self.0
    }
}

/// Parses `"123"`, `"1e6"`, or `"2.5e5"` into an exact u64.
pub fn parse_count(text: &str) -> Result<u64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty count".into());
    }
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e),
        None => return Err(format!("`{s}` is not an unsigned integer")),
    };
    let exp: u32 = exp
        .parse()
        .map_err(|_| format!("`{s}` has a bad exponent"))?;
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.len() as u32 > exp {
        return Err(format!("`{s}` is not an integer"));
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("`{s}` is not an unsigned integer"));
    }
    let zeros = exp - frac_part.len() as u32;
    let base: u64 = digits
        .parse()
        .map_err(|_| format!("`{s}` is out of range"))?;
    let mut value = base;
    for _ in 0..zeros {
        value = value
            .checked_mul(10)
            .ok_or_else(|| format!("`{s}` is out of range"))?;
    }
    Ok(value)
}

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> Result<Count, String> {
        parse_count(s).map(Count)
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Count, D::Error> {
        struct CountVisitor;
        impl Visitor<'_> for CountVisitor {
            type Value = Count;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an unsigned integer or a string like \"1e6\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Count, E> {
                Ok(Count(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Count, E> {
                u64::try_from(v)
                    .map(Count)
                    .map_err(|_| E::custom(format!("negative count {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Count, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(CountVisitor)
    }
}

/// Accepts a single count or an array of counts; always serializes as an
/// array (value-level round trip).
fn one_or_many<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Count>, D::Error> {
    struct OneOrMany;
    impl<'de> Visitor<'de> for OneOrMany {
        type Value = Vec<Count>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a count or an array of counts")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Vec<Count>, E> {
            Ok(vec![Count(v)])
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Vec<Count>, E> {
            u64::try_from(v)
                .map(|v| vec![Count(v)])
                .map_err(|_| E::custom(format!("negative count {v}")))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Vec<Count>, E> {
            v.parse().map(|c| vec![c]).map_err(E::custom)
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<Count>, A::Error> {
            let mut out = Vec::new();
            while let Some(c) = seq.next_element::<Count>()? {
                out.push(c);
            }
            Ok(out)
        }
    }
    deserializer.deserialize_any(OneOrMany)
}

/// The multiplicative weight, as a compact token:
/// `moebius`, `liouville`, `archimedean:<t>`, or `random-unimodular:<seed>`.
#[derive(Debug, Clone, PartialEq)]
pub enum NuToken {
    Moebius,
    Liouville,
    Archimedean(f64),
    RandomUnimodular(u64),
}

impl FromStr for NuToken {
    type Err = String;

    fn from_str(s: &str) -> Result<NuToken, String> {
        match s {
            "moebius" => return Ok(NuToken::Moebius),
            "liouville" => return Ok(NuToken::Liouville),
            _ => {}
        }
        if let Some(t) = s.strip_prefix("archimedean:") {
            let t: f64 = t
                .parse()
                .map_err(|_| format!("bad archimedean parameter `{t}`"))?;
            if !t.is_finite() {
                return Err(format!("non-finite archimedean parameter `{t}`"));
            }
            return Ok(NuToken::Archimedean(t));
        }
        if let Some(seed) = s.strip_prefix("random-unimodular:") {
            let seed: u64 = seed
                .parse()
                .map_err(|_| format!("bad random-unimodular seed `{seed}`"))?;
            return Ok(NuToken::RandomUnimodular(seed));
        }
        Err(format!(
            "unknown nu token `{s}` (expected moebius, liouville, archimedean:<t>, \
             or random-unimodular:<seed>)"
        ))
    }
}

impl fmt::Display for NuToken {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            NuToken::Moebius => f.write_str("moebius"),
            NuToken::Liouville => f.write_str("liouville"),
            NuToken::Archimedean(t) => write!(f, "archimedean:{t}"),
            NuToken::RandomUnimodular(seed) => write!(f, "random-unimodular:{seed}"),
        }
    }
}

impl Serialize for NuToken {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NuToken {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<NuToken, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A block-gap rule token: `sqrt`, `sqrt-plus-one`, `log2-plus-one`, or
/// `power:<theta>` with `0 < theta < 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeToken {
    Sqrt,
    SqrtPlusOne,
    Log2PlusOne,
    Power(f64),
}

impl FromStr for SchemeToken {
    type Err = String;

    fn from_str(s: &str) -> Result<SchemeToken, String> {
        match s {
            "sqrt" => return Ok(SchemeToken::Sqrt),
            "sqrt-plus-one" => return Ok(SchemeToken::SqrtPlusOne),
            "log2-plus-one" => return Ok(SchemeToken::Log2PlusOne),
            _ => {}
        }
        if let Some(theta) = s.strip_prefix("power:") {
            let theta: f64 = theta
                .parse()
                .map_err(|_| format!("bad power exponent `{theta}`"))?;
            return Ok(SchemeToken::Power(theta));
        }
        Err(format!(
            "unknown scheme token `{s}` (expected sqrt, sqrt-plus-one, log2-plus-one, \
             or power:<theta>)"
        ))
    }
}

impl fmt::Display for SchemeToken {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            SchemeToken::Sqrt => f.write_str("sqrt"),
            SchemeToken::SqrtPlusOne => f.write_str("sqrt-plus-one"),
            SchemeToken::Log2PlusOne => f.write_str("log2-plus-one"),
            SchemeToken::Power(theta) => write!(f, "power:{theta}"),
        }
    }
}

impl Serialize for SchemeToken {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SchemeToken {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SchemeToken, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// The short-interval window: `"auto"` (meaning `floor(M^(1/3))` per `M`),
/// one count, or a list matching the `M` list.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    Auto,
    Fixed(Vec<Count>),
}

impl Default for Window {
    fn default() -> Window {
        Window::Auto
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Window::Auto => serializer.serialize_str("auto"),
            Window::Fixed(counts) => counts.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Window, D::Error> {
        struct WindowVisitor;
        impl<'de> Visitor<'de> for WindowVisitor {
            type Value = Window;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\", a count, or an array of counts")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Window, E> {
                Ok(Window::Fixed(vec![Count(v)]))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Window, E> {
                u64::try_from(v)
                    .map(|v| Window::Fixed(vec![Count(v)]))
                    .map_err(|_| E::custom(format!("negative count {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Window, E> {
                if v == "auto" {
                    return Ok(Window::Auto);
                }
                v.parse()
                    .map(|c| Window::Fixed(vec![c]))
                    .map_err(E::custom)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Window, A::Error> {
                let mut out = Vec::new();
                while let Some(c) = seq.next_element::<Count>()? {
                    out.push(c);
                }
                Ok(Window::Fixed(out))
            }
        }
        deserializer.deserialize_any(WindowVisitor)
    }
}

fn count_one() -> Count {
    Count(1)
}

fn count_zero() -> Count {
    Count(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieveSpec {
    pub kind: NuToken,
    #[serde(default = "count_one")]
    pub from: Count,
    pub to: Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    /// Coefficient tokens, highest degree first.
    pub poly: Vec<String>,
    #[serde(default = "count_zero")]
    pub from: Count,
    pub count: Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiMode {
    TrLemma,
    Birkhoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiSpec {
    pub mode: QuasiMode,
    /// tr-lemma: torus dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Count>,
    /// tr-lemma: check powers `r = 1..=r_max`.
    #[serde(default, rename = "r-max", skip_serializing_if = "Option::is_none")]
    pub r_max: Option<Count>,
    /// tr-lemma: random characters per power (default 64).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chars: Option<Count>,
    /// tr-lemma: RNG seed for the characters (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Count>,
    /// birkhoff: character frequency, one entry per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<Vec<i64>>,
    /// birkhoff: rotation number token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    /// birkhoff: number of orbit points.
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<Count>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbszSpec {
    pub poly: Vec<String>,
    #[serde(rename = "primes-up-to")]
    pub primes_up_to: Count,
    #[serde(rename = "N")]
    pub n: Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortIntervalSpec {
    pub poly: Vec<String>,
    pub nu: NuToken,
    #[serde(rename = "M", deserialize_with = "one_or_many")]
    pub m: Vec<Count>,
    #[serde(rename = "H", default)]
    pub h: Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockStatSpec {
    pub poly: Vec<String>,
    pub nu: NuToken,
    pub scheme: SchemeToken,
    /// Explicit block counts, one row per entry.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    #[serde(deserialize_with = "optional_one_or_many")]
    pub k: Option<Vec<Count>>,
    /// Alternative to `K`: coverage targets; each is mapped to the largest
    /// `K` whose blocks fit inside `[1, limit]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[serde(deserialize_with = "optional_one_or_many")]
    pub limit: Option<Vec<Count>>,
}

fn optional_one_or_many<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> Result<Option<Vec<Count>>, D::Error> {
    one_or_many(deserializer).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchedMode {
    Blocks,
    Defect,
}

impl Default for SwitchedMode {
    fn default() -> SwitchedMode {
        SwitchedMode::Blocks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMode {
    /// Every block reuses the base point (the switching is trivial).
    Equal,
    /// Block seeds rotated so each block sum lands on the positive real axis.
    Aligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchedSpec {
    #[serde(default)]
    pub mode: SwitchedMode,
    pub scheme: SchemeToken,
    /// blocks mode: orbit polynomial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<String>>,
    /// blocks mode: weight used for the block sums (and for aligning seeds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuToken>,
    /// blocks mode: how block seeds are chosen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedMode>,
    /// blocks mode: number of blocks.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<Count>,
    /// blocks mode: alternative to `K`, a coverage target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Count>,
    /// defect mode: orbit lengths, one row per entry.
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    #[serde(deserialize_with = "optional_one_or_many")]
    pub n: Option<Vec<Count>>,
}

/// The experiment table; the variant name is the `[experiment.<kind>]` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Sieve(SieveSpec),
    Phase(PhaseSpec),
    Quasi(QuasiSpec),
    Kbsz(KbszSpec),
    ShortInterval(ShortIntervalSpec),
    BlockStat(BlockStatSpec),
    Switched(SwitchedSpec),
}

impl ExperimentSpec {
    /// The kebab-case kind name, as it appears in configs and subcommands.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Sieve(_) => "sieve",
            ExperimentSpec::Phase(_) => "phase",
            ExperimentSpec::Quasi(_) => "quasi",
            ExperimentSpec::Kbsz(_) => "kbsz",
            ExperimentSpec::ShortInterval(_) => "short-interval",
            ExperimentSpec::BlockStat(_) => "block-stat",
            ExperimentSpec::Switched(_) => "switched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSpec,
    /// Worker count; 0 means all available parallelism.
    #[serde(default)]
    pub workers: usize,
    /// CSV destination; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Expected-output CSV to compare against after the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentSpec) -> ExperimentConfig {
        ExperimentConfig { experiment, workers: 0, out: None, fixture: None }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }
}

/// Parses a strict TOML config document. Errors carry the offending line
/// and key (unknown keys are never ignored).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

/// The config hash recorded in CSV output: SHA-256 over the canonical
/// serialization of the experiment table alone (so output paths, fixtures,
/// and worker counts do not perturb it), truncated to 16 hex digits.
pub fn config_hash(experiment: &ExperimentSpec) -> String {
    #[derive(Serialize)]
    struct HashDoc<'a> {
        experiment: &'a ExperimentSpec,
    }
    let canonical =
        toml::to_string(&HashDoc { experiment }).expect("config serialization cannot fail");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
