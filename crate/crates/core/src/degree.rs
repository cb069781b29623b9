//! Degree distributions and concrete degree sequences.
//!
//! A [`DegreeDistribution`] keeps a family tag next to a finitely supported
//! mass vector. Infinite-support families are truncated at the first index
//! whose tail mass drops below [`TAIL_MASS`] and renormalized; the family tag
//! lets callers reach the exact closed forms when they need them.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass below which infinite supports are cut.
pub const TAIL_MASS: f64 = 1e-12;

/// Parametric family of a degree distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    Poisson {
        c: f64,
    },
    Dirac {
        d: u32,
    },
    Binomial {
        d: u32,
        p: f64,
    },
    /// Geometric law on `{0, 1, ...}` with `P(k) = p (1 - p)^k`.
    Geometric {
        p: f64,
    },
    /// `P(D >= k) = scale * k^-gamma` for `k >= 1`, remaining mass at zero.
    PowerLaw {
        gamma: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

/// Serialized form of a distribution: `{family, params}` or `{explicit: [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Family(Family),
    Explicit { explicit: Vec<f64> },
}

impl DistSpec {
    pub fn build(&self) -> Result<DegreeDistribution> {
        match self {
            DistSpec::Family(family) => DegreeDistribution::from_family(*family),
            DistSpec::Explicit { explicit } => DegreeDistribution::explicit(explicit.clone()),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Family(Family::Poisson { c }) => write!(f, "poisson:{c}"),
            DistSpec::Family(Family::Dirac { d }) => write!(f, "dirac:{d}"),
            DistSpec::Family(Family::Binomial { d, p }) => write!(f, "binomial:{d},{p}"),
            DistSpec::Family(Family::Geometric { p }) => write!(f, "geometric:{p}"),
            DistSpec::Family(Family::PowerLaw { gamma, scale }) => {
                write!(f, "power_law:{gamma},{scale}")
            }
            DistSpec::Explicit { explicit } => {
                let body: Vec<String> = explicit.iter().map(|m| m.to_string()).collect();
                write!(f, "explicit:{}", body.join(","))
            }
        }
    }
}

/// Parses the compact command-line form, e.g. `poisson:3`, `binomial:5,0.6`,
/// `power_law:2.5` or `explicit:0.2,0.3,0.5`.
impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDistribution(format!("{s:?}: {msg}"));
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected <family>:<params>"))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} parameter(s)")))
            }
        };
        let as_degree = |x: f64| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(bad("degree must be a non-negative integer"))
            }
        };
        let family = match name.trim().to_ascii_lowercase().as_str() {
            "poisson" => {
                arity(1)?;
                Family::Poisson { c: nums[0] }
            }
            "dirac" | "regular" => {
                arity(1)?;
                Family::Dirac {
                    d: as_degree(nums[0])?,
                }
            }
            "binomial" => {
                arity(2)?;
                Family::Binomial {
                    d: as_degree(nums[0])?,
                    p: nums[1],
                }
            }
            "geometric" => {
                arity(1)?;
                Family::Geometric { p: nums[0] }
            }
            "power_law" | "powerlaw" => match nums.len() {
                1 => Family::PowerLaw {
                    gamma: nums[0],
                    scale: 1.0,
                },
                2 => Family::PowerLaw {
                    gamma: nums[0],
                    scale: nums[1],
                },
                _ => return Err(bad("expected gamma[,scale]")),
            },
            "explicit" => return Ok(DistSpec::Explicit { explicit: nums }),
            other => return Err(bad(&format!("unknown family {other:?}"))),
        };
        Ok(DistSpec::Family(family))
    }
}

/// Probability mass function on the non-negative integers.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    family: Option<Family>,
    masses: Vec<f64>,
}

impl DegreeDistribution {
    pub fn poisson(c: f64) -> Result<Self> {
        Self::from_family(Family::Poisson { c })
    }

    pub fn dirac(d: u32) -> Result<Self> {
        Self::from_family(Family::Dirac { d })
    }

    pub fn binomial(d: u32, p: f64) -> Result<Self> {
        Self::from_family(Family::Binomial { d, p })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::from_family(Family::Geometric { p })
    }

    pub fn power_law(gamma: f64, scale: f64) -> Result<Self> {
        Self::from_family(Family::PowerLaw { gamma, scale })
    }

    /// Explicit masses; must be non-negative and sum to one within `1e-9`.
    pub fn explicit(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("empty mass vector".into()));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidDistribution(
                "masses must be finite and >= 0".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(Self {
            family: None,
            masses: normalized(trim_zeros(masses)),
        })
    }

    pub fn from_family(family: Family) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidDistribution(msg));
        let masses = match family {
            Family::Poisson { c } => {
                if !(c.is_finite() && c > 0.0 && c <= 500.0) {
                    return invalid(format!("poisson mean {c} outside (0, 500]"));
                }
                poisson_masses(c)
            }
            Family::Dirac { d } => {
                let mut m = vec![0.0; d as usize + 1];
                m[d as usize] = 1.0;
                m
            }
            Family::Binomial { d, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return invalid(format!("binomial p = {p} outside [0, 1]"));
                }
                binomial_masses(d, p)
            }
            Family::Geometric { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return invalid(format!("geometric p = {p} outside (0, 1]"));
                }
                geometric_masses(p)
            }
            Family::PowerLaw { gamma, scale } => {
                if !(gamma.is_finite() && gamma > 2.0) {
                    return invalid(format!(
                        "power law exponent {gamma} must exceed 2 for a finite second moment"
                    ));
                }
                if !(scale > 0.0 && scale <= 1.0) {
                    return invalid(format!("power law scale {scale} outside (0, 1]"));
                }
                power_law_masses(gamma, scale)
            }
        };
        Ok(Self {
            family: Some(family),
            masses: normalized(trim_zeros(masses)),
        })
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn spec(&self) -> DistSpec {
        match self.family {
            Some(family) => DistSpec::Family(family),
            None => DistSpec::Explicit {
                explicit: self.masses.clone(),
            },
        }
    }

    /// Truncated, renormalized masses; index = degree.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.masses.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Some(Family::Poisson { c }) => c,
            Some(Family::Dirac { d }) => d as f64,
            Some(Family::Binomial { d, p }) => d as f64 * p,
            Some(Family::Geometric { p }) => (1.0 - p) / p,
            _ => self
                .masses
                .iter()
                .enumerate()
                .map(|(k, m)| k as f64 * m)
                .sum(),
        }
    }

    /// `E[D^2]`: analytic for closed-form families, the truncated sum otherwise.
    pub fn second_moment(&self) -> f64 {
        match self.family {
            Some(Family::Poisson { c }) => c + c * c,
            Some(Family::Dirac { d }) => (d as f64).powi(2),
            Some(Family::Binomial { d, p }) => {
                let d = d as f64;
                d * p * (1.0 - p) + (d * p).powi(2)
            }
            Some(Family::Geometric { p }) => {
                let q = 1.0 - p;
                q * (1.0 + q) / (p * p)
            }
            _ => self
                .masses
                .iter()
                .enumerate()
                .map(|(k, m)| (k * k) as f64 * m)
                .sum(),
        }
    }

    fn sample_one<R: Rng + ?Sized>(&self, sampler: &Sampler, rng: &mut R) -> u32 {
        match sampler {
            Sampler::Constant(d) => *d,
            Sampler::Poisson(dist) => dist.sample(rng) as u32,
            Sampler::Binomial(dist) => dist.sample(rng) as u32,
            Sampler::Geometric(dist) => dist.sample(rng).min(u32::MAX as u64) as u32,
            Sampler::PowerLaw { gamma, scale } => loop {
                // Inverse CDF on the tail: P(D >= k) = scale * k^-gamma.
                let u: f64 = 1.0 - rng.random::<f64>();
                if u > *scale {
                    break 0;
                }
                let k = (scale / u).powf(1.0 / gamma).floor();
                if k <= self.max_degree() as f64 {
                    break k as u32;
                }
            },
            Sampler::Table(index) => index.sample(rng) as u32,
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        let err = |e: &dyn fmt::Display| Error::InvalidDistribution(e.to_string());
        Ok(match self.family {
            Some(Family::Dirac { d }) => Sampler::Constant(d),
            Some(Family::Poisson { c }) => Sampler::Poisson(Poisson::new(c).map_err(|e| err(&e))?),
            Some(Family::Binomial { d, p }) => {
                Sampler::Binomial(Binomial::new(d as u64, p).map_err(|e| err(&e))?)
            }
            Some(Family::Geometric { p }) => {
                Sampler::Geometric(Geometric::new(p).map_err(|e| err(&e))?)
            }
            Some(Family::PowerLaw { gamma, scale }) => Sampler::PowerLaw { gamma, scale },
            None => Sampler::Table(WeightedIndex::new(&self.masses).map_err(|e| err(&e))?),
        })
    }
}

enum Sampler {
    Constant(u32),
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    Geometric(Geometric),
    PowerLaw { gamma: f64, scale: f64 },
    Table(WeightedIndex<f64>),
}

fn trim_zeros(mut masses: Vec<f64>) -> Vec<f64> {
    while masses.len() > 1 && masses.last() == Some(&0.0) {
        masses.pop();
    }
    masses
}

fn normalized(mut masses: Vec<f64>) -> Vec<f64> {
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    masses
}

fn poisson_masses(c: f64) -> Vec<f64> {
    let mut masses = vec![(-c).exp()];
    loop {
        let k = masses.len();
        let next = masses[k - 1] * c / k as f64;
        // Tail beyond index k-1 is at most next / (1 - c/(k+1)) once k+1 > c.
        let ratio = c / (k + 1) as f64;
        if ratio < 1.0 && next / (1.0 - ratio) < TAIL_MASS {
            return masses;
        }
        masses.push(next);
    }
}

fn binomial_masses(d: u32, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    (0..=d)
        .map(|k| {
            let mut ln_choose = 0.0;
            for j in 0..k {
                ln_choose += ((d - j) as f64).ln() - ((j + 1) as f64).ln();
            }
            let pk = if k == 0 { 1.0 } else { p.powi(k as i32) };
            let qk = if k == d { 1.0 } else { q.powi((d - k) as i32) };
            ln_choose.exp() * pk * qk
        })
        .collect()
}

fn geometric_masses(p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut masses = vec![p];
    let mut tail = q;
    while tail >= TAIL_MASS {
        masses.push(p * tail);
        tail *= q;
    }
    masses
}

fn power_law_masses(gamma: f64, scale: f64) -> Vec<f64> {
    let last = ((scale / TAIL_MASS).powf(1.0 / gamma)).ceil() as usize;
    let mut masses = Vec::with_capacity(last + 1);
    masses.push(1.0 - scale);
    for k in 1..=last {
        let k = k as f64;
        // k^-g - (k+1)^-g without cancellation.
        let drop = -(-gamma * (1.0 / k).ln_1p()).exp_m1();
        masses.push(scale * k.powf(-gamma) * drop);
    }
    masses
}

/// Concrete degree sequence `(d_1, ..., d_N)` with an even total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
    parity_fixed: bool,
}

impl DegreeSequence {
    /// Takes raw degrees; an odd total is repaired by adding one to the last entry.
    pub fn new(mut degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidSequence("empty degree sequence".into()));
        }
        if degrees.len() > u32::MAX as usize - 1 {
            return Err(Error::InvalidSequence("too many vertices".into()));
        }
        let total: u64 = degrees.iter().map(|&d| d as u64).sum();
        let parity_fixed = total % 2 == 1;
        if parity_fixed {
            *degrees.last_mut().expect("non-empty") += 1;
        }
        Ok(Self {
            degrees,
            parity_fixed,
        })
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn parity_fixed(&self) -> bool {
        self.parity_fixed
    }

    pub fn total_degree(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Degree counts indexed by degree.
    pub fn histogram(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.max_degree() as usize + 1];
        for &d in &self.degrees {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Newline-delimited integers.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.degrees {
            writeln!(out, "{d}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut degrees = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let d = line.parse::<u32>().map_err(|_| {
                Error::InvalidSequence(format!("line {}: {line:?} is not a degree", lineno + 1))
            })?;
            degrees.push(d);
        }
        Self::new(degrees)
    }
}

/// Draws `n` i.i.d. degrees from `dist`; deterministic in `seed`.
pub fn sample_degree_sequence(
    dist: &DegreeDistribution,
    n: usize,
    seed: u64,
) -> Result<DegreeSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_degree_sequence_with(dist, n, &mut rng)
}

pub fn sample_degree_sequence_with<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    n: usize,
    rng: &mut R,
) -> Result<DegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidSequence("n must be at least 1".into()));
    }
    if let Some(Family::PowerLaw { gamma, .. }) = dist.family() {
        if gamma <= 2.0 {
            return Err(Error::InvalidDistribution(format!(
                "power law exponent {gamma} <= 2"
            )));
        }
    }
    let sampler = dist.sampler()?;
    let degrees = (0..n).map(|_| dist.sample_one(&sampler, rng)).collect();
    DegreeSequence::new(degrees)
}

/// Frequencies of each degree in `seq` as an explicit distribution.
pub fn empirical_distribution(seq: &DegreeSequence) -> Result<DegreeDistribution> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("empty degree sequence".into()));
    }
    let n = seq.len() as f64;
    let masses = seq.histogram().into_iter().map(|c| c as f64 / n).collect();
    DegreeDistribution::explicit(masses)
}

/// Outcome of checking a sequence against the moment and max-degree assumptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub gamma: f64,
    /// `(1/N) sum d_i^2`.
    pub second_moment: f64,
    pub max_degree: u32,
    /// `N^(1/gamma)`.
    pub max_degree_bound: f64,
    pub moment_finite: bool,
    pub max_degree_ok: bool,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.moment_finite && self.max_degree_ok
    }
}

pub fn validate_assumptions(seq: &DegreeSequence, gamma: f64) -> AssumptionReport {
    let n = seq.len();
    let second_moment = seq
        .degrees()
        .iter()
        .map(|&d| (d as f64).powi(2))
        .sum::<f64>()
        / n.max(1) as f64;
    let max_degree = seq.max_degree();
    let max_degree_bound = (n as f64).powf(1.0 / gamma);
    AssumptionReport {
        n,
        gamma,
        second_moment,
        max_degree,
        max_degree_bound,
        moment_finite: second_moment.is_finite(),
        max_degree_ok: gamma > 2.0 && (max_degree as f64) <= max_degree_bound,
    }
}

/// Total-variation distance between two mass vectors indexed by degree.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    0.5 * (0..len)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Normalizes a count histogram into frequencies.
pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
