//! Density sweeps: for each density and trial, draw seeded random argument
//! sets from the configured domains and record the exact image size.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    image_x_plus_yz, image_x_times_y_plus_z, image_xy_plus_z_plus_t_sets, product_set, random_subset, sum_set,
};
use crate::error::{Error, Result};
use crate::field::{Felt, FieldOptions, FieldSpec};
use crate::matrix::{MatIndex, MatRing, MatSet, Stratum};
use crate::seed::derive_seed;

/// A density in `(0, 1]`, kept exact so that `ceil(density |domain|)` never
/// suffers from rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density(Ratio<u64>);

impl Density {
    pub const ONE: Density = Density(Ratio::new_raw(1, 1));

    pub fn new(num: u64, den: u64) -> Result<Density> {
        if den == 0 {
            return Err(Error::InvalidDensity(f64::NAN));
        }
        let d = Density(Ratio::new(num, den));
        d.validate()?;
        Ok(d)
    }

    pub fn parts(self) -> (u64, u64) {
        (*self.0.numer(), *self.0.denom())
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn validate(self) -> Result<()> {
        if *self.0.numer() == 0 || self.0.numer() > self.0.denom() {
            return Err(Error::InvalidDensity(self.as_f64()));
        }
        Ok(())
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `a/b`, an integer, or a plain decimal such as `0.25`.
impl FromStr for Density {
    type Err = Error;

    fn from_str(s: &str) -> Result<Density> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad density {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            return Density::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        Density::new(num, den)
    }
}

impl Serialize for Density {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Density {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Int(i) => i.to_string(),
            Repr::Float(f) => f.to_string(),
            Repr::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Where an argument set is drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub enum Domain {
    All,
    Gl,
    Sl,
    Det(Felt),
    Singular,
    /// Matrix indices given inline.
    Explicit(Vec<u32>),
    /// A set file in the `n q count` text format.
    File(PathBuf),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainRepr {
    Name(String),
    Explicit { explicit: Vec<u32> },
    File { file: PathBuf },
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;

    fn try_from(r: DomainRepr) -> Result<Domain> {
        match r {
            DomainRepr::Name(s) => s.parse(),
            DomainRepr::Explicit { explicit } => Ok(Domain::Explicit(explicit)),
            DomainRepr::File { file } => Ok(Domain::File(file)),
        }
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> DomainRepr {
        match d {
            Domain::Explicit(explicit) => DomainRepr::Explicit { explicit },
            Domain::File(file) => DomainRepr::File { file },
            named => DomainRepr::Name(named.to_string()),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::All => f.write_str("ALL"),
            Domain::Gl => f.write_str("GL"),
            Domain::Sl => f.write_str("SL"),
            Domain::Det(a) => write!(f, "DET({a})"),
            Domain::Singular => f.write_str("SINGULAR"),
            Domain::Explicit(_) | Domain::File(_) => f.write_str("EXPLICIT"),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Domain> {
        if s.trim().eq_ignore_ascii_case("SINGULAR") {
            return Ok(Domain::Singular);
        }
        match s.parse::<Stratum>()? {
            Stratum::All => Ok(Domain::All),
            Stratum::Gl => Ok(Domain::Gl),
            Stratum::Sl => Ok(Domain::Sl),
            Stratum::Det(a) => Ok(Domain::Det(a)),
            Stratum::Rank(_) => Err(Error::Parse(format!("rank strata are not sweep domains: {s:?}"))),
        }
    }
}

impl Domain {
    pub fn resolve(&self, ring: &MatRing) -> Result<MatSet> {
        match self {
            Domain::All => Ok(MatSet::full(ring)),
            Domain::Gl => ring.stratum_set(Stratum::Gl),
            Domain::Sl => ring.stratum_set(Stratum::Sl),
            Domain::Det(a) => ring.stratum_set(Stratum::Det(*a)),
            Domain::Singular => ring.stratum_set(Stratum::Det(Felt::ZERO)),
            Domain::Explicit(v) => {
                let idx = v.iter().map(|&i| ring.index(i as u64)).collect::<Result<Vec<MatIndex>>>()?;
                Ok(MatSet::from_indices(ring, idx))
            }
            Domain::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
                MatSet::from_text(ring, &text)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Polynomial {
    XPlusYz,
    XTimesYPlusZ,
    XyPlusZPlusT,
    SumSet,
    ProductSet,
}

impl Polynomial {
    pub const ALL: [Polynomial; 5] = [
        Polynomial::XPlusYz,
        Polynomial::XTimesYPlusZ,
        Polynomial::XyPlusZPlusT,
        Polynomial::SumSet,
        Polynomial::ProductSet,
    ];

    pub fn arity(self) -> usize {
        match self {
            Polynomial::XPlusYz | Polynomial::XTimesYPlusZ => 3,
            Polynomial::XyPlusZPlusT => 4,
            Polynomial::SumSet | Polynomial::ProductSet => 2,
        }
    }

    pub fn image(self, ring: &MatRing, args: &[&MatSet]) -> Result<MatSet> {
        if args.len() != self.arity() {
            return Err(Error::InvalidConfig(format!("{self} takes {} arguments, got {}", self.arity(), args.len())));
        }
        match self {
            Polynomial::XPlusYz => image_x_plus_yz(ring, args[0], args[1], args[2]),
            Polynomial::XTimesYPlusZ => image_x_times_y_plus_z(ring, args[0], args[1], args[2]),
            Polynomial::XyPlusZPlusT => image_xy_plus_z_plus_t_sets(ring, args[0], args[1], args[2], args[3]),
            Polynomial::SumSet => sum_set(ring, args[0], args[1]),
            Polynomial::ProductSet => product_set(ring, args[0], args[1]),
        }
    }

    /// Exponent `e` such that the image is predicted to be of full order
    /// once `|A| >> q^e`.
    pub fn threshold_exponent(self, n: usize, domains: &[Domain]) -> f64 {
        let n2 = (n * n) as f64;
        let all_sl = domains.iter().all(|d| *d == Domain::Sl);
        match self {
            Polynomial::XPlusYz if all_sl => n2 - 1.0 - (n as f64 - 1.0) / 2.0,
            Polynomial::XTimesYPlusZ if all_sl => n2 - 2.0,
            Polynomial::XyPlusZPlusT => n2 - 0.25,
            _ => n2 - 1.0,
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polynomial::XPlusYz => "X_PLUS_YZ",
            Polynomial::XTimesYPlusZ => "X_TIMES_Y_PLUS_Z",
            Polynomial::XyPlusZPlusT => "XY_PLUS_Z_PLUS_T",
            Polynomial::SumSet => "SUM_SET",
            Polynomial::ProductSet => "PRODUCT_SET",
        })
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Polynomial> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Polynomial::ALL
            .into_iter()
            .find(|p| p.to_string() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown polynomial {s:?}")))
    }
}

fn default_domains() -> Vec<Domain> {
    vec![Domain::All]
}

/// One sweep. With a single domain every argument is the same random set
/// `A`, which is the `f(A, ..., A)` setting; with one domain per argument
/// the sets are drawn independently.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub q: u32,
    pub polynomial: Polynomial,
    #[serde(default = "default_domains")]
    pub domains: Vec<Domain>,
    pub densities: Vec<Density>,
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub allow_even: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.densities.is_empty() {
            return Err(Error::InvalidConfig("no densities given".into()));
        }
        for d in &self.densities {
            d.validate()?;
        }
        if self.densities.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("densities must be strictly ascending".into()));
        }
        let k = self.domains.len();
        if k != 1 && k != self.polynomial.arity() {
            return Err(Error::InvalidConfig(format!(
                "{} takes {} arguments but {k} domains were given",
                self.polynomial,
                self.polynomial.arity()
            )));
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<MatRing> {
        let opts = FieldOptions { allow_even: self.allow_even, ..FieldOptions::default() };
        MatRing::new(Arc::new(FieldSpec::from_order(self.q as u64, opts)?), self.n)
    }

    /// The domain column: `SL`, or `SL|SL|ALL` for per-argument domains.
    pub fn domain_label(&self) -> String {
        self.domains.iter().map(Domain::to_string).collect::<Vec<_>>().join("|")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageStats {
    /// `|A|, |B|, ...`, one per argument.
    pub sizes: Vec<u64>,
    pub image: u64,
    /// `image / q^{n^2}`.
    pub coverage: f64,
    pub covers_all: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub q: u32,
    pub polynomial: Polynomial,
    pub domain: String,
    pub density: Density,
    pub trial: u32,
    #[serde(flatten)]
    pub stats: ImageStats,
    /// `q^e` from [`Polynomial::threshold_exponent`].
    pub predicted_threshold_size: f64,
    /// The same threshold as a fraction of the first argument's domain.
    pub predicted_threshold_density: f64,
}

impl SweepRow {
    pub fn csv_header() -> &'static str {
        "n,q,polynomial,domain,density,trial,sizeA,sizeB,sizeC,sizeD,image,coverage,covers_all,seed,predicted_threshold_size,predicted_threshold_density"
    }

    pub fn csv_row(&self) -> String {
        let size = |i: usize| self.stats.sizes.get(i).map(u64::to_string).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.q,
            self.polynomial,
            self.domain,
            self.density,
            self.trial,
            size(0),
            size(1),
            size(2),
            size(3),
            self.stats.image,
            self.stats.coverage,
            self.stats.covers_all,
            self.stats.seed,
            self.predicted_threshold_size,
            self.predicted_threshold_density,
        )
    }
}

/// Seed label for sweep trials.
pub const SWEEP_LABEL: &str = "sweep";

pub fn threshold_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let ring = config.ring()?;
    let domains = config.domains.iter().map(|d| d.resolve(&ring)).collect::<Result<Vec<_>>>()?;
    let label = config.domain_label();
    let exponent = config.polynomial.threshold_exponent(config.n, &config.domains);
    let threshold = (config.q as f64).powf(exponent);
    let threshold_density = threshold / domains[0].len() as f64;
    let size = ring.size();
    let arity = config.polynomial.arity();

    let jobs: Vec<(usize, u32)> =
        (0..config.densities.len()).flat_map(|i| (0..config.trials).map(move |t| (i, t))).collect();
    jobs.par_iter()
        .map(|&(di, trial)| {
            let density = config.densities[di];
            let seed = derive_seed(config.seed, SWEEP_LABEL, di as u64, trial as u64);
            let sets: Vec<MatSet> = if domains.len() == 1 {
                vec![random_subset(&ring, &domains[0], density, seed)?]
            } else {
                domains
                    .iter()
                    .enumerate()
                    .map(|(j, dom)| random_subset(&ring, dom, density, derive_seed(seed, "argument", j as u64, 0)))
                    .collect::<Result<_>>()?
            };
            let args: Vec<&MatSet> = (0..arity).map(|j| &sets[j.min(sets.len() - 1)]).collect();
            let image = config.polynomial.image(&ring, &args)?.len();
            Ok(SweepRow {
                n: config.n,
                q: config.q,
                polynomial: config.polynomial,
                domain: label.clone(),
                density,
                trial,
                stats: ImageStats {
                    sizes: args.iter().map(|s| s.len()).collect(),
                    image,
                    coverage: image as f64 / size as f64,
                    covers_all: image == size,
                    seed,
                },
                predicted_threshold_size: threshold,
                predicted_threshold_density: threshold_density,
            })
        })
        .collect()
}

/// Mean coverage per density, in the order the densities first appear.
pub fn mean_coverage(rows: &[SweepRow]) -> Vec<(Density, f64)> {
    let mut out: Vec<(Density, f64, u32)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|e| e.0 == r.density) {
            Some(e) => {
                e.1 += r.stats.coverage;
                e.2 += 1;
            }
            None => out.push((r.density, r.stats.coverage, 1)),
        }
    }
    out.into_iter().map(|(d, s, k)| (d, s / k as f64)).collect()
}
