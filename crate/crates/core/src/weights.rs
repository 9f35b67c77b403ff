//! Weight laws, i.i.d. weight sequences and the normalizer `L_N`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Pareto};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// One vertex's `(in-weight, out-weight)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub w_in: f64,
    pub w_out: f64,
}

impl WeightPair {
    pub fn new(w_in: f64, w_out: f64) -> Result<Self> {
        if !(w_in > 0.0 && w_in.is_finite() && w_out > 0.0 && w_out.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weights must be positive and finite, got ({w_in}, {w_out})"
            )));
        }
        Ok(WeightPair { w_in, w_out })
    }

    pub fn mirrored(capacity: f64) -> Result<Self> {
        Self::new(capacity, capacity)
    }
}

/// A one-dimensional weight law.
///
/// `Pareto { tau, x_min }` has density proportional to `x^-tau` on
/// `[x_min, inf)`, i.e. tail `P(X > x) = (x / x_min)^-(tau - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarginal", into = "RawMarginal")]
pub enum Marginal {
    Constant(f64),
    Pareto { tau: f64, x_min: f64 },
}

impl Marginal {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidModel(format!("constant weight must be positive, got {c}")));
        }
        Ok(Marginal::Constant(c))
    }

    pub fn pareto(tau: f64, x_min: f64) -> Result<Self> {
        if !(tau > 2.0 && tau.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "Pareto exponent must satisfy tau > 2 for a finite mean, got {tau}"
            )));
        }
        if !(x_min > 0.0 && x_min.is_finite()) {
            return Err(Error::InvalidModel(format!("Pareto x_min must be positive, got {x_min}")));
        }
        Ok(Marginal::Pareto { tau, x_min })
    }

    fn validate(self) -> Result<Self> {
        match self {
            Marginal::Constant(c) => Self::constant(c),
            Marginal::Pareto { tau, x_min } => Self::pareto(tau, x_min),
        }
    }

    /// `E[X^k]` for `k >= 0`, `+inf` when the integral diverges.
    pub fn raw_moment(&self, k: f64) -> f64 {
        match *self {
            Marginal::Constant(c) => c.powf(k),
            Marginal::Pareto { tau, x_min } => {
                let shape = tau - 1.0;
                if k >= shape {
                    f64::INFINITY
                } else {
                    shape * x_min.powf(k) / (shape - k)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1.0)
    }

    pub fn second_moment(&self) -> f64 {
        self.raw_moment(2.0)
    }

    /// Inverse cdf at `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::Constant(c) => c,
            Marginal::Pareto { tau, x_min } => x_min * (1.0 - u).powf(-1.0 / (tau - 1.0)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Marginal::Constant(_))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Constant(c) => c,
            Marginal::Pareto { tau, x_min } => {
                // parameters were validated at construction
                Pareto::new(x_min, tau - 1.0).unwrap().sample(rng)
            }
        }
    }

    fn short(&self) -> String {
        match *self {
            Marginal::Constant(c) => format!("constant:{c}"),
            Marginal::Pareto { tau, x_min } => format!("pareto:{tau},{x_min}"),
        }
    }
}

/// The weight distribution of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub enum WeightModel {
    /// `w_in = w_out = c` for every vertex.
    Constant(f64),
    /// Independent in- and out-weights with equal means.
    IndependentProduct { w_in: Marginal, w_out: Marginal },
    /// `w_in = w_out = capacity`.
    MirroredCapacity(Marginal),
    /// Shorthand for `MirroredCapacity(Pareto { tau, x_min })`.
    ParetoMirrored { tau: f64, x_min: f64 },
    /// Capacities for the oriented Norros-Reittu constructions; same law as
    /// `MirroredCapacity`.
    OrientedNr(Marginal),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mu: f64,
    pub nu_in: f64,
    pub nu_out: f64,
    pub rho: f64,
}

impl WeightModel {
    pub fn constant(c: f64) -> Result<Self> {
        Marginal::constant(c).map(|_| WeightModel::Constant(c))
    }

    pub fn pareto_mirrored(tau: f64, x_min: f64) -> Result<Self> {
        Marginal::pareto(tau, x_min).map(|_| WeightModel::ParetoMirrored { tau, x_min })
    }

    pub fn mirrored(capacity: Marginal) -> Result<Self> {
        Ok(WeightModel::MirroredCapacity(capacity.validate()?))
    }

    pub fn oriented_nr(capacity: Marginal) -> Result<Self> {
        Ok(WeightModel::OrientedNr(capacity.validate()?))
    }

    pub fn independent(w_in: Marginal, w_out: Marginal) -> Result<Self> {
        let (w_in, w_out) = (w_in.validate()?, w_out.validate()?);
        let (a, b) = (w_in.mean(), w_out.mean());
        if (a - b).abs() > 1e-12 * a.max(b) {
            return Err(Error::InvalidModel(format!(
                "in- and out-weights must have equal means, got {a} and {b}"
            )));
        }
        Ok(WeightModel::IndependentProduct { w_in, w_out })
    }

    /// Mirrored Pareto capacities rescaled so that `E[W^2] / E[W] = 1`.
    pub fn critical_pareto_mirrored(tau: f64) -> Result<Self> {
        if !(tau > 3.0) {
            return Err(Error::InvalidModel(format!(
                "criticality needs a finite second moment, i.e. tau > 3, got {tau}"
            )));
        }
        Self::pareto_mirrored(tau, (tau - 3.0) / (tau - 2.0))
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            WeightModel::Constant(c) => Self::constant(c),
            WeightModel::IndependentProduct { w_in, w_out } => Self::independent(w_in, w_out),
            WeightModel::MirroredCapacity(m) => Self::mirrored(m),
            WeightModel::ParetoMirrored { tau, x_min } => Self::pareto_mirrored(tau, x_min),
            WeightModel::OrientedNr(m) => Self::oriented_nr(m),
        }
    }

    /// The common capacity law when `w_in = w_out` almost surely.
    pub fn capacity(&self) -> Option<Marginal> {
        match *self {
            WeightModel::Constant(c) => Some(Marginal::Constant(c)),
            WeightModel::MirroredCapacity(m) | WeightModel::OrientedNr(m) => Some(m),
            WeightModel::ParetoMirrored { tau, x_min } => Some(Marginal::Pareto { tau, x_min }),
            WeightModel::IndependentProduct { .. } => None,
        }
    }

    pub fn is_mirrored(&self) -> bool {
        self.capacity().is_some()
    }

    pub fn in_marginal(&self) -> Marginal {
        match *self {
            WeightModel::IndependentProduct { w_in, .. } => w_in,
            _ => self.capacity().unwrap(),
        }
    }

    pub fn out_marginal(&self) -> Marginal {
        match *self {
            WeightModel::IndependentProduct { w_out, .. } => w_out,
            _ => self.capacity().unwrap(),
        }
    }

    /// True when both marginals are point masses.
    pub fn is_deterministic(&self) -> bool {
        self.in_marginal().is_constant() && self.out_marginal().is_constant()
    }

    pub fn moments(&self) -> Moments {
        match *self {
            WeightModel::IndependentProduct { w_in, w_out } => Moments {
                mu: w_in.mean(),
                nu_in: w_in.second_moment(),
                nu_out: w_out.second_moment(),
                rho: w_in.mean() * w_out.mean(),
            },
            _ => {
                let cap = self.capacity().unwrap();
                let nu = cap.second_moment();
                Moments { mu: cap.mean(), nu_in: nu, nu_out: nu, rho: nu }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.in_marginal().mean()
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightPair {
        match self {
            WeightModel::IndependentProduct { w_in, w_out } => {
                let a = w_in.sample(rng);
                let b = w_out.sample(rng);
                WeightPair { w_in: a, w_out: b }
            }
            _ => {
                let c = self.capacity().unwrap().sample(rng);
                WeightPair { w_in: c, w_out: c }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight model serializes")
    }

    pub fn short(&self) -> String {
        match *self {
            WeightModel::Constant(c) => format!("constant:{c}"),
            WeightModel::ParetoMirrored { tau, x_min } => format!("pareto-mirrored:{tau},{x_min}"),
            WeightModel::MirroredCapacity(m) => format!("mirrored:{}", m.short()),
            WeightModel::OrientedNr(m) => format!("oriented-nr:{}", m.short()),
            WeightModel::IndependentProduct { w_in, w_out } => {
                format!("independent:{}/{}", w_in.short(), w_out.short())
            }
        }
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

fn parse_numbers(s: &str, expected: usize) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidModel(format!("not a number: {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::InvalidModel(format!(
            "expected {expected} parameter(s), got {:?}",
            s
        )));
    }
    Ok(values)
}

impl FromStr for Marginal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidModel(format!("expected kind:params, got {s:?}")))?;
        match kind {
            "constant" => Marginal::constant(parse_numbers(params, 1)?[0]),
            "pareto" => {
                let v = parse_numbers(params, 2)?;
                Marginal::pareto(v[0], v[1])
            }
            other => Err(Error::InvalidModel(format!("unknown marginal kind {other:?}"))),
        }
    }
}

/// Accepts either the JSON object form or the short form
/// `constant:C`, `pareto-mirrored:TAU,XMIN`, `mirrored:<marginal>`,
/// `oriented-nr:<marginal>`, `independent:<in marginal>/<out marginal>`.
impl FromStr for WeightModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidModel(format!("expected kind:params, got {s:?}")))?;
        match kind {
            "constant" => WeightModel::constant(parse_numbers(params, 1)?[0]),
            "pareto-mirrored" => {
                let v = parse_numbers(params, 2)?;
                WeightModel::pareto_mirrored(v[0], v[1])
            }
            "mirrored" => WeightModel::mirrored(params.parse()?),
            "oriented-nr" => WeightModel::oriented_nr(params.parse()?),
            "independent" => {
                let (a, b) = params.split_once('/').ok_or_else(|| {
                    Error::InvalidModel("independent model needs <in>/<out>".into())
                })?;
                WeightModel::independent(a.parse()?, b.parse()?)
            }
            other => Err(Error::InvalidModel(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginal {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xmin: Option<f64>,
}

fn missing(field: &str, kind: &str) -> Error {
    Error::InvalidModel(format!("field {field:?} is required for kind {kind:?}"))
}

impl TryFrom<RawMarginal> for Marginal {
    type Error = Error;

    fn try_from(raw: RawMarginal) -> Result<Self> {
        match raw.kind.as_str() {
            "constant" => Marginal::constant(raw.c.ok_or_else(|| missing("c", "constant"))?),
            "pareto" => Marginal::pareto(
                raw.tau.ok_or_else(|| missing("tau", "pareto"))?,
                raw.xmin.ok_or_else(|| missing("xmin", "pareto"))?,
            ),
            other => Err(Error::InvalidModel(format!("unknown marginal kind {other:?}"))),
        }
    }
}

impl From<Marginal> for RawMarginal {
    fn from(m: Marginal) -> Self {
        match m {
            Marginal::Constant(c) => {
                RawMarginal { kind: "constant".into(), c: Some(c), tau: None, xmin: None }
            }
            Marginal::Pareto { tau, x_min } => RawMarginal {
                kind: "pareto".into(),
                c: None,
                tau: Some(tau),
                xmin: Some(x_min),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xmin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity: Option<Marginal>,
    #[serde(default, rename = "in", skip_serializing_if = "Option::is_none")]
    w_in: Option<Marginal>,
    #[serde(default, rename = "out", skip_serializing_if = "Option::is_none")]
    w_out: Option<Marginal>,
}

impl TryFrom<RawModel> for WeightModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let kind = raw.kind.as_str();
        match kind {
            "constant" => WeightModel::constant(raw.c.ok_or_else(|| missing("c", kind))?),
            "pareto-mirrored" => WeightModel::pareto_mirrored(
                raw.tau.ok_or_else(|| missing("tau", kind))?,
                raw.xmin.ok_or_else(|| missing("xmin", kind))?,
            ),
            "mirrored" => WeightModel::mirrored(raw.capacity.ok_or_else(|| missing("capacity", kind))?),
            "oriented-nr" => {
                WeightModel::oriented_nr(raw.capacity.ok_or_else(|| missing("capacity", kind))?)
            }
            "independent" => WeightModel::independent(
                raw.w_in.ok_or_else(|| missing("in", kind))?,
                raw.w_out.ok_or_else(|| missing("out", kind))?,
            ),
            other => Err(Error::InvalidModel(format!("unknown model kind {other:?}"))),
        }
    }
}

impl From<WeightModel> for RawModel {
    fn from(m: WeightModel) -> Self {
        let mut raw = RawModel {
            kind: String::new(),
            c: None,
            tau: None,
            xmin: None,
            capacity: None,
            w_in: None,
            w_out: None,
        };
        match m {
            WeightModel::Constant(c) => {
                raw.kind = "constant".into();
                raw.c = Some(c);
            }
            WeightModel::ParetoMirrored { tau, x_min } => {
                raw.kind = "pareto-mirrored".into();
                raw.tau = Some(tau);
                raw.xmin = Some(x_min);
            }
            WeightModel::MirroredCapacity(cap) => {
                raw.kind = "mirrored".into();
                raw.capacity = Some(cap);
            }
            WeightModel::OrientedNr(cap) => {
                raw.kind = "oriented-nr".into();
                raw.capacity = Some(cap);
            }
            WeightModel::IndependentProduct { w_in, w_out } => {
                raw.kind = "independent".into();
                raw.w_in = Some(w_in);
                raw.w_out = Some(w_out);
            }
        }
        raw
    }
}

/// A realized weight sequence for vertices `0..n`, with cached sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    pairs: Vec<WeightPair>,
    sum_in: f64,
    sum_out: f64,
    sum_products: f64,
}

impl WeightSequence {
    pub fn new(pairs: Vec<WeightPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("weight sequence must be non-empty".into()));
        }
        for p in &pairs {
            WeightPair::new(p.w_in, p.w_out)?;
        }
        let (sum_in, sum_out, sum_products) = pairs.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.w_in, acc.1 + p.w_out, acc.2 + p.w_in * p.w_out)
        });
        Ok(WeightSequence { pairs, sum_in, sum_out, sum_products })
    }

    pub fn mirrored(capacities: &[f64]) -> Result<Self> {
        Self::new(capacities.iter().map(|&c| WeightPair { w_in: c, w_out: c }).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[WeightPair] {
        &self.pairs
    }

    pub fn get(&self, v: usize) -> WeightPair {
        self.pairs[v]
    }

    pub fn sum_in(&self) -> f64 {
        self.sum_in
    }

    pub fn sum_out(&self) -> f64 {
        self.sum_out
    }

    pub fn sum_products(&self) -> f64 {
        self.sum_products
    }

    pub fn w_in(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.w_in).collect()
    }

    pub fn w_out(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.w_out).collect()
    }

    /// First `n` weights. Prefix sums are recomputed from scratch.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix length {n} outside 1..={}",
                self.len()
            )));
        }
        Self::new(self.pairs[..n].to_vec())
    }

    pub fn is_mirrored(&self) -> bool {
        self.pairs.iter().all(|p| p.w_in == p.w_out)
    }

    /// Capacities of a mirrored sequence.
    pub fn capacities(&self) -> Result<Vec<f64>> {
        if !self.is_mirrored() {
            return Err(Error::InvalidArgument(
                "construction requires mirrored weights (w_in = w_out for every vertex)".into(),
            ));
        }
        Ok(self.w_in())
    }

    /// TSV export: `index\tw_in\tw_out`, 1-based indices.
    pub fn write_tsv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# index\tw_in\tw_out")?;
        for (i, p) in self.pairs.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}", i + 1, p.w_in, p.w_out)?;
        }
        Ok(())
    }
}

/// Draw `n` i.i.d. weight pairs. Pair `i` depends only on `(seed, i)`.
pub fn sample_weights(model: &WeightModel, n: usize, seed: u64) -> Result<WeightSequence> {
    sample_weights_with(model, n, seed, Purpose::Weights)
}

pub(crate) fn sample_weights_with(
    model: &WeightModel,
    n: usize,
    seed: u64,
    purpose: Purpose,
) -> Result<WeightSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let model = model.validate()?;
    if model.is_deterministic() {
        let p = WeightPair { w_in: model.in_marginal().mean(), w_out: model.out_marginal().mean() };
        return WeightSequence::new(vec![p; n]);
    }
    let pairs: Vec<WeightPair> = (0..n as u64)
        .into_par_iter()
        .map(|i| model.sample_pair(&mut stream(seed, purpose, i)))
        .collect();
    WeightSequence::new(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerMode {
    /// `L_N = mu * N`
    DeterministicMuN,
    /// `L_N = (sum w_out)(sum w_in) / (mu * N)`
    EmpiricalProduct,
    /// `L_N = sum of capacities`; mirrored weights only.
    CapacitySum,
}

impl NormalizerMode {
    pub fn name(&self) -> &'static str {
        match self {
            NormalizerMode::DeterministicMuN => "deterministic-mu-n",
            NormalizerMode::EmpiricalProduct => "empirical-product",
            NormalizerMode::CapacitySum => "capacity-sum",
        }
    }

    /// Whether `L_N` is pathwise non-decreasing in `N`, as the graph process needs.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, NormalizerMode::EmpiricalProduct)
    }
}

impl fmt::Display for NormalizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormalizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic-mu-n" | "mu-n" => Ok(NormalizerMode::DeterministicMuN),
            "empirical-product" => Ok(NormalizerMode::EmpiricalProduct),
            "capacity-sum" => Ok(NormalizerMode::CapacitySum),
            other => Err(Error::InvalidArgument(format!("unknown normalizer mode {other:?}"))),
        }
    }
}

pub fn normalizer(w: &WeightSequence, mu: f64, mode: NormalizerMode) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive and finite, got {mu}")));
    }
    let n = w.len() as f64;
    match mode {
        NormalizerMode::DeterministicMuN => Ok(mu * n),
        NormalizerMode::EmpiricalProduct => Ok(w.sum_out() * w.sum_in() / (mu * n)),
        NormalizerMode::CapacitySum => {
            if !w.is_mirrored() {
                return Err(Error::ModeMismatch {
                    mode: mode.to_string(),
                    reason: "capacity sums need w_in = w_out for every vertex".into(),
                });
            }
            Ok(w.sum_in())
        }
    }
}
