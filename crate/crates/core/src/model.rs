//! Discrete exponential families
//! `p(ωⱼ; θ) = p₀(ωⱼ) · exp(Σᵢ θⁱ Q[i][j] − ψ(θ))` on a finite sample space.
//!
//! The statistics matrix `Q` has one row per statistic and one column per
//! outcome (`n × m`). Entries are integers so that the same model can be handed
//! to [`crate::toric`] unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{intlin, numdiff, Error, Result};

/// Built-in model fixtures, `(name, file contents)`.
pub const BUILTIN_MODELS: &[(&str, &str)] = &[
    ("bernoulli", include_str!("../models/bernoulli.json")),
    ("trinomial", include_str!("../models/trinomial.json")),
    (
        "independence-2x2",
        include_str!("../models/independence-2x2.json"),
    ),
    (
        "random-n3m6-seed0",
        include_str!("../models/random-n3m6-seed0.json"),
    ),
];

/// Tolerance on `Σ p = 1` for [`ProbabilityVector`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub n: usize,
    /// Set when `rank(Q) < n`; the canonical parameters are then not identifiable.
    pub deficient: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialFamilyModel {
    name: String,
    q: Vec<Vec<i64>>,
    base_measure: Vec<f64>,
    rank: RankReport,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    m: usize,
    n: usize,
    #[serde(rename = "Q")]
    q: Vec<Vec<serde_json::Number>>,
    #[serde(default)]
    base_measure: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    name: &'a str,
    m: usize,
    n: usize,
    #[serde(rename = "Q")]
    q: &'a [Vec<i64>],
    #[serde(skip_serializing_if = "Option::is_none")]
    base_measure: Option<&'a [f64]>,
}

impl ExponentialFamilyModel {
    /// Validates and builds a model. `base_measure = None` means all ones.
    pub fn new(
        name: impl Into<String>,
        q: Vec<Vec<i64>>,
        base_measure: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::MalformedModel("Q must have at least one row".into()));
        }
        let m = q[0].len();
        if m < 2 {
            return Err(Error::TooFewOutcomes(m));
        }
        if let Some(row) = q.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
        let base_measure = base_measure.unwrap_or_else(|| vec![1.0; m]);
        if base_measure.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: base_measure.len(),
            });
        }
        for (index, &value) in base_measure.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveBaseMeasure { index, value });
            }
        }
        let r = intlin::rank(&q);
        Ok(Self {
            name: name.into(),
            q,
            base_measure,
            rank: RankReport {
                rank: r,
                n,
                deficient: r < n,
            },
        })
    }

    /// Parses the JSON model-file format.
    pub fn from_json(source: &[u8]) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_slice(source).map_err(|e| Error::MalformedModel(e.to_string()))?;
        if file.m < 2 {
            return Err(Error::TooFewOutcomes(file.m));
        }
        if file.q.len() != file.n {
            return Err(Error::MalformedModel(format!(
                "Q has {} rows but n = {}",
                file.q.len(),
                file.n
            )));
        }
        let mut q = Vec::with_capacity(file.n);
        for (row, entries) in file.q.iter().enumerate() {
            if entries.len() != file.m {
                return Err(Error::MalformedModel(format!(
                    "Q row {row} has {} entries but m = {}",
                    entries.len(),
                    file.m
                )));
            }
            let parsed = entries
                .iter()
                .enumerate()
                .map(|(col, v)| {
                    v.as_i64().ok_or_else(|| Error::NonIntegerEntry {
                        row,
                        col,
                        value: v.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            q.push(parsed);
        }
        Self::new(file.name, q, file.base_measure)
    }

    pub fn to_json(&self) -> String {
        let uniform = self.base_measure.iter().all(|&b| b == 1.0);
        let out = ModelFileOut {
            name: &self.name,
            m: self.m(),
            n: self.n(),
            q: &self.q,
            base_measure: (!uniform).then_some(self.base_measure.as_slice()),
        };
        serde_json::to_string_pretty(&out).expect("model serializes")
    }

    /// Looks up one of [`BUILTIN_MODELS`]; a trailing `.json` and the short
    /// alias `independence` are accepted.
    pub fn builtin(name: &str) -> Option<Self> {
        let key = name.strip_suffix(".json").unwrap_or(name);
        let key = if key == "independence" {
            "independence-2x2"
        } else {
            key
        };
        BUILTIN_MODELS
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, src)| Self::from_json(src.as_bytes()).expect("builtin model is valid"))
    }

    /// Random model with entries of `Q` drawn uniformly from `{0, 1, 2}`,
    /// redrawn until the extended matrix `[1; Q]` has full row rank so that
    /// the Fisher metric is positive definite everywhere.
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        assert!(m >= n + 1, "full rank needs m >= n + 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let q: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0..=2)).collect())
                .collect();
            let mut ext = vec![vec![1i64; m]];
            ext.extend(q.iter().cloned());
            if intlin::rank(&ext) == n + 1 {
                return Self::new(format!("random-n{n}m{m}-seed{seed}"), q, None)
                    .expect("random model is valid");
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of outcomes.
    pub fn m(&self) -> usize {
        self.q[0].len()
    }

    /// Number of statistics.
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[Vec<i64>] {
        &self.q
    }

    pub fn base_measure(&self) -> &[f64] {
        &self.base_measure
    }

    pub fn rank_report(&self) -> &RankReport {
        &self.rank
    }

    pub fn has_uniform_base(&self) -> bool {
        self.base_measure.iter().all(|&b| b == 1.0)
    }

    /// Validated canonical point for this model.
    pub fn point(&self, theta: &[f64]) -> Result<CanonicalPoint> {
        CanonicalPoint::new(theta.to_vec()).and_then(|p| {
            if p.theta.len() == self.n() {
                Ok(p)
            } else {
                Err(Error::DimensionMismatch {
                    expected: self.n(),
                    got: p.theta.len(),
                })
            }
        })
    }

    /// `count` points drawn uniformly from `[-2, 2]ⁿ`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<CanonicalPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| CanonicalPoint {
                theta: (0..self.n()).map(|_| rng.gen_range(-2.0..=2.0)).collect(),
            })
            .collect()
    }

    /// Unnormalized log-weights `log p₀(ωⱼ) + Σᵢ θⁱ Q[i][j]`.
    fn log_weights(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.n(), "canonical point has wrong dimension");
        (0..self.m())
            .map(|j| {
                self.base_measure[j].ln()
                    + self
                        .q
                        .iter()
                        .zip(theta)
                        .map(|(row, t)| t * row[j] as f64)
                        .sum::<f64>()
            })
            .collect()
    }

    fn log_partition_raw(&self, theta: &[f64]) -> f64 {
        log_sum_exp(&self.log_weights(theta))
    }

    /// `ψ(θ) = log Σⱼ p₀(ωⱼ) exp(Σᵢ θⁱ Q[i][j])`.
    pub fn log_partition(&self, point: &CanonicalPoint) -> f64 {
        self.log_partition_raw(&point.theta)
    }

    /// Closure `θ ↦ ψ(θ)` on raw slices, for finite-difference routines.
    pub fn log_partition_fn(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        move |t| self.log_partition_raw(t)
    }

    pub(crate) fn probabilities_raw(&self, theta: &[f64]) -> Vec<f64> {
        let lw = self.log_weights(theta);
        let psi = log_sum_exp(&lw);
        lw.iter().map(|l| (l - psi).exp()).collect()
    }

    pub fn probabilities(&self, point: &CanonicalPoint) -> ProbabilityVector {
        ProbabilityVector {
            p: self.probabilities_raw(&point.theta),
        }
    }

    /// Expectation of each statistic under `p`.
    pub(crate) fn means_from(&self, p: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .map(|row| row.iter().zip(p).map(|(&q, pj)| q as f64 * pj).sum())
            .collect()
    }

    /// `μᵢ = Σⱼ pⱼ Q[i][j] = ∂ᵢψ`, with the central-difference cross-check at `h`.
    pub fn mean_parameters(&self, point: &CanonicalPoint, h: f64) -> MeanParameters {
        let mu = self.means_from(&self.probabilities_raw(&point.theta));
        let fd = numdiff::gradient(self.log_partition_fn(), &point.theta, h);
        let fd_residual = mu
            .iter()
            .zip(&fd)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        MeanParameters {
            mu,
            fd_residual,
            fd_step: h,
        }
    }

    /// `τⱼ = Πᵢ tᵢ^{Q[i][j]}` with `tᵢ = exp(θⁱ)`.
    pub fn monomial_parametrization(&self, point: &CanonicalPoint) -> Vec<f64> {
        let t: Vec<f64> = point.theta.iter().map(|x| x.exp()).collect();
        (0..self.m())
            .map(|j| {
                self.q
                    .iter()
                    .zip(&t)
                    .map(|(row, ti)| ti.powi(row[j] as i32))
                    .product()
            })
            .collect()
    }
}

/// `log Σ exp(xᵢ)` with the maximum shifted out.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalPoint {
    pub theta: Vec<f64>,
}

impl CanonicalPoint {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = theta.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { theta })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            theta: vec![0.0; n],
        }
    }

    pub(crate) fn shifted(&self, i: usize, h: f64) -> Self {
        let mut theta = self.theta.clone();
        theta[i] += h;
        Self { theta }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityVector {
    pub p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.p.iter().all(|&x| x > 0.0 && x < 1.0) && (self.sum() - 1.0).abs() <= NORMALIZATION_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanParameters {
    pub mu: Vec<f64>,
    /// `max |μᵢ − (ψ(θ+heᵢ) − ψ(θ−heᵢ))/2h|`.
    pub fd_residual: f64,
    pub fd_step: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli() -> ExponentialFamilyModel {
        ExponentialFamilyModel::builtin("bernoulli").unwrap()
    }

    #[test]
    fn load_rejects_bad_files() {
        let zero = br#"{"name":"b","m":2,"n":1,"Q":[[0,1]],"base_measure":[0,1]}"#;
        let err = ExponentialFamilyModel::from_json(zero).unwrap_err();
        assert!(
            err.to_string().starts_with("non-positive base measure"),
            "{err}"
        );

        let small = br#"{"name":"b","m":1,"n":1,"Q":[[0]]}"#;
        assert!(matches!(
            ExponentialFamilyModel::from_json(small),
            Err(Error::TooFewOutcomes(1))
        ));

        let frac = br#"{"name":"b","m":2,"n":1,"Q":[[0,0.5]]}"#;
        assert!(matches!(
            ExponentialFamilyModel::from_json(frac),
            Err(Error::NonIntegerEntry { row: 0, col: 1, .. })
        ));

        let unknown = br#"{"name":"b","m":2,"n":1,"Q":[[0,1]],"extra":1}"#;
        assert!(matches!(
            ExponentialFamilyModel::from_json(unknown),
            Err(Error::MalformedModel(_))
        ));

        let ragged = br#"{"name":"b","m":2,"n":1,"Q":[[0,1,2]]}"#;
        assert!(matches!(
            ExponentialFamilyModel::from_json(ragged),
            Err(Error::MalformedModel(_))
        ));
    }

    #[test]
    fn rank_reports() {
        assert_eq!(bernoulli().rank_report().rank, 1);
        let ind = ExponentialFamilyModel::builtin("independence-2x2").unwrap();
        assert_eq!(ind.rank_report().rank, 2);
        let def =
            ExponentialFamilyModel::new("d", vec![vec![1, 2, 3], vec![2, 4, 6]], None).unwrap();
        assert!(def.rank_report().deficient);
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli();
        assert!((b.log_partition(&CanonicalPoint::origin(1)) - 2f64.ln()).abs() < 1e-15);
        let one = b.point(&[1.0]).unwrap();
        // ln(1 + e) evaluated term by term.
        assert!((b.log_partition(&one) - (1.0 + 1f64.exp()).ln()).abs() < 1e-15);
        assert!((b.log_partition(&one) - 1.3132617).abs() < 1e-7);

        let p = b.probabilities(&b.point(&[3f64.ln()]).unwrap());
        assert!((p.p[0] - 0.25).abs() < 1e-15 && (p.p[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn weighted_base_measure() {
        let b = ExponentialFamilyModel::new("w", vec![vec![0, 1]], Some(vec![1.0, 2.0])).unwrap();
        let p = b.probabilities(&CanonicalPoint::origin(1));
        assert!((p.p[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.p[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn trinomial_uniform() {
        let t = ExponentialFamilyModel::builtin("trinomial").unwrap();
        let o = CanonicalPoint::origin(2);
        assert!((t.log_partition(&o) - 3f64.ln()).abs() < 1e-15);
        let mp = t.mean_parameters(&o, 1e-4);
        assert!((mp.mu[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((mp.mu[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(mp.fd_residual < 1e-6);
    }

    #[test]
    fn monomials() {
        let ind = ExponentialFamilyModel::builtin("independence-2x2").unwrap();
        let tau = ind.monomial_parametrization(&ind.point(&[2f64.ln(), 3f64.ln()]).unwrap());
        for (a, b) in tau.iter().zip([6.0, 2.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12, "{tau:?}");
        }
        assert!(ind
            .monomial_parametrization(&CanonicalPoint::origin(2))
            .iter()
            .all(|&t| t == 1.0));

        let b = bernoulli();
        let pt = b.point(&[3f64.ln()]).unwrap();
        let tau = b.monomial_parametrization(&pt);
        assert!((tau[0] - 1.0).abs() < 1e-15 && (tau[1] - 3.0).abs() < 1e-14);
        let s: f64 = tau.iter().sum();
        let p = b.probabilities(&pt);
        for (t, pj) in tau.iter().zip(&p.p) {
            assert!((t / s - pj).abs() < 1e-15);
        }
    }

    #[test]
    fn log_partition_is_stable_for_large_theta() {
        let b = bernoulli();
        let psi = b.log_partition(&b.point(&[700.0]).unwrap());
        assert!((psi - 700.0).abs() < 1e-12);
        let p = b.probabilities(&b.point(&[-700.0]).unwrap());
        assert!(p.p[0] == 1.0 && p.p[1] > 0.0);
    }

    #[test]
    fn point_validation() {
        let b = bernoulli();
        assert!(matches!(
            b.point(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(b.point(&[f64::NAN]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn builtin_aliases() {
        assert!(ExponentialFamilyModel::builtin("independence.json").is_some());
        assert!(ExponentialFamilyModel::builtin("bernoulli.json").is_some());
        assert!(ExponentialFamilyModel::builtin("nope").is_none());
    }

    #[test]
    fn random_fixture_matches_generator() {
        let fixture = ExponentialFamilyModel::builtin("random-n3m6-seed0").unwrap();
        let generated = ExponentialFamilyModel::random(3, 6, 0);
        assert_eq!(fixture.q(), generated.q());
        assert_eq!(fixture.name(), generated.name());
    }

    #[test]
    fn json_round_trip() {
        let b = ExponentialFamilyModel::new("w", vec![vec![0, 1, 3]], Some(vec![1.0, 2.0, 0.5]))
            .unwrap();
        let back = ExponentialFamilyModel::from_json(b.to_json().as_bytes()).unwrap();
        assert_eq!(b, back);
    }
}
