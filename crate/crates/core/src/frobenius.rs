//! Pre-Frobenius multiplication `∂a ∘ ∂b = Σ_c A^c_ab ∂c` with `A = κ C`, and
//! residuals for metric invariance, associativity and potentiality.
//!
//! The default `κ = −2` identifies `A` with `−2C`; the difference tensor of the
//! α-pencil would give `+2C`. The sign of `κ` flips `∘` but leaves every residual
//! magnitude unchanged, so it is a parameter rather than a constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{self, statistical_structure, MetricTensor, DEFAULT_CONDITION_CAP};
use crate::model::{CanonicalPoint, ExponentialFamilyModel};
use crate::numdiff;
use crate::tensor::Tensor3;
use crate::Result;

pub const DEFAULT_KAPPA: f64 = -2.0;
pub const DEFAULT_POTENTIAL_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicationTable {
    /// `A_abc = κ C_abc`.
    pub a_lower: Tensor3,
    /// `A^c_ab = Σ_d g^{cd} A_abd`, stored `[a][b][c]`.
    pub a_mixed: Tensor3,
    pub kappa: f64,
}

impl MultiplicationTable {
    /// `X ∘ Y` in components.
    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.a_mixed.dim();
        (0..n)
            .map(|c| {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += x[a] * y[b] * self.a_mixed.get(a, b, c);
                    }
                }
                s
            })
            .collect()
    }
}

fn table_with_metric(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
) -> Result<(MultiplicationTable, MetricTensor)> {
    let s = statistical_structure(model, point);
    let ginv = s.metric.inverse(DEFAULT_CONDITION_CAP)?;
    let a_lower = s.cubic.0.scale(kappa);
    let a_mixed = geometry::raise_last(&a_lower, &ginv);
    Ok((
        MultiplicationTable {
            a_lower,
            a_mixed,
            kappa,
        },
        s.metric,
    ))
}

pub fn multiplication_constants(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
) -> Result<MultiplicationTable> {
    table_with_metric(model, point, kappa).map(|(t, _)| t)
}

/// Max over `trials` random triples of `|g(X∘Y, Z) − g(X, Y∘Z)|`, with
/// components drawn uniformly from `[-1, 1]`.
///
/// Total symmetry of `A` makes this zero up to rounding for every model; a
/// nonzero value points at the implementation, not at the model.
pub fn metric_invariance_residual(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let (table, metric) = table_with_metric(model, point, kappa)?;
    let n = model.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect() };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (x, y, z) = (draw(), draw(), draw());
        let left = metric.inner(&table.multiply(&x, &y), &z);
        let right = metric.inner(&x, &table.multiply(&y, &z));
        worst = worst.max((left - right).abs());
    }
    Ok(worst)
}

/// `max_{a,b,c,f} |Σ_e (A^e_ab A^f_ec − A^e_bc A^f_ea)|`, i.e. the largest
/// component of `(∂a∘∂b)∘∂c − ∂a∘(∂b∘∂c)`.
pub fn associativity_residual(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
) -> Result<f64> {
    let table = multiplication_constants(model, point, kappa)?;
    Ok(associator_max(&table.a_mixed))
}

fn associator_max(a: &Tensor3) -> f64 {
    let n = a.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for f in 0..n {
                    let mut s = 0.0;
                    for e in 0..n {
                        s += a.get(i, j, e) * a.get(e, k, f) - a.get(j, k, e) * a.get(e, i, f);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// `max |A_abc − ∂a∂b∂c(κψ)|` with the third derivative by central differences.
pub fn potentiality_residual(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
    step: f64,
) -> f64 {
    let a = statistical_structure(model, point).cubic.0.scale(kappa);
    let d3 = numdiff::third_derivative(model.log_partition_fn(), &point.theta, step);
    let n = model.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((a.get(i, j, k) - kappa * d3[i][j][k]).abs());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct PencilConnection {
    pub lambda: f64,
    /// `Γ_λ = Γ⁰ + λ A`, mixed, stored `[a][b][c]`.
    pub gamma: Tensor3,
}

pub fn pencil_connection(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    lambda: f64,
    kappa: f64,
) -> Result<PencilConnection> {
    let table = multiplication_constants(model, point, kappa)?;
    let lc = geometry::alpha_christoffels(model, point, 0.0)?;
    Ok(PencilConnection {
        lambda,
        gamma: lc.gamma_mixed.axpy(lambda, &table.a_mixed),
    })
}

/// The α-connection that `Γ_λ` reproduces: `½ − α/2 = ½ + κλ`, so `α = −2κλ`
/// (`α = 4λ` for `κ = −2`).
pub fn alpha_for_lambda(lambda: f64, kappa: f64) -> f64 {
    -2.0 * kappa * lambda
}

/// Values of λ checked by [`pencil_match`].
pub const PENCIL_LAMBDAS: [f64; 4] = [-0.25, 0.0, 0.25, 0.5];

/// `max_λ ‖Γ_λ − Γ^{(α(λ))}_mixed‖∞` over [`PENCIL_LAMBDAS`].
pub fn pencil_match(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in PENCIL_LAMBDAS {
        let pencil = pencil_connection(model, point, lambda, kappa)?;
        let alpha = geometry::alpha_christoffels(model, point, alpha_for_lambda(lambda, kappa))?;
        worst = worst.max(pencil.gamma.max_abs_diff(&alpha.gamma_mixed));
    }
    Ok(worst)
}

pub const METRIC_INVARIANCE_TOL: f64 = 1e-11;
pub const POTENTIALITY_TOL: f64 = 1e-4;
pub const PENCIL_MATCH_TOL: f64 = 1e-12;

/// Everything `frobenius check` reports.
#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusCheck {
    pub kappa: f64,
    pub metric_invariance: f64,
    /// Diagnostic only: associativity is expected only on flat sub-pencils.
    pub associativity: f64,
    pub potentiality: f64,
    pub pencil_match: f64,
}

impl FrobeniusCheck {
    pub fn passes(&self) -> bool {
        self.metric_invariance < METRIC_INVARIANCE_TOL
            && self.potentiality < POTENTIALITY_TOL
            && self.pencil_match < PENCIL_MATCH_TOL
    }
}

pub fn check(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    kappa: f64,
    trials: usize,
    seed: u64,
    step: f64,
) -> Result<FrobeniusCheck> {
    Ok(FrobeniusCheck {
        kappa,
        metric_invariance: metric_invariance_residual(model, point, kappa, trials, seed)?,
        associativity: associativity_residual(model, point, kappa)?,
        potentiality: potentiality_residual(model, point, kappa, step),
        pencil_match: pencil_match(model, point, kappa)?,
    })
}
