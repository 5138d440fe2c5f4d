//! Statistical structure `(g, C)` of an exponential family in canonical
//! coordinates, the α-connection pencil and its curvature.
//!
//! In canonical coordinates the Fisher metric is the Hessian of ψ and the
//! Amari–Chentsov tensor its third derivative, so both are moments of the
//! centered statistics under `p(θ)`. For a Hessian metric the Koszul formula
//! gives `Γ⁰_{ij,k} = ½ ∂ᵢ∂ⱼ∂ₖψ = ½ C_ijk`, hence
//! `Γ^{(α)}_{ij,k} = ((1 − α)/2) C_ijk`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::model::{CanonicalPoint, ExponentialFamilyModel};
use crate::tensor::{Tensor3, Tensor4};
use crate::{Error, Result};

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct MetricTensor {
    pub g: DMatrix<f64>,
    /// Ratio of extreme eigenvalues; infinite when `g` is singular.
    pub condition_number: f64,
}

impl MetricTensor {
    fn from_matrix(g: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let min = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let condition_number = if min <= 0.0 { f64::INFINITY } else { max / min };
        Self {
            g,
            condition_number,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.g
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }

    /// `g⁻¹`, refused when the condition number exceeds `cap`.
    pub fn inverse(&self, cap: f64) -> Result<DMatrix<f64>> {
        if !(self.condition_number <= cap) {
            return Err(Error::SingularMetric {
                condition: self.condition_number,
                cap,
            });
        }
        self.g.clone().try_inverse().ok_or(Error::SingularMetric {
            condition: self.condition_number,
            cap,
        })
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += x[a] * self.g[(a, b)] * y[b];
            }
        }
        s
    }
}

impl Serialize for MetricTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MetricTensor", 2)?;
        st.serialize_field("g", &self.rows())?;
        // JSON has no infinity; a singular metric serializes its condition as null.
        let cond = self
            .condition_number
            .is_finite()
            .then_some(self.condition_number);
        st.serialize_field("condition_number", &cond)?;
        st.end()
    }
}

/// Totally symmetric Amari–Chentsov tensor `C_ijk`.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct CubicTensor(pub Tensor3);

/// Metric and cubic tensor evaluated together from one pass over the outcomes.
#[derive(Clone, Debug, Serialize)]
pub struct StatisticalStructure {
    pub metric: MetricTensor,
    pub cubic: CubicTensor,
}

pub fn statistical_structure(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
) -> StatisticalStructure {
    let n = model.n();
    let p = model.probabilities_raw(&point.theta);
    let mu = model.means_from(&p);
    let centered: Vec<Vec<f64>> = model
        .q()
        .iter()
        .zip(&mu)
        .map(|(row, m)| row.iter().map(|&v| v as f64 - m).collect())
        .collect();
    let mut g = DMatrix::zeros(n, n);
    let mut c = Tensor3::zeros(n);
    for (j, pj) in p.iter().enumerate() {
        for a in 0..n {
            let wa = pj * centered[a][j];
            for b in a..n {
                let wab = wa * centered[b][j];
                g[(a, b)] += wab;
                for k in b..n {
                    let v = c.get(a, b, k) + wab * centered[k][j];
                    c.set(a, b, k, v);
                }
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            g[(b, a)] = g[(a, b)];
            for k in b..n {
                let v = c.get(a, b, k);
                for (x, y, z) in [(a, k, b), (b, a, k), (b, k, a), (k, a, b), (k, b, a)] {
                    c.set(x, y, z, v);
                }
            }
        }
    }
    StatisticalStructure {
        metric: MetricTensor::from_matrix(g),
        cubic: CubicTensor(c),
    }
}

/// Fisher information `g_ij = Cov(qᵢ, qⱼ) = ∂ᵢ∂ⱼψ`.
pub fn fisher_metric(model: &ExponentialFamilyModel, point: &CanonicalPoint) -> MetricTensor {
    statistical_structure(model, point).metric
}

/// `C_ijk = E[(qᵢ−μᵢ)(qⱼ−μⱼ)(qₖ−μₖ)] = ∂ᵢ∂ⱼ∂ₖψ`.
pub fn amari_chentsov(model: &ExponentialFamilyModel, point: &CanonicalPoint) -> CubicTensor {
    statistical_structure(model, point).cubic
}

/// Christoffel symbols of `∇^{(α)}` in canonical coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct ChristoffelArray {
    pub alpha: f64,
    /// `Γ_{ij,k}`, stored `[i][j][k]`.
    pub gamma_lower: Tensor3,
    /// `Γ^l_{ij} = Σₖ g^{lk} Γ_{ij,k}`, stored `[i][j][l]`.
    pub gamma_mixed: Tensor3,
}

/// Raises the last index of a rank-3 array with `g⁻¹`.
pub(crate) fn raise_last(lower: &Tensor3, ginv: &DMatrix<f64>) -> Tensor3 {
    let n = lower.dim();
    Tensor3::from_fn(n, |i, j, l| {
        (0..n).map(|k| ginv[(l, k)] * lower.get(i, j, k)).sum()
    })
}

pub fn alpha_christoffels(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    alpha: f64,
) -> Result<ChristoffelArray> {
    alpha_christoffels_capped(model, point, alpha, DEFAULT_CONDITION_CAP)
}

pub fn alpha_christoffels_capped(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    alpha: f64,
    cap: f64,
) -> Result<ChristoffelArray> {
    let s = statistical_structure(model, point);
    let ginv = s.metric.inverse(cap)?;
    let gamma_lower = s.cubic.0.scale((1.0 - alpha) / 2.0);
    let gamma_mixed = raise_last(&gamma_lower, &ginv);
    Ok(ChristoffelArray {
        alpha,
        gamma_lower,
        gamma_mixed,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureOptions {
    /// Central-difference step for `∂Γ`.
    pub step: f64,
    /// Combine steps `h` and `h/2` as `(4 D(h/2) − D(h)) / 3`.
    pub richardson: bool,
    pub condition_cap: f64,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_CURVATURE_STEP,
            richardson: true,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

/// `R^l_{ijk}` of `∇^{(α)}`, so that `R(∂ᵢ, ∂ⱼ)∂ₖ = Σₗ R^l_{ijk} ∂ₗ`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureTensor {
    pub alpha: f64,
    /// Stored `[l][i][j][k]`.
    #[serde(rename = "R")]
    pub r: Tensor4,
    pub max_abs: f64,
}

impl CurvatureTensor {
    /// `g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) − g(X,Y)²)`.
    pub fn sectional(&self, metric: &MetricTensor, x: &[f64], y: &[f64]) -> f64 {
        let n = self.r.dim();
        let mut ryy = vec![0.0; n];
        for (l, out) in ryy.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        *out += x[i] * y[j] * y[k] * self.r.get(l, i, j, k);
                    }
                }
            }
        }
        let area = metric.inner(x, x) * metric.inner(y, y) - metric.inner(x, y).powi(2);
        metric.inner(&ryy, x) / area
    }

    /// Largest `|R^l_{ijk} + R^l_{jik}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.r.dim();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        worst = worst.max((self.r.get(l, i, j, k) + self.r.get(l, j, i, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `∂ᵢ Γ^l_{jk}` stored as `d[i]` = array `[j][k][l]`.
fn christoffel_derivatives(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    alpha: f64,
    h: f64,
    cap: f64,
) -> Result<Vec<Tensor3>> {
    (0..model.n())
        .map(|i| {
            let plus = alpha_christoffels_capped(model, &point.shifted(i, h), alpha, cap)?;
            let minus = alpha_christoffels_capped(model, &point.shifted(i, -h), alpha, cap)?;
            Ok(plus
                .gamma_mixed
                .axpy(-1.0, &minus.gamma_mixed)
                .scale(1.0 / (2.0 * h)))
        })
        .collect()
}

pub fn curvature_tensor(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    alpha: f64,
    opts: &CurvatureOptions,
) -> Result<CurvatureTensor> {
    let n = model.n();
    let gamma = alpha_christoffels_capped(model, point, alpha, opts.condition_cap)?.gamma_mixed;
    let coarse = christoffel_derivatives(model, point, alpha, opts.step, opts.condition_cap)?;
    let d = if opts.richardson {
        let fine =
            christoffel_derivatives(model, point, alpha, opts.step / 2.0, opts.condition_cap)?;
        fine.iter()
            .zip(&coarse)
            .map(|(f, c)| f.scale(4.0 / 3.0).axpy(-1.0 / 3.0, c))
            .collect()
    } else {
        coarse
    };
    let mut r = Tensor4::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = d[i].get(j, k, l) - d[j].get(i, k, l);
                    for s in 0..n {
                        v += gamma.get(i, s, l) * gamma.get(j, k, s)
                            - gamma.get(j, s, l) * gamma.get(i, k, s);
                    }
                    r.set(l, i, j, k, v);
                }
            }
        }
    }
    let max_abs = r.max_abs();
    Ok(CurvatureTensor { alpha, r, max_abs })
}

#[derive(Clone, Debug, Serialize)]
pub struct PencilSymmetryReport {
    pub alpha: f64,
    /// `max |R^{(α)} − R^{(−α)}|` over all components.
    pub max_abs_diff: f64,
    /// `max |R^{(α)}|`, for scale.
    pub max_abs: f64,
}

pub fn pencil_symmetry_report(
    model: &ExponentialFamilyModel,
    point: &CanonicalPoint,
    alpha: f64,
    opts: &CurvatureOptions,
) -> Result<PencilSymmetryReport> {
    let pos = curvature_tensor(model, point, alpha, opts)?;
    let neg = curvature_tensor(model, point, -alpha, opts)?;
    Ok(PencilSymmetryReport {
        alpha,
        max_abs_diff: pos.r.max_abs_diff(&neg.r),
        max_abs: pos.max_abs,
    })
}
