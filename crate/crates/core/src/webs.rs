//! Web constructions on the probability simplex and in the plane.
//!
//! * barycentric vector fields `y_k = e_k − p`, `z_k = e_k − q_k`, `x_k = p^k y_k`
//! * Cevian configurations and the Ceva relations (signed for triangles,
//!   unsigned edge-ratio products for n-simplices)
//! * planar 3-webs `x = a`, `y = b`, `F(x, y) = c`: Thomsen hexagon closure
//!   and the web curvature `K = −(F_x F_y)⁻¹ ∂²ₓᵧ log(F_x / F_y)`
//! * the embedding `η = 2√p` of the simplex into the sphere of radius 2

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on barycentric coordinates summing to one.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Tolerance for "lies on the line / face".
pub const INCIDENCE_TOL: f64 = 1e-10;
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 200;
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Simplex points and barycentric fields
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexPoint {
    pub p: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidArgument(
                "a simplex point needs at least two coordinates".into(),
            ));
        }
        if let Some(&bad) = p.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex(sum));
        }
        Ok(Self { p })
    }

    /// Normalizes positive weights onto the simplex.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || w.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weights must be nonnegative with positive sum: {w:?}"
            )));
        }
        Self::new(w.iter().map(|v| v / s).collect())
    }

    pub fn dim(&self) -> usize {
        self.p.len() - 1
    }

    pub fn is_interior(&self) -> bool {
        self.p.iter().all(|&v| v > 0.0 && v < 1.0)
    }

    fn require_interior(&self) -> Result<()> {
        match self.p.iter().position(|&v| !(v > 0.0 && v < 1.0)) {
            Some(index) => Err(Error::BoundaryPoint {
                index,
                value: self.p[index],
            }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarycentricFields {
    /// `y_k = e_k − p`.
    pub y: Vec<Vec<f64>>,
    /// `z_k = y_k / (1 − p^k) = e_k − q_k`.
    pub z: Vec<Vec<f64>>,
    /// `q_k^i = p^i / (1 − p^k)` for `i ≠ k`, zero at `i = k`: the foot of the
    /// Cevian from vertex `k`, i.e. the law conditioned on `ω ≠ ω_k`.
    pub q: Vec<Vec<f64>>,
    /// `x_k = p^k y_k`.
    pub x: Vec<Vec<f64>>,
    /// `Σ_k x_k`, which vanishes identically.
    pub x_sum: Vec<f64>,
}

pub fn barycentric_fields(point: &SimplexPoint) -> Result<BarycentricFields> {
    point.require_interior()?;
    let p = &point.p;
    let d = p.len();
    let unit = |k: usize, i: usize| if i == k { 1.0 } else { 0.0 };
    let y: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|i| unit(k, i) - p[i]).collect())
        .collect();
    let q: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            (0..d)
                .map(|i| if i == k { 0.0 } else { p[i] / (1.0 - p[k]) })
                .collect()
        })
        .collect();
    let z = (0..d)
        .map(|k| (0..d).map(|i| unit(k, i) - q[k][i]).collect())
        .collect();
    let x: Vec<Vec<f64>> = (0..d)
        .map(|k| y[k].iter().map(|v| p[k] * v).collect())
        .collect();
    let x_sum = (0..d).map(|i| x.iter().map(|xk| xk[i]).sum()).collect();
    Ok(BarycentricFields { y, z, q, x, x_sum })
}

// ---------------------------------------------------------------------------
// Affine helpers
// ---------------------------------------------------------------------------

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `Σ_i w_i A_i`.
pub fn affine_combination(vertices: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let dim = vertices[0].len();
    (0..dim)
        .map(|c| vertices.iter().zip(weights).map(|(v, w)| w * v[c]).sum())
        .collect()
}

/// Regular `n`-simplex with unit edges: the vertices `e_i / √2` of ℝ^{n+1}.
pub fn reference_simplex(n: usize) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..=n)
        .map(|i| (0..=n).map(|c| if c == i { s } else { 0.0 }).collect())
        .collect()
}

/// Distance from `x` to the line through `a` and `b`.
fn distance_to_line(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d = sub(b, a);
    let v = sub(x, a);
    let t = dot(&v, &d) / dot(&d, &d);
    norm(
        &v.iter()
            .zip(&d)
            .map(|(vi, di)| vi - t * di)
            .collect::<Vec<_>>(),
    )
}

/// Signed ratio `XP / XQ` for `X` on the line `PQ`: the `t` with `P − X = t (Q − X)`.
fn signed_ratio(x: &[f64], p: &[f64], q: &[f64]) -> Result<f64> {
    let scale = norm(&sub(q, p));
    let off = distance_to_line(x, p, q);
    if off > INCIDENCE_TOL * scale.max(1.0) {
        return Err(Error::OffSide(off));
    }
    let xp = sub(p, x);
    let xq = sub(q, x);
    let tiny = 1e-12 * scale;
    if norm(&xp) <= tiny || norm(&xq) <= tiny {
        return Err(Error::DegenerateRatio(
            "foot coincides with a vertex".into(),
        ));
    }
    Ok(dot(&xp, &xq) / dot(&xq, &xq))
}

// ---------------------------------------------------------------------------
// Cevians and Ceva relations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CevianMode {
    Concurrent,
    Parallel,
}

/// One Cevian per vertex of a simplex, each ending on the opposite face.
#[derive(Clone, Debug, Serialize)]
pub struct CevianConfig {
    pub vertices: Vec<Vec<f64>>,
    /// Affine coordinates of the foot opposite each vertex.
    pub cevian_feet: Vec<Vec<f64>>,
    /// Barycentric coordinates of the feet; entry `k` of foot `k` is zero.
    pub feet_barycentric: Vec<Vec<f64>>,
    pub mode: CevianMode,
    /// Common point (concurrent mode) in affine coordinates.
    pub center: Option<Vec<f64>>,
    /// Common direction (parallel mode) in affine coordinates.
    pub direction: Option<Vec<f64>>,
}

impl CevianConfig {
    /// Cevians through an interior point; the feet are the conditional laws `q_k`.
    pub fn concurrent(vertices: Vec<Vec<f64>>, point: &SimplexPoint) -> Result<Self> {
        check_arity(&vertices, point.p.len())?;
        let fields = barycentric_fields(point)?;
        let cevian_feet = fields
            .q
            .iter()
            .map(|q| affine_combination(&vertices, q))
            .collect();
        let center = affine_combination(&vertices, &point.p);
        Ok(Self {
            vertices,
            cevian_feet,
            feet_barycentric: fields.q,
            mode: CevianMode::Concurrent,
            center: Some(center),
            direction: None,
        })
    }

    /// Cevians parallel to a direction given in barycentric vector form
    /// (entries summing to zero, none of them zero). The line through `A_k`
    /// with barycentrics `e_k + tδ` meets the opposite face at `t = −1/δ_k`.
    pub fn parallel(vertices: Vec<Vec<f64>>, delta: &[f64]) -> Result<Self> {
        check_arity(&vertices, delta.len())?;
        let s: f64 = delta.iter().sum();
        let scale = delta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(scale > 0.0) || s.abs() > SIMPLEX_TOL * scale {
            return Err(Error::InvalidArgument(
                "direction must be a nonzero vector with coordinates summing to 0".into(),
            ));
        }
        if let Some(k) = delta.iter().position(|&v| v.abs() <= SIMPLEX_TOL * scale) {
            return Err(Error::DegenerateRatio(format!(
                "Cevian from vertex {k} is parallel to its face"
            )));
        }
        let d = delta.len();
        let feet_barycentric: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| if i == k { 0.0 } else { -delta[i] / delta[k] })
                    .collect()
            })
            .collect();
        let cevian_feet = feet_barycentric
            .iter()
            .map(|b| affine_combination(&vertices, b))
            .collect();
        let direction = affine_combination(&vertices, delta);
        Ok(Self {
            vertices,
            cevian_feet,
            feet_barycentric,
            mode: CevianMode::Parallel,
            center: None,
            direction: Some(direction),
        })
    }

    /// Largest violation of the configuration invariants: feet on their faces
    /// and the Cevians concurrent (or parallel).
    pub fn incidence_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, b) in self.feet_barycentric.iter().enumerate() {
            worst = worst
                .max(b[k].abs())
                .max((b.iter().sum::<f64>() - 1.0).abs());
            let rebuilt = affine_combination(&self.vertices, b);
            worst = worst.max(norm(&sub(&rebuilt, &self.cevian_feet[k])));
        }
        match self.mode {
            CevianMode::Concurrent => {
                let c = self
                    .center
                    .as_ref()
                    .expect("concurrent config has a center");
                for (a, f) in self.vertices.iter().zip(&self.cevian_feet) {
                    worst = worst.max(distance_to_line(c, a, f));
                }
            }
            CevianMode::Parallel => {
                let d = self
                    .direction
                    .as_ref()
                    .expect("parallel config has a direction");
                let origin = vec![0.0; d.len()];
                for (a, f) in self.vertices.iter().zip(&self.cevian_feet) {
                    let u = sub(f, a);
                    let u_hat: Vec<f64> = u.iter().map(|v| v / norm(&u)).collect();
                    worst = worst.max(distance_to_line(&u_hat, &origin, d));
                }
            }
        }
        worst
    }

    /// Feet as edge-division points `B_ij`, for the n-dimensional relation.
    /// Only meaningful for triangles in this form; see [`edge_points_from_point`].
    pub fn triangle_feet(&self) -> Result<[Vec<f64>; 3]> {
        if self.vertices.len() != 3 {
            return Err(Error::InvalidArgument(
                "triangle_feet needs a triangle".into(),
            ));
        }
        Ok([
            self.cevian_feet[0].clone(),
            self.cevian_feet[1].clone(),
            self.cevian_feet[2].clone(),
        ])
    }
}

fn check_arity(vertices: &[Vec<f64>], d: usize) -> Result<()> {
    if vertices.len() != d {
        return Err(Error::DimensionMismatch {
            expected: vertices.len(),
            got: d,
        });
    }
    Ok(())
}

/// `(A'B / A'C) · (B'C / B'A) · (C'A / C'B)` with signed ratios along each side,
/// where `A'` lies on `BC`, `B'` on `CA` and `C'` on `AB`.
///
/// Equals −1 exactly when the three Cevians are concurrent or parallel.
pub fn ceva_product(triangle: &[Vec<f64>; 3], feet: &[Vec<f64>; 3]) -> Result<f64> {
    let [a, b, c] = triangle;
    let [fa, fb, fc] = feet;
    Ok(signed_ratio(fa, b, c)? * signed_ratio(fb, c, a)? * signed_ratio(fc, a, b)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CevaTriple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub product: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedCevaReport {
    pub products: Vec<CevaTriple>,
    /// `max |product − 1|` over all triples `i < j < k`.
    pub max_deviation: f64,
}

/// Points `B_ij` on the edges `A_i A_j` (`i < j`), keyed by `(i, j)`.
pub type EdgePoints = BTreeMap<(usize, usize), Vec<f64>>;

/// Unsigned `|A_i B| / |B A_j|` for `B` strictly inside edge `A_i A_j`.
fn edge_ratio(ai: &[f64], aj: &[f64], b: &[f64]) -> Result<f64> {
    let edge = sub(aj, ai);
    let len2 = dot(&edge, &edge);
    let off = distance_to_line(b, ai, aj);
    if off > INCIDENCE_TOL * len2.sqrt().max(1.0) {
        return Err(Error::OffSide(off));
    }
    let t = dot(&sub(b, ai), &edge) / len2;
    if !(t > 1e-12 && t < 1.0 - 1e-12) {
        return Err(Error::DegenerateRatio(format!(
            "edge point at parameter {t} is not strictly inside its edge"
        )));
    }
    Ok(norm(&sub(b, ai)) / norm(&sub(aj, b)))
}

/// `(A_iB_ij / B_ijA_j)(A_jB_jk / B_jkA_k)(A_kB_ik / B_ikA_i)` for every
/// `i < j < k`; all equal 1 exactly when the hyperplanes through the edge
/// points and the complementary vertices share a point.
pub fn generalized_ceva_check(
    vertices: &[Vec<f64>],
    edge_points: &EdgePoints,
) -> Result<GeneralizedCevaReport> {
    let d = vertices.len();
    let get = |i: usize, j: usize| {
        edge_points
            .get(&(i, j))
            .ok_or_else(|| Error::InvalidArgument(format!("missing edge point B_{i}{j}")))
    };
    let mut ratios = BTreeMap::new();
    for i in 0..d {
        for j in i + 1..d {
            ratios.insert((i, j), edge_ratio(&vertices[i], &vertices[j], get(i, j)?)?);
        }
    }
    let mut products = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                // A_kB_ik / B_ikA_i is the reciprocal of the stored A_iB_ik / B_ikA_k.
                let product = ratios[&(i, j)] * ratios[&(j, k)] / ratios[&(i, k)];
                max_deviation = max_deviation.max((product - 1.0).abs());
                products.push(CevaTriple { i, j, k, product });
            }
        }
    }
    Ok(GeneralizedCevaReport {
        products,
        max_deviation,
    })
}

/// Edge points cut out by the hyperplanes through an interior point and the
/// remaining vertices: `B_ij` has barycentrics proportional to `p_i e_i + p_j e_j`.
pub fn edge_points_from_point(vertices: &[Vec<f64>], point: &SimplexPoint) -> Result<EdgePoints> {
    check_arity(vertices, point.p.len())?;
    point.require_interior()?;
    let d = vertices.len();
    let mut out = EdgePoints::new();
    for i in 0..d {
        for j in i + 1..d {
            let s = point.p[i] + point.p[j];
            let mut w = vec![0.0; d];
            w[i] = point.p[i] / s;
            w[j] = point.p[j] / s;
            out.insert((i, j), affine_combination(vertices, &w));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Planar 3-webs
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl DomainBox {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(x_lo < x_hi && y_lo < y_hi) {
            return Err(Error::InvalidArgument(format!(
                "empty domain box [{x_lo},{x_hi}]x[{y_lo},{y_hi}]"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            x_lo: lo,
            x_hi: hi,
            y_lo: lo,
            y_hi: hi,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_lo + self.x_hi) / 2.0, (self.y_lo + self.y_hi) / 2.0)
    }
}

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type PartialsFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Third foliation `F(x, y) = c` of a planar 3-web; the other two are
/// `x = const` and `y = const`.
#[derive(Clone)]
pub struct WebFunction {
    name: String,
    f: ScalarFn,
    partials: Option<PartialsFn>,
    domain: DomainBox,
}

impl fmt::Debug for WebFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WebFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact_partials", &self.partials.is_some())
            .finish()
    }
}

/// Side of the grid used to check that `F_x` and `F_y` do not vanish.
const PARTIALS_GRID: usize = 9;

impl WebFunction {
    /// Builds a web function, rejecting it if `F_x` or `F_y` vanishes on a
    /// grid over the domain box.
    pub fn new(
        name: impl Into<String>,
        domain: DomainBox,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        partials: Option<Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>>,
    ) -> Result<Self> {
        let web = Self {
            name: name.into(),
            f: Arc::new(f),
            partials: partials.map(Arc::from),
            domain,
        };
        let step = 1e-6 * (domain.x_hi - domain.x_lo).max(domain.y_hi - domain.y_lo);
        let mut sign: Option<(bool, bool)> = None;
        for a in 0..PARTIALS_GRID {
            for b in 0..PARTIALS_GRID {
                let t = |lo: f64, hi: f64, i: usize| {
                    lo + (hi - lo) * i as f64 / (PARTIALS_GRID - 1) as f64
                };
                let (x, y) = (
                    t(domain.x_lo, domain.x_hi, a),
                    t(domain.y_lo, domain.y_hi, b),
                );
                let (fx, fy) = web.partials_at(x, y, step);
                if fx == 0.0 || fy == 0.0 || !fx.is_finite() || !fy.is_finite() {
                    return Err(Error::VanishingPartial { x, y });
                }
                let s = (fx > 0.0, fy > 0.0);
                if *sign.get_or_insert(s) != s {
                    // A sign change on the grid means a zero somewhere in between.
                    return Err(Error::VanishingPartial { x, y });
                }
            }
        }
        Ok(web)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> DomainBox {
        self.domain
    }

    pub fn has_exact_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    /// `(F_x, F_y)`, exact when available, otherwise by the fourth-order
    /// central stencil at `step`.
    pub fn partials_at(&self, x: f64, y: f64, step: f64) -> (f64, f64) {
        if let Some(p) = &self.partials {
            return p(x, y);
        }
        let d = |g: &dyn Fn(f64) -> f64| {
            (-g(2.0 * step) + 8.0 * g(step) - 8.0 * g(-step) + g(-2.0 * step)) / (12.0 * step)
        };
        (d(&|s| self.eval(x + s, y)), d(&|s| self.eval(x, y + s)))
    }
}

/// `F(x, y) = Σ c · x^a · y^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialWeb {
    pub name: String,
    /// `[coefficient, power of x, power of y]` per term.
    pub terms: Vec<(f64, u32, u32)>,
    pub domain: DomainBox,
}

impl PolynomialWeb {
    pub fn from_json(source: &[u8]) -> Result<Self> {
        serde_json::from_slice(source).map_err(|e| Error::InvalidArgument(format!("web file: {e}")))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, a, b)| c * x.powi(a as i32) * y.powi(b as i32))
            .sum()
    }

    pub fn partials(&self, x: f64, y: f64) -> (f64, f64) {
        let mut fx = 0.0;
        let mut fy = 0.0;
        for &(c, a, b) in &self.terms {
            if a > 0 {
                fx += c * a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32);
            }
            if b > 0 {
                fy += c * b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1);
            }
        }
        (fx, fy)
    }

    pub fn into_web(self) -> Result<WebFunction> {
        let poly = Arc::new(self);
        let (pf, pd) = (poly.clone(), poly.clone());
        WebFunction::new(
            poly.name.clone(),
            poly.domain,
            move |x, y| pf.eval(x, y),
            Some(Box::new(move |x, y| pd.partials(x, y))),
        )
    }
}

/// Built-in polynomial webs: `sum` (`x + y` on `[0,1]²`), `product` (`xy` on
/// `[0.5,2]²`) and `cubic` (`x + y + xy²` on `[0.5,2]²`).
pub fn builtin_polynomial(name: &str) -> Option<PolynomialWeb> {
    let (terms, domain) = match name {
        "sum" => (vec![(1.0, 1, 0), (1.0, 0, 1)], DomainBox::square(0.0, 1.0)),
        "product" => (vec![(1.0, 1, 1)], DomainBox::square(0.5, 2.0)),
        "cubic" => (
            vec![(1.0, 1, 0), (1.0, 0, 1), (1.0, 1, 2)],
            DomainBox::square(0.5, 2.0),
        ),
        _ => return None,
    };
    Some(PolynomialWeb {
        name: name.to_owned(),
        terms,
        domain,
    })
}

pub fn builtin_web(name: &str) -> Option<WebFunction> {
    builtin_polynomial(name).map(|p| p.into_web().expect("builtin web is regular"))
}

/// Root of `g` on `[lo, hi]`, starting from `start`: a bracket is grown
/// geometrically from `start`, then bisected to [`ROOT_TOL`] and, when an
/// exact derivative is available, polished by Newton steps.
fn solve_leaf(
    g: impl Fn(f64) -> f64,
    dg: Option<&dyn Fn(f64) -> f64>,
    start: f64,
    lo: f64,
    hi: f64,
    what: &'static str,
) -> Result<f64> {
    let g0 = g(start);
    if g0 == 0.0 {
        return Ok(start);
    }
    let slope = match dg {
        Some(d) => d(start),
        None => {
            let s = 1e-7 * (hi - lo);
            (g(start + s) - g(start - s)) / (2.0 * s)
        }
    };
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::NonMonotoneLeaf(what));
    }
    let dir = if g0 * slope > 0.0 { -1.0 } else { 1.0 };
    let mut step = (1.5 * (g0 / slope).abs()).max(1e-9 * (hi - lo));
    let (mut a, mut ga) = (start, g0);
    let mut bracket = None;
    for _ in 0..ROOT_MAX_ITER {
        let b = (start + dir * step).clamp(lo, hi);
        let gb = g(b);
        if gb == 0.0 {
            return Ok(b);
        }
        if gb.signum() != ga.signum() {
            bracket = Some((a, ga, b));
            break;
        }
        if gb.abs() > ga.abs() {
            return Err(Error::NonMonotoneLeaf(what));
        }
        if b == lo || b == hi {
            return Err(Error::LeafExitsDomain(what));
        }
        a = b;
        ga = gb;
        step *= 2.0;
    }
    let (mut a, mut ga, mut b) = bracket.ok_or(Error::LeafExitsDomain(what))?;
    for _ in 0..ROOT_MAX_ITER {
        if (b - a).abs() <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let mut gx = g(x);
    if let Some(d) = dg {
        for _ in 0..8 {
            let next = x - gx / d(x);
            if !(next >= left && next <= right) {
                break;
            }
            let gn = g(next);
            if gn.abs() >= gx.abs() {
                break;
            }
            x = next;
            gx = gn;
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct HexagonEntry {
    pub eps: f64,
    /// `|P₆ − P₀|`.
    pub defect: f64,
    pub defect_over_eps3: f64,
    /// `defect / (F_x² ε³)` with `F_x` at the center. The hexagon is cut out
    /// by level shifts of size `F_x ε`, and the defect measured in those units
    /// tends to `|K|` as `ε → 0`.
    pub normalized_defect: f64,
    /// `P₀ … P₆`.
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HexagonReport {
    pub web: String,
    pub center: [f64; 2],
    pub entries: Vec<HexagonEntry>,
}

/// Six-step Thomsen traversal around `(a, b)`:
///
/// 1. `P₀ = (a + ε, b)`
/// 2. `P₁ = (a, y)` with `F(a, y) = F(P₀)`
/// 3. `P₂ = (x, y(P₁))` with `F(x, y(P₁)) = F(a, b)`
/// 4. `P₃ = (x(P₂), b)`
/// 5. `P₄ = (a, y)` with `F(a, y) = F(P₃)`
/// 6. `P₅ = (x, y(P₄))` with `F(x, y(P₄)) = F(a, b)`, and `P₆ = (x(P₅), b)`.
///
/// The figure closes (`P₆ = P₀`) for every ε exactly when the web is hexagonal.
pub fn hexagon_closure(web: &WebFunction, center: (f64, f64), eps: f64) -> Result<HexagonEntry> {
    let (a, b) = center;
    let dom = web.domain();
    for (x, y) in [(a, b), (a + eps, b)] {
        if !dom.contains(x, y) {
            return Err(Error::OutsideDomain { x, y });
        }
    }
    let c0 = web.eval(a, b);
    let exact = web.has_exact_partials();

    let solve_y = |x: f64, target: f64, start: f64| -> Result<f64> {
        let dfy = move |y: f64| web.partials_at(x, y, 0.0).1;
        let dg: Option<&dyn Fn(f64) -> f64> = if exact { Some(&dfy) } else { None };
        solve_leaf(
            |y| web.eval(x, y) - target,
            dg,
            start,
            dom.y_lo,
            dom.y_hi,
            "y",
        )
    };
    let solve_x = |y: f64, target: f64, start: f64| -> Result<f64> {
        let dfx = move |x: f64| web.partials_at(x, y, 0.0).0;
        let dg: Option<&dyn Fn(f64) -> f64> = if exact { Some(&dfx) } else { None };
        solve_leaf(
            |x| web.eval(x, y) - target,
            dg,
            start,
            dom.x_lo,
            dom.x_hi,
            "x",
        )
    };

    let p0 = [a + eps, b];
    let y1 = solve_y(a, web.eval(p0[0], p0[1]), b)?;
    let p1 = [a, y1];
    let x2 = solve_x(y1, c0, a)?;
    let p2 = [x2, y1];
    let p3 = [x2, b];
    let y4 = solve_y(a, web.eval(p3[0], p3[1]), b)?;
    let p4 = [a, y4];
    let x5 = solve_x(y4, c0, a)?;
    let p5 = [x5, y4];
    let p6 = [x5, b];
    let defect = ((p6[0] - p0[0]).powi(2) + (p6[1] - p0[1]).powi(2)).sqrt();
    let fx = web.partials_at(a, b, DEFAULT_CURVATURE_STEP).0;
    let eps3 = eps.abs().powi(3);
    Ok(HexagonEntry {
        eps,
        defect,
        defect_over_eps3: defect / eps3,
        normalized_defect: defect / (fx * fx * eps3),
        vertices: vec![p0, p1, p2, p3, p4, p5, p6],
    })
}

pub fn hexagon_sweep(web: &WebFunction, center: (f64, f64), eps: &[f64]) -> Result<HexagonReport> {
    let entries = eps
        .iter()
        .map(|&e| hexagon_closure(web, center, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(HexagonReport {
        web: web.name().to_owned(),
        center: [center.0, center.1],
        entries,
    })
}

/// `K = −(F_x F_y)⁻¹ ∂²/∂x∂y log(F_x / F_y)`.
///
/// The mixed derivative is a four-point central difference at `step`. With
/// exact partials that is the only approximation; otherwise `F_x`, `F_y` come
/// from a fourth-order stencil at `step` and the outer difference uses `√step`
/// so the nested rounding error stays bounded.
pub fn web_curvature(web: &WebFunction, at: (f64, f64), step: f64) -> Result<f64> {
    let (x, y) = at;
    if !web.domain().contains(x, y) {
        return Err(Error::OutsideDomain { x, y });
    }
    let (fx, fy) = web.partials_at(x, y, step);
    if fx == 0.0 || fy == 0.0 {
        return Err(Error::VanishingPartial { x, y });
    }
    let outer = if web.has_exact_partials() {
        step
    } else {
        step.sqrt()
    };
    let h = |u: f64, v: f64| -> Result<f64> {
        let (px, py) = web.partials_at(u, v, step);
        if px == 0.0 || py == 0.0 {
            return Err(Error::VanishingPartial { x: u, y: v });
        }
        Ok((px / py).abs().ln())
    };
    let mixed = (h(x + outer, y + outer)? - h(x + outer, y - outer)? - h(x - outer, y + outer)?
        + h(x - outer, y - outer)?)
        / (4.0 * outer * outer);
    Ok(-mixed / (fx * fy))
}

// ---------------------------------------------------------------------------
// Sphere of radius 2
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SphereEmbedding {
    /// `ηⁱ = 2√pᵢ`.
    pub eta: Vec<f64>,
    /// `Σ (ηⁱ)²`, equal to 4.
    pub norm: f64,
    /// `‖JᵀJ − G‖∞` with `J = ∂η/∂(p₁ … pₙ)` and `G` the multinomial Fisher metric.
    pub metric_residual: f64,
}

/// Multinomial Fisher metric in the coordinates `p₁ … pₙ` (with
/// `p_{n+1} = 1 − Σ pₐ`): `g_ab = δ_ab / p_a + 1 / p_{n+1}`.
pub fn multinomial_fisher(point: &SimplexPoint) -> Vec<Vec<f64>> {
    let n = point.dim();
    let last = point.p[n];
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| if a == b { 1.0 / point.p[a] } else { 0.0 } + 1.0 / last)
                .collect()
        })
        .collect()
}

pub fn sphere_embedding(point: &SimplexPoint) -> Result<SphereEmbedding> {
    point.require_interior()?;
    let p = &point.p;
    let n = point.dim();
    let eta: Vec<f64> = p.iter().map(|v| 2.0 * v.sqrt()).collect();
    let norm = eta.iter().map(|e| e * e).sum();
    // Rows: ηⁱ for i = 1..=n+1; columns: free coordinates p₁..pₙ.
    let jac: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            (0..n)
                .map(|a| {
                    if i == n {
                        -1.0 / p[n].sqrt()
                    } else if i == a {
                        1.0 / p[a].sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let fisher = multinomial_fisher(point);
    let mut metric_residual: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let pull: f64 = jac.iter().map(|row| row[a] * row[b]).sum();
            metric_residual = metric_residual.max((pull - fisher[a][b]).abs());
        }
    }
    Ok(SphereEmbedding {
        eta,
        norm,
        metric_residual,
    })
}
