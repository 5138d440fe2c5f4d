//! The rank-2 split algebra `ℝe₊ ⊕ ℝe₋` with `e₊² = e₊`, `e₋² = e₋`,
//! `e₊e₋ = 0`, its Cauchy–Riemann conditions, and the splitting of an
//! algebra-valued planar web into one real web per idempotent.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::Serialize;

use crate::webs::{self, DomainBox, HexagonEntry, PolynomialWeb, WebFunction};
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SplitNumber {
    pub a_plus: f64,
    pub a_minus: f64,
}

impl SplitNumber {
    pub const fn new(a_plus: f64, a_minus: f64) -> Self {
        Self { a_plus, a_minus }
    }

    pub const fn unit() -> Self {
        Self::new(1.0, 1.0)
    }

    pub const fn e_plus() -> Self {
        Self::new(1.0, 0.0)
    }

    pub const fn e_minus() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn powi(self, k: u32) -> Self {
        Self::new(self.a_plus.powi(k as i32), self.a_minus.powi(k as i32))
    }
}

impl Mul for SplitNumber {
    type Output = Self;
    fn mul(self, v: Self) -> Self {
        Self::new(self.a_plus * v.a_plus, self.a_minus * v.a_minus)
    }
}

impl Add for SplitNumber {
    type Output = Self;
    fn add(self, v: Self) -> Self {
        Self::new(self.a_plus + v.a_plus, self.a_minus + v.a_minus)
    }
}

impl Sub for SplitNumber {
    type Output = Self;
    fn sub(self, v: Self) -> Self {
        Self::new(self.a_plus - v.a_plus, self.a_minus - v.a_minus)
    }
}

pub fn multiply(u: SplitNumber, v: SplitNumber) -> SplitNumber {
    u * v
}

/// Structure constants `C^h_jk` in the idempotent basis: `e_j e_k = Σ_h C^h_jk e_h`.
pub fn structure_constant(h: usize, j: usize, k: usize) -> f64 {
    if h == j && j == k {
        1.0
    } else {
        0.0
    }
}

fn jacobian<F: Fn(f64, f64) -> (f64, f64) + ?Sized>(
    f: &F,
    at: (f64, f64),
    step: f64,
) -> [[f64; 2]; 2] {
    let (x, y) = at;
    let (px, py) = (f(x + step, y), f(x - step, y));
    let (qx, qy) = (f(x, y + step), f(x, y - step));
    let s = 2.0 * step;
    [
        [(px.0 - py.0) / s, (qx.0 - qy.0) / s],
        [(px.1 - py.1) / s, (qx.1 - qy.1) / s],
    ]
}

/// Largest violation of `Σ_h J_ih C^h_jk = Σ_h C^i_jh J_hk`, i.e. of `J` commuting
/// with multiplication by every basis element, with `J = ∂(y₊, y₋)/∂(x₊, x₋)`
/// from central differences at `step`.
///
/// A map is differentiable over the algebra exactly when its differential is
/// multiplication by an algebra element; in the idempotent basis that forces
/// `J` to be diagonal, so `(x, y) ↦ (f₊(x), f₋(y))` gives zero and the swap
/// `(x, y) ↦ (y, x)` gives 1.
pub fn cauchy_riemann_residual<F: Fn(f64, f64) -> (f64, f64) + ?Sized>(
    f: &F,
    at: (f64, f64),
    step: f64,
) -> f64 {
    let jac = jacobian(f, at, step);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let lhs: f64 = (0..2)
                    .map(|h| jac[i][h] * structure_constant(h, j, k))
                    .sum();
                let rhs: f64 = (0..2)
                    .map(|h| structure_constant(i, j, h) * jac[h][k])
                    .sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

/// Largest violation of `Σ_h ∂y_i/∂x_h C^h_jk = Σ_h ∂y_h/∂x_i C^j_hk` with the
/// indices exactly as written there. In the idempotent basis this reduces to
/// `J_ij = J_ji`, so it does not single out algebra-differentiable maps (the
/// swap passes); kept as a diagnostic next to [`cauchy_riemann_residual`].
pub fn transposed_identity_residual<F: Fn(f64, f64) -> (f64, f64) + ?Sized>(
    f: &F,
    at: (f64, f64),
    step: f64,
) -> f64 {
    let jac = jacobian(f, at, step);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let lhs: f64 = (0..2)
                    .map(|h| jac[i][h] * structure_constant(h, j, k))
                    .sum();
                let rhs: f64 = (0..2)
                    .map(|h| jac[h][i] * structure_constant(j, h, k))
                    .sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f(x e₊ + y e₋) = f₊(x) e₊ + f₋(y) e₋`.
#[derive(Clone)]
pub struct AlgebraFunction {
    pub name: String,
    f_plus: RealFn,
    f_minus: RealFn,
    pub domain_plus: (f64, f64),
    pub domain_minus: (f64, f64),
}

impl std::fmt::Debug for AlgebraFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlgebraFunction")
            .field("name", &self.name)
            .field("domain_plus", &self.domain_plus)
            .field("domain_minus", &self.domain_minus)
            .finish()
    }
}

impl AlgebraFunction {
    pub fn new(
        name: impl Into<String>,
        f_plus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_minus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain_plus: (f64, f64),
        domain_minus: (f64, f64),
    ) -> Self {
        Self {
            name: name.into(),
            f_plus: Arc::new(f_plus),
            f_minus: Arc::new(f_minus),
            domain_plus,
            domain_minus,
        }
    }

    /// The same real function on both components.
    pub fn lift(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    ) -> Self {
        let all = (f64::NEG_INFINITY, f64::INFINITY);
        Self::new(name, f.clone(), f, all, all)
    }

    pub fn apply(&self, z: SplitNumber) -> SplitNumber {
        SplitNumber::new((self.f_plus)(z.a_plus), (self.f_minus)(z.a_minus))
    }

    /// The real realization `(x, y) ↦ (f₊(x), f₋(y))`.
    pub fn as_planar_map(&self) -> impl Fn(f64, f64) -> (f64, f64) + '_ {
        move |x, y| {
            let w = self.apply(SplitNumber::new(x, y));
            (w.a_plus, w.a_minus)
        }
    }
}

/// Planar maps available to `algebra cr`: `exp` and `identity` are lifts,
/// `swap` exchanges the components.
pub fn builtin_map(name: &str) -> Option<Box<dyn Fn(f64, f64) -> (f64, f64)>> {
    match name {
        "exp" => Some(Box::new(|x: f64, y: f64| (x.exp(), y.exp()))),
        "identity" => Some(Box::new(|x, y| (x, y))),
        "swap" => Some(Box::new(|x, y| (y, x))),
        _ => None,
    }
}

/// `F(z₁, z₂) = Σ c · z₁^a · z₂^b` with split coefficients, defining the third
/// foliation of a web on the algebra plane.
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraPolynomial {
    pub name: String,
    pub terms: Vec<(SplitNumber, u32, u32)>,
    pub domain_plus: DomainBox,
    pub domain_minus: DomainBox,
}

impl AlgebraPolynomial {
    pub fn eval(&self, z1: SplitNumber, z2: SplitNumber) -> SplitNumber {
        self.terms
            .iter()
            .fold(SplitNumber::default(), |acc, &(c, a, b)| {
                acc + c * z1.powi(a) * z2.powi(b)
            })
    }

    fn component(
        &self,
        suffix: &str,
        pick: impl Fn(SplitNumber) -> f64,
        domain: DomainBox,
    ) -> PolynomialWeb {
        PolynomialWeb {
            name: format!("{}{suffix}", self.name),
            terms: self
                .terms
                .iter()
                .map(|&(c, a, b)| (pick(c), a, b))
                .filter(|t| t.0 != 0.0)
                .collect(),
            domain,
        }
    }

    pub fn plus_component(&self) -> PolynomialWeb {
        self.component("+", |c| c.a_plus, self.domain_plus)
    }

    pub fn minus_component(&self) -> PolynomialWeb {
        self.component("-", |c| c.a_minus, self.domain_minus)
    }
}

/// Built-in algebra webs: `sum` (`z₁ + z₂`), `product` (`z₁z₂`) and `mixed`
/// (`z₁ + z₂ + e₊ z₁z₂²`, curved on the `e₊` side only).
pub fn builtin_polynomial(name: &str) -> Option<AlgebraPolynomial> {
    let one = SplitNumber::unit();
    let (terms, domain) = match name {
        "sum" => (vec![(one, 1, 0), (one, 0, 1)], DomainBox::square(0.0, 1.0)),
        "product" => (vec![(one, 1, 1)], DomainBox::square(0.5, 2.0)),
        "mixed" => (
            vec![(one, 1, 0), (one, 0, 1), (SplitNumber::e_plus(), 1, 2)],
            DomainBox::square(0.5, 2.0),
        ),
        _ => return None,
    };
    Some(AlgebraPolynomial {
        name: name.to_owned(),
        terms,
        domain_plus: domain,
        domain_minus: domain,
    })
}

/// The two real webs `F₊(x₁, x₂)` and `F₋(y₁, y₂)` carried by the ideals `ℝe₊` and `ℝe₋`.
pub fn subweb_decompose(f: &AlgebraPolynomial) -> Result<(WebFunction, WebFunction)> {
    Ok((
        f.plus_component().into_web()?,
        f.minus_component().into_web()?,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitHexagonEntry {
    pub eps: f64,
    pub plus: HexagonEntry,
    pub minus: HexagonEntry,
    /// Max-norm of the closure gap in the 4-dimensional realization.
    pub defect: f64,
}

/// Thomsen traversal of the split web, run on each component: the 4-real
/// hexagon closes exactly when both component hexagons close.
pub fn split_hexagon(
    f: &AlgebraPolynomial,
    center_plus: (f64, f64),
    center_minus: (f64, f64),
    eps: f64,
) -> Result<SplitHexagonEntry> {
    let (wp, wm) = subweb_decompose(f)?;
    let plus = webs::hexagon_closure(&wp, center_plus, eps)?;
    let minus = webs::hexagon_closure(&wm, center_minus, eps)?;
    let defect = plus.defect.max(minus.defect);
    Ok(SplitHexagonEntry {
        eps,
        plus,
        minus,
        defect,
    })
}
