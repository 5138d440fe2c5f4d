//! Toric structure of a discrete exponential family.
//!
//! Appending the constant statistic `q₀ ≡ 1` to `Q` gives the extended matrix
//! `Q̃`. For every integer `u` with `Q̃ u = 0`, `Σⱼ uⱼ log pⱼ(θ)` does not depend
//! on θ (the `q₀` row cancels ψ), so the model satisfies the binomial
//! `y^{u⁺} − y^{u⁻} = 0` in the outcome variables `y₁ … y_m`.
//!
//! Only one binomial per lattice basis vector is produced. These generate the
//! toric ideal up to saturation, not necessarily the ideal itself; Markov bases
//! are not computed here.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::intlin;
use crate::model::ExponentialFamilyModel;
use crate::{Error, Result};

pub const SATURATION_CAVEAT: &str =
    "lattice-basis binomials generate the toric ideal only up to saturation";

pub const VANISHING_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedMatrix {
    /// Row 0 is all ones; rows `1..=n` are the model's `Q`.
    pub rows: Vec<Vec<i64>>,
}

impl ExtendedMatrix {
    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rank(&self) -> usize {
        intlin::rank(&self.rows)
    }

    pub fn annihilates(&self, u: &[BigInt]) -> bool {
        u.len() == self.m() && intlin::mat_vec(&self.rows, u).iter().all(Zero::is_zero)
    }
}

pub fn extended_matrix(model: &ExponentialFamilyModel) -> ExtendedMatrix {
    let mut rows = vec![vec![1; model.m()]];
    rows.extend(model.q().iter().cloned());
    ExtendedMatrix { rows }
}

/// ℤ-basis of `{u ∈ ℤ^m : Q̃ u = 0}` in Hermite normal form: leading entries
/// positive, entries above each leading entry reduced, rows in descending
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub basis: Vec<Vec<BigInt>>,
    pub m: usize,
}

impl LatticeBasis {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as `i64`, panicking only if an entry does not fit.
    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        self.basis
            .iter()
            .map(|u| {
                u.iter()
                    .map(|v| v.to_i64().expect("kernel entry fits in i64"))
                    .collect()
            })
            .collect()
    }
}

impl Serialize for LatticeBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let vectors: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|u| u.iter().map(ToString::to_string).collect())
            .collect();
        let mut st = s.serialize_struct("LatticeBasis", 2)?;
        st.serialize_field("rank", &self.rank())?;
        // Decimal strings keep arbitrary-precision entries exact.
        st.serialize_field("basis", &vectors)?;
        st.end()
    }
}

pub fn lattice_kernel(qt: &ExtendedMatrix) -> LatticeBasis {
    LatticeBasis {
        basis: intlin::integer_kernel(&qt.rows, qt.m()),
        m: qt.m(),
    }
}

/// Whether `u` is an integer combination of the basis vectors.
pub fn kernel_membership(basis: &LatticeBasis, u: &[i64]) -> bool {
    let u: Vec<BigInt> = u.iter().map(|&x| BigInt::from(x)).collect();
    intlin::lattice_contains(&basis.basis, &u)
}

/// `y^{u⁺} − y^{u⁻}` with `u⁺`, `u⁻` nonnegative and of disjoint support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinomialRelation {
    pub u_plus: Vec<u64>,
    pub u_minus: Vec<u64>,
    pub display: String,
}

impl BinomialRelation {
    pub fn from_vector(u: &[i64]) -> Self {
        let u_plus: Vec<u64> = u.iter().map(|&x| x.max(0) as u64).collect();
        let u_minus: Vec<u64> = u.iter().map(|&x| (-x).max(0) as u64).collect();
        let display = format!("{} - {}", monomial(&u_plus), monomial(&u_minus));
        Self {
            u_plus,
            u_minus,
            display,
        }
    }

    pub fn exponent_vector(&self) -> Vec<i64> {
        self.u_plus
            .iter()
            .zip(&self.u_minus)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }
}

impl fmt::Display for BinomialRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

fn monomial(exponents: &[u64]) -> String {
    let factors: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| {
            if e == 1 {
                format!("y{}", j + 1)
            } else {
                format!("y{}^{}", j + 1, e)
            }
        })
        .collect();
    if factors.is_empty() {
        "1".to_owned()
    } else {
        factors.join("*")
    }
}

pub fn binomials_from_kernel(basis: &LatticeBasis) -> Vec<BinomialRelation> {
    basis
        .to_i64()
        .iter()
        .map(|u| BinomialRelation::from_vector(u))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub samples: usize,
    pub seed: u64,
    pub relations: usize,
    /// `max |Π pⱼ^{u⁺ⱼ} − Π pⱼ^{u⁻ⱼ}|` over samples and relations.
    pub max_residual: f64,
    pub tolerance: f64,
    /// Set when the base measure is not uniform and `pⱼ` was replaced by `pⱼ / p₀(ωⱼ)`.
    pub rescaled_by_base_measure: bool,
    pub note: &'static str,
}

impl VanishingReport {
    pub fn passes(&self) -> bool {
        self.max_residual < self.tolerance
    }
}

/// Evaluates every relation on `samples` points with θ uniform in `[-2, 2]ⁿ`.
///
/// With a non-uniform base measure the binomials hold for `pⱼ / p₀(ωⱼ)`
/// instead of `pⱼ`; that rescaling is applied and flagged in the report.
pub fn verify_vanishing(
    model: &ExponentialFamilyModel,
    relations: &[BinomialRelation],
    samples: usize,
    seed: u64,
) -> Result<VanishingReport> {
    let qt = extended_matrix(model);
    for rel in relations {
        let u = rel.exponent_vector();
        let big: Vec<BigInt> = u.iter().map(|&x| BigInt::from(x)).collect();
        if !qt.annihilates(&big) {
            return Err(Error::NotInKernel(u));
        }
    }
    let rescale = !model.has_uniform_base();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let theta: Vec<f64> = (0..model.n()).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let mut p = model.probabilities(&model.point(&theta)?).p;
        if rescale {
            for (pj, b) in p.iter_mut().zip(model.base_measure()) {
                *pj /= b;
            }
        }
        for rel in relations {
            let power =
                |e: &[u64]| -> f64 { e.iter().zip(&p).map(|(&k, pj)| pj.powi(k as i32)).product() };
            worst = worst.max((power(&rel.u_plus) - power(&rel.u_minus)).abs());
        }
    }
    Ok(VanishingReport {
        samples,
        seed,
        relations: relations.len(),
        max_residual: worst,
        tolerance: VANISHING_TOL,
        rescaled_by_base_measure: rescale,
        note: SATURATION_CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(name: &str) -> ExponentialFamilyModel {
        ExponentialFamilyModel::builtin(name).unwrap()
    }

    #[test]
    fn extended_matrices() {
        assert_eq!(
            extended_matrix(&builtin("bernoulli")).rows,
            vec![vec![1, 1], vec![0, 1]]
        );
        assert_eq!(
            extended_matrix(&builtin("independence-2x2")).rows,
            vec![vec![1, 1, 1, 1], vec![1, 1, 0, 0], vec![1, 0, 1, 0]]
        );
        assert_eq!(
            extended_matrix(&builtin("trinomial")).rows,
            vec![vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]
        );
    }

    #[test]
    fn independence_kernel() {
        let k = lattice_kernel(&extended_matrix(&builtin("independence-2x2")));
        assert_eq!(k.to_i64(), vec![vec![1, -1, -1, 1]]);
        let rels = binomials_from_kernel(&k);
        assert_eq!(rels[0].display, "y1*y4 - y2*y3");
    }

    #[test]
    fn empty_kernels() {
        let b = lattice_kernel(&extended_matrix(&builtin("bernoulli")));
        assert_eq!(b.rank(), 0);
        assert!(binomials_from_kernel(&b).is_empty());
        assert!(kernel_membership(&b, &[0, 0]));
        let t = lattice_kernel(&extended_matrix(&builtin("trinomial")));
        assert_eq!(t.rank(), 0);
    }

    #[test]
    fn ones_row_kernel_equals_enumeration_lattice() {
        let qt = ExtendedMatrix {
            rows: vec![vec![1, 1, 1]],
        };
        let k = lattice_kernel(&qt);
        assert_eq!(k.rank(), 2);
        // Same lattice as {(1,−1,0), (0,1,−1)}: each generates the other.
        for v in [[1, -1, 0], [0, 1, -1]] {
            assert!(kernel_membership(&k, &v));
        }
        let other = LatticeBasis {
            basis: intlin::to_big(&[vec![1, -1, 0], vec![0, 1, -1]]),
            m: 3,
        };
        for v in k.to_i64() {
            assert!(kernel_membership(&other, &v));
        }
    }

    #[test]
    fn binomial_display() {
        assert_eq!(
            BinomialRelation::from_vector(&[2, -1, -1, 0]).display,
            "y1^2 - y2*y3"
        );
        assert_eq!(BinomialRelation::from_vector(&[0, 0, 1]).display, "y3 - 1");
        let r = BinomialRelation::from_vector(&[3, -2, 0, -1]);
        assert_eq!(r.exponent_vector(), vec![3, -2, 0, -1]);
        assert_eq!(r.u_plus, vec![3, 0, 0, 0]);
        assert_eq!(r.u_minus, vec![0, 2, 0, 1]);
    }

    #[test]
    fn membership_cases() {
        let k = lattice_kernel(&extended_matrix(&builtin("independence-2x2")));
        assert!(kernel_membership(&k, &[2, -2, -2, 2]));
        assert!(!kernel_membership(&k, &[1, -1, 0, 0]));
    }

    #[test]
    fn vanishing_on_independence() {
        let m = builtin("independence-2x2");
        let rels = binomials_from_kernel(&lattice_kernel(&extended_matrix(&m)));
        let rep = verify_vanishing(&m, &rels, 100, 0).unwrap();
        assert!(rep.max_residual < 1e-12);
        assert!(!rep.rescaled_by_base_measure);
        let b = builtin("bernoulli");
        let rep = verify_vanishing(&b, &[], 10, 0).unwrap();
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn vanishing_with_weighted_base_measure() {
        let m = ExponentialFamilyModel::new(
            "w",
            vec![vec![1, 1, 0, 0], vec![1, 0, 1, 0]],
            Some(vec![1.0, 2.0, 3.0, 0.5]),
        )
        .unwrap();
        let rels = binomials_from_kernel(&lattice_kernel(&extended_matrix(&m)));
        let rep = verify_vanishing(&m, &rels, 50, 1).unwrap();
        assert!(rep.rescaled_by_base_measure);
        assert!(rep.max_residual < 1e-12, "{}", rep.max_residual);
    }

    #[test]
    fn foreign_relation_rejected() {
        let m = builtin("independence-2x2");
        let bad = BinomialRelation::from_vector(&[1, -1, 0, 0]);
        assert!(matches!(
            verify_vanishing(&m, &[bad], 1, 0),
            Err(Error::NotInKernel(_))
        ));
    }
}
