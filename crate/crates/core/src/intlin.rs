//! Exact integer linear algebra on row lattices.
//!
//! Everything here works on `BigInt` so intermediate coefficient growth in the
//! extended-gcd eliminations can never overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns only the nonzero rows `H`, together with the pivot column of each.
/// Pivots are strictly increasing, pivot entries are positive, and every entry
/// above a pivot lies in `[0, pivot)`. `H` is unique for the row lattice.
pub fn hermite_normal_form(rows: IntMatrix) -> (IntMatrix, Vec<usize>) {
    let mut a = rows;
    let ncols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == a.len() {
            break;
        }
        for i in r + 1..a.len() {
            if a[i][col].is_zero() {
                continue;
            }
            if a[r][col].is_zero() {
                a.swap(r, i);
                continue;
            }
            combine_rows(&mut a, r, i, col);
        }
        if a[r][col].is_zero() {
            continue;
        }
        if a[r][col].is_negative() {
            for v in a[r].iter_mut() {
                *v = -&*v;
            }
        }
        let (head, tail) = a.split_at_mut(r);
        let pivot_row = &tail[0];
        let pivot = &pivot_row[col];
        for row in head.iter_mut() {
            let q = row[col].div_floor(pivot);
            if !q.is_zero() {
                for (x, p) in row.iter_mut().zip(pivot_row) {
                    *x -= &q * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Unimodular 2×2 row operation zeroing `a[i][col]` against `a[r][col]`.
fn combine_rows(a: &mut IntMatrix, r: usize, i: usize, col: usize) {
    let x = a[r][col].clone();
    let y = a[i][col].clone();
    let eg = x.extended_gcd(&y);
    let (g, s, t) = (eg.gcd, eg.x, eg.y);
    let xg = &x / &g;
    let yg = &y / &g;
    let row_r = a[r].clone();
    let row_i = a[i].clone();
    for c in 0..row_r.len() {
        a[r][c] = &s * &row_r[c] + &t * &row_i[c];
        a[i][c] = &xg * &row_i[c] - &yg * &row_r[c];
    }
}

/// Rank over the rationals (equivalently over ℤ).
pub fn rank(rows: &[Vec<i64>]) -> usize {
    hermite_normal_form(to_big(rows)).0.len()
}

/// Basis of the integer kernel `{u ∈ ℤ^m : A u = 0}` of a `k × m` matrix `A`,
/// returned in Hermite normal form.
///
/// Reduces the augmented lattice `[Aᵀ | I_m]`; its HNF rows whose left block
/// vanishes are exactly an HNF basis of the kernel lattice.
pub fn integer_kernel(a: &[Vec<i64>], m: usize) -> IntMatrix {
    let k = a.len();
    let aug: IntMatrix = (0..m)
        .map(|j| {
            let mut row: Vec<BigInt> = a.iter().map(|r| BigInt::from(r[j])).collect();
            row.extend((0..m).map(|c| {
                if c == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }));
            row
        })
        .collect();
    let (h, pivots) = hermite_normal_form(aug);
    h.into_iter()
        .zip(pivots)
        .filter(|(_, p)| *p >= k)
        .map(|(row, _)| row[k..].to_vec())
        .collect()
}

/// Whether `u` lies in the ℤ-span of `basis`.
pub fn lattice_contains(basis: &IntMatrix, u: &[BigInt]) -> bool {
    if basis.is_empty() {
        return u.iter().all(Zero::is_zero);
    }
    let (h, pivots) = hermite_normal_form(basis.clone());
    let mut rest = u.to_vec();
    for (row, &p) in h.iter().zip(&pivots) {
        // Entries left of this pivot are already zero.
        let (q, rem) = rest[p].div_rem(&row[p]);
        if !rem.is_zero() {
            return false;
        }
        for (x, b) in rest.iter_mut().zip(row) {
            *x -= &q * b;
        }
    }
    rest.iter().all(Zero::is_zero)
}

pub fn mat_vec(a: &[Vec<i64>], u: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .map(|row| row.iter().zip(u).map(|(&x, y)| BigInt::from(x) * y).sum())
        .collect()
}
