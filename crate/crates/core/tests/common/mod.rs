//! Oracles shared by the integration tests. Nothing here calls into the
//! library's integer linear algebra.

#![allow(dead_code)]

use statfrob::toric::ExtendedMatrix;

/// Every `u ∈ {−bound, …, bound}^m` with `Q̃ u = 0`, excluding zero.
pub fn enumerate_kernel(qt: &ExtendedMatrix, bound: i64) -> Vec<Vec<i64>> {
    let m = qt.m();
    let mut out = Vec::new();
    let mut u = vec![-bound; m];
    loop {
        if u.iter().any(|&x| x != 0)
            && qt
                .rows
                .iter()
                .all(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum::<i64>() == 0)
        {
            out.push(u.clone());
        }
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            if u[i] < bound {
                u[i] += 1;
                break;
            }
            u[i] = -bound;
            i += 1;
        }
    }
}

/// Coordinates of `u` in an echelon basis (leading entries at strictly
/// increasing columns), or `None` if `u` is not an integer combination.
pub fn echelon_coordinates(basis: &[Vec<i64>], u: &[i64]) -> Option<Vec<i64>> {
    let mut rest = u.to_vec();
    let mut coords = Vec::with_capacity(basis.len());
    for row in basis {
        let lead = row.iter().position(|&x| x != 0)?;
        if rest[..lead].iter().any(|&x| x != 0) {
            return None;
        }
        if rest[lead] % row[lead] != 0 {
            return None;
        }
        let c = rest[lead] / row[lead];
        for (r, b) in rest.iter_mut().zip(row) {
            *r -= c * b;
        }
        coords.push(c);
    }
    rest.iter().all(|&x| x == 0).then_some(coords)
}

fn det(a: &[Vec<i128>]) -> i128 {
    match a.len() {
        0 => 1,
        1 => a[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i128>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * a[0][c] * det(&minor)
            })
            .sum(),
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Whether the integer span of `vectors` equals the lattice with echelon
/// basis `basis`: every vector must lie in the lattice, and the gcd of the
/// maximal minors of their coordinate matrix must be 1.
pub fn spans_same_lattice(basis: &[Vec<i64>], vectors: &[Vec<i64>]) -> bool {
    let r = basis.len();
    if r == 0 {
        return vectors.is_empty();
    }
    let coords: Option<Vec<Vec<i128>>> = vectors
        .iter()
        .map(|u| echelon_coordinates(basis, u).map(|c| c.into_iter().map(i128::from).collect()))
        .collect();
    let Some(coords) = coords else { return false };
    if coords.len() < r {
        return false;
    }
    let mut g = 0;
    let mut pick = (0..r).collect::<Vec<_>>();
    loop {
        let sub: Vec<Vec<i128>> = pick.iter().map(|&i| coords[i].clone()).collect();
        g = gcd(g, det(&sub));
        if g == 1 {
            return true;
        }
        // Next r-combination of the row indices.
        let k = coords.len();
        let mut i = r;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if pick[i] < k - r + i {
                pick[i] += 1;
                for j in i + 1..r {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `Q̃ u = 0` by direct multiplication.
pub fn annihilated(qt: &ExtendedMatrix, u: &[i64]) -> bool {
    qt.rows
        .iter()
        .all(|row| row.iter().zip(u).map(|(a, b)| a * b).sum::<i64>() == 0)
}

pub const FIXTURES: [&str; 4] = [
    "bernoulli",
    "trinomial",
    "independence-2x2",
    "random-n3m6-seed0",
];

/// Rank by singular values, independent of the exact integer routines.
pub fn float_rank(rows: &[Vec<i64>]) -> usize {
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j] as f64);
    m.rank(1e-9)
}
