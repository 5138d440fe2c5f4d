//! Central finite-difference stencils for scalar functions of several variables.

/// `∂ᵢ f` by the two-point central stencil.
pub fn gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..x.len())
        .map(|i| {
            buf[i] = x[i] + h;
            let fp = f(&buf);
            buf[i] = x[i] - h;
            let fm = f(&buf);
            buf[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `∂ᵢ∂ⱼ f` from the four corners `x ± h eᵢ ± h eⱼ`; the diagonal reduces to the
/// stencil `f(x+2h) - 2f(x) + f(x-2h)` over `4h²`.
pub fn hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    let mut buf = x.to_vec();
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                buf.copy_from_slice(x);
                buf[i] += si * h;
                buf[j] += sj * h;
                acc += si * sj * f(&buf);
            }
            let v = acc / (4.0 * h * h);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// `∂ᵢ∂ⱼ∂ₖ f` from the eight points `x + h(±eᵢ ± eⱼ ± eₖ)`.
///
/// Works for repeated indices; for `i = j = k` it is the stencil
/// `[f(x+3h) - 3f(x+h) + 3f(x-h) - f(x-3h)] / 8h³`. Truncation error is O(h²).
pub fn third_derivative(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    let mut buf = x.to_vec();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let mut acc = 0.0;
                for mask in 0..8u8 {
                    let s = |bit: u8| if mask & bit == 0 { 1.0 } else { -1.0 };
                    let (si, sj, sk) = (s(1), s(2), s(4));
                    buf.copy_from_slice(x);
                    buf[i] += si * h;
                    buf[j] += sj * h;
                    buf[k] += sk * h;
                    acc += si * sj * sk * f(&buf);
                }
                let v = acc / (8.0 * h * h * h);
                for (a, b, c) in [
                    (i, j, k),
                    (i, k, j),
                    (j, i, k),
                    (j, k, i),
                    (k, i, j),
                    (k, j, i),
                ] {
                    out[a][b][c] = v;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // f = x³y + y²z + xyz, with exact derivatives written out by hand.
    fn f(v: &[f64]) -> f64 {
        let (x, y, z) = (v[0], v[1], v[2]);
        x * x * x * y + y * y * z + x * y * z
    }

    #[test]
    fn polynomial_derivatives() {
        let p = [0.7, -1.2, 0.4];
        let (x, y, z) = (p[0], p[1], p[2]);
        let g = gradient(f, &p, 1e-4);
        let g_exact = [
            3.0 * x * x * y + y * z,
            x * x * x + 2.0 * y * z + x * z,
            y * y + x * y,
        ];
        for i in 0..3 {
            assert!((g[i] - g_exact[i]).abs() < 1e-7);
        }
        let h = hessian(f, &p, 1e-4);
        assert!((h[0][0] - 6.0 * x * y).abs() < 1e-6);
        assert!((h[0][1] - (3.0 * x * x + z)).abs() < 1e-6);
        assert!((h[1][2] - (2.0 * y + x)).abs() < 1e-6);
        let t = third_derivative(f, &p, 1e-3);
        assert!((t[0][0][0] - 6.0 * y).abs() < 1e-5);
        assert!((t[0][0][1] - 6.0 * x).abs() < 1e-5);
        assert!((t[0][1][2] - 1.0).abs() < 1e-5);
        assert!((t[1][1][2] - 2.0).abs() < 1e-5);
        assert!(t[2][2][2].abs() < 1e-5);
    }
}
