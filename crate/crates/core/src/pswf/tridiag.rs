//! Symmetric tridiagonal eigensolver (implicit-shift QL, as in EISPACK `tql2`).

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct TridiagonalEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvectors, `vectors[k]` belonging to `values[k]`, unit Euclidean norm.
    pub vectors: Vec<Vec<f64>>,
}

/// Failure of the QL sweep to deflate eigenvalue `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoConvergence {
    pub index: usize,
}

/// Solves `A v = lambda v` for the matrix with `diag` on the diagonal and
/// `off[i] = A[i][i+1] = A[i+1][i]`.
///
/// QL (rather than QR) iteration suits matrices whose diagonal grows down
/// the matrix: small eigenvalues are deflated at the top against a small
/// local scale, which keeps them relatively accurate.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
) -> Result<TridiagonalEigen, NoConvergence> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    // z[i * n + k]: component k of eigenvector i
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let h = zi1[k];
                        zi1[k] = s * zi[k] + c * h;
                        zi[k] = c * zi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect();
    Ok(TridiagonalEigen { values, vectors })
}

/// Error-free `a + b` as `(sum, error)`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Double-double accumulator: `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn add(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let hi = s + lo;
        Dd { hi, lo: lo - (hi - s) }
    }

    fn add_product(self, a: f64, b: f64) -> Dd {
        let p = a * b;
        self.add(p).add(a.mul_add(b, -p))
    }
}

/// Rayleigh quotient `v^T A v / v^T v`, accumulated in double-double so that
/// it is accurate to a few ulps of the eigenvalue rather than of `||A||`.
pub fn rayleigh_quotient(diag: &[f64], off: &[f64], v: &[f64]) -> f64 {
    let mut num = Dd::default();
    let mut den = Dd::default();
    for (j, &x) in v.iter().enumerate() {
        num = num.add_product(diag[j] * x, x).add_product(diag[j].mul_add(x, -(diag[j] * x)), x);
        if j + 1 < v.len() {
            let p = off[j] * x;
            let pe = off[j].mul_add(x, -p);
            num = num.add_product(2.0 * p, v[j + 1]).add_product(2.0 * pe, v[j + 1]);
        }
        den = den.add_product(x, x);
    }
    (num.hi + num.lo) / (den.hi + den.lo)
}
