//! Classical special functions behind the ball-polynomial expansion.
//!
//! Conventions:
//!
//! * Associated Legendre functions carry no Condon–Shortley phase,
//!   `P_m^l(x) = (1 - x^2)^{l/2} d^l/dx^l P_m(x)`. Tables that include the
//!   `(-1)^l` factor differ from these values by that sign.
//! * Real spherical harmonics use `cos(l phi)` for `l > 0` and `sin(l phi)` for
//!   `l < 0` (note: `sin(l phi)` with the signed `l`, so the negative-order
//!   harmonics carry a minus sign relative to the `sin(|l| phi)` convention).
//! * Jacobi polynomials `P_n^{(m)}` are orthogonal on `[-1, 1]` under the weight
//!   `(1 + eta)^{m + 1/2}` and normalized to `2^{m + 5/2}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point in spherical coordinates `(r, theta, phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    /// Polar angle in `[0, pi]`.
    pub theta: f64,
    /// Azimuth in `[0, 2 pi)`.
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn from_cartesian(x: [f64; 3]) -> Self {
        let rho = x[0].hypot(x[1]);
        let r = rho.hypot(x[2]);
        let theta = rho.atan2(x[2]);
        let mut phi = x[1].atan2(x[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi -= 2.0 * PI;
        }
        Self { r, theta, phi }
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }
}

/// Degree/order pair `(m, l)` of a real spherical harmonic, `|l| <= m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    m: usize,
    ell: i64,
}

impl HarmonicIndex {
    pub fn new(m: usize, ell: i64) -> Result<Self> {
        if ell.unsigned_abs() as usize > m {
            return Err(Error::Index(format!("order {ell} exceeds degree {m}")));
        }
        Ok(Self { m, ell })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    /// Position of this harmonic in a table laid out by [`real_harmonics`].
    pub fn offset(&self) -> usize {
        harmonic_offset(self.m, self.ell)
    }
}

/// Flat table index of `Y_{m,l}`: degrees are stored in blocks `l = -m..=m`.
#[inline]
pub fn harmonic_offset(m: usize, ell: i64) -> usize {
    ((m * m + m) as i64 + ell) as usize
}

/// Number of harmonics of degree at most `max_m`.
#[inline]
pub fn harmonic_count(max_m: usize) -> usize {
    (max_m + 1) * (max_m + 1)
}

fn check_abscissa(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("abscissa {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Legendre polynomial `P_m(x)` by the three-term recurrence.
pub fn legendre_poly(m: usize, x: f64) -> Result<f64> {
    check_abscissa(x)?;
    if x == 1.0 {
        return Ok(1.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return Ok(p0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Fully normalized `sqrt((2m+1)/(4 pi) (m-l)!/(m+l)!) P_m^l(x)` for one `(m, l)`.
fn normalized_assoc_legendre(m: usize, ell: usize, x: f64, s: f64) -> f64 {
    let mut pll = 0.5 / PI.sqrt();
    for k in 1..=ell {
        let kf = k as f64;
        pll *= s * ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt();
    }
    if m == ell {
        return pll;
    }
    let lf = ell as f64;
    let mut p_prev = pll;
    let mut p_cur = x * (2.0 * lf + 3.0).sqrt() * pll;
    for k in (ell + 2)..=m {
        let kf = k as f64;
        let a = ((4.0 * kf * kf - 1.0) / (kf * kf - lf * lf)).sqrt();
        let km = kf - 1.0;
        let b = ((km * km - lf * lf) / (4.0 * km * km - 1.0)).sqrt();
        let next = a * (x * p_cur - b * p_prev);
        p_prev = p_cur;
        p_cur = next;
    }
    p_cur
}

/// Associated Legendre function `P_m^l(x)` without the Condon–Shortley phase.
///
/// Evaluated through the normalized recurrence and rescaled at the end, so the
/// factorial ratio never appears on its own.
pub fn assoc_legendre(m: usize, ell: usize, x: f64) -> Result<f64> {
    if ell > m {
        return Err(Error::Index(format!("order {ell} exceeds degree {m}")));
    }
    check_abscissa(x)?;
    let s = (1.0 - x) * (1.0 + x);
    let s = s.max(0.0).sqrt();
    let normalized = normalized_assoc_legendre(m, ell, x, s);
    let ln_scale = 0.5
        * (((2 * m + 1) as f64 / (4.0 * PI)).ln() + ln_factorial(m - ell) - ln_factorial(m + ell));
    Ok(normalized * (-ln_scale).exp())
}

/// Real spherical harmonic `Y_{m,l}(theta, phi)`, orthonormal on the unit sphere.
pub fn spherical_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> f64 {
    let (s, x) = theta.sin_cos();
    let ell = idx.ell.unsigned_abs() as usize;
    let p = normalized_assoc_legendre(idx.m, ell, x, s.abs());
    match idx.ell {
        0 => p,
        l if l > 0 => std::f64::consts::SQRT_2 * p * (l as f64 * phi).cos(),
        l => std::f64::consts::SQRT_2 * p * (l as f64 * phi).sin(),
    }
}

/// Fills `out` with every `Y_{m,l}` for `m <= max_m` at one direction.
///
/// The direction is given by `cos(theta)`, `sin(theta) >= 0` and
/// `(cos(phi), sin(phi))`; `out` is indexed by [`harmonic_offset`].
pub fn real_harmonics(
    max_m: usize,
    cos_theta: f64,
    sin_theta: f64,
    cos_phi: f64,
    sin_phi: f64,
    out: &mut [f64],
) {
    assert!(out.len() >= harmonic_count(max_m));
    let x = cos_theta;
    let s = sin_theta;
    // cos(l phi), sin(l phi) by repeated rotation
    let mut cl = 1.0;
    let mut sl = 0.0;
    let mut pll = 0.5 / PI.sqrt();
    for ell in 0..=max_m {
        let lf = ell as f64;
        if ell > 0 {
            pll *= s * ((2.0 * lf + 1.0) / (2.0 * lf)).sqrt();
            let c_next = cl * cos_phi - sl * sin_phi;
            sl = sl * cos_phi + cl * sin_phi;
            cl = c_next;
        }
        let mut store = |m: usize, p: f64| {
            if ell == 0 {
                out[harmonic_offset(m, 0)] = p;
            } else {
                let p2 = std::f64::consts::SQRT_2 * p;
                out[harmonic_offset(m, ell as i64)] = p2 * cl;
                // sin(-l phi) = -sin(l phi)
                out[harmonic_offset(m, -(ell as i64))] = -p2 * sl;
            }
        };
        store(ell, pll);
        if ell == max_m {
            break;
        }
        let mut p_prev = pll;
        let mut p_cur = x * (2.0 * lf + 3.0).sqrt() * pll;
        store(ell + 1, p_cur);
        for k in (ell + 2)..=max_m {
            let kf = k as f64;
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - lf * lf)).sqrt();
            let km = kf - 1.0;
            let b = ((km * km - lf * lf) / (4.0 * km * km - 1.0)).sqrt();
            let next = a * (x * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = next;
            store(k, p_cur);
        }
    }
}

/// Real spherical harmonics up to `max_m` at the direction of a Cartesian vector.
///
/// The zero vector is treated as the north pole.
pub fn real_harmonics_at(max_m: usize, x: [f64; 3], out: &mut [f64]) {
    let rho = x[0].hypot(x[1]);
    let r = rho.hypot(x[2]);
    let (ct, st) = if r > 0.0 { (x[2] / r, rho / r) } else { (1.0, 0.0) };
    let (cp, sp) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
    real_harmonics(max_m, ct, st, cp, sp, out);
}

/// Recurrence coefficients `(a_n, b_n)` of the normalized Jacobi family `m`.
#[inline]
pub fn jacobi_recurrence(m: usize, n: usize) -> (f64, f64) {
    let m = m as f64;
    let n = n as f64;
    let a = 2.0 * (n + 1.0) * (n + m + 1.5)
        / ((2.0 * n + m + 2.5) * ((2.0 * n + m + 1.5) * (2.0 * n + m + 3.5)).sqrt());
    let b = (m + 0.5) * (m + 0.5) / ((2.0 * n + m + 0.5) * (2.0 * n + m + 2.5));
    (a, b)
}

#[inline]
fn jacobi_h(m: usize, n: usize) -> f64 {
    1.0 / (2.0 * (2.0 * n as f64 + m as f64 + 1.5)).sqrt()
}

/// Fills `out[n] = P_n^{(m)}(eta)` for `n = 0..out.len()`.
pub fn jacobi_normalized_all(m: usize, eta: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0 / jacobi_h(m, 0);
    if out.len() == 1 {
        return;
    }
    let mf = m as f64;
    out[1] = ((mf + 2.5) * eta - mf - 0.5) / (2.0 * jacobi_h(m, 1));
    let (mut a_prev, _) = jacobi_recurrence(m, 0);
    for n in 1..out.len() - 1 {
        let (a, b) = jacobi_recurrence(m, n);
        out[n + 1] = ((eta - b) * out[n] - a_prev * out[n - 1]) / a;
        a_prev = a;
    }
}

/// Normalized Jacobi polynomial `P_n^{(m)}(eta)`.
pub fn jacobi_normalized(m: usize, n: usize, eta: f64) -> f64 {
    let mut vals = vec![0.0; n + 1];
    jacobi_normalized_all(m, eta, &mut vals);
    vals[n]
}

/// Ball polynomial `P_{m,j,l}(x) = |x|^m P_j^{(m)}(2|x|^2 - 1) Y_{m,l}(x/|x|)`.
///
/// Unit norm in `L^2` of the unit ball. At the origin the value is zero unless
/// `m = 0`.
pub fn ball_polynomial(m: usize, j: usize, ell: i64, x: [f64; 3]) -> Result<f64> {
    let idx = HarmonicIndex::new(m, ell)?;
    let sp = SphericalPoint::from_cartesian(x);
    let r = sp.r;
    if r == 0.0 && m > 0 {
        return Ok(0.0);
    }
    let radial = r.powi(m as i32) * jacobi_normalized(m, j, 2.0 * r * r - 1.0);
    Ok(radial * spherical_harmonic(idx, sp.theta, sp.phi))
}

/// `ln Gamma(m + 3/2)`.
pub fn ln_gamma_half_integer(m: usize) -> f64 {
    let mut acc = 0.5 * PI.ln() - std::f64::consts::LN_2;
    for k in 1..=m {
        acc += (k as f64 + 0.5).ln();
    }
    acc
}

/// `Gamma(m + 3/2)` by the exact recurrence from `Gamma(3/2) = sqrt(pi)/2`.
pub fn gamma_half_integer(m: usize) -> Result<f64> {
    let mut g = 0.5 * PI.sqrt();
    for k in 1..=m {
        g *= k as f64 + 0.5;
        if !g.is_finite() {
            return Err(Error::Range(format!("Gamma({m} + 3/2) overflows")));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_poly(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_poly(1, 0.5).unwrap(), 0.5);
        assert_eq!(legendre_poly(2, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_poly(37, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(legendre_poly(2, 0.5).unwrap(), -0.125, epsilon = 1e-15);
        assert!(matches!(legendre_poly(3, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn assoc_legendre_values() {
        assert_abs_diff_eq!(assoc_legendre(1, 1, 0.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(assoc_legendre(2, 1, 0.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(assoc_legendre(2, 2, 0.0).unwrap(), 3.0, epsilon = 1e-13);
        // (1-x^2)^{1/2} * 3x, no sign flip
        let x: f64 = 0.4;
        assert_abs_diff_eq!(
            assoc_legendre(2, 1, x).unwrap(),
            (1.0 - x * x).sqrt() * 3.0 * x,
            epsilon = 1e-14
        );
        assert!(matches!(assoc_legendre(2, 3, 0.0), Err(Error::Index(_))));
    }

    #[test]
    fn assoc_legendre_large_degree_is_finite() {
        let v = assoc_legendre(60, 40, 0.3).unwrap();
        assert!(v.is_finite() && v != 0.0);
    }

    #[test]
    fn harmonic_values() {
        let y00 = spherical_harmonic(HarmonicIndex::new(0, 0).unwrap(), 1.1, 2.3);
        assert_abs_diff_eq!(y00, (1.0 / (4.0 * PI)).sqrt(), epsilon = 1e-15);
        let y10 = spherical_harmonic(HarmonicIndex::new(1, 0).unwrap(), 0.0, 0.0);
        assert_abs_diff_eq!(y10, (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-15);
        assert!(HarmonicIndex::new(2, -3).is_err());
    }

    #[test]
    fn table_matches_single_evaluation() {
        let (theta, phi) = (0.7_f64, 4.1_f64);
        let max_m = 12;
        let mut tab = vec![0.0; harmonic_count(max_m)];
        real_harmonics(max_m, theta.cos(), theta.sin(), phi.cos(), phi.sin(), &mut tab);
        for m in 0..=max_m {
            for ell in -(m as i64)..=(m as i64) {
                let idx = HarmonicIndex::new(m, ell).unwrap();
                assert_abs_diff_eq!(
                    tab[idx.offset()],
                    spherical_harmonic(idx, theta, phi),
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn harmonic_normalization_matches_closed_forms() {
        // sqrt((2m+1)/(2 pi) (m-l)!/(m+l)!) P_m^l(cos theta) cos(l phi)
        let (m, ell, theta, phi) = (5usize, 3usize, 1.2_f64, 0.4_f64);
        let norm = ((2 * m + 1) as f64 / (2.0 * PI) * (2.0 / 40320.0)).sqrt();
        let expect = norm * assoc_legendre(m, ell, theta.cos()).unwrap() * (3.0 * phi).cos();
        let got = spherical_harmonic(HarmonicIndex::new(m, 3).unwrap(), theta, phi);
        assert_abs_diff_eq!(got, expect, epsilon = 1e-13);
        let expect_neg = norm * assoc_legendre(m, ell, theta.cos()).unwrap() * (-3.0 * phi).sin();
        let got_neg = spherical_harmonic(HarmonicIndex::new(m, -3).unwrap(), theta, phi);
        assert_abs_diff_eq!(got_neg, expect_neg, epsilon = 1e-13);
    }

    #[test]
    fn jacobi_values() {
        assert_abs_diff_eq!(jacobi_normalized(0, 0, 0.2), 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(jacobi_normalized(0, 1, 1.0), 7f64.sqrt(), epsilon = 1e-14);
        assert!(jacobi_normalized(3, 10, -1.0).is_finite());
    }

    #[test]
    fn jacobi_orthonormality_under_oracle_quadrature() {
        // substitute eta = 2u^2 - 1 so the weight (1+eta)^{m+1/2} becomes polynomial
        // times a smooth Jacobian: (2u^2)^{m+1/2} 4u du, u in [0, 1]
        let rule = gauss_legendre(120).unwrap();
        for m in 0..=10usize {
            let nmax = 20;
            let mut gram = vec![0.0; (nmax + 1) * (nmax + 1)];
            let mut vals = vec![0.0; nmax + 1];
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let u = 0.5 * (x + 1.0);
                let eta = 2.0 * u * u - 1.0;
                let weight = (2.0 * u * u).powf(m as f64 + 0.5) * 4.0 * u * 0.5 * w;
                jacobi_normalized_all(m, eta, &mut vals);
                for a in 0..=nmax {
                    for b in 0..=nmax {
                        gram[a * (nmax + 1) + b] += weight * vals[a] * vals[b];
                    }
                }
            }
            let target = 2f64.powf(m as f64 + 2.5);
            for a in 0..=nmax {
                for b in 0..=nmax {
                    let expect = if a == b { target } else { 0.0 };
                    assert_abs_diff_eq!(gram[a * (nmax + 1) + b], expect, epsilon = 1e-8 * target);
                }
            }
        }
    }

    #[test]
    fn ball_polynomial_edge_values() {
        assert_eq!(ball_polynomial(1, 0, 0, [0.0; 3]).unwrap(), 0.0);
        let v = ball_polynomial(0, 0, 0, [0.1, -0.2, 0.3]).unwrap();
        assert_abs_diff_eq!(v, 3f64.sqrt() / (4.0 * PI).sqrt(), epsilon = 1e-14);
        let v0 = ball_polynomial(0, 0, 0, [0.0; 3]).unwrap();
        assert_abs_diff_eq!(v0, 3f64.sqrt() / (4.0 * PI).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn gamma_values() {
        let sp = PI.sqrt();
        assert_abs_diff_eq!(gamma_half_integer(0).unwrap(), sp / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_half_integer(1).unwrap(), 3.0 * sp / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_half_integer(2).unwrap(), 15.0 * sp / 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            ln_gamma_half_integer(40),
            gamma_half_integer(40).unwrap().ln(),
            epsilon = 1e-12
        );
        assert!(matches!(gamma_half_integer(200), Err(Error::Range(_))));
    }

    #[test]
    fn spherical_round_trip() {
        for &x in &[[0.3, -0.2, 0.5], [-0.1, 0.0, -0.9], [0.0, 0.4, 0.0]] {
            let back = SphericalPoint::from_cartesian(x).to_cartesian();
            for k in 0..3 {
                assert_abs_diff_eq!(back[k], x[k], epsilon = 1e-14);
            }
        }
    }
}
