//! Three-dimensional prolate spheroidal wave functions on the unit ball.
//!
//! Each family of fixed degree `m` is expanded in ball polynomials
//! `r^m P_j^{(m)}(2r^2 - 1) Y_{m,l}`. The expansion coefficients and the
//! Sturm–Liouville eigenvalues `chi_{m,n}` come from a symmetric tridiagonal
//! eigenproblem; the prolate eigenvalues `alpha_{m,n}` of the restricted
//! Fourier operator follow from the leading coefficient and the value of the
//! radial series at `eta = -1`.

mod basis;
pub mod tridiag;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use self::basis::{build_basis, build_basis_with, eval_pswf_r3, BasisOptions, ExtendedMode, PswfBasis, Truncation};
use crate::error::{Error, Result};
use crate::specfun::{
    jacobi_normalized_all, jacobi_recurrence, ln_gamma_half_integer, spherical_harmonic,
    HarmonicIndex, SphericalPoint,
};

/// Default truncation order of the coefficient expansion.
pub const DEFAULT_TRUNCATION: usize = 150;

/// Coefficients below this magnitude are skipped when evaluating a profile.
const NEGLIGIBLE_COEFFICIENT: f64 = 1e-25;

/// Diagonal and off-diagonal of the `(K+1) x (K+1)` family-`m` matrix.
///
/// `diag[j] = gamma_{m+2j} + (1 + b_j) c^2 / 2` with `gamma_k = k (k + 3)`,
/// `off[j] = a_j c^2 / 2`.
pub fn build_tridiagonal(m: usize, c: f64, k: usize) -> (Vec<f64>, Vec<f64>) {
    let half_c2 = 0.5 * c * c;
    let mut diag = Vec::with_capacity(k + 1);
    let mut off = Vec::with_capacity(k);
    for j in 0..=k {
        let (a, b) = jacobi_recurrence(m, j);
        let deg = (m + 2 * j) as f64;
        diag.push(deg * (deg + 3.0) + (1.0 + b) * half_c2);
        if j < k {
            off.push(a * half_c2);
        }
    }
    (diag, off)
}

/// One eigenpair of a family: Sturm–Liouville eigenvalue and coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMode {
    pub chi: f64,
    pub beta: Vec<f64>,
}

/// All `K + 1` eigenpairs of family `m`, `chi` strictly ascending.
///
/// Eigenvectors have unit norm and `beta_0 > 0` (first nonzero entry positive
/// when `beta_0 = 0`). `chi` is the Rayleigh quotient of the QL vector,
/// accumulated in double-double. The decaying tail of each vector is
/// recomputed from the three-term recurrence, run backward, so that the tiny
/// trailing entries are accurate to working precision in the relative sense.
pub fn solve_modes(m: usize, c: f64, k: usize) -> Result<Vec<FamilyMode>> {
    if k < 1 {
        return Err(Error::Argument("truncation order K must be at least 1".into()));
    }
    let (diag, off) = build_tridiagonal(m, c, k);
    let eig = tridiag::symmetric_tridiagonal_eigen(&diag, &off)
        .map_err(|e| Error::NoConvergence { m, index: e.index })?;
    let mut out = Vec::with_capacity(k + 1);
    for mut beta in eig.vectors {
        let chi = tridiag::rayleigh_quotient(&diag, &off, &beta);
        refine_head(&diag, &off, chi, &mut beta);
        refine_tail(&diag, &off, chi, &mut beta);
        normalize_sign(&mut beta);
        out.push(FamilyMode { chi, beta });
    }
    for (idx, w) in out.windows(2).enumerate() {
        if !(w[0].chi < w[1].chi) {
            return Err(Error::NoConvergence { m, index: idx + 1 });
        }
    }
    Ok(out)
}

/// Replaces the entries of `v` past the turning point by the recessive
/// solution of the recurrence, anchored at the last entry before it.
fn refine_tail(diag: &[f64], off: &[f64], chi: f64, v: &mut [f64]) {
    let n = diag.len();
    if n < 3 {
        return;
    }
    let off_at = |j: usize| if j < off.len() { off[j].abs() } else { 0.0 };
    let start = (1..n).find(|&j| diag[j] - chi > 2.0 * (off_at(j - 1) + off_at(j)));
    let Some(start) = start else { return };
    if start >= n - 1 || v[start - 1] == 0.0 {
        return;
    }
    // ratio[j] = v[j] / v[j-1]
    let mut ratio = vec![0.0; n];
    ratio[n - 1] = -off[n - 2] / (diag[n - 1] - chi);
    for j in (start..n - 1).rev() {
        ratio[j] = -off[j - 1] / ((diag[j] - chi) + off[j] * ratio[j + 1]);
    }
    for j in start..n {
        v[j] = v[j - 1] * ratio[j];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Same as [`refine_tail`] for the leading entries, which decay toward `j = 0`
/// when `chi` lies well above the first diagonal entries.
fn refine_head(diag: &[f64], off: &[f64], chi: f64, v: &mut [f64]) {
    let n = diag.len();
    if n < 3 {
        return;
    }
    let off_at = |j: usize| if j < off.len() { off[j].abs() } else { 0.0 };
    let below = |j: usize| {
        let left = if j > 0 { off_at(j - 1) } else { 0.0 };
        chi - diag[j] > 2.0 * (left + off_at(j))
    };
    if !below(0) {
        return;
    }
    let mut end = 0;
    while end + 1 < n - 1 && below(end + 1) {
        end += 1;
    }
    if v[end + 1] == 0.0 {
        return;
    }
    // ratio[j] = v[j] / v[j+1]
    let mut ratio = vec![0.0; end + 1];
    ratio[0] = -off[0] / (diag[0] - chi);
    for j in 1..=end {
        ratio[j] = -off[j] / ((diag[j] - chi) + off[j - 1] * ratio[j - 1]);
    }
    for j in (0..=end).rev() {
        v[j] = v[j + 1] * ratio[j];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Real amplitude `alpha_{m,n} / i^m` of the prolate eigenvalue.
///
/// `pi^{3/2} c^m / (2^{m - 1/2} sqrt(Gamma(m + 3/2) Gamma(m + 5/2))) * beta_0 / phi(-1)`,
/// with `phi(-1) = sum_j beta_j P_j^{(m)}(-1)`. The prefactor is formed in log
/// space, so large `m` neither overflows nor loses the `c^m` decay.
pub fn prolate_amplitude(m: usize, n: usize, beta: &[f64], c: f64) -> Result<f64> {
    let mut at_minus_one = vec![0.0; beta.len()];
    jacobi_normalized_all(m, -1.0, &mut at_minus_one);
    let phi = compensated_sum(beta.iter().zip(&at_minus_one).map(|(b, p)| b * p));
    if !(phi.abs() >= 1e-300) {
        return Err(Error::DegenerateMode { m, n, value: phi });
    }
    if m > 0 && c == 0.0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    let c_term = if m == 0 { 0.0 } else { mf * c.ln() };
    let ln_pref = 1.5 * PI.ln() + c_term
        - (mf - 0.5) * std::f64::consts::LN_2
        - 0.5 * (ln_gamma_half_integer(m) + ln_gamma_half_integer(m + 1));
    Ok(ln_pref.exp() * beta[0] / phi)
}

/// `i^m`.
pub fn i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Prolate eigenvalue `alpha_{m,n}(c)` as a complex number (phase `i^m`).
pub fn prolate_eigenvalue(m: usize, n: usize, beta: &[f64], c: f64) -> Result<Complex64> {
    Ok(i_pow(m) * prolate_amplitude(m, n, beta, c)?)
}

/// The `l`-independent part of a mode: `(m, n)`, `chi`, `alpha` and the radial series.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub m: usize,
    pub n: usize,
    pub chi: f64,
    /// `alpha / i^m`; real by construction.
    pub alpha_amplitude: f64,
    pub beta: Vec<f64>,
    effective_len: usize,
}

impl RadialProfile {
    pub fn new(m: usize, n: usize, chi: f64, alpha_amplitude: f64, beta: Vec<f64>) -> Self {
        let effective_len = beta
            .iter()
            .rposition(|b| b.abs() >= NEGLIGIBLE_COEFFICIENT)
            .map_or(0, |p| p + 1);
        Self { m, n, chi, alpha_amplitude, beta, effective_len }
    }

    /// Computes family `m`, index `n` from scratch.
    pub fn compute(m: usize, n: usize, c: f64, k: usize) -> Result<Self> {
        let modes = solve_modes(m, c, k)?;
        let mode = modes
            .into_iter()
            .nth(n)
            .ok_or_else(|| Error::Index(format!("n = {n} exceeds truncation K = {k}")))?;
        let amp = prolate_amplitude(m, n, &mode.beta, c)?;
        Ok(Self::new(m, n, mode.chi, amp, mode.beta))
    }

    pub fn alpha(&self) -> Complex64 {
        i_pow(self.m) * self.alpha_amplitude
    }

    pub fn alpha_abs(&self) -> f64 {
        self.alpha_amplitude.abs()
    }

    /// Number of coefficients that take part in evaluation.
    pub fn effective_len(&self) -> usize {
        self.effective_len
    }

    /// Radial factor `r^m sum_j beta_j P_j^{(m)}(2 r^2 - 1)`.
    pub fn eval(&self, r: f64) -> f64 {
        let mut buf = vec![0.0; self.effective_len];
        jacobi_normalized_all(self.m, 2.0 * r * r - 1.0, &mut buf);
        self.eval_with(r, &buf)
    }

    /// Like [`Self::eval`] with Jacobi values `P_j^{(m)}(2r^2 - 1)` supplied.
    #[inline]
    pub fn eval_with(&self, r: f64, jacobi: &[f64]) -> f64 {
        if self.m > 0 && r == 0.0 {
            return 0.0;
        }
        let sum: f64 = self.beta[..self.effective_len]
            .iter()
            .zip(jacobi)
            .map(|(b, p)| b * p)
            .sum();
        r.powi(self.m as i32) * sum
    }
}

/// One basis function `psi_{m,n,l}`; shares its profile with the other `2m + 1` orders.
#[derive(Clone, Debug)]
pub struct PswfMode {
    pub ell: i64,
    pub profile: std::sync::Arc<RadialProfile>,
}

impl PswfMode {
    pub fn m(&self) -> usize {
        self.profile.m
    }

    pub fn n(&self) -> usize {
        self.profile.n
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    pub fn chi(&self) -> f64 {
        self.profile.chi
    }

    pub fn beta(&self) -> &[f64] {
        &self.profile.beta
    }

    pub fn alpha(&self) -> Complex64 {
        self.profile.alpha()
    }

    pub fn alpha_abs(&self) -> f64 {
        self.profile.alpha_abs()
    }

    pub fn key(&self) -> (usize, usize, i64) {
        (self.m(), self.n(), self.ell)
    }

    pub fn harmonic(&self) -> HarmonicIndex {
        HarmonicIndex::new(self.m(), self.ell).expect("mode order within degree")
    }
}

/// Value of `psi_{m,n,l}(x)` inside the closed unit ball.
pub fn eval_pswf(mode: &PswfMode, x: [f64; 3]) -> Result<f64> {
    let sp = SphericalPoint::from_cartesian(x);
    if sp.r > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "|x| = {} outside the unit ball; use the extension to R^3",
            sp.r
        )));
    }
    let radial = mode.profile.eval(sp.r.min(1.0));
    Ok(radial * spherical_harmonic(mode.harmonic(), sp.theta, sp.phi))
}
