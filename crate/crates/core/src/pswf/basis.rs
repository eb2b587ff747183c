use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{i_pow, prolate_amplitude, solve_modes, PswfMode, RadialProfile, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::quadrature::BallQuadGrid;
use crate::specfun::{jacobi_normalized_all, real_harmonics_at, harmonic_count, harmonic_offset};

/// How many expansion terms each family uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// The same `K` for every degree.
    Fixed(usize),
    /// `K_m = ceil((M - m) / 2)`, at least 1, for total polynomial degree `M`.
    PerDegree(usize),
}

impl Truncation {
    pub fn order_for(&self, m: usize) -> usize {
        match *self {
            Truncation::Fixed(k) => k,
            Truncation::PerDegree(total) => (total.saturating_sub(m)).div_ceil(2).max(1),
        }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Fixed(DEFAULT_TRUNCATION)
    }
}

/// Options for [`build_basis`].
#[derive(Clone, Debug)]
pub struct BasisOptions {
    pub truncation: Truncation,
    /// Retain modes with `|alpha| > sigma`.
    pub sigma: f64,
    /// Largest degree swept; defaults to `2 ceil(c) + 40`.
    pub max_m: Option<usize>,
    pub parallel: bool,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self { truncation: Truncation::default(), sigma: 0.0, max_m: None, parallel: true }
    }
}

/// A retained set of PSWF modes for one bandwidth.
///
/// Modes are ordered by decreasing `|alpha|`, ties by `(m, n, l)`.
#[derive(Clone, Debug)]
pub struct PswfBasis {
    c: f64,
    truncation: Truncation,
    sigma: f64,
    modes: Vec<PswfMode>,
    lookup: HashMap<(usize, usize, i64), usize>,
}

impl PswfBasis {
    /// Assembles a basis from precomputed profiles, expanding each over `l`.
    pub fn from_profiles(
        c: f64,
        truncation: Truncation,
        sigma: f64,
        profiles: Vec<RadialProfile>,
    ) -> Result<Self> {
        let mut modes = Vec::new();
        for p in profiles {
            let p = Arc::new(p);
            let m = p.m as i64;
            for ell in -m..=m {
                modes.push(PswfMode { ell, profile: Arc::clone(&p) });
            }
        }
        if modes.is_empty() {
            return Err(Error::EmptyBasis(format!("no mode with |alpha| > {sigma:e}")));
        }
        modes.sort_by(|a, b| {
            b.alpha_abs().total_cmp(&a.alpha_abs()).then_with(|| a.key().cmp(&b.key()))
        });
        let lookup = modes.iter().enumerate().map(|(i, md)| (md.key(), i)).collect();
        Ok(Self { c, truncation, sigma, modes, lookup })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn modes(&self) -> &[PswfMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn max_m(&self) -> usize {
        self.modes.iter().map(PswfMode::m).max().unwrap_or(0)
    }

    /// Position of mode `(m, n, l)`, if retained.
    pub fn position(&self, m: usize, n: usize, ell: i64) -> Option<usize> {
        self.lookup.get(&(m, n, ell)).copied()
    }

    /// Largest retained `|alpha|` (that of `alpha_{0,0}`).
    pub fn alpha_max(&self) -> f64 {
        self.modes[0].alpha_abs()
    }

    /// The distinct radial profiles, one per retained `(m, n)`.
    pub fn profiles(&self) -> Vec<Arc<RadialProfile>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for md in &self.modes {
            if seen.insert((md.m(), md.n())) {
                out.push(Arc::clone(&md.profile));
            }
        }
        out
    }

    /// Sub-basis of the modes with `|alpha| > sigma`.
    pub fn restrict(&self, sigma: f64) -> Result<Self> {
        let profiles: Vec<RadialProfile> = self
            .profiles()
            .into_iter()
            .filter(|p| p.alpha_abs() > sigma)
            .map(|p| (*p).clone())
            .collect();
        Self::from_profiles(self.c, self.truncation, sigma.max(self.sigma), profiles)
    }
}

fn family(m: usize, c: f64, truncation: Truncation) -> Result<Vec<RadialProfile>> {
    let k = truncation.order_for(m);
    solve_modes(m, c, k)?
        .into_iter()
        .enumerate()
        .map(|(n, mode)| {
            let amp = prolate_amplitude(m, n, &mode.beta, c)?;
            Ok(RadialProfile::new(m, n, mode.chi, amp, mode.beta))
        })
        .collect()
}

/// Builds the basis `{(m, n, l) : |alpha_{m,n}| > sigma}` with fixed truncation `K`.
pub fn build_basis(c: f64, k: usize, sigma: f64) -> Result<PswfBasis> {
    build_basis_with(c, &BasisOptions { truncation: Truncation::Fixed(k), sigma, ..Default::default() })
}

/// Builds a basis with explicit options.
///
/// Degrees are swept upward and the sweep stops after the first family whose
/// largest `|alpha|` does not exceed `sigma`, or at the degree cap.
pub fn build_basis_with(c: f64, opts: &BasisOptions) -> Result<PswfBasis> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Argument(format!("bandwidth must be positive, got {c}")));
    }
    if !(opts.sigma >= 0.0) {
        return Err(Error::Argument(format!("sigma must be nonnegative, got {}", opts.sigma)));
    }
    let cap = opts.max_m.unwrap_or(2 * c.ceil() as usize + 40);
    let batch = if opts.parallel { rayon::current_num_threads().max(1) } else { 1 };
    let mut kept = Vec::new();
    let mut m0 = 0;
    'sweep: while m0 <= cap {
        let hi = (m0 + batch).min(cap + 1);
        let families: Vec<Result<Vec<RadialProfile>>> = if opts.parallel && hi - m0 > 1 {
            (m0..hi).into_par_iter().map(|m| family(m, c, opts.truncation)).collect()
        } else {
            (m0..hi).map(|m| family(m, c, opts.truncation)).collect()
        };
        for fam in families {
            let fam = fam?;
            let largest = fam.iter().map(RadialProfile::alpha_abs).fold(0.0, f64::max);
            if m0 == 0 && kept.is_empty() && opts.sigma >= largest {
                return Err(Error::EmptyBasis(format!(
                    "sigma = {:e} is not below |alpha_00| = {largest:e}",
                    opts.sigma
                )));
            }
            kept.extend(fam.into_iter().filter(|p| p.alpha_abs() > opts.sigma));
            if largest <= opts.sigma {
                break 'sweep;
            }
        }
        m0 = hi;
    }
    PswfBasis::from_profiles(c, opts.truncation, opts.sigma, kept)
}

/// A mode continued to all of R^3 through the restricted Fourier integral,
/// with its weighted node values precomputed on a ball grid.
#[derive(Clone, Debug)]
pub struct ExtendedMode {
    c: f64,
    inv_alpha: Complex64,
    nodes: Vec<[f64; 3]>,
    weighted: Vec<f64>,
}

impl ExtendedMode {
    pub fn new(mode: &PswfMode, c: f64, grid: &BallQuadGrid) -> Self {
        let profile = &mode.profile;
        let h = mode.harmonic();
        let mut jac = vec![0.0; profile.effective_len()];
        let mut ylm = vec![0.0; harmonic_count(profile.m)];
        let offset = harmonic_offset(h.m(), h.ell());
        let weighted = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&y, &w)| {
                let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                jacobi_normalized_all(profile.m, 2.0 * r * r - 1.0, &mut jac);
                real_harmonics_at(profile.m, y, &mut ylm);
                w * profile.eval_with(r, &jac) * ylm[offset]
            })
            .collect();
        Self { c, inv_alpha: 1.0 / (i_pow(profile.m) * profile.alpha_amplitude), nodes: grid.nodes().to_vec(), weighted }
    }

    /// `(1/alpha) int_B e^{i c x.y} psi(y) dy` by quadrature.
    pub fn eval(&self, x: [f64; 3]) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (y, w) in self.nodes.iter().zip(&self.weighted) {
            let (s, co) = (self.c * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2])).sin_cos();
            re += w * co;
            im += w * s;
        }
        self.inv_alpha * Complex64::new(re, im)
    }
}

/// Value of the continued mode at any `x`; see [`ExtendedMode`] for repeated use.
pub fn eval_pswf_r3(mode: &PswfMode, basis: &PswfBasis, x: [f64; 3], grid: &BallQuadGrid) -> Complex64 {
    ExtendedMode::new(mode, basis.c(), grid).eval(x)
}
