//! Run parameters shared by the command-line verbs.

use std::path::PathBuf;

use crate::borndata::Aabb;
use crate::error::{Error, Result};
use crate::pswf::{Truncation, DEFAULT_TRUNCATION};
use crate::reconstruct::{CutoffPolicy, VolumeSpec};

/// The wave number `k` or the bandwidth `c = 2k`; exactly one is supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Wave {
    K(f64),
    C(f64),
}

impl Wave {
    /// Builds from optional `k` and `c`, requiring exactly one positive value.
    pub fn from_options(k: Option<f64>, c: Option<f64>) -> Result<Self> {
        match (k, c) {
            (Some(k), None) if k > 0.0 && k.is_finite() => Ok(Wave::K(k)),
            (None, Some(c)) if c > 0.0 && c.is_finite() => Ok(Wave::C(c)),
            (Some(_), Some(_)) => Err(Error::Validation("give either k or c, not both".into())),
            (None, None) => Err(Error::Validation("one of k or c is required".into())),
            (Some(v), None) | (None, Some(v)) => Err(Error::Validation(format!("k and c must be positive, got {v}"))),
        }
    }

    pub fn k(&self) -> f64 {
        match *self {
            Wave::K(k) => k,
            Wave::C(c) => c / 2.0,
        }
    }

    pub fn c(&self) -> f64 {
        match *self {
            Wave::K(k) => 2.0 * k,
            Wave::C(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub wave: Wave,
    pub truncation: Truncation,
    /// Radial, polar and azimuthal node counts of the ball grid.
    pub grid: (usize, usize, usize),
    pub cutoff: CutoffPolicy,
    pub eta: f64,
    pub s: f64,
    pub delta: f64,
    pub seed: u64,
    pub resolution: [usize; 3],
    pub extent: Aabb,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults matching the reference experiments at the given wave.
    pub fn new(wave: Wave) -> Self {
        Self {
            wave,
            truncation: Truncation::Fixed(DEFAULT_TRUNCATION),
            grid: (23, 31, 61),
            cutoff: CutoffPolicy::Auto { delta: 0.0, outside_support: false },
            eta: 1e-4,
            s: 0.5,
            delta: 0.0,
            seed: 0,
            resolution: [64; 3],
            extent: Aabb { lower: [-1.0; 3], upper: [1.0; 3] },
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Wave::from_options(Some(self.wave.k()), None)?;
        let (t, mt, mp) = self.grid;
        if t == 0 || mt == 0 || mp == 0 {
            return Err(Error::Validation(format!("grid counts must be at least 1, got ({t}, {mt}, {mp})")));
        }
        let order = match self.truncation {
            Truncation::Fixed(k) => k,
            Truncation::PerDegree(total) => total,
        };
        if order == 0 {
            return Err(Error::Validation("truncation order must be at least 1".into()));
        }
        if self.resolution.contains(&0) {
            return Err(Error::Validation("volume resolution must be at least 1".into()));
        }
        if !(self.eta >= 0.0) || !(self.s >= 0.0) || !(self.delta >= 0.0) {
            return Err(Error::Validation("eta, s and delta must be non-negative".into()));
        }
        if let CutoffPolicy::Explicit(sigma) = self.cutoff {
            if !(sigma >= 0.0) {
                return Err(Error::Validation(format!("cutoff must be non-negative, got {sigma}")));
            }
        }
        Aabb::new(self.extent.lower, self.extent.upper)?;
        Ok(())
    }

    pub fn volume_spec(&self) -> VolumeSpec {
        VolumeSpec { dims: self.resolution, extent: self.extent }
    }
}
