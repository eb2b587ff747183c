//! Born processed data `u_b(p; c) = int q(y) e^{i c p.y} dy` for the test
//! contrasts, a voxel quadrature of the same integral, noise and far-field
//! synthesis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::DirectionSet;

/// Below this argument the sinc-type factors switch to their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;
/// Ball transform switches to its Taylor series below this `a c |p|`.
const BALL_SERIES_THRESHOLD: f64 = 1e-2;
/// Sub-samples per axis used to estimate the fill of a voxel cut by a sphere.
const BALL_SUPERSAMPLE: usize = 8;

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl Aabb {
    pub fn new(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        for j in 0..3 {
            if !(lower[j] < upper[j]) {
                return Err(Error::Argument(format!(
                    "box bounds must satisfy lower < upper on every axis, axis {j}: {} vs {}",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|j| self.upper[j] - self.lower[j]).product()
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        (0..3).all(|j| self.lower[j] <= x[j] && x[j] <= self.upper[j])
    }

    /// Fraction of `[lo, hi]` (per axis) overlapping the box, multiplied over axes.
    fn overlap_fraction(&self, lo: [f64; 3], hi: [f64; 3]) -> f64 {
        (0..3)
            .map(|j| {
                let w = (hi[j].min(self.upper[j]) - lo[j].max(self.lower[j])).max(0.0);
                w / (hi[j] - lo[j])
            })
            .product()
    }
}

/// The three boxes of the three-cubes contrast.
pub const THREE_CUBES: [Aabb; 3] = [
    Aabb { lower: [-0.3, -0.5, 0.1], upper: [0.3, -0.025, 0.5] },
    Aabb { lower: [-0.3, 0.025, 0.1], upper: [0.3, 0.5, 0.5] },
    Aabb { lower: [-0.3, -0.235, -0.5], upper: [0.3, 0.235, 0.025] },
];

/// Piecewise-constant contrast on a regular cell-centred grid, `x` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub bounds: Aabb,
    pub values: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(dims: [usize; 3], bounds: Aabb, values: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Argument("voxel grid needs at least one cell per axis".into()));
        }
        if values.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::Argument(format!(
                "voxel grid {:?} needs {} values, got {}",
                dims,
                dims[0] * dims[1] * dims[2],
                values.len()
            )));
        }
        Ok(Self { dims, bounds, values })
    }

    /// Fills each cell with `f` at its centre.
    pub fn from_fn(dims: [usize; 3], bounds: Aabb, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let mut g = Self::new(dims, bounds, vec![0.0; dims[0] * dims[1] * dims[2]])?;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let x = g.center(i, j, k);
                    let idx = g.index(i, j, k);
                    g.values[idx] = f(x);
                }
            }
        }
        Ok(g)
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| (self.bounds.upper[j] - self.bounds.lower[j]) / self.dims[j] as f64)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        let idx = [i, j, k];
        [0, 1, 2].map(|a| self.bounds.lower[a] + (idx[a] as f64 + 0.5) * h[a])
    }

    fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// `int q`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `int |q|`.
    pub fn abs_integral(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    /// Value of the cell containing `x`, 0 outside the grid.
    pub fn value_at(&self, x: [f64; 3]) -> f64 {
        if !self.bounds.contains(x) {
            return 0.0;
        }
        let h = self.spacing();
        let idx = [0, 1, 2].map(|a| {
            (((x[a] - self.bounds.lower[a]) / h[a]) as usize).min(self.dims[a] - 1)
        });
        self.values[self.index(idx[0], idx[1], idx[2])]
    }

    /// Exact Fourier integral `int q(y) e^{i c p.y} dy` of the piecewise-constant field.
    pub fn transform(&self, p: [f64; 3], c: f64) -> Complex64 {
        let h = self.spacing();
        let factors: Vec<Vec<Complex64>> = (0..3)
            .map(|a| {
                let w = c * p[a];
                let cell = h[a] * sinc(0.5 * w * h[a]);
                (0..self.dims[a])
                    .map(|i| {
                        let x = self.bounds.lower[a] + (i as f64 + 0.5) * h[a];
                        Complex64::from_polar(cell, w * x)
                    })
                    .collect()
            })
            .collect();
        let [nx, ny, nz] = self.dims;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..nz {
            let mut plane = Complex64::new(0.0, 0.0);
            for j in 0..ny {
                let row = &self.values[(k * ny + j) * nx..(k * ny + j + 1) * nx];
                let mut re = 0.0;
                let mut im = 0.0;
                for (v, e) in row.iter().zip(&factors[0]) {
                    re += v * e.re;
                    im += v * e.im;
                }
                plane += Complex64::new(re, im) * factors[1][j];
            }
            total += plane * factors[2][k];
        }
        total
    }
}

/// Shape of a contrast.
#[derive(Clone, Debug, PartialEq)]
pub enum ContrastKind {
    /// Indicator of the ball of radius `a` about the origin.
    Ball { a: f64 },
    /// Indicator of an axis-aligned box.
    Cube(Aabb),
    /// Indicator of the union of [`THREE_CUBES`].
    ThreeCubes,
    /// `sin(m pi x_1)` on the cube `|x_j| < 1/2`.
    Oscillatory { m: i32 },
    /// Piecewise-constant values on a grid.
    Voxels(VoxelGrid),
}

/// A contrast `q = amplitude * shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastSpec {
    pub kind: ContrastKind,
    pub amplitude: f64,
}

impl ContrastSpec {
    pub fn new(kind: ContrastKind) -> Self {
        Self { kind, amplitude: 1.0 }
    }

    pub fn ball(a: f64) -> Self {
        Self::new(ContrastKind::Ball { a })
    }

    pub fn cube(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        Ok(Self::new(ContrastKind::Cube(Aabb::new(lower, upper)?)))
    }

    pub fn three_cubes() -> Self {
        Self::new(ContrastKind::ThreeCubes)
    }

    pub fn oscillatory(m: i32) -> Self {
        Self::new(ContrastKind::Oscillatory { m })
    }

    pub fn voxels(grid: VoxelGrid) -> Self {
        Self::new(ContrastKind::Voxels(grid))
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Smallest box containing the support.
    pub fn support(&self) -> Aabb {
        match &self.kind {
            ContrastKind::Ball { a } => Aabb { lower: [-a; 3], upper: [*a; 3] },
            ContrastKind::Cube(b) => *b,
            ContrastKind::ThreeCubes => {
                let mut lower = [f64::INFINITY; 3];
                let mut upper = [f64::NEG_INFINITY; 3];
                for b in &THREE_CUBES {
                    for j in 0..3 {
                        lower[j] = lower[j].min(b.lower[j]);
                        upper[j] = upper[j].max(b.upper[j]);
                    }
                }
                Aabb { lower, upper }
            }
            ContrastKind::Oscillatory { .. } => Aabb { lower: [-0.5; 3], upper: [0.5; 3] },
            ContrastKind::Voxels(g) => g.bounds,
        }
    }

    /// Pointwise value `q(x)`.
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let shape = match &self.kind {
            ContrastKind::Ball { a } => {
                if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < a * a {
                    1.0
                } else {
                    0.0
                }
            }
            ContrastKind::Cube(b) => f64::from(u8::from(b.contains(x))),
            ContrastKind::ThreeCubes => f64::from(u8::from(THREE_CUBES.iter().any(|b| b.contains(x)))),
            ContrastKind::Oscillatory { m } => {
                if x.iter().all(|v| v.abs() < 0.5) {
                    (*m as f64 * PI * x[0]).sin()
                } else {
                    0.0
                }
            }
            ContrastKind::Voxels(g) => g.value_at(x),
        };
        self.amplitude * shape
    }

    /// Closed-form `u_b(p; c)` where available, otherwise the exact transform of the voxels.
    pub fn born(&self, p: [f64; 3], c: f64) -> Complex64 {
        let v = match &self.kind {
            ContrastKind::Ball { a } => born_ball(p, c, *a),
            ContrastKind::Cube(b) => born_cube(p, c, b.lower, b.upper),
            ContrastKind::ThreeCubes => born_three_cubes(p, c),
            ContrastKind::Oscillatory { m } => born_oscillatory(p, c, *m),
            ContrastKind::Voxels(g) => g.transform(p, c),
        };
        self.amplitude * v
    }

    /// Cell averages of `q` over `resolution^3` cells covering [`Self::support`].
    ///
    /// Cells crossed by a discontinuity get their exact (boxes) or sub-sampled
    /// (ball) fill fraction. A voxel contrast is returned as is.
    pub fn voxelize(&self, resolution: usize) -> Result<VoxelGrid> {
        if resolution == 0 {
            return Err(Error::Argument("resolution must be at least 1".into()));
        }
        if let ContrastKind::Voxels(g) = &self.kind {
            let mut g = g.clone();
            g.values.iter_mut().for_each(|v| *v *= self.amplitude);
            return Ok(g);
        }
        let bounds = self.support();
        let dims = [resolution; 3];
        let mut grid = VoxelGrid::new(dims, bounds, vec![0.0; resolution.pow(3)])?;
        let h = grid.spacing();
        let values: Vec<f64> = (0..resolution.pow(3))
            .into_par_iter()
            .map(|idx| {
                let i = idx % resolution;
                let j = (idx / resolution) % resolution;
                let k = idx / (resolution * resolution);
                let ctr = grid.center(i, j, k);
                let lo = [0, 1, 2].map(|a| ctr[a] - 0.5 * h[a]);
                let hi = [0, 1, 2].map(|a| ctr[a] + 0.5 * h[a]);
                self.amplitude * self.cell_average(lo, hi)
            })
            .collect();
        grid.values = values;
        Ok(grid)
    }

    fn cell_average(&self, lo: [f64; 3], hi: [f64; 3]) -> f64 {
        match &self.kind {
            ContrastKind::Ball { a } => {
                let mut near = 0.0;
                let mut far = 0.0;
                for j in 0..3 {
                    let d = if lo[j] > 0.0 {
                        lo[j]
                    } else if hi[j] < 0.0 {
                        -hi[j]
                    } else {
                        0.0
                    };
                    near += d * d;
                    let f = lo[j].abs().max(hi[j].abs());
                    far += f * f;
                }
                if far <= a * a {
                    1.0
                } else if near >= a * a {
                    0.0
                } else {
                    let s = BALL_SUPERSAMPLE;
                    let mut inside = 0usize;
                    for kk in 0..s {
                        for jj in 0..s {
                            for ii in 0..s {
                                let t = [ii, jj, kk];
                                let x = [0, 1, 2].map(|a| {
                                    lo[a] + (t[a] as f64 + 0.5) / s as f64 * (hi[a] - lo[a])
                                });
                                if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < a * a {
                                    inside += 1;
                                }
                            }
                        }
                    }
                    inside as f64 / (s * s * s) as f64
                }
            }
            ContrastKind::Cube(b) => b.overlap_fraction(lo, hi),
            ContrastKind::ThreeCubes => THREE_CUBES.iter().map(|b| b.overlap_fraction(lo, hi)).sum(),
            ContrastKind::Oscillatory { m } => {
                let a1 = lo[0].max(-0.5);
                let b1 = hi[0].min(0.5);
                if b1 <= a1 {
                    return 0.0;
                }
                let yz: f64 = (1..3)
                    .map(|j| (hi[j].min(0.5) - lo[j].max(-0.5)).max(0.0) / (hi[j] - lo[j]))
                    .product();
                let mean_sin = if *m == 0 {
                    0.0
                } else {
                    let w = *m as f64 * PI;
                    ((w * a1).cos() - (w * b1).cos()) / (w * (hi[0] - lo[0]))
                };
                yz * mean_sin
            }
            ContrastKind::Voxels(_) => unreachable!("voxel contrasts are not re-sampled"),
        }
    }
}

/// `sin(x) / x`.
#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `int_{|y| < a} e^{i c p.y} dy = (2 a pi / (c |p|))^{3/2} J_{3/2}(a c |p|)`.
pub fn born_ball(p: [f64; 3], c: f64, a: f64) -> Complex64 {
    let z = a * c * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    // (2 a pi / (c|p|))^{3/2} J_{3/2}(z) = 4 pi a^3 (sin z - z cos z) / z^3
    let shape = if z < BALL_SERIES_THRESHOLD {
        let z2 = z * z;
        (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0 * (1.0 - z2 / 54.0))) / 3.0
    } else {
        (z.sin() - z * z.cos()) / (z * z * z)
    };
    Complex64::new(4.0 * PI * a * a * a * shape, 0.0)
}

/// Bessel function `J_{3/2}(z) = sqrt(2 / (pi z)) (sin z / z - cos z)`.
pub fn bessel_j3_2(z: f64) -> f64 {
    if z.abs() < BALL_SERIES_THRESHOLD {
        let z2 = z * z;
        (2.0 / PI).sqrt() * z.abs().sqrt() * z / 3.0 * (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0))
    } else {
        (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos())
    }
}

/// `int_a^b e^{i w x} dx = (e^{i w b} - e^{i w a}) / (i w)`.
#[inline]
fn interval_transform(w: f64, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    Complex64::from_polar((b - a) * sinc(w * half), 0.5 * w * (a + b))
}

/// Transform of the indicator of `prod_j [lower_j, upper_j]`.
pub fn born_cube(p: [f64; 3], c: f64, lower: [f64; 3], upper: [f64; 3]) -> Complex64 {
    (0..3).map(|j| interval_transform(c * p[j], lower[j], upper[j])).product()
}

/// Transform of the three-cubes indicator.
pub fn born_three_cubes(p: [f64; 3], c: f64) -> Complex64 {
    THREE_CUBES.iter().map(|b| born_cube(p, c, b.lower, b.upper)).sum()
}

/// Transform of `sin(m pi x_1)` on `|x_j| < 1/2`:
/// `-4i [S(c p_1 + m pi) - S(c p_1 - m pi)] S(c p_2) S(c p_3)`, `S(t) = sin(t/2) / t`.
pub fn born_oscillatory(p: [f64; 3], c: f64, m: i32) -> Complex64 {
    let s = |t: f64| 0.5 * sinc(0.5 * t);
    let mp = m as f64 * PI;
    let w = c * p[0];
    let bracket = s(w + mp) - s(w - mp);
    Complex64::new(0.0, -4.0 * bracket * s(c * p[1]) * s(c * p[2]))
}

/// Voxel-quadrature transform of any contrast, at `resolution^3` cells over its support.
///
/// Use [`VoxelGrid::transform`] on a [`ContrastSpec::voxelize`] result when
/// evaluating at many points.
pub fn born_general(spec: &ContrastSpec, p: [f64; 3], c: f64, resolution: usize) -> Result<Complex64> {
    Ok(spec.voxelize(resolution)?.transform(p, c))
}

/// Multiplies each sample by `1 + delta xi`, `xi` uniform on `[-1, 1]`, one draw per sample.
pub fn add_noise(samples: &mut [Complex64], delta: f64, seed: u64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Argument(format!("noise level must lie in [0, 1), got {delta}")));
    }
    if delta == 0.0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = Uniform::new_inclusive(-1.0, 1.0);
    for s in samples.iter_mut() {
        *s *= 1.0 + delta * xi.sample(&mut rng);
    }
    Ok(())
}

/// One multi-static measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarFieldRecord {
    pub incident: [f64; 3],
    pub observation: [f64; 3],
    pub value: Complex64,
}

/// Noise on far-field values; see [`add_noise`].
pub fn add_noise_records(records: &mut [FarFieldRecord], delta: f64, seed: u64) -> Result<()> {
    let mut values: Vec<Complex64> = records.iter().map(|r| r.value).collect();
    add_noise(&mut values, delta, seed)?;
    for (r, v) in records.iter_mut().zip(values) {
        r.value = v;
    }
    Ok(())
}

/// `u^inf(x_j; theta_l) = k^2 / (4 pi) u_b((theta_l - x_j) / 2; 2k)`, incident
/// direction in the outer loop.
pub fn farfield_from_born<F>(
    born: F,
    k: f64,
    incident: &DirectionSet,
    observation: &DirectionSet,
) -> Result<Vec<FarFieldRecord>>
where
    F: Fn([f64; 3], f64) -> Complex64 + Sync,
{
    if !(k > 0.0) {
        return Err(Error::Argument(format!("wave number must be positive, got {k}")));
    }
    let scale = k * k / (4.0 * PI);
    let n_obs = observation.len();
    Ok((0..incident.len() * n_obs)
        .into_par_iter()
        .map(|idx| {
            let th = incident.directions[idx / n_obs];
            let xh = observation.directions[idx % n_obs];
            let p = [0, 1, 2].map(|a| 0.5 * (th[a] - xh[a]));
            FarFieldRecord { incident: th, observation: xh, value: scale * born(p, 2.0 * k) }
        })
        .collect())
}
