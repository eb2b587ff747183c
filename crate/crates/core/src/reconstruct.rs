//! Projection of processed data onto a PSWF basis and the spectral inversions.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::borndata::Aabb;
use crate::error::{Error, Result};
use crate::pipeline::ProcessedData;
use crate::pswf::{PswfBasis, PswfMode, RadialProfile};
use crate::quadrature::BallQuadGrid;
use crate::specfun::{harmonic_count, harmonic_offset, jacobi_normalized_all, real_harmonics, real_harmonics_at};

/// What a coefficient field represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// `u_{m,n,l} = <u_b, psi_{m,n,l}>`.
    DataProjection,
    /// Coefficients of a contrast.
    Reconstruction,
}

/// Complex coefficients over a subset of a basis' modes.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    basis: Arc<PswfBasis>,
    indices: Vec<usize>,
    coeffs: Vec<Complex64>,
    kind: FieldKind,
}

impl CoefficientField {
    /// Field over the basis modes at `indices` (ascending, distinct).
    pub fn new(basis: Arc<PswfBasis>, indices: Vec<usize>, coeffs: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        if indices.len() != coeffs.len() {
            return Err(Error::Argument(format!(
                "{} mode indices but {} coefficients",
                indices.len(),
                coeffs.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.last().is_some_and(|&i| i >= basis.len()) {
            return Err(Error::Argument("mode indices must be ascending and within the basis".into()));
        }
        Ok(Self { basis, indices, coeffs, kind })
    }

    /// Field over every mode of the basis.
    pub fn full(basis: Arc<PswfBasis>, coeffs: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        let indices = (0..basis.len()).collect();
        Self::new(basis, indices, coeffs, kind)
    }

    pub fn zeros(basis: Arc<PswfBasis>, kind: FieldKind) -> Self {
        let n = basis.len();
        Self { basis, indices: (0..n).collect(), coeffs: vec![Complex64::new(0.0, 0.0); n], kind }
    }

    pub fn basis(&self) -> &Arc<PswfBasis> {
        &self.basis
    }

    /// Positions in the basis of the modes carried by this field.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Modes paired with their coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (&PswfMode, Complex64)> + '_ {
        self.indices.iter().zip(&self.coeffs).map(|(&i, &q)| (&self.basis.modes()[i], q))
    }

    /// Coefficient of mode `(m, n, l)`, if carried.
    pub fn get(&self, m: usize, n: usize, ell: i64) -> Option<Complex64> {
        let pos = self.basis.position(m, n, ell)?;
        self.indices.binary_search(&pos).ok().map(|i| self.coeffs[i])
    }

    /// `l^2` norm of the coefficients, equal to the `L^2(B)` norm of the function.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - other||` over the union of both index sets (missing coefficients are 0).
    pub fn l2_distance(&self, other: &CoefficientField) -> Result<f64> {
        self.check_same_basis(other)?;
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.len() || j < other.len() {
            let a = self.indices.get(i).copied().unwrap_or(usize::MAX);
            let b = other.indices.get(j).copied().unwrap_or(usize::MAX);
            if a == b {
                acc += (self.coeffs[i] - other.coeffs[j]).norm_sqr();
                i += 1;
                j += 1;
            } else if a < b {
                acc += self.coeffs[i].norm_sqr();
                i += 1;
            } else {
                acc += other.coeffs[j].norm_sqr();
                j += 1;
            }
        }
        Ok(acc.sqrt())
    }

    /// `a * self + other` on a shared index set.
    pub fn axpy(&self, a: Complex64, other: &CoefficientField) -> Result<CoefficientField> {
        self.check_same_basis(other)?;
        if self.indices != other.indices {
            return Err(Error::Argument("fields carry different mode sets".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + y).collect();
        Ok(Self { coeffs, ..self.clone() })
    }

    fn check_same_basis(&self, other: &CoefficientField) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::Argument("fields belong to different bases".into()))
        }
    }

    fn filtered(&self, keep: impl Fn(&PswfMode) -> bool, kind: FieldKind) -> Self {
        let mut indices = Vec::new();
        let mut coeffs = Vec::new();
        for (&i, &q) in self.indices.iter().zip(&self.coeffs) {
            if keep(&self.basis.modes()[i]) {
                indices.push(i);
                coeffs.push(q);
            }
        }
        Self { basis: Arc::clone(&self.basis), indices, coeffs, kind }
    }
}

/// Values of every basis mode at every node of a unit ball grid, stored in
/// separated form: radial profiles at the radial nodes and real harmonics at
/// the angular nodes. `psi(node) = R(r_i) Y(s, j)` exactly.
pub struct NodeTable {
    grid: Arc<BallQuadGrid>,
    c: f64,
    /// `radial[p * T + i]`.
    radial: Vec<f64>,
    n_profiles: usize,
    /// `angular[h * A + a]`, `a = s * M_phi + j`.
    angular: Vec<f64>,
    n_harmonics: usize,
    profile_of: Vec<usize>,
    harmonic_of: Vec<usize>,
}

impl NodeTable {
    pub fn new(basis: &PswfBasis, grid: Arc<BallQuadGrid>) -> Result<Self> {
        if (grid.radius() - 1.0).abs() > 1e-15 {
            return Err(Error::Argument("node tables need a grid on the unit ball".into()));
        }
        let (t, mt, mp) = grid.dims();
        let profiles = basis.profiles();
        let pos: std::collections::HashMap<(usize, usize), usize> =
            profiles.iter().enumerate().map(|(i, p)| ((p.m, p.n), i)).collect();
        let max_m = basis.max_m();
        let n_harmonics = harmonic_count(max_m);
        let radial: Vec<f64> = profiles
            .par_iter()
            .flat_map_iter(|p| (0..t).map(|i| p.eval(grid.radius_at(i))).collect::<Vec<_>>())
            .collect();
        let a_count = mt * mp;
        let mut by_node = vec![0.0; a_count * n_harmonics];
        by_node.par_chunks_mut(n_harmonics).enumerate().for_each(|(a, out)| {
            let (s, j) = (a / mp, a % mp);
            let ct = grid.theta_rule().nodes[s];
            let st = ((1.0 - ct) * (1.0 + ct)).sqrt();
            let (sp, cp) = (2.0 * std::f64::consts::PI * j as f64 / mp as f64).sin_cos();
            real_harmonics(max_m, ct, st, cp, sp, out);
        });
        let mut angular = vec![0.0; a_count * n_harmonics];
        for a in 0..a_count {
            for h in 0..n_harmonics {
                angular[h * a_count + a] = by_node[a * n_harmonics + h];
            }
        }
        let profile_of = basis.modes().iter().map(|md| pos[&(md.m(), md.n())]).collect();
        let harmonic_of = basis.modes().iter().map(|md| harmonic_offset(md.m(), md.ell())).collect();
        Ok(Self {
            grid,
            c: basis.c(),
            radial,
            n_profiles: profiles.len(),
            angular,
            n_harmonics,
            profile_of,
            harmonic_of,
        })
    }

    pub fn grid(&self) -> &Arc<BallQuadGrid> {
        &self.grid
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n_profiles(&self) -> usize {
        self.n_profiles
    }

    fn angular_count(&self) -> usize {
        self.grid.theta_count() * self.grid.phi_count()
    }

    /// `psi_mode(p_node)`.
    pub fn psi(&self, mode: usize, node: usize) -> f64 {
        let (i, s, j) = self.grid.triple(node);
        let a = s * self.grid.phi_count() + j;
        let t = self.grid.t_count();
        self.radial[self.profile_of[mode] * t + i] * self.angular[self.harmonic_of[mode] * self.angular_count() + a]
    }

    /// All node values of one mode.
    pub fn mode_values(&self, mode: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|n| self.psi(mode, n)).collect()
    }

    /// `sum_n w_n u_n psi_mode(p_n)` for every mode.
    pub fn project_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.grid.len() {
            return Err(Error::Validation(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                self.grid.len()
            )));
        }
        let t = self.grid.t_count();
        let ac = self.angular_count();
        let mp = self.grid.phi_count();
        let ang_w: Vec<f64> = (0..ac).map(|a| self.grid.angular_weight(a / mp)).collect();
        // transformed[h * T + i] = sum_a w_a Y_h(a) u(i, a)
        let mut transformed = vec![Complex64::new(0.0, 0.0); self.n_harmonics * t];
        transformed.par_chunks_mut(t).enumerate().for_each(|(h, out)| {
            let y = &self.angular[h * ac..(h + 1) * ac];
            for (i, o) in out.iter_mut().enumerate() {
                let u = &values[i * ac..(i + 1) * ac];
                let mut re = 0.0;
                let mut im = 0.0;
                for a in 0..ac {
                    let f = ang_w[a] * y[a];
                    re += f * u[a].re;
                    im += f * u[a].im;
                }
                *o = Complex64::new(re, im);
            }
        });
        let rad_w: Vec<f64> = (0..t).map(|i| self.grid.radial_weight(i)).collect();
        Ok(self
            .profile_of
            .iter()
            .zip(&self.harmonic_of)
            .map(|(&p, &h)| {
                let r = &self.radial[p * t..(p + 1) * t];
                let a = &transformed[h * t..(h + 1) * t];
                (0..t).map(|i| rad_w[i] * r[i] * a[i]).sum()
            })
            .collect())
    }

    /// Quadrature Gram matrix entry `sum_n w_n psi_a psi_b`.
    pub fn gram_entry(&self, a: usize, b: usize) -> f64 {
        let t = self.grid.t_count();
        let ac = self.angular_count();
        let mp = self.grid.phi_count();
        let (pa, pb) = (self.profile_of[a], self.profile_of[b]);
        let (ha, hb) = (self.harmonic_of[a], self.harmonic_of[b]);
        let rad: f64 = (0..t)
            .map(|i| self.grid.radial_weight(i) * self.radial[pa * t + i] * self.radial[pb * t + i])
            .sum();
        let ang: f64 = (0..ac)
            .map(|x| self.grid.angular_weight(x / mp) * self.angular[ha * ac + x] * self.angular[hb * ac + x])
            .sum();
        rad * ang
    }

    /// `(max |G_aa - 1|, max_{a != b} |G_ab|)` over the whole quadrature Gram matrix.
    pub fn gram_deviation(&self) -> (f64, f64) {
        let t = self.grid.t_count();
        let ac = self.angular_count();
        let mp = self.grid.phi_count();
        let np = self.n_profiles;
        let nh = self.n_harmonics;
        let mut rad = vec![0.0; np * np];
        for p in 0..np {
            for q in 0..np {
                rad[p * np + q] = (0..t)
                    .map(|i| self.grid.radial_weight(i) * self.radial[p * t + i] * self.radial[q * t + i])
                    .sum();
            }
        }
        let ang_w: Vec<f64> = (0..ac).map(|x| self.grid.angular_weight(x / mp)).collect();
        let mut ang = vec![0.0; nh * nh];
        ang.par_chunks_mut(nh).enumerate().for_each(|(h, row)| {
            let yh = &self.angular[h * ac..(h + 1) * ac];
            for (g, out) in row.iter_mut().enumerate() {
                let yg = &self.angular[g * ac..(g + 1) * ac];
                *out = (0..ac).map(|x| ang_w[x] * yh[x] * yg[x]).sum();
            }
        });
        let n = self.profile_of.len();
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut diag: f64 = 0.0;
                let mut off: f64 = 0.0;
                let (pa, ha) = (self.profile_of[a], self.harmonic_of[a]);
                for b in 0..n {
                    let g = rad[pa * np + self.profile_of[b]] * ang[ha * nh + self.harmonic_of[b]];
                    if a == b {
                        diag = diag.max((g - 1.0).abs());
                    } else {
                        off = off.max(g.abs());
                    }
                }
                (diag, off)
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)))
    }
}

fn check_bandwidth(expected: f64, found: f64) -> Result<()> {
    if (expected - found).abs() > 1e-12 * expected.abs().max(1.0) {
        return Err(Error::BandwidthMismatch { expected, found });
    }
    Ok(())
}

/// `u_{m,n,l} = sum_n w_n u_b(p_n) psi_{m,n,l}(p_n)` for every basis mode.
pub fn project(data: &ProcessedData, basis: Arc<PswfBasis>) -> Result<CoefficientField> {
    let table = NodeTable::new(&basis, Arc::clone(&data.grid))?;
    project_with(&table, data, basis)
}

/// As [`project`] with a prebuilt node table for the same basis and grid.
pub fn project_with(table: &NodeTable, data: &ProcessedData, basis: Arc<PswfBasis>) -> Result<CoefficientField> {
    check_bandwidth(basis.c(), data.c)?;
    check_bandwidth(basis.c(), table.c())?;
    if !Arc::ptr_eq(table.grid(), &data.grid) && table.grid().dims() != data.grid.dims() {
        return Err(Error::Argument("node table and data use different grids".into()));
    }
    let coeffs = table.project_values(&data.values)?;
    CoefficientField::full(basis, coeffs, FieldKind::DataProjection)
}

fn require_projection(field: &CoefficientField) -> Result<()> {
    if field.kind() != FieldKind::DataProjection {
        return Err(Error::Argument("expected a data projection".into()));
    }
    Ok(())
}

/// `q = u / alpha` on the modes of the projection.
pub fn lowrank_reconstruct(proj: &CoefficientField) -> Result<CoefficientField> {
    require_projection(proj)?;
    let coeffs = proj
        .iter()
        .map(|(md, u)| {
            assert!(md.alpha_abs() > 0.0, "retained mode with alpha = 0");
            u / md.alpha()
        })
        .collect();
    Ok(CoefficientField { coeffs, kind: FieldKind::Reconstruction, ..proj.clone() })
}

/// `chi^s`, computed as `exp(s ln chi)`.
#[inline]
fn chi_pow(chi: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (s * chi.ln()).exp()
    }
}

/// `q = conj(alpha) u / (|alpha|^2 + eta chi^s)` on every mode of the projection.
pub fn tikhonov_reconstruct(proj: &CoefficientField, eta: f64, s: f64) -> Result<CoefficientField> {
    require_projection(proj)?;
    if !(eta >= 0.0) {
        return Err(Error::Argument(format!("penalty weight must be nonnegative, got {eta}")));
    }
    if !(s >= 0.0) {
        return Err(Error::Argument(format!("smoothness order must be nonnegative, got {s}")));
    }
    let coeffs = proj
        .iter()
        .map(|(md, u)| {
            let a = md.alpha();
            a.conj() * u / (a.norm_sqr() + eta * chi_pow(md.chi(), s))
        })
        .collect();
    Ok(CoefficientField { coeffs, kind: FieldKind::Reconstruction, ..proj.clone() })
}

/// `q = u / alpha` restricted to `|alpha| > sigma_loc`.
pub fn localized_reconstruct(proj: &CoefficientField, sigma_loc: f64) -> Result<CoefficientField> {
    require_projection(proj)?;
    if !(sigma_loc > 0.0) {
        return Err(Error::Argument(format!("localization threshold must be positive, got {sigma_loc}")));
    }
    let kept = proj.filtered(|md| md.alpha_abs() > sigma_loc, FieldKind::DataProjection);
    if kept.is_empty() {
        return Err(Error::EmptyBasis(format!("no mode with |alpha| > {sigma_loc:e}")));
    }
    lowrank_reconstruct(&kept)
}

/// `sqrt(sum chi^s |q|^2)`.
pub fn hcs_norm(field: &CoefficientField, s: f64) -> f64 {
    field.iter().map(|(md, q)| chi_pow(md.chi(), s) * q.norm_sqr()).sum::<f64>().sqrt()
}

/// Keeps the modes with `chi <= 1 / epsilon`.
pub fn truncate_field(field: &CoefficientField, epsilon: f64) -> Result<CoefficientField> {
    if !(epsilon > 0.0) {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    let limit = 1.0 / epsilon;
    Ok(field.filtered(|md| md.chi() <= limit, field.kind()))
}

/// Choice of the spectral cutoff `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffPolicy {
    /// `delta |alpha_00|` for noisy data, `0.1 |alpha_00|` for clean data, and
    /// `0.9 |alpha_00|` when the contrast may extend outside the ball.
    Auto { delta: f64, outside_support: bool },
    Explicit(f64),
}

impl CutoffPolicy {
    pub fn sigma(&self, alpha00: f64) -> f64 {
        match *self {
            CutoffPolicy::Explicit(s) => s,
            CutoffPolicy::Auto { outside_support: true, .. } => 0.9 * alpha00,
            CutoffPolicy::Auto { delta, .. } if delta > 0.0 => delta * alpha00,
            CutoffPolicy::Auto { .. } => 0.1 * alpha00,
        }
    }
}

struct ProfileTerms {
    profile: Arc<RadialProfile>,
    terms: Vec<(usize, Complex64)>,
}

/// Pointwise evaluator of `sum q_{m,n,l} psi_{m,n,l}(x)` inside the ball.
pub struct FieldEvaluator {
    /// Per degree `m`: longest coefficient vector and the profiles in use.
    families: Vec<(usize, usize, Vec<ProfileTerms>)>,
    max_m: usize,
}

impl FieldEvaluator {
    pub fn new(field: &CoefficientField) -> Self {
        let mut by_m: std::collections::BTreeMap<usize, Vec<ProfileTerms>> = Default::default();
        for (md, q) in field.iter() {
            let fam = by_m.entry(md.m()).or_default();
            let h = harmonic_offset(md.m(), md.ell());
            match fam.iter_mut().find(|pt| pt.profile.n == md.n()) {
                Some(pt) => pt.terms.push((h, q)),
                None => fam.push(ProfileTerms { profile: Arc::clone(&md.profile), terms: vec![(h, q)] }),
            }
        }
        let max_m = by_m.keys().copied().max().unwrap_or(0);
        let families = by_m
            .into_iter()
            .map(|(m, v)| {
                let len = v.iter().map(|pt| pt.profile.effective_len()).max().unwrap_or(0);
                (m, len, v)
            })
            .collect();
        Self { families, max_m }
    }

    /// Value at `x`, `|x| <= 1`.
    pub fn eval(&self, x: [f64; 3]) -> Complex64 {
        let mut ylm = vec![0.0; harmonic_count(self.max_m)];
        let mut jac = Vec::new();
        self.eval_with(x, &mut ylm, &mut jac)
    }

    fn eval_with(&self, x: [f64; 3], ylm: &mut [f64], jac: &mut Vec<f64>) -> Complex64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        real_harmonics_at(self.max_m, x, ylm);
        let eta = 2.0 * r * r - 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, len, profiles) in &self.families {
            jac.resize(*len, 0.0);
            jacobi_normalized_all(*m, eta, jac);
            for pt in profiles {
                let radial = pt.profile.eval_with(r, &jac[..pt.profile.effective_len()]);
                for &(h, q) in &pt.terms {
                    acc += q * (radial * ylm[h]);
                }
            }
        }
        acc
    }

    /// Values at many points inside the ball.
    pub fn eval_many(&self, points: &[[f64; 3]]) -> Vec<Complex64> {
        let nh = harmonic_count(self.max_m);
        points
            .par_iter()
            .map_init(|| (vec![0.0; nh], Vec::new()), |(y, j), &x| self.eval_with(x, y, j))
            .collect()
    }
}

/// `int_B e^{i c x.y} f(y) dy` by quadrature, for several node-value vectors
/// `f` at once and many targets `x`. Returns `out[f][x]`.
pub fn restricted_fourier(
    c: f64,
    grid: &BallQuadGrid,
    funcs: &[Vec<Complex64>],
    targets: &[[f64; 3]],
) -> Vec<Vec<Complex64>> {
    let weighted: Vec<Vec<Complex64>> = funcs
        .iter()
        .map(|f| f.iter().zip(grid.weights()).map(|(v, w)| v * w).collect())
        .collect();
    let nodes = grid.nodes();
    let per_target: Vec<Vec<Complex64>> = targets
        .par_iter()
        .map(|&x| {
            let mut acc = vec![Complex64::new(0.0, 0.0); funcs.len()];
            for (n, y) in nodes.iter().enumerate() {
                let (s, co) = (c * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2])).sin_cos();
                let e = Complex64::new(co, s);
                for (a, f) in acc.iter_mut().zip(&weighted) {
                    *a += f[n] * e;
                }
            }
            acc
        })
        .collect();
    (0..funcs.len()).map(|f| per_target.iter().map(|v| v[f]).collect()).collect()
}

/// Cell-centred sampling box for volumes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeSpec {
    pub dims: [usize; 3],
    pub extent: Aabb,
}

impl VolumeSpec {
    /// `n^3` cells over `[-1, 1]^3`.
    pub fn cube(n: usize) -> Self {
        Self { dims: [n; 3], extent: Aabb { lower: [-1.0; 3], upper: [1.0; 3] } }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centre of cell `(i, j, k)`.
    pub fn center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let idx = [i, j, k];
        [0, 1, 2].map(|a| {
            let h = (self.extent.upper[a] - self.extent.lower[a]) / self.dims[a] as f64;
            self.extent.lower[a] + (idx[a] as f64 + 0.5) * h
        })
    }

    /// All cell centres, `x` fastest.
    pub fn centers(&self) -> Vec<[f64; 3]> {
        let [nx, ny, nz] = self.dims;
        let mut out = Vec::with_capacity(self.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    out.push(self.center(i, j, k));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Argument("volume resolution must be at least 1 per axis".into()));
        }
        Aabb::new(self.extent.lower, self.extent.upper).map(|_| ())
    }
}

/// Complex samples on a regular box, `x` fastest; `masked[v]` marks cells whose
/// centre lies outside the unit ball and was not evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeGrid {
    pub spec: VolumeSpec,
    pub values: Vec<Complex64>,
    pub masked: Vec<bool>,
}

/// Samples the field at cell centres inside the ball; other cells are masked and zero.
pub fn evaluate_volume(field: &CoefficientField, spec: VolumeSpec) -> Result<VolumeGrid> {
    spec.validate()?;
    let centers = spec.centers();
    let masked: Vec<bool> = centers.iter().map(|x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > 1.0).collect();
    let inside: Vec<[f64; 3]> = centers.iter().zip(&masked).filter(|(_, &m)| !m).map(|(x, _)| *x).collect();
    let eval = FieldEvaluator::new(field);
    let mut vals = eval.eval_many(&inside).into_iter();
    let values = masked
        .iter()
        .map(|&m| if m { Complex64::new(0.0, 0.0) } else { vals.next().expect("one value per inside cell") })
        .collect();
    Ok(VolumeGrid { spec, values, masked })
}

/// Like [`evaluate_volume`], filling cells outside the ball through the
/// continuation of each mode to R^3, computed by quadrature on `grid`.
pub fn evaluate_volume_extended(field: &CoefficientField, spec: VolumeSpec, grid: Arc<BallQuadGrid>) -> Result<VolumeGrid> {
    let mut vol = evaluate_volume(field, spec)?;
    let outside: Vec<usize> = (0..vol.values.len()).filter(|&v| vol.masked[v]).collect();
    if outside.is_empty() {
        return Ok(vol);
    }
    let table = NodeTable::new(field.basis(), grid)?;
    // g(y) = sum (q / alpha) psi(y), so that the field outside is int e^{icx.y} g(y) dy
    let mut g = vec![Complex64::new(0.0, 0.0); table.grid().len()];
    for (&i, &q) in field.indices().iter().zip(field.coeffs()) {
        let w = q / field.basis().modes()[i].alpha();
        for (n, gn) in g.iter_mut().enumerate() {
            *gn += w * table.psi(i, n);
        }
    }
    let centers = spec.centers();
    let targets: Vec<[f64; 3]> = outside.iter().map(|&v| centers[v]).collect();
    let ext = restricted_fourier(field.basis().c(), table.grid(), &[g], &targets).remove(0);
    for (&v, val) in outside.iter().zip(ext) {
        vol.values[v] = val;
        vol.masked[v] = false;
    }
    Ok(vol)
}
