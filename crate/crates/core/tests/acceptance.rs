//! Acceptance criteria 1-12. Each test writes one `[PASS]` or `[FAIL]` line to
//! stderr (bypassing the harness capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pswf3d::borndata::{
    born_ball, born_oscillatory, born_three_cubes, farfield_from_born, Aabb, ContrastSpec, VoxelGrid, THREE_CUBES,
};
use pswf3d::io::{read_basis_cache_for, write_basis_cache};
use pswf3d::pipeline::{born_to_processed, extract_processed, ProcessedData};
use pswf3d::pswf::{build_basis, build_basis_with, solve_modes, BasisOptions, PswfBasis, RadialProfile, Truncation};
use pswf3d::quadrature::{ball_grid, fibonacci_sphere, gauss_legendre, BallQuadGrid};
use pswf3d::reconstruct::{
    evaluate_volume, hcs_norm, localized_reconstruct, lowrank_reconstruct, project, project_with, restricted_fourier,
    tikhonov_reconstruct, truncate_field, CoefficientField, FieldEvaluator, FieldKind, NodeTable, VolumeSpec,
};

const C: f64 = 30.0;
const K: usize = 150;

fn report(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "[{tag}] criterion {criterion}: {detail}");
}

fn alpha00() -> f64 {
    static A: OnceLock<f64> = OnceLock::new();
    *A.get_or_init(|| RadialProfile::compute(0, 0, C, K).unwrap().alpha_abs())
}

/// The `sigma = 0.1 |alpha_00|` basis at `c = 30`.
fn basis() -> Arc<PswfBasis> {
    static B: OnceLock<Arc<PswfBasis>> = OnceLock::new();
    B.get_or_init(|| Arc::new(build_basis(C, K, 0.1 * alpha00()).unwrap())).clone()
}

fn grid() -> Arc<BallQuadGrid> {
    static G: OnceLock<Arc<BallQuadGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(ball_grid(23, 31, 61).unwrap())).clone()
}

fn table() -> &'static NodeTable {
    static T: OnceLock<NodeTable> = OnceLock::new();
    T.get_or_init(|| NodeTable::new(&basis(), grid()).unwrap())
}

fn ball_data(grid: Arc<BallQuadGrid>) -> ProcessedData {
    born_to_processed(|p, c| born_ball(p, c, 0.5), grid, C, "ball").unwrap()
}

/// `<1_{|x| < a}, psi>` by Gauss quadrature of the radial profile; only `l = m = 0` survive.
fn ball_projection(md: &pswf3d::pswf::PswfMode, a: f64) -> f64 {
    static RULE: OnceLock<pswf3d::quadrature::Rule1D> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(200).unwrap());
    if md.m() != 0 {
        return 0.0;
    }
    (4.0 * PI).sqrt() * rule.integrate_on(0.0, a, |r| r * r * md.profile.eval(r))
}

fn relative_to_ball_projection(field: &CoefficientField) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (md, q) in field.iter() {
        let exact = ball_projection(md, 0.5);
        num += (q - exact).norm_sqr();
        den += exact * exact;
    }
    (num / den).sqrt()
}

fn random_in_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let p = [0, 1, 2].map(|_| rng.gen_range(-1.0..=1.0));
        if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return p;
        }
    }
}

#[test]
fn criterion_01_dual_residual() {
    let start = Instant::now();
    let ygrid = Arc::new(ball_grid(23, 31, 61).unwrap());
    let xgrid = Arc::new(ball_grid(12, 16, 31).unwrap());
    let mut worst: f64 = 0.0;
    for c in [2.0, 5.0, 10.0] {
        let full = build_basis(c, K, 0.0).unwrap();
        let tenth = full.modes()[9].alpha_abs();
        let basis = full.restrict(0.5 * tenth).unwrap();
        let ytable = NodeTable::new(&basis, ygrid.clone()).unwrap();
        let xtable = NodeTable::new(&basis, xgrid.clone()).unwrap();
        let funcs: Vec<Vec<Complex64>> =
            (0..10).map(|i| ytable.mode_values(i).into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect();
        let images = restricted_fourier(c, &ygrid, &funcs, xgrid.nodes());
        for (i, image) in images.iter().enumerate() {
            let md = &basis.modes()[i];
            let a = md.alpha();
            let res: f64 =
                (0..xgrid.len()).map(|n| xgrid.weights()[n] * (image[n] - a * xtable.psi(i, n)).norm_sqr()).sum();
            worst = worst.max(res.sqrt() / md.alpha_abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1e-3 && elapsed <= 120.0;
    report(1, pass, &format!("worst relative residual {worst:.3e} (< 1e-3), {elapsed:.1} s (<= 120 s)"));
    assert!(pass);
}

#[test]
fn criterion_02_hilbert_schmidt() {
    let b = build_basis(5.0, K, 0.0).unwrap();
    let hs: f64 = b
        .modes()
        .iter()
        .filter(|md| md.m() <= 30 && md.n() <= 30)
        .map(|md| md.alpha_abs().powi(2))
        .sum();
    let target = (4.0 * PI / 3.0).powi(2);
    let hs_rel = (hs - target).abs() / target;
    let a = RadialProfile::compute(0, 0, 0.1, K).unwrap().alpha_abs();
    let a_rel = (a - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0);
    let pass = hs_rel < 0.01 && a_rel < 0.005;
    report(
        2,
        pass,
        &format!("HS sum {hs:.6} vs {target:.6} (rel {hs_rel:.2e} < 1e-2); alpha_00(0.1) rel {a_rel:.2e} (< 5e-3)"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_degenerate_spectrum() {
    let modes = solve_modes(0, 0.0, K).unwrap();
    let worst = (0..=20usize)
        .map(|n| (modes[n].chi - (2 * n * (2 * n + 3)) as f64).abs())
        .fold(0.0, f64::max);
    let pass = worst <= 1e-12;
    report(3, pass, &format!("max |chi_0n - 2n(2n+3)| for n <= 20 is {worst:.2e} (<= 1e-12)"));
    assert!(pass);
}

#[test]
fn criterion_04_gram() {
    let (diag, off) = table().gram_deviation();
    let pass = diag < 5e-3 && off < 5e-3;
    report(
        4,
        pass,
        &format!("{} modes: max |G_ii - 1| = {diag:.4e}, max |G_ij| = {off:.4e} (both < 5e-3)", basis().len()),
    );
    assert!(pass);
}

#[test]
fn criterion_05_born_generators() {
    let start = Instant::now();
    let cube = Aabb::new([-0.4, -0.3, -0.2], [0.35, 0.45, 0.5]).unwrap();
    let generators: [(&str, ContrastSpec, fn([f64; 3], f64) -> Complex64); 4] = [
        ("ball", ContrastSpec::ball(0.5), |p, c| born_ball(p, c, 0.5)),
        ("cube", ContrastSpec::cube(cube.lower, cube.upper).unwrap(), |p, c| {
            pswf3d::borndata::born_cube(p, c, [-0.4, -0.3, -0.2], [0.35, 0.45, 0.5])
        }),
        ("three cubes", ContrastSpec::three_cubes(), born_three_cubes),
        ("oscillatory", ContrastSpec::oscillatory(8), |p, c| born_oscillatory(p, c, 8)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<[f64; 3]> = (0..50).map(|_| random_in_ball(&mut rng)).collect();
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, spec, analytic) in generators {
        let voxels = spec.voxelize(128).unwrap();
        let err = points.iter().map(|&p| (analytic(p, C) - voxels.transform(p, C)).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
        details.push(format!("{name} {err:.2e}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < 1e-3 && elapsed <= 300.0;
    report(5, pass, &format!("max abs deviation: {} (< 1e-3), {elapsed:.1} s (<= 300 s)", details.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_06_noiseless_ball() {
    let basis = basis();
    let err_at = |t: usize| {
        let grid = Arc::new(ball_grid(t, 31, 61).unwrap());
        relative_to_ball_projection(&lowrank_reconstruct(&project(&ball_data(grid), basis.clone()).unwrap()).unwrap())
    };
    let err = err_at(40);
    let err_coarse = relative_to_ball_projection(
        &lowrank_reconstruct(&project_with(table(), &ball_data(grid()), basis.clone()).unwrap()).unwrap(),
    );
    let pass = err < 0.02;
    report(
        6,
        pass,
        &format!("relative error vs band-limited projection {err:.3e} on ball_grid(40,31,61) (< 2e-2); {err_coarse:.3e} on ball_grid(23,31,61)"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_stability() {
    let basis = basis();
    let delta = 0.2;
    let sigma = delta * alpha00();
    let restricted = Arc::new(basis.restrict(sigma).unwrap());
    let clean = ball_data(grid());
    let q0 = lowrank_reconstruct(&project(&clean, restricted.clone()).unwrap()).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..10 {
        let mut noisy = clean.clone();
        noisy.add_noise(delta, seed).unwrap();
        let qd = lowrank_reconstruct(&project(&noisy, restricted.clone()).unwrap()).unwrap();
        let bound = noisy.l2_distance(&clean).unwrap() / sigma;
        worst_ratio = worst_ratio.max(qd.l2_distance(&q0).unwrap() / bound);
    }
    let pass = worst_ratio <= 1.0;
    report(7, pass, &format!("max over 10 seeds of ||q^d - q^0|| / (delta~/sigma) = {worst_ratio:.3e} (<= 1)"));
    assert!(pass);
}

#[test]
fn criterion_08_pi_epsilon_bound() {
    let basis = basis();
    let chi = |n: usize| basis.modes()[basis.position(0, n, 0).unwrap()].chi();
    let epsilons = [1.0 / chi(5), 1.0 / chi(10)];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let coeffs =
            (0..basis.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let u = CoefficientField::full(basis.clone(), coeffs, FieldKind::Reconstruction).unwrap();
        for s in [0.5, 1.0] {
            for eps in epsilons {
                let tail = truncate_field(&u, eps).unwrap().l2_distance(&u).unwrap();
                worst_ratio = worst_ratio.max(tail / (eps.powf(s / 2.0) * hcs_norm(&u, s)));
            }
        }
    }
    let pass = worst_ratio <= 1.0;
    report(8, pass, &format!("max ||pi_eps u - u|| / (eps^(s/2) ||u||_s) = {worst_ratio:.3e} over 400 cases (<= 1)"));
    assert!(pass);
}

#[test]
fn criterion_09_tikhonov() {
    let basis = basis();
    let proj = project_with(table(), &ball_data(grid()), basis.clone()).unwrap();
    let cutoff = lowrank_reconstruct(&proj).unwrap();
    let consistency: Vec<f64> = [0.25, 0.5]
        .iter()
        .map(|&s| tikhonov_reconstruct(&proj, 1e-14, s).unwrap().l2_distance(&cutoff).unwrap() / cutoff.l2_norm())
        .collect();

    let fields: Vec<_> = [1e-6, 1e-4, 1e-2].iter().map(|&eta| tikhonov_reconstruct(&proj, eta, 0.5).unwrap()).collect();
    let monotone = fields
        .windows(2)
        .all(|w| w[0].coeffs().iter().zip(w[1].coeffs()).all(|(a, b)| b.norm() <= a.norm()));

    let k = 0.5 * C;
    let dirs = fibonacci_sphere(201).unwrap();
    let records = farfield_from_born(|p, c| born_ball(p, c, 0.5), k, &dirs, &dirs).unwrap();
    let data = extract_processed(&records, grid(), k).unwrap();
    let proj_ff = project_with(table(), &data, basis.clone()).unwrap();
    let mut operating = Vec::new();
    for s in [0.25, 0.5] {
        let q = tikhonov_reconstruct(&proj_ff, 1e-4, s).unwrap();
        assert!(q.coeffs().iter().all(|z| z.is_finite()));
        operating.push(format!("s={s}: rel err {:.3e}", relative_to_ball_projection(&q)));
    }
    let pass = consistency.iter().all(|&r| r < 1e-10) && monotone;
    report(
        9,
        pass,
        &format!(
            "eta=1e-14 vs cutoff rel {:.2e} (s=1/4), {:.2e} (s=1/2) (< 1e-10); monotone in eta: {monotone}; eta=1e-4 from far field {}",
            consistency[0],
            consistency[1],
            operating.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_three_cubes() {
    let data = born_to_processed(born_three_cubes, grid(), C, "three cubes").unwrap();
    let q = lowrank_reconstruct(&project_with(table(), &data, basis()).unwrap()).unwrap();
    let eval = FieldEvaluator::new(&q);
    let centers: Vec<f64> = THREE_CUBES
        .iter()
        .map(|b| eval.eval([0, 1, 2].map(|a| 0.5 * (b.lower[a] + b.upper[a]))).re)
        .collect();
    let gaps: Vec<f64> =
        [[0.0, 0.0, 0.3], [0.0, 0.13, 0.0625], [0.0, -0.13, 0.0625]].iter().map(|&x| eval.eval(x).re).collect();
    let min_center = centers.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = min_center > max_gap;
    report(10, pass, &format!("Re q at centers {centers:.3?}, at gap midpoints {gaps:.3?}"));
    assert!(pass);
}

#[test]
fn criterion_11_localized() {
    let sigma = 0.9 * alpha00();
    let basis = basis();
    let blob_box = Aabb::new([1.7, -0.3, -0.3], [2.3, 0.3, 0.3]).unwrap();
    let blob_center = [2.0, 0.0, 0.0];
    let sub = 4;
    let blob = VoxelGrid::from_fn([32; 3], blob_box, |x| {
        let h = 0.6 / 32.0;
        let mut inside = 0;
        for a in 0..sub {
            for b in 0..sub {
                for c in 0..sub {
                    let o = [a, b, c].map(|i| (i as f64 + 0.5) / sub as f64 - 0.5);
                    let r2: f64 = (0..3).map(|d| (x[d] + o[d] * h - blob_center[d]).powi(2)).sum();
                    inside += (r2 < 0.09) as usize;
                }
            }
        }
        inside as f64 / (sub * sub * sub) as f64
    })
    .unwrap();
    let blob_spec = ContrastSpec::voxels(blob);
    let clean = ball_data(grid());
    let mut dirty = clean.clone();
    for (v, p) in dirty.values.iter_mut().zip(grid().nodes()) {
        *v += blob_spec.born(*p, C);
    }
    let q_clean = localized_reconstruct(&project_with(table(), &clean, basis.clone()).unwrap(), sigma).unwrap();
    let q_dirty = localized_reconstruct(&project_with(table(), &dirty, basis).unwrap(), sigma).unwrap();
    let shift = q_dirty.l2_distance(&q_clean).unwrap() / q_clean.l2_norm();
    let (e_clean, e_dirty) = (relative_to_ball_projection(&q_clean), relative_to_ball_projection(&q_dirty));
    let pass = shift < 0.15;
    report(
        11,
        pass,
        &format!(
            "{} modes; ||q_blob - q_clean|| / ||q_clean|| = {shift:.3e} (< 0.15); errors vs projection {e_clean:.3e} clean, {e_dirty:.3e} with blob",
            q_clean.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_12_performance() {
    let start = Instant::now();
    let opts = BasisOptions { truncation: Truncation::Fixed(K), sigma: 0.1 * alpha00(), max_m: None, parallel: false };
    let basis = build_basis_with(C, &opts).unwrap();
    let build = start.elapsed().as_secs_f64();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.psw3");
    write_basis_cache(&basis, &path).unwrap();

    let start = Instant::now();
    let basis = Arc::new(read_basis_cache_for(&path, C).unwrap());
    let k = 0.5 * C;
    let dirs = fibonacci_sphere(201).unwrap();
    let records = farfield_from_born(|p, c| born_ball(p, c, 0.5), k, &dirs, &dirs).unwrap();
    let data = extract_processed(&records, Arc::new(ball_grid(23, 31, 61).unwrap()), k).unwrap();
    let q = lowrank_reconstruct(&project(&data, basis).unwrap()).unwrap();
    let volume = evaluate_volume(&q, VolumeSpec::cube(32)).unwrap();
    assert!(volume.values.iter().all(|z| z.is_finite()));
    let pipeline = start.elapsed().as_secs_f64();

    let pass = build < 300.0 && pipeline < 60.0;
    report(
        12,
        pass,
        &format!("single-threaded basis build {build:.2} s (< 300 s); cached-basis pipeline {pipeline:.2} s (< 60 s)"),
    );
    assert!(pass);
}
