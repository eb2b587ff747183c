//! One-dimensional rules, the Gaussian product grid on the unit ball, and
//! direction sets on the sphere.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A one-dimensional quadrature rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over the rule's native interval.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrates `f` over `[a, b]` by affine mapping from `[-1, 1]`.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.integrate(|x| f(mid + half * x))
    }
}

/// Evaluates `(P_n(x), P_{n-1}(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`, nodes ascending.
///
/// Nodes come from Newton's method on `P_n` started at the asymptotic
/// estimate `cos(pi (k + 3/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize) -> Result<Rule1D> {
    if n == 0 {
        return Err(Error::Argument("Gauss-Legendre rule needs at least one node".into()));
    }
    if n == 1 {
        return Ok(Rule1D { nodes: vec![0.0], weights: vec![2.0] });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                let (p, pm1) = legendre_pair(n, x);
                dp = nf * (x * p - pm1) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // k-th largest root; mirror onto the negative half
        nodes[n - 1 - k] = x;
        nodes[k] = -x;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule1D { nodes, weights })
}

/// Trapezoidal (periodic) rule on `[0, 2 pi)`: nodes `2 pi j / n`, weights `2 pi / n`.
pub fn periodic_trapezoid(n: usize) -> Result<Rule1D> {
    if n == 0 {
        return Err(Error::Argument("trapezoidal rule needs at least one node".into()));
    }
    let h = 2.0 * PI / n as f64;
    Ok(Rule1D { nodes: (0..n).map(|j| j as f64 * h).collect(), weights: vec![h; n] })
}

/// Gaussian product quadrature on the unit ball.
///
/// Radial nodes are `sqrt((1 + t_i)/2)` for Gauss–Legendre nodes `t_i`, polar
/// nodes are Gauss–Legendre in `cos(theta)`, azimuths are equispaced. Node `n`
/// corresponds to `(i, s, j)` with `n = (i * M_theta + s) * M_phi + j`.
#[derive(Clone, Debug)]
pub struct BallQuadGrid {
    t_rule: Rule1D,
    theta_rule: Rule1D,
    m_phi: usize,
    radius: f64,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl BallQuadGrid {
    pub fn t_count(&self) -> usize {
        self.t_rule.len()
    }

    pub fn theta_count(&self) -> usize {
        self.theta_rule.len()
    }

    pub fn phi_count(&self) -> usize {
        self.m_phi
    }

    /// `(T, M_theta, M_phi)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.t_count(), self.theta_count(), self.m_phi)
    }

    /// Radius of the ball covered by the grid (1 unless [`Self::scaled`]).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    /// Combined weight `pi (1 + t_i)^{1/2} w_{t_i} w_{theta_s} / (2 sqrt(2) M_phi)`
    /// (times `R^3` for a scaled grid).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn t_rule(&self) -> &Rule1D {
        &self.t_rule
    }

    pub fn theta_rule(&self) -> &Rule1D {
        &self.theta_rule
    }

    /// Node radius for radial index `i`.
    pub fn radius_at(&self, i: usize) -> f64 {
        self.radius * (0.5 * (1.0 + self.t_rule.nodes[i])).sqrt()
    }

    /// Radial part of the combined weight: `pi sqrt(1 + t_i) w_{t_i} / (2 sqrt 2)`.
    pub fn radial_weight(&self, i: usize) -> f64 {
        let t = self.t_rule.nodes[i];
        PI * (1.0 + t).sqrt() * self.t_rule.weights[i] / (2.0 * std::f64::consts::SQRT_2)
            * self.radius.powi(3)
    }

    /// Angular part of the combined weight: `w_{theta_s} / M_phi`.
    pub fn angular_weight(&self, s: usize) -> f64 {
        self.theta_rule.weights[s] / self.m_phi as f64
    }

    /// Unit direction of angular node `(s, j)`.
    pub fn direction(&self, s: usize, j: usize) -> [f64; 3] {
        let ct = self.theta_rule.nodes[s];
        let st = ((1.0 - ct) * (1.0 + ct)).sqrt();
        let phi = 2.0 * PI * j as f64 / self.m_phi as f64;
        let (sp, cp) = phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    #[inline]
    pub fn index(&self, i: usize, s: usize, j: usize) -> usize {
        (i * self.theta_count() + s) * self.m_phi + j
    }

    #[inline]
    pub fn triple(&self, n: usize) -> (usize, usize, usize) {
        let j = n % self.m_phi;
        let rest = n / self.m_phi;
        (rest / self.theta_count(), rest % self.theta_count(), j)
    }

    /// Same angular/radial structure on the ball of radius `radius`.
    pub fn scaled(&self, radius: f64) -> Self {
        let f = radius / self.radius;
        Self {
            t_rule: self.t_rule.clone(),
            theta_rule: self.theta_rule.clone(),
            m_phi: self.m_phi,
            radius,
            nodes: self.nodes.iter().map(|p| [p[0] * f, p[1] * f, p[2] * f]).collect(),
            weights: self.weights.iter().map(|w| w * f.powi(3)).collect(),
        }
    }

    /// Quadrature of `f` over the ball.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Builds the product grid with `T` radial, `M_theta` polar and `M_phi` azimuthal nodes.
pub fn ball_grid(t: usize, m_theta: usize, m_phi: usize) -> Result<BallQuadGrid> {
    if t == 0 || m_theta == 0 || m_phi == 0 {
        return Err(Error::Argument(format!(
            "ball grid counts must be positive, got ({t}, {m_theta}, {m_phi})"
        )));
    }
    let t_rule = gauss_legendre(t)?;
    let theta_rule = gauss_legendre(m_theta)?;
    let mut grid = BallQuadGrid {
        t_rule,
        theta_rule,
        m_phi,
        radius: 1.0,
        nodes: Vec::with_capacity(t * m_theta * m_phi),
        weights: Vec::with_capacity(t * m_theta * m_phi),
    };
    for i in 0..t {
        let r = grid.radius_at(i);
        let wr = grid.radial_weight(i);
        for s in 0..m_theta {
            let ws = grid.angular_weight(s);
            for j in 0..m_phi {
                let d = grid.direction(s, j);
                grid.nodes.push([r * d[0], r * d[1], r * d[2]]);
                grid.weights.push(wr * ws);
            }
        }
    }
    Ok(grid)
}

/// A set of unit vectors on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    pub directions: Vec<[f64; 3]>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Strategy for placing `n` nearly uniform directions on the sphere.
pub trait SphereLattice {
    fn directions(&self, n: usize) -> DirectionSet;
}

/// Golden-angle spiral: `z_i = 1 - (2i + 1)/N`, `phi_i = 2 pi i / golden` (mod 2 pi).
#[derive(Clone, Copy, Debug, Default)]
pub struct FibonacciLattice;

impl SphereLattice for FibonacciLattice {
    fn directions(&self, n: usize) -> DirectionSet {
        let inv_golden = 2.0 / (1.0 + 5f64.sqrt());
        let directions = (0..n)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let phi = (2.0 * PI * i as f64 * inv_golden).rem_euclid(2.0 * PI);
                let rho = ((1.0 - z) * (1.0 + z)).sqrt();
                let (sp, cp) = phi.sin_cos();
                [rho * cp, rho * sp, z]
            })
            .collect();
        DirectionSet { directions }
    }
}

/// `N` directions on the Fibonacci lattice.
pub fn fibonacci_sphere(n: usize) -> Result<DirectionSet> {
    if n == 0 {
        return Err(Error::Argument("direction set needs at least one direction".into()));
    }
    Ok(FibonacciLattice.directions(n))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_eq!(r1.weights, vec![2.0]);
        let r2 = gauss_legendre(2).unwrap();
        assert_abs_diff_eq!(r2.nodes[0], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[1], 1.0, epsilon = 1e-15);
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn degree_exactness() {
        let r5 = gauss_legendre(5).unwrap();
        assert_abs_diff_eq!(r5.integrate(|x| x.powi(8)), 2.0 / 9.0, epsilon = 1e-14);
        for n in [3usize, 10, 31, 64, 150, 200] {
            let rule = gauss_legendre(n).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            for k in 0..(2 * n).min(60) {
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert_abs_diff_eq!(rule.integrate(|x| x.powi(k as i32)), exact, epsilon = 1e-13);
            }
            for k in 0..n {
                assert_abs_diff_eq!(rule.nodes[k], -rule.nodes[n - 1 - k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn default_grid_size_and_volume() {
        let g = ball_grid(23, 31, 61).unwrap();
        assert_eq!(g.len(), 43_493);
        assert!(g.nodes().iter().all(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= 1.0));
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 4.0 * PI / 3.0).abs() < 1e-3);
    }

    #[test]
    fn volume_error_decreases_with_t() {
        let mut last = f64::INFINITY;
        for t in [8, 16, 23, 32] {
            let g = ball_grid(t, 4, 5).unwrap();
            let err = (g.weights().iter().sum::<f64>() - 4.0 * PI / 3.0).abs();
            assert!(err < last, "T = {t}: {err} !< {last}");
            last = err;
        }
    }

    #[test]
    fn polynomial_moments_match_exact_values() {
        let g = ball_grid(23, 8, 9).unwrap();
        let vol = 4.0 * PI / 3.0;
        // int_B x^2 = 4 pi / 15, int_B x^2 y^2 = 4 pi / 105, int_B x^4 = 4 pi / 35
        let tol = 1e-4;
        assert_abs_diff_eq!(g.integrate(|_| 1.0), vol, epsilon = tol);
        assert_abs_diff_eq!(g.integrate(|p| p[0] * p[0]), 4.0 * PI / 15.0, epsilon = tol);
        assert_abs_diff_eq!(g.integrate(|p| p[0] * p[0] * p[1] * p[1]), 4.0 * PI / 105.0, epsilon = tol);
        assert_abs_diff_eq!(g.integrate(|p| p[2].powi(4)), 4.0 * PI / 35.0, epsilon = tol);
        assert_abs_diff_eq!(g.integrate(|p| p[0] * p[1] * p[2]), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.integrate(|p| p[0].powi(3)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn index_map_is_a_bijection() {
        let g = ball_grid(3, 4, 5).unwrap();
        for n in 0..g.len() {
            let (i, s, j) = g.triple(n);
            assert_eq!(g.index(i, s, j), n);
            let d = g.direction(s, j);
            let r = g.radius_at(i);
            for k in 0..3 {
                assert_abs_diff_eq!(g.nodes()[n][k], r * d[k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn fibonacci_basic() {
        let one = fibonacci_sphere(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_abs_diff_eq!(one.directions[0][2], 0.0, epsilon = 1e-15);
        let set = fibonacci_sphere(201).unwrap();
        assert_eq!(set.len(), 201);
        let mut mean = [0.0; 3];
        for d in &set.directions {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-14);
            for k in 0..3 {
                mean[k] += d[k] / 201.0;
            }
        }
        assert!((mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt() < 0.02);
        assert!(fibonacci_sphere(0).is_err());
    }

    #[test]
    fn fibonacci_min_separation() {
        for n in [51usize, 101, 201] {
            let set = fibonacci_sphere(n).unwrap();
            let mut min_angle = f64::INFINITY;
            for a in 0..n {
                for b in (a + 1)..n {
                    let (u, v) = (set.directions[a], set.directions[b]);
                    let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                    min_angle = min_angle.min(dot.acos());
                }
            }
            assert!(min_angle > 0.5 / (n as f64).sqrt(), "N = {n}: {min_angle}");
        }
    }
}
