//! From Born data or far-field records to processed samples on a ball grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::borndata::{add_noise, FarFieldRecord};
use crate::error::{Error, Result};
use crate::quadrature::BallQuadGrid;

/// Where a processed sample came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Provenance {
    /// Sampled exactly at the node.
    Exact,
    /// Copied from far-field record `record`, whose point `(theta - x)/2` lies
    /// `distance` away from the node.
    Matched { record: usize, distance: f64 },
}

/// Descriptive metadata carried with processed data.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMeta {
    pub k: f64,
    pub delta: Option<f64>,
    pub source: String,
}

/// Complex samples `u_b(p_n; c)` at the nodes of a ball grid.
#[derive(Clone, Debug)]
pub struct ProcessedData {
    pub c: f64,
    pub grid: Arc<BallQuadGrid>,
    pub values: Vec<Complex64>,
    pub provenance: Vec<Provenance>,
    pub meta: DataMeta,
}

impl ProcessedData {
    pub fn new(
        c: f64,
        grid: Arc<BallQuadGrid>,
        values: Vec<Complex64>,
        provenance: Vec<Provenance>,
        meta: DataMeta,
    ) -> Result<Self> {
        if values.len() != grid.len() || provenance.len() != grid.len() {
            return Err(Error::Validation(format!(
                "grid has {} nodes but {} values and {} provenance entries were given",
                grid.len(),
                values.len(),
                provenance.len()
            )));
        }
        Ok(Self { c, grid, values, provenance, meta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies multiplicative noise in place and records the level.
    pub fn add_noise(&mut self, delta: f64, seed: u64) -> Result<()> {
        add_noise(&mut self.values, delta, seed)?;
        self.meta.delta = Some(delta);
        Ok(())
    }

    /// Quadrature approximation of `||u||_{L^2(B)}`.
    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Quadrature approximation of `||u - v||_{L^2(B)}` for data on the same grid.
    pub fn l2_distance(&self, other: &ProcessedData) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Validation("processed data sets live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| w * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest matching distance, 0 when every sample is exact.
    pub fn max_matching_distance(&self) -> f64 {
        self.provenance
            .iter()
            .map(|p| match p {
                Provenance::Exact => 0.0,
                Provenance::Matched { distance, .. } => *distance,
            })
            .fold(0.0, f64::max)
    }
}

/// Samples `born(p, c)` at every grid node.
pub fn born_to_processed<F>(born: F, grid: Arc<BallQuadGrid>, c: f64, source: &str) -> Result<ProcessedData>
where
    F: Fn([f64; 3], f64) -> Complex64 + Sync,
{
    if !(c > 0.0) {
        return Err(Error::Argument(format!("bandwidth must be positive, got {c}")));
    }
    let values: Vec<Complex64> = grid.nodes().par_iter().map(|&p| born(p, c)).collect();
    let provenance = vec![Provenance::Exact; values.len()];
    let meta = DataMeta { k: 0.5 * c, delta: None, source: source.to_string() };
    ProcessedData::new(c, grid, values, provenance, meta)
}

/// Nearest-neighbour search strategy for [`extract_processed_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Search {
    #[default]
    Indexed,
    BruteForce,
}

#[inline]
fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// `(distance^2, index)` ordering used for ties.
#[inline]
fn better(d: f64, i: usize, best: (f64, usize)) -> bool {
    d < best.0 || (d == best.0 && i < best.1)
}

/// Uniform bucket grid over the points `(theta - x)/2`, all inside `[-1, 1]^3`.
pub struct PairIndex {
    points: Vec<[f64; 3]>,
    cells: usize,
    h: f64,
    /// Bucket `b` holds `order[start[b]..start[b + 1]]`, indices ascending.
    start: Vec<usize>,
    order: Vec<usize>,
}

impl PairIndex {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        let target = (points.len() as f64 / 2.0).cbrt().ceil() as usize;
        let cells = target.clamp(1, 128);
        let h = 2.0 / cells as f64;
        let mut counts = vec![0usize; cells * cells * cells + 1];
        let buckets: Vec<usize> = points.iter().map(|&p| Self::bucket_of(p, cells, h)).collect();
        for &b in &buckets {
            counts[b + 1] += 1;
        }
        for b in 0..cells * cells * cells {
            counts[b + 1] += counts[b];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut order = vec![0; points.len()];
        for (i, &b) in buckets.iter().enumerate() {
            order[fill[b]] = i;
            fill[b] += 1;
        }
        Self { points, cells, h, start, order }
    }

    fn coord(x: f64, cells: usize, h: f64) -> usize {
        (((x + 1.0) / h).floor().max(0.0) as usize).min(cells - 1)
    }

    fn bucket_of(p: [f64; 3], cells: usize, h: f64) -> usize {
        let c = p.map(|x| Self::coord(x, cells, h));
        (c[2] * cells + c[1]) * cells + c[0]
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Index and squared distance of the nearest point; ties go to the smaller index.
    pub fn nearest(&self, q: [f64; 3]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let n = self.cells as isize;
        let qc = q.map(|x| Self::coord(x, self.cells, self.h) as isize);
        // Every point in ring r + 1 is at least this far from q.
        let lower_bound = |r: isize| {
            let mut gap = f64::INFINITY;
            for a in 0..3 {
                let lo = -1.0 + (qc[a] - r) as f64 * self.h;
                let hi = -1.0 + (qc[a] + r + 1) as f64 * self.h;
                gap = gap.min((q[a] - lo).max(0.0)).min((hi - q[a]).max(0.0));
            }
            // slack for points rounded into a neighbouring bucket
            (gap * (1.0 - 1e-12) - 1e-15).max(0.0)
        };
        let mut best = (f64::INFINITY, usize::MAX);
        let max_ring = n;
        for r in 0..=max_ring {
            for dz in -r..=r {
                let z = qc[2] + dz;
                if z < 0 || z >= n {
                    continue;
                }
                for dy in -r..=r {
                    let y = qc[1] + dy;
                    if y < 0 || y >= n {
                        continue;
                    }
                    let on_shell = dz.abs() == r || dy.abs() == r;
                    let step = if on_shell || r == 0 { 1 } else { 2 * r as usize };
                    for dx in (-r..=r).step_by(step) {
                        let x = qc[0] + dx;
                        if x < 0 || x >= n {
                            continue;
                        }
                        let b = ((z * n + y) * n + x) as usize;
                        for &i in &self.order[self.start[b]..self.start[b + 1]] {
                            let d = dist2(self.points[i], q);
                            if better(d, i, best) {
                                best = (d, i);
                            }
                        }
                    }
                }
            }
            let gap = lower_bound(r);
            if best.1 != usize::MAX && best.0 < gap * gap {
                break;
            }
        }
        Some((best.1, best.0))
    }

    /// Reference linear scan with the same tie-break.
    pub fn nearest_brute_force(&self, q: [f64; 3]) -> Option<(usize, f64)> {
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, &p) in self.points.iter().enumerate() {
            let d = dist2(p, q);
            if better(d, i, best) {
                best = (d, i);
            }
        }
        (best.1 != usize::MAX).then_some((best.1, best.0))
    }
}

/// Processed data from far-field records with the default indexed search.
pub fn extract_processed(records: &[FarFieldRecord], grid: Arc<BallQuadGrid>, k: f64) -> Result<ProcessedData> {
    extract_processed_with(records, grid, k, Search::Indexed)
}

/// For each node, copies `(4 pi / k^2) u^inf` of the record whose point
/// `(theta - x)/2` is nearest; ties go to the earlier record.
pub fn extract_processed_with(
    records: &[FarFieldRecord],
    grid: Arc<BallQuadGrid>,
    k: f64,
    search: Search,
) -> Result<ProcessedData> {
    if records.is_empty() {
        return Err(Error::Argument("no far-field records to extract from".into()));
    }
    if !(k > 0.0) {
        return Err(Error::Argument(format!("wave number must be positive, got {k}")));
    }
    let points: Vec<[f64; 3]> = records
        .iter()
        .map(|r| [0, 1, 2].map(|a| 0.5 * (r.incident[a] - r.observation[a])))
        .collect();
    let index = PairIndex::new(points);
    let scale = 4.0 * PI / (k * k);
    let matches: Vec<(usize, f64)> = grid
        .nodes()
        .par_iter()
        .map(|&p| {
            let hit = match search {
                Search::Indexed => index.nearest(p),
                Search::BruteForce => index.nearest_brute_force(p),
            };
            hit.expect("non-empty index")
        })
        .collect();
    let values = matches.iter().map(|&(i, _)| scale * records[i].value).collect();
    let provenance = matches
        .iter()
        .map(|&(record, d2)| Provenance::Matched { record, distance: d2.sqrt() })
        .collect();
    let meta = DataMeta { k, delta: None, source: "farfield".into() };
    ProcessedData::new(2.0 * k, grid, values, provenance, meta)
}
