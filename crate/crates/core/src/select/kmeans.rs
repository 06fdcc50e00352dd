//! Lloyd's k-means with k-means++ seeding and a single-point refinement pass.
//!
//! After the Lloyd assignment/update steps stop changing anything, each point
//! is tried in every other cluster with the exact change in within-cluster
//! sum of squares (WCSS) accounting for both means moving. Moves that lower
//! WCSS are applied, so the result is a local optimum under single-point
//! reassignment, not just a Lloyd fixed point. WCSS never increases from one
//! iteration to the next.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MOVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct KMeans {
    k: usize,
    seed: u64,
    max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<const D: usize> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<[f64; D]>,
    /// WCSS of the initial assignment followed by one entry per iteration.
    pub wcss_history: Vec<f64>,
    pub converged: bool,
}

impl<const D: usize> KMeansResult<D> {
    pub fn wcss(&self) -> f64 {
        self.wcss_history.last().copied().unwrap_or(0.0)
    }
}

pub fn squared_distance<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sum of squared distances of each point to the mean of its cluster.
pub fn wcss<const D: usize>(points: &[[f64; D]], assignments: &[usize], k: usize) -> f64 {
    let means = cluster_means(points, assignments, k, None);
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| squared_distance(p, &means[a]))
        .sum()
}

fn cluster_means<const D: usize>(
    points: &[[f64; D]],
    assignments: &[usize],
    k: usize,
    previous: Option<&[[f64; D]]>,
) -> Vec<[f64; D]> {
    let mut sums = vec![[0.0; D]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.iter()
        .zip(&counts)
        .enumerate()
        .map(|(c, (sum, &n))| {
            if n == 0 {
                previous.map(|p| p[c]).unwrap_or([0.0; D])
            } else {
                sum.map(|s| s / n as f64)
            }
        })
        .collect()
}

impl KMeans {
    pub fn new(k: usize, seed: u64, max_iter: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("cluster count must be at least 1".into()));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(KMeans { k, seed, max_iter })
    }

    /// Clusters `points` into exactly `k` groups. Groups stay empty only when
    /// there are fewer distinct points than `k`.
    pub fn fit<const D: usize>(&self, points: &[[f64; D]]) -> KMeansResult<D> {
        let k = self.k;
        if points.is_empty() {
            return KMeansResult {
                assignments: Vec::new(),
                centroids: vec![[0.0; D]; k],
                wcss_history: vec![0.0],
                converged: true,
            };
        }

        let mut centroids = self.init_plus_plus(points);
        let mut assignments: Vec<usize> = points
            .iter()
            .map(|p| nearest(p, &centroids, None))
            .collect();
        centroids = cluster_means(points, &assignments, k, Some(&centroids));
        let mut history = vec![wcss(points, &assignments, k)];
        let mut converged = false;

        for _ in 0..self.max_iter {
            let mut changed = reseed_empty(points, &mut assignments, &mut centroids);

            for (p, a) in points.iter().zip(assignments.iter_mut()) {
                let best = nearest(p, &centroids, Some(*a));
                if best != *a {
                    *a = best;
                    changed = true;
                }
            }
            centroids = cluster_means(points, &assignments, k, Some(&centroids));

            if !changed {
                changed = refine(points, &mut assignments, &mut centroids);
            }
            history.push(wcss(points, &assignments, k));
            if !changed {
                converged = true;
                break;
            }
        }

        KMeansResult {
            assignments,
            centroids,
            wcss_history: history,
            converged,
        }
    }

    fn init_plus_plus<const D: usize>(&self, points: &[[f64; D]]) -> Vec<[f64; D]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut centroids = Vec::with_capacity(self.k);
        centroids.push(points[rng.random_range(0..points.len())]);
        let mut d2: Vec<f64> = points
            .iter()
            .map(|p| squared_distance(p, &centroids[0]))
            .collect();
        while centroids.len() < self.k {
            let total: f64 = d2.iter().sum();
            if total <= 0.0 {
                break;
            }
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            let Some(pick) = pick else { break };
            let c = points[pick];
            for (d, p) in d2.iter_mut().zip(points) {
                *d = d.min(squared_distance(p, &c));
            }
            centroids.push(c);
        }
        // coincident data: pad with copies, which stay empty under lowest-index ties
        while centroids.len() < self.k {
            centroids.push(centroids[0]);
        }
        centroids
    }
}

/// Nearest centroid; ties keep `current`, otherwise the lowest index.
fn nearest<const D: usize>(p: &[f64; D], centroids: &[[f64; D]], current: Option<usize>) -> usize {
    let mut best = current.unwrap_or(0);
    let mut best_d = squared_distance(p, &centroids[best]);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Moves the point farthest from its centroid into each empty cluster.
fn reseed_empty<const D: usize>(
    points: &[[f64; D]],
    assignments: &mut [usize],
    centroids: &mut Vec<[f64; D]>,
) -> bool {
    let k = centroids.len();
    let mut changed = false;
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return changed;
        };
        let farthest = points
            .iter()
            .zip(assignments.iter())
            .enumerate()
            .map(|(i, (p, &a))| (i, squared_distance(p, &centroids[a])))
            .filter(|&(i, d)| d > 0.0 && sizes[assignments[i]] > 1)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
        let Some((i, _)) = farthest else {
            return changed;
        };
        assignments[i] = empty;
        *centroids = cluster_means(points, assignments, k, Some(centroids));
        centroids[empty] = points[i];
        changed = true;
    }
}

/// Single-point moves that strictly lower WCSS, applied greedily.
fn refine<const D: usize>(
    points: &[[f64; D]],
    assignments: &mut [usize],
    centroids: &mut Vec<[f64; D]>,
) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut changed = false;
    for i in 0..points.len() {
        let from = assignments[i];
        let n_from = sizes[from];
        if n_from <= 1 {
            continue;
        }
        let removal = n_from as f64 / (n_from - 1) as f64
            * squared_distance(&points[i], &centroids[from]);
        let mut best: Option<(usize, f64)> = None;
        for to in (0..k).filter(|&c| c != from) {
            let n_to = sizes[to];
            let added = if n_to == 0 {
                0.0
            } else {
                n_to as f64 / (n_to + 1) as f64 * squared_distance(&points[i], &centroids[to])
            };
            let delta = added - removal;
            if delta < -MOVE_EPS && best.is_none_or(|(_, d)| delta < d) {
                best = Some((to, delta));
            }
        }
        if let Some((to, _)) = best {
            assignments[i] = to;
            sizes[from] -= 1;
            sizes[to] += 1;
            *centroids = cluster_means(points, assignments, k, Some(centroids));
            changed = true;
        }
    }
    changed
}
