//! Subgroup discovery among flagged rows.
//!
//! Rows are embedded with the leading eigenvectors of the normalized
//! affinity `D^-1/2 A D^-1/2`, where `A_ij = exp(-gamma * Ham) + eps`, then
//! grouped by k-means. The number of groups maximizes the mean silhouette
//! (raw Hamming distance) and each group is summarized by its medoid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::CategoricalDataset;
use crate::kpca::hamming_unchecked;
use crate::linalg;
use crate::math;
use crate::parallel::map_indexed;
use crate::rng;
use crate::{Error, Result};

/// Numerical floor added to every affinity.
pub const AFFINITY_FLOOR: f64 = 1e-12;

pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub gamma: f64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            restarts: 10,
            max_iterations: 300,
            seed: 0,
        }
    }
}

/// Spectral embedding of the rows of `d`: `m x k`, row-major, unit rows.
pub fn spectral_embedding(d: &CategoricalDataset, k: usize, gamma: f64) -> Vec<f64> {
    let rows: Vec<&[u32]> = (0..d.n_rows()).map(|i| d.row(i)).collect();
    embed(&rows, k, gamma)
}

fn embed(rows: &[&[u32]], k: usize, gamma: f64) -> Vec<f64> {
    let m = rows.len();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = math::exp(-gamma * hamming_unchecked(rows[i], rows[j]) as f64) + AFFINITY_FLOOR;
            a[i * m + j] = v;
            a[j * m + i] = v;
        }
    }
    let inv_sqrt: Vec<f64> = (0..m)
        .map(|i| 1.0 / math::sqrt(a[i * m..(i + 1) * m].iter().sum::<f64>()))
        .collect();
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = linalg::symmetric_eigen(&a, m);
    let mut emb = vec![0.0; m * k];
    for c in 0..k {
        for (i, v) in eig.vector(c).iter().enumerate() {
            emb[i * k + c] = *v;
        }
    }
    for row in emb.chunks_mut(k) {
        let norm = math::sqrt(row.iter().map(|v| v * v).sum());
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    emb
}

/// Partitions the rows of `d` into `k` groups. Labels are numbered by first
/// appearance.
///
/// Rows are processed in lexicographic order of their codes, so the
/// partition does not depend on the input row order.
pub fn spectral_cluster(d: &CategoricalDataset, k: usize, cfg: &SpectralConfig) -> Result<Vec<usize>> {
    let m = d.n_rows();
    if k < 2 {
        return Err(Error::InvalidConfig("spectral clustering needs k >= 2".into()));
    }
    if m < k {
        return Err(Error::TooFewItems { needed: k, got: m });
    }
    if m == k {
        return Ok((0..m).collect());
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d.row(a).cmp(d.row(b)));
    let rows: Vec<&[u32]> = order.iter().map(|&i| d.row(i)).collect();
    let emb = embed(&rows, k, cfg.gamma);
    // second coordinate orders rows along the leading nontrivial direction
    let line: Vec<f64> = (0..m).map(|i| emb[i * k + 1]).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..cfg.restarts.max(1) {
        let centers = if r == 0 {
            segment_centers(&emb, k, &line)
        } else {
            let mut rng = rng::seeded(rng::derive_seed(cfg.seed, &[r as u64]));
            plus_plus_centers(&emb, k, &mut rng)
        };
        let (inertia, labels) = lloyd(&emb, k, centers, cfg.max_iterations);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    let canonical = best.expect("at least one restart").1;
    let mut labels = vec![0; m];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = canonical[pos];
    }
    Ok(relabel_by_appearance(&labels))
}

pub fn relabel_by_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Optimal contiguous `k`-partition of `values` in sorted order (minimum
/// total within-segment sum of squares), as sorted-position cut points.
pub fn optimal_segments(values: &[f64], k: usize) -> Vec<usize> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut s1 = vec![0.0; m + 1];
    let mut s2 = vec![0.0; m + 1];
    for i in 0..m {
        s1[i + 1] = s1[i] + sorted[i];
        s2[i + 1] = s2[i] + sorted[i] * sorted[i];
    }
    let cost = |a: usize, b: usize| {
        let n = (b - a) as f64;
        let t = s1[b] - s1[a];
        (s2[b] - s2[a] - t * t / n).max(0.0)
    };
    // dp[g][j]: best cost of the first j values in g + 1 segments
    let mut dp = vec![vec![f64::INFINITY; m + 1]; k];
    let mut arg = vec![vec![0usize; m + 1]; k];
    for j in 1..=m {
        dp[0][j] = cost(0, j);
    }
    for g in 1..k {
        for j in g + 1..=m {
            for s in g..j {
                let v = dp[g - 1][s] + cost(s, j);
                if v < dp[g][j] {
                    dp[g][j] = v;
                    arg[g][j] = s;
                }
            }
        }
    }
    let mut cuts = vec![m; k];
    let mut j = m;
    for g in (1..k).rev() {
        j = arg[g][j];
        cuts[g - 1] = j;
    }
    let mut seg = vec![0usize; m];
    let mut start = 0;
    for (g, &end) in cuts.iter().enumerate() {
        for &i in &order[start..end] {
            seg[i] = g;
        }
        start = end;
    }
    seg
}

fn segment_centers(emb: &[f64], k: usize, line: &[f64]) -> Vec<f64> {
    let seg = optimal_segments(line, k);
    let mut centers = vec![0.0; k * k];
    let mut counts = vec![0usize; k];
    for (i, &g) in seg.iter().enumerate() {
        counts[g] += 1;
        for c in 0..k {
            centers[g * k + c] += emb[i * k + c];
        }
    }
    for g in 0..k {
        let n = counts[g].max(1) as f64;
        centers[g * k..(g + 1) * k].iter_mut().for_each(|v| *v /= n);
    }
    centers
}

fn plus_plus_centers<R: Rng>(emb: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let m = emb.len() / k;
    let mut centers = Vec::with_capacity(k * k);
    let first = rng.random_range(0..m);
    centers.extend_from_slice(&emb[first * k..(first + 1) * k]);
    let mut dist: Vec<f64> = (0..m)
        .map(|i| sq_dist(&emb[i * k..(i + 1) * k], &centers[..k]))
        .collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = m - 1;
            for (i, &dd) in dist.iter().enumerate() {
                if u < dd {
                    pick = i;
                    break;
                }
                u -= dd;
            }
            pick
        } else {
            rng.random_range(0..m)
        };
        let c = emb[pick * k..(pick + 1) * k].to_vec();
        for (i, dd) in dist.iter_mut().enumerate() {
            *dd = dd.min(sq_dist(&emb[i * k..(i + 1) * k], &c));
        }
        centers.extend(c);
    }
    centers
}

/// Lloyd iterations from `centers`; returns inertia and labels.
fn lloyd(emb: &[f64], k: usize, mut centers: Vec<f64>, max_iterations: usize) -> (f64, Vec<usize>) {
    let m = emb.len() / k;
    let mut labels = vec![usize::MAX; m];
    for _ in 0..max_iterations.max(1) {
        let mut changed = false;
        for i in 0..m {
            let x = &emb[i * k..(i + 1) * k];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for g in 0..k {
                let dd = sq_dist(x, &centers[g * k..(g + 1) * k]);
                if dd < best_d {
                    best_d = dd;
                    best = g;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0; k * k];
        for i in 0..m {
            counts[labels[i]] += 1;
            for c in 0..k {
                sums[labels[i] * k + c] += emb[i * k + c];
            }
        }
        for g in 0..k {
            if counts[g] == 0 {
                // move the point farthest from its center into the empty group
                let far = (0..m)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&emb[a * k..(a + 1) * k], &centers[labels[a] * k..(labels[a] + 1) * k]);
                        let db = sq_dist(&emb[b * k..(b + 1) * k], &centers[labels[b] * k..(labels[b] + 1) * k]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("m >= k");
                centers[g * k..(g + 1) * k].copy_from_slice(&emb[far * k..(far + 1) * k]);
                changed = true;
            } else {
                for c in 0..k {
                    centers[g * k + c] = sums[g * k + c] / counts[g] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..m)
        .map(|i| sq_dist(&emb[i * k..(i + 1) * k], &centers[labels[i] * k..(labels[i] + 1) * k]))
        .sum();
    (inertia, labels)
}

/// Mean silhouette with Hamming distance. Items alone in their cluster
/// score 0, as do items with `a = b = 0`.
pub fn silhouette(d: &CategoricalDataset, assignment: &[usize]) -> Result<f64> {
    let m = d.n_rows();
    if assignment.len() != m {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: m,
        });
    }
    let k = assignment.iter().max().map_or(0, |&g| g + 1);
    let mut sizes = vec![0usize; k];
    for &g in assignment {
        sizes[g] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }
    let per_item = map_indexed(m, |i| {
        let own = assignment[i];
        if sizes[own] == 1 {
            return 0.0;
        }
        let mut totals = vec![0.0; k];
        for j in 0..m {
            if j != i {
                totals[assignment[j]] += hamming_unchecked(d.row(i), d.row(j)) as f64;
            }
        }
        let a = totals[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&g| g != own && sizes[g] > 0)
            .map(|g| totals[g] / sizes[g] as f64)
            .fold(f64::INFINITY, f64::min);
        let top = a.max(b);
        if top == 0.0 {
            0.0
        } else {
            (b - a) / top
        }
    });
    Ok(per_item.iter().sum::<f64>() / m as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupPartition {
    /// Row ids, in the parent dataset, of the profiled rows.
    pub rows: Vec<usize>,
    /// Cluster of each profiled row.
    pub assignment: Vec<usize>,
    pub k: usize,
    /// Mean silhouette per candidate `k`.
    pub silhouettes: Vec<(usize, f64)>,
}

/// Clusters `rows` of `d` for every `k` in `2..=k_max` and keeps the `k`
/// with the highest mean silhouette (ties to the smaller `k`).
pub fn select_k(
    d: &CategoricalDataset,
    rows: &[usize],
    k_max: usize,
    cfg: &SpectralConfig,
) -> Result<SubgroupPartition> {
    let m = rows.len();
    if k_max < 2 {
        return Err(Error::InvalidConfig("k_max must be at least 2".into()));
    }
    if m < 3 || k_max > m - 1 {
        return Err(Error::TooFewItems {
            needed: (k_max + 1).max(3),
            got: m,
        });
    }
    let sub = d.subset(rows)?;
    let runs = map_indexed(k_max - 1, |i| -> Result<(Vec<usize>, f64)> {
        let assignment = spectral_cluster(&sub, i + 2, cfg)?;
        let s = silhouette(&sub, &assignment)?;
        Ok((assignment, s))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 > runs[best].1 {
            best = i;
        }
    }
    let silhouettes = runs.iter().enumerate().map(|(i, r)| (i + 2, r.1)).collect();
    Ok(SubgroupPartition {
        rows: rows.to_vec(),
        assignment: runs[best].0.clone(),
        k: best + 2,
        silhouettes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Medoid {
    pub cluster: usize,
    /// Row id in the parent dataset.
    pub row: usize,
    pub size: usize,
    pub labels: Vec<String>,
}

/// The member of each cluster with the least total Hamming distance to its
/// co-members; ties go to the lowest row id.
pub fn medoids(d: &CategoricalDataset, rows: &[usize], assignment: &[usize]) -> Result<Vec<Medoid>> {
    if rows.len() != assignment.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: assignment.len(),
        });
    }
    let k = assignment.iter().max().map_or(0, |&g| g + 1);
    let mut out = Vec::with_capacity(k);
    for g in 0..k {
        let members: Vec<usize> = (0..rows.len())
            .filter(|&i| assignment[i] == g)
            .map(|i| rows[i])
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for &c in &members {
            let total: usize = members
                .iter()
                .map(|&o| hamming_unchecked(d.row(c), d.row(o)))
                .sum();
            let better = match best {
                None => true,
                Some((bt, br)) => total < bt || (total == bt && c < br),
            };
            if better {
                best = Some((total, c));
            }
        }
        let row = best.expect("nonempty cluster").1;
        out.push(Medoid {
            cluster: g,
            row,
            size: members.len(),
            labels: (0..d.n_vars()).map(|v| String::from(d.label(row, v))).collect(),
        });
    }
    Ok(out)
}
