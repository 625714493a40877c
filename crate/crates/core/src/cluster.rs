//! K-means co-clustering of the row-normalized embedding, with
//! cluster-centrality diagnostics.
//!
//! Each side (citizens, posts) is clustered independently: k-means++ seeding,
//! Lloyd iterations, best of `restarts` runs by within-cluster sum of
//! squares. Restarts fan out across threads with per-restart derived seeds
//! and the winner is chosen by `(inertia, restart index)`, so the outcome is
//! independent of scheduling. Nodes whose embedding row was flagged as zero
//! do not participate in k-means; they are assigned to the centroid nearest
//! the origin afterwards and marked low-confidence.

use rand::Rng;
use rayon::prelude::*;

use crate::dense::{dot, Mat};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::spectral::SpectralEmbedding;

#[derive(Clone, Copy, Debug)]
pub struct KmeansParams {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KmeansParams {
    pub fn new(restarts: usize, seed: u64) -> KmeansParams {
        KmeansParams {
            restarts,
            seed,
            max_iter: 300,
            tol: 1e-9,
        }
    }
}

impl Default for KmeansParams {
    fn default() -> Self {
        KmeansParams::new(50, 0)
    }
}

#[derive(Clone, Debug)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    /// k x dim, one centroid per row.
    pub centroids: Mat,
    pub inertia: f64,
}

/// Lloyd's algorithm on the rows of `points`, best of `params.restarts`
/// k-means++ seeded runs. Nearest-centroid ties break to the lowest cluster
/// index; empty clusters are repaired by reseeding at the point farthest from
/// its assigned centroid.
pub fn kmeans(points: &Mat, k: usize, params: &KmeansParams) -> Result<KmeansResult> {
    let n = points.n_rows();
    let dim = points.n_cols();
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n_points: n });
    }
    if params.restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }

    // Row-major copy so the assignment loop streams.
    let mut rows = vec![0.0; n * dim];
    for i in 0..n {
        points.row_copy(i, &mut rows[i * dim..(i + 1) * dim]);
    }
    let rows = &rows;

    let best = (0..params.restarts)
        .into_par_iter()
        .map(|restart| {
            let seed = derive_seed(params.seed, &[restart as u64]);
            let run = lloyd_single(rows, n, dim, k, seed, params.max_iter, params.tol);
            (run, restart)
        })
        .min_by(|(a, ra), (b, rb)| {
            a.inertia
                .partial_cmp(&b.inertia)
                .unwrap()
                .then(ra.cmp(rb))
        })
        .expect("at least one restart");

    Ok(best.0)
}

fn lloyd_single(
    rows: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> KmeansResult {
    let mut rng = rng_from_seed(seed);
    let mut centroids = plus_plus_init(rows, n, dim, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0f64; n];
    let mut counts = vec![0usize; k];

    for _ in 0..max_iter {
        assign(rows, n, dim, &centroids, k, &mut labels, &mut dists);
        repair_empty_clusters(rows, n, dim, k, &mut centroids, &mut labels, &mut dists);

        // Means of assigned points.
        let mut next = vec![0.0f64; k * dim];
        counts.fill(0);
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            let acc = &mut next[c * dim..(c + 1) * dim];
            for (a, &x) in acc.iter_mut().zip(&rows[i * dim..(i + 1) * dim]) {
                *a += x;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                // Keep the (repaired) centroid as is.
                next[c * dim..(c + 1) * dim].copy_from_slice(&centroids[c * dim..(c + 1) * dim]);
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let mut moved = 0.0;
            for (slot, &old) in next[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(&centroids[c * dim..(c + 1) * dim])
            {
                *slot *= inv;
                let d = *slot - old;
                moved += d * d;
            }
            movement = movement.max(moved.sqrt());
        }
        centroids = next;
        if movement < tol {
            break;
        }
    }

    // Final sync of labels/inertia with the final centroids.
    assign(rows, n, dim, &centroids, k, &mut labels, &mut dists);
    repair_empty_clusters(rows, n, dim, k, &mut centroids, &mut labels, &mut dists);
    let inertia: f64 = dists.iter().sum();

    let mut centroid_mat = Mat::zeros(k, dim);
    for c in 0..k {
        for d in 0..dim {
            centroid_mat.set(c, d, centroids[c * dim + d]);
        }
    }
    KmeansResult {
        labels,
        centroids: centroid_mat,
        inertia,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn plus_plus_init(rows: &[f64], n: usize, dim: usize, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut centroids = vec![0.0f64; k * dim];
    let first = rng.random_range(0..n);
    centroids[..dim].copy_from_slice(&rows[first * dim..(first + 1) * dim]);

    let mut dist2: Vec<f64> = (0..n)
        .map(|i| sq_dist(&rows[i * dim..(i + 1) * dim], &centroids[..dim]))
        .collect();
    for c in 1..k {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate points); any index works.
            rng.random_range(0..n)
        };
        let slot = &mut centroids[c * dim..(c + 1) * dim];
        slot.copy_from_slice(&rows[pick * dim..(pick + 1) * dim]);
        for i in 0..n {
            let d = sq_dist(&rows[i * dim..(i + 1) * dim], &centroids[c * dim..(c + 1) * dim]);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }
    centroids
}

fn assign(
    rows: &[f64],
    n: usize,
    dim: usize,
    centroids: &[f64],
    k: usize,
    labels: &mut [usize],
    dists: &mut [f64],
) {
    for i in 0..n {
        let row = &rows[i * dim..(i + 1) * dim];
        let mut best = 0usize;
        let mut best_d = sq_dist(row, &centroids[..dim]);
        for c in 1..k {
            let d = sq_dist(row, &centroids[c * dim..(c + 1) * dim]);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
    }
}

fn repair_empty_clusters(
    rows: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    centroids: &mut [f64],
    labels: &mut [usize],
    dists: &mut [f64],
) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        // Reseed at the point farthest from its assigned centroid, among
        // clusters that can spare a point.
        let mut far_i = None;
        let mut far_d = -1.0;
        for i in 0..n {
            if counts[labels[i]] <= 1 {
                continue;
            }
            if dists[i] > far_d {
                far_d = dists[i];
                far_i = Some(i);
            }
        }
        let Some(i) = far_i else { continue };
        counts[labels[i]] -= 1;
        labels[i] = empty;
        counts[empty] = 1;
        centroids[empty * dim..(empty + 1) * dim].copy_from_slice(&rows[i * dim..(i + 1) * dim]);
        dists[i] = 0.0;
    }
}

// ---------------------------------------------------------------------------
// Co-clustering
// ---------------------------------------------------------------------------

/// Cluster assignments of both node sets plus diagnostics. Labels are
/// 0-based; text exports print them 1-based.
#[derive(Clone, Debug)]
pub struct CoClustering {
    pub citizen_labels: Vec<usize>,
    pub post_labels: Vec<usize>,
    pub citizen_centroids: Mat,
    pub post_centroids: Mat,
    /// Inner product of each node's normalized embedding row with its
    /// cluster centroid; zero-row nodes get 0.
    pub citizen_centrality: Vec<f64>,
    pub post_centrality: Vec<f64>,
    pub citizen_inertia: f64,
    pub post_inertia: f64,
    /// Zero-embedding nodes whose assignment is deterministic but not
    /// data-driven.
    pub low_confidence_citizens: Vec<usize>,
    pub low_confidence_posts: Vec<usize>,
    pub k_c: usize,
    pub k_p: usize,
    pub n_restarts: usize,
    pub seed: u64,
}

/// Clusters the normalized embedding rows into `k_c` citizen clusters and
/// `k_p` post clusters.
pub fn fit(
    embedding: &SpectralEmbedding,
    k_c: usize,
    k_p: usize,
    params: &KmeansParams,
) -> Result<CoClustering> {
    let u_c_star = embedding.u_c_star.as_ref().ok_or_else(|| {
        Error::invalid("embedding", "rows must be normalized before clustering")
    })?;
    let u_p_star = embedding.u_p_star.as_ref().ok_or_else(|| {
        Error::invalid("embedding", "rows must be normalized before clustering")
    })?;

    let citizen_seed = derive_seed(params.seed, &[0]);
    let post_seed = derive_seed(params.seed, &[1]);
    let side_c = cluster_side(
        u_c_star,
        &embedding.zero_rows_c,
        k_c,
        &KmeansParams {
            seed: citizen_seed,
            ..*params
        },
    )?;
    let side_p = cluster_side(
        u_p_star,
        &embedding.zero_rows_p,
        k_p,
        &KmeansParams {
            seed: post_seed,
            ..*params
        },
    )?;

    Ok(CoClustering {
        citizen_labels: side_c.labels,
        post_labels: side_p.labels,
        citizen_centroids: side_c.centroids,
        post_centroids: side_p.centroids,
        citizen_centrality: side_c.centrality,
        post_centrality: side_p.centrality,
        citizen_inertia: side_c.inertia,
        post_inertia: side_p.inertia,
        low_confidence_citizens: side_c.low_confidence,
        low_confidence_posts: side_p.low_confidence,
        k_c,
        k_p,
        n_restarts: params.restarts,
        seed: params.seed,
    })
}

struct SideResult {
    labels: Vec<usize>,
    centroids: Mat,
    centrality: Vec<f64>,
    inertia: f64,
    low_confidence: Vec<usize>,
}

fn cluster_side(
    star: &Mat,
    zero_rows: &[usize],
    k: usize,
    params: &KmeansParams,
) -> Result<SideResult> {
    let n = star.n_rows();
    let dim = star.n_cols();
    let zero_set: std::collections::HashSet<usize> = zero_rows.iter().copied().collect();
    let active: Vec<usize> = (0..n).filter(|i| !zero_set.contains(i)).collect();

    let mut active_rows = Mat::zeros(active.len(), dim);
    let mut row = vec![0.0; dim];
    for (dst, &src) in active.iter().enumerate() {
        star.row_copy(src, &mut row);
        for (j, &x) in row.iter().enumerate() {
            active_rows.set(dst, j, x);
        }
    }

    let km = kmeans(&active_rows, k, params)?;

    // Zero-row nodes go to the centroid nearest the origin (ties: lowest).
    let zero_cluster = {
        let mut best = 0usize;
        let mut best_norm = f64::INFINITY;
        let mut c_row = vec![0.0; dim];
        for c in 0..k {
            km.centroids.row_copy(c, &mut c_row);
            let norm = dot(&c_row, &c_row);
            if norm < best_norm {
                best_norm = norm;
                best = c;
            }
        }
        best
    };

    let mut labels = vec![zero_cluster; n];
    for (dst, &src) in active.iter().enumerate() {
        labels[src] = km.labels[dst];
    }

    let mut centrality = vec![0.0; n];
    let mut c_row = vec![0.0; dim];
    for i in 0..n {
        if zero_set.contains(&i) {
            continue;
        }
        star.row_copy(i, &mut row);
        km.centroids.row_copy(labels[i], &mut c_row);
        centrality[i] = dot(&row, &c_row);
    }

    Ok(SideResult {
        labels,
        centroids: km.centroids,
        centrality,
        inertia: km.inertia,
        low_confidence: zero_rows.to_vec(),
    })
}

impl CoClustering {
    /// Member ids of a citizen cluster ordered by centrality (descending,
    /// ties by id), truncated to `top_n`.
    pub fn central_citizens(&self, cluster: usize, top_n: usize) -> Result<Vec<usize>> {
        central_members(
            &self.citizen_labels,
            &self.citizen_centrality,
            self.k_c,
            cluster,
            top_n,
        )
    }

    pub fn central_posts(&self, cluster: usize, top_n: usize) -> Result<Vec<usize>> {
        central_members(
            &self.post_labels,
            &self.post_centrality,
            self.k_p,
            cluster,
            top_n,
        )
    }
}

fn central_members(
    labels: &[usize],
    centrality: &[f64],
    k: usize,
    cluster: usize,
    top_n: usize,
) -> Result<Vec<usize>> {
    if cluster >= k {
        return Err(Error::UnknownCluster {
            cluster,
            n_clusters: k,
        });
    }
    let mut members: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == cluster)
        .map(|(i, _)| i)
        .collect();
    members.sort_by(|&a, &b| {
        centrality[b]
            .partial_cmp(&centrality[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    members.truncate(top_n);
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_from_rows(rows: &[&[f64]]) -> Mat {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    /// Exhaustive minimum inertia over all assignments of `points` into at
    /// most `k` clusters.
    fn brute_force_inertia(points: &Mat, k: usize) -> f64 {
        let n = points.n_rows();
        let dim = points.n_cols();
        let mut best = f64::INFINITY;
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut labels = vec![0usize; n];
            let mut c = code;
            for l in labels.iter_mut() {
                *l = c % k;
                c /= k;
            }
            let mut sums = vec![0.0; k * dim];
            let mut counts = vec![0usize; k];
            for i in 0..n {
                counts[labels[i]] += 1;
                for j in 0..dim {
                    sums[labels[i] * dim + j] += points.get(i, j);
                }
            }
            let mut inertia = 0.0;
            for i in 0..n {
                let c = labels[i];
                for j in 0..dim {
                    let mean = sums[c * dim + j] / counts[c] as f64;
                    let d = points.get(i, j) - mean;
                    inertia += d * d;
                }
            }
            best = best.min(inertia);
        }
        best
    }

    #[test]
    fn separates_two_clouds_and_matches_brute_force() {
        let points = mat_from_rows(&[
            &[0.0, 0.1],
            &[0.1, -0.1],
            &[-0.1, 0.0],
            &[5.0, 5.1],
            &[5.1, 4.9],
            &[4.9, 5.0],
        ]);
        let r = kmeans(&points, 2, &KmeansParams::new(20, 3)).unwrap();
        assert_eq!(r.labels[0], r.labels[1]);
        assert_eq!(r.labels[1], r.labels[2]);
        assert_eq!(r.labels[3], r.labels[4]);
        assert_eq!(r.labels[4], r.labels[5]);
        assert_ne!(r.labels[0], r.labels[3]);
        let oracle = brute_force_inertia(&points, 2);
        assert!((r.inertia - oracle).abs() < 1e-9);
    }

    #[test]
    fn identical_points_collapse() {
        let points = mat_from_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let r = kmeans(&points, 2, &KmeansParams::new(5, 1)).unwrap();
        assert!(r.inertia.abs() < 1e-30);
    }

    #[test]
    fn cube_corners_each_own_cluster() {
        let corners: Vec<Vec<f64>> = (0..8)
            .map(|c| {
                (0..3)
                    .map(|b| if (c >> b) & 1 == 1 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let rows: Vec<&[f64]> = corners.iter().map(|r| r.as_slice()).collect();
        let points = mat_from_rows(&rows);
        let r = kmeans(&points, 8, &KmeansParams::new(50, 7)).unwrap();
        let mut seen = r.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert!(r.inertia.abs() < 1e-30);
    }

    #[test]
    fn brute_force_oracle_on_random_points() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(99);
        for trial in 0..5 {
            let n = 8;
            let points = Mat::from_fn(n, 2, |_, _| rng.random::<f64>());
            let k = 3;
            let r = kmeans(&points, k, &KmeansParams::new(200, trial)).unwrap();
            let oracle = brute_force_inertia(&points, k);
            assert!(
                (r.inertia - oracle).abs() < 1e-9,
                "trial {trial}: {} vs {}",
                r.inertia,
                oracle
            );
        }
    }

    #[test]
    fn too_many_clusters_rejected() {
        let points = mat_from_rows(&[&[0.0], &[1.0]]);
        assert!(kmeans(&points, 3, &KmeansParams::default()).is_err());
    }

    #[test]
    fn restart_winner_is_deterministic() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(5);
        let points = Mat::from_fn(30, 3, |_, _| rng.random::<f64>());
        let a = kmeans(&points, 4, &KmeansParams::new(16, 42)).unwrap();
        let b = kmeans(&points, 4, &KmeansParams::new(16, 42)).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }

    fn embedding_from_rows(rows_c: &[&[f64]], rows_p: &[&[f64]]) -> SpectralEmbedding {
        let e = SpectralEmbedding {
            u_c: mat_from_rows(rows_c),
            u_p: mat_from_rows(rows_p),
            sigma: vec![1.0; rows_c[0].len()],
            u_c_star: None,
            u_p_star: None,
            zero_rows_c: vec![],
            zero_rows_p: vec![],
            residuals: vec![],
        };
        crate::spectral::normalize_rows(e)
    }

    #[test]
    fn fit_single_cluster_centrality_is_alignment() {
        let e = embedding_from_rows(
            &[&[1.0, 0.0], &[0.8, 0.6], &[0.0, 1.0]],
            &[&[1.0, 0.0], &[0.0, 1.0]],
        );
        let cc = fit(&e, 1, 1, &KmeansParams::new(5, 2)).unwrap();
        assert!(cc.citizen_labels.iter().all(|&l| l == 0));
        // centrality = <row, mean of rows>, all in [-1, 1]
        for &rho in &cc.citizen_centrality {
            assert!((-1.0..=1.0).contains(&rho));
        }
    }

    #[test]
    fn fit_requires_normalized_embedding() {
        let e = SpectralEmbedding {
            u_c: Mat::zeros(3, 2),
            u_p: Mat::zeros(2, 2),
            sigma: vec![1.0, 0.5],
            u_c_star: None,
            u_p_star: None,
            zero_rows_c: vec![],
            zero_rows_p: vec![],
            residuals: vec![],
        };
        assert!(fit(&e, 1, 1, &KmeansParams::default()).is_err());
    }

    #[test]
    fn zero_rows_are_assigned_and_flagged() {
        let mut e = embedding_from_rows(
            &[&[1.0, 0.0], &[0.9, 0.1], &[-1.0, 0.0], &[-0.9, -0.1], &[0.0, 0.0]],
            &[&[1.0, 0.0], &[0.0, 1.0]],
        );
        // Row 4 is zero: normalize_rows flags it.
        e.zero_rows_c = vec![4];
        let star = e.u_c_star.as_mut().unwrap();
        star.set(4, 0, 0.0);
        star.set(4, 1, 0.0);
        let cc = fit(&e, 2, 2, &KmeansParams::new(10, 9)).unwrap();
        assert_eq!(cc.low_confidence_citizens, vec![4]);
        assert!(cc.citizen_labels[4] < 2);
        assert_eq!(cc.citizen_centrality[4], 0.0);
    }

    #[test]
    fn central_members_order_and_bounds() {
        let e = embedding_from_rows(
            &[&[1.0, 0.0], &[0.9, 0.436], &[0.7, 0.714], &[0.0, 1.0]],
            &[&[1.0, 0.0], &[0.0, 1.0]],
        );
        let cc = fit(&e, 1, 1, &KmeansParams::new(5, 4)).unwrap();
        let members = cc.central_citizens(0, 10).unwrap();
        assert_eq!(members.len(), 4);
        for w in members.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(
                cc.citizen_centrality[a] > cc.citizen_centrality[b]
                    || (cc.citizen_centrality[a] == cc.citizen_centrality[b] && a < b)
            );
        }
        assert!(cc.central_citizens(1, 1).is_err());
        // Single-member cluster comes back as itself.
        let solo = cc.central_citizens(0, 1).unwrap();
        assert_eq!(solo.len(), 1);
    }

    #[test]
    fn unit_rows_at_centroid_have_rho_one() {
        // Two tight groups of identical unit rows: centroid == row, rho == 1.
        let e = embedding_from_rows(
            &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]],
            &[&[1.0, 0.0], &[0.0, 1.0]],
        );
        let cc = fit(&e, 2, 2, &KmeansParams::new(10, 8)).unwrap();
        for &rho in &cc.citizen_centrality {
            assert!((rho - 1.0).abs() < 1e-12);
        }
        // Ties in rho fall back to id order.
        let members = cc.central_citizens(cc.citizen_labels[0], 4).unwrap();
        for w in members.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
