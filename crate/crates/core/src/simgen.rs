//! Block-model generators, the population similarity oracle, the
//! mis-clustering metric, and the benchmark harness.
//!
//! Two generators: the node-contextualized co-blockmodel (bipartite Bernoulli
//! graph with block-constant covariate means plus sub-gaussian noise) and the
//! degree-corrected document simulation (doc/doc links and doc/word
//! indicators with tunable graph and text signal levels, calibrated so the
//! expected links and words per document hit their targets).
//!
//! Sampling uses geometric jumps inside constant-probability index ranges,
//! so the cost is proportional to the number of edges drawn, not to the
//! number of candidate cells.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cluster::KmeansParams;
use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::pipeline::{fit_matrices, Calibration, FitOptions, MatrixTreatment, TextWeight};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::sparse::{build_sparse, SparseMatrix};

// ---------------------------------------------------------------------------
// Node-contextualized co-blockmodel
// ---------------------------------------------------------------------------

/// Cluster memberships: fixed label vectors, or per-block probabilities to
/// sample them from.
#[derive(Clone, Debug)]
pub enum Membership {
    Explicit {
        citizens: Vec<usize>,
        posts: Vec<usize>,
    },
    Probabilities {
        citizens: Vec<f64>,
        posts: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct BlockModelSpec {
    pub n_citizens: usize,
    pub n_posts: usize,
    pub k_c: usize,
    pub k_p: usize,
    /// Edge probabilities per block pair, `k_c x k_p`, entries in [0, 1].
    pub b: Mat,
    /// Covariate means per citizen block, `k_c x m_c`.
    pub e_c: Mat,
    /// Covariate means per post block, `k_p x m_p`.
    pub e_p: Mat,
    pub membership: Membership,
    /// Standard deviation of the Gaussian covariate noise.
    pub noise: f64,
    /// Optional degree propensities (all ones when absent).
    pub theta_c: Option<Vec<f64>>,
    pub theta_p: Option<Vec<f64>>,
}

impl BlockModelSpec {
    /// Balanced explicit memberships (round-robin blocks).
    pub fn balanced(
        n_citizens: usize,
        n_posts: usize,
        b: Mat,
        e_c: Mat,
        e_p: Mat,
        noise: f64,
    ) -> BlockModelSpec {
        let k_c = b.n_rows();
        let k_p = b.n_cols();
        BlockModelSpec {
            n_citizens,
            n_posts,
            k_c,
            k_p,
            b,
            e_c,
            e_p,
            membership: Membership::Explicit {
                citizens: (0..n_citizens).map(|i| i % k_c).collect(),
                posts: (0..n_posts).map(|j| j % k_p).collect(),
            },
            noise,
            theta_c: None,
            theta_p: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.n_rows() != self.k_c || self.b.n_cols() != self.k_p {
            return Err(Error::invalid("b", "shape must be k_c x k_p"));
        }
        if self.e_c.n_rows() != self.k_c {
            return Err(Error::invalid("e_c", "must have k_c rows"));
        }
        if self.e_p.n_rows() != self.k_p {
            return Err(Error::invalid("e_p", "must have k_p rows"));
        }
        for r in 0..self.k_c {
            for c in 0..self.k_p {
                let v = self.b.get(r, c);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::ProbabilityOutOfRange {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
        }
        if let Membership::Explicit { citizens, posts } = &self.membership {
            if citizens.len() != self.n_citizens || posts.len() != self.n_posts {
                return Err(Error::invalid("membership", "label lengths must match node counts"));
            }
            for k in 0..self.k_c {
                if !citizens.contains(&k) {
                    return Err(Error::invalid(
                        "membership",
                        format!("citizen block {k} is empty"),
                    ));
                }
            }
            for k in 0..self.k_p {
                if !posts.contains(&k) {
                    return Err(Error::invalid(
                        "membership",
                        format!("post block {k} is empty"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Whether the block matrix has full rank `min(k_c, k_p)` (up to a
    /// crude numerical cutoff); rank-deficient specs are unidentifiable.
    pub fn is_identifiable(&self) -> bool {
        match crate::dense::jacobi_svd(&self.b) {
            Ok(f) => {
                let k = self.k_c.min(self.k_p);
                f.sigma[k - 1] > 1e-12 * f.sigma[0].max(1e-300)
            }
            Err(_) => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NcscbmSample {
    pub a: SparseMatrix,
    pub x: SparseMatrix,
    pub y: SparseMatrix,
    pub citizen_labels: Vec<usize>,
    pub post_labels: Vec<usize>,
}

fn sample_labels(rng: &mut ChaCha8Rng, n: usize, probs: &[f64]) -> Result<Vec<usize>> {
    let total: f64 = probs.iter().sum();
    if total.is_nan() || total <= 0.0 || probs.iter().any(|&p| p < 0.0) {
        return Err(Error::invalid(
            "membership",
            "probabilities must be nonnegative and sum > 0",
        ));
    }
    Ok((0..n)
        .map(|_| {
            let mut target = rng.random::<f64>() * total;
            for (k, &p) in probs.iter().enumerate() {
                target -= p;
                if target <= 0.0 {
                    return k;
                }
            }
            probs.len() - 1
        })
        .collect())
}

/// Indices in `0..n` hit by independent Bernoulli(p) draws, via geometric
/// jumps (one RNG draw per hit plus one per miss-run).
fn bernoulli_indices(rng: &mut ChaCha8Rng, n: usize, p: f64, out: &mut Vec<usize>) {
    if n == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..n);
        return;
    }
    let log_q = (-p).ln_1p(); // ln(1 - p), accurate for small p
    let mut i = 0usize;
    loop {
        let u: f64 = rng.random::<f64>();
        // Number of failures before the next success.
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n - i) as f64 {
            return;
        }
        i += skip as usize;
        out.push(i);
        i += 1;
        if i >= n {
            return;
        }
    }
}

/// Samples `(A, X, Y, labels)` from the co-blockmodel: `A[i][j] ~
/// Bernoulli(theta_i theta_j B[z_c(i)][z_p(j)])`, covariates are block means
/// plus Gaussian noise.
pub fn sample_ncscbm(spec: &BlockModelSpec, seed: u64) -> Result<NcscbmSample> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let citizen_labels;
    let post_labels;
    match &spec.membership {
        Membership::Explicit { citizens, posts } => {
            citizen_labels = citizens.clone();
            post_labels = posts.clone();
        }
        Membership::Probabilities { citizens, posts } => {
            citizen_labels = sample_labels(&mut rng, spec.n_citizens, citizens)?;
            post_labels = sample_labels(&mut rng, spec.n_posts, posts)?;
        }
    }

    // Posts grouped by block so each (row, block) range has constant p.
    let mut posts_by_block: Vec<Vec<usize>> = vec![Vec::new(); spec.k_p];
    for (j, &z) in post_labels.iter().enumerate() {
        posts_by_block[z].push(j);
    }

    let uniform_theta = spec.theta_c.is_none() && spec.theta_p.is_none();
    let ones_c;
    let ones_p;
    let theta_c = match &spec.theta_c {
        Some(t) => t.as_slice(),
        None => {
            ones_c = vec![1.0; spec.n_citizens];
            &ones_c
        }
    };
    let theta_p = match &spec.theta_p {
        Some(t) => t.as_slice(),
        None => {
            ones_p = vec![1.0; spec.n_posts];
            &ones_p
        }
    };

    let mut a_triplets = Vec::new();
    let mut hits = Vec::new();
    for i in 0..spec.n_citizens {
        let zc = citizen_labels[i];
        for (zp, members) in posts_by_block.iter().enumerate() {
            let base = spec.b.get(zc, zp);
            if uniform_theta {
                hits.clear();
                bernoulli_indices(&mut rng, members.len(), base, &mut hits);
                for &h in &hits {
                    a_triplets.push((i, members[h], 1.0));
                }
            } else {
                for &j in members {
                    let p = theta_c[i] * theta_p[j] * base;
                    if p > 1.0 {
                        return Err(Error::ProbabilityOutOfRange {
                            row: i,
                            col: j,
                            value: p,
                        });
                    }
                    if rng.random::<f64>() < p {
                        a_triplets.push((i, j, 1.0));
                    }
                }
            }
        }
    }
    let a = build_sparse(&a_triplets, spec.n_citizens, spec.n_posts)?;

    let x = sample_covariates(&mut rng, &citizen_labels, &spec.e_c, spec.noise)?;
    let y = sample_covariates(&mut rng, &post_labels, &spec.e_p, spec.noise)?;

    Ok(NcscbmSample {
        a,
        x,
        y,
        citizen_labels,
        post_labels,
    })
}

fn sample_covariates(
    rng: &mut ChaCha8Rng,
    labels: &[usize],
    means: &Mat,
    noise: f64,
) -> Result<SparseMatrix> {
    let m = means.n_cols();
    let mut triplets = Vec::new();
    for (i, &z) in labels.iter().enumerate() {
        for t in 0..m {
            let mut v = means.get(z, t);
            if noise > 0.0 {
                let g: f64 = StandardNormal.sample(rng);
                v += noise * g;
            }
            if v != 0.0 {
                triplets.push((i, t, v));
            }
        }
    }
    build_sparse(&triplets, labels.len(), m)
}

// ---------------------------------------------------------------------------
// Degree-corrected document simulation
// ---------------------------------------------------------------------------

/// Degree propensities for the document simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegreeMode {
    /// All propensities 1 (plain blockmodel degrees).
    Uniform,
    /// Propensities drawn iid from a Pareto tail truncated to
    /// `[1, max_ratio]` with the given exponent, rescaled to unit mean.
    PowerLaw { exponent: f64, max_ratio: f64 },
    /// Propensities `low` or `high` with equal probability (the classic
    /// two-value degree-corrected test pattern), rescaled to unit mean.
    TwoPoint { low: f64, high: f64 },
}

/// Document-simulation shape: `n_docs` documents linked doc-to-doc and
/// containing words from an `n_words` dictionary, two blocks on each side.
#[derive(Clone, Copy, Debug)]
pub struct DocSimConfig {
    pub n_docs: usize,
    pub n_words: usize,
    /// Expected links per document used to calibrate the graph template.
    pub mean_links: f64,
    /// Expected words per document used to calibrate the text template.
    pub mean_words: f64,
    pub doc_degrees: DegreeMode,
    pub word_degrees: DegreeMode,
}

impl Default for DocSimConfig {
    fn default() -> Self {
        DocSimConfig {
            n_docs: 1000,
            n_words: 1000,
            mean_links: 20.0,
            mean_words: 200.0,
            doc_degrees: DegreeMode::Uniform,
            word_degrees: DegreeMode::Uniform,
        }
    }
}

impl DocSimConfig {
    /// The benchmark protocol: default sizes with two-value document
    /// propensities. The low-propensity half has few links and few words at
    /// every signal level, which keeps the text-signal-only recovery
    /// plateaued near 90% instead of converging to perfect.
    pub fn benchmark_protocol() -> DocSimConfig {
        DocSimConfig {
            doc_degrees: DegreeMode::TwoPoint {
                low: 0.55,
                high: 1.45,
            },
            ..DocSimConfig::default()
        }
    }
}

/// Truncated-Pareto propensities rescaled to unit empirical mean, so the
/// expected-degree calibration stays exact.
fn sample_degrees(rng: &mut ChaCha8Rng, n: usize, mode: DegreeMode) -> Vec<f64> {
    match mode {
        DegreeMode::Uniform => vec![1.0; n],
        DegreeMode::PowerLaw {
            exponent,
            max_ratio,
        } => {
            let a = exponent.max(1.0 + 1e-6);
            let r_pow = max_ratio.powf(-a);
            let theta: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    (1.0 - u * (1.0 - r_pow)).powf(-1.0 / a)
                })
                .collect();
            rescale_to_unit_mean(theta)
        }
        DegreeMode::TwoPoint { low, high } => {
            let theta: Vec<f64> = (0..n)
                .map(|_| if rng.random::<f64>() < 0.5 { low } else { high })
                .collect();
            rescale_to_unit_mean(theta)
        }
    }
}

fn rescale_to_unit_mean(mut theta: Vec<f64>) -> Vec<f64> {
    let mean = theta.iter().sum::<f64>() / theta.len().max(1) as f64;
    if mean > 0.0 {
        for t in &mut theta {
            *t /= mean;
        }
    }
    theta
}

#[derive(Clone, Debug)]
pub struct DocSample {
    /// Symmetric doc/doc link matrix (zero diagonal).
    pub a: SparseMatrix,
    /// Doc/word containment indicators.
    pub x: SparseMatrix,
    pub doc_labels: Vec<usize>,
    pub word_labels: Vec<usize>,
}

/// Calibration constant for a `0.1 + sig * I` two-block template so that the
/// expected row total over `n` columns is `target`.
fn template_scale(n: usize, sig: f64, target: f64) -> f64 {
    2.0 * target / (n as f64 * (0.2 + sig))
}

fn template_probs(scale: f64, sig: f64) -> Result<(f64, f64)> {
    let same = scale * (0.1 + sig);
    let diff = scale * 0.1;
    for (idx, p) in [(0usize, same), (1, diff)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange {
                row: idx,
                col: idx,
                value: p,
            });
        }
    }
    Ok((same, diff))
}

/// Samples the two-block document model at signal levels `(sig_g, sig_t)`.
///
/// Block labels are independent uniform; links between documents appear with
/// probability `B[z(i)][z(j)]` and words with probability
/// `B_text[z(i)][z_text(w)]`, where both templates are `0.1 + sig * I`
/// rescaled so the expected links and words per document match the config.
pub fn sample_dcsbm_docs(
    cfg: &DocSimConfig,
    sig_g: f64,
    sig_t: f64,
    seed: u64,
) -> Result<DocSample> {
    if sig_g < 0.0 || sig_t < 0.0 {
        return Err(Error::invalid("signal", "signal levels must be nonnegative"));
    }
    let (g_same, g_diff) = template_probs(template_scale(cfg.n_docs, sig_g, cfg.mean_links), sig_g)?;
    let (t_same, t_diff) =
        template_probs(template_scale(cfg.n_words, sig_t, cfg.mean_words), sig_t)?;

    let mut rng = rng_from_seed(seed);
    let doc_labels: Vec<usize> = (0..cfg.n_docs).map(|_| rng.random_range(0..2)).collect();
    let word_labels: Vec<usize> = (0..cfg.n_words).map(|_| rng.random_range(0..2)).collect();
    let theta_doc = sample_degrees(&mut rng, cfg.n_docs, cfg.doc_degrees);
    let theta_word = sample_degrees(&mut rng, cfg.n_words, cfg.word_degrees);
    let uniform = cfg.doc_degrees == DegreeMode::Uniform
        && cfg.word_degrees == DegreeMode::Uniform;

    let cap_check = |p: f64, row: usize, col: usize| -> Result<f64> {
        if p > 1.0 {
            Err(Error::ProbabilityOutOfRange {
                row,
                col,
                value: p,
            })
        } else {
            Ok(p)
        }
    };

    let mut docs_by_block: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (j, &z) in doc_labels.iter().enumerate() {
        docs_by_block[z].push(j);
    }
    let mut words_by_block: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (w, &z) in word_labels.iter().enumerate() {
        words_by_block[z].push(w);
    }

    // Undirected links over unordered pairs i < j, mirrored into both
    // triangle halves.
    let mut a_triplets = Vec::new();
    let mut hits = Vec::new();
    for i in 0..cfg.n_docs {
        let zi = doc_labels[i];
        for (zj, members) in docs_by_block.iter().enumerate() {
            let base = if zi == zj { g_same } else { g_diff };
            // Candidates j > i inside this block: a suffix of the sorted list.
            let start = members.partition_point(|&j| j <= i);
            let tail = &members[start..];
            if uniform {
                hits.clear();
                bernoulli_indices(&mut rng, tail.len(), base, &mut hits);
                for &h in &hits {
                    let j = tail[h];
                    a_triplets.push((i, j, 1.0));
                    a_triplets.push((j, i, 1.0));
                }
            } else {
                for &j in tail {
                    let p = cap_check(theta_doc[i] * theta_doc[j] * base, i, j)?;
                    if rng.random::<f64>() < p {
                        a_triplets.push((i, j, 1.0));
                        a_triplets.push((j, i, 1.0));
                    }
                }
            }
        }
    }
    let a = build_sparse(&a_triplets, cfg.n_docs, cfg.n_docs)?;

    let mut x_triplets = Vec::new();
    for i in 0..cfg.n_docs {
        let zi = doc_labels[i];
        for (zw, members) in words_by_block.iter().enumerate() {
            let base = if zi == zw { t_same } else { t_diff };
            if uniform {
                hits.clear();
                bernoulli_indices(&mut rng, members.len(), base, &mut hits);
                for &h in &hits {
                    x_triplets.push((i, members[h], 1.0));
                }
            } else {
                for &w in members {
                    let p = cap_check(theta_doc[i] * theta_word[w] * base, i, w)?;
                    if rng.random::<f64>() < p {
                        x_triplets.push((i, w, 1.0));
                    }
                }
            }
        }
    }
    let x = build_sparse(&x_triplets, cfg.n_docs, cfg.n_words)?;

    Ok(DocSample {
        a,
        x,
        doc_labels,
        word_labels,
    })
}

/// The signal grid used by the document simulation: `10^e` for
/// `e = -1.8, -1.6, ..., 3.0`.
pub fn signal_grid() -> Vec<f64> {
    (0..25).map(|i| 10f64.powf(-1.8 + 0.2 * i as f64)).collect()
}

// ---------------------------------------------------------------------------
// Population similarity
// ---------------------------------------------------------------------------

const DENSIFY_GUARD: usize = 1_000_000;

/// The population similarity matrix: the expected-value counterpart of the
/// sample pipeline, with population degrees in the Laplacian and the exact
/// population call-response matrix (no thresholding: the threshold is a
/// sample-side noise-suppression device; the population matrix is exact).
///
/// Requires explicit memberships and a densifiable size.
pub fn population_similarity(spec: &BlockModelSpec, h: f64) -> Result<Mat> {
    spec.validate()?;
    if spec.n_citizens * spec.n_posts > DENSIFY_GUARD {
        return Err(Error::SizeGuard {
            n_rows: spec.n_citizens,
            n_cols: spec.n_posts,
            limit: DENSIFY_GUARD,
        });
    }
    let Membership::Explicit { citizens, posts } = &spec.membership else {
        return Err(Error::invalid(
            "membership",
            "population matrix requires explicit memberships",
        ));
    };
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", "must be a finite nonnegative real"));
    }

    let n_c = spec.n_citizens;
    let n_p = spec.n_posts;
    let pop_a = Mat::from_fn(n_c, n_p, |i, j| spec.b.get(citizens[i], posts[j]));

    let row_deg: Vec<f64> = (0..n_c).map(|i| pop_a.row_vec(i).iter().sum()).collect();
    let col_deg: Vec<f64> = (0..n_p).map(|j| pop_a.col(j).iter().sum()).collect();
    let total: f64 = row_deg.iter().sum();
    let tau_c = total / n_c as f64;
    let tau_p = total / n_p as f64;
    let lap = Mat::from_fn(n_c, n_p, |i, j| {
        pop_a.get(i, j) / ((row_deg[i] + tau_c) * (col_deg[j] + tau_p)).sqrt()
    });

    let pop_x = Mat::from_fn(n_c, spec.e_c.n_cols(), |i, t| spec.e_c.get(citizens[i], t));
    let pop_y = Mat::from_fn(n_p, spec.e_p.n_cols(), |j, t| spec.e_p.get(posts[j], t));

    // W = X^T L Y, then S = L + h X W Y^T.
    let w = pop_x.transpose().matmul(&lap).matmul(&pop_y);
    let text = pop_x.matmul(&w).matmul(&pop_y.transpose());
    Ok(Mat::from_fn(n_c, n_p, |i, j| {
        lap.get(i, j) + h * text.get(i, j)
    }))
}

// ---------------------------------------------------------------------------
// Mis-clustering rate
// ---------------------------------------------------------------------------

fn compact_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = map.len();
        out.push(*map.entry(l).or_insert(next));
    }
    (out, map.len())
}

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm with
/// potentials); returns the column assigned to each row.
fn hungarian_min(cost: &Mat) -> Vec<usize> {
    let n = cost.n_rows();
    debug_assert_eq!(n, cost.n_cols());
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // row matched to column j (1-based)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if assigned_row[j] > 0 {
            assignment[assigned_row[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Permutation helper: maximum total agreement achievable by matching
/// estimated clusters to true clusters one-to-one.
fn max_agreement(confusion: &Mat) -> f64 {
    let k = confusion.n_rows();
    if k <= 6 {
        // Exhaustive over permutations.
        let mut cols: Vec<usize> = (0..k).collect();
        let mut best = 0.0f64;
        permute(&mut cols, 0, &mut |perm| {
            let mut total = 0.0;
            for (r, &c) in perm.iter().enumerate() {
                total += confusion.get(r, c);
            }
            if total > best {
                best = total;
            }
        });
        best
    } else {
        let max_entry = confusion.max_abs();
        let cost = Mat::from_fn(k, k, |r, c| max_entry - confusion.get(r, c));
        let assignment = hungarian_min(&cost);
        assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| confusion.get(r, c))
            .sum()
    }
}

fn permute(items: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Permutation-minimized disagreement between two labelings: the fraction of
/// nodes misassigned under the best one-to-one matching of cluster ids.
pub fn misclustering_rate(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    if estimated.len() != truth.len() {
        return Err(Error::LabelLengthMismatch {
            left: estimated.len(),
            right: truth.len(),
        });
    }
    let n = estimated.len();
    if n == 0 {
        return Ok(0.0);
    }
    let (est, k_e) = compact_labels(estimated);
    let (tru, k_t) = compact_labels(truth);
    let k = k_e.max(k_t);
    let mut confusion = Mat::zeros(k, k);
    for (&e, &t) in est.iter().zip(&tru) {
        confusion.set(e, t, confusion.get(e, t) + 1.0);
    }
    let agree = max_agreement(&confusion);
    Ok(1.0 - agree / n as f64)
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMethod {
    /// Graph plus text, weight calibrated so the first singular values of
    /// the two parts match.
    Combined,
    GraphOnly,
    TextOnly,
    AllOne,
}

impl BenchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::Combined => "combined",
            BenchMethod::GraphOnly => "graph_only",
            BenchMethod::TextOnly => "text_only",
            BenchMethod::AllOne => "all_one",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    /// `(sig_g, sig_t)` cells, evaluated in order.
    pub grid: Vec<(f64, f64)>,
    pub n_reps: usize,
    pub methods: Vec<BenchMethod>,
    pub seed: u64,
    pub docs: DocSimConfig,
    pub alpha: f64,
    /// k-means restarts per fit.
    pub restarts: usize,
}

impl BenchmarkConfig {
    pub fn new(grid: Vec<(f64, f64)>, n_reps: usize, seed: u64) -> BenchmarkConfig {
        BenchmarkConfig {
            grid,
            n_reps,
            methods: vec![BenchMethod::Combined],
            seed,
            docs: DocSimConfig::benchmark_protocol(),
            alpha: 0.05,
            restarts: 10_000,
        }
    }
}

/// Grid helpers for the three benchmark axes.
pub fn grid_graph_axis(levels: &[f64]) -> Vec<(f64, f64)> {
    levels.iter().map(|&s| (s, 0.0)).collect()
}

pub fn grid_text_axis(levels: &[f64]) -> Vec<(f64, f64)> {
    levels.iter().map(|&s| (0.0, s)).collect()
}

pub fn grid_both_axis(levels: &[f64]) -> Vec<(f64, f64)> {
    levels.iter().map(|&s| (s, s)).collect()
}

/// Per-cell, per-method aggregate over reps.
#[derive(Clone, Debug)]
pub struct CellStats {
    pub sig_g: f64,
    pub sig_t: f64,
    pub method: BenchMethod,
    pub mean_rate: f64,
    pub std_rate: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Total compute seconds across reps (not wall clock).
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub cells: Vec<CellStats>,
}

/// One simulated fit: sample the document model, run the pipeline for
/// `method`, return the row-side mis-clustering rate.
pub fn benchmark_rep(
    cfg: &BenchmarkConfig,
    sig_g: f64,
    sig_t: f64,
    method: BenchMethod,
    data_seed: u64,
    fit_seed: u64,
) -> Result<f64> {
    let sample = sample_dcsbm_docs(&cfg.docs, sig_g, sig_t, data_seed)?;
    let mut opts = FitOptions::new(2, 2, fit_seed);
    opts.treatment = MatrixTreatment::Center;
    opts.alpha = cfg.alpha;
    opts.kmeans = KmeansParams::new(cfg.restarts, derive_seed(fit_seed, &[2]));
    opts.weight = match method {
        BenchMethod::Combined => TextWeight::Value(1.0),
        BenchMethod::GraphOnly => TextWeight::GraphOnly,
        BenchMethod::TextOnly => TextWeight::TextOnly,
        BenchMethod::AllOne => TextWeight::AllOne,
    };
    opts.calibration = Calibration::SingularValue(0);
    // Rows and columns of the doc/doc matrix are the same documents; the
    // word matrix contextualizes both sides.
    let fit = fit_matrices(&sample.a, &sample.x, &sample.x, &opts)?;
    misclustering_rate(&fit.co_clustering.citizen_labels, &sample.doc_labels)
}

/// Runs every (cell, method) over `n_reps` simulated data sets. Reps are
/// seeded from (master seed, cell, rep) and methods within a rep share the
/// data set, so results are reproducible and scheduling-independent.
/// Per-rep failures are recorded, not fatal.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> BenchmarkResult {
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|c| (0..cfg.n_reps).map(move |r| (c, r)))
        .collect();

    let per_job: Vec<Vec<(Option<f64>, f64)>> = jobs
        .par_iter()
        .map(|&(cell, rep)| {
            let (sig_g, sig_t) = cfg.grid[cell];
            let data_seed = derive_seed(cfg.seed, &[cell as u64, rep as u64]);
            cfg.methods
                .iter()
                .enumerate()
                .map(|(m, &method)| {
                    let fit_seed =
                        derive_seed(cfg.seed, &[cell as u64, rep as u64, 1 + m as u64]);
                    let start = Instant::now();
                    let rate =
                        benchmark_rep(cfg, sig_g, sig_t, method, data_seed, fit_seed).ok();
                    (rate, start.elapsed().as_secs_f64())
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (c, &(sig_g, sig_t)) in cfg.grid.iter().enumerate() {
        for (m, &method) in cfg.methods.iter().enumerate() {
            let mut rates = Vec::new();
            let mut seconds = 0.0;
            let mut n_failed = 0usize;
            for (job, results) in jobs.iter().zip(&per_job) {
                if job.0 != c {
                    continue;
                }
                let (rate, secs) = results[m];
                seconds += secs;
                match rate {
                    Some(r) => rates.push(r),
                    None => n_failed += 1,
                }
            }
            let n_ok = rates.len();
            let mean = if n_ok > 0 {
                rates.iter().sum::<f64>() / n_ok as f64
            } else {
                f64::NAN
            };
            let std = if n_ok > 1 {
                let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                    / (n_ok - 1) as f64;
                var.sqrt()
            } else {
                0.0
            };
            cells.push(CellStats {
                sig_g,
                sig_t,
                method,
                mean_rate: mean,
                std_rate: std,
                n_ok,
                n_failed,
                seconds,
            });
        }
    }
    BenchmarkResult { cells }
}
