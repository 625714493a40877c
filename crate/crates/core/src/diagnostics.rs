//! Interpretive statistics: attention ratios, cluster/category interaction
//! matrices, and observed-over-expected keyword scores.
//!
//! All of these are exact ratios of counts; every function here is pure and
//! the tests pin them against direct formula evaluation.

use rand::Rng;

use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::sparse::SparseMatrix;

// ---------------------------------------------------------------------------
// Attention ratio
// ---------------------------------------------------------------------------

/// A citizen's attention summary: the fraction of their comments landing on
/// their most-commented wall, and which wall that is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attention {
    pub ratio: f64,
    pub focus_wall: usize,
}

/// Per-citizen attention ratio `max_w zeta[i][w] / d_i`, where `zeta`
/// aggregates the adjacency rows per wall. Citizens with degree zero have no
/// defined ratio and come back as `None`. Ties for the favorite wall break
/// uniformly at random under a per-citizen derived seed.
pub fn attention_ratio(
    a: &SparseMatrix,
    wall_of_post: &[usize],
    seed: u64,
) -> Result<Vec<Option<Attention>>> {
    if wall_of_post.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "attention_ratio: wall ids vs posts",
            expected: a.n_cols(),
            got: wall_of_post.len(),
        });
    }
    let n_walls = wall_of_post.iter().map(|&w| w + 1).max().unwrap_or(0);
    let mut zeta = vec![0.0f64; n_walls];
    let mut out = Vec::with_capacity(a.n_rows());
    for i in 0..a.n_rows() {
        zeta.fill(0.0);
        let (cols, vals) = a.row(i);
        let mut degree = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            zeta[wall_of_post[j]] += v;
            degree += v;
        }
        if degree <= 0.0 {
            out.push(None);
            continue;
        }
        let best = zeta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..n_walls).filter(|&w| zeta[w] == best).collect();
        let focus_wall = if ties.len() == 1 {
            ties[0]
        } else {
            let mut rng = rng_from_seed(derive_seed(seed, &[i as u64]));
            ties[rng.random_range(0..ties.len())]
        };
        out.push(Some(Attention {
            ratio: best / degree,
            focus_wall,
        }));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Interaction matrices
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionKind {
    /// Citizen clusters x walls, normalized comment rates.
    PsiC,
    /// Post clusters x walls, normalized post placement rates.
    PsiP,
    /// Citizen clusters x post clusters, normalized comment rates.
    Psi,
}

/// A cluster-by-category rate table. Entries whose denominator involves an
/// empty cluster (or empty category) are zero and the row/column is flagged
/// rather than being silently dropped.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    pub values: Mat,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub kind: InteractionKind,
    pub flagged_rows: Vec<usize>,
    pub flagged_cols: Vec<usize>,
}

fn check_labels(labels: &[usize], k: usize, context: &'static str) -> Result<()> {
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::UnknownCluster {
            cluster: bad,
            n_clusters: k,
        });
    }
    let _ = context;
    Ok(())
}

fn cluster_names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// `PsiC[a][b]` = comments from citizen-cluster `a` on wall `b`, divided by
/// (#citizens in `a` x #posts on wall `b`).
pub fn psi_c(
    a: &SparseMatrix,
    citizen_labels: &[usize],
    k_c: usize,
    wall_of_post: &[usize],
    wall_names: &[String],
) -> Result<InteractionMatrix> {
    if citizen_labels.len() != a.n_rows() {
        return Err(Error::LabelLengthMismatch {
            left: citizen_labels.len(),
            right: a.n_rows(),
        });
    }
    if wall_of_post.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "psi_c: wall ids vs posts",
            expected: a.n_cols(),
            got: wall_of_post.len(),
        });
    }
    check_labels(citizen_labels, k_c, "psi_c")?;
    let n_walls = wall_names.len();
    check_labels(wall_of_post, n_walls, "psi_c walls")?;

    let mut comment_counts = Mat::zeros(k_c, n_walls);
    for (i, j, v) in a.iter_triplets() {
        let cell =
            comment_counts.get(citizen_labels[i], wall_of_post[j]) + v;
        comment_counts.set(citizen_labels[i], wall_of_post[j], cell);
    }
    let mut cluster_sizes = vec![0usize; k_c];
    for &l in citizen_labels {
        cluster_sizes[l] += 1;
    }
    let mut wall_sizes = vec![0usize; n_walls];
    for &w in wall_of_post {
        wall_sizes[w] += 1;
    }
    Ok(rate_matrix(
        comment_counts,
        &cluster_sizes,
        &wall_sizes,
        cluster_names("C", k_c),
        wall_names.to_vec(),
        InteractionKind::PsiC,
    ))
}

/// `PsiP[a][b]` = posts in post-cluster `a` on wall `b`, divided by
/// (#posts in `a` x #posts on wall `b`).
pub fn psi_p(
    post_labels: &[usize],
    k_p: usize,
    wall_of_post: &[usize],
    wall_names: &[String],
) -> Result<InteractionMatrix> {
    if post_labels.len() != wall_of_post.len() {
        return Err(Error::LabelLengthMismatch {
            left: post_labels.len(),
            right: wall_of_post.len(),
        });
    }
    check_labels(post_labels, k_p, "psi_p")?;
    let n_walls = wall_names.len();
    check_labels(wall_of_post, n_walls, "psi_p walls")?;

    let mut post_counts = Mat::zeros(k_p, n_walls);
    for (&l, &w) in post_labels.iter().zip(wall_of_post) {
        post_counts.set(l, w, post_counts.get(l, w) + 1.0);
    }
    let mut cluster_sizes = vec![0usize; k_p];
    for &l in post_labels {
        cluster_sizes[l] += 1;
    }
    let mut wall_sizes = vec![0usize; n_walls];
    for &w in wall_of_post {
        wall_sizes[w] += 1;
    }
    Ok(rate_matrix(
        post_counts,
        &cluster_sizes,
        &wall_sizes,
        cluster_names("P", k_p),
        wall_names.to_vec(),
        InteractionKind::PsiP,
    ))
}

/// `Psi[a][b]` = comments from citizen-cluster `a` under posts of
/// post-cluster `b`, divided by (#citizens in `a` x #posts in `b`).
pub fn psi(
    a: &SparseMatrix,
    citizen_labels: &[usize],
    k_c: usize,
    post_labels: &[usize],
    k_p: usize,
) -> Result<InteractionMatrix> {
    if citizen_labels.len() != a.n_rows() {
        return Err(Error::LabelLengthMismatch {
            left: citizen_labels.len(),
            right: a.n_rows(),
        });
    }
    if post_labels.len() != a.n_cols() {
        return Err(Error::LabelLengthMismatch {
            left: post_labels.len(),
            right: a.n_cols(),
        });
    }
    check_labels(citizen_labels, k_c, "psi citizens")?;
    check_labels(post_labels, k_p, "psi posts")?;

    let mut counts = Mat::zeros(k_c, k_p);
    for (i, j, v) in a.iter_triplets() {
        let (r, c) = (citizen_labels[i], post_labels[j]);
        counts.set(r, c, counts.get(r, c) + v);
    }
    let mut c_sizes = vec![0usize; k_c];
    for &l in citizen_labels {
        c_sizes[l] += 1;
    }
    let mut p_sizes = vec![0usize; k_p];
    for &l in post_labels {
        p_sizes[l] += 1;
    }
    Ok(rate_matrix(
        counts,
        &c_sizes,
        &p_sizes,
        cluster_names("C", k_c),
        cluster_names("P", k_p),
        InteractionKind::Psi,
    ))
}

fn rate_matrix(
    mut counts: Mat,
    row_sizes: &[usize],
    col_sizes: &[usize],
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    kind: InteractionKind,
) -> InteractionMatrix {
    let flagged_rows: Vec<usize> = (0..row_sizes.len())
        .filter(|&r| row_sizes[r] == 0)
        .collect();
    let flagged_cols: Vec<usize> = (0..col_sizes.len())
        .filter(|&c| col_sizes[c] == 0)
        .collect();
    for r in 0..row_sizes.len() {
        for c in 0..col_sizes.len() {
            let denom = row_sizes[r] as f64 * col_sizes[c] as f64;
            let v = if denom > 0.0 {
                counts.get(r, c) / denom
            } else {
                0.0
            };
            counts.set(r, c, v);
        }
    }
    InteractionMatrix {
        values: counts,
        row_labels,
        col_labels,
        kind,
        flagged_rows,
        flagged_cols,
    }
}

// ---------------------------------------------------------------------------
// Keyword scores
// ---------------------------------------------------------------------------

/// Observed-over-expected score of one term in one cluster. The expectation
/// is the independence (Poisson) baseline `rowsum * colsum / total`.
#[derive(Clone, Debug)]
pub struct KeywordScore {
    pub term_index: usize,
    pub term: String,
    pub score: f64,
    /// The independence baseline was zero (term or cluster has no mass);
    /// the score carries no information.
    pub zero_expected: bool,
}

/// Scores all terms in cluster `cluster` and returns the `top_n` by
/// descending score (ties lexicographic by term). `term_matrix` must be the
/// raw count matrix: the expectation model presumes counts.
pub fn keyword_scores(
    term_matrix: &SparseMatrix,
    terms: &[String],
    labels: &[usize],
    cluster: usize,
    top_n: usize,
) -> Result<Vec<KeywordScore>> {
    if labels.len() != term_matrix.n_rows() {
        return Err(Error::LabelLengthMismatch {
            left: labels.len(),
            right: term_matrix.n_rows(),
        });
    }
    if terms.len() != term_matrix.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "keyword_scores: terms vs matrix columns",
            expected: term_matrix.n_cols(),
            got: terms.len(),
        });
    }
    if let Some((r, c, v)) = term_matrix.first_negative() {
        return Err(Error::NegativeEntry {
            row: r,
            col: c,
            value: v,
        });
    }
    let in_cluster: Vec<bool> = labels.iter().map(|&l| l == cluster).collect();
    if !in_cluster.iter().any(|&b| b) {
        return Err(Error::EmptyCluster { cluster });
    }

    let row_sums = term_matrix.row_sums();
    let col_sums = term_matrix.col_sums();
    let total: f64 = row_sums.iter().sum();
    let cluster_mass: f64 = row_sums
        .iter()
        .enumerate()
        .filter(|&(i, _)| in_cluster[i])
        .map(|(_, &s)| s)
        .sum();

    let mut observed = vec![0.0f64; terms.len()];
    for (i, j, v) in term_matrix.iter_triplets() {
        if in_cluster[i] {
            observed[j] += v;
        }
    }

    let mut scores: Vec<KeywordScore> = (0..terms.len())
        .map(|j| {
            let expected = if total > 0.0 {
                col_sums[j] * cluster_mass / total
            } else {
                0.0
            };
            if expected > 0.0 {
                KeywordScore {
                    term_index: j,
                    term: terms[j].clone(),
                    score: observed[j] / expected,
                    zero_expected: false,
                }
            } else {
                KeywordScore {
                    term_index: j,
                    term: terms[j].clone(),
                    score: 0.0,
                    zero_expected: true,
                }
            }
        })
        .collect();
    // Defined scores first (descending), ties lexicographic; flagged last.
    scores.sort_by(|a, b| {
        a.zero_expected
            .cmp(&b.zero_expected)
            .then(b.score.partial_cmp(&a.score).unwrap())
            .then(a.term.cmp(&b.term))
    });
    scores.truncate(top_n);
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::build_sparse;

    #[test]
    fn attention_single_wall_is_one() {
        // 7 comments, all on posts of wall 0.
        let a = build_sparse(&[(0, 0, 4.0), (0, 1, 3.0)], 1, 2).unwrap();
        let att = attention_ratio(&a, &[0, 0], 1).unwrap();
        let at = att[0].unwrap();
        assert_eq!(at.ratio, 1.0);
        assert_eq!(at.focus_wall, 0);
    }

    #[test]
    fn attention_tie_uses_seeded_choice() {
        let a = build_sparse(&[(0, 0, 3.0), (0, 1, 3.0)], 1, 2).unwrap();
        let att = attention_ratio(&a, &[0, 1], 7).unwrap();
        let at = att[0].unwrap();
        assert_eq!(at.ratio, 0.5);
        assert!(at.focus_wall < 2);
        // Deterministic under the same seed.
        let again = attention_ratio(&a, &[0, 1], 7).unwrap();
        assert_eq!(att, again);
    }

    #[test]
    fn attention_direct_formula() {
        // zeta = (6, 3, 1) -> ratio 0.6, focus wall 0
        let a = build_sparse(&[(0, 0, 6.0), (0, 1, 3.0), (0, 2, 1.0)], 1, 3).unwrap();
        let att = attention_ratio(&a, &[0, 1, 2], 3).unwrap();
        let at = att[0].unwrap();
        assert!((at.ratio - 0.6).abs() < 1e-15);
        assert_eq!(at.focus_wall, 0);
    }

    #[test]
    fn attention_zero_degree_flagged() {
        let a = build_sparse(&[(1, 0, 2.0)], 2, 1).unwrap();
        let att = attention_ratio(&a, &[0], 5).unwrap();
        assert!(att[0].is_none());
        assert!(att[1].is_some());
    }

    #[test]
    fn attention_always_in_unit_interval() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(3);
        let mut triplets = Vec::new();
        for i in 0..20 {
            for j in 0..6 {
                if rng.random::<f64>() < 0.4 {
                    triplets.push((i, j, (1 + rng.random_range(0..5)) as f64));
                }
            }
        }
        let a = build_sparse(&triplets, 20, 6).unwrap();
        let walls = vec![0, 0, 1, 1, 2, 2];
        for at in attention_ratio(&a, &walls, 11).unwrap().into_iter().flatten() {
            assert!(at.ratio > 0.0 && at.ratio <= 1.0);
        }
    }

    fn wall_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn psi_c_direct_formula() {
        // One cluster, one wall: 10 comments, 5 citizens, 2 posts -> 1.0
        let mut triplets = Vec::new();
        for i in 0..5 {
            triplets.push((i, 0, 1.0));
            triplets.push((i, 1, 1.0));
        }
        let a = build_sparse(&triplets, 5, 2).unwrap();
        let labels = vec![0usize; 5];
        let m = psi_c(&a, &labels, 1, &[0, 0], &wall_names(1)).unwrap();
        assert!((m.values.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(m.flagged_rows.is_empty());
    }

    #[test]
    fn psi_c_zero_interaction_is_zero() {
        let a = build_sparse(&[(0, 0, 2.0)], 2, 2).unwrap();
        // Citizen 1 (cluster 1) never comments on wall 1.
        let m = psi_c(&a, &[0, 1], 2, &[0, 1], &wall_names(2)).unwrap();
        assert_eq!(m.values.get(1, 1), 0.0);
    }

    #[test]
    fn psi_p_concentrated_cluster() {
        // Every post of cluster 0 sits on wall 0: n_a = 2 posts in cluster,
        // wall 0 has 4 posts -> 2 / (2 * 4) = 1/4.
        let post_labels = vec![0, 0, 1, 1];
        let walls = vec![0, 0, 0, 0];
        let m = psi_p(&post_labels, 2, &walls, &wall_names(1)).unwrap();
        assert!((m.values.get(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn psi_flags_empty_cluster() {
        let a = build_sparse(&[(0, 0, 1.0)], 1, 1).unwrap();
        // k_c = 2 but only cluster 0 occupied.
        let m = psi(&a, &[0], 2, &[0], 1).unwrap();
        assert_eq!(m.flagged_rows, vec![1]);
        assert_eq!(m.values.get(1, 0), 0.0);
    }

    #[test]
    fn psi_invariant_under_relabeling() {
        let a = build_sparse(&[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0)], 3, 2).unwrap();
        let m1 = psi(&a, &[0, 1, 0], 2, &[0, 1], 2).unwrap();
        // Swap cluster ids 0 <-> 1 on the citizen side.
        let m2 = psi(&a, &[1, 0, 1], 2, &[0, 1], 2).unwrap();
        for b in 0..2 {
            assert_eq!(m1.values.get(0, b), m2.values.get(1, b));
            assert_eq!(m1.values.get(1, b), m2.values.get(0, b));
        }
    }

    fn terms(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn keyword_uniform_cluster_scores_one() {
        let x = build_sparse(
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 4.0), (1, 1, 3.0)],
            2,
            2,
        )
        .unwrap();
        let s = keyword_scores(&x, &terms(&["a", "b"]), &[0, 0], 0, 10).unwrap();
        for item in &s {
            assert!(!item.zero_expected);
            assert!((item.score - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn keyword_exclusive_and_absent_terms() {
        // Term 0 used only inside cluster 0; term 1 never in cluster 0.
        let x = build_sparse(&[(0, 0, 5.0), (1, 1, 5.0)], 2, 2).unwrap();
        let s = keyword_scores(&x, &terms(&["only", "never"]), &[0, 1], 0, 10).unwrap();
        let only = s.iter().find(|k| k.term == "only").unwrap();
        let never = s.iter().find(|k| k.term == "never").unwrap();
        assert!(only.score > 1.0);
        assert_eq!(never.score, 0.0);
    }

    #[test]
    fn keyword_hand_example() {
        // X = [[4,0],[0,4]] with clusters {0}, {1}:
        // expected = rowsum*colsum/total = 4*4/8 = 2; score = 4/2 = 2.
        let x = build_sparse(&[(0, 0, 4.0), (1, 1, 4.0)], 2, 2).unwrap();
        let s = keyword_scores(&x, &terms(&["a", "b"]), &[0, 1], 0, 1).unwrap();
        assert_eq!(s[0].term, "a");
        assert!((s[0].score - 2.0).abs() < 1e-15);
    }

    #[test]
    fn keyword_empty_cluster_errors() {
        let x = build_sparse(&[(0, 0, 1.0)], 1, 1).unwrap();
        assert!(matches!(
            keyword_scores(&x, &terms(&["a"]), &[0], 1, 5),
            Err(Error::EmptyCluster { cluster: 1 })
        ));
    }

    #[test]
    fn keyword_observed_equals_score_weighted_expected() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(8);
        let mut triplets = Vec::new();
        for i in 0..10 {
            for j in 0..6 {
                if rng.random::<f64>() < 0.5 {
                    triplets.push((i, j, rng.random_range(1..6) as f64));
                }
            }
        }
        let x = build_sparse(&triplets, 10, 6).unwrap();
        let labels: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let names: Vec<String> = (0..6).map(|j| format!("t{j}")).collect();
        let scores = keyword_scores(&x, &names, &labels, 1, 6).unwrap();
        let row_sums = x.row_sums();
        let col_sums = x.col_sums();
        let total: f64 = row_sums.iter().sum();
        let mass: f64 = (0..10).filter(|&i| labels[i] == 1).map(|i| row_sums[i]).sum();
        let mut observed_total = 0.0;
        for (i, j, v) in x.iter_triplets() {
            if labels[i] == 1 {
                observed_total += v;
                let _ = j;
            }
        }
        let weighted: f64 = scores
            .iter()
            .map(|k| k.score * col_sums[k.term_index] * mass / total)
            .sum();
        assert!((weighted - observed_total).abs() < 1e-9);
    }
}
