//! The five subcommands: ingest, fit, diagnose, benchmark, simulate.

use std::collections::HashSet;
use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};

use coclust_core::dense::Mat;
use coclust_core::diagnostics::{attention_ratio, keyword_scores, psi, psi_c, psi_p};
use coclust_core::pipeline::fit_matrices;
use coclust_core::simgen::{
    grid_both_axis, grid_graph_axis, grid_text_axis, run_benchmark, sample_dcsbm_docs,
    sample_ncscbm, BenchMethod, BenchmarkConfig, BlockModelSpec, DegreeMode, DocSimConfig,
    Membership,
};
use coclust_core::sparse::SparseMatrix;
use coclust_core::text::{
    build_adjacency, build_citizen_terms, build_thread_terms, read_corpus, tfidf_weight,
    tokenize_corpus, Tokenizer,
};

use crate::artifacts::{self as art, write_matrix, write_text};
use crate::config::{Manifest, RunConfig};

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn cmd_ingest(
    corpus_path: &Path,
    out: &Path,
    cutoff: f64,
    stopwords_path: Option<&Path>,
) -> Result<()> {
    let file = fs::File::open(corpus_path)
        .with_context(|| format!("opening corpus {}", corpus_path.display()))?;
    let corpus = read_corpus(BufReader::new(file), &corpus_path.display().to_string())?;
    if corpus.n_posts() == 0 && corpus.n_comments() == 0 {
        bail!("no records in {}", corpus_path.display());
    }

    let stopwords: HashSet<String> = match stopwords_path {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("reading stopwords {}", p.display()))?
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect(),
        None => HashSet::new(),
    };
    let tokenizer = Tokenizer::new(stopwords);
    let tokenized = tokenize_corpus(&corpus, &tokenizer);
    let citizen_vocab = tokenized.citizen_vocabulary(cutoff)?;
    let thread_vocab = tokenized.thread_vocabulary(cutoff)?;

    let a = build_adjacency(&corpus);
    let x = build_citizen_terms(&corpus, &tokenized, &citizen_vocab);
    let y = build_thread_terms(&corpus, &tokenized, &thread_vocab);
    let (x_w, y_w) = tfidf_weight(&corpus, &tokenized, &citizen_vocab, &thread_vocab);

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_matrix(out, art::ADJACENCY, &a)?;
    write_matrix(out, art::CITIZEN_TERMS, &x)?;
    write_matrix(out, art::THREAD_TERMS, &y)?;
    write_matrix(out, art::CITIZEN_TERMS_TFIDF, &x_w)?;
    write_matrix(out, art::THREAD_TERMS_TFIDF, &y_w)?;

    let mut vocab_out = Vec::new();
    citizen_vocab.write(&mut vocab_out)?;
    write_text(
        &out.join(art::CITIZEN_VOCAB),
        &String::from_utf8(vocab_out).unwrap(),
    )?;
    let mut vocab_out = Vec::new();
    thread_vocab.write(&mut vocab_out)?;
    write_text(
        &out.join(art::THREAD_VOCAB),
        &String::from_utf8(vocab_out).unwrap(),
    )?;

    art::write_keys(out, art::CITIZEN_IDS, "id\tkey", corpus.citizen_keys())?;
    art::write_keys(out, art::WALL_IDS, "id\tkey", corpus.wall_keys())?;
    let mut posts = String::from("id\tkey\twall\n");
    for (id, post) in corpus.posts().iter().enumerate() {
        posts.push_str(&format!("{id}\t{}\t{}\n", corpus.post_keys()[id], post.wall));
    }
    write_text(&out.join(art::POST_IDS), &posts)?;

    let summary = format!(
        "corpus\t{}\nposts\t{}\ncomments\t{}\ncitizens\t{}\nwalls\t{}\ncutoff\t{}\n\
         citizen_terms\t{}\nthread_terms\t{}\n",
        corpus_path.display(),
        corpus.n_posts(),
        corpus.n_comments(),
        corpus.n_citizens(),
        corpus.n_walls(),
        cutoff,
        citizen_vocab.len(),
        thread_vocab.len(),
    );
    write_text(&out.join("ingest.tsv"), &summary)?;
    println!(
        "ingested {} posts, {} comments, {} citizens -> {}",
        corpus.n_posts(),
        corpus.n_comments(),
        corpus.n_citizens(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

pub fn cmd_fit(input: &Path, out: &Path, config: &RunConfig) -> Result<()> {
    config.validate()?;
    let a = art::read_matrix(input, art::ADJACENCY)?;
    let (x_name, y_name) = if config.uses_tfidf_matrices() {
        (art::CITIZEN_TERMS_TFIDF, art::THREAD_TERMS_TFIDF)
    } else {
        (art::CITIZEN_TERMS, art::THREAD_TERMS)
    };
    let x = art::read_matrix(input, x_name)?;
    let y = art::read_matrix(input, y_name)?;

    let opts = config.to_fit_options()?;
    let fit = fit_matrices(&a, &x, &y, &opts)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let cc = &fit.co_clustering;
    art::write_labels(
        out,
        art::CITIZEN_LABELS,
        &cc.citizen_labels,
        &cc.citizen_centrality,
        &cc.low_confidence_citizens,
    )?;
    art::write_labels(
        out,
        art::POST_LABELS,
        &cc.post_labels,
        &cc.post_centrality,
        &cc.low_confidence_posts,
    )?;

    // Singular values with trailing gap ratios.
    let mut sv = String::from("k\tsigma\tgap_ratio\n");
    let sigma = &fit.embedding.sigma;
    for (i, &s) in sigma.iter().enumerate() {
        let gap = if i + 1 < sigma.len() && sigma[i + 1] > 0.0 {
            format!("{}", s / sigma[i + 1])
        } else {
            "-".to_string()
        };
        sv.push_str(&format!("{}\t{}\t{}\n", i + 1, s, gap));
    }
    write_text(&out.join(art::SINGULAR_VALUES), &sv)?;

    write_embedding(
        out,
        art::CITIZEN_EMBEDDING,
        fit.embedding.u_c_star.as_ref().unwrap(),
        &fit.embedding.zero_rows_c,
    )?;
    write_embedding(
        out,
        art::POST_EMBEDDING,
        fit.embedding.u_p_star.as_ref().unwrap(),
        &fit.embedding.zero_rows_p,
    )?;

    // Thresholded W with term strings when the vocabularies are available.
    if let Some(t) = &fit.thresholded {
        let citizen_terms = art::read_vocab_terms(input, art::CITIZEN_VOCAB)
            .unwrap_or_else(|_| (0..x.n_cols()).map(|i| format!("c{i}")).collect());
        let thread_terms = art::read_vocab_terms(input, art::THREAD_VOCAB)
            .unwrap_or_else(|_| (0..y.n_cols()).map(|i| format!("t{i}")).collect());
        let mut tw = format!("# omega\t{}\n# alpha\t{}\n", t.omega, t.alpha);
        tw.push_str("citizen_word\tthread_word\tvalue\n");
        for (s, r, v) in t.matrix.iter_triplets() {
            tw.push_str(&format!("{}\t{}\t{}\n", citizen_terms[s], thread_terms[r], v));
        }
        write_text(&out.join(art::THRESHOLDED_W), &tw)?;
    }

    let mut summary = String::new();
    summary.push_str(&format!("citizen_inertia\t{}\n", cc.citizen_inertia));
    summary.push_str(&format!("post_inertia\t{}\n", cc.post_inertia));
    if let Some(w) = fit.effective_text_weight {
        summary.push_str(&format!("effective_text_weight\t{}\n", w));
    }
    if let Some((sl, st)) = fit.calibration_values {
        summary.push_str(&format!("sigma_ref_graph\t{}\nsigma_ref_text\t{}\n", sl, st));
    }
    summary.push_str(&format!("peak_operator_scratch\t{}\n", fit.peak_scratch));
    write_text(&out.join("fit_summary.tsv"), &summary)?;

    let manifest = Manifest::new(config.clone(), "fit");
    write_text(
        &out.join(art::MANIFEST),
        &toml::to_string_pretty(&manifest)?,
    )?;
    println!(
        "fit: {} citizens x {} posts -> {} + {} clusters -> {}",
        a.n_rows(),
        a.n_cols(),
        config.k_c,
        config.k_p,
        out.display()
    );
    Ok(())
}

fn write_embedding(out: &Path, name: &str, star: &Mat, zero_rows: &[usize]) -> Result<()> {
    let flagged: HashSet<usize> = zero_rows.iter().copied().collect();
    let mut text = String::from("node");
    for j in 0..star.n_cols() {
        text.push_str(&format!("\tu{}", j + 1));
    }
    text.push_str("\tflagged\n");
    for i in 0..star.n_rows() {
        text.push_str(&format!("{i}"));
        for j in 0..star.n_cols() {
            text.push_str(&format!("\t{}", star.get(i, j)));
        }
        text.push_str(&format!("\t{}\n", u8::from(flagged.contains(&i))));
    }
    write_text(&out.join(name), &text)
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

pub fn cmd_diagnose(input: &Path, fit_dir: &Path, out: &Path, top_n: usize) -> Result<()> {
    let config = crate::config::load_config(&fit_dir.join(art::MANIFEST))
        .context("reading the fit manifest")?;
    let a = art::read_matrix(input, art::ADJACENCY)?;
    let citizen_labels = art::read_labels(fit_dir, art::CITIZEN_LABELS)?;
    let post_labels = art::read_labels(fit_dir, art::POST_LABELS)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    // Psi (citizen clusters x post clusters) always exists.
    let m = psi(&a, &citizen_labels, config.k_c, &post_labels, config.k_p)?;
    write_interaction(out, "psi", &m)?;

    // Wall-based tables when the ingest directory carries wall ids.
    if let Ok(walls) = art::read_post_walls(input) {
        let wall_names: Vec<String> = match art::read_keys(input, art::WALL_IDS) {
            Ok(names) if !names.is_empty() => names,
            _ => {
                let n = walls.iter().map(|&w| w + 1).max().unwrap_or(0);
                (0..n).map(|i| format!("w{}", i + 1)).collect()
            }
        };
        let mc = psi_c(&a, &citizen_labels, config.k_c, &walls, &wall_names)?;
        write_interaction(out, "psi_c", &mc)?;
        let mp = psi_p(&post_labels, config.k_p, &walls, &wall_names)?;
        write_interaction(out, "psi_p", &mp)?;

        let att = attention_ratio(&a, &walls, config.seed)?;
        let mut bins = [0usize; 20];
        let mut undefined = 0usize;
        for entry in &att {
            match entry {
                Some(at) => {
                    let b = ((at.ratio * 20.0).ceil() as usize).clamp(1, 20) - 1;
                    bins[b] += 1;
                }
                None => undefined += 1,
            }
        }
        let mut hist = format!("# citizens with zero degree: {undefined}\n");
        hist.push_str("bin_low\tbin_high\tcount\n");
        for (b, count) in bins.iter().enumerate() {
            hist.push_str(&format!(
                "{}\t{}\t{}\n",
                b as f64 / 20.0,
                (b + 1) as f64 / 20.0,
                count
            ));
        }
        write_text(&out.join("attention_histogram.tsv"), &hist)?;
    }

    // Keyword tables from the RAW count matrices (never the scaled ones).
    let x = art::read_matrix(input, art::CITIZEN_TERMS)?;
    let citizen_terms = art::read_vocab_terms(input, art::CITIZEN_VOCAB)
        .unwrap_or_else(|_| (0..x.n_cols()).map(|i| format!("c{i}")).collect());
    write_keywords(
        out,
        "keywords_citizen.tsv",
        &x,
        &citizen_terms,
        &citizen_labels,
        config.k_c,
        top_n,
    )?;
    let y = art::read_matrix(input, art::THREAD_TERMS)?;
    let thread_terms = art::read_vocab_terms(input, art::THREAD_VOCAB)
        .unwrap_or_else(|_| (0..y.n_cols()).map(|i| format!("t{i}")).collect());
    write_keywords(
        out,
        "keywords_thread.tsv",
        &y,
        &thread_terms,
        &post_labels,
        config.k_p,
        top_n,
    )?;

    // Central members from the label tables.
    write_central(out, "central_citizens.tsv", fit_dir, art::CITIZEN_LABELS, top_n)?;
    write_central(out, "central_posts.tsv", fit_dir, art::POST_LABELS, top_n)?;

    // Scree table copied from the fit artifacts.
    let scree = fs::read_to_string(fit_dir.join(art::SINGULAR_VALUES))
        .context("reading singular values from the fit directory")?;
    write_text(&out.join("scree.tsv"), &scree)?;

    println!("diagnostics -> {}", out.display());
    Ok(())
}

fn write_interaction(
    out: &Path,
    stem: &str,
    m: &coclust_core::diagnostics::InteractionMatrix,
) -> Result<()> {
    // Delimited export.
    let mut tsv = String::from("cluster");
    for c in &m.col_labels {
        tsv.push_str(&format!("\t{c}"));
    }
    tsv.push('\n');
    for (r, name) in m.row_labels.iter().enumerate() {
        tsv.push_str(name);
        for c in 0..m.col_labels.len() {
            tsv.push_str(&format!("\t{}", m.values.get(r, c)));
        }
        tsv.push('\n');
    }
    if !m.flagged_rows.is_empty() || !m.flagged_cols.is_empty() {
        tsv.push_str(&format!(
            "# flagged_rows: {:?}, flagged_cols: {:?}\n",
            m.flagged_rows, m.flagged_cols
        ));
    }
    write_text(&out.join(format!("{stem}.tsv")), &tsv)?;

    // Aligned text table for reading.
    let width = 12;
    let mut txt = format!("{:>width$}", "");
    for c in &m.col_labels {
        txt.push_str(&format!("{c:>width$}"));
    }
    txt.push('\n');
    for (r, name) in m.row_labels.iter().enumerate() {
        txt.push_str(&format!("{name:>width$}"));
        for c in 0..m.col_labels.len() {
            txt.push_str(&format!("{:>width$.5}", m.values.get(r, c)));
        }
        txt.push('\n');
    }
    write_text(&out.join(format!("{stem}.txt")), &txt)
}

fn write_keywords(
    out: &Path,
    name: &str,
    matrix: &SparseMatrix,
    terms: &[String],
    labels: &[usize],
    k: usize,
    top_n: usize,
) -> Result<()> {
    let mut text = String::from("cluster\tterm\tscore\n");
    for cluster in 0..k {
        match keyword_scores(matrix, terms, labels, cluster, top_n) {
            Ok(scores) => {
                for s in scores {
                    if s.zero_expected {
                        continue;
                    }
                    text.push_str(&format!("{}\t{}\t{}\n", cluster + 1, s.term, s.score));
                }
            }
            Err(coclust_core::Error::EmptyCluster { .. }) => {
                text.push_str(&format!("{}\t-\t-\n", cluster + 1));
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_text(&out.join(name), &text)
}

fn write_central(
    out: &Path,
    name: &str,
    fit_dir: &Path,
    labels_file: &str,
    top_n: usize,
) -> Result<()> {
    // Re-read labels with centralities from the fit table.
    let path = fit_dir.join(labels_file);
    let text = fs::read_to_string(&path)?;
    let mut rows: Vec<(usize, usize, f64)> = Vec::new(); // (cluster, node, rho)
    for line in text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let node: usize = fields.next().unwrap_or("").parse()?;
        let cluster: usize = fields.next().unwrap_or("").parse()?;
        let rho: f64 = fields.next().unwrap_or("").parse()?;
        rows.push((cluster, node, rho));
    }
    let k = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let mut out_text = String::from("cluster\trank\tnode\tcentrality\n");
    for cluster in 1..=k {
        let mut members: Vec<&(usize, usize, f64)> =
            rows.iter().filter(|r| r.0 == cluster).collect();
        members.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.1.cmp(&b.1)));
        for (rank, m) in members.iter().take(top_n).enumerate() {
            out_text.push_str(&format!("{cluster}\t{}\t{}\t{}\n", rank + 1, m.1, m.2));
        }
    }
    write_text(&out.join(name), &out_text)
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

/// Serializable benchmark protocol; mirrors [`BenchmarkConfig`].
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchRunConfig {
    /// Signal levels as powers of ten.
    pub exponents: Vec<f64>,
    /// Any of: both, graph, text.
    pub axes: Vec<String>,
    pub reps: usize,
    /// Any of: combined, graph_only, text_only, all_one.
    pub methods: Vec<String>,
    pub seed: u64,
    pub restarts: usize,
    pub alpha: f64,
    pub n_docs: usize,
    pub n_words: usize,
    pub mean_links: f64,
    pub mean_words: f64,
    /// uniform | two-point | power-law
    pub doc_degrees: String,
    pub degree_low: f64,
    pub degree_high: f64,
    pub degree_exponent: f64,
    pub degree_max_ratio: f64,
}

impl Default for BenchRunConfig {
    fn default() -> Self {
        BenchRunConfig {
            exponents: vec![-1.8, -1.0, -0.4, -0.2, 0.4, 1.0, 2.0, 3.0],
            axes: vec!["both".into(), "graph".into(), "text".into()],
            reps: 100,
            methods: vec!["combined".into()],
            seed: 0,
            restarts: 10_000,
            alpha: 0.05,
            n_docs: 1000,
            n_words: 1000,
            mean_links: 20.0,
            mean_words: 200.0,
            doc_degrees: "two-point".into(),
            degree_low: 0.55,
            degree_high: 1.45,
            degree_exponent: 2.0,
            degree_max_ratio: 2.0,
        }
    }
}

impl BenchRunConfig {
    fn degree_mode(&self) -> Result<DegreeMode> {
        Ok(match self.doc_degrees.as_str() {
            "uniform" => DegreeMode::Uniform,
            "two-point" => DegreeMode::TwoPoint {
                low: self.degree_low,
                high: self.degree_high,
            },
            "power-law" => DegreeMode::PowerLaw {
                exponent: self.degree_exponent,
                max_ratio: self.degree_max_ratio,
            },
            other => bail!("unknown doc_degrees `{other}` (uniform|two-point|power-law)"),
        })
    }

    pub fn to_benchmark_config(&self) -> Result<BenchmarkConfig> {
        let levels: Vec<f64> = self.exponents.iter().map(|e| 10f64.powf(*e)).collect();
        let mut grid = Vec::new();
        for axis in &self.axes {
            match axis.as_str() {
                "both" => grid.extend(grid_both_axis(&levels)),
                "graph" => grid.extend(grid_graph_axis(&levels)),
                "text" => grid.extend(grid_text_axis(&levels)),
                other => bail!("unknown axis `{other}` (both|graph|text)"),
            }
        }
        let methods = self
            .methods
            .iter()
            .map(|m| {
                Ok(match m.as_str() {
                    "combined" => BenchMethod::Combined,
                    "graph_only" => BenchMethod::GraphOnly,
                    "text_only" => BenchMethod::TextOnly,
                    "all_one" => BenchMethod::AllOne,
                    other => bail!(
                        "unknown method `{other}` (combined|graph_only|text_only|all_one)"
                    ),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = BenchmarkConfig::new(grid, self.reps, self.seed);
        cfg.methods = methods;
        cfg.alpha = self.alpha;
        cfg.restarts = self.restarts;
        cfg.docs = DocSimConfig {
            n_docs: self.n_docs,
            n_words: self.n_words,
            mean_links: self.mean_links,
            mean_words: self.mean_words,
            doc_degrees: self.degree_mode()?,
            word_degrees: DegreeMode::Uniform,
        };
        Ok(cfg)
    }
}

/// Benchmark manifest: config plus provenance, re-runnable via `--config`.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BenchManifest {
    pub config: BenchRunConfig,
    pub provenance: crate::config::Provenance,
}

pub fn load_bench_config(path: &Path) -> Result<BenchRunConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    if let Ok(manifest) = toml::from_str::<BenchManifest>(&text) {
        return Ok(manifest.config);
    }
    Ok(toml::from_str(&text)
        .with_context(|| format!("parsing benchmark config {}", path.display()))?)
}

pub fn cmd_benchmark(out: &Path, config: &BenchRunConfig) -> Result<()> {
    let cfg = config.to_benchmark_config()?;
    let result = run_benchmark(&cfg);

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut tsv = String::from("sig_g\tsig_t\tmethod\tmean_rate\tstd_rate\tn_ok\tn_failed\n");
    let mut timings = String::from("sig_g\tsig_t\tmethod\tseconds\n");
    for c in &result.cells {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            c.sig_g,
            c.sig_t,
            c.method.name(),
            c.mean_rate,
            c.std_rate,
            c.n_ok,
            c.n_failed
        ));
        timings.push_str(&format!(
            "{}\t{}\t{}\t{:.3}\n",
            c.sig_g,
            c.sig_t,
            c.method.name(),
            c.seconds
        ));
    }
    write_text(&out.join(art::BENCHMARK), &tsv)?;
    write_text(&out.join(art::BENCHMARK_TIMINGS), &timings)?;

    let manifest = BenchManifest {
        config: config.clone(),
        provenance: crate::config::Provenance {
            tool: "coclust".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: "benchmark".to_string(),
        },
    };
    write_text(
        &out.join(art::MANIFEST),
        &toml::to_string_pretty(&manifest)?,
    )?;
    println!(
        "benchmark: {} cells x {} reps -> {}",
        cfg.grid.len(),
        cfg.n_reps,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NcscbmArgs {
    pub n_citizens: usize,
    pub n_posts: usize,
    pub k: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub m_c: usize,
    pub m_p: usize,
    pub covariate_mean: f64,
    pub noise: f64,
    pub seed: u64,
}

pub fn cmd_simulate_ncscbm(out: &Path, args: &NcscbmArgs) -> Result<()> {
    let k = args.k;
    let b = Mat::from_fn(k, k, |i, j| if i == j { args.p_in } else { args.p_out });
    let e_c = Mat::from_fn(k, args.m_c, |i, t| {
        if t % k == i {
            args.covariate_mean
        } else {
            0.0
        }
    });
    let e_p = Mat::from_fn(k, args.m_p, |i, t| {
        if t % k == i {
            args.covariate_mean
        } else {
            0.0
        }
    });
    let mut spec =
        BlockModelSpec::balanced(args.n_citizens, args.n_posts, b, e_c, e_p, args.noise);
    spec.membership = Membership::Probabilities {
        citizens: vec![1.0 / k as f64; k],
        posts: vec![1.0 / k as f64; k],
    };
    if !spec.is_identifiable() {
        eprintln!("warning: block matrix is rank deficient; blocks are not identifiable");
    }
    let sample = sample_ncscbm(&spec, args.seed)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_matrix(out, art::ADJACENCY, &sample.a)?;
    write_matrix(out, art::CITIZEN_TERMS, &sample.x)?;
    write_matrix(out, art::THREAD_TERMS, &sample.y)?;
    write_truth(out, "citizen_truth.tsv", &sample.citizen_labels)?;
    write_truth(out, "post_truth.tsv", &sample.post_labels)?;
    let manifest = format!(
        "model\tncscbm\nn_citizens\t{}\nn_posts\t{}\nk\t{}\np_in\t{}\np_out\t{}\n\
         m_c\t{}\nm_p\t{}\ncovariate_mean\t{}\nnoise\t{}\nseed\t{}\nedges\t{}\n",
        args.n_citizens,
        args.n_posts,
        args.k,
        args.p_in,
        args.p_out,
        args.m_c,
        args.m_p,
        args.covariate_mean,
        args.noise,
        args.seed,
        sample.a.nnz()
    );
    write_text(&out.join("simulate.tsv"), &manifest)?;
    println!(
        "simulated {} x {} blockmodel with {} edges -> {}",
        args.n_citizens,
        args.n_posts,
        sample.a.nnz(),
        out.display()
    );
    Ok(())
}

#[derive(Clone, Debug)]
pub struct DocsArgs {
    pub n_docs: usize,
    pub n_words: usize,
    pub sig_g: f64,
    pub sig_t: f64,
    pub mean_links: f64,
    pub mean_words: f64,
    pub seed: u64,
}

pub fn cmd_simulate_docs(out: &Path, args: &DocsArgs) -> Result<()> {
    let cfg = DocSimConfig {
        n_docs: args.n_docs,
        n_words: args.n_words,
        mean_links: args.mean_links,
        mean_words: args.mean_words,
        ..DocSimConfig::default()
    };
    let sample = sample_dcsbm_docs(&cfg, args.sig_g, args.sig_t, args.seed)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_matrix(out, art::ADJACENCY, &sample.a)?;
    write_matrix(out, art::CITIZEN_TERMS, &sample.x)?;
    // Documents play both node roles; the same word matrix contextualizes
    // both sides.
    write_matrix(out, art::THREAD_TERMS, &sample.x)?;
    write_truth(out, "citizen_truth.tsv", &sample.doc_labels)?;
    write_truth(out, "word_truth.tsv", &sample.word_labels)?;
    let manifest = format!(
        "model\tdocs\nn_docs\t{}\nn_words\t{}\nsig_g\t{}\nsig_t\t{}\nmean_links\t{}\n\
         mean_words\t{}\nseed\t{}\nlinks\t{}\n",
        args.n_docs,
        args.n_words,
        args.sig_g,
        args.sig_t,
        args.mean_links,
        args.mean_words,
        args.seed,
        sample.a.nnz() / 2
    );
    write_text(&out.join("simulate.tsv"), &manifest)?;
    println!(
        "simulated {} documents with {} links -> {}",
        args.n_docs,
        sample.a.nnz() / 2,
        out.display()
    );
    Ok(())
}

fn write_truth(out: &Path, name: &str, labels: &[usize]) -> Result<()> {
    let mut text = String::from("node\tblock\n");
    for (i, &l) in labels.iter().enumerate() {
        text.push_str(&format!("{i}\t{}\n", l + 1));
    }
    write_text(&out.join(name), &text)
}
