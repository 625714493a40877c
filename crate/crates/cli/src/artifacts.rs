//! Canonical artifact names and plain-text readers/writers. Everything is
//! delimited text; floats print in shortest round-trip form so identical runs
//! produce identical bytes.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use coclust_core::sparse::{read_triplets, write_triplets, SparseMatrix};

pub const ADJACENCY: &str = "a.mtx";
pub const CITIZEN_TERMS: &str = "x.mtx";
pub const THREAD_TERMS: &str = "y.mtx";
pub const CITIZEN_TERMS_TFIDF: &str = "x_tfidf.mtx";
pub const THREAD_TERMS_TFIDF: &str = "y_tfidf.mtx";
pub const CITIZEN_VOCAB: &str = "citizen_vocab.tsv";
pub const THREAD_VOCAB: &str = "thread_vocab.tsv";
pub const CITIZEN_IDS: &str = "citizens.tsv";
pub const POST_IDS: &str = "posts.tsv";
pub const WALL_IDS: &str = "walls.tsv";
pub const CITIZEN_LABELS: &str = "citizen_labels.tsv";
pub const POST_LABELS: &str = "post_labels.tsv";
pub const SINGULAR_VALUES: &str = "singular_values.tsv";
pub const CITIZEN_EMBEDDING: &str = "embedding_citizens.tsv";
pub const POST_EMBEDDING: &str = "embedding_posts.tsv";
pub const THRESHOLDED_W: &str = "w_thresholded.tsv";
pub const MANIFEST: &str = "manifest.toml";
pub const BENCHMARK: &str = "benchmark.tsv";
pub const BENCHMARK_TIMINGS: &str = "benchmark_timings.tsv";

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn read_matrix(dir: &Path, name: &str) -> Result<SparseMatrix> {
    let path = dir.join(name);
    let file =
        fs::File::open(&path).with_context(|| format!("opening matrix {}", path.display()))?;
    Ok(read_triplets(BufReader::new(file), &path.display().to_string())?)
}

pub fn write_matrix(dir: &Path, name: &str, m: &SparseMatrix) -> Result<PathBuf> {
    let path = dir.join(name);
    let file =
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_triplets(m, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(path)
}

/// One `key` per line keyed by dense id (line order = id order).
pub fn write_keys(dir: &Path, name: &str, header: &str, keys: &[String]) -> Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (id, key) in keys.iter().enumerate() {
        out.push_str(&format!("{id}\t{key}\n"));
    }
    write_text(&dir.join(name), &out)
}

pub fn read_keys(dir: &Path, name: &str) -> Result<Vec<String>> {
    let path = dir.join(name);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.splitn(2, '\t').nth(1).unwrap_or("").to_string())
        .collect())
}

/// Vocabulary terms (term<TAB>doc_frequency, no header).
pub fn read_vocab_terms(dir: &Path, name: &str) -> Result<Vec<String>> {
    let path = dir.join(name);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split('\t').next().unwrap_or("").to_string())
        .collect())
}

/// Label table: node id, 1-based cluster, centrality, low-confidence flag.
pub fn write_labels(
    dir: &Path,
    name: &str,
    labels: &[usize],
    centrality: &[f64],
    low_confidence: &[usize],
) -> Result<()> {
    let flagged: std::collections::HashSet<usize> = low_confidence.iter().copied().collect();
    let mut out = String::from("node\tcluster\tcentrality\tflagged\n");
    for (i, &l) in labels.iter().enumerate() {
        out.push_str(&format!(
            "{i}\t{}\t{}\t{}\n",
            l + 1,
            centrality[i],
            u8::from(flagged.contains(&i))
        ));
    }
    write_text(&dir.join(name), &out)
}

pub fn read_labels(dir: &Path, name: &str) -> Result<Vec<usize>> {
    let path = dir.join(name);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cluster: usize = line
            .split('\t')
            .nth(1)
            .and_then(|s| s.parse().ok())
            .with_context(|| format!("{}:{}: malformed label line", path.display(), no + 1))?;
        labels.push(cluster - 1);
    }
    Ok(labels)
}

/// Wall id per post from the posts table (id, key, wall columns).
pub fn read_post_walls(dir: &Path) -> Result<Vec<usize>> {
    let path = dir.join(POST_IDS);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut walls = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let wall: usize = line
            .split('\t')
            .nth(2)
            .and_then(|s| s.parse().ok())
            .with_context(|| format!("{}:{}: malformed post line", path.display(), no + 1))?;
        walls.push(wall);
    }
    Ok(walls)
}
