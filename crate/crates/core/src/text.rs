//! Corpus ingestion: discussion threads in, adjacency and document-term
//! matrices out.
//!
//! A corpus is a set of wall posts plus the comments underneath them.
//! External string keys are internalized to dense indices (posts, citizens,
//! and walls each get their own id space) with bidirectional maps kept for
//! export. From the tokenized text we build
//!
//! - `A` (citizens x posts): comment counts,
//! - `X` (citizens x citizen-words): number of a citizen's comments that
//!   contain the word (binary per comment),
//! - `Y` (posts x thread-words): post-contains indicator plus the number of
//!   comments under the post that contain the word,
//!
//! and optionally TF-IDF weighted variants of `X` and `Y`.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::{build_sparse, SparseMatrix};

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// A pluggable token-to-root mapping.
pub type Stemmer = Box<dyn Fn(&str) -> String + Send + Sync>;

/// Splits text into lowercase word tokens.
///
/// Token candidates are maximal runs of alphanumeric characters; candidates
/// containing a digit are dropped, then stopwords are removed and the
/// (pluggable) stemmer is applied. The default stemmer is the identity.
pub struct Tokenizer {
    stopwords: HashSet<String>,
    stemmer: Option<Stemmer>,
}

impl Tokenizer {
    pub fn new(stopwords: HashSet<String>) -> Tokenizer {
        Tokenizer {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
            stemmer: None,
        }
    }

    pub fn without_stopwords() -> Tokenizer {
        Tokenizer::new(HashSet::new())
    }

    pub fn with_stemmer(
        mut self,
        stemmer: impl Fn(&str) -> String + Send + Sync + 'static,
    ) -> Tokenizer {
        self.stemmer = Some(Box::new(stemmer));
        self
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        for candidate in text.split(|c: char| !c.is_alphanumeric()) {
            if candidate.is_empty() || candidate.chars().any(|c| c.is_numeric()) {
                continue;
            }
            let lowered = candidate.to_lowercase();
            if self.stopwords.contains(&lowered) {
                continue;
            }
            let token = match &self.stemmer {
                Some(stem) => stem(&lowered),
                None => lowered,
            };
            tokens.push(token);
        }
        tokens
    }
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Post {
    pub wall: usize,
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct Comment {
    pub citizen: usize,
    pub post: usize,
    pub text: String,
}

/// Internalized discussion threads. Posts, citizens, and walls carry dense
/// consecutive ids assigned in first-appearance order of the input records,
/// so the same records always produce the same ids.
#[derive(Clone, Debug, Default)]
pub struct ThreadCorpus {
    posts: Vec<Post>,
    comments: Vec<Comment>,
    post_keys: Vec<String>,
    comment_keys: Vec<String>,
    citizen_keys: Vec<String>,
    wall_keys: Vec<String>,
    post_index: HashMap<String, usize>,
    citizen_index: HashMap<String, usize>,
    wall_index: HashMap<String, usize>,
}

impl ThreadCorpus {
    pub fn n_posts(&self) -> usize {
        self.posts.len()
    }

    pub fn n_comments(&self) -> usize {
        self.comments.len()
    }

    pub fn n_citizens(&self) -> usize {
        self.citizen_keys.len()
    }

    pub fn n_walls(&self) -> usize {
        self.wall_keys.len()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn post_keys(&self) -> &[String] {
        &self.post_keys
    }

    pub fn citizen_keys(&self) -> &[String] {
        &self.citizen_keys
    }

    pub fn wall_keys(&self) -> &[String] {
        &self.wall_keys
    }

    pub fn post_id(&self, key: &str) -> Option<usize> {
        self.post_index.get(key).copied()
    }

    pub fn citizen_id(&self, key: &str) -> Option<usize> {
        self.citizen_index.get(key).copied()
    }

    /// Wall id of every post, indexed by post id.
    pub fn wall_of_post(&self) -> Vec<usize> {
        self.posts.iter().map(|p| p.wall).collect()
    }
}

/// Accumulates raw records and resolves references when finished, so comments
/// may appear before their post in the input.
#[derive(Default)]
pub struct CorpusBuilder {
    posts: Vec<(String, String, String)>,
    comments: Vec<(String, String, String, String)>,
}

impl CorpusBuilder {
    pub fn new() -> CorpusBuilder {
        CorpusBuilder::default()
    }

    pub fn add_post(&mut self, key: &str, wall_key: &str, text: &str) {
        self.posts
            .push((key.to_string(), wall_key.to_string(), text.to_string()));
    }

    pub fn add_comment(&mut self, key: &str, post_key: &str, author_key: &str, text: &str) {
        self.comments.push((
            key.to_string(),
            post_key.to_string(),
            author_key.to_string(),
            text.to_string(),
        ));
    }

    pub fn finish(self) -> Result<ThreadCorpus> {
        let mut corpus = ThreadCorpus::default();
        for (key, wall_key, text) in self.posts {
            if corpus.post_index.contains_key(&key) {
                return Err(Error::Corpus(format!("duplicate post id `{key}`")));
            }
            let wall = intern(&mut corpus.wall_index, &mut corpus.wall_keys, &wall_key);
            corpus.post_index.insert(key.clone(), corpus.posts.len());
            corpus.post_keys.push(key);
            corpus.posts.push(Post { wall, text });
        }
        for (key, post_key, author_key, text) in self.comments {
            let post = *corpus.post_index.get(&post_key).ok_or_else(|| {
                Error::Corpus(format!(
                    "comment `{key}` references unknown post `{post_key}`"
                ))
            })?;
            let citizen = intern(
                &mut corpus.citizen_index,
                &mut corpus.citizen_keys,
                &author_key,
            );
            corpus.comment_keys.push(key);
            corpus.comments.push(Comment {
                citizen,
                post,
                text,
            });
        }
        Ok(corpus)
    }
}

fn intern(index: &mut HashMap<String, usize>, keys: &mut Vec<String>, key: &str) -> usize {
    if let Some(&id) = index.get(key) {
        return id;
    }
    let id = keys.len();
    index.insert(key.to_string(), id);
    keys.push(key.to_string());
    id
}

// ---------------------------------------------------------------------------
// Record file format
//
// One record per line, five tab-separated fields:
//
//   post    <TAB> <post id>    <TAB> <wall id> <TAB> <ignored> <TAB> <text>
//   comment <TAB> <comment id> <TAB> <post id> <TAB> <author>  <TAB> <text>
//
// Text is escaped on write (\t, \n, \\); empty lines are skipped. UTF-8.
// ---------------------------------------------------------------------------

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn read_corpus<R: BufRead>(reader: R, path: &str) -> Result<ThreadCorpus> {
    let mut builder = CorpusBuilder::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.splitn(5, '\t').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let text = unescape_text(fields[4]);
        match fields[0] {
            "post" => builder.add_post(fields[1], fields[2], &text),
            "comment" => builder.add_comment(fields[1], fields[2], fields[3], &text),
            other => {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("unknown record kind `{other}` (expected post|comment)"),
                });
            }
        }
    }
    builder.finish().map_err(|e| match e {
        Error::Corpus(msg) => Error::Parse {
            path: path.to_string(),
            line: 0,
            message: msg,
        },
        other => other,
    })
}

pub fn write_corpus<W: Write>(corpus: &ThreadCorpus, mut w: W) -> std::io::Result<()> {
    for (id, post) in corpus.posts.iter().enumerate() {
        writeln!(
            w,
            "post\t{}\t{}\t\t{}",
            corpus.post_keys[id],
            corpus.wall_keys[post.wall],
            escape_text(&post.text)
        )?;
    }
    for (id, comment) in corpus.comments.iter().enumerate() {
        writeln!(
            w,
            "comment\t{}\t{}\t{}\t{}",
            corpus.comment_keys[id],
            corpus.post_keys[comment.post],
            corpus.citizen_keys[comment.citizen],
            escape_text(&comment.text)
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// A frequency-cutoff vocabulary. A term is retained when it appears in at
/// least `ceil(cutoff * n_documents)` documents; retained terms are ordered
/// lexicographically.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    cutoff: f64,
    n_documents: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_documents<'a, I>(documents: I, cutoff: f64) -> Result<Vocabulary>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        if !(cutoff > 0.0 && cutoff <= 1.0) {
            return Err(Error::invalid(
                "cutoff",
                format!("must lie in (0, 1], got {cutoff}"),
            ));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n_documents = 0usize;
        let mut seen: HashSet<&str> = HashSet::new();
        for doc in documents {
            n_documents += 1;
            seen.clear();
            for token in doc {
                if seen.insert(token.as_str()) {
                    *df.entry(token.clone()).or_insert(0) += 1;
                }
            }
        }
        let min_df = ((cutoff * n_documents as f64).ceil() as usize).max(1);
        let mut retained: Vec<(String, usize)> = df
            .into_iter()
            .filter(|&(_, count)| count >= min_df)
            .collect();
        retained.sort_by(|a, b| a.0.cmp(&b.0));

        let terms: Vec<String> = retained.iter().map(|(t, _)| t.clone()).collect();
        let doc_frequency: Vec<usize> = retained.iter().map(|&(_, c)| c).collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms,
            doc_frequency,
            cutoff,
            n_documents,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_frequency(&self) -> &[usize] {
        &self.doc_frequency
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// One `term<TAB>doc_frequency` line per term.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (term, df) in self.terms.iter().zip(&self.doc_frequency) {
            writeln!(w, "{}\t{}", term, df)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tokenized corpus and matrices
// ---------------------------------------------------------------------------

/// Tokenized text of every post and comment, computed once and shared by
/// vocabulary construction and matrix assembly.
pub struct TokenizedCorpus {
    pub post_tokens: Vec<Vec<String>>,
    pub comment_tokens: Vec<Vec<String>>,
}

pub fn tokenize_corpus(corpus: &ThreadCorpus, tokenizer: &Tokenizer) -> TokenizedCorpus {
    TokenizedCorpus {
        post_tokens: corpus
            .posts()
            .iter()
            .map(|p| tokenizer.tokenize(&p.text))
            .collect(),
        comment_tokens: corpus
            .comments()
            .iter()
            .map(|c| tokenizer.tokenize(&c.text))
            .collect(),
    }
}

impl TokenizedCorpus {
    /// Vocabulary over comments only (the citizen-word dictionary).
    pub fn citizen_vocabulary(&self, cutoff: f64) -> Result<Vocabulary> {
        Vocabulary::from_documents(self.comment_tokens.iter().map(|t| t.as_slice()), cutoff)
    }

    /// Vocabulary over posts and comments as individual documents (the
    /// thread-word dictionary).
    pub fn thread_vocabulary(&self, cutoff: f64) -> Result<Vocabulary> {
        Vocabulary::from_documents(
            self.post_tokens
                .iter()
                .chain(self.comment_tokens.iter())
                .map(|t| t.as_slice()),
            cutoff,
        )
    }
}

/// `A[i][j]` = number of comments by citizen `i` on post `j`.
pub fn build_adjacency(corpus: &ThreadCorpus) -> SparseMatrix {
    let triplets: Vec<(usize, usize, f64)> = corpus
        .comments()
        .iter()
        .map(|c| (c.citizen, c.post, 1.0))
        .collect();
    build_sparse(&triplets, corpus.n_citizens(), corpus.n_posts())
        .expect("internal ids are in range by construction")
}

fn distinct_vocab_terms(tokens: &[String], vocab: &Vocabulary) -> Vec<usize> {
    let mut ids: Vec<usize> = tokens.iter().filter_map(|t| vocab.index_of(t)).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// `X[i][j]` = number of citizen-`i` comments that contain term `j`
/// (binary per comment, summed over comments).
pub fn build_citizen_terms(
    corpus: &ThreadCorpus,
    tokenized: &TokenizedCorpus,
    vocab: &Vocabulary,
) -> SparseMatrix {
    let mut triplets = Vec::new();
    for (comment, tokens) in corpus.comments().iter().zip(&tokenized.comment_tokens) {
        for term in distinct_vocab_terms(tokens, vocab) {
            triplets.push((comment.citizen, term, 1.0));
        }
    }
    build_sparse(&triplets, corpus.n_citizens(), vocab.len())
        .expect("internal ids are in range by construction")
}

/// `Y[i][j]` = (post `i` contains term `j`) + number of comments under post
/// `i` that contain term `j`.
pub fn build_thread_terms(
    corpus: &ThreadCorpus,
    tokenized: &TokenizedCorpus,
    vocab: &Vocabulary,
) -> SparseMatrix {
    let mut triplets = Vec::new();
    for (post, tokens) in tokenized.post_tokens.iter().enumerate() {
        for term in distinct_vocab_terms(tokens, vocab) {
            triplets.push((post, term, 1.0));
        }
    }
    for (comment, tokens) in corpus.comments().iter().zip(&tokenized.comment_tokens) {
        for term in distinct_vocab_terms(tokens, vocab) {
            triplets.push((comment.post, term, 1.0));
        }
    }
    build_sparse(&triplets, corpus.n_posts(), vocab.len())
        .expect("internal ids are in range by construction")
}

/// TF-IDF weighted variants of the document-term matrices.
///
/// Documents are the individual posts and comments pooled together; for each
/// document, a term's weight is `(occurrences / doc length) * log2(n_docs /
/// doc_freq)`. The citizen matrix sums the weighted comment rows per citizen;
/// the post matrix is the weighted matrix of the post texts themselves.
pub fn tfidf_weight(
    corpus: &ThreadCorpus,
    tokenized: &TokenizedCorpus,
    citizen_vocab: &Vocabulary,
    thread_vocab: &Vocabulary,
) -> (SparseMatrix, SparseMatrix) {
    let n_docs = corpus.n_posts() + corpus.n_comments();

    // Pooled document frequency per term string.
    let mut pooled_df: HashMap<&str, usize> = HashMap::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for tokens in tokenized
        .post_tokens
        .iter()
        .chain(tokenized.comment_tokens.iter())
    {
        seen.clear();
        for t in tokens {
            if seen.insert(t.as_str()) {
                *pooled_df.entry(t.as_str()).or_insert(0) += 1;
            }
        }
    }

    let weigh = |tokens: &[String],
                 vocab: &Vocabulary,
                 row: usize,
                 out: &mut Vec<(usize, usize, f64)>| {
        if tokens.is_empty() {
            return;
        }
        let doc_len = tokens.len() as f64;
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for t in tokens {
            if let Some(id) = vocab.index_of(t) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(usize, usize)> = counts.into_iter().collect();
        entries.sort_unstable();
        for (term_id, occurrences) in entries {
            let df = pooled_df
                .get(vocab.terms()[term_id].as_str())
                .copied()
                .unwrap_or(0);
            if df == 0 {
                continue;
            }
            let idf = (n_docs as f64 / df as f64).log2();
            let tf = occurrences as f64 / doc_len;
            out.push((row, term_id, tf * idf));
        }
    };

    let mut x_triplets = Vec::new();
    for (comment, tokens) in corpus.comments().iter().zip(&tokenized.comment_tokens) {
        weigh(tokens, citizen_vocab, comment.citizen, &mut x_triplets);
    }
    let x = build_sparse(&x_triplets, corpus.n_citizens(), citizen_vocab.len())
        .expect("internal ids are in range by construction");

    let mut y_triplets = Vec::new();
    for (post, tokens) in tokenized.post_tokens.iter().enumerate() {
        weigh(tokens, thread_vocab, post, &mut y_triplets);
    }
    let y = build_sparse(&y_triplets, corpus.n_posts(), thread_vocab.len())
        .expect("internal ids are in range by construction");

    (x, y)
}
