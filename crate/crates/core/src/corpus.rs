//! Corpus, lexicon, category-map, and vector-table ingestion, plus a
//! deterministic synthetic corpus generator for desk-scale runs.
//!
//! File formats:
//! - corpus: repeating two-line records; line 1 is whitespace-separated
//!   word tokens, line 2 is `SEM:` followed by whitespace-separated
//!   feature identifiers. A JSON-lines alternative
//!   (`{"words": [...], "features": [...]}` per line) is supported.
//! - lexicon: TSV, `word<TAB>feature1,feature2,...`
//! - category map: CSV, `word,category1;category2;...`
//! - vector table: CSV, header `word,<feature names...>`, then
//!   `word,v1,v2,...` rows with floats at 6 decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One linguistic input: an ordered, de-duplicated, lowercased word set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    words: Vec<String>,
}

/// The non-linguistic side of an input pair: a set of semantic features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    features: BTreeSet<String>,
}

/// Gold-standard word meanings: word -> set of hypernym-style features.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

/// Word -> subcategory labels (a word may hold several).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMap {
    entries: BTreeMap<String, BTreeSet<String>>,
}

/// Dense word vectors over a shared, sorted feature index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorTable {
    features: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
}

/// What to do with words missing from the lexicon during scene synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownWordPolicy {
    /// Error out naming the first unknown word.
    Strict,
    /// Drop unknown words; drop the pair entirely if nothing is left.
    Skip,
}

fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::Validation("empty token".into()));
    }
    if token.chars().any(|c| c.is_whitespace()) || token.contains(',') || token.contains(';') || token.contains('#') {
        return Err(Error::Validation(format!(
            "token `{token}` contains whitespace or a reserved character (, ; #)"
        )));
    }
    Ok(())
}

impl Utterance {
    /// Lowercases, validates, and de-duplicates tokens, keeping first-occurrence order.
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in tokens {
            let t = tok.as_ref().to_lowercase();
            validate_token(&t)?;
            if seen.insert(t.clone()) {
                words.push(t);
            }
        }
        if words.is_empty() {
            return Err(Error::Validation("empty utterance".into()));
        }
        Ok(Utterance { words })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }
}

impl Scene {
    pub fn new<I, S>(features: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for f in features {
            let f = f.as_ref().to_string();
            validate_token(&f)?;
            set.insert(f);
        }
        if set.is_empty() {
            return Err(Error::Validation("empty scene".into()));
        }
        Ok(Scene { features: set })
    }

    pub fn features(&self) -> &BTreeSet<String> {
        &self.features
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.features.contains(feature)
    }
}

impl GoldLexicon {
    pub fn new(entries: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        for (word, feats) in &entries {
            validate_token(word)?;
            if feats.is_empty() {
                return Err(Error::Validation(format!("word `{word}` has an empty feature set")));
            }
            for f in feats {
                validate_token(f)?;
            }
        }
        Ok(GoldLexicon { entries })
    }

    pub fn features(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl CategoryMap {
    pub fn new(entries: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        for (word, cats) in &entries {
            validate_token(word)?;
            if cats.is_empty() {
                return Err(Error::Validation(format!("word `{word}` has no categories")));
            }
            for c in cats {
                validate_token(c)?;
            }
        }
        Ok(CategoryMap { entries })
    }

    pub fn categories(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl VectorTable {
    /// Canonicalizes to sorted feature order; every row is permuted to match.
    pub fn new(features: Vec<String>, rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        for f in &features {
            validate_token(f)?;
        }
        let dim = features.len();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| features[a].cmp(&features[b]));
        let sorted_features: Vec<String> = order.iter().map(|&i| features[i].clone()).collect();
        for pair in sorted_features.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Validation(format!("duplicate feature `{}`", pair[0])));
            }
        }

        let mut map = BTreeMap::new();
        for (word, vec) in rows {
            validate_token(&word)?;
            if vec.len() != dim {
                return Err(Error::DimensionMismatch(vec.len(), dim));
            }
            if vec.iter().all(|v| *v == 0.0) {
                return Err(Error::ZeroVector(word));
            }
            let permuted: Vec<f64> = order.iter().map(|&i| vec[i]).collect();
            if map.insert(word.clone(), permuted).is_some() {
                return Err(Error::Validation(format!("duplicate word `{word}`")));
            }
        }
        Ok(VectorTable {
            features: sorted_features,
            rows: map,
        })
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.rows.get(word).map(|v| v.as_slice())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.rows.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.rows.keys()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Corpus parsing and serialization
// ---------------------------------------------------------------------------

const SCENE_PREFIX: &str = "SEM:";

/// Parses the two-line corpus format. Blank lines are allowed between records.
pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Vec<(Utterance, Scene)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_corpus_str(&text, path)
}

pub fn parse_corpus_str(text: &str, path: impl AsRef<Path>) -> Result<Vec<(Utterance, Scene)>> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    let mut pending: Option<(usize, Utterance)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match pending.take() {
            None => {
                if line.starts_with(SCENE_PREFIX) {
                    return Err(Error::parse(path, lineno, "scene line without a preceding utterance"));
                }
                let utt = Utterance::new(line.split_whitespace())
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                pending = Some((lineno, utt));
            }
            Some((utt_line, utt)) => {
                let Some(rest) = line.strip_prefix(SCENE_PREFIX) else {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("expected scene line (`{SCENE_PREFIX} ...`) for utterance at line {utt_line}"),
                    ));
                };
                let scene = Scene::new(rest.split_whitespace())
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                pairs.push((utt, scene));
            }
        }
    }
    if let Some((utt_line, _)) = pending {
        return Err(Error::parse(path, utt_line, "utterance has no scene line"));
    }
    Ok(pairs)
}

pub fn write_corpus(pairs: &[(Utterance, Scene)]) -> String {
    let mut out = String::new();
    for (utt, scene) in pairs {
        let _ = writeln!(out, "{}", utt.words.join(" "));
        let feats: Vec<&str> = scene.features.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "{SCENE_PREFIX} {}", feats.join(" "));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonlRecord {
    words: Vec<String>,
    features: Vec<String>,
}

/// JSON-lines corpus alternative: one `{"words": [...], "features": [...]}` per line.
pub fn parse_corpus_jsonl(path: impl AsRef<Path>) -> Result<Vec<(Utterance, Scene)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        let utt = Utterance::new(rec.words.iter())
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        let scene = Scene::new(rec.features.iter())
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        pairs.push((utt, scene));
    }
    Ok(pairs)
}

/// Words-only corpus: one utterance per line (scenes synthesized separately).
pub fn parse_utterances(path: impl AsRef<Path>) -> Result<Vec<Utterance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut utts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with(SCENE_PREFIX) {
            continue; // tolerate paired files by ignoring scene lines
        }
        utts.push(
            Utterance::new(line.split_whitespace())
                .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?,
        );
    }
    Ok(utts)
}

// ---------------------------------------------------------------------------
// Lexicon / category / vector / word-list files
// ---------------------------------------------------------------------------

pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<GoldLexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let (word, feats) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `word<TAB>feature1,feature2,...`"))?;
        let set: BTreeSet<String> = feats
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if entries.insert(word.trim().to_string(), set).is_some() {
            return Err(Error::parse(path, idx + 1, format!("duplicate word `{}`", word.trim())));
        }
    }
    GoldLexicon::new(entries)
}

pub fn write_lexicon(lexicon: &GoldLexicon) -> String {
    let mut out = String::new();
    for (word, feats) in &lexicon.entries {
        let feats: Vec<&str> = feats.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "{word}\t{}", feats.join(","));
    }
    out
}

pub fn parse_categories(path: impl AsRef<Path>) -> Result<CategoryMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (word, cats) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `word,category1;category2;...`"))?;
        let set: BTreeSet<String> = cats
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if entries.insert(word.trim().to_string(), set).is_some() {
            return Err(Error::parse(path, idx + 1, format!("duplicate word `{}`", word.trim())));
        }
    }
    CategoryMap::new(entries)
}

pub fn write_categories(categories: &CategoryMap) -> String {
    let mut out = String::new();
    for (word, cats) in &categories.entries {
        let cats: Vec<&str> = cats.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "{word},{}", cats.join(";"));
    }
    out
}

pub fn parse_vectors(path: impl AsRef<Path>) -> Result<VectorTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (hidx, header) = loop {
        match lines.next() {
            Some((i, l)) if l.trim().is_empty() => {
                let _ = i;
                continue;
            }
            Some((i, l)) => break (i, l),
            None => return Ok(VectorTable::default()),
        }
    };
    let mut fields = header.split(',').map(str::trim);
    let first = fields
        .next()
        .ok_or_else(|| Error::parse(path, hidx + 1, "empty header"))?;
    let mut features: Vec<String> = fields.map(String::from).collect();
    if first != "word" {
        features.insert(0, first.to_string());
    }

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let word = fields.next().unwrap_or_default().to_string();
        let mut vec = Vec::with_capacity(features.len());
        for v in fields {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("bad float `{v}`")))?;
            vec.push(x);
        }
        if vec.len() != features.len() {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected {} values, found {}", features.len(), vec.len()),
            ));
        }
        rows.push((word, vec));
    }
    VectorTable::new(features, rows)
}

pub fn write_vectors(table: &VectorTable) -> String {
    let mut out = String::from("word");
    for f in &table.features {
        let _ = write!(out, ",{f}");
    }
    out.push('\n');
    for (word, vec) in &table.rows {
        let _ = write!(out, "{word}");
        for v in vec {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

/// One word per line; blank lines and `#` comments skipped.
pub fn parse_wordlist(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut words = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        validate_token(line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        words.push(line.to_string());
    }
    Ok(words)
}

// ---------------------------------------------------------------------------
// Scene synthesis
// ---------------------------------------------------------------------------

/// Builds each scene as the union of the gold features of the utterance's words.
pub fn synthesize_scenes(
    utterances: &[Utterance],
    lexicon: &GoldLexicon,
    policy: UnknownWordPolicy,
) -> Result<Vec<(Utterance, Scene)>> {
    let mut pairs = Vec::with_capacity(utterances.len());
    for utt in utterances {
        let mut known = Vec::new();
        let mut union: BTreeSet<String> = BTreeSet::new();
        for word in utt.words() {
            match lexicon.features(word) {
                Some(feats) => {
                    known.push(word.clone());
                    union.extend(feats.iter().cloned());
                }
                None => match policy {
                    UnknownWordPolicy::Strict => return Err(Error::UnknownWord(word.clone())),
                    UnknownWordPolicy::Skip => {}
                },
            }
        }
        if known.is_empty() {
            log::warn!("dropping utterance with no lexicon words: {:?}", utt.words());
            continue;
        }
        let utt = Utterance::new(known)?;
        let scene = Scene::new(union)?;
        pairs.push((utt, scene));
    }
    Ok(pairs)
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator
// ---------------------------------------------------------------------------

/// Probability that a sampled token stays inside the utterance's primary
/// depth-1 category; the remainder is drawn from the whole vocabulary.
const LOCALITY_BIAS: f64 = 0.75;

/// Generates a corpus over the leaves of a complete taxonomy tree.
///
/// Words are the `branching^depth` leaves; each word's gold features are the
/// names of its `depth` ancestors (root included); categories are the
/// depth-1 subtree labels. Utterances pick a primary category and sample
/// tokens with a within-category locality bias. Deterministic given `seed`.
pub fn generate_synthetic_corpus(
    taxonomy_depth: usize,
    branching: usize,
    num_utterances: usize,
    utterance_len: usize,
    seed: u64,
) -> Result<(Vec<(Utterance, Scene)>, GoldLexicon, CategoryMap)> {
    if taxonomy_depth < 1 || branching < 1 || num_utterances < 1 || utterance_len < 1 {
        return Err(Error::Validation(
            "taxonomy_depth, branching, num_utterances, and utterance_len must all be >= 1".into(),
        ));
    }

    // Leaf i has path digits p_1..p_depth (most significant first); its
    // ancestors are the root plus every proper path prefix.
    let n_leaves = branching
        .checked_pow(taxonomy_depth as u32)
        .ok_or_else(|| Error::Validation("taxonomy too large".into()))?;
    let width = (n_leaves - 1).max(1).to_string().len();

    let path_of = |leaf: usize| -> Vec<usize> {
        let mut digits = vec![0; taxonomy_depth];
        let mut rest = leaf;
        for d in (0..taxonomy_depth).rev() {
            digits[d] = rest % branching;
            rest /= branching;
        }
        digits
    };
    let node_label = |prefix: &[usize]| -> String {
        if prefix.is_empty() {
            "ROOT".to_string()
        } else {
            let parts: Vec<String> = prefix.iter().map(|d| d.to_string()).collect();
            format!("C{}", parts.join("_"))
        }
    };

    let mut lexicon_entries = BTreeMap::new();
    let mut category_entries = BTreeMap::new();
    let mut words = Vec::with_capacity(n_leaves);
    let mut leaves_by_category: Vec<Vec<usize>> = vec![Vec::new(); branching];
    for leaf in 0..n_leaves {
        let path = path_of(leaf);
        let word = format!("w{leaf:0width$}");
        let mut feats = BTreeSet::new();
        for prefix_len in 0..taxonomy_depth {
            feats.insert(node_label(&path[..prefix_len]));
        }
        lexicon_entries.insert(word.clone(), feats);
        // Depth-1 subtree label doubles as the word's category.
        let category = node_label(&path[..1]).to_lowercase();
        category_entries.insert(word.clone(), BTreeSet::from([category]));
        leaves_by_category[path[0]].push(leaf);
        words.push(word);
    }
    let lexicon = GoldLexicon::new(lexicon_entries)?;
    let categories = CategoryMap::new(category_entries)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(num_utterances);
    for _ in 0..num_utterances {
        let primary = rng.random_range(0..branching);
        let mut tokens = Vec::with_capacity(utterance_len);
        for _ in 0..utterance_len {
            let leaf = if rng.random_bool(LOCALITY_BIAS) {
                let pool = &leaves_by_category[primary];
                pool[rng.random_range(0..pool.len())]
            } else {
                rng.random_range(0..n_leaves)
            };
            tokens.push(words[leaf].clone());
        }
        let utt = Utterance::new(tokens)?;
        let mut union = BTreeSet::new();
        for w in utt.words() {
            union.extend(lexicon.features(w).expect("generated word").iter().cloned());
        }
        pairs.push((utt, Scene::new(union)?));
    }
    Ok((pairs, lexicon, categories))
}
