//! Surname lexicon construction: candidate import, pruning, lemmatization
//! per German proper-noun flexion, and file-driven curation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ioutil::{data_lines, format_error, read_text};

/// Inflection suffixes recognized on surnames: the genitive `s` and the
/// adjectival `sche` paradigm. Longest forms first so stripping is greedy.
const VARIANT_SUFFIXES: [&str; 6] = ["schen", "schem", "scher", "sches", "sche", "s"];

/// A surname as found in the external authorship source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSurname {
    pub surface: String,
    pub source_count: u64,
}

/// Loads the candidate frequency table (`surname\tcount`, header required).
/// Duplicate surnames are merged by summing counts; result is sorted.
pub fn load_candidates(freq_file: &Path) -> Result<Vec<CandidateSurname>> {
    let text = read_text(freq_file)?;
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, "surname\tcount")) => {}
        Some((line, other)) => {
            return Err(format_error(
                freq_file,
                line,
                format!("expected header 'surname\\tcount', found '{other}'"),
            ))
        }
        None => return Err(format_error(freq_file, 1, "empty candidate file")),
    }
    let mut merged: BTreeMap<String, u64> = BTreeMap::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [surname, count] = fields[..] else {
            return Err(format_error(
                freq_file,
                line,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        };
        if surname.is_empty() {
            return Err(format_error(freq_file, line, "empty surname"));
        }
        if count.starts_with('-') {
            return Err(format_error(
                freq_file,
                line,
                format!("negative count '{count}'"),
            ));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| format_error(freq_file, line, format!("invalid count '{count}'")))?;
        *merged.entry(surname.to_string()).or_insert(0) += count;
    }
    Ok(merged
        .into_iter()
        .map(|(surface, source_count)| CandidateSurname {
            surface,
            source_count,
        })
        .collect())
}

/// Expands a lemma into its full inflected paradigm:
/// `{X, Xs, Xsche, Xschen, Xschem, Xscher, Xsches}`.
///
/// Panics if `lemma` is empty.
pub fn expand_variants(lemma: &str) -> BTreeSet<String> {
    assert!(!lemma.is_empty(), "lemma must be non-empty");
    let mut variants = BTreeSet::new();
    variants.insert(lemma.to_string());
    for suffix in VARIANT_SUFFIXES {
        variants.insert(format!("{lemma}{suffix}"));
    }
    variants
}

/// Total number of tokens in the corpus that are exact, case-sensitive
/// members of `expand_variants(lemma)`.
pub fn count_corpus_frequency(lemma: &str, corpus: &Corpus) -> u64 {
    let variants = expand_variants(lemma);
    corpus
        .documents()
        .iter()
        .flat_map(|d| d.tokens())
        .filter(|t| variants.contains(t.as_str()))
        .count() as u64
}

/// Maps a surface form to its lemma. A surface is treated as an inflected
/// form only when stripping a recognized suffix yields another member of
/// `known`; names that merely end in `s` (Habermas, Parsons) keep their
/// own lemma.
fn lemmatize(surface: &str, known: &BTreeSet<String>) -> String {
    for suffix in VARIANT_SUFFIXES {
        if let Some(stem) = surface.strip_suffix(suffix) {
            if !stem.is_empty() && known.contains(stem) {
                return stem.to_string();
            }
        }
    }
    surface.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurationStatus {
    Candidate,
    Accepted,
    Excluded,
}

/// A lemmatized surname with its inflected variant forms.
#[derive(Debug, Clone)]
pub struct LexiconEntry {
    lemma: String,
    variants: BTreeSet<String>,
    corpus_count: u64,
    status: CurationStatus,
}

impl LexiconEntry {
    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn variants(&self) -> &BTreeSet<String> {
        &self.variants
    }

    pub fn corpus_count(&self) -> u64 {
        self.corpus_count
    }

    pub fn status(&self) -> CurationStatus {
        self.status
    }
}

/// Pruning thresholds a lexicon was built with. `min_final_mentions` is
/// applied downstream when filtering mention profiles; it is recorded here
/// so artifacts carry the full parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub min_length: usize,
    pub min_candidate_freq: u64,
    pub min_final_mentions: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_length: 3,
            min_candidate_freq: 25,
            min_final_mentions: 11,
        }
    }
}

/// The curated list of accepted surnames, sorted by lemma, with pairwise
/// disjoint variant sets.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    thresholds: Thresholds,
    variant_index: HashMap<String, usize>,
}

impl Lexicon {
    /// Assembles a lexicon from accepted `(lemma, corpus_count)` rows,
    /// recomputing variants and validating disjointness.
    pub fn from_rows(rows: Vec<(String, u64)>, thresholds: Thresholds) -> Result<Self> {
        let mut entries: Vec<LexiconEntry> = rows
            .into_iter()
            .map(|(lemma, corpus_count)| LexiconEntry {
                variants: expand_variants(&lemma),
                lemma,
                corpus_count,
                status: CurationStatus::Accepted,
            })
            .collect();
        entries.sort_by(|a, b| a.lemma.cmp(&b.lemma));
        entries.dedup_by(|a, b| a.lemma == b.lemma);

        let mut variant_index = HashMap::new();
        for (i, entry) in entries.iter().enumerate() {
            for variant in &entry.variants {
                if let Some(&other) = variant_index.get(variant) {
                    let other: usize = other;
                    return Err(Error::VariantCollision {
                        lemma_a: entries[other].lemma.clone(),
                        lemma_b: entry.lemma.clone(),
                        variant: variant.clone(),
                    });
                }
                variant_index.insert(variant.clone(), i);
            }
        }
        Ok(Lexicon {
            entries,
            thresholds,
            variant_index,
        })
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.lemma.as_str())
    }

    /// Resolves a token to the lemma whose variant set contains it.
    pub fn lookup_token(&self, token: &str) -> Option<&str> {
        self.variant_index
            .get(token)
            .map(|&i| self.entries[i].lemma.as_str())
    }
}

/// Builds the curated lexicon. The pipeline, in order:
///
/// 1. drop candidates that do not begin with an uppercase letter;
/// 2. drop candidates shorter than `thresholds.min_length` characters;
/// 3. lemmatize candidates, merging inflected forms into their base;
/// 4. drop lemmas whose corpus frequency is below
///    `thresholds.min_candidate_freq`;
/// 5. drop lemmas listed in `exclude_file`, then force-add lemmas listed in
///    `include_file` regardless of thresholds.
pub fn build_lexicon(
    candidates: &[CandidateSurname],
    corpus: &Corpus,
    thresholds: Thresholds,
    include_file: Option<&Path>,
    exclude_file: Option<&Path>,
) -> Result<Lexicon> {
    let surviving: BTreeSet<String> = candidates
        .iter()
        .map(|c| c.surface.clone())
        .filter(|s| s.chars().next().is_some_and(char::is_uppercase))
        .filter(|s| s.chars().count() >= thresholds.min_length)
        .collect();

    let lemmas: BTreeSet<String> = surviving
        .iter()
        .map(|surface| lemmatize(surface, &surviving))
        .collect();

    let mut accepted: BTreeMap<String, u64> = BTreeMap::new();
    for lemma in lemmas {
        let count = count_corpus_frequency(&lemma, corpus);
        if count >= thresholds.min_candidate_freq {
            accepted.insert(lemma, count);
        }
    }

    if let Some(path) = exclude_file {
        for lemma in load_curation_file(path, &surviving)? {
            accepted.remove(&lemma);
        }
    }
    if let Some(path) = include_file {
        for lemma in load_curation_file(path, &surviving)? {
            let count = count_corpus_frequency(&lemma, corpus);
            accepted.insert(lemma, count);
        }
    }

    Lexicon::from_rows(accepted.into_iter().collect(), thresholds)
}

/// Reads a curation file: one lemma per line, `#` comments ignored,
/// surrounding whitespace stripped. Entries must already be lemmas.
fn load_curation_file(path: &Path, known: &BTreeSet<String>) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let mut lemmas = Vec::new();
    for (_, line) in data_lines(&text) {
        let entry = line.trim();
        if entry.is_empty() {
            continue;
        }
        let expected = lemmatize(entry, known);
        if expected != entry {
            return Err(Error::InvalidCurationEntry {
                path: path.to_path_buf(),
                entry: entry.to_string(),
                expected,
            });
        }
        lemmas.push(entry.to_string());
    }
    Ok(lemmas)
}

/// Writes the accepted lexicon as `lemma\tcorpus_count\tvariants`.
pub fn write_lexicon_file<W: Write>(lexicon: &Lexicon, mut w: W) -> std::io::Result<()> {
    writeln!(w, "lemma\tcorpus_count\tvariants")?;
    for entry in lexicon.entries() {
        let variants: Vec<&str> = entry.variants().iter().map(String::as_str).collect();
        writeln!(
            w,
            "{}\t{}\t{}",
            entry.lemma(),
            entry.corpus_count(),
            variants.join(",")
        )?;
    }
    Ok(())
}

/// Reads a lexicon file back; variants are recomputed from each lemma.
pub fn read_lexicon_file(path: &Path, thresholds: Thresholds) -> Result<Lexicon> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, "lemma\tcorpus_count\tvariants")) => {}
        Some((line, other)) => {
            return Err(format_error(
                path,
                line,
                format!("expected header 'lemma\\tcorpus_count\\tvariants', found '{other}'"),
            ))
        }
        None => return Err(format_error(path, 1, "empty lexicon file")),
    }
    let mut rows = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [lemma, count, _variants] = fields[..] else {
            return Err(format_error(
                path,
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let count: u64 = count
            .parse()
            .map_err(|_| format_error(path, line, format!("invalid count '{count}'")))?;
        rows.push((lemma.to_string(), count));
    }
    Lexicon::from_rows(rows, thresholds)
}
