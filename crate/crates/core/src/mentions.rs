//! Per-author mention profiles: multisets of documents weighted by how
//! often each surname is mentioned.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::ioutil::{data_lines, format_error, read_text};
use crate::lexicon::Lexicon;

/// The multiset of documents mentioning one author: `doc_id -> count`,
/// with zero-count documents absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionProfile {
    lemma: String,
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl MentionProfile {
    /// Builds a profile, dropping zero counts.
    pub fn new(lemma: impl Into<String>, counts: BTreeMap<String, u64>) -> Self {
        let counts: BTreeMap<String, u64> =
            counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let total = counts.values().sum();
        MentionProfile {
            lemma: lemma.into(),
            counts,
            total,
        }
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count_in(&self, doc_id: &str) -> u64 {
        self.counts.get(doc_id).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// All mention profiles for one corpus, ordered lemma-ascending.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    profiles: Vec<MentionProfile>,
    corpus_ref: String,
}

impl ProfileSet {
    pub fn new(mut profiles: Vec<MentionProfile>, corpus_ref: impl Into<String>) -> Self {
        profiles.sort_by(|a, b| a.lemma.cmp(&b.lemma));
        profiles.dedup_by(|a, b| a.lemma == b.lemma);
        ProfileSet {
            profiles,
            corpus_ref: corpus_ref.into(),
        }
    }

    pub fn profiles(&self) -> &[MentionProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn corpus_ref(&self) -> &str {
        &self.corpus_ref
    }

    pub fn get(&self, lemma: &str) -> Option<&MentionProfile> {
        self.profiles
            .binary_search_by(|p| p.lemma.as_str().cmp(lemma))
            .ok()
            .map(|i| &self.profiles[i])
    }

    /// Rebuilds a profile set from dump rows. Lemmas without rows get an
    /// empty profile so the set always covers every label.
    pub fn from_rows(
        labels: &[String],
        rows: Vec<(String, String, u64)>,
        corpus_ref: impl Into<String>,
    ) -> Result<Self> {
        let mut by_lemma: BTreeMap<String, BTreeMap<String, u64>> =
            labels.iter().map(|l| (l.clone(), BTreeMap::new())).collect();
        for (lemma, doc_id, count) in rows {
            match by_lemma.get_mut(&lemma) {
                Some(counts) => {
                    counts.insert(doc_id, count);
                }
                None => {
                    return Err(Error::Format {
                        path: Default::default(),
                        line: 0,
                        message: format!("profile row for unknown lemma '{lemma}'"),
                    })
                }
            }
        }
        let profiles = by_lemma
            .into_iter()
            .map(|(lemma, counts)| MentionProfile::new(lemma, counts))
            .collect();
        Ok(ProfileSet::new(profiles, corpus_ref))
    }
}

/// Counts lexicon mentions in one document: `lemma -> count`, zero counts
/// omitted. Variant sets are disjoint, so each token matches at most one
/// lemma.
pub fn scan_document(doc: &Document, lexicon: &Lexicon) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for token in doc.tokens() {
        if let Some(lemma) = lexicon.lookup_token(token) {
            *counts.entry(lemma.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Aggregates `scan_document` over the whole corpus. Every lexicon lemma
/// gets a profile, including lemmas never mentioned (total 0), so threshold
/// experiments do not require rescanning.
pub fn build_profiles(corpus: &Corpus, lexicon: &Lexicon) -> ProfileSet {
    let mut by_lemma: BTreeMap<String, BTreeMap<String, u64>> = lexicon
        .lemmas()
        .map(|l| (l.to_string(), BTreeMap::new()))
        .collect();
    for doc in corpus.documents() {
        for (lemma, count) in scan_document(doc, lexicon) {
            by_lemma
                .get_mut(&lemma)
                .expect("scan yields only lexicon lemmas")
                .insert(doc.doc_id().to_string(), count);
        }
    }
    let profiles = by_lemma
        .into_iter()
        .map(|(lemma, counts)| MentionProfile::new(lemma, counts))
        .collect();
    ProfileSet::new(profiles, corpus.fingerprint())
}

/// Retains profiles with `total >= min_total`. Fewer than two survivors is
/// an error: no matrix can be built from them.
pub fn filter_min_mentions(profiles: &ProfileSet, min_total: u64) -> Result<ProfileSet> {
    let kept: Vec<MentionProfile> = profiles
        .profiles()
        .iter()
        .filter(|p| p.total() >= min_total)
        .cloned()
        .collect();
    if kept.len() < 2 {
        return Err(Error::TooFewProfiles { found: kept.len() });
    }
    Ok(ProfileSet::new(kept, profiles.corpus_ref().to_string()))
}

/// Writes the profile dump: `lemma\tdoc_id\tcount`, sorted by (lemma, doc_id).
pub fn write_profile_dump<W: Write>(profiles: &ProfileSet, mut w: W) -> std::io::Result<()> {
    writeln!(w, "lemma\tdoc_id\tcount")?;
    for profile in profiles.profiles() {
        for (doc_id, count) in profile.counts() {
            writeln!(w, "{}\t{}\t{}", profile.lemma(), doc_id, count)?;
        }
    }
    Ok(())
}

/// Reads dump rows back; combine with labels via [`ProfileSet::from_rows`].
pub fn read_profile_dump(path: &Path) -> Result<Vec<(String, String, u64)>> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, "lemma\tdoc_id\tcount")) => {}
        Some((line, other)) => {
            return Err(format_error(
                path,
                line,
                format!("expected header 'lemma\\tdoc_id\\tcount', found '{other}'"),
            ))
        }
        None => return Err(format_error(path, 1, "empty profile dump")),
    }
    let mut rows = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [lemma, doc_id, count] = fields[..] else {
            return Err(format_error(
                path,
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let count: u64 = count
            .parse()
            .map_err(|_| format_error(path, line, format!("invalid count '{count}'")))?;
        if count == 0 {
            return Err(format_error(path, line, "zero count in profile dump"));
        }
        rows.push((lemma.to_string(), doc_id.to_string(), count));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::lexicon::{Lexicon, Thresholds};

    fn lexicon_of(lemmas: &[&str]) -> Lexicon {
        Lexicon::from_rows(
            lemmas.iter().map(|l| (l.to_string(), 0)).collect(),
            Thresholds::default(),
        )
        .unwrap()
    }

    #[test]
    fn scan_counts_variants() {
        let doc = Document::new("d1", 1960, "Weber und Webers Ansatz");
        let lexicon = lexicon_of(&["Weber"]);
        let counts = scan_document(&doc, &lexicon);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["Weber"], 2);
    }

    #[test]
    fn scan_without_matches_is_empty() {
        let doc = Document::new("d1", 1960, "keine Namen hier");
        let lexicon = lexicon_of(&["Weber"]);
        assert!(scan_document(&doc, &lexicon).is_empty());
    }

    #[test]
    fn profiles_aggregate_documents() {
        let corpus = Corpus::from_documents(vec![
            Document::new("d1", 1960, "Weber Weber Weber"),
            Document::new("d2", 1961, "Weber, Weber und Weber"),
        ])
        .unwrap();
        let lexicon = lexicon_of(&["Marx", "Weber"]);
        let profiles = build_profiles(&corpus, &lexicon);
        assert_eq!(profiles.len(), 2);
        let weber = profiles.get("Weber").unwrap();
        assert_eq!(weber.count_in("d1"), 3);
        assert_eq!(weber.count_in("d2"), 3);
        assert_eq!(weber.total(), 6);
        // Never-mentioned lemmas keep an empty profile.
        let marx = profiles.get("Marx").unwrap();
        assert!(marx.counts().is_empty());
        assert_eq!(marx.total(), 0);
    }

    #[test]
    fn scan_total_bounded_by_token_count() {
        let doc = Document::new("d1", 1960, "Weber Marx Weber sonst nichts");
        let lexicon = lexicon_of(&["Marx", "Weber"]);
        let counts = scan_document(&doc, &lexicon);
        let matched: u64 = counts.values().sum();
        assert!(matched as usize <= doc.tokens().len());
    }

    #[test]
    fn filter_is_inclusive_at_the_boundary() {
        let profiles = ProfileSet::new(
            vec![
                MentionProfile::new("A", [("d1".to_string(), 15)].into()),
                MentionProfile::new("B", [("d1".to_string(), 11)].into()),
                MentionProfile::new("C", [("d1".to_string(), 10)].into()),
            ],
            "test",
        );
        let kept = filter_min_mentions(&profiles, 11).unwrap();
        let lemmas: Vec<&str> = kept.profiles().iter().map(|p| p.lemma()).collect();
        assert_eq!(lemmas, ["A", "B"]);
    }

    #[test]
    fn filter_zero_is_identity() {
        let profiles = ProfileSet::new(
            vec![
                MentionProfile::new("A", BTreeMap::new()),
                MentionProfile::new("B", [("d1".to_string(), 1)].into()),
            ],
            "test",
        );
        let kept = filter_min_mentions(&profiles, 0).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn filter_below_two_is_an_error() {
        let profiles = ProfileSet::new(
            vec![
                MentionProfile::new("A", [("d1".to_string(), 2)].into()),
                MentionProfile::new("B", [("d1".to_string(), 1)].into()),
            ],
            "test",
        );
        assert!(matches!(
            filter_min_mentions(&profiles, 5),
            Err(Error::TooFewProfiles { found: 0 })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let labels = vec!["A".to_string(), "B".to_string(), "Z".to_string()];
        let profiles = ProfileSet::new(
            vec![
                MentionProfile::new("A", [("d2".to_string(), 1), ("d1".to_string(), 3)].into()),
                MentionProfile::new("B", [("d1".to_string(), 2)].into()),
                MentionProfile::new("Z", BTreeMap::new()),
            ],
            "test",
        );
        let mut buf = Vec::new();
        write_profile_dump(&profiles, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "lemma\tdoc_id\tcount\nA\td1\t3\nA\td2\t1\nB\td1\t2\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.tsv");
        std::fs::write(&path, &buf).unwrap();
        let rows = read_profile_dump(&path).unwrap();
        let restored = ProfileSet::from_rows(&labels, rows, "test").unwrap();
        assert_eq!(restored.len(), 3);
        assert_eq!(restored.get("A").unwrap().total(), 4);
        assert_eq!(restored.get("Z").unwrap().total(), 0);
    }
}
