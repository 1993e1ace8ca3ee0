//! Deterministic generators for tests and benchmarks: a seedable PRNG,
//! random mention profiles, random token corpora, and corpora with planted
//! author communities.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, Document};
use crate::lexicon::CandidateSurname;
use crate::mentions::{MentionProfile, ProfileSet};

/// SplitMix64: tiny, seedable, and identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Random mention profiles: `n_profiles` lemmas over `n_docs` documents
/// with per-document counts drawn from 0..=max_count.
pub fn random_profiles(
    n_profiles: usize,
    n_docs: usize,
    max_count: u64,
    rng: &mut SplitMix64,
) -> ProfileSet {
    let profiles = (0..n_profiles)
        .map(|p| {
            let counts: BTreeMap<String, u64> = (0..n_docs)
                .map(|d| (format!("d{d:03}"), rng.below(max_count + 1)))
                .collect();
            MentionProfile::new(format!("P{p:03}"), counts)
        })
        .collect();
    ProfileSet::new(profiles, "random")
}

/// Surnames used by the random and planted corpus generators. All names
/// are capitalized, at least three letters, avoid the recognized flexion
/// suffixes, and are never variants of one another.
pub fn community_names(communities: usize, authors_per: usize) -> Vec<Vec<String>> {
    assert!(communities <= 6 && authors_per <= 10, "name pool exhausted");
    let prefixes = ["Bar", "Dor", "Gal", "Kim", "Nor", "Tal"];
    let stems = [
        "bach", "dorf", "feld", "gart", "hoff", "lein", "mann", "rich", "thal", "wald",
    ];
    (0..communities)
        .map(|c| {
            (0..authors_per)
                .map(|a| format!("{}{}", prefixes[c], stems[a]))
                .collect()
        })
        .collect()
}

const FILLER: [&str; 8] = ["und", "die", "der", "das", "über", "eine", "nach", "wird"];

/// A corpus of documents containing random mention counts of `names`,
/// interleaved with filler words.
pub fn random_corpus(
    names: &[String],
    n_docs: usize,
    max_count: u64,
    rng: &mut SplitMix64,
) -> Corpus {
    let documents = (0..n_docs)
        .map(|d| {
            let mut words: Vec<&str> = Vec::new();
            for name in names {
                for _ in 0..rng.below(max_count + 1) {
                    words.push(name);
                }
                words.push(FILLER[rng.below(FILLER.len() as u64) as usize]);
            }
            Document::new(format!("d{d:03}"), 1960 + d as i32, words.join(" "))
        })
        .collect();
    Corpus::from_documents(documents).expect("generated corpus is non-empty")
}

/// A corpus with planted communities, mimicking the shape of real mention
/// data: authors differ widely in how much they are discussed (activity
/// tiers), a document mentions a subset of its community's members with
/// dispersed, occasionally bursty counts, and each foreign author appears
/// once with probability `cross_prob` per document. Returns the corpus and
/// the community name lists.
pub fn planted_corpus(
    communities: usize,
    authors_per: usize,
    docs_per_community: usize,
    cross_prob: f64,
    rng: &mut SplitMix64,
) -> (Corpus, Vec<Vec<String>>) {
    assert!(communities >= 2, "need at least two communities");
    let names = community_names(communities, authors_per);
    let activity = |member: usize| 0.25 + 0.25 * (member % 4) as f64;
    let mut documents = Vec::new();
    for (c, members) in names.iter().enumerate() {
        for d in 0..docs_per_community {
            let mut words: Vec<String> = Vec::new();
            for (m, member) in members.iter().enumerate() {
                let alpha = activity(m);
                if rng.next_f64() >= 0.3 + 0.5 * alpha {
                    continue;
                }
                let mut count = 1 + rng.below(1 + (8.0 * alpha) as u64);
                if rng.next_f64() < 0.15 {
                    count *= 3;
                }
                for _ in 0..count {
                    words.push(member.clone());
                    words.push(FILLER[rng.below(FILLER.len() as u64) as usize].to_string());
                }
            }
            for (other, foreign) in names.iter().enumerate() {
                if other == c {
                    continue;
                }
                for name in foreign {
                    if rng.next_f64() < cross_prob {
                        words.push(name.clone());
                    }
                }
            }
            let doc_id = format!("c{c}d{d:03}");
            documents.push(Document::new(doc_id, 1960 + d as i32, words.join(" ")));
        }
    }
    let corpus = Corpus::from_documents(documents).expect("generated corpus is non-empty");
    (corpus, names)
}

/// Candidate rows covering every generated name.
pub fn candidates_for(names: &[Vec<String>]) -> Vec<CandidateSurname> {
    names
        .iter()
        .flatten()
        .map(|name| CandidateSurname {
            surface: name.clone(),
            source_count: 100,
        })
        .collect()
}

/// Fraction of planted authors assigned to their community's factor under
/// the best factor-to-community relabeling. Authors missing from the
/// report count as misassigned.
pub fn recovery_rate(report: &crate::factors::FactorReport, communities: &[Vec<String>]) -> f64 {
    let c = communities.len();
    let total: usize = communities.iter().map(Vec::len).sum();
    let mut labels: Vec<usize> = (1..=c).collect();
    let mut best = 0usize;
    permute(&mut labels, 0, &mut |perm| {
        let correct = communities
            .iter()
            .enumerate()
            .flat_map(|(ci, members)| members.iter().map(move |m| (ci, m)))
            .filter(|(ci, member)| report.assignment(member) == Some(perm[*ci]))
            .count();
        best = best.max(correct);
    });
    best as f64 / total as f64
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn generated_names_are_distinct_and_well_formed() {
        let names = community_names(4, 10);
        let flat: Vec<&String> = names.iter().flatten().collect();
        let unique: std::collections::BTreeSet<&String> = flat.iter().copied().collect();
        assert_eq!(flat.len(), unique.len());
        for name in flat {
            assert!(name.chars().next().unwrap().is_uppercase());
            assert!(name.chars().count() >= 3);
            assert!(!name.ends_with('s'));
        }
    }

    #[test]
    fn planted_corpus_mentions_every_member() {
        let mut rng = SplitMix64::new(7);
        let (corpus, names) = planted_corpus(2, 3, 4, 0.1, &mut rng);
        assert_eq!(corpus.doc_count(), 8);
        for name in names.iter().flatten() {
            assert!(crate::lexicon::count_corpus_frequency(name, &corpus) >= 1);
        }
    }
}
