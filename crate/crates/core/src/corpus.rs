//! Corpus loading and word tokenization.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ioutil::{data_lines, fnv1a64, format_error, read_text};

/// One corpus text with its identifier, publication year, and token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    doc_id: String,
    year: i32,
    text: String,
    tokens: Vec<String>,
}

impl Document {
    /// Builds a document; `tokens` is always `tokenize(text)`.
    pub fn new(doc_id: impl Into<String>, year: i32, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Document {
            doc_id: doc_id.into(),
            year,
            text,
            tokens,
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// An immutable set of documents, ordered by ascending `doc_id`.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    /// Sorts documents by `doc_id` and rejects duplicates and emptiness.
    pub fn from_documents(mut documents: Vec<Document>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        for pair in documents.windows(2) {
            if pair[0].doc_id == pair[1].doc_id {
                return Err(Error::DuplicateDocId {
                    doc_id: pair[0].doc_id.clone(),
                });
            }
        }
        Ok(Corpus { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn doc_count(&self) -> usize {
        self.documents.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Mean token count per document. The corpus is never empty.
    pub fn mean_tokens(&self) -> f64 {
        self.total_tokens() as f64 / self.doc_count() as f64
    }

    /// Stable identifier derived from the document ids, used to tag
    /// downstream artifacts with the corpus they were scanned from.
    pub fn fingerprint(&self) -> String {
        let mut joined = String::new();
        for doc in &self.documents {
            joined.push_str(&doc.doc_id);
            joined.push('\u{1f}');
        }
        format!("{:016x}", fnv1a64(joined.as_bytes()))
    }
}

/// Splits text into word tokens: maximal runs of Unicode letters, where a
/// single `-` with letters on both sides is token-internal. Everything else
/// separates tokens. Casing is preserved; digits never appear in tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            current.push(c);
        } else if c == '-'
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            current.push('-');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Loads a corpus directory plus its metadata table.
///
/// The metadata file is tab-separated with a `filename\tdoc_id\tyear` header;
/// every row names a UTF-8 text file inside `corpus_dir`.
pub fn load_corpus(corpus_dir: &Path, metadata_file: &Path) -> Result<Corpus> {
    let meta = read_text(metadata_file)?;
    let mut lines = data_lines(&meta);
    match lines.next() {
        Some((_, "filename\tdoc_id\tyear")) => {}
        Some((line, other)) => {
            return Err(format_error(
                metadata_file,
                line,
                format!("expected header 'filename\\tdoc_id\\tyear', found '{other}'"),
            ))
        }
        None => return Err(Error::EmptyCorpus),
    }

    let mut documents = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [filename, doc_id, year] = fields[..] else {
            return Err(format_error(
                metadata_file,
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        if filename.is_empty() || doc_id.is_empty() {
            return Err(format_error(metadata_file, line, "empty filename or doc_id"));
        }
        let year: i32 = year.parse().map_err(|_| {
            format_error(metadata_file, line, format!("invalid year '{year}'"))
        })?;
        if !seen_ids.insert(doc_id.to_string()) {
            return Err(Error::DuplicateDocId {
                doc_id: doc_id.to_string(),
            });
        }
        let path = corpus_dir.join(filename);
        if !path.is_file() {
            return Err(Error::MissingDocumentFile {
                file: filename.to_string(),
            });
        }
        let text = read_text(&path)?;
        documents.push(Document::new(doc_id, year, text));
    }
    Corpus::from_documents(documents)
}
