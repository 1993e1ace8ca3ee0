//! Pipeline configuration: flat `key = value` file, every key overridable
//! by a same-named command-line flag (flag wins).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    Explicit,
    Kaiser,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_dir: Option<PathBuf>,
    pub metadata_file: Option<PathBuf>,
    pub candidates_file: Option<PathBuf>,
    pub include_file: Option<PathBuf>,
    pub exclude_file: Option<PathBuf>,
    pub min_length: usize,
    pub min_candidate_freq: u64,
    pub min_total_mentions: u64,
    pub factor_mode: FactorMode,
    pub k: Option<usize>,
    pub gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub membership_threshold: f64,
    pub display_threshold: f64,
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_dir: None,
            metadata_file: None,
            candidates_file: None,
            include_file: None,
            exclude_file: None,
            min_length: 3,
            min_candidate_freq: 25,
            min_total_mentions: 11,
            factor_mode: FactorMode::Kaiser,
            k: None,
            gamma: 0.0,
            max_iter: 250,
            tol: 1e-6,
            membership_threshold: 0.3,
            display_threshold: 0.3,
            output_dir: None,
        }
    }
}

/// The pipeline stages, used for per-stage validation and error context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Lexicon,
    Matrix,
    Factor,
    Export,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Lexicon => "lexicon",
            Stage::Matrix => "matrix",
            Stage::Factor => "factor",
            Stage::Export => "export",
        }
    }
}

impl PipelineConfig {
    /// Applies `key = value` assignments from a config file. Unknown keys
    /// are validation errors.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Validation(format!(
                    "{}:{}: expected 'key = value', found '{line}'",
                    path.display(),
                    number + 1
                )));
            };
            self.set(key.trim(), value.trim()).map_err(|message| {
                CliError::Validation(format!("{}:{}: {message}", path.display(), number + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value '{value}' for {key}"))
        }
        match key {
            "corpus_dir" => self.corpus_dir = Some(PathBuf::from(value)),
            "metadata_file" => self.metadata_file = Some(PathBuf::from(value)),
            "candidates_file" => self.candidates_file = Some(PathBuf::from(value)),
            "include_file" => self.include_file = Some(PathBuf::from(value)),
            "exclude_file" => self.exclude_file = Some(PathBuf::from(value)),
            "min_length" => self.min_length = parse(key, value)?,
            "min_candidate_freq" => self.min_candidate_freq = parse(key, value)?,
            "min_total_mentions" => self.min_total_mentions = parse(key, value)?,
            "factor_mode" => {
                self.factor_mode = match value {
                    "explicit" => FactorMode::Explicit,
                    "kaiser" => FactorMode::Kaiser,
                    other => {
                        return Err(format!(
                            "invalid factor_mode '{other}' (expected 'explicit' or 'kaiser')"
                        ))
                    }
                }
            }
            "k" => self.k = Some(parse(key, value)?),
            "gamma" => self.gamma = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "membership_threshold" => self.membership_threshold = parse(key, value)?,
            "display_threshold" => self.display_threshold = parse(key, value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    /// Validates everything the given stages need, before any filesystem
    /// work happens.
    pub fn validate(&self, stages: &[Stage]) -> Result<(), CliError> {
        let fail = |message: String| Err(CliError::Validation(message));
        if self.output_dir.is_none() {
            return fail("missing output_dir (set in config file or --output-dir)".into());
        }
        if self.min_length < 1 {
            return fail("min_length must be at least 1".into());
        }
        if self.max_iter < 1 {
            return fail("max_iter must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return fail("tol must be a positive number".into());
        }
        if !self.gamma.is_finite() {
            return fail("gamma must be finite".into());
        }
        if !(self.membership_threshold.is_finite() && self.membership_threshold > 0.0) {
            return fail("membership_threshold must be positive".into());
        }
        if !(self.display_threshold.is_finite() && self.display_threshold > 0.0) {
            return fail("display_threshold must be positive".into());
        }
        if self.factor_mode == FactorMode::Explicit && self.k.is_none() {
            return fail("factor_mode explicit requires k".into());
        }
        if let Some(k) = self.k {
            if k < 1 {
                return fail("k must be at least 1".into());
            }
        }
        for stage in stages {
            match stage {
                Stage::Lexicon => {
                    for (key, value) in [
                        ("corpus_dir", &self.corpus_dir),
                        ("metadata_file", &self.metadata_file),
                        ("candidates_file", &self.candidates_file),
                    ] {
                        if value.is_none() {
                            return fail(format!("missing {key} (required by stage lexicon)"));
                        }
                    }
                }
                Stage::Matrix => {
                    for (key, value) in [
                        ("corpus_dir", &self.corpus_dir),
                        ("metadata_file", &self.metadata_file),
                    ] {
                        if value.is_none() {
                            return fail(format!("missing {key} (required by stage matrix)"));
                        }
                    }
                }
                Stage::Factor | Stage::Export => {}
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().expect("validated")
    }

    /// Canonical `key=value` listing of the resolved configuration.
    fn canonical(&self) -> BTreeMap<&'static str, String> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut map = BTreeMap::new();
        map.insert("corpus_dir", path(&self.corpus_dir));
        map.insert("metadata_file", path(&self.metadata_file));
        map.insert("candidates_file", path(&self.candidates_file));
        map.insert("include_file", path(&self.include_file));
        map.insert("exclude_file", path(&self.exclude_file));
        map.insert("min_length", self.min_length.to_string());
        map.insert("min_candidate_freq", self.min_candidate_freq.to_string());
        map.insert("min_total_mentions", self.min_total_mentions.to_string());
        map.insert(
            "factor_mode",
            match self.factor_mode {
                FactorMode::Explicit => "explicit".into(),
                FactorMode::Kaiser => "kaiser".into(),
            },
        );
        map.insert("k", self.k.map(|k| k.to_string()).unwrap_or_default());
        map.insert("gamma", format!("{:e}", self.gamma));
        map.insert("max_iter", self.max_iter.to_string());
        map.insert("tol", format!("{:e}", self.tol));
        map.insert(
            "membership_threshold",
            format!("{:e}", self.membership_threshold),
        );
        map.insert("display_threshold", format!("{:e}", self.display_threshold));
        map.insert("output_dir", path(&self.output_dir));
        map
    }

    /// FNV-1a hash of the resolved configuration, recorded in artifact
    /// headers so outputs are traceable to their parameters.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for (key, value) in self.canonical() {
            for b in key.bytes().chain(std::iter::once(b'=')).chain(value.bytes()) {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x100000001b3);
            }
            h ^= u64::from(b'\n');
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_pinned() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.min_length, 3);
        assert_eq!(cfg.min_candidate_freq, 25);
        assert_eq!(cfg.min_total_mentions, 11);
        assert_eq!(cfg.max_iter, 250);
        assert_eq!(cfg.gamma, 0.0);
        assert_eq!(cfg.membership_threshold, 0.3);
        assert_eq!(cfg.display_threshold, 0.3);
        assert_eq!(cfg.tol, 1e-6);
    }

    #[test]
    fn file_values_parse_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nmin_length = 4\nfactor_mode = explicit\nk = 3\n")
            .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.min_length, 4);
        assert_eq!(cfg.factor_mode, FactorMode::Explicit);
        assert_eq!(cfg.k, Some(3));

        std::fs::write(&path, "no_such_key = 1\n").unwrap();
        let err = PipelineConfig::default().apply_file(&path).unwrap_err();
        assert!(err.to_string().contains("unknown config key"));
    }

    #[test]
    fn validation_requires_output_dir_first() {
        let cfg = PipelineConfig::default();
        let err = cfg.validate(&[Stage::Factor]).unwrap_err();
        assert!(err.to_string().contains("output_dir"));
    }

    #[test]
    fn explicit_mode_requires_k() {
        let mut cfg = PipelineConfig {
            output_dir: Some(PathBuf::from("out")),
            factor_mode: FactorMode::Explicit,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate(&[Stage::Factor]).is_err());
        cfg.k = Some(2);
        assert!(cfg.validate(&[Stage::Factor]).is_ok());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let mut a = PipelineConfig {
            output_dir: Some(PathBuf::from("out")),
            ..PipelineConfig::default()
        };
        let b = a.clone();
        assert_eq!(a.hash(), b.hash());
        a.min_candidate_freq = 26;
        assert_ne!(a.hash(), b.hash());
    }
}
