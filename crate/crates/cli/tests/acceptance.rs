//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to
//! see them). Tolerances are pinned in the assertions.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use comention_core::comention::{build_matrix, comention_count};
use comention_core::factors::{
    correlation_matrix, eigen_spectrum, extract_loadings, factor_report, fill_diagonal_mean,
    oblimin_rotate, select_k, DataMatrix, EigenSpectrum, FactorCountMode, ObliminOptions,
};
use comention_core::lexicon::{
    build_lexicon, expand_variants, CandidateSurname, Lexicon, Thresholds,
};
use comention_core::linalg::Matrix;
use comention_core::mentions::{
    build_profiles, filter_min_mentions, scan_document, MentionProfile, ProfileSet,
};
use comention_core::testing::{
    candidates_for, community_names, planted_corpus, random_corpus, recovery_rate, SplitMix64,
};
use comention_core::Document;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Brute force: materialize both multisets and count the intersection.
fn multiset_oracle(a: &MentionProfile, b: &MentionProfile) -> u64 {
    fn materialize(p: &MentionProfile) -> Vec<String> {
        let mut items = Vec::new();
        for (doc, &count) in p.counts() {
            for _ in 0..count {
                items.push(doc.clone());
            }
        }
        items.sort();
        items
    }
    let xs = materialize(a);
    let ys = materialize(b);
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared
}

#[test]
fn criterion_01_multiset_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xC0FFEE);
    for trial in 0..1000 {
        let n_docs = 1 + rng.below(20) as usize;
        let mut profile = |lemma: &str| {
            let counts: BTreeMap<String, u64> = (0..n_docs)
                .map(|d| (format!("d{d:02}"), rng.below(6)))
                .collect();
            MentionProfile::new(lemma, counts)
        };
        let a = profile("A");
        let b = profile("B");
        let fast = comention_count(&a, &b).unwrap();
        assert_eq!(fast, multiset_oracle(&a, &b), "trial {trial}");
    }
    assert!(start.elapsed() < Duration::from_secs(5));
    println!("[PASS] criterion 1: comention_count equals the multiset oracle on 1000 random pairs");
}

#[test]
fn criterion_02_lemmatization_vectors() {
    let variants = expand_variants("Freud");
    for inflected in ["Freuds", "Freudsche", "Freudschen", "Freudschem", "Freudscher"] {
        assert!(variants.contains(inflected), "{inflected} must match Freud");
    }
    assert!(variants.contains("Freud"));
    assert!(!variants.contains("Freude"));

    let lexicon = Lexicon::from_rows(vec![("Freud".into(), 0)], Thresholds::default()).unwrap();
    let doc = Document::new(
        "d1",
        1960,
        "Freuds Freudsche Freudschen Freudschem Freudscher Freud Freude",
    );
    let counts = scan_document(&doc, &lexicon);
    assert_eq!(counts["Freud"], 6);
    println!("[PASS] criterion 2: genitive and sch-suffix forms resolve to the lemma, near-misses do not");
}

#[test]
fn criterion_03_pruning_thresholds() {
    // One document mentioning Alpha 25 times and Beta 24 times.
    let mut words = vec!["Alpha"; 25];
    words.extend(vec!["Beta"; 24]);
    let corpus = comention_core::Corpus::from_documents(vec![Document::new(
        "d1",
        1960,
        words.join(" "),
    )])
    .unwrap();
    let candidates: Vec<CandidateSurname> = ["Alpha", "Beta", "Ab", "weber"]
        .iter()
        .map(|s| CandidateSurname {
            surface: s.to_string(),
            source_count: 1000,
        })
        .collect();
    let lexicon =
        build_lexicon(&candidates, &corpus, Thresholds::default(), None, None).unwrap();
    let lemmas: Vec<&str> = lexicon.lemmas().collect();
    // "Ab" is shorter than 3 characters, "weber" starts lowercase, and
    // Beta's 24 corpus occurrences miss the inclusive 25 threshold.
    assert_eq!(lemmas, ["Alpha"]);

    let totals = [("A", 15u64), ("B", 11), ("C", 10)];
    let profiles = ProfileSet::new(
        totals
            .iter()
            .map(|(lemma, total)| {
                MentionProfile::new(*lemma, BTreeMap::from([("d1".to_string(), *total)]))
            })
            .collect(),
        "synthetic",
    );
    let kept = filter_min_mentions(&profiles, 11).unwrap();
    let kept_lemmas: Vec<&str> = kept.profiles().iter().map(|p| p.lemma()).collect();
    assert_eq!(kept_lemmas, ["A", "B"]);
    println!("[PASS] criterion 3: length, capitalization, frequency, and mention thresholds hold at their boundaries");
}

#[test]
fn criterion_04_matrix_properties_on_random_corpora() {
    let mut rng = SplitMix64::new(404);
    let names: Vec<String> = community_names(2, 4).into_iter().flatten().collect();
    let lexicon = Lexicon::from_rows(
        names.iter().map(|n| (n.clone(), 0)).collect(),
        Thresholds::default(),
    )
    .unwrap();
    for trial in 0..100 {
        let n_docs = 2 + rng.below(10) as usize;
        let corpus = random_corpus(&names, n_docs, 5, &mut rng);
        let profiles = build_profiles(&corpus, &lexicon);
        let matrix = build_matrix(&profiles).unwrap();
        let n = matrix.n();
        // Per-document decomposition, rebuilt from individual scans.
        let mut decomposed = vec![0u64; n * n];
        for doc in corpus.documents() {
            let counts = scan_document(doc, &lexicon);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let a = counts.get(&matrix.labels()[i]).copied().unwrap_or(0);
                    let b = counts.get(&matrix.labels()[j]).copied().unwrap_or(0);
                    decomposed[i * n + j] += a.min(b);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    assert_eq!(matrix.get(i, j), None);
                    continue;
                }
                let cell = matrix.get(i, j).unwrap();
                assert_eq!(matrix.get(j, i).unwrap(), cell, "symmetry, trial {trial}");
                let total_i = profiles.profiles()[i].total();
                let total_j = profiles.profiles()[j].total();
                assert!(cell <= total_i.min(total_j), "bound, trial {trial}");
                assert_eq!(cell, decomposed[i * n + j], "decomposition, trial {trial}");
            }
        }
    }
    println!("[PASS] criterion 4: symmetry, min-total bound, and per-document decomposition hold on 100 random corpora");
}

fn random_symmetric(n: usize, rng: &mut SplitMix64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = 2.0 * rng.next_f64() - 1.0;
            m.set(i, j, x);
            m.set(j, i, x);
        }
    }
    m
}

#[test]
fn criterion_05_eigen_correctness() {
    let mut rng = SplitMix64::new(505);
    for &n in &[2usize, 3, 5, 10, 25, 50] {
        for _ in 0..4 {
            let m = random_symmetric(n, &mut rng);
            let labels: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
            let d = DataMatrix::new(labels, m.clone());
            let spectrum = eigen_spectrum(&d).unwrap();
            let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
            let sum: f64 = spectrum.eigenvalues().iter().sum();
            assert!((sum - trace).abs() < 1e-8 * n as f64, "trace, n={n}");
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n)
                        .map(|r| {
                            spectrum.eigenvectors().get(r, a) * spectrum.eigenvectors().get(r, b)
                        })
                        .sum();
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-8, "orthonormality, n={n}");
                }
            }
            for c in 0..n {
                for r in 0..n {
                    let av: f64 = (0..n)
                        .map(|k| m.get(r, k) * spectrum.eigenvectors().get(k, c))
                        .sum();
                    let residual =
                        av - spectrum.eigenvalues()[c] * spectrum.eigenvectors().get(r, c);
                    assert!(residual.abs() < 1e-8, "residual, n={n}");
                }
            }
        }
    }
    // Analytic cases.
    let identity = DataMatrix::new(
        (0..5).map(|i| format!("v{i}")).collect(),
        Matrix::identity(5),
    );
    let spectrum = eigen_spectrum(&identity).unwrap();
    for &v in spectrum.eigenvalues() {
        assert!((v - 1.0).abs() < 1e-10);
    }
    let ones_row = vec![1.0; 4];
    let ones = Matrix::from_rows(&[
        ones_row.clone(),
        ones_row.clone(),
        ones_row.clone(),
        ones_row,
    ]);
    let rank_one = DataMatrix::new((0..4).map(|i| format!("v{i}")).collect(), ones);
    let spectrum = eigen_spectrum(&rank_one).unwrap();
    assert!((spectrum.eigenvalues()[0] - 4.0).abs() < 1e-10);
    for &v in &spectrum.eigenvalues()[1..] {
        assert!(v.abs() < 1e-10);
    }
    println!("[PASS] criterion 5: eigen residuals < 1e-8, trace preserved, analytic spectra exact to 1e-10");
}

/// Grid-search oracle for k=2 oblique rotations: both transform columns
/// parametrized by angle at 0.5 degree resolution over [0, pi).
fn grid_oracle_minimum(a: &[[f64; 2]; 8]) -> f64 {
    let step = 0.5f64.to_radians();
    let steps = 360;
    let mut best = f64::INFINITY;
    for i1 in 0..steps {
        let theta1 = i1 as f64 * step;
        let (s1, c1) = theta1.sin_cos();
        for i2 in 0..steps {
            let theta2 = i2 as f64 * step;
            let (s2, c2) = theta2.sin_cos();
            let det = c1 * s2 - c2 * s1;
            if det.abs() < 1e-9 {
                continue;
            }
            // Lambda = A (T^t)^-1 for T = [[c1, c2], [s1, s2]].
            let mut f = 0.0;
            for row in a {
                let l1 = (row[0] * s2 - row[1] * c2) / det;
                let l2 = (-row[0] * s1 + row[1] * c1) / det;
                f += l1 * l1 * l2 * l2;
            }
            if f < best {
                best = f;
            }
        }
    }
    best
}

#[test]
fn criterion_06_rotation_correctness() {
    let start = Instant::now();
    let names: Vec<String> = (0..8).map(|i| format!("v{i}")).collect();

    // (a) k = 1 is the identity rotation.
    let single = Matrix::from_rows(&[vec![0.9], vec![0.8], vec![0.7]]);
    let solution =
        oblimin_rotate(&names[..3], &single, &ObliminOptions::default()).unwrap();
    assert_eq!(solution.pattern(), &single);
    assert_eq!(solution.phi(), &Matrix::identity(1));

    // (b) perfect simple structure is recovered up to permutation/sign.
    let simple = Matrix::from_rows(&[
        vec![0.8, 0.0],
        vec![0.7, 0.0],
        vec![0.6, 0.0],
        vec![0.0, 0.8],
        vec![0.0, 0.7],
        vec![0.0, 0.6],
    ]);
    let solution = oblimin_rotate(&names[..6], &simple, &ObliminOptions::default()).unwrap();
    assert!(solution.criterion() < 1e-10);
    let mut recovered = f64::INFINITY;
    for (p0, p1) in [(0, 1), (1, 0)] {
        for s0 in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                let mut diff = 0.0f64;
                for i in 0..6 {
                    diff = diff.max(
                        (solution.pattern().get(i, p0) * s0 - simple.get(i, 0)).abs(),
                    );
                    diff = diff.max(
                        (solution.pattern().get(i, p1) * s1 - simple.get(i, 1)).abs(),
                    );
                }
                recovered = recovered.min(diff);
            }
        }
    }
    assert!(recovered < 1e-8);

    // (c) gradient projection beats a 0.5 degree grid oracle,
    // (d) the criterion log is monotone,
    // (e) the reproduced matrix is preserved.
    let mut rng = SplitMix64::new(606);
    for problem in 0..20 {
        let mut rows = [[0.0f64; 2]; 8];
        for row in rows.iter_mut() {
            row[0] = 1.8 * rng.next_f64() - 0.9;
            row[1] = 1.8 * rng.next_f64() - 0.9;
        }
        let unrotated = Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        let solution =
            oblimin_rotate(&names, &unrotated, &ObliminOptions::default()).unwrap();
        let oracle = grid_oracle_minimum(&rows);
        assert!(
            solution.criterion() <= oracle + 1e-4,
            "problem {problem}: {} vs oracle {oracle}",
            solution.criterion()
        );
        for window in solution.criterion_history().windows(2) {
            assert!(window[1] <= window[0], "monotonicity, problem {problem}");
        }
        let reproduced = solution
            .pattern()
            .matmul(solution.phi())
            .matmul(&solution.pattern().transpose());
        let original = unrotated.matmul(&unrotated.transpose());
        assert!(
            reproduced.max_abs_diff(&original) < 1e-8,
            "fit preservation, problem {problem}"
        );
    }
    assert!(start.elapsed() < Duration::from_secs(60));
    println!("[PASS] criterion 6: rotation identity, simple-structure recovery, grid-oracle optimality, monotone descent, fit preservation");
}

#[test]
fn criterion_07_planted_structure_recovery() {
    let start = Instant::now();
    for (communities, seed) in [(2usize, 41u64), (3, 42), (4, 43)] {
        let mut rng = SplitMix64::new(seed);
        let (corpus, names) = planted_corpus(communities, 6, 40, 0.15, &mut rng);
        let candidates = candidates_for(&names);
        let lexicon = build_lexicon(
            &candidates,
            &corpus,
            Thresholds::default(),
            None,
            None,
        )
        .unwrap();
        assert_eq!(lexicon.len(), communities * 6, "c={communities}: lexicon pruned a planted author");
        let profiles =
            filter_min_mentions(&build_profiles(&corpus, &lexicon), 11).unwrap();
        let matrix = build_matrix(&profiles).unwrap();
        let corr = correlation_matrix(&fill_diagonal_mean(&matrix)).unwrap();
        let spectrum = eigen_spectrum(&corr).unwrap();
        let k = select_k(&spectrum, FactorCountMode::Explicit(communities)).unwrap();
        let loadings = extract_loadings(&spectrum, k).unwrap();
        let solution =
            oblimin_rotate(corr.labels(), &loadings, &ObliminOptions::default()).unwrap();
        let report = factor_report(&solution, &profiles, 0.3);
        let rate = recovery_rate(&report, &names);
        assert!(
            rate >= 0.9,
            "c={communities}: recovered {rate:.3} of planted authors"
        );
    }
    assert!(start.elapsed() < Duration::from_secs(30));
    println!("[PASS] criterion 7: full pipeline recovers >= 90% of planted community members for c in {{2,3,4}}");
}

#[test]
fn criterion_08_kaiser_rule_boundary() {
    let spectra = [
        (vec![2.5, 1.2, 0.9, 0.4], 2usize),
        (vec![2.5, 1.0 + 1e-12, 1.0, 0.5], 2),
        (vec![1.0, 1.0, 1.0, 1.0], 0),
        (vec![5.0, 1.000001, 1.0, 0.2, 0.1], 2),
    ];
    for (values, expected) in spectra {
        let n = values.len();
        let spectrum = EigenSpectrum::new(values.clone(), Matrix::identity(n));
        let k = select_k(&spectrum, FactorCountMode::Kaiser).unwrap();
        assert_eq!(k, expected, "spectrum {values:?}");
    }
    println!("[PASS] criterion 8: Kaiser counts strictly-greater-than-one eigenvalues, boundary 1.0 excluded");
}

#[test]
fn criterion_09_pipeline_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let run = || {
        let status = Command::new(env!("CARGO_BIN_EXE_comention"))
            .current_dir(repo_root())
            .args([
                "run",
                "--config",
                "fixtures/mini.conf",
                "--output-dir",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    run();
    let names = [
        "graph.net",
        "graph.clu",
        "graph.vec",
        "matrix.csv",
        "pattern.csv",
        "loadings.csv",
        "phi.csv",
        "eigenvalues.tsv",
        "lexicon.tsv",
        "profiles.tsv",
        "rotation_log.tsv",
        "report.tsv",
        "summary.txt",
    ];
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| std::fs::read(out.join(n)).unwrap())
        .collect();
    run();
    for (name, bytes) in names.iter().zip(&first) {
        let again = std::fs::read(out.join(name)).unwrap();
        assert_eq!(&again, bytes, "{name} changed between identical runs");
    }
    println!("[PASS] criterion 9: repeated runs produce byte-identical artifacts");
}

/// Structural validator for the Pajek file grammar.
fn validate_pajek(net: &str, clu: &str, vec_text: &str) {
    let net_lines: Vec<&str> = net.lines().collect();
    let vertex_count: usize = net_lines[0]
        .strip_prefix("*Vertices ")
        .expect("net starts with *Vertices")
        .parse()
        .expect("vertex count");
    let mut factor_count = 0;
    for (i, line) in net_lines[1..=vertex_count].iter().enumerate() {
        let mut parts = line.splitn(2, ' ');
        let id: usize = parts.next().unwrap().parse().expect("vertex id");
        assert_eq!(id, i + 1, "vertex ids are 1..N in order");
        let rest = parts.next().expect("vertex label");
        assert!(rest.starts_with('"'), "label is quoted");
        let end = rest[1..].find('"').expect("closing quote") + 1;
        let shape = rest[end + 1..].trim();
        assert!(shape == "box" || shape == "ellipse", "shape is box|ellipse");
        if shape == "ellipse" {
            factor_count += 1;
        }
    }
    assert_eq!(net_lines[vertex_count + 1], "*Edges");
    for line in &net_lines[vertex_count + 2..] {
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 3, "edge line has src dst weight");
        let src: usize = fields[0].parse().unwrap();
        let dst: usize = fields[1].parse().unwrap();
        assert!(src >= 1 && src <= vertex_count);
        assert!(dst >= 1 && dst <= vertex_count);
        let (whole, decimals) = fields[2].split_once('.').expect("weight has decimals");
        assert_eq!(decimals.len(), 4, "weights carry 4 decimal places");
        let weight: f64 = format!("{whole}.{decimals}").parse().unwrap();
        assert!(weight > 0.0 && weight <= 1.0);
    }

    let clu_lines: Vec<&str> = clu.lines().collect();
    assert_eq!(clu_lines[0], format!("*Vertices {vertex_count}"));
    assert_eq!(clu_lines.len(), vertex_count + 1);
    for line in &clu_lines[1..] {
        let cluster: usize = line.parse().expect("cluster number");
        assert!(cluster >= 1 && cluster <= factor_count);
    }

    let vec_lines: Vec<&str> = vec_text.lines().collect();
    assert_eq!(vec_lines[0], format!("*Vertices {vertex_count}"));
    assert_eq!(vec_lines.len(), vertex_count + 1);
    let mut max = 0.0f64;
    for line in &vec_lines[1..] {
        let (_, decimals) = line.split_once('.').expect("size has decimals");
        assert_eq!(decimals.len(), 4, "sizes carry 4 decimal places");
        let value: f64 = line.parse().unwrap();
        assert!(value > 0.0 && value <= 1.0);
        max = max.max(value);
    }
    assert_eq!(max, 1.0, "the largest size is exactly 1.0");
}

#[test]
fn criterion_10_pajek_files_satisfy_the_grammar() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let net = std::fs::read_to_string(golden.join("graph.net")).unwrap();
    let clu = std::fs::read_to_string(golden.join("graph.clu")).unwrap();
    let vec_text = std::fs::read_to_string(golden.join("graph.vec")).unwrap();
    validate_pajek(&net, &clu, &vec_text);
    println!("[PASS] criterion 10: golden Pajek files satisfy the .net/.clu/.vec grammar and count invariants");
}
