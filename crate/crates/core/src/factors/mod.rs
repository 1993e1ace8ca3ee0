//! Exploratory factor analysis of the co-mention matrix: diagonal fill,
//! Pearson correlation, eigen spectrum, factor extraction, direct Oblimin
//! rotation, and the per-factor membership report.

mod oblimin;

use std::io::Write;
use std::path::Path;

use crate::comention::ComentionMatrix;
use crate::error::{Error, Result};
use crate::ioutil::{data_lines, fmt_fixed, format_error, read_text};
use crate::linalg::{jacobi_eigen_sym, Matrix, JACOBI_MAX_SWEEPS};
use crate::mentions::ProfileSet;

pub use oblimin::{oblimin_rotate, ObliminOptions};
pub(crate) use oblimin::criterion_value;

/// A labeled symmetric real matrix with the diagonal filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    labels: Vec<String>,
    values: Matrix,
}

impl DataMatrix {
    pub fn new(labels: Vec<String>, values: Matrix) -> Self {
        let n = labels.len();
        assert_eq!(values.rows(), n, "row count does not match labels");
        assert_eq!(values.cols(), n, "matrix must be square");
        for i in 0..n {
            for j in 0..n {
                assert!(values.get(i, j).is_finite(), "matrix entries must be finite");
                assert_eq!(values.get(i, j), values.get(j, i), "matrix must be symmetric");
            }
        }
        DataMatrix { labels, values }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Replaces the missing diagonal of a co-mention matrix with the mean of
/// each column's off-diagonal entries. On a symmetric matrix the row and
/// column means coincide, so symmetry is preserved.
pub fn fill_diagonal_mean(m: &ComentionMatrix) -> DataMatrix {
    let n = m.n();
    let mut values = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if let Some(v) = m.get(i, j) {
                values.set(i, j, v as f64);
            }
        }
    }
    for j in 0..n {
        let sum: f64 = (0..n).filter(|&i| i != j).map(|i| values.get(i, j)).sum();
        values.set(j, j, sum / (n - 1) as f64);
    }
    DataMatrix::new(m.labels().to_vec(), values)
}

/// Pearson correlations of all column pairs, computed over all N rows with
/// the textbook two-pass formula. The diagonal is exactly 1; entries are
/// clamped to [-1, 1]. A constant column is an error naming its lemma.
pub fn correlation_matrix(d: &DataMatrix) -> Result<DataMatrix> {
    let n = d.n();
    let values = d.values();
    let means: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| values.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let mut sum_squares = vec![0.0; n];
    for j in 0..n {
        let mut ss = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let centered = values.get(i, j) - means[j];
            ss += centered * centered;
            scale = scale.max(values.get(i, j).abs());
        }
        if ss == 0.0 || ss < 1e-24 * n as f64 * scale * scale {
            return Err(Error::ConstantColumn {
                lemma: d.labels()[j].clone(),
            });
        }
        sum_squares[j] = ss;
    }
    let mut corr = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut cross = 0.0;
            for row in 0..n {
                cross += (values.get(row, i) - means[i]) * (values.get(row, j) - means[j]);
            }
            let r = (cross / (sum_squares[i] * sum_squares[j]).sqrt()).clamp(-1.0, 1.0);
            corr.set(i, j, r);
            corr.set(j, i, r);
        }
    }
    Ok(DataMatrix::new(d.labels().to_vec(), corr))
}

/// Full eigen spectrum of a symmetric matrix, eigenvalues descending,
/// eigenvector columns aligned and sign-normalized.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl EigenSpectrum {
    /// Assembles a spectrum from raw pairs, applying the deterministic
    /// ordering and sign conventions.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Matrix) -> Self {
        let n = eigenvalues.len();
        assert_eq!(eigenvectors.rows(), n);
        assert_eq!(eigenvectors.cols(), n);
        let mut pairs: Vec<(f64, Vec<f64>)> = eigenvalues
            .into_iter()
            .enumerate()
            .map(|(c, value)| {
                let mut column = eigenvectors.column(c);
                normalize_sign(&mut column);
                (value, column)
            })
            .collect();
        // Descending by eigenvalue; exact ties ordered by the first
        // differing eigenvector component, larger first.
        pairs.sort_by(|a, b| {
            b.0.total_cmp(&a.0).then_with(|| {
                for (x, y) in a.1.iter().zip(&b.1) {
                    let ord = y.total_cmp(x);
                    if ord != std::cmp::Ordering::Equal {
                        return ord;
                    }
                }
                std::cmp::Ordering::Equal
            })
        });
        let mut vectors = Matrix::zeros(n, n);
        for (c, (_, column)) in pairs.iter().enumerate() {
            for (r, &x) in column.iter().enumerate() {
                vectors.set(r, c, x);
            }
        }
        EigenSpectrum {
            eigenvalues: pairs.into_iter().map(|(v, _)| v).collect(),
            eigenvectors: vectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Flips a vector's sign so its largest-magnitude component (first such
/// component on ties) is positive.
fn normalize_sign(column: &mut [f64]) {
    let mut best = 0;
    for (i, x) in column.iter().enumerate() {
        if x.abs() > column[best].abs() {
            best = i;
        }
    }
    if column[best] < 0.0 {
        for x in column.iter_mut() {
            *x = -*x;
        }
    }
}

pub fn eigen_spectrum(r: &DataMatrix) -> Result<EigenSpectrum> {
    let (values, vectors) = jacobi_eigen_sym(r.values(), JACOBI_MAX_SWEEPS)?;
    Ok(EigenSpectrum::new(values, vectors))
}

/// How many factors to retain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorCountMode {
    Explicit(usize),
    /// Count of eigenvalues strictly greater than 1.
    Kaiser,
}

/// Resolves the factor count. `Kaiser` may return 0, which downstream
/// extraction rejects; scree inspection stays manual via the exported
/// eigenvalue list.
pub fn select_k(spectrum: &EigenSpectrum, mode: FactorCountMode) -> Result<usize> {
    match mode {
        FactorCountMode::Explicit(k) => {
            if k < 1 || k > spectrum.n() {
                Err(Error::FactorCountOutOfRange {
                    k,
                    n: spectrum.n(),
                })
            } else {
                Ok(k)
            }
        }
        FactorCountMode::Kaiser => {
            Ok(spectrum.eigenvalues().iter().filter(|&&v| v > 1.0).count())
        }
    }
}

/// Principal-components loadings: column c is eigenvector c scaled by
/// sqrt(eigenvalue c), sign-normalized per column.
pub fn extract_loadings(spectrum: &EigenSpectrum, k: usize) -> Result<Matrix> {
    let n = spectrum.n();
    if k < 1 || k > n {
        return Err(Error::FactorCountOutOfRange { k, n });
    }
    let mut loadings = Matrix::zeros(n, k);
    for c in 0..k {
        let value = spectrum.eigenvalues()[c];
        if value <= 0.0 {
            return Err(Error::NonpositiveEigenvalue { index: c, value });
        }
        let scale = value.sqrt();
        let mut column: Vec<f64> = (0..n)
            .map(|r| spectrum.eigenvectors().get(r, c) * scale)
            .collect();
        normalize_sign(&mut column);
        for (r, &x) in column.iter().enumerate() {
            loadings.set(r, c, x);
        }
    }
    Ok(loadings)
}

/// Result of factor extraction and oblique rotation.
#[derive(Debug, Clone)]
pub struct FactorSolution {
    labels: Vec<String>,
    unrotated: Matrix,
    pattern: Matrix,
    phi: Matrix,
    iterations: usize,
    converged: bool,
    criterion: f64,
    criterion_history: Vec<f64>,
}

impl FactorSolution {
    /// Rebuilds a solution from previously exported artifacts; the
    /// criterion is recomputed from the pattern.
    pub fn from_parts(
        labels: Vec<String>,
        unrotated: Matrix,
        pattern: Matrix,
        phi: Matrix,
        gamma: f64,
    ) -> Self {
        let n = labels.len();
        let k = pattern.cols();
        assert_eq!(pattern.rows(), n);
        assert_eq!(unrotated.rows(), n);
        assert_eq!(unrotated.cols(), k);
        assert_eq!(phi.rows(), k);
        assert_eq!(phi.cols(), k);
        let criterion = criterion_value(&pattern, gamma);
        FactorSolution {
            labels,
            unrotated,
            pattern,
            phi,
            iterations: 0,
            converged: true,
            criterion,
            criterion_history: vec![criterion],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.pattern.cols()
    }

    pub fn unrotated(&self) -> &Matrix {
        &self.unrotated
    }

    pub fn pattern(&self) -> &Matrix {
        &self.pattern
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn criterion(&self) -> f64 {
        self.criterion
    }

    /// Criterion value after each accepted rotation step, starting at the
    /// unrotated loadings. Non-increasing by construction.
    pub fn criterion_history(&self) -> &[f64] {
        &self.criterion_history
    }
}

/// One factor's membership row.
#[derive(Debug, Clone)]
pub struct FactorRow {
    index: usize,
    members: Vec<(String, f64)>,
    max_loading: f64,
}

impl FactorRow {
    /// 1-based factor index.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Members as (lemma, signed pattern loading), ordered by descending
    /// absolute loading.
    pub fn members(&self) -> &[(String, f64)] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Largest absolute member loading, 0 for an empty factor.
    pub fn max_loading(&self) -> f64 {
        self.max_loading
    }
}

/// Per-factor membership derived from the pattern matrix.
#[derive(Debug, Clone)]
pub struct FactorReport {
    rows: Vec<FactorRow>,
    unassigned: Vec<String>,
}

impl FactorReport {
    pub fn rows(&self) -> &[FactorRow] {
        &self.rows
    }

    /// Lemmas with no absolute loading at or above the threshold.
    pub fn unassigned(&self) -> &[String] {
        &self.unassigned
    }

    /// Assigned factor index per lemma.
    pub fn assignment(&self, lemma: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|row| row.members.iter().any(|(l, _)| l == lemma))
            .map(|row| row.index)
    }
}

/// Assigns each author to the factor holding its maximum absolute pattern
/// loading, if that value reaches `threshold`; exact ties go to the lower
/// factor index. Authors below the threshold everywhere are unassigned.
pub fn factor_report(
    solution: &FactorSolution,
    profiles: &ProfileSet,
    threshold: f64,
) -> FactorReport {
    for label in solution.labels() {
        assert!(
            profiles.get(label).is_some(),
            "solution label '{label}' missing from profiles"
        );
    }
    let k = solution.k();
    let pattern = solution.pattern();
    let mut members: Vec<Vec<(String, f64)>> = vec![Vec::new(); k];
    let mut unassigned = Vec::new();
    for (i, label) in solution.labels().iter().enumerate() {
        let mut best = 0;
        for j in 1..k {
            if pattern.get(i, j).abs() > pattern.get(i, best).abs() {
                best = j;
            }
        }
        let loading = pattern.get(i, best);
        if loading.abs() >= threshold {
            members[best].push((label.clone(), loading));
        } else {
            unassigned.push(label.clone());
        }
    }
    let rows = members
        .into_iter()
        .enumerate()
        .map(|(j, mut members)| {
            members.sort_by(|a, b| {
                b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0))
            });
            let max_loading = members.first().map_or(0.0, |(_, l)| l.abs());
            FactorRow {
                index: j + 1,
                members,
                max_loading,
            }
        })
        .collect();
    FactorReport { rows, unassigned }
}

/// Writes the eigenvalue (scree) list: `rank\teigenvalue`, descending.
pub fn write_scree<W: Write>(spectrum: &EigenSpectrum, mut w: W) -> std::io::Result<()> {
    writeln!(w, "rank\teigenvalue")?;
    for (i, value) in spectrum.eigenvalues().iter().enumerate() {
        writeln!(w, "{}\t{}", i + 1, fmt_fixed(*value, 6))?;
    }
    Ok(())
}

/// Writes a loadings matrix (unrotated or pattern) as CSV with lemma rows
/// and F1..Fk columns, 6 decimal places.
pub fn write_loadings_csv<W: Write>(
    labels: &[String],
    loadings: &Matrix,
    mut w: W,
) -> std::io::Result<()> {
    let headers: Vec<String> = (1..=loadings.cols()).map(|j| format!("F{j}")).collect();
    writeln!(w, ",{}", headers.join(","))?;
    for (i, label) in labels.iter().enumerate() {
        let cells: Vec<String> = (0..loadings.cols())
            .map(|j| fmt_fixed(loadings.get(i, j), 6))
            .collect();
        writeln!(w, "{},{}", label, cells.join(","))?;
    }
    Ok(())
}

/// Reads a loadings CSV back as (labels, matrix).
pub fn read_loadings_csv(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| format_error(path, 1, "empty loadings file"))?;
    let Some(factors) = header.strip_prefix(',') else {
        return Err(format_error(path, line_no, "header must start with ','"));
    };
    let k = factors.split(',').count();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != k + 1 {
            return Err(format_error(
                path,
                line,
                format!("expected {} fields, found {}", k + 1, fields.len()),
            ));
        }
        labels.push(fields[0].to_string());
        let values: Vec<f64> = fields[1..]
            .iter()
            .map(|f| {
                f.parse()
                    .map_err(|_| format_error(path, line, format!("invalid loading '{f}'")))
            })
            .collect::<Result<_>>()?;
        rows.push(values);
    }
    Ok((labels, Matrix::from_rows(&rows)))
}

/// Writes the factor correlation matrix with F1..Fk labels.
pub fn write_phi_csv<W: Write>(phi: &Matrix, mut w: W) -> std::io::Result<()> {
    let headers: Vec<String> = (1..=phi.cols()).map(|j| format!("F{j}")).collect();
    writeln!(w, ",{}", headers.join(","))?;
    for i in 0..phi.rows() {
        let cells: Vec<String> = (0..phi.cols())
            .map(|j| fmt_fixed(phi.get(i, j), 6))
            .collect();
        writeln!(w, "F{},{}", i + 1, cells.join(","))?;
    }
    Ok(())
}

pub fn read_phi_csv(path: &Path) -> Result<Matrix> {
    let (labels, matrix) = read_loadings_csv(path)?;
    if labels.len() != matrix.cols() {
        return Err(format_error(path, 1, "phi matrix must be square"));
    }
    Ok(matrix)
}

/// Writes the factor report: `factor\tmax_loading\tsize\tmembers`.
pub fn write_report_tsv<W: Write>(report: &FactorReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "factor\tmax_loading\tsize\tmembers")?;
    for row in report.rows() {
        let members: Vec<&str> = row.members().iter().map(|(l, _)| l.as_str()).collect();
        writeln!(
            w,
            "F{}\t{}\t{}\t{}",
            row.index(),
            fmt_fixed(row.max_loading(), 6),
            row.size(),
            members.join(",")
        )?;
    }
    Ok(())
}

/// Reads a report back, re-deriving member loadings from the pattern
/// matrix; `unassigned` is the complement of all members within `labels`.
pub fn read_report_tsv(
    path: &Path,
    labels: &[String],
    pattern: &Matrix,
) -> Result<FactorReport> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, "factor\tmax_loading\tsize\tmembers")) => {}
        Some((line, other)) => {
            return Err(format_error(
                path,
                line,
                format!("expected report header, found '{other}'"),
            ))
        }
        None => return Err(format_error(path, 1, "empty report file")),
    }
    let mut rows = Vec::new();
    let mut assigned = std::collections::BTreeSet::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [factor, max_loading, size, members] = fields[..] else {
            return Err(format_error(
                path,
                line,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        };
        let index: usize = factor
            .strip_prefix('F')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_error(path, line, format!("invalid factor '{factor}'")))?;
        if index != rows.len() + 1 {
            return Err(format_error(path, line, "factor rows must be F1..Fk in order"));
        }
        let max_loading: f64 = max_loading
            .parse()
            .map_err(|_| format_error(path, line, "invalid max_loading"))?;
        let size: usize = size
            .parse()
            .map_err(|_| format_error(path, line, "invalid size"))?;
        let mut member_rows = Vec::new();
        if !members.is_empty() {
            for lemma in members.split(',') {
                let row_idx = labels.iter().position(|l| l == lemma).ok_or_else(|| {
                    format_error(path, line, format!("unknown member '{lemma}'"))
                })?;
                if !assigned.insert(lemma.to_string()) {
                    return Err(format_error(
                        path,
                        line,
                        format!("member '{lemma}' assigned twice"),
                    ));
                }
                member_rows.push((lemma.to_string(), pattern.get(row_idx, index - 1)));
            }
        }
        if member_rows.len() != size {
            return Err(format_error(path, line, "size does not match member count"));
        }
        rows.push(FactorRow {
            index,
            members: member_rows,
            max_loading,
        });
    }
    let unassigned = labels
        .iter()
        .filter(|l| !assigned.contains(*l))
        .cloned()
        .collect();
    Ok(FactorReport { rows, unassigned })
}
