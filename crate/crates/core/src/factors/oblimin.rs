//! Direct Oblimin rotation by gradient projection on the oblique manifold.
//!
//! Minimizes, over oblique transformations T with unit-length columns,
//!
//! ```text
//! f(Λ) = Σ_{p<q} [ Σ_i λ²_ip λ²_iq  −  (γ/N) (Σ_i λ²_ip)(Σ_i λ²_iq) ]
//! ```
//!
//! where the pattern is Λ = A (Tᵀ)⁻¹ and γ = 0 gives direct quartimin.
//! The iteration is the oblique gradient projection algorithm of Jennrich
//! (2002) as tabulated by Bernaards & Jennrich (2005): project the
//! criterion gradient onto the manifold tangent, step against it with a
//! doubling/halving line search, and renormalize the transform columns.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::FactorSolution;

/// Rotation parameters. `gamma = 0` (quartimin) is the conventional
/// Oblimin default; `tol` bounds the Frobenius norm of the accepted step.
#[derive(Debug, Clone, Copy)]
pub struct ObliminOptions {
    pub gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ObliminOptions {
    fn default() -> Self {
        ObliminOptions {
            gamma: 0.0,
            max_iter: 250,
            tol: 1e-6,
        }
    }
}

/// Oblimin criterion value and its gradient with respect to the pattern.
fn criterion_and_gradient(pattern: &Matrix, gamma: f64) -> (f64, Matrix) {
    let (n, k) = (pattern.rows(), pattern.cols());
    let mut squared = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            let x = pattern.get(i, j);
            squared.set(i, j, x * x);
        }
    }
    let row_sums: Vec<f64> = (0..n)
        .map(|i| (0..k).map(|j| squared.get(i, j)).sum())
        .collect();
    let col_sums: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| squared.get(i, j)).sum())
        .collect();
    let col_total: f64 = col_sums.iter().sum();

    let mut f = 0.0;
    let mut gradient = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            let x = (row_sums[i] - squared.get(i, j))
                - (gamma / n as f64) * (col_total - col_sums[j]);
            f += 0.5 * squared.get(i, j) * x;
            gradient.set(i, j, 2.0 * pattern.get(i, j) * x);
        }
    }
    (f, gradient)
}

pub(crate) fn criterion_value(pattern: &Matrix, gamma: f64) -> f64 {
    criterion_and_gradient(pattern, gamma).0
}

/// Gradient with respect to T: −(Λᵀ Gq T⁻¹)ᵀ.
fn transform_gradient(pattern: &Matrix, pattern_gradient: &Matrix, t: &Matrix) -> Result<Matrix> {
    let t_inv = t.inverse()?;
    Ok(pattern
        .transpose()
        .matmul(pattern_gradient)
        .matmul(&t_inv)
        .transpose()
        .scale(-1.0))
}

/// Projects the gradient onto the tangent of the unit-column constraint:
/// Gp = G − T diag(colsums(T ∘ G)).
fn project(gradient: &Matrix, t: &Matrix) -> Matrix {
    let k = t.cols();
    let mut projected = gradient.clone();
    for j in 0..k {
        let dot: f64 = (0..k).map(|i| t.get(i, j) * gradient.get(i, j)).sum();
        for i in 0..k {
            projected.set(i, j, gradient.get(i, j) - t.get(i, j) * dot);
        }
    }
    projected
}

/// Rescales every column to unit Euclidean length.
fn normalize_columns(m: &Matrix) -> Result<Matrix> {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let norm: f64 = (0..m.rows())
            .map(|i| m.get(i, j) * m.get(i, j))
            .sum::<f64>()
            .sqrt();
        if norm < 1e-150 || !norm.is_finite() {
            return Err(Error::SingularTransform);
        }
        for i in 0..m.rows() {
            out.set(i, j, m.get(i, j) / norm);
        }
    }
    Ok(out)
}

/// Rotates unrotated loadings to the Oblimin criterion minimum, returning
/// the pattern matrix, factor correlations phi = TᵀT, the accepted-step
/// criterion log, and a convergence flag (accepted step change < `tol`).
/// Hitting `max_iter` is not an error: the solution is returned with
/// `converged = false`.
///
/// For k = 1 there is nothing to rotate; the input is returned unchanged
/// with phi = [[1]].
pub fn oblimin_rotate(
    labels: &[String],
    unrotated: &Matrix,
    options: &ObliminOptions,
) -> Result<FactorSolution> {
    let (n, k) = (unrotated.rows(), unrotated.cols());
    assert_eq!(labels.len(), n, "label count does not match loadings");
    if k == 0 {
        return Err(Error::FactorCountOutOfRange { k: 0, n });
    }
    if k == 1 {
        let criterion = criterion_value(unrotated, options.gamma);
        return Ok(FactorSolution {
            labels: labels.to_vec(),
            unrotated: unrotated.clone(),
            pattern: unrotated.clone(),
            phi: Matrix::identity(1),
            iterations: 0,
            converged: true,
            criterion,
            criterion_history: vec![criterion],
        });
    }

    let mut t = Matrix::identity(k);
    let mut pattern = unrotated.clone();
    let (mut f, mut gq) = criterion_and_gradient(&pattern, options.gamma);
    let mut g = transform_gradient(&pattern, &gq, &t)?;
    let mut history = vec![f];
    let mut step_size = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..options.max_iter {
        let projected = project(&g, &t);
        let slope = projected.frobenius_norm();
        if slope < options.tol {
            converged = true;
            break;
        }
        step_size *= 2.0;
        let mut accepted = None;
        for _ in 0..64 {
            let candidate = t.sub_scaled(&projected, step_size);
            let trial = normalize_columns(&candidate)
                .and_then(|tt| tt.inverse().map(|inv| (tt, inv)));
            if let Ok((tt, tt_inv)) = trial {
                let lt = unrotated.matmul(&tt_inv.transpose());
                let (ft, gqt) = criterion_and_gradient(&lt, options.gamma);
                if ft.is_finite() && ft < f - 0.5 * slope * slope * step_size {
                    accepted = Some((tt, lt, ft, gqt));
                    break;
                }
            }
            step_size /= 2.0;
            if step_size < 1e-20 {
                break;
            }
        }
        // No descent step exists at floating-point resolution: stationary.
        let Some((tt, lt, ft, gqt)) = accepted else {
            converged = true;
            break;
        };
        let step = t.sub(&tt).frobenius_norm();
        t = tt;
        pattern = lt;
        f = ft;
        gq = gqt;
        g = transform_gradient(&pattern, &gq, &t)?;
        history.push(f);
        iterations += 1;
        if step < options.tol {
            converged = true;
            break;
        }
    }
    let _ = gq;

    // Deterministic presentation: flip pattern columns (and the matching
    // transform columns) so each column's largest-magnitude entry is
    // positive. The criterion and the reproduced matrix are invariant.
    for j in 0..k {
        let mut best = 0;
        for i in 1..n {
            if pattern.get(i, j).abs() > pattern.get(best, j).abs() {
                best = i;
            }
        }
        if pattern.get(best, j) < 0.0 {
            for i in 0..n {
                pattern.set(i, j, -pattern.get(i, j));
            }
            for i in 0..k {
                t.set(i, j, -t.get(i, j));
            }
        }
    }
    let mut phi = t.transpose().matmul(&t);
    for i in 0..k {
        phi.set(i, i, 1.0);
        for j in (i + 1)..k {
            let average = 0.5 * (phi.get(i, j) + phi.get(j, i));
            phi.set(i, j, average);
            phi.set(j, i, average);
        }
    }

    Ok(FactorSolution {
        labels: labels.to_vec(),
        unrotated: unrotated.clone(),
        pattern,
        phi,
        iterations,
        converged,
        criterion: f,
        criterion_history: history,
    })
}
