//! Central-difference verification of analytic gradients.

use super::{Tape, TensorId};
use crate::error::{Error, Result};

const FD_STEP: f64 = 1e-5;

/// Outcome of a finite-difference check.
#[derive(Debug, Clone)]
pub struct FdReport {
    /// Largest relative error over the checked elements.
    pub max_rel_error: f64,
    pub tol: f64,
    /// Number of input elements compared.
    pub checked: usize,
}

impl FdReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tol
    }
}

/// Relative error with a floor, so that finite-difference noise on
/// near-zero gradients does not register as disagreement.
fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Checks d(f)/d(input) against central differences at every element.
///
/// `build` must construct a scalar from the given leaf and be
/// deterministic; active dropout (or any other stochastic op) is detected
/// by evaluating twice and rejected as a precondition error.
pub fn finite_difference_check<B>(
    build: B,
    at: &[f64],
    rows: usize,
    cols: usize,
    tol: f64,
) -> Result<FdReport>
where
    B: Fn(&mut Tape<f64>, TensorId) -> Result<TensorId>,
{
    let all: Vec<usize> = (0..at.len()).collect();
    finite_difference_check_sampled(build, at, rows, cols, tol, &all)
}

/// As [`finite_difference_check`], but only the listed input elements are
/// perturbed. Used for large parameter tensors where exhaustive central
/// differences would dominate runtime.
pub fn finite_difference_check_sampled<B>(
    build: B,
    at: &[f64],
    rows: usize,
    cols: usize,
    tol: f64,
    elements: &[usize],
) -> Result<FdReport>
where
    B: Fn(&mut Tape<f64>, TensorId) -> Result<TensorId>,
{
    if at.len() != rows * cols {
        return Err(Error::Contract(format!(
            "finite_difference_check: {} values for a {rows}x{cols} input",
            at.len()
        )));
    }
    let eval = |values: &[f64]| -> Result<f64> {
        let mut tape = Tape::<f64>::new();
        let x = tape.leaf(values.to_vec(), rows, cols, false)?;
        let out = build(&mut tape, x)?;
        tape.item(out)
    };

    let base = eval(at)?;
    if eval(at)? != base {
        return Err(Error::Precondition(
            "function is not deterministic (is dropout still active?)".into(),
        ));
    }

    // Analytic pass.
    let mut tape = Tape::<f64>::new();
    let x = tape.leaf(at.to_vec(), rows, cols, true)?;
    let out = build(&mut tape, x)?;
    let (r, c) = tape.shape(out);
    if (r, c) != (1, 1) {
        return Err(Error::Precondition(format!(
            "function must be scalar-valued, got {r}x{c}"
        )));
    }
    tape.backward(out)?;
    let analytic = tape
        .grad(x)
        .ok_or_else(|| Error::Internal("input received no gradient".into()))?
        .to_vec();

    let mut max_rel = 0.0f64;
    let mut perturbed = at.to_vec();
    for &i in elements {
        perturbed[i] = at[i] + FD_STEP;
        let plus = eval(&perturbed)?;
        perturbed[i] = at[i] - FD_STEP;
        let minus = eval(&perturbed)?;
        perturbed[i] = at[i];
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        max_rel = max_rel.max(rel_error(analytic[i], numeric));
    }

    Ok(FdReport {
        max_rel_error: max_rel,
        tol,
        checked: elements.len(),
    })
}
