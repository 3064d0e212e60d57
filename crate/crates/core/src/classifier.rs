//! Output heads: per-token affine scores with softmax cross-entropy, and
//! a linear-chain CRF (log-space forward algorithm, Viterbi decoding,
//! negative log-likelihood).
//!
//! The CRF keeps virtual START/STOP states so whole-phrase probabilities
//! are well-defined; its transition matrix is (d_p+2)² with the START row
//! and STOP column in use and the mirror entries ignored.

use crate::error::{dim_err, Error, Result};
use crate::tensor::{Real, Tape, TensorId};

/// Tape-bound affine classifier: weight d_in × d_p, bias 1 × d_p.
#[derive(Debug, Clone, Copy)]
pub struct ClassifierParams {
    pub weight: TensorId,
    pub bias: TensorId,
}

/// s_t = features_t · W + b, one score row per token. The single softmax
/// is applied downstream (in the loss or the decoder), never here.
pub fn token_scores<F: Real>(
    tape: &mut Tape<F>,
    features: TensorId,
    params: &ClassifierParams,
) -> Result<TensorId> {
    let scored = tape.matmul(features, params.weight)?;
    tape.add_row_vec(scored, params.bias)
}

/// Mean over tokens of −log p(gold_t), with p from the row softmax.
pub fn softmax_nll<F: Real>(
    tape: &mut Tape<F>,
    scores: TensorId,
    gold: &[usize],
) -> Result<TensorId> {
    let (n, d_p) = tape.shape(scores);
    if gold.len() != n {
        return Err(dim_err("softmax_nll", (n, d_p), gold.len()));
    }
    if let Some((t, &g)) = gold.iter().enumerate().find(|(_, &g)| g >= d_p) {
        return Err(Error::Data(format!(
            "gold tag id {g} out of range ({d_p} classes) at token {t}"
        )));
    }
    let log_probs = tape.rowwise_log_softmax(scores)?;
    let picked = tape.pick_per_row(log_probs, gold)?;
    let mean = tape.mean(picked);
    Ok(tape.neg(mean))
}

/// Greedy per-token decode: argmax of each score row, lowest index on ties.
pub fn argmax_decode<F: Real>(tape: &Tape<F>, scores: TensorId) -> Vec<usize> {
    let (n, d_p) = tape.shape(scores);
    let v = tape.value(scores);
    (0..n)
        .map(|t| {
            let row = &v[t * d_p..(t + 1) * d_p];
            let mut best = 0;
            for j in 1..d_p {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Tape-bound CRF parameters.
#[derive(Debug, Clone, Copy)]
pub struct CrfParams {
    /// (d_p+2) × (d_p+2) log-potentials including START/STOP.
    pub transitions: TensorId,
    pub n_classes: usize,
}

impl CrfParams {
    pub fn start_state(&self) -> usize {
        self.n_classes
    }

    pub fn stop_state(&self) -> usize {
        self.n_classes + 1
    }
}

fn check_crf_shapes<F: Real>(
    tape: &Tape<F>,
    scores: TensorId,
    crf: &CrfParams,
) -> Result<(usize, usize)> {
    let (n, k) = tape.shape(scores);
    if n == 0 {
        return Err(Error::Precondition("CRF over an empty sentence".into()));
    }
    if k != crf.n_classes || tape.shape(crf.transitions) != (k + 2, k + 2) {
        return Err(dim_err(
            "crf",
            (n, k),
            tape.shape(crf.transitions),
        ));
    }
    Ok((n, k))
}

/// log Σ over all tag sequences of exp(path score), by the forward
/// algorithm in log space. Differentiable through the tape.
pub fn crf_log_partition<F: Real>(
    tape: &mut Tape<F>,
    scores: TensorId,
    crf: &CrfParams,
) -> Result<TensorId> {
    let (n, k) = check_crf_shapes(tape, scores, crf)?;
    let inner_rows = tape.slice_rows(crf.transitions, 0, k)?;
    let inner = tape.slice_cols(inner_rows, 0, k)?;
    let start_full = tape.slice_rows(crf.transitions, k, 1)?;
    let start_row = tape.slice_cols(start_full, 0, k)?;
    let stop_col = tape.slice_cols(inner_rows, k + 1, 1)?;
    let stop_row = tape.transpose(stop_col);

    let first = tape.slice_rows(scores, 0, 1)?;
    let mut alpha = tape.add(start_row, first)?;
    for t in 1..n {
        let prev = tape.transpose(alpha);
        let moved = tape.add_col_vec(inner, prev)?;
        let reduced = tape.col_logsumexp(moved)?;
        let emit = tape.slice_rows(scores, t, 1)?;
        alpha = tape.add(reduced, emit)?;
    }
    let stopped = tape.add(alpha, stop_row)?;
    let column = tape.transpose(stopped);
    tape.col_logsumexp(column)
}

/// Σ_t scores[t, y_t] plus the START→y_0, y_t→y_{t+1}, y_{n-1}→STOP
/// transition potentials of the gold path.
pub fn crf_gold_score<F: Real>(
    tape: &mut Tape<F>,
    scores: TensorId,
    crf: &CrfParams,
    gold: &[usize],
) -> Result<TensorId> {
    let (n, k) = check_crf_shapes(tape, scores, crf)?;
    if gold.len() != n {
        return Err(dim_err("crf_gold_score", (n, k), gold.len()));
    }
    if let Some((t, &g)) = gold.iter().enumerate().find(|(_, &g)| g >= k) {
        return Err(Error::Data(format!(
            "gold tag id {g} out of range ({k} classes) at token {t}"
        )));
    }
    let emit = tape.pick_per_row(scores, gold)?;
    let emit_sum = tape.sum(emit);

    // Transition chain START→y_0, y_0→y_1, …, y_{n-1}→STOP.
    let mut from = Vec::with_capacity(n + 1);
    from.push(crf.start_state());
    from.extend_from_slice(gold);
    let mut to = gold.to_vec();
    to.push(crf.stop_state());
    let rows = tape.gather(crf.transitions, &from)?;
    let picked = tape.pick_per_row(rows, &to)?;
    let trans_sum = tape.sum(picked);
    tape.add(emit_sum, trans_sum)
}

/// Sentence-level negative log-likelihood: log-partition − gold score.
pub fn crf_nll<F: Real>(
    tape: &mut Tape<F>,
    scores: TensorId,
    crf: &CrfParams,
    gold: &[usize],
) -> Result<TensorId> {
    let log_z = crf_log_partition(tape, scores, crf)?;
    let gold_score = crf_gold_score(tape, scores, crf, gold)?;
    tape.sub(log_z, gold_score)
}

/// Viterbi decode over raw score/transition values (no gradients needed).
/// Ties break toward the lowest tag index at every backpointer.
pub fn viterbi<F: Real>(
    scores: &[F],
    n: usize,
    k: usize,
    transitions: &[F],
) -> Result<(Vec<usize>, F)> {
    if n == 0 {
        return Err(Error::Precondition("viterbi over an empty sentence".into()));
    }
    if scores.len() != n * k || transitions.len() != (k + 2) * (k + 2) {
        return Err(dim_err("viterbi", (n, k), transitions.len()));
    }
    let width = k + 2;
    let start = k;
    let stop = k + 1;
    let mut best = vec![F::zero(); k];
    for j in 0..k {
        best[j] = transitions[start * width + j] + scores[j];
    }
    let mut backptr = vec![0usize; n * k];
    for t in 1..n {
        let mut next = vec![F::neg_infinity(); k];
        for j in 0..k {
            let mut arg = 0;
            let mut top = F::neg_infinity();
            for i in 0..k {
                let cand = best[i] + transitions[i * width + j];
                if cand > top {
                    top = cand;
                    arg = i;
                }
            }
            next[j] = top + scores[t * k + j];
            backptr[t * k + j] = arg;
        }
        best = next;
    }
    let mut last = 0;
    let mut top = F::neg_infinity();
    for j in 0..k {
        let cand = best[j] + transitions[j * width + stop];
        if cand > top {
            top = cand;
            last = j;
        }
    }
    let mut path = vec![0usize; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = backptr[t * k + path[t]];
    }
    Ok((path, top))
}

/// Viterbi over tape tensors.
pub fn crf_viterbi<F: Real>(
    tape: &Tape<F>,
    scores: TensorId,
    crf: &CrfParams,
) -> Result<(Vec<usize>, F)> {
    let (n, k) = check_crf_shapes(tape, scores, crf)?;
    viterbi(tape.value(scores), n, k, tape.value(crf.transitions))
}
