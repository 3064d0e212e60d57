//! LSTM cells and the two deep bidirectional topologies.
//!
//! The baseline stacks two cells per direction independently, so forward
//! states never see future tokens and backward states never see past
//! tokens. The cross variant feeds the concatenated first-layer forward
//! and backward states to both second-layer cells, giving every
//! second-layer state access to the whole sentence.

use crate::error::{Error, Result};
use crate::tensor::{Real, Tape, TensorId};

/// Tape-bound parameters of one LSTM cell.
///
/// Gate order inside the 4·d blocks is fixed: input, forget,
/// cell-candidate, output.
#[derive(Debug, Clone, Copy)]
pub struct LstmCell {
    /// Which of the four cells this is (1, 2 forward; 3, 4 backward).
    pub id: usize,
    /// d_in × 4·d_cell.
    pub w_input: TensorId,
    /// d_cell × 4·d_cell.
    pub w_recurrent: TensorId,
    /// 1 × 4·d_cell.
    pub bias: TensorId,
    pub cell_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One step of the canonical sigmoid/tanh gated cell.
pub fn lstm_step<F: Real>(
    tape: &mut Tape<F>,
    cell: &LstmCell,
    x_t: TensorId,
    h_prev: TensorId,
    c_prev: TensorId,
) -> Result<(TensorId, TensorId)> {
    let d = cell.cell_dim;
    let (_, x_cols) = tape.shape(x_t);
    let (w_rows, w_cols) = tape.shape(cell.w_input);
    if x_cols != w_rows || w_cols != 4 * d {
        return Err(Error::Dimension {
            context: format!("lstm cell {}", cell.id),
            left: format!("input width {x_cols}"),
            right: format!("weights {w_rows}x{w_cols}"),
        });
    }
    let from_input = tape.matmul(x_t, cell.w_input)?;
    let from_state = tape.matmul(h_prev, cell.w_recurrent)?;
    let pre = tape.add(from_input, from_state)?;
    let gates = tape.add_row_vec(pre, cell.bias)?;

    let i_pre = tape.slice_cols(gates, 0, d)?;
    let f_pre = tape.slice_cols(gates, d, d)?;
    let g_pre = tape.slice_cols(gates, 2 * d, d)?;
    let o_pre = tape.slice_cols(gates, 3 * d, d)?;
    let input_gate = tape.sigmoid(i_pre);
    let forget_gate = tape.sigmoid(f_pre);
    let candidate = tape.tanh(g_pre);
    let output_gate = tape.sigmoid(o_pre);

    let kept = tape.mul(forget_gate, c_prev)?;
    let written = tape.mul(input_gate, candidate)?;
    let c_t = tape.add(kept, written)?;
    let c_act = tape.tanh(c_t);
    let h_t = tape.mul(output_gate, c_act)?;
    Ok((h_t, c_t))
}

/// Runs one cell over a sentence in the given direction, starting from
/// zero states. Output row t always corresponds to token t: in the
/// forward direction it has consumed tokens 0..=t, in the backward
/// direction tokens t..n.
pub fn run_direction<F: Real>(
    tape: &mut Tape<F>,
    cell: &LstmCell,
    x: TensorId,
    direction: Direction,
) -> Result<TensorId> {
    let (n, _) = tape.shape(x);
    let d = cell.cell_dim;
    let mut h = tape.zeros(1, d);
    let mut c = tape.zeros(1, d);
    let mut rows = vec![None; n];
    let order: Vec<usize> = match direction {
        Direction::Forward => (0..n).collect(),
        Direction::Backward => (0..n).rev().collect(),
    };
    for t in order {
        let x_t = tape.slice_rows(x, t, 1)?;
        let (h_t, c_t) = lstm_step(tape, cell, x_t, h, c)?;
        h = h_t;
        c = c_t;
        rows[t] = Some(h_t);
    }
    let rows: Vec<TensorId> = rows.into_iter().map(|r| r.expect("all rows visited")).collect();
    tape.concat_rows(&rows)
}

/// Encoder output: H plus the directional halves kept for the score
/// decomposition analysis.
#[derive(Debug, Clone, Copy)]
pub struct EncodedSequence {
    /// n × 2·d_cell.
    pub h: TensorId,
    /// n × d_cell forward half.
    pub forward: TensorId,
    /// n × d_cell backward half.
    pub backward: TensorId,
}

/// Independently stacked topology: cells 1→2 forward over X, cells 3→4
/// backward over X, halves concatenated.
pub fn baseline_encode<F: Real>(
    tape: &mut Tape<F>,
    cells: &[LstmCell; 4],
    x: TensorId,
) -> Result<EncodedSequence> {
    let f1 = run_direction(tape, &cells[0], x, Direction::Forward)?;
    let forward = run_direction(tape, &cells[1], f1, Direction::Forward)?;
    let b3 = run_direction(tape, &cells[2], x, Direction::Backward)?;
    let backward = run_direction(tape, &cells[3], b3, Direction::Backward)?;
    let h = tape.concat_cols(&[forward, backward])?;
    Ok(EncodedSequence { h, forward, backward })
}

/// Interleaved topology: both second-layer cells consume the concatenated
/// first-layer forward and backward states, so their inputs are twice as
/// wide as in the baseline.
pub fn cross_encode<F: Real>(
    tape: &mut Tape<F>,
    cells: &[LstmCell; 4],
    x: TensorId,
) -> Result<EncodedSequence> {
    let d = cells[0].cell_dim;
    for second in [&cells[1], &cells[3]] {
        let (rows, _) = tape.shape(second.w_input);
        if rows != 2 * d {
            return Err(Error::Config(format!(
                "cross topology requires second-layer cell {} input width {}, got {rows}",
                second.id,
                2 * d
            )));
        }
    }
    let f1 = run_direction(tape, &cells[0], x, Direction::Forward)?;
    let b3 = run_direction(tape, &cells[2], x, Direction::Backward)?;
    let merged = tape.concat_cols(&[f1, b3])?;
    let forward = run_direction(tape, &cells[1], merged, Direction::Forward)?;
    let backward = run_direction(tape, &cells[3], merged, Direction::Backward)?;
    let h = tape.concat_cols(&[forward, backward])?;
    Ok(EncodedSequence { h, forward, backward })
}
