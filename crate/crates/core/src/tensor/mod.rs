//! Dense 2-D tensors on a reverse-mode autodiff tape.
//!
//! Every tensor lives in a [`Tape`]; operations append nodes in construction
//! order, so the node list is already a topological order and [`Tape::backward`]
//! is a single reverse sweep. Training runs in `f32`, gradient checks in
//! `f64` (central differences cannot reach 1e-4 in single precision).

mod backward;
mod dropout;
mod gradcheck;
mod ops;

pub use dropout::apply_variational_dropout;
pub use gradcheck::{finite_difference_check, finite_difference_check_sampled, FdReport};
pub use ops::Op;

use crate::error::{dim_err, Error, Result};

/// Scalar type the tape is generic over.
pub trait Real:
    num_traits::Float + std::fmt::Debug + std::fmt::Display + std::iter::Sum + Default + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Handle to a tensor on its tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(pub(crate) usize);

pub(crate) struct Node<F: Real> {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<F>,
    pub grad: Option<Vec<F>>,
    pub requires_grad: bool,
    pub op: Op<F>,
}

/// Computation graph: an append-only list of op records.
pub struct Tape<F: Real> {
    pub(crate) nodes: Vec<Node<F>>,
}

impl<F: Real> Default for Tape<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> Tape<F> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        rows: usize,
        cols: usize,
        values: Vec<F>,
        requires_grad: bool,
        op: Op<F>,
    ) -> TensorId {
        debug_assert_eq!(values.len(), rows * cols);
        let id = TensorId(self.nodes.len());
        self.nodes.push(Node {
            rows,
            cols,
            values,
            grad: None,
            requires_grad,
            op,
        });
        id
    }

    /// New leaf tensor. `requires_grad` marks it as a gradient target.
    pub fn leaf(
        &mut self,
        values: Vec<F>,
        rows: usize,
        cols: usize,
        requires_grad: bool,
    ) -> Result<TensorId> {
        if values.len() != rows * cols {
            return Err(dim_err("leaf", (rows, cols), values.len()));
        }
        Ok(self.push(rows, cols, values, requires_grad, Op::Leaf))
    }

    /// Leaf that never receives gradient (inputs, masks, frozen vectors).
    pub fn constant(&mut self, values: Vec<F>, rows: usize, cols: usize) -> Result<TensorId> {
        self.leaf(values, rows, cols, false)
    }

    pub fn constant_row(&mut self, values: Vec<F>) -> TensorId {
        let cols = values.len();
        self.push(1, cols, values, false, Op::Leaf)
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> TensorId {
        self.push(rows, cols, vec![F::zero(); rows * cols], false, Op::Leaf)
    }

    pub fn scalar(&mut self, v: F) -> TensorId {
        self.push(1, 1, vec![v], false, Op::Leaf)
    }

    pub fn shape(&self, id: TensorId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, id: TensorId) -> &[F] {
        &self.nodes[id.0].values
    }

    /// Scalar value of a 1×1 tensor.
    pub fn item(&self, id: TensorId) -> Result<F> {
        let n = &self.nodes[id.0];
        if n.rows * n.cols != 1 {
            return Err(Error::Contract(format!(
                "item() on a {}x{} tensor",
                n.rows, n.cols
            )));
        }
        Ok(n.values[0])
    }

    pub fn requires_grad(&self, id: TensorId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// Accumulated gradient of a tensor, if backward has reached it.
    pub fn grad(&self, id: TensorId) -> Option<&[F]> {
        self.nodes[id.0].grad.as_deref()
    }

    pub(crate) fn rg(&self, id: TensorId) -> bool {
        self.nodes[id.0].requires_grad
    }
}
