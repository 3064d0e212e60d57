//! Forward operations.
//!
//! The primitive set is the minimal closed set the three architectures and
//! the CRF head need: matmul, elementwise arithmetic, the two broadcast
//! adds, sigmoid/tanh, row softmax / log-softmax, column log-sum-exp,
//! concat/slice/transpose, max-over-time, sum/mean, embedding gather and
//! per-row pick.

use super::{Real, Tape, TensorId};
use crate::error::{dim_err, Error, Result};

pub enum Op<F: Real> {
    Leaf,
    MatMul(TensorId, TensorId),
    Add(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Mul(TensorId, TensorId),
    /// n×m plus a 1×m row vector broadcast over rows.
    AddRowVec(TensorId, TensorId),
    /// n×m plus an n×1 column vector broadcast over columns.
    AddColVec(TensorId, TensorId),
    Scale(TensorId, F),
    Sigmoid(TensorId),
    Tanh(TensorId),
    RowSoftmax(TensorId),
    RowLogSoftmax(TensorId),
    /// Per-column log-sum-exp: n×m -> 1×m.
    ColLogSumExp(TensorId),
    ConcatCols(Vec<TensorId>),
    ConcatRows(Vec<TensorId>),
    /// (input, first row of the slice)
    SliceRows(TensorId, usize),
    /// (input, first column of the slice)
    SliceCols(TensorId, usize),
    Transpose(TensorId),
    /// Per-column max over rows: n×m -> 1×m. Stores the argmax row of each
    /// column (lowest index on ties) for backward routing.
    MaxOverTime(TensorId, Vec<usize>),
    Sum(TensorId),
    Mean(TensorId),
    /// (table V×d, row indices) -> k×d. Backward scatters into the table.
    Gather(TensorId, Vec<usize>),
    /// (input n×m, one column index per row) -> n×1.
    PickPerRow(TensorId, Vec<usize>),
}

impl<F: Real> Tape<F> {
    /// Matrix product a[n×k] · b[k×m] -> n×m.
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (n, ka) = self.shape(a);
        let (kb, m) = self.shape(b);
        if ka != kb {
            return Err(dim_err("matmul", (n, ka), (kb, m)));
        }
        let mut out = vec![F::zero(); n * m];
        let av = self.value(a);
        let bv = self.value(b);
        for i in 0..n {
            for k in 0..ka {
                let aik = av[i * ka + k];
                if aik == F::zero() {
                    continue;
                }
                let brow = &bv[k * m..(k + 1) * m];
                let orow = &mut out[i * m..(i + 1) * m];
                for j in 0..m {
                    orow[j] = orow[j] + aik * brow[j];
                }
            }
        }
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(n, m, out, rg, Op::MatMul(a, b)))
    }

    fn zip_same_shape(
        &mut self,
        a: TensorId,
        b: TensorId,
        context: &str,
        f: impl Fn(F, F) -> F,
        op: Op<F>,
    ) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if self.shape(b) != (n, m) {
            return Err(dim_err(context, (n, m), self.shape(b)));
        }
        let out: Vec<F> = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(n, m, out, rg, op))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        self.zip_same_shape(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        self.zip_same_shape(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        self.zip_same_shape(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    /// a[n×m] + v[1×m], v broadcast over the rows of a.
    pub fn add_row_vec(&mut self, a: TensorId, v: TensorId) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if self.shape(v) != (1, m) {
            return Err(dim_err("add_row_vec", (n, m), self.shape(v)));
        }
        let vv = self.value(v).to_vec();
        let out: Vec<F> = self
            .value(a)
            .iter()
            .enumerate()
            .map(|(i, &x)| x + vv[i % m])
            .collect();
        let rg = self.rg(a) || self.rg(v);
        Ok(self.push(n, m, out, rg, Op::AddRowVec(a, v)))
    }

    /// a[n×m] + v[n×1], v broadcast over the columns of a.
    pub fn add_col_vec(&mut self, a: TensorId, v: TensorId) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if self.shape(v) != (n, 1) {
            return Err(dim_err("add_col_vec", (n, m), self.shape(v)));
        }
        let vv = self.value(v).to_vec();
        let out: Vec<F> = self
            .value(a)
            .iter()
            .enumerate()
            .map(|(i, &x)| x + vv[i / m])
            .collect();
        let rg = self.rg(a) || self.rg(v);
        Ok(self.push(n, m, out, rg, Op::AddColVec(a, v)))
    }

    pub fn scale(&mut self, a: TensorId, c: F) -> TensorId {
        let (n, m) = self.shape(a);
        let out: Vec<F> = self.value(a).iter().map(|&x| x * c).collect();
        let rg = self.rg(a);
        self.push(n, m, out, rg, Op::Scale(a, c))
    }

    pub fn neg(&mut self, a: TensorId) -> TensorId {
        self.scale(a, -F::one())
    }

    pub fn sigmoid(&mut self, a: TensorId) -> TensorId {
        let (n, m) = self.shape(a);
        let out: Vec<F> = self
            .value(a)
            .iter()
            .map(|&x| F::one() / (F::one() + (-x).exp()))
            .collect();
        let rg = self.rg(a);
        self.push(n, m, out, rg, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: TensorId) -> TensorId {
        let (n, m) = self.shape(a);
        let out: Vec<F> = self.value(a).iter().map(|&x| x.tanh()).collect();
        let rg = self.rg(a);
        self.push(n, m, out, rg, Op::Tanh(a))
    }

    fn check_finite(&self, a: TensorId, context: &str) -> Result<()> {
        if self.value(a).iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite input to {context}"
            )));
        }
        Ok(())
    }

    /// Softmax along each row, max-subtracted for stability.
    pub fn rowwise_softmax(&mut self, a: TensorId) -> Result<TensorId> {
        self.check_finite(a, "rowwise_softmax")?;
        let (n, m) = self.shape(a);
        let av = self.value(a);
        let mut out = vec![F::zero(); n * m];
        for i in 0..n {
            let row = &av[i * m..(i + 1) * m];
            let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
            let mut sum = F::zero();
            for j in 0..m {
                let e = (row[j] - max).exp();
                out[i * m + j] = e;
                sum = sum + e;
            }
            for j in 0..m {
                out[i * m + j] = out[i * m + j] / sum;
            }
        }
        let rg = self.rg(a);
        Ok(self.push(n, m, out, rg, Op::RowSoftmax(a)))
    }

    /// Log-softmax along each row via the log-sum-exp trick.
    pub fn rowwise_log_softmax(&mut self, a: TensorId) -> Result<TensorId> {
        self.check_finite(a, "rowwise_log_softmax")?;
        let (n, m) = self.shape(a);
        let av = self.value(a);
        let mut out = vec![F::zero(); n * m];
        for i in 0..n {
            let row = &av[i * m..(i + 1) * m];
            let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
            let lse = max
                + row
                    .iter()
                    .map(|&x| (x - max).exp())
                    .fold(F::zero(), |s, e| s + e)
                    .ln();
            for j in 0..m {
                out[i * m + j] = row[j] - lse;
            }
        }
        let rg = self.rg(a);
        Ok(self.push(n, m, out, rg, Op::RowLogSoftmax(a)))
    }

    /// Per-column log-sum-exp: n×m -> 1×m.
    pub fn col_logsumexp(&mut self, a: TensorId) -> Result<TensorId> {
        self.check_finite(a, "col_logsumexp")?;
        let (n, m) = self.shape(a);
        let av = self.value(a);
        let mut out = vec![F::zero(); m];
        for j in 0..m {
            let mut max = F::neg_infinity();
            for i in 0..n {
                max = max.max(av[i * m + j]);
            }
            let mut sum = F::zero();
            for i in 0..n {
                sum = sum + (av[i * m + j] - max).exp();
            }
            out[j] = max + sum.ln();
        }
        let rg = self.rg(a);
        Ok(self.push(1, m, out, rg, Op::ColLogSumExp(a)))
    }

    /// Column-wise concatenation; all parts must share a row count.
    pub fn concat_cols(&mut self, parts: &[TensorId]) -> Result<TensorId> {
        if parts.is_empty() {
            return Err(Error::Contract("concat_cols of zero tensors".into()));
        }
        let (n, _) = self.shape(parts[0]);
        let mut total = 0;
        for &p in parts {
            let (np, mp) = self.shape(p);
            if np != n {
                return Err(dim_err("concat_cols", (n, '_'), (np, mp)));
            }
            total += mp;
        }
        let mut out = vec![F::zero(); n * total];
        let mut offset = 0;
        for &p in parts {
            let (_, mp) = self.shape(p);
            let pv = self.value(p);
            for i in 0..n {
                out[i * total + offset..i * total + offset + mp]
                    .copy_from_slice(&pv[i * mp..(i + 1) * mp]);
            }
            offset += mp;
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(n, total, out, rg, Op::ConcatCols(parts.to_vec())))
    }

    /// Row-wise (vertical) concatenation; all parts must share a column count.
    pub fn concat_rows(&mut self, parts: &[TensorId]) -> Result<TensorId> {
        if parts.is_empty() {
            return Err(Error::Contract("concat_rows of zero tensors".into()));
        }
        let (_, m) = self.shape(parts[0]);
        let mut total = 0;
        for &p in parts {
            let (np, mp) = self.shape(p);
            if mp != m {
                return Err(dim_err("concat_rows", ('_', m), (np, mp)));
            }
            total += np;
        }
        let mut out = Vec::with_capacity(total * m);
        for &p in parts {
            out.extend_from_slice(self.value(p));
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(total, m, out, rg, Op::ConcatRows(parts.to_vec())))
    }

    /// Rows [start, start+len) of a.
    pub fn slice_rows(&mut self, a: TensorId, start: usize, len: usize) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if start + len > n {
            return Err(dim_err("slice_rows", (n, m), (start, len)));
        }
        let out = self.value(a)[start * m..(start + len) * m].to_vec();
        let rg = self.rg(a);
        Ok(self.push(len, m, out, rg, Op::SliceRows(a, start)))
    }

    /// Columns [start, start+len) of a.
    pub fn slice_cols(&mut self, a: TensorId, start: usize, len: usize) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if start + len > m {
            return Err(dim_err("slice_cols", (n, m), (start, len)));
        }
        let av = self.value(a);
        let mut out = Vec::with_capacity(n * len);
        for i in 0..n {
            out.extend_from_slice(&av[i * m + start..i * m + start + len]);
        }
        let rg = self.rg(a);
        Ok(self.push(n, len, out, rg, Op::SliceCols(a, start)))
    }

    pub fn transpose(&mut self, a: TensorId) -> TensorId {
        let (n, m) = self.shape(a);
        let av = self.value(a);
        let mut out = vec![F::zero(); n * m];
        for i in 0..n {
            for j in 0..m {
                out[j * n + i] = av[i * m + j];
            }
        }
        let rg = self.rg(a);
        self.push(m, n, out, rg, Op::Transpose(a))
    }

    /// Per-column max over rows: n×m -> 1×m. Gradient routes to the argmax
    /// row of each column, lowest index on ties.
    pub fn max_over_time(&mut self, a: TensorId) -> TensorId {
        let (n, m) = self.shape(a);
        let av = self.value(a);
        let mut out = vec![F::neg_infinity(); m];
        let mut arg = vec![0usize; m];
        for j in 0..m {
            for i in 0..n {
                let x = av[i * m + j];
                if x > out[j] {
                    out[j] = x;
                    arg[j] = i;
                }
            }
        }
        let rg = self.rg(a);
        self.push(1, m, out, rg, Op::MaxOverTime(a, arg))
    }

    /// Sum of all elements -> 1×1.
    pub fn sum(&mut self, a: TensorId) -> TensorId {
        let s: F = self.value(a).iter().cloned().sum();
        let rg = self.rg(a);
        self.push(1, 1, vec![s], rg, Op::Sum(a))
    }

    /// Mean of all elements -> 1×1.
    pub fn mean(&mut self, a: TensorId) -> TensorId {
        let len = F::from_f64(self.value(a).len() as f64);
        let s: F = self.value(a).iter().cloned().sum();
        let rg = self.rg(a);
        self.push(1, 1, vec![s / len], rg, Op::Mean(a))
    }

    /// Rows of `table` selected by `indices` (embedding lookup).
    pub fn gather(&mut self, table: TensorId, indices: &[usize]) -> Result<TensorId> {
        let (v, d) = self.shape(table);
        if let Some(&bad) = indices.iter().find(|&&i| i >= v) {
            return Err(dim_err("gather", (v, d), bad));
        }
        let tv = self.value(table);
        let mut out = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            out.extend_from_slice(&tv[i * d..(i + 1) * d]);
        }
        let rg = self.rg(table);
        Ok(self.push(indices.len(), d, out, rg, Op::Gather(table, indices.to_vec())))
    }

    /// One element per row, chosen by a column index: n×m -> n×1.
    pub fn pick_per_row(&mut self, a: TensorId, cols: &[usize]) -> Result<TensorId> {
        let (n, m) = self.shape(a);
        if cols.len() != n {
            return Err(dim_err("pick_per_row", (n, m), cols.len()));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= m) {
            return Err(dim_err("pick_per_row column", (n, m), bad));
        }
        let av = self.value(a);
        let out: Vec<F> = cols.iter().enumerate().map(|(i, &c)| av[i * m + c]).collect();
        let rg = self.rg(a);
        Ok(self.push(n, 1, out, rg, Op::PickPerRow(a, cols.to_vec())))
    }
}
