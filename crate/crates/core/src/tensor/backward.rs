//! Reverse sweep over the tape.

use super::{Op, Real, Tape, TensorId};
use crate::error::{Error, Result};

impl<F: Real> Tape<F> {
    fn grad_buf(&mut self, id: TensorId) -> &mut Vec<F> {
        let node = &mut self.nodes[id.0];
        let len = node.rows * node.cols;
        node.grad.get_or_insert_with(|| vec![F::zero(); len])
    }

    fn add_grad(&mut self, id: TensorId, delta: &[F]) {
        let buf = self.grad_buf(id);
        for (g, &d) in buf.iter_mut().zip(delta) {
            *g = *g + d;
        }
    }

    /// Accumulates d(loss)/d(node) into every node that requires gradient.
    /// `loss` must be a 1×1 tensor. Fan-out accumulates additively, so a
    /// leaf used in several places receives the sum over its uses.
    pub fn backward(&mut self, loss: TensorId) -> Result<()> {
        let (r, c) = self.shape(loss);
        if (r, c) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward requires a scalar loss, got {r}x{c}"
            )));
        }
        *self.grad_buf(loss) = vec![F::one()];

        for idx in (0..=loss.0).rev() {
            let id = TensorId(idx);
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let Some(g) = self.nodes[idx].grad.clone() else {
                continue;
            };
            self.propagate(id, &g);
        }
        Ok(())
    }

    fn propagate(&mut self, id: TensorId, g: &[F]) {
        let (rows, cols) = self.shape(id);
        // Ops own their input ids; clone the record to release the borrow.
        match &self.nodes[id.0].op {
            Op::Leaf => {}

            &Op::MatMul(a, b) => {
                let (n, k) = self.shape(a);
                let (_, m) = self.shape(b);
                if self.rg(a) {
                    // dA = g · Bᵀ
                    let bv = self.value(b);
                    let mut da = vec![F::zero(); n * k];
                    for i in 0..n {
                        for j in 0..m {
                            let gij = g[i * m + j];
                            if gij == F::zero() {
                                continue;
                            }
                            for p in 0..k {
                                da[i * k + p] = da[i * k + p] + gij * bv[p * m + j];
                            }
                        }
                    }
                    self.add_grad(a, &da);
                }
                if self.rg(b) {
                    // dB = Aᵀ · g
                    let av = self.value(a);
                    let mut db = vec![F::zero(); k * m];
                    for i in 0..n {
                        for p in 0..k {
                            let aip = av[i * k + p];
                            if aip == F::zero() {
                                continue;
                            }
                            for j in 0..m {
                                db[p * m + j] = db[p * m + j] + aip * g[i * m + j];
                            }
                        }
                    }
                    self.add_grad(b, &db);
                }
            }

            &Op::Add(a, b) => {
                if self.rg(a) {
                    self.add_grad(a, g);
                }
                if self.rg(b) {
                    self.add_grad(b, g);
                }
            }

            &Op::Sub(a, b) => {
                if self.rg(a) {
                    self.add_grad(a, g);
                }
                if self.rg(b) {
                    let neg: Vec<F> = g.iter().map(|&x| -x).collect();
                    self.add_grad(b, &neg);
                }
            }

            &Op::Mul(a, b) => {
                if self.rg(a) {
                    let da: Vec<F> = g.iter().zip(self.value(b)).map(|(&x, &y)| x * y).collect();
                    self.add_grad(a, &da);
                }
                if self.rg(b) {
                    let db: Vec<F> = g.iter().zip(self.value(a)).map(|(&x, &y)| x * y).collect();
                    self.add_grad(b, &db);
                }
            }

            &Op::AddRowVec(a, v) => {
                if self.rg(a) {
                    self.add_grad(a, g);
                }
                if self.rg(v) {
                    let mut dv = vec![F::zero(); cols];
                    for i in 0..rows {
                        for j in 0..cols {
                            dv[j] = dv[j] + g[i * cols + j];
                        }
                    }
                    self.add_grad(v, &dv);
                }
            }

            &Op::AddColVec(a, v) => {
                if self.rg(a) {
                    self.add_grad(a, g);
                }
                if self.rg(v) {
                    let mut dv = vec![F::zero(); rows];
                    for i in 0..rows {
                        for j in 0..cols {
                            dv[i] = dv[i] + g[i * cols + j];
                        }
                    }
                    self.add_grad(v, &dv);
                }
            }

            &Op::Scale(a, c) => {
                if self.rg(a) {
                    let da: Vec<F> = g.iter().map(|&x| x * c).collect();
                    self.add_grad(a, &da);
                }
            }

            &Op::Sigmoid(a) => {
                if self.rg(a) {
                    let out = self.value(id);
                    let da: Vec<F> = g
                        .iter()
                        .zip(out)
                        .map(|(&gx, &y)| gx * y * (F::one() - y))
                        .collect();
                    self.add_grad(a, &da);
                }
            }

            &Op::Tanh(a) => {
                if self.rg(a) {
                    let out = self.value(id);
                    let da: Vec<F> = g
                        .iter()
                        .zip(out)
                        .map(|(&gx, &y)| gx * (F::one() - y * y))
                        .collect();
                    self.add_grad(a, &da);
                }
            }

            &Op::RowSoftmax(a) => {
                if self.rg(a) {
                    let out = self.value(id);
                    let mut da = vec![F::zero(); rows * cols];
                    for i in 0..rows {
                        let y = &out[i * cols..(i + 1) * cols];
                        let gr = &g[i * cols..(i + 1) * cols];
                        let dot: F = y.iter().zip(gr).map(|(&yj, &gj)| yj * gj).sum();
                        for j in 0..cols {
                            da[i * cols + j] = y[j] * (gr[j] - dot);
                        }
                    }
                    self.add_grad(a, &da);
                }
            }

            &Op::RowLogSoftmax(a) => {
                if self.rg(a) {
                    let out = self.value(id);
                    let mut da = vec![F::zero(); rows * cols];
                    for i in 0..rows {
                        let y = &out[i * cols..(i + 1) * cols];
                        let gr = &g[i * cols..(i + 1) * cols];
                        let gsum: F = gr.iter().cloned().sum();
                        for j in 0..cols {
                            da[i * cols + j] = gr[j] - y[j].exp() * gsum;
                        }
                    }
                    self.add_grad(a, &da);
                }
            }

            &Op::ColLogSumExp(a) => {
                if self.rg(a) {
                    let (n, m) = self.shape(a);
                    let av = self.value(a);
                    let out = self.value(id);
                    let mut da = vec![F::zero(); n * m];
                    for j in 0..m {
                        for i in 0..n {
                            da[i * m + j] = (av[i * m + j] - out[j]).exp() * g[j];
                        }
                    }
                    self.add_grad(a, &da);
                }
            }

            Op::ConcatCols(parts) => {
                let parts = parts.clone();
                let mut offset = 0;
                for p in parts {
                    let (np, mp) = self.shape(p);
                    if self.rg(p) {
                        let mut dp = vec![F::zero(); np * mp];
                        for i in 0..np {
                            dp[i * mp..(i + 1) * mp]
                                .copy_from_slice(&g[i * cols + offset..i * cols + offset + mp]);
                        }
                        self.add_grad(p, &dp);
                    }
                    offset += mp;
                }
            }

            Op::ConcatRows(parts) => {
                let parts = parts.clone();
                let mut offset = 0;
                for p in parts {
                    let (np, mp) = self.shape(p);
                    if self.rg(p) {
                        self.add_grad(p, &g[offset * mp..(offset + np) * mp]);
                    }
                    offset += np;
                }
            }

            &Op::SliceRows(a, start) => {
                if self.rg(a) {
                    let (_, m) = self.shape(a);
                    let buf = self.grad_buf(a);
                    for (i, &gx) in g.iter().enumerate() {
                        let row = start + i / m;
                        let col = i % m;
                        buf[row * m + col] = buf[row * m + col] + gx;
                    }
                }
            }

            &Op::SliceCols(a, start) => {
                if self.rg(a) {
                    let (_, m) = self.shape(a);
                    let buf = self.grad_buf(a);
                    for i in 0..rows {
                        for j in 0..cols {
                            let idx = i * m + start + j;
                            buf[idx] = buf[idx] + g[i * cols + j];
                        }
                    }
                }
            }

            &Op::Transpose(a) => {
                if self.rg(a) {
                    let mut da = vec![F::zero(); rows * cols];
                    for i in 0..rows {
                        for j in 0..cols {
                            da[j * rows + i] = g[i * cols + j];
                        }
                    }
                    self.add_grad(a, &da);
                }
            }

            Op::MaxOverTime(a, arg) => {
                let a = *a;
                let arg = arg.clone();
                if self.rg(a) {
                    let (_, m) = self.shape(a);
                    let buf = self.grad_buf(a);
                    for (j, &i) in arg.iter().enumerate() {
                        buf[i * m + j] = buf[i * m + j] + g[j];
                    }
                }
            }

            &Op::Sum(a) => {
                if self.rg(a) {
                    let len = {
                        let (n, m) = self.shape(a);
                        n * m
                    };
                    self.add_grad(a, &vec![g[0]; len]);
                }
            }

            &Op::Mean(a) => {
                if self.rg(a) {
                    let len = {
                        let (n, m) = self.shape(a);
                        n * m
                    };
                    let gx = g[0] / F::from_f64(len as f64);
                    self.add_grad(a, &vec![gx; len]);
                }
            }

            Op::Gather(table, indices) => {
                let table = *table;
                let indices = indices.clone();
                if self.rg(table) {
                    let (_, d) = self.shape(table);
                    let buf = self.grad_buf(table);
                    for (r, &i) in indices.iter().enumerate() {
                        for j in 0..d {
                            buf[i * d + j] = buf[i * d + j] + g[r * d + j];
                        }
                    }
                }
            }

            Op::PickPerRow(a, picked) => {
                let a = *a;
                let picked = picked.clone();
                if self.rg(a) {
                    let (_, m) = self.shape(a);
                    let buf = self.grad_buf(a);
                    for (i, &c) in picked.iter().enumerate() {
                        buf[i * m + c] = buf[i * m + c] + g[i];
                    }
                }
            }
        }
    }
}
