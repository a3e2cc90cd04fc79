//! Reverse-mode differentiation over a per-sentence tape.
//!
//! Values are computed eagerly as nodes are pushed; `backward` walks the
//! tape in reverse and accumulates exact gradients into parameter buffers.

use super::tensor::{Gradients, ParamId, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    Constant,
    /// Copy of a vector parameter.
    ParamVec(ParamId),
    /// One row of an embedding table.
    GatherRow(ParamId, usize),
    /// `W x` with a matrix parameter.
    MatVec(ParamId, NodeId),
    Add(NodeId, NodeId),
    /// `x + b` with a vector parameter.
    AddBias(NodeId, ParamId),
    Mul(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Concat(Vec<NodeId>),
    Slice(NodeId, usize),
    /// Elementwise product with a fixed mask (dropout).
    MulConst(NodeId, Vec<f64>),
    /// Scalar `logsumexp(x + T[:, col])` over a matrix parameter column.
    LseAddCol(NodeId, ParamId, usize),
    /// Scalar `logsumexp(x)`.
    LogSumExp(NodeId),
    /// Scalar `x[i]`.
    Pick(NodeId, usize),
    /// Scalar `P[r, c]`.
    ParamAt(ParamId, usize, usize),
    /// Scalar sum of scalar nodes.
    SumScalars(Vec<NodeId>),
    /// Scalar `a - b`.
    Sub(NodeId, NodeId),
}

struct Node {
    op: Op,
    value: Vec<f64>,
}

pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].value.len(), 1);
        self.nodes[id.0].value[0]
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Vec<f64>) -> NodeId {
        self.push(Op::Constant, value)
    }

    pub fn param_vec(&mut self, p: ParamId) -> NodeId {
        let value = self.params.get(p).data.clone();
        self.push(Op::ParamVec(p), value)
    }

    pub fn gather_row(&mut self, table: ParamId, row: usize) -> NodeId {
        let value = self.params.get(table).row(row).to_vec();
        self.push(Op::GatherRow(table, row), value)
    }

    pub fn matvec(&mut self, w: ParamId, x: NodeId) -> NodeId {
        let m = self.params.get(w);
        let xv = &self.nodes[x.0].value;
        debug_assert_eq!(m.cols, xv.len());
        let value: Vec<f64> = (0..m.rows)
            .map(|r| {
                m.row(r)
                    .iter()
                    .zip(xv)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
            })
            .collect();
        self.push(Op::MatVec(w, x), value)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value: Vec<f64> = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x + y)
            .collect();
        self.push(Op::Add(a, b), value)
    }

    pub fn add_bias(&mut self, x: NodeId, b: ParamId) -> NodeId {
        let value: Vec<f64> = self.nodes[x.0]
            .value
            .iter()
            .zip(&self.params.get(b).data)
            .map(|(x, b)| x + b)
            .collect();
        self.push(Op::AddBias(x, b), value)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value: Vec<f64> = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .collect();
        self.push(Op::Mul(a, b), value)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let value: Vec<f64> = self.nodes[x.0]
            .value
            .iter()
            .map(|v| 1.0 / (1.0 + (-v).exp()))
            .collect();
        self.push(Op::Sigmoid(x), value)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let value: Vec<f64> = self.nodes[x.0].value.iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh(x), value)
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let value: Vec<f64> = parts
            .iter()
            .flat_map(|p| self.nodes[p.0].value.iter().copied())
            .collect();
        self.push(Op::Concat(parts.to_vec()), value)
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let value = self.nodes[x.0].value[start..start + len].to_vec();
        self.push(Op::Slice(x, start), value)
    }

    pub fn mul_const(&mut self, x: NodeId, mask: Vec<f64>) -> NodeId {
        let value: Vec<f64> = self.nodes[x.0]
            .value
            .iter()
            .zip(&mask)
            .map(|(x, m)| x * m)
            .collect();
        self.push(Op::MulConst(x, mask), value)
    }

    /// `logsumexp(x + T[:, col])`, the forward-recursion step of a
    /// linear-chain model in log space.
    pub fn lse_add_col(&mut self, x: NodeId, t: ParamId, col: usize) -> NodeId {
        let m = self.params.get(t);
        let shifted: Vec<f64> = self.nodes[x.0]
            .value
            .iter()
            .enumerate()
            .map(|(r, v)| v + m.at(r, col))
            .collect();
        let value = vec![log_sum_exp(&shifted)];
        self.push(Op::LseAddCol(x, t, col), value)
    }

    pub fn log_sum_exp(&mut self, x: NodeId) -> NodeId {
        let value = vec![log_sum_exp(&self.nodes[x.0].value)];
        self.push(Op::LogSumExp(x), value)
    }

    pub fn pick(&mut self, x: NodeId, idx: usize) -> NodeId {
        let value = vec![self.nodes[x.0].value[idx]];
        self.push(Op::Pick(x, idx), value)
    }

    pub fn param_at(&mut self, p: ParamId, r: usize, c: usize) -> NodeId {
        let value = vec![self.params.get(p).at(r, c)];
        self.push(Op::ParamAt(p, r, c), value)
    }

    pub fn sum_scalars(&mut self, parts: &[NodeId]) -> NodeId {
        let value = vec![parts.iter().map(|p| self.nodes[p.0].value[0]).sum()];
        self.push(Op::SumScalars(parts.to_vec()), value)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = vec![self.nodes[a.0].value[0] - self.nodes[b.0].value[0]];
        self.push(Op::Sub(a, b), value)
    }

    /// Accumulates d(loss)/d(parameter) into `grads` and returns the
    /// per-node gradients (indexable by `NodeId`).
    pub fn backward(&self, loss: NodeId, grads: &mut Gradients) -> NodeGrads {
        let mut node_grads: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|n| vec![0.0; n.value.len()])
            .collect();
        node_grads[loss.0][0] = 1.0;

        for idx in (0..self.nodes.len()).rev() {
            let node = &self.nodes[idx];
            // Skip nodes with no incoming gradient.
            if node_grads[idx].iter().all(|g| *g == 0.0) {
                continue;
            }
            let out_grad = std::mem::take(&mut node_grads[idx]);
            match &node.op {
                Op::Constant => {}
                Op::ParamVec(p) => {
                    for (g, og) in grads.get_mut(*p).iter_mut().zip(&out_grad) {
                        *g += og;
                    }
                }
                Op::GatherRow(p, row) => {
                    let cols = self.params.get(*p).cols;
                    let buf = grads.get_mut(*p);
                    for (c, og) in out_grad.iter().enumerate() {
                        buf[row * cols + c] += og;
                    }
                }
                Op::MatVec(w, x) => {
                    let m = self.params.get(*w);
                    let xv = &self.nodes[x.0].value;
                    {
                        let wbuf = grads.get_mut(*w);
                        for (r, og) in out_grad.iter().enumerate() {
                            if *og == 0.0 {
                                continue;
                            }
                            let row = &mut wbuf[r * m.cols..(r + 1) * m.cols];
                            for (wg, xval) in row.iter_mut().zip(xv) {
                                *wg += og * xval;
                            }
                        }
                    }
                    let xg = &mut node_grads[x.0];
                    for (r, og) in out_grad.iter().enumerate() {
                        if *og == 0.0 {
                            continue;
                        }
                        for (xgi, wval) in xg.iter_mut().zip(m.row(r)) {
                            *xgi += og * wval;
                        }
                    }
                }
                Op::Add(a, b) => {
                    for (g, og) in node_grads[a.0].iter_mut().zip(&out_grad) {
                        *g += og;
                    }
                    for (g, og) in node_grads[b.0].iter_mut().zip(&out_grad) {
                        *g += og;
                    }
                }
                Op::AddBias(x, b) => {
                    for (g, og) in node_grads[x.0].iter_mut().zip(&out_grad) {
                        *g += og;
                    }
                    for (g, og) in grads.get_mut(*b).iter_mut().zip(&out_grad) {
                        *g += og;
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    let updates_a: Vec<f64> =
                        out_grad.iter().zip(bv).map(|(og, b)| og * b).collect();
                    let updates_b: Vec<f64> =
                        out_grad.iter().zip(av).map(|(og, a)| og * a).collect();
                    for (g, u) in node_grads[a.0].iter_mut().zip(updates_a) {
                        *g += u;
                    }
                    for (g, u) in node_grads[b.0].iter_mut().zip(updates_b) {
                        *g += u;
                    }
                }
                Op::Sigmoid(x) => {
                    let updates: Vec<f64> = out_grad
                        .iter()
                        .zip(&node.value)
                        .map(|(og, y)| og * y * (1.0 - y))
                        .collect();
                    for (g, u) in node_grads[x.0].iter_mut().zip(updates) {
                        *g += u;
                    }
                }
                Op::Tanh(x) => {
                    let updates: Vec<f64> = out_grad
                        .iter()
                        .zip(&node.value)
                        .map(|(og, y)| og * (1.0 - y * y))
                        .collect();
                    for (g, u) in node_grads[x.0].iter_mut().zip(updates) {
                        *g += u;
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for part in parts {
                        let len = self.nodes[part.0].value.len();
                        for (g, og) in node_grads[part.0]
                            .iter_mut()
                            .zip(&out_grad[offset..offset + len])
                        {
                            *g += og;
                        }
                        offset += len;
                    }
                }
                Op::Slice(x, start) => {
                    for (i, og) in out_grad.iter().enumerate() {
                        node_grads[x.0][start + i] += og;
                    }
                }
                Op::MulConst(x, mask) => {
                    for ((g, og), m) in node_grads[x.0].iter_mut().zip(&out_grad).zip(mask) {
                        *g += og * m;
                    }
                }
                Op::LseAddCol(x, t, col) => {
                    let og = out_grad[0];
                    let m = self.params.get(*t);
                    let out = node.value[0];
                    let xv = &self.nodes[x.0].value;
                    let weights: Vec<f64> = xv
                        .iter()
                        .enumerate()
                        .map(|(r, v)| (v + m.at(r, *col) - out).exp())
                        .collect();
                    for (g, w) in node_grads[x.0].iter_mut().zip(&weights) {
                        *g += og * w;
                    }
                    let cols = m.cols;
                    let tbuf = grads.get_mut(*t);
                    for (r, w) in weights.iter().enumerate() {
                        tbuf[r * cols + col] += og * w;
                    }
                }
                Op::LogSumExp(x) => {
                    let og = out_grad[0];
                    let out = node.value[0];
                    let xv = &self.nodes[x.0].value;
                    let updates: Vec<f64> = xv.iter().map(|v| og * (v - out).exp()).collect();
                    for (g, u) in node_grads[x.0].iter_mut().zip(updates) {
                        *g += u;
                    }
                }
                Op::Pick(x, i) => {
                    node_grads[x.0][*i] += out_grad[0];
                }
                Op::ParamAt(p, r, c) => {
                    let cols = self.params.get(*p).cols;
                    grads.get_mut(*p)[r * cols + c] += out_grad[0];
                }
                Op::SumScalars(parts) => {
                    for part in parts {
                        node_grads[part.0][0] += out_grad[0];
                    }
                }
                Op::Sub(a, b) => {
                    node_grads[a.0][0] += out_grad[0];
                    node_grads[b.0][0] -= out_grad[0];
                }
            }
            node_grads[idx] = out_grad; // keep for callers inspecting node grads
        }
        NodeGrads(node_grads)
    }
}

/// Gradients of the loss with respect to every tape node.
pub struct NodeGrads(Vec<Vec<f64>>);

impl NodeGrads {
    pub fn get(&self, id: NodeId) -> &[f64] {
        &self.0[id.0]
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::tensor::Tensor;

    #[test]
    fn matvec_forward_and_backward() {
        let mut params = ParamSet::new();
        let w = params.register("w", Tensor::from_rows(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let mut tape = Tape::new(&params);
        let x = tape.constant(vec![5.0, 6.0]);
        let y = tape.matvec(w, x);
        assert_eq!(tape.value(y), &[17.0, 39.0]);

        let s0 = tape.pick(y, 0);
        let s1 = tape.pick(y, 1);
        let loss = tape.sum_scalars(&[s0, s1]);
        let mut grads = Gradients::zeros_like(&params);
        let node_grads = tape.backward(loss, &mut grads);
        // dy/dW = outer(1, x); dx = W^T 1
        assert_eq!(grads.get(w), &[5.0, 6.0, 5.0, 6.0]);
        assert_eq!(node_grads.get(x), &[4.0, 6.0]);
    }

    #[test]
    fn sigmoid_tanh_gradients() {
        let params = ParamSet::new();
        let mut tape = Tape::new(&params);
        let x = tape.constant(vec![0.3]);
        let s = tape.sigmoid(x);
        let t = tape.tanh(s);
        let loss = tape.pick(t, 0);
        let mut grads = Gradients::zeros_like(&params);
        let node_grads = tape.backward(loss, &mut grads);

        let sv = 1.0 / (1.0 + (-0.3f64).exp());
        let tv = sv.tanh();
        let expected = (1.0 - tv * tv) * sv * (1.0 - sv);
        assert!((node_grads.get(x)[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn unused_gather_row_has_zero_gradient() {
        let mut params = ParamSet::new();
        let table = params.register("t", Tensor::from_rows(3, 2, vec![1.0; 6]));
        let mut tape = Tape::new(&params);
        let row = tape.gather_row(table, 1);
        let loss = tape.pick(row, 0);
        let mut grads = Gradients::zeros_like(&params);
        tape.backward(loss, &mut grads);
        assert_eq!(grads.get(table), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lse_add_col_matches_manual() {
        let mut params = ParamSet::new();
        let t = params.register("t", Tensor::from_rows(2, 2, vec![0.1, 0.2, 0.3, 0.4]));
        let mut tape = Tape::new(&params);
        let x = tape.constant(vec![1.0, 2.0]);
        let y = tape.lse_add_col(x, t, 1);
        let expected = ((1.0f64 + 0.2).exp() + (2.0f64 + 0.4).exp()).ln();
        assert!((tape.scalar(y) - expected).abs() < 1e-12);
    }
}
