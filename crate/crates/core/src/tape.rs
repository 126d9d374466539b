//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Nodes are appended in forward order, so every node's inputs precede it
//! and a single reverse sweep from the loss visits each node exactly once in
//! reverse topological order. `backward` zeroes all accumulators before the
//! sweep, so running it twice on the same tape yields identical gradients.

use crate::tensor::{mm_nt, mm_tn, Tensor, TensorError};

/// Handle to a node on a [`Tape`]. Only meaningful for the tape that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul { a: NodeId, b: NodeId },
    AddBias { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Neg { a: NodeId },
    Scale { a: NodeId, c: f64 },
    Relu { a: NodeId },
    Sigmoid { a: NodeId },
    LogClamped { a: NodeId, floor: f64 },
    Mean { a: NodeId },
    Sum { a: NodeId },
}

struct Node {
    op: Op,
    value: Tensor,
    grad: Vec<f64>,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Registers an input (parameter or constant) on the tape.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].grad
    }

    pub fn grad_tensor(&self, id: NodeId) -> Tensor {
        let node = &self.nodes[id.0];
        Tensor::new(node.value.shape().to_vec(), node.grad.clone())
            .expect("accumulator shape tracks value shape")
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        let grad = vec![0.0; value.numel()];
        self.nodes.push(Node { op, value, grad });
        NodeId(self.nodes.len() - 1)
    }

    // ── Forward ops ─────────────────────────────────────────────────

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul { a, b }, value))
    }

    pub fn add_bias(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).add_bias(self.value(b))?;
        Ok(self.push(Op::AddBias { a, b }, value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add { a, b }, value))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::Sub { a, b }, value))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        let value = self.value(a).mul(self.value(b))?;
        Ok(self.push(Op::Mul { a, b }, value))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).neg();
        self.push(Op::Neg { a }, value)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.value(a).scale(c);
        self.push(Op::Scale { a, c }, value)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).relu();
        self.push(Op::Relu { a }, value)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).sigmoid();
        self.push(Op::Sigmoid { a }, value)
    }

    pub fn log_clamped(&mut self, a: NodeId, floor: f64) -> NodeId {
        let value = self.value(a).log_clamped(floor);
        self.push(Op::LogClamped { a, floor }, value)
    }

    /// `1 - a` elementwise, via a ones leaf.
    pub fn one_minus(&mut self, a: NodeId) -> NodeId {
        let ones = self.leaf(Tensor::filled(self.value(a).shape().to_vec(), 1.0));
        self.sub(ones, a).expect("same shape by construction")
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let value = Tensor::scalar(self.value(a).mean());
        self.push(Op::Mean { a }, value)
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let value = Tensor::scalar(self.value(a).sum());
        self.push(Op::Sum { a }, value)
    }

    // ── Backward ────────────────────────────────────────────────────

    /// Accumulates dLoss/dNode for every node reachable from `loss`.
    /// Unreachable nodes keep a zero gradient. All accumulators are reset
    /// first, so a second call reproduces identical results.
    pub fn backward(&mut self, loss: NodeId) -> Result<(), TensorError> {
        if !self.nodes[loss.0].value.is_scalar() {
            return Err(TensorError::NonScalarLoss {
                shape: self.nodes[loss.0].value.shape().to_vec(),
            });
        }
        for node in &mut self.nodes {
            node.grad.iter_mut().for_each(|g| *g = 0.0);
        }
        self.nodes[loss.0].grad[0] = 1.0;

        for i in (0..=loss.0).rev() {
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let (m, k) = self.nodes[a.0].value.dims2("matmul")?;
                    let n = self.nodes[b.0].value.shape()[1];
                    let mut da = vec![0.0; m * k];
                    let mut db = vec![0.0; k * n];
                    {
                        let g = &self.nodes[i].grad;
                        mm_nt(g, self.nodes[b.0].value.values(), &mut da, m, n, k);
                        mm_tn(self.nodes[a.0].value.values(), g, &mut db, k, m, n);
                    }
                    accumulate(&mut self.nodes[a.0].grad, &da);
                    accumulate(&mut self.nodes[b.0].grad, &db);
                }
                Op::AddBias { a, b } => {
                    let g = self.nodes[i].grad.clone();
                    accumulate(&mut self.nodes[a.0].grad, &g);
                    let (m, n) = self.nodes[a.0].value.dims2("add_bias")?;
                    for col in 0..n {
                        let mut s = 0.0;
                        for row in 0..m {
                            s += g[row * n + col];
                        }
                        self.nodes[b.0].grad[col] += s;
                    }
                }
                Op::Add { a, b } => {
                    let g = self.nodes[i].grad.clone();
                    accumulate(&mut self.nodes[a.0].grad, &g);
                    accumulate(&mut self.nodes[b.0].grad, &g);
                }
                Op::Sub { a, b } => {
                    let g = self.nodes[i].grad.clone();
                    accumulate(&mut self.nodes[a.0].grad, &g);
                    for (acc, gv) in self.nodes[b.0].grad.iter_mut().zip(&g) {
                        *acc -= gv;
                    }
                }
                Op::Mul { a, b } => {
                    let g = self.nodes[i].grad.clone();
                    let av = self.nodes[a.0].value.values().to_vec();
                    let bv = self.nodes[b.0].value.values().to_vec();
                    for ((acc, gv), bvv) in self.nodes[a.0].grad.iter_mut().zip(&g).zip(&bv) {
                        *acc += gv * bvv;
                    }
                    for ((acc, gv), avv) in self.nodes[b.0].grad.iter_mut().zip(&g).zip(&av) {
                        *acc += gv * avv;
                    }
                }
                Op::Neg { a } => {
                    let g = self.nodes[i].grad.clone();
                    for (acc, gv) in self.nodes[a.0].grad.iter_mut().zip(&g) {
                        *acc -= gv;
                    }
                }
                Op::Scale { a, c } => {
                    let g = self.nodes[i].grad.clone();
                    for (acc, gv) in self.nodes[a.0].grad.iter_mut().zip(&g) {
                        *acc += c * gv;
                    }
                }
                Op::Relu { a } => {
                    // Subgradient 0 at the kink: pass only where input > 0.
                    let g = self.nodes[i].grad.clone();
                    let x = self.nodes[a.0].value.values().to_vec();
                    for ((acc, gv), xv) in self.nodes[a.0].grad.iter_mut().zip(&g).zip(&x) {
                        if *xv > 0.0 {
                            *acc += gv;
                        }
                    }
                }
                Op::Sigmoid { a } => {
                    let g = self.nodes[i].grad.clone();
                    let s = self.nodes[i].value.values().to_vec();
                    for ((acc, gv), sv) in self.nodes[a.0].grad.iter_mut().zip(&g).zip(&s) {
                        *acc += gv * sv * (1.0 - sv);
                    }
                }
                Op::LogClamped { a, floor } => {
                    // Constant below the floor, so zero gradient there.
                    let g = self.nodes[i].grad.clone();
                    let x = self.nodes[a.0].value.values().to_vec();
                    for ((acc, gv), xv) in self.nodes[a.0].grad.iter_mut().zip(&g).zip(&x) {
                        if *xv >= floor {
                            *acc += gv / xv;
                        }
                    }
                }
                Op::Mean { a } => {
                    let g = self.nodes[i].grad[0];
                    let n = self.nodes[a.0].grad.len() as f64;
                    for acc in self.nodes[a.0].grad.iter_mut() {
                        *acc += g / n;
                    }
                }
                Op::Sum { a } => {
                    let g = self.nodes[i].grad[0];
                    for acc in self.nodes[a.0].grad.iter_mut() {
                        *acc += g;
                    }
                }
            }
        }
        Ok(())
    }
}

fn accumulate(acc: &mut [f64], g: &[f64]) {
    for (a, b) in acc.iter_mut().zip(g) {
        *a += b;
    }
}
