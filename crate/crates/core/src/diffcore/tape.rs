//! Reverse-mode tape.
//!
//! Every node owns a contiguous slice of one value arena. Nodes are either
//! scalars (length 1) or short vectors; elementwise binary operations
//! broadcast a length-1 operand. Parameters enter the tape as leaves bound
//! to a [`ParameterStore`] entry so gradients can be routed back to it.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::params::ParameterStore;
use super::DiffError;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unary {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Abs,
    Relu,
    Sigmoid,
    LogSigmoid,
    Square,
    AddConst(f64),
    MulConst(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Binary {
    Add,
    Sub,
    Mul,
    Div,
    Max,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Unary(Unary, NodeId),
    Binary(Binary, NodeId, NodeId),
    /// `w` is row-major `len(b) x len(x)`.
    Affine {
        w: NodeId,
        b: NodeId,
        x: NodeId,
    },
    Sum(NodeId),
    MaxReduce(NodeId),
    Index(NodeId, usize),
    Concat(Vec<NodeId>),
    AddN(Vec<NodeId>),
    WeightedSum {
        weights: NodeId,
        items: Vec<NodeId>,
    },
    LogSoftmax(NodeId),
    /// Transposed planar rotation in the `(i, j)` plane by `angles[slot]`.
    PlaneRotateT {
        v: NodeId,
        angles: NodeId,
        slot: usize,
        i: usize,
        j: usize,
    },
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    start: usize,
    len: usize,
}

#[derive(Debug, Default)]
struct Inner {
    nodes: Vec<Node>,
    values: Vec<f64>,
    bindings: Vec<(NodeId, String)>,
}

impl Inner {
    fn slice(&self, id: NodeId) -> &[f64] {
        let n = &self.nodes[id];
        &self.values[n.start..n.start + n.len]
    }

    fn len_of(&self, id: NodeId) -> usize {
        self.nodes[id].len
    }

    fn push(&mut self, op: Op, values: &[f64]) -> NodeId {
        let start = self.values.len();
        self.values.extend_from_slice(values);
        self.nodes.push(Node {
            op,
            start,
            len: values.len(),
        });
        self.nodes.len() - 1
    }

    /// Pushes a node whose values are produced in place by `fill`.
    fn push_with(&mut self, op: Op, len: usize, fill: impl FnOnce(&mut Self, usize)) -> NodeId {
        let start = self.values.len();
        self.values.resize(start + len, 0.0);
        fill(self, start);
        self.nodes.push(Node { op, start, len });
        self.nodes.len() - 1
    }
}

/// Recorded computation. Build values through [`Var`] handles, then call
/// [`Tape::backward`] once on a scalar.
#[derive(Debug, Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: NodeId,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Var")
            .field("id", &self.id)
            .field("value", &self.value())
            .finish()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn log_sigmoid(x: f64) -> f64 {
    // ln σ(x) = -softplus(-x)
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

impl Unary {
    fn apply(self, x: f64) -> f64 {
        match self {
            Unary::Neg => -x,
            Unary::Exp => x.exp(),
            Unary::Ln => x.ln(),
            Unary::Sqrt => x.sqrt(),
            Unary::Sin => x.sin(),
            Unary::Cos => x.cos(),
            Unary::Abs => x.abs(),
            Unary::Relu => x.max(0.0),
            Unary::Sigmoid => sigmoid(x),
            Unary::LogSigmoid => log_sigmoid(x),
            Unary::Square => x * x,
            Unary::AddConst(c) => x + c,
            Unary::MulConst(c) => x * c,
        }
    }

    /// d out / d in, given input `x` and output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Unary::Neg => -1.0,
            Unary::Exp => y,
            Unary::Ln => 1.0 / x,
            Unary::Sqrt => 0.5 / y,
            Unary::Sin => x.cos(),
            Unary::Cos => -x.sin(),
            Unary::Abs => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Unary::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Unary::Sigmoid => y * (1.0 - y),
            Unary::LogSigmoid => 1.0 - sigmoid(x),
            Unary::Square => 2.0 * x,
            Unary::AddConst(_) => 1.0,
            Unary::MulConst(c) => c,
        }
    }
}

impl Binary {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Binary::Add => a + b,
            Binary::Sub => a - b,
            Binary::Mul => a * b,
            Binary::Div => a / b,
            Binary::Max => {
                if a >= b {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// (d out / d a, d out / d b)
    fn partials(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Binary::Add => (1.0, 1.0),
            Binary::Sub => (1.0, -1.0),
            Binary::Mul => (b, a),
            Binary::Div => (1.0 / b, -a / (b * b)),
            Binary::Max => {
                if a >= b {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn var(&self, id: NodeId) -> Var<'_> {
        Var { tape: self, id }
    }

    pub fn constant(&self, values: &[f64]) -> Var<'_> {
        let id = self.inner.borrow_mut().push(Op::Leaf, values);
        self.var(id)
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.constant(&[value])
    }

    /// Binds the named parameter as a leaf. Its gradient is routed back to
    /// the store by [`Gradients::accumulate_into`].
    pub fn param(&self, store: &ParameterStore, name: &str) -> Result<Var<'_>, DiffError> {
        let values = store
            .values(name)
            .ok_or_else(|| DiffError::UnknownParameter(name.to_string()))?;
        let mut inner = self.inner.borrow_mut();
        let id = inner.push(Op::Leaf, values);
        inner.bindings.push((id, name.to_string()));
        Ok(self.var(id))
    }

    /// Concatenates the given nodes into one vector.
    pub fn concat(&self, parts: &[Var<'_>]) -> Var<'_> {
        let ids: Vec<NodeId> = parts.iter().map(|v| v.id).collect();
        let mut inner = self.inner.borrow_mut();
        let total: usize = ids.iter().map(|&i| inner.len_of(i)).sum();
        let id = inner.push_with(Op::Concat(ids.clone()), total, |inner, start| {
            let mut at = start;
            for &i in &ids {
                let n = &inner.nodes[i];
                let (s, l) = (n.start, n.len);
                inner.values.copy_within(s..s + l, at);
                at += l;
            }
        });
        self.var(id)
    }

    /// Elementwise sum of equally sized nodes.
    pub fn add_n(&self, parts: &[Var<'_>]) -> Result<Var<'_>, DiffError> {
        let first = parts.first().ok_or(DiffError::Shape("add_n of nothing".into()))?;
        let len = first.len();
        if parts.iter().any(|p| p.len() != len) {
            return Err(DiffError::Shape("add_n length mismatch".into()));
        }
        let ids: Vec<NodeId> = parts.iter().map(|v| v.id).collect();
        let mut inner = self.inner.borrow_mut();
        let id = inner.push_with(Op::AddN(ids.clone()), len, |inner, start| {
            for &i in &ids {
                let s = inner.nodes[i].start;
                for k in 0..len {
                    inner.values[start + k] += inner.values[s + k];
                }
            }
        });
        Ok(self.var(id))
    }

    /// `Σ_g weights[g] · items[g]`.
    pub fn weighted_sum<'a>(&'a self, weights: Var<'a>, items: &[Var<'a>]) -> Result<Var<'a>, DiffError> {
        if weights.len() != items.len() || items.is_empty() {
            return Err(DiffError::Shape(format!(
                "weighted_sum: {} weights for {} items",
                weights.len(),
                items.len()
            )));
        }
        let len = items[0].len();
        if items.iter().any(|p| p.len() != len) {
            return Err(DiffError::Shape("weighted_sum item length mismatch".into()));
        }
        let ids: Vec<NodeId> = items.iter().map(|v| v.id).collect();
        let wid = weights.id;
        let mut inner = self.inner.borrow_mut();
        let op = Op::WeightedSum {
            weights: wid,
            items: ids.clone(),
        };
        let id = inner.push_with(op, len, |inner, start| {
            let ws = inner.nodes[wid].start;
            for (g, &i) in ids.iter().enumerate() {
                let w = inner.values[ws + g];
                let s = inner.nodes[i].start;
                for k in 0..len {
                    inner.values[start + k] += w * inner.values[s + k];
                }
            }
        });
        Ok(self.var(id))
    }

    /// `w · x + b` with `w` row-major `len(b) × len(x)`.
    pub fn affine<'a>(&'a self, w: Var<'a>, b: Var<'a>, x: Var<'a>) -> Result<Var<'a>, DiffError> {
        let (rows, cols) = (b.len(), x.len());
        if w.len() != rows * cols {
            return Err(DiffError::Shape(format!(
                "affine: weight has {} entries, expected {}x{}",
                w.len(),
                rows,
                cols
            )));
        }
        let (wid, bid, xid) = (w.id, b.id, x.id);
        let mut inner = self.inner.borrow_mut();
        let op = Op::Affine {
            w: wid,
            b: bid,
            x: xid,
        };
        let id = inner.push_with(op, rows, |inner, start| {
            let (ws, bs, xs) = (
                inner.nodes[wid].start,
                inner.nodes[bid].start,
                inner.nodes[xid].start,
            );
            let vals = &mut inner.values;
            for r in 0..rows {
                let row = ws + r * cols;
                let mut acc = vals[bs + r];
                for c in 0..cols {
                    acc += vals[row + c] * vals[xs + c];
                }
                vals[start + r] = acc;
            }
        });
        Ok(self.var(id))
    }

    /// Applies the transposed planar rotation `R_ij(angles[slot])ᵀ` to `v`.
    pub fn plane_rotate_t<'a>(
        &'a self,
        v: Var<'a>,
        angles: Var<'a>,
        slot: usize,
        i: usize,
        j: usize,
    ) -> Result<Var<'a>, DiffError> {
        let m = v.len();
        if i >= m || j >= m || i == j || slot >= angles.len() {
            return Err(DiffError::Shape(format!(
                "plane rotation ({i},{j}) slot {slot} invalid for dimension {m}"
            )));
        }
        let (vid, aid) = (v.id, angles.id);
        let mut inner = self.inner.borrow_mut();
        let op = Op::PlaneRotateT {
            v: vid,
            angles: aid,
            slot,
            i,
            j,
        };
        let id = inner.push_with(op, m, |inner, start| {
            let vs = inner.nodes[vid].start;
            let theta = inner.values[inner.nodes[aid].start + slot];
            let (s, c) = theta.sin_cos();
            inner.values.copy_within(vs..vs + m, start);
            let (vi, vj) = (inner.values[vs + i], inner.values[vs + j]);
            inner.values[start + i] = c * vi - s * vj;
            inner.values[start + j] = s * vi + c * vj;
        });
        Ok(self.var(id))
    }

    fn unary<'a>(&'a self, op: Unary, a: Var<'a>) -> Var<'a> {
        let aid = a.id;
        let mut inner = self.inner.borrow_mut();
        let len = inner.len_of(aid);
        let id = inner.push_with(Op::Unary(op, aid), len, |inner, start| {
            let s = inner.nodes[aid].start;
            for k in 0..len {
                inner.values[start + k] = op.apply(inner.values[s + k]);
            }
        });
        self.var(id)
    }

    fn binary<'a>(&'a self, op: Binary, a: Var<'a>, b: Var<'a>) -> Var<'a> {
        let (aid, bid) = (a.id, b.id);
        let mut inner = self.inner.borrow_mut();
        let (la, lb) = (inner.len_of(aid), inner.len_of(bid));
        assert!(
            la == lb || la == 1 || lb == 1,
            "elementwise operands of length {la} and {lb}"
        );
        let len = la.max(lb);
        let id = inner.push_with(Op::Binary(op, aid, bid), len, |inner, start| {
            let (sa, sb) = (inner.nodes[aid].start, inner.nodes[bid].start);
            for k in 0..len {
                let x = inner.values[sa + if la == 1 { 0 } else { k }];
                let y = inner.values[sb + if lb == 1 { 0 } else { k }];
                inner.values[start + k] = op.apply(x, y);
            }
        });
        self.var(id)
    }

    fn reduce<'a>(&'a self, op: Op, a: Var<'a>) -> Var<'a> {
        let mut inner = self.inner.borrow_mut();
        let v = inner.slice(a.id);
        let out = match op {
            Op::Sum(_) => v.iter().sum(),
            Op::MaxReduce(_) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Op::Index(_, i) => v[i],
            _ => unreachable!("not a reduction"),
        };
        let id = inner.push(op, &[out]);
        self.var(id)
    }

    fn log_softmax<'a>(&'a self, a: Var<'a>) -> Var<'a> {
        let aid = a.id;
        let mut inner = self.inner.borrow_mut();
        let len = inner.len_of(aid);
        let id = inner.push_with(Op::LogSoftmax(aid), len, |inner, start| {
            let s = inner.nodes[aid].start;
            let xs = &inner.values[s..s + len];
            let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln();
            for k in 0..len {
                inner.values[start + k] = inner.values[s + k] - lse;
            }
        });
        self.var(id)
    }

    /// Reverse sweep from the scalar `loss`.
    pub fn backward(&self, loss: Var<'_>) -> Result<Gradients, DiffError> {
        if !std::ptr::eq(loss.tape, self) {
            return Err(DiffError::InvalidState(
                "loss was recorded on a different tape".into(),
            ));
        }
        let inner = self.inner.borrow();
        if inner.nodes.is_empty() || loss.id >= inner.nodes.len() {
            return Err(DiffError::InvalidState(
                "backward called before any forward computation".into(),
            ));
        }
        if inner.len_of(loss.id) != 1 {
            return Err(DiffError::Shape(format!(
                "backward seed must be a scalar, got length {}",
                inner.len_of(loss.id)
            )));
        }
        let vals = &inner.values;
        let mut grads = vec![0.0; vals.len()];
        grads[inner.nodes[loss.id].start] = 1.0;

        for id in (0..=loss.id).rev() {
            let node = &inner.nodes[id];
            let (os, ol) = (node.start, node.len);
            if grads[os..os + ol].iter().all(|&g| g == 0.0) {
                continue;
            }
            match &node.op {
                Op::Leaf => {}
                Op::Unary(u, a) => {
                    let s = inner.nodes[*a].start;
                    for k in 0..ol {
                        let g = grads[os + k];
                        grads[s + k] += g * u.derivative(vals[s + k], vals[os + k]);
                    }
                }
                Op::Binary(b, x, y) => {
                    let (nx, ny) = (&inner.nodes[*x], &inner.nodes[*y]);
                    let (sx, sy, lx, ly) = (nx.start, ny.start, nx.len, ny.len);
                    for k in 0..ol {
                        let ix = sx + if lx == 1 { 0 } else { k };
                        let iy = sy + if ly == 1 { 0 } else { k };
                        let (da, db) = b.partials(vals[ix], vals[iy]);
                        let g = grads[os + k];
                        grads[ix] += g * da;
                        grads[iy] += g * db;
                    }
                }
                Op::Affine { w, b, x } => {
                    let (ws, bs) = (inner.nodes[*w].start, inner.nodes[*b].start);
                    let (xs, cols) = (inner.nodes[*x].start, inner.nodes[*x].len);
                    for r in 0..ol {
                        let g = grads[os + r];
                        if g == 0.0 {
                            continue;
                        }
                        grads[bs + r] += g;
                        let row = ws + r * cols;
                        for c in 0..cols {
                            grads[row + c] += g * vals[xs + c];
                            grads[xs + c] += g * vals[row + c];
                        }
                    }
                }
                Op::Sum(a) => {
                    let g = grads[os];
                    let n = &inner.nodes[*a];
                    for k in 0..n.len {
                        grads[n.start + k] += g;
                    }
                }
                Op::MaxReduce(a) => {
                    let n = &inner.nodes[*a];
                    let xs = &vals[n.start..n.start + n.len];
                    let arg = xs
                        .iter()
                        .enumerate()
                        .fold(0, |best, (k, &x)| if x > xs[best] { k } else { best });
                    grads[n.start + arg] += grads[os];
                }
                Op::Index(a, i) => {
                    grads[inner.nodes[*a].start + i] += grads[os];
                }
                Op::Concat(parts) => {
                    let mut at = os;
                    for &p in parts {
                        let n = &inner.nodes[p];
                        for k in 0..n.len {
                            grads[n.start + k] += grads[at + k];
                        }
                        at += n.len;
                    }
                }
                Op::AddN(parts) => {
                    for &p in parts {
                        let s = inner.nodes[p].start;
                        for k in 0..ol {
                            grads[s + k] += grads[os + k];
                        }
                    }
                }
                Op::WeightedSum { weights, items } => {
                    let ws = inner.nodes[*weights].start;
                    for (g, &it) in items.iter().enumerate() {
                        let s = inner.nodes[it].start;
                        let w = vals[ws + g];
                        let mut dw = 0.0;
                        for k in 0..ol {
                            let go = grads[os + k];
                            grads[s + k] += go * w;
                            dw += go * vals[s + k];
                        }
                        grads[ws + g] += dw;
                    }
                }
                Op::LogSoftmax(a) => {
                    // d/dx_j = g_j - softmax_j Σ g
                    let s = inner.nodes[*a].start;
                    let gsum: f64 = grads[os..os + ol].iter().sum();
                    for k in 0..ol {
                        let p = vals[os + k].exp();
                        grads[s + k] += grads[os + k] - p * gsum;
                    }
                }
                Op::PlaneRotateT {
                    v,
                    angles,
                    slot,
                    i,
                    j,
                } => {
                    let vs = inner.nodes[*v].start;
                    let ai = inner.nodes[*angles].start + slot;
                    let (s, c) = vals[ai].sin_cos();
                    let (vi, vj) = (vals[vs + i], vals[vs + j]);
                    let (gi, gj) = (grads[os + i], grads[os + j]);
                    for k in 0..ol {
                        if k != *i && k != *j {
                            grads[vs + k] += grads[os + k];
                        }
                    }
                    grads[vs + i] += c * gi + s * gj;
                    grads[vs + j] += -s * gi + c * gj;
                    grads[ai] += gi * (-s * vi - c * vj) + gj * (c * vi - s * vj);
                }
            }
        }

        Ok(Gradients {
            grads,
            spans: inner.nodes.iter().map(|n| (n.start, n.len)).collect(),
            bindings: inner.bindings.clone(),
        })
    }
}

/// Result of a backward sweep.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<f64>,
    spans: Vec<(usize, usize)>,
    bindings: Vec<(NodeId, String)>,
}

impl Gradients {
    pub fn wrt(&self, var: Var<'_>) -> &[f64] {
        let (s, l) = self.spans[var.id];
        &self.grads[s..s + l]
    }

    /// Adds the gradient of every bound parameter leaf into `store`.
    /// A parameter bound several times receives the sum.
    pub fn accumulate_into(&self, store: &mut ParameterStore) -> Result<(), DiffError> {
        for (id, name) in &self.bindings {
            let (s, l) = self.spans[*id];
            let slot = store
                .grad_mut(name)
                .ok_or_else(|| DiffError::UnknownParameter(name.clone()))?;
            for (dst, g) in slot.iter_mut().zip(&self.grads[s..s + l]) {
                *dst += g;
            }
        }
        Ok(())
    }
}

impl<'t> Var<'t> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn len(&self) -> usize {
        self.tape.inner.borrow().len_of(self.id)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self) -> Vec<f64> {
        self.tape.inner.borrow().slice(self.id).to_vec()
    }

    /// First (or only) entry.
    pub fn scalar(&self) -> f64 {
        self.tape.inner.borrow().slice(self.id)[0]
    }

    pub fn exp(self) -> Self {
        self.tape.unary(Unary::Exp, self)
    }
    pub fn ln(self) -> Self {
        self.tape.unary(Unary::Ln, self)
    }
    pub fn sqrt(self) -> Self {
        self.tape.unary(Unary::Sqrt, self)
    }
    pub fn sin(self) -> Self {
        self.tape.unary(Unary::Sin, self)
    }
    pub fn cos(self) -> Self {
        self.tape.unary(Unary::Cos, self)
    }
    pub fn abs(self) -> Self {
        self.tape.unary(Unary::Abs, self)
    }
    pub fn relu(self) -> Self {
        self.tape.unary(Unary::Relu, self)
    }
    pub fn sigmoid(self) -> Self {
        self.tape.unary(Unary::Sigmoid, self)
    }
    pub fn log_sigmoid(self) -> Self {
        self.tape.unary(Unary::LogSigmoid, self)
    }
    pub fn square(self) -> Self {
        self.tape.unary(Unary::Square, self)
    }
    pub fn add_const(self, c: f64) -> Self {
        self.tape.unary(Unary::AddConst(c), self)
    }
    pub fn mul_const(self, c: f64) -> Self {
        self.tape.unary(Unary::MulConst(c), self)
    }
    /// Elementwise maximum (ties pick `self`).
    pub fn max(self, other: Self) -> Self {
        self.tape.binary(Binary::Max, self, other)
    }
    pub fn sum(self) -> Self {
        self.tape.reduce(Op::Sum(self.id), self)
    }
    /// Largest entry; the gradient flows to the first maximiser.
    pub fn max_entry(self) -> Self {
        self.tape.reduce(Op::MaxReduce(self.id), self)
    }
    pub fn index(self, i: usize) -> Self {
        assert!(i < self.len(), "index {i} out of range");
        self.tape.reduce(Op::Index(self.id, i), self)
    }
    pub fn log_softmax(self) -> Self {
        self.tape.log_softmax(self)
    }
    pub fn dot(self, other: Self) -> Self {
        (self * other).sum()
    }
    /// Splits into one scalar node per entry.
    pub fn components(self) -> Vec<Self> {
        (0..self.len()).map(|i| self.index(i)).collect()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<'t> $trait for Var<'t> {
            type Output = Var<'t>;
            fn $method(self, rhs: Var<'t>) -> Var<'t> {
                self.tape.binary($op, self, rhs)
            }
        }
    };
}

binop!(Add, add, Binary::Add);
binop!(Sub, sub, Binary::Sub);
binop!(Mul, mul, Binary::Mul);
binop!(Div, div, Binary::Div);

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.add_const(rhs)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.add_const(-rhs)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.mul_const(rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        self.mul_const(1.0 / rhs)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.tape.unary(Unary::Neg, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gradient() {
        let tape = Tape::new();
        let p = tape.scalar(3.0);
        let loss = p.square();
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.wrt(p), &[6.0]);
    }

    #[test]
    fn logistic_gradient_at_zero() {
        let tape = Tape::new();
        let p = tape.scalar(0.0);
        let g = tape.backward(p.sigmoid()).unwrap();
        assert_eq!(g.wrt(p), &[0.25]);
    }

    #[test]
    fn backward_on_empty_tape_is_invalid_state() {
        let other = Tape::new();
        let stray = other.scalar(1.0);
        let tape = Tape::new();
        assert!(matches!(tape.backward(stray), Err(DiffError::InvalidState(_))));
    }

    #[test]
    fn backward_needs_scalar_seed() {
        let tape = Tape::new();
        let v = tape.constant(&[1.0, 2.0]);
        assert!(matches!(tape.backward(v), Err(DiffError::Shape(_))));
    }

    #[test]
    fn broadcast_scalar_times_vector() {
        let tape = Tape::new();
        let s = tape.scalar(2.0);
        let v = tape.constant(&[1.0, -3.0]);
        let out = (v * s).sum();
        assert_eq!(out.scalar(), -4.0);
        let g = tape.backward(out).unwrap();
        assert_eq!(g.wrt(s), &[-2.0]);
        assert_eq!(g.wrt(v), &[2.0, 2.0]);
    }

    #[test]
    fn log_softmax_matches_direct() {
        let tape = Tape::new();
        let x = tape.constant(&[0.5, -1.0, 2.0]);
        let out = x.log_softmax().value();
        let z: f64 = [0.5f64, -1.0, 2.0].iter().map(|v| v.exp()).sum();
        for (o, v) in out.iter().zip([0.5f64, -1.0, 2.0]) {
            assert!((o - (v - z.ln())).abs() < 1e-15);
        }
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
        assert!((log_sigmoid(0.3) - sigmoid(0.3).ln()).abs() < 1e-15);
    }
}
