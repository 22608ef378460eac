//! Eager reverse-mode autodiff over [`Mat`] values.
//!
//! Every operation computes its result immediately and records what it needs
//! for the backward pass, so callers can read intermediate values while still
//! building the graph (the soft-label computation depends on predictor
//! outputs mid-forward). `backward` walks the nodes in reverse and
//! accumulates exact analytic gradients for every leaf marked as a parameter.

use super::mat::Mat;

pub const LN_EPS: f64 = 1e-5;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    Embed { table: Var, ids: Vec<usize> },
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow { a: Var, row: Var },
    Hadamard(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Gelu(Var),
    SoftmaxRows(Var),
    LayerNorm { x: Var, gain: Var, bias: Var },
    Transpose(Var),
    ConcatRows(Var, Var),
    ConcatCols(Var, Var),
    GatherRows { x: Var, rows: Vec<usize> },
    Detach,
    BceMean { p: Var, targets: Vec<f64> },
}

struct Node {
    val: Mat,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Mat>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_prime(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
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

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].val
    }

    /// Gradient of the last `backward` target with respect to `v`. `None`
    /// when no gradient reached the node.
    pub fn grad(&self, v: Var) -> Option<&Mat> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    fn push(&mut self, val: Mat, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            val,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, val: Mat) -> Var {
        self.push(val, Op::Leaf, true)
    }

    /// Non-trainable leaf (inputs, masks, pooling matrices).
    pub fn constant(&mut self, val: Mat) -> Var {
        self.push(val, Op::Leaf, false)
    }

    /// Rows of `table` selected by token ids.
    pub fn embed(&mut self, table: Var, ids: &[usize]) -> Var {
        let t = self.value(table);
        let cols = t.cols;
        let mut out = Mat::zeros(ids.len(), cols);
        for (r, &id) in ids.iter().enumerate() {
            out.row_mut(r).copy_from_slice(t.row(id));
        }
        let needs = self.needs(table);
        self.push(
            out,
            Op::Embed {
                table,
                ids: ids.to_vec(),
            },
            needs,
        )
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        let needs = self.needs(a) || self.needs(b);
        self.push(out, Op::MatMul(a, b), needs)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        let needs = self.needs(a) || self.needs(b);
        self.push(out, Op::Add(a, b), needs)
    }

    /// Adds a `1 x c` row to every row of an `n x c` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (av, rv) = (self.value(a), self.value(row));
        assert_eq!(rv.rows, 1, "broadcast row must be 1 x c");
        assert_eq!(av.cols, rv.cols, "broadcast width mismatch");
        let mut out = av.clone();
        for r in 0..out.rows {
            for c in 0..out.cols {
                *out.at_mut(r, c) += rv.at(0, c);
            }
        }
        let needs = self.needs(a) || self.needs(row);
        self.push(out, Op::AddRow { a, row }, needs)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.shape(), bv.shape(), "hadamard shape mismatch");
        let data = av.data.iter().zip(&bv.data).map(|(x, y)| x * y).collect();
        let out = Mat::from_vec(av.rows, av.cols, data);
        let needs = self.needs(a) || self.needs(b);
        self.push(out, Op::Hadamard(a, b), needs)
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let out = self.value(a).map(|v| v * factor);
        let needs = self.needs(a);
        self.push(out, Op::Scale(a, factor), needs)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        let needs = self.needs(a);
        self.push(out, Op::Sigmoid(a), needs)
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(gelu);
        let needs = self.needs(a);
        self.push(out, Op::Gelu(a), needs)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mut out = av.clone();
        for r in 0..out.rows {
            let row = out.row_mut(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        let needs = self.needs(a);
        self.push(out, Op::SoftmaxRows(a), needs)
    }

    /// Per-row normalization with learned gain and bias (both `1 x d`).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Var {
        let (xv, gv, bv) = (self.value(x), self.value(gain), self.value(bias));
        assert_eq!(gv.shape(), (1, xv.cols));
        assert_eq!(bv.shape(), (1, xv.cols));
        let d = xv.cols as f64;
        let mut out = Mat::zeros(xv.rows, xv.cols);
        for r in 0..xv.rows {
            let row = xv.row(r);
            let mean = row.iter().sum::<f64>() / d;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for (c, &value) in row.iter().enumerate() {
                *out.at_mut(r, c) = (value - mean) * inv * gv.at(0, c) + bv.at(0, c);
            }
        }
        let needs = self.needs(x) || self.needs(gain) || self.needs(bias);
        self.push(out, Op::LayerNorm { x, gain, bias }, needs)
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        let needs = self.needs(a);
        self.push(out, Op::Transpose(a), needs)
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.cols, bv.cols, "concat_rows width mismatch");
        let mut data = av.data.clone();
        data.extend_from_slice(&bv.data);
        let out = Mat::from_vec(av.rows + bv.rows, av.cols, data);
        let needs = self.needs(a) || self.needs(b);
        self.push(out, Op::ConcatRows(a, b), needs)
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.rows, bv.rows, "concat_cols height mismatch");
        let mut out = Mat::zeros(av.rows, av.cols + bv.cols);
        for r in 0..av.rows {
            out.row_mut(r)[..av.cols].copy_from_slice(av.row(r));
            out.row_mut(r)[av.cols..].copy_from_slice(bv.row(r));
        }
        let needs = self.needs(a) || self.needs(b);
        self.push(out, Op::ConcatCols(a, b), needs)
    }

    pub fn gather_rows(&mut self, x: Var, rows: &[usize]) -> Var {
        let xv = self.value(x);
        let mut out = Mat::zeros(rows.len(), xv.cols);
        for (r, &src) in rows.iter().enumerate() {
            out.row_mut(r).copy_from_slice(xv.row(src));
        }
        let needs = self.needs(x);
        self.push(
            out,
            Op::GatherRows {
                x,
                rows: rows.to_vec(),
            },
            needs,
        )
    }

    /// Copies the value and stops gradients.
    pub fn detach(&mut self, a: Var) -> Var {
        let out = self.value(a).clone();
        self.push(out, Op::Detach, false)
    }

    /// Mean binary cross-entropy of column-vector probabilities against
    /// (possibly soft) targets. Zero-coefficient log terms are skipped, so
    /// exact-zero probabilities with exact-zero targets contribute nothing.
    pub fn bce_mean(&mut self, p: Var, targets: &[f64]) -> Var {
        let pv = self.value(p);
        assert_eq!(pv.cols, 1, "bce expects a column vector");
        assert_eq!(pv.rows, targets.len(), "bce target length mismatch");
        let n = targets.len() as f64;
        let mut total = 0.0;
        for (i, &t) in targets.iter().enumerate() {
            let prob = pv.at(i, 0);
            if t > 0.0 {
                total -= t * prob.ln();
            }
            if t < 1.0 {
                total -= (1.0 - t) * (1.0 - prob).ln();
            }
        }
        let out = Mat::scalar(total / n);
        let needs = self.needs(p);
        self.push(
            out,
            Op::BceMean {
                p,
                targets: targets.to_vec(),
            },
            needs,
        )
    }

    fn add_grad(&mut self, v: Var, delta: &Mat) {
        if !self.needs(v) {
            return;
        }
        let slot = &mut self.grads[v.0];
        match slot {
            Some(existing) => existing.add_assign(delta),
            None => *slot = Some(delta.clone()),
        }
    }

    /// Accumulates `d(target)/d(node)` for every node that requires
    /// gradients. `target` must be scalar.
    pub fn backward(&mut self, target: Var) {
        assert!(
            self.value(target).is_scalar(),
            "backward target must be 1 x 1"
        );
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[target.0] = Some(Mat::scalar(1.0));

        for idx in (0..=target.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let Some(g) = self.grads[idx].take() else {
                continue;
            };
            self.propagate(idx, &g);
            self.grads[idx] = Some(g);
        }
    }

    fn propagate(&mut self, idx: usize, g: &Mat) {
        // Ops only reference earlier nodes, so reading values while mutating
        // grads is safe; values are cloned where the borrow would overlap.
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::Embed { table, ids } => {
                let (table, ids) = (*table, ids.clone());
                let tv = self.value(table);
                let mut dt = Mat::zeros(tv.rows, tv.cols);
                for (r, &id) in ids.iter().enumerate() {
                    let grow = g.row(r);
                    let drow = dt.row_mut(id);
                    for (dst, src) in drow.iter_mut().zip(grow) {
                        *dst += src;
                    }
                }
                self.add_grad(table, &dt);
            }
            Op::MatMul(a, b) => {
                let (a, b) = (*a, *b);
                if self.needs(a) {
                    let da = g.matmul(&self.value(b).transpose());
                    self.add_grad(a, &da);
                }
                if self.needs(b) {
                    let db = self.value(a).transpose().matmul(g);
                    self.add_grad(b, &db);
                }
            }
            Op::Add(a, b) => {
                let (a, b) = (*a, *b);
                self.add_grad(a, g);
                self.add_grad(b, g);
            }
            Op::AddRow { a, row } => {
                let (a, row) = (*a, *row);
                self.add_grad(a, g);
                if self.needs(row) {
                    let mut dr = Mat::zeros(1, g.cols);
                    for r in 0..g.rows {
                        for c in 0..g.cols {
                            *dr.at_mut(0, c) += g.at(r, c);
                        }
                    }
                    self.add_grad(row, &dr);
                }
            }
            Op::Hadamard(a, b) => {
                let (a, b) = (*a, *b);
                if self.needs(a) {
                    let bv = self.value(b).clone();
                    let da = Mat::from_vec(
                        g.rows,
                        g.cols,
                        g.data.iter().zip(&bv.data).map(|(x, y)| x * y).collect(),
                    );
                    self.add_grad(a, &da);
                }
                if self.needs(b) {
                    let av = self.value(a).clone();
                    let db = Mat::from_vec(
                        g.rows,
                        g.cols,
                        g.data.iter().zip(&av.data).map(|(x, y)| x * y).collect(),
                    );
                    self.add_grad(b, &db);
                }
            }
            Op::Scale(a, factor) => {
                let (a, factor) = (*a, *factor);
                let da = g.map(|v| v * factor);
                self.add_grad(a, &da);
            }
            Op::Sigmoid(a) => {
                let a = *a;
                let y = self.nodes[idx].val.clone();
                let da = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data
                        .iter()
                        .zip(&y.data)
                        .map(|(gv, yv)| gv * yv * (1.0 - yv))
                        .collect(),
                );
                self.add_grad(a, &da);
            }
            Op::Gelu(a) => {
                let a = *a;
                let x = self.value(a).clone();
                let da = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data
                        .iter()
                        .zip(&x.data)
                        .map(|(gv, xv)| gv * gelu_prime(*xv))
                        .collect(),
                );
                self.add_grad(a, &da);
            }
            Op::SoftmaxRows(a) => {
                let a = *a;
                let y = self.nodes[idx].val.clone();
                let mut da = Mat::zeros(g.rows, g.cols);
                for r in 0..g.rows {
                    let dot: f64 = g.row(r).iter().zip(y.row(r)).map(|(gv, yv)| gv * yv).sum();
                    for c in 0..g.cols {
                        *da.at_mut(r, c) = y.at(r, c) * (g.at(r, c) - dot);
                    }
                }
                self.add_grad(a, &da);
            }
            Op::LayerNorm { x, gain, bias } => {
                let (x, gain, bias) = (*x, *gain, *bias);
                let xv = self.value(x).clone();
                let gv = self.value(gain).clone();
                let d = xv.cols as f64;

                let mut dx = Mat::zeros(xv.rows, xv.cols);
                let mut dgain = Mat::zeros(1, xv.cols);
                let mut dbias = Mat::zeros(1, xv.cols);

                for r in 0..xv.rows {
                    let row = xv.row(r);
                    let mean = row.iter().sum::<f64>() / d;
                    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
                    let inv = 1.0 / (var + LN_EPS).sqrt();

                    let mut dxhat = vec![0.0; xv.cols];
                    let mut mean_dxhat = 0.0;
                    let mut mean_dxhat_xhat = 0.0;
                    for c in 0..xv.cols {
                        let xhat = (row[c] - mean) * inv;
                        let gval = g.at(r, c);
                        *dgain.at_mut(0, c) += gval * xhat;
                        *dbias.at_mut(0, c) += gval;
                        let dh = gval * gv.at(0, c);
                        dxhat[c] = dh;
                        mean_dxhat += dh;
                        mean_dxhat_xhat += dh * xhat;
                    }
                    mean_dxhat /= d;
                    mean_dxhat_xhat /= d;
                    for c in 0..xv.cols {
                        let xhat = (row[c] - mean) * inv;
                        *dx.at_mut(r, c) = (dxhat[c] - mean_dxhat - xhat * mean_dxhat_xhat) * inv;
                    }
                }
                self.add_grad(x, &dx);
                self.add_grad(gain, &dgain);
                self.add_grad(bias, &dbias);
            }
            Op::Transpose(a) => {
                let a = *a;
                let da = g.transpose();
                self.add_grad(a, &da);
            }
            Op::ConcatRows(a, b) => {
                let (a, b) = (*a, *b);
                let a_rows = self.value(a).rows;
                let da = Mat::from_vec(a_rows, g.cols, g.data[..a_rows * g.cols].to_vec());
                let db = Mat::from_vec(g.rows - a_rows, g.cols, g.data[a_rows * g.cols..].to_vec());
                self.add_grad(a, &da);
                self.add_grad(b, &db);
            }
            Op::ConcatCols(a, b) => {
                let (a, b) = (*a, *b);
                let a_cols = self.value(a).cols;
                let mut da = Mat::zeros(g.rows, a_cols);
                let mut db = Mat::zeros(g.rows, g.cols - a_cols);
                for r in 0..g.rows {
                    da.row_mut(r).copy_from_slice(&g.row(r)[..a_cols]);
                    db.row_mut(r).copy_from_slice(&g.row(r)[a_cols..]);
                }
                self.add_grad(a, &da);
                self.add_grad(b, &db);
            }
            Op::GatherRows { x, rows } => {
                let (x, rows) = (*x, rows.clone());
                let xv = self.value(x);
                let mut dx = Mat::zeros(xv.rows, xv.cols);
                for (r, &src) in rows.iter().enumerate() {
                    let grow = g.row(r);
                    let drow = dx.row_mut(src);
                    for (dst, val) in drow.iter_mut().zip(grow) {
                        *dst += val;
                    }
                }
                self.add_grad(x, &dx);
            }
            Op::Detach => {}
            Op::BceMean { p, targets } => {
                let (p, targets) = (*p, targets.clone());
                let pv = self.value(p).clone();
                let n = targets.len() as f64;
                let scale = g.at(0, 0) / n;
                let mut dp = Mat::zeros(pv.rows, 1);
                for (i, &t) in targets.iter().enumerate() {
                    let prob = pv.at(i, 0);
                    let mut d = 0.0;
                    if t > 0.0 {
                        d -= t / prob;
                    }
                    if t < 1.0 {
                        d += (1.0 - t) / (1.0 - prob);
                    }
                    *dp.at_mut(i, 0) = scale * d;
                }
                self.add_grad(p, &dp);
            }
        }
    }
}
