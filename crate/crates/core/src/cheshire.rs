//! Chebyshev spectral hyperlink predictor.
//!
//! Nodes are encoded from their rows of the observed incidence matrix
//! (`x_i = tanh(W_enc h_i + b_enc)`). A candidate set is treated as a clique:
//! its node embeddings are refined by a Chebyshev filter of the clique's
//! rescaled normalised Laplacian, pooled by a column-wise RMS norm and a
//! max-min range, and scored by a logistic head.
//!
//! For a clique on `s` nodes the normalised Laplacian is
//! `L = I − (J − I)/(s − 1)` with exact top eigenvalue `s/(s − 1)`, so the
//! rescaled operator collapses to `L̃ = I − (2/s) J`. Chebyshev terms follow
//! the 1-based recursion `z¹ = X`, `z² = L̃X`, `zᵏ = 2L̃zᵏ⁻¹ − zᵏ⁻²`, i.e.
//! `zᵏ = T_{k−1}(L̃) X`.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ergm::sigmoid;
use crate::hypergraph::{incidence, IncidenceMatrix};
use crate::rng::{stream, STREAM_INIT, STREAM_TRAIN};
use crate::{Error, Hypergraph, Result};

pub const MIN_TRAIN_HYPEREDGES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct CheshireParams {
    pub embed_dim: usize,
    pub conv_dim: usize,
    /// Number of Chebyshev terms `K`.
    pub cheby_order: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learn_rate: f64,
    /// Corrupted negatives generated per positive each epoch.
    pub train_neg_ratio: usize,
    pub seed: u64,
}

impl Default for CheshireParams {
    fn default() -> Self {
        CheshireParams {
            embed_dim: 32,
            conv_dim: 32,
            cheby_order: 3,
            epochs: 200,
            batch_size: 32,
            learn_rate: 1e-2,
            train_neg_ratio: 1,
            seed: 0,
        }
    }
}

impl CheshireParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("embed_dim", self.embed_dim),
            ("conv_dim", self.conv_dim),
            ("cheby_order", self.cheby_order),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("train_neg_ratio", self.train_neg_ratio),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        if !(self.learn_rate.is_finite() && self.learn_rate > 0.0) {
            return Err(Error::InvalidArgument("learn_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Trainable tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    /// `d × |E_obs|`.
    pub w_enc: DMatrix<f64>,
    pub b_enc: DVector<f64>,
    /// `K` matrices of shape `d' × d`.
    pub w_conv: Vec<DMatrix<f64>>,
    /// Head over the `2d'` pooled features.
    pub head_w: DVector<f64>,
    pub head_b: f64,
}

impl Weights {
    fn zeros(d: usize, dc: usize, k: usize, m: usize) -> Self {
        Weights {
            w_enc: DMatrix::zeros(d, m),
            b_enc: DVector::zeros(d),
            w_conv: vec![DMatrix::zeros(dc, d); k],
            head_w: DVector::zeros(2 * dc),
            head_b: 0.0,
        }
    }

    fn init(d: usize, dc: usize, k: usize, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut uniform = |rows: usize, cols: usize, bound: f64| {
            DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-bound..bound))
        };
        let enc_bound = (6.0 / (d + m) as f64).sqrt();
        let w_enc = uniform(d, m, enc_bound);
        let conv_bound = (6.0 / (d + dc) as f64).sqrt() / (k as f64).sqrt();
        let w_conv = (0..k).map(|_| uniform(dc, d, conv_bound)).collect();
        let head_bound = (6.0 / (2 * dc + 1) as f64).sqrt();
        let head_w = DVector::from_column_slice(uniform(2 * dc, 1, head_bound).as_slice());
        Weights {
            w_enc,
            b_enc: DVector::zeros(d),
            w_conv,
            head_w,
            head_b: 0.0,
        }
    }

    fn slices(&self) -> Vec<&[f64]> {
        let mut out = vec![self.w_enc.as_slice(), self.b_enc.as_slice()];
        out.extend(self.w_conv.iter().map(|w| w.as_slice()));
        out.push(self.head_w.as_slice());
        out.push(std::slice::from_ref(&self.head_b));
        out
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self.w_enc.as_mut_slice(), self.b_enc.as_mut_slice()];
        out.extend(self.w_conv.iter_mut().map(|w| w.as_mut_slice()));
        out.push(self.head_w.as_mut_slice());
        out.push(std::slice::from_mut(&mut self.head_b));
        out
    }

    /// All parameters flattened in a fixed order.
    pub fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn unflatten(&mut self, flat: &[f64]) -> Result<()> {
        let total: usize = self.slices().iter().map(|s| s.len()).sum();
        if flat.len() != total {
            return Err(Error::InvalidArgument(format!(
                "expected {total} parameters, got {}",
                flat.len()
            )));
        }
        let mut at = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[at..at + s.len()]);
            at += s.len();
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// Trained predictor plus the node embeddings computed from the observed
/// incidence matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CheshireModel {
    pub params: CheshireParams,
    pub weights: Weights,
    /// Node embeddings `X` (`n × d`), refreshed after training.
    pub embeddings: DMatrix<f64>,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
    incidence: IncidenceMatrix,
}

/// Sum that does not depend on the order of its terms, which keeps the
/// clique stages exactly permutation-equivariant in floating point.
fn ordered_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Applies `L̃ = I − (2/s) J` to the rows of `z`.
fn rescaled_laplacian_apply(z: &DMatrix<f64>) -> DMatrix<f64> {
    let s = z.nrows() as f64;
    let mut out = z.clone();
    for j in 0..z.ncols() {
        let sum = ordered_sum(z.column(j).iter().copied());
        for i in 0..z.nrows() {
            out[(i, j)] -= 2.0 * sum / s;
        }
    }
    out
}

fn chebyshev_terms(xs: &DMatrix<f64>, k: usize) -> Vec<DMatrix<f64>> {
    let mut zs = Vec::with_capacity(k);
    zs.push(xs.clone());
    if k >= 2 {
        zs.push(rescaled_laplacian_apply(xs));
    }
    for t in 2..k {
        let next = rescaled_laplacian_apply(&zs[t - 1]) * 2.0 - &zs[t - 2];
        zs.push(next);
    }
    zs
}

fn encode_rows(weights: &Weights, inc: &IncidenceMatrix, nodes: &[usize]) -> DMatrix<f64> {
    let d = weights.b_enc.len();
    let mut x = DMatrix::zeros(nodes.len(), d);
    for (r, &v) in nodes.iter().enumerate() {
        for c in 0..d {
            let a = weights.b_enc[c] + inc.row(v).iter().map(|&e| weights.w_enc[(c, e)]).sum::<f64>();
            x[(r, c)] = a.tanh();
        }
    }
    x
}

/// Per-candidate forward state kept for backpropagation.
struct Forward {
    zs: Vec<DMatrix<f64>>,
    refined: DMatrix<f64>,
    pooled: DVector<f64>,
    argmax: Vec<usize>,
    argmin: Vec<usize>,
    logit: f64,
}

fn conv_forward(weights: &Weights, xs: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
    let zs = chebyshev_terms(xs, weights.w_conv.len());
    let mut pre = DMatrix::zeros(xs.nrows(), weights.w_conv[0].nrows());
    for (z, w) in zs.iter().zip(&weights.w_conv) {
        pre += z * w.transpose();
    }
    (zs, pre.map(f64::tanh))
}

fn pool_with_args(refined: &DMatrix<f64>) -> (DVector<f64>, Vec<usize>, Vec<usize>) {
    let (s, dc) = refined.shape();
    let mut pooled = DVector::zeros(2 * dc);
    let mut argmax = vec![0; dc];
    let mut argmin = vec![0; dc];
    for j in 0..dc {
        let col = refined.column(j);
        pooled[j] = (ordered_sum(col.iter().map(|v| v * v)) / s as f64).sqrt();
        for i in 1..s {
            if col[i] > col[argmax[j]] {
                argmax[j] = i;
            }
            if col[i] < col[argmin[j]] {
                argmin[j] = i;
            }
        }
        pooled[dc + j] = col[argmax[j]] - col[argmin[j]];
    }
    (pooled, argmax, argmin)
}

fn forward(weights: &Weights, xs: &DMatrix<f64>) -> Forward {
    let (zs, refined) = conv_forward(weights, xs);
    let (pooled, argmax, argmin) = pool_with_args(&refined);
    let logit = weights.head_w.dot(&pooled) + weights.head_b;
    Forward {
        zs,
        refined,
        pooled,
        argmax,
        argmin,
        logit,
    }
}

/// Accumulates parameter gradients for one candidate and returns `∂/∂X_S`.
fn backward(weights: &Weights, fw: &Forward, dlogit: f64, grads: &mut Weights) -> DMatrix<f64> {
    let (s, dc) = fw.refined.shape();
    grads.head_b += dlogit;
    grads.head_w.axpy(dlogit, &fw.pooled, 1.0);
    let dpooled = &weights.head_w * dlogit;

    let mut drefined = DMatrix::<f64>::zeros(s, dc);
    for j in 0..dc {
        let norm = fw.pooled[j];
        if norm > 0.0 {
            for i in 0..s {
                drefined[(i, j)] += dpooled[j] * fw.refined[(i, j)] / (s as f64 * norm);
            }
        }
        drefined[(fw.argmax[j], j)] += dpooled[dc + j];
        drefined[(fw.argmin[j], j)] -= dpooled[dc + j];
    }
    let dpre = drefined.zip_map(&fw.refined, |g, y| g * (1.0 - y * y));

    let k = weights.w_conv.len();
    let mut dz: Vec<DMatrix<f64>> = Vec::with_capacity(k);
    for (t, w) in weights.w_conv.iter().enumerate() {
        grads.w_conv[t] += dpre.transpose() * &fw.zs[t];
        dz.push(&dpre * w);
    }
    for t in (2..k).rev() {
        let back = rescaled_laplacian_apply(&dz[t]) * 2.0;
        dz[t - 1] += back;
        let carry = dz[t].clone();
        dz[t - 2] -= carry;
    }
    if k >= 2 {
        let back = rescaled_laplacian_apply(&dz[1]);
        dz[0] += back;
    }
    dz.swap_remove(0)
}

impl CheshireModel {
    /// Untrained model with seeded random weights for the given observed hypergraph.
    pub fn init(h_obs: &Hypergraph, params: CheshireParams) -> Result<Self> {
        params.validate()?;
        let (_, inc) = canonical_incidence(h_obs)?;
        let mut rng = stream(params.seed, STREAM_INIT);
        let weights = Weights::init(
            params.embed_dim,
            params.conv_dim,
            params.cheby_order,
            inc.shape().1,
            &mut rng,
        );
        let all: Vec<usize> = (0..inc.shape().0).collect();
        let embeddings = encode_rows(&weights, &inc, &all);
        Ok(CheshireModel {
            params,
            weights,
            embeddings,
            loss_history: Vec::new(),
            incidence: inc,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.incidence.shape().0
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    /// Recomputes `X` from the current encoder weights.
    pub fn refresh_embeddings(&mut self) {
        let all: Vec<usize> = (0..self.n_nodes()).collect();
        self.embeddings = encode_rows(&self.weights, &self.incidence, &all);
    }

    /// Mean binary cross-entropy of `batch` and its gradient, flattened in
    /// [`Weights::flatten`] order. Embeddings are re-encoded from the current
    /// weights so gradients flow into the encoder.
    pub fn loss_and_gradient(&self, batch: &[(Vec<usize>, bool)]) -> Result<(f64, Vec<f64>)> {
        let (loss, grads) = self.batch_step(batch)?;
        Ok((loss, grads.flatten()))
    }

    pub fn loss(&self, batch: &[(Vec<usize>, bool)]) -> Result<f64> {
        Ok(self.batch_step(batch)?.0)
    }

    fn batch_step(&self, batch: &[(Vec<usize>, bool)]) -> Result<(f64, Weights)> {
        let w = &self.weights;
        let n = self.n_nodes();
        let mut nodes: Vec<usize> = batch.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&v) = nodes.iter().find(|&&v| v >= n) {
            return Err(Error::NodeOutOfRange(v));
        }
        let mut slot = vec![usize::MAX; n];
        for (r, &v) in nodes.iter().enumerate() {
            slot[v] = r;
        }
        let x = encode_rows(w, &self.incidence, &nodes);
        let mut dx = DMatrix::zeros(x.nrows(), x.ncols());
        let mut grads = Weights::zeros(w.b_enc.len(), w.w_conv[0].nrows(), w.w_conv.len(), w.w_enc.ncols());
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for (set, label) in batch {
            if set.len() < 2 {
                return Err(Error::InvalidArgument("candidate needs at least 2 nodes".into()));
            }
            let rows: Vec<usize> = set.iter().map(|&v| slot[v]).collect();
            let xs = x.select_rows(&rows);
            let fw = forward(w, &xs);
            let y = if *label { 1.0 } else { 0.0 };
            loss += (softplus(fw.logit) - y * fw.logit) * scale;
            let dxs = backward(w, &fw, (sigmoid(fw.logit) - y) * scale, &mut grads);
            for (r, &row) in rows.iter().enumerate() {
                let mut target = dx.row_mut(row);
                target += dxs.row(r);
            }
        }
        for (r, &v) in nodes.iter().enumerate() {
            for c in 0..x.ncols() {
                let da = dx[(r, c)] * (1.0 - x[(r, c)] * x[(r, c)]);
                if da == 0.0 {
                    continue;
                }
                grads.b_enc[c] += da;
                for &e in self.incidence.row(v) {
                    grads.w_enc[(c, e)] += da;
                }
            }
        }
        Ok((loss, grads))
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Incidence over the hyperedges sorted lexicographically, so that results do
/// not depend on the storage order of `h`.
fn canonical_incidence(h: &Hypergraph) -> Result<(Vec<Vec<usize>>, IncidenceMatrix)> {
    let mut edges = h.edges().to_vec();
    edges.sort_unstable();
    let canon = Hypergraph::new(h.n(), edges.clone())?;
    Ok((edges, incidence(&canon)?))
}

/// `x_i = tanh(W_enc h_i + b_enc)` for every row of `inc`.
pub fn init_embeddings(inc: &IncidenceMatrix, weights: &Weights) -> Result<DMatrix<f64>> {
    if inc.shape().1 != weights.w_enc.ncols() {
        return Err(Error::InvalidArgument(format!(
            "incidence has {} hyperedges, encoder expects {}",
            inc.shape().1,
            weights.w_enc.ncols()
        )));
    }
    let all: Vec<usize> = (0..inc.shape().0).collect();
    Ok(encode_rows(weights, inc, &all))
}

/// Chebyshev-filtered clique embeddings `tanh(Σ_k zᵏ W_convᵏᵀ)`.
pub fn clique_cheby_conv(xs: &DMatrix<f64>, weights: &Weights) -> Result<DMatrix<f64>> {
    if xs.nrows() < 2 {
        return Err(Error::InvalidArgument("clique convolution needs |S| >= 2".into()));
    }
    if xs.ncols() != weights.w_conv[0].ncols() {
        return Err(Error::InvalidArgument("embedding width mismatch".into()));
    }
    Ok(conv_forward(weights, xs).1)
}

/// Column-wise RMS norm pooling followed by max-min pooling (`2d'` values).
pub fn pool(refined: &DMatrix<f64>) -> DVector<f64> {
    pool_with_args(refined).0
}

/// Probability that `set` is a hyperedge, using embeddings `x`.
pub fn score(model: &CheshireModel, set: &[usize], x: &DMatrix<f64>) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::InvalidArgument("candidate needs at least 2 nodes".into()));
    }
    if let Some(&v) = set.iter().find(|&&v| v >= x.nrows()) {
        return Err(Error::NodeOutOfRange(v));
    }
    let xs = x.select_rows(set);
    Ok(sigmoid(forward(&model.weights, &xs).logit))
}

impl CheshireModel {
    /// Scores `set` with the model's own embeddings.
    pub fn score(&self, set: &[usize]) -> Result<f64> {
        score(self, set, &self.embeddings)
    }
}

/// Replaces `⌈k/2⌉` members of `pos` with distinct non-members; `None` if the
/// node set is too small or every attempt lands on an observed hyperedge.
fn corrupt(rng: &mut ChaCha8Rng, pos: &[usize], n: usize, observed: &HashSet<Vec<usize>>) -> Option<Vec<usize>> {
    let k = pos.len();
    let swap = k.div_ceil(2);
    if n < k + swap {
        return None;
    }
    for _ in 0..100 {
        let drop = index::sample(rng, k, swap).into_vec();
        let mut set: Vec<usize> = pos
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, &v)| v)
            .collect();
        while set.len() < k {
            let v = rng.gen_range(0..n);
            if !pos.contains(&v) && !set.contains(&v) {
                set.push(v);
            }
        }
        set.sort_unstable();
        if !observed.contains(&set) {
            return Some(set);
        }
    }
    None
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(size: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; size],
            v: vec![0.0; size],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grads[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grads[i] * grads[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Trains on the observed hyperedges against per-epoch corrupted negatives.
pub fn train(h_obs: &Hypergraph, params: CheshireParams) -> Result<CheshireModel> {
    if h_obs.len() < MIN_TRAIN_HYPEREDGES {
        return Err(Error::InvalidArgument(format!(
            "training needs at least {MIN_TRAIN_HYPEREDGES} hyperedges, got {}",
            h_obs.len()
        )));
    }
    let mut model = CheshireModel::init(h_obs, params)?;
    let (positives, _) = canonical_incidence(h_obs)?;
    let observed: HashSet<Vec<usize>> = positives.iter().cloned().collect();
    let n = h_obs.n();
    let mut rng = stream(model.params.seed, STREAM_TRAIN);
    let mut flat = model.weights.flatten();
    let mut adam = Adam::new(flat.len(), model.params.learn_rate);

    for epoch in 0..model.params.epochs {
        let mut items: Vec<(Vec<usize>, bool)> = positives.iter().map(|p| (p.clone(), true)).collect();
        for p in &positives {
            for _ in 0..model.params.train_neg_ratio {
                if let Some(neg) = corrupt(&mut rng, p, n, &observed) {
                    items.push((neg, false));
                }
            }
        }
        items.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in items.chunks(model.params.batch_size) {
            let (loss, grads) = model.batch_step(batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
            }
            epoch_loss += loss * batch.len() as f64;
            adam.step(&mut flat, &grads.flatten());
            model.weights.unflatten(&flat)?;
        }
        let mean = epoch_loss / items.len() as f64;
        if !mean.is_finite() || !model.weights.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
        }
        model.loss_history.push(mean);
    }
    model.refresh_embeddings();
    Ok(model)
}

const CHECKPOINT_MAGIC: &str = "cheshire-checkpoint v1";

fn write_tensor(out: &mut String, name: &str, rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) {
    let _ = writeln!(out, "tensor {name} {rows} {cols}");
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| format!("{:016x}", at(i, j).to_bits())).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

/// Text checkpoint. Every value is written as the hex of its IEEE-754 bits,
/// so a reload is bit-exact.
///
/// ```text
/// cheshire-checkpoint v1
/// params <d> <d'> <K> <epochs> <batch> <lr bits> <neg ratio> <seed>
/// incidence <n> <m>
/// <hyperedge ids of node 0, space separated; empty line if none>
/// ...
/// tensor <name> <rows> <cols>
/// <row of hex values>
/// ...
/// ```
/// Tensors: `w_enc`, `b_enc`, `w_conv0..`, `head_w`, `head_b`, `embeddings`, `loss`.
pub fn save_checkpoint(model: &CheshireModel) -> String {
    let p = &model.params;
    let w = &model.weights;
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
    let _ = writeln!(
        out,
        "params {} {} {} {} {} {:016x} {} {}",
        p.embed_dim,
        p.conv_dim,
        p.cheby_order,
        p.epochs,
        p.batch_size,
        p.learn_rate.to_bits(),
        p.train_neg_ratio,
        p.seed
    );
    let (n, m) = model.incidence.shape();
    let _ = writeln!(out, "incidence {n} {m}");
    for v in 0..n {
        let ids: Vec<String> = model.incidence.row(v).iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    write_tensor(&mut out, "w_enc", w.w_enc.nrows(), w.w_enc.ncols(), |i, j| w.w_enc[(i, j)]);
    write_tensor(&mut out, "b_enc", 1, w.b_enc.len(), |_, j| w.b_enc[j]);
    for (k, c) in w.w_conv.iter().enumerate() {
        write_tensor(&mut out, &format!("w_conv{k}"), c.nrows(), c.ncols(), |i, j| c[(i, j)]);
    }
    write_tensor(&mut out, "head_w", 1, w.head_w.len(), |_, j| w.head_w[j]);
    write_tensor(&mut out, "head_b", 1, 1, |_, _| w.head_b);
    let x = &model.embeddings;
    write_tensor(&mut out, "embeddings", x.nrows(), x.ncols(), |i, j| x[(i, j)]);
    let loss = &model.loss_history;
    write_tensor(&mut out, "loss", 1, loss.len(), |_, j| loss[j]);
    out
}

fn ckpt_err(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| ckpt_err(format!("bad {what}")))
}

fn parse_bits(tok: &str) -> Result<f64> {
    u64::from_str_radix(tok, 16)
        .map(f64::from_bits)
        .map_err(|_| ckpt_err(format!("bad value '{tok}'")))
}

pub fn load_checkpoint(text: &str) -> Result<CheshireModel> {
    let mut lines = text.lines();
    if lines.next() != Some(CHECKPOINT_MAGIC) {
        return Err(ckpt_err("missing header"));
    }
    let mut toks = lines.next().ok_or_else(|| ckpt_err("missing params"))?.split_whitespace();
    if toks.next() != Some("params") {
        return Err(ckpt_err("missing params"));
    }
    let params = CheshireParams {
        embed_dim: parse_num(toks.next(), "embed_dim")?,
        conv_dim: parse_num(toks.next(), "conv_dim")?,
        cheby_order: parse_num(toks.next(), "cheby_order")?,
        epochs: parse_num(toks.next(), "epochs")?,
        batch_size: parse_num(toks.next(), "batch_size")?,
        learn_rate: parse_bits(toks.next().ok_or_else(|| ckpt_err("bad learn_rate"))?)?,
        train_neg_ratio: parse_num(toks.next(), "train_neg_ratio")?,
        seed: parse_num(toks.next(), "seed")?,
    };
    params.validate()?;
    let mut toks = lines.next().ok_or_else(|| ckpt_err("missing incidence"))?.split_whitespace();
    if toks.next() != Some("incidence") {
        return Err(ckpt_err("missing incidence"));
    }
    let n: usize = parse_num(toks.next(), "node count")?;
    let m: usize = parse_num(toks.next(), "hyperedge count")?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for v in 0..n {
        let line = lines.next().ok_or_else(|| ckpt_err("truncated incidence"))?;
        for t in line.split_whitespace() {
            let e: usize = parse_num(Some(t), "hyperedge id")?;
            members.get_mut(e).ok_or_else(|| ckpt_err("hyperedge id out of range"))?.push(v);
        }
    }
    let inc = incidence(&Hypergraph::new(n, members)?)?;

    let mut tensor = |name: &str| -> Result<DMatrix<f64>> {
        let header = lines.next().ok_or_else(|| ckpt_err(format!("missing tensor {name}")))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("tensor") || toks.next() != Some(name) {
            return Err(ckpt_err(format!("expected tensor {name}")));
        }
        let rows: usize = parse_num(toks.next(), "rows")?;
        let cols: usize = parse_num(toks.next(), "cols")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| ckpt_err(format!("truncated tensor {name}")))?;
            let row: Vec<f64> = line.split_whitespace().map(parse_bits).collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(ckpt_err(format!("tensor {name}: row width {} != {cols}", row.len())));
            }
            data.extend(row);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    };

    let w_enc = tensor("w_enc")?;
    let b_enc = DVector::from_column_slice(tensor("b_enc")?.as_slice());
    let w_conv = (0..params.cheby_order)
        .map(|k| tensor(&format!("w_conv{k}")))
        .collect::<Result<Vec<_>>>()?;
    let head_w = DVector::from_column_slice(tensor("head_w")?.as_slice());
    let head_b = tensor("head_b")?[(0, 0)];
    let embeddings = tensor("embeddings")?;
    let loss_history = tensor("loss")?.as_slice().to_vec();

    let (d, dc) = (params.embed_dim, params.conv_dim);
    let shapes_ok = w_enc.shape() == (d, m)
        && b_enc.len() == d
        && w_conv.iter().all(|w| w.shape() == (dc, d))
        && head_w.len() == 2 * dc
        && embeddings.shape() == (n, d);
    if !shapes_ok {
        return Err(ckpt_err("tensor shapes do not match params"));
    }
    Ok(CheshireModel {
        params,
        weights: Weights {
            w_enc,
            b_enc,
            w_conv,
            head_w,
            head_b,
        },
        embeddings,
        loss_history,
        incidence: inc,
    })
}
