//! Learnable encoder over archived groups.
//!
//! Each group (one relation, `K` iteration slabs) goes through input
//! dropout, a Conv1D that treats iterations as input channels, channel
//! concatenation and a per-group MLP. Group representations are
//! concatenated and a fusion MLP produces class logits.
//!
//! Forward and backward passes are written out by hand and generic over
//! [`Scalar`], so the same code trains in `f32` and is gradient-checked in
//! `f64`.

mod checkpoint;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign};

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, LinalgScalar, ScalarOperand, Zip};
use num_traits::{Float, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};

use crate::error::{Error, Result};

pub trait Scalar:
    Float + FromPrimitive + LinalgScalar + ScalarOperand + AddAssign + MulAssign + Sum + Debug + Send + Sync
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Elementwise nonlinearity between MLP layers: ELU with unit scale.
///
/// Identity on nonnegative inputs, smooth enough for finite-difference
/// checks at `h = 1e-4`.
#[inline]
pub fn activation<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x.exp() - T::one()
    }
}

#[inline]
fn activation_grad<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub hidden_dim: usize,
    pub conv_out_channels: usize,
    pub group_mlp_layers: usize,
    pub fusion_mlp_layers: usize,
    pub dropout_input: f64,
    pub dropout_hidden: f64,
    pub num_classes: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 256,
            conv_out_channels: 2,
            group_mlp_layers: 2,
            fusion_mlp_layers: 2,
            dropout_input: 0.5,
            dropout_hidden: 0.5,
            num_classes: 2,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hidden_dim", self.hidden_dim),
            ("conv_out_channels", self.conv_out_channels),
            ("group_mlp_layers", self.group_mlp_layers),
            ("fusion_mlp_layers", self.fusion_mlp_layers),
            ("num_classes", self.num_classes),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        for (name, p) in [("dropout_input", self.dropout_input), ("dropout_hidden", self.dropout_hidden)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {p}")));
            }
        }
        Ok(())
    }
}

/// `y = x · weight + bias`, with `weight` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub layers: Vec<Linear<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupParams<T> {
    /// `K × C_out`.
    pub conv_w: Array2<T>,
    /// One scalar per output channel, broadcast over the whole channel.
    pub conv_b: Array1<T>,
    pub mlp: Mlp<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams<T> {
    pub groups: Vec<GroupParams<T>>,
    pub fusion: Mlp<T>,
}

fn uniform_init<T: Scalar>(rng: &mut ChaCha8Rng, shape: (usize, usize), fan_in: usize) -> Array2<T> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Array2::from_shape_simple_fn(shape, || T::from_f64(rng.random_range(-bound..bound)).unwrap())
}

impl<T: Scalar> Mlp<T> {
    fn init(rng: &mut ChaCha8Rng, dims: &[usize]) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| Linear {
                weight: uniform_init(rng, (w[0], w[1]), w[0]),
                bias: uniform_init(rng, (1, w[1]), w[0]).into_shape_with_order(w[1]).unwrap(),
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weight.ncols()
    }
}

fn mlp_dims(input: usize, hidden: usize, output: usize, layers: usize) -> Vec<usize> {
    let mut dims = vec![input];
    dims.extend(std::iter::repeat_n(hidden, layers - 1));
    dims.push(output);
    dims
}

impl<T: Scalar> EncoderParams<T> {
    /// Uniform fan-in scaled initialization, seeded.
    pub fn init(cfg: &EncoderConfig, group_dims: &[usize], iterations: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if group_dims.is_empty() || iterations == 0 {
            return Err(Error::Config("encoder needs at least one group and one iteration".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = cfg.conv_out_channels;
        let groups = group_dims
            .iter()
            .map(|&dg| GroupParams {
                conv_w: uniform_init(&mut rng, (iterations, c), iterations),
                conv_b: uniform_init(&mut rng, (1, c), iterations).into_shape_with_order(c).unwrap(),
                mlp: Mlp::init(&mut rng, &mlp_dims(c * dg, cfg.hidden_dim, cfg.hidden_dim, cfg.group_mlp_layers)),
            })
            .collect();
        let fusion = Mlp::init(
            &mut rng,
            &mlp_dims(
                group_dims.len() * cfg.hidden_dim,
                cfg.hidden_dim,
                cfg.num_classes,
                cfg.fusion_mlp_layers,
            ),
        );
        Ok(Self { groups, fusion })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for b in z.blocks_mut() {
            b.fill(T::zero());
        }
        z
    }

    /// Every parameter array, in checkpoint order.
    pub fn blocks(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        for g in &self.groups {
            out.push(g.conv_w.as_slice().unwrap());
            out.push(g.conv_b.as_slice().unwrap());
            for l in &g.mlp.layers {
                out.push(l.weight.as_slice().unwrap());
                out.push(l.bias.as_slice().unwrap());
            }
        }
        for l in &self.fusion.layers {
            out.push(l.weight.as_slice().unwrap());
            out.push(l.bias.as_slice().unwrap());
        }
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for g in &mut self.groups {
            out.push(g.conv_w.as_slice_mut().unwrap());
            out.push(g.conv_b.as_slice_mut().unwrap());
            for l in &mut g.mlp.layers {
                out.push(l.weight.as_slice_mut().unwrap());
                out.push(l.bias.as_slice_mut().unwrap());
            }
        }
        for l in &mut self.fusion.layers {
            out.push(l.weight.as_slice_mut().unwrap());
            out.push(l.bias.as_slice_mut().unwrap());
        }
        out
    }

    /// `(name, shape)` for every block, aligned with [`Self::blocks`].
    pub fn block_layout(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        let layer_blocks = |out: &mut Vec<(String, Vec<usize>)>, prefix: String, mlp: &Mlp<T>| {
            for (i, l) in mlp.layers.iter().enumerate() {
                out.push((format!("{prefix}.layer{i}.weight"), l.weight.shape().to_vec()));
                out.push((format!("{prefix}.layer{i}.bias"), l.bias.shape().to_vec()));
            }
        };
        for (gi, g) in self.groups.iter().enumerate() {
            out.push((format!("group{gi}.conv_w"), g.conv_w.shape().to_vec()));
            out.push((format!("group{gi}.conv_b"), g.conv_b.shape().to_vec()));
            layer_blocks(&mut out, format!("group{gi}.mlp"), &g.mlp);
        }
        layer_blocks(&mut out, "fusion".to_string(), &self.fusion);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn cast<U: Scalar>(&self) -> EncoderParams<U> {
        let a = |m: &Array2<T>| m.mapv(|v| U::from_f64(v.to_f64().unwrap()).unwrap());
        let v = |m: &Array1<T>| m.mapv(|v| U::from_f64(v.to_f64().unwrap()).unwrap());
        let mlp = |m: &Mlp<T>| Mlp {
            layers: m
                .layers
                .iter()
                .map(|l| Linear {
                    weight: a(&l.weight),
                    bias: v(&l.bias),
                })
                .collect(),
        };
        EncoderParams {
            groups: self
                .groups
                .iter()
                .map(|g| GroupParams {
                    conv_w: a(&g.conv_w),
                    conv_b: v(&g.conv_b),
                    mlp: mlp(&g.mlp),
                })
                .collect(),
            fusion: mlp(&self.fusion),
        }
    }
}

/// Inverted-dropout mask: entries are `0` or `1 / (1 - p)`.
fn dropout_mask<T: Scalar, R: Rng>(rng: &mut R, shape: (usize, usize), p: f64) -> Array2<T> {
    let keep = 1.0 - p;
    let scale = T::from_f64(1.0 / keep).unwrap();
    Array2::from_shape_simple_fn(shape, || {
        if rng.random::<f64>() < keep {
            scale
        } else {
            T::zero()
        }
    })
}

fn maybe_dropout<T: Scalar, R: Rng>(
    x: Array2<T>,
    p: f64,
    training: bool,
    rng: &mut R,
) -> (Array2<T>, Option<Array2<T>>) {
    if !training || p == 0.0 {
        return (x, None);
    }
    let mask = dropout_mask(rng, x.dim(), p);
    (&x * &mask, Some(mask))
}

/// `M_c = Σ_k w[k, c] · slab_k + b[c]`.
pub fn conv1d_over_iterations<T: Scalar>(
    slabs: &[ArrayView2<'_, T>],
    conv_w: &Array2<T>,
    conv_b: &Array1<T>,
) -> Result<Vec<Array2<T>>> {
    let first = slabs
        .first()
        .ok_or_else(|| Error::Config("conv1d needs at least one slab".into()))?;
    if let Some(bad) = slabs.iter().find(|s| s.dim() != first.dim()) {
        return Err(Error::shape("conv1d slab", first.dim(), bad.dim()));
    }
    if conv_w.nrows() != slabs.len() || conv_b.len() != conv_w.ncols() {
        return Err(Error::shape(
            "conv1d weights",
            (slabs.len(), conv_b.len()),
            conv_w.dim(),
        ));
    }
    Ok((0..conv_w.ncols())
        .map(|c| {
            let mut m = Array2::from_elem(first.dim(), conv_b[c]);
            for (k, slab) in slabs.iter().enumerate() {
                m.scaled_add(conv_w[[k, c]], slab);
            }
            m
        })
        .collect())
}

struct MlpTrace<T> {
    /// Input to each layer, after activation and dropout.
    inputs: Vec<Array2<T>>,
    /// Pre-activations of every layer except the last.
    preacts: Vec<Array2<T>>,
    masks: Vec<Option<Array2<T>>>,
}

fn mlp_forward<T: Scalar, R: Rng>(
    mlp: &Mlp<T>,
    x: Array2<T>,
    p: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Array2<T>, MlpTrace<T>)> {
    if x.ncols() != mlp.input_dim() {
        return Err(Error::shape("mlp input", (x.nrows(), mlp.input_dim()), x.dim()));
    }
    let n = mlp.layers.len();
    let mut trace = MlpTrace {
        inputs: Vec::with_capacity(n),
        preacts: Vec::with_capacity(n - 1),
        masks: Vec::with_capacity(n - 1),
    };
    let mut a = x;
    for (i, layer) in mlp.layers.iter().enumerate() {
        let z = a.dot(&layer.weight) + &layer.bias;
        trace.inputs.push(a);
        if i + 1 == n {
            return Ok((z, trace));
        }
        let act = z.mapv(activation);
        trace.preacts.push(z);
        let (dropped, mask) = maybe_dropout(act, p, training, rng);
        trace.masks.push(mask);
        a = dropped;
    }
    unreachable!("mlp has at least one layer")
}

/// Accumulates parameter gradients into `grads`, returns the input gradient.
fn mlp_backward<T: Scalar>(mlp: &Mlp<T>, trace: &MlpTrace<T>, dout: Array2<T>, grads: &mut Mlp<T>) -> Array2<T> {
    let mut dz = dout;
    for i in (0..mlp.layers.len()).rev() {
        let layer = &mlp.layers[i];
        let g = &mut grads.layers[i];
        g.weight += &trace.inputs[i].t().dot(&dz);
        g.bias += &dz.sum_axis(Axis(0));
        let mut da = dz.dot(&layer.weight.t());
        if i == 0 {
            return da;
        }
        if let Some(mask) = &trace.masks[i - 1] {
            da *= mask;
        }
        Zip::from(&mut da)
            .and(&trace.preacts[i - 1])
            .for_each(|d, &z| *d *= activation_grad(z));
        dz = da;
    }
    unreachable!("mlp has at least one layer")
}

struct GroupTrace<T> {
    dropped: Vec<Array2<T>>,
    mlp: MlpTrace<T>,
}

fn group_forward<T: Scalar, R: Rng>(
    slabs: &[Array2<T>],
    params: &GroupParams<T>,
    cfg: &EncoderConfig,
    training: bool,
    rng: &mut R,
) -> Result<(Array2<T>, GroupTrace<T>)> {
    let dropped: Vec<Array2<T>> = slabs
        .iter()
        .map(|s| maybe_dropout(s.clone(), cfg.dropout_input, training, rng).0)
        .collect();
    let views: Vec<ArrayView2<'_, T>> = dropped.iter().map(|d| d.view()).collect();
    let channels = conv1d_over_iterations(&views, &params.conv_w, &params.conv_b)?;
    let channel_views: Vec<ArrayView2<'_, T>> = channels.iter().map(|c| c.view()).collect();
    let joined = concatenate(Axis(1), &channel_views).expect("channels share shape");
    let (repr, mlp) = mlp_forward(&params.mlp, joined, cfg.dropout_hidden, training, rng)?;
    Ok((repr, GroupTrace { dropped, mlp }))
}

/// One group's representation, `B × hidden_dim`.
pub fn group_encode<T: Scalar, R: Rng>(
    slabs: &[Array2<T>],
    params: &GroupParams<T>,
    cfg: &EncoderConfig,
    training: bool,
    rng: &mut R,
) -> Result<Array2<T>> {
    group_forward(slabs, params, cfg, training, rng).map(|(r, _)| r)
}

/// Concatenates group representations and applies the fusion MLP.
pub fn fuse_and_classify<T: Scalar, R: Rng>(
    reprs: &[Array2<T>],
    fusion: &Mlp<T>,
    cfg: &EncoderConfig,
    training: bool,
    rng: &mut R,
) -> Result<Array2<T>> {
    fuse_forward(reprs, fusion, cfg, training, rng).map(|(l, _)| l)
}

fn fuse_forward<T: Scalar, R: Rng>(
    reprs: &[Array2<T>],
    fusion: &Mlp<T>,
    cfg: &EncoderConfig,
    training: bool,
    rng: &mut R,
) -> Result<(Array2<T>, MlpTrace<T>)> {
    let width: usize = reprs.iter().map(|r| r.ncols()).sum();
    if width != fusion.input_dim() {
        return Err(Error::Config(format!(
            "fusion expects {} input columns, got {} from {} groups",
            fusion.input_dim(),
            width,
            reprs.len()
        )));
    }
    let views: Vec<ArrayView2<'_, T>> = reprs.iter().map(|r| r.view()).collect();
    let joined = concatenate(Axis(1), &views).map_err(|_| Error::Config("group batch sizes differ".into()))?;
    mlp_forward(fusion, joined, cfg.dropout_hidden, training, rng)
}

fn check_batch<T: Scalar>(batch: &[Vec<Array2<T>>], params: &EncoderParams<T>) -> Result<()> {
    if batch.len() != params.groups.len() {
        return Err(Error::Config(format!(
            "{} groups in batch, {} in parameters",
            batch.len(),
            params.groups.len()
        )));
    }
    Ok(())
}

/// Full forward pass; `batch[g][k]` is group `g`, iteration slab `k`.
pub fn forward<T: Scalar, R: Rng>(
    params: &EncoderParams<T>,
    cfg: &EncoderConfig,
    batch: &[Vec<Array2<T>>],
    training: bool,
    rng: &mut R,
) -> Result<Array2<T>> {
    check_batch(batch, params)?;
    let reprs = batch
        .iter()
        .zip(&params.groups)
        .map(|(slabs, gp)| group_encode(slabs, gp, cfg, training, rng))
        .collect::<Result<Vec<_>>>()?;
    fuse_and_classify(&reprs, &params.fusion, cfg, training, rng)
}

/// Mean softmax cross-entropy and its exact gradient for every parameter.
///
/// Dropout masks are drawn from `rng` once, in forward order, and reused by
/// the backward pass.
pub fn loss_and_grads<T: Scalar, R: Rng>(
    params: &EncoderParams<T>,
    cfg: &EncoderConfig,
    batch: &[Vec<Array2<T>>],
    labels: &[usize],
    rng: &mut R,
) -> Result<(T, EncoderParams<T>)> {
    check_batch(batch, params)?;
    for (row, &y) in labels.iter().enumerate() {
        if y >= cfg.num_classes {
            return Err(Error::InvalidLabel {
                row,
                label: y as u32,
                num_classes: cfg.num_classes,
            });
        }
    }

    let mut traces = Vec::with_capacity(batch.len());
    let mut reprs = Vec::with_capacity(batch.len());
    for (slabs, gp) in batch.iter().zip(&params.groups) {
        let (r, t) = group_forward(slabs, gp, cfg, true, rng)?;
        reprs.push(r);
        traces.push(t);
    }
    let (logits, fusion_trace) = fuse_forward(&reprs, &params.fusion, cfg, true, rng)?;
    if logits.nrows() != labels.len() {
        return Err(Error::shape("labels", (logits.nrows(), 1), (labels.len(), 1)));
    }

    let (loss, dlogits) = softmax_cross_entropy(&logits, labels);
    let mut grads = params.zeros_like();
    let djoined = mlp_backward(&params.fusion, &fusion_trace, dlogits, &mut grads.fusion);

    let mut offset = 0;
    for (gi, (gp, trace)) in params.groups.iter().zip(&traces).enumerate() {
        let width = gp.mlp.output_dim();
        let drepr = djoined.slice(s![.., offset..offset + width]).to_owned();
        offset += width;
        let gg = &mut grads.groups[gi];
        let dconcat = mlp_backward(&gp.mlp, &trace.mlp, drepr, &mut gg.mlp);
        let dg = trace.dropped[0].ncols();
        for c in 0..gp.conv_b.len() {
            let dm = dconcat.slice(s![.., c * dg..(c + 1) * dg]);
            gg.conv_b[c] = dm.sum();
            for (k, x) in trace.dropped.iter().enumerate() {
                gg.conv_w[[k, c]] = (&dm * x).sum();
            }
        }
    }
    Ok((loss, grads))
}

/// Returns the mean loss and `∂loss/∂logits`.
fn softmax_cross_entropy<T: Scalar>(logits: &Array2<T>, labels: &[usize]) -> (T, Array2<T>) {
    let b = T::from_usize(labels.len()).unwrap();
    let mut grad = Array2::zeros(logits.dim());
    let mut total = T::zero();
    for ((row, mut g), &y) in logits.rows().into_iter().zip(grad.rows_mut()).zip(labels) {
        let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
        let exps = row.mapv(|v| (v - max).exp());
        let sum = exps.sum();
        total = total + sum.ln() - (row[y] - max);
        g.assign(&(exps / sum));
        g[y] = g[y] - T::one();
    }
    grad.mapv_inplace(|v| v / b);
    (total / b, grad)
}

/// Argmax class per row, ties to the lowest index.
pub fn predict<T: Scalar>(logits: &Array2<T>) -> Vec<usize> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}
