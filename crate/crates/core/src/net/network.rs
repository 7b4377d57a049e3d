use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result, TopoError};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
pub const BATCH_NORM_EPS: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.1;

/// Shape of the density network: `n_layers` hidden layers of `n_hidden`
/// LeakyReLU units (each with batch normalization when enabled), then a
/// sigmoid output (`n_outputs == 1`) or a softmax over `n_outputs` columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetArch {
    /// Input width: `2 n_f` behind a Fourier projection, `d` for raw
    /// coordinates.
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub n_layers: usize,
    pub n_outputs: usize,
    pub output_bias: bool,
    pub leaky_slope: f64,
    pub batch_norm: bool,
}

impl NetArch {
    /// Network fed by `n_f` cosine/sine pairs. The output layer carries a bias
    /// only for multi-material (softmax) outputs.
    pub fn fourier(n_f: usize, n_hidden: usize, n_layers: usize, n_outputs: usize) -> Self {
        Self {
            n_inputs: 2 * n_f,
            n_hidden,
            n_layers,
            n_outputs,
            output_bias: n_outputs > 1,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            batch_norm: true,
        }
    }

    /// Network fed by raw coordinates, output bias always present.
    pub fn coordinate(d: usize, n_hidden: usize, n_layers: usize, n_outputs: usize) -> Self {
        Self {
            n_inputs: d,
            n_hidden,
            n_layers,
            n_outputs,
            output_bias: true,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            batch_norm: true,
        }
    }

    pub fn without_batch_norm(mut self) -> Self {
        self.batch_norm = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 || self.n_hidden == 0 || self.n_layers == 0 || self.n_outputs == 0 {
            return Err(invalid(format!("every network dimension must be positive: {self:?}")));
        }
        if !(0.0..1.0).contains(&self.leaky_slope) {
            return Err(invalid(format!(
                "LeakyReLU slope must lie in [0, 1), got {}",
                self.leaky_slope
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        let first = self.n_inputs * self.n_hidden + self.n_hidden;
        let deeper = (self.n_layers - 1) * (self.n_hidden * self.n_hidden + self.n_hidden);
        let output = self.n_hidden * self.n_outputs + if self.output_bias { self.n_outputs } else { 0 };
        first + deeper + output
    }
}

pub fn param_count(arch: &NetArch) -> usize {
    arch.param_count()
}

/// One affine layer, `x W + b` with `W` stored `in x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

impl Dense {
    fn zeros(n_in: usize, n_out: usize, bias: bool) -> Self {
        Self {
            weight: Array2::zeros((n_in, n_out)),
            bias: bias.then(|| Array1::zeros(n_out)),
        }
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weight);
        if let Some(b) = &self.bias {
            z += b;
        }
        z
    }
}

/// Trainable scalars of a network; also the shape of its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub hidden: Vec<Dense>,
    pub output: Dense,
}

impl Params {
    pub fn zeros(arch: &NetArch) -> Self {
        let hidden = (0..arch.n_layers)
            .map(|l| {
                let n_in = if l == 0 { arch.n_inputs } else { arch.n_hidden };
                Dense::zeros(n_in, arch.n_hidden, true)
            })
            .collect();
        Self {
            hidden,
            output: Dense::zeros(arch.n_hidden, arch.n_outputs, arch.output_bias),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |d: &Dense| Dense {
            weight: Array2::zeros(d.weight.raw_dim()),
            bias: d.bias.as_ref().map(|b| Array1::zeros(b.len())),
        };
        Self {
            hidden: self.hidden.iter().map(z).collect(),
            output: z(&self.output),
        }
    }

    /// Named parameter blocks in checkpoint order.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (l, d) in self.hidden.iter().enumerate() {
            out.push((format!("hidden[{l}].weight"), d.weight.as_slice().expect("standard layout")));
            if let Some(b) = &d.bias {
                out.push((format!("hidden[{l}].bias"), b.as_slice().expect("standard layout")));
            }
        }
        out.push(("output.weight".into(), self.output.weight.as_slice().expect("standard layout")));
        if let Some(b) = &self.output.bias {
            out.push(("output.bias".into(), b.as_slice().expect("standard layout")));
        }
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        for (l, d) in self.hidden.iter_mut().enumerate() {
            out.push((
                format!("hidden[{l}].weight"),
                d.weight.as_slice_mut().expect("standard layout"),
            ));
            if let Some(b) = &mut d.bias {
                out.push((format!("hidden[{l}].bias"), b.as_slice_mut().expect("standard layout")));
            }
        }
        out.push((
            "output.weight".into(),
            self.output.weight.as_slice_mut().expect("standard layout"),
        ));
        if let Some(b) = &mut self.output.bias {
            out.push(("output.bias".into(), b.as_slice_mut().expect("standard layout")));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().into_iter().flat_map(|(_, b)| b.iter().copied()).collect()
    }

    pub fn copy_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.len() {
            return Err(invalid(format!(
                "flat parameter vector has {} entries, network has {}",
                flat.len(),
                self.len()
            )));
        }
        let mut offset = 0;
        for (_, block) in self.blocks_mut() {
            block.copy_from_slice(&flat[offset..offset + block.len()]);
            offset += block.len();
        }
        Ok(())
    }

    fn check_shapes(&self, arch: &NetArch) -> Result<()> {
        let reference = Params::zeros(arch);
        let same = |a: &Dense, b: &Dense| {
            a.weight.dim() == b.weight.dim()
                && a.bias.as_ref().map(Array1::len) == b.bias.as_ref().map(Array1::len)
        };
        let ok = self.hidden.len() == reference.hidden.len()
            && self.hidden.iter().zip(&reference.hidden).all(|(a, b)| same(a, b))
            && same(&self.output, &reference.output);
        if ok {
            Ok(())
        } else {
            Err(invalid("parameter shapes do not match the architecture"))
        }
    }
}

/// Running batch statistics used in eval mode.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNormStats {
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNormStats {
    fn new(n: usize) -> Self {
        Self {
            running_mean: Array1::zeros(n),
            running_var: Array1::ones(n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics, running statistics updated, activations cached.
    Train,
    /// Running statistics; rows are independent.
    Eval,
}

struct LayerCache {
    /// Post-normalization, pre-activation values.
    pre: Array2<f64>,
    /// Normalized values and `1 / sqrt(var + eps)` when batch norm is on.
    norm: Option<(Array2<f64>, Array1<f64>)>,
    act: Array2<f64>,
}

struct ForwardCache {
    n_rows: usize,
    layers: Vec<LayerCache>,
    output: Array2<f64>,
}

/// Density network with its parameters, batch-norm state and the cache of
/// the last training forward pass.
pub struct Network {
    arch: NetArch,
    params: Params,
    bn: Vec<BatchNormStats>,
    cache: Option<ForwardCache>,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Self {
            arch: self.arch,
            params: self.params.clone(),
            bn: self.bn.clone(),
            cache: None,
        }
    }
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("arch", &self.arch)
            .field("params", &self.params.len())
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl Network {
    /// Glorot-uniform weights, zero biases, batch-norm stats at `(0, 1)`.
    pub fn init(arch: NetArch, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&arch);
        let glorot = |d: &mut Dense, rng: &mut ChaCha8Rng| {
            let (fan_in, fan_out) = d.weight.dim();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            d.weight.iter_mut().for_each(|w| *w = rng.gen_range(-limit..limit));
        };
        for d in &mut params.hidden {
            glorot(d, &mut rng);
        }
        glorot(&mut params.output, &mut rng);
        Self::from_params(arch, params)
    }

    pub fn from_params(arch: NetArch, params: Params) -> Result<Self> {
        arch.validate()?;
        params.check_shapes(&arch)?;
        Ok(Self {
            arch,
            bn: (0..arch.n_layers).map(|_| BatchNormStats::new(arch.n_hidden)).collect(),
            params,
            cache: None,
        })
    }

    pub fn arch(&self) -> &NetArch {
        &self.arch
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn batch_norm_stats(&self) -> &[BatchNormStats] {
        &self.bn
    }

    pub(crate) fn set_batch_norm_stats(&mut self, bn: Vec<BatchNormStats>) -> Result<()> {
        if bn.len() != self.arch.n_layers
            || bn
                .iter()
                .any(|s| s.running_mean.len() != self.arch.n_hidden || s.running_var.len() != self.arch.n_hidden)
        {
            return Err(invalid("batch-norm statistics do not match the architecture"));
        }
        self.bn = bn;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn leaky(&self, v: f64) -> f64 {
        if v > 0.0 {
            v
        } else {
            self.arch.leaky_slope * v
        }
    }

    fn check_features(&self, features: &ArrayView2<'_, f64>) -> Result<()> {
        if features.ncols() != self.arch.n_inputs {
            return Err(invalid(format!(
                "feature width {} does not match network input width {}",
                features.ncols(),
                self.arch.n_inputs
            )));
        }
        Ok(())
    }

    /// Densities, `n_rows x n_outputs`.
    pub fn forward(&mut self, features: ArrayView2<'_, f64>, mode: Mode) -> Result<Array2<f64>> {
        match mode {
            Mode::Eval => self.forward_eval(features),
            Mode::Train => self.forward_train(features),
        }
    }

    pub fn forward_eval(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_features(&features)?;
        let mut x: Option<Array2<f64>> = None;
        for (l, layer) in self.params.hidden.iter().enumerate() {
            let input = x.as_ref().map_or(features.view(), |a| a.view());
            let mut z = layer.apply(input);
            if self.arch.batch_norm {
                let stats = &self.bn[l];
                let inv_std = stats.running_var.mapv(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt());
                z -= &stats.running_mean;
                z *= &inv_std;
            }
            z.mapv_inplace(|v| self.leaky(v));
            x = Some(z);
        }
        let hidden = x.expect("at least one hidden layer");
        let logits = self.params.output.apply(hidden.view());
        self.finish(logits)
    }

    fn forward_train(&mut self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_features(&features)?;
        let n = features.nrows();
        if self.arch.batch_norm && n < 2 {
            return Err(invalid(format!(
                "batch normalization needs at least 2 rows in train mode, got {n}"
            )));
        }
        let mut layers: Vec<LayerCache> = Vec::with_capacity(self.arch.n_layers);
        for l in 0..self.arch.n_layers {
            let input = layers.last().map_or(features.view(), |c| c.act.view());
            let z = self.params.hidden[l].apply(input);
            let (pre, norm) = if self.arch.batch_norm {
                let mean = z.mean_axis(Axis(0)).expect("non-empty batch");
                let centered = &z - &mean;
                let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).expect("non-empty batch");
                let inv_std = var.mapv(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt());
                let xhat = &centered * &inv_std;
                let unbiased = n as f64 / (n as f64 - 1.0);
                let stats = &mut self.bn[l];
                Zip::from(&mut stats.running_mean)
                    .and(&mean)
                    .for_each(|r, &m| *r = (1.0 - BATCH_NORM_MOMENTUM) * *r + BATCH_NORM_MOMENTUM * m);
                Zip::from(&mut stats.running_var).and(&var).for_each(|r, &v| {
                    *r = (1.0 - BATCH_NORM_MOMENTUM) * *r + BATCH_NORM_MOMENTUM * v * unbiased
                });
                (xhat.clone(), Some((xhat, inv_std)))
            } else {
                (z, None)
            };
            let act = pre.mapv(|v| self.leaky(v));
            layers.push(LayerCache { pre, norm, act });
        }
        let hidden = &layers.last().expect("at least one hidden layer").act;
        let logits = self.params.output.apply(hidden.view());
        let output = self.finish(logits)?;
        self.cache = Some(ForwardCache {
            n_rows: n,
            layers,
            output: output.clone(),
        });
        Ok(output)
    }

    fn finish(&self, mut logits: Array2<f64>) -> Result<Array2<f64>> {
        if self.arch.n_outputs == 1 {
            logits.mapv_inplace(sigmoid);
        } else {
            for mut row in logits.outer_iter_mut() {
                let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                row.mapv_inplace(|v| (v - max).exp());
                let s = row.sum();
                row /= s;
            }
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(TopoError::Numeric("network produced non-finite densities".into()));
        }
        Ok(logits)
    }

    /// Gradient of `sum_rows sum_k upstream[r, k] * rho[r, k]` with respect to
    /// every trainable scalar, through the cached training pass.
    pub fn backward(&self, features: ArrayView2<'_, f64>, upstream: ArrayView2<'_, f64>) -> Result<Params> {
        let cache = self.cache.as_ref().ok_or_else(|| {
            TopoError::Precondition("backward called without a preceding training forward pass".into())
        })?;
        self.check_features(&features)?;
        if features.nrows() != cache.n_rows || upstream.dim() != (cache.n_rows, self.arch.n_outputs) {
            return Err(invalid(format!(
                "backward expects {} rows and {} outputs, got features {:?} and upstream {:?}",
                cache.n_rows,
                self.arch.n_outputs,
                features.dim(),
                upstream.dim()
            )));
        }
        let rho = &cache.output;
        let dlogits = if self.arch.n_outputs == 1 {
            Zip::from(upstream).and(rho).map_collect(|&g, &r| g * r * (1.0 - r))
        } else {
            let mut d = Array2::zeros(rho.raw_dim());
            for ((mut drow, grow), rrow) in d.outer_iter_mut().zip(upstream.outer_iter()).zip(rho.outer_iter()) {
                let dot: f64 = grow.iter().zip(rrow.iter()).map(|(g, r)| g * r).sum();
                Zip::from(&mut drow)
                    .and(&grow)
                    .and(&rrow)
                    .for_each(|dv, &g, &r| *dv = r * (g - dot));
            }
            d
        };

        let mut grads = self.params.zeros_like();
        let last = &cache.layers.last().expect("at least one hidden layer").act;
        grads.output.weight = last.t().dot(&dlogits);
        if let Some(b) = &mut grads.output.bias {
            *b = dlogits.sum_axis(Axis(0));
        }
        let mut d_act = dlogits.dot(&self.params.output.weight.t());

        let slope = self.arch.leaky_slope;
        for l in (0..self.arch.n_layers).rev() {
            let layer = &cache.layers[l];
            let mut dz = Zip::from(&d_act)
                .and(&layer.pre)
                .map_collect(|&g, &y| if y > 0.0 { g } else { slope * g });
            if let Some((xhat, inv_std)) = &layer.norm {
                let n = cache.n_rows as f64;
                let sum_dy = dz.sum_axis(Axis(0));
                let sum_dy_xhat = (&dz * xhat).sum_axis(Axis(0));
                for ((mut row, xrow), _) in dz.outer_iter_mut().zip(xhat.outer_iter()).zip(0..) {
                    for k in 0..row.len() {
                        row[k] = inv_std[k] / n * (n * row[k] - sum_dy[k] - xrow[k] * sum_dy_xhat[k]);
                    }
                }
            }
            let input = if l == 0 { features.view() } else { cache.layers[l - 1].act.view() };
            grads.hidden[l].weight = input.t().dot(&dz);
            if let Some(b) = &mut grads.hidden[l].bias {
                *b = dz.sum_axis(Axis(0));
            }
            if l > 0 {
                d_act = dz.dot(&self.params.hidden[l].weight.t());
            }
        }
        Ok(grads)
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }
}

#[inline]
fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}
