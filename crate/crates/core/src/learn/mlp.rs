//! Fully connected network: ReLU hidden layers, logistic output,
//! cross-entropy loss, mini-batch SGD with momentum.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Dense layer computing `W x + b`; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    fn glorot(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Layer {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.gen_range(-limit..limit)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

/// Random layers for sizes `[input, hidden..., 1]`.
pub fn init_layers(sizes: &[usize], seed: u64) -> Vec<Layer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes.windows(2).map(|w| Layer::glorot(w[0], w[1], &mut rng)).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-layer inputs plus the output logit.
fn forward(layers: &[Layer], x: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut a = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        let z = layer.apply(&a);
        inputs.push(a);
        a = if i + 1 == layers.len() {
            z
        } else {
            z.into_iter().map(|v| v.max(0.0)).collect()
        };
    }
    (inputs, a[0])
}

/// Mean binary cross-entropy over the batch plus `l2/2 · Σ w²` (biases not
/// penalised), and its gradient with respect to every layer parameter.
pub fn mlp_loss_gradient(layers: &[Layer], xs: &[Vec<f64>], ys: &[f64], l2: f64) -> (f64, Vec<Layer>) {
    let mut grads: Vec<Layer> = layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
    let n = xs.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let (inputs, z) = forward(layers, x);
        loss += softplus(z) - y * z;
        let mut delta = vec![(sigmoid(z) - y) / n];
        for li in (0..layers.len()).rev() {
            let layer = &layers[li];
            let a = &inputs[li];
            let g = &mut grads[li];
            for (o, &d) in delta.iter().enumerate().take(layer.outputs) {
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(a).for_each(|(gw, av)| *gw += d * av);
            }
            if li == 0 {
                break;
            }
            // a = relu(z_prev), so da/dz is 1 where a > 0
            delta = (0..layer.inputs)
                .map(|i| {
                    if a[i] <= 0.0 {
                        return 0.0;
                    }
                    (0..layer.outputs).map(|o| layer.weights[o * layer.inputs + i] * delta[o]).sum()
                })
                .collect();
        }
    }
    loss /= n;
    for (layer, g) in layers.iter().zip(&mut grads) {
        loss += 0.5 * l2 * layer.weights.iter().map(|w| w * w).sum::<f64>();
        g.weights.iter_mut().zip(&layer.weights).for_each(|(gw, w)| *gw += l2 * w);
    }
    (loss, grads)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub l2: f64,
}

/// Trained network with the input standardisation it was fitted under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub layers: Vec<Layer>,
}

impl Mlp {
    pub fn fit(x: &[Vec<f64>], y: &[bool], config: &MlpConfig, seed: u64) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let xs: Vec<Vec<f64>> = x.iter().map(|r| standardize(r, &mean, &scale)).collect();
        let ys: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();

        let mut sizes = vec![d];
        sizes.extend(&config.hidden);
        sizes.push(1);
        let mut layers = init_layers(&sizes, seed);
        let mut velocity: Vec<Layer> = layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let batch = config.batch_size.max(1);
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| xs[i].clone()).collect();
                let by: Vec<f64> = chunk.iter().map(|&i| ys[i]).collect();
                let (_, grads) = mlp_loss_gradient(&layers, &bx, &by, config.l2);
                for ((layer, v), g) in layers.iter_mut().zip(&mut velocity).zip(grads) {
                    let g = g.weights.iter().chain(&g.bias);
                    for ((p, v), g) in layer.params_mut().zip(v.params_mut()).zip(g) {
                        *v = config.momentum * *v - config.learning_rate * g;
                        *p += *v;
                    }
                }
            }
        }
        Mlp { mean, scale, layers }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(forward(&self.layers, &standardize(x, &self.mean, &self.scale)).1)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// Parameter `k` of a layer, weights first then biases.
fn param_mut(layer: &mut Layer, k: usize) -> &mut f64 {
    let nw = layer.weights.len();
    if k < nw {
        &mut layer.weights[k]
    } else {
        &mut layer.bias[k - nw]
    }
}

fn standardize(x: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    x.iter().zip(mean).zip(scale).map(|((v, m), s)| (v - m) / s).collect()
}

/// Maximum relative error between backpropagated and central-difference
/// gradients over every parameter of a random network with layer sizes
/// `architecture` (`[input, hidden..., 1]`), evaluated on a random batch.
/// Biases are randomised too: with zero biases a unit whose inputs are all
/// zero sits exactly on the ReLU kink, where central differences disagree
/// with any subgradient.
pub fn mlp_gradient_check(architecture: &[usize], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = init_layers(architecture, rng.gen());
    for b in layers.iter_mut().flat_map(|l| l.bias.iter_mut()) {
        *b = rng.gen_range(-0.5..0.5);
    }
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..architecture[0]).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<f64> = (0..4).map(|_| rng.gen_range(0..2) as f64).collect();
    let l2 = 1e-3;
    let (_, mut grads) = mlp_loss_gradient(&layers, &xs, &ys, l2);
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    let mut probe = layers.clone();
    for li in 0..layers.len() {
        let count = layers[li].weights.len() + layers[li].bias.len();
        for k in 0..count {
            let analytic = *param_mut(&mut grads[li], k);
            let orig = *param_mut(&mut probe[li], k);
            *param_mut(&mut probe[li], k) = orig + eps;
            let up = mlp_loss_gradient(&probe, &xs, &ys, l2).0;
            *param_mut(&mut probe[li], k) = orig - eps;
            let down = mlp_loss_gradient(&probe, &xs, &ys, l2).0;
            *param_mut(&mut probe[li], k) = orig;
            let numeric = (up - down) / (2.0 * eps);
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
        }
    }
    worst
}
