//! One-hidden-layer network with independent sigmoid outputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 256, learning_rate: 1e-3, batch_size: 32, max_epochs: 100, patience: 5, validation_fraction: 0.1 }
    }
}

/// Weights of a trained network, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n] }
    }

    fn step(&mut self, w: &mut [f64], g: &[f64], lr: f64, t: i32) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let c1 = 1.0 - B1.powi(t);
        let c2 = 1.0 - B2.powi(t);
        for i in 0..w.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * g[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * g[i] * g[i];
            w[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
        }
    }
}

impl Mlp {
    fn init(n_in: usize, n_hidden: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut glorot = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out).map(|_| rng.gen_range(-a..a)).collect()
        };
        let w1 = glorot(n_in, n_hidden);
        let w2 = glorot(n_hidden, n_out);
        Self { n_in, n_hidden, n_out, w1, b1: vec![0.0; n_hidden], w2, b2: vec![0.0; n_out] }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    /// Pre-activations of the hidden layer; zero inputs are skipped.
    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        let mut h = self.b1.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &self.w1[i * self.n_hidden..(i + 1) * self.n_hidden];
                for (hj, wj) in h.iter_mut().zip(row) {
                    *hj += xi * wj;
                }
            }
        }
        h
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let mut z = self.b2.clone();
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0.0 {
                let row = &self.w2[j * self.n_out..(j + 1) * self.n_out];
                for (zk, wk) in z.iter_mut().zip(row) {
                    *zk += hj * wk;
                }
            }
        }
        z.iter().map(|&v| sigmoid(v)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = self.hidden_pre(x).into_iter().map(|v| v.max(0.0)).collect();
        self.output(&h)
    }

    /// Mean binary cross-entropy over samples and outputs.
    fn loss(&self, x: &[&[f64]], y: &[&[f64]]) -> f64 {
        let mut total = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            let p = self.predict(xi);
            for (pk, yk) in p.iter().zip(yi.iter()) {
                let pk = pk.clamp(1e-12, 1.0 - 1e-12);
                total -= yk * pk.ln() + (1.0 - yk) * (1.0 - pk).ln();
            }
        }
        total / (x.len().max(1) * self.n_out.max(1)) as f64
    }

    /// Trains with Adam on mini-batches, stopping once the validation loss
    /// has not improved for `patience` epochs and keeping the best weights.
    /// With fewer than ten samples there is no validation slice and all
    /// epochs run.
    pub fn train(x: &[Vec<f64>], y: &[Vec<f64>], params: &MlpParams, seed: u64) -> Self {
        assert_eq!(x.len(), y.len(), "sample/target count mismatch");
        assert!(!x.is_empty(), "no training samples");
        let n_in = x[0].len();
        let n_out = y[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::init(n_in, params.hidden, n_out, &mut rng);

        let mut order: Vec<usize> = (0..x.len()).collect();
        order.shuffle(&mut rng);
        let n_val = if x.len() >= 10 { ((x.len() as f64) * params.validation_fraction).round() as usize } else { 0 };
        let (val_idx, train_idx) = order.split_at(n_val);
        let val_x: Vec<&[f64]> = val_idx.iter().map(|&i| x[i].as_slice()).collect();
        let val_y: Vec<&[f64]> = val_idx.iter().map(|&i| y[i].as_slice()).collect();
        let mut train_idx = train_idx.to_vec();

        let mut opt = [Adam::new(net.w1.len()), Adam::new(net.b1.len()), Adam::new(net.w2.len()), Adam::new(net.b2.len())];
        let (mut best, mut best_loss, mut stale) = (net.clone(), f64::INFINITY, 0usize);
        let mut t = 0i32;
        let mut g1 = vec![0.0; net.w1.len()];
        for _epoch in 0..params.max_epochs {
            train_idx.shuffle(&mut rng);
            for batch in train_idx.chunks(params.batch_size.max(1)) {
                t += 1;
                g1.iter_mut().for_each(|g| *g = 0.0);
                let mut gb1 = vec![0.0; net.n_hidden];
                let mut g2 = vec![0.0; net.w2.len()];
                let mut gb2 = vec![0.0; net.n_out];
                let scale = 1.0 / batch.len() as f64;
                for &i in batch {
                    let pre = net.hidden_pre(&x[i]);
                    let h: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
                    let p = net.output(&h);
                    let dz2: Vec<f64> = p.iter().zip(&y[i]).map(|(pk, yk)| (pk - yk) * scale).collect();
                    for (j, &hj) in h.iter().enumerate() {
                        if hj != 0.0 {
                            for k in 0..net.n_out {
                                g2[j * net.n_out + k] += hj * dz2[k];
                            }
                        }
                    }
                    for k in 0..net.n_out {
                        gb2[k] += dz2[k];
                    }
                    let mut dz1 = vec![0.0; net.n_hidden];
                    for j in 0..net.n_hidden {
                        if pre[j] > 0.0 {
                            let row = &net.w2[j * net.n_out..(j + 1) * net.n_out];
                            dz1[j] = row.iter().zip(&dz2).map(|(w, d)| w * d).sum();
                        }
                    }
                    for j in 0..net.n_hidden {
                        gb1[j] += dz1[j];
                    }
                    for (a, &xa) in x[i].iter().enumerate() {
                        if xa != 0.0 {
                            let row = &mut g1[a * net.n_hidden..(a + 1) * net.n_hidden];
                            for (g, d) in row.iter_mut().zip(&dz1) {
                                *g += xa * d;
                            }
                        }
                    }
                }
                let lr = params.learning_rate;
                opt[0].step(&mut net.w1, &g1, lr, t);
                opt[1].step(&mut net.b1, &gb1, lr, t);
                opt[2].step(&mut net.w2, &g2, lr, t);
                opt[3].step(&mut net.b2, &gb2, lr, t);
            }
            if val_x.is_empty() {
                continue;
            }
            let l = net.loss(&val_x, &val_y);
            if l < best_loss - 1e-12 {
                best_loss = l;
                best = net.clone();
                stale = 0;
            } else {
                stale += 1;
                if stale >= params.patience {
                    break;
                }
            }
        }
        if val_x.is_empty() {
            net
        } else {
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            x.push(vec![a, b, 1.0]);
            y.push(vec![a, b]);
        }
        (x, y)
    }

    #[test]
    fn learns_independent_outputs() {
        let (x, y) = toy();
        let p = MlpParams { hidden: 16, learning_rate: 0.01, max_epochs: 200, patience: 20, ..Default::default() };
        let net = Mlp::train(&x, &y, &p, 4);
        for (xi, yi) in x.iter().zip(&y).take(8) {
            let out = net.predict(xi);
            for (o, t) in out.iter().zip(yi) {
                assert_eq!(*o >= 0.5, *t == 1.0, "{xi:?} -> {out:?}");
            }
        }
    }

    #[test]
    fn deterministic_and_finite() {
        let (x, y) = toy();
        let p = MlpParams { hidden: 8, max_epochs: 5, ..Default::default() };
        let a = Mlp::train(&x, &y, &p, 1);
        assert_eq!(a, Mlp::train(&x, &y, &p, 1));
        assert!(a.w1.iter().chain(&a.w2).all(|w| w.is_finite()));
        assert_eq!(a.predict(&[0.0, 0.0, 0.0]), a.predict(&[0.0, 0.0, 0.0]));
    }
}
