use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::logistic::sigmoid;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            max_epochs: 500,
            batch_size: 32,
            learning_rate: 1e-3,
            validation_fraction: 0.1,
            patience: 10,
            min_improvement: 1e-4,
        }
    }
}

pub const MIN_MLP_SAMPLES: usize = 20;

/// One ReLU hidden layer and a sigmoid output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// `hidden × inputs`.
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

fn bce(p: f64, y: bool) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

impl Mlp {
    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn init<R: Rng + ?Sized>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let l1 = 1.0 / (inputs.max(1) as f64).sqrt();
        let l2 = 1.0 / (hidden.max(1) as f64).sqrt();
        let w1 = Array2::from_shape_simple_fn((hidden, inputs), || rng.random_range(-l1..l1));
        let w2 = Array1::from_shape_simple_fn(hidden, || rng.random_range(-l2..l2));
        Mlp { w1, b1: Array1::zeros(hidden), w2, b2: 0.0 }
    }

    fn hidden(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut h = x.dot(&self.w1.t());
        h += &self.b1;
        h.mapv_inplace(|v| v.max(0.0));
        h
    }

    pub fn predict_rows(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let z = self.hidden(x).dot(&self.w2);
        z.iter().map(|&v| sigmoid(v + self.b2)).collect()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let x = ArrayView2::from_shape((1, row.len()), row).expect("row shape");
        self.predict_rows(x)[0]
    }

    /// Mean cross-entropy over the rows.
    pub fn loss(&self, x: ArrayView2<'_, f64>, y: &[bool]) -> f64 {
        let p = self.predict_rows(x);
        p.iter().zip(y).map(|(&p, &y)| bce(p, y)).sum::<f64>() / y.len() as f64
    }

    /// Mean cross-entropy and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, x: ArrayView2<'_, f64>, y: &[bool]) -> (f64, MlpGradient) {
        let n = y.len() as f64;
        let h = self.hidden(x);
        let z = h.dot(&self.w2);
        let mut loss = 0.0;
        let dz: Array1<f64> = z
            .iter()
            .zip(y)
            .map(|(&z, &y)| {
                let p = sigmoid(z + self.b2);
                loss += bce(p, y);
                (p - y as u8 as f64) / n
            })
            .collect();
        let gw2 = h.t().dot(&dz);
        let gb2 = dz.sum();
        let mut dh = Array2::from_shape_fn(h.dim(), |(i, j)| dz[i] * self.w2[j]);
        dh.zip_mut_with(&h, |d, &a| {
            if a <= 0.0 {
                *d = 0.0
            }
        });
        let gw1 = dh.t().dot(&x);
        let gb1 = dh.sum_axis(Axis(0));
        (loss / n, MlpGradient { w1: gw1, b1: gb1, w2: gw2, b2: gb2 })
    }
}

struct Adam {
    m: Mlp,
    v: Mlp,
    t: i32,
    lr: f64,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(shape: &Mlp, lr: f64) -> Self {
        let zero = Mlp {
            w1: Array2::zeros(shape.w1.dim()),
            b1: Array1::zeros(shape.b1.len()),
            w2: Array1::zeros(shape.w2.len()),
            b2: 0.0,
        };
        Adam { m: zero.clone(), v: zero, t: 0, lr }
    }

    fn step(&mut self, net: &mut Mlp, g: &MlpGradient) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let lr = self.lr;
        let upd = |w: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        };
        ndarray::Zip::from(&mut net.w1)
            .and(&mut self.m.w1)
            .and(&mut self.v.w1)
            .and(&g.w1)
            .for_each(|w, m, v, &g| upd(w, m, v, g));
        ndarray::Zip::from(&mut net.b1)
            .and(&mut self.m.b1)
            .and(&mut self.v.b1)
            .and(&g.b1)
            .for_each(|w, m, v, &g| upd(w, m, v, g));
        ndarray::Zip::from(&mut net.w2)
            .and(&mut self.m.w2)
            .and(&mut self.v.w2)
            .and(&g.w2)
            .for_each(|w, m, v, &g| upd(w, m, v, g));
        upd(&mut net.b2, &mut self.m.b2, &mut self.v.b2, g.b2);
    }
}

/// Adam on mini-batches with early stopping on a held-out tenth; the
/// weights with the best validation loss are returned.
pub fn fit_mlp(x: ArrayView2<'_, f64>, y: &[bool], params: &MlpParams, seed: u64) -> Result<Mlp> {
    let (n, p) = x.dim();
    if n < MIN_MLP_SAMPLES {
        return Err(Error::invalid(format!("MLP needs at least {MIN_MLP_SAMPLES} samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in MLP input"));
    }
    let mut rng = stream(seed, 0);
    let mut net = Mlp::init(p, params.hidden, &mut rng);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((n as f64 * params.validation_fraction).round() as usize).clamp(1, n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let xv = x.select(Axis(0), val_idx);
    let yv: Vec<bool> = val_idx.iter().map(|&i| y[i]).collect();
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(&net, params.learning_rate);
    let mut best = (net.loss(xv.view(), &yv), net.clone());
    let mut stale = 0;
    for _ in 0..params.max_epochs {
        train_idx.shuffle(&mut rng);
        for batch in train_idx.chunks(params.batch_size.max(1)) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<bool> = batch.iter().map(|&i| y[i]).collect();
            let (_, g) = net.loss_and_gradient(xb.view(), &yb);
            adam.step(&mut net, &g);
        }
        let val = net.loss(xv.view(), &yv);
        if !val.is_finite() {
            return Err(Error::Numerical("MLP validation loss became non-finite".into()));
        }
        if val < best.0 - params.min_improvement {
            best = (val, net.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.patience {
                break;
            }
        }
    }
    Ok(best.1)
}
