//! Linear SVM trained by stochastic subgradient descent on the hinge loss.

use rand::seq::SliceRandom;

use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub const EPOCHS: usize = 100;
    pub const LAMBDA: f64 = 1e-4;
    pub const ETA0: f64 = 0.5;

    /// `y = true` maps to `+1`. Features are used as given, unscaled.
    pub fn fit(x: &[Vec<f64>], y: &[bool], seed: u64) -> Self {
        let dim = x[0].len();
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = seed::rng(seed, &[0x5f5]);
        let mut t = 0.0f64;
        for _ in 0..Self::EPOCHS {
            order.shuffle(&mut rng);
            for &i in &order {
                let eta = Self::ETA0 / (1.0 + Self::LAMBDA * Self::ETA0 * t);
                t += 1.0;
                let target = if y[i] { 1.0 } else { -1.0 };
                let margin = target * (dot(&w, &x[i]) + b);
                let shrink = 1.0 - eta * Self::LAMBDA;
                w.iter_mut().for_each(|wj| *wj *= shrink);
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(&x[i]) {
                        *wj += eta * target * xj;
                    }
                    b += eta * target;
                }
            }
        }
        LinearSvm {
            weights: w,
            bias: b,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
