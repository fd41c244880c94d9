//! Gaussian naive Bayes.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Index 0 is benign, 1 is spam.
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Added to every variance, relative to the largest feature variance.
    pub const VAR_SMOOTHING: f64 = 1e-9;

    pub fn fit(x: &[Vec<f64>], y: &[bool]) -> Self {
        let dim = x[0].len();
        let mut count = [0usize; 2];
        let mut means = [vec![0.0; dim], vec![0.0; dim]];
        for (row, &label) in x.iter().zip(y) {
            let c = usize::from(label);
            count[c] += 1;
            for (m, v) in means[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        let mut variances = [vec![0.0; dim], vec![0.0; dim]];
        for (row, &label) in x.iter().zip(y) {
            let c = usize::from(label);
            for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            variances[c].iter_mut().for_each(|s| *s /= count[c] as f64);
        }

        // Largest variance over the pooled data.
        let n = x.len() as f64;
        let max_var = (0..dim)
            .map(|j| {
                let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
                x.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let eps = Self::VAR_SMOOTHING * if max_var > 0.0 { max_var } else { 1.0 };
        for v in variances.iter_mut().flatten() {
            *v += eps;
        }
        GaussianNb {
            log_prior: [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()],
            means,
            variances,
        }
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn log_likelihood(&self, c: usize, j: usize, v: f64) -> f64 {
        let var = self.variances[c][j];
        let d = v - self.means[c][j];
        -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
    }

    /// `log P(spam | x) - log P(benign | x)`, summed feature by feature so
    /// that features with identical class statistics contribute exactly 0.
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        let mut s = self.log_prior[1] - self.log_prior[0];
        for (j, &v) in x.iter().enumerate() {
            s += self.log_likelihood(1, j, v) - self.log_likelihood(0, j, v);
        }
        s
    }

    /// Posterior probability of spam.
    pub fn spam_probability(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.log_odds(x)).exp())
    }
}
