use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::encode::Standardizer;
use crate::data::Dataset;
use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 1000;

/// Multinomial logistic regression on standardised features. The loss is
/// `Σ_i −log p(t_i | x_i) + ½·l2·‖W‖²` with unpenalised intercepts (the
/// `C = 1/l2` convention).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub groups: Vec<String>,
    pub encoder: Standardizer,
    /// `groups × (dim + 1)`; the last entry of each row is the intercept.
    pub weights: Vec<Vec<f64>>,
    pub l2: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit (e.g. near-separable data).
    pub converged: bool,
}

fn softmax(z: &mut [f64]) {
    let mx = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - mx).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u32],
    g: usize,
    p: usize,
    l2: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.g * (self.p + 1)
    }

    fn scores(&self, w: &[f64], x: &[f64], out: &mut [f64]) {
        for (t, o) in out.iter_mut().enumerate() {
            let row = &w[t * (self.p + 1)..(t + 1) * (self.p + 1)];
            *o = row[self.p] + row[..self.p].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Mean loss (the total divided by m, same minimiser).
    fn loss(&self, w: &[f64]) -> f64 {
        let m = self.x.len() as f64;
        let mut z = vec![0.0; self.g];
        let mut f = 0.0;
        for (x, &y) in self.x.iter().zip(self.y) {
            self.scores(w, x, &mut z);
            let mx = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + z.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
            f += lse - z[y as usize];
        }
        f / m + 0.5 * self.l2 / m * self.penalised(w).map(|v| v * v).sum::<f64>()
    }

    fn penalised<'w>(&self, w: &'w [f64]) -> impl Iterator<Item = &'w f64> + 'w {
        let p = self.p;
        w.iter().enumerate().filter(move |(i, _)| i % (p + 1) != p).map(|(_, v)| v)
    }

    fn grad_hess(&self, w: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (g, p, d) = (self.g, self.p, self.dim());
        let m = self.x.len() as f64;
        let mut grad = DVector::zeros(d);
        let mut hess = DMatrix::zeros(d, d);
        let mut pr = vec![0.0; g];
        let mut xe = vec![1.0; p + 1];
        for (x, &y) in self.x.iter().zip(self.y) {
            self.scores(w, x, &mut pr);
            softmax(&mut pr);
            xe[..p].copy_from_slice(x);
            for t in 0..g {
                let r = pr[t] - f64::from(u8::from(t == y as usize));
                for j in 0..=p {
                    grad[t * (p + 1) + j] += r * xe[j];
                }
                for u in t..g {
                    let c = if t == u { pr[t] * (1.0 - pr[t]) } else { -pr[t] * pr[u] };
                    for j in 0..=p {
                        let cj = c * xe[j];
                        for l in 0..=p {
                            hess[(t * (p + 1) + j, u * (p + 1) + l)] += cj * xe[l];
                        }
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        grad /= m;
        hess /= m;
        for t in 0..g {
            for j in 0..p {
                let i = t * (p + 1) + j;
                grad[i] += self.l2 / m * w[i];
                hess[(i, i)] += self.l2 / m;
            }
        }
        (grad, hess)
    }
}

impl LogisticModel {
    /// Damped Newton iterations. The intercepts are only identified up to a
    /// common shift, so a tiny ridge keeps the Newton system definite.
    pub fn fit(data: &Dataset, l2: f64) -> Result<Self> {
        let groups = super::check_groups(data)?;
        if !(l2 >= 0.0 && l2.is_finite()) {
            return Err(crate::error::invalid(format!("l2 strength must be non-negative, got {l2}")));
        }
        let encoder = Standardizer::fit(data)?;
        let x = encoder.transform(data)?;
        let codes = &data.groups().expect("checked").codes;
        let prob = Problem {
            x: &x,
            y: codes,
            g: groups.len(),
            p: encoder.dim(),
            l2,
        };
        let mut w = vec![0.0; prob.dim()];
        let mut f = prob.loss(&w);
        let mut converged = false;
        let mut iterations = 0;
        while iterations < MAX_ITER {
            let (grad, mut hess) = prob.grad_hess(&w);
            if grad.norm() <= GRAD_TOL {
                converged = true;
                break;
            }
            iterations += 1;
            let ridge = 1e-10 * (1.0 + hess.diagonal().max());
            for i in 0..prob.dim() {
                hess[(i, i)] += ridge;
            }
            let step = match hess.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => -&grad,
            };
            let slope = grad.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let trial: Vec<f64> = w.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
                let ft = prob.loss(&trial);
                if ft <= f + 1e-4 * t * slope {
                    w = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no further decrease representable
                converged = grad.norm() <= GRAD_TOL.sqrt();
                break;
            }
        }
        if !f.is_finite() {
            return Err(Error::Numerical("logistic loss diverged".into()));
        }
        if !converged {
            log::warn!("logistic regression stopped after {iterations} iterations without reaching the gradient tolerance");
        }
        let p1 = prob.p + 1;
        Ok(LogisticModel {
            groups,
            encoder,
            weights: w.chunks(p1).map(<[f64]>::to_vec).collect(),
            l2,
            iterations,
            converged,
        })
    }

    pub fn predict_proba(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let x = self.encoder.transform(data)?;
        Ok(x.iter()
            .map(|row| {
                let mut z: Vec<f64> = self
                    .weights
                    .iter()
                    .map(|w| {
                        let (coef, b) = w.split_at(w.len() - 1);
                        b[0] + coef.iter().zip(row).map(|(a, v)| a * v).sum::<f64>()
                    })
                    .collect();
                softmax(&mut z);
                z
            })
            .collect())
    }
}
