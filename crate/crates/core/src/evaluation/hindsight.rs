//! Best fixed models in hindsight.

use rand::Rng as _;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::logit::{NewtonOptions, Observation, PairLogit};
use crate::math::{logit_cross_entropy, sigmoid};
use crate::rng::{self, streams};

#[derive(Debug, Clone, PartialEq)]
pub struct HindsightBt {
    /// Scores centered to sum to zero when `λ = 0`.
    pub theta: Vec<f64>,
    /// Unpenalized summed cross-entropy at the optimum.
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Minimizes `Σ f_t(θ) + (λ/2)‖θ‖²` over BT scores.
pub fn hindsight_bt(d: &Dataset, lambda: f64) -> Result<HindsightBt> {
    if d.is_empty() {
        return Err(Error::invalid("hindsight fit needs at least one game"));
    }
    let obs: Vec<Observation> = d.games.iter().map(Observation::from).collect();
    let fit = PairLogit::new(d.n_players, &obs)
        .with_lambda(lambda)
        .fit(NewtonOptions::default())?;
    let mut theta = fit.theta;
    if lambda == 0.0 && !theta.is_empty() {
        let mean = theta.iter().sum::<f64>() / theta.len() as f64;
        theta.iter_mut().for_each(|x| *x -= mean);
    }
    Ok(HindsightBt {
        theta,
        loss: fit.loss,
        grad_norm: fit.grad_norm,
        iterations: fit.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elo2kOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the gradient of the mean loss is this small.
    pub grad_tol: f64,
    /// Stop when an accepted step improves the mean loss by less than this.
    pub min_improvement: f64,
}

impl Default for Elo2kOptions {
    fn default() -> Self {
        Elo2kOptions {
            restarts: 5,
            max_iter: 100_000,
            grad_tol: 1e-6,
            min_improvement: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindsightElo2k {
    pub k: usize,
    /// Row-major `N × k`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Summed cross-entropy of the best solution.
    pub loss: f64,
    /// Final summed loss of every start, random starts first.
    pub start_losses: Vec<f64>,
}

struct Elo2kProblem<'a> {
    d: &'a Dataset,
    k: usize,
}

impl Elo2kProblem<'_> {
    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64]) {
        x.split_at(self.d.n_players * self.k)
    }

    fn logit(&self, u: &[f64], v: &[f64], i: usize, j: usize) -> f64 {
        let k = self.k;
        let (ui, uj) = (&u[i * k..(i + 1) * k], &u[j * k..(j + 1) * k]);
        let (vi, vj) = (&v[i * k..(i + 1) * k], &v[j * k..(j + 1) * k]);
        (0..k).map(|c| ui[c] * vj[c] - uj[c] * vi[c]).sum()
    }

    fn mean_loss(&self, x: &[f64]) -> f64 {
        let (u, v) = self.split(x);
        let s: f64 = self
            .d
            .games
            .iter()
            .map(|g| logit_cross_entropy(g.o, self.logit(u, v, g.i, g.j)))
            .sum();
        s / self.d.len() as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k;
        let off = self.d.n_players * k;
        let (u, v) = self.split(x);
        let mut grad = vec![0.0; x.len()];
        let scale = 1.0 / self.d.len() as f64;
        for g in &self.d.games {
            let r = -(g.o - sigmoid(self.logit(u, v, g.i, g.j))) * scale;
            for c in 0..k {
                let (ui, uj, vi, vj) = (u[g.i * k + c], u[g.j * k + c], v[g.i * k + c], v[g.j * k + c]);
                grad[g.i * k + c] += r * vj;
                grad[g.j * k + c] -= r * vi;
                grad[off + g.j * k + c] += r * ui;
                grad[off + g.i * k + c] -= r * uj;
            }
        }
        grad
    }

    /// Gradient descent with an Armijo backtracking step.
    fn descend(&self, mut x: Vec<f64>, opts: &Elo2kOptions) -> (Vec<f64>, f64) {
        let mut f = self.mean_loss(&x);
        let mut step = 1.0;
        for _ in 0..opts.max_iter {
            let g = self.gradient(&x);
            let gn2: f64 = g.iter().map(|a| a * a).sum();
            if gn2.sqrt() <= opts.grad_tol {
                break;
            }
            let mut accepted = None;
            while step > 1e-12 {
                let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                let fc = self.mean_loss(&cand);
                if fc <= f - 1e-4 * step * gn2 {
                    accepted = Some((cand, fc));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, fc)) = accepted else { break };
            let improvement = f - fc;
            x = cand;
            f = fc;
            if improvement < opts.min_improvement {
                break;
            }
            step *= 2.0;
        }
        (x, f)
    }
}

/// Best local optimum of the rank-`k` model over `restarts` random starts
/// (entries uniform on `[0, 0.1]`) plus, when given, a start that
/// reproduces the BT scores `warm_start`. The loss surface is non-convex, so
/// the result is an upper bound on the class optimum.
pub fn hindsight_elo2k(
    d: &Dataset,
    k: usize,
    seed: u64,
    warm_start: Option<&[f64]>,
    opts: Elo2kOptions,
) -> Result<HindsightElo2k> {
    if d.is_empty() {
        return Err(Error::invalid("hindsight fit needs at least one game"));
    }
    if k == 0 {
        return Err(Error::invalid("elo2k dimension must be at least 1"));
    }
    let n = d.n_players;
    let dim = 2 * n * k;
    let mut starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|r| {
            let mut rng = rng::stream(seed, streams::RESTARTS + streams::REPLICATE_BASE * r as u64);
            (0..dim).map(|_| rng.random_range(0.0..0.1)).collect()
        })
        .collect();
    if let Some(theta) = warm_start {
        if theta.len() != n {
            return Err(Error::invalid("warm start has the wrong number of players"));
        }
        let mut x = vec![0.0; dim];
        for p in 0..n {
            x[p * k] = theta[p];
            x[n * k + p * k] = 1.0;
        }
        starts.push(x);
    }
    if starts.is_empty() {
        return Err(Error::invalid("no starting points"));
    }
    let problem = Elo2kProblem { d, k };
    let results: Vec<(Vec<f64>, f64)> = starts.into_par_iter().map(|x| problem.descend(x, &opts)).collect();
    let t = d.len() as f64;
    let start_losses: Vec<f64> = results.iter().map(|r| r.1 * t).collect();
    let best = (0..results.len())
        .min_by(|&a, &b| results[a].1.total_cmp(&results[b].1))
        .expect("non-empty");
    let (x, f) = &results[best];
    let (u, v) = x.split_at(n * k);
    Ok(HindsightElo2k {
        k,
        u: u.to_vec(),
        v: v.to_vec(),
        loss: f * t,
        start_losses,
    })
}
