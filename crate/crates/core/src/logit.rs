//! Paired-comparison logistic regression.
//!
//! The model scores an ordered pair `(i, j)` with logit
//! `θ[i] − θ[j] + αᵀg` where `g` is an optional per-observation feature
//! vector. The objective is the weighted cross-entropy plus `(λ/2)‖[θ; α]‖²`,
//! minimized by damped Newton steps with a backtracking line search. The
//! damping keeps the solve well-posed along the gauge direction (adding a
//! constant to θ) and along any feature direction that duplicates θ.

use nalgebra::{DMatrix, DVector};

use crate::data::GameRecord;
use crate::error::{Error, Result};
use crate::math::{logit_cross_entropy, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub i: usize,
    pub j: usize,
    pub o: f64,
    pub weight: f64,
}

impl From<&GameRecord> for Observation {
    fn from(g: &GameRecord) -> Self {
        Observation {
            i: g.i,
            j: g.j,
            o: g.o,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            grad_tol: 1e-8,
            max_iter: 300,
        }
    }
}

/// A fitting problem. Features, when present, are stored row-major with
/// `n_features` entries per observation.
#[derive(Debug, Clone)]
pub struct PairLogit<'a> {
    pub n_players: usize,
    pub obs: &'a [Observation],
    pub features: Option<&'a [f64]>,
    pub n_features: usize,
    pub lambda: f64,
    /// Player whose score is held at 0.
    pub pinned: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairLogitFit {
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Unpenalized negative log-likelihood at the optimum.
    pub loss: f64,
    /// Penalized objective at the optimum.
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

impl<'a> PairLogit<'a> {
    pub fn new(n_players: usize, obs: &'a [Observation]) -> Self {
        PairLogit {
            n_players,
            obs,
            features: None,
            n_features: 0,
            lambda: 0.0,
            pinned: None,
        }
    }

    pub fn with_features(mut self, features: &'a [f64], n_features: usize) -> Self {
        assert_eq!(features.len(), self.obs.len() * n_features, "feature matrix shape");
        self.features = Some(features);
        self.n_features = n_features;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_pinned(mut self, pinned: Option<usize>) -> Self {
        self.pinned = pinned;
        self
    }

    fn dim(&self) -> usize {
        self.n_players + self.n_features
    }

    fn feature_row(&self, k: usize) -> &[f64] {
        match self.features {
            Some(f) => &f[k * self.n_features..(k + 1) * self.n_features],
            None => &[],
        }
    }

    fn logit(&self, x: &[f64], k: usize) -> f64 {
        let ob = &self.obs[k];
        let mut z = x[ob.i] - x[ob.j];
        for (a, g) in x[self.n_players..].iter().zip(self.feature_row(k)) {
            z += a * g;
        }
        z
    }

    /// Unpenalized negative log-likelihood.
    pub fn loss(&self, x: &[f64]) -> f64 {
        (0..self.obs.len())
            .map(|k| self.obs[k].weight * logit_cross_entropy(self.obs[k].o, self.logit(x, k)))
            .sum()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let ridge: f64 = x.iter().map(|v| v * v).sum();
        self.loss(x) + 0.5 * self.lambda * ridge
    }

    /// Gradient of the penalized objective, pinned coordinate zeroed.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_players;
        let mut g: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        for k in 0..self.obs.len() {
            let ob = &self.obs[k];
            let r = ob.weight * (sigmoid(self.logit(x, k)) - ob.o);
            g[ob.i] += r;
            g[ob.j] -= r;
            for (m, f) in self.feature_row(k).iter().enumerate() {
                g[n + m] += r * f;
            }
        }
        if let Some(p) = self.pinned {
            g[p] = 0.0;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n_players;
        let d = self.dim();
        let mut h = DMatrix::<f64>::zeros(d, d);
        for k in 0..self.obs.len() {
            let ob = &self.obs[k];
            let s = sigmoid(self.logit(x, k));
            let w = ob.weight * s * (1.0 - s);
            let (i, j) = (ob.i, ob.j);
            h[(i, i)] += w;
            h[(j, j)] += w;
            h[(i, j)] -= w;
            h[(j, i)] -= w;
            let row = self.feature_row(k);
            for (a, fa) in row.iter().enumerate() {
                let wa = w * fa;
                h[(i, n + a)] += wa;
                h[(n + a, i)] += wa;
                h[(j, n + a)] -= wa;
                h[(n + a, j)] -= wa;
                for (b, fb) in row.iter().enumerate() {
                    h[(n + a, n + b)] += wa * fb;
                }
            }
        }
        for q in 0..d {
            h[(q, q)] += self.lambda;
        }
        if let Some(p) = self.pinned {
            for q in 0..d {
                h[(p, q)] = 0.0;
                h[(q, p)] = 0.0;
            }
            h[(p, p)] = 1.0;
        }
        h
    }

    /// Minimizes the penalized objective from zero.
    pub fn fit(&self, opts: NewtonOptions) -> Result<PairLogitFit> {
        self.fit_from(&vec![0.0; self.dim()], opts)
    }

    pub fn fit_from(&self, init: &[f64], opts: NewtonOptions) -> Result<PairLogitFit> {
        let d = self.dim();
        assert_eq!(init.len(), d);
        if let Some(p) = self.pinned {
            if p >= self.n_players {
                return Err(Error::invalid(format!("pinned player {p} out of range")));
            }
        }
        let mut x = init.to_vec();
        if let Some(p) = self.pinned {
            x[p] = 0.0;
        }
        let mut f = self.objective(&x);
        let mut iterations = 0;
        loop {
            let g = self.gradient(&x);
            let gnorm = norm(&g);
            if gnorm <= opts.grad_tol {
                return Ok(self.finish(x, gnorm, iterations));
            }
            if iterations >= opts.max_iter {
                return Err(Error::NoConvergence {
                    iterations,
                    grad_norm: gnorm,
                });
            }
            iterations += 1;

            let step = newton_direction(self.hessian(&x), &g)?;
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let ft = self.objective(&trial);
                // second clause: decrease lost in rounding near the optimum
                if ft <= f + 1e-4 * t * slope || (ft - f).abs() <= 1e-13 * (1.0 + f.abs()) {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence {
                    iterations,
                    grad_norm: gnorm,
                });
            }
        }
    }

    fn finish(&self, x: Vec<f64>, grad_norm: f64, iterations: usize) -> PairLogitFit {
        let loss = self.loss(&x);
        let objective = self.objective(&x);
        let (theta, alpha) = x.split_at(self.n_players);
        PairLogitFit {
            theta: theta.to_vec(),
            alpha: alpha.to_vec(),
            loss,
            objective,
            grad_norm,
            iterations,
        }
    }
}

fn newton_direction(h: DMatrix<f64>, g: &[f64]) -> Result<Vec<f64>> {
    let d = g.len();
    let max_diag = (0..d).map(|q| h[(q, q)].abs()).fold(1.0, f64::max);
    let rhs = DVector::from_iterator(d, g.iter().map(|v| -v));
    let mut mu = 1e-12 * max_diag;
    for _ in 0..12 {
        let mut damped = h.clone();
        for q in 0..d {
            damped[(q, q)] += mu;
        }
        if let Some(chol) = damped.cholesky() {
            let sol = chol.solve(&rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return Ok(sol.iter().copied().collect());
            }
        }
        mu *= 100.0;
    }
    Err(Error::Numerical("Hessian could not be factored".into()))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Connected components of the graph on `0..n` with the given edges, each
/// sorted, ordered by smallest member.
pub fn connected_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for x in 0..n {
        let r = find(&mut parent, x);
        groups.entry(r).or_default().push(x);
    }
    groups.into_values().collect()
}
