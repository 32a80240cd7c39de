//! Seeded demand scenario generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{mean_of, variance_of, DemandModel, LocationDecision};

/// Demand realizations `demands[w][j]` with probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSet {
    pub demands: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
    pub seed: u64,
    pub generator: String,
}

impl ScenarioSet {
    /// Equally likely scenarios.
    pub fn uniform(
        demands: Vec<Vec<f64>>,
        seed: u64,
        generator: impl Into<String>,
    ) -> Result<Self> {
        let n = demands.len();
        Self::new(demands, vec![1.0 / n as f64; n], seed, generator)
    }

    pub fn new(
        demands: Vec<Vec<f64>>,
        probabilities: Vec<f64>,
        seed: u64,
        generator: impl Into<String>,
    ) -> Result<Self> {
        if demands.is_empty() {
            return Err(Error::InvalidParameter(
                "scenario set needs at least one scenario".into(),
            ));
        }
        if probabilities.len() != demands.len() {
            return Err(Error::Dimension(
                "one probability per scenario required".into(),
            ));
        }
        let width = demands[0].len();
        if demands.iter().any(|d| d.len() != width) {
            return Err(Error::Dimension(
                "scenarios must cover the same customers".into(),
            ));
        }
        if let Some(bad) = demands.iter().flatten().find(|d| !(**d >= 0.0)) {
            return Err(Error::NegativeDemand(*bad));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(ScenarioSet {
            demands,
            probabilities,
            seed,
            generator: generator.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn num_customers(&self) -> usize {
        self.demands[0].len()
    }
}

fn moments(model: &DemandModel, y: &LocationDecision) -> Result<(Vec<f64>, Vec<f64>)> {
    let nj = model.num_customers();
    let mut mu = Vec::with_capacity(nj);
    let mut sd = Vec::with_capacity(nj);
    for j in 0..nj {
        mu.push(mean_of(model, y, j)?);
        sd.push(variance_of(model, y, j)?.max(0.0).sqrt());
    }
    Ok((mu, sd))
}

fn normal(mu: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mu, sd).map_err(|e| Error::InvalidParameter(format!("normal({mu}, {sd}): {e}")))
}

fn normal_draws(rng: &mut ChaCha8Rng, mu: &[f64], sd: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
    let dists: Vec<Normal<f64>> = mu
        .iter()
        .zip(sd)
        .map(|(m, s)| normal(*m, *s))
        .collect::<Result<_>>()?;
    Ok((0..n)
        .map(|_| dists.iter().map(|d| d.sample(rng).max(0.0)).collect())
        .collect())
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "scenario count must be positive".into(),
        ))
    } else {
        Ok(())
    }
}

/// Normal demand with the plan's moments, clamped at zero.
pub fn gen_normal(
    model: &DemandModel,
    y_hat: &LocationDecision,
    n: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    check_count(n)?;
    let (mu, sd) = moments(model, y_hat)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScenarioSet::uniform(normal_draws(&mut rng, &mu, &sd, n)?, seed, "normal")
}

/// Normal demand with the empirical moments (no plan effect).
pub fn gen_training(model: &DemandModel, n: usize, seed: u64) -> Result<ScenarioSet> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demands = normal_draws(&mut rng, &model.bar_mu, &model.bar_sigma, n)?;
    ScenarioSet::uniform(demands, seed, "training-normal")
}

/// Gamma demand with scale `sigma^2 / mu` and shape `mu / scale`.
pub fn gen_gamma(
    model: &DemandModel,
    y_hat: &LocationDecision,
    n: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    check_count(n)?;
    let (mu, sd) = moments(model, y_hat)?;
    let dists: Vec<Option<Gamma<f64>>> = mu
        .iter()
        .zip(&sd)
        .map(|(m, s)| {
            let (shape, scale) = gamma_params(*m, s * s);
            if shape > 0.0 && scale > 0.0 {
                Gamma::new(shape, scale)
                    .map(Some)
                    .map_err(|e| Error::InvalidParameter(format!("gamma({shape}, {scale}): {e}")))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demands = (0..n)
        .map(|_| {
            dists
                .iter()
                .zip(&mu)
                .map(|(d, m)| match d {
                    Some(g) => g.sample(&mut rng),
                    None => m.max(0.0),
                })
                .collect()
        })
        .collect();
    ScenarioSet::uniform(demands, seed, "gamma")
}

/// `(shape, scale)` matching mean `mu` and variance `var`.
pub fn gamma_params(mu: f64, var: f64) -> (f64, f64) {
    if mu <= 0.0 || var <= 0.0 {
        return (0.0, 0.0);
    }
    let scale = var / mu;
    (mu / scale, scale)
}

/// Per-repetition parameters drawn by [`gen_perturbed`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedRep {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

fn uniform_between(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Moment-perturbed Normal demand: each repetition draws a mean from
/// `mu (1 +/- eps_mu / bar_mu)` and a standard deviation from
/// `[eps_lo sigma, eps_hi sigma]`, then `per_rep` Normal scenarios.
/// Parameter draws use a separate stream, so with zero radii the output equals
/// [`gen_normal`] with `reps * per_rep` scenarios and the same seed.
pub fn gen_perturbed(
    model: &DemandModel,
    y_hat: &LocationDecision,
    reps: usize,
    per_rep: usize,
    seed: u64,
) -> Result<(ScenarioSet, Vec<PerturbedRep>)> {
    check_count(reps)?;
    check_count(per_rep)?;
    let (mu, sd) = moments(model, y_hat)?;
    let mut params = ChaCha8Rng::seed_from_u64(seed);
    params.set_stream(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demands = Vec::with_capacity(reps * per_rep);
    let mut drawn = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut rep = PerturbedRep {
            mean: Vec::with_capacity(mu.len()),
            std: Vec::with_capacity(mu.len()),
        };
        for j in 0..mu.len() {
            let rel = if model.bar_mu[j] > 0.0 {
                model.eps_mu[j] / model.bar_mu[j]
            } else {
                0.0
            };
            rep.mean.push(uniform_between(
                &mut params,
                mu[j] * (1.0 - rel),
                mu[j] * (1.0 + rel),
            ));
            rep.std.push(uniform_between(
                &mut params,
                sd[j] * model.eps_sigma_lo[j],
                sd[j] * model.eps_sigma_hi[j],
            ));
        }
        demands.extend(normal_draws(&mut rng, &rep.mean, &rep.std, per_rep)?);
        drawn.push(rep);
    }
    Ok((ScenarioSet::uniform(demands, seed, "perturbed")?, drawn))
}
