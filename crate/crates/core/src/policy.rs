//! The UCB sampling rule with an inflated exploration bonus.
//!
//! Agent `k` picks the arm maximizing
//!
//! ```text
//! Q_i(t) = mu_hat_i(t) + sigma_i * sqrt( 2 (xi + 1) * (N_i + f(t)) / N_i * ln t / N_i )
//! ```
//!
//! where `N_i` counts every reward of arm `i` the agent has seen (its own and
//! its neighbors'), `sigma_i = sqrt(K) * sigma'_i` and `f` is a nonnegative,
//! nondecreasing, sublogarithmic inflation function. Arms with `N_i = 0`
//! have no index and are pulled first.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AgentBeliefs, ArmId};

/// The inflation function `f(t)` inside the exploration bonus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inflation {
    Zero,
    Constant(f64),
    /// `max(0, ln ln t)`, zero for `t <= 2`.
    LogLog,
}

impl Inflation {
    pub fn value(&self, t: u64) -> f64 {
        match *self {
            Inflation::Zero => 0.0,
            Inflation::Constant(c) => c,
            Inflation::LogLog => {
                if t <= 2 {
                    0.0
                } else {
                    (t as f64).ln().ln().max(0.0)
                }
            }
        }
    }
}

/// Per-agent sampling-rule parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyConfig {
    xi: f64,
    inflation: Inflation,
    num_agents: usize,
}

impl PolicyConfig {
    pub fn new(xi: f64, inflation: Inflation, num_agents: usize) -> Result<Self> {
        if !(xi > 1.0 && xi.is_finite()) {
            return Err(Error::InvalidXi(xi));
        }
        if let Inflation::Constant(c) = inflation {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidInflation(c));
            }
        }
        if num_agents == 0 {
            return Err(Error::NoAgents);
        }
        Ok(Self {
            xi,
            inflation,
            num_agents,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn inflation(&self) -> Inflation {
        self.inflation
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn inflation_value(&self, t: u64) -> f64 {
        self.inflation.value(t)
    }

    /// `sigma_i = sqrt(K) * sigma'_i`.
    pub fn sigma(&self, sigma_prime: f64) -> f64 {
        (self.num_agents as f64).sqrt() * sigma_prime
    }
}

/// Exploration bonus `C_i(t)`. `None` when `n_obs == 0` or `t == 0`: the
/// index is undefined there and the caller must take the cold-start path.
pub fn exploration_bonus(sigma: f64, xi: f64, n_obs: u64, f_t: f64, t: u64) -> Option<f64> {
    if n_obs == 0 || t == 0 {
        return None;
    }
    Some(bonus_at_log_time(sigma, xi, n_obs, f_t, (t as f64).ln()))
}

/// The bonus with `ln t` supplied directly; `n_obs` must be positive.
pub fn bonus_at_log_time(sigma: f64, xi: f64, n_obs: u64, f_t: f64, ln_t: f64) -> f64 {
    let n = n_obs as f64;
    sigma * (2.0 * (xi + 1.0) * ((n + f_t) / n) * (ln_t / n)).sqrt()
}

pub fn ucb_index(mean_est: f64, bonus: f64) -> f64 {
    mean_est + bonus
}

/// Chooses the arm for round `t + 1` from the statistics after round `t`.
///
/// Unseen arms are forced first, uniformly at random. Otherwise the arm with
/// the largest index wins and exact ties are broken uniformly at random.
/// `rng` is only consumed when more than one candidate remains.
pub fn select_arm<R: Rng + ?Sized>(
    beliefs: &AgentBeliefs,
    cfg: &PolicyConfig,
    sigma_primes: &[f64],
    t: u64,
    rng: &mut R,
) -> ArmId {
    debug_assert_eq!(sigma_primes.len(), beliefs.num_arms());
    let mut candidates: Vec<usize> = (0..beliefs.num_arms())
        .filter(|&i| beliefs.obs_count(ArmId::from_index(i)) == 0)
        .collect();

    if candidates.is_empty() {
        let t = t.max(1);
        let f_t = cfg.inflation_value(t);
        let mut best = f64::NEG_INFINITY;
        for (i, &sp) in sigma_primes.iter().enumerate() {
            let arm = ArmId::from_index(i);
            let mean = beliefs.empirical_mean(arm).expect("observed arm");
            let bonus = exploration_bonus(cfg.sigma(sp), cfg.xi, beliefs.obs_count(arm), f_t, t).expect("observed arm");
            let q = ucb_index(mean, bonus);
            if q > best {
                best = q;
                candidates.clear();
                candidates.push(i);
            } else if q == best {
                candidates.push(i);
            }
        }
    }

    let pick = match candidates.len() {
        1 => candidates[0],
        n => candidates[rng.random_range(0..n)],
    };
    ArmId::from_index(pick)
}
