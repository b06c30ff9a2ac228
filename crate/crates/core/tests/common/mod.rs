//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use mamab::sim::{EpisodeSeeds, RewardStream, StepReport};
use mamab::{AgentId, ArmId, BanditInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Single-agent UCB written from scratch: its own counters, its own index
/// arithmetic. Shares only the environment (reward realizations) and the
/// agent's tie-break stream with the engine.
pub struct SingleAgentUcb {
    pub choices: Vec<usize>,
    pub cumulative_regret: Vec<f64>,
}

pub fn single_agent_ucb(
    inst: &BanditInstance,
    num_agents_for_sigma: usize,
    xi: f64,
    inflation: f64,
    seeds: &EpisodeSeeds,
    agent: usize,
    horizon: u64,
) -> SingleAgentUcb {
    let n_arms = inst.num_arms();
    let means = inst.means();
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sigma: Vec<f64> = inst
        .variance_proxies()
        .iter()
        .map(|v| (num_agents_for_sigma as f64).sqrt() * v.sqrt())
        .collect();
    let rewards = RewardStream::new(seeds.rewards);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.tie_breaks[agent]);

    let mut count = vec![0u64; n_arms];
    let mut sum = vec![0.0f64; n_arms];
    let mut choices = Vec::new();
    let mut cumulative_regret = Vec::new();
    let mut regret = 0.0;

    for t in 1..=horizon {
        let unseen: Vec<usize> = (0..n_arms).filter(|&i| count[i] == 0).collect();
        let candidates = if !unseen.is_empty() {
            unseen
        } else {
            let s = (t - 1).max(1);
            let ln_s = (s as f64).ln();
            let q: Vec<f64> = (0..n_arms)
                .map(|i| {
                    let n = count[i] as f64;
                    sum[i] / n + sigma[i] * (2.0 * (xi + 1.0) * ((n + inflation) / n) * (ln_s / n)).sqrt()
                })
                .collect();
            let top = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (0..n_arms).filter(|&i| q[i] == top).collect()
        };
        let pick = if candidates.len() == 1 {
            candidates[0]
        } else {
            candidates[rng.random_range(0..candidates.len())]
        };
        let x = rewards.realization(inst, ArmId::from_index(pick), t);
        count[pick] += 1;
        sum[pick] += x;
        regret += best - means[pick];
        choices.push(pick);
        cumulative_regret.push(regret);
    }
    SingleAgentUcb {
        choices,
        cumulative_regret,
    }
}

/// Beliefs rebuilt from recorded rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedBeliefs {
    pub obs_counts: Vec<u64>,
    pub obs_sums: Vec<f64>,
    pub pulls: Vec<u64>,
}

pub fn replay(rounds: &[StepReport], num_agents: usize, num_arms: usize) -> Vec<ReplayedBeliefs> {
    let mut out = vec![
        ReplayedBeliefs {
            obs_counts: vec![0; num_arms],
            obs_sums: vec![0.0; num_arms],
            pulls: vec![0; num_arms],
        };
        num_agents
    ];
    for r in rounds {
        let o = &r.outcome;
        for (k, b) in out.iter_mut().enumerate() {
            for (j, arm) in o.choices.iter().enumerate() {
                if o.masks.get(AgentId::from_index(k), AgentId::from_index(j)) {
                    b.obs_counts[arm.index()] += 1;
                    b.obs_sums[arm.index()] += o.rewards[arm.index()].unwrap();
                }
                if j == k {
                    b.pulls[arm.index()] += 1;
                }
            }
        }
    }
    out
}

pub fn paper_instance() -> BanditInstance {
    BanditInstance::with_common_variance(vec![40., 50., 50., 60., 70., 70., 80., 90., 92., 95.], 25.0).unwrap()
}

pub fn agent(n: usize) -> AgentId {
    AgentId::from_number(n).unwrap()
}
