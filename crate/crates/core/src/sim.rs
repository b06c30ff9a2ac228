//! Round-by-round simulation engine and Monte Carlo aggregation.
//!
//! Every round all agents choose simultaneously from what they knew after
//! the previous round. Each pulled arm then yields a single reward shared by
//! every agent that pulled it, observation masks are drawn, and each agent
//! folds in its own pull plus every neighbor pull its mask admits.
//!
//! Randomness is split into independent streams derived from the episode
//! seed: arm rewards, observation masks and one tie-break stream per agent.
//! Rewards are counter-based (a pure function of stream seed, arm and
//! round), so how many arms get pulled never shifts any other draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AgentBeliefs, AgentId, ArmId, BanditInstance, ObservationNetwork};
use crate::policy::{select_arm, PolicyConfig};

const TAG_RUN: u64 = 0x52554e;
const TAG_REWARDS: u64 = 0x524557;
const TAG_MASKS: u64 = 0x4d534b;
const TAG_TIE_BREAK: u64 = 0x544945;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a base seed together with a path of labels into a new seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Episode seed of Monte Carlo replicate `run`.
pub fn run_seed(base_seed: u64, run: u64) -> u64 {
    derive_seed(base_seed, &[TAG_RUN, run])
}

/// The independent stream seeds of one episode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpisodeSeeds {
    pub rewards: u64,
    pub masks: u64,
    /// One per agent, in agent order.
    pub tie_breaks: Vec<u64>,
}

impl EpisodeSeeds {
    pub fn derive(seed: u64, num_agents: usize) -> Self {
        Self {
            rewards: derive_seed(seed, &[TAG_REWARDS]),
            masks: derive_seed(seed, &[TAG_MASKS]),
            tie_breaks: (0..num_agents as u64)
                .map(|k| derive_seed(seed, &[TAG_TIE_BREAK, k]))
                .collect(),
        }
    }
}

/// Counter-based Gaussian reward source: the realization of arm `i` at
/// round `t` depends only on `(seed, i, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewardStream {
    seed: u64,
}

impl RewardStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn realization(&self, inst: &BanditInstance, arm: ArmId, t: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[arm.index() as u64, t]));
        Normal::new(inst.mean(arm), inst.sigma_prime(arm))
            .expect("validated instance")
            .sample(&mut rng)
    }
}

/// One reward per distinct pulled arm, indexed by arm position; arms not
/// pulled this round are `None`.
pub fn draw_round_rewards(inst: &BanditInstance, pulled: &[ArmId], stream: &RewardStream, t: u64) -> Vec<Option<f64>> {
    let mut out = vec![None; inst.num_arms()];
    for &arm in pulled {
        if out[arm.index()].is_none() {
            out[arm.index()] = Some(stream.realization(inst, arm, t));
        }
    }
    out
}

/// Who observed whom in one round: entry `(k, j)` is true iff agent `k`
/// saw agent `j`'s pull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    num_agents: usize,
    bits: Vec<bool>,
}

impl ObservationMask {
    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn get(&self, observer: AgentId, observed: AgentId) -> bool {
        self.bits[observer.index() * self.num_agents + observed.index()]
    }
}

/// Draws one round of observation indicators. For every ordered neighbor
/// pair `(k, j)` an independent Bernoulli(`p_k`) draw decides whether `k`
/// sees `j`; the diagonal is always set and non-edges never are.
///
/// Exactly one uniform is consumed per ordered neighbor pair, so the
/// stream position depends only on the graph.
pub fn draw_masks<R: Rng + ?Sized>(net: &ObservationNetwork, rng: &mut R) -> ObservationMask {
    let k = net.num_agents();
    let mut bits = vec![false; k * k];
    for observer in net.agents() {
        let p = net.sociability(observer);
        let row = observer.index() * k;
        bits[row + observer.index()] = true;
        for &j in net.neighbors(observer).expect("agent in range") {
            bits[row + j.index()] = rng.random::<f64>() < p;
        }
    }
    ObservationMask { num_agents: k, bits }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    /// 1-based round number.
    pub t: u64,
    /// Arm pulled by each agent, in agent order.
    pub choices: Vec<ArmId>,
    /// Shared realization per pulled arm, indexed by arm position.
    pub rewards: Vec<Option<f64>>,
    pub masks: ObservationMask,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub outcome: RoundOutcome,
    /// `Delta` of each agent's chosen arm.
    pub regret_increments: Vec<f64>,
}

/// A running episode.
pub struct Simulation<'a> {
    inst: &'a BanditInstance,
    net: &'a ObservationNetwork,
    policies: &'a [PolicyConfig],
    sigma_primes: Vec<f64>,
    gaps: Vec<f64>,
    beliefs: Vec<AgentBeliefs>,
    completed: u64,
    rewards: RewardStream,
    mask_rng: ChaCha8Rng,
    tie_rngs: Vec<ChaCha8Rng>,
}

impl<'a> Simulation<'a> {
    /// `policies` holds one configuration per agent.
    pub fn new(
        inst: &'a BanditInstance,
        net: &'a ObservationNetwork,
        policies: &'a [PolicyConfig],
        seed: u64,
    ) -> Result<Self> {
        let k = net.num_agents();
        check_policies(net, policies)?;
        let seeds = EpisodeSeeds::derive(seed, k);
        Ok(Self {
            inst,
            net,
            policies,
            sigma_primes: inst.sigma_primes(),
            gaps: inst.gaps(),
            beliefs: vec![AgentBeliefs::new(inst.num_arms()); k],
            completed: 0,
            rewards: RewardStream::new(seeds.rewards),
            mask_rng: ChaCha8Rng::seed_from_u64(seeds.masks),
            tie_rngs: seeds.tie_breaks.iter().map(|&s| ChaCha8Rng::seed_from_u64(s)).collect(),
        })
    }

    pub fn beliefs(&self) -> &[AgentBeliefs] {
        &self.beliefs
    }

    pub fn into_beliefs(self) -> Vec<AgentBeliefs> {
        self.beliefs
    }

    pub fn rounds_completed(&self) -> u64 {
        self.completed
    }

    /// Plays one round.
    pub fn step(&mut self) -> StepReport {
        let prev = self.completed;
        let t = prev + 1;

        let choices: Vec<ArmId> = self
            .beliefs
            .iter()
            .zip(self.policies)
            .zip(self.tie_rngs.iter_mut())
            .map(|((b, cfg), rng)| select_arm(b, cfg, &self.sigma_primes, prev, rng))
            .collect();

        let rewards = draw_round_rewards(self.inst, &choices, &self.rewards, t);
        let masks = draw_masks(self.net, &mut self.mask_rng);

        for (k, beliefs) in self.beliefs.iter_mut().enumerate() {
            let me = AgentId::from_index(k);
            for (j, &arm) in choices.iter().enumerate() {
                let x = rewards[arm.index()].expect("pulled arm has a reward");
                if j == k {
                    beliefs.record_pull(arm, x);
                } else if masks.get(me, AgentId::from_index(j)) {
                    beliefs.observe(arm, x);
                }
            }
        }

        let regret_increments = choices.iter().map(|a| self.gaps[a.index()]).collect();
        self.completed = t;
        StepReport {
            outcome: RoundOutcome {
                t,
                choices,
                rewards,
                masks,
            },
            regret_increments,
        }
    }
}

fn check_policies(net: &ObservationNetwork, policies: &[PolicyConfig]) -> Result<()> {
    let k = net.num_agents();
    if policies.len() != k {
        return Err(Error::LengthMismatch {
            what: "agent policies",
            expected: k,
            found: policies.len(),
        });
    }
    if let Some(p) = policies.iter().find(|p| p.num_agents() != k) {
        return Err(Error::InvalidArgument(format!(
            "policy configured for {} agents but the network has {k}",
            p.num_agents()
        )));
    }
    Ok(())
}

/// Cumulative expected regret per round and agent.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    horizon: u64,
    num_agents: usize,
    cumulative: Vec<f64>,
    run_seed: u64,
}

impl RegretTrace {
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn is_empty(&self) -> bool {
        self.horizon == 0
    }

    /// Regret of `agent` accumulated through round `t` (1-based).
    pub fn at(&self, t: u64, agent: AgentId) -> f64 {
        assert!(t >= 1 && t <= self.horizon, "round {t} outside 1..={}", self.horizon);
        self.cumulative[(t as usize - 1) * self.num_agents + agent.index()]
    }

    pub fn terminal(&self, agent: AgentId) -> f64 {
        if self.horizon == 0 {
            0.0
        } else {
            self.at(self.horizon, agent)
        }
    }

    pub fn agent_curve(&self, agent: AgentId) -> impl Iterator<Item = f64> + '_ {
        self.cumulative
            .iter()
            .skip(agent.index())
            .step_by(self.num_agents.max(1))
            .copied()
    }

    /// Row-major `[round][agent]` values.
    pub fn as_slice(&self) -> &[f64] {
        &self.cumulative
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub trace: RegretTrace,
    pub beliefs: Vec<AgentBeliefs>,
    /// `choices[t - 1][k]` is agent `k`'s arm in round `t`.
    pub choices: Vec<Vec<ArmId>>,
}

/// Runs `horizon` rounds. Fully determined by the inputs and `seed`.
pub fn run_episode(
    inst: &BanditInstance,
    net: &ObservationNetwork,
    policies: &[PolicyConfig],
    horizon: u64,
    seed: u64,
) -> Result<Episode> {
    let mut sim = Simulation::new(inst, net, policies, seed)?;
    let k = net.num_agents();
    let mut cumulative = Vec::with_capacity(horizon as usize * k);
    let mut choices = Vec::with_capacity(horizon as usize);
    let mut running = vec![0.0; k];
    for _ in 0..horizon {
        let report = sim.step();
        for (acc, inc) in running.iter_mut().zip(&report.regret_increments) {
            *acc += inc;
        }
        cumulative.extend_from_slice(&running);
        choices.push(report.outcome.choices);
    }
    Ok(Episode {
        trace: RegretTrace {
            horizon,
            num_agents: k,
            cumulative,
            run_seed: seed,
        },
        beliefs: sim.into_beliefs(),
        choices,
    })
}

/// Runs `runs` independent jobs in parallel and feeds their results to
/// `fold` in ascending run order.
pub(crate) fn for_each_run_ordered<T, F, G>(runs: usize, job: F, mut fold: G) -> Result<()>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    G: FnMut(u64, T),
{
    const BATCH: usize = 256;
    let mut start = 0;
    while start < runs {
        let end = (start + BATCH).min(runs);
        let batch: Vec<Result<T>> = (start..end).into_par_iter().map(|r| job(r as u64)).collect();
        for (offset, item) in batch.into_iter().enumerate() {
            fold((start + offset) as u64, item?);
        }
        start = end;
    }
    Ok(())
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Debug)]
struct Welford {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        self.count += 1;
        let n = self.count as f64;
        for ((x, mean), m2) in xs.into_iter().zip(&mut self.mean).zip(&mut self.m2) {
            let d = x - *mean;
            *mean += d / n;
            *m2 += d * (x - *mean);
        }
    }

    fn standard_errors(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|m2| (m2 / (n - 1.0) / n).sqrt()).collect()
    }
}

/// Mean and standard-error regret curves plus mean pull counts.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloSummary {
    horizon: u64,
    num_agents: usize,
    num_arms: usize,
    runs: usize,
    base_seed: u64,
    mean_regret: Vec<f64>,
    stderr_regret: Vec<f64>,
    mean_pulls: Vec<f64>,
    terminal_regrets: Vec<Vec<f64>>,
}

impl MonteCarloSummary {
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    fn cell(&self, t: u64, agent: AgentId) -> usize {
        assert!(t >= 1 && t <= self.horizon, "round {t} outside 1..={}", self.horizon);
        (t as usize - 1) * self.num_agents + agent.index()
    }

    pub fn mean_regret(&self, t: u64, agent: AgentId) -> f64 {
        self.mean_regret[self.cell(t, agent)]
    }

    pub fn stderr_regret(&self, t: u64, agent: AgentId) -> f64 {
        self.stderr_regret[self.cell(t, agent)]
    }

    pub fn terminal_mean(&self, agent: AgentId) -> f64 {
        self.mean_regret(self.horizon, agent)
    }

    pub fn terminal_stderr(&self, agent: AgentId) -> f64 {
        self.stderr_regret(self.horizon, agent)
    }

    /// Mean of `n_i^k(T)` over runs.
    pub fn mean_pulls(&self, agent: AgentId, arm: ArmId) -> f64 {
        self.mean_pulls[agent.index() * self.num_arms + arm.index()]
    }

    /// Terminal regret of each run, `[agent][run]`.
    pub fn terminal_regrets(&self, agent: AgentId) -> &[f64] {
        &self.terminal_regrets[agent.index()]
    }
}

/// Runs `runs` replicates (run `r` seeded by [`run_seed`]`(base_seed, r)`)
/// in parallel and aggregates them in ascending run order, so the result is
/// bit-identical for any thread count.
pub fn run_monte_carlo(
    inst: &BanditInstance,
    net: &ObservationNetwork,
    policies: &[PolicyConfig],
    horizon: u64,
    runs: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if runs < 1 {
        return Err(Error::TooFewRuns { min: 1, found: runs });
    }
    if horizon < 1 {
        return Err(Error::HorizonTooShort { min: 1, found: horizon });
    }
    check_policies(net, policies)?;
    let k = net.num_agents();
    let n = inst.num_arms();
    let mut regret = Welford::new(horizon as usize * k);
    let mut pulls = Welford::new(k * n);
    let mut terminal_regrets = vec![Vec::with_capacity(runs); k];

    for_each_run_ordered(
        runs,
        |r| run_episode(inst, net, policies, horizon, run_seed(base_seed, r)),
        |_, ep| {
            regret.push(ep.trace.as_slice().iter().copied());
            pulls.push(
                ep.beliefs
                    .iter()
                    .flat_map(|b| b.pull_counts().iter().map(|&c| c as f64)),
            );
            for (agent, column) in terminal_regrets.iter_mut().enumerate() {
                column.push(ep.trace.terminal(AgentId::from_index(agent)));
            }
        },
    )?;

    Ok(MonteCarloSummary {
        horizon,
        num_agents: k,
        num_arms: n,
        runs,
        base_seed,
        stderr_regret: regret.standard_errors(),
        mean_regret: regret.mean,
        mean_pulls: pulls.mean,
        terminal_regrets,
    })
}
