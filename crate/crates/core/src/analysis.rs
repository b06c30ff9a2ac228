//! Closed-form regret bounds, the sociability-based performance measure, and
//! empirical validators that check both against simulation.

use crate::error::{Error, Result};
use crate::model::{AgentId, ArmId, BanditInstance, ObservationNetwork};
use crate::policy::PolicyConfig;
use crate::sim::{for_each_run_ordered, run_episode, run_seed, MonteCarloSummary};

/// Relative tolerance below which two performance measures form a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_ZETA: f64 = 2.0;

/// `delta' = DEFAULT_DELTA_PRIME_RATIO * delta`, i.e. `delta * eps / 4`
/// with `eps = 0.2`.
pub const DEFAULT_DELTA_PRIME_RATIO: f64 = 0.05;

/// `eps_p^k = 1/(p_k + 1) * sqrt(mean sociability of k's neighbors)`.
/// Lower values predict lower cumulative regret.
pub fn performance_measure(net: &ObservationNetwork, agent: AgentId) -> Result<f64> {
    let neighbors = net.neighbors(agent)?;
    if neighbors.is_empty() {
        return Err(Error::IsolatedAgent { agent });
    }
    let sum: f64 = neighbors.iter().map(|&j| net.sociability(j)).sum();
    let mean = sum / neighbors.len() as f64;
    Ok(mean.sqrt() / (net.sociability(agent) + 1.0))
}

/// The measure for every agent; `None` for isolated agents.
pub fn performance_measures(net: &ObservationNetwork) -> Vec<Option<f64>> {
    net.agents().map(|a| performance_measure(net, a).ok()).collect()
}

/// Agents ascending by performance measure; equal measures share a group.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    groups: Vec<Vec<AgentId>>,
}

impl Ranking {
    pub fn from_groups(groups: Vec<Vec<AgentId>>) -> Self {
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<AgentId>] {
        &self.groups
    }

    /// Competition rank (1, 2, 2, 4, ...) of every agent, indexed by agent
    /// position.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.groups.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        let mut next = 1;
        for g in &self.groups {
            for a in g {
                out[a.index()] = next;
            }
            next += g.len();
        }
        out
    }

    fn group_of(&self) -> Vec<usize> {
        let n = self.groups.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (gi, g) in self.groups.iter().enumerate() {
            for a in g {
                out[a.index()] = gi;
            }
        }
        out
    }
}

impl std::fmt::Display for Ranking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| match g.as_slice() {
                [one] => one.to_string(),
                many => {
                    let inner: Vec<String> = many.iter().map(ToString::to_string).collect();
                    format!("{{{}}}", inner.join(","))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" < "))
    }
}

pub fn predicted_ranking(net: &ObservationNetwork) -> Result<Ranking> {
    let eps = net
        .agents()
        .map(|a| performance_measure(net, a).map(|e| (a, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_by_value(eps))
}

fn rank_by_value(mut values: Vec<(AgentId, f64)>) -> Ranking {
    values.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut groups: Vec<(f64, Vec<AgentId>)> = Vec::new();
    for (a, e) in values {
        match groups.last_mut() {
            Some((head, g)) if (e - *head).abs() <= TIE_TOLERANCE * head.abs().max(1.0) => g.push(a),
            _ => groups.push((e, vec![a])),
        }
    }
    Ranking {
        groups: groups.into_iter().map(|(_, g)| g).collect(),
    }
}

/// Count threshold `eta_i(T)` beyond which `mu_opt < mu_i + 2 C_i(T)`
/// can no longer hold. `gap` must be positive and `horizon >= 2`.
pub fn eta_threshold(sigma: f64, gap: f64, xi: f64, f_t: f64, horizon: u64) -> Result<f64> {
    if gap == 0.0 {
        return Err(Error::ZeroGap);
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidGap(gap));
    }
    if horizon < 2 {
        return Err(Error::HorizonTooShort { min: 2, found: horizon });
    }
    Ok(eta_unchecked(sigma, gap, xi, f_t, horizon))
}

fn eta_unchecked(sigma: f64, gap: f64, xi: f64, f_t: f64, horizon: u64) -> f64 {
    let ln_t = (horizon as f64).ln();
    let s2 = sigma * sigma;
    let g2 = gap * gap;
    let inner = 1.0 + g2 / (2.0 * s2 * (xi + 1.0)) * f_t / ln_t;
    4.0 * s2 * (xi + 1.0) / g2 * (1.0 + inner.sqrt()) * ln_t
}

/// `Gamma(zeta, xi, K)`, the horizon-independent part of the
/// suboptimal-sample bound.
pub fn gamma_constant(zeta: f64, xi: f64, num_agents: usize) -> f64 {
    let ln_zeta = zeta.ln();
    let ln_k = (num_agents as f64).ln();
    (1.0 + ln_k) / ln_zeta + (ln_k / xi + 2.0 / (xi - 1.0)) / (2f64.powf(xi) * ln_zeta)
}

/// Constants shared by the tail and suboptimal-sample bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    zeta: f64,
    xi: f64,
    num_agents: usize,
}

impl BoundParams {
    pub fn new(zeta: f64, xi: f64, num_agents: usize) -> Result<Self> {
        if !(zeta > 1.0 && zeta.is_finite()) {
            return Err(Error::InvalidZeta(zeta));
        }
        if !(xi > 1.0 && xi.is_finite()) {
            return Err(Error::InvalidXi(xi));
        }
        if num_agents == 0 {
            return Err(Error::NoAgents);
        }
        Ok(Self { zeta, xi, num_agents })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    /// `1 / ln zeta`.
    pub fn nu(&self) -> f64 {
        1.0 / self.zeta.ln()
    }

    /// `1 / (sigma^2 (zeta^(1/4) + zeta^(-1/4))^2)`.
    pub fn kappa(&self, sigma: f64) -> f64 {
        let s = self.zeta.powf(0.25) + self.zeta.powf(-0.25);
        1.0 / (sigma * sigma * s * s)
    }

    pub fn gamma(&self) -> f64 {
        gamma_constant(self.zeta, self.xi, self.num_agents)
    }

    /// The term that vanishes as `T` grows:
    /// `1/(T^(xi-1) ln zeta) * (ln K/(T xi) + 1/(xi-1))`.
    pub fn vanishing_term(&self, horizon: u64) -> f64 {
        let t = horizon as f64;
        let xi = self.xi;
        let ln_k = (self.num_agents as f64).ln();
        (ln_k / (t * xi) + 1.0 / (xi - 1.0)) / (t.powf(xi - 1.0) * self.zeta.ln())
    }
}

/// Upper bound on the expected number of pulls of a suboptimal arm with
/// gap `gap` by one agent up to `horizon`.
pub fn expected_samples_bound(params: &BoundParams, sigma: f64, gap: f64, f_t: f64, horizon: u64) -> Result<f64> {
    let eta = eta_threshold(sigma, gap, params.xi, f_t, horizon)?;
    Ok(params.gamma() + params.vanishing_term(horizon) + eta)
}

/// Per-arm bound for an instance: `None` for optimal arms.
/// Uses `sigma_i = sqrt(K) sigma'_i`.
pub fn arm_sample_bounds(
    params: &BoundParams,
    inst: &BanditInstance,
    f_t: f64,
    horizon: u64,
) -> Result<Vec<Option<f64>>> {
    let sqrt_k = (params.num_agents as f64).sqrt();
    inst.arms()
        .map(|arm| {
            let gap = inst.gap(arm);
            if gap == 0.0 {
                return Ok(None);
            }
            expected_samples_bound(params, sqrt_k * inst.sigma_prime(arm), gap, f_t, horizon).map(Some)
        })
        .collect()
}

/// Upper bound on one agent's expected cumulative regret:
/// `sum_i gap_i * expected_samples_bound_i` over suboptimal arms.
pub fn regret_bound(params: &BoundParams, inst: &BanditInstance, f_t: f64, horizon: u64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::HorizonTooShort { min: 2, found: horizon });
    }
    let bounds = arm_sample_bounds(params, inst, f_t, horizon)?;
    Ok(inst
        .arms()
        .zip(bounds)
        .filter_map(|(arm, b)| b.map(|b| inst.gap(arm) * b))
        .sum())
}

/// `nu * ln(K t) / t^delta`: bound on the probability that an agent's
/// estimate leaves its confidence radius at round `t`.
pub fn concentration_bound(zeta: f64, num_agents: usize, t: f64, delta: f64) -> f64 {
    (num_agents as f64 * t).ln() / (zeta.ln() * t.powf(delta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailEstimate {
    /// Fraction of counted runs whose estimate left the radius.
    pub frequency: f64,
    pub exceedances: usize,
    pub runs_counted: usize,
    /// Runs where the agent had not observed the arm by round `t`.
    pub runs_excluded: usize,
}

/// Monte Carlo estimate of
/// `P(|mu_hat_i^k(t) - mu_i| > sigma_i sqrt(2 (delta + delta') ln t / N_i^k(t)))`
/// where `radius_exponent = delta + delta'`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_tail_probability(
    inst: &BanditInstance,
    net: &ObservationNetwork,
    policies: &[PolicyConfig],
    arm: ArmId,
    agent: AgentId,
    t: u64,
    radius_exponent: f64,
    runs: usize,
    base_seed: u64,
) -> Result<TailEstimate> {
    const MIN_RUNS: usize = 100;
    if runs < MIN_RUNS {
        return Err(Error::TooFewRuns {
            min: MIN_RUNS,
            found: runs,
        });
    }
    if t < 1 {
        return Err(Error::HorizonTooShort { min: 1, found: t });
    }
    net.neighbors(agent)?;
    inst.check_arm(arm.number())?;
    let sigma = (net.num_agents() as f64).sqrt() * inst.sigma_prime(arm);
    let mu = inst.mean(arm);
    let ln_t = (t as f64).ln();

    let mut exceedances = 0;
    let mut counted = 0;
    let mut excluded = 0;
    for_each_run_ordered(
        runs,
        |r| {
            let ep = run_episode(inst, net, policies, t, run_seed(base_seed, r))?;
            let b = &ep.beliefs[agent.index()];
            Ok(b.empirical_mean(arm).map(|m| (m, b.obs_count(arm))))
        },
        |_, obs| match obs {
            None => excluded += 1,
            Some((mean, n)) => {
                counted += 1;
                let radius = sigma * (2.0 * radius_exponent * ln_t / n as f64).sqrt();
                if (mean - mu).abs() > radius {
                    exceedances += 1;
                }
            }
        },
    )?;
    if counted == 0 {
        return Err(Error::NoObservations { agent, arm, t });
    }
    Ok(TailEstimate {
        frequency: exceedances as f64 / counted as f64,
        exceedances,
        runs_counted: counted,
        runs_excluded: excluded,
    })
}

/// Terminal mean and standard error of one agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalRegret {
    pub mean: f64,
    pub stderr: f64,
}

impl EmpiricalRegret {
    pub fn terminal(summary: &MonteCarloSummary) -> Vec<Self> {
        (0..summary.num_agents())
            .map(AgentId::from_index)
            .map(|a| Self {
                mean: summary.terminal_mean(a),
                stderr: summary.terminal_stderr(a),
            })
            .collect()
    }
}

/// Number of combined standard errors that separates two distinguishable
/// means.
pub const SEPARATION_SE: f64 = 2.0;

/// `sqrt(se_a^2 + se_b^2)`.
pub fn combined_stderr(a: &EmpiricalRegret, b: &EmpiricalRegret) -> f64 {
    a.stderr.hypot(b.stderr)
}

pub fn distinguishable(a: &EmpiricalRegret, b: &EmpiricalRegret) -> bool {
    (a.mean - b.mean).abs() >= SEPARATION_SE * combined_stderr(a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgreementReport {
    /// Every distinguishable strictly-predicted pair is ordered as predicted.
    pub agrees: bool,
    /// Discordant pairs among the distinguishable strictly-predicted pairs.
    pub kendall_distance: usize,
    pub distinguishable_pairs: usize,
    pub strict_pairs: usize,
    /// `(better, worse)` as predicted, but empirically reversed.
    pub discordant: Vec<(AgentId, AgentId)>,
    /// Predicted ties whose empirical means are nonetheless distinguishable.
    pub separated_ties: Vec<(AgentId, AgentId)>,
}

/// Compares a predicted ranking with terminal empirical regrets.
pub fn rank_agreement(predicted: &Ranking, empirical: &[EmpiricalRegret]) -> Result<AgreementReport> {
    let group = predicted.group_of();
    if group.len() != empirical.len() {
        return Err(Error::LengthMismatch {
            what: "empirical regrets",
            expected: group.len(),
            found: empirical.len(),
        });
    }
    let mut report = AgreementReport {
        agrees: true,
        kendall_distance: 0,
        distinguishable_pairs: 0,
        strict_pairs: 0,
        discordant: Vec::new(),
        separated_ties: Vec::new(),
    };
    for a in 0..group.len() {
        for b in a + 1..group.len() {
            let (ea, eb) = (&empirical[a], &empirical[b]);
            let sep = distinguishable(ea, eb);
            let (ia, ib) = (AgentId::from_index(a), AgentId::from_index(b));
            if group[a] == group[b] {
                if sep {
                    report.separated_ties.push((ia, ib));
                }
                continue;
            }
            report.strict_pairs += 1;
            if !sep {
                continue;
            }
            report.distinguishable_pairs += 1;
            let (better, worse) = if group[a] < group[b] { (ia, ib) } else { (ib, ia) };
            if empirical[better.index()].mean > empirical[worse.index()].mean {
                report.kendall_distance += 1;
                report.discordant.push((better, worse));
            }
        }
    }
    report.agrees = report.kendall_distance == 0;
    Ok(report)
}

/// Ranks agents by empirical terminal mean (1 = lowest regret; ties by
/// agent order).
pub fn empirical_ranks(empirical: &[EmpiricalRegret]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..empirical.len()).collect();
    order.sort_by(|&a, &b| empirical[a].mean.total_cmp(&empirical[b].mean).then(a.cmp(&b)));
    let mut ranks = vec![0; empirical.len()];
    for (r, a) in order.into_iter().enumerate() {
        ranks[a] = r + 1;
    }
    ranks
}
