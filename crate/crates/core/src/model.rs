//! Ground truth and agent state: the arm set, the observation network and
//! the per-agent running statistics.
//!
//! Arms and agents are identified by [`ArmId`] and [`AgentId`]. Both store a
//! zero-based position but present themselves 1-based (`number()`,
//! `Display`), which is the convention used in every report and file.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

macro_rules! one_based_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(usize);

        impl $name {
            /// Builds an id from a zero-based position.
            pub const fn from_index(index: usize) -> Self {
                Self(index)
            }

            /// Builds an id from its 1-based number; `None` for 0.
            pub const fn from_number(number: usize) -> Option<Self> {
                if number == 0 {
                    None
                } else {
                    Some(Self(number - 1))
                }
            }

            pub const fn index(self) -> usize {
                self.0
            }

            pub const fn number(self) -> usize {
                self.0 + 1
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.number())
            }
        }
    };
}

one_based_id!(
    /// An arm (option) of the bandit.
    ArmId
);
one_based_id!(
    /// An agent (vertex of the observation network).
    AgentId
);

/// The arm set. Means are hidden from agents; variance proxies are known.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    variance_proxies: Vec<f64>,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, variance_proxies: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms { found: means.len() });
        }
        if variance_proxies.len() != means.len() {
            return Err(Error::LengthMismatch {
                what: "variance proxies",
                expected: means.len(),
                found: variance_proxies.len(),
            });
        }
        for (i, &m) in means.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFiniteMean {
                    arm: ArmId(i),
                    value: m,
                });
            }
        }
        for (i, &v) in variance_proxies.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidVarianceProxy {
                    arm: ArmId(i),
                    value: v,
                });
            }
        }
        Ok(Self {
            means,
            variance_proxies,
        })
    }

    /// All arms share the same variance proxy.
    pub fn with_common_variance(means: Vec<f64>, variance_proxy: f64) -> Result<Self> {
        let n = means.len();
        Self::new(means, vec![variance_proxy; n])
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn arms(&self) -> impl Iterator<Item = ArmId> + '_ {
        (0..self.means.len()).map(ArmId)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variance_proxies(&self) -> &[f64] {
        &self.variance_proxies
    }

    pub fn mean(&self, arm: ArmId) -> f64 {
        self.means[arm.0]
    }

    /// Square root of the variance proxy, i.e. the reward standard deviation.
    pub fn sigma_prime(&self, arm: ArmId) -> f64 {
        self.variance_proxies[arm.0].sqrt()
    }

    pub fn sigma_primes(&self) -> Vec<f64> {
        self.variance_proxies.iter().map(|v| v.sqrt()).collect()
    }

    /// Smallest-index arm attaining the maximum mean.
    pub fn optimal_arm(&self) -> ArmId {
        let mut best = 0;
        for (i, &m) in self.means.iter().enumerate().skip(1) {
            if m > self.means[best] {
                best = i;
            }
        }
        ArmId(best)
    }

    /// Gap `mu_opt - mu_i` for every arm, in arm order.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.means[self.optimal_arm().0];
        self.means.iter().map(|m| best - m).collect()
    }

    pub fn gap(&self, arm: ArmId) -> f64 {
        self.means[self.optimal_arm().0] - self.means[arm.0]
    }

    pub fn check_arm(&self, number: usize) -> Result<ArmId> {
        match ArmId::from_number(number) {
            Some(a) if a.0 < self.num_arms() => Ok(a),
            _ => Err(Error::ArmOutOfRange {
                number,
                num_arms: self.num_arms(),
            }),
        }
    }
}

/// Undirected observation graph plus per-agent sociability.
///
/// `p_k` is the probability that agent `k` sees each neighbor's pull in a
/// given round. The graph is undirected; the per-round observation draws
/// are directed.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationNetwork {
    adjacency: Vec<Vec<AgentId>>,
    sociability: Vec<f64>,
}

impl ObservationNetwork {
    /// Validates and builds a network from unordered agent pairs.
    /// Duplicate pairs (in either orientation) collapse into one edge.
    pub fn new(num_agents: usize, edges: &[(AgentId, AgentId)], sociability: Vec<f64>) -> Result<Self> {
        if num_agents < 1 {
            return Err(Error::NoAgents);
        }
        if sociability.len() != num_agents {
            return Err(Error::LengthMismatch {
                what: "sociability",
                expected: num_agents,
                found: sociability.len(),
            });
        }
        for (k, &p) in sociability.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidSociability {
                    agent: AgentId(k),
                    value: p,
                });
            }
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            for x in [a, b] {
                if x.0 >= num_agents {
                    return Err(Error::AgentOutOfRange {
                        number: x.number(),
                        num_agents,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { agent: a });
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); num_agents];
        for (a, b) in set {
            adjacency[a.0].push(b);
            adjacency[b.0].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { adjacency, sociability })
    }

    /// Like [`new`](Self::new) but with 1-based agent numbers.
    pub fn from_numbered_edges(num_agents: usize, edges: &[[usize; 2]], sociability: Vec<f64>) -> Result<Self> {
        let ids = edges
            .iter()
            .map(|&[a, b]| {
                let conv = |n: usize| {
                    AgentId::from_number(n)
                        .filter(|id| id.0 < num_agents)
                        .ok_or(Error::AgentOutOfRange { number: n, num_agents })
                };
                Ok((conv(a)?, conv(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(num_agents, &ids, sociability)
    }

    /// All-to-all graph, `K-1`-regular.
    pub fn complete(sociability: Vec<f64>) -> Result<Self> {
        let k = sociability.len();
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                edges.push((AgentId(a), AgentId(b)));
            }
        }
        Self::new(k, &edges, sociability)
    }

    /// Cycle where `{k, j}` is an edge iff `|(k - j) mod K| = 1`.
    pub fn cycle(sociability: Vec<f64>) -> Result<Self> {
        let k = sociability.len();
        if k >= 3 {
            Self::ring_lattice(2, sociability)
        } else {
            Self::complete(sociability)
        }
    }

    /// Circulant `degree`-regular graph: each agent is joined to the
    /// `degree / 2` nearest agents on each side of a ring, plus the
    /// antipodal agent when `degree` is odd (which needs an even `K`).
    pub fn ring_lattice(degree: usize, sociability: Vec<f64>) -> Result<Self> {
        let k = sociability.len();
        let invalid = Error::InvalidDegree { num_agents: k, degree };
        if k == 0 {
            return Err(Error::NoAgents);
        }
        if degree >= k || (degree % 2 == 1 && k % 2 == 1) {
            return Err(invalid);
        }
        let mut edges = Vec::new();
        for a in 0..k {
            for step in 1..=degree / 2 {
                edges.push((AgentId(a), AgentId((a + step) % k)));
            }
            if degree % 2 == 1 {
                edges.push((AgentId(a), AgentId((a + k / 2) % k)));
            }
        }
        let net = Self::new(k, &edges, sociability)?;
        net.require_regular(degree)?;
        Ok(net)
    }

    pub fn num_agents(&self) -> usize {
        self.adjacency.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.adjacency.len()).map(AgentId)
    }

    pub fn sociability(&self, agent: AgentId) -> f64 {
        self.sociability[agent.0]
    }

    pub fn sociabilities(&self) -> &[f64] {
        &self.sociability
    }

    pub fn degree(&self, agent: AgentId) -> usize {
        self.adjacency[agent.0].len()
    }

    /// Neighbors of `agent`, ascending, excluding the agent itself.
    pub fn neighbors(&self, agent: AgentId) -> Result<&[AgentId]> {
        self.adjacency
            .get(agent.0)
            .map(Vec::as_slice)
            .ok_or(Error::AgentOutOfRange {
                number: agent.number(),
                num_agents: self.num_agents(),
            })
    }

    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        self.adjacency.get(a.0).is_some_and(|n| n.binary_search(&b).is_ok())
    }

    /// Edges as `(a, b)` with `a < b`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for &b in list {
                if b.0 > a {
                    out.push((AgentId(a), b));
                }
            }
        }
        out
    }

    /// Common degree if every agent has the same number of neighbors.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency[0].len();
        self.adjacency.iter().all(|n| n.len() == d).then_some(d)
    }

    pub fn require_regular(&self, degree: usize) -> Result<()> {
        for (k, list) in self.adjacency.iter().enumerate() {
            if list.len() != degree {
                return Err(Error::NotRegular {
                    expected: degree,
                    agent: AgentId(k),
                    found: list.len(),
                });
            }
        }
        Ok(())
    }

    pub fn check_agent(&self, number: usize) -> Result<AgentId> {
        match AgentId::from_number(number) {
            Some(a) if a.0 < self.num_agents() => Ok(a),
            _ => Err(Error::AgentOutOfRange {
                number,
                num_agents: self.num_agents(),
            }),
        }
    }
}

/// Running statistics of one agent.
///
/// `obs_counts` (N) and `obs_reward_sums` (S) include every pull the agent
/// saw, its own included; `pull_counts` (n) only its own pulls.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentBeliefs {
    obs_counts: Vec<u64>,
    obs_reward_sums: Vec<f64>,
    pull_counts: Vec<u64>,
}

impl AgentBeliefs {
    pub fn new(num_arms: usize) -> Self {
        Self {
            obs_counts: vec![0; num_arms],
            obs_reward_sums: vec![0.0; num_arms],
            pull_counts: vec![0; num_arms],
        }
    }

    pub fn num_arms(&self) -> usize {
        self.obs_counts.len()
    }

    pub fn obs_count(&self, arm: ArmId) -> u64 {
        self.obs_counts[arm.0]
    }

    pub fn obs_counts(&self) -> &[u64] {
        &self.obs_counts
    }

    pub fn obs_reward_sum(&self, arm: ArmId) -> f64 {
        self.obs_reward_sums[arm.0]
    }

    pub fn pull_count(&self, arm: ArmId) -> u64 {
        self.pull_counts[arm.0]
    }

    pub fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }

    /// `S / N`, or `None` while the arm is unobserved.
    pub fn empirical_mean(&self, arm: ArmId) -> Option<f64> {
        match self.obs_counts[arm.0] {
            0 => None,
            n => Some(self.obs_reward_sums[arm.0] / n as f64),
        }
    }

    pub fn total_pulls(&self) -> u64 {
        self.pull_counts.iter().sum()
    }

    pub fn total_observations(&self) -> u64 {
        self.obs_counts.iter().sum()
    }

    /// Records a neighbor's pull seen by this agent.
    pub fn observe(&mut self, arm: ArmId, reward: f64) {
        self.obs_counts[arm.0] += 1;
        self.obs_reward_sums[arm.0] += reward;
    }

    /// Records the agent's own pull; it is always self-observed.
    pub fn record_pull(&mut self, arm: ArmId, reward: f64) {
        self.pull_counts[arm.0] += 1;
        self.observe(arm, reward);
    }
}
