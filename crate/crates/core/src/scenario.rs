//! Scenario files, built-in presets, and experiment output.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "example"
//! horizon = 500
//! runs = 1000
//! seed = 1
//! sociability = [0.5, 0.85, 0.05, 0.5, 1.0, 0.9]
//!
//! [arms]
//! means = [40.0, 50.0, 95.0]
//! variance_proxies = [25.0, 25.0, 25.0]
//!
//! [graph]
//! kind = "complete"        # or "cycle", "ring-lattice" (+ degree), "edges" (+ edges, optional degree)
//! num_agents = 6
//!
//! [policy]
//! xi = 1.1
//! inflation = { kind = "performance-measure" }   # or "zero", "log-log", { kind = "constant", value = 0.3 }
//!
//! [bounds]                 # optional
//! zeta = 2.0
//! delta_prime_ratio = 0.05
//! ```
//!
//! Agent numbers in edge lists are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, arm_sample_bounds, empirical_ranks, predicted_ranking, rank_agreement, regret_bound, AgreementReport,
    BoundParams, EmpiricalRegret, Ranking,
};
use crate::error::{Error, Result};
use crate::model::{AgentId, ArmId, BanditInstance, ObservationNetwork};
use crate::policy::{Inflation, PolicyConfig};
use crate::sim::{run_monte_carlo, MonteCarloSummary};

pub const PRESETS: [&str; 4] = ["paper-all-to-all", "paper-cyclic", "paper-case1", "paper-case2"];

const PAPER_MEANS: [f64; 10] = [40., 50., 50., 60., 70., 70., 80., 90., 92., 95.];
const PAPER_VARIANCE: f64 = 25.0;
const PAPER_SOCIABILITY: [f64; 6] = [0.50, 0.85, 0.05, 0.50, 1.00, 0.90];
const PAPER_XI: f64 = 1.1;
const PAPER_HORIZON: u64 = 500;
const PAPER_RUNS: usize = 1000;
const PRESET_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmsConfig {
    pub means: Vec<f64>,
    pub variance_proxies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete {
        num_agents: usize,
    },
    Cycle {
        num_agents: usize,
    },
    RingLattice {
        num_agents: usize,
        degree: usize,
    },
    Edges {
        num_agents: usize,
        edges: Vec<[usize; 2]>,
        /// When set, every agent must have exactly this many neighbors.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<usize>,
    },
}

impl GraphSpec {
    pub fn num_agents(&self) -> usize {
        match *self {
            GraphSpec::Complete { num_agents }
            | GraphSpec::Cycle { num_agents }
            | GraphSpec::RingLattice { num_agents, .. }
            | GraphSpec::Edges { num_agents, .. } => num_agents,
        }
    }

    fn build(&self, sociability: Vec<f64>) -> Result<ObservationNetwork> {
        match self {
            GraphSpec::Complete { .. } => ObservationNetwork::complete(sociability),
            GraphSpec::Cycle { .. } => ObservationNetwork::cycle(sociability),
            GraphSpec::RingLattice { degree, .. } => ObservationNetwork::ring_lattice(*degree, sociability),
            GraphSpec::Edges {
                num_agents,
                edges,
                degree,
            } => {
                let net = ObservationNetwork::from_numbered_edges(*num_agents, edges, sociability)?;
                if let Some(d) = degree {
                    net.require_regular(*d)?;
                }
                Ok(net)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InflationSpec {
    Zero,
    Constant {
        value: f64,
    },
    LogLog,
    /// Each agent uses its own performance measure as a constant.
    PerformanceMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub xi: f64,
    pub inflation: InflationSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    /// `delta'` as a fraction of `delta` in tail checks.
    #[serde(default = "default_delta_prime_ratio")]
    pub delta_prime_ratio: f64,
}

fn default_zeta() -> f64 {
    analysis::DEFAULT_ZETA
}

fn default_delta_prime_ratio() -> f64 {
    analysis::DEFAULT_DELTA_PRIME_RATIO
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            zeta: default_zeta(),
            delta_prime_ratio: default_delta_prime_ratio(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
    pub sociability: Vec<f64>,
    pub arms: ArmsConfig,
    pub graph: GraphSpec,
    pub policy: PolicySpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
}

/// A scenario turned into simulation inputs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub instance: BanditInstance,
    pub network: ObservationNetwork,
    pub policies: Vec<PolicyConfig>,
    /// Performance measure per agent, `None` for isolated agents.
    pub epsilons: Vec<Option<f64>>,
    pub bounds: BoundParams,
}

fn field_err(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Config {
        field: field.to_string(),
        message: e.to_string(),
    }
}

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let arms = ArmsConfig {
            means: PAPER_MEANS.to_vec(),
            variance_proxies: vec![PAPER_VARIANCE; PAPER_MEANS.len()],
        };
        let (graph, sociability) = match name {
            "paper-all-to-all" => (GraphSpec::Complete { num_agents: 6 }, PAPER_SOCIABILITY.to_vec()),
            "paper-cyclic" => (GraphSpec::Cycle { num_agents: 6 }, PAPER_SOCIABILITY.to_vec()),
            "paper-case1" => (GraphSpec::Complete { num_agents: 4 }, vec![0.5, 0.0, 0.0, 0.0]),
            "paper-case2" => (GraphSpec::Complete { num_agents: 4 }, vec![0.5, 1.0, 1.0, 1.0]),
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(Self {
            name: name.to_string(),
            horizon: PAPER_HORIZON,
            runs: PAPER_RUNS,
            seed: PRESET_SEED,
            sociability,
            arms,
            graph,
            policy: PolicySpec {
                xi: PAPER_XI,
                inflation: InflationSpec::PerformanceMeasure,
            },
            bounds: BoundsSpec::default(),
        })
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.build()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            field: "<serialize>".into(),
            message: e.to_string(),
        })
    }

    /// Validates cross-field consistency and builds the simulation inputs.
    pub fn build(&self) -> Result<Scenario> {
        let k = self.graph.num_agents();
        if k == 0 {
            return Err(field_err("graph.num_agents")(Error::NoAgents));
        }
        if self.sociability.len() != k {
            return Err(Error::Config {
                field: "sociability".into(),
                message: format!(
                    "graph has {k} agents but {} sociability values were given",
                    self.sociability.len()
                ),
            });
        }
        if self.horizon < 1 {
            return Err(field_err("horizon")(Error::HorizonTooShort {
                min: 1,
                found: self.horizon,
            }));
        }
        if self.runs < 1 {
            return Err(field_err("runs")(Error::TooFewRuns {
                min: 1,
                found: self.runs,
            }));
        }
        if !(self.bounds.delta_prime_ratio >= 0.0 && self.bounds.delta_prime_ratio.is_finite()) {
            return Err(Error::Config {
                field: "bounds.delta_prime_ratio".into(),
                message: format!("must be finite and non-negative, got {}", self.bounds.delta_prime_ratio),
            });
        }
        let instance = BanditInstance::new(self.arms.means.clone(), self.arms.variance_proxies.clone())
            .map_err(field_err("arms"))?;
        let network = self.graph.build(self.sociability.clone()).map_err(field_err("graph"))?;
        let epsilons = analysis::performance_measures(&network);

        let policies = network
            .agents()
            .map(|a| {
                let inflation = match self.policy.inflation {
                    InflationSpec::Zero => Inflation::Zero,
                    InflationSpec::LogLog => Inflation::LogLog,
                    InflationSpec::Constant { value } => Inflation::Constant(value),
                    InflationSpec::PerformanceMeasure => {
                        Inflation::Constant(analysis::performance_measure(&network, a)?)
                    }
                };
                PolicyConfig::new(self.policy.xi, inflation, k)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(field_err("policy"))?;
        let bounds = BoundParams::new(self.bounds.zeta, self.policy.xi, k).map_err(field_err("bounds.zeta"))?;

        Ok(Scenario {
            instance,
            network,
            policies,
            epsilons,
            bounds,
        })
    }
}

/// Resolves a preset name or reads a scenario file.
pub fn load_scenario(source: &str) -> Result<ScenarioConfig> {
    if PRESETS.contains(&source) {
        return ScenarioConfig::preset(source);
    }
    let path = Path::new(source);
    if !path.exists() && !source.contains(['/', '\\', '.']) {
        return Err(Error::UnknownPreset(source.to_string()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        field: "<scenario>".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    ScenarioConfig::from_toml_str(&text, source)
}

/// Command-line overrides of scenario values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub horizon: Option<u64>,
    pub zeta: Option<f64>,
}

impl Overrides {
    /// Applies the overrides and returns `(key, value)` pairs for the ones set.
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Vec<(String, String)> {
        let mut echoed = Vec::new();
        if let Some(s) = self.seed {
            cfg.seed = s;
            echoed.push(("seed".to_string(), s.to_string()));
        }
        if let Some(m) = self.runs {
            cfg.runs = m;
            echoed.push(("runs".to_string(), m.to_string()));
        }
        if let Some(t) = self.horizon {
            cfg.horizon = t;
            echoed.push(("horizon".to_string(), t.to_string()));
        }
        if let Some(z) = self.zeta {
            cfg.bounds.zeta = z;
            echoed.push(("zeta".to_string(), z.to_string()));
        }
        echoed
    }
}

/// Per-agent line of the experiment summary.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSummary {
    pub agent: AgentId,
    pub sociability: f64,
    pub epsilon: Option<f64>,
    pub predicted_rank: Option<usize>,
    pub empirical_rank: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    /// `f(T)` used by this agent's bound.
    pub inflation_at_horizon: f64,
    /// Mean `n_i^k(T)` per arm.
    pub mean_pulls: Vec<f64>,
    /// Suboptimal-sample bound per arm; `None` for optimal arms or `T < 2`.
    pub pull_bounds: Vec<Option<f64>>,
    pub regret_bound: Option<f64>,
}

impl AgentSummary {
    /// Suboptimal arms whose mean pull count exceeds the bound.
    pub fn bound_violations(&self) -> Vec<ArmId> {
        self.mean_pulls
            .iter()
            .zip(&self.pull_bounds)
            .enumerate()
            .filter(|(_, (n, b))| b.is_some_and(|b| **n > b))
            .map(|(i, _)| ArmId::from_index(i))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ScenarioConfig,
    pub overrides: Vec<(String, String)>,
    pub monte_carlo: MonteCarloSummary,
    pub agents: Vec<AgentSummary>,
    pub ranking: Option<Ranking>,
    pub agreement: Option<AgreementReport>,
    /// `(zeta, regret bound per agent)`.
    pub zeta_sensitivity: Vec<(f64, Vec<f64>)>,
}

const SENSITIVITY_ZETAS: [f64; 3] = [1.5, 2.0, 4.0];

/// Runs the Monte Carlo experiment and derives every summary quantity.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentOutput> {
    let sc = cfg.build()?;
    let mc = run_monte_carlo(&sc.instance, &sc.network, &sc.policies, cfg.horizon, cfg.runs, cfg.seed)?;
    let empirical = EmpiricalRegret::terminal(&mc);
    let emp_ranks = empirical_ranks(&empirical);
    let ranking = predicted_ranking(&sc.network).ok();
    let predicted_ranks = ranking.as_ref().map(Ranking::ranks);
    let agreement = ranking.as_ref().map(|r| rank_agreement(r, &empirical)).transpose()?;
    let t = cfg.horizon;

    let mut agents = Vec::with_capacity(sc.network.num_agents());
    for a in sc.network.agents() {
        let f_t = sc.policies[a.index()].inflation_value(t);
        let (pull_bounds, rb) = if t >= 2 {
            (
                arm_sample_bounds(&sc.bounds, &sc.instance, f_t, t)?,
                Some(regret_bound(&sc.bounds, &sc.instance, f_t, t)?),
            )
        } else {
            (vec![None; sc.instance.num_arms()], None)
        };
        agents.push(AgentSummary {
            agent: a,
            sociability: sc.network.sociability(a),
            epsilon: sc.epsilons[a.index()],
            predicted_rank: predicted_ranks.as_ref().map(|r| r[a.index()]),
            empirical_rank: emp_ranks[a.index()],
            mean_regret: empirical[a.index()].mean,
            stderr: empirical[a.index()].stderr,
            inflation_at_horizon: f_t,
            mean_pulls: sc.instance.arms().map(|i| mc.mean_pulls(a, i)).collect(),
            pull_bounds,
            regret_bound: rb,
        });
    }

    let mut zetas = SENSITIVITY_ZETAS.to_vec();
    if !zetas.contains(&cfg.bounds.zeta) {
        zetas.push(cfg.bounds.zeta);
        zetas.sort_by(f64::total_cmp);
    }
    let mut zeta_sensitivity = Vec::new();
    if t >= 2 {
        for z in zetas {
            let p = BoundParams::new(z, cfg.policy.xi, sc.network.num_agents())?;
            let per_agent = agents
                .iter()
                .map(|s| regret_bound(&p, &sc.instance, s.inflation_at_horizon, t))
                .collect::<Result<Vec<_>>>()?;
            zeta_sensitivity.push((z, per_agent));
        }
    }

    Ok(ExperimentOutput {
        config: cfg.clone(),
        overrides: Vec::new(),
        monte_carlo: mc,
        agents,
        ranking,
        agreement,
        zeta_sensitivity,
    })
}

/// Formats with at least nine significant digits in plain decimal notation.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.000000000".to_string()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(1) as usize;
    format!("{x:.decimals$}")
}

/// Writes `t,agent,mean_cum_regret,stderr`, one row per round and agent,
/// rounds ascending then agents ascending.
pub fn emit_regret_csv<W: Write>(mc: &MonteCarloSummary, mut out: W) -> io::Result<()> {
    writeln!(out, "t,agent,mean_cum_regret,stderr")?;
    for t in 1..=mc.horizon() {
        for k in 0..mc.num_agents() {
            let a = AgentId::from_index(k);
            writeln!(
                out,
                "{t},{a},{},{}",
                format_decimal(mc.mean_regret(t, a)),
                format_decimal(mc.stderr_regret(t, a))
            )?;
        }
    }
    out.flush()
}

fn opt_decimal(x: Option<f64>) -> String {
    x.map(format_decimal).unwrap_or_default()
}

impl ExperimentOutput {
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.monte_carlo.num_arms();
        let mut header =
            String::from("agent,p,epsilon,predicted_rank,empirical_rank,mean_regret_T,stderr_T,regret_bound_T");
        for i in 1..=n {
            write!(header, ",arm{i}_mean_pulls,arm{i}_pull_bound").unwrap();
        }
        writeln!(out, "{header}")?;
        for s in &self.agents {
            write!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.agent,
                s.sociability,
                opt_decimal(s.epsilon),
                s.predicted_rank.map(|r| r.to_string()).unwrap_or_default(),
                s.empirical_rank,
                format_decimal(s.mean_regret),
                format_decimal(s.stderr),
                opt_decimal(s.regret_bound),
            )?;
            for (n, b) in s.mean_pulls.iter().zip(&s.pull_bounds) {
                write!(out, ",{},{}", format_decimal(*n), opt_decimal(*b))?;
            }
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn report(&self) -> String {
        let c = &self.config;
        let mut r = String::new();
        let _ = writeln!(r, "scenario: {}", c.name);
        let _ = writeln!(
            r,
            "agents: {}  arms: {}  horizon: {}  runs: {}  seed: {}",
            self.monte_carlo.num_agents(),
            self.monte_carlo.num_arms(),
            c.horizon,
            c.runs,
            c.seed
        );
        let _ = writeln!(r, "graph: {:?}", c.graph);
        let _ = writeln!(r, "sociability: {:?}", c.sociability);
        let _ = writeln!(r, "xi: {}  inflation: {:?}", c.policy.xi, c.policy.inflation);
        let _ = writeln!(
            r,
            "zeta: {}  delta_prime_ratio: {}",
            c.bounds.zeta, c.bounds.delta_prime_ratio
        );
        if self.overrides.is_empty() {
            let _ = writeln!(r, "overrides: none");
        } else {
            let list: Vec<String> = self.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(r, "overrides: {}", list.join(" "));
        }
        let _ = writeln!(r);

        let _ = writeln!(
            r,
            "agent  p      epsilon  pred  emp  mean_regret_T  stderr_T  regret_bound_T"
        );
        for s in &self.agents {
            let _ = writeln!(
                r,
                "{:<6} {:<6} {:<8} {:<5} {:<4} {:<14.4} {:<9.4} {}",
                s.agent.to_string(),
                s.sociability,
                s.epsilon.map(|e| format!("{e:.3}")).unwrap_or_else(|| "-".into()),
                s.predicted_rank.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
                s.empirical_rank,
                s.mean_regret,
                s.stderr,
                s.regret_bound.map(|b| format!("{b:.1}")).unwrap_or_else(|| "-".into()),
            );
        }
        let _ = writeln!(r);

        match (&self.ranking, &self.agreement) {
            (Some(rank), Some(a)) => {
                let _ = writeln!(r, "predicted ranking: {rank}");
                let _ = writeln!(
                    r,
                    "rank agreement: {} (kendall distance {} over {} distinguishable of {} ordered pairs, {} SE band)",
                    if a.agrees { "AGREE" } else { "DISAGREE" },
                    a.kendall_distance,
                    a.distinguishable_pairs,
                    a.strict_pairs,
                    analysis::SEPARATION_SE
                );
                for (b, w) in &a.discordant {
                    let _ = writeln!(r, "  discordant: agent {b} predicted better than agent {w}");
                }
                for (x, y) in &a.separated_ties {
                    let _ = writeln!(r, "  predicted tie separated empirically: agents {x} and {y}");
                }
            }
            _ => {
                let _ = writeln!(r, "predicted ranking: undefined (isolated agent)");
            }
        }

        let violations: Vec<String> = self
            .agents
            .iter()
            .flat_map(|s| {
                s.bound_violations()
                    .into_iter()
                    .map(move |arm| format!("agent {} arm {arm}", s.agent))
            })
            .collect();
        if self.agents.iter().all(|s| s.pull_bounds.iter().all(Option::is_none)) {
            let _ = writeln!(r, "suboptimal-sample bound: not evaluated");
        } else if violations.is_empty() {
            let _ = writeln!(r, "suboptimal-sample bound: holds for every agent and suboptimal arm");
        } else {
            let _ = writeln!(r, "suboptimal-sample bound: VIOLATED for {}", violations.join(", "));
        }

        if !self.zeta_sensitivity.is_empty() {
            let _ = writeln!(r);
            let _ = writeln!(r, "regret bound at T by zeta:");
            for (z, per_agent) in &self.zeta_sensitivity {
                let vals: Vec<String> = per_agent.iter().map(|b| format!("{b:.1}")).collect();
                let _ = writeln!(r, "  zeta={z}: {}", vals.join(" "));
            }
        }
        r
    }

    /// Writes `regret.csv`, `summary.csv` and `report.txt` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let open = |name: &str| {
            let path = dir.join(name);
            fs::File::create(&path)
                .map(io::BufWriter::new)
                .map_err(|e| Error::io(path, e))
        };
        emit_regret_csv(&self.monte_carlo, open("regret.csv")?).map_err(|e| Error::io(dir.join("regret.csv"), e))?;
        self.write_summary_csv(open("summary.csv")?)
            .map_err(|e| Error::io(dir.join("summary.csv"), e))?;
        let path = dir.join("report.txt");
        fs::write(&path, self.report()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn presets_match_tables() {
        let a = ScenarioConfig::preset("paper-all-to-all").unwrap();
        assert_eq!(a.graph, GraphSpec::Complete { num_agents: 6 });
        assert_eq!(a.policy.xi, 1.1);
        assert_eq!(a.arms.means, vec![40., 50., 50., 60., 70., 70., 80., 90., 92., 95.]);
        assert!(a.arms.variance_proxies.iter().all(|&v| v == 25.0));
        assert_eq!(a.sociability, vec![0.50, 0.85, 0.05, 0.50, 1.00, 0.90]);
        assert_eq!((a.horizon, a.runs), (500, 1000));

        let c = ScenarioConfig::preset("paper-cyclic").unwrap();
        assert_eq!(c.graph, GraphSpec::Cycle { num_agents: 6 });

        let c1 = ScenarioConfig::preset("paper-case1").unwrap();
        assert_eq!(c1.sociability, vec![0.5, 0.0, 0.0, 0.0]);
        assert_eq!(c1.graph, GraphSpec::Complete { num_agents: 4 });
        let c2 = ScenarioConfig::preset("paper-case2").unwrap();
        assert_eq!(c2.sociability, vec![0.5, 1.0, 1.0, 1.0]);

        assert!(matches!(ScenarioConfig::preset("nope"), Err(Error::UnknownPreset(_))));
        for p in PRESETS {
            ScenarioConfig::preset(p).unwrap().build().unwrap();
        }
    }

    #[test]
    fn preset_policies_use_performance_measure() {
        let sc = ScenarioConfig::preset("paper-all-to-all").unwrap().build().unwrap();
        let eps5 = sc.epsilons[4].unwrap();
        assert_eq!(sc.policies[4].inflation(), Inflation::Constant(eps5));
        assert!((eps5 - 0.374).abs() < 0.0005);
    }

    #[test]
    fn size_mismatch_is_config_error() {
        let mut cfg = ScenarioConfig::preset("paper-all-to-all").unwrap();
        cfg.graph = GraphSpec::Complete { num_agents: 5 };
        let err = cfg.build().unwrap_err();
        assert!(
            matches!(err, Error::Config { ref field, .. } if field == "sociability"),
            "{err}"
        );
        assert!(err.is_config_error());
    }

    #[test]
    fn parse_errors_carry_location() {
        let text = "name = \"x\"\nhorizon = 10\nruns = 1\nseed = 3\nsociability = [0.5]\n[arms]\nmeans = [1.0, 2.0]\nvariance_proxies = [1.0, 1.0]\n[graph]\nkind = \"complete\"\nnum_agents = 1\n[policy]\nxi = \"high\"\ninflation = { kind = \"zero\" }\n";
        let err = ScenarioConfig::from_toml_str(text, "bad.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("line 13"), "{msg}");

        let fixed = text.replace("\"high\"", "1.5");
        let cfg = ScenarioConfig::from_toml_str(&fixed, "ok.toml").unwrap();
        assert_eq!(cfg.bounds, BoundsSpec::default());

        let unknown = fixed.replace("seed = 3", "seed = 3\ncolour = 1");
        assert!(ScenarioConfig::from_toml_str(&unknown, "u.toml").is_err());
    }

    #[test]
    fn edge_list_graph_with_degree_check() {
        let mut cfg = ScenarioConfig::preset("paper-cyclic").unwrap();
        let ring: Vec<[usize; 2]> = (1..=6).map(|k| [k, k % 6 + 1]).collect();
        cfg.graph = GraphSpec::Edges {
            num_agents: 6,
            edges: ring.clone(),
            degree: Some(2),
        };
        let from_edges = cfg.build().unwrap();
        let cyc = ScenarioConfig::preset("paper-cyclic").unwrap().build().unwrap();
        assert_eq!(from_edges.network, cyc.network);

        cfg.graph = GraphSpec::Edges {
            num_agents: 6,
            edges: ring[..5].to_vec(),
            degree: Some(2),
        };
        assert!(cfg.build().is_err());
        cfg.graph = GraphSpec::Edges {
            num_agents: 6,
            edges: vec![[1, 7]],
            degree: None,
        };
        assert!(cfg.build().is_err());
    }

    #[test]
    fn isolated_agent_with_performance_measure_inflation_rejected() {
        let mut cfg = ScenarioConfig::preset("paper-case1").unwrap();
        cfg.graph = GraphSpec::Edges {
            num_agents: 4,
            edges: vec![[1, 2], [2, 3]],
            degree: None,
        };
        assert!(matches!(cfg.build(), Err(Error::Config { ref field, .. }) if field == "policy"));
        cfg.policy.inflation = InflationSpec::Zero;
        cfg.build().unwrap();
    }

    #[test]
    fn overrides_are_echoed() {
        let mut cfg = ScenarioConfig::preset("paper-case2").unwrap();
        let o = Overrides {
            seed: Some(9),
            runs: Some(3),
            horizon: None,
            zeta: Some(3.0),
        };
        let echoed = o.apply(&mut cfg);
        assert_eq!((cfg.seed, cfg.runs, cfg.bounds.zeta), (9, 3, 3.0));
        assert_eq!(echoed.len(), 3);
        assert_eq!(echoed[0], ("seed".into(), "9".into()));
    }

    #[test]
    fn decimal_format_keeps_nine_significant_digits() {
        assert_eq!(format_decimal(0.0), "0.000000000");
        assert_eq!(format_decimal(123.456), "123.456000");
        assert_eq!(format_decimal(0.00123456789), "0.00123456789");
        for x in [1.0 / 3.0, 98765.4321, 2.5e-7, 1234567890.5] {
            let s = format_decimal(x);
            let digits: String = s.chars().filter(char::is_ascii_digit).collect();
            let significant = digits.trim_start_matches('0').len();
            assert!(significant >= 9, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-8);
        }
    }

    #[test]
    fn regret_csv_rows() {
        let mut cfg = ScenarioConfig::preset("paper-case1").unwrap();
        cfg.graph = GraphSpec::Complete { num_agents: 2 };
        cfg.sociability = vec![0.5, 0.5];
        cfg.horizon = 3;
        cfg.runs = 4;
        let out = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        emit_regret_csv(&out.monte_carlo, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "t,agent,mean_cum_regret,stderr");
        let keys: Vec<(u64, usize)> = lines[1..]
            .iter()
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].parse().unwrap())
            })
            .collect();
        assert_eq!(keys, vec![(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]);
        for agent in ["1", "2"] {
            let col: Vec<f64> = lines[1..]
                .iter()
                .map(|l| l.split(',').collect::<Vec<_>>())
                .filter(|f| f[1] == agent)
                .map(|f| f[2].parse().unwrap())
                .collect();
            assert!(col.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn single_run_has_zero_stderr_column() {
        let mut cfg = ScenarioConfig::preset("paper-all-to-all").unwrap();
        cfg.runs = 1;
        cfg.horizon = 40;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.agents.iter().all(|s| s.stderr == 0.0));
    }

    fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
        (
            2usize..7,
            proptest::collection::vec(-100.0f64..100.0, 2..6),
            0.01f64..50.0,
            1.001f64..4.0,
            0u8..4,
            0.0f64..2.0,
            1u64..2000,
            1usize..5000,
            0u64..(i64::MAX as u64),
            1.0001f64..10.0,
        )
            .prop_flat_map(|(k, means, var, xi, infl, c, horizon, runs, seed, zeta)| {
                proptest::collection::vec(0.0f64..=1.0, k).prop_map(move |sociability| {
                    let inflation = match infl {
                        0 => InflationSpec::Zero,
                        1 => InflationSpec::Constant { value: c },
                        2 => InflationSpec::LogLog,
                        _ => InflationSpec::PerformanceMeasure,
                    };
                    let n = means.len();
                    ScenarioConfig {
                        name: format!("random-{k}"),
                        horizon,
                        runs,
                        seed,
                        sociability,
                        arms: ArmsConfig {
                            means: means.clone(),
                            variance_proxies: vec![var; n],
                        },
                        graph: if k % 2 == 0 {
                            GraphSpec::Cycle { num_agents: k }
                        } else {
                            GraphSpec::Edges {
                                num_agents: k,
                                edges: (1..k).map(|a| [a, a + 1]).collect(),
                                degree: None,
                            }
                        },
                        policy: PolicySpec { xi, inflation },
                        bounds: BoundsSpec {
                            zeta,
                            delta_prime_ratio: 0.05,
                        },
                    }
                })
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(cfg in arb_config()) {
            let text = cfg.to_toml_string().unwrap();
            let back = ScenarioConfig::from_toml_str(&text, "rt").unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
