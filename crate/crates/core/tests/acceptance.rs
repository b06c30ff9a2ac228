//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use common::{agent, paper_instance, replay, single_agent_ucb};
use mamab::analysis::{
    combined_stderr, concentration_bound, empirical_tail_probability, expected_samples_bound, performance_measure,
    BoundParams, EmpiricalRegret,
};
use mamab::policy::select_arm;
use mamab::scenario::Scenario;
use mamab::sim::{EpisodeSeeds, Simulation};
use mamab::{
    run_episode, run_monte_carlo, AgentBeliefs, AgentId, ArmId, BanditInstance, Inflation, MonteCarloSummary,
    ObservationNetwork, PolicyConfig, ScenarioConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS_TOL: f64 = 5e-4;
const SEPARATION: f64 = 2.0;

const ALL_TO_ALL_EPS: [f64; 6] = [0.542, 0.415, 0.825, 0.542, 0.374, 0.401];
const CYCLIC_EPS: [f64; 6] = [0.624, 0.284, 0.783, 0.483, 0.418, 0.456];

type Check = Result<String, String>;

struct Preset {
    scenario: Scenario,
    mc: MonteCarloSummary,
    cfg: ScenarioConfig,
}

impl Preset {
    fn load(name: &str) -> Preset {
        let cfg = ScenarioConfig::preset(name).expect("preset");
        let scenario = cfg.build().expect("build");
        let mc = run_monte_carlo(
            &scenario.instance,
            &scenario.network,
            &scenario.policies,
            cfg.horizon,
            cfg.runs,
            cfg.seed,
        )
        .expect("monte carlo");
        Preset { scenario, mc, cfg }
    }

    fn regret(&self, n: usize) -> EmpiricalRegret {
        EmpiricalRegret {
            mean: self.mc.terminal_mean(agent(n)),
            stderr: self.mc.terminal_stderr(agent(n)),
        }
    }

    /// Checks `a < b` by more than `SEPARATION` combined standard errors.
    fn below(&self, a: usize, b: usize, failures: &mut Vec<String>) {
        let (ra, rb) = (self.regret(a), self.regret(b));
        let se = combined_stderr(&ra, &rb);
        if rb.mean - ra.mean <= SEPARATION * se {
            failures.push(format!(
                "R{a}={:.2} vs R{b}={:.2} (gap {:.2}, 2SE {:.2})",
                ra.mean,
                rb.mean,
                rb.mean - ra.mean,
                SEPARATION * se
            ));
        }
    }

    fn terminal_line(&self) -> String {
        (1..=self.mc.num_agents())
            .map(|n| {
                let r = self.regret(n);
                format!("{n}:{:.1}±{:.1}", r.mean, r.stderr)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn verdict(failures: Vec<String>, ok: String) -> Check {
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures.join("; "))
    }
}

fn c1() -> Check {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, table) in [("paper-all-to-all", ALL_TO_ALL_EPS), ("paper-cyclic", CYCLIC_EPS)] {
        let sc = ScenarioConfig::preset(name).unwrap().build().unwrap();
        for (k, &expected) in table.iter().enumerate() {
            let got = performance_measure(&sc.network, AgentId::from_index(k)).unwrap();
            let err = (got - expected).abs();
            worst = worst.max(err);
            if err > EPS_TOL {
                failures.push(format!(
                    "{name} agent {}: computed {got:.6}, table {expected:.3}, |diff| {err:.6}",
                    k + 1
                ));
            }
        }
    }
    verdict(failures, format!("max |diff| {worst:.6}"))
}

fn c2(p: &Preset) -> Check {
    let mut failures = Vec::new();
    p.below(5, 6, &mut failures);
    p.below(6, 2, &mut failures);
    p.below(2, 1, &mut failures);
    p.below(2, 4, &mut failures);
    p.below(1, 3, &mut failures);
    p.below(4, 3, &mut failures);
    let (r1, r4) = (p.regret(1), p.regret(4));
    if (r1.mean - r4.mean).abs() >= SEPARATION * combined_stderr(&r1, &r4) {
        failures.push(format!("agents 1 and 4 separated: {:.2} vs {:.2}", r1.mean, r4.mean));
    }
    verdict(failures, p.terminal_line())
}

fn c3(p: &Preset) -> Check {
    let mut failures = Vec::new();
    for j in [1, 3, 4, 5, 6] {
        p.below(2, j, &mut failures);
    }
    for j in [1, 2, 4, 5, 6] {
        p.below(j, 3, &mut failures);
    }
    p.below(4, 1, &mut failures);
    verdict(failures, p.terminal_line())
}

fn c4(case1: &Preset, case2: &Preset) -> Check {
    let (a, b) = (case1.regret(1), case2.regret(1));
    let se = combined_stderr(&a, &b);
    let line = format!(
        "case1 R1={:.2}±{:.2}, case2 R1={:.2}±{:.2}",
        a.mean, a.stderr, b.mean, b.stderr
    );
    if a.mean - b.mean > SEPARATION * se || b.mean - a.mean > SEPARATION * se {
        Ok(line)
    } else {
        Err(format!("not separated: {line}"))
    }
}

fn c5(presets: &[&Preset]) -> Check {
    let mut failures = Vec::new();
    let mut tightest = f64::INFINITY;
    for p in presets {
        let inst = &p.scenario.instance;
        let params = BoundParams::new(2.0, p.cfg.policy.xi, p.mc.num_agents()).unwrap();
        for k in 0..p.mc.num_agents() {
            let eps = p.scenario.epsilons[k].unwrap();
            for arm in inst.arms() {
                let gap = inst.gap(arm);
                if gap == 0.0 {
                    continue;
                }
                let sigma = (p.mc.num_agents() as f64).sqrt() * inst.sigma_prime(arm);
                let bound = expected_samples_bound(&params, sigma, gap, eps, p.cfg.horizon).unwrap();
                let pulls = p.mc.mean_pulls(AgentId::from_index(k), arm);
                tightest = tightest.min(bound - pulls);
                if pulls > bound {
                    failures.push(format!(
                        "{} agent {} arm {arm}: {pulls:.2} > {bound:.2}",
                        p.cfg.name,
                        k + 1
                    ));
                }
            }
        }
    }
    verdict(failures, format!("smallest slack {tightest:.2} pulls"))
}

fn c6(p: &Preset) -> Check {
    let delta = 2.1;
    let radius_exponent = delta * 1.05;
    let inst = &p.scenario.instance;
    let arm = inst.optimal_arm();
    let bound = concentration_bound(2.0, p.mc.num_agents(), p.cfg.horizon as f64, delta);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..p.mc.num_agents() {
        let est = empirical_tail_probability(
            inst,
            &p.scenario.network,
            &p.scenario.policies,
            arm,
            AgentId::from_index(k),
            p.cfg.horizon,
            radius_exponent,
            1000,
            p.cfg.seed,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(est.frequency);
        if est.frequency > bound {
            failures.push(format!(
                "agent {}: {}/{} exceed, bound {bound:.3e}",
                k + 1,
                est.exceedances,
                est.runs_counted
            ));
        }
    }
    verdict(failures, format!("max frequency {worst:.3e} <= bound {bound:.3e}"))
}

fn c7() -> Check {
    let inst = BanditInstance::new(vec![10.0, 12.0, 13.0, 15.0, 16.0], vec![4.0, 1.0, 9.0, 4.0, 2.25]).unwrap();
    let k = 3;
    let net = ObservationNetwork::complete(vec![0.0; k]).unwrap();
    let f = 0.3;
    let xi = 1.1;
    let policies = vec![PolicyConfig::new(xi, Inflation::Constant(f), k).unwrap(); k];
    let horizon = 200;
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let ep = run_episode(&inst, &net, &policies, horizon, seed).unwrap();
        let seeds = EpisodeSeeds::derive(seed, k);
        for a in 0..k {
            let oracle = single_agent_ucb(&inst, k, xi, f, &seeds, a, horizon);
            let engine_choices: Vec<usize> = ep.choices.iter().map(|row| row[a].index()).collect();
            let engine_regret: Vec<f64> = ep.trace.agent_curve(AgentId::from_index(a)).collect();
            let same_regret = engine_regret.len() == oracle.cumulative_regret.len()
                && engine_regret
                    .iter()
                    .zip(&oracle.cumulative_regret)
                    .all(|(x, y)| x.to_bits() == y.to_bits());
            if engine_choices != oracle.choices || !same_regret {
                failures.push(format!("seed {seed} agent {}", a + 1));
            }
        }
    }
    verdict(failures, "100 seeds x 3 agents bit-identical".to_string())
}

fn c8(p: &Preset) -> Check {
    let best = (1..=p.mc.num_agents())
        .min_by(|&a, &b| p.regret(a).mean.total_cmp(&p.regret(b).mean))
        .unwrap();
    let a = agent(best);
    let (r125, r250, r500) = (
        p.mc.mean_regret(125, a),
        p.mc.mean_regret(250, a),
        p.mc.mean_regret(500, a),
    );
    let line = format!(
        "agent {best}: R(250)-R(125)={:.2}, R(500)-R(250)={:.2}",
        r250 - r125,
        r500 - r250
    );
    if r500 - r250 < r250 - r125 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn c9() -> Check {
    let mut failures = Vec::new();
    let inst = paper_instance();
    let networks = [
        ObservationNetwork::complete(vec![0.2, 0.5, 0.0, 0.2, 0.7, 0.6]).unwrap(),
        ObservationNetwork::cycle(vec![0.2, 0.5, 0.0, 0.2, 0.7, 0.6]).unwrap(),
    ];
    for (g, net) in networks.iter().enumerate() {
        let policies = vec![PolicyConfig::new(1.1, Inflation::Constant(0.4), 6).unwrap(); 6];
        for seed in 0..5 {
            let mut sim = Simulation::new(&inst, net, &policies, seed).unwrap();
            let mut rounds = Vec::new();
            for t in 1..=300u64 {
                rounds.push(sim.step());
                for (k, b) in sim.beliefs().iter().enumerate() {
                    if b.total_pulls() != t {
                        failures.push(format!("graph {g} seed {seed}: pulls of agent {} != t", k + 1));
                    }
                    if inst.arms().any(|i| b.obs_count(i) < b.pull_count(i)) {
                        failures.push(format!("graph {g} seed {seed}: N < n for agent {}", k + 1));
                    }
                }
            }
            let replayed = replay(&rounds, 6, inst.num_arms());
            for (k, (b, r)) in sim.beliefs().iter().zip(&replayed).enumerate() {
                let matches = inst.arms().all(|i| {
                    b.obs_count(i) == r.obs_counts[i.index()]
                        && b.pull_count(i) == r.pulls[i.index()]
                        && b.obs_reward_sum(i).to_bits() == r.obs_sums[i.index()].to_bits()
                });
                if !matches {
                    failures.push(format!("graph {g} seed {seed}: replay mismatch for agent {}", k + 1));
                }
            }
            let a = run_episode(&inst, net, &policies, 300, seed).unwrap();
            let b = run_episode(&inst, net, &policies, 300, seed).unwrap();
            if a != b {
                failures.push(format!("graph {g} seed {seed}: not deterministic"));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..1000 {
        let k = rng.random_range(2..=8);
        let p: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let net = ObservationNetwork::complete(p.clone()).unwrap();
        let eps: Vec<f64> = (0..k)
            .map(|a| performance_measure(&net, AgentId::from_index(a)).unwrap())
            .collect();
        for a in 0..k {
            for b in 0..k {
                if p[a] > p[b] && eps[a] >= eps[b] {
                    failures.push(format!("trial {trial}: p{a}>p{b} but eps not smaller"));
                }
            }
        }
        // Own sociability up, or a neighbor's down, must lower / raise eps.
        let a = rng.random_range(0..k);
        let mut up = p.clone();
        up[a] = (p[a] + 0.1).min(1.0);
        let net_up = ObservationNetwork::complete(up.clone()).unwrap();
        if up[a] > p[a] && performance_measure(&net_up, AgentId::from_index(a)).unwrap() >= eps[a] {
            failures.push(format!("trial {trial}: eps not decreasing in own p"));
        }
        let b = (a + 1) % k;
        if up[a] > p[a] && performance_measure(&net_up, AgentId::from_index(b)).unwrap() <= eps[b] {
            failures.push(format!("trial {trial}: eps not increasing in neighbor p"));
        }

        // Shifting every observed reward by c must not change the choice.
        let n_arms = rng.random_range(2..=6);
        let c = rng.random_range(-100.0..100.0);
        let mut plain = AgentBeliefs::new(n_arms);
        let mut moved = AgentBeliefs::new(n_arms);
        for i in 0..n_arms {
            for _ in 0..rng.random_range(1..20) {
                let x = rng.random_range(-5.0..5.0);
                plain.record_pull(ArmId::from_index(i), x);
                moved.record_pull(ArmId::from_index(i), x + c);
            }
        }
        let sigma_primes = vec![1.0; n_arms];
        let cfg = PolicyConfig::new(1.5, Inflation::Constant(0.2), 1).unwrap();
        let t = plain.total_pulls();
        let a = select_arm(&plain, &cfg, &sigma_primes, t, &mut ChaCha8Rng::seed_from_u64(trial));
        let b = select_arm(&moved, &cfg, &sigma_primes, t, &mut ChaCha8Rng::seed_from_u64(trial));
        if a != b {
            failures.push(format!("trial {trial}: choice changed under translation by {c:.2}"));
        }
    }
    verdict(
        failures,
        "conservation, replay, determinism, eps monotonicity, translation invariance".to_string(),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, &str, Check)> = Vec::new();
    let mut run = |id: &'static str, title: &'static str, f: &dyn Fn() -> Check| {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {id} {title}: {detail}");
        results.push((id, title, r));
    };

    run("C1", "performance-measure tables", &c1);
    let all = Preset::load("paper-all-to-all");
    let cyc = Preset::load("paper-cyclic");
    run("C2", "all-to-all regret ordering", &|| c2(&all));
    run("C3", "cyclic regret extremes", &|| c3(&cyc));
    let case1 = Preset::load("paper-case1");
    let case2 = Preset::load("paper-case2");
    run("C4", "agent 1 regret depends on neighbor sociability", &|| {
        c4(&case1, &case2)
    });
    run("C5", "expected suboptimal samples within bound", &|| c5(&[&all, &cyc]));
    run("C6", "concentration tail frequency within bound", &|| c6(&all));
    run("C7", "zero sociability reduces to single-agent UCB", &c7);
    run("C8", "sublinear regret growth of the best agent", &|| c8(&all));
    run("C9", "simulator and policy invariants", &c9);

    let failed = results.iter().filter(|(_, _, r)| r.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
