use std::fs;
use std::path::Path;

use log::info;
use rabin_synth::automata::{parse_hoa, translate_fragment, Dra};
use rabin_synth::env::traffic::{TRAFFIC_ACTIONS, TRAFFIC_ATOMS, TRAFFIC_FORMULA};
use rabin_synth::env::{
    build_grid_world, build_traffic_network, GridConfig, NaiveController, TrafficConfig, TrafficLayout,
};
use rabin_synth::learner::{run_trials, trial_log_csv, Exploration, LearnerConfig, LearnerState};
use rabin_synth::ltl::{parse_ltl, to_fragment};
use rabin_synth::mdp::{
    deserialize_mdp, deserialize_policy, serialize_mdp, serialize_policy, validate_mdp, LabeledMdp,
    PolicyFile, ProductMeta, StationaryPolicy,
};
use rabin_synth::product::{build_product, reward_vector, ProductMdp, RewardScheme};
use rabin_synth::sim::{simulate as run_simulation, Trace, TraceRecord};
use rabin_synth::solver::{check_policy, value_iteration, Solution, SolverConfig};
use rabin_synth::verifier::{satisfies_prob_one, Verdict};

use crate::error::{CliError, Result};
use crate::{BuildArgs, Case, DemoArgs, GenArgs, LearnArgs, ProductArgs, RewardArgs, SimulateArgs, SpecArgs, SynthArgs, VerifyArgs};

const GRID_FORMULA: &str = "G F a & G F b & G !c";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn check_model(m: LabeledMdp, origin: &str) -> Result<LabeledMdp> {
    let issues = validate_mdp(&m);
    if issues.is_empty() {
        return Ok(m);
    }
    let list: Vec<String> = issues.iter().take(5).map(|i| i.to_string()).collect();
    Err(CliError::Validation(format!(
        "{origin}: {} problem(s): {}",
        issues.len(),
        list.join("; ")
    )))
}

fn load_model(path: &Path) -> Result<LabeledMdp> {
    let m = deserialize_mdp(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    check_model(m, &path.display().to_string())
}

fn load_dra(spec: &SpecArgs, atoms: &[String]) -> Result<Dra> {
    if let Some(text) = &spec.ltl {
        let f = parse_ltl(text).map_err(|e| CliError::Parse(format!("LTL: {e}")))?;
        let frag = to_fragment(&f).ok_or_else(|| {
            CliError::Validation(format!(
                "{f} is outside the translatable fragment; supply an automaton with --hoa"
            ))
        })?;
        return Ok(translate_fragment(&frag, atoms)?);
    }
    let path = spec.hoa.as_ref().expect("clap requires --ltl or --hoa");
    Ok(parse_hoa(&read(path)?, atoms)?)
}

fn product_of(m: &LabeledMdp, dra: &Dra) -> Result<ProductMdp> {
    let p = build_product(m, dra).map_err(|e| CliError::Validation(e.to_string()))?;
    info!(
        "product: {} states ({} model x {} automaton), {} pair(s)",
        p.num_states(),
        p.num_mdp_states(),
        p.num_dra_states(),
        p.num_pairs()
    );
    Ok(p)
}

fn load_product(a: &ProductArgs) -> Result<ProductMdp> {
    let m = load_model(&a.model)?;
    let dra = load_dra(&a.spec, &m.atoms)?;
    product_of(&m, &dra)
}

/// 0-based pair indices selected by `--pair-index`.
fn pairs(p: &ProductMdp, r: &RewardArgs) -> Result<Vec<usize>> {
    match r.pair_index {
        None => Ok((0..p.num_pairs()).collect()),
        Some(i) if (1..=p.num_pairs()).contains(&i) => Ok(vec![i - 1]),
        Some(i) => Err(CliError::Validation(format!(
            "--pair-index {i} out of range, the automaton has {} pair(s)",
            p.num_pairs()
        ))),
    }
}

fn scheme(p: &ProductMdp, r: &RewardArgs, pair: usize) -> Result<RewardScheme> {
    let s = RewardScheme::new(pair, r.wg, r.wb);
    s.validate(p).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(s)
}

fn meta(p: &ProductMdp) -> ProductMeta {
    ProductMeta {
        mdp_states: p.num_mdp_states(),
        dra_states: p.num_dra_states(),
    }
}

fn policy_json(p: &ProductMdp, pi: &StationaryPolicy, utilities: Option<Vec<f64>>) -> String {
    serialize_policy(&PolicyFile::new(pi, &p.mdp().actions, meta(p), utilities))
}

fn load_policy(path: &Path, p: &ProductMdp) -> Result<(StationaryPolicy, PolicyFile)> {
    let f = deserialize_policy(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if f.product_meta != meta(p) {
        return Err(CliError::Validation(format!(
            "{}: policy is for a {}x{} product, this product is {}x{}",
            path.display(),
            f.product_meta.mdp_states,
            f.product_meta.dra_states,
            p.num_mdp_states(),
            p.num_dra_states()
        )));
    }
    let pi = f
        .to_policy(&p.mdp().actions)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    check_policy(p, &pi)?;
    Ok((pi, f))
}

fn report_json(v: &Verdict) -> String {
    serde_json::to_string_pretty(&v.report()).expect("report serializes")
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let m = match a.case {
        Case::Grid => build_grid_world(&GridConfig::default()).map_err(|e| CliError::Validation(e.to_string()))?,
        Case::Traffic => {
            let base = if a.approximate {
                TrafficConfig::approximate()
            } else {
                TrafficConfig::default()
            };
            let cfg = TrafficConfig {
                samples: a.samples.unwrap_or(base.samples),
                ..base
            };
            build_traffic_network(&cfg).map_err(|e| CliError::Validation(e.to_string()))?
        }
    };
    write(&a.out, &serialize_mdp(&m))
}

pub fn build(a: &BuildArgs) -> Result<()> {
    let p = load_product(&a.product)?;
    write(&a.out, &serialize_mdp(&p.to_labeled_mdp()))?;
    let side = serde_json::to_string_pretty(&p.acceptance_sidecar()).expect("sidecar serializes");
    write(&a.sidecar, &side)
}

struct Synthesis {
    solution: Solution,
    verdict: Verdict,
}

/// Value iteration for each selected pair in order; stops at the first
/// policy verified with probability one. Otherwise returns the first pair's
/// result.
fn synthesize(p: &ProductMdp, r: &RewardArgs, tol: f64) -> Result<Synthesis> {
    let cfg = SolverConfig {
        tolerance: tol,
        ..SolverConfig::with_gamma(r.gamma)
    };
    let mut first = None;
    for i in pairs(p, r)? {
        let solution = value_iteration(p, &scheme(p, r, i)?, &cfg)?;
        let verdict = satisfies_prob_one(p, &solution.policy)?;
        info!(
            "pair {}: {} iterations, prob_one = {}",
            i + 1,
            solution.iterations,
            verdict.prob_one
        );
        let s = Synthesis { solution, verdict };
        if s.verdict.prob_one {
            return Ok(s);
        }
        first.get_or_insert(s);
    }
    Ok(first.expect("automata have at least one pair"))
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let p = load_product(&a.product)?;
    let s = synthesize(&p, &a.reward, a.tol)?;
    write(&a.out, &policy_json(&p, &s.solution.policy, Some(s.solution.utilities.clone())))?;
    write(&a.report, &report_json(&s.verdict))?;
    if s.verdict.prob_one {
        Ok(())
    } else {
        Err(CliError::Negative)
    }
}

fn learner_config(p: &ProductMdp, a: &LearnArgs) -> Result<LearnerConfig> {
    if !(0.0..1.0).contains(&a.alpha) {
        return Err(CliError::Validation(format!("--alpha {} outside [0, 1)", a.alpha)));
    }
    if !(a.reward.gamma > 0.0 && a.reward.gamma < 1.0) {
        return Err(CliError::Validation(format!("--gamma {} outside (0, 1)", a.reward.gamma)));
    }
    let pair = pairs(p, &a.reward)?[0];
    Ok(LearnerConfig {
        alpha: a.alpha,
        gamma: a.reward.gamma,
        exploration: a.explore,
        ..LearnerConfig::new(scheme(p, &a.reward, pair)?)
    })
}

fn learned_utilities(ls: &LearnerState) -> Vec<f64> {
    ls.utilities
        .iter()
        .zip(ls.rewards())
        .map(|(u, w)| u.unwrap_or(*w))
        .collect()
}

pub fn learn(a: &LearnArgs) -> Result<()> {
    let p = load_product(&a.product)?;
    let mut ls = LearnerState::new(&p, learner_config(&p, a)?);
    if let Some(path) = &a.warm_policy {
        let (pi, f) = load_policy(path, &p)?;
        let u = f.utilities.ok_or_else(|| {
            CliError::Validation(format!("{}: warm start needs a policy file with utilities", path.display()))
        })?;
        let prior = a.prior_model.as_ref().map(|m| load_model(m)).transpose()?;
        if let Some(m) = &prior {
            if m.num_states() != p.num_mdp_states() || m.actions != p.mdp().actions {
                return Err(CliError::Validation(
                    "prior model must have the same states and actions as --model".into(),
                ));
            }
        }
        ls.warm_start(&u, &pi, prior.as_ref().map(|m| (m, a.prior_weight)));
    }
    let log = run_trials(&mut ls, &p, a.trials, a.steps, a.seed);
    write(&a.out, &policy_json(&p, &ls.greedy_policy(), Some(learned_utilities(&ls))))?;
    if let Some(path) = &a.log {
        write(path, &trial_log_csv(&log))?;
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    let p = load_product(&a.product)?;
    let (pi, _) = load_policy(&a.policy, &p)?;
    let v = satisfies_prob_one(&p, &pi)?;
    let json = report_json(&v);
    match &a.report {
        Some(path) => write(path, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

/// Queue layout of `m` if it is the default traffic network.
fn traffic_layout(m: &LabeledMdp) -> Option<TrafficLayout> {
    let layout = TrafficConfig::default().layout();
    let is_traffic = m.atoms.iter().eq(TRAFFIC_ATOMS.iter())
        && m.actions.iter().eq(TRAFFIC_ACTIONS.iter())
        && m.num_states() == layout.num_states();
    is_traffic.then_some(layout)
}

/// Trace CSV; traffic traces get the subinterval midpoints `x1..x4`.
fn trace_csv(p: &ProductMdp, trace: &Trace) -> String {
    match traffic_layout(p.mdp()) {
        None => trace.to_csv(p, &[]),
        Some(layout) => {
            let cols: Vec<Box<dyn Fn(&TraceRecord) -> String>> = (0..4)
                .map(|l| {
                    let layout = layout.clone();
                    Box::new(move |r: &TraceRecord| layout.midpoints(r.mdp_state)[l].to_string())
                        as Box<dyn Fn(&TraceRecord) -> String>
                })
                .collect();
            let names = ["x1", "x2", "x3", "x4"];
            let extra: Vec<(&str, &dyn Fn(&TraceRecord) -> String)> =
                names.iter().zip(&cols).map(|(n, f)| (*n, f.as_ref())).collect();
            trace.to_csv(p, &extra)
        }
    }
}

fn naive_controller(p: &ProductMdp) -> Result<NaiveController> {
    if !p.mdp().actions.iter().eq(TRAFFIC_ACTIONS.iter()) {
        return Err(CliError::Validation("--naive needs a model with the traffic actions".into()));
    }
    if (0..p.num_states()).any(|sp| !p.is_enabled(sp, 0) || !p.is_enabled(sp, 3)) {
        return Err(CliError::Validation("--naive needs (1,2) and (3,4) enabled everywhere".into()));
    }
    Ok(NaiveController::default())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let p = load_product(&a.product)?;
    let pair = pairs(&p, &a.reward)?[0];
    let w = reward_vector(&p, &scheme(&p, &a.reward, pair)?);
    let trace = match &a.controller.policy {
        Some(path) => {
            let (mut pi, _) = load_policy(path, &p)?;
            run_simulation(&p, &mut pi, a.steps, &w, a.seed)
        }
        None => {
            let mut c = naive_controller(&p)?;
            run_simulation(&p, &mut c, a.steps, &w, a.seed)
        }
    };
    let csv = trace_csv(&p, &trace);
    match &a.out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn grid_demo(a: &DemoArgs) -> Result<()> {
    let dir = &a.out_dir;
    let m = build_grid_world(&GridConfig::default()).map_err(|e| CliError::Validation(e.to_string()))?;
    write(&dir.join("grid.json"), &serialize_mdp(&m))?;
    let spec = SpecArgs {
        ltl: Some(GRID_FORMULA.into()),
        hoa: None,
    };
    let p = product_of(&m, &load_dra(&spec, &m.atoms)?)?;
    let reward = RewardArgs {
        gamma: 0.98,
        wg: 500.0,
        wb: -500.0,
        pair_index: None,
    };

    let s = synthesize(&p, &reward, 1e-8)?;
    write(&dir.join("grid_synth_policy.json"), &policy_json(&p, &s.solution.policy, Some(s.solution.utilities.clone())))?;
    write(&dir.join("grid_synth_report.json"), &report_json(&s.verdict))?;

    let cfg = LearnerConfig {
        exploration: Exploration::Uniform,
        ..LearnerConfig::new(scheme(&p, &reward, 0)?)
    };
    let mut ls = LearnerState::new(&p, cfg);
    let log = run_trials(&mut ls, &p, 600, 200, a.seed);
    let mut learned = ls.greedy_policy();
    let v = satisfies_prob_one(&p, &learned)?;
    write(&dir.join("grid_learned_policy.json"), &policy_json(&p, &learned, Some(learned_utilities(&ls))))?;
    write(&dir.join("grid_trials.csv"), &trial_log_csv(&log))?;
    write(&dir.join("grid_learned_report.json"), &report_json(&v))?;
    let w = reward_vector(&p, &scheme(&p, &reward, 0)?);
    let trace = run_simulation(&p, &mut learned, 1000, &w, a.seed);
    write(&dir.join("grid_trace.csv"), &trace_csv(&p, &trace))?;

    let visits = |atom: u64| trace.records.iter().filter(|r| r.labels >> atom & 1 == 1).count();
    println!("grid product: {} states", p.num_states());
    println!("synthesized policy prob_one: {}", s.verdict.prob_one);
    println!("learned policy prob_one: {}", v.prob_one);
    println!(
        "1000-step trace under the learned policy: A {} times, B {} times, C {} times",
        visits(0),
        visits(1),
        visits(2)
    );
    Ok(())
}

/// Fraction of the last 50 steps with links 1 and 2 at or below 30.
fn threshold_share(trace: &Trace) -> f64 {
    let tail = &trace.records[trace.records.len().saturating_sub(50)..];
    tail.iter().filter(|r| r.labels & 0b11 == 0b11).count() as f64 / tail.len() as f64
}

fn traffic_demo(a: &DemoArgs) -> Result<()> {
    let dir = &a.out_dir;
    let with_samples = |cfg: TrafficConfig| TrafficConfig {
        samples: a.samples.unwrap_or(cfg.samples),
        ..cfg
    };
    let build = |cfg: &TrafficConfig| build_traffic_network(cfg).map_err(|e| CliError::Validation(e.to_string()));
    let truth = build(&with_samples(TrafficConfig::default()))?;
    let approx = build(&with_samples(TrafficConfig::approximate()))?;
    write(&dir.join("traffic.json"), &serialize_mdp(&truth))?;
    write(&dir.join("traffic_approx.json"), &serialize_mdp(&approx))?;
    let spec = SpecArgs {
        ltl: Some(TRAFFIC_FORMULA.into()),
        hoa: None,
    };
    let p = product_of(&truth, &load_dra(&spec, &truth.atoms)?)?;
    let pa = product_of(&approx, &load_dra(&spec, &approx.atoms)?)?;
    // bad states dominate: the objective has a safety part and a
    // persistence part that are both violated transiently
    let reward = RewardArgs {
        gamma: 0.98,
        wg: 1.0,
        wb: -1000.0,
        pair_index: None,
    };

    let s = synthesize(&p, &reward, 1e-8)?;
    write(&dir.join("traffic_synth_report.json"), &report_json(&s.verdict))?;

    let w = reward_vector(&p, &scheme(&p, &reward, 0)?);
    let mut naive = naive_controller(&p)?;
    let naive_trace = run_simulation(&p, &mut naive, 199, &w, a.seed);
    write(&dir.join("traffic_naive_trace.csv"), &trace_csv(&p, &naive_trace))?;

    let warm = synthesize(&pa, &reward, 1e-8)?;
    let cfg = LearnerConfig {
        exploration: Exploration::EpsilonGreedy {
            epsilon: 0.1,
            decay: 1.0,
            min: 0.0,
        },
        ..LearnerConfig::new(scheme(&p, &reward, 0)?)
    };
    let mut ls = LearnerState::new(&p, cfg);
    ls.warm_start(&warm.solution.utilities, &warm.solution.policy, Some((pa.mdp(), 20)));
    let log = run_trials(&mut ls, &p, 2000, 200, a.seed);
    let mut learned = ls.greedy_policy();
    write(&dir.join("traffic_learned_policy.json"), &policy_json(&p, &learned, Some(learned_utilities(&ls))))?;
    write(&dir.join("traffic_trials.csv"), &trial_log_csv(&log))?;
    let learned_trace = run_simulation(&p, &mut learned, 199, &w, a.seed);
    write(&dir.join("traffic_learned_trace.csv"), &trace_csv(&p, &learned_trace))?;

    println!("traffic product: {} states", p.num_states());
    println!("synthesized policy on the true model prob_one: {}", s.verdict.prob_one);
    println!(
        "last 50 steps with x1, x2 <= 30: naive {:.0}%, learned {:.0}%",
        100.0 * threshold_share(&naive_trace),
        100.0 * threshold_share(&learned_trace)
    );
    Ok(())
}

pub fn demo(a: &DemoArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    match a.case {
        Case::Grid => grid_demo(a),
        Case::Traffic => traffic_demo(a),
    }
}

