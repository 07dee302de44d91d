mod common;

use rabin_synth::automata::translate_fragment;
use rabin_synth::env::{build_grid_world, GridConfig};
use rabin_synth::learner::{run_trials, trial_log_csv, Exploration, LearnerConfig, LearnerState};
use rabin_synth::ltl::{parse_ltl, to_fragment};
use rabin_synth::product::{build_product, ProductMdp, RewardScheme};

fn grid() -> ProductMdp {
    let m = build_grid_world(&GridConfig::default()).unwrap();
    let spec = to_fragment(&parse_ltl("G F a & G F b & G !c").unwrap()).unwrap();
    build_product(&m, &translate_fragment(&spec, &m.atoms).unwrap()).unwrap()
}

fn learner(p: &ProductMdp, exploration: Exploration) -> LearnerState {
    let mut cfg = LearnerConfig::new(RewardScheme::new(0, 500.0, -500.0));
    cfg.exploration = exploration;
    LearnerState::new(p, cfg)
}

#[test]
fn counts_stay_consistent_over_a_long_run() {
    let p = grid();
    let m = p.mdp();
    for exploration in [
        Exploration::Uniform,
        "eps:0.2:0.9999".parse().unwrap(),
        "opt:5".parse().unwrap(),
    ] {
        let mut ls = learner(&p, exploration);
        let log = run_trials(&mut ls, &p, 500, 200, 3);
        assert_eq!(log.len(), 500);
        assert_eq!(ls.total_steps, 100_000);
        assert_eq!(ls.n_sa.iter().sum::<u64>(), 100_000);
        for s in 0..m.num_states() {
            for a in 0..m.num_actions() {
                let k = s * m.num_actions() + a;
                assert_eq!(ls.n_next[k].values().sum::<u64>(), ls.n_sa[k]);
                let row = ls.p_hat(s, a);
                if ls.n_sa[k] == 0 {
                    assert!(row.is_empty());
                    continue;
                }
                assert!((row.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
                // only true successors are ever observed
                assert!(row.iter().all(|&(t, _)| m.probability(s, a, t) > 0.0), "{exploration}");
            }
        }
        let bound = 500.0 / (1.0 - 0.98) + 1e-6;
        for u in ls.utilities.iter().flatten() {
            assert!(u.is_finite() && u.abs() <= bound, "{u}");
        }
        let pi = ls.greedy_policy();
        assert!((0..p.num_states()).all(|sp| p.is_enabled(sp, pi.action(sp))));
    }
}

#[test]
fn runs_are_reproducible() {
    let p = grid();
    let mut a = learner(&p, Exploration::Uniform);
    let mut b = learner(&p, Exploration::Uniform);
    let la = run_trials(&mut a, &p, 50, 200, 9);
    let lb = run_trials(&mut b, &p, 50, 200, 9);
    assert_eq!(la, lb);
    assert_eq!(a, b);
    let mut c = learner(&p, Exploration::Uniform);
    run_trials(&mut c, &p, 50, 200, 10);
    assert_ne!(a.n_next, c.n_next);
}

#[test]
fn zero_trials_keep_the_initial_policy() {
    let p = grid();
    let mut ls = learner(&p, Exploration::Uniform);
    let log = run_trials(&mut ls, &p, 0, 200, 1);
    assert!(log.is_empty());
    assert_eq!(trial_log_csv(&log), "trial,steps,g_visits,b_visits,resets\n");
    let first: Vec<usize> = (0..p.num_states()).map(|sp| p.choices(sp)[0].action).collect();
    assert_eq!(ls.greedy_policy().choices, first);
}

#[test]
fn estimates_converge_on_the_grid() {
    let p = grid();
    let mut ls = learner(&p, Exploration::Uniform);
    run_trials(&mut ls, &p, 600, 200, 0);
    let err = ls.estimate_error(p.mdp(), 1000).expect("some pair has 1000 visits");
    assert!(err < 0.08, "{err}");
}
