mod common;

use std::sync::Arc;

use planrec::engine::{Session, SessionOptions};
use planrec::generator::{gen_demo, GenConfig};
use planrec::oracle::{min_cover_cardinality, validate_cover, DEFAULT_MAX_LEN};
use planrec::transcript::Step;
use planrec::{explain, Intent, KnowledgeBase};
use proptest::prelude::*;

use common::*;

fn session(kb: &Arc<KnowledgeBase>, init: &[planrec::EnvObject], steps: &[Step]) -> Session {
    let mut s = Session::new(Arc::clone(kb), init.to_vec(), SessionOptions::default()).unwrap();
    for step in steps {
        s.push_step(&step.action, &step.changes).unwrap();
    }
    s
}

/// Expanding the top-level instances must give back the observed actions.
fn assert_expands_to_input(s: &Session, steps: &[Step]) {
    let mut prims = Vec::new();
    for top in s.top_level().unwrap() {
        for p in s.expand(top) {
            let inst = s.timeline().instance(p);
            prims.push((inst.action_type.clone(), inst.args.clone()));
        }
    }
    let observed: Vec<_> = steps
        .iter()
        .map(|st| (st.action.name.clone(), st.action.args.clone()))
        .collect();
    assert_eq!(prims, observed);
}

#[test]
fn task_fixtures_expand_to_their_input() {
    let kb = battery();
    for name in TASKS {
        let t = task(name);
        let mut s = session(&kb, &t.init, &t.steps);
        let ex = s.finish().unwrap();
        assert!(ex.is_gapless(), "{name}");
        assert_eq!(ex.covered_actions, t.steps.len());
        assert_expands_to_input(&s, &t.steps);
    }
}

#[test]
fn swap_fixture_uses_the_temporary_location_variant() {
    let t = task("swap-red-with-green-1");
    let ex = explain(battery(), t.init, &t.steps).unwrap();
    assert!(ex
        .intents
        .contains(&Intent::new("swap", &["red-drive", "green-drive"], 4, 13)));
}

#[test]
fn swap_fixture_uses_the_hold_aside_variant() {
    let t = task("swap-red-with-green-2");
    let ex = explain(battery(), t.init, &t.steps).unwrap();
    assert!(ex
        .intents
        .contains(&Intent::new("swap", &["red-drive", "green-drive"], 4, 11)));
}

#[test]
fn fixture_minimum_matches_oracle() {
    let kb = battery();
    for name in TASKS {
        let t = task(name);
        if t.steps.len() > DEFAULT_MAX_LEN {
            continue;
        }
        let ex = explain(Arc::clone(&kb), t.init.clone(), &t.steps).unwrap();
        assert!(validate_cover(&kb, &t.steps, &t.init, &ex), "{name}");
        assert_eq!(
            min_cover_cardinality(&kb, &t.steps, &t.init).unwrap(),
            Some(ex.intents.len()),
            "{name}"
        );
    }
}

#[test]
fn each_prefix_is_explained_minimally() {
    // Online use: after every step the current explanation is already minimal.
    let kb = battery();
    let t = task("replace-red-with-green-1");
    let mut s = Session::new(Arc::clone(&kb), t.init.clone(), SessionOptions::default()).unwrap();
    for (i, step) in t.steps.iter().enumerate() {
        s.push_step(&step.action, &step.changes).unwrap();
        let ex = s.finish().unwrap();
        let prefix = &t.steps[..=i];
        assert_eq!(
            min_cover_cardinality(&kb, prefix, &t.init).unwrap(),
            Some(ex.intents.len()),
            "prefix of {} steps",
            i + 1
        );
    }
}

#[test]
fn explanations_are_deterministic() {
    let kb = battery();
    let t = task("swap-red-with-green-2");
    let a = explain(Arc::clone(&kb), t.init.clone(), &t.steps).unwrap();
    let b = explain(kb, t.init, &t.steps).unwrap();
    assert_eq!(a.to_sexp(), b.to_sexp());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_demos_round_trip(seed in 0u64..100_000, n_top in 0usize..4) {
        let kb = battery();
        let demo = gen_demo(&kb, &GenConfig::new(seed, n_top, battery_world())).unwrap();
        let mut s = session(&kb, &demo.init, &demo.steps);
        let ex = s.finish().unwrap();
        prop_assert!(ex.intents.len() <= n_top);
        prop_assert_eq!(ex.covered_actions, demo.steps.len());
        assert_expands_to_input(&s, &demo.steps);
        if demo.steps.len() <= DEFAULT_MAX_LEN {
            prop_assert!(validate_cover(&kb, &demo.steps, &demo.init, &ex));
            prop_assert_eq!(min_cover_cardinality(&kb, &demo.steps, &demo.init).unwrap(), Some(ex.intents.len()));
        }
    }

    #[test]
    fn generated_truth_is_a_cover(seed in 0u64..100_000, n_top in 1usize..4) {
        // The generator's own intentions, laid end to end, must be derivable.
        let kb = battery();
        let demo = gen_demo(&kb, &GenConfig::new(seed, n_top, battery_world())).unwrap();
        prop_assume!(demo.steps.len() <= DEFAULT_MAX_LEN);
        let chart = planrec::oracle::Chart::build(&kb, &demo.init, &demo.steps, DEFAULT_MAX_LEN).unwrap();
        let derivable: Vec<_> = chart.intents().into_iter().filter(|i| i.start == 0).collect();
        let first = &demo.ground_truth[0];
        prop_assert!(derivable.iter().any(|i| i.action_type == first.name && i.args == first.args));
    }
}
