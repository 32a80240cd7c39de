//! Cross-check of the in-crate branch and bound against scipy's HiGHS.
//! Skips when python3 or scipy is missing.

use dddr_core::benchmarks::gen_training;
use dddr_core::experiment::{generate_instance, ExperimentConfig, LambdaRecipe};
use dddr_core::milp::{build_dddr, build_sp_saa, DualBounds, MilpModel};
use dddr_core::model::SupportSpec;
use dddr_core::solvers::external::{scipy_available, solve_with_scipy};
use dddr_core::solvers::{branch_and_bound, BnbOptions, MipStatus};

fn config(ni: usize, nj: usize) -> ExperimentConfig {
    ExperimentConfig {
        facilities: ni,
        customers: nj,
        support: SupportSpec {
            min: 10.0,
            max: 100.0,
            step: 10.0,
        },
        lambda: LambdaRecipe::Distance {
            scale: 25.0,
            row_sum: 0.9,
        },
        ..Default::default()
    }
}

fn agree(name: &str, m: &MilpModel) {
    let ours = branch_and_bound(m, &BnbOptions::default()).unwrap();
    assert_eq!(ours.status, MipStatus::Optimal, "{name}");
    let theirs = solve_with_scipy(m).unwrap();
    assert_eq!(theirs.status, 0, "{name}: {}", theirs.message);
    let obj = theirs.objective.unwrap();
    assert!(
        (ours.objective - obj).abs() <= 1e-6 * obj.abs().max(1.0),
        "{name}: branch and bound {} vs HiGHS {obj}",
        ours.objective
    );
    assert!(m.max_violation(&theirs.x.unwrap()) < 1e-5, "{name}");
}

#[test]
fn branch_and_bound_matches_highs() {
    if !scipy_available() {
        eprintln!("scipy not available; skipping external cross-check");
        return;
    }
    for seed in 0..4u64 {
        let (ni, nj) = (2 + seed as usize, 3 + seed as usize);
        let (inst, model) = generate_instance(&config(ni, nj), 40 + seed).unwrap();
        let bounds = DualBounds::certified(&inst, &model).unwrap();
        let f = build_dddr(&inst, &model, &bounds, None, true).unwrap();
        agree(&format!("dddr seed {seed}"), &f.model);
        let train = gen_training(&model, 10, seed).unwrap();
        let f = build_sp_saa(&inst, &train, Some(2)).unwrap();
        agree(&format!("sp seed {seed}"), &f.model);
    }
}
