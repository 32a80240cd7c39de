//! LP export of a fixed one-facility, two-customer model, compared with the
//! checked-in file. `DDDR_BLESS=1` rewrites the file.

use std::path::PathBuf;

use dddr_core::milp::{build_dddr, export_lp_text, DualBounds};
use dddr_core::model::{Customer, DemandModel, Facility, Instance, Support};

fn tiny() -> (Instance, DemandModel) {
    let facilities = vec![Facility {
        id: 1,
        x: 0.0,
        y: 0.0,
        open_cost: 50.0,
        capacity: 15.0,
    }];
    let customers = vec![
        Customer {
            id: 1,
            x: 3.0,
            y: 4.0,
            penalty: 20.0,
            revenue: 10.0,
        },
        Customer {
            id: 2,
            x: 6.0,
            y: 8.0,
            penalty: 25.0,
            revenue: 10.0,
        },
    ];
    let inst = Instance::from_coordinates(facilities, customers, 1.0);
    let support = Support::grid(10.0, 30.0, 10.0).unwrap();
    let base = DemandModel::decision_independent(vec![20.0, 18.0], vec![5.0, 4.0], 1, support);
    let model = base.with_lambda(vec![vec![0.1], vec![0.05]], vec![vec![0.2], vec![0.1]]);
    (inst, model)
}

#[test]
fn tiny_dddr_matches_golden_file() {
    let (inst, model) = tiny();
    let f = build_dddr(&inst, &model, &DualBounds::uniform(2, 100.0), Some(1), true).unwrap();
    let text = export_lp_text(&f.model);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tiny_dddr.lp");
    if std::env::var_os("DDDR_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(text, golden);
}
