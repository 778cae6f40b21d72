//! Planner benchmark: incentive compatibility and welfare ordering.

use bandit_bonus::continuous::ContinuousModel;
use bandit_bonus::CostDistribution;
use proptest::prelude::*;

fn model(r: f64, l: f64, z: f64, s: f64, cbar: f64) -> ContinuousModel<f64> {
    ContinuousModel::new(r, l, z, s, CostDistribution::uniform(cbar).unwrap())
        .unwrap()
        .with_large_cbar_assumed(true)
}

#[test]
fn truthful_reports_are_optimal() {
    let m = model(0.5, 0.8, 7.0, 2.8, 1.0);
    let sol = m.solve_planner(1e-4).unwrap();
    for i in 1..40 {
        let alpha = i as f64 / 40.0;
        for j in 0..=20 {
            let c = j as f64 / 20.0;
            let truth = sol.agent_utility(alpha, c, c).unwrap();
            for k in 0..=20 {
                let lie = sol.agent_utility(alpha, c, k as f64 / 20.0).unwrap();
                assert!(truth >= lie - 1e-9, "alpha {alpha}, c {c}, report {k}/20");
            }
        }
    }
}

#[test]
fn welfare_curves_ordered_on_a_second_parameter_set() {
    let m = model(0.3, 1.1, 5.0, 0.4 * 5.5, 2.0);
    let rows = m.welfare_compare(1e-4).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r.w + 1e-6 >= r.lambda && r.lambda + 1e-6 >= r.pi, "alpha {}", r.alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn planner_experiments_longer(
        r in 0.3f64..1.2, l in 0.4f64..1.5, z in 2.0f64..10.0, frac in 0.25f64..0.75,
    ) {
        // Raise the cost cap above the interior-bonus bound so no draw leaves that regime.
        let cbar = 1.01 * model(r, l, z, frac * l * z, 1.0).cbar_bound();
        let m = ContinuousModel::new(r, l, z, frac * l * z, CostDistribution::uniform(cbar).unwrap()).unwrap();
        prop_assert!(m.ir_admissible());
        let p = m.solve(1e-4).unwrap();
        let w = m.solve_planner(1e-4).unwrap();
        prop_assert!(w.alpha_sa_pc <= p.alpha_sa_pc + 1e-9);
        prop_assert!(w.alpha_fc_nb > p.alpha_fc_nb);
    }
}
