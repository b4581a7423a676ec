//! The closed-form maximum sum throughput against a linear program over
//! per-region mode frequencies, solved with a generic simplex solver.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use proptest::prelude::*;

use relaysim::analytics::max_sum_throughput;
use relaysim::channel::{SnrRegion, SystemParams};
use relaysim::mode::TransmissionMode::{self, *};
use relaysim::regions::{analytic_probabilities, RegionProbabilities};

/// Best `R_r1 + R_r2` over stationary randomized mode choices whose buffer
/// outflow does not exceed inflow (`balanced` forces equality).
fn lp_optimum(p: &RegionProbabilities, balanced: bool) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let mut link = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for region in SnrRegion::ALL {
        let pr = p.get(region);
        let flags = region.flags();
        let vars: Vec<_> = TransmissionMode::ALL
            .iter()
            .map(|&m| {
                let delivers = u8::from(matches!(m, M4 | M6)) + u8::from(matches!(m, M5 | M6));
                let gain = if flags[m.index()] {
                    f64::from(delivers) * pr
                } else {
                    0.0
                };
                (m, lp.add_var(gain, (0.0, 1.0)))
            })
            .collect();
        lp.add_constraint(
            vars.iter().map(|&(_, v)| (v, 1.0)).collect::<Vec<_>>(),
            ComparisonOp::Eq,
            1.0,
        );
        for &(m, v) in &vars {
            if !flags[m.index()] {
                continue;
            }
            // user 1 -> relay, user 2 -> relay, relay -> user 1, relay -> user 2
            let uses = [
                matches!(m, M1 | M3),
                matches!(m, M2 | M3),
                matches!(m, M4 | M6),
                matches!(m, M5 | M6),
            ];
            for k in 0..4 {
                if uses[k] {
                    link[k].push((v, pr));
                }
            }
        }
    }
    let op = if balanced { ComparisonOp::Eq } else { ComparisonOp::Ge };
    // inflow of B1 minus delivery to user 2, and likewise for B2
    let c1: Vec<_> = link[0]
        .iter()
        .copied()
        .chain(link[3].iter().map(|&(v, c)| (v, -c)))
        .collect();
    let c2: Vec<_> = link[1]
        .iter()
        .copied()
        .chain(link[2].iter().map(|&(v, c)| (v, -c)))
        .collect();
    lp.add_constraint(c1, op, 0.0);
    lp.add_constraint(c2, op, 0.0);
    lp.solve().expect("feasible and bounded").objective()
}

fn simplex() -> impl Strategy<Value = RegionProbabilities> {
    (prop::array::uniform5(1e-9f64..1.0), prop::array::uniform5(0u8..5)).prop_map(|(w, mask)| {
        let mut w = w.map(|x| -x.ln());
        for k in 0..5 {
            if mask[k] == 0 {
                w[k] = 0.0;
            }
        }
        if w.iter().all(|&x| x == 0.0) {
            w[1] = 1.0;
        }
        let total: f64 = w.iter().sum();
        let mut p = w.map(|x| x / total);
        p[4] = (1.0 - p[..4].iter().sum::<f64>()).max(0.0);
        RegionProbabilities::new(p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_form_equals_lp(p in simplex()) {
        let closed = max_sum_throughput(&p, 1.0).unwrap();
        prop_assert!((closed - lp_optimum(&p, true)).abs() < 1e-9, "{:?}", p);
        prop_assert!((closed - lp_optimum(&p, false)).abs() < 1e-9, "{:?}", p);
    }
}

#[test]
fn closed_form_equals_lp_on_fading() {
    for db in [-5.0, 0.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        for (o1, o2) in [(1.0, 1.0), (2.0, 1.0), (1.0, 4.0)] {
            let sp = SystemParams::new(o1, o2, 10f64.powf(db / 10.0), 1.0).unwrap();
            let p = analytic_probabilities(&sp).unwrap();
            let closed = max_sum_throughput(&p, 1.0).unwrap();
            assert!((closed - lp_optimum(&p, true)).abs() < 1e-9, "{db} dB {o1}/{o2}");
        }
    }
}
