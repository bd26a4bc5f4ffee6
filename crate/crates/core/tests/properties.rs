use proptest::prelude::*;
use spine_rectify::cli::round6;
use spine_rectify::metrics::VertebraPrediction;
use spine_rectify::optimize::{
    expansion_op, expansion_relabel_op, finetune_op, offset_op, regularizer, solve, EnergyConfig, Problem, SolveConfig,
};
use spine_rectify::pipeline::anatomically_plausible;
use spine_rectify::rectify::Signal1D;
use spine_rectify::volume::Vec3;

const V_MAX: usize = 8;
const LEN: usize = 60;

fn signals() -> impl Strategy<Value = Vec<Signal1D>> {
    prop::collection::vec(prop::collection::vec(0.0..20.0f64, LEN), V_MAX)
        .prop_map(|rows| rows.into_iter().map(|r| Signal1D::new(r, 1.0)).collect())
}

/// Sorted distinct positions and a lowest label that fits.
fn state_parts() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop::collection::btree_set(0..LEN, 1..=V_MAX)
        .prop_flat_map(|set| {
            let n = set.len();
            (1..=V_MAX + 1 - n, Just(set.into_iter().map(|i| i as f64).collect::<Vec<_>>()))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularizer_is_symmetric_and_at_least_e(a in 0.1..100.0f64, b in 0.1..100.0f64) {
        let r = regularizer(a, b).unwrap();
        prop_assert_eq!(r, regularizer(b, a).unwrap());
        prop_assert!(r >= std::f64::consts::E - 1e-12);
    }

    #[test]
    fn operators_never_raise_energy(sig in signals(), (v_l, k) in state_parts()) {
        let cfg = EnergyConfig::anchored(V_MAX);
        let p = Problem::new(&sig, &cfg).unwrap();
        let st = p.state(v_l, k).unwrap();
        let off = offset_op(&p, &st).unwrap();
        prop_assert!(off.energy <= st.energy);
        let tuned = finetune_op(&p, &st, &[4, 2, 1]);
        prop_assert!(tuned.energy <= st.energy);
        prop_assert!(tuned.check(V_MAX, LEN).is_ok());
        prop_assert!((p.energy(tuned.v_l, &tuned.k).unwrap() - tuned.energy).abs() < 1e-9);
        let lit = expansion_op(&p, &st);
        let rel = expansion_relabel_op(&p, &st);
        prop_assert!(rel.energy <= lit.energy);
        prop_assert!(rel.check(V_MAX, LEN).is_ok());
    }

    #[test]
    fn solve_respects_constraints(sig in signals()) {
        let cfg = EnergyConfig::anchored(V_MAX);
        let p = Problem::new(&sig, &cfg).unwrap();
        let q_hat = sig.iter().fold(Signal1D::zeros(LEN, 1.0), |acc, s| acc.add(s));
        match solve(&p, &q_hat, &SolveConfig::default()) {
            Ok(out) => {
                prop_assert!(out.best.check(V_MAX, LEN).is_ok());
                prop_assert!(out.iterations <= 50);
                prop_assert!(out.accepted.windows(2).all(|w| w[1] < w[0]));
                prop_assert!(out.accepted.iter().all(|e| out.best.energy <= *e));
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn json_rounding_keeps_six_digits(x in -1e9..1e9f64) {
        let r = round6(x);
        prop_assert!((r - x).abs() <= 5e-6 * x.abs() + 1e-300);
        prop_assert_eq!(round6(r), r);
    }

    #[test]
    fn signal_reverse_is_an_involution(v in prop::collection::vec(0.0..5.0f64, 1..40)) {
        let s = Signal1D::new(v, 0.5);
        prop_assert_eq!(s.reversed().reversed(), s.clone());
        prop_assert!(s.smoothed(1.5).values().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn plausibility_needs_order_and_descent(start in 1usize..20, n in 2usize..7, swap in 0usize..5) {
        let preds: Vec<VertebraPrediction> = (0..n)
            .map(|i| VertebraPrediction {
                label: start + i,
                center: Vec3::new(0.0, 0.0, 500.0 - 25.0 * i as f64),
                activation: 1.0,
            })
            .collect();
        prop_assert!(anatomically_plausible(&preds, true));
        prop_assert!(!anatomically_plausible(&preds, false));
        let mut broken = preds.clone();
        let i = swap % (n - 1);
        let (a, b) = (broken[i].center, broken[i + 1].center);
        broken[i].center = b;
        broken[i + 1].center = a;
        prop_assert!(!anatomically_plausible(&broken, true));
    }
}
