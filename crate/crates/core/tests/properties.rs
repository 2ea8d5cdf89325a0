use bistable::config::{Block, RunConfig};
use bistable::estimates::Inequality;
use bistable::linear::{resolvent_a_norm, resolvent_norm, VocPlan};
use bistable::semigroup::{apply_semigroup, apply_smoothing, smoothing_constant, SemigroupQuery};
use bistable::spectral::{HVec, SpectrumSpec};
use bistable::trajectory::{uniform_grid, Trajectory};
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![(1e-6f64..1e3), (-1e3f64..-1e-6), Just(0.0),]
}

fn alphas(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(alpha(), 1..max).prop_filter("some nonzero mode", |a| a.iter().any(|x| *x != 0.0))
}

fn spec_and_vec() -> impl Strategy<Value = (SpectrumSpec, HVec)> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(alpha(), n).prop_filter("some nonzero mode", |a| a.iter().any(|x| *x != 0.0)),
            prop::collection::vec(-10.0f64..10.0, n),
        )
            .prop_map(|(a, h)| (SpectrumSpec::new(a).unwrap(), HVec(h)))
    })
}

proptest! {
    #[test]
    fn semigroups_contract(
        (spec, h) in spec_and_vec(),
        t in 0.0f64..50.0,
        s in 0.0f64..50.0,
    ) {
        for (q, qs, qts) in [
            (SemigroupQuery::stable(t), SemigroupQuery::stable(s), SemigroupQuery::stable(t + s)),
            (SemigroupQuery::unstable(-t), SemigroupQuery::unstable(-s), SemigroupQuery::unstable(-t - s)),
        ] {
            let th = apply_semigroup(&spec, q, &h).unwrap();
            prop_assert!(th.norm() <= h.norm() * (1.0 + 1e-14));
            let composed = apply_semigroup(&spec, q, &apply_semigroup(&spec, qs, &h).unwrap()).unwrap();
            let direct = apply_semigroup(&spec, qts, &h).unwrap();
            prop_assert!((&composed - &direct).norm() <= 1e-12 * (1.0 + h.norm()));
        }
    }

    #[test]
    fn resolvent_bounds(a in alphas(12), omega in -1e6f64..1e6) {
        let spec = SpectrumSpec::new(a).unwrap();
        prop_assert!(resolvent_norm(&spec, omega) <= 1.0 + 1e-12);
        prop_assert!(resolvent_a_norm(&spec, omega) <= 2.0 + 1e-12);
    }

    #[test]
    fn smoothing_bound((spec, h) in spec_and_vec(), t in 1e-4f64..10.0, r in 0.0f64..3.0) {
        let stable = SpectrumSpec::new(spec.alphas().iter().map(|a| a.abs().max(1e-6)).collect()).unwrap();
        let v = apply_smoothing(&stable, SemigroupQuery::stable(t).with_order(r), &h).unwrap();
        let bound = smoothing_constant(r) * t.powf(-r) * h.norm();
        prop_assert!(v.norm() <= bound * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn voc_is_linear(
        a in alphas(6),
        c in -3.0f64..3.0,
        seed in 0u64..1000,
    ) {
        let spec = SpectrumSpec::new(a).unwrap();
        let n = spec.dim();
        let times = uniform_grid(0.0, 2.0, 40);
        let plan = VocPlan::new(&spec, &times, None).unwrap();
        let f: Vec<HVec> = times.iter().map(|t| HVec((0..n).map(|j| (t * (j as f64 + 1.0) + seed as f64).sin()).collect())).collect();
        let g: Vec<HVec> = times.iter().map(|t| HVec((0..n).map(|j| (t - j as f64).cos()).collect())).collect();
        let combo: Vec<HVec> = f.iter().zip(&g).map(|(x, y)| y.axpy(c, x)).collect();
        let (pf, pg, pc) = (plan.apply(&f).unwrap(), plan.apply(&g).unwrap(), plan.apply(&combo).unwrap());
        for m in 0..times.len() {
            let expect = pg[m].axpy(c, &pf[m]);
            prop_assert!((&pc[m] - &expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn trajectory_csv_round_trip(vals in prop::collection::vec(prop::collection::vec(-1e30f64..1e30, 3), 2..20)) {
        let times: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.1).collect();
        let x = Trajectory::new(times, vals.into_iter().map(HVec).collect()).unwrap();
        let y = Trajectory::from_csv(&x.to_csv()).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn block_list_round_trip(list in prop::collection::vec(-1e6f64..1e6, 1..8), key in "[a-z][a-z_]{0,8}") {
        let mut b = Block::new("blk");
        b.set_list(&key, &list);
        let text = format!("blk = {{{}: {}}}\n", key, b.f64_list(&key).unwrap().unwrap().iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "));
        let cfg = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.require_block("blk").unwrap().f64_list(&key).unwrap().unwrap(), list);
    }

    #[test]
    fn inequality_verdict(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3, tol in 0.0f64..1.0) {
        let i = Inequality::with_tol(lhs, rhs, tol);
        prop_assert_eq!(i.holds, lhs <= rhs + tol);
        prop_assert_eq!(i.margin, rhs - lhs);
        prop_assert!(!Inequality::new(f64::NAN, rhs).holds);
    }
}
