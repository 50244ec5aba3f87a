use codecsel_core::bounds::{
    emd, emd_raw, epsilon_asymptotic_emd, epsilon_finite_emd, epsilon_gaussian_chernoff,
    epsilon_hoeffding, Tails,
};
use codecsel_core::gs::{global_sampling, GsConfig};
use codecsel_core::psp::{batch_schedule, psp, PspConfig};
use codecsel_core::{
    objective_interval, rectangle_vs_constraints, BoundMethod, ConfidenceRectangle,
    ConstraintSpace, CriterionMatrix, Feasibility, HalfSpace, Interval, Objective,
};
use proptest::prelude::*;

const CRITERIA: [&str; 3] = ["c0", "c1", "c2"];

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

fn one_codec_rect(cells: &[(f64, f64)]) -> ConfidenceRectangle {
    ConfidenceRectangle::new(
        vec!["h".into()],
        CRITERIA[..cells.len()].iter().map(|s| s.to_string()).collect(),
        cells.iter().map(|&(a, b)| Interval::new(a.min(b), a.max(b))).collect(),
        0.1,
        BoundMethod::HoeffdingUnion,
        vec![0.0; cells.len()],
    )
    .unwrap()
}

fn weights() -> impl Strategy<Value = Objective> {
    prop::collection::vec(0.0..5.0f64, 3).prop_filter_map("needs a positive weight", |w| {
        Objective::new(
            CRITERIA
                .iter()
                .map(|s| s.to_string())
                .zip(w)
                .collect(),
        )
        .ok()
    })
}

fn cells() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3)
}

fn unit_matrix(nh: usize, nc: usize, m: usize) -> impl Strategy<Value = CriterionMatrix> {
    prop::collection::vec(0.0..=1.0f64, nh * nc * m).prop_map(move |v| {
        CriterionMatrix::new(ids("h", nh), ids("c", nc), ids("s", m), v).unwrap()
    })
}

proptest! {
    #[test]
    fn objective_interval_contains_box_points(obj in weights(), cells in cells(), t in prop::collection::vec(0.0..=1.0f64, 3)) {
        let rect = one_codec_rect(&cells);
        let iv = objective_interval(&rect, &obj, "h").unwrap();
        let point: Vec<f64> = rect.codec_box(0).iter().zip(&t).map(|(b, t)| b.lo + t * (b.hi - b.lo)).collect();
        let crit: Vec<String> = CRITERIA.iter().map(|s| s.to_string()).collect();
        let v = obj.evaluate(&crit, &point).unwrap();
        prop_assert!(iv.lo - 1e-9 <= v && v <= iv.hi + 1e-9);
    }

    #[test]
    fn objective_interval_is_monotone(obj in weights(), cells in cells(), k in 0usize..3, bump in 0.0..1.0f64) {
        let base = one_codec_rect(&cells);
        let mut raised: Vec<(f64, f64)> = base.codec_box(0).iter().map(|iv| (iv.lo, iv.hi)).collect();
        raised[k].0 += bump;
        raised[k].1 += bump;
        let a = objective_interval(&base, &obj, "h").unwrap();
        let b = objective_interval(&one_codec_rect(&raised), &obj, "h").unwrap();
        prop_assert!(b.lo >= a.lo - 1e-12 && b.hi >= a.hi - 1e-12);
    }

    #[test]
    fn scaling_weights_scales_objective_interval(obj in weights(), cells in cells(), alpha in 0.01..100.0f64) {
        let rect = one_codec_rect(&cells);
        let a = objective_interval(&rect, &obj, "h").unwrap();
        let b = objective_interval(&rect, &obj.scaled(alpha).unwrap(), "h").unwrap();
        prop_assert!((b.lo - alpha * a.lo).abs() <= 1e-9 * (1.0 + b.lo.abs()));
        prop_assert!((b.hi - alpha * a.hi).abs() <= 1e-9 * (1.0 + b.hi.abs()));
    }

    #[test]
    fn feasibility_trichotomy_agrees_with_points(
        cells in cells(),
        coeffs in prop::collection::vec(-1.0..1.0f64, 3),
        bound in -2.0..2.0f64,
        samples in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 3), 16),
    ) {
        let rect = one_codec_rect(&cells);
        let hs = HalfSpace::new(CRITERIA.iter().map(|s| s.to_string()).zip(coeffs.iter().copied()).collect(), bound).unwrap();
        let space = ConstraintSpace::new(vec![hs]);
        let class = rectangle_vs_constraints(&rect, "h", &space).unwrap();
        let bx = rect.codec_box(0);
        // the extreme corners of a·e over the box
        let corner = |maximise: bool| -> Vec<f64> {
            bx.iter().zip(&coeffs).map(|(iv, &a)| if (a > 0.0) == maximise { iv.hi } else { iv.lo }).collect()
        };
        let dot = |p: &[f64]| -> f64 { coeffs.iter().zip(p).map(|(a, e)| a * e).sum() };
        let margin = 1e-9;
        for t in &samples {
            let p: Vec<f64> = bx.iter().zip(t).map(|(iv, t)| iv.lo + t * (iv.hi - iv.lo)).collect();
            let s = dot(&p);
            if (s - bound).abs() < margin { continue; }
            match class {
                Feasibility::CertainlyFeasible => prop_assert!(s <= bound),
                Feasibility::CertainlyInfeasible => prop_assert!(s > bound),
                Feasibility::PossiblyFeasible => {}
            }
        }
        if class == Feasibility::PossiblyFeasible {
            prop_assert!(dot(&corner(false)) <= bound + margin);
            prop_assert!(dot(&corner(true)) > bound - margin);
        }
    }

    #[test]
    fn emd_is_offset_invariant(m in unit_matrix(3, 1, 9), offset in -5.0..5.0f64) {
        let shifted = CriterionMatrix::new(
            m.codecs().to_vec(), m.criteria().to_vec(), m.samples().to_vec(),
            m.values().iter().map(|v| v + offset).collect(),
        ).unwrap();
        let a = emd_raw(&m, 0).unwrap();
        let b = emd_raw(&shifted, 0).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(emd(&m, 0).unwrap() >= 0.0);
        prop_assert!((-0.5..=0.5).contains(&a));
    }

    #[test]
    fn epsilons_shrink_with_samples_and_grow_with_confidence(
        m in 2usize..100_000, extra in 1usize..10_000,
        delta in 0.001..0.9f64, shrink in 0.1..0.99f64,
        nh in 1usize..50, nc in 1usize..6,
        d in 0.0..0.5f64, sigma_sq in 0.0..1.0f64,
    ) {
        let e = |m: usize, delta: f64| {
            [
                epsilon_finite_emd(d, m, nc, delta).unwrap(),
                epsilon_hoeffding(m, nh, nc, delta).unwrap(),
                epsilon_asymptotic_emd(d, sigma_sq, m, nc, delta, Tails::Two).unwrap(),
            ]
        };
        let base = e(m, delta);
        let more = e(m + extra, delta);
        let tighter = e(m, delta * shrink);
        for k in 0..3 {
            prop_assert!(more[k] <= base[k] + 1e-15);
            prop_assert!(tighter[k] >= base[k] - 1e-15);
        }
        prop_assert!(epsilon_hoeffding(m, nh + 1, nc, delta).unwrap() > base[1]);
        prop_assert!(
            epsilon_asymptotic_emd(d, sigma_sq, m, nc, delta, Tails::One).unwrap()
                <= base[2] + 1e-15
        );
    }

    #[test]
    fn gaussian_chernoff_is_scaled_hoeffding(sigma in 0.0..3.0f64, m in 2usize..50_000, nh in 1usize..30, nc in 1usize..5, delta in 0.001..0.99f64) {
        let gc = epsilon_gaussian_chernoff(sigma, m, nh, nc, delta).unwrap();
        let hu = epsilon_hoeffding(m, nh, nc, delta).unwrap();
        prop_assert!((gc - 2.0 * sigma * hu).abs() <= 1e-12 * (1.0 + gc));
    }

    #[test]
    fn gs_sets_are_scale_invariant(m in unit_matrix(4, 2, 12), alpha in 0.1..10.0f64, w in 0.0..1.0f64) {
        let obj = Objective::new([("c0".to_string(), w), ("c1".to_string(), 1.0 - w + 0.01)].into_iter().collect()).unwrap();
        for method in BoundMethod::ALL {
            let a = global_sampling(&m, &GsConfig::new(0.1, method, obj.clone(), ConstraintSpace::default())).unwrap();
            let b = global_sampling(&m, &GsConfig::new(0.1, method, obj.scaled(alpha).unwrap(), ConstraintSpace::default())).unwrap();
            // ties at the threshold may flip under rounding, so compare up to a slack
            let threshold = a.liberal_set.iter().map(|id| {
                let h = m.codec_index(id).unwrap();
                a.objective_intervals[h].hi
            }).fold(f64::INFINITY, f64::min);
            let near_tie = a.objective_intervals.iter().any(|iv| (iv.lo - threshold).abs() < 1e-9);
            if !near_tie {
                prop_assert_eq!(&a.liberal_set, &b.liberal_set);
                prop_assert_eq!(&a.conservative_set, &b.conservative_set);
            }
        }
    }

    #[test]
    fn gs_conservative_within_liberal_and_certainly_feasible(
        m in unit_matrix(5, 2, 10),
        coeffs in prop::collection::vec(-1.0..1.0f64, 2),
        bound in -0.5..1.0f64,
    ) {
        let hs = HalfSpace::new([("c0".to_string(), coeffs[0]), ("c1".to_string(), coeffs[1])].into_iter().collect(), bound).unwrap();
        for method in BoundMethod::ALL {
            let cfg = GsConfig::new(0.2, method, Objective::single("c0"), ConstraintSpace::new(vec![hs.clone()]));
            let r = global_sampling(&m, &cfg).unwrap();
            for h in &r.conservative_set {
                prop_assert!(r.certainly_feasible.contains(h));
            }
            for h in &r.certainly_feasible {
                prop_assert!(r.possibly_feasible.contains(h));
            }
            for h in &r.liberal_set {
                prop_assert!(r.possibly_feasible.contains(h));
            }
            if let (Some(lo), Some(hi)) = (r.sandwich.lower, r.sandwich.upper) {
                prop_assert!(lo <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn single_batch_psp_matches_gs(m in unit_matrix(3, 2, 16)) {
        // s0 = m leaves room for one batch only
        for method in BoundMethod::ALL {
            let obj = Objective::single("c1");
            let pcfg = PspConfig { s0: 16, epsilon: 1e-9, delta: 0.1, method, objective: obj.clone(), constraints: ConstraintSpace::default() };
            let p = psp(&m, &pcfg).unwrap();
            let g = global_sampling(&m, &GsConfig::new(0.1, method, obj, ConstraintSpace::default())).unwrap();
            prop_assert_eq!(p.trace.len(), 1);
            prop_assert_eq!(p.rectangle.cells(), g.rectangle.cells());
            prop_assert_eq!(&p.possibly_feasible, &g.possibly_feasible);
            prop_assert_eq!(&p.liberal_set, &g.liberal_set);
        }
    }

    #[test]
    fn psp_widths_never_grow_and_budget_holds(m in unit_matrix(4, 2, 70), s0 in 2usize..12, eps in 0.001..0.3f64) {
        for method in BoundMethod::ALL {
            let cfg = PspConfig { s0, epsilon: eps, delta: 0.1, method, objective: Objective::single("c0"), constraints: ConstraintSpace::default() };
            let r = psp(&m, &cfg).unwrap();
            let (n, _) = batch_schedule(70, s0).unwrap();
            prop_assert!(r.trace.len() <= n);
            prop_assert!(r.certificate.samples_used <= s0 * ((1 << n) - 1));
            prop_assert!(r.certificate.samples_used <= 70);
            for pair in r.trace.windows(2) {
                for (a, b) in pair[0].cells.iter().zip(&pair[1].cells) {
                    if r.violations.is_empty() {
                        prop_assert!(b.is_within(a));
                    }
                }
            }
        }
    }

    #[test]
    fn batch_schedule_is_maximal(total in 2usize..1_000_000, s0 in 2usize..1000) {
        prop_assume!(total >= s0);
        let (n, sizes) = batch_schedule(total, s0).unwrap();
        prop_assert_eq!(sizes.len(), n);
        for (i, &s) in sizes.iter().enumerate() {
            prop_assert_eq!(s, s0 << i);
        }
        let used = s0 * ((1 << n) - 1);
        prop_assert!(used <= total);
        prop_assert!(s0 * ((1 << (n + 1)) - 1) > total);
        // closed form ⌊log2(total/s0 + 1)⌋
        let closed = ((total as f64 / s0 as f64) + 1.0).log2().floor() as usize;
        prop_assert!(closed.abs_diff(n) <= 1);
    }
}
