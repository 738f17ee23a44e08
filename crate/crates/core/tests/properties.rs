use proptest::prelude::*;

use hydrolfc::fuzzy::{decode_quad, FuzzySystem, GeneQuad, RuleBase, Term, UniverseScales};
use hydrolfc::metrics::{compute_report, SimTrace};
use hydrolfc::optim::{ga_run, Chromosome, GaConfig};
use hydrolfc::plant::{slc_quantize, step_plant, PlantParams, PlantState, SlcLadder};

fn gene() -> impl Strategy<Value = f64> {
    0.01f64..=0.99
}

fn genes12() -> impl Strategy<Value = [f64; 12]> {
    prop::array::uniform12(gene())
}

fn run_open_loop(u: f64, d: f64, steps: usize) -> PlantState {
    let p = PlantParams::default();
    let mut s = PlantState::default();
    for _ in 0..steps {
        s = step_plant(&s, u, d, &p).unwrap();
    }
    s
}

#[test]
fn rule_table_matches_index_formula() {
    let r = RuleBase::default();
    for a in Term::ALL {
        for b in Term::ALL {
            let mean = f64::from(a.signed() + b.signed()) / 2.0;
            let want = (mean.round() as i32).clamp(-3, 3);
            assert_eq!(r.consequent(a, b).signed(), want, "{a} {b}");
            assert_eq!(r.consequent(a.negate(), b.negate()), r.consequent(a, b).negate());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plant_is_linear_about_the_origin(u in -0.3f64..0.3, d in -0.3f64..0.3, k in 0.1f64..3.0) {
        let a = run_open_loop(u, d, 400);
        let b = run_open_loop(k * u, k * d, 400);
        let scale = a.df.abs().max(1e-12);
        prop_assert!((b.df - k * a.df).abs() <= 1e-9 * scale.max(1.0));
        prop_assert!((b.mech_power() - k * a.mech_power()).abs() <= 1e-9);
    }

    #[test]
    fn plant_superposition(u in -0.3f64..0.3, d in -0.3f64..0.3) {
        let both = run_open_loop(u, d, 300);
        let gate = run_open_loop(u, 0.0, 300);
        let load = run_open_loop(0.0, d, 300);
        prop_assert!((both.df - gate.df - load.df).abs() <= 1e-12);
    }

    #[test]
    fn dt_halving_barely_moves_open_loop_response(d in 0.02f64..0.3) {
        let coarse = PlantParams::default();
        let fine = PlantParams { dt: coarse.dt / 2.0, ..coarse };
        let (mut a, mut b) = (PlantState::default(), PlantState::default());
        let mut peak_a = 0.0f64;
        let mut peak_b = 0.0f64;
        for _ in 0..3000 {
            a = step_plant(&a, 0.0, d, &coarse).unwrap();
            peak_a = peak_a.max(a.df.abs());
            for _ in 0..2 {
                b = step_plant(&b, 0.0, d, &fine).unwrap();
                peak_b = peak_b.max(b.df.abs());
            }
        }
        prop_assert!((peak_a - peak_b).abs() / peak_b < 0.01);
    }

    #[test]
    fn slc_quantization_is_nearest_and_monotone(a in 0.0f64..446.25, b in 0.0f64..446.25) {
        let ladder = SlcLadder::default();
        let (ca, ka) = slc_quantize(a, &ladder).unwrap();
        let (cb, _) = slc_quantize(b, &ladder).unwrap();
        prop_assert!((ka - a).abs() <= 0.875);
        prop_assert_eq!(ka, f64::from(ca) * 1.75);
        if a <= b {
            prop_assert!(ca <= cb);
        }
    }

    #[test]
    fn decoded_breakpoints_are_ordered(q in prop::array::uniform4(gene()), scale in 1e-3f64..1e3) {
        let b = decode_quad(&GeneQuad::new(q).unwrap(), scale).unwrap();
        prop_assert!(b.b1 < b.b2 && b.b2 < 0.0 && 0.0 < b.b3 && b.b3 < b.b4);
    }

    #[test]
    fn rule_weights_are_normalized(g in genes12(), e in -0.1f64..0.1, ec in -300.0f64..300.0) {
        let sys = FuzzySystem::from_genes(&g, &UniverseScales::default()).unwrap();
        let sum: f64 = sys.rule_weights(e, ec).unwrap().iter().flatten().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn inference_stays_within_output_family(g in genes12(), e in -0.1f64..0.1, ec in -300.0f64..300.0) {
        let sys = FuzzySystem::from_genes(&g, &UniverseScales::default()).unwrap();
        let u = sys.infer(e, ec).unwrap();
        prop_assert!(u >= sys.u.center(Term::NB) - 1e-15 && u <= sys.u.center(Term::PB) + 1e-15);
    }

    #[test]
    fn symmetric_genes_give_odd_inference(a in prop::array::uniform3(gene()), b in prop::array::uniform3(gene()),
                                          e in -0.05f64..0.05, ec in -150.0f64..150.0) {
        let mut g = [0.0; 12];
        for k in 0..3 {
            g[4 * k..4 * k + 4].copy_from_slice(&[a[k], b[k], a[k], b[k]]);
        }
        let sys = FuzzySystem::from_genes(&g, &UniverseScales::default()).unwrap();
        prop_assert!((sys.infer(e, ec).unwrap() + sys.infer(-e, -ec).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn metrics_scale_with_the_error(err in prop::collection::vec(-1.0f64..1.0, 2..400), c in 0.1f64..10.0) {
        let t: Vec<f64> = (0..err.len()).map(|k| k as f64 * 0.01).collect();
        let scaled: Vec<f64> = err.iter().map(|e| c * e).collect();
        let a = compute_report(&SimTrace::from_error(t.clone(), err), 0.05, 0.1).unwrap();
        let b = compute_report(&SimTrace::from_error(t, scaled), 0.05, 0.1).unwrap();
        prop_assert!((b.iae - c * a.iae).abs() <= 1e-9 * (1.0 + b.iae));
        prop_assert!((b.ise - c * c * a.ise).abs() <= 1e-9 * (1.0 + b.ise));
        prop_assert!((b.itae - c * a.itae).abs() <= 1e-9 * (1.0 + b.itae));
    }

    #[test]
    fn cauchy_schwarz_holds(err in prop::collection::vec(-5.0f64..5.0, 2..400), dt in 1e-4f64..0.1) {
        let t: Vec<f64> = (0..err.len()).map(|k| k as f64 * dt).collect();
        let tr = SimTrace::from_error(t, err);
        let r = compute_report(&tr, 0.05, 0.1).unwrap();
        prop_assert!(r.iae * r.iae <= r.ise * tr.duration() * (1.0 + 1e-12));
        prop_assert!(r.iae >= 0.0 && r.ise >= 0.0 && r.itae >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ga_genes_stay_feasible(seed in any::<u64>()) {
        let cfg = GaConfig { pop_size: 20, elite_count: 2, max_generations: 10, mutation_rate: 0.5, seed, ..GaConfig::default() };
        let f = |c: &Chromosome| c.0.iter().map(|g| (g - 0.9).powi(2)).sum::<f64>();
        let out = ga_run(&cfg, &f, &[]).unwrap();
        prop_assert!(out.best.chromosome.0.iter().all(|g| (0.01..=0.99).contains(g)));
        prop_assert!(out.best_history().windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(out.history.len(), cfg.max_generations + 1);
    }
}
