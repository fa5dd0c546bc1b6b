//! Property tests for the structural guarantees of each module.

use noisy_seed_opt::acquisition::ei_from_moments;
use noisy_seed_opt::bench::{mean_std, SummaryRow};
use noisy_seed_opt::design::{clip_to_domain, latin_hypercube, sub_box, EvaluatedSample, Phase, SearchDomain};
use noisy_seed_opt::gp::{GpModel, InputScaling, KernelKind};
use noisy_seed_opt::objectives::hubbard::{hubbard_hamiltonian, HubbardSpec, HvaModel};
use noisy_seed_opt::objectives::noise::{apply_noise, NoiseSpec};
use noisy_seed_opt::objectives::{from_fn, lookup};
use noisy_seed_opt::orchestrator::{run, BudgetPlan, Mode, RunConfig};
use noisy_seed_opt::seeds::{scale_values, select_start_indices, DistanceMetric, WeightPattern};
use proptest::prelude::*;

fn domain_strategy(max_dim: usize) -> impl Strategy<Value = SearchDomain> {
    prop::collection::vec((-5.0f64..5.0, 0.1f64..4.0), 1..=max_dim).prop_map(|axes| {
        let lower = axes.iter().map(|a| a.0).collect();
        let upper = axes.iter().map(|a| a.0 + a.1).collect();
        SearchDomain::new(lower, upper).unwrap()
    })
}

fn archive_strategy() -> impl Strategy<Value = Vec<EvaluatedSample>> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 2), -10.0f64..10.0), 4..20).prop_map(|pts| {
        pts.into_iter()
            .enumerate()
            .map(|(i, (theta, value))| EvaluatedSample {
                theta,
                value,
                eval_index: i + 1,
                phase: Phase::GpIteration,
                seed_index: None,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lhs_has_one_point_per_bin(dom in domain_strategy(5), n in 1usize..40, seed in any::<u64>()) {
        let pts = latin_hypercube(&dom, n, seed).unwrap();
        prop_assert_eq!(pts.len(), n);
        for j in 0..dom.dim() {
            let mut hit = vec![false; n];
            for p in &pts {
                prop_assert!(dom.contains(p));
                let u = (p[j] - dom.lower()[j]) / dom.width(j);
                let bin = ((u * n as f64).floor() as usize).min(n - 1);
                prop_assert!(!hit[bin], "bin {} of axis {} hit twice", bin, j);
                hit[bin] = true;
            }
        }
        prop_assert_eq!(pts, latin_hypercube(&dom, n, seed).unwrap());
    }

    #[test]
    fn clip_is_idempotent_and_inside(dom in domain_strategy(4), raw in prop::collection::vec(-20.0f64..20.0, 4)) {
        let theta = &raw[..dom.dim()];
        let once = clip_to_domain(theta, &dom).unwrap();
        prop_assert!(dom.contains(&once));
        prop_assert_eq!(clip_to_domain(&once, &dom).unwrap(), once.clone());
        for j in 0..dom.dim() {
            if dom.lower()[j] <= theta[j] && theta[j] <= dom.upper()[j] {
                prop_assert_eq!(once[j], theta[j]);
            }
        }
    }

    #[test]
    fn sub_box_stays_inside_domain(dom in domain_strategy(4), raw in prop::collection::vec(0.0f64..1.0, 4), hw in 1e-3f64..3.0) {
        let center = dom.from_unit(&raw[..dom.dim()]);
        let b = sub_box(&center, hw, &dom).unwrap();
        for j in 0..dom.dim() {
            prop_assert!(b.lower()[j] >= dom.lower()[j] && b.upper()[j] <= dom.upper()[j]);
            prop_assert!(b.width(j) <= 2.0 * hw + 1e-12);
        }
        prop_assert!(b.contains(&center));
    }

    #[test]
    fn ei_is_non_negative(mean in -1e3f64..1e3, eps in 0.0f64..1e2, best in -1e3f64..1e3) {
        let ei = ei_from_moments(mean, eps, best);
        prop_assert!(ei >= 0.0 && ei.is_finite());
        // never below the deterministic improvement
        prop_assert!(ei >= (best - mean).max(0.0) - 1e-9 * (1.0 + mean.abs() + best.abs()));
    }

    #[test]
    fn scaled_values_span_unit_interval(vals in prop::collection::vec(-1e3f64..1e3, 2..30)) {
        let v = scale_values(&vals).unwrap();
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        let distinct = vals.iter().any(|x| *x != vals[0]);
        if distinct {
            prop_assert!(v.contains(&0.0) && v.contains(&1.0));
        }
    }

    #[test]
    fn seeds_are_distinct_and_start_at_the_best(archive in archive_strategy(), w in 0.0f64..1.0, b in 1usize..4) {
        let pattern = WeightPattern::constant(w, b).unwrap();
        let idx = select_start_indices(&archive, &pattern, b, DistanceMetric::Original, None).unwrap();
        prop_assert_eq!(idx.len(), b);
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), b);
        let best = archive.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(archive[idx[0]].value, best);
    }

    #[test]
    fn seed_order_survives_affine_rescaling(archive in archive_strategy(), a in 0.01f64..100.0, c in -50.0f64..50.0) {
        let pattern = WeightPattern::default_for(4);
        let scaled: Vec<EvaluatedSample> = archive
            .iter()
            .map(|s| EvaluatedSample { value: a * s.value + c, ..s.clone() })
            .collect();
        let b = 4.min(archive.len());
        let x = select_start_indices(&archive, &pattern, b, DistanceMetric::Original, None).unwrap();
        let y = select_start_indices(&scaled, &pattern, b, DistanceMetric::Original, None).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn noise_is_reproducible(clean in -3.0f64..3.0, stream in any::<u64>(), counter in any::<u64>()) {
        let spec = NoiseSpec::default().with_stream(stream);
        let a = apply_noise(clean, &spec, (-4.0, 4.0), counter);
        prop_assert_eq!(a, apply_noise(clean, &spec, (-4.0, 4.0), counter));
        prop_assert_eq!(apply_noise(clean, &NoiseSpec::noise_free(), (-4.0, 4.0), counter), clean);
    }

    #[test]
    fn summary_mean_matches_trials(vals in prop::collection::vec(-10.0f64..10.0, 1..12)) {
        let (m, s) = mean_std(&vals);
        let direct = vals.iter().sum::<f64>() / vals.len() as f64;
        prop_assert!((m - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        prop_assert!(s >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn screened_bound_dominates_exact_mse(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 4..12),
        tau in prop::collection::vec(1.0f64..50.0, 2),
        probe in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let ys: Vec<f64> = pts.iter().map(|p| (3.0 * p[0]).sin() + p[1] * p[1]).collect();
        let model = GpModel::with_hyperparams(
            &pts, &ys, KernelKind::SquaredExponentialPlusWhiteNoise, &tau, 1e-3, InputScaling::identity(2),
        ).unwrap();
        let (mean, mse) = model.predict(&probe).unwrap();
        let mut bound = f64::NAN;
        let screened = model.predict_screened(&probe, |_, b| { bound = b; true }).unwrap().unwrap();
        prop_assert!(bound >= mse * (1.0 - 1e-9) - 1e-12);
        prop_assert!((screened.0 - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
        prop_assert!(mse >= 0.0);
    }

    #[test]
    fn hva_energy_respects_variational_bound(raw in prop::collection::vec(-3.2f64..3.2, 9)) {
        let spec = HubbardSpec::new(2, 2, 1, 1, 4).with_closing_interaction();
        let model = HvaModel::new(&spec).unwrap();
        let e = model.energy(&raw[..model.n_params()]).unwrap();
        let (lo, hi) = model.spectrum_range();
        prop_assert!(e >= lo - 1e-9 && e <= hi + 1e-9);
        prop_assert!((lo - model.ground_energy()).abs() < 1e-9);
    }
}

#[test]
fn hamiltonians_are_symmetric() {
    for (nx, ny, up, dn) in [(2, 1, 1, 0), (2, 1, 1, 1), (2, 2, 1, 1), (2, 2, 2, 2), (3, 2, 1, 1)] {
        let h = hubbard_hamiltonian(&HubbardSpec::new(nx, ny, up, dn, 1)).unwrap();
        assert!(h.is_symmetric(1e-12), "{nx}x{ny} ({up},{dn})");
    }
}

#[test]
fn noise_is_centred_on_the_biased_value() {
    let spec = NoiseSpec::default().with_stream(7);
    let range = (-2.0, 2.0);
    let clean = -1.5;
    let n = 20_000;
    let xs: Vec<f64> = (0..n).map(|c| apply_noise(clean, &spec, range, c)).collect();
    let (m, s) = mean_std(&xs);
    let bias = spec.misclass * (0.0 - clean);
    let sd = spec.shot_std(range);
    assert!((m - (clean + bias)).abs() < 4.0 * sd / (n as f64).sqrt(), "mean {m}");
    assert!((s / sd - 1.0).abs() < 0.03, "std {s} vs {sd}");
}

fn check_trace(mode: Mode, cap: usize, seed: u64) {
    let objective = from_fn(2, |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2) + 0.1 * (5.0f64 * x[0]).sin());
    let dom = SearchDomain::cube(2, -1.0, 1.0).unwrap();
    let budgets = BudgetPlan::standard(2, cap);
    let mut config = RunConfig::new(mode, budgets.clone());
    config.imfil = config.imfil.with_max_evals(15);
    let rec = run(&objective, &dom, &config, seed).unwrap();

    assert!(rec.samples.len() <= cap);
    for (i, s) in rec.samples.iter().enumerate() {
        assert_eq!(s.eval_index, i + 1);
        assert!(dom.contains(&s.theta));
    }
    let phases: Vec<Phase> = rec.samples.iter().map(|s| s.phase).collect();
    assert!(phases.windows(2).all(|w| w[0] <= w[1]), "phases out of order");
    let best = rec.best_so_far();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*best.last().unwrap(), rec.best_value);

    match mode {
        Mode::GpImfil => {
            let n_init = phases.iter().filter(|p| **p == Phase::InitDesign).count();
            assert_eq!(n_init, budgets.n0);
            let pre_local = phases.iter().filter(|p| **p != Phase::LocalSearch).count();
            assert!(pre_local <= budgets.b_gp);
            for s in rec.samples.iter().filter(|s| s.phase == Phase::LocalSearch) {
                let k = s.seed_index.expect("local samples carry a seed index");
                let seed = &rec.seeds_used[k];
                let b = sub_box(seed, budgets.local_half_width, &dom).unwrap();
                assert!(b.contains(&s.theta), "sample outside its sub-box");
            }
        }
        Mode::GpOnly => assert!(phases.iter().all(|p| *p != Phase::LocalSearch)),
        Mode::ImfilOnly => assert!(phases.iter().all(|p| *p != Phase::GpIteration)),
    }
}

#[test]
fn orchestrator_traces_are_well_formed() {
    for mode in Mode::ALL {
        for (cap, seed) in [(40, 1), (70, 2), (13, 3)] {
            check_trace(mode, cap, seed);
        }
    }
}

#[test]
fn registry_runs_are_reproducible() {
    let p = lookup("twowells-2-n").unwrap();
    let obj = p.default_objective(99).unwrap();
    let config = RunConfig::new(Mode::GpImfil, BudgetPlan::standard(2, 50));
    let a = run(obj.as_ref(), &p.domain, &config, 5).unwrap();
    let b = run(obj.as_ref(), &p.domain, &config, 5).unwrap();
    assert_eq!(a.samples, b.samples);
    let row = SummaryRow::from_records("twowells-2-n", Mode::GpImfil, &[a.clone(), b]);
    assert_eq!(row.mean_best, a.best_value);
    assert_eq!(row.std_best, 0.0);
}
