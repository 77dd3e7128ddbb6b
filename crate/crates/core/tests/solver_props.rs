use admm_mcp_core::linalg::{dist2, dot, norm2};
use admm_mcp_core::penalties::{penalty_value_vec, top_k_indices};
use admm_mcp_core::solvers::{
    augmented_lagrangian, iht_step, lambda_grid_select, niht_step, residual_sq, select_grid_index, StepEvent,
    PROX_DESCENT_SLACK,
};
use admm_mcp_core::{
    generate_instance, relative_error, run_solver, run_solver_observed, Algorithm, DenseMatrix, LambdaStrategy,
    PenaltyParams, RhoMode, SolverConfig, SolverState,
};

fn x0(p: &admm_mcp_core::ProblemInstance) -> &[f64] {
    p.x0.as_deref().unwrap()
}

#[test]
fn exact_and_unified_variants_both_recover() {
    let p = generate_instance(64, 32, 3, 0.0, 11).unwrap();
    let unified = SolverConfig { tol: 1e-8, max_iter: 5000, ..SolverConfig::default() };
    let exact = SolverConfig {
        algorithm: Algorithm::AdmmMcpExact,
        rho_mode: RhoMode::Theory,
        tol: 1e-8,
        max_iter: 5000,
        ..SolverConfig::default()
    };
    for cfg in [unified, exact] {
        let sol = run_solver(&p, &cfg).unwrap();
        assert!(sol.converged, "{:?}", cfg.algorithm);
        let err = relative_error(x0(&p), &sol.x_hat).unwrap();
        assert!(err <= 0.01, "{:?}: rel err {err}", cfg.algorithm);
    }
}

#[test]
fn l0_variant_keeps_u_tau_sparse_every_iteration() {
    for seed in 0..5 {
        let p = generate_instance(100, 40, 6, 0.01, 20 + seed).unwrap();
        let mut worst = 0;
        let mut obs = |e: &StepEvent<'_>| {
            worst = worst.max(e.after.u.iter().filter(|v| **v != 0.0).count());
        };
        run_solver_observed(&p, &SolverConfig::for_algorithm(Algorithm::AdmmL0), None, &mut obs).unwrap();
        assert!(worst <= 6, "seed {seed}: {worst} nonzeros");
    }
}

// Checked at a tight tolerance: with a loose one, runs can stop within a few
// dozen iterations and the window still covers the transient.
#[test]
fn trace_norms_settle_on_converged_runs() {
    for algorithm in [Algorithm::AdmmMcpUnified, Algorithm::AdmmL0] {
        for seed in 0..5 {
            let p = generate_instance(256, 100, 8, 0.001, 30 + seed).unwrap();
            let cfg = SolverConfig { tol: 1e-6, max_iter: 5000, ..SolverConfig::for_algorithm(algorithm) };
            let sol = run_solver(&p, &cfg).unwrap();
            assert!(sol.converged);
            let recs = sol.trace.records();
            let window = &recs[recs.len() - 10..];
            let mean = |f: fn(&admm_mcp_core::TraceRecord) -> f64| window.iter().map(f).sum::<f64>() / 10.0;
            for (name, m) in [("dx", mean(|r| r.dx_norm)), ("du", mean(|r| r.du_norm)), ("dw", mean(|r| r.dw_norm))] {
                assert!(m < cfg.tol, "{algorithm:?} seed {seed}: mean {name} {m}");
            }
        }
    }
}

#[test]
fn prox_descent_monitor_matches_recomputation() {
    let p = generate_instance(128, 50, 6, 0.001, 40).unwrap();
    let cfg = SolverConfig::default();
    let mut counted = 0usize;
    let mut obs = |e: &StepEvent<'_>| {
        let params = PenaltyParams::mcp(e.lambda.unwrap(), cfg.gamma).unwrap();
        let rho = e.rho.unwrap();
        let mid = SolverState { x: e.before.x.clone(), u: e.after.u.clone(), w: e.before.w.clone(), k: e.before.k };
        let before = augmented_lagrangian(e.before, &p.a, &p.b, Some(&params), rho).unwrap();
        let after = augmented_lagrangian(&mid, &p.a, &p.b, Some(&params), rho).unwrap();
        counted += usize::from(after - before > PROX_DESCENT_SLACK);
    };
    let sol = run_solver_observed(&p, &cfg, None, &mut obs).unwrap();
    assert_eq!(sol.prox_descent_violations, counted);
}

#[test]
fn augmented_lagrangian_matches_term_by_term_evaluation() {
    let p = generate_instance(12, 6, 2, 0.1, 41).unwrap();
    let mut g = admm_mcp_core::rng::SplitMix64::new(41);
    let mut v = || (0..12).map(|_| g.next_gaussian()).collect::<Vec<f64>>();
    let state = SolverState { x: v(), u: v(), w: v(), k: 3 };
    let params = PenaltyParams::mcp(0.3, 2.0).unwrap();
    let rho = 0.7;
    let r: Vec<f64> = p.a.mul_vec(&state.x).unwrap().iter().zip(&p.b).map(|(ax, b)| b - ax).collect();
    let gap: Vec<f64> = state.x.iter().zip(&state.u).map(|(x, u)| x - u).collect();
    let want = dot(&r, &r) + penalty_value_vec(&state.u, &params) + dot(&state.w, &gap) + 0.5 * rho * dot(&gap, &gap);
    let got = augmented_lagrangian(&state, &p.a, &p.b, Some(&params), rho).unwrap();
    assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
}

#[test]
fn iht_descends_when_a_is_contractive() {
    for seed in 0..10 {
        let p = generate_instance(80, 30, 4, 0.01, 50 + seed).unwrap();
        let s = admm_mcp_core::spectral_norm_sq(&p.a).unwrap().sqrt();
        let a = p.a.scaled(0.99 / s);
        let mut x = vec![0.0; 80];
        let mut f = residual_sq(&a, &p.b, &x);
        for k in 0..50 {
            let next = iht_step(&x, &a, &p.b, 4).unwrap();
            let fn_ = residual_sq(&a, &p.b, &next);
            if next == x {
                break;
            }
            assert!(fn_ < f, "seed {seed} step {k}: {fn_} >= {f}");
            x = next;
            f = fn_;
        }
    }
}

fn support(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

#[test]
fn niht_support_is_scale_invariant() {
    for seed in 0..10 {
        let p = generate_instance(60, 25, 5, 0.01, 60 + seed).unwrap();
        let start_sparse = {
            let mut z = vec![0.0; 60];
            for i in top_k_indices(&p.a.tr_mul_vec(&p.b).unwrap(), 5) {
                z[i] = 0.3;
            }
            z
        };
        for c in [0.01, 0.5, 3.0, 250.0] {
            let ca = p.a.scaled(c);
            // Scaling A by c scales b by c for the same x0, and the step
            // normalization absorbs the rest.
            let cb: Vec<f64> = p.b.iter().map(|v| c * v).collect();
            for x in [vec![0.0; 60], start_sparse.clone()] {
                let base = niht_step(&x, &p.a, &p.b, 5).unwrap();
                let scaled = niht_step(&x, &ca, &cb, 5).unwrap();
                assert_eq!(support(&base), support(&scaled), "seed {seed}, c {c}");
                assert!(dist2(&base, &scaled) <= 1e-10 * (1.0 + norm2(&base)));
            }
        }
    }
}

#[test]
fn iht_and_niht_recover_easy_instances() {
    for algorithm in [Algorithm::Iht, Algorithm::Niht] {
        let p = generate_instance(128, 80, 4, 0.0, 70).unwrap();
        let cfg = SolverConfig { max_iter: 2000, tol: 1e-9, ..SolverConfig::for_algorithm(algorithm) };
        let sol = run_solver(&p, &cfg).unwrap();
        assert!(relative_error(x0(&p), &sol.x_hat).unwrap() <= 0.01, "{algorithm:?}");
        assert!(support(&sol.x_hat).len() <= 4);
        assert!(sol.trace.len() <= cfg.max_iter);
    }
}

#[test]
fn grid_selection_follows_its_rule_and_recovers() {
    let p = generate_instance(64, 32, 3, 0.0, 80).unwrap();
    let cfg = SolverConfig { lambda_strategy: LambdaStrategy::Grid, ..SolverConfig::default() };
    let sel = lambda_grid_select(&p, &cfg).unwrap();
    let sparsities: Vec<Option<usize>> = sel.points.iter().map(|pt| pt.sparsity).collect();
    assert_eq!(select_grid_index(&sparsities), Some(sel.index));
    assert_eq!(sel.lambda, sel.points[sel.index].lambda);
    let direct = run_solver(&p, &cfg).unwrap();
    assert_eq!(direct.x_hat, sel.solution.x_hat);
    assert_eq!(direct.final_lambda, Some(sel.lambda));
    let err = relative_error(x0(&p), &direct.x_hat).unwrap();
    assert!(err <= 0.01, "rel err {err} at lambda {}", sel.lambda);
}

#[test]
fn tiny_explicit_rho_diverges_or_stays_finite() {
    // Whatever happens, the solver never returns non-finite output.
    let p = generate_instance(64, 32, 4, 0.0, 90).unwrap();
    let cfg = SolverConfig { rho_mode: RhoMode::Explicit(1e-6), ..SolverConfig::default() };
    match run_solver(&p, &cfg) {
        Ok(sol) => assert!(sol.x_hat.iter().all(|v| v.is_finite())),
        Err(admm_mcp_core::Error::Diverged { trace, .. }) => assert!(trace.len() <= cfg.max_iter),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn dimension_errors_surface_before_iterating() {
    let a = DenseMatrix::zeros(3, 5);
    let p = admm_mcp_core::ProblemInstance::new(a, vec![0.0; 3], 6);
    assert!(p.is_err() || run_solver(&p.unwrap(), &SolverConfig::default()).is_err());
}
