use actlearn_core::fom::{
    burgers_exact, burgers_snapshots, provider_for, swe_solve, swe_solve_from, BurgersConfig,
    BurgersProvider, FomConfig, FomError, FomProvider, ProblemKind, SweConfig,
};
use actlearn_core::grid::{linspace, uniform_time_grid};
use actlearn_core::linalg::thin_svd;

fn sigma_ratio(m: &actlearn_core::linalg::Matrix, k: usize) -> f64 {
    let s = thin_svd(m).unwrap().singular_values;
    s.get(k).copied().unwrap_or(0.0) / s[0]
}

#[test]
fn burgers_closed_form_examples() {
    for t in [0.0, 0.3, 2.0] {
        assert_eq!(burgers_exact(250.0, 0.0, t), 0.0);
    }
    let v = burgers_exact(10.0, 1.0, 0.0);
    assert!((v - 1.0 / (1.0 + 1.875f64.exp())).abs() < 1e-15);
    assert!((v - 0.13296).abs() < 5e-6);
    for x in [0.05, 0.4, 0.77] {
        for re in [10.0f64, 1000.0] {
            let ic = x / (1.0 + (re / 16.0 * (4.0 * x * x - 1.0f64)).exp());
            assert!((burgers_exact(re, x, 0.0) - ic).abs() <= 1e-15);
        }
    }
}

#[test]
fn burgers_reference_grid_snapshots() {
    let t = uniform_time_grid(2.0, 100);
    let x = linspace(0.0, 1.0, 150);
    for re in [10.0, 350.0, 5500.0] {
        let s = burgers_snapshots(&x, 1.0 / re, &t).unwrap();
        assert_eq!(s.data().shape(), (150, 101));
        let max0 = s.data().column(0).iter().copied().fold(0.0, f64::max);
        assert!(s.data().as_col_major().iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= max0));
    }
    let two = burgers_snapshots(&[0.0, 1.0], 0.01, &t).unwrap();
    assert_eq!(two.data().shape(), (2, 101));
    assert!(two.data().row(0).iter().all(|&v| v == 0.0));
}

#[test]
fn burgers_decay_slows_with_reynolds_number() {
    let p = BurgersProvider::new(BurgersConfig::default()).unwrap();
    let t = uniform_time_grid(2.0, 100);
    let low = p.solve(&[1.0 / 10.0], &t).unwrap();
    let high = p.solve(&[1.0 / 1000.0], &t).unwrap();
    assert!(sigma_ratio(high[0].data(), 10) > sigma_ratio(low[0].data(), 10));
}

#[test]
fn providers_dispatch() {
    let b = provider_for(&FomConfig::Burgers(BurgersConfig::default())).unwrap();
    assert_eq!(b.component_labels(), vec!["u".to_string()]);
    assert_eq!(b.spatial_grid().len(), 150);
    let cfg = SweConfig { nodes: 41, ..SweConfig::default() };
    let s = provider_for(&FomConfig::Swe(cfg)).unwrap();
    assert_eq!(s.component_labels(), vec!["h".to_string(), "u".to_string()]);
    let t = uniform_time_grid(0.1, 4);
    assert!(matches!(s.solve(&[0.0], &t), Err(FomError::ConfigError(_))));
    let out = s.solve(&[0.01], &t).unwrap();
    assert_eq!(out.len(), 2);
    for m in &out {
        assert_eq!(m.time_grid(), &t[..]);
        assert_eq!(m.state_dim(), 41);
    }
    assert!(ProblemKind::from_name("heat").is_err());
    assert_eq!(ProblemKind::from_name("swe").unwrap(), ProblemKind::Swe);
}

#[test]
fn swe_lake_at_rest() {
    let cfg = SweConfig { nodes: 101, ..SweConfig::default() };
    let t = uniform_time_grid(1.0, 10);
    let sol = swe_solve_from(&cfg, 0.1, &t, vec![1.0; 100], vec![0.0; 100]).unwrap();
    assert!(sol.diagnostics.steps > 10);
    for v in sol.height.data().as_col_major() {
        assert!((v - 1.0).abs() <= 1e-12);
    }
    assert!(sol.velocity.data().max_abs() <= 1e-12);
}

#[test]
fn swe_mass_is_conserved() {
    let cfg = SweConfig { nodes: 201, ..SweConfig::default() };
    let t = uniform_time_grid(2.0, 200);
    for nu in [1e-5, 1e-2, 1.0] {
        let sol = swe_solve(&cfg, nu, &t).unwrap();
        assert!(sol.diagnostics.mass_drift() <= 1e-12, "nu {nu}");
        // The last node duplicates the first (periodic).
        let h = sol.height.data();
        assert_eq!(h.row(0), h.row(200));
    }
}

#[test]
fn swe_friction_reduces_momentum() {
    let cfg = SweConfig { nodes: 201, ..SweConfig::default() };
    let t = uniform_time_grid(2.0, 40);
    let sol = swe_solve(&cfg, 0.05, &t).unwrap();
    let (h, u) = (sol.height.data(), sol.velocity.data());
    let mut last = f64::INFINITY;
    for j in 0..t.len() {
        assert!(u.column(j)[..200].iter().all(|&v| v > 0.0));
        let momentum: f64 = (0..200).map(|i| h[(i, j)] * u[(i, j)]).sum();
        assert!(momentum < last);
        last = momentum;
    }
}

#[test]
fn swe_self_convergence() {
    let t = [0.0, 0.25];
    let solve = |nodes: usize| {
        let cfg = SweConfig { nodes, ..SweConfig::default() };
        swe_solve(&cfg, 0.5, &t).unwrap()
    };
    let (c, m, f) = (solve(201), solve(401), solve(801));
    let l1 = |a: &actlearn_core::linalg::Matrix, b: &actlearn_core::linalg::Matrix, stride: usize, dx: f64| {
        (0..200).map(|i| (a[(i, 1)] - b[(i * stride, 1)]).abs() * dx).sum::<f64>()
    };
    for (coarse, mid, fine) in [
        (c.height.data(), m.height.data(), f.height.data()),
        (c.velocity.data(), m.velocity.data(), f.velocity.data()),
    ] {
        let e1 = l1(coarse, mid, 2, 0.01);
        // Mid vs fine on the mid grid, restricted to the coarse nodes.
        let e2 = (0..200).map(|i| (mid[(2 * i, 1)] - fine[(4 * i, 1)]).abs() * 0.01).sum::<f64>();
        let order = (e1 / e2).log2();
        assert!(order >= 1.5, "observed order {order}");
    }
}

#[test]
fn swe_decay_slows_as_viscosity_drops() {
    let cfg = SweConfig { nodes: 201, ..SweConfig::default() };
    let t = uniform_time_grid(2.0, 200);
    let stiff = swe_solve(&cfg, 1.0, &t).unwrap();
    let free = swe_solve(&cfg, 1e-4, &t).unwrap();
    assert!(sigma_ratio(free.height.data(), 20) > sigma_ratio(stiff.height.data(), 20));
    assert!(sigma_ratio(free.velocity.data(), 20) > sigma_ratio(stiff.velocity.data(), 20));
}

#[test]
fn swe_rejects_bad_config() {
    let t = uniform_time_grid(1.0, 2);
    assert!(swe_solve(&SweConfig { cfl: 1.2, ..SweConfig::default() }, 0.1, &t).is_err());
    assert!(swe_solve(&SweConfig { lambda: 0.0, ..SweConfig::default() }, 0.1, &t).is_err());
    assert!(swe_solve(&SweConfig { nodes: 3, ..SweConfig::default() }, 0.1, &t).is_err());
}
