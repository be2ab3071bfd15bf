use specshift::analytic::{lemma34_sign_check, phi_mu_eps, regularization_limit_check, truncation_experiment};
use specshift::contour::Contour;
use specshift::flow::{linspace, FamilyKind};
use specshift::generate::{instance, truncation_instance};
use specshift::linalg::{projected_trace, RealInterval};
use specshift::rng::SplitMix64;
use specshift::SmoothFunction;

#[test]
fn truncation_columns_converge_and_rows_decrease() {
    let phi = phi_mu_eps(0.0, 1e-2).unwrap();
    let grid = linspace(-0.5, 0.5, 21);
    let cutoffs = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    for seed in 0..5 {
        let (h0, fam) = truncation_instance(&mut SplitMix64::new(seed), 3, 10, 0.5).unwrap();
        let table = truncation_experiment(&h0, &fam, &phi, &grid, &cutoffs).unwrap();
        assert!(table.column_gap() <= 1e-6, "seed {seed}: {}", table.column_gap());
        assert!(table.oracle_gap() <= 1e-6);
        assert!(table.row_violations(1e-8).is_empty(), "seed {seed}");
    }
}

#[test]
fn truncation_table_csv_layout() {
    let (h0, fam) = truncation_instance(&mut SplitMix64::new(1), 2, 2, 0.5).unwrap();
    let phi = phi_mu_eps(0.0, 0.1).unwrap();
    let table = truncation_experiment(&h0, &fam, &phi, &[0.0, 1.0], &[1.0, 100.0]).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "s,n=1,n=100,untruncated");
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn sign_contracts_on_seeded_concave_families() {
    let phi = SmoothFunction::exp_decay(1.0);
    let grid = linspace(-0.5, 0.5, 11);
    for seed in 0..10 {
        let (h0, fam) = instance(200 + seed, FamilyKind::QuadraticConcave, 4, 0.5).unwrap();
        let mut hull = (f64::INFINITY, f64::NEG_INFINITY);
        for &s in &grid {
            let h = fam.perturbed(&h0, s).unwrap();
            hull = (hull.0.min(h.min_eigenvalue().unwrap()), hull.1.max(h.max_eigenvalue().unwrap()));
        }
        let contour = Contour::new(hull.0 - 0.5, hull.1 + 0.5, 1.0, 0.5).unwrap();
        let check = lemma34_sign_check(&h0, &fam, &phi, &contour, &grid, 1024).unwrap();
        assert!(check.report.is_clean(), "seed {seed}: {:?}", check.report.violations);
        assert!(check.terms.iter().all(|t| t.curvature_term <= 1e-10 && t.contour_term >= -1e-8));
    }
}

#[test]
fn regularization_matches_projection_oracle() {
    let mut rng = SplitMix64::new(77);
    let h = rng.with_spectrum(&[-2.0, -1.5, 1.0, 1.4]);
    let w = rng.hermitian(4, 1.0);
    let oracle = projected_trace(&w, &h, &RealInterval::below(0.0)).unwrap();
    let eps = [1e-1, 1e-3, 1e-5, 1e-8];
    let r = regularization_limit_check(&h, &w, 0.0, &eps).unwrap();
    assert_eq!(r.limit, oracle);
    assert!(r.contract_applies());
    assert!(r.final_gap() <= 1e-6, "{r:?}");
    let gaps: Vec<f64> = r.values.iter().map(|v| (v - oracle).abs()).collect();
    assert!(gaps.windows(2).all(|g| g[1] <= g[0]), "{gaps:?}");
}
