//! Checks the frozen oracle fixture three ways: the committed numbers are
//! reproduced by the brute-force oracles, the oracles agree with closed
//! forms where one exists, and the estimators land within their stated
//! tolerances of the frozen values.

mod common;

use common::*;

use tlab_core::altproj::{detect_stall, fit_linear_rate, run_alternating_projections};
use tlab_core::altproj::Termination;
use tlab_core::estimators::{
    estimate_itrhat, estimate_subtransversality, EstimatorParams,
};
use tlab_core::scenario as catalog;
use tlab_core::sets::RadiusSchedule;
use tlab_core::RealVector;

fn assert_rel(label: &str, got: f64, want: f64, tol: f64) {
    let scale = want.abs().max(1e-12);
    assert!(
        (got - want).abs() <= tol * scale,
        "{label}: {got} vs {want} (rel tol {tol})"
    );
}

#[test]
#[ignore = "writes tests/fixtures/oracle_values.json from the brute-force oracles"]
fn regenerate_fixture() {
    let fx = compute_fixture();
    let mut text = serde_json::to_string_pretty(&fx).expect("serializes");
    text.push('\n');
    std::fs::write(fixture_path(), text).expect("fixture written");
}

#[test]
fn fixture_matches_recomputed_oracles() {
    let frozen = load_fixture();
    let fresh = compute_fixture();
    for (label, fz) in &frozen.two_lines {
        let fr = &fresh.two_lines[label];
        assert_rel(&format!("{label} theta"), fr.theta, fz.theta, 1e-12);
        assert_rel(&format!("{label} str"), fr.str_grid, fz.str_grid, 1e-12);
        assert_rel(
            &format!("{label} itrhat1"),
            fr.itrhat1_grid,
            fz.itrhat1_grid,
            1e-12,
        );
    }
    assert_eq!(fresh.pairs_pi_over_3.n_feasible, frozen.pairs_pi_over_3.n_feasible);
    assert_rel("itr1", fresh.pairs_pi_over_3.itr1, frozen.pairs_pi_over_3.itr1, 1e-12);
    assert_rel("itr2", fresh.pairs_pi_over_3.itr2, frozen.pairs_pi_over_3.itr2, 1e-12);
    assert_rel("itr3", fresh.pairs_pi_over_3.itr3, frozen.pairs_pi_over_3.itr3, 1e-12);
    assert_rel(
        "itr_from_pairs",
        fresh.pairs_pi_over_3.itr_from_pairs,
        frozen.pairs_pi_over_3.itr_from_pairs,
        1e-12,
    );
    assert_eq!(
        fresh.alternating_pi_over_3.cycles_to_tol,
        frozen.alternating_pi_over_3.cycles_to_tol
    );
    assert_rel(
        "cycle1",
        fresh.alternating_pi_over_3.cycle1[0],
        frozen.alternating_pi_over_3.cycle1[0],
        1e-12,
    );
    assert_eq!(fresh.tangential.radii, frozen.tangential.radii);
    for (k, (fr, fz)) in fresh
        .tangential
        .str_grid
        .iter()
        .zip(&frozen.tangential.str_grid)
        .enumerate()
    {
        assert_rel(&format!("tangential str k={k}"), *fr, *fz, 1e-12);
    }
    assert_rel(
        "tangential itrhat1",
        fresh.tangential.itrhat1_grid_final,
        frozen.tangential.itrhat1_grid_final,
        1e-12,
    );
    assert_eq!(fresh.stall.point_a, frozen.stall.point_a);
    assert_eq!(fresh.stall.point_b, frozen.stall.point_b);
    assert_rel("stall gap", fresh.stall.gap, frozen.stall.gap, 1e-12);
}

#[test]
fn two_lines_oracles_track_closed_forms() {
    let fx = load_fixture();
    for (label, theta) in TWO_LINE_ANGLES {
        let expect = (theta / 2.0).sin();
        let o = &fx.two_lines[label];
        assert!(
            (o.str_grid - expect).abs() < 1e-3,
            "{label} str grid {} vs {expect}",
            o.str_grid
        );
        assert!(
            (o.itrhat1_grid - expect).abs() < 1e-3,
            "{label} itrhat1 grid {} vs {expect}",
            o.itrhat1_grid
        );
    }
}

#[test]
fn pair_grid_oracle_tracks_closed_forms() {
    let fx = load_fixture();
    let p = &fx.pairs_pi_over_3;
    let theta = std::f64::consts::FRAC_PI_3;
    let s = (theta / 2.0).sin();
    assert!(p.n_feasible > 0, "grid found no feasible triples");
    assert!((p.itr1 - 2.0 * (theta / 2.0).cos()).abs() < 0.02, "itr1 {}", p.itr1);
    assert!((p.itr2 - theta.cos()).abs() < 0.02, "itr2 {}", p.itr2);
    assert!(
        (p.itr3 - std::f64::consts::SQRT_2 * s).abs() < 0.02,
        "itr3 {}",
        p.itr3
    );
    assert!((p.itr_from_pairs - s).abs() < 0.02, "pairs {}", p.itr_from_pairs);
}

#[test]
fn tangential_annulus_oracle_matches_balanced_crossing() {
    let fx = load_fixture();
    for (k, (&rho, &grid)) in fx
        .tangential
        .radii
        .iter()
        .zip(&fx.tangential.str_grid)
        .enumerate()
    {
        let r = 0.5 * rho;
        let closed = (-2.0 + (4.0 + r * r).sqrt()) / r;
        assert_rel(&format!("annulus min k={k}"), grid, closed, 1e-6);
    }
    assert!(fx.tangential.itrhat1_grid_final > 0.0);
    assert!(
        fx.tangential.itrhat1_grid_final <= 0.05,
        "final chord gap {}",
        fx.tangential.itrhat1_grid_final
    );
}

#[test]
fn alternating_engine_matches_closed_form_walk() {
    let fx = load_fixture();
    let oracle = &fx.alternating_pi_over_3;
    let sc = catalog::two_lines("lines", std::f64::consts::FRAC_PI_3, 5);
    let trace = run_alternating_projections(
        &sc,
        &RealVector::from_slice(&[1.0, 0.0]),
        60,
        1e-10,
    )
    .unwrap();
    assert_eq!(trace.termination, Termination::Converged);
    assert_eq!(trace.cycles, oracle.cycles_to_tol);
    let c1 = trace.cycle_point(1, 2).expect("cycle 1 recorded");
    assert!((c1.x.as_slice()[0] - oracle.cycle1[0]).abs() < 1e-12);
    assert!((c1.x.as_slice()[1] - oracle.cycle1[1]).abs() < 1e-12);
    let fit = fit_linear_rate(&trace, 10).unwrap();
    assert!(
        (fit.rate_per_cycle - oracle.rate_per_cycle).abs() < 1e-9,
        "rate {}",
        fit.rate_per_cycle
    );
}

#[test]
fn stall_engine_matches_per_piece_walk() {
    let fx = load_fixture();
    let sc = catalog::stall_line_and_point(3);
    let trace = run_alternating_projections(
        &sc,
        &RealVector::from_slice(&[5.0, 1.0]),
        50,
        1e-10,
    )
    .unwrap();
    assert_eq!(trace.termination, Termination::Stalled);
    let stall = detect_stall(&trace, 1e-8).expect("stationary pair found");
    for i in 0..2 {
        assert!((stall.point_a.as_slice()[i] - fx.stall.point_a[i]).abs() < 1e-12);
        assert!((stall.point_b.as_slice()[i] - fx.stall.point_b[i]).abs() < 1e-12);
    }
    assert!((stall.gap - fx.stall.gap).abs() < 1e-12);
}

#[test]
fn estimators_track_frozen_two_lines_values() {
    let fx = load_fixture();
    let frozen = &fx.two_lines["pi-over-3"];
    let sc = catalog::two_lines("lines", frozen.theta, 7);
    let params = EstimatorParams::default();
    let est = estimate_subtransversality(&sc, &params, 11).unwrap();
    assert!(
        (est.value - frozen.str_grid).abs() <= 0.02,
        "str {} vs frozen {}",
        est.value,
        frozen.str_grid
    );
    let (h1, _) = estimate_itrhat(&sc, &params, 13).unwrap();
    assert!(
        (h1.value - frozen.itrhat1_grid).abs() <= 0.02,
        "itrhat1 {} vs frozen {}",
        h1.value,
        frozen.itrhat1_grid
    );
}

#[test]
fn subtransversality_tracks_frozen_tangential_decay() {
    let fx = load_fixture();
    let sc = catalog::tangential_ball_line(9);
    let mut params = EstimatorParams::default();
    params.schedule = RadiusSchedule {
        rho0: fx.tangential.radii[0],
        gamma: 0.5,
        steps: fx.tangential.radii.len(),
    };
    let est = estimate_subtransversality(&sc, &params, 17).unwrap();
    assert_eq!(est.per_radius.len(), fx.tangential.str_grid.len());
    for (k, (rv, &oracle)) in est.per_radius.iter().zip(&fx.tangential.str_grid).enumerate() {
        assert!(
            rv.value >= oracle * (1.0 - 1e-9),
            "k={k}: estimate {} undercuts the annulus minimum {oracle}",
            rv.value
        );
        assert!(
            rv.value <= oracle * 1.05,
            "k={k}: estimate {} misses the annulus minimum {oracle}",
            rv.value
        );
    }
}
