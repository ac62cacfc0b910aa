//! Seeded Monte Carlo checks of the limit theorems at moderate sizes.

use spectral_lab::experiments::{find, run_resolvent_error, run_scenario, run_window_scan, ExecOptions, ModelSpec, Scenario};
use spectral_lab::outliers::count_near;
use spectral_lab::C64;

fn sized(name: &str, grid: &[usize], trials: usize) -> Scenario {
    let mut s = find(name).unwrap();
    s.n_grid = grid.to_vec();
    s.trials = trials;
    s
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn unperturbed_resolvent_error_decays_like_inverse_sqrt() {
    let s = sized("resolvent-baseline", &[250, 1000], 20);
    let out = run_resolvent_error(&s, &[C64::new(0.0, 2.0)], &ExecOptions::default()).unwrap();
    let at = |n: usize| median(out.statistic("sup_error").into_iter().filter(|p| p.0 == n).map(|p| p.1).collect());
    let ratio = at(250) / at(1000);
    // N^{-1/2} predicts 2; allow a factor 3 either way
    assert!((2.0 / 3.0..=6.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn deformed_resolvent_error_within_rate() {
    let s = sized("resolvent-c1", &[1000], 20);
    let out = run_resolvent_error(&s, &[C64::new(1.0, 1.0)], &ExecOptions::default()).unwrap();
    let err = out.statistic("sup_error");
    let psi = out.statistic("sup_psi");
    let slack = 10.0 * 1000f64.powf(0.1);
    let ok = err.iter().zip(&psi).filter(|(e, p)| e.1 < slack * p.1).count();
    assert!(ok >= 19, "{ok}/20");
}

#[test]
fn single_spike_keeps_one_eigenvalue_in_a_shrinking_disc() {
    let n = 1000;
    let out = run_scenario(&sized("wigner-spike-c1", &[n], 20), &ExecOptions::default()).unwrap();
    let z0 = out.predictions[0].z0;
    let radius = (n as f64).powf(-0.4);
    let mut ones = 0;
    for t in 0..20 {
        let spec: Vec<C64> = out.spectra.iter().filter(|r| r.trial == t).map(|r| C64::new(r.re, r.im)).collect();
        let k = count_near(&spec, z0, radius);
        assert!(k <= 1, "trial {t}: {k} eigenvalues within {radius}");
        ones += usize::from(k == 1);
    }
    assert!(ones >= 15, "{ones}/20");
}

#[test]
fn c4_has_one_eigenvalue_above_the_bulk() {
    let out = run_scenario(&sized("wigner-spike-c4", &[1000], 5), &ExecOptions::default()).unwrap();
    for t in 0..5 {
        let high: Vec<C64> = out.spectra.iter().filter(|r| r.trial == t && r.im > 1.0).map(|r| C64::new(r.re, r.im)).collect();
        assert_eq!(high.len(), 1, "trial {t}");
        assert!((high[0] - C64::new(0.0, 1.5)).norm() < 0.15);
    }
}

#[test]
fn c4_window_excludes_a_small_blob_at_the_outlier() {
    let s = sized("window-scan-c4", &[1000], 1);
    let out = run_window_scan(&s, 0.01, &ExecOptions::default()).unwrap();
    let z0 = C64::new(0.0, 1.5);
    let excluded: Vec<C64> = out.raster.iter().filter(|r| !r.inside).map(|r| C64::new(r.x, r.y)).collect();
    assert!(!excluded.is_empty());
    // |m'(3i/2)| = 1/5, so the excluded blob has radius about 5 N^{-beta}
    let radius = 5.0 * 1000f64.powf(-s.beta);
    let reach = excluded.iter().map(|z| (z - z0).norm()).fold(0.0, f64::max);
    assert!(reach < 1.5 * radius, "excluded set reaches {reach}");
    // the cell nearest z0 is excluded
    let nearest = out.raster.iter().min_by(|a, b| (C64::new(a.x, a.y) - z0).norm().total_cmp(&(C64::new(b.x, b.y) - z0).norm())).unwrap();
    assert!(!nearest.inside);
}

#[test]
fn hankel_mode_error_does_not_grow() {
    let out = run_scenario(&find("hankel-modes").unwrap(), &ExecOptions::default()).unwrap();
    assert_eq!(out.pass, Some(true), "{:?}", out.estimate);
}

#[test]
fn hx_mp_outlier_is_real() {
    let s = sized("hx-mp-square", &[400], 5);
    let out = run_scenario(&s, &ExecOptions::default()).unwrap();
    let ModelSpec::HX { .. } = s.model else { unreachable!() };
    assert!((out.predictions[0].z0 - C64::new(-0.5, 0.0)).norm() < 1e-12);
    assert!(out.frequency.unwrap().frequency >= 0.8);
}
