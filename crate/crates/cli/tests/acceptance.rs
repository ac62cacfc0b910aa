//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run all with `cargo test --release --test acceptance`, or a subset by
//! number: `cargo test --release --test acceptance -- 3 7`.

use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use ndarray_linalg::{Determinant, Inverse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_lab::experiments::{find, fit_loglog, registry, run_scenario, ExecOptions, ModelSpec, RunOutput, Scenario};
use spectral_lab::hankel::{hankel_pencil, match_modes, pencil_modes, synth_signal, SignalModel};
use spectral_lab::matops::{det_diff_bound, kappa_bounds, max_norm, norm, spectral_norm, spectrum, woodbury_inverse};
use spectral_lab::perturbation::{det_l_linear, perturbed_linear, MatrixPoly};
use spectral_lab::polyeig::hx_spectrum_verified;
use spectral_lab::stieltjes::m_wigner;
use spectral_lab::{CMatrix, NormKind, PerturbationModel, RealAxis, C64};
use spectral_lab_cli::{execute, ConfigFile, Overrides, RunConfig};

// criterion 1
const LOCATION_N: usize = 1000;
const LOCATION_TRIALS: usize = 20;
const LOCATION_RADIUS: f64 = 0.15;
const LOCATION_MIN_HITS: usize = 18;
// criterion 2
const HALF_RATE: (f64, f64) = (-0.65, -0.35);
const SIXTH_RATE: (f64, f64) = (-0.30, -0.05);
const RATE_TRIALS: usize = 10;
const REDUCED_MAX_N: usize = 1000;
// criterion 3
const BULK_TRIALS: usize = 10;
const BULK_TOL: f64 = 0.25;
// criterion 4
const COUNT_RADIUS: f64 = 0.3;
const COUNT_MIN_FREQ: f64 = 0.9;
// criterion 5
const HX_RADIUS: f64 = 0.15;
const HX_MP_RADIUS: f64 = 0.1;
const HX_MIN_FREQ: f64 = 0.9;
// criterion 6
const ACOUSTIC_N: usize = 500;
const ACOUSTIC_TRIALS: usize = 20;
const ACOUSTIC_MIN_FREQ: f64 = 0.8;
// criterion 8
const WOODBURY_TOL: f64 = 1e-10;
const QUADRATIC_TOL: f64 = 1e-12;
const HX_ROUTE_TOL: f64 = 1e-8;
const DET_L_TOL: f64 = 1e-8;
/// Rounding allowance for bounds that are attained (k = 1), in ulps of the operands.
const BOUND_SLACK: f64 = 64.0 * f64::EPSILON;
// criterion 9
const NOISELESS_TOL: f64 = 1e-8;
const CONJECTURE_RATE: (f64, f64) = (-0.7, -0.3);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn run(s: &Scenario) -> RunOutput {
    run_scenario(s, &ExecOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", s.name))
}

fn sized(name: &str, grid: &[usize], trials: usize) -> Scenario {
    let mut s = find(name).unwrap();
    s.n_grid = grid.to_vec();
    s.trials = trials;
    s
}

fn slope(out: &RunOutput) -> f64 {
    out.estimate.as_ref().and_then(|e| e.slope).unwrap_or(f64::NAN)
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&v)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn criterion_1() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, z0) in [("wigner-spike-c1", "63i/8"), ("wigner-spike-c4", "3i/2")] {
        let out = run(&sized(name, &[LOCATION_N], LOCATION_TRIALS));
        // k = 1, so delta is the distance from the nearest eigenvalue
        let hits = out.statistic("delta").iter().filter(|d| d.1 < LOCATION_RADIUS).count();
        pass &= hits >= LOCATION_MIN_HITS;
        parts.push(format!("{name}: {hits}/{LOCATION_TRIALS} within {LOCATION_RADIUS} of {z0}"));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_2() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for i in 1..=4 {
        let mut s = find(&format!("wigner-spike-c{i}")).unwrap();
        s.trials = RATE_TRIALS;
        let out = run(&s);
        let range = if i == 3 { SIXTH_RATE } else { HALF_RATE };
        let full = slope(&out);
        let reduced: Vec<(usize, f64)> =
            out.estimate.as_ref().unwrap().per_n.iter().filter(|p| p.n <= REDUCED_MAX_N).map(|p| (p.n, p.median)).collect();
        let reduced = fit_loglog(&reduced).ok().and_then(|e| e.slope).unwrap_or(f64::NAN);
        pass &= within(full, range);
        parts.push(format!("C{i} slope {full:.3} in [{}, {}] (N <= {REDUCED_MAX_N}: {reduced:.3})", range.0, range.1));
    }
    verdict(pass, format!("N {:?}, {RATE_TRIALS} trials: {}", find("wigner-spike-c1").unwrap().n_grid, parts.join("; ")))
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in [("bulk-a1", -1.0), ("bulk-a5", -0.5), ("bulk-a6", -1.0)] {
        let mut s = find(name).unwrap();
        s.trials = BULK_TRIALS;
        let v = slope(&run(&s));
        pass &= (v - target).abs() <= BULK_TOL;
        parts.push(format!("{name} slope {v:.3} (target {target} +- {BULK_TOL})"));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_4() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["wigner-spike-c2", "wigner-spike-c3"] {
        let out = run(&sized(name, &[LOCATION_N], LOCATION_TRIALS));
        let counts = out.statistic("count_near");
        let exact = counts.iter().filter(|v| v.1 == 3.0).count();
        let fourth_outside = out.statistic("next_distance").iter().filter(|v| v.1 > COUNT_RADIUS).count();
        let freq = exact as f64 / counts.len() as f64;
        pass &= freq >= COUNT_MIN_FREQ && fourth_outside as f64 / counts.len() as f64 >= COUNT_MIN_FREQ;
        parts.push(format!(
            "{name}: exactly 3 within {COUNT_RADIUS} in {exact}/{}, 4th nearest outside in {fourth_outside}/{}",
            counts.len(),
            counts.len()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_5() -> Verdict {
    let mut s = sized("hx-wigner-122", &[LOCATION_N], LOCATION_TRIALS);
    if let ModelSpec::HX { radius, .. } = &mut s.model {
        *radius = HX_RADIUS;
    }
    let w = run(&s);
    let wf = w.frequency.unwrap();
    let mut m = sized("hx-mp-square", &[LOCATION_N], LOCATION_TRIALS);
    if let ModelSpec::HX { radius, .. } = &mut m.model {
        *radius = HX_MP_RADIUS;
    }
    let mp = run(&m);
    let mf = mp.frequency.unwrap();
    let preds: Vec<String> = w.predictions.iter().map(|p| format!("{:.4}i x{}", p.z0.im, p.multiplicity)).collect();
    verdict(
        wf.frequency >= HX_MIN_FREQ && mf.frequency >= HX_MIN_FREQ,
        format!(
            "Wigner c = (-1,-2,-2), predictions [{}]: 3 upper eigenvalues matched in {}/{}; square MP c = (-1): real eigenvalue within {HX_MP_RADIUS} of {:.4} in {}/{}",
            preds.join(", "),
            wf.successes,
            wf.trials,
            mp.predictions[0].z0.re,
            mf.successes,
            mf.trials
        ),
    )
}

fn criterion_6() -> Verdict {
    let out = run(&sized("quad-acoustic", &[ACOUSTIC_N], ACOUSTIC_TRIALS));
    let f = out.frequency.unwrap();
    let nearest = out.statistic("nearest_target");
    let mean = nearest.iter().map(|v| v.1).sum::<f64>() / nearest.len() as f64;
    verdict(
        f.frequency >= ACOUSTIC_MIN_FREQ,
        format!(
            "eigenvalue within 0.05 of 0.3223 in {}/{} trials (mean nearest distance {mean:.4}); trials with a non-real pair: {}/{}",
            f.successes, f.trials, out.metrics["trials_with_nonreal"], f.trials
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["resolvent-baseline", "resolvent-c1"] {
        let out = run(&find(name).unwrap());
        let v = slope(&out);
        let psi = fit_loglog(&out.statistic("sup_psi")).ok().and_then(|e| e.slope).unwrap_or(f64::NAN);
        pass &= within(v, HALF_RATE);
        parts.push(format!("{name} sup-error slope {v:.3} (sup Psi slope {psi:.3})"));
    }
    verdict(pass, parts.join("; "))
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMatrix {
    Array2::from_shape_simple_fn((r, cols), || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = Array2::from_shape_simple_fn((n, n), || rng.random_range(-1.0..1.0));
    ((&g + &g.t()) / (2.0 * (n as f64).sqrt())).mapv(|v| c(v, 0.0))
}

fn newton_det_l(model: &PerturbationModel, x: &CMatrix, mut z: C64) -> Option<C64> {
    for _ in 0..100 {
        let f = det_l_linear(model, x, z).ok()?;
        let h = 1e-7 * (1.0 + z.norm());
        let df = (det_l_linear(model, x, z + h).ok()? - det_l_linear(model, x, z - h).ok()?) / (2.0 * h);
        let step = f / df;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    Some(z)
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut fails = Vec::new();

    let mut woodbury: f64 = 0.0;
    for big_n in [5, 20, 50, 100, 200] {
        let x = random_matrix(&mut rng, big_n, big_n) + CMatrix::eye(big_n).mapv(|v| v * 8.0);
        let p = random_matrix(&mut rng, big_n, 3);
        let q = random_matrix(&mut rng, 3, big_n);
        let cm = random_matrix(&mut rng, 3, 3) + CMatrix::eye(3).mapv(|v| v * 2.0);
        let w = woodbury_inverse(&x.inv().unwrap(), &p, &cm.inv().unwrap(), &q).unwrap();
        let direct = (&x + &p.dot(&cm).dot(&q)).inv().unwrap();
        woodbury = woodbury.max(max_norm(&(&w - &direct)) / max_norm(&direct));
    }
    if !(woodbury < WOODBURY_TOL) {
        fails.push("woodbury");
    }

    let mut quad: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let y = if j < 50 { -3.0 + 0.06 * j as f64 } else { 0.06 * (j - 49) as f64 };
            let z = c(-3.0 + 0.06 * i as f64, y);
            let m = m_wigner(z, RealAxis::LimitFromAbove).unwrap();
            quad = quad.max((m * m + z * m + 1.0).norm());
        }
    }
    if !(quad < QUADRATIC_TOL) {
        fails.push("semicircle quadratic");
    }

    let mut lemma_ratio: f64 = 0.0;
    let mut lemma_ok = true;
    for i in 0..1000 {
        let k = 1 + i % 6;
        let a = random_matrix(&mut rng, k, k).mapv(|v| v * 3.0);
        let scale = 10f64.powi(-((i % 7) as i32));
        let b = &a + &random_matrix(&mut rng, k, k).mapv(|v| v * scale);
        let (da, db) = (a.det().unwrap(), b.det().unwrap());
        let gap = (da - db).norm();
        let bound = det_diff_bound(&a, &b).unwrap();
        lemma_ratio = lemma_ratio.max(gap / bound);
        lemma_ok &= gap <= bound + BOUND_SLACK * (da.norm() + db.norm());
    }
    if !lemma_ok {
        fails.push("determinant bound");
    }

    let big_n = 16;
    let mut kappa_ratio: f64 = 0.0;
    for i in 0..200 {
        let n = 1 + i % 3;
        let mask = |rng: &mut ChaCha8Rng, r: usize, cols: usize| {
            Array2::from_shape_simple_fn((r, cols), || if rng.random_bool(0.3) { c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)) } else { c(0.0, 0.0) })
        };
        let p = mask(&mut rng, big_n, n);
        let q = mask(&mut rng, n, big_n);
        let b = kappa_bounds(&p, &q).unwrap();
        let e = random_matrix(&mut rng, big_n, big_n);
        let em = max_norm(&e);
        let r = [
            spectral_norm(&q.dot(&e).dot(&p)).unwrap() / (em * b.kpq),
            norm(&q.dot(&e), NormKind::OneToOne).unwrap() / (em * b.k1),
            norm(&e.dot(&p), NormKind::InfToInf).unwrap() / (em * b.kinf),
        ];
        kappa_ratio = r.iter().filter(|v| v.is_finite()).fold(kappa_ratio, |a, &v| a.max(v));
    }
    if !(kappa_ratio <= 1.0) {
        fails.push("kappa bounds");
    }

    let mut route: f64 = 0.0;
    for big_n in [5, 10, 50, 100, 200] {
        let x = random_symmetric(&mut rng, big_n);
        match hx_spectrum_verified(&[-1.0, -2.0, -0.5], &x) {
            Ok((_, d)) => route = route.max(d),
            Err(_) => route = f64::INFINITY,
        }
    }
    if !(route < HX_ROUTE_TOL * (1.0 + 200.0 * 2.5)) {
        fails.push("H X dual route");
    }

    let mut det_l: f64 = 0.0;
    let mut checked = 0;
    for inst in 0..20 {
        let big_n = 5 + inst;
        let n = 1 + inst % 3;
        let x = random_symmetric(&mut rng, big_n);
        let cm = random_matrix(&mut rng, n, n).mapv(|v| v * 4.0);
        let model = PerturbationModel::new(random_matrix(&mut rng, big_n, n), MatrixPoly::constant(cm).unwrap(), random_matrix(&mut rng, n, big_n)).unwrap();
        let base = spectrum(&x).unwrap();
        for lam in spectrum(&perturbed_linear(&x, &model, c(0.0, 0.0))).unwrap() {
            let gap = base.iter().map(|b| (b - lam).norm()).fold(f64::INFINITY, f64::min);
            if gap < 1e-2 {
                continue;
            }
            let start = lam + c(1.0, 1.0) * (gap / 20.0).min(1e-3);
            let root = newton_det_l(&model, &x, start).unwrap_or(c(f64::NAN, f64::NAN));
            det_l = det_l.max((root - lam).norm() / (1.0 + lam.norm()));
            checked += 1;
        }
    }
    if !(det_l < DET_L_TOL) || checked == 0 {
        fails.push("det L zeros");
    }

    verdict(
        fails.is_empty(),
        format!(
            "woodbury rel {woodbury:.2e}; |m^2 + z m + 1| max {quad:.2e}; det bound ratio max {lemma_ratio:.3}; kappa ratio max {kappa_ratio:.3}; H X routes {route:.2e}; det L zeros vs spectrum {det_l:.2e} over {checked} eigenvalues{}",
            if fails.is_empty() { String::new() } else { format!("; failed: {}", fails.join(", ")) }
        ),
    )
}

fn criterion_9() -> Verdict {
    let hm = find("hankel-modes").unwrap();
    let ModelSpec::HankelModes { modes, .. } = &hm.model else { unreachable!() };
    let truth: Vec<C64> = modes.iter().map(|m| m.1).collect();
    let mut noiseless: f64 = 0.0;
    for &n in &hm.n_grid {
        let s = synth_signal(&SignalModel { modes: modes.clone(), n, noise_sigma: 0.0, seed: 0 }).unwrap();
        let (u0, u1) = hankel_pencil(&s).unwrap();
        let est = pencil_modes(&u0, &u1, truth.len()).unwrap();
        noiseless = noiseless.max(match_modes(&est, &truth).unwrap().1);
    }
    let out = run(&find("hankel-conjecture").unwrap());
    let v = slope(&out);
    let f = out.frequency.unwrap();
    let flag = if within(v, CONJECTURE_RATE) { "CONJECTURE-CONSISTENT" } else { "CONJECTURE-VIOLATED" };
    verdict(
        noiseless < NOISELESS_TOL && within(v, CONJECTURE_RATE),
        format!(
            "noiseless recovery error {noiseless:.2e} over n {:?}; conjecture slope {v:.3} ({flag}), sqrt(n)-bounded fraction {}/{} [Wilson 95% {:.3}, {:.3}]",
            hm.n_grid, f.successes, f.trials, f.lower, f.upper
        ),
    )
}

/// Small sizes for the re-run check; the statistics are irrelevant here.
fn determinism_grid(s: &Scenario) -> Vec<usize> {
    match &s.model {
        ModelSpec::HankelModes { .. } => vec![8, 16],
        ModelSpec::HankelConjecture { .. } => vec![16, 32],
        ModelSpec::WindowScan { .. } | ModelSpec::HX { .. } | ModelSpec::Quadratic { .. } => vec![60],
        _ => vec![40, 80],
    }
}

fn criterion_10() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    let all = registry();
    for s in &all {
        let first = tmp.path().join(format!("{}-a", s.name));
        let flags = Overrides {
            scenario: Some(s.name.clone()),
            n_grid: Some(determinism_grid(s)),
            trials: Some(2),
            out: Some(first.clone()),
            jobs: Some(1),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(None, flags, None).unwrap();
        execute(&cfg).unwrap();
        let manifest = ConfigFile::load(&first.join("manifest.toml")).unwrap();
        for jobs in [2, 4] {
            let again = tmp.path().join(format!("{}-{jobs}", s.name));
            let flags = Overrides { out: Some(again.clone()), jobs: Some(jobs), ..Default::default() };
            execute(&RunConfig::resolve(Some(manifest.clone()), flags, None).unwrap()).unwrap();
            for f in ["rates.csv", "spectrum.csv", "raster.csv"] {
                if std::fs::read(first.join(f)).unwrap() != std::fs::read(again.join(f)).unwrap() {
                    bad.push(format!("{}/{f} at jobs = {jobs}", s.name));
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} scenarios re-run from their manifests at jobs 2 and 4: all CSVs byte-identical", all.len())
        } else {
            format!("differences: {}", bad.join(", "))
        },
    )
}

fn main() -> ExitCode {
    spectral_lab_cli::pin_blas_threads();
    let criteria: [(usize, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&i) {
            continue;
        }
        let t = Instant::now();
        let v = f();
        println!("criterion {i:>2}: {} ({:.0} s) {}", if v.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), v.detail);
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
