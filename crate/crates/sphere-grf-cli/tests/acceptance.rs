//! Acceptance gate: eleven numbered end-to-end checks covering the special
//! functions, the closed-form small-angle constants, both covariance
//! summation routes, the samplers, the regularity toolbox, and the binary's
//! determinism. Each check states its tolerance and, where one applies, its
//! wall-clock budget; a process-wide lock serializes the tests so budgets
//! are measured on an otherwise idle core. Run with `--nocapture` to see
//! one PASS line with measured values per criterion.

use std::path::PathBuf;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use sphere_grf::analysis::{
    dudley_classify, hilbert_ratio, jacobi_difference_check, malyarenko_constant,
    malyarenko_ratio, moment_bound_check, regularity_report, DudleyClass,
};
use sphere_grf::covariance::{bp_cov, incremental_variance_detailed, schoenberg_cov, SumMethod};
use sphere_grf::io;
use sphere_grf::sampler::{
    sample_kl_sphere, sample_spacetime, stream_rng, verify_literal_expansion, FieldSample,
    RngSpec,
};
use sphere_grf::specfun::{
    gauss_gegenbauer, gegenbauer_w_sequence, omega, sph_harm_index, sph_harm_table,
    GegenbauerIndex, JacobiPair, SpherePoint,
};
use sphere_grf::spectrum::{AngularPowerSpectrum, TailDescriptor};

const HALF: GegenbauerIndex = GegenbauerIndex::Finite(0.5);

static GATE: Mutex<()> = Mutex::new(());

fn locked() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn model_path(name: &str) -> PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn corpus_model(name: &str) -> AngularPowerSpectrum {
    io::read_model(&model_path(name)).unwrap().spectrum().unwrap()
}

fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(model_path(""))
        .expect("model corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8, "corpus should hold eight models");
    names
}

fn equator(h: f64) -> SpherePoint {
    SpherePoint::new(vec![h.cos(), h.sin(), 0.0]).unwrap()
}

fn empirical_cov(sample: &FieldSample, i: usize, j: usize) -> f64 {
    let r = sample.replicates;
    (0..r).map(|k| sample.value(k, i) * sample.value(k, j)).sum::<f64>() / r as f64
}

/// Standard error of the product-moment covariance estimate.
fn cov_se(cii: f64, cjj: f64, cij: f64, replicates: usize) -> f64 {
    ((cii * cjj + cij * cij) / replicates as f64).sqrt()
}

fn within_budget(t0: Instant, secs: u64, label: &str) -> Duration {
    let el = t0.elapsed();
    assert!(
        el < Duration::from_secs(secs),
        "{label}: runtime {el:?} exceeds the {secs} s budget"
    );
    el
}

/// 1. Harmonic sums over m reproduce the zonal kernel (2ℓ+1)/(4π)·W_ℓ^{1/2}
///    for ℓ ≤ 32 at 100 random point pairs, to 1e−10. Budget 5 s.
#[test]
fn criterion_01_addition_theorem() {
    let _g = locked();
    let t0 = Instant::now();
    let l_max = 32u64;
    let mut g = stream_rng(&RngSpec::new(424_242, 0), 0, 0);
    let mut max_res = 0.0f64;
    let mut cases = 0usize;
    for _ in 0..100 {
        let mut draw = || {
            let coords: Vec<f64> = (0..3).map(|_| g.sample(StandardNormal)).collect();
            SpherePoint::normalized(coords).unwrap()
        };
        let (x, y) = (draw(), draw());
        let to_angles = |p: &SpherePoint| {
            let c = p.coords();
            (c[2].clamp(-1.0, 1.0).acos(), c[1].atan2(c[0]))
        };
        let (tx, px) = to_angles(&x);
        let (ty, py) = to_angles(&y);
        let table_x = sph_harm_table(l_max, tx, px).unwrap();
        let table_y = sph_harm_table(l_max, ty, py).unwrap();
        let w = gegenbauer_w_sequence(HALF, x.cos_angle(&y).unwrap(), l_max as usize).unwrap();
        for ell in 0..=l_max {
            let mut sum = 0.0;
            for m in -(ell as i64)..=(ell as i64) {
                let i = sph_harm_index(ell, m);
                sum += table_x[i] * table_y[i];
            }
            let expected =
                (2.0 * ell as f64 + 1.0) / (4.0 * std::f64::consts::PI) * w[ell as usize];
            max_res = max_res.max((sum - expected).abs());
            cases += 1;
        }
    }
    assert!(max_res <= 1e-10, "max residual {max_res:e}");
    let el = within_budget(t0, 5, "criterion 1");
    println!("PASS criterion 1: addition-theorem residual {max_res:.2e} ≤ 1e-10 over {cases} cases ({el:.2?})");
}

/// 2. 128-node quadrature reproduces δ_{mn}/ω_n^λ for m, n ≤ 20 and
///    λ ∈ {0.5, 1, 1.5, 3}, relative error ≤ 1e−8. Budget 5 s.
#[test]
fn criterion_02_orthogonality() {
    let _g = locked();
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.0, 1.5, 3.0] {
        let idx = GegenbauerIndex::Finite(lambda);
        let rule = gauss_gegenbauer(128, idx).unwrap();
        for m in 0u64..=20 {
            for n in m..=20 {
                let got = rule.integrate(|x| {
                    let w = gegenbauer_w_sequence(idx, x, n as usize).unwrap();
                    w[m as usize] * w[n as usize]
                });
                let expected = if m == n { 1.0 / omega(n, idx).unwrap() } else { 0.0 };
                let rel = (got - expected).abs() * omega(m, idx).unwrap();
                worst = worst.max(rel);
                assert!(rel <= 1e-8, "λ = {lambda}, (m, n) = ({m}, {n}): rel {rel:e}");
            }
        }
    }
    let el = within_budget(t0, 5, "criterion 2");
    println!("PASS criterion 2: orthogonality relative error {worst:.2e} ≤ 1e-8 ({el:.2?})");
}

/// 3. Tauberian small-angle constant for A_n = 1/n at λ = 1/2: the certified
///    series over the asymptote K·v lands within 5% of 1 at v = 1e−3 and the
///    ratios approach 1 along v ∈ {1e−1, 1e−2, 1e−3}. The constant evaluates
///    to K(1/2, 1) = 1 in closed form. Budget 60 s.
#[test]
fn criterion_03_malyarenko_constant() {
    let _g = locked();
    let t0 = Instant::now();
    let k = malyarenko_constant(HALF, 1.0).unwrap();
    assert!((k - 1.0).abs() <= 1e-12, "K(1/2, 1) = {k}");
    let spec = corpus_model("an_inv_n.json");
    let grid = [1e-1, 1e-2, 1e-3];
    let rs = malyarenko_ratio(&spec, &grid).unwrap();
    for w in rs.ratios.windows(2) {
        assert!(
            (w[1] - 1.0).abs() < (w[0] - 1.0).abs(),
            "ratios should approach 1: {:?}",
            rs.ratios
        );
    }
    let last = rs.ratios[2];
    assert!((0.95..=1.05).contains(&last), "ratio at v = 1e-3: {last}");
    let el = within_budget(t0, 60, "criterion 3");
    println!(
        "PASS criterion 3: K = {k}, I/(K·v) ratios {:.5?} → {last:.5} ∈ [0.95, 1.05] ({el:.2?})",
        rs.ratios
    );
}

/// 4. Power-series small-angle constant for A_n = n^{−1/2} on the
///    infinite-index sphere: (1 − Σ a_n cosⁿ v)/(√(π/2)·v) lands within 5%
///    of 1 at v = 1e−2. Budget 60 s.
#[test]
fn criterion_04_hilbert_asymptote() {
    let _g = locked();
    let t0 = Instant::now();
    let spec = AngularPowerSpectrum::from_tail_shape(
        GegenbauerIndex::Infinite,
        1.0,
        4,
        TailDescriptor::Power { gamma: 0.5, k: 0.0 },
    )
    .unwrap();
    let rs = hilbert_ratio(&spec, &[1e-1, 1e-2]).unwrap();
    for w in rs.ratios.windows(2) {
        assert!(
            (w[1] - 1.0).abs() < (w[0] - 1.0).abs(),
            "ratios should approach 1: {:?}",
            rs.ratios
        );
    }
    let at_v = rs.ratios[1];
    assert!((0.95..=1.05).contains(&at_v), "ratio at v = 1e-2: {at_v}");
    let el = within_budget(t0, 60, "criterion 4");
    println!("PASS criterion 4: power-series ratio {at_v:.5} ∈ [0.95, 1.05] at v = 1e-2 ({el:.2?})");
}

/// 5. The one-step difference identity holds to 1e−10 for n ≤ 50 across the
///    parameter/angle grid, and the star and direct summation routes agree
///    within their combined certified bounds on corpus spectra.
#[test]
fn criterion_05_difference_identity_and_route_agreement() {
    let _g = locked();
    let t0 = Instant::now();
    let mut max_res = 0.0f64;
    let mut cases = 0usize;
    for (a, b) in [(0.0, 0.0), (0.5, 0.5), (1.5, 0.5)] {
        let jp = JacobiPair::new(a, b).unwrap();
        for theta in [0.1, 0.7, 2.5] {
            for n in 0..=50u64 {
                let r = jacobi_difference_check(n, jp, theta).unwrap();
                max_res = max_res.max(r);
                cases += 1;
            }
        }
    }
    assert!(max_res <= 1e-10, "max identity residual {max_res:e}");

    let mut max_gap = 0.0f64;
    for name in ["an_inv_n.json", "powerlaw_gamma15.json", "geometric_r05.json"] {
        let spec = corpus_model(name);
        let tol = (spec.tail_scale() * spec.tail().shape(20_000_000)).max(1e-6);
        for v in [1e-3, 0.1, 0.7] {
            let d = incremental_variance_detailed(&spec, v, tol, SumMethod::Direct).unwrap();
            let s = incremental_variance_detailed(&spec, v, tol, SumMethod::Star).unwrap();
            let slack = 3.0 * (d.bound + s.bound) + 1e-12;
            let gap = (d.value - s.value).abs();
            max_gap = max_gap.max(gap);
            assert!(gap <= slack, "{name}, v = {v}: gap {gap:e} > slack {slack:e}");
        }
    }
    let el = t0.elapsed();
    println!(
        "PASS criterion 5: identity residual {max_res:.2e} ≤ 1e-10 over {cases} cases; \
         route gap ≤ {max_gap:.2e} within certified slack ({el:.2?})"
    );
}

/// 6. Monte Carlo covariance matches the series evaluations: a 20-degree
///    spectrum on S² at 10 angle lags, and the spatio-temporal sampler
///    against the mixture covariance at 10 space-time pairs, each within
///    3 standard errors at 2·10⁴ replicates. Budget 2 min.
#[test]
fn criterion_06_sampler_covariance() {
    let _g = locked();
    let t0 = Instant::now();
    let r = 20_000usize;

    let head: Vec<f64> = (0..=20).map(|l| 1.0 / ((1 + l) as f64).powi(2)).collect();
    let spec = AngularPowerSpectrum::finite(HALF, 1.0, head)
        .unwrap()
        .normalize()
        .unwrap();
    let points: Vec<SpherePoint> = (0..11).map(|k| equator(0.15 * k as f64)).collect();
    let sample = sample_kl_sphere(&spec, 24, &points, r, RngSpec::new(60, 0)).unwrap();
    let mut worst_z_space = 0.0f64;
    for k in 1..=10usize {
        let angle = 0.15 * k as f64;
        let expect = schoenberg_cov(&spec, angle.cos(), 1e-12).unwrap();
        let emp = empirical_cov(&sample, 0, k);
        let se = cov_se(1.0, 1.0, expect, r);
        let z = (emp - expect).abs() / se;
        worst_z_space = worst_z_space.max(z);
        assert!(z <= 3.0, "lag {k}: empirical {emp} vs {expect} (z = {z:.2})");
    }

    let model = io::read_model(&model_path("spacetime_gauss.json"))
        .unwrap()
        .spacetime()
        .unwrap();
    let st_points: Vec<SpherePoint> = (0..4).map(|k| equator(0.4 * k as f64)).collect();
    let times = [0.0, 0.6, 1.2];
    let st = sample_spacetime(&model, 24, &st_points, &times, r, RngSpec::new(61, 0)).unwrap();
    let var0 = bp_cov(&model, 1.0, 0.0, 1e-12).unwrap();
    let pairs: [((usize, usize), (usize, usize)); 10] = [
        ((0, 0), (0, 1)),
        ((0, 0), (0, 2)),
        ((0, 0), (1, 0)),
        ((0, 0), (1, 1)),
        ((0, 0), (2, 0)),
        ((0, 0), (2, 2)),
        ((1, 1), (2, 1)),
        ((1, 0), (3, 2)),
        ((0, 1), (3, 0)),
        ((2, 0), (3, 1)),
    ];
    let mut worst_z_st = 0.0f64;
    for ((p, s), (q, u)) in pairs {
        let cosang = st_points[p].cos_angle(&st_points[q]).unwrap();
        let dt = times[u] - times[s];
        let expect = bp_cov(&model, cosang, dt, 1e-12).unwrap();
        let emp = (0..r)
            .map(|i| st.value_at(i, p, s) * st.value_at(i, q, u))
            .sum::<f64>()
            / r as f64;
        let se = cov_se(var0, var0, expect, r);
        let z = (emp - expect).abs() / se;
        worst_z_st = worst_z_st.max(z);
        assert!(
            z <= 3.0,
            "pair ({p},{s})–({q},{u}): empirical {emp} vs {expect} (z = {z:.2})"
        );
    }
    let el = within_budget(t0, 120, "criterion 6");
    println!(
        "PASS criterion 6: sampler covariance within 3 SE at 10 angle lags \
         (max z = {worst_z_space:.2}) and 10 space-time pairs (max z = {worst_z_st:.2}) ({el:.2?})"
    );
}

/// 7. The literal product-form expansion matches the sampled second moment:
///    |z| ≤ 3 at five space-time pairs. Budget 2 min.
#[test]
fn criterion_07_literal_expansion() {
    let _g = locked();
    let t0 = Instant::now();
    let model = io::read_model(&model_path("spacetime_gauss.json"))
        .unwrap()
        .spacetime()
        .unwrap();
    let p0 = equator(0.0);
    let p1 = equator(0.9);
    let p2 = equator(1.7);
    let cases = [
        (&p0, &p1, 0.0, 0.0),
        (&p0, &p1, 0.0, 0.7),
        (&p0, &p2, 0.3, 1.0),
        (&p1, &p2, 0.0, 1.4),
        (&p0, &p0, 0.0, 0.8),
    ];
    let mut worst = 0.0f64;
    for (i, (x, y, s, t)) in cases.into_iter().enumerate() {
        let rep =
            verify_literal_expansion(&model, x, y, s, t, 24, 60_000, RngSpec::new(70 + i as u64, 0))
                .unwrap();
        worst = worst.max(rep.z_score.abs());
        assert!(
            rep.z_score.abs() <= 3.0,
            "case {i}: empirical {} vs formula {} (z = {:.2})",
            rep.empirical_cov,
            rep.formula_value,
            rep.z_score
        );
    }
    let el = within_budget(t0, 120, "criterion 7");
    println!("PASS criterion 7: product-form expansion max |z| = {worst:.2} ≤ 3 at 5 pairs ({el:.2?})");
}

/// 8. Continuity classification: a power tail with γ = 0.5 and a log-only
///    tail with k = 3 give continuous paths, a log-only tail with k = 1 does
///    not, and the analytic and dyadic-numeric verdicts agree corpus-wide.
#[test]
fn criterion_08_continuity_classification() {
    let _g = locked();
    let t0 = Instant::now();
    let power = AngularPowerSpectrum::from_tail_shape(
        HALF,
        1.0,
        4,
        TailDescriptor::Power { gamma: 0.5, k: 0.0 },
    )
    .unwrap();
    assert_eq!(dudley_classify(&power).unwrap().class, DudleyClass::Continuous);

    let log3 =
        AngularPowerSpectrum::from_tail_shape(HALF, 1.0, 4, TailDescriptor::LogOnly { k: 3.0 })
            .unwrap()
            .normalize()
            .unwrap();
    assert_eq!(dudley_classify(&log3).unwrap().class, DudleyClass::Continuous);

    let log1 =
        AngularPowerSpectrum::from_tail_shape(HALF, 1.0, 4, TailDescriptor::LogOnly { k: 1.0 })
            .unwrap()
            .normalize()
            .unwrap();
    assert_eq!(dudley_classify(&log1).unwrap().class, DudleyClass::Discontinuous);

    for name in corpus_names() {
        let spec = corpus_model(&name);
        let rep = dudley_classify(&spec).unwrap();
        assert!(rep.agreement, "{name}: analytic and dyadic views disagree");
    }
    let el = t0.elapsed();
    println!(
        "PASS criterion 8: POWER(0.5) and LOG_ONLY(k=3) continuous, LOG_ONLY(k=1) \
         discontinuous, analytic/numeric agreement on all 8 corpus models ({el:.2?})"
    );
}

/// 9. The spectral multiplier composes as a semigroup — σ = 0.3 then 0.7
///    equals σ = 1.0 coefficient-wise to 1e−12 — and σ = 0.25 on A_n = 1/n
///    shifts the fitted variogram exponent by about −2σ (±0.15).
#[test]
fn criterion_09_fractional_semigroup() {
    let _g = locked();
    let t0 = Instant::now();
    // Composition stays inside the descriptor family only when the tail is
    // finitely supported, so the exactness check runs on the finite model.
    let base = corpus_model("finite_head.json");
    let composed = base
        .fractional_transform(0.3, true)
        .unwrap()
        .fractional_transform(0.7, true)
        .unwrap();
    let direct = base.fractional_transform(1.0, true).unwrap();
    let mut worst = 0.0f64;
    for n in 0..8u64 {
        let (a, b) = (composed.coeff(n), direct.coeff(n));
        let rel = (a - b).abs() / b.max(1e-300);
        worst = worst.max(rel);
        assert!(rel <= 1e-12, "n = {n}: {a} vs {b}");
    }

    let spec = corpus_model("an_inv_n.json");
    let base_rep = regularity_report(&spec, 128, 2000, 10, RngSpec::new(90, 0)).unwrap();
    let rough = spec.fractional_transform(0.25, true).unwrap();
    let rough_rep = regularity_report(&rough, 128, 2000, 10, RngSpec::new(91, 0)).unwrap();
    let (gb, gr) = (base_rep.gamma_hat.unwrap(), rough_rep.gamma_hat.unwrap());
    let shift = gr - gb;
    assert!(
        (shift + 0.5).abs() <= 0.15,
        "fitted exponents {gb:.4} → {gr:.4}, shift {shift:.4} not near −0.5"
    );
    let el = t0.elapsed();
    println!(
        "PASS criterion 9: semigroup composition exact to {worst:.2e} ≤ 1e-12; \
         fitted exponent {gb:.4} → {gr:.4} (shift {shift:.4} ≈ −0.5 ± 0.15) ({el:.2?})"
    );
}

/// 10. Empirical regularity for A_n = 1/n: the fitted variogram exponent
///     lands in [0.85, 1.15] at 10⁴ replicates, and the 4th-moment identity
///     holds to within 10% at three angle pairs. Budget 3 min.
#[test]
fn criterion_10_variogram_and_moments() {
    let _g = locked();
    let t0 = Instant::now();
    let spec = corpus_model("an_inv_n.json");
    let rep = regularity_report(&spec, 128, 10_000, 10, RngSpec::new(100, 0)).unwrap();
    let gh = rep.gamma_hat.unwrap();
    assert!((0.85..=1.15).contains(&gh), "fitted exponent {gh}");
    assert!((rep.holder_bound - 0.5).abs() <= 1e-12, "analytic bound {}", rep.holder_bound);

    let pairs: Vec<(SpherePoint, SpherePoint)> =
        [0.3, 0.7, 1.2].iter().map(|&h| (equator(0.0), equator(h))).collect();
    // The distance bound needs Σ a_m m^γ < ∞, which for A_n = 1/n holds
    // exactly when the weight exponent stays below 1.
    let mr = moment_bound_check(&spec, 2, 0.5, &pairs, 30_000, RngSpec::new(101, 0)).unwrap();
    let mut ratios = Vec::new();
    for pc in &mr.pairs {
        let ratio = pc.empirical / pc.predicted;
        ratios.push(ratio);
        assert!(
            (0.9..=1.1).contains(&ratio),
            "angle {:.2}: 4th-moment ratio {ratio}",
            pc.angle
        );
    }
    let el = within_budget(t0, 180, "criterion 10");
    println!(
        "PASS criterion 10: fitted exponent {gh:.4} ∈ [0.85, 1.15]; 4th-moment \
         ratios {ratios:.3?} ∈ [0.9, 1.1] ({el:.2?})"
    );
}

/// 11. Every stochastic command reproduces byte-identical output files and
///     metadata under a fixed seed across two runs.
#[test]
fn criterion_11_determinism() {
    let _g = locked();
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], out: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_sphere-grf"))
            .args(args)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "{args:?} failed");
        std::fs::read(out).unwrap()
    };
    let an = model_path("an_inv_n.json");
    let st = model_path("spacetime_gauss.json");
    let an = an.to_str().unwrap();
    let st = st.to_str().unwrap();
    let jobs: [(&str, Vec<&str>); 3] = [
        (
            "simulate",
            vec![
                "simulate", "--model", an, "--points", "greatcircle:8", "--replicates", "50",
                "--seed", "42",
            ],
        ),
        (
            "simulate-spacetime",
            vec![
                "simulate-spacetime", "--model", st, "--points", "greatcircle:4", "--times",
                "0:0.5:3", "--replicates", "20", "--seed", "9",
            ],
        ),
        (
            "holder",
            vec![
                "holder", "--model", an, "--points", "greatcircle:32", "--replicates", "1000",
                "--seed", "3",
            ],
        ),
    ];
    for (name, args) in &jobs {
        let out_a = dir.path().join(format!("{name}-a.out"));
        let out_b = dir.path().join(format!("{name}-b.out"));
        let bytes_a = run(args, &out_a);
        let bytes_b = run(args, &out_b);
        assert!(!bytes_a.is_empty(), "{name}: empty output");
        assert_eq!(bytes_a, bytes_b, "{name}: outputs differ between runs");
        // Simulation commands also write a metadata sidecar; it must agree too.
        let side_a = PathBuf::from(format!("{}.meta.json", out_a.display()));
        if side_a.exists() {
            let side_b = PathBuf::from(format!("{}.meta.json", out_b.display()));
            assert_eq!(
                std::fs::read(&side_a).unwrap(),
                std::fs::read(&side_b).unwrap(),
                "{name}: sidecars differ between runs"
            );
        }
    }
    let el = t0.elapsed();
    println!("PASS criterion 11: simulate, simulate-spacetime, and holder are byte-identical across seeded reruns ({el:.2?})");
}
