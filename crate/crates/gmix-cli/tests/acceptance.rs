//! Acceptance suite: every release criterion, each as one test printing a
//! PASS line (visible with `--nocapture`). Tolerances are fixed here, not
//! tuned at run time.
//!
//! Run with:
//!   cargo test -p gmix-cli --test acceptance -- --nocapture

use gmix::{em, ks, FitConfig, MixtureModel, ReturnSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::process::{Command, Output};
use std::time::Instant;

/// The four-component reference model used for synthetic reproduction
/// (weights renormalize from their three-decimal rounding).
fn reference_model() -> MixtureModel {
    MixtureModel::from_triples(&[
        (0.152, -0.002, 0.018),
        (0.223, 0.001, 0.017),
        (0.287, 0.004, 0.014),
        (0.337, 0.001, 0.009),
    ])
    .unwrap()
}

fn sample_of(values: Vec<f64>) -> ReturnSample {
    ReturnSample::from_values(values, "acceptance").unwrap()
}

/// Random mixture with `k` components on daily-return scale.
fn random_model(rng: &mut ChaCha8Rng, k: usize) -> MixtureModel {
    let raw: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.random_range(0.1..1.0),
                rng.random_range(-0.02..0.02),
                rng.random_range(0.002..0.03),
            )
        })
        .collect();
    let total: f64 = raw.iter().map(|t| t.0).sum();
    let triples: Vec<(f64, f64, f64)> = raw.iter().map(|&(w, m, s)| (w / total, m, s)).collect();
    MixtureModel::from_triples(&triples).unwrap()
}

fn draw(rng: &mut ChaCha8Rng, model: &MixtureModel, n: usize) -> Vec<f64> {
    gmix::sample::draw_returns(model, n, rng)
}

#[test]
fn criterion_01_em_ascent_on_seeded_random_datasets() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);
    for round in 0..100u64 {
        let generator = random_model(&mut rng, 1 + (round as usize) % 3);
        let values = draw(&mut rng, &generator, 500);
        let sample = sample_of(values);
        let config = FitConfig {
            k: 1 + (round as usize) % 5,
            restarts: 2,
            max_iterations: 500,
            seed: round,
            ..FitConfig::default()
        };
        let result = em::fit(&sample, &config).expect("fit succeeds");
        for pair in result.loglik_trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-9,
                "round {round}: log-likelihood fell from {} to {}",
                pair[0],
                pair[1]
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {elapsed:?}, budget 30 s"
    );
    println!("ACCEPTANCE 1 (EM ascent, 100 seeded fits, {elapsed:?}): PASS");
}

#[test]
fn criterion_02_loglik_decomposition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE02);
    for round in 0..50 {
        let model = random_model(&mut rng, 1 + round % 4);
        let values = draw(&mut rng, &model, 300);
        let sample = sample_of(values);
        let resp = model.posterior(&sample);
        let terms = em::loglik_decomposition(&model, &resp, &sample);
        let loglik = model.log_likelihood(&sample);
        let relative = (terms.total() - loglik).abs() / loglik.abs();
        assert!(
            relative < 1e-8,
            "round {round}: |(T1+T2-T3) - lnL|/|lnL| = {relative}"
        );
    }
    println!("ACCEPTANCE 2 (three-term decomposition identity, 50 pairs): PASS");
}

#[test]
fn criterion_03_single_component_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE03);
    for round in 0..20 {
        let generator = random_model(&mut rng, 2);
        let values = draw(&mut rng, &generator, 400 + 50 * round);
        let sample = sample_of(values);
        let config = FitConfig {
            k: 1,
            restarts: 1,
            seed: round as u64,
            ..FitConfig::default()
        };
        let result = em::fit(&sample, &config).expect("fit succeeds");
        let c = &result.model.components()[0];
        let mean_err = (c.mean() - sample.mean()).abs() / sample.mean().abs().max(1e-30);
        let std_err = (c.std() - sample.std()).abs() / sample.std();
        assert!(
            mean_err < 1e-10,
            "round {round}: mean off by {mean_err} relative"
        );
        assert!(
            std_err < 1e-10,
            "round {round}: std off by {std_err} relative"
        );
    }
    println!("ACCEPTANCE 3 (k=1 closed form on 20 samples): PASS");
}

#[test]
fn criterion_04_synthetic_reproduction_at_report_scale() {
    let started = Instant::now();
    let generator = reference_model();
    let n = 20_000;
    let values = gmix::sample::sample_returns(&generator, n, 0xDA0);
    let sample = sample_of(values);

    let config = FitConfig {
        k: 4,
        restarts: 8,
        ..FitConfig::default()
    };
    let fitted = em::fit(&sample, &config).expect("fit succeeds");

    let generator_loglik = generator.log_likelihood(&sample);
    let fitted_loglik = fitted.final_log_likelihood();
    assert!(
        fitted_loglik >= generator_loglik - 1e-3 * n as f64,
        "fitted lnL {fitted_loglik} below generator lnL {generator_loglik} - {}",
        1e-3 * n as f64
    );

    let statistic = ks::ks_statistic(&fitted.model, &sample);
    assert!(statistic < 0.015, "KS statistic {statistic} >= 0.015");

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "took {elapsed:?}, budget 60 s"
    );
    println!(
        "ACCEPTANCE 4 (n=20000 reproduction: lnL {fitted_loglik:.1} vs generator \
         {generator_loglik:.1}, KS {statistic:.4}, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_05_mixture_beats_single_gaussian_on_heavy_tails() {
    let generator =
        MixtureModel::from_triples(&[(0.8, 0.0005, 0.005), (0.2, -0.002, 0.03)]).unwrap();
    let replicates = 100;
    let mut wins = 0;
    for replicate in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE05);
        rng.set_stream(replicate);
        let values = draw(&mut rng, &generator, 250);
        let sample = sample_of(values);

        let mixture_config = FitConfig {
            k: 4,
            restarts: 3,
            max_iterations: 500,
            seed: replicate,
            ..FitConfig::default()
        };
        let mixture = em::fit(&sample, &mixture_config).expect("mixture fit succeeds");
        let gaussian = em::fit(
            &sample,
            &FitConfig {
                k: 1,
                restarts: 1,
                ..mixture_config
            },
        )
        .expect("baseline fit succeeds");

        let d_mixture = ks::ks_statistic(&mixture.model, &sample);
        let d_gaussian = ks::ks_statistic(&gaussian.model, &sample);
        if d_mixture < d_gaussian {
            wins += 1;
        }
    }
    assert!(
        wins >= 95,
        "mixture beat the Gaussian in only {wins}/{replicates} replicates"
    );
    println!("ACCEPTANCE 5 (mixture < Gaussian KS in {wins}/{replicates} replicates): PASS");
}

#[test]
fn criterion_06_ks_statistic_matches_dense_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE06);
    for round in 0..50 {
        let model = random_model(&mut rng, 1 + round % 4);
        let n = rng.random_range(1..=200);
        let values = draw(&mut rng, &model, n);
        let sample = sample_of(values.clone());
        let statistic = ks::ks_statistic(&model, &sample);

        // Brute force: sup of |F - F_hat| over a dense grid plus both
        // one-sided limits at every sample point.
        let ecdf = ks::EmpiricalCdf::new(&sample);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 0.1;
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.1;
        let mut brute = 0.0f64;
        for i in 0..=20_000 {
            let x = lo + (hi - lo) * i as f64 / 20_000.0;
            brute = brute.max((model.cdf(x) - ecdf.eval(x)).abs());
        }
        for &x in &values {
            brute = brute.max((model.cdf(x) - ecdf.eval(x)).abs());
            let below = x.next_down();
            brute = brute.max((model.cdf(below) - ecdf.eval(below)).abs());
        }
        assert!(
            (statistic - brute).abs() < 1e-12,
            "round {round}: exact {statistic} vs brute {brute}"
        );
    }
    println!("ACCEPTANCE 6 (KS equals dense-grid sup-distance, 50 pairs): PASS");
}

#[test]
fn criterion_07_scaled_statistic_follows_the_kolmogorov_law() {
    let model = reference_model();
    let n = 500usize;
    let replicates = 500u64;
    let mut scaled: Vec<f64> = (0..replicates)
        .map(|replicate| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xACCE07);
            rng.set_stream(replicate);
            let values = draw(&mut rng, &model, n);
            let sample = sample_of(values);
            (n as f64).sqrt() * ks::ks_statistic(&model, &sample)
        })
        .collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Meta-KS of the scaled statistics against the asymptotic law
    // K(x) = 1 - Q(x).
    let m = scaled.len() as f64;
    let mut meta_d = 0.0f64;
    for (i, &x) in scaled.iter().enumerate() {
        let law = 1.0 - ks::kolmogorov_tail(x);
        meta_d = meta_d.max((law - (i + 1) as f64 / m).abs());
        meta_d = meta_d.max((law - i as f64 / m).abs());
    }
    let p = ks::ks_pvalue(meta_d, scaled.len()).unwrap();
    assert!(p > 0.001, "meta-KS p = {p} (D = {meta_d})");
    println!("ACCEPTANCE 7 (distribution-freeness: meta-KS p = {p:.4}): PASS");
}

#[test]
fn criterion_08_kolmogorov_series_reference_values() {
    // Reference values from an independent 50-digit summation of the
    // tail series.
    let cases = [
        (0.5, 0.963_945_243_664_875_1),
        (1.0, 0.269_999_671_677_354_5),
        (1.5, 0.022_217_962_616_525_13),
        (2.0, 0.000_670_925_255_779_695_3),
    ];
    for (lambda, expected) in cases {
        let got = ks::kolmogorov_tail(lambda);
        assert!(
            (got - expected).abs() < 1e-10,
            "Q({lambda}) = {got}, reference {expected}"
        );
    }
    println!("ACCEPTANCE 8 (Kolmogorov series at four reference points): PASS");
}

#[test]
fn criterion_09_posterior_rows_normalize_under_stress() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE09);
    for round in 0..50 {
        let model = random_model(&mut rng, 1 + round % 5);
        let max_std = model
            .components()
            .iter()
            .map(|c| c.std())
            .fold(0.0, f64::max);
        let mut values = draw(&mut rng, &model, 100);
        values.push(0.02 + 50.0 * max_std);
        values.push(-0.02 - 50.0 * max_std);
        let sample = sample_of(values);
        let resp = model.posterior(&sample);
        for (i, row) in resp.rows().enumerate() {
            let sum = gmix::kahan_sum(row.iter().copied());
            assert!(
                (sum - 1.0).abs() <= 1e-12,
                "round {round}, row {i}: sum = {sum}"
            );
        }
    }
    println!("ACCEPTANCE 9 (posterior row normalization, 50-sigma stress): PASS");
}

#[test]
fn criterion_10_end_to_end_pipeline_is_deterministic() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("reference.json");
    fs::write(&model_path, reference_model().to_json()).unwrap();

    let run = |tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
        let csv = dir.path().join(format!("prices_{tag}.csv"));
        let fitted = dir.path().join(format!("fitted_{tag}.json"));
        let synth = run_gmix(&[
            "synth",
            "--model",
            model_path.to_str().unwrap(),
            "--n",
            "2001",
            "--seed",
            "77",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(synth.status.code(), Some(0), "synth failed: {synth:?}");
        let fit = run_gmix(&[
            "fit",
            "--input",
            csv.to_str().unwrap(),
            "--name",
            "pipeline",
            "--components",
            "4",
            "--seed",
            "7",
            "--model-out",
            fitted.to_str().unwrap(),
        ]);
        assert_eq!(fit.status.code(), Some(0), "fit failed: {fit:?}");
        let gof = run_gmix(&[
            "gof",
            "--input",
            csv.to_str().unwrap(),
            "--model",
            fitted.to_str().unwrap(),
        ]);
        assert_eq!(gof.status.code(), Some(0), "gof failed: {gof:?}");
        (
            fs::read(&csv).unwrap(),
            fit.stdout,
            fs::read(&fitted).unwrap(),
            gof.stdout,
        )
    };

    let first = run("a");
    let second = run("b");
    assert_eq!(first.0, second.0, "synthetic CSVs differ");
    assert_eq!(first.1, second.1, "fit reports differ");
    assert_eq!(first.2, second.2, "model files differ");
    assert_eq!(first.3, second.3, "gof reports differ");

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "took {elapsed:?}, budget 60 s"
    );
    println!("ACCEPTANCE 10 (synth -> fit -> gof, deterministic bytes, {elapsed:?}): PASS");
}

fn run_gmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmix"))
        .args(args)
        .output()
        .expect("binary runs")
}
