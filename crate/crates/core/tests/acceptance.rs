//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use divfront::bounds::{beta_exact, deviation_probability, missing_mass_expectation, plug_in_error_bound, BoundMode};
use divfront::divergence::{
    f_divergence, frontier_curve, frontier_integral_closed, frontier_integral_quadrature, frontier_length, jeffreys,
    open_lambda_grid,
};
use divfront::family::{conjugate_value, generator_value, log_grid, verify_constants};
use divfront::harness::{loglog_slope, run_experiment, ExperimentConfig};
use divfront::quantize::{oracle_partition, quantized_divergence, Partition};
use divfront::synth::{step_pmf, zipf_pmf, DiscreteSampler, RngSpec};
use divfront::{DiscreteDistribution, EstimatorKind, GeneratorFamily, Histogram};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn random_pair(rng: &mut ChaCha8Rng, k: usize, zeros: bool) -> (DiscreteDistribution, DiscreteDistribution) {
    let draw = |rng: &mut ChaCha8Rng| {
        let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        if zeros {
            for x in w.iter_mut().skip(1) {
                if rng.random_bool(0.25) {
                    *x = 0.0;
                }
            }
        }
        DiscreteDistribution::from_weights(&w).unwrap()
    };
    let p = draw(rng);
    let q = draw(rng);
    (p, q)
}

fn finite_families() -> Vec<GeneratorFamily> {
    let mut out = vec![GeneratorFamily::Js, GeneratorFamily::FrontierIntegral, GeneratorFamily::LeCam];
    for l in [0.1, 0.5, 0.9] {
        out.push(GeneratorFamily::InterpolatedKl(l));
        out.push(GeneratorFamily::SkewJs(l));
        out.push(GeneratorFamily::InterpolatedChi2(l));
    }
    out
}

fn c1_closed_vs_quadrature() -> Outcome {
    let mut rng = RngSpec::new(1).rng();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=64);
        let (p, q) = random_pair(&mut rng, k, false);
        let d = (frontier_integral_closed(&p, &q).unwrap() - frontier_integral_quadrature(&p, &q, 128).unwrap()).abs();
        worst = worst.max(d);
    }
    (worst <= 1e-6, format!("max |closed - quadrature| = {worst:.3e}"))
}

/// `sum_a Q(a) f*(P(a) / Q(a))`, with `0 f*(p/0) = p f(0)`.
fn conjugate_divergence(fam: GeneratorFamily, p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    p.masses()
        .iter()
        .zip(q.masses())
        .map(
            |(&a, &b)| {
                if b > 0.0 {
                    b * conjugate_value(fam, a / b).unwrap()
                } else {
                    a * generator_value(fam, 0.0).unwrap()
                }
            },
        )
        .sum()
}

fn c2_identities() -> Outcome {
    let mut rng = RngSpec::new(2).rng();
    let (mut worst_fi, mut worst_conj) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let k = rng.random_range(2..=64);
        let (p, q) = random_pair(&mut rng, k, i % 2 == 1);
        let fi = GeneratorFamily::FrontierIntegral;
        worst_fi = worst_fi.max((frontier_integral_closed(&p, &q).unwrap() - f_divergence(fi, &p, &q).unwrap()).abs());
        for fam in finite_families() {
            let d = (conjugate_divergence(fam, &p, &q) - f_divergence(fam, &q, &p).unwrap()).abs();
            worst_conj = worst_conj.max(d);
            if let Some(conj) = fam.conjugate_family() {
                let d = (f_divergence(conj, &p, &q).unwrap() - f_divergence(fam, &q, &p).unwrap()).abs();
                worst_conj = worst_conj.max(d);
            }
        }
    }
    (worst_fi <= 1e-12 && worst_conj <= 1e-12, format!("FI vs D_f {worst_fi:.3e}, conjugacy {worst_conj:.3e}"))
}

fn c3_bounded_symmetric() -> Outcome {
    let mut rng = RngSpec::new(3).rng();
    let mut ok = true;
    for i in 0..1000 {
        let k = rng.random_range(1..=40);
        let (p, q) = random_pair(&mut rng, k, i % 2 == 0);
        let a = frontier_integral_closed(&p, &q).unwrap();
        ok &= (0.0..=1.0).contains(&a);
        ok &= a == frontier_integral_closed(&q, &p).unwrap();
        ok &= frontier_integral_closed(&p, &p).unwrap() == 0.0;
    }
    let disjoint = frontier_integral_closed(
        &DiscreteDistribution::point_mass(2, 0).unwrap(),
        &DiscreteDistribution::point_mass(2, 1).unwrap(),
    )
    .unwrap();
    ok &= disjoint == 1.0;
    (ok, format!("1000 random pairs, disjoint supports give {disjoint}"))
}

fn c4_missing_mass() -> Outcome {
    let (k, n, trials) = (100, 500, 10_000);
    let p = zipf_pmf(k, 1.0).unwrap();
    let sampler = DiscreteSampler::new(&p);
    let rng = RngSpec::new(4);
    let masses: Vec<f64> = (0..trials)
        .map(|t| {
            let mut r = rng.substream(&[t]);
            let mut seen = vec![false; k];
            for _ in 0..n {
                seen[sampler.sample(&mut r)] = true;
            }
            p.masses().iter().zip(&seen).filter(|(_, s)| !**s).map(|(m, _)| m).sum::<f64>()
        })
        .collect();
    let (mean, se) = divfront::harness::mean_stderr(&masses);
    let expect = missing_mass_expectation(&p, n as u64).unwrap();
    let beta = beta_exact(&p, n as u64).unwrap();
    let (kf, nf) = (k as f64, n as f64);
    let ok = (mean - expect).abs() <= 4.0 * se && beta <= kf * nf.ln() / nf && expect <= kf / nf;
    (ok, format!("MC {mean:.5} +/- {se:.1e} vs exact {expect:.5}; beta {beta:.4} <= {:.4}", kf * nf.ln() / nf))
}

fn c5_constant_audit() -> Outcome {
    let grid = log_grid(1e-6, 1e3, 400);
    let mut failed = Vec::new();
    let mut fams = vec![GeneratorFamily::FrontierIntegral, GeneratorFamily::LeCam];
    for l in [0.1, 0.5, 0.9] {
        fams.extend([
            GeneratorFamily::InterpolatedKl(l),
            GeneratorFamily::SkewJs(l),
            GeneratorFamily::InterpolatedChi2(l),
        ]);
    }
    for fam in &fams {
        let audit = verify_constants(*fam, &grid).unwrap();
        if !audit.is_applicable() || !audit.passed() {
            failed.push(fam.to_string());
        }
    }
    (failed.is_empty(), format!("{} families audited, failures: {failed:?}", fams.len()))
}

fn c6_c7_rate_and_dominance() -> (Outcome, Outcome) {
    let config = ExperimentConfig::from_json(
        r#"{"experiment":"stat_error","p_spec":"zipf:2","q_spec":"zipf:2",
            "sweep":{"name":"n","log_range":[1000,10000,8]},"fixed":{"k":1000},
            "trials":100,"base_seed":6}"#,
    )
    .unwrap();
    let report = run_experiment(&config, None).unwrap();
    let rows = report.series("empirical", "fi_abs_error");
    let ns: Vec<f64> = rows.iter().map(|r| r.sweep_value).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let free: Vec<f64> = rows.iter().map(|r| r.free_bound.unwrap()).collect();
    let s_mc = loglog_slope(&ns, &means).unwrap();
    let s_free = loglog_slope(&ns, &free).unwrap();
    let c6 = (
        (-0.8..=-0.3).contains(&s_mc) && (s_mc - s_free).abs() <= 0.3,
        format!("slope MC {s_mc:.3}, slope free bound {s_free:.3}"),
    );

    let fi = GeneratorFamily::FrontierIntegral;
    let p = zipf_pmf(1000, 2.0).unwrap();
    let mut ok = true;
    let mut tightest = f64::INFINITY;
    for r in &rows {
        let n = r.sweep_value as u64;
        let oracle = plug_in_error_bound(fi, &p, &p, n, n, BoundMode::Oracle).unwrap();
        let free = plug_in_error_bound(fi, &p, &p, n, n, BoundMode::Free).unwrap();
        ok &= r.mean <= oracle + 3.0 * r.stderr && oracle <= free;
        tightest = tightest.min(oracle / r.mean);
    }
    let c7 = (ok, format!("oracle bound / MC mean >= {tightest:.2} at every n; oracle <= free"));
    (c6, c7)
}

fn c8_smoothing() -> Outcome {
    let config = ExperimentConfig::from_json(
        r#"{"experiment":"smoothing","p_spec":"zipf:0","q_spec":"dir:0.5",
            "sweep":{"name":"n","values":[1000]},"fixed":{"k":1000},"trials":100,"base_seed":8}"#,
    )
    .unwrap();
    let report = run_experiment(&config, None).unwrap();
    let mean = |e: &str| report.series(e, "fi_abs_error")[0].mean;
    let (kt, emp) = (mean("kt"), mean("empirical"));

    let p = zipf_pmf(1000, 0.0).unwrap();
    let mut r = RngSpec::new(8).rng();
    let s = DiscreteSampler::new(&p);
    let h = Histogram::from_sample(&(0..1000).map(|_| s.sample(&mut r)).collect::<Vec<_>>(), 1000).unwrap();
    let positive = EstimatorKind::STANDARD
        .iter()
        .filter(|e| **e != EstimatorKind::Empirical)
        .all(|e| e.estimate(&h).unwrap().masses().iter().all(|m| *m > 0.0));
    let zeros = h.counts().iter().filter(|c| **c == 0).count();
    (
        kt <= emp && positive,
        format!("KT {kt:.5} vs empirical {emp:.5}; smoothed masses positive with {zeros} unseen atoms: {positive}"),
    )
}

fn c9_quantization() -> Outcome {
    let fi = GeneratorFamily::FrontierIntegral;
    let p = zipf_pmf(600, 1.0).unwrap();
    let q = step_pmf(600).unwrap();
    let truth = frontier_integral_closed(&p, &q).unwrap();
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for bins in (2..=64).step_by(2) {
        let s = oracle_partition(fi, &p, &q, bins).unwrap();
        let err = (truth - quantized_divergence(fi, &p, &q, &s).unwrap()).abs();
        let bound = 1.0 / (bins / 2) as f64;
        ok &= err <= bound;
        worst_ratio = worst_ratio.max(err / bound);
    }
    let mut rng = RngSpec::new(9).rng();
    let mut dpi_violation = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=64);
        let labels: Vec<usize> = (0..600).map(|_| rng.random_range(0..m)).collect();
        let s = Partition::from_labels(&labels).unwrap();
        for fam in finite_families() {
            let d = quantized_divergence(fam, &p, &q, &s).unwrap() - f_divergence(fam, &p, &q).unwrap();
            dpi_violation = dpi_violation.max(d);
        }
    }
    ok &= dpi_violation <= 1e-12;
    (ok, format!("max error/bound {worst_ratio:.3}; max DPI excess {dpi_violation:.2e}"))
}

fn c10_k_rule() -> Outcome {
    let mut summary = Vec::new();
    let mut ok = true;
    for n in [1000, 10_000] {
        let config = ExperimentConfig::from_json(&format!(
            r#"{{"experiment":"continuous_k_rule","p_spec":"gauss:0,0,1","q_spec":"gauss:1,0,1",
                "sweep":{{"name":"r","values":[2,3,4,5]}},"fixed":{{"n":{n}}},"trials":20,"base_seed":10}}"#
        ))
        .unwrap();
        let report = run_experiment(&config, None).unwrap();
        let cells: Vec<String> = report.rows.iter().map(|r| format!("r={} {:.4}", r.sweep_value, r.mean)).collect();
        summary.push(format!("n={n}: {}", cells.join(", ")));
        if n == 10_000 {
            let (r2, r3) = (&report.rows[0], &report.rows[1]);
            ok &= r3.mean <= r2.mean + r2.stderr;
        }
    }
    (ok, summary.join("; "))
}

fn c11_deviation_coverage() -> Outcome {
    let (k, n, trials) = (50, 2000, 1000u64);
    let u = DiscreteDistribution::uniform(k).unwrap();
    let s = DiscreteSampler::new(&u);
    let rng = RngSpec::new(11);
    let values: Vec<f64> = (0..trials)
        .map(|t| {
            let mut r = rng.substream(&[t]);
            let mut draw = || {
                let xs: Vec<usize> = (0..n).map(|_| s.sample(&mut r)).collect();
                EstimatorKind::Empirical.estimate(&Histogram::from_sample(&xs, k).unwrap()).unwrap()
            };
            let (a, b) = (draw(), draw());
            frontier_integral_closed(&a, &b).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let mut ok = true;
    let mut cells = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        let freq = values.iter().filter(|v| (*v - mean).abs() > eps).count() as f64 / trials as f64;
        let bound = deviation_probability(GeneratorFamily::FrontierIntegral, n as u64, n as u64, eps).unwrap();
        ok &= freq <= bound;
        cells.push(format!("eps={eps}: {freq} <= {bound:.3}"));
    }
    (ok, cells.join(", "))
}

fn c12_frontier() -> Outcome {
    let mut rng = RngSpec::new(12).rng();
    let grid = open_lambda_grid(99);
    let mut monotone = true;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let k = rng.random_range(2..=64);
        let (p, q) = random_pair(&mut rng, k, i % 2 == 1);
        let curve = frontier_curve(&p, &q, &grid).unwrap();
        monotone &= curve.windows(2).all(|w| w[1].x <= w[0].x + 1e-12 && w[1].y >= w[0].y - 1e-12);
        let (p, q) = random_pair(&mut rng, k, false);
        let ratio = frontier_length(&p, &q, 10_000).unwrap() / (jeffreys(&p, &q).unwrap() / 2f64.sqrt());
        worst = worst.min(ratio);
    }
    (monotone && worst >= 0.99, format!("monotone {monotone}; min length / (J/sqrt 2) = {worst:.4}"))
}

fn c13_determinism() -> Outcome {
    let configs = [
        r#"{"experiment":"smoothing","p_spec":"zipf:1","q_spec":"dir:0.5","sweep":{"name":"n","values":[200,400]},
            "fixed":{"k":100},"trials":40,"base_seed":13,"metrics":["fi_abs_error","frontier_sup_error"]}"#,
        r#"{"experiment":"quantizer","p_spec":"zipf:1","q_spec":"step","sweep":{"name":"bins","values":[2,8,32]},
            "fixed":{"k":200},"base_seed":13}"#,
        r#"{"experiment":"continuous_k_rule","p_spec":"gauss:0,0,1","q_spec":"t:3,1,0,1",
            "sweep":{"name":"r","values":[2,3]},"fixed":{"n":300},"trials":8,"base_seed":13}"#,
    ];
    let mut ok = true;
    for text in configs {
        let config = ExperimentConfig::from_json(text).unwrap();
        let outputs: Vec<(String, String)> = [Some(1), Some(8), Some(1), Some(8)]
            .into_iter()
            .map(|t| {
                let r = run_experiment(&config, t).unwrap();
                (r.to_csv(), r.to_json())
            })
            .collect();
        ok &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    (ok, format!("{} experiments, 2 runs each at 1 and 8 threads", configs.len()))
}

fn main() {
    let mut all = true;
    let mut report = |id: &str, name: &str, started: Instant, (ok, detail): Outcome| {
        all &= ok;
        println!(
            "criterion {id:>2} {name:<32} {} ({detail}; {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    };
    let t = Instant::now();
    report("1", "closed form vs quadrature", t, c1_closed_vs_quadrature());
    let t = Instant::now();
    report("2", "f-divergence identities", t, c2_identities());
    let t = Instant::now();
    report("3", "boundedness and symmetry", t, c3_bounded_symmetric());
    let t = Instant::now();
    report("4", "missing mass", t, c4_missing_mass());
    let t = Instant::now();
    report("5", "regularity constant audit", t, c5_constant_audit());
    let t = Instant::now();
    let (c6, c7) = c6_c7_rate_and_dominance();
    report("6", "convergence rate", t, c6);
    report("7", "bound dominance", t, c7);
    let t = Instant::now();
    report("8", "smoothing improvement", t, c8_smoothing());
    let t = Instant::now();
    report("9", "quantization guarantee", t, c9_quantization());
    let t = Instant::now();
    report("10", "k = n^(1/3) rule", t, c10_k_rule());
    let t = Instant::now();
    report("11", "deviation coverage", t, c11_deviation_coverage());
    let t = Instant::now();
    report("12", "frontier properties", t, c12_frontier());
    let t = Instant::now();
    report("13", "determinism", t, c13_determinism());
    if !all {
        std::process::exit(1);
    }
}
