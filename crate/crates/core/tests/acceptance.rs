//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use riforest::eval::ImprovementMode;
use riforest::scoring::score_from_mean_path;
use riforest::{
    ablation_suite, auroc, build_forest, build_histogram, c_factor, dimension_entropy,
    improvement_rate, load_model, noise_robustness, save_model, score_dataset, valley_emphasis,
    AblationVariant, Histogram, RiForestParams,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Literal evaluation of the valley-emphasis objective on bin probabilities,
/// restricted to thresholds with mass on both sides; ties keep the smaller t.
fn exhaustive_valley(p: &[f64]) -> Option<(usize, f64)> {
    let l = p.len();
    let mut best: Option<(usize, f64)> = None;
    for t in 2..l {
        let w_left: f64 = (1..=t).map(|j| p[j - 1]).sum();
        let w_right: f64 = (t + 1..=l).map(|j| p[j - 1]).sum();
        if w_left <= 0.0 || w_right <= 0.0 {
            continue;
        }
        let mu_left = (1..=t).map(|j| j as f64 * p[j - 1]).sum::<f64>() / w_left;
        let mu_right = (t + 1..=l).map(|j| j as f64 * p[j - 1]).sum::<f64>() / w_right;
        let objective =
            (1.0 - p[t - 1]) * (w_left * mu_left * mu_left + w_right * mu_right * mu_right);
        if best.is_none_or(|(_, b)| objective > b) {
            best = Some((t, objective));
        }
    }
    best
}

fn random_histogram(r: &mut impl Rng, bins: usize) -> Histogram {
    loop {
        let counts: Vec<usize> = (0..bins)
            .map(|_| {
                if r.random_bool(0.3) {
                    0
                } else {
                    r.random_range(1..60)
                }
            })
            .collect();
        // Bins 1 and L are always occupied for a histogram over [min, max].
        if counts[0] > 0 && counts[bins - 1] > 0 {
            return Histogram::from_counts(0.0, 1.0, counts).unwrap();
        }
    }
}

fn c1_constants() -> Outcome {
    let c256 = c_factor(256);
    let s = score_from_mean_path(c256, c256);
    let ok = c_factor(1) == 0.0
        && c_factor(2) == 1.0
        && (c256 - 10.2448).abs() <= 1e-3
        && (s - 0.5).abs() <= 1e-9;
    check(ok, format!("c(1)={}, c(2)={}, c(256)={c256:.6}, s(E=c)={s}", c_factor(1), c_factor(2)))
}

fn c2_valley_oracle() -> Outcome {
    let mut r = common::rng(2);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let bins = r.random_range(3..=20);
        let h = random_histogram(&mut r, bins);
        let got = valley_emphasis(&h).ok();
        let want = exhaustive_valley(&h.probs);
        match (got, want) {
            (Some(g), Some((t, obj))) => {
                let diff = (g.objective - obj).abs();
                worst = worst.max(diff);
                if g.t_star != t || diff > 1e-12 {
                    mismatches += 1;
                }
            }
            (None, None) => {}
            _ => mismatches += 1,
        }
    }
    check(
        mismatches == 0,
        format!("{mismatches} mismatches in 1000 histograms, worst objective gap {worst:.2e}"),
    )
}

fn c3_entropy() -> Outcome {
    let mut r = common::rng(3);
    let mut out_of_range = 0;
    for _ in 0..10_000 {
        let bins = r.random_range(2..=20);
        let counts: Vec<usize> = loop {
            let c: Vec<usize> = (0..bins).map(|_| r.random_range(0..20)).collect();
            if c.iter().sum::<usize>() > 0 {
                break c;
            }
        };
        let e = dimension_entropy(&Histogram::from_counts(0.0, 1.0, counts).unwrap());
        if !(0.0..=1.0).contains(&e) {
            out_of_range += 1;
        }
    }
    let uniform = dimension_entropy(&Histogram::from_counts(0.0, 1.0, vec![7; 10]).unwrap());
    let mut single = vec![0; 10];
    single[4] = 9;
    let single = dimension_entropy(&Histogram::from_counts(0.0, 1.0, single).unwrap());
    let mut two = vec![0; 10];
    two[0] = 5;
    two[1] = 5;
    let two = dimension_entropy(&Histogram::from_counts(0.0, 1.0, two).unwrap());
    let expected_two = 2f64.ln() / 10f64.ln();
    let ok = out_of_range == 0
        && (uniform - 1.0).abs() <= 1e-12
        && single == 0.0
        && (two - expected_two).abs() <= 1e-12;
    check(
        ok,
        format!("{out_of_range} out of [0,1]; uniform={uniform}, single={single}, two={two:.12}"),
    )
}

fn c4_bimodal_split() -> Outcome {
    let mut inside = 0;
    for seed in 0..100 {
        let values = common::bimodal_values(seed);
        let h = build_histogram(&values, 10).unwrap();
        if let Ok(split) = valley_emphasis(&h) {
            if split.split_point > 3.0 && split.split_point < 7.0 {
                inside += 1;
            }
        }
    }
    check(inside >= 95, format!("{inside}/100 split points in (3, 7)"))
}

fn c5_synthetic_detection() -> Outcome {
    let params = RiForestParams::default();
    let mut aurocs = Vec::new();
    for seed in 0..5u64 {
        let data = common::annulus(100 + seed);
        let forest = build_forest(&data, &RiForestParams { master_seed: seed, ..params.clone() })
            .unwrap();
        let report = score_dataset(&data, &forest).unwrap();
        aurocs.push(auroc(&report.scores, data.labels().unwrap()).unwrap());
    }
    let mean = aurocs.iter().sum::<f64>() / aurocs.len() as f64;
    check(mean >= 0.95, format!("mean AUROC {mean:.4} over 5 seeds ({aurocs:.4?})"))
}

fn c6_noise_robustness() -> Outcome {
    let data = common::annulus(100);
    let params = RiForestParams {
        master_seed: 6,
        ..Default::default()
    };
    let baseline = params.isolation_forest_baseline();
    let ri = noise_robustness(&data, &params, &[0, 50], 20).unwrap();
    let base = noise_robustness(&data, &baseline, &[0, 50], 20).unwrap();
    let ri_drop = ri.mean_auroc_per_count[0] - ri.mean_auroc_per_count[1];
    let base_drop = base.mean_auroc_per_count[0] - base.mean_auroc_per_count[1];
    check(
        ri_drop <= base_drop + 0.02,
        format!(
            "RiForest {:.4} -> {:.4} (drop {ri_drop:.4}); baseline {:.4} -> {:.4} (drop {base_drop:.4})",
            ri.mean_auroc_per_count[0],
            ri.mean_auroc_per_count[1],
            base.mean_auroc_per_count[0],
            base.mean_auroc_per_count[1],
        ),
    )
}

fn c7_ablation_direction() -> Outcome {
    let datasets = [
        ("annulus", common::annulus(700)),
        ("bimodal-feature", common::bimodal_feature(701)),
        ("scattered-tail", common::scattered_tail(702)),
    ];
    let params = RiForestParams {
        master_seed: 7,
        ..Default::default()
    };
    let mut totals = [0.0f64; 5];
    let mut lines = Vec::new();
    for (name, data) in &datasets {
        let report = ablation_suite(data, &params, 20).unwrap();
        let row: Vec<String> = AblationVariant::ALL
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let m = report.get(*v).unwrap().mean_auroc;
                totals[i] += m / datasets.len() as f64;
                format!("{v}={m:.4}")
            })
            .collect();
        lines.push(format!("{name}: {}", row.join(" ")));
    }
    let full_idx = AblationVariant::ALL
        .iter()
        .position(|v| *v == AblationVariant::Full)
        .unwrap();
    let full = totals[full_idx];
    let ok = totals.iter().all(|&m| full >= m - 0.02);
    let avg: Vec<String> = AblationVariant::ALL
        .iter()
        .zip(totals)
        .map(|(v, m)| format!("{v}={m:.4}"))
        .collect();
    check(
        ok,
        format!("suite average: {}\n      {}", avg.join(" "), lines.join("\n      ")),
    )
}

fn c8_determinism_and_persistence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let data = common::annulus(800);
    let mut text = String::from("x,y,label\n");
    for (row, label) in data.rows().zip(data.labels().unwrap()) {
        text.push_str(&format!("{},{},{}\n", row[0], row[1], label));
    }
    std::fs::write(&input, text).unwrap();
    let run_bench = |name: &str| {
        let out = dir.path().join(name);
        let code = riforest::cli::main_with_args([
            "riforest",
            "bench",
            "--input",
            input.to_str().unwrap(),
            "--repeats",
            "5",
            "--trees",
            "50",
            "--seed",
            "7",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        std::fs::read(out).unwrap()
    };
    let first = run_bench("a.csv");
    let second = run_bench("b.csv");
    let bench_identical = first == second && !first.is_empty();

    let params = RiForestParams {
        master_seed: 8,
        ..Default::default()
    };
    let forest = build_forest(&data, &params).unwrap();
    let model_path = dir.path().join("model.json");
    save_model(&forest, &model_path).unwrap();
    let loaded = load_model(&model_path).unwrap();
    let a = score_dataset(&data, &forest).unwrap();
    let b = score_dataset(&data, &loaded).unwrap();
    let bitwise = a.scores.len() == 1000
        && a.scores
            .iter()
            .zip(&b.scores)
            .all(|(x, y)| x.to_bits() == y.to_bits());
    check(
        bench_identical && bitwise,
        format!("bench output identical: {bench_identical}; 1000 reloaded scores bitwise equal: {bitwise}"),
    )
}

fn c9_improvement_rate_modes() -> Outcome {
    let ratio = improvement_rate(0.9339, 0.888111, ImprovementMode::Ratio).unwrap();
    let diff = improvement_rate(0.9339, 0.888111, ImprovementMode::Difference).unwrap();
    check(
        (ratio - 5.156).abs() <= 1e-3 && (diff - 4.579).abs() <= 1e-3,
        format!("ratio mode {ratio:.4}, difference mode {diff:.4}"),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("1 constants", Duration::from_secs(1), c1_constants),
        ("2 valley oracle", Duration::from_secs(5), c2_valley_oracle),
        ("3 entropy suite", Duration::from_secs(5), c3_entropy),
        ("4 bimodal split placement", Duration::from_secs(10), c4_bimodal_split),
        ("5 synthetic detection", Duration::from_secs(30), c5_synthetic_detection),
        ("6 noise robustness", Duration::from_secs(300), c6_noise_robustness),
        ("7 ablation direction", Duration::from_secs(600), c7_ablation_direction),
        ("8 determinism and persistence", Duration::from_secs(30), c8_determinism_and_persistence),
        ("9 improvement-rate modes", Duration::from_secs(1), c9_improvement_rate_modes),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let in_time = elapsed <= limit;
        let passed = outcome.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {name} ({:.2}s, limit {}s{}): {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" },
            outcome.detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
