//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use common::{bootstrap_ci, ks_critical_001, ks_statistic, mean, paired_se, std_dev, variance};
use tsvha::combiner::{self, c1_coefficients, c2_coefficients, CombinerSpec};
use tsvha::envs::{EnvConfig, EnvFamily, Noise};
use tsvha::harness::{
    bai_experiment, run_experiment, ExperimentSpec, InstanceMode, Metric, RegretTrace,
};
use tsvha::policy::{Policy, PolicySpec, PolicyState};
use tsvha::posterior::{ArmPosterior, GaussianArmState, PosteriorFamily};
use tsvha::theory::{self, BoundParams, SelectionVariant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const G: PosteriorFamily = PosteriorFamily::Gaussian;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn criterion_1() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for n in 2..=50 {
        let c2 = c2_coefficients(n).map_err(|e| e.to_string())?;
        let c1 = c1_coefficients(n).map_err(|e| e.to_string())?;
        worst.0 = worst.0.max((c2.sum() - 1.0).abs());
        worst.1 = worst.1.max((c2.sum_of_squares() - n as f64).abs());
        worst.2 = worst.2.max((c1.sum_of_squares() - 1.0 / n as f64).abs());
    }
    check(
        worst.0 < 1e-12 && worst.1 < 1e-9 && worst.2 < 1e-12,
        format!(
            "max |sum c2 - 1| = {:.1e}, max |sum c2^2 - N| = {:.1e}, max |sum c1^2 - 1/N| = {:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn criterion_2() -> Outcome {
    let n = 1_000_000;
    let state = GaussianArmState::with_mean(0.3, 3);
    let (m, var) = (state.empirical_mean(), state.variance());
    let mut r = rng(2);
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, coeffs, target_var) in [
        ("C1", c1_coefficients(4).unwrap(), var / 4.0),
        ("C2", c2_coefficients(4).unwrap(), 4.0 * var),
    ] {
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let draws: Vec<f64> = (0..4).map(|_| state.sample(&mut r)).collect();
                coeffs.combine(&draws).unwrap()
            })
            .collect();
        let (sm, sv) = (mean(&xs), variance(&xs));
        let mean_se = (target_var / n as f64).sqrt();
        let var_se = target_var * (2.0 / (n as f64 - 1.0)).sqrt();
        let good = (sm - m).abs() < 3.0 * mean_se && (sv - target_var).abs() < 3.0 * var_se;
        ok &= good;
        notes.push(format!(
            "{name}(4) mean {:+.2} SE var {:+.2} SE",
            (sm - m) / mean_se,
            (sv - target_var) / var_se
        ));
    }
    let k = 100_000;
    for agents in [2usize, 4, 10] {
        let coeffs = c1_coefficients(agents).unwrap();
        let combined: Vec<f64> = (0..k)
            .map(|_| {
                let draws: Vec<f64> = (0..agents).map(|_| state.sample(&mut r)).collect();
                coeffs.combine(&draws).unwrap()
            })
            .collect();
        let scaled: Vec<f64> = (0..k)
            .map(|_| combiner::scaled_gaussian_sample(&state, agents as f64, &mut r).unwrap())
            .collect();
        let d = ks_statistic(&combined, &scaled);
        let crit = ks_critical_001(k, k);
        ok &= d < crit;
        notes.push(format!("KS N={agents} D={d:.4} (crit {crit:.4})"));
    }
    check(ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let trials = 1_000_000u64;
    let state = PolicyState::from_posteriors(
        vec![
            ArmPosterior::Gaussian(GaussianArmState::with_mean(0.6, 7)),
            ArmPosterior::Gaussian(GaussianArmState::with_mean(0.4, 7)),
        ],
        false,
    );
    let mut r = rng(3);
    let mut ok = true;
    let mut notes = Vec::new();
    let mut freqs = Vec::new();
    for (spec, variant) in [
        (PolicySpec::ts(G), SelectionVariant::Ts),
        (PolicySpec::tsvha(G, CombinerSpec::c1(4)), SelectionVariant::C1(4)),
        (PolicySpec::tsvha(G, CombinerSpec::c2(4)), SelectionVariant::C2(4)),
    ] {
        let policy = Policy::new(spec).unwrap();
        let hits = (0..trials)
            .filter(|_| policy.select_arm(&state, &mut r).unwrap().0 == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        let p = theory::selection_probability(0.6, 0.4, 7, 7, variant).unwrap();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        ok &= (freq - p).abs() < 3.0 * se;
        notes.push(format!("{} {freq:.5} vs {p:.5}", variant.name()));
        freqs.push(p);
    }
    ok &= freqs[1] > freqs[0] && freqs[0] > freqs[2];
    check(ok, notes.join("; "))
}

fn find<'a>(traces: &'a [RegretTrace], label: &str) -> &'a RegretTrace {
    traces.iter().find(|t| t.policy == label).expect("policy label")
}

fn criterion_4() -> Outcome {
    let spec = ExperimentSpec::new(
        EnvConfig::new(EnvFamily::RandomUniform { arms: 20 }, Noise::GaussianUnit),
        vec![PolicySpec::ts(G), PolicySpec::tsvha(G, CombinerSpec::c1(2))],
        10_000,
        200,
        4,
    );
    let traces = run_experiment(&spec).map_err(|e| e.to_string())?;
    let (ts, c1) = (find(&traces, "ts"), find(&traces, "c1-n2"));
    let margin = mean(&ts.final_regret) - mean(&c1.final_regret);
    let se = paired_se(&ts.final_regret, &c1.final_regret);
    check(
        margin > 2.0 * se,
        format!(
            "TS {:.1}, C1-VA2 {:.1}, margin {margin:.1} = {:.1} SE",
            mean(&ts.final_regret),
            mean(&c1.final_regret),
            margin / se
        ),
    )
}

fn criterion_5() -> Outcome {
    let spec = ExperimentSpec::new(
        EnvConfig::new(EnvFamily::RandomUniform { arms: 20 }, Noise::GaussianUnit),
        vec![
            PolicySpec::ts(G),
            PolicySpec::tsvha(G, CombinerSpec::c1(2)),
            PolicySpec::tsvha(G, CombinerSpec::c2(2)),
        ],
        10_000,
        200,
        5,
    )
    .with_instance_mode(InstanceMode::FixedAcrossRuns);
    let traces = run_experiment(&spec).map_err(|e| e.to_string())?;
    let ts = &find(&traces, "ts").final_regret;
    let c1 = &find(&traces, "c1-n2").final_regret;
    let c2 = &find(&traces, "c2-n2").final_regret;
    let cols: [&[f64]; 3] = [c1, ts, c2];
    let upper = bootstrap_ci(&cols, |b| std_dev(&b[0]) - std_dev(&b[1]), 2000, 51);
    let lower = bootstrap_ci(&cols, |b| std_dev(&b[1]) - std_dev(&b[2]), 2000, 52);
    check(
        upper.0 > 0.0 && lower.0 > 0.0,
        format!(
            "std C1 {:.1}, TS {:.1}, C2 {:.1}; CI(C1-TS) [{:.1}, {:.1}], CI(TS-C2) [{:.1}, {:.1}]",
            std_dev(c1),
            std_dev(ts),
            std_dev(c2),
            upper.0,
            upper.1,
            lower.0,
            lower.1
        ),
    )
}

fn criterion_6() -> Outcome {
    let budgets = [100, 500, 2000];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, means, noise, family) in [
        ("gaussian", vec![0.5, 0.25], Noise::GaussianUnit, G),
        ("bernoulli", vec![0.51, 0.5], Noise::Bernoulli, PosteriorFamily::Beta),
    ] {
        let spec = ExperimentSpec::new(
            EnvConfig::new(EnvFamily::Fixed { means }, noise),
            vec![PolicySpec::ts(family), PolicySpec::tsvha(family, CombinerSpec::c2(2))],
            1,
            2000,
            6,
        );
        let mut clear_gap = false;
        for budget in budgets {
            let res = bai_experiment(&spec, budget).map_err(|e| e.to_string())?;
            let (ts, c2) = (&res[0], &res[1]);
            let se = (ts.standard_error().powi(2) + c2.standard_error().powi(2)).sqrt();
            let gap = ts.error_rate - c2.error_rate;
            ok &= c2.error_rate <= ts.error_rate;
            clear_gap |= gap > 3.0 * se;
            notes.push(format!(
                "{name} B={budget}: TS {:.4} C2 {:.4} ({:+.1} SE)",
                ts.error_rate,
                c2.error_rate,
                gap / se
            ));
        }
        ok &= clear_gap;
    }
    check(ok, notes.join("; "))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, family, noise, eps) in [
        ("deterministic", EnvFamily::RandomUniform { arms: 250 }, Noise::None, 0.05),
        ("independent gaussian", EnvFamily::RandomNormal { arms: 250 }, Noise::GaussianUnit, 0.5),
    ] {
        let spec = ExperimentSpec::new(
            EnvConfig::new(family, noise),
            vec![
                PolicySpec::ts(G),
                PolicySpec::tsvha(G, CombinerSpec::c1(2)),
                PolicySpec::sts(G, eps),
            ],
            500,
            500,
            7,
        )
        .with_metrics([Metric::CumulativeRegret, Metric::PerPeriodRegret]);
        let traces = run_experiment(&spec).map_err(|e| e.to_string())?;
        let at_horizon = |label: &str| find(&traces, label).final_per_period.clone();
        let (ts, c1) = (at_horizon("ts"), at_horizon("c1-n2"));
        let sts = at_horizon(&format!("sts-eps{eps}"));
        let se = paired_se(&ts, &c1);
        let margin = mean(&ts) - mean(&c1);
        ok &= margin >= 2.0 * se && mean(&sts).is_finite();
        notes.push(format!(
            "{name}: per-period TS {:.4} C1 {:.4} STS {:.4} ({:.1} SE)",
            mean(&ts),
            mean(&c1),
            mean(&sts),
            margin / se
        ));
    }
    check(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (gamma, beta, epsilon, policy) in [
        (0.5, 1.0, 1.0, PolicySpec::tsvha(G, CombinerSpec::c2(2))),
        (1.0, 1.0, 0.5, PolicySpec::ts(G)),
        (2.0, 1.5, 0.25, PolicySpec::tsvha(G, CombinerSpec::c1(2))),
    ] {
        let horizon = 10_000;
        let spec = ExperimentSpec::new(
            EnvConfig::new(EnvFamily::Fixed { means: vec![0.9, 0.6] }, Noise::Bernoulli),
            vec![policy],
            horizon,
            500,
            8,
        );
        let traces = run_experiment(&spec).map_err(|e| e.to_string())?;
        let sim = traces[0].final_summary().expect("final").mean;
        let bound = theory::theorem1_bound(&BoundParams {
            gamma,
            beta,
            epsilon,
            gaps: vec![0.3],
            horizon,
        })
        .map_err(|e| e.to_string())?;
        ok &= sim <= bound;
        notes.push(format!("gamma {gamma}: regret {sim:.1} <= bound {bound:.3e}"));
    }
    check(ok, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut notes = Vec::new();

    let n = 1_000_000;
    let mut z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    z.sort_by(f64::total_cmp);
    let mut worst3 = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let x: f64 = 4.0 * (1.0 - rand::Rng::random::<f64>(&mut r));
        let tail = (n - z.partition_point(|&v| v <= x)) as f64 / n as f64;
        let lb = theory::gaussian_tail_lower_bound(x);
        let p = tail.max(lb);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        worst3 = worst3.max((lb - tail) / se);
    }
    let ok3 = worst3 < 3.0;
    notes.push(format!("ineq3 worst excess {worst3:.2} SE"));

    let n = 10_000_000;
    let mut ok4 = true;
    let zs = [0.5, 1.0, 2.0];
    let mut counts = [0u64; 3];
    let mut upper_counts = [0u64; 3];
    for _ in 0..n {
        let v: f64 = StandardNormal.sample(&mut r);
        for ((c, u), &t) in counts.iter_mut().zip(upper_counts.iter_mut()).zip(&zs) {
            if v.abs() > t {
                *c += 1;
            }
            if v > t {
                *u += 1;
            }
        }
    }
    for ((c, u), &t) in counts.iter().zip(&upper_counts).zip(&zs) {
        let p = *c as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let (lo, hi) = theory::two_sided_tail_bounds(t);
        let holds = lo < p + 3.0 * se && p <= hi + 3.0 * se;
        ok4 &= holds;
        let upper_tail = *u as f64 / n as f64;
        notes.push(format!(
            "ineq4 z={t}: {lo:.4} < P(|Z|>z)={p:.4} <= {hi:.4} {} (P(Z>z)={upper_tail:.4})",
            if holds { "holds" } else { "violated" }
        ));
    }

    let mut ok5 = true;
    for p in [0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
        let mut sum = 0.0;
        for i in 1..=100_000u64 {
            sum += (i as f64).powf(-p);
            ok5 &= sum < theory::p_series_upper_bound(i, p);
        }
    }
    notes.push(format!("ineq5 n<=1e5 {}", if ok5 { "holds" } else { "violated" }));
    check(ok3 && ok4 && ok5, notes.join("; "))
}

const DETERMINISM_CONFIG: &str = r#"
[experiment]
horizon = 300
runs = 24
seed = 10
metrics = ["cumulative_regret", "per_period_regret", "final_regret_distribution"]

[env]
family = "random_uniform"
arms = 5
noise = "bernoulli"

[[policy]]
kind = "ts"

[[policy]]
kind = "tsvha"
combiner = "c2"
agents = 3

[[policy]]
kind = "tsvha"
combiner = "c3"

[[policy]]
kind = "sts"
epsilon = 0.05
posterior = "beta"
"#;

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("exp.toml");
    std::fs::write(&cfg, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "4", "4", "7"].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let code = tsvha::cli::execute([
            "tsvha",
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        if code != 0 {
            return Err(format!("run exited with {code}"));
        }
        outputs.push(read_dir_sorted(&out));
    }
    let files = outputs[0].len();
    let same = outputs.iter().all(|o| *o == outputs[0]);
    check(
        same && files == 12,
        format!("{files} CSVs identical across 4 invocations (workers 1, 4, 4, 7)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("combiner coefficient contract", criterion_1),
        ("combined-sample distributions", criterion_2),
        ("selection probability vs Monte Carlo", criterion_3),
        ("C1-VA2 beats TS on 20-arm Gaussian regret", criterion_4),
        ("final-regret spread C1 > TS > C2", criterion_5),
        ("C2-VA2 best-arm identification error", criterion_6),
        ("C1-VA2 per-period regret on 250 arms", criterion_7),
        ("simulated regret within regret bound", criterion_8),
        ("tail and series inequality oracles", criterion_9),
        ("byte-identical reruns across worker counts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {:>2}: {name} ({secs:.1}s) {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
