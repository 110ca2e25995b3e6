//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zero_one::configuration::BallIndex;
use zero_one::evaluator::{
    covariance_with_stderr, estimate_mixing, estimate_probabilities, exact_probabilities,
    exact_probability,
};
use zero_one::experiments::{run_sweep, ExperimentConfig, Monotonicity};
use zero_one::samplers::{
    conditional_ball_probabilities, ising_exact_distribution, ising_gibbs_chain, FieldModel,
    IsingDistribution, IsingParams, SamplerOptions,
};
use zero_one::sentence::{index_report, parse_sentence, BasicLocalSentence, LocalFormula, DEFAULT_ENUMERATION_CAP as CAP};
use zero_one::{Configuration, Lattice, Norm, Sentence, TorusGraph};

use common::{brute_index, flip_colors, random_formula, torus};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const SENTENCES_1D: [&str; 10] = [
    "EXIST 1 BALL r=0 { C(0) }",
    "!EXIST 1 BALL r=0 { !C(0) }",
    "EXIST 1 BALL r=1 { C(-1) & C(0) & C(1) }",
    "EXIST 1 BALL r=1 { C(0) & !C(-1) & !C(1) }",
    "EXIST 2 BALL r=0 { C(0) } { C(0) }",
    "EXIST 2 BALL r=1 { C(0) } { !C(0) }",
    "EXIST 1 BALL r=1 { C(-1) & !C(1) } && EXIST 1 BALL r=0 { !C(0) }",
    "EXIST 3 BALL r=0 { C(0) } { C(0) } { !C(0) }",
    "!EXIST 1 BALL r=1 { C(0) & C(1) }",
    "EXIST 1 BALL r=1 { !C(-1) & !C(1) } || !EXIST 2 BALL r=0 { C(0) } { C(0) }",
];

const SENTENCES_2D: [&str; 10] = [
    "EXIST 1 BALL r=0 { C(0,0) }",
    "!EXIST 1 BALL r=0 { !C(0,0) }",
    "EXIST 1 BALL r=1 { C(0,0) & !C(1,0) & !C(-1,0) & !C(0,1) & !C(0,-1) }",
    "EXIST 1 BALL r=1 { C(0,0) & (C(1,0) | C(0,1)) }",
    "EXIST 2 BALL r=0 { C(0,0) } { C(0,0) }",
    "EXIST 2 BALL r=1 { C(0,0) } { !C(0,0) }",
    "EXIST 1 BALL r=1 { C(-1,0) & !C(1,0) } && EXIST 1 BALL r=0 { !C(0,0) }",
    "EXIST 3 BALL r=0 { C(0,0) } { C(0,0) } { !C(0,0) }",
    "!EXIST 1 BALL r=1 { C(0,0) & C(1,0) }",
    "EXIST 1 BALL r=1 { !C(0,1) & !C(0,-1) } || !EXIST 2 BALL r=0 { C(0,0) } { C(0,0) }",
];

fn sentences(t: &TorusGraph) -> Vec<Sentence> {
    let texts: &[&str] = if t.params().d() == 1 { &SENTENCES_1D } else { &SENTENCES_2D };
    texts
        .iter()
        .map(|s| parse_sentence(s, &t.params().lattice()).unwrap())
        .collect()
}

fn binomial_sigma(p: f64, replicas: usize) -> f64 {
    (p * (1.0 - p) / replicas as f64).sqrt()
}

fn criterion_1() -> Outcome {
    let replicas = 100_000;
    let models = [
        FieldModel::Bernoulli { p: 0.3 },
        FieldModel::Ising(IsingParams::new(-0.5, 0.4).unwrap()),
    ];
    let tori: Vec<(usize, usize)> = (3..=12).map(|n| (1, n)).chain([(2, 3), (2, 4)]).collect();
    let (mut cells, mut within) = (0usize, 0usize);
    let mut worst = 0.0f64;
    for &(d, n) in &tori {
        let t = torus(d, n);
        let ss = sentences(&t);
        for (m, model) in models.iter().enumerate() {
            let exact = exact_probabilities(&t, model, &ss, CAP).unwrap();
            let seed = (d * 1000 + n * 10 + m) as u64;
            let mc = estimate_probabilities(&t, model, &ss, replicas, seed, SamplerOptions::default(), CAP).unwrap();
            for (e, est) in exact.iter().zip(&mc) {
                let sigma = binomial_sigma(e.point, replicas);
                cells += 1;
                if (est.point - e.point).abs() <= 3.0 * sigma + 1e-12 {
                    within += 1;
                }
                if sigma > 0.0 {
                    worst = worst.max((est.point - e.point).abs() / sigma);
                }
            }
        }
    }
    let rate = within as f64 / cells as f64;
    outcome(
        rate >= 0.95,
        format!("{within}/{cells} cells within 3 sigma ({:.1}%), largest |z| = {worst:.2}", 100.0 * rate),
    )
}

fn criterion_2() -> Outcome {
    let t = torus(1, 8);
    let index = BallIndex::for_radius(&t, 1).unwrap();
    let sweeps = 1_000_000;
    let mut worst = 0.0f64;
    for (j, b) in [-0.5, 0.0, 0.5].into_iter().enumerate() {
        let ising = IsingParams::new(-1.0, b).unwrap();
        let dist = ising_exact_distribution(t.params(), ising).unwrap();
        let mut exact = [0.0f64; 8];
        for (mask, p) in dist.iter() {
            exact[index.key(&Configuration::from_mask(t.params(), mask), 0) as usize] += p;
        }
        let mut counts = [0u64; 8];
        let mut stream = ising_gibbs_chain(&t, &ising, sweeps, 1000, 77 + j as u64);
        while let Some(state) = stream.advance() {
            for x in 0..t.sites() {
                counts[index.key(state, x) as usize] += 1;
            }
        }
        let total = (sweeps * t.sites()) as f64;
        for (c, e) in counts.iter().zip(exact) {
            worst = worst.max((*c as f64 / total - e).abs());
        }
    }
    outcome(worst <= 0.01, format!("max |frequency - exact| = {worst:.2e} (tolerance 0.01)"))
}

fn sweep_config(theta: f64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
name = "acceptance-theta-{theta}"
[torus]
d = 2
n = [16, 32, 64, 128]
[schedule]
c = 1.0
theta = {theta:?}
[sentence]
text = "EXIST 1 BALL r=0 {{ C(0,0) }}"
[run]
replicas = 100000
seed = 31
method = "monte_carlo"
"#
    ))
    .unwrap()
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for theta in [2.0, 0.5] {
        let config = sweep_config(theta);
        let result = run_sweep(&config).unwrap();
        for row in &result.rows {
            let n = row.n as f64;
            let a = row.a.unwrap();
            let p = a.exp() / (a.exp() + (-a).exp());
            let closed = 1.0 - (1.0 - p).powf(n * n);
            let sigma = binomial_sigma(closed, row.estimate.replicas);
            if (row.estimate.point - closed).abs() > 3.0 * sigma {
                pass = false;
                notes.push(format!("theta={theta} n={}: {} vs {closed:.6}", row.n, row.estimate.point));
            }
        }
        let last = *result.estimates().last().unwrap();
        if theta > 1.0 {
            pass &= last < 0.05 && result.monotonicity() == Monotonicity::Decreasing;
            notes.push(format!("theta=2 final {last:.2e}, {} ({})", result.monotonicity(), result.trend()));
        } else {
            pass &= last > 0.95;
            notes.push(format!("theta=0.5 final {last:.4} ({})", result.trend()));
        }
    }
    outcome(pass, notes.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lattices = [
        (Lattice::new(1, Norm::Finite(1), 1).unwrap(), vec![0, 1, 2, 3, 4, 5]),
        (Lattice::new(1, Norm::Finite(1), 2).unwrap(), vec![1, 2]),
        (Lattice::new(2, Norm::Finite(1), 1).unwrap(), vec![1]),
        (Lattice::new(2, Norm::Infinity, 1).unwrap(), vec![1]),
        (Lattice::new(3, Norm::Finite(2), 1).unwrap(), vec![1]),
    ];
    let (mut agree, mut infinite, total) = (0, 0, 50);
    for _ in 0..total {
        let (lattice, radii) = &lattices[rng.random_range(0..lattices.len())];
        let r = radii[rng.random_range(0..radii.len())];
        let template = lattice.ball(r);
        assert!(template.beta() <= 12);
        let m = rng.random_range(1..=3);
        let psis = (0..m)
            .map(|_| LocalFormula::new(r, random_formula(&mut rng, &template, 4), lattice).unwrap())
            .collect();
        let leaf = BasicLocalSentence::new(r, psis).unwrap();
        let report = index_report(&leaf, lattice, CAP).unwrap();
        let brute = brute_index(&leaf, lattice);
        infinite += (brute == zero_one::sentence::Index::Infinite) as usize;
        agree += (report.index == brute) as usize;
    }
    outcome(
        agree == total,
        format!("{agree}/{total} random sentences agree with the brute-force scan ({infinite} unsatisfiable)"),
    )
}

fn criterion_5() -> Outcome {
    let t = torus(1, 7);
    let index = BallIndex::for_radius(&t, 1).unwrap();
    let mut worst_sum = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut checked = 0;
    for (a, b) in [(-1.0, 0.5), (0.3, -0.8), (-2.5, 2.0), (0.0, 0.0)] {
        let ising = IsingParams::new(a, b).unwrap();
        let dist = IsingDistribution::new(&t, ising).unwrap();
        for x in 0..t.sites() {
            let ball = index.ball(x);
            let boundary = zero_one::samplers::boundary(&t, ball);
            assert_eq!(boundary.len(), 2);
            for bits in 0u32..(1 << boundary.len()) {
                let mut outside = Configuration::all_minus(t.params());
                for (i, &y) in boundary.iter().enumerate() {
                    outside.set(y, (bits >> i) & 1 == 1);
                }
                let cond = conditional_ball_probabilities(&t, &ising, &index, x, &outside).unwrap();
                worst_sum = worst_sum.max((cond.iter().sum::<f64>() - 1.0).abs());
                // Against the joint law: condition on the whole complement of the ball.
                let joint: Vec<f64> = (0..cond.len() as u64)
                    .map(|key| {
                        let mut c = outside.clone();
                        for (i, &v) in ball.iter().enumerate() {
                            c.set(v as usize, (key >> i) & 1 == 1);
                        }
                        dist.probability(&c)
                    })
                    .collect();
                let norm: f64 = joint.iter().sum();
                for (c, j) in cond.iter().zip(&joint) {
                    worst_oracle = worst_oracle.max((c - j / norm).abs());
                }
                checked += 1;
            }
        }
    }
    outcome(
        worst_sum <= 1e-10 && worst_oracle <= 1e-10,
        format!("{checked} boundary conditions: max |sum - 1| = {worst_sum:.1e}, max deviation from enumeration = {worst_oracle:.1e}"),
    )
}

fn exact_covariances(t: &TorusGraph, ising: IsingParams<f64>, index: &BallIndex, center: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let cells = 1usize << index.beta();
    let dist = ising_exact_distribution(t.params(), ising).unwrap();
    let mut joint = vec![0.0f64; cells * cells];
    for (mask, p) in dist.iter() {
        let c = Configuration::from_mask(t.params(), mask);
        joint[index.key(&c, 0) as usize * cells + index.key(&c, center) as usize] += p;
    }
    let p_b: Vec<f64> = (0..cells).map(|kb| joint[kb * cells..(kb + 1) * cells].iter().sum()).collect();
    let p_c: Vec<f64> = (0..cells).map(|kc| (0..cells).map(|kb| joint[kb * cells + kc]).sum()).collect();
    (joint, p_b, p_c)
}

fn criterion_6() -> Outcome {
    let replicas = 100_000;
    let bound = 4.0 / (replicas as f64).sqrt();
    let mut notes = Vec::new();
    let mut pass = true;
    let independent = [
        FieldModel::Bernoulli { p: 0.3 },
        FieldModel::Ising(IsingParams::new(-0.4, 0.0).unwrap()),
    ];
    for (d, n, distances) in [(1, 16, vec![1, 2, 3, 4, 5, 6]), (2, 8, vec![1, 2])] {
        let t = torus(d, n);
        for (i, model) in independent.iter().enumerate() {
            let report = estimate_mixing(&t, model, 1, &distances, replicas, 60 + i as u64, SamplerOptions::default()).unwrap();
            let max = report.rows.iter().map(|r| r.max_abs_cov).fold(0.0, f64::max);
            pass &= max <= bound;
            notes.push(format!("{model} d={d}: max|cov| {max:.2e}"));
        }
    }
    let t = torus(1, 16);
    let ising = IsingParams::new(-1.0, 0.3).unwrap();
    let distances = [1, 2, 3, 4, 5, 6];
    let report = estimate_mixing(&t, &FieldModel::Ising(ising), 1, &distances, replicas, 66, SamplerOptions::default()).unwrap();
    let index = BallIndex::for_radius(&t, 1).unwrap();
    let cells = 1usize << index.beta();
    let (mut entries, mut within) = (0, 0);
    for table in &report.tables {
        let (joint, p_b, p_c) = exact_covariances(&t, ising, &index, table.center);
        for kb in 0..cells {
            for kc in 0..cells {
                let (cov, sigma) = covariance_with_stderr(joint[kb * cells + kc], p_b[kb], p_c[kc], replicas);
                entries += 1;
                within += ((table.cov[kb * cells + kc] - cov).abs() <= 3.0 * sigma) as usize;
            }
        }
    }
    let rate = within as f64 / entries as f64;
    pass &= rate >= 0.95;
    notes.push(format!("ising(a=-1;b=0.3) n=16: {within}/{entries} covariance entries within 3 sigma of enumeration"));
    outcome(pass, format!("bound {bound:.2e}; {}", notes.join("; ")))
}

fn criterion_7() -> Outcome {
    let mut worst_flip = 0.0f64;
    let mut worst_shift = 0.0f64;
    let models: [(f64, f64); 4] = [(-0.5, 0.4), (0.3, -0.7), (-1.2, 0.0), (0.8, 1.1)];
    for (d, n) in [(1, 7), (2, 3)] {
        let t = torus(d, n);
        let lattice = t.params().lattice();
        let texts: &[&str] = if d == 1 { &SENTENCES_1D } else { &SENTENCES_2D };
        for &(a, b) in &models {
            let model = FieldModel::Ising(IsingParams::new(a, b).unwrap());
            let mirrored = FieldModel::Ising(IsingParams::new(-a, b).unwrap());
            for text in texts {
                let s = parse_sentence(text, &lattice).unwrap();
                let f = parse_sentence(&flip_colors(text), &lattice).unwrap();
                let p = exact_probability(&t, &model, &s, CAP).unwrap().point;
                let q = exact_probability(&t, &mirrored, &f, CAP).unwrap().point;
                worst_flip = worst_flip.max((p - q).abs());
            }
        }
    }
    for (d, n) in [(1, 7), (2, 4)] {
        let t = torus(d, n);
        let index = BallIndex::for_radius(&t, 1).unwrap();
        let cells = 1usize << index.beta();
        for &(a, b) in &models {
            let dist = ising_exact_distribution(t.params(), IsingParams::new(a, b).unwrap()).unwrap();
            let mut law = vec![vec![0.0f64; cells]; t.sites()];
            for (mask, p) in dist.iter() {
                let c = Configuration::from_mask(t.params(), mask);
                for (x, row) in law.iter_mut().enumerate() {
                    row[index.key(&c, x) as usize] += p;
                }
            }
            for row in &law[1..] {
                for (u, v) in row.iter().zip(&law[0]) {
                    worst_shift = worst_shift.max((u - v).abs());
                }
            }
        }
    }
    outcome(
        worst_flip <= 1e-12 && worst_shift <= 1e-12,
        format!("spin flip max deviation {worst_flip:.1e}, translation max deviation {worst_shift:.1e}"),
    )
}

fn write_configs(dir: &Path) {
    std::fs::write(
        dir.join("sweep.toml"),
        r#"name = "repro-sweep"
[torus]
d = 1
n = [6, 30, 60]
[schedule]
c = 1.0
theta = 1.0
b = 0.2
[sentence]
text = "EXIST 2 BALL r=1 { C(0) } { C(0) & !C(1) }"
[run]
replicas = 3000
seed = 99
"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("exact.toml"),
        r#"name = "repro-exact"
[torus]
d = 2
n = [3, 4]
[model]
kind = "ising"
a = -0.5
b = 0.4
[sentence]
text = "EXIST 1 BALL r=1 { C(0,0) & !C(1,0) }"
"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("mixing.toml"),
        r#"name = "repro-mixing"
[torus]
d = 1
n = [16]
[model]
kind = "ising"
a = -1.0
b = 0.3
[mixing]
radius = 1
distances = [1, 2, 3]
[run]
replicas = 2000
seed = 5
"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("sample.toml"),
        r#"name = "repro-sample"
[torus]
d = 2
n = [6]
[model]
kind = "shift"
threshold = 0.5
kernel = [{ offset = [0, 0], weight = 1.0 }, { offset = [1, 0], weight = 0.5 }]
[sample]
count = 2
radius = 0
description = "+"
[run]
seed = 8
"#,
    )
    .unwrap();
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_zero-one"))
        .args(args)
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

/// The resolved config embedded in an output's leading comment block.
fn embedded_config(output: &str) -> String {
    output
        .lines()
        .skip(1)
        .take_while(|l| *l != "# ---")
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    let mut identical = 0;
    let mut notes = Vec::new();
    let commands = ["index", "sweep", "exact", "mixing", "sample"];
    for command in commands {
        let config_name = if command == "index" { "sweep" } else { command };
        let config = dir.path().join(format!("{config_name}.toml"));
        let outputs: Vec<_> = (0..2).map(|i| dir.path().join(format!("{command}-{i}.out"))).collect();
        let mut ok = true;
        for out in &outputs {
            if let Err(e) = run_cli(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]) {
                notes.push(e);
                ok = false;
            }
        }
        if ok {
            let first = std::fs::read(&outputs[0]).unwrap();
            let second = std::fs::read(&outputs[1]).unwrap();
            if first == second && !first.is_empty() {
                identical += 1;
            } else {
                notes.push(format!("{command} outputs differ"));
            }
            if command != "index" {
                let header = dir.path().join(format!("{command}-header.toml"));
                std::fs::write(&header, embedded_config(&String::from_utf8_lossy(&first))).unwrap();
                let rerun = dir.path().join(format!("{command}-rerun.out"));
                match run_cli(&[command, "--config", header.to_str().unwrap(), "--out", rerun.to_str().unwrap()]) {
                    Ok(()) if std::fs::read(&rerun).unwrap() == first => {}
                    Ok(()) => notes.push(format!("{command}: rerunning the embedded config changed the output")),
                    Err(e) => notes.push(e),
                }
            }
        }
    }
    let pass = identical == commands.len() && notes.is_empty();
    let mut detail = format!("{identical}/{} subcommands byte-identical across runs", commands.len());
    if !notes.is_empty() {
        detail.push_str(&format!(" ({})", notes.join("; ")));
    }
    outcome(pass, detail)
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact-oracle equivalence", criterion_1, Some(Duration::from_secs(300))),
        ("gibbs correctness", criterion_2, Some(Duration::from_secs(120))),
        ("threshold trends", criterion_3, Some(Duration::from_secs(60))),
        ("index correctness", criterion_4, Some(Duration::from_secs(60))),
        ("conditional normalization", criterion_5, None),
        ("mixing sanity", criterion_6, None),
        ("symmetry", criterion_7, None),
        ("reproducibility", criterion_8, None),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| outcome(false, "panicked"));
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = result.pass && in_time;
        failures += !pass as usize;
        let timing = match budget {
            Some(b) => format!("{:.1}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.1}s", elapsed.as_secs_f64()),
        };
        println!(
            "criterion {} [{name}]: {} - {} [{timing}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
