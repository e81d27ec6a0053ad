//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use wlra::comm::{build_lb_instance, encode_css, recover_secret, sparse_column_matrix, OffSupport};
use wlra::data::{gen_mog, gen_planted, MogSpec, PlantedSpec};
use wlra::linalg::{LowRank, Matrix};
use wlra::rng;
use wlra::solvers::{
    css_wlra, em_wlra, factored_gd_wlra, factored_gradients, greedy_wlra, hadamard_rank_check,
    plain_svd_baseline, run_solver, sample_wlra, svd_w, weighted_loss, AdamConfig, CssSelection,
    LraMethod, SolverKind, SuiteConfig,
};
use wlra::weights::{
    inverse_weight_apply_vector, make_family, LowRankWeight, Structured, WeightFamily, WeightMatrix,
};

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn oracle_singular_values(m: &Matrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m)
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn oracle_tail(m: &Matrix<f64>, k: usize) -> f64 {
    oracle_singular_values(m)
        .iter()
        .skip(k)
        .map(|s| s * s)
        .sum()
}

fn oracle_rank(m: &Matrix<f64>, rel: f64) -> usize {
    let s = oracle_singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel * top).count(),
        _ => 0,
    }
}

fn gaussian(g: &mut rng::WlraRng, n: usize, d: usize) -> Matrix<f64> {
    Matrix::from_fn(n, d, |_, _| rng::normal(g))
}

fn positive_low_rank(g: &mut rng::WlraRng, n: usize, d: usize, r: usize) -> LowRankWeight<f64> {
    let p = Matrix::from_fn(n, r, |_, _| rng::uniform(g, 0.5, 1.5));
    let q = Matrix::from_fn(r, d, |_, _| rng::uniform(g, 0.5, 1.5));
    LowRankWeight::new(LowRank::new(p, q).unwrap()).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Instances shared by the loss identity and the dominance check.
struct Instance {
    a: Matrix<f64>,
    w: LowRankWeight<f64>,
    r: usize,
    k: usize,
}

fn identity_instances() -> Vec<Instance> {
    (0..100u64)
        .map(|seed| {
            let mut g = rng::seeded(1000 + seed);
            let n = g.random_range(5..=60);
            let d = g.random_range(5..=60);
            let r = g.random_range(1..=3);
            let k = g.random_range(1..=5).min(n.min(d) / r);
            let w = positive_low_rank(&mut g, n, d, r);
            let a = gaussian(&mut g, n, d);
            Instance { a, w, r, k }
        })
        .collect()
}

fn loss_identity(instances: &[Instance]) -> Outcome {
    let mut worst = 0.0f64;
    for inst in instances {
        let sol = svd_w(&inst.a, &inst.w, inst.r, inst.k, LraMethod::Exact).unwrap();
        let loss = weighted_loss(&inst.a, &inst.w, &sol).unwrap();
        let tail = oracle_tail(&inst.w.apply(&inst.a).unwrap(), inst.r * inst.k);
        worst = worst.max((loss - tail).abs() / tail);
    }
    Outcome::new(
        worst <= 1e-9,
        format!("worst relative gap {worst:.2e} over 100 instances"),
    )
}

fn hadamard_rank_bound() -> Outcome {
    let mut violations = 0;
    for seed in 0..200u64 {
        let mut g = rng::seeded(2000 + seed);
        let r = g.random_range(1..=4);
        let k = g.random_range(1..=4);
        let w = gaussian(&mut g, 30, r)
            .matmul(&gaussian(&mut g, r, 30))
            .unwrap();
        let ap = gaussian(&mut g, 30, k)
            .matmul(&gaussian(&mut g, k, 30))
            .unwrap();
        let ours = hadamard_rank_check(&w, &ap).unwrap();
        let oracle = oracle_rank(&w.hadamard(&ap).unwrap(), 1e-9);
        if ours > r * k || oracle > r * k {
            violations += 1;
        }
    }
    Outcome::new(
        violations == 0,
        format!("{violations} violations in 200 instances"),
    )
}

fn dominance(instances: &[Instance]) -> Outcome {
    let mut exceeded = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let (a, w, k) = (&inst.a, &inst.w, inst.k);
        let ours = weighted_loss(a, w, &svd_w(a, w, inst.r, k, LraMethod::Exact).unwrap()).unwrap();
        let seed = idx as u64;
        let mut others = vec![
            ("em", *em_wlra(a, w, k, 25, None).unwrap().1.last().unwrap()),
            ("greedy", *greedy_wlra(a, w, k).unwrap().1.last().unwrap()),
            (
                "adam",
                *factored_gd_wlra(a, w, k, &AdamConfig::default(), seed)
                    .unwrap()
                    .1
                    .last()
                    .unwrap(),
            ),
            (
                "svd",
                weighted_loss(a, w, &plain_svd_baseline(a, k).unwrap()).unwrap(),
            ),
            (
                "sample",
                weighted_loss(
                    a,
                    w,
                    &sample_wlra(a, w, k, a.rows(), seed).unwrap().truncated,
                )
                .unwrap(),
            ),
        ];
        let css = css_wlra(a, w, inst.r, k, 0.1, CssSelection::PivotedQr).unwrap();
        others.push(("css", weighted_loss(a, w, &css).unwrap()));
        for (name, loss) in others {
            if ours > loss + 1e-9 * loss.max(1.0) {
                exceeded.push(format!("{name}@{idx}"));
            }
        }
    }
    Outcome::new(
        exceeded.is_empty(),
        if exceeded.is_empty() {
            "svd_w never exceeded em, greedy, adam, svd, sample, css".to_string()
        } else {
            format!("exceeded: {}", exceeded.join(", "))
        },
    )
}

fn families(n: usize) -> Vec<(&'static str, WeightFamily)> {
    let third = n / 3;
    vec![
        (
            "sparse",
            WeightFamily::LowRankPlusSparse {
                n,
                d: n,
                per_row: 3,
                seed: 7,
            },
        ),
        ("diagonal", WeightFamily::LowRankPlusDiagonal { n }),
        (
            "block-diagonal",
            WeightFamily::LowRankPlusBlockDiagonal {
                n,
                block_sizes: vec![third, third, third],
            },
        ),
        (
            "monotone",
            WeightFamily::MonotoneMissing {
                d: n,
                prefix_lengths: (0..n).map(|i| n - i / 2).collect(),
            },
        ),
        ("banded", WeightFamily::Banded { n, half_width: 2 }),
    ]
}

fn apply_ops(w: &Structured<f64>, k: usize, seed: u64) -> u64 {
    let mut g = rng::seeded(seed);
    let (n, d) = w.shape();
    let f = LowRank::new(gaussian(&mut g, n, k), gaussian(&mut g, k, d)).unwrap();
    let x: Vec<f64> = (0..d).map(|_| rng::normal(&mut g)).collect();
    inverse_weight_apply_vector(w, &f, &x)
        .unwrap()
        .1
        .multiply_adds
}

fn structured_inverse() -> Outcome {
    let mut worst_err = 0.0f64;
    let mut worst_ratio = 1.0f64;
    for (name, fam) in families(20) {
        let w = make_family::<f64>(&fam).unwrap();
        let dense = w.to_dense();
        let mut g = rng::seeded(4000);
        for _ in 0..100 {
            let k = g.random_range(1..=4);
            let f = LowRank::new(gaussian(&mut g, 20, k), gaussian(&mut g, k, 20)).unwrap();
            let x: Vec<f64> = (0..20).map(|_| rng::normal(&mut g)).collect();
            let (y, _) = inverse_weight_apply_vector(&w, &f, &x).unwrap();
            let fd = f.to_dense();
            let quotient = Matrix::from_fn(20, 20, |i, j| {
                let v = dense[(i, j)];
                if v == 0.0 {
                    0.0
                } else {
                    fd[(i, j)] / v
                }
            });
            let oracle = to_na(&quotient) * nalgebra::DVector::from_column_slice(&x);
            for (a, b) in y.iter().zip(oracle.iter()) {
                worst_err = worst_err.max((a - b).abs());
            }
        }
        let small =
            make_family::<f64>(&families(20).into_iter().find(|f| f.0 == name).unwrap().1).unwrap();
        let large = make_family::<f64>(&families(200).into_iter().find(|f| f.0 == name).unwrap().1)
            .unwrap();
        let k = 3;
        let per_small = apply_ops(&small, k, 1) as f64 / small.structure_size() as f64;
        let per_large = apply_ops(&large, k, 1) as f64 / large.structure_size() as f64;
        worst_ratio = worst_ratio.max(per_small.max(per_large) / per_small.min(per_large));
    }
    Outcome::new(
        worst_err <= 1e-10 && worst_ratio <= 2.0,
        format!("max abs error {worst_err:.2e}; per-structure op ratio 20 vs 200 at most {worst_ratio:.3}"),
    )
}

fn zero_opt_recovery() -> Outcome {
    let mut recovered = 0;
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut g = rng::seeded(5000 + seed);
        let r = g.random_range(1..=4);
        let block = g.random_range(2..=60 / r);
        let n = r * block;
        let s = g.random_range(1..=block);
        let k = g.random_range(1..=block.min(4));
        let inst = build_lb_instance(n, r, s, k, seed, OffSupport::Copies).unwrap();
        let sol = svd_w(&inst.a, &inst.w, r, k, LraMethod::Exact).unwrap();
        let loss = weighted_loss(&inst.a, &inst.w, &sol).unwrap();
        worst = worst.max(loss);
        if loss <= 1e-12 && recover_secret(&sol, &inst).ok().as_ref() == Some(&inst.a_dense) {
            recovered += 1;
        }
    }
    Outcome::new(
        recovered == 50,
        format!("{recovered}/50 recovered, worst loss {worst:.2e}"),
    )
}

fn communication_scaling() -> Outcome {
    let (n, d) = (4096, 4);
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        for s in [256, 512] {
            let bits = |s: usize| {
                let a = sparse_column_matrix(n, d, s, seed).unwrap();
                let w = Matrix::filled(n, d, 1.0);
                let sol = css_wlra(&a, &w, 1, 1, 1.0, CssSelection::PivotedQr).unwrap();
                encode_css(&a, &sol, n, d).unwrap().total_bits as f64
            };
            ratios.push(bits(2 * s) / bits(s));
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let inst = build_lb_instance(24, 3, 4, 2, 0, OffSupport::Random { amplitude: 3 }).unwrap();
    let sol = css_wlra(&inst.a, &inst.w, 3, 2, 1.0, CssSelection::PivotedQr).unwrap();
    let lb_bits = encode_css(&inst.a, &sol, 24, 24).unwrap().total_bits;
    let floor = (inst.s * inst.r * inst.k) as u64;
    Outcome::new(
        lo >= 1.8 && hi <= 2.2 && lb_bits >= floor,
        format!("bit ratios in [{lo:.3}, {hi:.3}] over 10 doublings; block instance {lb_bits} ≥ srk = {floor}"),
    )
}

fn sampling_bound() -> Outcome {
    let eps = 0.5;
    let constant = (2.0 * 10f64.sqrt() + 1.0).powi(2);
    let mut ok = 0;
    for seed in 0..50u64 {
        let mut g = rng::seeded(7000 + seed);
        let k = g.random_range(1..=3);
        let r = g.random_range(1..=2);
        let spec = PlantedSpec {
            n: 40,
            d: 30,
            k,
            r,
            noise_sigma: 0.0,
            seed,
        };
        let inst = gen_planted(&spec).unwrap();
        let a = to_na(&inst.a);
        let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
        let proj = (&a * pinv).norm_squared();
        let t = (constant * proj / (eps * eps)).ceil() as usize;
        let res = sample_wlra(&inst.a, &inst.w, k, t, seed).unwrap();
        let loss = weighted_loss(&inst.a, &inst.w, &res.approx).unwrap();
        if loss <= eps * inst.a.frobenius_sq() {
            ok += 1;
        }
    }
    Outcome::new(ok >= 45, format!("{ok}/50 within ε‖A‖²_F"))
}

fn monotone(trace: &[f64]) -> bool {
    trace
        .windows(2)
        .all(|p| p[1] <= p[0] + 1e-9 * p[0].max(1.0))
}

fn monotonicity() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..50u64 {
        let mut g = rng::seeded(8000 + seed);
        let n = g.random_range(10..=40);
        let d = g.random_range(10..=40);
        let k = g.random_range(1..=5);
        let w = Matrix::from_fn(n, d, |_, _| rng::uniform(&mut g, 0.0, 2.0));
        let a = gaussian(&mut g, n, d);
        if !monotone(&em_wlra(&a, &w, k, 25, None).unwrap().1) {
            bad.push(format!("em@{seed}"));
        }
        if !monotone(&greedy_wlra(&a, &w, k).unwrap().1) {
            bad.push(format!("greedy@{seed}"));
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            "em and greedy traces non-increasing on 50 instances".to_string()
        } else {
            format!("increases: {}", bad.join(", "))
        },
    )
}

fn mixture_ordering() -> Outcome {
    let cfg = SuiteConfig::default();
    let trials = 5u64;
    let mut sums = vec![[0.0f64; 3]; 21];
    for seed in 0..trials {
        let inst = gen_mog(&MogSpec {
            n: 1000,
            d: 50,
            k: 5,
            r: 3,
            seed,
        })
        .unwrap();
        for (rank, sum) in sums.iter_mut().enumerate().skip(1) {
            let kinds: &[SolverKind] = if rank == 20 {
                &[SolverKind::SvdW, SolverKind::Svd, SolverKind::SvdWThenEm]
            } else {
                &[SolverKind::SvdW, SolverKind::Svd]
            };
            for (slot, &kind) in kinds.iter().enumerate() {
                sum[slot] += run_solver(kind, &inst.a, &inst.w, rank, seed, &cfg)
                    .unwrap()
                    .loss;
            }
        }
    }
    let mean = |rank: usize, slot: usize| sums[rank][slot] / trials as f64;
    let losing: Vec<usize> = (1..=20).filter(|&r| mean(r, 0) >= mean(r, 1)).collect();
    let refined = mean(20, 2) <= mean(20, 0);
    Outcome::new(
        losing.is_empty() && refined,
        format!(
            "svd_w < svd at {}/20 ranks; rank 20 means: svd_w {:.3e}, svd {:.3e}, svd_w_then_em {:.3e} ({})",
            20 - losing.len(),
            mean(20, 0),
            mean(20, 1),
            mean(20, 2),
            if refined { "refinement holds" } else { "refinement does not hold" }
        ),
    )
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let mut g = rng::seeded(10_000 + seed);
        let a = gaussian(&mut g, 6, 5);
        let w = Matrix::from_fn(6, 5, |_, _| rng::uniform(&mut g, 0.0, 2.0));
        let u = gaussian(&mut g, 6, 2);
        let v = gaussian(&mut g, 2, 5);
        let (_, gu, gv) = factored_gradients(&a, &w, &u, &v).unwrap();
        let loss = |u: &Matrix<f64>, v: &Matrix<f64>| {
            let b = u.matmul(v).unwrap();
            w.hadamard(&a.sub(&b).unwrap()).unwrap().frobenius_sq()
        };
        let mut diff = 0.0;
        let mut norm = 0.0;
        for idx in 0..u.as_slice().len() {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up.as_mut_slice()[idx] += h;
            dn.as_mut_slice()[idx] -= h;
            let fd = (loss(&up, &v) - loss(&dn, &v)) / (2.0 * h);
            diff += (fd - gu.as_slice()[idx]).powi(2);
            norm += gu.as_slice()[idx].powi(2);
        }
        for idx in 0..v.as_slice().len() {
            let (mut up, mut dn) = (v.clone(), v.clone());
            up.as_mut_slice()[idx] += h;
            dn.as_mut_slice()[idx] -= h;
            let fd = (loss(&u, &up) - loss(&u, &dn)) / (2.0 * h);
            diff += (fd - gv.as_slice()[idx]).powi(2);
            norm += gv.as_slice()[idx].powi(2);
        }
        worst = worst.max((diff / norm).sqrt());
    }
    Outcome::new(
        worst <= 1e-4,
        format!("worst relative gradient error {worst:.2e}"),
    )
}

fn mixture_weight_rank() -> Outcome {
    let mut violations = 0;
    for seed in 0..50u64 {
        let mut g = rng::seeded(11_000 + seed);
        let r = g.random_range(1..=4);
        let spec = MogSpec {
            n: g.random_range(20..=200),
            d: g.random_range(r..=60),
            k: g.random_range(1..=6),
            r,
            seed,
        };
        let inst = gen_mog(&spec).unwrap();
        if oracle_rank(&inst.w, 1e-9) > spec.k * spec.r {
            violations += 1;
        }
    }
    Outcome::new(
        violations == 0,
        format!("{violations} violations in 50 specs"),
    )
}

type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let instances = identity_instances();
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "loss identity",
            Duration::from_secs(30),
            Box::new(|| loss_identity(&instances)),
        ),
        (
            "hadamard rank bound",
            Duration::from_secs(30),
            Box::new(hadamard_rank_bound),
        ),
        (
            "optimality dominance",
            Duration::from_secs(600),
            Box::new(|| dominance(&instances)),
        ),
        (
            "structured inverse",
            Duration::from_secs(60),
            Box::new(structured_inverse),
        ),
        (
            "zero-opt recovery",
            Duration::from_secs(60),
            Box::new(zero_opt_recovery),
        ),
        (
            "communication scaling",
            Duration::from_secs(60),
            Box::new(communication_scaling),
        ),
        (
            "row-norm sampling bound",
            Duration::from_secs(120),
            Box::new(sampling_bound),
        ),
        (
            "em/greedy monotonicity",
            Duration::from_secs(120),
            Box::new(monotonicity),
        ),
        (
            "mixture ordering",
            Duration::from_secs(600),
            Box::new(mixture_ordering),
        ),
        (
            "gradient correctness",
            Duration::from_secs(10),
            Box::new(gradient_check),
        ),
        (
            "mixture weight rank",
            Duration::from_secs(30),
            Box::new(mixture_weight_rank),
        ),
    ];
    let mut failures = 0;
    let mut out = std::io::stdout().lock();
    for (idx, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        if !pass {
            failures += 1;
        }
        writeln!(
            out,
            "{} criterion {:>2} {:<24} {:>8.2}s (limit {}s)  {}",
            if pass { "PASS" } else { "FAIL" },
            idx + 1,
            name,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        )
        .unwrap();
        out.flush().unwrap();
    }
    writeln!(
        out,
        "acceptance: {} passed, {} failed",
        criteria.len() - failures,
        failures
    )
    .unwrap();
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
