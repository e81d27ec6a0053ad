use std::fmt::Write as _;
use std::fs;

use anyhow::Context;
use rayon::prelude::*;
use wlra::solvers::{run_solver, AdamConfig, SolverKind, SuiteConfig};

use crate::dataset::{self, Instance, Spec};
use crate::report::{results_csv, summarize, Row};
use crate::{usage, CliResult, RunArgs};

/// `a..b` (inclusive) or a comma list; must be positive and strictly ascending.
pub fn parse_ranks(text: &str) -> CliResult<Vec<usize>> {
    let bad = || usage::<Vec<usize>>(format!("invalid rank list '{text}'; use 1..20 or 5,10,20"));
    let ranks: Vec<usize> = if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        match (lo.trim().parse::<usize>(), hi.trim().parse::<usize>()) {
            (Ok(lo), Ok(hi)) if lo <= hi => (lo..=hi).collect(),
            _ => return bad(),
        }
    } else {
        match text
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<usize>, _>>()
        {
            Ok(v) => v,
            Err(_) => return bad(),
        }
    };
    if ranks.is_empty() || ranks[0] == 0 || ranks.windows(2).any(|w| w[0] >= w[1]) {
        return usage(format!(
            "ranks must be positive and strictly ascending, got '{text}'"
        ));
    }
    Ok(ranks)
}

struct Source {
    name: String,
    spec: Option<Spec>,
    fixed: Option<Instance>,
}

fn resolve_source(args: &RunArgs) -> CliResult<Source> {
    match (&args.data, &args.mog, &args.planted) {
        (Some(dir), None, None) => {
            let (inst, spec) = dataset::load_dir(dir, args.format)?;
            let name = dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| dir.display().to_string());
            Ok(Source {
                name,
                spec,
                fixed: Some(inst),
            })
        }
        (None, Some(items), None) => {
            let kv = dataset::parse_mog(items)?;
            Ok(Source {
                name: "mog".into(),
                spec: Some(kv.spec),
                fixed: None,
            })
        }
        (None, None, Some(items)) => {
            let kv = dataset::parse_planted(items)?;
            Ok(Source {
                name: "planted".into(),
                spec: Some(kv.spec),
                fixed: None,
            })
        }
        _ => usage("pass exactly one of --data, --mog or --planted"),
    }
}

pub fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let ranks = parse_ranks(&args.ranks)?;
    if args.trials == 0 {
        return usage("--trials must be at least 1");
    }
    if args.solvers.is_empty() {
        return usage(format!(
            "no solvers given; valid solvers: {}",
            SolverKind::valid_names()
        ));
    }
    let source = resolve_source(args)?;
    let cfg = SuiteConfig {
        weight_rank: args.weight_rank,
        em_iters: args.em_iters,
        adam: AdamConfig {
            epochs: args.epochs,
            ..AdamConfig::default()
        },
        sample_t: args.sample_t,
        css_eps: args.css_eps,
        ..SuiteConfig::default()
    };

    // (trial, instance seed) pairs; trials vary the solver seed by default
    let instances: Vec<(u64, Instance)> = if args.instance_trials {
        let Some(spec) = source.spec else {
            return usage(
                "--instance-trials needs a generator spec (--mog, --planted or a sidecar)",
            );
        };
        (0..args.trials)
            .map(|t| {
                let seed = spec.seed() + t as u64;
                dataset::build(&spec.with_seed(seed)).map(|inst| (seed, inst))
            })
            .collect::<anyhow::Result<_>>()?
    } else {
        let inst = match source.fixed {
            Some(inst) => inst,
            None => dataset::build(&source.spec.expect("inline spec"))?,
        };
        vec![(0, inst)]
    };
    let (n, d) = instances[0].1.a.shape();
    if let Some(&bad) = ranks.iter().find(|&&k| k > n.min(d)) {
        return usage(format!(
            "rank {bad} exceeds min(n, d) = {} for a {n}x{d} instance",
            n.min(d)
        ));
    }

    let mut jobs = Vec::new();
    for &solver in &args.solvers {
        for &rank in &ranks {
            for trial in 0..args.trials {
                jobs.push((solver, rank, trial));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("starting worker pool")?;
    let results: Vec<anyhow::Result<Row>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(solver, rank, trial)| {
                let (seed, inst) = if args.instance_trials {
                    let (seed, inst) = &instances[trial];
                    (*seed, inst)
                } else {
                    (args.seed + trial as u64, &instances[0].1)
                };
                let solver_seed = if args.instance_trials {
                    args.seed
                } else {
                    seed
                };
                let report = run_solver(solver, &inst.a, &inst.w, rank, solver_seed, &cfg)
                    .with_context(|| format!("{solver} at rank {rank}, trial {trial}"))?;
                Ok(Row {
                    dataset: source.name.clone(),
                    solver: report.solver_name,
                    rank,
                    trial,
                    seed,
                    loss: report.loss,
                    seconds: report.seconds,
                    iterations: report.iterations,
                    params: report.params,
                })
            })
            .collect()
    });
    let mut rows = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.solver, a.rank, a.trial).cmp(&(&b.solver, b.rank, b.trial)));

    let csv = results_csv(&rows);
    if args.out == "-" {
        print!("{csv}");
    } else {
        fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out))?;
        eprintln!("wrote {} rows to {}", rows.len(), args.out);
    }
    if let Some(path) = &args.gnuplot {
        fs::write(path, gnuplot_script(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Self-contained script with the per-rank means inlined.
pub fn gnuplot_script(rows: &[Row]) -> String {
    let summaries = summarize(rows);
    let mut solvers: Vec<&str> = summaries.iter().map(|s| s.solver.as_str()).collect();
    solvers.dedup();
    let mut out = String::from(
        "set logscale y\nset xlabel \"rank\"\nset ylabel \"mean weighted loss\"\nset key outside right\n",
    );
    for (idx, solver) in solvers.iter().enumerate() {
        let _ = writeln!(out, "$s{idx} << EOD");
        for s in summaries.iter().filter(|s| s.solver == *solver) {
            let _ = writeln!(out, "{} {:e}", s.rank, s.mean_loss);
        }
        out.push_str("EOD\n");
    }
    let plots: Vec<String> = solvers
        .iter()
        .enumerate()
        .map(|(idx, solver)| format!("$s{idx} with linespoints title \"{solver}\""))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_lists() {
        assert_eq!(parse_ranks("1..4").ok(), Some(vec![1, 2, 3, 4]));
        assert_eq!(parse_ranks("1..=2").ok(), Some(vec![1, 2]));
        assert_eq!(parse_ranks("5,10,20").ok(), Some(vec![5, 10, 20]));
        assert!(parse_ranks("0..3").is_err());
        assert!(parse_ranks("3,2").is_err());
        assert!(parse_ranks("a").is_err());
    }

    #[test]
    fn gnuplot_has_one_block_per_solver() {
        let row = |solver: &str, rank| Row {
            dataset: "d".into(),
            solver: solver.into(),
            rank,
            trial: 0,
            seed: 0,
            loss: 1.0,
            seconds: 0.0,
            iterations: 1,
            params: 1,
        };
        let script = gnuplot_script(&[row("svd", 1), row("svd", 2), row("svd_w", 1)]);
        assert_eq!(script.matches("EOD\n").count(), 4);
        assert!(script.contains("title \"svd_w\""));
    }
}
