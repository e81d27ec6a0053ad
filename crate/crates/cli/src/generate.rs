use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;
use wlra::data::write_matrix;
use wlra::rng::GENERATOR_NAME;

use crate::dataset::{self, SIDECAR};
use crate::{usage, CliResult, GenerateArgs};

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let parsed = match (&args.source.mog, &args.source.planted) {
        (Some(items), None) => dataset::parse_mog(items)?,
        (None, Some(items)) => dataset::parse_planted(items)?,
        _ => return usage("pass exactly one of --mog or --planted"),
    };
    let out = args
        .out
        .clone()
        .or(parsed.out)
        .unwrap_or_else(|| PathBuf::from("."));
    let inst = dataset::build(&parsed.spec)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let ext = args.format.extension();
    let mut files = Vec::new();
    let matrices = [("A", &inst.a), ("W", &inst.w)]
        .into_iter()
        .chain(inst.extras.iter().map(|(name, m)| (*name, m)));
    for (name, m) in matrices {
        let file = format!("{name}.{ext}");
        let path = out.join(&file);
        write_matrix(&path, m, args.format)
            .with_context(|| format!("writing {}", path.display()))?;
        files.push(file);
    }
    let sidecar = json!({
        "kind": parsed.spec.kind(),
        "spec": parsed.spec.to_json(),
        "seed": parsed.spec.seed(),
        "generator": GENERATOR_NAME,
        "format": ext,
        "files": files,
    });
    let path = out.join(SIDECAR);
    let text = serde_json::to_string_pretty(&sidecar).context("serializing sidecar")? + "\n";
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} and {SIDECAR} to {}",
        files.join(", "),
        out.display()
    );
    Ok(())
}
