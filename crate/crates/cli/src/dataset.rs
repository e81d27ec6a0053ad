use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value;
use wlra::data::{gen_mog, gen_planted, read_matrix, MatrixFormat, MogSpec, PlantedSpec};
use wlra::linalg::Matrix;
use wlra::weights::WeightMatrix;

use crate::{usage, CliResult};

pub const SIDECAR: &str = "instance.json";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spec {
    Mog(MogSpec),
    Planted(PlantedSpec),
}

impl Spec {
    pub fn kind(&self) -> &'static str {
        match self {
            Spec::Mog(_) => "mog",
            Spec::Planted(_) => "planted",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Spec::Mog(s) => s.seed,
            Spec::Planted(s) => s.seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Spec {
        match self {
            Spec::Mog(s) => Spec::Mog(MogSpec { seed, ..s }),
            Spec::Planted(s) => Spec::Planted(PlantedSpec { seed, ..s }),
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Spec::Mog(s) => serde_json::to_value(s),
            Spec::Planted(s) => serde_json::to_value(s),
        }
        .expect("specs serialize")
    }

    pub fn from_json(kind: &str, spec: &Value) -> anyhow::Result<Spec> {
        Ok(match kind {
            "mog" => Spec::Mog(serde_json::from_value(spec.clone())?),
            "planted" => Spec::Planted(serde_json::from_value(spec.clone())?),
            other => anyhow::bail!("unknown instance kind '{other}'"),
        })
    }
}

/// Parsed `key=value` list; `out` is split off.
pub struct KeyValues {
    pub spec: Spec,
    pub out: Option<PathBuf>,
}

fn parse_pairs(items: &[String]) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in items {
        let Some((key, value)) = item.split_once('=') else {
            return usage(format!("expected KEY=VALUE, got '{item}'"));
        };
        if map
            .insert(key.trim().to_string(), value.trim().to_string())
            .is_some()
        {
            return usage(format!("key '{key}' given twice"));
        }
    }
    Ok(map)
}

fn take<T: std::str::FromStr>(
    map: &mut BTreeMap<String, String>,
    key: &str,
    default: Option<T>,
) -> CliResult<T> {
    match map.remove(key) {
        Some(v) => match v.parse() {
            Ok(x) => Ok(x),
            Err(_) => usage(format!("invalid value '{v}' for {key}")),
        },
        None => match default {
            Some(d) => Ok(d),
            None => usage(format!("missing required key {key}")),
        },
    }
}

pub fn parse_mog(items: &[String]) -> CliResult<KeyValues> {
    let mut map = parse_pairs(items)?;
    let spec = MogSpec {
        n: take(&mut map, "n", None)?,
        d: take(&mut map, "d", None)?,
        k: take(&mut map, "k", None)?,
        r: take(&mut map, "r", None)?,
        seed: take(&mut map, "seed", Some(0))?,
    };
    finish(map, Spec::Mog(spec), "n, d, k, r, seed, out")
}

pub fn parse_planted(items: &[String]) -> CliResult<KeyValues> {
    let mut map = parse_pairs(items)?;
    let spec = PlantedSpec {
        n: take(&mut map, "n", None)?,
        d: take(&mut map, "d", None)?,
        k: take(&mut map, "k", None)?,
        r: take(&mut map, "r", Some(1))?,
        noise_sigma: take(&mut map, "noise", Some(0.0))?,
        seed: take(&mut map, "seed", Some(0))?,
    };
    finish(map, Spec::Planted(spec), "n, d, k, r, noise, seed, out")
}

fn finish(mut map: BTreeMap<String, String>, spec: Spec, valid: &str) -> CliResult<KeyValues> {
    let out = map.remove("out").map(PathBuf::from);
    if let Some(key) = map.keys().next() {
        return usage(format!(
            "unknown key '{key}' for --{} (valid keys: {valid})",
            spec.kind()
        ));
    }
    let valid_spec = match &spec {
        Spec::Mog(s) => s.validate(),
        Spec::Planted(s) => s.validate(),
    };
    if let Err(e) = valid_spec {
        return usage(e.to_string());
    }
    Ok(KeyValues { spec, out })
}

/// A dense instance ready for the solvers.
pub struct Instance {
    pub a: Matrix<f64>,
    pub w: Matrix<f64>,
    /// Extra matrices written next to `A` and `W`.
    pub extras: Vec<(&'static str, Matrix<f64>)>,
}

pub fn build(spec: &Spec) -> anyhow::Result<Instance> {
    Ok(match spec {
        Spec::Mog(s) => {
            let inst = gen_mog(s)?;
            let labels = Matrix::from_vec(s.n, 1, inst.labels.iter().map(|&c| c as f64).collect())?;
            Instance {
                a: inst.a,
                w: inst.w,
                extras: vec![("labels", labels)],
            }
        }
        Spec::Planted(s) => {
            let inst = gen_planted(s)?;
            Instance {
                a: inst.a,
                w: inst.w.to_dense(),
                extras: vec![("A_true", inst.a_true.to_dense())],
            }
        }
    })
}

fn locate(
    dir: &Path,
    stem: &str,
    format: Option<MatrixFormat>,
) -> anyhow::Result<(PathBuf, MatrixFormat)> {
    let candidates = match format {
        Some(f) => vec![f],
        None => vec![MatrixFormat::Csv, MatrixFormat::Binary],
    };
    for f in candidates {
        let path = dir.join(format!("{stem}.{}", f.extension()));
        if path.exists() {
            return Ok((path, f));
        }
    }
    anyhow::bail!("no {stem}.csv or {stem}.bin in {}", dir.display())
}

/// Reads `A` and `W` from a directory, plus the generator spec when a
/// sidecar is present.
pub fn load_dir(
    dir: &Path,
    format: Option<MatrixFormat>,
) -> anyhow::Result<(Instance, Option<Spec>)> {
    let (a_path, a_fmt) = locate(dir, "A", format)?;
    let (w_path, w_fmt) = locate(dir, "W", format)?;
    let a = read_matrix(&a_path, a_fmt).with_context(|| format!("reading {}", a_path.display()))?;
    let w = read_matrix(&w_path, w_fmt).with_context(|| format!("reading {}", w_path.display()))?;
    if a.shape() != WeightMatrix::shape(&w) {
        anyhow::bail!("A is {:?} but W is {:?}", a.shape(), w.shape());
    }
    let sidecar = dir.join(SIDECAR);
    let spec = if sidecar.exists() {
        let text = std::fs::read_to_string(&sidecar)
            .with_context(|| format!("reading {}", sidecar.display()))?;
        let v: Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", sidecar.display()))?;
        let kind = v["kind"].as_str().unwrap_or_default();
        Some(
            Spec::from_json(kind, &v["spec"])
                .with_context(|| format!("spec in {}", sidecar.display()))?,
        )
    } else {
        None
    };
    Ok((
        Instance {
            a,
            w,
            extras: Vec::new(),
        },
        spec,
    ))
}
