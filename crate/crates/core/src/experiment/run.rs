//! Batch runs: one comparison per seed, written to a run directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::generate::generate_instance;
use crate::benchmarks::compare::{statistic_names, statistic_values};
use crate::benchmarks::{compare_methods, Comparison};
use crate::error::{Error, Result};
use crate::milp::{build_dddr, export_lp_text};
use crate::model::ProblemData;
use crate::solvers::Method;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Paths relative to the run directory, in write order.
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

/// Writes via a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

struct Cell {
    seed: u64,
    data: ProblemData,
    comparison: Comparison,
    lp: Option<String>,
}

fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Cell> {
    let (instance, demand) = generate_instance(config, seed)?;
    let comparison = compare_methods(&instance, &demand, &config.compare_options(seed))?;
    let lp = if config.export_lp {
        let bounds = config.dual_bounds.resolve(&instance, &demand)?;
        let f = build_dddr(&instance, &demand, &bounds, config.budget, config.cuts)?;
        Some(export_lp_text(&f.model))
    } else {
        None
    };
    Ok(Cell {
        seed,
        data: ProblemData { instance, demand },
        comparison,
        lp,
    })
}

/// Mean of every statistic across seeds, CSV `method,statistic,value`.
pub fn summary_csv(methods: &[Method], comparisons: &[&Comparison]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["method", "statistic", "value"])?;
    let n = comparisons.len() as f64;
    let per_method: Vec<Vec<f64>> = methods
        .iter()
        .map(|m| {
            let mut acc = vec![0.0; statistic_names().len()];
            for c in comparisons {
                let o = c.outcome(*m).expect("every comparison covers every method");
                for (a, v) in acc.iter_mut().zip(statistic_values(&o.report)) {
                    *a += v;
                }
            }
            acc.into_iter().map(|a| a / n).collect()
        })
        .collect();
    for (k, stat) in statistic_names().iter().enumerate() {
        for (m, vals) in methods.iter().zip(&per_method) {
            w.write_record([m.to_string(), stat.clone(), format!("{}", vals[k])])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Runs the comparison for every seed and writes the artifacts under `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let cells: Vec<Cell> = config
        .seeds
        .par_iter()
        .map(|s| run_seed(config, *s))
        .collect::<Result<_>>()?;
    let mut files = Vec::new();
    let mut put = |rel: String, bytes: &[u8]| -> Result<()> {
        write_atomic(&out.join(&rel), bytes)?;
        files.push(rel);
        Ok(())
    };
    put("config.toml".into(), config.to_toml()?.as_bytes())?;
    for cell in &cells {
        let dir = format!("seed_{}", cell.seed);
        put(format!("{dir}/instance.json"), &to_json(&cell.data)?)?;
        for o in &cell.comparison.outcomes {
            put(
                format!("{dir}/plan_{}.json", o.plan.method),
                &to_json(&o.plan)?,
            )?;
        }
        put(
            format!("{dir}/comparison.csv"),
            cell.comparison.to_csv()?.as_bytes(),
        )?;
        put(
            format!("{dir}/comparison.txt"),
            cell.comparison.to_table().as_bytes(),
        )?;
        if let Some(lp) = &cell.lp {
            put(format!("{dir}/dddr.lp"), lp.as_bytes())?;
        }
    }
    let comps: Vec<&Comparison> = cells.iter().map(|c| &c.comparison).collect();
    put(
        SUMMARY.into(),
        summary_csv(&config.methods, &comps)?.as_bytes(),
    )?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        seeds: config.seeds.clone(),
        files,
        config: config.clone(),
    };
    write_atomic(&out.join(MANIFEST), &to_json(&manifest)?)?;
    Ok(manifest)
}
