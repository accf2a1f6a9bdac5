use std::fs;
use std::io::{self, Write};

use anyhow::{Context, Result};
use qswap::criteria::{self, CriterionResult};
use qswap::report;

use crate::scenario::Scenario;
use crate::{Format, Knobs, Output, Source, Which};

/// Destination for one output document: a file under `--out` or standard output.
pub fn emit(output: &Output, file: &str, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn criteria_bytes(results: &[CriterionResult<f64>], format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            report::write_criteria(&mut buf, results)?;
            buf
        }
        Format::Json => {
            let mut s = report::criteria_json(results);
            s.push('\n');
            s.into_bytes()
        }
    })
}

pub fn run(source: &Source, knobs: &Knobs, output: &Output) -> Result<()> {
    let scenario = Scenario::load(source, knobs)?;
    let set = scenario.traces()?;
    let checks = knobs.oracle.map(|n| scenario.oracle(&set, n, knobs.seed)).transpose()?;
    let mut traces = Vec::new();
    report::write_traces(&mut traces, &set, checks.as_deref().zip(knobs.oracle))?;

    let results = match &scenario {
        Scenario::Config(spec) if spec.duan_pairs.is_none() => Vec::new(),
        _ => scenario.duan(false)?,
    };
    let crit = criteria_bytes(&results, Format::Csv)?;
    if output.out.is_some() {
        emit(output, "traces.csv", &traces)?;
        emit(output, "criteria.csv", &crit)?;
        emit(output, "traces.json", format!("{}\n", report::traces_json(&set)).as_bytes())
    } else {
        traces.push(b'\n');
        traces.extend(crit);
        emit(output, "", &traces)
    }
}

pub fn criteria(which: Which, optimize_gain: bool, format: Format, source: &Source, knobs: &Knobs, output: &Output) -> Result<()> {
    let scenario = Scenario::load(source, knobs)?;
    let mut results = Vec::new();
    if matches!(which, Which::Duan | Which::All) {
        results.extend(scenario.duan(optimize_gain)?);
    }
    if matches!(which, Which::Ppt | Which::Vlf | Which::All) {
        let state = scenario.entangled_state()?;
        state.ensure_physical()?;
        if matches!(which, Which::Ppt | Which::All) {
            let summary = criteria::ppt_all_bipartitions(&state)?;
            results.extend(summary.results);
        }
        if matches!(which, Which::Vlf | Which::All) {
            results.extend(criteria::vlf_all_bipartitions(&state)?);
        }
    }
    let file = match format {
        Format::Csv => "criteria.csv",
        Format::Json => "criteria.json",
    };
    emit(output, file, &criteria_bytes(&results, format)?)
}

pub fn oracle(source: &Source, knobs: &Knobs, output: &Output) -> Result<()> {
    let scenario = Scenario::load(source, knobs)?;
    let set = scenario.traces()?;
    let n = knobs.oracle.unwrap_or(1_000_000);
    let checks = scenario.oracle(&set, n, knobs.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "trace", "analytic", "empirical", "std_err", "z", "n", "seed"])?;
    for (t, c) in set.traces().iter().zip(&checks) {
        w.write_record([
            scenario.name(),
            t.name.clone(),
            c.analytic.to_string(),
            c.empirical.to_string(),
            c.std_err.to_string(),
            c.z_score().to_string(),
            n.to_string(),
            knobs.seed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().context("flushing oracle table")?;
    emit(output, "oracle.csv", &bytes)
}
