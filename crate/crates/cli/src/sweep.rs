use anyhow::{bail, Context, Result};

use crate::commands::emit;
use crate::scenario::Scenario;
use crate::{Knobs, Output, Source, SweepParam};

const BOUND: f64 = 2.0;
const BARS: [char; 8] = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        bail!(qswap::Error::Config("empty sweep range".into()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let step = (to - from) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { to } else { from + step * i as f64 }).collect())
}

/// First grid interval where `values − bound` changes sign, with the linear
/// interpolation of the crossing.
pub fn crossing(xs: &[f64], values: &[f64], bound: f64) -> Option<(f64, f64, f64)> {
    xs.windows(2).zip(values.windows(2)).find_map(|(x, v)| {
        let (a, b) = (v[0] - bound, v[1] - bound);
        if a == 0.0 {
            return Some((x[0], x[1], x[0]));
        }
        (a * b < 0.0 || b == 0.0).then(|| (x[0], x[1], x[0] + (x[1] - x[0]) * a / (a - b)))
    })
}

pub fn sparkline(values: &[f64]) -> String {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    values
        .iter()
        .map(|&v| {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            BARS[((t * (BARS.len() - 1) as f64).round() as usize).min(BARS.len() - 1)]
        })
        .collect()
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::Squeezing => "squeezing_db",
        SweepParam::Gain => "gain",
        SweepParam::Visibility => "visibility",
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    optimize_gain: bool,
    source: &Source,
    knobs: &Knobs,
    output: &Output,
) -> Result<()> {
    let xs = grid(from, to, steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["param", "value", "duan", "v_x", "v_y", "verdict"])?;
    let mut values = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut k = knobs.clone();
        match param {
            SweepParam::Squeezing => k.squeezing_db = Some(x),
            SweepParam::Gain => {
                k.gain_x = Some(x);
                k.gain_y = Some(x);
            }
            SweepParam::Visibility => k.visibility = Some(x),
        }
        let scenario = Scenario::load(source, &k)?;
        let r = scenario.duan(optimize_gain)?.into_iter().next().context("scenario yields no inseparability sum")?;
        values.push(r.value);
        w.write_record([
            param_name(param).to_string(),
            x.to_string(),
            r.value.to_string(),
            r.components[0].to_string(),
            r.components[1].to_string(),
            r.verdict.to_string(),
        ])?;
    }
    let csv = w.into_inner().context("flushing sweep table")?;

    let mut summary = format!("{} {}\n", param_name(param), sparkline(&values));
    match crossing(&xs, &values, BOUND) {
        Some((a, b, at)) => summary.push_str(&format!("crossing of {BOUND} between {a} and {b}, interpolated at {at}\n")),
        None => summary.push_str(&format!("no crossing of {BOUND}\n")),
    }
    if output.out.is_some() {
        emit(output, "sweep.csv", &csv)?;
        emit(output, "sweep.txt", summary.as_bytes())
    } else {
        eprint!("{summary}");
        emit(output, "", &csv)
    }
}
