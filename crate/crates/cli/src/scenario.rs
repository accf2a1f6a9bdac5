use std::fs;

use anyhow::{bail, Context, Result};
use qswap::criteria::{self, CriterionResult, Pairing};
use qswap::detection::DbmAnchor;
use qswap::oracle::{self, OracleCheck};
use qswap::scalar::from_db;
use qswap::scenarios::{
    classical_baseline, run_trace_set, swap_with_feedforward, ElementSpec, ExperimentSpec, GainChoice, Preset, PresetParams,
    SwapSetup,
};
use qswap::{BrightState64, TraceSet64};

use crate::{Knobs, Source};

/// A preset with its parameters, or a parsed configuration with overrides applied.
#[derive(Debug, Clone)]
pub enum Scenario {
    Preset { preset: Preset, params: PresetParams<f64> },
    Config(ExperimentSpec),
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() {
        bail!(qswap::Error::Config(format!("--{name} must be finite")));
    }
    Ok(v)
}

/// `(s, h)` from the squeezing flags, if either is given.
fn noise_factors(knobs: &Knobs, default_s: f64) -> Result<Option<(f64, f64)>> {
    let s = match knobs.squeezing_db {
        Some(db) if finite("squeezing-db", db)? < 0.0 => {
            bail!(qswap::Error::Config(format!("--squeezing-db is the squeezing below shot noise and must be ≥ 0, got {db}")))
        }
        Some(db) => Some(from_db(-db)),
        None => None,
    };
    let h = knobs.excess_db.map(|db| finite("excess-db", db).map(from_db)).transpose()?;
    Ok(match (s, h) {
        (None, None) => None,
        (Some(s), None) => Some((s, 1.0 / s)),
        (s, Some(h)) => Some((s.unwrap_or(default_s), h)),
    })
}

impl Scenario {
    pub fn load(source: &Source, knobs: &Knobs) -> Result<Self> {
        match (&source.preset, &source.config) {
            (Some(name), None) => {
                let preset: Preset = name.parse()?;
                let mut params = preset.default_params::<f64>();
                if let Some((s, h)) = noise_factors(knobs, params.squeezing_one)? {
                    params = params.with_squeezing(s, h);
                }
                if let Some(v) = knobs.visibility {
                    params.visibility = finite("visibility", v)?;
                }
                if let Some(g) = knobs.gain_x {
                    params.gain_x = finite("gain-x", g)?;
                }
                if let Some(g) = knobs.gain_y {
                    params.gain_y = finite("gain-y", g)?;
                }
                params.elec_noise_db = knobs.elec_noise_db;
                params.shot_dbm = knobs.dbm_anchor;
                Ok(Scenario::Preset { preset, params })
            }
            (None, Some(path)) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let mut spec = ExperimentSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
                let default_s = spec.sources.first().map_or(1.0, |s| s.squeezing);
                if let Some((s, h)) = noise_factors(knobs, default_s)? {
                    for src in &mut spec.sources {
                        src.squeezing = s;
                        src.excess = h;
                    }
                }
                if let Some(v) = knobs.visibility {
                    let v = finite("visibility", v)?;
                    let mut found = false;
                    for el in &mut spec.elements {
                        if let ElementSpec::Visibility { visibility, .. } = el {
                            *visibility = v;
                            found = true;
                        }
                    }
                    if !found {
                        bail!(qswap::Error::Config("--visibility given but the configuration has no visibility element".into()));
                    }
                }
                for ff in &mut spec.feedforward {
                    if let Some(g) = knobs.gain_x {
                        ff.gain_x = finite("gain-x", g)?;
                    }
                    if let Some(g) = knobs.gain_y {
                        ff.gain_y = finite("gain-y", g)?;
                    }
                }
                if knobs.elec_noise_db.is_some() {
                    spec.anchors.elec_noise_db = knobs.elec_noise_db;
                }
                if let Some(dbm) = knobs.dbm_anchor {
                    let reference = 2.0 * spec.sources.first().map_or(1.0, |s| s.power);
                    spec.anchors.dbm = Some(DbmAnchor { reference, dbm });
                }
                Ok(Scenario::Config(spec))
            }
            _ => bail!(qswap::Error::Config("exactly one of --preset and --config is required".into())),
        }
    }

    pub fn traces(&self) -> Result<TraceSet64> {
        Ok(match self {
            Scenario::Preset { preset, params } => run_trace_set(*preset, params)?,
            Scenario::Config(spec) => {
                let run = spec.run()?;
                for w in &run.warnings {
                    eprintln!("warning: {w}");
                }
                run.traces
            }
        })
    }

    /// Monte Carlo check of every trace, each sampled from its own state.
    pub fn oracle(&self, set: &TraceSet64, n: usize, seed: u64) -> Result<Vec<OracleCheck<f64>>> {
        let mut out = Vec::with_capacity(set.traces().len());
        for t in set.traces() {
            out.extend(oracle::check_signals(&t.state, &[&t.signal], n, seed)?);
        }
        Ok(out)
    }

    /// Two-mode inseparability sums at unit criterion gain.
    pub fn duan(&self, optimize_gain: bool) -> Result<Vec<CriterionResult<f64>>> {
        match self {
            Scenario::Preset { preset, params } => {
                let setup = SwapSetup::new(&params.swap_params())?;
                if *preset == Preset::Fig4 {
                    return Ok(vec![
                        criteria::duan_sum(&setup.source_one.state, 0, 1, 1.0, Pairing::PlusMinus)?,
                        criteria::duan_sum(&setup.source_two.state, 0, 1, 1.0, Pairing::PlusMinus)?,
                    ]);
                }
                let gains = if optimize_gain {
                    GainChoice::Optimize
                } else {
                    GainChoice::Fixed { gain_x: params.gain_x, gain_y: params.gain_y }
                };
                let mut results = vec![swap_with_feedforward(&setup, gains)?.duan];
                if *preset == Preset::Classical {
                    results.push(classical_baseline(&setup)?.result);
                }
                Ok(results)
            }
            Scenario::Config(spec) => {
                let eval = |spec: &ExperimentSpec| -> Result<Vec<CriterionResult<f64>>> {
                    let run = spec.run()?;
                    let pairs = spec.duan_pairs(&run.state)?;
                    if pairs.is_empty() {
                        bail!(qswap::Error::Config("configuration declares no duan_pairs".into()));
                    }
                    pairs
                        .into_iter()
                        .map(|(i, j)| Ok(criteria::duan_sum(&run.state, i, j, 1.0, Pairing::PlusMinus)?))
                        .collect()
                };
                if !optimize_gain || spec.feedforward.is_empty() {
                    return eval(spec);
                }
                let with_gain = |g: f64| {
                    let mut s = spec.clone();
                    for ff in &mut s.feedforward {
                        ff.gain_x = g;
                        ff.gain_y = g;
                    }
                    s
                };
                let g = criteria::golden_section(
                    |g| {
                        let spec = with_gain(g);
                        let run = spec.run()?;
                        let (i, j) = spec.duan_pairs(&run.state)?.first().copied().ok_or(qswap::Error::EmptySelection)?;
                        Ok(criteria::duan_sum(&run.state, i, j, 1.0, Pairing::PlusMinus)?.value)
                    },
                    0.0,
                    2.0,
                    1e-8,
                )?;
                eval(&with_gain(g))
            }
        }
    }

    /// The multimode state examined by the PPT and combination tests.
    pub fn entangled_state(&self) -> Result<BrightState64> {
        Ok(match self {
            Scenario::Preset { preset, params } => {
                let setup = SwapSetup::new(&params.swap_params())?;
                if *preset == Preset::Fig4 { setup.pre_swap } else { setup.state }
            }
            Scenario::Config(spec) => spec.build_state()?.0,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Scenario::Preset { preset, .. } => preset.name().to_string(),
            Scenario::Config(spec) => spec.name.clone(),
        }
    }
}
