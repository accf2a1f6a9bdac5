use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TraceSet;
use crate::detection::{self, direct_tap, mix, DbmAnchor, Signal};
use crate::error::{Error, Result};
use crate::gaussian::{BrightState, SqueezerParams};
use crate::scalar::from_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub label: String,
    pub power: f64,
    /// Amplitude-quadrature variance relative to shot noise.
    pub squeezing: f64,
    /// Phase-quadrature variance relative to shot noise.
    pub excess: f64,
    #[serde(default)]
    pub ellipse_angle: f64,
    #[serde(default)]
    pub carrier_phase: f64,
}

/// Beam-splitter phase: a number in radians or `"auto"` for the balancing phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Value(f64),
    Keyword(String),
}

impl Default for PhaseSpec {
    fn default() -> Self {
        PhaseSpec::Value(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    BeamSplitter {
        j: String,
        k: String,
        transmissivity: f64,
        #[serde(default)]
        phase: PhaseSpec,
        #[serde(default)]
        out_labels: Option<[String; 2]>,
    },
    PhaseShift {
        mode: String,
        phase: f64,
    },
    Loss {
        mode: String,
        efficiency: f64,
    },
    /// Mode-overlap visibility `v` between two beams, applied as transmission `v²` on each.
    Visibility {
        j: String,
        k: String,
        visibility: f64,
    },
    Relabel {
        mode: String,
        label: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixTerm {
    pub signal: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    pub name: String,
    pub terms: Vec<MixTerm>,
    /// Additional electronic noise variance of the combiner.
    #[serde(default)]
    pub elec_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedforwardSpec {
    pub sig_x: String,
    pub sig_y: String,
    pub target: String,
    pub gain_x: f64,
    pub gain_y: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorSpec {
    #[serde(default)]
    pub dbm: Option<DbmAnchor<f64>>,
    /// Electronic noise of every detector, in dB relative to its own shot noise.
    #[serde(default)]
    pub elec_noise_db: Option<f64>,
}

/// A declarative experiment: sources, passive optics, photodetection,
/// electronics and feedforward.
///
/// Taps name modes by label and produce signals of the same name. Signals
/// feeding a feedforward must not depend on its target; taps of a target read
/// the modulated beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub taps: Vec<String>,
    #[serde(default)]
    pub electronics: Vec<MixSpec>,
    #[serde(default)]
    pub feedforward: Vec<FeedforwardSpec>,
    #[serde(default)]
    pub anchors: AnchorSpec,
    /// Signals to report, in order; defaults to every tap and combination.
    #[serde(default)]
    pub traces: Option<Vec<String>>,
    /// Mode pairs for the two-mode inseparability sum.
    #[serde(default)]
    pub duan_pairs: Option<Vec<[String; 2]>>,
}

/// Result of running an [`ExperimentSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    /// State after all optics and feedforward; tapped modes are marked consumed.
    pub state: BrightState<f64>,
    pub signals: BTreeMap<String, Signal<f64>>,
    pub traces: TraceSet<f64>,
    /// Warnings such as unequal powers at a balanced splitter.
    pub warnings: Vec<String>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// The optical state before any detection or feedforward.
    pub fn build_state(&self) -> Result<(BrightState<f64>, Vec<String>)> {
        if self.sources.is_empty() {
            return Err(config_err("no sources"));
        }
        let mut state = BrightState::empty();
        for s in &self.sources {
            let p = SqueezerParams {
                power: s.power,
                squeezing: s.squeezing,
                excess: s.excess,
                ellipse_angle: s.ellipse_angle,
                carrier_phase: s.carrier_phase,
            };
            state = state.tensor(&BrightState::squeezed(s.label.clone(), &p)?)?;
        }
        let mut warnings = Vec::new();
        for el in &self.elements {
            state = match el {
                ElementSpec::BeamSplitter { j, k, transmissivity, phase, out_labels } => {
                    let (jj, kk) = (state.index_of(j)?, state.index_of(k)?);
                    let phi = match phase {
                        PhaseSpec::Value(v) => *v,
                        PhaseSpec::Keyword(w) if w == "auto" => {
                            let (pa, pb) = (state.power(jj) * transmissivity, state.power(kk) * (1.0 - transmissivity));
                            if (pa - pb).abs() > 1e-9 * pa.max(pb) {
                                warnings.push(format!("splitter {j}/{k}: output powers differ ({pa} vs {pb})"));
                            }
                            state.balance_phase(jj, kk, *transmissivity)?
                        }
                        PhaseSpec::Keyword(w) => return Err(config_err(format!("phase must be a number or \"auto\", got \"{w}\""))),
                    };
                    let mut out = state.beamsplitter(jj, kk, *transmissivity, phi)?;
                    if let Some([a, b]) = out_labels {
                        out = match out.relabel(jj, a.clone()) {
                            Ok(o) => o.relabel(kk, b.clone())?,
                            Err(_) => out.relabel(kk, b.clone())?.relabel(jj, a.clone())?,
                        };
                    }
                    out
                }
                ElementSpec::PhaseShift { mode, phase } => state.phase_shift(state.index_of(mode)?, *phase)?,
                ElementSpec::Loss { mode, efficiency } => state.loss(state.index_of(mode)?, *efficiency)?,
                ElementSpec::Visibility { j, k, visibility } => {
                    if !(0.0..=1.0).contains(visibility) {
                        return Err(Error::InvalidParameter(format!("visibility {visibility} outside [0, 1]")));
                    }
                    let eta = visibility * visibility;
                    let (jj, kk) = (state.index_of(j)?, state.index_of(k)?);
                    state.loss(jj, eta)?.loss(kk, eta)?
                }
                ElementSpec::Relabel { mode, label } => state.relabel(state.index_of(mode)?, label.clone())?,
            };
        }
        Ok((state, warnings))
    }

    /// Builds the state, detects, combines, feeds forward and reports every trace.
    pub fn run(&self) -> Result<ExperimentRun> {
        let (mut state, warnings) = self.build_state()?;
        let targets: BTreeSet<usize> =
            self.feedforward.iter().map(|f| state.index_of(&f.target)).collect::<Result<_>>()?;

        let mut tap_modes = BTreeSet::new();
        for t in &self.taps {
            if !tap_modes.insert(state.index_of(t)?) {
                return Err(config_err(format!("mode `{t}` tapped twice")));
            }
        }
        let names: BTreeSet<&str> = self.taps.iter().map(String::as_str).chain(self.electronics.iter().map(|m| m.name.as_str())).collect();
        if names.len() != self.taps.len() + self.electronics.len() {
            return Err(config_err("signal names must be unique"));
        }

        let with_elec = |sig: Signal<f64>| match self.anchors.elec_noise_db {
            Some(db) => sig.with_elec_noise_db(db),
            None => sig,
        };

        // signals that do not read a feedforward target
        let mut signals: BTreeMap<String, Signal<f64>> = BTreeMap::new();
        let mut late: BTreeSet<String> = BTreeSet::new();
        for t in &self.taps {
            let k = state.index_of(t)?;
            if targets.contains(&k) {
                late.insert(t.clone());
            } else {
                signals.insert(t.clone(), with_elec(direct_tap(&state, k)?));
            }
        }
        let mut deferred = Vec::new();
        for m in &self.electronics {
            match self.combine(m, &signals, &late)? {
                Some(sig) => {
                    signals.insert(m.name.clone(), sig);
                }
                None => {
                    late.insert(m.name.clone());
                    deferred.push(m);
                }
            }
        }

        for f in &self.feedforward {
            let get = |name: &str| -> Result<&Signal<f64>> {
                if late.contains(name) {
                    return Err(config_err(format!("feedforward signal `{name}` depends on a feedforward target")));
                }
                signals.get(name).ok_or_else(|| Error::UnknownName(name.to_string()))
            };
            let (sx, sy) = (get(&f.sig_x)?, get(&f.sig_y)?);
            let k = state.index_of(&f.target)?;
            if tap_modes.contains(&k) && (sx.touches(k) || sy.touches(k)) {
                return Err(config_err(format!("feedforward onto `{}` reads its own target", f.target)));
            }
            state = detection::feedforward(&state, sx, sy, k, f.gain_x, f.gain_y)?;
        }

        for t in &self.taps {
            let k = state.index_of(t)?;
            if targets.contains(&k) {
                signals.insert(t.clone(), with_elec(direct_tap(&state, k)?));
            }
        }
        for m in deferred {
            let sig = self.combine(m, &signals, &BTreeSet::new())?.expect("all inputs resolved");
            signals.insert(m.name.clone(), sig);
        }
        let dim = 2 * state.modes();
        for sig in signals.values_mut() {
            if sig.coeffs().len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: sig.coeffs().len() });
            }
        }

        let consumed: BTreeSet<usize> = state.consumed().iter().copied().chain(tap_modes.iter().copied()).collect();
        let state = state.with_consumed(consumed);
        let mut traces = TraceSet::new(self.name.clone());
        let order: Vec<String> = match &self.traces {
            Some(list) => list.clone(),
            None => self.taps.iter().cloned().chain(self.electronics.iter().map(|m| m.name.clone())).collect(),
        };
        for name in order {
            let sig = signals.get(&name).ok_or_else(|| Error::UnknownName(name.clone()))?;
            traces.push(name, &state, sig.clone(), self.anchors.dbm)?;
        }
        Ok(ExperimentRun { state, signals, traces, warnings })
    }

    fn combine(
        &self,
        m: &MixSpec,
        signals: &BTreeMap<String, Signal<f64>>,
        late: &BTreeSet<String>,
    ) -> Result<Option<Signal<f64>>> {
        if m.terms.is_empty() {
            return Err(config_err(format!("combination `{}` has no terms", m.name)));
        }
        let mut refs = Vec::with_capacity(m.terms.len());
        for t in &m.terms {
            if late.contains(&t.signal) {
                return Ok(None);
            }
            refs.push(signals.get(&t.signal).ok_or_else(|| Error::UnknownName(t.signal.clone()))?);
        }
        let weights: Vec<f64> = m.terms.iter().map(|t| t.weight).collect();
        mix(&refs, &weights, m.elec_noise).map(Some)
    }

    /// Mode pairs for the inseparability sum, resolved to indices.
    pub fn duan_pairs(&self, state: &BrightState<f64>) -> Result<Vec<(usize, usize)>> {
        self.duan_pairs
            .iter()
            .flatten()
            .map(|[a, b]| Ok((state.index_of(a)?, state.index_of(b)?)))
            .collect()
    }

    /// The swap experiment with unit-power amplitude-squeezed inputs.
    pub fn swap(squeezing_db: f64, excess_db: f64, visibility: f64, gain_x: f64, gain_y: f64) -> Self {
        let (s, h) = (from_db(squeezing_db), from_db(excess_db));
        let source = |label: &str| SourceSpec { label: label.into(), power: 1.0, squeezing: s, excess: h, ellipse_angle: 0.0, carrier_phase: 0.0 };
        let bs = |j: &str, k: &str, out: [&str; 2]| ElementSpec::BeamSplitter {
            j: j.into(),
            k: k.into(),
            transmissivity: 0.5,
            phase: PhaseSpec::Keyword("auto".into()),
            out_labels: Some([out[0].into(), out[1].into()]),
        };
        let term = |signal: &str, weight: f64| MixTerm { signal: signal.into(), weight };
        ExperimentSpec {
            name: "swap".into(),
            sources: vec![source("SqI_a"), source("SqI_b"), source("SqII_a"), source("SqII_b")],
            elements: vec![
                bs("SqI_a", "SqI_b", ["EPR1", "EPR2"]),
                bs("SqII_a", "SqII_b", ["EPR3", "EPR4"]),
                ElementSpec::Visibility { j: "EPR2".into(), k: "EPR3".into(), visibility },
                bs("EPR2", "EPR3", ["Mode5", "Mode6"]),
            ],
            taps: vec!["EPR1".into(), "Mode5".into(), "Mode6".into(), "EPR4".into()],
            electronics: vec![
                MixSpec { name: "iBell+".into(), terms: vec![term("Mode5", 1.0), term("Mode6", 1.0)], elec_noise: 0.0 },
                MixSpec { name: "iBell-".into(), terms: vec![term("Mode5", 1.0), term("Mode6", -1.0)], elec_noise: 0.0 },
                MixSpec { name: "iOUT1+iOUT2".into(), terms: vec![term("EPR1", 1.0), term("EPR4", 1.0)], elec_noise: 0.0 },
            ],
            feedforward: vec![FeedforwardSpec { sig_x: "iBell+".into(), sig_y: "iBell-".into(), target: "EPR4".into(), gain_x, gain_y }],
            anchors: AnchorSpec::default(),
            traces: None,
            duan_pairs: Some(vec![["EPR1".into(), "EPR4".into()]]),
        }
    }
}
