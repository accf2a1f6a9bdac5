use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{build_epr_source, classical_baseline, swap_with_feedforward, GainChoice, SwapParams, SwapSetup};
use crate::detection::{direct_tap, mix, variance, DbmAnchor, NoiseReport, Signal};
use crate::error::{Error, Result};
use crate::gaussian::{BrightState, SqueezerParams};
use crate::scalar::Real;

/// Spectrum-analyser settings the traces correspond to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceMetadata {
    pub detection_frequency_hz: f64,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
}

impl Default for TraceMetadata {
    fn default() -> Self {
        TraceMetadata { detection_frequency_hz: 17.5e6, rbw_hz: 300e3, vbw_hz: 30.0 }
    }
}

/// One named noise trace together with the state and current that produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T: Real> {
    pub name: String,
    pub state: BrightState<T>,
    pub signal: Signal<T>,
    pub report: NoiseReport<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet<T: Real> {
    pub scenario: String,
    pub metadata: TraceMetadata,
    traces: Vec<Trace<T>>,
}

impl<T: Real> TraceSet<T> {
    pub fn new(scenario: impl Into<String>) -> Self {
        TraceSet { scenario: scenario.into(), metadata: TraceMetadata::default(), traces: Vec::new() }
    }

    pub fn traces(&self) -> &[Trace<T>] {
        &self.traces
    }

    pub fn get(&self, name: &str) -> Option<&Trace<T>> {
        self.traces.iter().find(|t| t.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.traces.iter().map(|t| t.name.as_str())
    }

    /// Evaluates `signal` on `state` and appends it; names must be unique.
    pub fn push(
        &mut self,
        name: impl Into<String>,
        state: &BrightState<T>,
        signal: Signal<T>,
        anchor: Option<DbmAnchor<T>>,
    ) -> Result<&Trace<T>> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(Error::LabelCollision(name));
        }
        let report = variance(state, &signal)?.anchored(anchor);
        self.traces.push(Trace { name, state: state.clone(), signal, report });
        Ok(self.traces.last().expect("just pushed"))
    }
}

/// Built-in experiment configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Squeezing of the four input beams and the EPR correlations of each source.
    Fig4,
    /// Correlations between the two outer beams before and after the Bell measurement.
    Fig5,
    /// Four-beam sum after the swap.
    Fig7,
    /// Three-beam sums combining one outer beam with the Bell current.
    Fig8,
    /// Feedforward onto `EPR4`.
    Swap,
    /// Classical teleportation of `EPR2`.
    Classical,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig4, Preset::Fig5, Preset::Fig7, Preset::Fig8, Preset::Swap, Preset::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Swap => "swap",
            Preset::Classical => "classical",
        }
    }

    /// Default parameters; `fig8` uses an asymmetric second source.
    pub fn default_params<T: Real>(self) -> PresetParams<T> {
        let mut p = PresetParams::default();
        if self == Preset::Fig8 {
            p.excess_two = T::lit(63.0);
        }
        p
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Knobs shared by all presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PresetParams<T> {
    pub squeezing_one: T,
    pub excess_one: T,
    pub squeezing_two: T,
    pub excess_two: T,
    pub power: T,
    pub visibility: T,
    pub gain_x: T,
    pub gain_y: T,
    /// Electronic noise of every reported trace, in dB relative to its shot reference.
    pub elec_noise_db: Option<T>,
    /// Absolute level of the two-beam shot noise, in dBm.
    pub shot_dbm: Option<T>,
}

impl<T: Real> Default for PresetParams<T> {
    fn default() -> Self {
        PresetParams {
            squeezing_one: T::lit(0.5),
            excess_one: T::lit(100.0),
            squeezing_two: T::lit(0.5),
            excess_two: T::lit(100.0),
            power: T::one(),
            visibility: T::one(),
            gain_x: T::one(),
            gain_y: T::one(),
            elec_noise_db: None,
            shot_dbm: None,
        }
    }
}

impl<T: Real> PresetParams<T> {
    /// Same squeezing and excess noise on both sources.
    pub fn with_squeezing(mut self, squeezing: T, excess: T) -> Self {
        self.squeezing_one = squeezing;
        self.squeezing_two = squeezing;
        self.excess_one = excess;
        self.excess_two = excess;
        self
    }

    pub fn swap_params(&self) -> SwapParams<T> {
        let one = SqueezerParams::amplitude_squeezed(self.power, self.squeezing_one, self.excess_one);
        let two = SqueezerParams::amplitude_squeezed(self.power, self.squeezing_two, self.excess_two);
        SwapParams { source_one: [one; 2], source_two: [two; 2], visibility: self.visibility }
    }

    fn anchor(&self) -> Option<DbmAnchor<T>> {
        self.shot_dbm.map(|dbm| DbmAnchor { reference: T::lit(2.0) * self.power, dbm })
    }
}

struct Builder<'a, T: Real> {
    set: TraceSet<T>,
    params: &'a PresetParams<T>,
}

impl<T: Real> Builder<'_, T> {
    fn add(&mut self, name: &str, state: &BrightState<T>, signal: Signal<T>) -> Result<()> {
        let signal = match self.params.elec_noise_db {
            Some(db) => signal.with_elec_noise_db(db),
            None => signal,
        };
        self.set.push(name, state, signal, self.params.anchor()).map(|_| ())
    }

    fn sum(&mut self, name: &str, state: &BrightState<T>, signals: &[&Signal<T>]) -> Result<()> {
        let ones = vec![T::one(); signals.len()];
        self.add(name, state, mix(signals, &ones, T::zero())?)
    }

    /// Shot-noise reference row: `beams` coherent beams of the working power.
    fn shot(&mut self, beams: usize) -> Result<()> {
        let mut st = BrightState::empty();
        for k in 0..beams {
            st = st.tensor(&BrightState::coherent(format!("LO{k}"), self.params.power, T::zero())?)?;
        }
        let taps = (0..beams).map(|k| direct_tap(&st, k)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Signal<T>> = taps.iter().collect();
        let name = if beams == 1 { "shot_1beam".to_string() } else { format!("shot_{beams}beams") };
        self.sum(&name, &st, &refs)
    }
}

/// Evaluates every trace of a preset.
pub fn run_trace_set<T: Real>(preset: Preset, params: &PresetParams<T>) -> Result<TraceSet<T>> {
    let mut b = Builder { set: TraceSet::new(preset.name()), params };
    let sp = params.swap_params();
    match preset {
        Preset::Fig4 => {
            for (tag, p) in [("SqI", &sp.source_one[0]), ("SqII", &sp.source_two[0])] {
                let beam = BrightState::squeezed(tag, p)?;
                let tap = direct_tap(&beam, 0)?;
                b.add(&format!("{tag}_amplitude"), &beam, tap)?;
            }
            let one = build_epr_source(&sp.source_one[0], &sp.source_one[1], ["EPR1", "EPR2"])?;
            let two = build_epr_source(&sp.source_two[0], &sp.source_two[1], ["EPR3", "EPR4"])?;
            for (tag, src) in [("I", &one.state), ("II", &two.state)] {
                let (a, c) = (direct_tap(src, 0)?, direct_tap(src, 1)?);
                b.add(&format!("EPR_{tag}_single"), src, a.clone())?;
                b.sum(&format!("EPR_{tag}_sum"), src, &[&a, &c])?;
            }
            b.shot(1)?;
            b.shot(2)?;
        }
        Preset::Fig5 => {
            let setup = SwapSetup::new(&sp)?;
            let c = setup.currents()?;
            let st = &setup.state;
            b.add("i1", st, c.i1.clone())?;
            b.add("i4", st, c.i4.clone())?;
            b.sum("i1+i4", st, &[&c.i1, &c.i4])?;
            b.sum("i1+i4+iBell", st, &[&c.i1, &c.i4, &c.bell_plus])?;
            b.shot(2)?;
            b.shot(4)?;
        }
        Preset::Fig7 => {
            let setup = SwapSetup::new(&sp)?;
            let c = setup.currents()?;
            b.sum("i1+i5+i6+i4", &setup.state, &[&c.i1, &c.i5, &c.i6, &c.i4])?;
            b.shot(4)?;
        }
        Preset::Fig8 => {
            let setup = SwapSetup::new(&sp)?;
            let c = setup.currents()?;
            let st = &setup.state;
            b.sum("i1+iBell", st, &[&c.i1, &c.bell_plus])?;
            b.sum("iBell+i4", st, &[&c.bell_plus, &c.i4])?;
            b.add("i1", st, c.i1.clone())?;
            b.add("i4", st, c.i4.clone())?;
            b.shot(3)?;
        }
        Preset::Swap => {
            let setup = SwapSetup::new(&sp)?;
            let r = swap_with_feedforward(&setup, GainChoice::Fixed { gain_x: params.gain_x, gain_y: params.gain_y })?;
            let out = &r.out;
            let (o1, o2) = (direct_tap(out, 0)?, direct_tap(out, 1)?);
            b.add("iOUT1", out, o1.clone())?;
            b.add("iOUT2", out, o2.clone())?;
            b.sum("iOUT1+iOUT2", out, &[&o1, &o2])?;
            b.shot(2)?;
        }
        Preset::Classical => {
            let setup = SwapSetup::new(&sp)?;
            let base = classical_baseline(&setup)?;
            let out = &base.out;
            let (o1, o2) = (direct_tap(out, 0)?, direct_tap(out, 1)?);
            b.add("iOUT2cl", out, o2.clone())?;
            b.sum("iOUT1+iOUT2cl", out, &[&o1, &o2])?;
            b.shot(2)?;
        }
    }
    Ok(b.set)
}
