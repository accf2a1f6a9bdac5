//! The entanglement-swapping experiment: two EPR sources, the swap beam
//! splitter, the Bell photocurrents and feedforward onto the output beam.
//!
//! Mode order of the swap state is `EPR1, Mode5, Mode6, EPR4`.

mod config;
mod traces;

pub use config::{
    AnchorSpec, ElementSpec, ExperimentRun, ExperimentSpec, FeedforwardSpec, MixSpec, MixTerm, PhaseSpec, SourceSpec,
};
pub use traces::{run_trace_set, Preset, PresetParams, Trace, TraceMetadata, TraceSet};

use serde::Serialize;

use crate::criteria::{self, CriterionResult, Pairing, Params, Verdict};
use crate::detection::{self, direct_tap, mix, quadrature_readout, Signal};
use crate::error::{Error, Result};
use crate::gaussian::{BrightState, Quadrature, SqueezerParams};
use crate::scalar::{to_db, Real};

pub const EPR1: usize = 0;
pub const MODE5: usize = 1;
pub const MODE6: usize = 2;
pub const EPR4: usize = 3;

/// An EPR pair `(a, b)` from two squeezed beams on a balanced 50/50 splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct EprSource<T: Real> {
    pub state: BrightState<T>,
    pub balance_phase: T,
    /// Set when the input powers differ by more than `1e-9` relative.
    pub warning: Option<String>,
}

pub fn build_epr_source<T: Real>(
    p1: &SqueezerParams<T>,
    p2: &SqueezerParams<T>,
    labels: [&str; 2],
) -> Result<EprSource<T>> {
    let a = BrightState::squeezed(format!("{}_in", labels[0]), p1)?;
    let b = BrightState::squeezed(format!("{}_in", labels[1]), p2)?;
    let warning = ((p1.power - p2.power).abs() > T::tol(1e-9) * p1.power.max(p2.power))
        .then(|| format!("unequal source powers {} and {}", p1.power, p2.power));
    let (mixed, phi) = a.tensor(&b)?.balanced_beamsplitter(0, 1)?;
    let (pa, pb) = (mixed.power(0), mixed.power(1));
    if (pa - pb).abs() > T::tol(1e-10) * pa.max(pb) {
        return Err(Error::Numerical(format!("EPR outputs not balanced: {pa} vs {pb}")));
    }
    let state = mixed.relabel(0, labels[0])?.relabel(1, labels[1])?;
    Ok(EprSource { state, balance_phase: phi, warning })
}

/// Parameters of both sources and the swap interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapParams<T> {
    pub source_one: [SqueezerParams<T>; 2],
    pub source_two: [SqueezerParams<T>; 2],
    pub visibility: T,
}

impl<T: Real> SwapParams<T> {
    /// Identical amplitude-squeezed inputs of unit power.
    pub fn symmetric(squeezing: T, excess: T) -> Self {
        let p = SqueezerParams::amplitude_squeezed(T::one(), squeezing, excess);
        SwapParams { source_one: [p; 2], source_two: [p; 2], visibility: T::one() }
    }

    pub fn with_visibility(mut self, v: T) -> Self {
        self.visibility = v;
        self
    }
}

/// The four-mode state after the swap splitter, with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapSetup<T: Real> {
    pub state: BrightState<T>,
    /// Product of the two EPR pairs before the swap: `EPR1, EPR2, EPR3, EPR4`.
    pub pre_swap: BrightState<T>,
    pub source_one: EprSource<T>,
    pub source_two: EprSource<T>,
    pub swap_phase: T,
    pub params: SwapParams<T>,
}

/// Interferes `EPR2` and `EPR3` on a balanced splitter; imperfect mode overlap
/// is modelled as transmission `v²` on both inputs.
pub fn build_swap_setup<T: Real>(src_one: EprSource<T>, src_two: EprSource<T>, visibility: T) -> Result<SwapSetup<T>> {
    if !(visibility >= T::zero() && visibility <= T::one()) {
        return Err(Error::InvalidParameter(format!("visibility {visibility} outside [0, 1]")));
    }
    let pre_swap = src_one.state.tensor(&src_two.state)?;
    let eta = visibility * visibility;
    let overlapped = pre_swap.loss(1, eta)?.loss(2, eta)?;
    let (state, swap_phase) = overlapped.balanced_beamsplitter(1, 2)?;
    let state = state.relabel(1, "Mode5")?.relabel(2, "Mode6")?;
    let params = SwapParams {
        source_one: [SqueezerParams::coherent(T::one()); 2],
        source_two: [SqueezerParams::coherent(T::one()); 2],
        visibility,
    };
    Ok(SwapSetup { state, pre_swap, source_one: src_one, source_two: src_two, swap_phase, params })
}

impl<T: Real> SwapSetup<T> {
    pub fn new(params: &SwapParams<T>) -> Result<Self> {
        let one = build_epr_source(&params.source_one[0], &params.source_one[1], ["EPR1", "EPR2"])?;
        let two = build_epr_source(&params.source_two[0], &params.source_two[1], ["EPR3", "EPR4"])?;
        let mut setup = build_swap_setup(one, two, params.visibility)?;
        setup.params = *params;
        Ok(setup)
    }

    /// Direct-detection photocurrents of the four output beams and the Bell currents.
    pub fn currents(&self) -> Result<SwapCurrents<T>> {
        let st = &self.state;
        let i1 = direct_tap(st, EPR1)?;
        let i5 = direct_tap(st, MODE5)?;
        let i6 = direct_tap(st, MODE6)?;
        let i4 = direct_tap(st, EPR4)?;
        let bell_plus = mix(&[&i5, &i6], &[T::one(), T::one()], T::zero())?;
        let bell_minus = mix(&[&i5, &i6], &[T::one(), -T::one()], T::zero())?;
        Ok(SwapCurrents { i1, i5, i6, i4, bell_plus, bell_minus })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapCurrents<T: Real> {
    pub i1: Signal<T>,
    pub i5: Signal<T>,
    pub i6: Signal<T>,
    pub i4: Signal<T>,
    /// `i5 + i6`.
    pub bell_plus: Signal<T>,
    /// `i5 − i6`.
    pub bell_minus: Signal<T>,
}

/// How the feedforward gains are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainChoice<T> {
    Fixed { gain_x: T, gain_y: T },
    /// Common gain on `[0, 2]` minimizing the output inseparability sum.
    Optimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome<T: Real> {
    /// `OUT1, OUT2`.
    pub out: BrightState<T>,
    /// Full four-mode state after modulation; `Mode5` and `Mode6` are consumed.
    pub modulated: BrightState<T>,
    pub duan: CriterionResult<T>,
    pub gain_x: T,
    pub gain_y: T,
}

fn feedforward_out<T: Real>(setup: &SwapSetup<T>, currents: &SwapCurrents<T>, gx: T, gy: T) -> Result<(BrightState<T>, BrightState<T>)> {
    let modulated = detection::feedforward(&setup.state, &currents.bell_plus, &currents.bell_minus, EPR4, gx, gy)?;
    let out = modulated.select(&[EPR1, EPR4])?.relabel(0, "OUT1")?.relabel(1, "OUT2")?;
    Ok((modulated, out))
}

/// Bell measurement on `Mode5`/`Mode6`, modulation of `EPR4` with
/// `g_x·i_Bell+` and `g_y·i_Bell−`, and the inseparability sum of the outputs
/// at unit criterion gain.
pub fn swap_with_feedforward<T: Real>(setup: &SwapSetup<T>, gains: GainChoice<T>) -> Result<SwapOutcome<T>> {
    let currents = setup.currents()?;
    let (gx, gy) = match gains {
        GainChoice::Fixed { gain_x, gain_y } => (gain_x, gain_y),
        GainChoice::Optimize => {
            let objective = |g: T| -> Result<T> {
                let (_, out) = feedforward_out(setup, &currents, g, g)?;
                Ok(criteria::duan_sum(&out, 0, 1, T::one(), Pairing::PlusMinus)?.value)
            };
            let g = criteria::golden_section(objective, T::zero(), T::lit(2.0), T::tol(1e-8))?;
            (g, g)
        }
    };
    let (modulated, out) = feedforward_out(setup, &currents, gx, gy)?;
    let duan = criteria::duan_sum(&out, 0, 1, T::one(), Pairing::PlusMinus)?;
    Ok(SwapOutcome { out, modulated, duan, gain_x: gx, gain_y: gy })
}

/// Classical teleportation of `EPR2`: a simultaneous amplitude and phase
/// measurement (one vacuum unit) is imposed on a fresh coherent beam (a second
/// vacuum unit). The result compares `V⁺(X)` between `EPR1` and the classical
/// output with the swap value at unit gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBaseline<T: Real> {
    pub result: CriterionResult<T>,
    /// `OUT1, OUT2cl`.
    pub out: BrightState<T>,
    pub classical: T,
    pub swap: T,
    pub gap_db: T,
}

pub fn classical_baseline<T: Real>(setup: &SwapSetup<T>) -> Result<ClassicalBaseline<T>> {
    let src = &setup.source_one.state;
    let amp2 = src.amplitude(1);
    let joint = src
        .tensor(&BrightState::vacuum("HetVac"))?
        .tensor(&BrightState::coherent("OUT2cl", src.power(1), T::zero())?)?;
    // split EPR2 against vacuum; read X on one half and Y on the other
    let het = joint.beamsplitter(1, 2, T::lit(0.5), T::zero())?;
    let weight = amp2 * T::lit(2.0).sqrt();
    let sx = quadrature_readout(&het, 1, Quadrature::X, weight)?;
    let sy = quadrature_readout(&het, 2, Quadrature::Y, weight)?;
    let modulated = detection::feedforward(&het, &sx, &sy, 3, T::one(), T::one())?;
    let out = modulated.select(&[0, 3])?.relabel(0, "OUT1")?;
    let classical = criteria::squeezing_variance(&out, Quadrature::X, 0, 1, criteria::Sign::Plus, T::one())?;

    let swapped = swap_with_feedforward(setup, GainChoice::Fixed { gain_x: T::one(), gain_y: T::one() })?;
    let swap = swapped.duan.components[0];
    let gap_db = to_db(classical / swap);
    let threshold = T::one();
    let result = CriterionResult {
        criterion: "classical_teleportation",
        value: classical,
        components: vec![classical, swap],
        threshold,
        verdict: Verdict::below(classical, threshold),
        params: Params::Teleportation { squeezing: setup.params.source_one[0].squeezing, swap_value: swap, gap_db },
    };
    Ok(ClassicalBaseline { result, out, classical, swap, gap_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::variance;
    use approx::assert_relative_eq;

    fn setup(s: f64, h: f64, v: f64) -> SwapSetup<f64> {
        SwapSetup::new(&SwapParams::symmetric(s, h).with_visibility(v)).unwrap()
    }

    #[test]
    fn epr_source_examples() {
        let p = SqueezerParams::amplitude_squeezed(1.0, 0.5, 100.0);
        let src = build_epr_source(&p, &p, ["a", "b"]).unwrap();
        assert!(src.warning.is_none());
        let d = criteria::duan_sum(&src.state, 0, 1, 1.0, Pairing::PlusMinus).unwrap();
        assert_relative_eq!(d.value, 1.0, epsilon = 1e-9);

        let c = SqueezerParams::coherent(1.0);
        let coh = build_epr_source(&c, &c, ["a", "b"]).unwrap();
        assert_relative_eq!(criteria::duan_sum(&coh.state, 0, 1, 1.0, Pairing::PlusMinus).unwrap().value, 2.0, epsilon = 1e-12);

        let pure = SqueezerParams::amplitude_squeezed(1.0, 0.5, 2.0);
        let src = build_epr_source(&pure, &pure, ["a", "b"]).unwrap();
        assert_relative_eq!(criteria::ppt_symplectic(&src.state, &[0]).unwrap().0, 0.5, epsilon = 1e-9);

        let q = SqueezerParams::amplitude_squeezed(2.0, 0.5, 100.0);
        assert!(build_epr_source(&p, &q, ["a", "b"]).unwrap().warning.is_some());
    }

    #[test]
    fn swap_beams_equally_bright() {
        let st = setup(0.5, 100.0, 1.0);
        for k in 0..4 {
            assert_relative_eq!(st.state.power(k), 1.0, max_relative = 1e-9);
        }
        assert_eq!(st.state.labels(), ["EPR1", "Mode5", "Mode6", "EPR4"]);
    }

    #[test]
    fn bell_currents_realize_the_joint_measurement() {
        let st = setup(0.5, 100.0, 1.0);
        let c = st.currents().unwrap();
        // coefficients of X₂ + X₃ and Y₂ − Y₃ before the splitter, pushed through it
        let pre = &st.pre_swap;
        let x23 = pre.carrier_quadrature(1, Quadrature::X) + pre.carrier_quadrature(2, Quadrature::X);
        let y23 = pre.carrier_quadrature(1, Quadrature::Y) - pre.carrier_quadrature(2, Quadrature::Y);
        let s = crate::symplectic::mixing_matrix(4, 1, 2, 0.5) * crate::symplectic::phase_shift_matrix(4, 2, st.swap_phase);
        // a functional c on the output acts on the input as Sᵀc
        let back_plus = s.transpose() * c.bell_plus.coeffs();
        let back_minus = s.transpose() * c.bell_minus.coeffs();
        assert!((back_plus - x23).amax() < 1e-12);
        assert!((back_minus - y23).amax() < 1e-12);
    }

    #[test]
    fn swap_feedforward_examples() {
        let r = swap_with_feedforward(&setup(0.5, 100.0, 1.0), GainChoice::Fixed { gain_x: 1.0, gain_y: 1.0 }).unwrap();
        assert_relative_eq!(r.duan.value, 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.duan.components[0], 1.0, epsilon = 1e-9);
        assert_eq!(r.out.labels(), ["OUT1", "OUT2"]);
        r.out.ensure_physical().unwrap();

        let r = swap_with_feedforward(&setup(0.25, 100.0, 1.0), GainChoice::Fixed { gain_x: 1.0, gain_y: 1.0 }).unwrap();
        assert_relative_eq!(r.duan.value, 1.0, epsilon = 1e-9);
        assert_eq!(r.duan.verdict, Verdict::Violated);

        let pure = SwapSetup::new(&SwapParams::symmetric(0.9, 1.0 / 0.9)).unwrap();
        let r = swap_with_feedforward(&pure, GainChoice::Optimize).unwrap();
        assert!(r.duan.value < 2.0);
        assert!(r.gain_x > 0.0 && r.gain_x < 1.0);
    }

    #[test]
    fn optimized_gain_for_pure_inputs_has_closed_form() {
        // (1 − s²)/(1 + s²) for minimum-uncertainty inputs
        let s: f64 = 0.5;
        let pure = SwapSetup::new(&SwapParams::symmetric(s, 1.0 / s)).unwrap();
        let r = swap_with_feedforward(&pure, GainChoice::Optimize).unwrap();
        assert_relative_eq!(r.gain_x, (1.0 - s * s) / (1.0 + s * s), epsilon = 1e-6);
        assert_relative_eq!(r.duan.value, 1.6, epsilon = 1e-9);
    }

    #[test]
    fn classical_baseline_gap() {
        for (s, gap) in [(0.5, 10.0 * (3.0f64 / 2.0).log10()), (0.25, 10.0 * (2.5f64).log10()), (1.0, 0.0)] {
            let h = if s < 1.0 { 100.0 } else { 1.0 };
            let b = classical_baseline(&setup(s, h, 1.0)).unwrap();
            assert_relative_eq!(b.classical, (2.0 * s + 2.0) / 2.0, epsilon = 1e-9);
            assert_relative_eq!(b.gap_db, gap, epsilon = 1e-9);
        }
    }

    #[test]
    fn visibility_degrades_four_mode_sum() {
        let st = setup(0.5, 100.0, 0.85);
        let c = st.currents().unwrap();
        let four = mix(&[&c.i1, &c.i5, &c.i6, &c.i4], &[1.0; 4], 0.0).unwrap();
        let r = variance(&st.state, &four).unwrap();
        assert!(r.rel_db.unwrap() > -3.0103);
        assert!(setup(0.5, 100.0, 1.0).state.ensure_physical().is_ok());
        assert!(SwapSetup::new(&SwapParams::symmetric(0.5, 100.0).with_visibility(1.2)).is_err());
    }
}
