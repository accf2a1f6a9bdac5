//! Direct detection of bright beams, electronic combination of photocurrents,
//! feedforward modulation and noise powers relative to shot noise.
//!
//! A bright beam with carrier `α = |α|e^{iθ}` produces the photocurrent
//! fluctuation `δi = |α|·(cosθ·X + sinθ·Y)`, i.e. `|α|` times its
//! carrier-referenced amplitude quadrature. A [`Signal`] is a linear functional
//! on the global quadrature vector plus independent electronic noise.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{BrightState, Quadrature};
use crate::scalar::{from_db, to_db, Real};
use crate::symplectic;

/// Detector model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Minimum tap power relative to the brightest mode of the state.
    pub brightness_threshold: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig { brightness_threshold: 1e-6 }
    }
}

/// A (combined) photocurrent.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T: Real> {
    coeffs: DVector<T>,
    dc: T,
    elec_noise: T,
    shot_ref: T,
    consumed: BTreeSet<usize>,
}

impl<T: Real> Signal<T> {
    /// The zero current on an `N`-mode state.
    pub fn zero(modes: usize) -> Self {
        Signal {
            coeffs: DVector::zeros(2 * modes),
            dc: T::zero(),
            elec_noise: T::zero(),
            shot_ref: T::zero(),
            consumed: BTreeSet::new(),
        }
    }

    pub fn coeffs(&self) -> &DVector<T> {
        &self.coeffs
    }

    pub fn dc(&self) -> T {
        self.dc
    }

    pub fn elec_noise(&self) -> T {
        self.elec_noise
    }

    pub fn shot_ref(&self) -> T {
        self.shot_ref
    }

    /// Modes photodetected to form this signal.
    pub fn consumed(&self) -> &BTreeSet<usize> {
        &self.consumed
    }

    /// Adds electronic noise with variance `shot_ref · 10^(db/10)`.
    pub fn with_elec_noise_db(mut self, db: T) -> Self {
        self.elec_noise += self.shot_ref * from_db(db);
        self
    }

    pub fn with_elec_noise(mut self, variance: T) -> Result<Self> {
        if !(variance >= T::zero()) {
            return Err(Error::InvalidParameter(format!("electronic noise {variance} must be ≥ 0")));
        }
        self.elec_noise += variance;
        Ok(self)
    }

    /// True if the functional touches either quadrature of mode `k`.
    pub fn touches(&self, k: usize) -> bool {
        self.consumed.contains(&k)
            || self.coeffs.get(2 * k).is_some_and(|v| *v != T::zero())
            || self.coeffs.get(2 * k + 1).is_some_and(|v| *v != T::zero())
    }
}

/// Noise power of a signal against its shot-noise reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseReport<T> {
    pub variance: T,
    pub shot_ref: T,
    /// `10·log10(variance / shot_ref)`; absent when the reference is zero.
    pub rel_db: Option<T>,
    pub abs_dbm: Option<T>,
}

impl<T: Real> NoiseReport<T> {
    pub fn new(variance: T, shot_ref: T) -> Self {
        let rel_db = if shot_ref > T::zero() && variance > T::zero() {
            Some(to_db(variance / shot_ref))
        } else {
            None
        };
        NoiseReport { variance, shot_ref, rel_db, abs_dbm: None }
    }

    /// `variance / shot_ref`.
    pub fn ratio(&self) -> T {
        self.variance / self.shot_ref
    }

    pub fn anchored(mut self, anchor: Option<DbmAnchor<T>>) -> Self {
        self.abs_dbm = anchor.map(|a| a.to_dbm(self.variance));
        self
    }
}

/// Maps a noise variance onto an absolute spectrum-analyser scale: a variance
/// equal to `reference` reads `dbm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbmAnchor<T> {
    pub reference: T,
    pub dbm: T,
}

impl<T: Real> DbmAnchor<T> {
    pub fn to_dbm(&self, variance: T) -> T {
        self.dbm + to_db(variance / self.reference)
    }
}

/// Direct detection of mode `k` with the default brightness threshold.
pub fn direct_tap<T: Real>(state: &BrightState<T>, k: usize) -> Result<Signal<T>> {
    direct_tap_with(state, k, &DetectionConfig::default())
}

/// Linearized photocurrent `δi_k = |α_k|·X_k^(c)`.
pub fn direct_tap_with<T: Real>(state: &BrightState<T>, k: usize, cfg: &DetectionConfig) -> Result<Signal<T>> {
    state.check_mode(k)?;
    if state.is_consumed(k) {
        return Err(Error::AlreadyConsumed(k));
    }
    let power = state.power(k);
    let threshold = T::lit(cfg.brightness_threshold) * state.max_power();
    if !(power > T::zero()) || power < threshold {
        return Err(Error::LinearizationInvalid { mode: k, power: power.as_f64(), threshold: threshold.as_f64() });
    }
    let amp = state.amplitude(k);
    Ok(Signal {
        coeffs: state.carrier_quadrature(k, Quadrature::X) * amp,
        dc: power,
        elec_noise: T::zero(),
        shot_ref: power,
        consumed: BTreeSet::from([k]),
    })
}

/// Ideal readout `weight·Q_k^(c)` of either carrier-referenced quadrature, as
/// used for a hypothetical simultaneous measurement. Its shot reference is `weight²`.
pub fn quadrature_readout<T: Real>(state: &BrightState<T>, k: usize, quad: Quadrature, weight: T) -> Result<Signal<T>> {
    state.check_mode(k)?;
    if state.is_consumed(k) {
        return Err(Error::AlreadyConsumed(k));
    }
    if state.power(k) <= T::zero() {
        return Err(Error::LinearizationInvalid { mode: k, power: 0.0, threshold: 0.0 });
    }
    Ok(Signal {
        coeffs: state.carrier_quadrature(k, quad) * weight,
        dc: T::zero(),
        elec_noise: T::zero(),
        shot_ref: weight * weight,
        consumed: BTreeSet::from([k]),
    })
}

/// Weighted electronic sum of photocurrents.
///
/// The shot reference is `Σ w²·shot_ref`, the noise of independent coherent
/// beams of the same powers.
pub fn mix<T: Real>(signals: &[&Signal<T>], weights: &[T], extra_elec_noise: T) -> Result<Signal<T>> {
    if signals.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: signals.len(), found: weights.len() });
    }
    if signals.is_empty() {
        return Err(Error::EmptySelection);
    }
    if !(extra_elec_noise >= T::zero()) {
        return Err(Error::InvalidParameter(format!("electronic noise {extra_elec_noise} must be ≥ 0")));
    }
    let dim = signals[0].coeffs.len();
    let mut out = Signal { coeffs: DVector::zeros(dim), dc: T::zero(), elec_noise: extra_elec_noise, shot_ref: T::zero(), consumed: BTreeSet::new() };
    for (s, &w) in signals.iter().zip(weights) {
        if s.coeffs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: s.coeffs.len() });
        }
        if let Some(&k) = s.consumed.intersection(&out.consumed).next() {
            return Err(Error::OverlappingTaps(k));
        }
        out.consumed.extend(s.consumed.iter().copied());
        out.coeffs.axpy(w, &s.coeffs, T::one());
        out.dc += w * s.dc;
        out.elec_noise += w * w * s.elec_noise;
        out.shot_ref += w * w * s.shot_ref;
    }
    Ok(out)
}

/// `cᵀΣc + elec_noise` against the signal's shot reference.
pub fn variance<T: Real>(state: &BrightState<T>, signal: &Signal<T>) -> Result<NoiseReport<T>> {
    let quantum = state.quadratic_form(&signal.coeffs)?;
    Ok(NoiseReport::new(quantum + signal.elec_noise, signal.shot_ref))
}

/// Modulates mode `k` with measured photocurrents:
/// `δX_k^(c) += (g_x/|α_k|)·sig_x`, `δY_k^(c) += (g_y/|α_k|)·sig_y`.
///
/// Detecting the modulated mode then reproduces `tap(k) + g_x·sig_x` exactly.
/// Modes measured by a signal with nonzero gain are marked consumed.
pub fn feedforward<T: Real>(
    state: &BrightState<T>,
    sig_x: &Signal<T>,
    sig_y: &Signal<T>,
    k: usize,
    gain_x: T,
    gain_y: T,
) -> Result<BrightState<T>> {
    state.check_mode(k)?;
    if state.is_consumed(k) {
        return Err(Error::AlreadyConsumed(k));
    }
    let dim = 2 * state.modes();
    for s in [sig_x, sig_y] {
        if s.coeffs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: s.coeffs.len() });
        }
        if s.touches(k) {
            return Err(Error::InvalidParameter(format!("feedforward signal measures its own target mode {k}")));
        }
    }
    if gain_x == T::zero() && gain_y == T::zero() {
        return Ok(state.clone());
    }
    let amp = state.amplitude(k);
    if !(amp > T::zero()) {
        return Err(Error::LinearizationInvalid { mode: k, power: 0.0, threshold: 0.0 });
    }
    let dir_x = state.carrier_quadrature(k, Quadrature::X);
    let dir_y = state.carrier_quadrature(k, Quadrature::Y);
    let (kx, ky) = (gain_x / amp, gain_y / amp);

    let mut map = DMatrix::<T>::identity(dim, dim);
    map += &dir_x * sig_x.coeffs.transpose() * kx;
    map += &dir_y * sig_y.coeffs.transpose() * ky;
    let mut cov = &map * state.cov() * map.transpose();
    cov += &dir_x * dir_x.transpose() * (kx * kx * sig_x.elec_noise);
    cov += &dir_y * dir_y.transpose() * (ky * ky * sig_y.elec_noise);

    let mut consumed = Vec::new();
    if gain_x != T::zero() {
        consumed.extend(sig_x.consumed.iter().copied());
    }
    if gain_y != T::zero() {
        consumed.extend(sig_y.consumed.iter().copied());
    }
    Ok(state.clone().with_cov(cov).with_consumed(consumed))
}

/// Photocurrent of one output channel of a delay-line interferometer, split
/// into the part seen through the prompt arm and the part seen through the
/// delayed arm, both as functionals on `(X_in, Y_in, X_vac, Y_vac)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayedFunctional<T: Real> {
    pub prompt: DVector<T>,
    pub delayed: DVector<T>,
    pub shot_ref: T,
}

impl<T: Real> DelayedFunctional<T> {
    /// Power at the analysis frequency: `uᵀΣu + vᵀΣv + 2cos(Ωτ)·uᵀΣv`.
    pub fn power(&self, cov: &DMatrix<T>, sideband_phase: T) -> T {
        let uu = (self.prompt.transpose() * cov * &self.prompt)[(0, 0)];
        let vv = (self.delayed.transpose() * cov * &self.delayed)[(0, 0)];
        let uv = (self.prompt.transpose() * cov * &self.delayed)[(0, 0)];
        uu + vv + T::lit(2.0) * sideband_phase.cos() * uv
    }

    fn combine(&self, other: &Self, w: T) -> Self {
        DelayedFunctional {
            prompt: &self.prompt + &other.prompt * w,
            delayed: &self.delayed + &other.delayed * w,
            shot_ref: self.shot_ref + w * w * other.shot_ref,
        }
    }
}

/// Frequency-domain model of an extremely unbalanced Mach-Zehnder interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct UnbalancedMz<T: Real> {
    /// Input mode followed by the vacuum entering the unused port.
    pub input: BrightState<T>,
    pub ports: [DelayedFunctional<T>; 2],
    /// `Ω·τ`.
    pub sideband_phase: T,
    pub port_powers: [T; 2],
}

/// Noise reports of the two output ports and their sum and difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MzReport<T> {
    pub difference: NoiseReport<T>,
    pub sum: NoiseReport<T>,
    pub ports: [NoiseReport<T>; 2],
}

impl<T: Real> UnbalancedMz<T> {
    /// Split 50/50 against vacuum, delay one arm by `delay` with optical phase
    /// `optical_phase`, recombine 50/50 and direct-detect both ports at angular
    /// frequency `omega`.
    pub fn new(input: &BrightState<T>, delay: T, optical_phase: T, omega: T) -> Result<Self> {
        if input.modes() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: input.modes() });
        }
        if !(input.power(0) > T::zero()) {
            return Err(Error::LinearizationInvalid { mode: 0, power: 0.0, threshold: 0.0 });
        }
        if !delay.is_finite() || !omega.is_finite() || !optical_phase.is_finite() {
            return Err(Error::InvalidParameter("interferometer parameters must be finite".into()));
        }
        let vac_label = if input.label(0) == "vacuum" { "vacuum'" } else { "vacuum" };
        let joint = input.tensor(&BrightState::vacuum(vac_label))?;
        let half = T::lit(0.5);

        let split = symplectic::mixing_matrix::<T>(2, 0, 1, half);
        let arm_phase = symplectic::phase_shift_matrix::<T>(2, 1, optical_phase);
        let mut prompt_arm = DMatrix::<T>::zeros(4, 4);
        prompt_arm[(0, 0)] = T::one();
        prompt_arm[(1, 1)] = T::one();
        let mut delayed_arm = DMatrix::<T>::zeros(4, 4);
        delayed_arm[(2, 2)] = T::one();
        delayed_arm[(3, 3)] = T::one();
        let prompt_map = &split * &prompt_arm * &split;
        let delayed_map = &split * &arm_phase * &delayed_arm * &split;

        let out = joint.beamsplitter(0, 1, half, T::zero())?.phase_shift(1, optical_phase)?.beamsplitter(0, 1, half, T::zero())?;
        let port = |p: usize| {
            let c = out.carrier_quadrature(p, Quadrature::X) * out.amplitude(p);
            DelayedFunctional {
                prompt: prompt_map.transpose() * &c,
                delayed: delayed_map.transpose() * &c,
                shot_ref: out.power(p),
            }
        };
        Ok(UnbalancedMz {
            input: joint,
            ports: [port(0), port(1)],
            sideband_phase: omega * delay,
            port_powers: [out.power(0), out.power(1)],
        })
    }

    pub fn difference(&self) -> DelayedFunctional<T> {
        self.ports[0].combine(&self.ports[1], -T::one())
    }

    pub fn sum(&self) -> DelayedFunctional<T> {
        self.ports[0].combine(&self.ports[1], T::one())
    }

    fn report_of(&self, f: &DelayedFunctional<T>) -> NoiseReport<T> {
        NoiseReport::new(f.power(self.input.cov(), self.sideband_phase), f.shot_ref)
    }

    pub fn report(&self) -> MzReport<T> {
        MzReport {
            difference: self.report_of(&self.difference()),
            sum: self.report_of(&self.sum()),
            ports: [self.report_of(&self.ports[0]), self.report_of(&self.ports[1])],
        }
    }
}

/// Convenience wrapper around [`UnbalancedMz`].
pub fn unbalanced_mz<T: Real>(input: &BrightState<T>, delay: T, optical_phase: T, omega: T) -> Result<MzReport<T>> {
    Ok(UnbalancedMz::new(input, delay, optical_phase, omega)?.report())
}
