//! Bright multimode Gaussian beams and their linear-optical transformations.
//!
//! A [`BrightState`] holds one complex carrier amplitude per mode and the real
//! covariance of the quadrature fluctuations over `(X₁, Y₁, …, X_N, Y_N)`,
//! with `X = δa + δa†` and `Y = i(δa† − δa)` so that vacuum noise is the
//! identity. Carriers are in shot-noise units: `|α|²` is a power whose absolute
//! scale is arbitrary.
//!
//! The covariance lives in one global phase frame. Detection rotates into the
//! frame of each beam's own carrier (see [`BrightState::carrier_frame`]).

use std::collections::BTreeSet;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};
use crate::symplectic::{self, rotation};

/// Output statistics of one squeezed source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct SqueezerParams<T> {
    /// Optical power `|α|²`.
    pub power: T,
    /// Linear variance factor of the squeezed quadrature, `0 < s ≤ 1`.
    pub squeezing: T,
    /// Linear variance factor of the anti-squeezed quadrature.
    pub excess: T,
    /// Orientation of the uncertainty ellipse relative to the carrier.
    #[serde(default)]
    pub ellipse_angle: T,
    #[serde(default)]
    pub carrier_phase: T,
}

impl<T: Real> SqueezerParams<T> {
    /// Amplitude-squeezed beam with zero carrier phase.
    pub fn amplitude_squeezed(power: T, squeezing: T, excess: T) -> Self {
        SqueezerParams { power, squeezing, excess, ellipse_angle: T::zero(), carrier_phase: T::zero() }
    }

    /// Minimum-uncertainty amplitude squeezing, `excess = 1/squeezing`.
    pub fn pure(power: T, squeezing: T) -> Self {
        Self::amplitude_squeezed(power, squeezing, T::one() / squeezing)
    }

    pub fn coherent(power: T) -> Self {
        Self::amplitude_squeezed(power, T::one(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.power, self.squeezing, self.excess, self.ellipse_angle, self.carrier_phase]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("squeezer parameters must be finite".into()));
        }
        if self.power <= T::zero() {
            return Err(Error::InvalidParameter(format!("power must be > 0, got {}", self.power)));
        }
        if self.squeezing <= T::zero() || self.squeezing > T::one() {
            return Err(Error::InvalidParameter(format!(
                "squeezing factor must lie in (0, 1], got {}",
                self.squeezing
            )));
        }
        if self.squeezing * self.excess < T::one() - T::tol(1e-9) {
            // the symplectic eigenvalue of diag(s, h) is √(s·h)
            return Err(Error::Unphysical((self.squeezing * self.excess).sqrt().as_f64()));
        }
        Ok(())
    }
}

/// Carriers, fluctuation covariance and labels of `N` bright modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightState<T: Real> {
    carriers: Vec<Complex<T>>,
    cov: DMatrix<T>,
    labels: Vec<String>,
    consumed: BTreeSet<usize>,
}

/// Polar construction that only needs `RealField`.
pub(crate) fn polar<T: Real>(modulus: T, phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(modulus * c, modulus * s)
}

/// Congruence `S Σ Sᵀ` restricted to the given rows/columns.
fn congruence<T: Real>(cov: &DMatrix<T>, s: &DMatrix<T>) -> DMatrix<T> {
    let mut out = s * cov * s.transpose();
    symmetrize(&mut out);
    out
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    for r in 0..m.nrows() {
        for c in (r + 1)..m.ncols() {
            let v = (m[(r, c)] + m[(c, r)]) * half;
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

impl<T: Real> BrightState<T> {
    /// Builds a state, checking shapes, symmetry, finiteness and label uniqueness.
    ///
    /// Physicality is not checked here; use [`BrightState::ensure_physical`].
    pub fn new(carriers: Vec<Complex<T>>, cov: DMatrix<T>, labels: Vec<String>) -> Result<Self> {
        let n = carriers.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
        }
        if cov.nrows() != 2 * n || cov.ncols() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: cov.nrows() });
        }
        if carriers.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) || cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite carrier or covariance entry".into()));
        }
        let scale = cov.amax().max(T::one());
        for r in 0..2 * n {
            for c in (r + 1)..2 * n {
                if (cov[(r, c)] - cov[(c, r)]).abs() > T::tol(1e-12) * scale {
                    return Err(Error::InvalidParameter(format!("covariance not symmetric at ({r}, {c})")));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        let mut cov = cov;
        symmetrize(&mut cov);
        Ok(BrightState { carriers, cov, labels, consumed: BTreeSet::new() })
    }

    /// The zero-mode state, neutral element of [`BrightState::tensor`].
    pub fn empty() -> Self {
        BrightState { carriers: Vec::new(), cov: DMatrix::zeros(0, 0), labels: Vec::new(), consumed: BTreeSet::new() }
    }

    /// Squeezed source with covariance `R(θ+μ)·diag(s, h)·R(θ+μ)ᵀ`.
    pub fn squeezed(label: impl Into<String>, p: &SqueezerParams<T>) -> Result<Self> {
        p.validate()?;
        let r = rotation(p.carrier_phase + p.ellipse_angle);
        let (s, h) = (p.squeezing, p.excess);
        let mut cov = DMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                cov[(a, b)] = r[a][0] * s * r[b][0] + r[a][1] * h * r[b][1];
            }
        }
        Self::new(vec![polar(p.power.sqrt(), p.carrier_phase)], cov, vec![label.into()])
    }

    /// Coherent beam; `power = 0` gives the vacuum.
    pub fn coherent(label: impl Into<String>, power: T, phase: T) -> Result<Self> {
        if !(power >= T::zero()) || !phase.is_finite() {
            return Err(Error::InvalidParameter(format!("coherent power must be ≥ 0, got {power}")));
        }
        Self::new(vec![polar(power.sqrt(), phase)], DMatrix::identity(2, 2), vec![label.into()])
    }

    pub fn vacuum(label: impl Into<String>) -> Self {
        Self::coherent(label, T::zero(), T::zero()).expect("vacuum is valid")
    }

    pub fn modes(&self) -> usize {
        self.carriers.len()
    }

    pub fn carriers(&self) -> &[Complex<T>] {
        &self.carriers
    }

    pub fn carrier(&self, k: usize) -> Complex<T> {
        self.carriers[k]
    }

    pub fn power(&self, k: usize) -> T {
        self.carriers[k].modulus_squared()
    }

    pub fn amplitude(&self, k: usize) -> T {
        self.carriers[k].modulus()
    }

    /// `arg α_k`; zero for a dark mode.
    pub fn carrier_phase(&self, k: usize) -> T {
        let c = self.carriers[k];
        if c.re == T::zero() && c.im == T::zero() {
            T::zero()
        } else {
            c.im.atan2(c.re)
        }
    }

    pub fn total_power(&self) -> T {
        self.carriers.iter().fold(T::zero(), |acc, c| acc + c.modulus_squared())
    }

    pub fn max_power(&self) -> T {
        (0..self.modes()).fold(T::zero(), |acc, k| acc.max(self.power(k)))
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownName(label.to_string()))
    }

    /// Modes whose light has been detected and may not be reused.
    pub fn consumed(&self) -> &BTreeSet<usize> {
        &self.consumed
    }

    pub fn is_consumed(&self, k: usize) -> bool {
        self.consumed.contains(&k)
    }

    pub(crate) fn with_consumed(mut self, modes: impl IntoIterator<Item = usize>) -> Self {
        self.consumed.extend(modes);
        self
    }

    pub(crate) fn with_cov(mut self, mut cov: DMatrix<T>) -> Self {
        symmetrize(&mut cov);
        self.cov = cov;
        self
    }

    pub fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.modes() {
            Err(Error::ModeIndex { index: k, modes: self.modes() })
        } else {
            Ok(())
        }
    }

    fn check_optical(&self, k: usize) -> Result<()> {
        self.check_mode(k)?;
        if self.is_consumed(k) {
            return Err(Error::AlreadyConsumed(k));
        }
        Ok(())
    }

    /// Renames mode `k`.
    pub fn relabel(&self, k: usize, label: impl Into<String>) -> Result<Self> {
        self.check_mode(k)?;
        let label = label.into();
        if self.labels.iter().enumerate().any(|(i, l)| i != k && *l == label) {
            return Err(Error::LabelCollision(label));
        }
        let mut out = self.clone();
        out.labels[k] = label;
        Ok(out)
    }

    /// Concatenates modes; the joint covariance is block diagonal.
    pub fn tensor(&self, other: &BrightState<T>) -> Result<Self> {
        if let Some(l) = other.labels.iter().find(|l| self.labels.contains(l)) {
            return Err(Error::LabelCollision(l.clone()));
        }
        let (na, nb) = (2 * self.modes(), 2 * other.modes());
        let mut cov = DMatrix::zeros(na + nb, na + nb);
        cov.view_mut((0, 0), (na, na)).copy_from(&self.cov);
        cov.view_mut((na, na), (nb, nb)).copy_from(&other.cov);
        let shift = self.modes();
        Ok(BrightState {
            carriers: self.carriers.iter().chain(other.carriers.iter()).copied().collect(),
            cov,
            labels: self.labels.iter().chain(other.labels.iter()).cloned().collect(),
            consumed: self.consumed.iter().copied().chain(other.consumed.iter().map(|k| k + shift)).collect(),
        })
    }

    /// Reduced state on `modes`, in the given order.
    pub fn select(&self, modes: &[usize]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &k in modes {
            self.check_mode(k)?;
            if !seen.insert(k) {
                return Err(Error::InvalidParameter(format!("mode {k} selected twice")));
            }
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        let consumed = modes
            .iter()
            .enumerate()
            .filter(|(_, k)| self.is_consumed(**k))
            .map(|(i, _)| i)
            .collect();
        Ok(BrightState {
            carriers: modes.iter().map(|&k| self.carriers[k]).collect(),
            cov,
            labels: modes.iter().map(|&k| self.labels[k].clone()).collect(),
            consumed,
        })
    }

    /// Reduced state on the modes that have not been detected.
    pub fn unconsumed(&self) -> Self {
        let keep: Vec<usize> = (0..self.modes()).filter(|k| !self.is_consumed(*k)).collect();
        self.select(&keep).expect("indices are in range")
    }

    /// Rotates mode `k` by `e^{iφ}`.
    pub fn phase_shift(&self, k: usize, phi: T) -> Result<Self> {
        self.check_optical(k)?;
        let s = symplectic::phase_shift_matrix(self.modes(), k, phi);
        let mut out = self.clone();
        out.carriers[k] = self.carriers[k] * polar(T::one(), phi);
        out.cov = congruence(&self.cov, &s);
        Ok(out)
    }

    /// Phase `φ` on input `k`, then the real mixing of `j` and `k` with transmissivity `T`.
    pub fn beamsplitter(&self, j: usize, k: usize, transmissivity: T, phi: T) -> Result<Self> {
        self.check_optical(j)?;
        self.check_optical(k)?;
        if j == k {
            return Err(Error::InvalidParameter("beam splitter needs two distinct modes".into()));
        }
        if !(transmissivity >= T::zero() && transmissivity <= T::one()) {
            return Err(Error::InvalidParameter(format!("transmissivity {transmissivity} outside [0, 1]")));
        }
        let n = self.modes();
        let s = symplectic::mixing_matrix(n, j, k, transmissivity) * symplectic::phase_shift_matrix(n, k, phi);
        let t = transmissivity.sqrt();
        let r = (T::one() - transmissivity).sqrt();
        let aj = self.carriers[j];
        let ak = self.carriers[k] * polar(T::one(), phi);
        let mut out = self.clone();
        out.carriers[j] = aj.scale(t) + ak.scale(r);
        out.carriers[k] = aj.scale(r) - ak.scale(t);
        out.cov = congruence(&self.cov, &s);
        Ok(out)
    }

    /// Beam splitter at the phase returned by [`BrightState::balance_phase`].
    pub fn balanced_beamsplitter(&self, j: usize, k: usize) -> Result<(Self, T)> {
        let half = T::lit(0.5);
        let phi = self.balance_phase(j, k, half)?;
        Ok((self.beamsplitter(j, k, half, phi)?, phi))
    }

    /// Transmission `η` through a lossy channel that admits vacuum noise.
    pub fn loss(&self, k: usize, eta: T) -> Result<Self> {
        self.check_optical(k)?;
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter(format!("efficiency {eta} outside [0, 1]")));
        }
        let root = eta.sqrt();
        let mut out = self.clone();
        out.carriers[k] = self.carriers[k].scale(root);
        for q in [2 * k, 2 * k + 1] {
            for c in 0..out.cov.ncols() {
                out.cov[(q, c)] *= root;
            }
            for r in 0..out.cov.nrows() {
                out.cov[(r, q)] *= root;
            }
        }
        for q in [2 * k, 2 * k + 1] {
            out.cov[(q, q)] += T::one() - eta;
        }
        Ok(out)
    }

    /// Pre-rotation `φ ∈ (−π, π]` of input `k` that makes both outputs of a 50/50
    /// splitter equally bright: `Re(α_j* e^{iφ} α_k) = 0`, taking `π/2 − arg(α_j* α_k)`.
    pub fn balance_phase(&self, j: usize, k: usize, transmissivity: T) -> Result<T> {
        self.check_mode(j)?;
        self.check_mode(k)?;
        if j == k {
            return Err(Error::InvalidParameter("balance phase needs two distinct modes".into()));
        }
        if (transmissivity - T::lit(0.5)).abs() > T::tol(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "balance phase is defined for a 50/50 splitter, got T = {transmissivity}"
            )));
        }
        for m in [j, k] {
            if self.amplitude(m) <= T::zero() {
                return Err(Error::DegenerateBalance(m));
            }
        }
        let z = self.carriers[j].conj() * self.carriers[k];
        Ok(wrap_angle(T::frac_pi_2() - z.im.atan2(z.re)))
    }

    /// Rows map global quadratures onto carrier-referenced ones:
    /// `X^(c) = cosθ·X + sinθ·Y`, `Y^(c) = −sinθ·X + cosθ·Y` with `θ = arg α`.
    pub fn carrier_frame(&self) -> DMatrix<T> {
        let n = self.modes();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            let (s, c) = self.carrier_phase(k).sin_cos();
            m[(2 * k, 2 * k)] = c;
            m[(2 * k, 2 * k + 1)] = s;
            m[(2 * k + 1, 2 * k)] = -s;
            m[(2 * k + 1, 2 * k + 1)] = c;
        }
        m
    }

    /// Covariance of the carrier-referenced quadratures.
    pub fn carrier_cov(&self) -> DMatrix<T> {
        congruence(&self.cov, &self.carrier_frame())
    }

    /// Global-frame coefficient vector of the carrier-referenced quadrature of mode `k`.
    pub fn carrier_quadrature(&self, k: usize, quad: Quadrature) -> DVector<T> {
        let (s, c) = self.carrier_phase(k).sin_cos();
        let mut v = DVector::zeros(2 * self.modes());
        match quad {
            Quadrature::X => {
                v[2 * k] = c;
                v[2 * k + 1] = s;
            }
            Quadrature::Y => {
                v[2 * k] = -s;
                v[2 * k + 1] = c;
            }
        }
        v
    }

    /// `cᵀΣc`.
    pub fn quadratic_form(&self, coeffs: &DVector<T>) -> Result<T> {
        if coeffs.len() != self.cov.nrows() {
            return Err(Error::DimensionMismatch { expected: self.cov.nrows(), found: coeffs.len() });
        }
        Ok((coeffs.transpose() * &self.cov * coeffs)[(0, 0)])
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<T>> {
        symplectic::symplectic_eigenvalues(&self.cov)
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<T> {
        Ok(self.symplectic_eigenvalues()?.into_iter().fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b)))
    }

    /// Fails unless every symplectic eigenvalue is at least `1 − 1e-9`.
    pub fn ensure_physical(&self) -> Result<()> {
        if self.modes() == 0 {
            return Ok(());
        }
        let nu = self.min_symplectic_eigenvalue().map_err(|_| Error::Unphysical(f64::NAN))?;
        if nu < T::one() - T::tol(1e-9) {
            return Err(Error::Unphysical(nu.as_f64()));
        }
        Ok(())
    }
}

/// Amplitude (`X`) or phase (`Y`) quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    Y,
}
