//! Two-mode and multipartite entanglement criteria on Gaussian covariances.
//!
//! All quadratures here are carrier-referenced: for equal-power beams the
//! quadrature-level values coincide with photocurrent-level ones.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{BrightState, Quadrature};
use crate::scalar::Real;
use crate::symplectic;

/// Tolerance used when comparing a criterion value against its threshold.
pub const VERDICT_TOL: f64 = 1e-9;

/// Largest mode count for which every bipartition is enumerated.
pub const MAX_BIPARTITION_MODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The inequality is broken: the state is entangled across the tested split.
    Violated,
    Satisfied,
    Inconclusive,
}

impl Verdict {
    /// `Violated` iff `value < threshold − tol`.
    pub fn below<T: Real>(value: T, threshold: T) -> Self {
        if value < threshold - T::tol(VERDICT_TOL) {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Violated => "violated",
            Verdict::Satisfied => "satisfied",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Sign in `Q_i ± g·Q_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Which sign goes with the amplitude quadrature in the two-mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum Pairing {
    /// `V⁺(X) + V⁻(Y)`.
    #[default]
    PlusMinus,
    /// `V⁻(X) + V⁺(Y)`.
    MinusPlus,
}

impl Pairing {
    fn amplitude_sign(self) -> Sign {
        match self {
            Pairing::PlusMinus => Sign::Plus,
            Pairing::MinusPlus => Sign::Minus,
        }
    }
}

/// Parameters that produced a [`CriterionResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params<T> {
    TwoMode { i: usize, j: usize, gain: T, pairing: Pairing },
    Bipartition { subset: Vec<usize> },
    Combination { hvec: Vec<T>, gvec: Vec<T>, groups: Vec<Vec<usize>> },
    Teleportation { squeezing: T, swap_value: T, gap_db: T },
}

impl<T: Real> fmt::Display for Params<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<X: fmt::Display>(xs: &[X]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        }
        match self {
            Params::TwoMode { i, j, gain, pairing } => {
                let p = match pairing {
                    Pairing::PlusMinus => "+-",
                    Pairing::MinusPlus => "-+",
                };
                write!(f, "modes={i},{j};g={gain};pairing={p}")
            }
            Params::Bipartition { subset } => write!(f, "cut={}", list(subset)),
            Params::Combination { hvec, gvec, groups } => {
                let g: Vec<String> = groups.iter().map(|g| list(g)).collect();
                write!(f, "h={};g={};groups={}", list(hvec), list(gvec), g.join("|"))
            }
            Params::Teleportation { squeezing, swap_value, gap_db } => {
                write!(f, "s={squeezing};swap={swap_value};gap_db={gap_db}")
            }
        }
    }
}

/// Outcome of one criterion evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult<T> {
    pub criterion: &'static str,
    pub value: T,
    /// Components that add up to `value`, when the criterion is a sum.
    pub components: Vec<T>,
    pub threshold: T,
    pub verdict: Verdict,
    pub params: Params<T>,
}

fn check_pair<T: Real>(state: &BrightState<T>, i: usize, j: usize) -> Result<()> {
    state.check_mode(i)?;
    state.check_mode(j)?;
    if i == j {
        return Err(Error::InvalidParameter("criterion needs two distinct modes".into()));
    }
    Ok(())
}

/// `V(Q_i ± g·Q_j) / (1 + g²)`; the coherent reference always uses `+g`.
pub fn squeezing_variance<T: Real>(state: &BrightState<T>, quad: Quadrature, i: usize, j: usize, sign: Sign, gain: T) -> Result<T> {
    check_pair(state, i, j)?;
    let c = state.carrier_quadrature(i, quad) + state.carrier_quadrature(j, quad) * (sign.factor::<T>() * gain);
    Ok(state.quadratic_form(&c)? / (T::one() + gain * gain))
}

/// Two-mode inseparability sum `V^±(X) + V^∓(Y)` against the bound 2.
pub fn duan_sum<T: Real>(state: &BrightState<T>, i: usize, j: usize, gain: T, pairing: Pairing) -> Result<CriterionResult<T>> {
    let sx = pairing.amplitude_sign();
    let vx = squeezing_variance(state, Quadrature::X, i, j, sx, gain)?;
    let vy = squeezing_variance(state, Quadrature::Y, i, j, sx.flip(), gain)?;
    let value = vx + vy;
    let threshold = T::lit(2.0);
    Ok(CriterionResult {
        criterion: "duan",
        value,
        components: vec![vx, vy],
        threshold,
        verdict: Verdict::below(value, threshold),
        params: Params::TwoMode { i, j, gain, pairing },
    })
}

/// Gain minimizing one squeezing variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainOptimum<T> {
    pub gain: T,
    pub quotient: T,
    /// `false` when the objective is flat and any gain is optimal.
    pub conclusive: bool,
}

/// Minimizes `(V_i + g²V_j + 2gC)/(1 + g²)` over finite `g`, where `C` is the
/// covariance of the chosen pairing. Stationary points solve
/// `C·g² + (V_i − V_j)·g − C = 0`.
pub fn optimal_gain<T: Real>(state: &BrightState<T>, quad: Quadrature, i: usize, j: usize, sign: Sign) -> Result<GainOptimum<T>> {
    check_pair(state, i, j)?;
    let qi = state.carrier_quadrature(i, quad);
    let qj = state.carrier_quadrature(j, quad);
    let vi = state.quadratic_form(&qi)?;
    let vj = state.quadratic_form(&qj)?;
    if !(vj > T::zero()) {
        return Err(Error::InvalidParameter(format!("V(Q_{j}) = {vj} must be positive")));
    }
    let c = sign.factor::<T>() * (qi.transpose() * state.cov() * &qj)[(0, 0)];
    let quotient = |g: T| (vi + g * g * vj + T::lit(2.0) * g * c) / (T::one() + g * g);
    let scale = vi.abs().max(vj.abs()).max(T::one());
    let tol = T::tol(1e-12) * scale;

    if c.abs() <= tol {
        let flat = (vi - vj).abs() <= tol;
        return Ok(GainOptimum { gain: T::zero(), quotient: vi, conclusive: !flat });
    }
    // roots of g² + ((V_i − V_j)/C)·g − 1 = 0, product −1
    let b = (vi - vj) / c;
    let disc = (b * b + T::lit(4.0)).sqrt();
    let r1 = if b >= T::zero() { (-b - disc) / T::lit(2.0) } else { (-b + disc) / T::lit(2.0) };
    let r2 = -T::one() / r1;
    let (g1, g2) = (r1, r2);
    let best = if quotient(g1) <= quotient(g2) { g1 } else { g2 };
    Ok(GainOptimum { gain: best, quotient: quotient(best), conclusive: true })
}

/// Minimizes the inseparability sum over the gain with a golden-section search
/// on `[lo, hi]`. Returns the gain and the result there.
pub fn optimize_duan_gain<T: Real>(state: &BrightState<T>, i: usize, j: usize, pairing: Pairing, lo: T, hi: T) -> Result<CriterionResult<T>> {
    let eval = |g: T| duan_sum(state, i, j, g, pairing).map(|r| r.value);
    let g = golden_section(eval, lo, hi, T::tol(1e-8))?;
    duan_sum(state, i, j, g, pairing)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section<T: Real, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty search interval [{lo}, {hi}]")));
    }
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut guard = 0;
    while (b - a) > tol && guard < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        guard += 1;
    }
    let mid = (a + b) / T::lit(2.0);
    // endpoints can win for monotone objectives
    let mut best = (mid, f(mid)?);
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best.0)
}

fn check_subset<T: Real>(state: &BrightState<T>, subset: &[usize]) -> Result<()> {
    for &k in subset {
        state.check_mode(k)?;
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() == state.modes() || sorted.len() != subset.len() {
        return Err(Error::InvalidParameter("bipartition side must be a nonempty proper subset".into()));
    }
    Ok(())
}

/// Symplectic spectrum of the partially transposed covariance (`Y_k → −Y_k`
/// for `k ∈ subset`); below 1 certifies entanglement across the cut.
pub fn ppt_symplectic<T: Real>(state: &BrightState<T>, subset: &[usize]) -> Result<(T, CriterionResult<T>)> {
    check_subset(state, subset)?;
    let pt = symplectic::partial_transpose(state.cov(), subset);
    let nus = symplectic::symplectic_eigenvalues(&pt)?;
    let nu_min = nus.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b));
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    let threshold = T::one();
    Ok((
        nu_min,
        CriterionResult {
            criterion: "ppt",
            value: nu_min,
            components: nus,
            threshold,
            verdict: Verdict::below(nu_min, threshold),
            params: Params::Bipartition { subset: sorted },
        },
    ))
}

/// PPT results for every unordered bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptSummary<T> {
    pub results: Vec<CriterionResult<T>>,
    /// Every cut violated: consistent with genuine multipartite entanglement.
    pub all_violated: bool,
}

/// Enumerates the `2^{N−1} − 1` bipartitions by the side containing mode 0.
pub fn bipartitions(modes: usize) -> Result<Vec<Vec<usize>>> {
    if modes > MAX_BIPARTITION_MODES {
        return Err(Error::TooManyModes { modes, limit: MAX_BIPARTITION_MODES });
    }
    if modes < 2 {
        return Ok(Vec::new());
    }
    let rest = modes - 1;
    let full = (1usize << rest) - 1;
    Ok((0..full)
        .map(|mask| std::iter::once(0).chain((0..rest).filter(|b| mask >> b & 1 == 1).map(|b| b + 1)).collect())
        .collect())
}

pub fn ppt_all_bipartitions<T: Real>(state: &BrightState<T>) -> Result<PptSummary<T>> {
    let cuts = bipartitions(state.modes())?;
    let results = cuts
        .iter()
        .map(|cut| ppt_symplectic(state, cut).map(|(_, r)| r))
        .collect::<Result<Vec<_>>>()?;
    let all_violated = !results.is_empty() && results.iter().all(|r| r.verdict == Verdict::Violated);
    Ok(PptSummary { results, all_violated })
}

fn check_len<T: Real>(state: &BrightState<T>, v: &[T]) -> Result<()> {
    if v.len() != state.modes() {
        return Err(Error::DimensionMismatch { expected: state.modes(), found: v.len() });
    }
    Ok(())
}

/// Global-frame functional `Σ_i w_i Q_i^(c)`.
pub fn combination<T: Real>(state: &BrightState<T>, weights: &[T], quad: Quadrature) -> Result<DVector<T>> {
    check_len(state, weights)?;
    let mut c = DVector::zeros(2 * state.modes());
    for (k, &w) in weights.iter().enumerate() {
        if w != T::zero() {
            c += state.carrier_quadrature(k, quad) * w;
        }
    }
    Ok(c)
}

/// `(V(Σ h_i X_i^(c)), V(Σ g_i Y_i^(c)))`.
pub fn combination_variance<T: Real>(state: &BrightState<T>, hvec: &[T], gvec: &[T]) -> Result<(T, T)> {
    let u = combination(state, hvec, Quadrature::X)?;
    let v = combination(state, gvec, Quadrature::Y)?;
    Ok((state.quadratic_form(&u)?, state.quadratic_form(&v)?))
}

fn check_groups<T: Real>(state: &BrightState<T>, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; state.modes()];
    if groups.is_empty() {
        return Err(Error::EmptySelection);
    }
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidParameter("empty group in partition".into()));
        }
        for &k in g {
            state.check_mode(k)?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidParameter(format!("mode {k} appears in two groups")));
            }
        }
    }
    Ok(())
}

/// `V_u + V_v` against `2·Σ_groups |Σ_{i∈group} h_i g_i|`; violation rules out
/// separability with respect to the grouping.
pub fn vlf_test<T: Real>(state: &BrightState<T>, hvec: &[T], gvec: &[T], groups: &[Vec<usize>]) -> Result<CriterionResult<T>> {
    check_groups(state, groups)?;
    let (vu, vv) = combination_variance(state, hvec, gvec)?;
    let bound = groups
        .iter()
        .map(|g| g.iter().fold(T::zero(), |acc, &i| acc + hvec[i] * gvec[i]).abs())
        .fold(T::zero(), |a, b| a + b)
        * T::lit(2.0);
    let value = vu + vv;
    Ok(CriterionResult {
        criterion: "vlf",
        value,
        components: vec![vu, vv],
        threshold: bound,
        verdict: Verdict::below(value, bound),
        params: Params::Combination { hvec: hvec.to_vec(), gvec: gvec.to_vec(), groups: groups.to_vec() },
    })
}

/// Coefficient vectors that minimize `(V_u + V_v) / bound` for a grouping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VlfOptimum<T> {
    pub hvec: Vec<T>,
    pub gvec: Vec<T>,
    /// Smallest achievable `(V_u + V_v) / bound`; below 1 means violation.
    pub ratio: T,
}

/// Dividing by the bound turns the search into a generalized symmetric
/// eigenproblem per sign pattern of the group sums: with `z = (h, g)`,
/// numerator `zᵀAz` (`A` the X and Y blocks) and bound `zᵀBz`, the optimum
/// is `1/λ_max(L⁻¹BL⁻ᵀ)` for `A = LLᵀ`.
pub fn optimal_vlf_vectors<T: Real>(state: &BrightState<T>, groups: &[Vec<usize>]) -> Result<VlfOptimum<T>> {
    check_groups(state, groups)?;
    let n = state.modes();
    let cc = state.carrier_cov();
    let group_of: Vec<Option<usize>> = (0..n).map(|k| groups.iter().position(|g| g.contains(&k))).collect();
    let active: Vec<usize> = (0..n).filter(|k| group_of[*k].is_some()).collect();
    let m = active.len();

    let mut a = DMatrix::<T>::zeros(2 * m, 2 * m);
    for (r, &p) in active.iter().enumerate() {
        for (c, &q) in active.iter().enumerate() {
            a[(r, c)] = cc[(2 * p, 2 * q)];
            a[(m + r, m + c)] = cc[(2 * p + 1, 2 * q + 1)];
        }
    }
    let chol = Cholesky::new(a).ok_or_else(|| Error::Numerical("quadrature covariance not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;

    let patterns = 1usize << (groups.len() - 1);
    let mut best: Option<(T, DVector<T>)> = None;
    for mask in 0..patterns {
        let sigma = |gix: usize| if gix > 0 && (mask >> (gix - 1)) & 1 == 1 { -T::one() } else { T::one() };
        let mut b = DMatrix::<T>::zeros(2 * m, 2 * m);
        for (r, &p) in active.iter().enumerate() {
            let s = sigma(group_of[p].expect("active"));
            b[(r, m + r)] = s;
            b[(m + r, r)] = s;
        }
        let k = &l_inv * b * l_inv.transpose();
        let eig = SymmetricEigen::new(k);
        let (idx, lmax) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::min_value().unwrap_or_else(|| -T::one())), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if lmax <= T::zero() {
            continue;
        }
        let ratio = T::one() / lmax;
        if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
            let z = l_inv.transpose() * eig.eigenvectors.column(idx);
            best = Some((ratio, z));
        }
    }
    let (ratio, z) = best.ok_or_else(|| Error::Numerical("no admissible sign pattern".into()))?;
    let norm = z.norm();
    let mut hvec = vec![T::zero(); n];
    let mut gvec = vec![T::zero(); n];
    for (r, &p) in active.iter().enumerate() {
        hvec[p] = z[r] / norm;
        gvec[p] = z[m + r] / norm;
    }
    if let Some(first) = hvec.iter().chain(gvec.iter()).find(|v| v.abs() > T::tol(1e-12)) {
        if *first < T::zero() {
            hvec.iter_mut().chain(gvec.iter_mut()).for_each(|v| *v = -*v);
        }
    }
    Ok(VlfOptimum { hvec, gvec, ratio })
}

/// Optimized combination test for every bipartition, each cut split into its
/// two sides.
pub fn vlf_all_bipartitions<T: Real>(state: &BrightState<T>) -> Result<Vec<CriterionResult<T>>> {
    bipartitions(state.modes())?
        .into_iter()
        .map(|cut| {
            let rest: Vec<usize> = (0..state.modes()).filter(|k| !cut.contains(k)).collect();
            let groups = vec![cut, rest];
            let opt = optimal_vlf_vectors(state, &groups)?;
            vlf_test(state, &opt.hvec, &opt.gvec, &groups)
        })
        .collect()
}

/// Unit vector over the allowed carrier-referenced quadratures with the
/// smallest variance, first nonzero coefficient positive.
pub fn min_variance_combination<T: Real>(state: &BrightState<T>, allowed: &[(usize, Quadrature)]) -> Result<(Vec<T>, T)> {
    if allowed.is_empty() {
        return Err(Error::EmptySelection);
    }
    for &(k, _) in allowed {
        state.check_mode(k)?;
    }
    let cc = state.carrier_cov();
    let idx: Vec<usize> = allowed
        .iter()
        .map(|&(k, q)| 2 * k + usize::from(q == Quadrature::Y))
        .collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| cc[(idx[r], idx[c])]);
    let eig = SymmetricEigen::new(sub);
    let (col, var) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::max_value().unwrap_or_else(T::one)), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let mut coeffs: Vec<T> = eig.eigenvectors.column(col).iter().copied().collect();
    if let Some(first) = coeffs.iter().find(|v| v.abs() > T::tol(1e-9)) {
        if *first < T::zero() {
            coeffs.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok((coeffs, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SqueezerParams;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    type S = BrightState<f64>;

    fn epr(s: f64, h: f64) -> S {
        let p = SqueezerParams::amplitude_squeezed(1.0, s, h);
        let a = S::squeezed("a", &p).unwrap();
        let b = S::squeezed("b", &p).unwrap();
        a.tensor(&b).unwrap().beamsplitter(0, 1, 0.5, FRAC_PI_2).unwrap()
    }

    fn coherent_pair() -> S {
        S::coherent("a", 1.0, 0.0).unwrap().tensor(&S::coherent("b", 1.0, 0.3).unwrap()).unwrap()
    }

    #[test]
    fn squeezing_variance_examples() {
        assert_relative_eq!(squeezing_variance(&epr(0.5, 100.0), Quadrature::X, 0, 1, Sign::Plus, 1.0).unwrap(), 0.5, epsilon = 1e-12);
        for (q, s) in [(Quadrature::X, Sign::Plus), (Quadrature::Y, Sign::Minus), (Quadrature::X, Sign::Minus)] {
            assert_relative_eq!(squeezing_variance(&coherent_pair(), q, 0, 1, s, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        }
        // (V + g²V + 2gC)/(1 + g²) with V = 1.25, C = −0.75, g = 0.6
        let expected = (1.25 + 0.36 * 1.25 - 2.0 * 0.6 * 0.75) / 1.36;
        assert_relative_eq!(squeezing_variance(&epr(0.5, 2.0), Quadrature::X, 0, 1, Sign::Plus, 0.6).unwrap(), expected, epsilon = 1e-12);
        assert!((expected - 0.588).abs() < 1e-3);
        assert!(squeezing_variance(&epr(0.5, 2.0), Quadrature::X, 0, 0, Sign::Plus, 1.0).is_err());
    }

    #[test]
    fn duan_examples() {
        for h in [2.0, 100.0, 1e4] {
            let r = duan_sum(&epr(0.5, h), 0, 1, 1.0, Pairing::PlusMinus).unwrap();
            assert_relative_eq!(r.value, 1.0, epsilon = 1e-9);
            assert_eq!(r.verdict, Verdict::Violated);
        }
        let r = duan_sum(&coherent_pair(), 0, 1, 1.0, Pairing::PlusMinus).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
        assert_eq!(r.verdict, Verdict::Satisfied);
        // the other pairing sees the anti-correlated combinations
        let r = duan_sum(&epr(0.5, 100.0), 0, 1, 1.0, Pairing::MinusPlus).unwrap();
        assert!(r.value > 2.0);
    }

    fn dense_scan(f: impl Fn(f64) -> f64) -> (f64, f64) {
        let mut best = (0.0, f(0.0));
        for i in -400_000..=400_000 {
            let g = i as f64 * 1e-5;
            let v = f(g);
            if v < best.1 {
                best = (g, v);
            }
        }
        best
    }

    fn custom_pair(vi: f64, vj: f64, c: f64) -> S {
        let cov = DMatrix::from_row_slice(4, 4, &[vi, 0.0, c, 0.0, 0.0, 10.0, 0.0, 0.0, c, 0.0, vj, 0.0, 0.0, 0.0, 0.0, 10.0]);
        S::new(vec![nalgebra::Complex::new(1.0, 0.0); 2], cov, vec!["i".into(), "j".into()]).unwrap()
    }

    #[test]
    fn optimal_gain_matches_dense_scan() {
        let st = custom_pair(1.25, 5.0, -0.75);
        let opt = optimal_gain(&st, Quadrature::X, 0, 1, Sign::Plus).unwrap();
        let (g_scan, q_scan) = dense_scan(|g| (1.25 + g * g * 5.0 - 1.5 * g) / (1.0 + g * g));
        assert_relative_eq!(opt.gain, (29f64.sqrt() - 5.0) / 2.0, epsilon = 1e-12);
        assert!((opt.gain - 0.1926).abs() < 1e-4);
        assert!((opt.gain - g_scan).abs() < 2e-5);
        assert_relative_eq!(opt.quotient, q_scan, epsilon = 1e-9);
        // smallest eigenvalue of [[1.25, −0.75], [−0.75, 5]]
        assert_relative_eq!(opt.quotient, (6.25 - (3.75f64 * 3.75 + 2.25).sqrt()) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn optimal_gain_symmetric_and_uncorrelated() {
        let opt = optimal_gain(&epr(0.5, 100.0), Quadrature::X, 0, 1, Sign::Plus).unwrap();
        assert_relative_eq!(opt.gain.abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(opt.quotient, 0.5, epsilon = 1e-9);
        let flat_free = optimal_gain(&custom_pair(1.0, 3.0, 0.0), Quadrature::X, 0, 1, Sign::Plus).unwrap();
        assert_eq!(flat_free.gain, 0.0);
        assert_relative_eq!(flat_free.quotient, 1.0);
        assert!(flat_free.conclusive);
        let flat = optimal_gain(&coherent_pair(), Quadrature::X, 0, 1, Sign::Plus).unwrap();
        assert!(!flat.conclusive);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let g = golden_section(|x: f64| Ok((x - 0.3) * (x - 0.3)), 0.0, 2.0, 1e-10).unwrap();
        assert!((g - 0.3).abs() < 1e-8);
        let edge = golden_section(|x: f64| Ok(x), 0.0, 2.0, 1e-10).unwrap();
        assert_eq!(edge, 0.0);
        assert!(golden_section(|x: f64| Ok(x), 1.0, 1.0, 1e-10).is_err());
    }

    fn brute_force_nu_min(cov: &DMatrix<f64>, subset: &[usize]) -> f64 {
        let pt = symplectic::partial_transpose(cov, subset);
        let m = symplectic::omega::<f64>(cov.nrows() / 2) * pt;
        m.complex_eigenvalues().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn ppt_of_pure_epr_pair() {
        let st = epr(0.5, 2.0);
        let (nu, r) = ppt_symplectic(&st, &[0]).unwrap();
        assert_relative_eq!(nu, 0.5, epsilon = 1e-9);
        assert_relative_eq!(nu, brute_force_nu_min(st.cov(), &[0]), epsilon = 1e-9);
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(ppt_symplectic(&st, &[]).is_err());
        assert!(ppt_symplectic(&st, &[0, 1]).is_err());
    }

    #[test]
    fn ppt_of_product_of_pairs() {
        let st = epr(0.5, 2.0).tensor(&epr(0.5, 2.0).relabel(0, "c").unwrap().relabel(1, "d").unwrap()).unwrap();
        let summary = ppt_all_bipartitions(&st).unwrap();
        assert_eq!(summary.results.len(), 7);
        for r in &summary.results {
            let Params::Bipartition { subset } = &r.params else { unreachable!() };
            if subset == &[0, 1] {
                assert_relative_eq!(r.value, 1.0, epsilon = 1e-9);
                assert_eq!(r.verdict, Verdict::Satisfied);
            } else {
                assert_eq!(r.verdict, Verdict::Violated, "{subset:?}");
            }
        }
        assert!(!summary.all_violated);
    }

    #[test]
    fn bipartition_enumeration() {
        assert_eq!(bipartitions(4).unwrap().len(), 7);
        assert_eq!(bipartitions(2).unwrap(), vec![vec![0]]);
        assert!(bipartitions(1).unwrap().is_empty());
        assert!(matches!(bipartitions(21), Err(Error::TooManyModes { .. })));
        let coh = ppt_all_bipartitions(&coherent_pair()).unwrap();
        assert_eq!(coh.results.len(), 1);
        assert_eq!(coh.results[0].verdict, Verdict::Satisfied);
    }

    #[test]
    fn vlf_examples() {
        let r = vlf_test(&epr(0.5, 100.0), &[1.0, 1.0], &[1.0, -1.0], &[vec![0], vec![1]]).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.threshold, 4.0);
        assert_eq!(r.verdict, Verdict::Violated);
        let duan = duan_sum(&epr(0.5, 100.0), 0, 1, 1.0, Pairing::PlusMinus).unwrap().value;
        assert_relative_eq!(r.value, 2.0 * duan, epsilon = 1e-9);

        let c = vlf_test(&coherent_pair(), &[1.0, 1.0], &[1.0, -1.0], &[vec![0], vec![1]]).unwrap();
        assert_relative_eq!(c.value, 4.0, epsilon = 1e-12);
        assert_eq!(c.verdict, Verdict::Satisfied);
        assert!(vlf_test(&coherent_pair(), &[1.0, 1.0], &[1.0, -1.0], &[vec![0], vec![0]]).is_err());
        assert!(vlf_test(&coherent_pair(), &[1.0], &[1.0, -1.0], &[vec![0], vec![1]]).is_err());
    }

    #[test]
    fn vlf_optimum_on_epr_pair() {
        let st = epr(0.5, 2.0);
        let opt = optimal_vlf_vectors(&st, &[vec![0], vec![1]]).unwrap();
        assert!(opt.ratio < 1.0);
        let r = vlf_test(&st, &opt.hvec, &opt.gvec, &[vec![0], vec![1]]).unwrap();
        assert_relative_eq!(r.value / r.threshold, opt.ratio, max_relative = 1e-9);
        // (1,1),(1,−1) gives 4s / 4 = s; the optimum cannot be worse
        assert!(opt.ratio <= 0.5 + 1e-9);
    }

    #[test]
    fn min_variance_examples() {
        let single = S::squeezed("a", &SqueezerParams::amplitude_squeezed(1.0, 0.5, 100.0)).unwrap();
        let (c, v) = min_variance_combination(&single, &[(0, Quadrature::X), (0, Quadrature::Y)]).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        assert_relative_eq!(c[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], 0.0, epsilon = 1e-12);

        let (c, v) = min_variance_combination(&epr(0.5, 100.0), &[(0, Quadrature::X), (1, Quadrature::X)]).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-9);
        assert_relative_eq!(c[0], 0.5f64.sqrt(), epsilon = 1e-9);
        assert_relative_eq!(c[1], 0.5f64.sqrt(), epsilon = 1e-9);
        assert!(matches!(min_variance_combination(&single, &[]), Err(Error::EmptySelection)));
    }

    #[test]
    fn combination_variance_single_mode() {
        let st = epr(0.5, 100.0);
        let (vu, vv) = combination_variance(&st, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(vu, 50.25, epsilon = 1e-9);
        assert_eq!(vv, 0.0);
        assert!(combination_variance(&st, &[1.0], &[0.0, 0.0]).is_err());
    }
}
