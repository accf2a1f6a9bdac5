//! Monte Carlo cross-checks: sample quadrature fluctuations from a state's
//! covariance and estimate photocurrent variances empirically.
//!
//! Sampling is split into fixed-size chunks. Chunk `c` draws from a ChaCha
//! stream keyed by `(seed, c)`, so a batch is bit-identical for a given
//! `(state, n, seed)` regardless of how many worker threads run.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::detection::{DelayedFunctional, Signal};
use crate::error::{Error, Result};
use crate::gaussian::BrightState;
use crate::scalar::Real;

const CHUNK_ROWS: usize = 1 << 14;
const NOISE_STREAM: u64 = 1 << 40;

/// Environment variable bounding the number of sampling threads.
pub const THREADS_ENV: &str = "QSWAP_THREADS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0);
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` samples of the `2N` quadrature fluctuations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    pub n: usize,
    pub seed: u64,
    pub dim: usize,
    data: Vec<T>,
}

impl<T: Real> SampleBatch<T> {
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Unbiased sample covariance (zero-mean estimator not assumed).
    pub fn covariance(&self) -> DMatrix<T> {
        let d = self.dim;
        let n = self.n as f64;
        let mut mean = vec![0.0f64; d];
        for r in 0..self.n {
            for (m, v) in mean.iter_mut().zip(self.row(r)) {
                *m += v.as_f64();
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut acc = vec![0.0f64; d * d];
        for r in 0..self.n {
            let row = self.row(r);
            for a in 0..d {
                let xa = row[a].as_f64() - mean[a];
                for b in a..d {
                    acc[a * d + b] += xa * (row[b].as_f64() - mean[b]);
                }
            }
        }
        DMatrix::from_fn(d, d, |a, b| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            T::lit(acc[lo * d + hi] / (n - 1.0))
        })
    }
}

/// Factor `Σ = LLᵀ`; falls back to `V·diag(√λ)` when `Σ` is only semidefinite.
pub fn factor<T: Real>(cov: &DMatrix<T>) -> Result<DMatrix<T>> {
    if cov.nrows() == 0 {
        return Ok(cov.clone());
    }
    if let Some(ch) = Cholesky::new(cov.clone()) {
        return Ok(ch.l());
    }
    let eig = SymmetricEigen::new(cov.clone());
    let scale = cov.amax().max(T::one());
    let mut l = eig.eigenvectors.clone();
    for (c, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -T::tol(1e-9) * scale {
            return Err(Error::Numerical(format!("covariance has negative eigenvalue {lam}")));
        }
        let root = lam.max(T::zero()).sqrt();
        for r in 0..l.nrows() {
            l[(r, c)] *= root;
        }
    }
    Ok(l)
}

/// Draws `n` fluctuation vectors `z = L·u` with `u` standard normal.
pub fn sample<T: Real>(state: &BrightState<T>, n: usize, seed: u64) -> Result<SampleBatch<T>> {
    sample_cov(state.cov(), n, seed)
}

pub fn sample_cov<T: Real>(cov: &DMatrix<T>, n: usize, seed: u64) -> Result<SampleBatch<T>> {
    let l = factor(cov)?;
    let dim = cov.nrows();
    let mut data = vec![T::zero(); n * dim];
    if dim > 0 {
        pool().install(|| {
            data.par_chunks_mut(CHUNK_ROWS * dim).enumerate().for_each(|(chunk, out)| {
                let mut rng = stream_rng(seed, chunk as u64);
                let mut u = DVector::<T>::zeros(dim);
                for row in out.chunks_mut(dim) {
                    for x in u.iter_mut() {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        *x = T::lit(g);
                    }
                    let z = &l * &u;
                    row.copy_from_slice(z.as_slice());
                }
            });
        });
    }
    Ok(SampleBatch { n, seed, dim, data })
}

/// Running mean and second moment, merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.count == 0.0 {
            return o;
        }
        if o.count == 0.0 {
            return self;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * o.count / count,
            m2: self.m2 + o.m2 + d * d * self.count * o.count / count,
        }
    }
}

fn check_batch<T: Real>(batch: &SampleBatch<T>, dim: usize) -> Result<()> {
    if batch.n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", batch.n)));
    }
    if dim != batch.dim {
        return Err(Error::DimensionMismatch { expected: batch.dim, found: dim });
    }
    Ok(())
}

/// Unbiased sample variance of `cᵀz`, plus independently drawn electronic noise.
pub fn empirical_variance<T: Real>(batch: &SampleBatch<T>, signal: &Signal<T>) -> Result<T> {
    let c = signal.coeffs();
    check_batch(batch, c.len())?;
    let noise_sd = signal.elec_noise().as_f64().sqrt();
    let coeffs: Vec<f64> = c.iter().map(|v| v.as_f64()).collect();
    let dim = batch.dim;
    let moments = pool().install(|| {
        batch
            .data
            .par_chunks(CHUNK_ROWS * dim)
            .enumerate()
            .map(|(chunk, rows)| {
                let mut noise = stream_rng(batch.seed, NOISE_STREAM + chunk as u64);
                let mut m = Moments::default();
                for row in rows.chunks(dim) {
                    let mut x: f64 = row.iter().zip(&coeffs).map(|(z, w)| z.as_f64() * w).sum();
                    if noise_sd > 0.0 {
                        let g: f64 = StandardNormal.sample(&mut noise);
                        x += noise_sd * g;
                    }
                    m.push(x);
                }
                m
            })
            .collect::<Vec<_>>()
    });
    let total = moments.into_iter().fold(Moments::default(), Moments::merge);
    Ok(T::lit(total.m2 / (total.count - 1.0)))
}

/// RF power of a delay-line photocurrent estimated from complex Fourier amplitudes.
///
/// `cos_batch` and `sin_batch` are independent draws of the in-phase and
/// quadrature RF components of the fluctuations; the delayed arm sees them
/// rotated by the sideband phase `Ωτ`.
pub fn empirical_delay_power<T: Real>(
    cos_batch: &SampleBatch<T>,
    sin_batch: &SampleBatch<T>,
    f: &DelayedFunctional<T>,
    sideband_phase: T,
) -> Result<T> {
    check_batch(cos_batch, f.prompt.len())?;
    check_batch(sin_batch, f.prompt.len())?;
    if cos_batch.n != sin_batch.n {
        return Err(Error::DimensionMismatch { expected: cos_batch.n, found: sin_batch.n });
    }
    let (s, c) = sideband_phase.as_f64().sin_cos();
    let u: Vec<f64> = f.prompt.iter().map(|v| v.as_f64()).collect();
    let v: Vec<f64> = f.delayed.iter().map(|v| v.as_f64()).collect();
    let dot = |w: &[f64], z: &[T]| -> f64 { w.iter().zip(z).map(|(a, b)| a * b.as_f64()).sum() };
    let mut acc = 0.0;
    for r in 0..cos_batch.n {
        let (zc, zs) = (cos_batch.row(r), sin_batch.row(r));
        let (uc, us, vc, vs) = (dot(&u, zc), dot(&u, zs), dot(&v, zc), dot(&v, zs));
        let re = uc + c * vc - s * vs;
        let im = us + s * vc + c * vs;
        acc += re * re + im * im;
    }
    Ok(T::lit(acc / (2.0 * cos_batch.n as f64)))
}

/// Analytic versus sampled variance of one signal.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OracleCheck<T> {
    pub analytic: T,
    pub empirical: T,
    /// Standard error of the sample variance, `analytic·√(2/(n−1))`.
    pub std_err: T,
}

impl<T: Real> OracleCheck<T> {
    pub fn new(analytic: T, empirical: T, n: usize) -> Self {
        let std_err = analytic.abs() * T::lit((2.0 / (n as f64 - 1.0)).sqrt());
        OracleCheck { analytic, empirical, std_err }
    }

    /// Deviation in standard errors.
    pub fn z_score(&self) -> T {
        if self.std_err == T::zero() {
            if self.analytic == self.empirical { T::zero() } else { T::max_value().unwrap_or_else(T::one) }
        } else {
            (self.empirical - self.analytic).abs() / self.std_err
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score() <= T::lit(sigmas)
    }
}

/// Samples the state and compares every signal against its analytic variance.
pub fn check_signals<T: Real>(state: &BrightState<T>, signals: &[&Signal<T>], n: usize, seed: u64) -> Result<Vec<OracleCheck<T>>> {
    let batch = sample(state, n, seed)?;
    signals
        .iter()
        .map(|s| {
            let analytic = state.quadratic_form(s.coeffs())? + s.elec_noise();
            Ok(OracleCheck::new(analytic, empirical_variance(&batch, s)?, n))
        })
        .collect()
}
