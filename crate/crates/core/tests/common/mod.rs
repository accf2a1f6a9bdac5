#![allow(dead_code)]

use std::f64::consts::PI;

use qswap::gaussian::{BrightState, SqueezerParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random squeezed source with `s·h ≥ 1`.
pub fn random_source(rng: &mut impl Rng, label: &str) -> BrightState<f64> {
    let s = rng.random_range(0.1..=1.0);
    let p = SqueezerParams {
        power: rng.random_range(0.2..3.0),
        squeezing: s,
        excess: rng.random_range(1.0..5.0) / s,
        ellipse_angle: rng.random_range(-PI..PI),
        carrier_phase: rng.random_range(-PI..PI),
    };
    BrightState::squeezed(label, &p).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub enum Op {
    Phase { k: usize, phi: f64 },
    Splitter { j: usize, k: usize, t: f64, phi: f64 },
    Loss { k: usize, eta: f64 },
}

impl Op {
    pub fn apply(self, st: &BrightState<f64>) -> BrightState<f64> {
        match self {
            Op::Phase { k, phi } => st.phase_shift(k, phi),
            Op::Splitter { j, k, t, phi } => st.beamsplitter(j, k, t, phi),
            Op::Loss { k, eta } => st.loss(k, eta),
        }
        .unwrap()
    }
}

pub fn random_op(rng: &mut impl Rng, modes: usize) -> Op {
    match rng.random_range(0..3) {
        0 => Op::Phase { k: rng.random_range(0..modes), phi: rng.random_range(-PI..PI) },
        1 if modes > 1 => {
            let j = rng.random_range(0..modes);
            let k = (j + rng.random_range(1..modes)) % modes;
            Op::Splitter { j, k, t: rng.random_range(0.0..=1.0), phi: rng.random_range(-PI..PI) }
        }
        _ => Op::Loss { k: rng.random_range(0..modes), eta: rng.random_range(0.05..=1.0) },
    }
}

/// Random product of sources followed by random passive optics.
pub fn random_network(rng: &mut impl Rng, modes: usize, ops: usize) -> BrightState<f64> {
    let mut st = BrightState::empty();
    for m in 0..modes {
        st = st.tensor(&random_source(rng, &format!("m{m}"))).unwrap();
    }
    for _ in 0..ops {
        st = random_op(rng, modes).apply(&st);
    }
    st
}

/// Complex eigenvalues of `ΩΣ` come in pairs `±iν`; returns the sorted `ν`.
pub fn symplectic_spectrum_oracle(cov: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let n = cov.nrows() / 2;
    let omega = qswap::symplectic::omega::<f64>(n);
    let ev = (omega * cov).complex_eigenvalues();
    let mut nus: Vec<f64> = ev.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
    nus.sort_by(f64::total_cmp);
    nus
}
