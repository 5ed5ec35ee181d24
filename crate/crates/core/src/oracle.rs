//! Slow reference solutions for checking [`crate::dynamics`].
//!
//! [`DensePropagator`] diagonalizes the full truncated Hamiltonian once and
//! evolves any initial vector exactly; [`jcm_rwa_pb`] is the closed-form
//! rotating-wave Jaynes-Cummings result for the two-level atom.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::model::{ChainParity, Level, ModelParams, SystemState, C64};

/// Largest truncation accepted by the dense path.
pub const DENSE_N_MAX_LIMIT: usize = 64;

/// The Hamiltonian on the flat basis `|n, l>` at index `3 n + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    pub dimension: usize,
    /// Real symmetric since both couplings are real.
    pub matrix: Mat<f64>,
}

impl DenseHamiltonian {
    /// Largest `|H_ij - H_ji|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..self.dimension {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }
}

fn flat_index(n: usize, level: Level) -> usize {
    3 * n + level.flat_offset()
}

/// `omega_ab |b><b| + omega_ac |c><c| + omega_0 b^dag b`
/// `+ (b^dag + b)(g_ab (|a><b| + |b><a|) + g_ac (|a><c| + |c><a|))`.
pub fn build_hamiltonian(params: &ModelParams) -> DenseHamiltonian {
    let n_max = params.n_max;
    let dimension = 3 * (n_max + 1);
    let mut h = Mat::zeros(dimension, dimension);
    for n in 0..=n_max {
        for level in Level::ALL {
            let i = flat_index(n, level);
            h[(i, i)] = params.bare_energy(n, level);
        }
    }
    for n in 0..n_max {
        let amplitude = ((n + 1) as f64).sqrt();
        for (level, g) in [(Level::B, params.g_ab), (Level::C, params.g_ac)] {
            // <n+1, l| H |n, a> and <n, l| H |n+1, a>
            for (excited, ground) in [(flat_index(n + 1, level), flat_index(n, Level::A)),
                                      (flat_index(n, level), flat_index(n + 1, Level::A))] {
                h[(excited, ground)] = g * amplitude;
                h[(ground, excited)] = g * amplitude;
            }
        }
    }
    DenseHamiltonian { dimension, matrix: h }
}

/// Exact propagation on the truncated space via one eigendecomposition.
#[derive(Debug, Clone)]
pub struct DensePropagator {
    energies: Vec<f64>,
    basis: Mat<f64>,
    /// Initial state projected on the eigenbasis.
    overlaps: Vec<C64>,
    bare: Vec<f64>,
}

impl DensePropagator {
    /// `initial` holds interaction-picture amplitudes at `t = 0` (identical to
    /// Schrodinger-picture ones there) in the flat layout.
    pub fn new(params: &ModelParams, initial: &[C64]) -> Result<Self> {
        params.validate()?;
        if params.n_max > DENSE_N_MAX_LIMIT {
            return Err(Error::DenseTooLarge {
                n_max: params.n_max,
                limit: DENSE_N_MAX_LIMIT,
            });
        }
        let hamiltonian = build_hamiltonian(params);
        if initial.len() != hamiltonian.dimension {
            return Err(Error::invalid(
                "n_max",
                format!("initial vector has length {}, expected {}", initial.len(), hamiltonian.dimension),
            ));
        }
        let dim = hamiltonian.dimension;
        let evd = hamiltonian
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let energies: Vec<f64> = (0..dim).map(|k| evd.S()[k]).collect();
        let basis = evd.U().to_owned();
        let overlaps = (0..dim)
            .map(|k| (0..dim).map(|i| initial[i] * basis[(i, k)]).sum())
            .collect();
        let bare = (0..=params.n_max)
            .flat_map(|n| Level::ALL.map(|level| params.bare_energy(n, level)))
            .collect();
        Ok(DensePropagator {
            energies,
            basis,
            overlaps,
            bare,
        })
    }

    /// Interaction-picture amplitudes `e^{i H0 t} e^{-i H t} |psi(0)>`.
    pub fn at(&self, t: f64) -> Vec<C64> {
        let phased: Vec<C64> = self
            .overlaps
            .iter()
            .zip(self.energies.iter())
            .map(|(&c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        (0..self.basis.nrows())
            .map(|i| {
                let psi: C64 = phased.iter().enumerate().map(|(k, &c)| c * self.basis[(i, k)]).sum();
                psi * C64::from_polar(1.0, self.bare[i] * t)
            })
            .collect()
    }

    pub fn state_at(&self, t: f64) -> SystemState {
        SystemState::from_flat(&self.at(t), t)
    }
}

/// Dense propagation of [`crate::model::initial_state`] to time `t`.
pub fn propagate_dense(params: &ModelParams, t: f64) -> Result<SystemState> {
    let initial = crate::model::initial_state(params)?;
    Ok(DensePropagator::new(params, &initial.to_flat())?.state_at(t))
}

/// Rotating-wave Jaynes-Cummings population of the upper level for an atom
/// starting in `|b>` with a resonant coherent field:
/// `sum_n p_n cos^2(g_ab sqrt(n + 1) t)` with Poisson `p_n`.
///
/// Only meaningful for `g_ac = 0`, `omega_0 = omega_ab` and weak coupling.
pub fn jcm_rwa_pb(params: &ModelParams, t: f64) -> f64 {
    let n_bar = params.n_bar;
    if n_bar == 0.0 {
        return (params.g_ab * t).cos().powi(2);
    }
    // Poisson weights in log space out to where they no longer matter.
    let last = (n_bar + 20.0 * n_bar.sqrt() + 50.0).ceil() as usize;
    let mut ln_factorial = 0.0;
    let mut total = 0.0;
    for n in 0..=last {
        if n > 0 {
            ln_factorial += (n as f64).ln();
        }
        let p = (-n_bar + n as f64 * n_bar.ln() - ln_factorial).exp();
        total += p * (params.g_ab * ((n + 1) as f64).sqrt() * t).cos().powi(2);
    }
    total
}

/// Where each flat index lives in the chain layout.
pub fn chain_of_flat(index: usize) -> ChainParity {
    let level = Level::ALL[index % 3];
    ChainParity::of(index / 3, level)
}
