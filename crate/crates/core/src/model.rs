//! Physical parameters, the truncated Fock-ladder state and its split into
//! two parity chains.
//!
//! Frequencies are measured in units of `omega_ab` and times in `1/omega_ab`.
//! Basis labels are `|n, l>` with photon number `n` and atomic level `l`.
//! The Hamiltonian only couples `|n, a>` to `|n +- 1, b>` and `|n +- 1, c>`, so
//! the labels fall into two closed chains:
//!
//! * [`ChainParity::EvenA`]: even `n` on `|a>`, odd `n` on `|b>` and `|c>`;
//! * [`ChainParity::OddA`]: odd `n` on `|a>`, even `n` on `|b>` and `|c>`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Smallest fraction of the coherent state the truncated ladder must hold.
pub const MIN_CAPTURED_WEIGHT: f64 = 1.0 - 1e-6;

/// Above this mean photon number `exp(-n_bar / 2)` is no longer a normal f64.
const MAX_N_BAR: f64 = 1400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    A,
    B,
    C,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::B, Level::C];

    /// Position of the level inside one rung of the flat basis `3 n + l`.
    pub fn flat_offset(self) -> usize {
        match self {
            Level::A => 0,
            Level::B => 1,
            Level::C => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainParity {
    EvenA,
    OddA,
}

impl ChainParity {
    /// First Fock index stored on the `|a>` ladder.
    pub fn a_start(self) -> usize {
        match self {
            ChainParity::EvenA => 0,
            ChainParity::OddA => 1,
        }
    }

    /// First Fock index stored on the `|b>` and `|c>` ladders.
    pub fn excited_start(self) -> usize {
        1 - self.a_start()
    }

    pub fn start(self, level: Level) -> usize {
        match level {
            Level::A => self.a_start(),
            Level::B | Level::C => self.excited_start(),
        }
    }

    /// The chain a basis label belongs to.
    pub fn of(n: usize, level: Level) -> ChainParity {
        let even = n % 2 == 0;
        match (level, even) {
            (Level::A, true) | (Level::B | Level::C, false) => ChainParity::EvenA,
            _ => ChainParity::OddA,
        }
    }

    pub fn contains(self, n: usize, level: Level) -> bool {
        Self::of(n, level) == self
    }
}

/// Physical constants and the Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_ab: f64,
    pub omega_ac: f64,
    pub omega_0: f64,
    pub g_ab: f64,
    pub g_ac: f64,
    pub n_bar: f64,
    pub alpha_phase: f64,
    /// Highest Fock index kept (inclusive).
    pub n_max: usize,
}

impl Default for ModelParams {
    /// Resonant field, `g_ab = 0.02`, `g_ac / g_ab = 0.5`, `omega_ac = 1.3`,
    /// `n_bar = 10` and `n_max = 200`.
    fn default() -> Self {
        ModelParams {
            omega_ab: 1.0,
            omega_ac: 1.3,
            omega_0: 1.0,
            g_ab: 0.02,
            g_ac: 0.01,
            n_bar: 10.0,
            alpha_phase: 0.0,
            n_max: 200,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_ab", self.omega_ab),
            ("omega_ac", self.omega_ac),
            ("omega_0", self.omega_0),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        for (name, value) in [("g_ab", self.g_ab), ("g_ac", self.g_ac)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")));
            }
        }
        validate_n_bar(self.n_bar)?;
        if !self.alpha_phase.is_finite() {
            return Err(Error::invalid("alpha_phase", "must be finite"));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("n_max", "must be >= 1"));
        }
        Ok(())
    }

    /// `omega_ab - omega_0`
    pub fn delta_ab(&self) -> f64 {
        self.omega_ab - self.omega_0
    }

    /// `omega_ab + omega_0`
    pub fn delta_ab_counter(&self) -> f64 {
        self.omega_ab + self.omega_0
    }

    /// `omega_ac - omega_0`
    pub fn delta_ac(&self) -> f64 {
        self.omega_ac - self.omega_0
    }

    /// `omega_ac + omega_0`
    pub fn delta_ac_counter(&self) -> f64 {
        self.omega_ac + self.omega_0
    }

    /// The same parameters with the third level decoupled.
    pub fn two_level(&self) -> Self {
        ModelParams { g_ac: 0.0, ..*self }
    }

    /// Free energy of `|n, level>` under `omega_ab |b><b| + omega_ac |c><c| + omega_0 b^dag b`.
    pub fn bare_energy(&self, n: usize, level: Level) -> f64 {
        let atom = match level {
            Level::A => 0.0,
            Level::B => self.omega_ab,
            Level::C => self.omega_ac,
        };
        atom + n as f64 * self.omega_0
    }
}

fn validate_n_bar(n_bar: f64) -> Result<()> {
    if !(n_bar.is_finite() && n_bar >= 0.0) {
        return Err(Error::invalid("n_bar", format!("must be finite and >= 0, got {n_bar}")));
    }
    if n_bar > MAX_N_BAR {
        return Err(Error::invalid("n_bar", format!("must be <= {MAX_N_BAR}, got {n_bar}")));
    }
    Ok(())
}

fn coherent_recurrence(n_bar: f64, alpha_phase: f64, n_max: usize) -> Vec<C64> {
    let alpha = C64::from_polar(n_bar.sqrt(), alpha_phase);
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut w = C64::new((-0.5 * n_bar).exp(), 0.0);
    weights.push(w);
    for n in 0..n_max {
        w = w * alpha / ((n + 1) as f64).sqrt();
        weights.push(w);
    }
    weights
}

/// Fock amplitudes `w_n = exp(-n_bar/2) alpha^n / sqrt(n!)` of the coherent
/// state with `alpha = sqrt(n_bar) exp(i alpha_phase)`, for `n = 0..=n_max`.
///
/// Fails when the ladder holds less than `1 - 1e-6` of the state.
pub fn coherent_weights(n_bar: f64, alpha_phase: f64, n_max: usize) -> Result<Vec<C64>> {
    validate_n_bar(n_bar)?;
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be >= 1"));
    }
    let weights = coherent_recurrence(n_bar, alpha_phase, n_max);
    let captured: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    if captured < MIN_CAPTURED_WEIGHT {
        return Err(Error::ClippedInitialState { n_max, captured });
    }
    Ok(weights)
}

/// Coherent amplitudes on a ladder too short to hold the whole state,
/// rescaled to unit norm. Used for small reference problems.
pub fn renormalized_coherent_weights(n_bar: f64, alpha_phase: f64, n_max: usize) -> Result<Vec<C64>> {
    validate_n_bar(n_bar)?;
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be >= 1"));
    }
    let mut weights = coherent_recurrence(n_bar, alpha_phase, n_max);
    let norm = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    weights.iter_mut().for_each(|w| *w /= norm);
    Ok(weights)
}

/// Amplitudes of one parity chain. Ladders are dense over `0..=n_max`; slots
/// of the wrong parity stay zero. An empty `c` ladder means the third level
/// is not part of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub parity: ChainParity,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
    pub t: f64,
}

impl ChainState {
    pub fn zeros(parity: ChainParity, n_max: usize, with_c: bool) -> Self {
        let ladder = vec![C64::new(0.0, 0.0); n_max + 1];
        ChainState {
            parity,
            a: ladder.clone(),
            b: ladder.clone(),
            c: if with_c { ladder } else { Vec::new() },
            t: 0.0,
        }
    }

    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn has_c(&self) -> bool {
        !self.c.is_empty()
    }

    pub fn ladder(&self, level: Level) -> &[C64] {
        match level {
            Level::A => &self.a,
            Level::B => &self.b,
            Level::C => &self.c,
        }
    }

    pub fn population(&self, level: Level) -> f64 {
        self.ladder(level).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        Level::ALL.iter().map(|&l| self.population(l)).sum()
    }

    /// Population on Fock indices `>= from`, all levels.
    pub fn tail_population(&self, from: usize) -> f64 {
        Level::ALL
            .iter()
            .flat_map(|&l| self.ladder(l).iter().skip(from))
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// True when every slot of the wrong parity is exactly zero.
    pub fn respects_parity(&self) -> bool {
        Level::ALL.iter().all(|&level| {
            self.ladder(level)
                .iter()
                .enumerate()
                .all(|(n, z)| self.parity.contains(n, level) || *z == C64::new(0.0, 0.0))
        })
    }
}

/// The full interaction-picture state: two decoupled chains at a common time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub even_chain: ChainState,
    pub odd_chain: ChainState,
    pub t: f64,
}

impl SystemState {
    /// Atom in `|b>`, field in the given photon-number amplitudes.
    pub fn excited_b(weights: &[C64], with_c: bool) -> Self {
        let n_max = weights.len() - 1;
        let mut even_chain = ChainState::zeros(ChainParity::EvenA, n_max, with_c);
        let mut odd_chain = ChainState::zeros(ChainParity::OddA, n_max, with_c);
        for (n, &w) in weights.iter().enumerate() {
            match ChainParity::of(n, Level::B) {
                ChainParity::EvenA => even_chain.b[n] = w,
                ChainParity::OddA => odd_chain.b[n] = w,
            }
        }
        SystemState {
            even_chain,
            odd_chain,
            t: 0.0,
        }
    }

    /// Rebuilds the chain layout from amplitudes in the flat basis `3 n + l`.
    pub fn from_flat(flat: &[C64], t: f64) -> Self {
        assert!(flat.len() % 3 == 0 && flat.len() >= 6, "flat state must hold whole rungs");
        let n_max = flat.len() / 3 - 1;
        let mut even_chain = ChainState::zeros(ChainParity::EvenA, n_max, true);
        let mut odd_chain = ChainState::zeros(ChainParity::OddA, n_max, true);
        for n in 0..=n_max {
            for level in Level::ALL {
                let chain = match ChainParity::of(n, level) {
                    ChainParity::EvenA => &mut even_chain,
                    ChainParity::OddA => &mut odd_chain,
                };
                let z = flat[3 * n + level.flat_offset()];
                match level {
                    Level::A => chain.a[n] = z,
                    Level::B => chain.b[n] = z,
                    Level::C => chain.c[n] = z,
                }
            }
        }
        even_chain.t = t;
        odd_chain.t = t;
        SystemState {
            even_chain,
            odd_chain,
            t,
        }
    }

    pub fn to_flat(&self) -> Vec<C64> {
        let n_max = self.n_max();
        let mut flat = vec![C64::new(0.0, 0.0); 3 * (n_max + 1)];
        for chain in self.chains() {
            for level in Level::ALL {
                for (n, &z) in chain.ladder(level).iter().enumerate() {
                    if chain.parity.contains(n, level) {
                        flat[3 * n + level.flat_offset()] = z;
                    }
                }
            }
        }
        flat
    }

    /// Drops the `|c>` ladders, leaving the two-level model.
    pub fn without_c(mut self) -> Self {
        self.even_chain.c = Vec::new();
        self.odd_chain.c = Vec::new();
        self
    }

    pub fn n_max(&self) -> usize {
        self.even_chain.n_max()
    }

    pub fn chains(&self) -> [&ChainState; 2] {
        [&self.even_chain, &self.odd_chain]
    }

    pub fn norm(&self) -> f64 {
        self.even_chain.norm() + self.odd_chain.norm()
    }
}

/// Atom in `|b>`, field in the coherent state of `params`, at `t = 0`.
pub fn initial_state(params: &ModelParams) -> Result<SystemState> {
    params.validate()?;
    let weights = coherent_weights(params.n_bar, params.alpha_phase, params.n_max)?;
    Ok(SystemState::excited_b(&weights, true))
}

/// `sum_n |l_n|^2` over both chains, accumulated in Fock order so the result
/// matches [`population_flat`] bit for bit.
pub fn population(state: &SystemState, level: Level) -> f64 {
    let mut total = 0.0;
    for chain in [&state.even_chain, &state.odd_chain] {
        if chain.ladder(level).is_empty() {
            return 0.0;
        }
    }
    for n in 0..=state.n_max() {
        let chain = match ChainParity::of(n, level) {
            ChainParity::EvenA => &state.even_chain,
            ChainParity::OddA => &state.odd_chain,
        };
        total += chain.ladder(level)[n].norm_sqr();
    }
    total
}

/// Same observable on the flat basis `3 n + l`.
pub fn population_flat(flat: &[C64], level: Level) -> f64 {
    flat.iter()
        .skip(level.flat_offset())
        .step_by(3)
        .map(|z| z.norm_sqr())
        .sum()
}
