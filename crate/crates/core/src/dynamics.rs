//! Interaction-picture equations of motion and their fixed-step RK4
//! integration.
//!
//! For every stored index `m` of a chain:
//!
//! ```text
//! da_m/dt = -i g_ab [sqrt(m) b_{m-1} e^{-i D_ab t} + sqrt(m+1) b_{m+1} e^{-i D'_ab t}]
//!           -i g_ac [sqrt(m) c_{m-1} e^{-i D_ac t} + sqrt(m+1) c_{m+1} e^{-i D'_ac t}]
//! db_m/dt = -i g_ab [sqrt(m+1) a_{m+1} e^{+i D_ab t} + sqrt(m) a_{m-1} e^{+i D'_ab t}]
//! dc_m/dt = -i g_ac [sqrt(m+1) a_{m+1} e^{+i D_ac t} + sqrt(m) a_{m-1} e^{+i D'_ac t}]
//! ```
//!
//! with `D = omega - omega_0` and `D' = omega + omega_0`. Couplings past
//! `n_max` are dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{initial_state, ChainParity, ChainState, ModelParams, SystemState, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Fraction of the Fock ladder watched by the truncation monitor.
pub const TAIL_FRACTION: f64 = 0.05;

/// Step-halving agreement required by [`convergence_check`].
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// RK4 step, in `1/omega_ab`.
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: f64,
    /// Largest tolerated `|norm - 1|` at any sample.
    pub norm_tol: f64,
    /// Largest tolerated population on the top 5% of Fock indices.
    pub tail_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            t_end: 2500.0,
            sample_every: 0.5,
            norm_tol: 1e-9,
            tail_tol: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("sample_every", self.sample_every),
            ("norm_tol", self.norm_tol),
            ("tail_tol", self.tail_tol),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        if self.sample_every < self.dt {
            return Err(Error::invalid(
                "sample_every",
                format!("must be >= dt ({}), got {}", self.dt, self.sample_every),
            ));
        }
        Ok(())
    }

    /// `0, sample_every, 2 sample_every, ...` and finally `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut times = Vec::new();
        let mut k = 0usize;
        loop {
            let t = k as f64 * self.sample_every;
            if t >= self.t_end - 1e-9 * self.sample_every {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.t_end);
        times
    }
}

/// Sampled populations of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    pub p_c: Vec<f64>,
    pub norm: Vec<f64>,
    pub params: ModelParams,
    pub meta: IntegratorConfig,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Number of Fock indices `first, first + 2, ...` up to `n_max`.
fn strided_len(first: usize, n_max: usize) -> usize {
    if first > n_max {
        0
    } else {
        (n_max - first) / 2 + 1
    }
}

/// Equations of motion for one chain, acting on a compact vector that holds
/// only the slots of the chain's parity: `[a | b | c]` with `a[k]` at Fock
/// index `a_start + 2k` and `b[j]`, `c[j]` at `excited_start + 2j`.
#[derive(Debug, Clone)]
struct ChainGenerator {
    parity: ChainParity,
    n_max: usize,
    a_len: usize,
    excited_len: usize,
    /// `sqrt(m)` and `sqrt(m + 1)` for each compact `a` slot, zero where
    /// the neighbour falls outside `0..=n_max`.
    a_down: Vec<f64>,
    a_up: Vec<f64>,
    /// Same for the excited ladders.
    ex_down: Vec<f64>,
    ex_up: Vec<f64>,
    g_ab: f64,
    g_ac: f64,
    delta_ab: f64,
    delta_ab_counter: f64,
    delta_ac: f64,
    delta_ac_counter: f64,
}

impl ChainGenerator {
    fn new(params: &ModelParams, parity: ChainParity, n_max: usize) -> Self {
        let a_len = strided_len(parity.a_start(), n_max);
        let excited_len = strided_len(parity.excited_start(), n_max);
        let factors = |first: usize, len: usize| -> (Vec<f64>, Vec<f64>) {
            (0..len)
                .map(|k| {
                    let m = first + 2 * k;
                    let down = if m >= 1 { (m as f64).sqrt() } else { 0.0 };
                    let up = if m < n_max { ((m + 1) as f64).sqrt() } else { 0.0 };
                    (down, up)
                })
                .unzip()
        };
        let (a_down, a_up) = factors(parity.a_start(), a_len);
        let (ex_down, ex_up) = factors(parity.excited_start(), excited_len);
        ChainGenerator {
            parity,
            n_max,
            a_len,
            excited_len,
            a_down,
            a_up,
            ex_down,
            ex_up,
            g_ab: params.g_ab,
            g_ac: params.g_ac,
            delta_ab: params.delta_ab(),
            delta_ab_counter: params.delta_ab_counter(),
            delta_ac: params.delta_ac(),
            delta_ac_counter: params.delta_ac_counter(),
        }
    }

    fn compact_len(&self, has_c: bool) -> usize {
        self.a_len + self.excited_len * if has_c { 2 } else { 1 }
    }

    fn pack(&self, chain: &ChainState) -> Vec<C64> {
        let a0 = self.parity.a_start();
        let e0 = self.parity.excited_start();
        let mut y = Vec::with_capacity(self.compact_len(chain.has_c()));
        y.extend(chain.a.iter().skip(a0).step_by(2));
        y.extend(chain.b.iter().skip(e0).step_by(2));
        y.extend(chain.c.iter().skip(e0).step_by(2));
        y
    }

    fn unpack(&self, y: &[C64], has_c: bool, t: f64) -> ChainState {
        let mut chain = ChainState::zeros(self.parity, self.n_max, has_c);
        let a0 = self.parity.a_start();
        let e0 = self.parity.excited_start();
        let (a, rest) = y.split_at(self.a_len);
        let (b, c) = rest.split_at(self.excited_len);
        for (k, &z) in a.iter().enumerate() {
            chain.a[a0 + 2 * k] = z;
        }
        for (j, &z) in b.iter().enumerate() {
            chain.b[e0 + 2 * j] = z;
        }
        for (j, &z) in c.iter().enumerate() {
            chain.c[e0 + 2 * j] = z;
        }
        chain.t = t;
        chain
    }

    /// Writes the time derivative of the compact vector `y` into `dy`.
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let has_c = y.len() > self.a_len + self.excited_len;
        let rot = |delta: f64| {
            let (s, c) = (delta * t).sin_cos();
            C64::new(c, -s)
        };
        let e_ab = rot(self.delta_ab);
        let e_ab_counter = rot(self.delta_ab_counter);
        let e_ac = rot(self.delta_ac);
        let e_ac_counter = rot(self.delta_ac_counter);

        let (a, rest) = y.split_at(self.a_len);
        let (b, c) = rest.split_at(self.excited_len);
        let (da, rest) = dy.split_at_mut(self.a_len);
        let (db, dc) = rest.split_at_mut(self.excited_len);

        // Excited neighbours of a[k]: index m - 1 is b[k + a0 - 1], m + 1 is b[k + a0].
        let a0 = self.parity.a_start();
        let neighbour = |ladder: &[C64], k: usize, down: f64, up: f64, e_down: C64, e_up: C64| {
            let mut sum = ZERO;
            if down != 0.0 {
                sum += e_down * (ladder[k + a0 - 1] * down);
            }
            if up != 0.0 {
                sum += e_up * (ladder[k + a0] * up);
            }
            sum
        };
        for k in 0..self.a_len {
            let (down, up) = (self.a_down[k], self.a_up[k]);
            let mut s = neighbour(b, k, down, up, e_ab, e_ab_counter) * self.g_ab;
            if has_c {
                s += neighbour(c, k, down, up, e_ac, e_ac_counter) * self.g_ac;
            }
            da[k] = C64::new(s.im, -s.re);
        }

        // Ground neighbours of b[j]: index m + 1 is a[j + e0], m - 1 is a[j + e0 - 1].
        let e0 = self.parity.excited_start();
        for j in 0..self.excited_len {
            let (down, up) = (self.ex_down[j], self.ex_up[j]);
            let mut sum_b = ZERO;
            let mut sum_c = ZERO;
            if up != 0.0 {
                let z = a[j + e0] * up;
                sum_b += e_ab.conj() * z;
                sum_c += e_ac.conj() * z;
            }
            if down != 0.0 {
                let z = a[j + e0 - 1] * down;
                sum_b += e_ab_counter.conj() * z;
                sum_c += e_ac_counter.conj() * z;
            }
            let s = sum_b * self.g_ab;
            db[j] = C64::new(s.im, -s.re);
            if has_c {
                let s = sum_c * self.g_ac;
                dc[j] = C64::new(s.im, -s.re);
            }
        }
    }

    /// First compact slot of each ladder at or above Fock index `from`.
    fn tail_slots(&self, from: usize) -> (usize, usize) {
        let slot = |first: usize, len: usize| {
            if from <= first {
                0
            } else {
                ((from - first + 1) / 2).min(len)
            }
        };
        (
            slot(self.parity.a_start(), self.a_len),
            slot(self.parity.excited_start(), self.excited_len),
        )
    }
}

/// Time derivative of a chain's amplitudes at time `t`, returned in the same
/// layout as the chain.
pub fn rhs(t: f64, chain: &ChainState, params: &ModelParams) -> ChainState {
    let generator = ChainGenerator::new(params, chain.parity, chain.n_max());
    let y = generator.pack(chain);
    let mut dy = vec![ZERO; y.len()];
    generator.eval(t, &y, &mut dy);
    generator.unpack(&dy, chain.has_c(), t)
}

struct Rk4 {
    k: Vec<C64>,
    acc: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Rk4 {
            k: vec![ZERO; len],
            acc: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }

    fn step(&mut self, f: &ChainGenerator, t: f64, h: f64, y: &mut [C64]) {
        let half = 0.5 * h;
        let Rk4 { k, acc, tmp } = self;

        f.eval(t, y, k);
        for ((acc, tmp), (&y, &k)) in acc.iter_mut().zip(tmp.iter_mut()).zip(y.iter().zip(k.iter())) {
            *acc = k;
            *tmp = y + k * half;
        }
        f.eval(t + half, tmp, k);
        for ((acc, tmp), (&y, &k)) in acc.iter_mut().zip(tmp.iter_mut()).zip(y.iter().zip(k.iter())) {
            *acc += k * 2.0;
            *tmp = y + k * half;
        }
        f.eval(t + half, tmp, k);
        for ((acc, tmp), (&y, &k)) in acc.iter_mut().zip(tmp.iter_mut()).zip(y.iter().zip(k.iter())) {
            *acc += k * 2.0;
            *tmp = y + k * h;
        }
        f.eval(t + h, tmp, k);
        let sixth = h / 6.0;
        for ((y, &acc), &k) in y.iter_mut().zip(acc.iter()).zip(k.iter()) {
            *y += (acc + k) * sixth;
        }
    }
}

/// Per-sample observables of one chain.
#[derive(Debug, Default)]
struct ChainTrace {
    p_a: Vec<f64>,
    p_b: Vec<f64>,
    p_c: Vec<f64>,
    norm: Vec<f64>,
    tail: Vec<f64>,
}

fn tail_start(n_max: usize) -> usize {
    let count = ((n_max + 1) as f64 * TAIL_FRACTION).ceil().max(1.0) as usize;
    n_max + 1 - count
}

/// Integrates one chain across the sample grid. Aborts as soon as the chain
/// loses its own norm or leaks into the truncation tail.
fn integrate_chain(
    chain: &ChainState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<(ChainTrace, ChainState)> {
    let generator = ChainGenerator::new(params, chain.parity, chain.n_max());
    let has_c = chain.has_c();
    let mut y = generator.pack(chain);
    let mut stepper = Rk4::new(y.len());
    let mut trace = ChainTrace::default();
    let initial_norm = chain.norm();
    let (a_len, ex_len) = (generator.a_len, generator.excited_len);
    let (a_tail, ex_tail) = generator.tail_slots(tail_start(chain.n_max()));

    let record = |y: &[C64], t: f64, trace: &mut ChainTrace| -> Result<()> {
        let sum = |s: &[C64]| s.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let (a, rest) = y.split_at(a_len);
        let (b, c) = rest.split_at(ex_len);
        let p_a = sum(a);
        let p_b = sum(b);
        let p_c = sum(c);
        let norm = p_a + p_b + p_c;
        let mut tail = sum(&a[a_tail..]) + sum(&b[ex_tail..]);
        if has_c {
            tail += sum(&c[ex_tail..]);
        }
        trace.p_a.push(p_a);
        trace.p_b.push(p_b);
        trace.p_c.push(p_c);
        trace.norm.push(norm);
        trace.tail.push(tail);
        let drift = (norm - initial_norm).abs();
        if !(drift <= cfg.norm_tol) {
            return Err(Error::NormDrift { t, drift });
        }
        if tail > cfg.tail_tol {
            return Err(Error::TruncationOverflow { t, tail });
        }
        Ok(())
    };

    record(&y, times[0], &mut trace)?;
    for window in times.windows(2) {
        let (start, stop) = (window[0], window[1]);
        let steps = ((stop - start) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
        for j in 0..steps {
            let t = start + j as f64 * cfg.dt;
            let h = if j + 1 == steps { stop - t } else { cfg.dt };
            stepper.step(&generator, t, h, &mut y);
        }
        record(&y, stop, &mut trace)?;
    }

    let t_final = *times.last().unwrap();
    Ok((trace, generator.unpack(&y, has_c, t_final)))
}

fn check_inputs(state: &SystemState, params: &ModelParams, cfg: &IntegratorConfig) -> Result<()> {
    params.validate()?;
    cfg.validate()?;
    if state.n_max() != params.n_max || state.odd_chain.n_max() != params.n_max {
        return Err(Error::invalid(
            "n_max",
            format!("state ladder n_max = {} but params.n_max = {}", state.n_max(), params.n_max),
        ));
    }
    Ok(())
}

type ChainResult = Result<(ChainTrace, ChainState)>;

fn assemble(
    even: ChainResult,
    odd: ChainResult,
    times: Vec<f64>,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<(TimeSeries, SystemState)> {
    let ((even, even_final), (odd, odd_final)) = match (even, odd) {
        (Ok(e), Ok(o)) => (e, o),
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => return Err(e),
        (Err(e), Err(o)) => return Err(if failure_time(&o) < failure_time(&e) { o } else { e }),
    };

    let add = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + y).collect() };
    let series = TimeSeries {
        p_a: add(&even.p_a, &odd.p_a),
        p_b: add(&even.p_b, &odd.p_b),
        p_c: add(&even.p_c, &odd.p_c),
        norm: add(&even.norm, &odd.norm),
        times,
        params: *params,
        meta: *cfg,
    };
    for (k, &t) in series.times.iter().enumerate() {
        let drift = (series.norm[k] - 1.0).abs();
        if drift > cfg.norm_tol {
            return Err(Error::NormDrift { t, drift });
        }
        let tail = even.tail[k] + odd.tail[k];
        if tail > cfg.tail_tol {
            return Err(Error::TruncationOverflow { t, tail });
        }
    }
    let t = *series.times.last().unwrap();
    let state = SystemState {
        even_chain: even_final,
        odd_chain: odd_final,
        t,
    };
    Ok((series, state))
}

fn failure_time(e: &Error) -> f64 {
    match e {
        Error::NormDrift { t, .. } | Error::TruncationOverflow { t, .. } => *t,
        _ => f64::NEG_INFINITY,
    }
}

/// Integrates both chains from `state` to `cfg.t_end`, returning the sampled
/// populations and the final state.
pub fn evolve_full(
    state: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<(TimeSeries, SystemState)> {
    check_inputs(state, params, cfg)?;
    let times = cfg.sample_times();
    let run = |chain: &ChainState| integrate_chain(chain, params, cfg, &times);

    #[cfg(feature = "parallel")]
    let (even, odd) = rayon::join(|| run(&state.even_chain), || run(&state.odd_chain));
    #[cfg(not(feature = "parallel"))]
    let (even, odd) = (run(&state.even_chain), run(&state.odd_chain));

    assemble(even, odd, times.clone(), params, cfg)
}

/// [`evolve_full`] with both chains run one after the other on the calling
/// thread, whatever the build features.
pub fn evolve_full_sequential(
    state: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<(TimeSeries, SystemState)> {
    check_inputs(state, params, cfg)?;
    let times = cfg.sample_times();
    let even = integrate_chain(&state.even_chain, params, cfg, &times);
    let odd = integrate_chain(&state.odd_chain, params, cfg, &times);
    assemble(even, odd, times.clone(), params, cfg)
}

/// Samples the populations of `state` evolved under `params` up to `cfg.t_end`.
pub fn evolve(state: &SystemState, params: &ModelParams, cfg: &IntegratorConfig) -> Result<TimeSeries> {
    evolve_full(state, params, cfg).map(|(series, _)| series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dt: f64,
    /// Largest `|P_b(dt) - P_b(dt / 2)|` over the shared sample grid.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Runs the initial coherent state at `cfg.dt` and `cfg.dt / 2` and compares
/// the `P_b` samples.
pub fn convergence_check(params: &ModelParams, cfg: &IntegratorConfig) -> Result<ConvergenceReport> {
    let state = initial_state(params)?;
    let coarse = evolve(&state, params, cfg)?;
    let fine_cfg = IntegratorConfig { dt: cfg.dt / 2.0, ..*cfg };
    let fine = evolve(&state, params, &fine_cfg)?;
    let max_deviation = coarse
        .p_b
        .iter()
        .zip(&fine.p_b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        dt: cfg.dt,
        max_deviation,
        tolerance: CONVERGENCE_TOL,
        passed: max_deviation < CONVERGENCE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{population, Level};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn small_params() -> ModelParams {
        ModelParams {
            g_ab: 0.05,
            g_ac: 0.03,
            omega_ac: 1.4,
            n_bar: 2.0,
            n_max: 24,
            ..Default::default()
        }
    }

    fn short_cfg(t_end: f64) -> IntegratorConfig {
        IntegratorConfig { t_end, ..Default::default() }
    }

    #[test]
    fn sample_grid_ends_at_horizon() {
        let cfg = IntegratorConfig { t_end: 2.3, sample_every: 0.5, ..Default::default() };
        assert_eq!(cfg.sample_times(), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.3]);
        let cfg = IntegratorConfig { t_end: 2.0, sample_every: 0.5, ..Default::default() };
        assert_eq!(cfg.sample_times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(IntegratorConfig::default().sample_times().len(), 5001);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = [
            IntegratorConfig { dt: 0.0, ..Default::default() },
            IntegratorConfig { sample_every: 0.001, ..Default::default() },
            IntegratorConfig { t_end: -1.0, ..Default::default() },
            IntegratorConfig { norm_tol: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn tail_covers_top_five_percent() {
        assert_eq!(tail_start(200), 190);
        assert_eq!(tail_start(8), 8);
        assert_eq!(tail_start(1), 1);
        let params = ModelParams::default();
        let even = ChainGenerator::new(&params, ChainParity::EvenA, 200);
        // a at 0, 2, ..., 200 and b at 1, 3, ..., 199
        assert_eq!((even.a_len, even.excited_len), (101, 100));
        assert_eq!(even.tail_slots(190), (95, 95));
        let odd = ChainGenerator::new(&params, ChainParity::OddA, 200);
        assert_eq!((odd.a_len, odd.excited_len), (100, 101));
        assert_eq!(odd.tail_slots(190), (95, 95));
        assert_eq!(odd.tail_slots(191), (95, 96));
    }

    #[test]
    fn zero_coupling_has_zero_derivative() {
        let params = ModelParams { g_ab: 0.0, g_ac: 0.0, ..small_params() };
        let state = initial_state(&params).unwrap();
        for chain in state.chains() {
            let d = rhs(3.7, chain, &params);
            assert_eq!(d.norm(), 0.0);
        }
    }

    #[test]
    fn single_amplitude_derivative() {
        let params = ModelParams { g_ab: 0.02, g_ac: 0.01, n_max: 6, ..Default::default() };
        let mut chain = ChainState::zeros(ChainParity::OddA, 6, true);
        chain.a[1] = C64::new(1.0, 0.0);
        let d = rhs(0.0, &chain, &params);
        let i = C64::new(0.0, 1.0);
        assert_abs_diff_eq!((d.b[0] - (-i * 0.02)).norm(), 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!((d.b[2] - (-i * 0.02 * 2f64.sqrt())).norm(), 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!((d.c[0] - (-i * 0.01)).norm(), 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!((d.c[2] - (-i * 0.01 * 2f64.sqrt())).norm(), 0.0, epsilon = 1e-18);
        for (level, ladder) in [("a", &d.a), ("b", &d.b), ("c", &d.c)] {
            for (n, z) in ladder.iter().enumerate() {
                if level != "a" && (n == 0 || n == 2) {
                    continue;
                }
                assert_eq!(*z, C64::new(0.0, 0.0), "{level}_{n}");
            }
        }
        assert!(d.respects_parity());
    }

    #[test]
    fn phases_follow_detunings() {
        // b_0 alone feeds a_1 through sqrt(1) e^{-i D_ab t}
        let params = ModelParams { g_ab: 0.1, g_ac: 0.0, omega_0: 0.9, n_max: 4, ..Default::default() };
        let mut chain = ChainState::zeros(ChainParity::OddA, 4, true);
        chain.b[0] = C64::new(1.0, 0.0);
        let t = 2.5;
        let d = rhs(t, &chain, &params);
        let expected = C64::new(0.0, -0.1) * C64::from_polar(1.0, -params.delta_ab() * t);
        assert_abs_diff_eq!((d.a[1] - expected).norm(), 0.0, epsilon = 1e-16);
        // b_2 feeds a_1 through the counter-rotating phase
        let mut chain = ChainState::zeros(ChainParity::OddA, 4, true);
        chain.b[2] = C64::new(1.0, 0.0);
        let d = rhs(t, &chain, &params);
        let expected = C64::new(0.0, -0.1) * 2f64.sqrt() * C64::from_polar(1.0, -params.delta_ab_counter() * t);
        assert_abs_diff_eq!((d.a[1] - expected).norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn truncation_drops_couplings_past_n_max() {
        let params = ModelParams { g_ab: 0.1, g_ac: 0.1, n_max: 3, ..Default::default() };
        let mut chain = ChainState::zeros(ChainParity::OddA, 3, true);
        chain.b[2] = C64::new(1.0, 0.0);
        chain.a[3] = C64::new(0.0, 1.0);
        let d = rhs(0.3, &chain, &params);
        assert!(d.a.iter().chain(&d.b).chain(&d.c).all(|z| z.is_finite()));
        assert_eq!(d.a.len(), 4);
    }

    #[test]
    fn decoupled_run_keeps_b_population() {
        let params = ModelParams { g_ab: 0.0, g_ac: 0.0, ..small_params() };
        let state = initial_state(&params).unwrap();
        let series = evolve(&state, &params, &short_cfg(50.0)).unwrap();
        assert!(series.p_b.iter().all(|&p| (p - 1.0).abs() < 1e-14));
        assert_eq!(*series.times.last().unwrap(), 50.0);
    }

    #[test]
    fn populations_are_complete() {
        let params = small_params();
        let state = initial_state(&params).unwrap();
        let (series, last) = evolve_full(&state, &params, &short_cfg(200.0)).unwrap();
        for k in 0..series.len() {
            let total = series.p_a[k] + series.p_b[k] + series.p_c[k];
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
        assert!(series.p_c.iter().any(|&p| p > 1e-4));
        assert_abs_diff_eq!(population(&last, Level::B), *series.p_b.last().unwrap(), epsilon = 1e-15);
        assert!(last.even_chain.respects_parity() && last.odd_chain.respects_parity());
    }

    #[test]
    fn zero_chain_stays_zero() {
        let params = ModelParams { n_bar: 0.0, ..small_params() };
        let state = initial_state(&params).unwrap();
        assert_eq!(state.even_chain.norm(), 0.0);
        let (_, last) = evolve_full(&state, &params, &short_cfg(100.0)).unwrap();
        let zero = C64::new(0.0, 0.0);
        let even = &last.even_chain;
        assert!(even.a.iter().chain(&even.b).chain(&even.c).all(|z| *z == zero));
        assert!(last.odd_chain.norm() > 0.99);
    }

    #[test]
    fn two_level_run_is_identical_without_c_ladder() {
        let params = ModelParams { g_ac: 0.0, ..small_params() };
        let state = initial_state(&params).unwrap();
        let with_c = evolve(&state, &params, &short_cfg(150.0)).unwrap();
        let without_c = evolve(&state.clone().without_c(), &params, &short_cfg(150.0)).unwrap();
        assert!(with_c.p_c.iter().all(|&p| p == 0.0));
        let bits = |s: &TimeSeries| s.p_b.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&with_c), bits(&without_c));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let params = small_params();
        let state = initial_state(&params).unwrap();
        let a = evolve_full(&state, &params, &short_cfg(40.0)).unwrap();
        let b = evolve_full_sequential(&state, &params, &short_cfg(40.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coarse_step_is_flagged() {
        let params = ModelParams { g_ab: 0.3, g_ac: 0.3, n_bar: 2.0, n_max: 30, ..Default::default() };
        let cfg = IntegratorConfig { dt: 1.0, sample_every: 1.0, t_end: 200.0, ..Default::default() };
        match convergence_check(&params, &cfg) {
            Err(Error::NormDrift { .. }) => {}
            Ok(report) => assert!(!report.passed && report.max_deviation > 1e-4, "{report:?}"),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn small_ladder_overflows() {
        let params = ModelParams { g_ab: 0.3, g_ac: 0.0, n_bar: 4.0, n_max: 22, ..Default::default() };
        let state = initial_state(&params).unwrap();
        let cfg = IntegratorConfig { tail_tol: 1e-12, t_end: 200.0, ..Default::default() };
        assert!(matches!(evolve(&state, &params, &cfg), Err(Error::TruncationOverflow { .. })));
    }

    #[test]
    fn mismatched_ladder_is_rejected() {
        let params = small_params();
        let state = initial_state(&ModelParams { n_max: 30, ..params }).unwrap();
        assert!(matches!(evolve(&state, &params, &short_cfg(1.0)), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn decoupled_convergence_is_exact() {
        let params = ModelParams { g_ab: 0.0, g_ac: 0.0, ..small_params() };
        let report = convergence_check(&params, &short_cfg(20.0)).unwrap();
        assert!(report.passed);
        assert_eq!(report.max_deviation, 0.0);
    }

    #[test]
    fn fourth_order_step_halving() {
        let params = ModelParams { g_ab: 0.1, g_ac: 0.08, omega_ac: 1.5, n_bar: 2.0, n_max: 20, ..Default::default() };
        let state = initial_state(&params).unwrap();
        let run = |dt: f64| {
            let cfg = IntegratorConfig { dt, sample_every: 0.8, t_end: 40.0, norm_tol: 1.0, ..Default::default() };
            evolve(&state, &params, &cfg).unwrap().p_b
        };
        let reference = run(0.025);
        let err = |p: &[f64]| p.iter().zip(&reference).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let e1 = err(&run(0.2));
        let e2 = err(&run(0.1));
        let ratio = e1 / e2;
        assert!((8.0..=24.0).contains(&ratio), "ratio {ratio} ({e1:e} / {e2:e})");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generator_is_norm_preserving(
            g_ab in 0.0f64..0.2,
            g_ac in 0.0f64..0.2,
            omega_ac in 1.05f64..2.5,
            omega_0 in 0.8f64..1.2,
            t in 0.0f64..1000.0,
            odd in any::<bool>(),
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3 * 17),
        ) {
            let params = ModelParams { g_ab, g_ac, omega_ac, omega_0, n_max: 16, ..Default::default() };
            let parity = if odd { ChainParity::OddA } else { ChainParity::EvenA };
            let mut chain = ChainState::zeros(parity, 16, true);
            for (k, &(re, im)) in seed.iter().enumerate() {
                let (level, n) = (k / 17, k % 17);
                let level = Level::ALL[level];
                if parity.contains(n, level) {
                    let z = C64::new(re, im);
                    match level {
                        Level::A => chain.a[n] = z,
                        Level::B => chain.b[n] = z,
                        Level::C => chain.c[n] = z,
                    }
                }
            }
            let norm = chain.norm().sqrt();
            prop_assume!(norm > 1e-3);
            for z in chain.a.iter_mut().chain(chain.b.iter_mut()).chain(chain.c.iter_mut()) {
                *z /= norm;
            }
            let d = rhs(t, &chain, &params);
            prop_assert!(d.respects_parity());
            let growth: f64 = [(&chain.a, &d.a), (&chain.b, &d.b), (&chain.c, &d.c)]
                .iter()
                .flat_map(|(y, dy)| y.iter().zip(dy.iter()))
                .map(|(y, dy)| (y.conj() * dy).re)
                .sum();
            prop_assert!(growth.abs() < 1e-14, "growth {}", growth);
        }
    }
}
