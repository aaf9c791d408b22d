//! Leaky integrate-and-fire dynamics and the double-exponential synapse
//! kernel shared by the non-sensory neurons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a leaky integrate-and-fire neuron.
///
/// Units: capacitance nF, conductance µS, potentials mV. With nA currents
/// these combine so that dV/dt comes out in mV/ms when dt is given in
/// seconds and scaled accordingly (1 nA / 1 µS = 1 mV of steady-state
/// drive, 1 nF / 1 µS = 1 ms membrane time constant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Membrane capacitance, nF.
    pub capacitance: f64,
    /// Leak conductance g_L, µS.
    pub leak_conductance: f64,
    /// Resting potential V_0, mV.
    pub rest_potential: f64,
    /// Spike threshold V_T, mV.
    pub threshold: f64,
    /// Potential recorded on a spike step, V_max, mV.
    pub spike_value: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            capacitance: 1.0,
            leak_conductance: 0.05,
            rest_potential: -70.0,
            threshold: -50.0,
            spike_value: 30.0,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance > 0.0) {
            return Err(Error::config("capacitance", "must be > 0"));
        }
        if !(self.leak_conductance > 0.0) {
            return Err(Error::config("leak_conductance", "must be > 0"));
        }
        if !(self.threshold > self.rest_potential) {
            return Err(Error::config("threshold", "must exceed rest_potential"));
        }
        if !(self.spike_value >= self.threshold) {
            return Err(Error::config("spike_value", "must be >= threshold"));
        }
        Ok(())
    }

    /// Membrane time constant C/g_L in seconds.
    pub fn tau_membrane_s(&self) -> f64 {
        self.capacitance / self.leak_conductance * 1e-3
    }

    /// Minimum constant applied current (nA) that reaches threshold.
    pub fn rheobase(&self) -> f64 {
        self.leak_conductance * (self.threshold - self.rest_potential)
    }
}

/// Instantaneous state of a LIF neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifState {
    /// Membrane potential, mV.
    pub potential: f64,
    /// True when the current step crossed threshold.
    pub spiked_now: bool,
}

impl LifState {
    pub fn at_rest(params: &LifParams) -> Self {
        LifState {
            potential: params.rest_potential,
            spiked_now: false,
        }
    }
}

/// One forward-Euler step of C dV/dt = -g_L (V - V_0) + I_app + I_syn.
///
/// A step whose updated potential reaches threshold reports `spiked_now`
/// and records V_max; the step after a spike restarts from V_0.
pub fn lif_step(
    state: LifState,
    params: &LifParams,
    i_app: f64,
    i_syn: f64,
    dt: f64,
) -> Result<LifState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !state.potential.is_finite() || !i_app.is_finite() || !i_syn.is_finite() {
        return Err(Error::InvalidState("non-finite LIF input".into()));
    }
    let v = if state.spiked_now {
        params.rest_potential
    } else {
        state.potential
    };
    // dt is in seconds; potentials in mV evolve on the ms scale.
    let dt_ms = dt * 1e3;
    let dv = (-params.leak_conductance * (v - params.rest_potential) + i_app + i_syn)
        / params.capacitance;
    let v_next = v + dv * dt_ms;
    if v_next >= params.threshold {
        Ok(LifState {
            potential: params.spike_value,
            spiked_now: true,
        })
    } else {
        Ok(LifState {
            potential: v_next,
            spiked_now: false,
        })
    }
}

/// Double-exponential synapse kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapseKernelParams {
    /// Current scale I_0, nA.
    pub peak_scale: f64,
    /// Slow (decay) time constant τ, ms.
    pub tau_slow: f64,
    /// Fast (rise) time constant τ_s, ms.
    pub tau_fast: f64,
}

impl Default for SynapseKernelParams {
    fn default() -> Self {
        // A kernel long enough to bridge the inter-spike intervals of the
        // ~10 Hz comparator neurons, so coincidence detection works on
        // rate overlap rather than exact spike alignment.
        SynapseKernelParams {
            peak_scale: 1.0,
            tau_slow: 100.0,
            tau_fast: 10.0,
        }
    }
}

impl SynapseKernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_fast > 0.0 && self.tau_slow > self.tau_fast) {
            return Err(Error::config("tau_slow", "requires tau_slow > tau_fast > 0"));
        }
        if !(self.peak_scale > 0.0) {
            return Err(Error::config("peak_scale", "must be > 0"));
        }
        Ok(())
    }

    /// Time after a spike (s) at which the kernel peaks.
    pub fn peak_delay_s(&self) -> f64 {
        let tau = self.tau_slow;
        let tau_s = self.tau_fast;
        (tau * tau_s / (tau - tau_s)) * (tau / tau_s).ln() * 1e-3
    }

    /// History window (s) beyond which a spike's contribution is dropped.
    pub fn history_window_s(&self) -> f64 {
        10.0 * self.tau_slow * 1e-3
    }
}

/// An ordered record of spike timestamps, seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
}

impl SpikeTrain {
    pub fn new() -> Self {
        SpikeTrain { times: Vec::new() }
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "spike times must be strictly increasing".into(),
            ));
        }
        Ok(SpikeTrain { times })
    }

    pub fn push(&mut self, t: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidArgument(format!(
                    "spike at {t} s not after previous spike at {last} s"
                )));
            }
        }
        self.times.push(t);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Drop spikes older than the kernel history window before `t`.
    pub fn trim(&mut self, kernel: &SynapseKernelParams, t: f64) {
        let cutoff = t - kernel.history_window_s();
        let keep = self.times.partition_point(|&s| s < cutoff);
        if keep > 0 {
            self.times.drain(..keep);
        }
    }
}

/// Synaptic current at time `t` (s) from a presynaptic spike train.
///
/// I = w · I_0 · Σ_k [exp(-(t - t_k)/τ) - exp(-(t - t_k)/τ_s)], summed over
/// spikes within the history window. Negative weights are inhibitory.
pub fn synapse_current(
    kernel: &SynapseKernelParams,
    weight: f64,
    presyn_spikes: &SpikeTrain,
    t: f64,
) -> f64 {
    let window = kernel.history_window_s();
    let mut sum = 0.0;
    for &tk in presyn_spikes.times().iter().rev() {
        let dt_ms = (t - tk) * 1e3;
        if dt_ms < 0.0 {
            continue;
        }
        if (t - tk) > window {
            break;
        }
        sum += (-dt_ms / kernel.tau_slow).exp() - (-dt_ms / kernel.tau_fast).exp();
    }
    weight * kernel.peak_scale * sum
}

/// Incremental evaluation of the double-exponential kernel on a fixed grid.
///
/// Holds the two exponential accumulators so the network loop can advance a
/// synapse in O(1) per step instead of re-summing the spike history. Agrees
/// with [`synapse_current`] up to the dropped sub-window tail.
#[derive(Debug, Clone, Copy)]
pub struct SynapseAccumulator {
    slow: f64,
    fast: f64,
    decay_slow: f64,
    decay_fast: f64,
}

impl SynapseAccumulator {
    pub fn new(kernel: &SynapseKernelParams, dt: f64) -> Self {
        let dt_ms = dt * 1e3;
        SynapseAccumulator {
            slow: 0.0,
            fast: 0.0,
            decay_slow: (-dt_ms / kernel.tau_slow).exp(),
            decay_fast: (-dt_ms / kernel.tau_fast).exp(),
        }
    }

    /// Advance one grid step, registering whether a presynaptic spike
    /// occurred at the step boundary just passed.
    pub fn step(&mut self, presyn_spiked: bool) {
        if presyn_spiked {
            self.slow += 1.0;
            self.fast += 1.0;
        }
        self.slow *= self.decay_slow;
        self.fast *= self.decay_fast;
    }

    /// Current kernel value, before weight and I_0 scaling.
    pub fn value(&self) -> f64 {
        self.slow - self.fast
    }

    pub fn reset(&mut self) {
        self.slow = 0.0;
        self.fast = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn rest_is_an_equilibrium() {
        let params = LifParams::default();
        let mut state = LifState::at_rest(&params);
        for _ in 0..1000 {
            state = lif_step(state, &params, 0.0, 0.0, 1e-3).unwrap();
            assert_eq!(state.potential, params.rest_potential);
            assert!(!state.spiked_now);
        }
    }

    #[test]
    fn suprathreshold_drive_spikes_at_analytic_period() {
        let params = LifParams::default();
        let i_app = 1.5; // V_0 + I/g_L = -40 mV > V_T
        let dt = 1e-4;
        let mut state = LifState::at_rest(&params);
        let mut spike_times = Vec::new();
        let mut t = 0.0;
        while spike_times.len() < 20 {
            state = lif_step(state, &params, i_app, 0.0, dt).unwrap();
            t += dt;
            if state.spiked_now {
                spike_times.push(t);
            }
        }
        let periods: Vec<f64> = spike_times.windows(2).map(|w| w[1] - w[0]).collect();
        let mean_period = periods.iter().sum::<f64>() / periods.len() as f64;
        let tau = params.tau_membrane_s();
        let expected = -tau
            * (1.0
                - params.leak_conductance * (params.threshold - params.rest_potential) / i_app)
                .ln();
        assert_relative_eq!(mean_period, expected, max_relative = 0.02);
    }

    #[test]
    fn subthreshold_drive_converges_to_fixed_point() {
        let params = LifParams::default();
        let i_app = 0.5; // fixed point -60 mV < V_T
        let target = params.rest_potential + i_app / params.leak_conductance;
        let mut state = LifState::at_rest(&params);
        let mut prev_gap = (target - state.potential).abs();
        for _ in 0..5000 {
            state = lif_step(state, &params, i_app, 0.0, 1e-3).unwrap();
            assert!(!state.spiked_now);
            let gap = (target - state.potential).abs();
            assert!(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        assert_abs_diff_eq!(state.potential, target, epsilon = 1e-6);
    }

    #[test]
    fn reset_contract_restarts_from_rest() {
        let params = LifParams::default();
        let mut state = LifState::at_rest(&params);
        let mut saw_spike = false;
        for _ in 0..200_000 {
            let prev_spiked = state.spiked_now;
            state = lif_step(state, &params, 2.0, 0.0, 1e-4).unwrap();
            if prev_spiked {
                saw_spike = true;
                // First Euler step after a spike integrates from V_0.
                let dv = (-params.leak_conductance * 0.0 + 2.0) / params.capacitance * 0.1;
                assert_abs_diff_eq!(
                    state.potential,
                    params.rest_potential + dv,
                    epsilon = 1e-12
                );
            }
        }
        assert!(saw_spike);
    }

    #[test]
    fn euler_convergence_halving_dt() {
        let params = LifParams::default();
        let i_app = 1.5;
        let nth_spike_time = |dt: f64| -> f64 {
            let mut state = LifState::at_rest(&params);
            let mut t = 0.0;
            let mut count = 0;
            loop {
                state = lif_step(state, &params, i_app, 0.0, dt).unwrap();
                t += dt;
                if state.spiked_now {
                    count += 1;
                    if count == 10 {
                        return t;
                    }
                }
            }
        };
        let dt = 1e-4;
        let t_coarse = nth_spike_time(dt);
        let t_fine = nth_spike_time(dt / 2.0);
        assert!((t_coarse - t_fine).abs() < dt * 10.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = LifParams::default();
        let state = LifState::at_rest(&params);
        assert!(lif_step(state, &params, 0.0, 0.0, 0.0).is_err());
        assert!(lif_step(state, &params, f64::NAN, 0.0, 1e-3).is_err());
        let bad = LifState {
            potential: f64::INFINITY,
            spiked_now: false,
        };
        assert!(lif_step(bad, &params, 0.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn kernel_zero_at_spike_time() {
        let kernel = SynapseKernelParams::default();
        let train = SpikeTrain::from_times(vec![1.0]).unwrap();
        assert_eq!(synapse_current(&kernel, 1.0, &train, 1.0), 0.0);
    }

    #[test]
    fn kernel_peaks_at_analytic_argmax() {
        let kernel = SynapseKernelParams::default();
        let train = SpikeTrain::from_times(vec![0.0]).unwrap();
        let t_star = kernel.peak_delay_s();
        let grid_dt = 1e-4;
        let mut best_t = 0.0;
        let mut best_v = f64::NEG_INFINITY;
        for i in 0..10_000 {
            let t = i as f64 * grid_dt;
            let v = synapse_current(&kernel, 1.0, &train, t);
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
        assert!((best_t - t_star).abs() <= grid_dt + 1e-12);
    }

    #[test]
    fn negative_weight_mirrors_positive() {
        let kernel = SynapseKernelParams::default();
        let train = SpikeTrain::from_times(vec![0.0, 0.05, 0.2]).unwrap();
        for i in 0..50 {
            let t = 0.21 + i as f64 * 0.01;
            let pos = synapse_current(&kernel, 1.0, &train, t);
            let neg = synapse_current(&kernel, -1.0, &train, t);
            assert_abs_diff_eq!(pos, -neg, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_positive_after_spike() {
        let kernel = SynapseKernelParams::default();
        let train = SpikeTrain::from_times(vec![0.0]).unwrap();
        for i in 1..1000 {
            let t = i as f64 * 1e-3;
            assert!(synapse_current(&kernel, 1.0, &train, t) > 0.0);
        }
    }

    #[test]
    fn superposition_over_merged_trains() {
        let kernel = SynapseKernelParams::default();
        let a = SpikeTrain::from_times(vec![0.01, 0.12, 0.30]).unwrap();
        let b = SpikeTrain::from_times(vec![0.05, 0.22]).unwrap();
        let mut merged: Vec<f64> = a.times().iter().chain(b.times()).copied().collect();
        merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let merged = SpikeTrain::from_times(merged).unwrap();
        for i in 0..100 {
            let t = 0.31 + i as f64 * 0.005;
            let lhs = synapse_current(&kernel, 0.7, &merged, t);
            let rhs =
                synapse_current(&kernel, 0.7, &a, t) + synapse_current(&kernel, 0.7, &b, t);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn accumulator_matches_explicit_sum() {
        let kernel = SynapseKernelParams::default();
        let dt = 1e-3;
        let mut acc = SynapseAccumulator::new(&kernel, dt);
        let mut train = SpikeTrain::new();
        let spike_steps = [10usize, 50, 51, 200, 600];
        for step in 0..1000usize {
            let spiked = spike_steps.contains(&step);
            if spiked {
                train.push(step as f64 * dt).unwrap();
            }
            acc.step(spiked);
            let t = (step + 1) as f64 * dt;
            let explicit = synapse_current(&kernel, 1.0, &train, t);
            let incremental = kernel.peak_scale * acc.value();
            assert_abs_diff_eq!(explicit, incremental, epsilon = 1e-9);
        }
    }

    #[test]
    fn spike_train_rejects_non_increasing() {
        assert!(SpikeTrain::from_times(vec![0.1, 0.1]).is_err());
        let mut train = SpikeTrain::from_times(vec![0.5]).unwrap();
        assert!(train.push(0.4).is_err());
        assert!(train.push(0.6).is_ok());
    }
}
