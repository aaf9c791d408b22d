//! Conductance-based gradient detector pair (ASEL / ASER).
//!
//! Each neuron senses the local concentration through a three-state
//! depolarizing channel population and (ASER only) a two-state
//! hyperpolarizing population. Binding rates depend on the distance of the
//! concentration from an adaptive threshold, which is what turns the pair
//! into on/off temporal-gradient detectors. A spike threshold on top of the
//! graded membrane potential converts the response into a rate code.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which neuron of the pair: ASEL responds to up-steps, ASER to down-steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AseSide {
    Asel,
    Aser,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AseParams {
    /// Membrane time constant τ_m, ms.
    pub tau_m: f64,
    /// Resting potential V_0, mV.
    pub rest_potential: f64,
    /// Depolarizing reversal potential V_d, mV.
    pub reversal_depol: f64,
    /// Hyperpolarizing reversal potential V_h, mV.
    pub reversal_hyper: f64,
    /// Peak channel conductance gain (dimensionless, normalized by leak).
    pub g_max: f64,
    /// Depolarizing unbinding rate β^d, 1/s.
    pub beta_d: f64,
    /// Depolarizing inactivation rate γ^d, 1/s.
    pub gamma_d: f64,
    /// Depolarizing recovery rate δ^d, 1/s.
    pub delta_d: f64,
    /// Hyperpolarizing unbinding rate β^h, 1/s.
    pub beta_h: f64,
    /// Depolarizing binding-rate scale α^d_0, 1/(s·mM).
    pub alpha0_d: f64,
    /// Hyperpolarizing binding-rate scale α^h_0, 1/s.
    pub alpha0_h: f64,
    /// Hyperpolarizing activation threshold η_R, mM (ASER only).
    pub eta_r: f64,
    /// Threshold adaptation time constant τ_L / τ_R, s.
    pub tau_adapt: f64,
    /// Lower bound on the ASER adaptive threshold, mM.
    pub nacl_r_min: f64,
    /// Spike threshold V_T, mV. Set to +inf for a purely graded neuron.
    pub spike_threshold: f64,
    /// Potential recorded on a spike step, mV.
    pub spike_value: f64,
    /// Absolute refractory period after a spike, s.
    pub refractory: f64,
    pub side: AseSide,
}

impl AseParams {
    pub fn defaults(side: AseSide) -> Self {
        AseParams {
            tau_m: 50.0,
            rest_potential: -70.0,
            reversal_depol: 0.0,
            reversal_hyper: -90.0,
            g_max: 5.0,
            beta_d: 0.25,
            gamma_d: 0.5,
            delta_d: 0.5,
            beta_h: 0.5,
            alpha0_d: 25.0,
            alpha0_h: 2.0,
            eta_r: 60.0,
            tau_adapt: 2.0,
            nacl_r_min: 4.0,
            spike_threshold: -50.0,
            spike_value: 30.0,
            refractory: 0.06,
            side,
        }
    }

    /// Same neuron with the spike mechanism disabled (graded output only).
    pub fn graded(side: AseSide) -> Self {
        AseParams {
            spike_threshold: f64::INFINITY,
            ..AseParams::defaults(side)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_m > 0.0) {
            return Err(Error::config("tau_m", "must be > 0"));
        }
        if !(self.g_max > 0.0) {
            return Err(Error::config("g_max", "must be > 0"));
        }
        if !(self.reversal_depol > self.rest_potential
            && self.rest_potential > self.reversal_hyper)
        {
            return Err(Error::config(
                "reversal_depol",
                "requires reversal_depol > rest_potential > reversal_hyper",
            ));
        }
        let rates = [
            self.beta_d,
            self.gamma_d,
            self.delta_d,
            self.beta_h,
            self.alpha0_d,
            self.alpha0_h,
        ];
        if rates.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::config("rates", "all channel rates must be >= 0"));
        }
        if self.side == AseSide::Aser && !(self.nacl_r_min > 0.0) {
            return Err(Error::config("nacl_r_min", "must be > 0 for ASER"));
        }
        if !(self.tau_adapt > 0.0) {
            return Err(Error::config("tau_adapt", "must be > 0"));
        }
        Ok(())
    }
}

/// Three-state depolarizing channel population fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolChannelState {
    pub unbound: f64,
    pub bound: f64,
    pub inactive: f64,
}

impl DepolChannelState {
    pub fn all_unbound() -> Self {
        DepolChannelState {
            unbound: 1.0,
            bound: 0.0,
            inactive: 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.unbound + self.bound + self.inactive
    }
}

/// Two-state hyperpolarizing channel population fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperChannelState {
    pub unbound: f64,
    pub bound: f64,
}

impl HyperChannelState {
    pub fn all_unbound() -> Self {
        HyperChannelState {
            unbound: 1.0,
            bound: 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.unbound + self.bound
    }
}

/// Full state of one ASE neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AseState {
    /// Membrane potential, mV.
    pub potential: f64,
    pub depol: DepolChannelState,
    pub hyper: HyperChannelState,
    /// Adaptive concentration threshold NaCl_L / NaCl_R, mM.
    pub adapt_threshold: f64,
    pub spiked_now: bool,
    /// Remaining absolute refractory time, s.
    pub refractory_left: f64,
}

impl AseState {
    /// A neuron fully adapted to `baseline` mM: channels unbound, membrane
    /// at rest, threshold equal to the ambient concentration.
    pub fn adapted(params: &AseParams, baseline: f64) -> Self {
        let threshold = match params.side {
            AseSide::Asel => baseline,
            AseSide::Aser => baseline.max(params.nacl_r_min),
        };
        AseState {
            potential: params.rest_potential,
            depol: DepolChannelState::all_unbound(),
            hyper: HyperChannelState::all_unbound(),
            adapt_threshold: threshold,
            spiked_now: false,
            refractory_left: 0.0,
        }
    }
}

/// Depolarizing binding rate α^d, 1/s.
///
/// ASEL binds when the concentration exceeds its adapted threshold, ASER
/// when it falls below; the rate grows linearly with the excursion.
pub fn depol_binding_rate(params: &AseParams, concentration: f64, adapt_threshold: f64) -> f64 {
    match params.side {
        AseSide::Asel => {
            if concentration >= adapt_threshold {
                params.alpha0_d * (concentration - adapt_threshold)
            } else {
                0.0
            }
        }
        AseSide::Aser => {
            if concentration <= adapt_threshold {
                params.alpha0_d * (adapt_threshold - concentration)
            } else {
                0.0
            }
        }
    }
}

/// Hyperpolarizing binding rate α^h, 1/s: zero for ASEL, a Heaviside step
/// at η_R for ASER.
pub fn hyper_binding_rate(params: &AseParams, concentration: f64) -> f64 {
    match params.side {
        AseSide::Asel => 0.0,
        AseSide::Aser => {
            if concentration > params.eta_r {
                params.alpha0_h
            } else {
                0.0
            }
        }
    }
}

/// One forward-Euler step of both channel populations, followed by
/// renormalization of each state vector to sum exactly 1.
pub fn channel_step(
    depol: DepolChannelState,
    hyper: HyperChannelState,
    alpha_d: f64,
    alpha_h: f64,
    params: &AseParams,
    dt: f64,
) -> Result<(DepolChannelState, HyperChannelState)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let max_rate = (params.beta_d + params.gamma_d)
        .max(params.beta_h)
        .max(params.delta_d);
    if dt * max_rate >= 1.0 {
        return Err(Error::config(
            "dt",
            format!("dt * max transition rate = {} >= 1; unstable", dt * max_rate),
        ));
    }
    // binding rates scale with the concentration excursion and are unbounded,
    // so cap the per-step bound flux instead of rejecting large excursions;
    // anything past the cap is already instant binding at this resolution
    let alpha_d = alpha_d.min(0.95 / dt);
    let alpha_h = alpha_h.min(0.95 / dt);

    let du = -alpha_d * depol.unbound + params.beta_d * depol.bound + params.delta_d * depol.inactive;
    let db = alpha_d * depol.unbound - (params.beta_d + params.gamma_d) * depol.bound;
    let di = params.gamma_d * depol.bound - params.delta_d * depol.inactive;
    let mut d = DepolChannelState {
        unbound: (depol.unbound + du * dt).clamp(0.0, 1.0),
        bound: (depol.bound + db * dt).clamp(0.0, 1.0),
        inactive: (depol.inactive + di * dt).clamp(0.0, 1.0),
    };
    let s = d.sum();
    d.unbound /= s;
    d.bound /= s;
    d.inactive /= s;

    let duh = -alpha_h * hyper.unbound + params.beta_h * hyper.bound;
    let mut h = HyperChannelState {
        unbound: (hyper.unbound + duh * dt).clamp(0.0, 1.0),
        bound: (hyper.bound - duh * dt).clamp(0.0, 1.0),
    };
    let sh = h.sum();
    h.unbound /= sh;
    h.bound /= sh;

    Ok((d, h))
}

/// Threshold adaptation step; returns the new threshold (mM).
pub fn adapt_threshold_step(
    state: &AseState,
    params: &AseParams,
    concentration: f64,
    dt: f64,
) -> f64 {
    let thr = state.adapt_threshold;
    match params.side {
        AseSide::Asel => {
            if concentration >= thr {
                thr + (concentration - thr) / params.tau_adapt * dt
            } else {
                // fast decay stops where the slow branch would take over,
                // otherwise the Euler overstep leaves a spurious offset
                (thr - thr / params.tau_adapt * dt).max(concentration)
            }
        }
        AseSide::Aser => {
            let next = if concentration <= thr {
                thr + (concentration - thr) / params.tau_adapt * dt
            } else {
                (thr + thr / params.tau_adapt * dt).min(concentration)
            };
            next.max(params.nacl_r_min)
        }
    }
}

/// Advance the full ASE neuron one step: binding rates from the sensed
/// concentration, then channels, then membrane, then threshold adaptation.
pub fn ase_membrane_step(
    state: AseState,
    params: &AseParams,
    concentration: f64,
    dt: f64,
) -> Result<AseState> {
    if !state.potential.is_finite() || !concentration.is_finite() {
        return Err(Error::InvalidState("non-finite ASE input".into()));
    }
    let alpha_d = depol_binding_rate(params, concentration, state.adapt_threshold);
    let alpha_h = hyper_binding_rate(params, concentration);
    let (depol, hyper) = channel_step(state.depol, state.hyper, alpha_d, alpha_h, params, dt)?;

    let g_d = params.g_max * depol.bound * depol.bound;
    let g_h = params.g_max * hyper.bound * hyper.bound;

    let mut refractory_left = (state.refractory_left - dt).max(0.0);
    let (potential, spiked_now) = if state.refractory_left > 0.0 {
        (params.rest_potential, false)
    } else {
        let v = if state.spiked_now {
            params.rest_potential
        } else {
            state.potential
        };
        let dv = (params.rest_potential - v)
            + g_d * (params.reversal_depol - v)
            + g_h * (params.reversal_hyper - v);
        let v_next = v + dv / params.tau_m * (dt * 1e3);
        if v_next >= params.spike_threshold {
            refractory_left = params.refractory;
            (params.spike_value, true)
        } else {
            (v_next, false)
        }
    };

    let adapt_threshold = adapt_threshold_step(&state, params, concentration, dt);

    Ok(AseState {
        potential,
        depol,
        hyper,
        adapt_threshold,
        spiked_now,
        refractory_left,
    })
}

/// Average spike frequency (Hz) of a freshly adapted neuron exposed to a
/// linear concentration ramp of the given slope (mM/s). Calibration aid for
/// the spike-frequency-vs-gradient sweeps.
pub fn spike_rate_vs_gradient(
    params: &AseParams,
    baseline: f64,
    gradient: f64,
    duration: f64,
    dt: f64,
) -> Result<f64> {
    let mut state = AseState::adapted(params, baseline);
    let mut t = 0.0;
    let mut spikes = 0u32;
    while t < duration {
        let c = (baseline + gradient * t).max(0.0);
        state = ase_membrane_step(state, params, c, dt)?;
        if state.spiked_now {
            spikes += 1;
        }
        t += dt;
    }
    Ok(spikes as f64 / duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const DT: f64 = 1e-3;

    fn run_trace(params: &AseParams, baseline: f64, profile: &[(f64, f64)]) -> (Vec<f64>, u32) {
        // profile: (duration s, concentration mM) segments
        let mut state = AseState::adapted(params, baseline);
        let mut potentials = Vec::new();
        let mut spikes = 0;
        for &(duration, c) in profile {
            let steps = (duration / DT).round() as usize;
            for _ in 0..steps {
                state = ase_membrane_step(state, params, c, DT).unwrap();
                potentials.push(state.potential);
                if state.spiked_now {
                    spikes += 1;
                }
            }
        }
        (potentials, spikes)
    }

    #[test]
    fn binding_rate_piecewise_cases() {
        let asel = AseParams::defaults(AseSide::Asel);
        let aser = AseParams::defaults(AseSide::Aser);
        // boundary: C == threshold
        assert_eq!(depol_binding_rate(&asel, 40.0, 40.0), 0.0);
        // inactive branches
        assert_eq!(depol_binding_rate(&asel, 39.0, 40.0), 0.0);
        assert_eq!(depol_binding_rate(&aser, 41.0, 40.0), 0.0);
        // linearity in the excursion
        let r10 = depol_binding_rate(&asel, 50.0, 40.0);
        let r20 = depol_binding_rate(&asel, 60.0, 40.0);
        assert_relative_eq!(r20, 2.0 * r10);
        // ASER uses the magnitude of the down-step
        let d10 = depol_binding_rate(&aser, 30.0, 40.0);
        assert!(d10 > 0.0);
        assert_relative_eq!(d10, r10);
    }

    #[test]
    fn hyper_rate_heaviside() {
        let asel = AseParams::defaults(AseSide::Asel);
        let aser = AseParams::defaults(AseSide::Aser);
        assert_eq!(hyper_binding_rate(&asel, 100.0), 0.0);
        assert_eq!(hyper_binding_rate(&aser, aser.eta_r - 1.0), 0.0);
        assert_eq!(hyper_binding_rate(&aser, aser.eta_r + 1.0), aser.alpha0_h);
    }

    #[test]
    fn unbound_is_absorbing_without_binding() {
        let params = AseParams::defaults(AseSide::Asel);
        let mut d = DepolChannelState::all_unbound();
        let mut h = HyperChannelState::all_unbound();
        for _ in 0..10_000 {
            let (nd, nh) = channel_step(d, h, 0.0, 0.0, &params, DT).unwrap();
            d = nd;
            h = nh;
        }
        assert_eq!(d.unbound, 1.0);
        assert_eq!(h.unbound, 1.0);
    }

    #[test]
    fn conservation_over_random_rates() {
        let params = AseParams::defaults(AseSide::Aser);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut d = DepolChannelState {
            unbound: 0.5,
            bound: 0.3,
            inactive: 0.2,
        };
        let mut h = HyperChannelState {
            unbound: 0.6,
            bound: 0.4,
        };
        for _ in 0..100_000 {
            let alpha_d = rng.gen_range(0.0..500.0);
            let alpha_h = rng.gen_range(0.0..2.0);
            let (nd, nh) = channel_step(d, h, alpha_d, alpha_h, &params, DT).unwrap();
            d = nd;
            h = nh;
            assert!((d.sum() - 1.0).abs() < 1e-9);
            assert!((h.sum() - 1.0).abs() < 1e-9);
        }
    }

    /// Dense matrix exponential by scaling and squaring, test-only oracle.
    fn expm3(a: [[f64; 3]; 3], t: f64) -> [[f64; 3]; 3] {
        let k = 30u32;
        let scale = t / 2f64.powi(k as i32);
        // Taylor series of exp(A * scale), 12 terms
        let mut result = [[0.0; 3]; 3];
        let mut term = [[0.0; 3]; 3];
        for i in 0..3 {
            result[i][i] = 1.0;
            term[i][i] = 1.0;
        }
        for n in 1..=12 {
            let mut next = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        next[i][j] += term[i][l] * a[l][j] * scale / n as f64;
                    }
                }
            }
            term = next;
            for i in 0..3 {
                for j in 0..3 {
                    result[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..k {
            let mut sq = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        sq[i][j] += result[i][l] * result[l][j];
                    }
                }
            }
            result = sq;
        }
        result
    }

    #[test]
    fn long_run_channels_match_matrix_exponential() {
        let params = AseParams::defaults(AseSide::Asel);
        let alpha_d = 3.0;
        let a = [
            [-alpha_d, params.beta_d, params.delta_d],
            [alpha_d, -(params.beta_d + params.gamma_d), 0.0],
            [0.0, params.gamma_d, -params.delta_d],
        ];
        let t_final = 50.0;
        let x0 = [1.0, 0.0, 0.0];
        let m = expm3(a, t_final);
        let expected: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| m[i][j] * x0[j]).sum())
            .collect();

        let dt = 1e-4;
        let mut d = DepolChannelState::all_unbound();
        let mut h = HyperChannelState::all_unbound();
        let steps = (t_final / dt).round() as usize;
        for _ in 0..steps {
            let (nd, nh) = channel_step(d, h, alpha_d, 0.0, &params, dt).unwrap();
            d = nd;
            h = nh;
        }
        assert_abs_diff_eq!(d.unbound, expected[0], epsilon = 1e-3);
        assert_abs_diff_eq!(d.bound, expected[1], epsilon = 1e-3);
        assert_abs_diff_eq!(d.inactive, expected[2], epsilon = 1e-3);
        // and the oracle state is the stationary distribution by t = 50 s
        let m2 = expm3(a, 2.0 * t_final);
        for i in 0..3 {
            assert_abs_diff_eq!(m[i][0], m2[i][0], epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_concentration_is_silent() {
        let params = AseParams::defaults(AseSide::Asel);
        let (potentials, spikes) = run_trace(&params, 40.0, &[(30.0, 40.0)]);
        assert_eq!(spikes, 0);
        for v in potentials {
            assert_abs_diff_eq!(v, params.rest_potential, epsilon = 1e-6);
        }
    }

    #[test]
    fn up_step_excites_asel_only() {
        let asel = AseParams::graded(AseSide::Asel);
        let aser = AseParams::graded(AseSide::Aser);
        let profile = [(20.0, 40.0), (20.0, 50.0)];
        let (vl, _) = run_trace(&asel, 40.0, &profile);
        let (vr, _) = run_trace(&aser, 40.0, &profile);
        let peak_l = vl.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let peak_r = vr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            peak_l > asel.rest_potential + 5.0,
            "ASEL transient too weak: {peak_l}"
        );
        assert!(peak_r < aser.rest_potential + 0.5, "ASER responded to up-step");
        // transient returns toward rest after adaptation
        let tail = vl[vl.len() - 1];
        assert!(tail < asel.rest_potential + 2.0, "ASEL did not re-adapt: {tail}");
    }

    #[test]
    fn down_step_excites_aser_only() {
        let asel = AseParams::graded(AseSide::Asel);
        let aser = AseParams::graded(AseSide::Aser);
        let profile = [(20.0, 50.0), (20.0, 40.0)];
        let (vl, _) = run_trace(&asel, 50.0, &profile);
        let (vr, _) = run_trace(&aser, 50.0, &profile);
        let peak_l = vl[20_000..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let peak_r = vr[20_000..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(peak_r > aser.rest_potential + 5.0);
        assert!(peak_l < asel.rest_potential + 0.5);
    }

    #[test]
    fn larger_step_stronger_response() {
        let params = AseParams::defaults(AseSide::Asel);
        let (_, s10) = run_trace(&params, 40.0, &[(10.0, 40.0), (10.0, 50.0)]);
        let (_, s20) = run_trace(&params, 40.0, &[(10.0, 40.0), (10.0, 60.0)]);
        assert!(s10 >= 1, "+10 mM step should elicit at least one spike");
        assert!(s20 > s10, "+20 mM spikes ({s20}) not above +10 mM ({s10})");
    }

    #[test]
    fn asel_threshold_converges_exponentially() {
        let params = AseParams::defaults(AseSide::Asel);
        let c = 55.0;
        let mut state = AseState::adapted(&params, 40.0);
        let dt = 1e-3;
        let t_final: f64 = 3.0;
        let steps = (t_final / dt).round() as usize;
        for _ in 0..steps {
            state.adapt_threshold = adapt_threshold_step(&state, &params, c, dt);
        }
        let expected = c + (40.0 - c) * (-t_final / params.tau_adapt).exp();
        assert_relative_eq!(state.adapt_threshold, expected, max_relative = 1e-3);
    }

    #[test]
    fn aser_threshold_floors_at_minimum() {
        let params = AseParams::defaults(AseSide::Aser);
        let mut state = AseState::adapted(&params, 40.0);
        for _ in 0..200_000 {
            state.adapt_threshold = adapt_threshold_step(&state, &params, 0.0, 1e-3);
        }
        assert_eq!(state.adapt_threshold, params.nacl_r_min);
    }

    #[test]
    fn asel_threshold_zero_derivative_at_boundary() {
        let params = AseParams::defaults(AseSide::Asel);
        let state = AseState::adapted(&params, 40.0);
        let next = adapt_threshold_step(&state, &params, 40.0, 1e-3);
        assert_eq!(next, 40.0);
    }

    #[test]
    fn functional_asymmetry_over_random_traces() {
        // ASEL spikes only above its adapted threshold, ASER only below.
        let asel = AseParams::defaults(AseSide::Asel);
        let aser = AseParams::defaults(AseSide::Aser);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let mut sl = AseState::adapted(&asel, 40.0);
            let mut sr = AseState::adapted(&aser, 40.0);
            let mut c = 40.0;
            let mut slope = 0.0;
            // channel and membrane kinetics lag the stimulus, so a spike only
            // has to trace back to a driving excursion in the recent past
            let window = (1.0 / DT) as u32;
            let mut since_above = u32::MAX;
            let mut since_below = u32::MAX;
            for step in 0..20_000 {
                if step % 2000 == 0 {
                    slope = rng.gen_range(-2.0..2.0);
                }
                c = (c + slope * DT).clamp(5.0, 80.0);
                if c >= sl.adapt_threshold {
                    since_above = 0;
                } else {
                    since_above = since_above.saturating_add(1);
                }
                if c <= sr.adapt_threshold {
                    since_below = 0;
                } else {
                    since_below = since_below.saturating_add(1);
                }
                sl = ase_membrane_step(sl, &asel, c, DT).unwrap();
                sr = ase_membrane_step(sr, &aser, c, DT).unwrap();
                if sl.spiked_now {
                    assert!(
                        since_above < window,
                        "ASEL spiked without a recent above-threshold excursion (C {c})"
                    );
                }
                if sr.spiked_now {
                    assert!(
                        since_below < window,
                        "ASER spiked without a recent below-threshold excursion (C {c})"
                    );
                }
            }
        }
    }

    #[test]
    fn adaptation_silences_both_neurons() {
        for side in [AseSide::Asel, AseSide::Aser] {
            let params = AseParams::defaults(side);
            let mut state = AseState::adapted(&params, 62.0);
            // start mis-adapted on purpose, then hold 10 tau_adapt at 35 mM
            state.adapt_threshold = 62.0;
            let hold = (10.0 * params.tau_adapt / DT).round() as usize;
            for _ in 0..hold {
                state = ase_membrane_step(state, &params, 35.0, DT).unwrap();
            }
            let mut spikes = 0;
            for _ in 0..10_000 {
                state = ase_membrane_step(state, &params, 35.0, DT).unwrap();
                if state.spiked_now {
                    spikes += 1;
                }
            }
            assert_eq!(spikes, 0, "{side:?} still spiking after adaptation");
        }
    }

    #[test]
    fn ramp_response_monotone_in_slope() {
        let params = AseParams::defaults(AseSide::Asel);
        let slopes = [0.05, 0.1, 0.3, 0.8, 2.0];
        let mut prev = -1.0;
        for m in slopes {
            let f = spike_rate_vs_gradient(&params, 40.0, m, 20.0, DT).unwrap();
            assert!(f >= prev, "rate {f} Hz at slope {m} below previous {prev}");
            prev = f;
        }
        assert!(prev > 0.0, "steepest ramp should spike");
    }

    #[test]
    fn lower_threshold_lowers_detection_floor() {
        let floor = |v_t: f64| -> f64 {
            let params = AseParams {
                spike_threshold: v_t,
                ..AseParams::defaults(AseSide::Asel)
            };
            for m in [0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64] {
                let f = spike_rate_vs_gradient(&params, 40.0, m, 20.0, DT).unwrap();
                if f > 0.0 {
                    return m;
                }
            }
            f64::INFINITY
        };
        let low = floor(-55.0);
        let high = floor(-45.0);
        assert!(low <= high, "floor at V_T=-55 ({low}) above V_T=-45 ({high})");
        assert!(low.is_finite());
    }

    #[test]
    fn graded_mode_matches_spiking_mode_below_threshold() {
        // With V_T unreachable, the spiking neuron is bit-identical to the
        // graded one.
        let spiking = AseParams {
            spike_threshold: 1e12,
            ..AseParams::defaults(AseSide::Asel)
        };
        let graded = AseParams::graded(AseSide::Asel);
        let mut a = AseState::adapted(&spiking, 40.0);
        let mut b = AseState::adapted(&graded, 40.0);
        for step in 0..30_000 {
            let c = 40.0 + 10.0 * ((step as f64 * DT / 3.0).sin().max(0.0));
            a = ase_membrane_step(a, &spiking, c, DT).unwrap();
            b = ase_membrane_step(b, &graded, c, DT).unwrap();
            assert_eq!(a.potential, b.potential);
            assert!(!a.spiked_now);
        }
    }
}
