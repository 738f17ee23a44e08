//! Discrete-time model of an islanded small hydro plant.
//!
//! The model is the linearized single-area hydro arrangement: a first-order
//! governor lag, the non-minimum-phase water column `(1 - Tw s)/(1 + Tw s / 2)`,
//! and the swing equation `2H d(df)/dt = dPm - dPload - D df`, all in per-unit
//! of the plant base. Each first-order block is discretized exactly under a
//! zero-order hold on its input, so the update is a fixed linear recurrence.
//!
//! Secondary load control (the dump-load ladder) and frequency measurement
//! live here too; the closed-loop wiring is in [`crate::harness`].

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, LfcError, Result};

/// Standard gravity used by the turbine power relation (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Hydraulic rating of the turbine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbineRating {
    /// Flow rate (m³/s).
    pub flow_m3s: f64,
    /// Gross head (m).
    pub head_m: f64,
    /// Turbine efficiency in `[0, 1]`.
    pub efficiency: f64,
}

impl Default for TurbineRating {
    fn default() -> Self {
        TurbineRating {
            flow_m3s: 5.0,
            head_m: 10.0,
            efficiency: 0.91,
        }
    }
}

impl TurbineRating {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("flow", self.flow_m3s)?;
        ensure_finite("head", self.head_m)?;
        ensure_finite("efficiency", self.efficiency)?;
        if self.flow_m3s < 0.0 {
            return Err(LfcError::domain(format!("negative flow {}", self.flow_m3s)));
        }
        if self.head_m < 0.0 {
            return Err(LfcError::domain(format!("negative head {}", self.head_m)));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(LfcError::domain(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        Ok(())
    }
}

/// Theoretical turbine output `P = Q h g ef` in kW.
pub fn turbine_power(r: &TurbineRating) -> Result<f64> {
    r.validate()?;
    Ok(r.flow_m3s * r.head_m * GRAVITY * r.efficiency)
}

fn default_dt() -> f64 {
    1e-3
}

/// Dynamic constants of the linearized plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    /// Nominal frequency (Hz).
    pub f_base: f64,
    /// Power base (kW).
    pub p_base_kw: f64,
    /// Inertia constant H (s).
    pub inertia_h: f64,
    /// Load damping D (pu power / pu frequency).
    pub damping: f64,
    /// Governor time constant (s).
    pub t_gov: f64,
    /// Water starting time (s).
    pub t_water: f64,
    /// Integration step (s). Set from the scenario's simulation block.
    #[serde(skip, default = "default_dt")]
    pub dt: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            f_base: 50.0,
            p_base_kw: 500.0,
            inertia_h: 3.0,
            damping: 1.0,
            t_gov: 0.2,
            t_water: 1.0,
            dt: default_dt(),
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_base", self.f_base),
            ("p_base_kw", self.p_base_kw),
            ("inertia_h", self.inertia_h),
            ("t_gov", self.t_gov),
            ("t_water", self.t_water),
            ("dt", self.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(LfcError::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(LfcError::domain(format!(
                "damping must be >= 0, got {}",
                self.damping
            )));
        }
        if self.dt > self.t_gov / 10.0 {
            return Err(LfcError::domain(format!(
                "dt = {} exceeds t_gov/10 = {}",
                self.dt,
                self.t_gov / 10.0
            )));
        }
        Ok(())
    }
}

/// Per-unit state of the plant at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    /// Frequency deviation (pu of `f_base`).
    pub df: f64,
    /// Governor (gate) output (pu).
    pub gov: f64,
    /// Lag state of the water column (pu).
    pub tw_state: f64,
    /// Code currently applied to the dump-load ladder.
    pub slc_code: u8,
    /// Simulation time (s).
    pub t: f64,
}

impl PlantState {
    /// Deviation of mechanical power from the operating point (pu).
    pub fn mech_power(&self) -> f64 {
        -2.0 * self.gov + 3.0 * self.tw_state
    }

    pub fn is_finite(&self) -> bool {
        self.df.is_finite() && self.gov.is_finite() && self.tw_state.is_finite() && self.t.is_finite()
    }
}

/// A validated plant with its discretization coefficients cached.
#[derive(Debug, Clone, Copy)]
pub struct PlantModel {
    params: PlantParams,
    gov_decay: f64,
    water_decay: f64,
    freq_decay: f64,
}

impl PlantModel {
    pub fn new(params: PlantParams) -> Result<Self> {
        params.validate()?;
        let dt = params.dt;
        let freq_decay = if params.damping > 0.0 {
            (-dt * params.damping / (2.0 * params.inertia_h)).exp()
        } else {
            1.0
        };
        Ok(PlantModel {
            params,
            gov_decay: (-dt / params.t_gov).exp(),
            water_decay: (-dt / (0.5 * params.t_water)).exp(),
            freq_decay,
        })
    }

    pub fn params(&self) -> &PlantParams {
        &self.params
    }

    /// Advances one step with the gate command and load deviation held.
    pub fn step(&self, s: &PlantState, u_gate: f64, dp_load: f64) -> Result<PlantState> {
        ensure_finite("u_gate", u_gate)?;
        ensure_finite("dp_load", dp_load)?;
        if !s.is_finite() {
            return Err(LfcError::domain("plant state is not finite"));
        }
        Ok(self.step_unchecked(s, u_gate, dp_load))
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, s: &PlantState, u_gate: f64, dp_load: f64) -> PlantState {
        let p = &self.params;
        let accel = s.mech_power() - dp_load;
        let df = if p.damping > 0.0 {
            self.freq_decay * s.df + (1.0 - self.freq_decay) * accel / p.damping
        } else {
            s.df + p.dt * accel / (2.0 * p.inertia_h)
        };
        PlantState {
            df,
            gov: self.gov_decay * s.gov + (1.0 - self.gov_decay) * u_gate,
            tw_state: self.water_decay * s.tw_state + (1.0 - self.water_decay) * s.gov,
            slc_code: s.slc_code,
            t: s.t + p.dt,
        }
    }
}

/// One-shot step; prefer [`PlantModel::step`] in loops.
pub fn step_plant(s: &PlantState, u_gate: f64, dp_load: f64, p: &PlantParams) -> Result<PlantState> {
    PlantModel::new(*p)?.step(s, u_gate, dp_load)
}

/// Binary-weighted dump-load ladder driven by an n-bit code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlcLadder {
    pub step_kw: f64,
    pub n_bits: u32,
}

impl Default for SlcLadder {
    fn default() -> Self {
        SlcLadder {
            step_kw: 1.75,
            n_bits: 8,
        }
    }
}

impl SlcLadder {
    pub fn max_code(&self) -> u32 {
        (1u32 << self.n_bits) - 1
    }

    pub fn max_kw(&self) -> f64 {
        f64::from(self.max_code()) * self.step_kw
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_kw.is_finite() && self.step_kw > 0.0) {
            return Err(LfcError::domain(format!("ladder step {} must be > 0", self.step_kw)));
        }
        if !(1..=8).contains(&self.n_bits) {
            return Err(LfcError::domain(format!(
                "ladder width {} must be in 1..=8 bits",
                self.n_bits
            )));
        }
        Ok(())
    }
}

/// Rounds a commanded surplus to the nearest ladder code, saturating at both ends.
///
/// Returns the code and the power the switched resistors actually absorb.
pub fn slc_quantize(surplus_kw: f64, ladder: &SlcLadder) -> Result<(u8, f64)> {
    ensure_finite("surplus", surplus_kw)?;
    ladder.validate()?;
    let code = (surplus_kw / ladder.step_kw)
        .round()
        .clamp(0.0, f64::from(ladder.max_code())) as u8;
    Ok((code, f64::from(code) * ladder.step_kw))
}

/// First-order lag standing in for the three-phase PLL.
///
/// With `tau = 0` the measurement is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pll {
    tau: f64,
    output_hz: f64,
}

impl Pll {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(LfcError::domain(format!("pll tau must be >= 0, got {tau}")));
        }
        Ok(Pll { tau, output_hz: 0.0 })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn output_hz(&self) -> f64 {
        self.output_hz
    }

    /// Feeds one sample of the plant and returns the measured deviation in Hz.
    pub fn measure(&mut self, s: &PlantState, p: &PlantParams) -> Result<f64> {
        ensure_finite("df", s.df)?;
        let target = p.f_base * s.df;
        self.output_hz = if self.tau == 0.0 {
            target
        } else {
            let alpha = 1.0 - (-p.dt / self.tau).exp();
            self.output_hz + alpha * (target - self.output_hz)
        };
        Ok(self.output_hz)
    }
}

/// Measures frequency deviation (Hz) through `pll`, advancing its state by one sample.
pub fn measure_frequency(s: &PlantState, p: &PlantParams, pll: &mut Pll) -> Result<f64> {
    pll.measure(s, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rating(q: f64, h: f64, ef: f64) -> TurbineRating {
        TurbineRating {
            flow_m3s: q,
            head_m: h,
            efficiency: ef,
        }
    }

    #[test]
    fn turbine_power_examples() {
        assert!((turbine_power(&rating(1.0, 10.0, 1.0)).unwrap() - 98.1).abs() < 1e-12);
        assert_eq!(turbine_power(&rating(5.0, 10.0, 0.0)).unwrap(), 0.0);
        assert!((turbine_power(&rating(5.0, 10.0, 0.91)).unwrap() - 446.355).abs() < 1e-9);
    }

    #[test]
    fn turbine_power_rejects_bad_rating() {
        assert!(turbine_power(&rating(-1.0, 10.0, 0.9)).is_err());
        assert!(turbine_power(&rating(1.0, -10.0, 0.9)).is_err());
        assert!(turbine_power(&rating(1.0, 10.0, 1.2)).is_err());
    }

    #[test]
    fn ladder_ceiling() {
        let l = SlcLadder::default();
        assert_eq!(l.max_kw(), 446.25);
        assert_eq!(l.max_code(), 255);
    }

    /// Nearest code by exhaustive search over the ladder.
    fn nearest_code_oracle(surplus: f64) -> u8 {
        (0u32..=255)
            .min_by(|&a, &b| {
                let da = (surplus - f64::from(a) * 1.75).abs();
                let db = (surplus - f64::from(b) * 1.75).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap() as u8
    }

    #[test]
    fn quantize_examples() {
        let l = SlcLadder::default();
        assert_eq!(slc_quantize(0.0, &l).unwrap(), (0, 0.0));
        assert_eq!(slc_quantize(446.25, &l).unwrap(), (255, 446.25));
        assert_eq!(nearest_code_oracle(2.6), 1);
        assert_eq!(slc_quantize(2.6, &l).unwrap(), (1, 1.75));
        assert_eq!(nearest_code_oracle(900.0), 255);
        assert_eq!(slc_quantize(900.0, &l).unwrap(), (255, 446.25));
        assert_eq!(slc_quantize(-12.0, &l).unwrap(), (0, 0.0));
        assert!(slc_quantize(f64::NAN, &l).is_err());
    }

    #[test]
    fn quantize_matches_oracle_on_grid() {
        let l = SlcLadder::default();
        for i in 0..=2000 {
            let s = -20.0 + f64::from(i) * 0.2371;
            // ties at exact half-steps are resolved upward by `round`; the oracle picks either
            let (code, _) = slc_quantize(s, &l).unwrap();
            let oracle = nearest_code_oracle(s);
            let d_impl = (s.clamp(0.0, 446.25) - f64::from(code) * 1.75).abs();
            let d_oracle = (s.clamp(0.0, 446.25) - f64::from(oracle) * 1.75).abs();
            assert!((d_impl - d_oracle).abs() < 1e-12, "surplus {s}");
        }
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let m = PlantModel::new(PlantParams::default()).unwrap();
        let mut s = PlantState::default();
        for _ in 0..5000 {
            s = m.step(&s, 0.0, 0.0).unwrap();
        }
        assert_eq!((s.df, s.gov, s.tw_state), (0.0, 0.0, 0.0));
        assert!((s.t - 5.0).abs() < 1e-9);
    }

    #[test]
    fn open_loop_load_step_settles_at_damping_ratio() {
        let p = PlantParams::default();
        let m = PlantModel::new(p).unwrap();
        let mut s = PlantState::default();
        for _ in 0..60_000 {
            s = m.step(&s, 0.0, 0.1).unwrap();
        }
        let expected = -0.1 / p.damping;
        assert!((s.df - expected).abs() <= 0.005 * expected.abs());
    }

    #[test]
    fn gate_step_is_non_minimum_phase() {
        let m = PlantModel::new(PlantParams::default()).unwrap();
        let mut s = PlantState::default();
        let mut min_pm: f64 = 0.0;
        for _ in 0..20 {
            s = m.step(&s, 0.1, 0.0).unwrap();
            min_pm = min_pm.min(s.mech_power());
        }
        assert!(s.mech_power() < 0.0);
        for _ in 0..30_000 {
            s = m.step(&s, 0.1, 0.0).unwrap();
        }
        assert!(min_pm < 0.0);
        assert!((s.mech_power() - 0.1).abs() < 1e-6);
    }

    #[test]
    fn params_validation() {
        let p = PlantParams {
            dt: 0.05,
            ..PlantParams::default()
        };
        assert!(PlantModel::new(p).is_err());
        for p in [
            PlantParams {
                inertia_h: 0.0,
                ..PlantParams::default()
            },
            PlantParams {
                damping: -1.0,
                ..PlantParams::default()
            },
        ] {
            assert!(p.validate().is_err());
        }
    }

    #[test]
    fn step_rejects_non_finite() {
        let m = PlantModel::new(PlantParams::default()).unwrap();
        assert!(m.step(&PlantState::default(), f64::NAN, 0.0).is_err());
        let bad = PlantState {
            df: f64::INFINITY,
            ..Default::default()
        };
        assert!(m.step(&bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn pll_examples() {
        let p = PlantParams::default();
        let zero = PlantState::default();
        let mut pll = Pll::new(0.02).unwrap();
        assert_eq!(measure_frequency(&zero, &p, &mut pll).unwrap(), 0.0);

        let s = PlantState {
            df: 0.01,
            ..Default::default()
        };
        let mut ideal = Pll::new(0.0).unwrap();
        assert!((measure_frequency(&s, &p, &mut ideal).unwrap() - 0.5).abs() < 1e-15);

        let mut lagged = Pll::new(0.02).unwrap();
        let got = measure_frequency(&s, &p, &mut lagged).unwrap();
        let expected = 0.5 * (1.0 - (-0.05f64).exp());
        assert!((got - expected).abs() < 1e-15);
        assert!(Pll::new(-1.0).is_err());
    }
}
