//! Frequency regulators: plain PD, incremental PID with gradient gain
//! adaptation, and the fuzzy PD.
//!
//! All of them consume the regulation error `e = r - y` (Hz) once per sample.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, LfcError, Result};
use crate::fuzzy::FuzzySystem;

/// Dead-band on `|du|` below which the previous sensitivity sign is held.
pub const SENSITIVITY_DEADBAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub const fn new(min: f64, max: f64) -> Self {
        Bounds { min, max }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(LfcError::config(format!(
                "bounds for {name} must be finite with min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Tunable controller gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainSet {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Adaptation rate for gradient tuning; 0 disables it.
    pub mu: f64,
    /// Fuzzy input scaling for the error.
    pub ge: f64,
    /// Fuzzy input scaling for the error rate.
    pub gce: f64,
    /// Fuzzy output scaling.
    pub gu: f64,
}

impl Default for GainSet {
    fn default() -> Self {
        GainSet {
            kp: 0.0,
            ki: 0.0,
            kd: 0.0,
            mu: 0.0,
            ge: 1.0,
            gce: 1.0,
            gu: 1.0,
        }
    }
}

impl GainSet {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("mu", self.mu),
            ("ge", self.ge),
            ("gce", self.gce),
            ("gu", self.gu),
        ] {
            if !v.is_finite() {
                return Err(LfcError::config(format!("gain {name} is not finite")));
            }
        }
        if self.mu < 0.0 {
            return Err(LfcError::config(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }
}

/// Boxes that adapted gains are clamped into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainBoxes {
    pub kp: Bounds,
    pub ki: Bounds,
    pub kd: Bounds,
    pub ge: Bounds,
    pub gce: Bounds,
    pub gu: Bounds,
}

impl Default for GainBoxes {
    fn default() -> Self {
        let b = Bounds::new(0.0, 1e3);
        GainBoxes {
            kp: b,
            ki: b,
            kd: b,
            ge: b,
            gce: b,
            gu: b,
        }
    }
}

impl GainBoxes {
    pub fn validate(&self) -> Result<()> {
        self.kp.validate("kp")?;
        self.ki.validate("ki")?;
        self.kd.validate("kd")?;
        self.ge.validate("ge")?;
        self.gce.validate("gce")?;
        self.gu.validate("gu")
    }
}

/// Stored history of one regulator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub prev_error: f64,
    pub prev2_error: f64,
    /// Accumulated `e dt`, clamped to the output box.
    pub integral: f64,
    pub prev_output: f64,
    pub prev2_output: f64,
    /// Plant output change over the last sample, `-(e(k-1) - e(k-2))` for a fixed reference.
    pub prev_measured_delta: f64,
}

/// Proportional, integral and second-difference increments of the error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Increments {
    pub e_p: f64,
    pub e_i: f64,
    pub e_d: f64,
}

impl Increments {
    pub fn from_history(e: f64, state: &ControllerState, dt: f64) -> Self {
        Increments {
            e_p: e - state.prev_error,
            e_i: e * dt,
            e_d: (e - 2.0 * state.prev_error + state.prev2_error) / dt,
        }
    }
}

pub fn pd_step(e: f64, de: f64, g: &GainSet) -> Result<f64> {
    ensure_finite("e", e)?;
    ensure_finite("de", de)?;
    Ok(g.kp * e + g.kd * de)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(LfcError::domain(format!("dt must be > 0, got {dt}")))
    }
}

fn advance(state: &ControllerState, e: f64, u: f64, dt: f64, output: &Bounds) -> ControllerState {
    ControllerState {
        prev_error: e,
        prev2_error: state.prev_error,
        integral: output.clamp(state.integral + e * dt),
        prev_output: u,
        prev2_output: state.prev_output,
        prev_measured_delta: -(e - state.prev_error),
    }
}

/// Velocity-form PID: `u(k) = u(k-1) + kp e_p + ki e_i + kd e_d`, clamped to `output`.
pub fn pid_incremental_step(
    e: f64,
    state: &ControllerState,
    g: &GainSet,
    dt: f64,
    output: &Bounds,
) -> Result<(f64, ControllerState, Increments)> {
    ensure_finite("e", e)?;
    check_dt(dt)?;
    let inc = Increments::from_history(e, state, dt);
    let u = output.clamp(state.prev_output + g.kp * inc.e_p + g.ki * inc.e_i + g.kd * inc.e_d);
    Ok((u, advance(state, e, u, dt, output), inc))
}

/// Gradient-descent gain update on `E = e²/2`.
pub fn adapt_gains(
    e: f64,
    dy_du: f64,
    g: &GainSet,
    inc: &Increments,
    boxes: &GainBoxes,
) -> Result<GainSet> {
    ensure_finite("e", e)?;
    ensure_finite("dy_du", dy_du)?;
    if g.mu < 0.0 {
        return Err(LfcError::domain(format!("mu must be >= 0, got {}", g.mu)));
    }
    if g.mu == 0.0 {
        return Ok(*g);
    }
    let common = g.mu * e * dy_du;
    Ok(GainSet {
        kp: boxes.kp.clamp(g.kp + common * inc.e_p),
        ki: boxes.ki.clamp(g.ki + common * inc.e_i),
        kd: boxes.kd.clamp(g.kd + common * inc.e_d),
        ..*g
    })
}

/// Same gradient rule applied to the fuzzy scaling gains:
/// `ge` follows `e_p`, `gu` follows `e_i`, `gce` follows `e_d`.
pub fn adapt_fuzzy_scaling(
    e: f64,
    dy_du: f64,
    g: &GainSet,
    inc: &Increments,
    boxes: &GainBoxes,
) -> Result<GainSet> {
    ensure_finite("e", e)?;
    ensure_finite("dy_du", dy_du)?;
    if g.mu == 0.0 {
        return Ok(*g);
    }
    let common = g.mu * e * dy_du;
    Ok(GainSet {
        ge: boxes.ge.clamp(g.ge + common * inc.e_p),
        gu: boxes.gu.clamp(g.gu + common * inc.e_i),
        gce: boxes.gce.clamp(g.gce + common * inc.e_d),
        ..*g
    })
}

/// Sign of `dy/du` over the previous sample, holding `prev_sign` inside the dead-band.
pub fn sensitivity_sign(dy: f64, du: f64, prev_sign: f64) -> f64 {
    if du.abs() < SENSITIVITY_DEADBAND || dy == 0.0 {
        prev_sign
    } else if (dy > 0.0) == (du > 0.0) {
        1.0
    } else {
        -1.0
    }
}

/// Fuzzy PD: `u = gu * infer(ge e, gce ec)` with `ec` the backward difference.
pub fn fuzzy_pd_step(
    e: f64,
    state: &ControllerState,
    sys: &FuzzySystem,
    g: &GainSet,
    dt: f64,
) -> Result<(f64, ControllerState)> {
    ensure_finite("e", e)?;
    check_dt(dt)?;
    let ec = (e - state.prev_error) / dt;
    let x = sys.e.clamp(g.ge * e);
    let y = sys.ec.clamp(g.gce * ec);
    let u = g.gu * sys.infer(x, y)?;
    let unbounded = Bounds::new(f64::MIN, f64::MAX);
    Ok((u, advance(state, e, u, dt, &unbounded)))
}

/// Uniform regulator interface: one error sample in, one command out.
pub trait Controller: Send {
    fn step(&mut self, error: f64, dt: f64) -> Result<f64>;

    fn reset(&mut self);

    /// True when the command is a rate that the actuator sums, false when
    /// the law already integrates internally.
    fn output_is_increment(&self) -> bool {
        true
    }

    fn gains(&self) -> GainSet;
}

#[derive(Debug, Clone)]
pub struct PdController {
    gains: GainSet,
    prev_error: f64,
}

impl PdController {
    pub fn new(gains: GainSet) -> Result<Self> {
        gains.validate()?;
        Ok(PdController {
            gains,
            prev_error: 0.0,
        })
    }
}

impl Controller for PdController {
    fn step(&mut self, error: f64, dt: f64) -> Result<f64> {
        check_dt(dt)?;
        let de = (error - self.prev_error) / dt;
        let u = pd_step(error, de, &self.gains)?;
        self.prev_error = error;
        Ok(u)
    }

    fn reset(&mut self) {
        self.prev_error = 0.0;
    }

    fn gains(&self) -> GainSet {
        self.gains
    }
}

#[derive(Debug, Clone)]
pub struct AdaptivePidController {
    gains: GainSet,
    initial: GainSet,
    boxes: GainBoxes,
    output: Bounds,
    state: ControllerState,
    sign: f64,
}

impl AdaptivePidController {
    pub fn new(gains: GainSet, boxes: GainBoxes, output: Bounds) -> Result<Self> {
        gains.validate()?;
        boxes.validate()?;
        output.validate("output")?;
        Ok(AdaptivePidController {
            gains,
            initial: gains,
            boxes,
            output,
            state: ControllerState::default(),
            sign: 1.0,
        })
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn set_gains(&mut self, g: GainSet) {
        self.gains = g;
    }
}

impl Controller for AdaptivePidController {
    fn step(&mut self, error: f64, dt: f64) -> Result<f64> {
        ensure_finite("e", error)?;
        check_dt(dt)?;
        let du = self.state.prev_output - self.state.prev2_output;
        self.sign = sensitivity_sign(self.state.prev_measured_delta, du, self.sign);
        let inc = Increments::from_history(error, &self.state, dt);
        self.gains = adapt_gains(error, self.sign, &self.gains, &inc, &self.boxes)?;
        let (u, next, _) = pid_incremental_step(error, &self.state, &self.gains, dt, &self.output)?;
        self.state = next;
        Ok(u)
    }

    fn reset(&mut self) {
        self.gains = self.initial;
        self.state = ControllerState::default();
        self.sign = 1.0;
    }

    fn output_is_increment(&self) -> bool {
        false
    }

    fn gains(&self) -> GainSet {
        self.gains
    }
}

#[derive(Debug, Clone)]
pub struct FuzzyPdController {
    system: FuzzySystem,
    gains: GainSet,
    initial: GainSet,
    boxes: GainBoxes,
    state: ControllerState,
    sign: f64,
}

impl FuzzyPdController {
    pub fn new(system: FuzzySystem, gains: GainSet, boxes: GainBoxes) -> Result<Self> {
        gains.validate()?;
        boxes.validate()?;
        Ok(FuzzyPdController {
            system,
            gains,
            initial: gains,
            boxes,
            state: ControllerState::default(),
            sign: 1.0,
        })
    }

    pub fn system(&self) -> &FuzzySystem {
        &self.system
    }
}

impl Controller for FuzzyPdController {
    fn step(&mut self, error: f64, dt: f64) -> Result<f64> {
        if self.gains.mu > 0.0 {
            ensure_finite("e", error)?;
            check_dt(dt)?;
            let du = self.state.prev_output - self.state.prev2_output;
            self.sign = sensitivity_sign(self.state.prev_measured_delta, du, self.sign);
            let inc = Increments::from_history(error, &self.state, dt);
            self.gains = adapt_fuzzy_scaling(error, self.sign, &self.gains, &inc, &self.boxes)?;
        }
        let (u, next) = fuzzy_pd_step(error, &self.state, &self.system, &self.gains, dt)?;
        self.state = next;
        Ok(u)
    }

    fn reset(&mut self) {
        self.gains = self.initial;
        self.state = ControllerState::default();
        self.sign = 1.0;
    }

    fn gains(&self) -> GainSet {
        self.gains
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{GeneQuad, UniverseScales};

    fn gains(kp: f64, ki: f64, kd: f64) -> GainSet {
        GainSet {
            kp,
            ki,
            kd,
            ..GainSet::default()
        }
    }

    const WIDE: Bounds = Bounds::new(-1e9, 1e9);

    #[test]
    fn pd_examples() {
        assert_eq!(pd_step(0.0, 0.0, &gains(3.0, 0.0, 7.0)).unwrap(), 0.0);
        assert_eq!(pd_step(1.5, 0.0, &gains(2.0, 0.0, 0.0)).unwrap(), 3.0);
        assert_eq!(pd_step(1.0, 2.0, &gains(1.0, 0.0, 0.5)).unwrap(), 2.0);
        assert!(pd_step(f64::NAN, 0.0, &gains(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn pid_zero_error_stays_zero() {
        let g = gains(1.0, 2.0, 3.0);
        let mut s = ControllerState::default();
        for _ in 0..100 {
            let (u, next, _) = pid_incremental_step(0.0, &s, &g, 0.01, &WIDE).unwrap();
            assert_eq!(u, 0.0);
            s = next;
        }
    }

    #[test]
    fn pid_pure_integral_ramp() {
        let g = gains(0.0, 2.0, 0.0);
        let (c, dt) = (0.5, 0.01);
        let mut s = ControllerState::default();
        let mut prev = 0.0;
        for _ in 0..50 {
            let (u, next, _) = pid_incremental_step(c, &s, &g, dt, &WIDE).unwrap();
            assert!((u - prev - 2.0 * c * dt).abs() < 1e-12);
            prev = u;
            s = next;
        }
    }

    #[test]
    fn pid_single_proportional_step() {
        let (u, _, inc) =
            pid_incremental_step(1.0, &ControllerState::default(), &gains(1.0, 0.0, 0.0), 0.01, &WIDE)
                .unwrap();
        assert_eq!(inc.e_p, 1.0);
        assert_eq!(u, 1.0);
    }

    #[test]
    fn pid_is_bumpless_under_gain_change() {
        let mut s = ControllerState::default();
        let (_, next, _) = pid_incremental_step(0.4, &s, &gains(1.0, 1.0, 0.1), 0.01, &WIDE).unwrap();
        s = next;
        for _ in 0..3 {
            let (_, next, _) = pid_incremental_step(0.0, &s, &gains(1.0, 1.0, 0.1), 0.01, &WIDE).unwrap();
            s = next;
        }
        let held = s.prev_output;
        let (_, settled, _) = pid_incremental_step(0.0, &s, &gains(1.0, 1.0, 0.1), 0.01, &WIDE).unwrap();
        let (u, _, _) = pid_incremental_step(0.0, &settled, &gains(9.0, 5.0, 2.0), 0.01, &WIDE).unwrap();
        assert_eq!(u, settled.prev_output);
        assert_eq!(settled.prev_output, held);
    }

    #[test]
    fn pid_output_clamped() {
        let out = Bounds::new(-0.2, 0.2);
        let (u, s, _) =
            pid_incremental_step(10.0, &ControllerState::default(), &gains(1.0, 1.0, 0.0), 1.0, &out)
                .unwrap();
        assert_eq!(u, 0.2);
        assert_eq!(s.integral, 0.2);
    }

    #[test]
    fn adapt_examples() {
        let boxes = GainBoxes::default();
        let inc = Increments {
            e_p: 1.0,
            e_i: 0.3,
            e_d: -2.0,
        };
        let g = gains(1.0, 1.0, 1.0);
        assert_eq!(adapt_gains(1.0, 1.0, &g, &inc, &boxes).unwrap(), g);

        let g = GainSet { mu: 0.1, ..gains(1.0, 1.0, 1.0) };
        let inc = Increments {
            e_p: 1.0,
            e_i: 0.0,
            e_d: 0.0,
        };
        let out = adapt_gains(1.0, 1.0, &g, &inc, &boxes).unwrap();
        assert!((out.kp - 1.1).abs() < 1e-15);
        assert_eq!((out.ki, out.kd), (1.0, 1.0));

        let tight = GainBoxes {
            kp: Bounds::new(0.0, 1.05),
            ..boxes
        };
        assert_eq!(adapt_gains(1.0, 1.0, &g, &inc, &tight).unwrap().kp, 1.05);
    }

    #[test]
    fn sensitivity_deadband_holds_sign() {
        assert_eq!(sensitivity_sign(1.0, 1e-12, -1.0), -1.0);
        assert_eq!(sensitivity_sign(1.0, 1e-3, -1.0), 1.0);
        assert_eq!(sensitivity_sign(-1.0, 1e-3, 1.0), -1.0);
    }

    fn symmetric_system() -> FuzzySystem {
        let q = GeneQuad::new([0.5; 4]).unwrap();
        FuzzySystem::from_quads(&q, &q, &q, &UniverseScales::default()).unwrap()
    }

    #[test]
    fn fuzzy_pd_zero_and_sign() {
        let sys = symmetric_system();
        let g = GainSet::default();
        let (u, _) = fuzzy_pd_step(0.0, &ControllerState::default(), &sys, &g, 0.001).unwrap();
        assert_eq!(u, 0.0);

        // ec = 0 needs the previous error equal to the current one
        let s = ControllerState {
            prev_error: 0.005,
            ..Default::default()
        };
        let (u, _) = fuzzy_pd_step(0.005, &s, &sys, &g, 0.001).unwrap();
        assert!(u > 0.0);

        let g2 = GainSet { gu: 2.0, ..g };
        let (u2, _) = fuzzy_pd_step(0.005, &s, &sys, &g2, 0.001).unwrap();
        assert_eq!(u2, 2.0 * u);
    }

    #[test]
    fn fuzzy_pd_output_bounded() {
        let sys = symmetric_system();
        let g = GainSet {
            ge: 10.0,
            gce: 3.0,
            gu: 4.0,
            ..GainSet::default()
        };
        let mut s = ControllerState::default();
        let limit = g.gu * sys.u.center(crate::fuzzy::Term::PB);
        for k in 0..500 {
            let e = (f64::from(k) * 0.37).sin() * 2.0;
            let (u, next) = fuzzy_pd_step(e, &s, &sys, &g, 0.001).unwrap();
            assert!(u.abs() <= limit + 1e-15);
            s = next;
        }
    }

    #[test]
    fn adaptive_pid_without_rate_matches_incremental_law() {
        let g = gains(0.5, 2.0, 0.01);
        let mut ctrl = AdaptivePidController::new(g, GainBoxes::default(), WIDE).unwrap();
        let mut s = ControllerState::default();
        for k in 0..50 {
            let e = (f64::from(k) * 0.1).cos();
            let u = ctrl.step(e, 0.01).unwrap();
            let (want, next, _) = pid_incremental_step(e, &s, &g, 0.01, &WIDE).unwrap();
            assert_eq!(u, want);
            s = next;
        }
        assert!(!ctrl.output_is_increment());
    }

    #[test]
    fn adaptive_pid_adapts_and_resets() {
        let g = GainSet {
            mu: 0.5,
            ..gains(0.5, 1.0, 0.0)
        };
        let mut ctrl = AdaptivePidController::new(g, GainBoxes::default(), WIDE).unwrap();
        let mut e = 0.0;
        for _ in 0..20 {
            e += 0.1;
            ctrl.step(e, 0.01).unwrap();
        }
        assert_ne!(ctrl.gains(), g);
        assert!(ctrl.gains().kp.is_finite());
        ctrl.reset();
        assert_eq!(ctrl.gains(), g);
    }
}
