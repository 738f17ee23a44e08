use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::{GainBoxes, GainSet};
use crate::error::{LfcError, Result};
use crate::fuzzy::UniverseScales;
use crate::metrics::ReportOptions;
use crate::optim::{Chromosome, GaConfig, SurrogateConfig, N_GENES};
use crate::plant::{turbine_power, PlantParams, SlcLadder, TurbineRating};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Pd,
    PidAdaptive,
    FuzzyPd,
    FuzzyPdGa,
    FuzzyPdGaDsnn,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 5] = [
        ControllerKind::Pd,
        ControllerKind::PidAdaptive,
        ControllerKind::FuzzyPd,
        ControllerKind::FuzzyPdGa,
        ControllerKind::FuzzyPdGaDsnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Pd => "pd",
            ControllerKind::PidAdaptive => "pid-adaptive",
            ControllerKind::FuzzyPd => "fuzzy-pd",
            ControllerKind::FuzzyPdGa => "fuzzy-pd-ga",
            ControllerKind::FuzzyPdGaDsnn => "fuzzy-pd-ga-dsnn",
        }
    }

    pub fn is_fuzzy(self) -> bool {
        matches!(
            self,
            ControllerKind::FuzzyPd | ControllerKind::FuzzyPdGa | ControllerKind::FuzzyPdGaDsnn
        )
    }

    pub fn is_optimized(self) -> bool {
        matches!(self, ControllerKind::FuzzyPdGa | ControllerKind::FuzzyPdGaDsnn)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = LfcError;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| LfcError::config(format!("unknown controller {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Actuator {
    /// Controller drives the dump-load ladder; the gate is held.
    #[default]
    Slc,
    /// Controller drives the governor; the dump load is held.
    Gate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Simulated span (s).
    pub horizon: f64,
    /// Fixed step (s).
    pub dt: f64,
    pub seed: u64,
    /// |df| (pu) beyond which a run is declared divergent.
    #[serde(default = "default_blowup")]
    pub blowup_pu: f64,
    /// Objective value assigned to divergent runs.
    #[serde(default = "default_penalty")]
    pub divergence_penalty: f64,
}

fn default_blowup() -> f64 {
    0.5
}

fn default_penalty() -> f64 {
    1e6
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            horizon: 10.0,
            dt: 1e-3,
            seed: 2021,
            blowup_pu: default_blowup(),
            divergence_penalty: default_penalty(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegulatorConfig {
    pub actuator: Actuator,
    /// PLL lag (s); 0 measures exactly.
    pub pll_tau: f64,
    /// Consumer load at the operating point (kW).
    pub base_load_kw: f64,
    /// Gate command range (pu) in gate mode.
    pub gate_min: f64,
    pub gate_max: f64,
}

impl Default for RegulatorConfig {
    fn default() -> Self {
        RegulatorConfig {
            actuator: Actuator::Slc,
            pll_tau: 0.0,
            base_load_kw: 250.0,
            gate_min: -0.5,
            gate_max: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadEvent {
    /// Event instant (s).
    pub t: f64,
    /// Consumer load change (kW); positive adds load.
    pub delta_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerChoice {
    pub kind: ControllerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidAdaptiveConfig {
    pub gains: GainSet,
    #[serde(default)]
    pub boxes: GainBoxes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyPdConfig {
    /// Twelve genes, `e`, `ec`, `u` quads in order. Also the GA's seed individual.
    pub genes: [f64; N_GENES],
    #[serde(default)]
    pub scales: UniverseScales,
    pub gains: GainSet,
    #[serde(default)]
    pub boxes: GainBoxes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateBlock {
    /// Fraction of offspring that receive a true simulation.
    pub screen_ratio: f64,
    #[serde(flatten)]
    pub net: SurrogateConfig,
}

impl Default for SurrogateBlock {
    fn default() -> Self {
        SurrogateBlock {
            screen_ratio: 0.5,
            net: SurrogateConfig::default(),
        }
    }
}

/// A complete experiment: plant, load events, controller choice and the
/// configuration blocks the chosen controller needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub turbine: TurbineRating,
    #[serde(default)]
    pub slc: SlcLadder,
    #[serde(default)]
    pub regulator: RegulatorConfig,
    #[serde(default)]
    pub load_events: Vec<LoadEvent>,
    pub controller: ControllerChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<GainSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pid_adaptive: Option<PidAdaptiveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuzzy_pd: Option<FuzzyPdConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<SurrogateBlock>,
    #[serde(default)]
    pub metrics: ReportOptions,
}

/// Shipped PD gains (pu command rate per Hz, pu per Hz).
pub const DEFAULT_PD: GainSet = GainSet {
    kp: 0.04,
    ki: 0.0,
    kd: 0.08,
    mu: 0.0,
    ge: 1.0,
    gce: 1.0,
    gu: 1.0,
};

/// Shipped fuzzy scaling gains.
pub const DEFAULT_FUZZY_GAINS: GainSet = GainSet {
    kp: 0.0,
    ki: 0.0,
    kd: 0.0,
    mu: 0.0,
    ge: 0.128,
    gce: 25.0,
    gu: 6.0,
};

impl Scenario {
    /// The reference experiment: a single load step of `delta_kw` at t = 1 s,
    /// 10 s horizon, 1 ms step, with configuration blocks for every controller.
    pub fn default_load_step(delta_kw: f64) -> Self {
        let mut sc = Scenario {
            simulation: SimulationConfig::default(),
            plant: PlantParams::default(),
            turbine: TurbineRating::default(),
            slc: SlcLadder::default(),
            regulator: RegulatorConfig::default(),
            load_events: vec![LoadEvent { t: 1.0, delta_kw }],
            controller: ControllerChoice {
                kind: ControllerKind::FuzzyPdGaDsnn,
            },
            pd: Some(DEFAULT_PD),
            pid_adaptive: Some(PidAdaptiveConfig {
                gains: GainSet {
                    kp: 0.08,
                    ki: 0.04,
                    kd: 0.0,
                    mu: 1e-3,
                    ..GainSet::default()
                },
                boxes: GainBoxes::default(),
            }),
            fuzzy_pd: Some(FuzzyPdConfig {
                genes: Chromosome::symmetric_default().0,
                scales: UniverseScales::default(),
                gains: DEFAULT_FUZZY_GAINS,
                boxes: GainBoxes::default(),
            }),
            ga: Some(GaConfig::default()),
            surrogate: Some(SurrogateBlock::default()),
            metrics: ReportOptions::default(),
        };
        sc.sync();
        sc
    }

    pub fn with_controller(&self, kind: ControllerKind) -> Self {
        Scenario {
            controller: ControllerChoice { kind },
            ..self.clone()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut sc: Scenario =
            toml::from_str(text).map_err(|e| LfcError::config(format!("scenario: {e}")))?;
        sc.sync();
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario is always serializable")
    }

    /// Copies values owned by the simulation block into the nested configs.
    pub fn sync(&mut self) {
        self.plant.dt = self.simulation.dt;
        if let Some(ga) = self.ga.as_mut() {
            ga.seed = self.simulation.seed;
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.simulation.seed = seed;
        self.sync();
    }

    pub fn plant_params(&self) -> PlantParams {
        PlantParams {
            dt: self.simulation.dt,
            ..self.plant
        }
    }

    pub fn kind(&self) -> ControllerKind {
        self.controller.kind
    }

    pub fn steps(&self) -> usize {
        (self.simulation.horizon / self.simulation.dt).round() as usize
    }

    /// Operating-point generation (kW).
    pub fn rated_power_kw(&self) -> Result<f64> {
        turbine_power(&self.turbine)
    }

    pub fn validate(&self) -> Result<()> {
        let sim = &self.simulation;
        if !(sim.dt.is_finite() && sim.dt > 0.0) {
            return Err(LfcError::config(format!("dt must be > 0, got {}", sim.dt)));
        }
        if !(sim.horizon.is_finite() && sim.horizon >= sim.dt) {
            return Err(LfcError::config(format!(
                "horizon {} must be at least one step",
                sim.horizon
            )));
        }
        if !(sim.blowup_pu.is_finite() && sim.blowup_pu > 0.0) {
            return Err(LfcError::config("blowup_pu must be > 0"));
        }
        if !(sim.divergence_penalty.is_finite() && sim.divergence_penalty >= 0.0) {
            return Err(LfcError::config("divergence_penalty must be finite and >= 0"));
        }
        self.plant_params().validate().map_err(as_config)?;
        self.slc.validate().map_err(as_config)?;
        let p_m = self.rated_power_kw().map_err(as_config)?;
        let surplus = p_m - self.regulator.base_load_kw;
        if !(0.0..=self.slc.max_kw()).contains(&surplus) {
            return Err(LfcError::config(format!(
                "operating surplus {surplus} kW (generation {p_m} - base load {}) must lie on the dump-load ladder [0, {}]",
                self.regulator.base_load_kw,
                self.slc.max_kw()
            )));
        }
        if !(self.regulator.pll_tau.is_finite() && self.regulator.pll_tau >= 0.0) {
            return Err(LfcError::config("pll_tau must be >= 0"));
        }
        if !(self.regulator.gate_min < self.regulator.gate_max) {
            return Err(LfcError::config("gate_min must be below gate_max"));
        }
        let mut prev = 0.0;
        for ev in &self.load_events {
            if !(ev.t.is_finite() && ev.delta_kw.is_finite()) {
                return Err(LfcError::config("load event values must be finite"));
            }
            if ev.t < prev || ev.t > sim.horizon {
                return Err(LfcError::config(format!(
                    "load events must be time-ordered within [0, {}]; got t = {}",
                    sim.horizon, ev.t
                )));
            }
            prev = ev.t;
        }
        self.metrics.validate().map_err(as_config)?;
        self.validate_blocks(self.kind())
    }

    /// Checks that every block `kind` needs is present and well-formed.
    pub fn validate_blocks(&self, kind: ControllerKind) -> Result<()> {
        let missing = |b: &str| LfcError::config(format!("controller {kind} needs a [{b}] block"));
        match kind {
            ControllerKind::Pd => self.pd.ok_or_else(|| missing("pd"))?.validate()?,
            ControllerKind::PidAdaptive => {
                let c = self.pid_adaptive.ok_or_else(|| missing("pid_adaptive"))?;
                c.gains.validate()?;
                c.boxes.validate()?;
            }
            _ => {}
        }
        if kind.is_fuzzy() {
            let f = self.fuzzy_pd.ok_or_else(|| missing("fuzzy_pd"))?;
            f.gains.validate()?;
            f.boxes.validate()?;
            Chromosome::new(f.genes)
                .and_then(|c| c.fuzzy_system(&f.scales))
                .map_err(as_config)?;
        }
        if kind.is_optimized() {
            self.ga.ok_or_else(|| missing("ga"))?.validate()?;
        }
        if kind == ControllerKind::FuzzyPdGaDsnn {
            let s = self.surrogate.ok_or_else(|| missing("surrogate"))?;
            if !(s.screen_ratio > 0.0 && s.screen_ratio <= 1.0) {
                return Err(LfcError::config(format!(
                    "screen_ratio must be in (0, 1], got {}",
                    s.screen_ratio
                )));
            }
            s.net.validate()?;
        }
        Ok(())
    }
}

fn as_config(e: LfcError) -> LfcError {
    match e {
        LfcError::Domain(m) => LfcError::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_round_trips_through_toml() {
        let sc = Scenario::default_load_step(50.0);
        sc.validate().unwrap();
        let text = sc.to_toml();
        let back = Scenario::from_toml(&text).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = Scenario::default_load_step(50.0).to_toml();
        text = text.replace("[plant]\n", "[plant]\nbogus = 1.0\n");
        assert!(matches!(Scenario::from_toml(&text), Err(LfcError::Config(_))));
    }

    #[test]
    fn missing_block_is_rejected() {
        let mut sc = Scenario::default_load_step(50.0).with_controller(ControllerKind::Pd);
        sc.pd = None;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn unordered_events_rejected() {
        let mut sc = Scenario::default_load_step(50.0);
        sc.load_events = vec![
            LoadEvent { t: 2.0, delta_kw: 1.0 },
            LoadEvent { t: 1.0, delta_kw: 1.0 },
        ];
        assert!(sc.validate().is_err());
        sc.load_events = vec![LoadEvent { t: 20.0, delta_kw: 1.0 }];
        assert!(sc.validate().is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in ControllerKind::ALL {
            assert_eq!(k.name().parse::<ControllerKind>().unwrap(), k);
        }
        assert!("pid".parse::<ControllerKind>().is_err());
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let text = r#"
            [simulation]
            horizon = 2.0
            dt = 0.001
            seed = 1

            [controller]
            kind = "pd"

            [pd]
            kp = 0.1
            kd = 0.05
        "#;
        let sc = Scenario::from_toml(text).unwrap();
        assert_eq!(sc.plant.p_base_kw, 500.0);
        assert_eq!(sc.steps(), 2000);
        assert!(sc.load_events.is_empty());
    }
}
