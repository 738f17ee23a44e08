use crate::control::{
    AdaptivePidController, Bounds, Controller, FuzzyPdController, PdController,
};
use crate::error::{LfcError, Result};
use crate::metrics::SimTrace;
use crate::optim::Chromosome;
use crate::plant::{slc_quantize, PlantModel, PlantState, Pll};

use super::scenario::{Actuator, ControllerKind, Scenario};

/// One recorded sample of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Measured frequency deviation (Hz).
    pub f_err_hz: f64,
    pub p_gen_kw: f64,
    pub p_load_kw: f64,
    pub p_slc_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub t: f64,
    pub df: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSummary {
    /// Rectangle-rule integral of squared frequency error (Hz² s).
    pub ise: f64,
    pub divergence: Option<Divergence>,
}

/// Range of the actuator command (pu) for the scenario's actuator.
///
/// In dump-load mode the command is the reduction of absorbed power from its
/// operating value, so it cannot exceed what the ladder can shed or absorb.
pub fn command_limits(sc: &Scenario) -> Result<Bounds> {
    let p_base = sc.plant.p_base_kw;
    match sc.regulator.actuator {
        Actuator::Slc => {
            let surplus = sc.rated_power_kw()? - sc.regulator.base_load_kw;
            Ok(Bounds::new(
                (surplus - sc.slc.max_kw()) / p_base,
                surplus / p_base,
            ))
        }
        Actuator::Gate => Ok(Bounds::new(sc.regulator.gate_min, sc.regulator.gate_max)),
    }
}

/// Builds the controller for `kind`; optimized kinds need their genes supplied.
pub fn build_controller(
    sc: &Scenario,
    kind: ControllerKind,
    genes: Option<&Chromosome>,
) -> Result<Box<dyn Controller>> {
    sc.validate_blocks(kind)?;
    Ok(match kind {
        ControllerKind::Pd => Box::new(PdController::new(sc.pd.expect("validated"))?),
        ControllerKind::PidAdaptive => {
            let c = sc.pid_adaptive.expect("validated");
            Box::new(AdaptivePidController::new(c.gains, c.boxes, command_limits(sc)?)?)
        }
        _ => {
            let f = sc.fuzzy_pd.expect("validated");
            let chrom = match genes {
                Some(c) => *c,
                None => Chromosome::new(f.genes)?,
            };
            Box::new(FuzzyPdController::new(chrom.fuzzy_system(&f.scales)?, f.gains, f.boxes)?)
        }
    })
}

/// Runs the closed loop over the scenario horizon, handing every sample to
/// `observe`. Stops early on divergence.
pub fn simulate<F>(sc: &Scenario, controller: &mut dyn Controller, mut observe: F) -> Result<LoopSummary>
where
    F: FnMut(&Sample),
{
    let params = sc.plant_params();
    let model = PlantModel::new(params)?;
    let mut pll = Pll::new(sc.regulator.pll_tau)?;
    let limits = command_limits(sc)?;
    let dt = sc.simulation.dt;
    let n = sc.steps();
    let p_base = params.p_base_kw;

    let p_m0 = sc.rated_power_kw()?;
    let load0 = sc.regulator.base_load_kw;
    let surplus0 = p_m0 - load0;
    let (code0, absorbed0) = slc_quantize(surplus0, &sc.slc)?;

    let mut state = PlantState {
        slc_code: code0,
        ..PlantState::default()
    };
    let mut absorbed = absorbed0;
    let mut load = load0;
    let mut next_event = 0;
    let mut command = 0.0;
    let incremental = controller.output_is_increment();
    let mut ise = 0.0;

    for k in 0..=n {
        let t = k as f64 * dt;
        while let Some(ev) = sc.load_events.get(next_event) {
            if ev.t > t + 1e-9 * dt {
                break;
            }
            load += ev.delta_kw;
            next_event += 1;
        }
        let f_err = pll.measure(&state, &params)?;
        observe(&Sample {
            t,
            f_err_hz: f_err,
            p_gen_kw: p_m0 + state.mech_power() * p_base,
            p_load_kw: load,
            p_slc_kw: absorbed,
        });
        if k == n {
            break;
        }
        ise += f_err * f_err * dt;

        let u = controller.step(-f_err, dt)?;
        command = if incremental {
            limits.clamp(command + u * dt)
        } else {
            limits.clamp(u)
        };
        let (u_gate, dp_load) = match sc.regulator.actuator {
            Actuator::Slc => {
                let (code, abs_kw) = slc_quantize(surplus0 - command * p_base, &sc.slc)?;
                state.slc_code = code;
                absorbed = abs_kw;
                (0.0, (load - load0 + absorbed - absorbed0) / p_base)
            }
            Actuator::Gate => (command, (load - load0) / p_base),
        };
        state = model.step_unchecked(&state, u_gate, dp_load);
        state.t = (k + 1) as f64 * dt;

        if !state.df.is_finite() || state.df.abs() > sc.simulation.blowup_pu {
            return Ok(LoopSummary {
                ise,
                divergence: Some(Divergence {
                    t: state.t,
                    df: state.df,
                }),
            });
        }
    }
    Ok(LoopSummary {
        ise,
        divergence: None,
    })
}

/// Simulates and keeps the full trace.
pub fn simulate_trace(sc: &Scenario, controller: &mut dyn Controller) -> Result<(SimTrace, LoopSummary)> {
    let mut trace = SimTrace::with_capacity(sc.steps() + 1);
    let summary = simulate(sc, controller, |s| {
        trace.push(s.t, s.f_err_hz, s.p_gen_kw, s.p_load_kw, s.p_slc_kw)
    })?;
    Ok((trace, summary))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub j: f64,
    pub diverged: bool,
}

/// Squared-error objective of the fuzzy controller built from `genes`.
pub fn fuzzy_objective(sc: &Scenario, genes: &Chromosome) -> Result<Objective> {
    let mut ctrl = build_controller(sc, ControllerKind::FuzzyPd, Some(genes))?;
    let summary = simulate(sc, ctrl.as_mut(), |_| {})?;
    Ok(match summary.divergence {
        Some(_) => Objective {
            j: sc.simulation.divergence_penalty,
            diverged: true,
        },
        None => Objective {
            j: summary.ise,
            diverged: false,
        },
    })
}

pub(crate) fn divergence_error(d: &Divergence) -> LfcError {
    LfcError::Divergence { t: d.t, df: d.df }
}
