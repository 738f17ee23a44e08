use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{LfcError, Result};
use crate::metrics::{compare_reports, compute_report_with, Comparison, MetricReport, SimTrace};
use crate::optim::{efficiency, ga_dsnn_run, ga_run, Chromosome, GaOutcome};

use super::plot::frequency_plot_svg;
use super::scenario::{ControllerKind, Scenario};
use super::sim::{build_controller, divergence_error, fuzzy_objective, simulate_trace, Divergence};

/// Result of the optimization stage of a GA-tuned run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerLog {
    pub outcome: GaOutcome,
    /// `Some` when offspring were screened by the surrogate.
    pub screen_ratio: Option<f64>,
}

/// Everything needed to reproduce a run: resolved configuration, seed and version.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub controller: String,
    pub seed: u64,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_genes: Option<[f64; 12]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_j: Option<f64>,
    /// The scenario exactly as simulated, in its file format.
    pub scenario: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub kind: ControllerKind,
    pub trace: SimTrace,
    /// Absent only when divergence left fewer than two samples.
    pub report: Option<MetricReport>,
    pub efficiency: Option<f64>,
    pub optimizer: Option<OptimizerLog>,
    pub divergence: Option<Divergence>,
    pub manifest: Manifest,
}

/// Runs the optimizer configured for the scenario's controller.
///
/// Plain GA for `fuzzy-pd-ga`, surrogate-screened GA for `fuzzy-pd-ga-dsnn`.
/// The configured fuzzy genes seed the initial population.
pub fn optimize(sc: &Scenario) -> Result<OptimizerLog> {
    let kind = sc.kind();
    if !kind.is_optimized() {
        return Err(LfcError::config(format!("controller {kind} has no optimizer")));
    }
    sc.validate_blocks(kind)?;
    let mut cfg = sc.ga.expect("validated");
    cfg.seed = sc.simulation.seed;
    let start = Chromosome::new(sc.fuzzy_pd.expect("validated").genes)?;
    let penalty = sc.simulation.divergence_penalty;
    let objective = |c: &Chromosome| fuzzy_objective(sc, c).map(|o| o.j).unwrap_or(penalty);
    if kind == ControllerKind::FuzzyPdGaDsnn {
        let s = sc.surrogate.expect("validated");
        Ok(OptimizerLog {
            outcome: ga_dsnn_run(&cfg, &objective, &[start], s.screen_ratio, &s.net)?,
            screen_ratio: Some(s.screen_ratio),
        })
    } else {
        Ok(OptimizerLog {
            outcome: ga_run(&cfg, &objective, &[start])?,
            screen_ratio: None,
        })
    }
}

pub fn run_scenario(sc: &Scenario) -> Result<RunArtifacts> {
    let mut sc = sc.clone();
    sc.sync();
    sc.validate()?;
    let kind = sc.kind();
    let optimizer = if kind.is_optimized() {
        Some(optimize(&sc)?)
    } else {
        None
    };
    let best = optimizer.as_ref().map(|o| o.outcome.best);
    let mut ctrl = build_controller(&sc, kind, best.as_ref().map(|b| &b.chromosome))?;
    let (trace, summary) = simulate_trace(&sc, ctrl.as_mut())?;
    let report = if trace.len() >= 2 {
        Some(compute_report_with(&trace, &sc.metrics)?)
    } else {
        None
    };
    let eff = if trace.len() >= 2 {
        efficiency(&trace, sc.rated_power_kw()?, None).ok()
    } else {
        None
    };
    let manifest = Manifest {
        tool: "hydrolfc",
        version: env!("CARGO_PKG_VERSION"),
        controller: kind.name().to_string(),
        seed: sc.simulation.seed,
        diverged: summary.divergence.is_some(),
        best_genes: best.map(|b| b.chromosome.0),
        best_j: best.map(|b| b.j),
        scenario: sc.to_toml(),
    };
    Ok(RunArtifacts {
        kind,
        trace,
        report,
        efficiency: eff,
        optimizer,
        divergence: summary.divergence,
        manifest,
    })
}

#[derive(Debug)]
pub struct ComparisonArtifacts {
    pub entries: Vec<(ControllerKind, std::result::Result<RunArtifacts, String>)>,
    /// Table over the runs that produced a report; `None` if fewer than two did.
    pub table: Option<Comparison>,
}

/// Runs each controller on the same plant, events and seed.
pub fn run_comparison(base: &Scenario, controllers: &[ControllerKind]) -> Result<ComparisonArtifacts> {
    if controllers.len() < 2 {
        return Err(LfcError::config("comparison needs at least two controllers"));
    }
    let entries: Vec<_> = controllers
        .iter()
        .map(|&k| (k, run_scenario(&base.with_controller(k)).map_err(|e| e.to_string())))
        .collect();
    let named: Vec<(String, MetricReport)> = entries
        .iter()
        .filter_map(|(k, r)| {
            let r = r.as_ref().ok()?;
            Some((k.name().to_string(), r.report?))
        })
        .collect();
    let table = if named.len() >= 2 {
        Some(compare_reports(&named)?)
    } else {
        None
    };
    Ok(ComparisonArtifacts { entries, table })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| LfcError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LfcError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| LfcError::io(path, e))?;
    tmp.persist(path).map_err(|e| LfcError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact is serializable");
    s.push('\n');
    s
}

impl OptimizerLog {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("ga_log.csv"), self.outcome.log_csv().as_bytes())?;
        #[derive(Serialize)]
        struct Best<'a> {
            genes: &'a [f64; 12],
            j: f64,
            evaluated_by: crate::optim::EvalSource,
            true_evals: usize,
            screen_ratio: Option<f64>,
        }
        let b = &self.outcome.best;
        write_atomic(
            &dir.join("best.json"),
            to_json(&Best {
                genes: &b.chromosome.0,
                j: b.j,
                evaluated_by: b.evaluated_by,
                true_evals: self.outcome.true_evals,
                screen_ratio: self.screen_ratio,
            })
            .as_bytes(),
        )
    }
}

impl RunArtifacts {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("trace.csv"), self.trace.to_csv_string().as_bytes())?;
        if let Some(r) = &self.report {
            #[derive(Serialize)]
            struct ReportFile<'a> {
                controller: &'a str,
                #[serde(flatten)]
                report: &'a MetricReport,
                efficiency: Option<f64>,
                diverged: bool,
            }
            let file = ReportFile {
                controller: self.kind.name(),
                report: r,
                efficiency: self.efficiency,
                diverged: self.divergence.is_some(),
            };
            write_atomic(&dir.join("report.json"), to_json(&file).as_bytes())?;
        }
        write_atomic(&dir.join("manifest.json"), to_json(&self.manifest).as_bytes())?;
        if let Some(opt) = &self.optimizer {
            opt.write_to(dir)?;
        }
        let svg = frequency_plot_svg(&[(self.kind.name(), &self.trace)]);
        write_atomic(&dir.join("frequency.svg"), svg.as_bytes())
    }

    /// Divergence as an error, for callers that treat it as failure.
    pub fn divergence_error(&self) -> Option<LfcError> {
        self.divergence.as_ref().map(divergence_error)
    }
}

impl ComparisonArtifacts {
    pub fn text(&self) -> String {
        let mut s = self
            .table
            .as_ref()
            .map(Comparison::to_text)
            .unwrap_or_else(|| String::from("no comparison table: fewer than two runs produced a report\n"));
        for (k, r) in &self.entries {
            match r {
                Err(msg) => s.push_str(&format!("FAILED {k}: {msg}\n")),
                Ok(a) if a.divergence.is_some() => s.push_str(&format!("DIVERGED {k}: partial trace\n")),
                Ok(_) => {}
            }
        }
        s
    }

    pub fn any_divergence(&self) -> bool {
        self.entries
            .iter()
            .any(|(_, r)| matches!(r, Ok(a) if a.divergence.is_some()))
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        if let Some(t) = &self.table {
            write_atomic(&dir.join("comparison.csv"), t.to_csv().as_bytes())?;
        }
        write_atomic(&dir.join("comparison.txt"), self.text().as_bytes())?;
        let mut series = Vec::new();
        for (k, r) in &self.entries {
            if let Ok(a) = r {
                a.write_to(&dir.join(k.name()))?;
                series.push((k.name(), &a.trace));
            }
        }
        write_atomic(&dir.join("frequency_overlay.svg"), frequency_plot_svg(&series).as_bytes())
    }
}
