//! Genetic search over membership-function genes, with optional surrogate
//! pre-screening of offspring.

mod ga;
mod surrogate;

use serde::{Deserialize, Serialize};

pub use ga::{ga_dsnn_run, ga_run, stream_rng, GaOutcome, GenerationStats};
pub use surrogate::{
    surrogate_predict, surrogate_train, Activation, FitReport, SurrogateConfig, SurrogateNet,
};

use crate::error::{LfcError, Result};
use crate::fuzzy::{FuzzySystem, GeneQuad, UniverseScales, GENE_MAX, GENE_MIN};
use crate::harness::Scenario;
use crate::metrics::SimTrace;

pub const N_GENES: usize = 12;

/// Twelve genes: the `e`, `ec` and `u` quads in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chromosome(pub [f64; N_GENES]);

impl Chromosome {
    pub fn new(genes: [f64; N_GENES]) -> Result<Self> {
        if let Some((i, g)) = genes
            .iter()
            .enumerate()
            .find(|(_, g)| !(GENE_MIN..=GENE_MAX).contains(*g))
        {
            return Err(LfcError::domain(format!(
                "gene {i} = {g} outside [{GENE_MIN}, {GENE_MAX}]"
            )));
        }
        Ok(Chromosome(genes))
    }

    pub fn from_slice(genes: &[f64]) -> Result<Self> {
        let arr: [f64; N_GENES] = genes.try_into().map_err(|_| {
            LfcError::domain(format!("expected {N_GENES} genes, got {}", genes.len()))
        })?;
        Self::new(arr)
    }

    /// All genes at 0.5: three symmetric, evenly spread partitions.
    pub fn symmetric_default() -> Self {
        Chromosome([0.5; N_GENES])
    }

    pub fn genes(&self) -> &[f64; N_GENES] {
        &self.0
    }

    pub fn quad(&self, k: usize) -> GeneQuad {
        let g = &self.0;
        GeneQuad([g[4 * k], g[4 * k + 1], g[4 * k + 2], g[4 * k + 3]])
    }

    pub fn fuzzy_system(&self, scales: &UniverseScales) -> Result<FuzzySystem> {
        FuzzySystem::from_genes(&self.0, scales)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalSource {
    Simulation,
    Surrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub chromosome: Chromosome,
    pub j: f64,
    pub evaluated_by: EvalSource,
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub pop_size: usize,
    pub elite_count: usize,
    /// Probability that an offspring comes from blend crossover rather than cloning.
    pub crossover_rate: f64,
    /// Per-gene probability of Gaussian mutation.
    pub mutation_rate: f64,
    pub max_generations: usize,
    pub tournament_size: usize,
    /// BLX-alpha extension factor.
    pub blx_alpha: f64,
    /// Standard deviation of the Gaussian mutation step.
    pub mutation_sigma: f64,
    /// Evaluate fitness on the rayon pool. Results do not depend on this.
    pub parallel: bool,
    /// Taken from the scenario seed.
    #[serde(skip, default = "default_seed")]
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 100,
            elite_count: 5,
            crossover_rate: 0.2,
            mutation_rate: 0.02,
            max_generations: 50,
            tournament_size: 3,
            blx_alpha: 0.5,
            mutation_sigma: 0.1,
            parallel: true,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.elite_count > 0 && self.elite_count < self.pop_size) {
            return Err(LfcError::config(format!(
                "need 0 < elite_count ({}) < pop_size ({})",
                self.elite_count, self.pop_size
            )));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(LfcError::config(format!("{name} = {r} outside [0, 1]")));
            }
        }
        if self.max_generations < 1 {
            return Err(LfcError::config("max_generations must be >= 1"));
        }
        if self.tournament_size < 1 {
            return Err(LfcError::config("tournament_size must be >= 1"));
        }
        if !(self.blx_alpha.is_finite() && self.blx_alpha >= 0.0) {
            return Err(LfcError::config("blx_alpha must be >= 0"));
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return Err(LfcError::config("mutation_sigma must be >= 0"));
        }
        Ok(())
    }
}

/// Integrated squared frequency error of the closed loop driven by the fuzzy
/// controller built from `c`. Diverging runs return the scenario's penalty.
pub fn fitness(c: &Chromosome, scenario: &Scenario) -> Result<f64> {
    Ok(crate::harness::fuzzy_objective(scenario, c)?.j)
}

/// Ratio of delivered to theoretical energy over `[t1, t2]` (trapezoid rule),
/// using the generated-power channel. `None` takes the whole trace.
pub fn efficiency(trace: &SimTrace, p_max: f64, window: Option<(f64, f64)>) -> Result<f64> {
    if trace.is_empty() {
        return Err(LfcError::domain("efficiency of an empty trace"));
    }
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(LfcError::domain(format!("p_max must be > 0, got {p_max}")));
    }
    let (t1, t2) = window.unwrap_or((trace.t[0], trace.t[trace.len() - 1]));
    let idx: Vec<usize> = (0..trace.len())
        .filter(|&k| trace.t[k] >= t1 && trace.t[k] <= t2)
        .collect();
    if idx.len() < 2 || !(t2 > t1) {
        return Err(LfcError::domain(format!("window [{t1}, {t2}] has zero length")));
    }
    let mut energy = 0.0;
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        energy += 0.5 * (trace.p_gen[a] + trace.p_gen[b]) * (trace.t[b] - trace.t[a]);
    }
    let span = trace.t[idx[idx.len() - 1]] - trace.t[idx[0]];
    Ok(energy / (p_max * span))
}
