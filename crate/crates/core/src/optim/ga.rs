use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::surrogate::{surrogate_train, SurrogateConfig};
use super::{Chromosome, EvalSource, FitnessRecord, GaConfig, N_GENES};
use crate::error::{LfcError, Result};
use crate::fuzzy::{GENE_MAX, GENE_MIN};

/// Stream id reserved for surrogate hidden-layer draws.
const SURROGATE_STREAM: u64 = u32::MAX as u64;

/// Counter-based generator for individual `index` of `generation`.
///
/// Every stochastic choice about one individual comes from its own stream, so
/// results do not depend on evaluation order or thread count.
pub fn stream_rng(seed: u64, generation: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((generation << 32) | (index & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best true-simulated J seen so far.
    pub best_j: f64,
    /// Mean J of the current population, surrogate estimates included.
    pub mean_j: f64,
    /// Cumulative number of true objective evaluations.
    pub true_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: FitnessRecord,
    pub history: Vec<GenerationStats>,
    pub true_evals: usize,
}

impl GaOutcome {
    pub fn best_history(&self) -> Vec<f64> {
        self.history.iter().map(|s| s.best_j).collect()
    }

    /// `generation,best_j,mean_j,true_evals` rows.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("generation,best_j,mean_j,true_evals\n");
        for h in &self.history {
            s.push_str(&format!("{},{},{},{}\n", h.generation, h.best_j, h.mean_j, h.true_evals));
        }
        s
    }
}

fn sanitize(j: f64) -> f64 {
    if j.is_nan() {
        f64::INFINITY
    } else {
        j
    }
}

fn evaluate<F>(chroms: &[Chromosome], objective: &F, parallel: bool) -> Vec<f64>
where
    F: Fn(&Chromosome) -> f64 + Sync,
{
    if parallel {
        chroms.par_iter().map(|c| sanitize(objective(c))).collect()
    } else {
        chroms.iter().map(|c| sanitize(objective(c))).collect()
    }
}

/// Indices sorted by ascending J, ties broken by index.
fn ranked(pop: &[FitnessRecord], eligible: impl Fn(&FitnessRecord) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.len()).filter(|&i| eligible(&pop[i])).collect();
    idx.sort_by(|&a, &b| pop[a].j.total_cmp(&pop[b].j).then(a.cmp(&b)));
    idx
}

fn tournament(pop: &[FitnessRecord], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        if pop[c].j.total_cmp(&pop[best].j).then(c.cmp(&best)).is_lt() {
            best = c;
        }
    }
    best
}

fn breed_one(pop: &[FitnessRecord], cfg: &GaConfig, generation: usize, index: usize) -> Chromosome {
    let mut rng = stream_rng(cfg.seed, generation as u64, index as u64);
    let a = pop[tournament(pop, cfg.tournament_size, &mut rng)].chromosome.0;
    let b = pop[tournament(pop, cfg.tournament_size, &mut rng)].chromosome.0;
    let mut child = a;
    if rng.random::<f64>() < cfg.crossover_rate {
        for k in 0..N_GENES {
            let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
            let ext = cfg.blx_alpha * (hi - lo);
            let (lo, hi) = (lo - ext, hi + ext);
            let g = if hi > lo { rng.random_range(lo..hi) } else { lo };
            child[k] = g.clamp(GENE_MIN, GENE_MAX);
        }
    }
    let normal = Normal::new(0.0, cfg.mutation_sigma).expect("sigma validated");
    for g in child.iter_mut() {
        if rng.random::<f64>() < cfg.mutation_rate {
            *g = (*g + normal.sample(&mut rng)).clamp(GENE_MIN, GENE_MAX);
        }
    }
    Chromosome(child)
}

fn initial_population(cfg: &GaConfig, seeds: &[Chromosome]) -> Vec<Chromosome> {
    (0..cfg.pop_size)
        .map(|i| match seeds.get(i) {
            Some(c) => *c,
            None => {
                let mut rng = stream_rng(cfg.seed, 0, i as u64);
                let mut g = [0.0; N_GENES];
                for x in g.iter_mut() {
                    *x = rng.random_range(GENE_MIN..=GENE_MAX);
                }
                Chromosome(g)
            }
        })
        .collect()
}

fn stats(generation: usize, best: &FitnessRecord, pop: &[FitnessRecord], evals: usize) -> GenerationStats {
    GenerationStats {
        generation,
        best_j: best.j,
        mean_j: pop.iter().map(|r| r.j).sum::<f64>() / pop.len() as f64,
        true_evals: evals,
    }
}

fn better(a: &FitnessRecord, b: &FitnessRecord) -> bool {
    a.j.total_cmp(&b.j).is_lt()
}

/// Elitist real-coded GA minimizing `objective`.
///
/// `seeds` fill the first slots of the initial population; the rest are
/// uniform random. Generation 0 is the initial population, so the history has
/// `max_generations + 1` entries.
pub fn ga_run<F>(cfg: &GaConfig, objective: &F, seeds: &[Chromosome]) -> Result<GaOutcome>
where
    F: Fn(&Chromosome) -> f64 + Sync,
{
    run(cfg, objective, seeds, None)
}

/// As [`ga_run`], but offspring are ranked by a surrogate network retrained
/// every generation and only the best `screen_ratio` fraction is simulated.
/// Surrogate-scored individuals take part in selection but never become elites.
pub fn ga_dsnn_run<F>(
    cfg: &GaConfig,
    objective: &F,
    seeds: &[Chromosome],
    screen_ratio: f64,
    surrogate: &SurrogateConfig,
) -> Result<GaOutcome>
where
    F: Fn(&Chromosome) -> f64 + Sync,
{
    if !(screen_ratio > 0.0 && screen_ratio <= 1.0) {
        return Err(LfcError::config(format!(
            "screen_ratio must be in (0, 1], got {screen_ratio}"
        )));
    }
    surrogate.validate()?;
    run(cfg, objective, seeds, Some((screen_ratio, surrogate)))
}

fn run<F>(
    cfg: &GaConfig,
    objective: &F,
    seeds: &[Chromosome],
    screening: Option<(f64, &SurrogateConfig)>,
) -> Result<GaOutcome>
where
    F: Fn(&Chromosome) -> f64 + Sync,
{
    cfg.validate()?;
    for s in seeds {
        Chromosome::new(s.0)?;
    }
    let init = initial_population(cfg, seeds);
    let js = evaluate(&init, objective, cfg.parallel);
    let mut evals = init.len();
    let mut pop: Vec<FitnessRecord> = init
        .into_iter()
        .zip(js)
        .map(|(chromosome, j)| FitnessRecord {
            chromosome,
            j,
            evaluated_by: EvalSource::Simulation,
        })
        .collect();
    let mut archive: Vec<(Vec<f64>, f64)> = match screening {
        Some(_) => pop.iter().map(|r| (r.chromosome.0.to_vec(), r.j)).collect(),
        None => Vec::new(),
    };
    let mut best = pop[ranked(&pop, |_| true)[0]];
    let mut history = vec![stats(0, &best, &pop, evals)];

    for generation in 1..=cfg.max_generations {
        let elites: Vec<FitnessRecord> = ranked(&pop, |r| r.evaluated_by == EvalSource::Simulation)
            .into_iter()
            .take(cfg.elite_count)
            .map(|i| pop[i])
            .collect();
        let n_off = cfg.pop_size - elites.len();
        let offspring: Vec<Chromosome> = (0..n_off)
            .map(|i| breed_one(&pop, cfg, generation, i))
            .collect();

        let mut scored: Vec<FitnessRecord> = match screening {
            Some((ratio, scfg)) if ratio < 1.0 => {
                let scfg = SurrogateConfig {
                    hidden: scfg.hidden.min(archive.len()),
                    ..*scfg
                };
                let (net, _) = surrogate_train(
                    &archive,
                    &scfg,
                    &mut stream_rng(cfg.seed, generation as u64, SURROGATE_STREAM),
                )?;
                let preds: Vec<f64> = offspring.iter().map(|c| sanitize(net.predict(&c.0))).collect();
                let mut order: Vec<usize> = (0..n_off).collect();
                order.sort_by(|&a, &b| preds[a].total_cmp(&preds[b]).then(a.cmp(&b)));
                let n_true = ((ratio * n_off as f64).ceil() as usize).clamp(1, n_off);
                let chosen: Vec<usize> = order[..n_true].to_vec();
                let chosen_chroms: Vec<Chromosome> = chosen.iter().map(|&i| offspring[i]).collect();
                let true_js = evaluate(&chosen_chroms, objective, cfg.parallel);
                evals += n_true;
                let mut recs: Vec<FitnessRecord> = offspring
                    .iter()
                    .zip(&preds)
                    .map(|(c, &p)| FitnessRecord {
                        chromosome: *c,
                        j: p.max(0.0),
                        evaluated_by: EvalSource::Surrogate,
                    })
                    .collect();
                for (&i, j) in chosen.iter().zip(true_js) {
                    recs[i].j = j;
                    recs[i].evaluated_by = EvalSource::Simulation;
                }
                recs
            }
            _ => {
                let js = evaluate(&offspring, objective, cfg.parallel);
                evals += n_off;
                offspring
                    .iter()
                    .zip(js)
                    .map(|(c, j)| FitnessRecord {
                        chromosome: *c,
                        j,
                        evaluated_by: EvalSource::Simulation,
                    })
                    .collect()
            }
        };

        for r in scored.iter().filter(|r| r.evaluated_by == EvalSource::Simulation) {
            if screening.is_some() {
                archive.push((r.chromosome.0.to_vec(), r.j));
            }
            if better(r, &best) {
                best = *r;
            }
        }
        let mut next = elites;
        next.append(&mut scored);
        pop = next;
        history.push(stats(generation, &best, &pop, evals));
    }

    Ok(GaOutcome {
        best,
        history,
        true_evals: evals,
    })
}
