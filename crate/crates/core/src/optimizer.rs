//! Elitist genetic algorithm over binary-encoded section indices: fixed-length
//! chromosomes, uniform random parent pairs, one-point crossover, per-bit
//! mutation, and modulo repair at decode time.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{FitnessMode, MembershipShape};
use crate::model::{Frame, SizedFrame};
use crate::problem::{DesignOutcome, MembershipSet, Problem};

/// Force of one metric tonne under standard gravity.
pub const NEWTONS_PER_TONNE: f64 = 9806.65;

/// Generations used by the pilot run that calibrates objective bounds.
pub const PILOT_GENERATIONS: usize = 20;

/// Decorrelates the pilot RNG stream from the main run's seed sequence.
const PILOT_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Parent selection scheme. Uniform keeps selection pressure in elitism
/// alone; tournament adds pressure at the parent draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Uniform,
    Tournament2,
}

fn default_population() -> usize {
    30
}
fn default_elitism() -> f64 {
    0.1
}
fn default_mutation() -> f64 {
    0.005
}
fn default_generations() -> usize {
    75
}
fn default_seed() -> u64 {
    42
}
fn default_restarts() -> usize {
    1
}
fn default_selection() -> Selection {
    Selection::Uniform
}
fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_elitism")]
    pub elitism_rate: f64,
    #[serde(default = "default_mutation")]
    pub mutation_rate: f64,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_selection")]
    pub selection: Selection,
    /// Fitness-evaluation threads; 1 keeps everything on the calling thread.
    /// Results are identical either way, evaluation being pure.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: default_population(),
            elitism_rate: default_elitism(),
            mutation_rate: default_mutation(),
            generations: default_generations(),
            seed: default_seed(),
            restarts: default_restarts(),
            selection: default_selection(),
            jobs: default_jobs(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("ga.population must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.elitism_rate) {
            return Err(Error::config("ga.elitism_rate must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::config("ga.mutation_rate must lie in [0, 1]"));
        }
        if self.restarts == 0 {
            return Err(Error::config("ga.restarts must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("ga.jobs must be at least 1"));
        }
        Ok(())
    }
}

/// Elite count: round(population·rate), at least 1, nudged so the remaining
/// slots split into whole crossover pairs (down by one, up only from 1).
pub fn elite_count(population: usize, elitism_rate: f64) -> usize {
    let raw = (population as f64 * elitism_rate).round() as usize;
    let mut ne = raw.clamp(1, population);
    if (population - ne) % 2 != 0 {
        ne = if ne > 1 { ne - 1 } else { ne + 1 };
    }
    ne.min(population)
}

/// Maps group pool indices to and from a fixed-length bit string,
/// ceil(log2(pool size)) bits per group, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pool_sizes: Vec<usize>,
    bits_per_group: Vec<usize>,
    total_bits: usize,
}

fn bits_for(pool_size: usize) -> usize {
    if pool_size <= 1 {
        0
    } else {
        (usize::BITS - (pool_size - 1).leading_zeros()) as usize
    }
}

impl Encoding {
    pub fn new(frame: &Frame) -> Self {
        let pool_sizes: Vec<usize> = frame.groups.iter().map(|g| g.pool.len()).collect();
        let bits_per_group: Vec<usize> = pool_sizes.iter().map(|&n| bits_for(n)).collect();
        let total_bits = bits_per_group.iter().sum();
        Encoding { pool_sizes, bits_per_group, total_bits }
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    /// Bit patterns beyond the pool size are repaired by modulo, so every
    /// chromosome decodes to a valid design.
    pub fn decode(&self, bits: &[bool]) -> Vec<usize> {
        assert_eq!(bits.len(), self.total_bits, "chromosome length mismatch");
        let mut indices = Vec::with_capacity(self.pool_sizes.len());
        let mut offset = 0;
        for (&width, &pool) in self.bits_per_group.iter().zip(&self.pool_sizes) {
            let value = bits[offset..offset + width]
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
            indices.push(if pool <= 1 { 0 } else { value % pool });
            offset += width;
        }
        indices
    }

    pub fn encode(&self, indices: &[usize]) -> Result<Vec<bool>> {
        if indices.len() != self.pool_sizes.len() {
            return Err(Error::config("index count does not match group count"));
        }
        let mut bits = Vec::with_capacity(self.total_bits);
        for ((&idx, &width), &pool) in
            indices.iter().zip(&self.bits_per_group).zip(&self.pool_sizes)
        {
            if idx >= pool {
                return Err(Error::config(format!(
                    "pool index {idx} out of range for pool of {pool}"
                )));
            }
            for shift in (0..width).rev() {
                bits.push((idx >> shift) & 1 == 1);
            }
        }
        Ok(bits)
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub population: usize,
    /// Weight of the generation's best-fitness individual.
    pub best_weight_n: f64,
    /// Its satisfaction level.
    pub best_lambda: f64,
    pub mean_fitness: f64,
    /// Lightest feasible design seen so far in this restart (∞ before the
    /// first feasible one, written as "inf").
    pub best_so_far_weight_n: f64,
}

pub const HISTORY_HEADER: &str = "generation,best_weight_n,best_lambda,mean_fitness,best_so_far_weight_n";

/// Renders history rows to CSV. Floats use the shortest round-trip decimal
/// form, so equal runs produce byte-identical files.
pub fn history_csv(records: &[GenerationRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.generation, r.best_weight_n, r.best_lambda, r.mean_fitness, r.best_so_far_weight_n
        )
        .expect("string formatting is infallible");
    }
    out
}

/// Winning design of one restart (or the whole run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestDesign {
    pub restart: usize,
    pub seed: u64,
    /// Generation at which this design was first seen.
    pub generation: usize,
    /// Group label → section name, in group order.
    pub assignment: Vec<(String, String)>,
    pub pool_indices: Vec<usize>,
    pub weight_n: f64,
    pub weight_tonnes: f64,
    pub satisfaction: f64,
    pub fitness: f64,
    pub worst_ratio: f64,
    pub roof_displacement_m: f64,
    pub feasible: bool,
}

/// Objective bounds actually used, after defaulting and the optional pilot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedBounds {
    pub f_lower: f64,
    pub f_upper: f64,
    pub f_max: f64,
    /// Best feasible weight found by the pilot run, when one was needed.
    pub pilot_weight_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationRun {
    pub best: BestDesign,
    pub restart_bests: Vec<BestDesign>,
    pub histories: Vec<Vec<GenerationRecord>>,
    pub bounds: ResolvedBounds,
    pub membership: MembershipSet,
    pub config: GaConfig,
}

#[derive(Debug, Clone)]
struct Individual {
    bits: Vec<bool>,
    outcome: DesignOutcome,
}

#[derive(Debug, Clone)]
struct TrackedDesign {
    generation: usize,
    indices: Vec<usize>,
    outcome: DesignOutcome,
}

/// Running bests within one restart: lightest feasible design, plus the
/// highest-fitness design as a fallback when nothing feasible ever appears.
#[derive(Debug, Default)]
struct Tracker {
    best_feasible: Option<TrackedDesign>,
    best_any: Option<TrackedDesign>,
}

impl Tracker {
    fn observe(&mut self, generation: usize, indices: &[usize], outcome: DesignOutcome) {
        let better_any =
            self.best_any.as_ref().is_none_or(|b| outcome.fitness > b.outcome.fitness);
        if better_any {
            self.best_any =
                Some(TrackedDesign { generation, indices: indices.to_vec(), outcome });
        }
        if outcome.feasible {
            let better = self
                .best_feasible
                .as_ref()
                .is_none_or(|b| outcome.weight_n < b.outcome.weight_n);
            if better {
                self.best_feasible =
                    Some(TrackedDesign { generation, indices: indices.to_vec(), outcome });
            }
        }
    }

    fn best_feasible_weight(&self) -> f64 {
        self.best_feasible.as_ref().map_or(f64::INFINITY, |b| b.outcome.weight_n)
    }

    fn into_best(self) -> TrackedDesign {
        self.best_feasible
            .or(self.best_any)
            .expect("tracker observed at least one individual")
    }
}

fn evaluate_all(
    problem: &Problem,
    ms: &MembershipSet,
    encoding: &Encoding,
    bits: &[Vec<bool>],
    pool: Option<&rayon::ThreadPool>,
) -> Vec<DesignOutcome> {
    let eval = |b: &Vec<bool>| problem.evaluate_indices(&encoding.decode(b), ms);
    match pool {
        Some(p) => p.install(|| bits.par_iter().map(eval).collect()),
        None => bits.iter().map(eval).collect(),
    }
}

fn pick_one(rng: &mut ChaCha8Rng, population: &[Individual], selection: Selection) -> usize {
    let n = population.len();
    match selection {
        Selection::Uniform => rng.gen_range(0..n),
        Selection::Tournament2 => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if population[a].outcome.fitness >= population[b].outcome.fitness {
                a
            } else {
                b
            }
        }
    }
}

fn pick_pair(
    rng: &mut ChaCha8Rng,
    population: &[Individual],
    selection: Selection,
) -> (usize, usize) {
    let first = pick_one(rng, population, selection);
    if population.len() < 2 {
        return (first, first);
    }
    loop {
        let second = pick_one(rng, population, selection);
        if second != first {
            return (first, second);
        }
    }
}

/// Produces the next population's raw material: the elite individuals carried
/// over unchanged (with their evaluations) and the child bit strings, which
/// still need evaluating. All crossover randomness is drawn before any
/// mutation randomness; mutation draws once per child bit regardless of rate.
fn step_generation(
    population: &[Individual],
    config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<Individual>, Vec<Vec<bool>>) {
    let n = population.len();
    let ne = elite_count(n, config.elitism_rate);
    let pairs = (n - ne) / 2;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        population[b].outcome.fitness.total_cmp(&population[a].outcome.fitness)
    });
    let elites: Vec<Individual> = order[..ne].iter().map(|&i| population[i].clone()).collect();

    let total_bits = population.first().map_or(0, |ind| ind.bits.len());
    let mut children: Vec<Vec<bool>> = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let (pa, pb) = pick_pair(rng, population, config.selection);
        let (a, b) = (&population[pa].bits, &population[pb].bits);
        if total_bits >= 2 {
            let cut = rng.gen_range(1..total_bits);
            let mut c1 = a[..cut].to_vec();
            c1.extend_from_slice(&b[cut..]);
            let mut c2 = b[..cut].to_vec();
            c2.extend_from_slice(&a[cut..]);
            children.push(c1);
            children.push(c2);
        } else {
            children.push(a.clone());
            children.push(b.clone());
        }
    }
    for child in &mut children {
        for bit in child.iter_mut() {
            if rng.gen::<f64>() < config.mutation_rate {
                *bit = !*bit;
            }
        }
    }
    (elites, children)
}

fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..population.len() {
        if population[i].outcome.fitness > population[best].outcome.fitness {
            best = i;
        }
    }
    best
}

fn record(generation: usize, population: &[Individual], tracker: &Tracker) -> GenerationRecord {
    let bi = best_index(population);
    let mean =
        population.iter().map(|ind| ind.outcome.fitness).sum::<f64>() / population.len() as f64;
    GenerationRecord {
        generation,
        population: population.len(),
        best_weight_n: population[bi].outcome.weight_n,
        best_lambda: population[bi].outcome.satisfaction,
        mean_fitness: mean,
        best_so_far_weight_n: tracker.best_feasible_weight(),
    }
}

fn run_restart(
    problem: &Problem,
    ms: &MembershipSet,
    encoding: &Encoding,
    config: &GaConfig,
    seed: u64,
    pool: Option<&rayon::ThreadPool>,
) -> (Vec<GenerationRecord>, TrackedDesign) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_bits = encoding.total_bits();
    let initial_bits: Vec<Vec<bool>> = (0..config.population)
        .map(|_| (0..total_bits).map(|_| rng.gen::<bool>()).collect())
        .collect();
    let outcomes = evaluate_all(problem, ms, encoding, &initial_bits, pool);

    let mut tracker = Tracker::default();
    let mut population: Vec<Individual> = initial_bits
        .into_iter()
        .zip(outcomes)
        .map(|(bits, outcome)| {
            tracker.observe(0, &encoding.decode(&bits), outcome);
            Individual { bits, outcome }
        })
        .collect();

    let mut records = Vec::with_capacity(config.generations + 1);
    records.push(record(0, &population, &tracker));

    for generation in 1..=config.generations {
        let (elites, child_bits) = step_generation(&population, config, &mut rng);
        let child_outcomes = evaluate_all(problem, ms, encoding, &child_bits, pool);
        let mut next = elites;
        next.extend(child_bits.into_iter().zip(child_outcomes).map(|(bits, outcome)| {
            tracker.observe(generation, &encoding.decode(&bits), outcome);
            Individual { bits, outcome }
        }));
        population = next;
        records.push(record(generation, &population, &tracker));
    }

    (records, tracker.into_best())
}

fn to_best_design(
    problem: &Problem,
    restart: usize,
    seed: u64,
    tracked: TrackedDesign,
) -> BestDesign {
    let sized = SizedFrame::from_pool_indices(&problem.frame, &tracked.indices)
        .expect("tracked design indices are always in range");
    BestDesign {
        restart,
        seed,
        generation: tracked.generation,
        assignment: sized.assignment_by_label(),
        pool_indices: tracked.indices,
        weight_n: tracked.outcome.weight_n,
        weight_tonnes: tracked.outcome.weight_n / NEWTONS_PER_TONNE,
        satisfaction: tracked.outcome.satisfaction,
        fitness: tracked.outcome.fitness,
        worst_ratio: tracked.outcome.worst_ratio,
        roof_displacement_m: tracked.outcome.roof_displacement_m,
        feasible: tracked.outcome.feasible,
    }
}

/// Overall winner: lightest feasible restart best, or the highest-fitness one
/// when no restart found anything feasible. Ties keep the earliest restart.
fn overall_best(bests: &[BestDesign]) -> BestDesign {
    let mut feasible: Option<&BestDesign> = None;
    let mut fallback: &BestDesign = &bests[0];
    for b in bests {
        if b.feasible && feasible.is_none_or(|f| b.weight_n < f.weight_n) {
            feasible = Some(b);
        }
        if b.fitness > fallback.fitness {
            fallback = b;
        }
    }
    feasible.unwrap_or(fallback).clone()
}

fn build_pool(jobs: usize) -> Result<Option<rayon::ThreadPool>> {
    if jobs <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map(Some)
        .map_err(|e| Error::config(format!("cannot start {jobs} evaluation threads: {e}")))
}

/// Full optimization: resolves objective bounds (running a short crisp pilot
/// when no explicit upper bound is configured), then executes `restarts`
/// independent GA runs seeded `seed`, `seed+1`, ….
pub fn run(problem: &Problem, config: &GaConfig) -> Result<OptimizationRun> {
    config.validate()?;
    let encoding = Encoding::new(&problem.frame);
    let pool = build_pool(config.jobs)?;
    let upper_hint = problem.max_pool_weight();

    let mut pilot_weight = None;
    let needs_pilot =
        problem.fuzzy.f_upper.is_none() && problem.fuzzy.shape != MembershipShape::Crisp;
    let hint = if needs_pilot {
        let mut pilot_problem = problem.clone();
        pilot_problem.fuzzy.shape = MembershipShape::Crisp;
        pilot_problem.fuzzy.mode = FitnessMode::Lambda;
        pilot_problem.fuzzy.f_lower = None;
        pilot_problem.fuzzy.f_upper = None;
        pilot_problem.fuzzy.f_max = None;
        let pilot_ms = pilot_problem.resolve_memberships(upper_hint)?;
        let pilot_config = GaConfig {
            generations: PILOT_GENERATIONS,
            restarts: 1,
            seed: config.seed ^ PILOT_SEED_SALT,
            ..*config
        };
        let (_, tracked) = run_restart(
            &pilot_problem,
            &pilot_ms,
            &encoding,
            &pilot_config,
            pilot_config.seed,
            pool.as_ref(),
        );
        if tracked.outcome.feasible {
            pilot_weight = Some(tracked.outcome.weight_n);
            tracked.outcome.weight_n
        } else {
            upper_hint
        }
    } else {
        upper_hint
    };

    let ms = problem.resolve_memberships(hint)?;
    let mut histories = Vec::with_capacity(config.restarts);
    let mut restart_bests = Vec::with_capacity(config.restarts);
    for i in 0..config.restarts {
        let seed = config.seed.wrapping_add(i as u64);
        let (records, tracked) =
            run_restart(problem, &ms, &encoding, config, seed, pool.as_ref());
        restart_bests.push(to_best_design(problem, i, seed, tracked));
        histories.push(records);
    }

    let best = overall_best(&restart_bests);
    Ok(OptimizationRun {
        best,
        restart_bests,
        histories,
        bounds: ResolvedBounds {
            f_lower: ms.objective.f_lower,
            f_upper: ms.objective.f_upper,
            f_max: ms.objective.f_max,
            pilot_weight_n: pilot_weight,
        },
        membership: ms,
        config: *config,
    })
}
