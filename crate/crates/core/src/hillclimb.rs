//! Noisy hill climbing over single add/remove toggles, with restarts.
//!
//! Each restart draws its own ChaCha stream `(seed, restart)`, so results do
//! not depend on whether restarts run serially or on a thread pool.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::groupmodel::{
    resolve_chart, Chart, ClusteringResult, Explanation, LinkModelParams, ModelError, ModelState,
    Move, ScoredAssignment,
};
use crate::transform::{to_link_dataset, LinkDataset, TransformError};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("bad optimizer configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub noise_prob: f64,
    pub stale_sweeps_to_stop: usize,
    pub improvement_tolerance: f64,
    pub seed: u64,
    /// Run restarts on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            k: 2,
            restarts: 30,
            max_sweeps: 200,
            noise_prob: 0.05,
            stale_sweeps_to_stop: 3,
            improvement_tolerance: 1e-12,
            seed: 0,
            parallel: true,
        }
    }
}

impl OptimizerConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let counts = [
            ("k", self.k),
            ("restarts", self.restarts),
            ("max_sweeps", self.max_sweeps),
            ("stale_sweeps_to_stop", self.stale_sweeps_to_stop),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(FitError::BadConfig(format!("{name} must be at least 1")));
        }
        if !(0.0..1.0).contains(&self.noise_prob) {
            return Err(FitError::BadConfig(format!(
                "noise_prob {} outside [0, 1)",
                self.noise_prob
            )));
        }
        if self.improvement_tolerance.is_nan() || self.improvement_tolerance < 0.0 {
            return Err(FitError::BadConfig(
                "improvement_tolerance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// The RNG stream for one restart.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Places every entity in exactly one group.
///
/// `k` seed entities are drawn k-means++ style: the first uniformly, each
/// further one with probability proportional to the number of its links not
/// shared with the closest seed so far. Every entity then joins the seed it
/// shares the most links with, ties broken uniformly.
pub fn init_chart<R: Rng + ?Sized>(links: &LinkDataset, k: usize, rng: &mut R) -> Chart {
    let n = links.n_entities();
    let mut chart = Chart::empty(n, k);
    if n == 0 {
        return chart;
    }
    let entity_links = links.entity_links();
    let shared = |a: usize, b: usize| sorted_intersection(&entity_links[a], &entity_links[b]);

    let mut seeds = vec![rng.random_range(0..n)];
    let mut distance: Vec<usize> = (0..n)
        .map(|e| entity_links[e].len() - shared(e, seeds[0]))
        .collect();
    while seeds.len() < k {
        let total: usize = distance.iter().sum();
        let seed = if total == 0 {
            rng.random_range(0..n)
        } else {
            let mut ticket = rng.random_range(0..total);
            distance
                .iter()
                .position(|&d| {
                    if ticket < d {
                        true
                    } else {
                        ticket -= d;
                        false
                    }
                })
                .expect("ticket below total weight")
        };
        seeds.push(seed);
        for (e, d) in distance.iter_mut().enumerate() {
            *d = (*d).min(entity_links[e].len() - shared(e, seed));
        }
    }

    let mut tied = Vec::with_capacity(k);
    for e in 0..n {
        tied.clear();
        let mut best = 0;
        for (g, &s) in seeds.iter().enumerate() {
            let overlap = shared(e, s);
            if tied.is_empty() || overlap > best {
                tied.clear();
                best = overlap;
                tied.push(g);
            } else if overlap == best {
                tied.push(g);
            }
        }
        let g = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.random_range(0..tied.len())]
        };
        chart.add(e, g);
    }
    chart
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// What one sweep did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub improving: usize,
    pub noisy: usize,
}

/// One pass over all `N_p * K` toggles in random order. Improving toggles
/// (gain above `tolerance`) are always taken; any other toggle is taken with
/// probability `noise_prob`. Returns whether an improving toggle was taken.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ModelState<'_>,
    rng: &mut R,
    noise_prob: f64,
    tolerance: f64,
) -> bool {
    sweep_with_stats(state, rng, noise_prob, tolerance).improving > 0
}

pub fn sweep_with_stats<R: Rng + ?Sized>(
    state: &mut ModelState<'_>,
    rng: &mut R,
    noise_prob: f64,
    tolerance: f64,
) -> SweepStats {
    sweep_observed(state, rng, noise_prob, tolerance, |_, _, _| {})
}

/// [`sweep_with_stats`] calling `on_commit(state, move, improving)` right
/// after every committed toggle.
pub fn sweep_observed<R, F>(
    state: &mut ModelState<'_>,
    rng: &mut R,
    noise_prob: f64,
    tolerance: f64,
    mut on_commit: F,
) -> SweepStats
where
    R: Rng + ?Sized,
    F: FnMut(&ModelState<'_>, Move, bool),
{
    let n = state.chart().n_entities();
    let k = state.chart().k();
    let mut order: Vec<usize> = (0..n * k).collect();
    order.shuffle(rng);
    let mut stats = SweepStats::default();
    for idx in order {
        let mv = Move::toggle(state.chart(), idx / k, idx % k);
        let (impossible, finite) = state.delta_lexicographic(mv);
        let improving = impossible < 0 || (impossible == 0 && finite > tolerance);
        if improving {
            stats.improving += 1;
        } else if noise_prob > 0.0 && rng.random_bool(noise_prob) {
            stats.noisy += 1;
        } else {
            continue;
        }
        state
            .commit(mv)
            .expect("toggle derived from the current chart is always legal");
        on_commit(state, mv, improving);
    }
    state.resync();
    stats
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartReport {
    pub restart: usize,
    pub final_ll: f64,
    pub noisy_sweeps: usize,
    pub greedy_sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub chart: Chart,
    pub scored: ScoredAssignment,
    pub log_likelihood: f64,
    pub chosen_restart: usize,
    pub restarts: Vec<RestartReport>,
}

fn run_restart(
    links: &LinkDataset,
    params: LinkModelParams,
    config: &OptimizerConfig,
    restart: usize,
) -> Result<(Chart, ScoredAssignment, RestartReport), ModelError> {
    let mut rng = restart_rng(config.seed, restart);
    let chart = init_chart(links, config.k, &mut rng);
    let mut state = ModelState::new(links, chart, params)?;

    // The noisy phase ends once the best total seen stops rising; noise
    // always leaves repairable toggles behind, so per-sweep improvement
    // alone would never go stale.
    let mut noisy_sweeps = 0;
    if config.noise_prob > 0.0 {
        let mut best = state.total();
        let mut stale = 0;
        while noisy_sweeps < config.max_sweeps && stale < config.stale_sweeps_to_stop {
            sweep(
                &mut state,
                &mut rng,
                config.noise_prob,
                config.improvement_tolerance,
            );
            noisy_sweeps += 1;
            let ll = state.total();
            if ll > best + config.improvement_tolerance {
                best = ll;
                stale = 0;
            } else {
                stale += 1;
            }
        }
    }
    let mut greedy_sweeps = 0;
    loop {
        greedy_sweeps += 1;
        if !sweep(&mut state, &mut rng, 0.0, config.improvement_tolerance) {
            break;
        }
    }
    let final_ll = state.total();
    let (chart, scored) = state.into_parts();
    Ok((
        chart,
        scored,
        RestartReport {
            restart,
            final_ll,
            noisy_sweeps,
            greedy_sweeps,
        },
    ))
}

/// Best chart over all restarts; ties go to the lowest restart index.
pub fn optimize(
    links: &LinkDataset,
    params: LinkModelParams,
    config: &OptimizerConfig,
) -> Result<Optimized, FitError> {
    config.validate()?;
    if links.n_entities() == 0 {
        return Err(FitError::Transform(TransformError::EmptyTable));
    }
    let runs: Vec<_> = if config.parallel {
        (0..config.restarts)
            .into_par_iter()
            .map(|i| run_restart(links, params, config, i))
            .collect::<Result<_, _>>()?
    } else {
        (0..config.restarts)
            .map(|i| run_restart(links, params, config, i))
            .collect::<Result<_, _>>()?
    };

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.2.final_ll > runs[best].2.final_ll {
            best = i;
        }
    }
    let reports = runs.iter().map(|r| r.2.clone()).collect();
    let (chart, scored, report) = runs.into_iter().nth(best).expect("restarts >= 1");
    Ok(Optimized {
        chart,
        scored,
        log_likelihood: report.final_ll,
        chosen_restart: best,
        restarts: reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitDiagnostics {
    pub log_likelihood: f64,
    pub coverage: usize,
    pub n_entities: usize,
    pub chosen_restart: usize,
    pub restarts: Vec<RestartReport>,
    pub group_sizes: Vec<usize>,
    pub explanations: Vec<Explanation>,
}

#[derive(Debug, Clone)]
pub struct LcbcdcFit {
    pub result: ClusteringResult,
    pub chart: Chart,
    pub diagnostics: FitDiagnostics,
}

/// Transform, optimize, resolve.
pub fn fit_lcbcdc(
    data: &LabeledDataset,
    params: LinkModelParams,
    config: &OptimizerConfig,
) -> Result<LcbcdcFit, FitError> {
    let links = to_link_dataset(&data.table)?;
    let opt = optimize(&links, params, config)?;
    let result = resolve_chart(&opt.chart, &links, &opt.scored);
    let diagnostics = FitDiagnostics {
        log_likelihood: opt.log_likelihood,
        coverage: result.coverage,
        n_entities: links.n_entities(),
        chosen_restart: opt.chosen_restart,
        restarts: opt.restarts,
        group_sizes: opt.chart.group_sizes(),
        explanations: opt.scored.explanations.clone(),
    };
    Ok(LcbcdcFit {
        result,
        chart: opt.chart,
        diagnostics,
    })
}
