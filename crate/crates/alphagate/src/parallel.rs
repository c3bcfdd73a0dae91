//! Multi-threaded simulation with worker-count-independent output.

use alphagate_core::simulation::{build_report, tally_range, Tally};
use alphagate_core::{Result, SimulationConfig, SimulationReport};
use rayon::prelude::*;

/// Replications per work item. Fixed so that the split never depends on the
/// number of threads.
pub const CHUNK: u64 = 16_384;

fn run(config: &SimulationConfig) -> Result<Tally> {
    let n = config.replications;
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| tally_range(config, c * CHUNK..((c + 1) * CHUNK).min(n)))
        .try_reduce(|| Tally::empty(config.k), |a, b| Ok(a.merge(&b)))
}

/// Runs the simulation on `workers` threads, or on rayon's global pool when
/// `None`. The report is identical for every choice.
pub fn simulate(config: &SimulationConfig, workers: Option<usize>) -> Result<SimulationReport> {
    config.validate()?;
    let tally = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(|| run(config))?,
        None => run(config)?,
    };
    build_report(config, &tally)
}
