//! Mean time for one molecule to climb a delay ladder: the exact value from
//! first-step analysis against a Gillespie estimate.
//!
//! Usage: `cargo run --release --example ladder_first_passage -- [k] [runs]`

use crnwd::designs::{ladder_first_passage, unary_ladder, LadderSpec};
use crnwd::rng::mix64;
use crnwd::ssa::{Gillespie, Step};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(Ok(2), |s| s.parse())?;
    let runs: u64 = args.next().map_or(Ok(50_000), |s| s.parse())?;
    let spec = LadderSpec::new(k, 1.0, 1.0, 1);
    let grid: Vec<f64> = (1..=5).map(|i| i as f64 * k as f64).collect();
    let exact = ladder_first_passage(&spec, &grid)?;
    let model = unary_ladder(&spec)?;
    let top = model.crn.require(spec.rung_names().last().unwrap())?;
    let mut total = 0.0;
    for i in 0..runs {
        let mut sim = Gillespie::new(&model.crn, &model.init, mix64(7, i))?;
        let hit = loop {
            match sim.step(f64::INFINITY)? {
                Step::Fired { time, .. } if sim.state[top] > 0 => break time,
                Step::Fired { .. } => {}
                _ => unreachable!("a ladder always has an enabled reaction"),
            }
        };
        total += hit;
    }
    println!(
        "k = {k}: exact mean {:.4}, simulated mean {:.4} over {runs} runs",
        exact.mean,
        total / runs as f64
    );
    for (t, p) in exact.cdf {
        println!("  P(reached by {t:>4}) = {p:.4}");
    }
    Ok(())
}
