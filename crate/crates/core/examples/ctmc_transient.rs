//! Builds the full state space of a watchdog timer and tracks the alarm
//! probability over time.
//!
//! Usage: `cargo run --release --example ctmc_transient -- [kd] [pl] [kt] [pt]`

use std::time::Instant;

use crnwd::csl::{Atom, Context, Named};
use crnwd::ctmc::{Ctmc, ExploreCaps};
use crnwd::designs::{build_mwt, MwtConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Vec<usize> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let get = |i: usize, d: usize| a.get(i).copied().unwrap_or(d);
    let cfg = MwtConfig::new(
        get(0, 4),
        get(1, 4) as i64,
        get(2, 4),
        get(3, 4) as i64,
        1,
        1,
    );
    let model = build_mwt(&cfg)?;
    let start = Instant::now();
    let ctmc = Ctmc::enumerate(&model.crn, &model.init, &ExploreCaps::default())?;
    println!(
        "{} states, {} transitions, built in {:.2?}",
        ctmc.num_states(),
        ctmc.num_transitions(),
        start.elapsed()
    );
    let ctx = Context::for_ctmc(&ctmc, cfg.predicates());
    let alarm = ctx.compile(&Atom::Named(Named::Alarm))?;
    let labels = ctmc.label(|x| alarm.eval(x));
    for t in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        let p = ctmc.transient(t)?;
        let mass: f64 = (0..ctmc.num_states())
            .filter(|&s| labels[s])
            .map(|s| p.at(s))
            .sum();
        println!("P(Alarm at t = {t:>4}) = {mass:.6}");
    }
    Ok(())
}
