//! Simulates the three-species oscillator with its heartbeat output and
//! prints a coarse trace. Once one species dies out the heartbeat decays.
//!
//! Usage: `cargo run --release --example oscillator_heartbeat -- [total] [seed]`

use crnwd::designs::{build_oscillator, healthy, OscillatorConfig};
use crnwd::ssa::{sample_on_grid, simulate, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let total: i64 = args.next().map_or(Ok(300), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(3), |s| s.parse())?;
    let mut osc = OscillatorConfig::split(total, [80, 10, 10])?;
    osc.k = 1.0 / total as f64;
    let model = build_oscillator(&osc, true)?;
    let traj = simulate(&model.crn, &model.init, &SimConfig::new(100.0, seed))?;
    let idx = |n: &str| model.crn.require(n);
    let (a, b, c, h) = (idx("A")?, idx("B")?, idx("C")?, idx("H")?);
    println!("    t     A     B     C     H  healthy");
    for (t, s) in sample_on_grid(&traj, &model.crn, 5.0) {
        let ok = healthy(&model.crn, &s, osc.tau())?;
        println!(
            "{t:>5} {:>5} {:>5} {:>5} {:>5}  {ok}",
            s.0[a], s.0[b], s.0[c], s.0[h]
        );
    }
    println!(
        "{} events, stopped by {:?}",
        traj.events.len(),
        traj.terminated_by
    );
    Ok(())
}
