//! Forced oscillator failure, alarm, recovery and re-arming of the watchdog.
//!
//! Usage: `cargo run --release --example recovery_demo -- [runs] [total]`

use crnwd::demo::{run_demo, DemoConfig, Injection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let total: i64 = args.next().map_or(Ok(300), |s| s.parse())?;
    let mut cfg = DemoConfig::new(total)?;
    cfg.runs = runs;
    cfg.injection = Some(Injection {
        species: "B".into(),
        time: 20.0,
    });
    let s = run_demo(&cfg)?;
    let show = |x: Option<f64>| x.map_or("none".to_string(), |t| format!("{t:.2}"));
    println!("run  failure  alarm  healthy  reset  cleared");
    for r in &s.runs {
        println!(
            "{:>3}  {:>7}  {:>5}  {:>7}  {:>5}  {:>7}",
            r.index,
            show(r.failure_time),
            show(r.alarm_time),
            show(r.recovery_time),
            show(r.reset_time),
            show(r.clear_time)
        );
    }
    println!("recovery fraction {:.3}", s.recovery_fraction());
    println!("re-arm fraction   {:.3}", s.rearm_fraction());
    Ok(())
}
