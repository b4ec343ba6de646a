//! Checks the same CSL formulas exactly on the state space and statistically
//! by simulation.
//!
//! Usage: `cargo run --release --example check_formulas -- [runs]`

use crnwd::csl::{evaluate_exact, evaluate_statistical, parse_formula, Context, StatConfig};
use crnwd::ctmc::{Ctmc, ExploreCaps};
use crnwd::designs::{build_mwt, MwtConfig};

const FORMULAS: [&str; 4] = [
    "P>=0.9 [ F<=10 Alarm ]",
    "P>=0.5 [ G<=2 !ThH ]",
    "P>=0.8 [ (!Alarm) W (ThH) ]",
    "P>=0.2 [ F<=5 (Y + D >= 4) ]",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: usize = std::env::args().nth(1).map_or(Ok(5000), |s| s.parse())?;
    let cfg = MwtConfig::new(3, 5, 3, 5, 1, 1);
    let model = build_mwt(&cfg)?;
    let ctmc = Ctmc::enumerate(&model.crn, &model.init, &ExploreCaps::default())?;
    let exact_ctx = Context::for_ctmc(&ctmc, cfg.predicates());
    let sim_ctx = Context::for_crn(&model.crn, cfg.predicates());
    let stat = StatConfig::new(runs, 10.0, 11);
    for src in FORMULAS {
        let f = parse_formula(src)?;
        let e = evaluate_exact(&ctmc, &f, &exact_ctx)?;
        let s = evaluate_statistical(&model.crn, &model.init, &f, &sim_ctx, &stat)?;
        let pe = e.probabilities.last().map_or(f64::NAN, |r| r.probability);
        let ps = s.probabilities.last().expect("probabilistic formula");
        let (lo, hi) = ps.ci.unwrap_or((f64::NAN, f64::NAN));
        println!("{f}");
        println!("  exact       {pe:.5}  {}", e.verdict);
        println!(
            "  statistical {:.5}  [{lo:.5}, {hi:.5}]  {}",
            ps.probability, s.verdict
        );
    }
    Ok(())
}
