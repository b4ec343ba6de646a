//! Instantiates the watchdog goal tree with synthesized parameters, checks
//! every goal on a small timer, and confirms that no refinement step has
//! satisfied subgoals under a failing parent.
//!
//! Usage: `cargo run --release --example goal_refinement`

use crnwd::csl::theorems::{check_refinement_theorem, Theorem};
use crnwd::csl::{evaluate_exact, goal_catalog, Context};
use crnwd::ctmc::{Ctmc, ExploreCaps};
use crnwd::designs::{build_mwt, MwtConfig};
use crnwd::params::{synthesize, ClientPolytope};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = MwtConfig::new(2, 3, 2, 3, 1, 1);
    let model = build_mwt(&cfg)?;
    let ctmc = Ctmc::enumerate(&model.crn, &model.init, &ExploreCaps::default())?;
    let ctx = Context::for_ctmc(&ctmc, cfg.predicates());
    let client = ClientPolytope::new(2.0, 6.0, 0.3, 0.3);
    let params = synthesize(&client)?;
    for g in goal_catalog(&params, &client)? {
        let r = evaluate_exact(&ctmc, &g.formula, &ctx)?;
        let owner = g.agent.map_or("-".to_string(), |a| a.to_string());
        println!("{:<9} {:<3} {}", r.verdict.to_string(), owner, g.title());
    }
    println!();
    for th in Theorem::ALL {
        let report = check_refinement_theorem(th, &ctmc, &ctx, &params, &client)?;
        println!(
            "{th}: {}",
            if report.consistent() {
                "consistent"
            } else {
                "VIOLATED"
            }
        );
        for c in &report.checks {
            let subs: Vec<String> = c.subgoals.iter().map(|(n, v)| format!("{n}={v}")).collect();
            println!(
                "  {} = {}  <=  {}",
                c.parent_name,
                c.parent,
                subs.join(", ")
            );
        }
    }
    Ok(())
}
