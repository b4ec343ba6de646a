//! Runs every proof rule and its mutants on random CTMCs.
//!
//! Usage: `cargo run --example lemma_suite -- [instances] [seed]`

use crnwd::csl::lemmas::{random_suite, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let instances: usize = args.next().map_or(Ok(1000), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    for rule in Rule::SOUND.into_iter().chain(Rule::MUTANTS) {
        let r = random_suite(rule, instances, seed)?;
        let status = if r.holds() {
            "no counterexample"
        } else {
            "COUNTEREXAMPLE"
        };
        println!(
            "{:<28} {status:<17} non-vacuous {}/{} counterexamples {}",
            rule.name(),
            r.non_vacuous,
            r.instances,
            r.counterexamples.len()
        );
        if let Some((k, cx)) = r.counterexamples.first() {
            println!("    first at instance {k}: {cx:?}");
        }
    }
    Ok(())
}
