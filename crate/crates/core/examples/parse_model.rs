//! Parses a hand-written network, reports its structure and prints the
//! canonical serialization.
//!
//! Usage: `cargo run --example parse_model -- [file.crn]`

use crnwd::parser::{parse_crn, serialize_crn};

const SAMPLE: &str = "\
# three-species cycle with a heartbeat
A + B ->{1.0} 2 B + H
B + C ->{1.0} 2 C
C + A ->{1.0} 2 A
H ->{0.5} 0
init A = 40
init B = 30
init C = 30
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let doc = parse_crn(&text)?;
    let crn = doc.to_crn()?;
    let init = doc.initial_state(&crn)?;
    println!(
        "species: {}",
        crn.species_names().collect::<Vec<_>>().join(", ")
    );
    println!("initial: {:?}", init.0);
    for (i, r) in crn.reactions().iter().enumerate() {
        println!("R{i}: order {}, rate {}", r.order(), r.rate);
    }
    println!("\n{}", serialize_crn(&doc));
    Ok(())
}
