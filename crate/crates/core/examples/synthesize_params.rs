//! Derives internal timing and error parameters from a client requirement
//! and validates them against the eleven constraints.
//!
//! Usage: `cargo run --example synthesize_params -- [u] [v] [eps] [delta]`

use crnwd::params::{synthesize, validate_constraints, ClientPolytope, CONSTRAINT_TEXT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let get = |i: usize, d: f64| a.get(i).copied().unwrap_or(d);
    let client = ClientPolytope::new(get(0, 10.0), get(1, 20.0), get(2, 0.05), get(3, 0.05));
    let p = synthesize(&client)?;
    for (k, v) in p.to_kv() {
        println!("{k:>8} = {v}");
    }
    println!();
    for (i, text) in CONSTRAINT_TEXT.iter().enumerate() {
        println!("constr{:<2} {text}", i + 1);
    }
    let v = validate_constraints(&p, &client);
    println!("\n{} violation(s)", v.len());

    let mut broken = p.clone();
    broken.w_on = broken.g + 1.0;
    for x in validate_constraints(&broken, &client) {
        println!("after widening w_on: {x}");
    }
    Ok(())
}
