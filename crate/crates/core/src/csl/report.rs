//! Plain-text and CSV rendering of verification results.

use std::fmt::Write as _;

use super::VerificationResult;

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn text_report(items: &[(String, String, VerificationResult)]) -> String {
    let mut s = String::new();
    for (id, formula, r) in items {
        let _ = writeln!(s, "[{id}] {formula}");
        let mut flags = vec![r.mode.to_string()];
        if r.truncated {
            flags.push("truncated".into());
        }
        if r.approximate {
            flags.push("approximate".into());
        }
        let _ = writeln!(s, "  verdict: {} ({})", r.verdict, flags.join(", "));
        for sub in &r.probabilities {
            match sub.ci {
                Some((lo, hi)) => {
                    let _ = writeln!(
                        s,
                        "  P = {:.6} [{lo:.6}, {hi:.6}]  {}",
                        sub.probability, sub.formula
                    );
                }
                None => {
                    let _ = writeln!(s, "  P = {:.6}  {}", sub.probability, sub.formula);
                }
            }
        }
        for n in &r.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    s
}

/// One row per formula; the probability columns describe its outermost
/// probabilistic operator and are empty for purely propositional formulas.
pub fn csv_report(items: &[(String, String, VerificationResult)]) -> String {
    let mut s = String::from("id,verdict,mode,probability,ci_low,ci_high,truncated,approximate\n");
    for (id, _, r) in items {
        let top = r.probabilities.last();
        let _ = writeln!(
            s,
            "{id},{},{},{},{},{},{},{}",
            r.verdict,
            r.mode,
            fmt_opt(top.map(|t| t.probability)),
            fmt_opt(top.and_then(|t| t.ci.map(|c| c.0))),
            fmt_opt(top.and_then(|t| t.ci.map(|c| c.1))),
            r.truncated,
            r.approximate
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csl::{Mode, SubResult, Verdict};

    #[test]
    fn csv_columns() {
        let r = VerificationResult {
            verdict: Verdict::Holds,
            mode: Mode::Statistical,
            probabilities: vec![SubResult {
                formula: "P>=0.5 [ F<=1.0 Alarm ]".into(),
                probability: 0.75,
                ci: Some((0.7, 0.8)),
            }],
            truncated: false,
            approximate: false,
            notes: vec![],
        };
        let items = vec![("g1".to_string(), "P>=0.5 [ F<=1.0 Alarm ]".to_string(), r)];
        let csv = csv_report(&items);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "g1,holds,statistical,0.750000,0.700000,0.800000,false,false"
        );
        assert!(text_report(&items).contains("verdict: holds (statistical)"));
    }
}
