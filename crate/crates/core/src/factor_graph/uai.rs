//! Plain-text model format.
//!
//! ```text
//! MARKOV
//! <num vars>
//! <card_0> <card_1> ...
//! <num factors>
//! <k> <v_1> ... <v_k>        (one scope line per factor)
//! <entries>                  (one table block per factor)
//! <e_1> <e_2> ...
//! ```
//!
//! Whitespace is not significant. Tables are linear-domain, row-major over the
//! scope as written (last variable fastest). Entries are written with 17
//! significant digits.

use std::fmt::Write as _;

use super::FactorGraph;
use crate::error::{Error, Result};

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .flat_map(|(no, line)| line.split_whitespace().map(move |t| (no + 1, t)));
        Tokens {
            inner: Box::new(inner),
            line: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((line, tok)) => {
                self.line = line;
                Ok(tok)
            }
            None => Err(Error::Parse {
                line: self.line,
                message: format!("unexpected end of input, expected {what}"),
            }),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse {
            line: self.line,
            message: format!("expected {what}, found {tok:?}"),
        })
    }
}

pub fn read_uai(text: &str) -> Result<FactorGraph> {
    let mut tokens = Tokens::new(text);
    let header = tokens.next("header")?;
    if header != "MARKOV" {
        return Err(Error::Parse {
            line: tokens.line,
            message: format!("expected MARKOV header, found {header:?}"),
        });
    }
    let num_vars: usize = tokens.parse("variable count")?;
    let cards = (0..num_vars)
        .map(|_| tokens.parse("cardinality"))
        .collect::<Result<Vec<usize>>>()?;
    let num_factors: usize = tokens.parse("factor count")?;
    let mut scopes = Vec::with_capacity(num_factors);
    for _ in 0..num_factors {
        let k: usize = tokens.parse("scope size")?;
        let scope = (0..k)
            .map(|_| tokens.parse("variable id"))
            .collect::<Result<Vec<usize>>>()?;
        scopes.push(scope);
    }
    let mut factors = Vec::with_capacity(num_factors);
    for scope in scopes {
        let entries: usize = tokens.parse("entry count")?;
        let table = (0..entries)
            .map(|_| tokens.parse("table entry"))
            .collect::<Result<Vec<f64>>>()?;
        factors.push((scope, table));
    }
    if let Ok(tok) = tokens.next("end of input") {
        return Err(Error::Parse {
            line: tokens.line,
            message: format!("trailing token {tok:?}"),
        });
    }
    FactorGraph::new(cards, factors)
}

pub fn write_uai(fg: &FactorGraph) -> String {
    let mut out = String::from("MARKOV\n");
    let _ = writeln!(out, "{}", fg.num_vars());
    let cards: Vec<String> = fg.cardinalities().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "{}", cards.join(" "));
    let _ = writeln!(out, "{}", fg.num_factors());
    for f in fg.factors() {
        let vars: Vec<String> = f.scope.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{} {}", f.scope.len(), vars.join(" "));
    }
    for f in fg.factors() {
        let _ = writeln!(out, "\n{}", f.log_table.len());
        let entries: Vec<String> = f.log_table.iter().map(|v| format!("{:.16e}", v.exp())).collect();
        let _ = writeln!(out, "{}", entries.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::gen_grid;

    #[test]
    fn reads_minimal_model() {
        let text = "MARKOV\n2\n2 3\n2\n1 0\n2 1 0\n\n2\n0.5 1.5\n6\n1 2 3 4 5 6\n";
        let fg = read_uai(text).unwrap();
        assert_eq!(fg.cardinalities(), &[2, 3]);
        // (1, 0) scope reordered to (0, 1)
        assert_eq!(fg.factor(1).scope, vec![0, 1]);
        let t = fg.factor(1).table();
        assert!((t[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_preserves_tables() {
        let fg = gen_grid(3, 3, 1.0, 0.5, 17).unwrap();
        let back = read_uai(&write_uai(&fg)).unwrap();
        assert_eq!(back.num_factors(), fg.num_factors());
        for (a, b) in fg.factors().iter().zip(back.factors()) {
            assert_eq!(a.scope, b.scope);
            for (x, y) in a.log_table.iter().zip(&b.log_table) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_uai("BAYES\n1\n2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_uai("MARKOV\n1\n2\n1\n1 0\n2\n0.5").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = read_uai("MARKOV\n1\n2\n1\n1 0\n3\n0.5 1 1").unwrap_err();
        assert!(matches!(err, Error::SizeMismatch { .. }));
    }
}
