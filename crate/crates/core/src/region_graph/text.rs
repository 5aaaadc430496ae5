//! Line-oriented text form of a region graph.
//!
//! ```text
//! R <id> vars: <v...> factors: <a...>
//! E <parent> <child>
//! C <id> <counting number>
//! ```
//!
//! `C` lines are written for reference and ignored on input; counting numbers are
//! always recomputed. Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Region, RegionGraph, RegionId};
use crate::error::{Error, Result};

fn join(ids: &[usize]) -> String {
    ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl RegionGraph {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, r) in self.regions().iter().enumerate() {
            let _ = writeln!(out, "R {id} vars: {} factors: {}", join(&r.vars), join(&r.factors));
        }
        for (p, c) in self.edges() {
            let _ = writeln!(out, "E {p} {c}");
        }
        for (id, c) in self.counting_numbers().iter().enumerate() {
            let _ = writeln!(out, "C {id} {c}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut regions: BTreeMap<RegionId, Region> = BTreeMap::new();
        let mut edges = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| Error::Parse { line: no + 1, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            match toks.next() {
                Some("R") => {
                    let id = parse_id(toks.next(), "region id").map_err(err)?;
                    if toks.next() != Some("vars:") {
                        return Err(err("expected 'vars:'".into()));
                    }
                    let mut vars = Vec::new();
                    let mut factors = Vec::new();
                    let mut in_factors = false;
                    for t in toks {
                        if t == "factors:" {
                            if in_factors {
                                return Err(err("repeated 'factors:'".into()));
                            }
                            in_factors = true;
                            continue;
                        }
                        let v = parse_id(Some(t), "id").map_err(err)?;
                        if in_factors {
                            factors.push(v);
                        } else {
                            vars.push(v);
                        }
                    }
                    if !in_factors {
                        return Err(err("expected 'factors:'".into()));
                    }
                    let region = Region::new(vars, factors).map_err(|e| err(e.to_string()))?;
                    if regions.insert(id, region).is_some() {
                        return Err(err(format!("region {id} defined twice")));
                    }
                }
                Some("E") => {
                    let p = parse_id(toks.next(), "parent id").map_err(err)?;
                    let c = parse_id(toks.next(), "child id").map_err(err)?;
                    edges.push((p, c));
                }
                Some("C") => {}
                Some(other) => return Err(err(format!("unknown record {other:?}"))),
                None => unreachable!(),
            }
        }
        let n = regions.len();
        if let Some((_, &id)) = regions.keys().enumerate().find(|(k, id)| k != *id) {
            return Err(Error::Parse {
                line: 0,
                message: format!("region ids must be 0..{n}, found {id}"),
            });
        }
        RegionGraph::from_parts(regions.into_values().collect(), &edges)
    }
}

fn parse_id(tok: Option<&str>, what: &str) -> std::result::Result<usize, String> {
    let tok = tok.ok_or_else(|| format!("missing {what}"))?;
    tok.parse().map_err(|_| format!("expected {what}, found {tok:?}"))
}
