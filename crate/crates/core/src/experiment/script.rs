//! Transform scripts, one operation per line:
//!
//! ```text
//! death <id>
//! merge <a> <b>
//! link <ancestor> <descendant>
//! split <target> alpha1 vars: <v...> factors: <a...> ; alpha2 vars: ... factors: ... ; beta vars: ... factors: ...
//! ```
//!
//! Region ids refer to the graph as it stands when the line is applied.

use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;
use crate::region_graph::{RegionGraph, RegionId};
use crate::transforms::{death, link_birth, merge, split, RegionPart, SplitSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformOp {
    Death(RegionId),
    Merge(RegionId, RegionId),
    LinkBirth { ancestor: RegionId, descendant: RegionId },
    Split(SplitSpec),
}

fn parse_usize(tok: Option<&str>, what: &str) -> std::result::Result<usize, String> {
    let t = tok.ok_or_else(|| format!("missing {what}"))?;
    t.parse().map_err(|_| format!("bad {what} {t:?}"))
}

fn parse_part(text: &str, label: &str) -> std::result::Result<RegionPart, String> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some(label) {
        return Err(format!("expected {label:?}"));
    }
    if toks.next() != Some("vars:") {
        return Err(format!("expected 'vars:' after {label}"));
    }
    let mut vars = Vec::new();
    let mut factors = Vec::new();
    let mut in_factors = false;
    for t in toks {
        if t == "factors:" && !in_factors {
            in_factors = true;
            continue;
        }
        let id: usize = t.parse().map_err(|_| format!("bad id {t:?} in {label}"))?;
        if in_factors {
            factors.push(id);
        } else {
            vars.push(id);
        }
    }
    if !in_factors {
        return Err(format!("expected 'factors:' in {label}"));
    }
    Ok(RegionPart::new(vars, factors))
}

fn parse_line(line: &str) -> std::result::Result<TransformOp, String> {
    let mut toks = line.split_whitespace();
    let op = toks.next().unwrap_or_default();
    let result = match op {
        "death" => TransformOp::Death(parse_usize(toks.next(), "region id")?),
        "merge" => TransformOp::Merge(parse_usize(toks.next(), "region id")?, parse_usize(toks.next(), "region id")?),
        "link" => TransformOp::LinkBirth {
            ancestor: parse_usize(toks.next(), "ancestor id")?,
            descendant: parse_usize(toks.next(), "descendant id")?,
        },
        "split" => {
            let target = parse_usize(toks.next(), "target id")?;
            let rest: Vec<&str> = toks.collect();
            let rest = rest.join(" ");
            let parts: Vec<&str> = rest.split(';').collect();
            if parts.len() != 3 {
                return Err("split needs alpha1 ; alpha2 ; beta".into());
            }
            return Ok(TransformOp::Split(SplitSpec {
                target,
                alpha1: parse_part(parts[0], "alpha1")?,
                alpha2: parse_part(parts[1], "alpha2")?,
                beta: parse_part(parts[2], "beta")?,
            }));
        }
        other => return Err(format!("unknown transform {other:?}")),
    };
    if let Some(extra) = toks.next() {
        return Err(format!("unexpected token {extra:?}"));
    }
    Ok(result)
}

pub fn parse_script(text: &str) -> Result<Vec<TransformOp>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(no, l)| parse_line(l.trim()).map_err(|message| Error::Parse { line: no + 1, message }))
        .collect()
}

/// Applies the operations in order. Each intermediate graph must stay valid.
pub fn apply_script(rg: &RegionGraph, fg: &FactorGraph, ops: &[TransformOp]) -> Result<RegionGraph> {
    let mut cur = rg.clone();
    for op in ops {
        cur = match op {
            TransformOp::Death(r) => death(&cur, *r)?,
            TransformOp::Merge(a, b) => merge(&cur, *a, *b)?,
            TransformOp::LinkBirth { ancestor, descendant } => link_birth(&cur, *ancestor, *descendant)?,
            TransformOp::Split(spec) => split(&cur, fg, spec)?,
        };
        let report = cur.check_validity(fg);
        if !report.c1_ok || !report.c2_ok {
            return Err(Error::InvalidRegionGraph(format!("after {op:?}: {:?}", report.violations)));
        }
    }
    Ok(cur)
}
