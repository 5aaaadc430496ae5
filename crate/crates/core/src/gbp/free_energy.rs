use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;
use crate::region_graph::{Region, RegionGraph, RegionId};
use crate::table::{projection, table_size};

use super::BeliefSet;

/// Sum of the region's factor log-tables, laid out over the region's variables.
pub fn region_log_potential(region: &Region, fg: &FactorGraph) -> Result<Vec<f64>> {
    let cards: Vec<usize> = region.vars.iter().map(|&v| fg.card(v)).collect();
    let size = table_size(&cards)
        .filter(|&s| s <= super::MAX_REGION_STATES)
        .ok_or_else(|| Error::InvalidRegion(format!("region {region} is too large to tabulate")))?;
    let mut table = vec![0.0; size];
    for &f in &region.factors {
        let factor = fg.factor(f);
        let proj = projection(&region.vars, &cards, &factor.scope);
        for (t, &p) in table.iter_mut().zip(&proj) {
            *t += factor.log_table[p];
        }
    }
    Ok(table)
}

fn neg_entropy(belief: &[f64]) -> f64 {
    belief.iter().filter(|&&b| b > 0.0).map(|&b| b * b.ln()).sum()
}

/// `-sum b log psi + sum b log b` for region `r`.
pub fn region_free_energy(rg: &RegionGraph, fg: &FactorGraph, beliefs: &BeliefSet, r: RegionId) -> Result<f64> {
    let log_psi = region_log_potential(rg.region(r), fg)?;
    let belief = &beliefs.tables[r];
    if belief.len() != log_psi.len() {
        return Err(Error::DimensionMismatch(format!(
            "belief for region {r} has {} entries, expected {}",
            belief.len(),
            log_psi.len()
        )));
    }
    let energy: f64 = belief
        .iter()
        .zip(&log_psi)
        .filter(|(&b, _)| b > 0.0)
        .map(|(b, l)| -b * l)
        .sum();
    Ok(energy + neg_entropy(belief))
}

/// `sum_r c_r F_r`; regions with zero counting number are skipped.
pub fn rg_free_energy(rg: &RegionGraph, fg: &FactorGraph, beliefs: &BeliefSet) -> Result<f64> {
    let mut total = 0.0;
    for r in 0..rg.len() {
        let c = rg.counting(r);
        if c != 0 {
            total += c as f64 * region_free_energy(rg, fg, beliefs, r)?;
        }
    }
    Ok(total)
}

pub fn region_entropy(belief: &[f64]) -> f64 {
    -neg_entropy(belief)
}

/// Counting-number weighted entropy `sum_r c_r H(b_r)`.
pub fn rg_entropy(rg: &RegionGraph, beliefs: &BeliefSet) -> f64 {
    (0..rg.len())
        .map(|r| rg.counting(r) as f64 * region_entropy(&beliefs.tables[r]))
        .sum()
}

fn marginalize(from: &Region, table: &[f64], to_vars: &[usize], fg: &FactorGraph) -> Vec<f64> {
    let cards: Vec<usize> = from.vars.iter().map(|&v| fg.card(v)).collect();
    let proj = projection(&from.vars, &cards, to_vars);
    let size: usize = to_vars.iter().map(|&v| fg.card(v)).product();
    let mut out = vec![0.0; size];
    for (b, &ix) in table.iter().zip(&proj) {
        out[ix] += b;
    }
    out
}

/// Single-variable marginals, each read from the smallest region containing the variable.
pub fn node_marginals(rg: &RegionGraph, fg: &FactorGraph, beliefs: &BeliefSet) -> Result<Vec<Vec<f64>>> {
    (0..fg.num_vars())
        .map(|v| {
            let r = rg
                .marginal_region(v)
                .ok_or_else(|| Error::InvalidRegion(format!("no region contains variable {v}")))?;
            Ok(marginalize(rg.region(r), &beliefs.tables[r], &[v], fg))
        })
        .collect()
}

/// Beliefs for `to` derived from beliefs on `from`: identical regions are copied,
/// others are marginalized from the smallest region of `from` whose variables cover them.
pub fn transfer_beliefs(from: &RegionGraph, beliefs: &BeliefSet, to: &RegionGraph, fg: &FactorGraph) -> Result<BeliefSet> {
    let mut tables = Vec::with_capacity(to.len());
    for region in to.regions() {
        if let Some(id) = from.find(region) {
            tables.push(beliefs.tables[id].clone());
            continue;
        }
        let source = (0..from.len())
            .filter(|&r| crate::region_graph::is_sorted_subset(&region.vars, &from.region(r).vars))
            .min_by_key(|&r| (from.region(r).vars.len(), r))
            .ok_or_else(|| Error::InvalidRegion(format!("no source region covers {region}")))?;
        tables.push(marginalize(from.region(source), &beliefs.tables[source], &region.vars, fg));
    }
    Ok(BeliefSet { tables })
}
