//! Validity report for a region graph with one variable region removed.

use region_pursuit::factor_graph::gen_loop;
use region_pursuit::region_graph::{Region, RegionGraph};

fn main() -> region_pursuit::Result<()> {
    let fg = gen_loop(3, 1.0, 0.5, 0)?;
    let good = RegionGraph::bethe(&fg);
    println!("bethe valid: {}", good.check_validity(&fg).is_valid());

    // drop the last variable region and every edge touching it
    let last = good.len() - 1;
    let regions: Vec<Region> = good.regions()[..last].to_vec();
    let edges: Vec<(usize, usize)> = good.edges().into_iter().filter(|&(_, c)| c != last).collect();
    let bad = RegionGraph::from_parts(regions, &edges)?;
    let report = bad.check_validity(&fg);
    println!("edited valid: {}", report.is_valid());
    for v in &report.violations {
        println!("  {v:?}");
    }
    Ok(())
}
