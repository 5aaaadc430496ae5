//! Free-energy-preserving rewrites: split a chain region, then kill and merge regions.

use region_pursuit::factor_graph::FactorGraph;
use region_pursuit::gbp::{rg_free_energy, run_gbp, transfer_beliefs, GbpOptions};
use region_pursuit::region_graph::{Region, RegionGraph};
use region_pursuit::transforms::{death, prune_zero_counting, split, RegionPart, SplitSpec};

fn main() -> region_pursuit::Result<()> {
    // x0 - x1 - x2 chain
    let fg = FactorGraph::new(vec![2, 2, 2], vec![(vec![0, 1], vec![2.0, 0.5, 1.0, 3.0]), (vec![1, 2], vec![0.7, 1.9, 1.2, 0.4])])?;
    let one = RegionGraph::from_parts(vec![Region::new(vec![0, 1, 2], vec![0, 1])?], &[])?;
    let spec = SplitSpec {
        target: 0,
        alpha1: RegionPart::new(vec![0], vec![0]),
        alpha2: RegionPart::new(vec![2], vec![1]),
        beta: RegionPart::new(vec![1], vec![]),
    };
    let two = split(&one, &fg, &spec)?;
    print!("after split:\n{}", two.to_text());

    let opts = GbpOptions::default();
    let run = run_gbp(&one, &fg, &opts, None)?;
    let moved = transfer_beliefs(&one, &run.beliefs, &two, &fg)?;
    println!(
        "F before {:.12}, F after {:.12}",
        rg_free_energy(&one, &fg, &run.beliefs)?,
        rg_free_energy(&two, &fg, &moved)?
    );

    // adding the full region makes the two halves and their separator redundant
    let mut three = two.clone();
    three.add_outer_region(Region::new(vec![0, 1, 2], vec![0, 1])?, &fg)?;
    let zero: Vec<_> = (0..three.len()).filter(|&r| three.counting(r) == 0).collect();
    println!("zero-counting regions {zero:?}");
    let one_less = death(&three, zero[0])?;
    println!("death of {} leaves {} regions", three.region(zero[0]), one_less.len());
    print!("fully pruned:\n{}", prune_zero_counting(&three)?.to_text());
    Ok(())
}
