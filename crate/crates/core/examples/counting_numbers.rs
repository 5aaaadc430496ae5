//! Counting numbers, validity and extendability as a loop region is added to a 3x3 grid.

use region_pursuit::factor_graph::gen_grid;
use region_pursuit::region_graph::{Region, RegionGraph};

fn main() -> region_pursuit::Result<()> {
    let fg = gen_grid(3, 3, 1.0, 0.5, 0)?;
    let mut rg = RegionGraph::bethe(&fg);
    let before = rg.counting_numbers().to_vec();
    println!(
        "bethe: {} regions, valid {}, extendable {}",
        rg.len(),
        rg.check_validity(&fg).is_valid(),
        rg.is_extendable(&fg).extendable
    );

    let square = Region::with_all_factors(&fg, vec![0, 1, 3, 4])?;
    let ins = rg.add_outer_region(square, &fg)?;
    println!(
        "with square: {} regions, valid {}, extendable {}",
        rg.len(),
        rg.check_validity(&fg).is_valid(),
        ins.extendable
    );
    for (r, &c) in rg.counting_numbers().iter().enumerate() {
        match before.get(r) {
            Some(&old) if old != c => println!("  {} c: {old} -> {c}", rg.region(r)),
            None => println!("  {} c: new {c}", rg.region(r)),
            _ => {}
        }
    }
    Ok(())
}
