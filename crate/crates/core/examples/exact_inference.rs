//! Exact marginals by enumeration and by variable elimination on a 3x3 grid.

use region_pursuit::elimination::min_fill_order;
use region_pursuit::exact::{exact_brute_force, exact_variable_elimination, interaction_graph};
use region_pursuit::factor_graph::gen_grid;

fn main() -> region_pursuit::Result<()> {
    let fg = gen_grid(3, 3, 1.0, 0.5, 1)?;
    let (order, width) = min_fill_order(&interaction_graph(&fg));
    println!("min-fill order {order:?}, induced width {width}");

    let bf = exact_brute_force(&fg)?;
    let ve = exact_variable_elimination(&fg, Some(&order))?;
    println!("log Z: brute force {:.12}, elimination {:.12}", bf.log_partition, ve.log_partition);
    for (v, (a, b)) in bf.node_marginals.iter().zip(&ve.node_marginals).enumerate() {
        println!("x{v}: p(+1) = {:.6} / {:.6}", a[1], b[1]);
    }
    Ok(())
}
