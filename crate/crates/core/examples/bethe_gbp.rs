//! Loopy BP on the Bethe region graph of a grid, compared against the exact answer.

use region_pursuit::exact::{avg_l1_error, exact_inference};
use region_pursuit::factor_graph::gen_grid;
use region_pursuit::gbp::{node_marginals, rg_free_energy, run_gbp, GbpOptions};
use region_pursuit::region_graph::RegionGraph;

fn main() -> region_pursuit::Result<()> {
    let fg = gen_grid(4, 4, 1.0, 0.5, 3)?;
    let rg = RegionGraph::bethe(&fg);
    let run = run_gbp(&rg, &fg, &GbpOptions::default(), None)?;
    println!(
        "converged {} after {} sweeps (residual {:.1e})",
        run.state.converged, run.state.iteration, run.state.max_residual
    );

    let exact = exact_inference(&fg)?;
    let marginals = node_marginals(&rg, &fg, &run.beliefs)?;
    println!("Bethe free energy {:.6}", rg_free_energy(&rg, &fg, &run.beliefs)?);
    println!("exact -log Z      {:.6}", -exact.log_partition);
    println!("mean L1 error     {:.6}", avg_l1_error(&marginals, &exact)?);
    Ok(())
}
