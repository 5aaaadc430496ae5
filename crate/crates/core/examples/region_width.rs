//! Width of candidate loop regions on a fully connected model and their weakly
//! irreducible parts.

use region_pursuit::factor_graph::gen_fully_connected;
use region_pursuit::pursuit::{candidate_pool, enumerate_chordless_cycles, PursuitConfig};
use region_pursuit::region_graph::{Region, RegionGraph};
use region_pursuit::transforms::{decompose_weakly_irreducible, region_width};

fn main() -> region_pursuit::Result<()> {
    let fg = gen_fully_connected(5, 1.0, 0.5, 2)?;
    let rg = RegionGraph::bethe(&fg);
    println!("{} chordless cycles up to length 3", enumerate_chordless_cycles(&fg, 3).len());

    for vars in [vec![0, 1, 2], vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4]] {
        let region = Region::with_all_factors(&fg, vars)?;
        let children: Vec<Vec<usize>> = rg
            .direct_subregions(&region)?
            .into_iter()
            .map(|c| rg.region(c).vars.clone())
            .collect();
        let w = region_width(&region, &children, &fg);
        let parts = decompose_weakly_irreducible(&region, &fg);
        println!("{region}: width {} (exact {}), {} irreducible part(s)", w.width, w.exact, parts.len());
    }

    let config = PursuitConfig { max_width: 2, max_loop_len: 3, ..PursuitConfig::default() };
    println!("candidate pool at width 2: {} regions", candidate_pool(&fg, &rg, &config)?.len());
    Ok(())
}
