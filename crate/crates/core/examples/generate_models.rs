//! Builds one model of each family and round-trips it through the UAI format.

use region_pursuit::factor_graph::{generate, read_uai, write_uai, ModelFamily, WeightParams};

fn main() -> region_pursuit::Result<()> {
    let weights = WeightParams::new(1.0, 0.5);
    let families = [
        ("grid 4x4", ModelFamily::Grid { n: 4, m: 4, weights }),
        ("fc 7", ModelFamily::FullyConnected { n: 7, weights }),
        ("loop 5", ModelFamily::Loop { n: 5, w_std: 2.0, msg_std: 1.0 }),
        ("tree 8", ModelFamily::Tree { n: 8, w_max: 1.0, a_max: 0.5 }),
    ];
    for (name, family) in &families {
        let fg = generate(family, 7)?;
        let text = write_uai(&fg);
        let back = read_uai(&text)?;
        println!(
            "{name:>8}: {} vars, {} factors, {} bytes of UAI, round trip {}",
            fg.num_vars(),
            fg.num_factors(),
            text.len(),
            if back.num_factors() == fg.num_factors() { "ok" } else { "mismatch" }
        );
    }
    Ok(())
}
