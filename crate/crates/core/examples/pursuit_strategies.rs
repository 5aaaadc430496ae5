//! Region pursuit on a 4x4 grid with each selection strategy.

use region_pursuit::exact::exact_inference;
use region_pursuit::factor_graph::gen_grid;
use region_pursuit::pursuit::{region_pursuit, PursuitConfig, Strategy};

fn main() -> region_pursuit::Result<()> {
    let fg = gen_grid(4, 4, 1.0, 0.5, 11)?;
    let exact = exact_inference(&fg)?;
    for strategy in [Strategy::Opt, Strategy::Rp, Strategy::RpPlus, Strategy::RpMinus, Strategy::Rand] {
        let config = PursuitConfig {
            strategy,
            max_regions: 5,
            ..PursuitConfig::default()
        };
        let trace = region_pursuit(&fg, &config, Some(&exact))?;
        let errors: Vec<String> = trace
            .records
            .iter()
            .map(|r| format!("{:.4}", r.l1_error.unwrap_or(f64::NAN)))
            .collect();
        println!("{:>4}: L1 {}", strategy.name(), errors.join(" "));
    }
    Ok(())
}
