//! Bethe free-energy error against marginal error on random single-loop models.

use region_pursuit::experiment::cmd_loop_correlation;

fn main() -> region_pursuit::Result<()> {
    let res = cmd_loop_correlation(5, (0.0, 5.0), (0.5, 0.5), 40, 0, None::<std::io::Sink>)?;
    for t in res.trials.iter().step_by(8) {
        println!(
            "w_std {:.2}: |dF| {:.4}, |dS| {:.4}, L1 {:.4}",
            t.w_std,
            t.free_energy_error(),
            t.entropy_error(),
            t.l1_error
        );
    }
    println!("corr(|dF|, L1) = {:.3}", res.free_energy_corr);
    println!("corr(|dS|, L1) = {:.3}", res.entropy_corr);
    Ok(())
}
