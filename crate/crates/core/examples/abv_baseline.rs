//! Filtering baseline against iterative rounding on the same relaxation.

use fairclust::abv::{center_bound, filter_from_lp1, FilteringParams};
use fairclust::gen::micro_suite;
use fairclust::rounding::{round_from_lp1, solve_lp1, Lp1Options, RoundingOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for inst in micro_suite(31, 5) {
        let lp1 = solve_lp1(&inst, &Lp1Options::default())?;
        let ir = round_from_lp1(&inst, &lp1, &RoundingOptions::with_lambda(0.3))?;
        print!("k={} rounding: {} centers {:.4}", inst.k(), ir.centers.len(), ir.cost.objective);
        for eps in [0.1, 0.3, 0.5] {
            let out = filter_from_lp1(&inst, &lp1, FilteringParams { epsilon: eps })?;
            print!(
                " | eps {eps}: {}/{} centers {:.4}",
                out.centers.len(),
                center_bound(inst.k(), eps),
                out.cost.objective
            );
        }
        println!();
    }
    Ok(())
}
