//! Turn a k+m center pseudo-solution into k centers, by best k-subset and by
//! the sparse-instance conversion with a search over beta.

use fairclust::convert::{best_k_subset, convert_with_beta_search, ConversionConfig, DEFAULT_SUBSET_CAP};
use fairclust::gen::sparse_suite;
use fairclust::rounding::{iterative_round, RoundingOptions};
use fairclust::{brute_force_opt, OracleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for inst in sparse_suite(21, 4, 1.0) {
        let pseudo = iterative_round(&inst, &RoundingOptions::default())?;
        let (subset, subset_cost) = best_k_subset(&inst, &pseudo.centers, DEFAULT_SUBSET_CAP)?;
        let cfg = ConversionConfig::new(0.9, 0.05, inst.p())?;
        let report = convert_with_beta_search(&inst, &pseudo.centers, &cfg)?;
        let (_, opt) = brute_force_opt(&inst, &OracleOptions::default())?;
        println!(
            "k={} pseudo {} ({:.4}) -> subset {subset} ({:.4}), converted {} ({:.4}, {:?}), opt {:.4}",
            inst.k(),
            pseudo.centers,
            pseudo.cost.objective,
            subset_cost.objective,
            report.centers,
            report.cost.objective,
            report.path,
            opt.objective
        );
    }
    Ok(())
}
