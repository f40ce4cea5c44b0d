//! Round the relaxation of a random instance into at most k+m centers and
//! print the per-iteration trace.

use fairclust::gen::micro_suite;
use fairclust::rounding::{approximation_factor, iterative_round, RoundingOptions};
use fairclust::{brute_force_opt, OracleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = micro_suite(11, 4).into_iter().max_by_key(|i| i.num_groups()).unwrap();
    let opts = RoundingOptions {
        trace: true,
        check_coverage: Some(true),
        ..Default::default()
    };
    let sol = iterative_round(&inst, &opts)?;
    for r in &sol.trace {
        println!(
            "iter {:>2}: lp {:.5}  |U*| {:>2}  |Uf| {:>2}  shrunk {:?}  support {}",
            r.iteration, r.lp_objective, r.n_star, r.n_free, r.shrunk_client, r.support_size
        );
    }
    let (_, opt) = brute_force_opt(&inst, &OracleOptions::default())?;
    println!(
        "k={} m={} p={}: {} centers {}, cost {:.5}, relaxation {:.5}, optimum {:.5}, guarantee {:.5}",
        inst.k(),
        inst.num_groups(),
        inst.p(),
        sol.centers.len(),
        sol.centers,
        sol.cost.objective,
        sol.lp_lower_bound,
        opt.objective,
        approximation_factor(opts.lambda, inst.p()) * opt.objective
    );
    Ok(())
}
