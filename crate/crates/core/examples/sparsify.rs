//! Walk the sparsifier's candidate instances and report which of them keep
//! the optimum and are sparse with respect to it.

use fairclust::gen::sparse_suite;
use fairclust::sparsify::{enumerate_instances, is_alpha_sparse, max_density, SparsifyCaps};
use fairclust::{brute_force_opt, OracleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = &sparse_suite(5, 1, 1.0)[0];
    let (opt_set, opt) = brute_force_opt(inst, &OracleOptions::default())?;
    let alpha = opt.objective / inst.num_groups() as f64;
    let (density, facility, _) = max_density(inst, &opt_set);
    println!("base: opt {:.4} at {opt_set}, densest facility {facility} ({density:.4} vs alpha {alpha:.4})", opt.objective);

    let caps = SparsifyCaps {
        dedupe: true,
        ..Default::default()
    };
    for cand in enumerate_instances(inst, 1, caps) {
        let c = &cand.instance;
        let (c_set, c_opt) = brute_force_opt(c, &OracleOptions::default())?;
        println!(
            "removed by {:?}: {} facilities, opt {:.4}, sparse {}",
            cand.job.pairs,
            c.num_facilities(),
            c_opt.objective,
            is_alpha_sparse(c, alpha, &c_set)
        );
    }
    Ok(())
}
