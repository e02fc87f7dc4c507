//! Schatten norms of a Gram matrix against the operator norm.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::gram::{gram_matrix, schatten_norm};
use fusion_gram::linalg::{operator_norm, TolerancePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let w = generate(&"frame:seed=9,n=4,dims=2,2,2".parse::<InstanceSpec>()?)?.first().clone();
    let u = operator_from_spec("random:seed=1", 4)?;
    let g = gram_matrix(&u, &w, &w, &tol)?;
    println!("operator norm {:.6}", operator_norm(&g));
    for p in [1.0, 2.0, 4.0, 16.0, f64::INFINITY] {
        println!("p = {p:<4} {:.6}", schatten_norm(&g, p)?.value);
    }
    Ok(())
}
