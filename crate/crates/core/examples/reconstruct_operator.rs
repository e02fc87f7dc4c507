//! Recover an operator from its Gram matrix with respect to a dual pair.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::gram::{cross_gram, reconstruct_operator, GramTriple};
use fusion_gram::linalg::{operator_norm, TolerancePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let spec: InstanceSpec = "dual_pair:seed=11,n=5,dims=2,3,2,weights=uniform:0.5:2".parse()?;
    let g = generate(&spec)?;
    let (frame, dual) = (g.first().clone(), g.second().unwrap().clone());
    let u = operator_from_spec("random:seed=5", 5)?;

    let gram = cross_gram(&GramTriple::new(u.clone(), dual.clone(), frame.clone(), &tol)?, &tol)?;
    let back = reconstruct_operator(&gram, &dual, &frame, &tol)?;
    println!("||U|| = {:.4}", operator_norm(&u));
    println!("||U - reconstruction|| = {:.3e}", operator_norm(&(&u - &back)));
    Ok(())
}
