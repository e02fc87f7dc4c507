//! Assemble a cross Gram matrix and compare the two assembly routes.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::gram::{cross_gram, cross_gram_by_blocks, gram_block, GramTriple};
use fusion_gram::linalg::{operator_norm, TolerancePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let spec: InstanceSpec = "dual_pair:seed=4,n=4,dims=2,2,1,weights=uniform:0.5:2".parse()?;
    let g = generate(&spec)?;
    let (w, v) = (g.first().clone(), g.second().unwrap().clone());
    let u = operator_from_spec("random:seed=1", 4)?;

    let triple = GramTriple::new(u, w, v, &tol)?;
    let gram = cross_gram(&triple, &tol)?;
    let blocks = cross_gram_by_blocks(&triple, &tol)?;
    println!("Gram matrix is {}x{}", gram.matrix().nrows(), gram.matrix().ncols());
    println!("block dims {:?}", gram.domain().block_dims());
    println!("||factor route - block route|| = {:.3e}", operator_norm(&(gram.matrix() - &blocks)));
    println!("block (1,0):\n{:.4}", gram_block(&triple, 1, 0, &tol)?);
    Ok(())
}
