//! Perturbation bound for a Gram matrix when both the operator and the
//! subspaces move.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::stability::{check_stability, corollary_check, PerturbationInstance};
use fusion_gram::linalg::{operator_norm, TolerancePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let u1 = operator_from_spec("random_invertible:seed=1", 4)?;
    let e = operator_from_spec("random:seed=2", 4)?;
    let e = e.unscale(operator_norm(&e));
    for theta in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let spec: InstanceSpec = format!("perturbation:seed=3,n=4,dims=2,2,weights=uniform:0.5:1,theta={theta}").parse()?;
        let g = generate(&spec)?;
        let (v, z) = (g.first().clone(), g.second().unwrap().clone());
        let u2 = &u1 + e.scale(theta);
        let inst = PerturbationInstance::new(v.clone(), v.clone(), z.clone(), u1.clone(), u2.clone(), &tol)?;
        let r = check_stability(&inst, 0.0, 0.0, None, &tol)?;
        println!(
            "theta {theta:<6.0e} lhs {:.3e} rhs {:.3e} holds {} perturbed sigma ratio {:.3e}",
            r.lhs, r.rhs, r.bound_holds, r.perturbed_sigma_ratio
        );
        let c = corollary_check(&v, &z, &(fusion_gram::linalg::identity(4) + e.scale(theta)), None, 0.0, 0.0, None, &tol)?;
        println!("             corollary lhs {:.3e} rhs {:.3e} holds {}", c.lhs, c.rhs, c.bound_holds);
    }
    Ok(())
}
