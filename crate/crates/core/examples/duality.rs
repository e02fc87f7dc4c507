//! Dual pairs: the duality defect and the oblique projection G_{V,W}.

use fusion_gram::corpus::{generate, InstanceSpec};
use fusion_gram::frames::{duality_defect, is_pseudo_dual};
use fusion_gram::gram::{dual_riesz_check, oblique_projection_check};
use fusion_gram::linalg::TolerancePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let spec: InstanceSpec = "dual_pair:seed=3,n=4,dims=2,2,2,weights=uniform:0.5:2".parse()?;
    let g = generate(&spec)?;
    let (w, v) = (g.first(), g.second().unwrap());

    println!("duality defect {:.2e}", duality_defect(v, w, &tol)?);
    println!("pseudo-dual: {}", is_pseudo_dual(v, w, &tol)?);
    let p = oblique_projection_check(v, w, &tol)?;
    println!("||G^2 - G|| = {:.2e}", p.idempotent_residual);
    println!("||T_V G - T_V|| = {:.2e}", p.synthesis_residual);
    println!("kernel angle {:.2e}, kernel dim {}", p.kernel_angle, p.kernel_dim);
    println!("self-adjoint: {} ({:.2e})", p.is_self_adjoint, p.self_adjoint_residual);
    let r = dual_riesz_check(v, w, &tol)?;
    println!("dual is Riesz: {}, G = I: {}, left invertible: {}", r.v_riesz, r.gram_is_identity, r.has_left_inverse);
    Ok(())
}
