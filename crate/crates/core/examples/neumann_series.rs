//! Invert a perturbed operator by a Neumann series around a known inverse.

use fusion_gram::corpus::operator_from_spec;
use fusion_gram::linalg::{inverse_checked, operator_norm, TolerancePolicy};
use fusion_gram::stability::neumann_inverse;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let f = operator_from_spec("random_invertible:seed=4", 5)?;
    let f_inv_norm = operator_norm(&inverse_checked(&f, &tol)?.into_result()?);
    let e = operator_from_spec("random:seed=5", 5)?;
    for target in [0.1, 0.5, 0.9, 1.1] {
        let g = &f - e.scale(target / (f_inv_norm * operator_norm(&e)));
        match neumann_inverse(&f, &g, 100_000, 1e-14, &tol) {
            Ok(r) => {
                let direct = inverse_checked(&g, &tol)?.into_result()?;
                println!(
                    "factor {:.2}: {} terms, error {:.2e}",
                    r.factor,
                    r.terms_used,
                    operator_norm(&(&r.inverse - &direct))
                );
            }
            Err(e) => println!("factor {target:.2}: {e}"),
        }
    }
    Ok(())
}
