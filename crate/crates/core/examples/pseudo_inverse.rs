//! Compare the Moore-Penrose inverse with its Gram-form candidate.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::gram::{gram_pinv_formula, GramTriple, PinvVariant};
use fusion_gram::linalg::TolerancePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let parseval = generate(&"parseval:seed=2,n=3,dims=1,2,3".parse::<InstanceSpec>()?)?.first().clone();
    let u = operator_from_spec("rank:r=1,seed=2", 3)?;
    let triple = GramTriple::new(u, parseval.clone(), parseval, &tol)?;
    for variant in [PinvVariant::DualVW, PinvVariant::WW] {
        let r = gram_pinv_formula(&triple, variant, &tol)?;
        println!(
            "parseval {variant:?}: identities {} (residual {:.1e}), formula {} (gap {:.1e})",
            r.condition_holds, r.condition_residual, r.formula_matches, r.discrepancy
        );
    }

    // a non-orthogonal Riesz basis, its canonical dual and a rank-one operator:
    // the identities hold here while the formula does not
    let w = generate(&"riesz:seed=1,n=4,dims=2,2,weights=uniform:0.5:2".parse::<InstanceSpec>()?)?.first().clone();
    let dual = w.canonical_dual(&tol)?;
    let u = operator_from_spec("rank:r=1,seed=3", 4)?;
    let r = gram_pinv_formula(&GramTriple::new(u, dual, w, &tol)?, PinvVariant::DualVW, &tol)?;
    println!(
        "riesz dual pair: identities {} formula {} consistent {}",
        r.condition_holds, r.formula_matches, r.consistent
    );
    Ok(())
}
