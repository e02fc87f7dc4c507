//! Closed-form inverses of Gram matrices in the three supported settings.

use fusion_gram::corpus::{generate, operator_from_spec, InstanceSpec};
use fusion_gram::gram::{gram_inverse, inv_equivalence_battery, GramTriple, InverseMode};
use fusion_gram::linalg::TolerancePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let spec: InstanceSpec = "riesz:seed=3,n=6,dims=2,2,2,weights=uniform:0.5:2".parse()?;
    let w = generate(&spec)?.first().clone();
    let frame = generate(&"frame:seed=8,n=6,dims=3,3,3,weights=uniform:0.5:2".parse()?)?.first().clone();
    let u = operator_from_spec("random_invertible:seed=9", 6)?;

    let cases = [
        (InverseMode::WW, w.clone(), w.clone()),
        (InverseMode::DualVW, w.canonical_dual(&tol)?, w.clone()),
        (InverseMode::WV, w.clone(), frame),
    ];
    for (mode, first, second) in cases {
        let triple = GramTriple::new(u.clone(), first, second, &tol)?;
        let inv = gram_inverse(&triple, mode, &tol)?;
        println!(
            "{mode:?}: residual {:.2e}, kappa {:.2e}, vs dense inverse {:.2e}",
            inv.residual, inv.kappa, inv.direct_discrepancy
        );
    }

    let report = inv_equivalence_battery(&u, &w, &tol)?;
    println!("invertibility conditions agree: {}", report.agree());
    for (name, verdict) in report.verdicts() {
        println!("  {name:<28} {verdict}");
    }
    Ok(())
}
