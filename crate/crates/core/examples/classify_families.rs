//! Classify a few generated families and print their frame bounds.

use fusion_gram::corpus::{generate, InstanceSpec};
use fusion_gram::linalg::TolerancePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    for text in [
        "fusion_onb:seed=7,n=4,dims=2,2",
        "riesz:seed=3,n=6,dims=2,2,2,weights=uniform:0.5:2",
        "parseval:seed=1,n=3,dims=1,2,3",
        "frame:seed=5,n=4,dims=2,2,3",
    ] {
        let spec: InstanceSpec = text.parse()?;
        let w = generate(&spec)?.first().clone();
        let c = w.classify(&tol);
        let b = w.frame_bounds();
        println!("{text}");
        println!(
            "  bounds [{:.4}, {:.4}]  frame={} riesz={} parseval={} onb={}",
            b.lower, b.upper, c.is_frame, c.is_riesz_basis, c.is_parseval, c.is_orthonormal_basis
        );
        let eq = w.riesz_equivalences(&tol);
        println!("  Riesz characterizations agree: {}", eq.agree());
    }
    Ok(())
}
