//! Generate a seeded instance, write it to disk and read it back bit for bit.

use fusion_gram::corpus::{generate, read_document, serialize, write_document, Document, Generated, InstanceSpec};
use fusion_gram::linalg::TolerancePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = TolerancePolicy::default();
    let spec: InstanceSpec = "dual_pair:seed=42,n=3,dims=1,2,1,weights=uniform:0.5:2".parse()?;
    println!("spec: {spec}");
    let doc = match generate(&spec)? {
        Generated::Family(f) => Document::Family(f),
        Generated::Pair(a, b) => Document::Pair(a, b),
    };
    let path = std::env::temp_dir().join("fusion_gram_example_pair.json");
    write_document(&path, &doc)?;
    let back = read_document(&path, &tol)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("identical after reading: {}", back == doc);
    println!("identical text: {}", serialize(&back) == serialize(&doc));
    std::fs::remove_file(&path)?;
    Ok(())
}
