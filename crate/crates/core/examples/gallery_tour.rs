//! Builds every gallery entry and checks it against its expected signature.

use gaborkit::gallery;

fn main() -> gaborkit::Result<()> {
    for name in gallery::NAMES {
        let entry = gallery::build(name, None)?;
        let v = gallery::verify(&entry)?;
        println!("{name} [{}] truncation {}: {}", entry.object.kind(), v.truncation, if v.pass { "pass" } else { "FAIL" });
        for c in &v.checks {
            println!("  {}: expected {}, observed {}", c.op, c.expected, c.observed);
        }
    }
    let r = gallery::divergence_record(30);
    println!("ex6.6 lower-bound partial sums: {:?}", &r.partial_sums[..5]);
    Ok(())
}
