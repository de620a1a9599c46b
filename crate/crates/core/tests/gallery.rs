use gaborkit::gallery::{build, verify, NAMES};

#[test]
fn every_entry_matches_its_signature() {
    for name in NAMES {
        let entry = build(name, None).unwrap();
        let v = verify(&entry).unwrap();
        for c in &v.checks {
            println!("{name} {} -> {} [{}]", c.op, c.observed, if c.pass { "ok" } else { "MISMATCH" });
        }
        assert!(v.pass, "{name}: {v:?}");
    }
}
