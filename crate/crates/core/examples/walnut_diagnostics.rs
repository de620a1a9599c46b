//! Walnut partial sums: symmetric, rectangular and signed-subset growth profiles.

use gaborkit::gallery::{self, GalleryObject};
use gaborkit::walnut::{convergence_diagnose, Regime, SubsetStrategy};

fn main() -> gaborkit::Result<()> {
    let GalleryObject::Family(fam) = gallery::build("ex6.3", Some(1024))?.object else {
        unreachable!("ex6.3 is a correlation family")
    };
    for regime in [Regime::Symmetric, Regime::Norm, Regime::Unconditional] {
        let rep = convergence_diagnose(&fam, regime, 1024, &SubsetStrategy::default())?;
        println!("{regime:?}: {:?}", rep.verdict);
        if let Some(fit) = &rep.growth_fit {
            println!("  fit {:?}, parameter {:.4}, residual {:.4}", fit.law, fit.parameter, fit.residual);
        }
        print!("{}", rep.to_csv());
    }
    Ok(())
}
