//! Correlation functions `G_k` and the CC, UCC and condition-A tests.

use gaborkit::correlations::{cc_check, condition_a_partial_sums, correlation_family, ucc_check};
use gaborkit::model::{GridSpec, LatticeParams, StepFunction};

fn main() -> gaborkit::Result<()> {
    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let lat = LatticeParams::integer(1, 1);
    let fam = correlation_family(&g, &lat)?;
    println!("G_k family: {}", fam.to_json());

    let cc = cc_check(&fam);
    println!("CC: {:?}, bound {:?}", cc.verdict, cc.bound);
    let ucc = ucc_check(&fam, &[1e-1, 1e-3]);
    println!("UCC: {:?}, thresholds {:?}", ucc.verdict, ucc.thresholds);

    let a = condition_a_partial_sums(&g, &lat, 2, 256)?;
    for (l, total) in a.running.iter().filter(|(l, _)| (*l as u64).is_power_of_two()) {
        println!("condition A partial sum |ℓ| ≤ {l:>3}: {total:.4}");
    }
    Ok(())
}
