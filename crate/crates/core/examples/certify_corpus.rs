//! Builds every canonical mechanism the bundled examples admit and replays
//! its certificates, one line per mechanism.

use ratimpl::mechanism::{build, verify_certificates, Variant, DEFAULT_N_MAX};
use ratimpl::{corpus, Rational};

fn main() {
    for name in corpus::NAMES {
        let env = corpus::load::<Rational>(name).expect("bundled example parses");
        for variant in [Variant::Theorem1, Variant::Theorem2] {
            let mech = match build(&env, variant, DEFAULT_N_MAX) {
                Ok(m) => m,
                Err(e) => {
                    println!("{name:5} {variant}: not built ({e})");
                    continue;
                }
            };
            let report = verify_certificates(&mech);
            let sections: Vec<String> = report
                .sections
                .iter()
                .map(|s| format!("{} {}/{}", s.name, s.entries.len() - s.failures().count(), s.entries.len()))
                .collect();
            let verdict = if report.passed { "certified" } else { "FAILED" };
            println!("{name:5} {variant}: {verdict}, |menu| = {}; {}", mech.sigma.len(), sections.join(", "));
        }
    }
}
