//! Run each property suite, then each deliberately broken machine rule.

use gradual_ifc::cc::Mutation;
use gradual_ifc::harness::{fuzz, GenConfig, Suite};

fn main() {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    for suite in [Suite::Safety, Suite::Ni, Suite::Gg] {
        let r = fuzz(suite, &GenConfig { count, ..GenConfig::default() });
        println!("{:<7} cases {} dynamic {} violations {}", suite.name(), r.cases, r.dynamic, r.violations.len());
    }
    println!();
    for m in Mutation::ALL {
        for suite in [Suite::Safety, Suite::Ni, Suite::Gg] {
            let r = fuzz(suite, &GenConfig { count, mutation: m, ..GenConfig::default() });
            if let Some(v) = r.violations.first() {
                println!(
                    "{:<20} {:<7} {:>3} violations, e.g. {:?}\n    {}",
                    m.name(),
                    suite.name(),
                    r.violations.len(),
                    v.kind,
                    v.shrunk
                );
            }
        }
    }
}
