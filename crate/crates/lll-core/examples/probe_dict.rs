use lll_core::fock::trust_radius;
use lll_core::variational::{minimize, InitGuess, MinimizationProblem};
use lll_core::zeros::find_zeros_within;

fn main() {
    let mut p = MinimizationProblem::gmu(0.1, 128);
    p.gradient_tol = 1e-9;
    p.max_iters = 80_000;
    let r128 = minimize(&p).unwrap();
    let t128 = trust_radius(128, 1e-12);
    let z128 = find_zeros_within(&r128.minimizer, t128, 1.0).unwrap();
    println!(
        "128: trust {:.3} total {} dropped {} ladder {:?}",
        t128, z128.total, z128.dropped,
        z128.counts.iter().map(|c| c.1).collect::<Vec<_>>()
    );

    for tol in [1e-9, 1e-10] {
        let mut p192 = MinimizationProblem::gmu(0.1, 192);
        p192.gradient_tol = tol;
        p192.max_iters = 120_000;
        p192.init = InitGuess::State(r128.minimizer.resized(192).unwrap());
        let r192 = minimize(&p192).unwrap();
        let t192 = trust_radius(192, 1e-12);
        let z192 = find_zeros_within(&r192.minimizer, t192, 1.0).unwrap();
        println!(
            "192 tol {tol:.0e}: iters {} trust {:.3} total {} dropped {}",
            r192.iterations, t192, z192.total, z192.dropped
        );
        for r in &z192.roots {
            if r.location.norm() > 5.0 {
                println!("   outer root {:.4} |z| {:.3} residual {:.2e}", r.location, r.location.norm(), r.residual);
            }
        }
    }
}
