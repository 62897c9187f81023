//! Named structural checks run by `spinmetro validate`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entangle::{self, maximally_entangled, max_prob_state, random_state, BipartiteState};
use crate::fisher::{self, OptimalBasis};
use crate::linalg::{c, max_abs_diff, CMatrix};
use crate::protocol;
use crate::spin::{AxisSpec, RotationGenerator, SpinSystem};

const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation against the tolerance.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: worst.is_finite() && worst <= tolerance,
            worst,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &'static str, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: false,
            worst: f64::NAN,
            tolerance,
            detail: detail.into(),
        }
    }
}

fn generator(twice_s: u32, theta: f64) -> RotationGenerator {
    let sys = SpinSystem::from_twice_spin(twice_s).expect("spin in range");
    RotationGenerator::new(&sys, AxisSpec::new(theta).expect("theta in range")).expect("non-degenerate")
}

fn commutators() -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=12 {
        let sys = SpinSystem::from_twice_spin(ts).unwrap();
        let (x, y, z) = (sys.sx(), sys.sy(), sys.sz());
        let i = c(0.0, 1.0);
        worst = worst
            .max(max_abs_diff(&(x * y - y * x), &z.map(|v| v * i)))
            .max(max_abs_diff(&(y * z - z * y), &x.map(|v| v * i)))
            .max(max_abs_diff(&(z * x - x * z), &y.map(|v| v * i)));
    }
    CheckResult::new("spin commutators", worst, 1e-10, "s = 1/2 .. 6")
}

fn spectrum_ladder(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=12 {
        for _ in 0..10 {
            let g = generator(ts, rng.random_range(0.0..std::f64::consts::PI));
            let s = ts as f64 / 2.0;
            for (k, e) in g.spectrum().energies.iter().enumerate() {
                worst = worst.max((e - (s - k as f64)).abs());
            }
        }
    }
    CheckResult::new("spectrum s..-s", worst, 1e-10, "10 random axes per spin")
}

fn schmidt_round_trip(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for m in 2..=8 {
        for _ in 0..10 {
            let psi = random_state(m, rng);
            match entangle::schmidt(&psi) {
                Ok(form) => {
                    worst = worst.max(max_abs_diff(&form.reconstruct(), psi.chi()));
                    let weight: f64 = form.xis.iter().map(|x| x * x).sum();
                    worst = worst.max((weight - 1.0).abs());
                }
                Err(e) => return CheckResult::failed("Schmidt round-trip", 1e-10, e.to_string()),
            }
        }
    }
    CheckResult::new("Schmidt round-trip", worst, 1e-10, "random states, m = 2..8")
}

fn gram_orthonormality() -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=8 {
        let g = generator(ts, 0.9);
        let basis = OptimalBasis::new(g.spectrum(), 0.0);
        let dec = entangle::ancilla_decomposition(&maximally_entangled(g.dim()).unwrap(), &basis).unwrap();
        worst = worst.max(dec.gram_deviation());
        let phis = basis.phis();
        for (a, u) in phis.iter().enumerate() {
            for (b, v) in phis.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((u.dotc(v).norm() - expected).abs());
            }
        }
    }
    CheckResult::new("Gram/orthogonality", worst, 1e-10, "maximal states m = 2..9 and optimal bases")
}

fn success_law() -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=11 {
        let g = generator(ts, 1.3);
        let m = g.dim();
        match protocol::orthogonal_protocol(&maximally_entangled(m).unwrap(), &g, 0.5) {
            Ok(r) => {
                worst = worst
                    .max((r.p_closed - 2.0 / m as f64).abs())
                    .max((r.p_bruteforce - 2.0 / m as f64).abs())
            }
            Err(e) => return CheckResult::failed("success law 2/m", 1e-10, e.to_string()),
        }
    }
    CheckResult::new("success law 2/m", worst, 1e-10, "m = 2..12")
}

fn max_qfi() -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=12 {
        let g = generator(ts, 0.4);
        let basis = OptimalBasis::new(g.spectrum(), 0.0);
        let target = g.system().max_qfi();
        for probe in [basis.n_plus(), basis.n_minus()] {
            worst = worst.max((fisher::qfi_pure(probe, g.hamiltonian()) - target).abs());
        }
    }
    CheckResult::new("maximum QFI 4s^2", worst, 1e-8, "s = 1/2 .. 6")
}

fn beta_independence(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let ts = rng.random_range(1..=6);
        let g = generator(ts, rng.random_range(0.05..3.1));
        let psi = random_state(g.dim(), rng);
        let run = |beta| protocol::run_protocol(&psi, &g, beta, protocol::Target::NMinus);
        let reference = match run(0.0) {
            Ok(r) => r.p_bruteforce,
            Err(e) => return CheckResult::failed("beta independence of p", 1e-12, e.to_string()),
        };
        for _ in 0..5 {
            let p = run(rng.random_range(-4.0..4.0)).map(|r| r.p_bruteforce).unwrap_or(f64::NAN);
            worst = worst.max((p - reference).abs());
        }
    }
    CheckResult::new("beta independence of p", worst, 1e-12, "random states and axes")
}

fn post_state_fidelity(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut push = |psi: &BipartiteState, g: &RotationGenerator, beta: f64| -> Result<(), String> {
        let r = protocol::run_protocol(psi, g, beta, protocol::Target::NMinus).map_err(|e| e.to_string())?;
        worst = worst.max(1.0 - r.min_fidelity());
        Ok(())
    };
    let mut cases = Vec::new();
    for ts in 1..=6 {
        let g = generator(ts, rng.random_range(0.05..3.1));
        cases.push((maximally_entangled(g.dim()).unwrap(), g));
    }
    for ts in 1..=3 {
        let g = generator(ts, rng.random_range(0.05..3.1));
        cases.push((max_prob_state(g.spectrum(), FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap(), g));
    }
    for _ in 0..20 {
        let g = generator(rng.random_range(1..=4), rng.random_range(0.05..3.1));
        cases.push((random_state(g.dim(), rng), g));
    }
    for (psi, g) in &cases {
        if let Err(e) = push(psi, g, rng.random_range(-2.0..2.0)) {
            return CheckResult::failed("post-state fidelity", 1e-10, e);
        }
    }
    CheckResult::new("post-state fidelity", worst, 1e-10, "maximal, p = 1 and random states")
}

fn cfi_equals_qfi(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=6 {
        let g = generator(ts, rng.random_range(0.05..3.1));
        let basis = OptimalBasis::new(g.spectrum(), 0.0);
        for _ in 0..5 {
            let beta = rng.random_range(0.05..0.95) * g.system().fundamental_domain();
            let rep = fisher::fisher_report(&g, beta, basis.n_plus(), &basis, 1);
            match rep {
                Ok(r) => worst = worst.max((r.cfi - g.system().max_qfi()).abs()),
                Err(e) => return CheckResult::failed("CFI = QFI on optimal basis", 1e-8, e.to_string()),
            }
        }
    }
    CheckResult::new("CFI = QFI on optimal basis", worst, 1e-8, "random beta inside the domain")
}

fn p_one_family(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=3 {
        for _ in 0..10 {
            let g = generator(ts, rng.random_range(0.05..3.1));
            let a: f64 = rng.random_range(0.05..1.5);
            let psi = max_prob_state(g.spectrum(), a.cos(), a.sin()).unwrap();
            match protocol::run_protocol(&psi, &g, 0.3, protocol::Target::NMinus) {
                Ok(r) => worst = worst.max((r.p_bruteforce - 1.0).abs()).max((r.p_closed - 1.0).abs()),
                Err(e) => return CheckResult::failed("p = 1 family", 1e-10, e.to_string()),
            }
        }
    }
    CheckResult::new("p = 1 family", worst, 1e-10, "s = 1/2, 1, 3/2")
}

fn unitarity(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for ts in 1..=12 {
        let g = generator(ts, rng.random_range(0.0..std::f64::consts::PI));
        let u = g.propagator(rng.random_range(-3.0..3.0));
        let m = g.dim();
        worst = worst.max(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(m, m)));
    }
    CheckResult::new("propagator unitarity", worst, 1e-10, "s = 1/2 .. 6")
}

/// Runs every check with a fixed internal seed.
pub fn run_all() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    vec![
        commutators(),
        spectrum_ladder(&mut rng),
        unitarity(&mut rng),
        schmidt_round_trip(&mut rng),
        gram_orthonormality(),
        success_law(),
        max_qfi(),
        cfi_equals_qfi(&mut rng),
        beta_independence(&mut rng),
        post_state_fidelity(&mut rng),
        p_one_family(&mut rng),
    ]
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_green() {
        let results = run_all();
        for r in &results {
            assert!(r.passed, "{}: worst {:e} > {:e} ({})", r.name, r.worst, r.tolerance, r.detail);
        }
        assert!(all_passed(&results));
    }

    #[test]
    fn failure_is_reported() {
        assert!(!CheckResult::new("x", 1.0, 0.5, "").passed);
        assert!(!CheckResult::new("x", f64::NAN, 0.5, "").passed);
    }
}
