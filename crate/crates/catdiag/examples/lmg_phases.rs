//! Map the three phases of the three-level collective-spin model:
//! sweep the coupling, compare the closed-form ground energy density
//! with exact finite-N diagonalization, and locate the
//! second-derivative kinks at the two critical couplings.
//!
//! Run with:
//!
//! ```text
//! cargo run --example lmg_phases > energies.csv
//! ```
//!
//! The CSV holds one row per coupling: the analytic density and the
//! exact per-particle energies at N = 10, 20, 40. The stderr log
//! verifies the variational bound and the kink sizes.

use catdiag::lmg::{
    energy_expectation, ground_energy_density, solve_ground_state, stationary_point,
    variational_cat_state, LmgParams, Phase,
};

fn main() -> catdiag::Result<()> {
    let eps = 1.0;
    let sizes = [10u32, 20, 40];

    println!("lambda,E0_analytic,E_N10,E_N20,E_N40");
    let mut grid = Vec::new();
    let mut lam = 0.0;
    while lam <= 3.0 + 1e-9 {
        grid.push(lam);
        lam += 0.1;
    }
    for &lam in &grid {
        let analytic = ground_energy_density(eps, lam)?;
        let mut row = format!("{lam},{analytic}");
        for &n in &sizes {
            let p = LmgParams::new(n, eps, lam)?;
            let (energy, _) = solve_ground_state(&p)?;
            row.push_str(&format!(",{energy}"));
        }
        println!("{row}");
    }

    // Phase boundaries: the stationary point moves off the origin at
    // lambda = eps/2 and picks up its second component at 3 eps/2.
    for (lam, expected) in [(0.3, Phase::I), (1.0, Phase::II), (2.0, Phase::III)] {
        let sp = stationary_point(eps, lam)?;
        assert_eq!(sp.phase, expected);
        eprintln!(
            "lambda = {lam}: phase {:?}, stationary moduli = ({:.6}, {:.6})",
            sp.phase, sp.alpha0, sp.beta0
        );
    }

    // The kinks: second derivative of the ground energy density jumps
    // at both critical couplings. Central second differences on either
    // side of each critical point expose the jump.
    let h = 1e-4;
    for crit in [0.5 * eps, 1.5 * eps] {
        let second = |lam: f64| -> catdiag::Result<f64> {
            Ok(
                (ground_energy_density(eps, lam + h)? - 2.0 * ground_energy_density(eps, lam)?
                    + ground_energy_density(eps, lam - h)?)
                    / (h * h),
            )
        };
        let jump = second(crit + 10.0 * h)? - second(crit - 10.0 * h)?;
        eprintln!("second-derivative jump at lambda = {crit}: {jump:.4}");
    }

    // Variational check at one coupling per phase: the cat built on the
    // stationary point can only overshoot the true ground energy.
    for lam in [0.3, 1.0, 2.0] {
        let p = LmgParams::new(20, eps, lam)?;
        let (exact, _) = solve_ground_state(&p)?;
        let trial = energy_expectation(&p, &variational_cat_state(&p)?)?;
        assert!(trial >= exact - 1e-10);
        eprintln!(
            "lambda = {lam}: exact = {exact:.8}, variational cat = {trial:.8}, gap = {:.2e}",
            trial - exact
        );
    }
    Ok(())
}
