//! Trace every extremal family of the entropy diagram for one
//! dimension and print them as CSV, together with the small-L
//! asymptotic curves that the boundaries approach near the corners.
//!
//! Run with:
//!
//! ```text
//! cargo run --example boundary_curves [d] > boundary.csv
//! ```
//!
//! The rows plot directly as (L, S) curves: the upper boundary, the
//! d-1 lower branches, and the d-1 inner curves that fence off the
//! fixed-rank regions.

use catdiag::infodiag::{
    asymptotic_s_of_l, boundary_entropies, AsymptoticRegime, ExtremalFamily, FamilyKind,
};

fn main() -> catdiag::Result<()> {
    let d: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("d must be an integer"))
        .unwrap_or(5);
    let samples = 400;

    let mut families = vec![ExtremalFamily::max_boundary(d)?];
    for k in 1..d {
        families.push(ExtremalFamily::min_boundary(d, k)?);
        families.push(ExtremalFamily::inner_rank_curve(d, k)?);
    }

    println!("family,k,eps,L,S");
    for family in &families {
        let label = match family.kind() {
            FamilyKind::MaxBoundary => "max_boundary",
            FamilyKind::MinBoundary => "min_boundary",
            FamilyKind::InnerRankCurve => "inner_rank_curve",
        };
        let k_cell = match family.kind() {
            FamilyKind::MaxBoundary => String::new(),
            _ => family.k().to_string(),
        };
        for eps in family.eps_samples(samples) {
            let p = boundary_entropies(family, eps)?;
            println!("{label},{k_cell},{eps},{},{}", p.linear, p.von_neumann);
        }
        eprintln!("traced {label} k={k_cell}");
    }

    // The asymptotes describe the boundary shape where the curves pinch
    // together: near the pure corner (L -> 0) and the maximally mixed
    // corner (L -> 1).
    for (regime, label) in [
        (AsymptoticRegime::PureMax, "asymptote_pure_max"),
        (AsymptoticRegime::PureMin1, "asymptote_pure_min1"),
        (AsymptoticRegime::MixedCorner, "asymptote_mixed_corner"),
    ] {
        for i in 1..=samples {
            let l = i as f64 / samples as f64;
            println!("{label},,,{l},{}", asymptotic_s_of_l(d, regime, l)?);
        }
    }
    eprintln!("done: d = {d}, {} rows", (2 * d - 1 + 3) * samples);
    Ok(())
}
