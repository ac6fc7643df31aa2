//! Fill the entropy diagram with random spectra and check that every
//! point lands inside the theoretical boundaries and above its rank
//! region.
//!
//! Run with:
//!
//! ```text
//! cargo run --example random_diagram [d] [count] > cloud.csv
//! ```
//!
//! Sampling is seeded, so the CSV is reproducible. Scatter-plot the
//! (L, S) columns over the curves from `boundary_curves` to see how
//! tightly random states hug the upper boundary.

use catdiag::infodiag::{minimal_rank_region, von_neumann_bounds};
use catdiag::spectra::{
    info_point, numerical_rank, sample_random_spectrum, DEFAULT_RANK_THRESHOLD,
};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

fn main() -> catdiag::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args
        .next()
        .map(|a| a.parse().expect("d must be an integer"))
        .unwrap_or(5);
    let count: usize = args
        .next()
        .map(|a| a.parse().expect("count must be an integer"))
        .unwrap_or(20_000);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut rank_counts = vec![0usize; d + 1];

    println!("L,S,rank");
    for i in 0..count {
        let spectrum = sample_random_spectrum(d, 2, &mut rng)?;
        let p = info_point(&spectrum)?;
        let rank = numerical_rank(&spectrum, DEFAULT_RANK_THRESHOLD)?;
        rank_counts[rank] += 1;

        let (s_min, s_max) = von_neumann_bounds(d, p.linear)?;
        assert!(
            p.von_neumann >= s_min - 1e-9 && p.von_neumann <= s_max + 1e-9,
            "sample {i} escaped the boundary: ({}, {}) not in [{s_min}, {s_max}]",
            p.linear,
            p.von_neumann
        );
        let floor = minimal_rank_region(d, p)?;
        assert!(
            rank >= floor,
            "sample {i}: numerical rank {rank} below the region floor {floor}"
        );

        println!("{},{},{rank}", p.linear, p.von_neumann);
    }

    eprintln!("all {count} samples contained; rank histogram:");
    for (rank, n) in rank_counts.iter().enumerate().skip(1) {
        if *n > 0 {
            eprintln!("  rank {rank}: {n}");
        }
    }
    Ok(())
}
