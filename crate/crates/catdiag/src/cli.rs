//! CSV-emitting command-line front end.
//!
//! Subcommands: `boundary` (diagram boundary families), `sample`
//! (random-spectrum clouds), `cat-surface` (cat entanglement over the
//! phase-space moduli), `lmg sweep|qpt|energy` (coupling scans of the
//! three-level model), and `selfcheck` (fast library sanity runner).
//!
//! Every CSV starts with a `#` comment holding the resolved
//! command line (minus `--out`, so the same data written to different
//! paths stays byte-identical) and ends each data row with
//! 17-significant-digit floats, which round-trip exactly through f64.
//! Nothing reads the environment: seeds default to 0 and are always
//! printed, so re-running the comment line reproduces the file.

use crate::infodiag::{
    asymptotic_s_of_l, boundary_entropies, minimal_rank_region, von_neumann_bounds,
    AsymptoticRegime, ExtremalFamily,
};
use crate::lmg::{
    energy_expectation, ground_energy_density, rank_scan, scan, solve_ground_state,
    stationary_point, variational_cat_state, LmgParams, ScanSource, NUMERICAL_RANK_THRESHOLD,
};
use crate::rdm::{cat_entanglement_entropies, rdm1, rdm2, CatN, CatSpectrumRequest};
use crate::spectra::{info_point, numerical_rank, sample_random_spectrum, DEFAULT_RANK_THRESHOLD};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

/// Render a data float with 17 significant digits (round-trip exact).
/// Negative zero is folded into plain zero so that algebraically equal
/// pipelines cannot differ by a sign bit on a vanishing entry.
fn csv(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// An inclusive arithmetic grid written as `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// Expand to grid nodes `start + i*step` up to `stop` (inclusive
    /// within half a step of rounding slack).
    pub fn points(&self) -> Result<Vec<f64>> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive and finite, got {}",
                self.step
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(Error::InvalidArgument(format!(
                "grid range [{}, {}] is not finite and ascending",
                self.start, self.stop
            )));
        }
        let slack = self.step * 1e-9;
        let mut points = Vec::new();
        let mut i = 0u64;
        loop {
            let x = self.start + (i as f64) * self.step;
            if x > self.stop + slack {
                break;
            }
            points.push(x.min(self.stop));
            i += 1;
            if i > 100_000_000 {
                return Err(Error::InvalidArgument("grid has over 1e8 nodes".into()));
            }
        }
        Ok(points)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let parse = |p: &str| {
            p.parse::<f64>()
                .map_err(|e| format!("bad number {p:?}: {e}"))
        };
        Ok(GridSpec {
            start: parse(parts[0])?,
            stop: parse(parts[1])?,
            step: parse(parts[2])?,
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Particle count that may be the analytic large-N limit (`inf`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleCount {
    Infinite,
    Finite(u32),
}

impl FromStr for ParticleCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(ParticleCount::Infinite);
        }
        s.parse::<u32>()
            .map(ParticleCount::Finite)
            .map_err(|e| format!("expected a particle count or \"inf\", got {s:?}: {e}"))
    }
}

impl fmt::Display for ParticleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParticleCount::Infinite => write!(f, "inf"),
            ParticleCount::Finite(n) => write!(f, "{n}"),
        }
    }
}

/// Where scan spectra come from, as a flag value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// Closed-form stationary-point spectra in the large-N limit.
    VariationalInf,
    /// Finite-N cat state at the stationary point.
    VariationalN,
    /// Exact finite-N ground state.
    Numerical,
}

impl SourceArg {
    fn resolve(self, n: u32) -> ScanSource {
        match self {
            SourceArg::VariationalInf => ScanSource::VariationalInf,
            SourceArg::VariationalN => ScanSource::VariationalN(n),
            SourceArg::Numerical => ScanSource::Numerical(n),
        }
    }

    fn name(self) -> &'static str {
        match self {
            SourceArg::VariationalInf => "variational-inf",
            SourceArg::VariationalN => "variational-n",
            SourceArg::Numerical => "numerical",
        }
    }

    fn uses_particles(self) -> bool {
        !matches!(self, SourceArg::VariationalInf)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "catdiag",
    about = "Entropy diagrams, cat states, and collective-spin scans as CSV",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the diagram boundary families for one dimension.
    Boundary(BoundaryArgs),
    /// Emit entropies of random spectra.
    Sample(SampleArgs),
    /// Emit cat entanglement entropies over the phase-space moduli.
    CatSurface(CatSurfaceArgs),
    /// Coupling scans of the three-level collective-spin model.
    #[command(subcommand)]
    Lmg(LmgCommand),
    /// Run the fast library checks and report PASS/FAIL per check.
    Selfcheck,
}

#[derive(Args, Debug)]
struct BoundaryArgs {
    /// Hilbert space dimension.
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Samples per curve branch.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Also emit the small-L / near-mixed asymptotic curves.
    #[arg(long, default_value_t = false)]
    asymptotes: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Hilbert space dimension.
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Number of spectra to draw.
    #[arg(long, default_value_t = 20000)]
    n: usize,
    /// Chi-squared degrees of freedom of the eigenvalue weights.
    #[arg(long, default_value_t = 2)]
    dof: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CatSurfaceArgs {
    /// Number of levels (2 or 3).
    #[arg(long = "D", default_value_t = 3)]
    levels: usize,
    /// Particles kept by the marginal (1 or 2).
    #[arg(long = "M", default_value_t = 1)]
    kept: usize,
    /// Total particle count, or `inf` for the analytic limit.
    #[arg(long = "N", default_value = "inf")]
    particles: ParticleCount,
    /// Modulus grid applied to each phase-space axis.
    #[arg(long, default_value = "0:2:0.05")]
    grid: GridSpec,
    /// Append the stationary-point curve of the energy surface.
    #[arg(long, default_value_t = false)]
    stationary: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LmgCommand {
    /// Ranks, entropies, and energy across a coupling grid.
    Sweep(LmgScanArgs),
    /// Rank-jump locations across a coupling grid.
    Qpt(LmgScanArgs),
    /// Closed-form vs exact ground-state energy across a coupling grid.
    Energy(LmgEnergyArgs),
}

#[derive(Args, Debug)]
struct LmgScanArgs {
    /// Level splitting.
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Coupling grid; defaults to 0:3:0.01 (0:3:0.05 for --source numerical).
    #[arg(long)]
    lambda: Option<GridSpec>,
    #[arg(long, value_enum, default_value_t = SourceArg::VariationalInf)]
    source: SourceArg,
    /// Particle count for the finite-N sources.
    #[arg(long = "N", default_value_t = 50)]
    particles: u32,
    /// Rank threshold; defaults to 1e-8 (2.5e-2 for --source numerical).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LmgEnergyArgs {
    /// Level splitting.
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Coupling grid.
    #[arg(long, default_value = "0:3:0.05")]
    lambda: GridSpec,
    /// Particle count for the exact column.
    #[arg(long = "N", default_value_t = 20)]
    particles: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point: parse, dispatch, map failures to exit codes
/// (0 success, 1 run/check failure, 2 usage).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Boundary(args) => with_output(args.out.clone(), |w| cmd_boundary(&args, w)),
        Command::Sample(args) => with_output(args.out.clone(), |w| cmd_sample(&args, w)),
        Command::CatSurface(args) => with_output(args.out.clone(), |w| cmd_cat_surface(&args, w)),
        Command::Lmg(LmgCommand::Sweep(args)) => {
            with_output(args.out.clone(), |w| cmd_lmg_sweep(&args, w))
        }
        Command::Lmg(LmgCommand::Qpt(args)) => {
            with_output(args.out.clone(), |w| cmd_lmg_qpt(&args, w))
        }
        Command::Lmg(LmgCommand::Energy(args)) => {
            with_output(args.out.clone(), |w| cmd_lmg_energy(&args, w))
        }
        Command::Selfcheck => return run_selfcheck(),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn with_output(
    path: Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(&p).map_err(Error::Io)?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(Error::Io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush().map_err(Error::Io)
        }
    }
}

fn seed_of(seed: Option<u64>) -> u64 {
    seed.unwrap_or(0)
}

fn family_label(f: &ExtremalFamily) -> &'static str {
    match f.kind() {
        crate::infodiag::FamilyKind::MaxBoundary => "max_boundary",
        crate::infodiag::FamilyKind::MinBoundary => "min_boundary",
        crate::infodiag::FamilyKind::InnerRankCurve => "inner_rank_curve",
    }
}

fn cmd_boundary(args: &BoundaryArgs, w: &mut dyn Write) -> Result<()> {
    if args.n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples per branch, got {}",
            args.n
        )));
    }
    // Resolve everything fallible before the first write so a bad
    // invocation cannot leave a truncated CSV behind.
    let mut families = vec![ExtremalFamily::max_boundary(args.d)?];
    for k in 1..args.d {
        families.push(ExtremalFamily::min_boundary(args.d, k)?);
        families.push(ExtremalFamily::inner_rank_curve(args.d, k)?);
    }

    let mut config = format!(
        "# catdiag boundary --d {} --n {} --seed {}",
        args.d,
        args.n,
        seed_of(args.seed)
    );
    if args.asymptotes {
        config.push_str(" --asymptotes");
    }
    writeln!(w, "{config}")?;
    writeln!(w, "family,k,eps,L,S")?;
    for family in &families {
        let k_cell = match family.kind() {
            crate::infodiag::FamilyKind::MaxBoundary => String::new(),
            _ => family.k().to_string(),
        };
        for eps in family.eps_samples(args.n) {
            let p = boundary_entropies(family, eps)?;
            writeln!(
                w,
                "{},{},{},{},{}",
                family_label(family),
                k_cell,
                csv(eps),
                csv(p.linear),
                csv(p.von_neumann)
            )?;
        }
    }

    if args.asymptotes {
        let regimes = [
            (AsymptoticRegime::PureMax, "asymptote_pure_max"),
            (AsymptoticRegime::PureMin1, "asymptote_pure_min1"),
            (AsymptoticRegime::MixedCorner, "asymptote_mixed_corner"),
        ];
        for (regime, label) in regimes {
            for i in 1..=args.n {
                let l = i as f64 / args.n as f64;
                let s = asymptotic_s_of_l(args.d, regime, l)?;
                writeln!(w, "{label},,,{},{}", csv(l), csv(s))?;
            }
        }
    }
    Ok(())
}

fn cmd_sample(args: &SampleArgs, w: &mut dyn Write) -> Result<()> {
    if args.n < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let seed = seed_of(args.seed);
    // One throwaway draw validates the parameter domain before the
    // first write; the real loop re-seeds from scratch.
    sample_random_spectrum(args.d, args.dof, &mut ChaCha8Rng::seed_from_u64(seed))?;
    writeln!(
        w,
        "# catdiag sample --d {} --n {} --dof {} --seed {seed}",
        args.d, args.n, args.dof
    )?;
    writeln!(w, "L,S,rank")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..args.n {
        let s = sample_random_spectrum(args.d, args.dof, &mut rng)?;
        let p = info_point(&s)?;
        let r = numerical_rank(&s, DEFAULT_RANK_THRESHOLD)?;
        writeln!(w, "{},{},{r}", csv(p.linear), csv(p.von_neumann))?;
    }
    Ok(())
}

fn cat_point(args: &CatSurfaceArgs, a: f64, b: Option<f64>) -> Result<(f64, f64)> {
    let n = match args.particles {
        ParticleCount::Infinite => CatN::Infinite,
        ParticleCount::Finite(n) => CatN::Finite(n),
    };
    let moduli: Vec<f64> = match b {
        Some(b) => vec![a, b],
        None => vec![a],
    };
    let req = CatSpectrumRequest::new(args.levels, args.kept, n, &moduli)?;
    let p = cat_entanglement_entropies(&req)?;
    Ok((p.linear, p.von_neumann))
}

fn cmd_cat_surface(args: &CatSurfaceArgs, w: &mut dyn Write) -> Result<()> {
    if args.stationary && args.levels != 3 {
        return Err(Error::InvalidArgument(
            "the stationary-point curve lives on the three-level surface; \
             --stationary needs --D 3"
                .into(),
        ));
    }
    // Resolve everything fallible before the first write so a bad
    // invocation cannot leave a truncated CSV behind.
    let axis = args.grid.points()?;
    let mut rows: Vec<(f64, Option<f64>, f64, f64)> = Vec::new();
    if args.levels == 2 {
        for &a in &axis {
            let (l, s) = cat_point(args, a, None)?;
            rows.push((a, None, l, s));
        }
    } else {
        for &a in &axis {
            for &b in &axis {
                let (l, s) = cat_point(args, a, Some(b))?;
                rows.push((a, Some(b), l, s));
            }
        }
    }
    let mut overlay: Vec<(f64, Option<f64>, f64, f64)> = Vec::new();
    if args.stationary {
        // Linear sweep through both transitions, then a geometric tail
        // toward the strong-coupling limit.
        let mut couplings: Vec<f64> = (0..=300).map(|i| 0.01 * f64::from(i)).collect();
        let mut lam = 3.0;
        while lam < 1e4 {
            lam *= 1.25;
            couplings.push(lam);
        }
        for lam in couplings {
            let sp = stationary_point(1.0, lam)?;
            let (l, s) = cat_point(args, sp.alpha0, Some(sp.beta0))?;
            overlay.push((sp.alpha0, Some(sp.beta0), l, s));
        }
    }

    let mut config = format!(
        "# catdiag cat-surface --D {} --M {} --N {} --grid {} --seed {}",
        args.levels,
        args.kept,
        args.particles,
        args.grid,
        seed_of(args.seed)
    );
    if args.stationary {
        config.push_str(" --stationary");
    }
    writeln!(w, "{config}")?;
    writeln!(w, "abs_alpha,abs_beta,M,L,S")?;
    let write_row = |w: &mut dyn Write, row: &(f64, Option<f64>, f64, f64)| -> Result<()> {
        let b_cell = row.1.map(csv).unwrap_or_default();
        writeln!(
            w,
            "{},{b_cell},{},{},{}",
            csv(row.0),
            args.kept,
            csv(row.2),
            csv(row.3)
        )?;
        Ok(())
    };
    for row in &rows {
        write_row(w, row)?;
    }
    if args.stationary {
        writeln!(w, "# stationary-curve overlay")?;
        for row in &overlay {
            write_row(w, row)?;
        }
    }
    Ok(())
}

struct ResolvedScan {
    source: ScanSource,
    threshold: f64,
    grid: Vec<f64>,
    config: String,
}

fn resolve_scan(args: &LmgScanArgs, subcommand: &str) -> Result<ResolvedScan> {
    let source = args.source.resolve(args.particles);
    let threshold = args.threshold.unwrap_or(match args.source {
        SourceArg::Numerical => NUMERICAL_RANK_THRESHOLD,
        _ => DEFAULT_RANK_THRESHOLD,
    });
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rank threshold must be a finite non-negative number, got {threshold}"
        )));
    }
    let grid_spec = args.lambda.unwrap_or(GridSpec {
        start: 0.0,
        stop: 3.0,
        step: if args.source == SourceArg::Numerical {
            0.05
        } else {
            0.01
        },
    });
    let mut config = format!(
        "# catdiag lmg {subcommand} --eps {} --lambda {} --source {}",
        args.eps,
        grid_spec,
        args.source.name()
    );
    if args.source.uses_particles() {
        config.push_str(&format!(" --N {}", args.particles));
    }
    config.push_str(&format!(
        " --threshold {} --seed {}",
        threshold,
        seed_of(args.seed)
    ));
    Ok(ResolvedScan {
        source,
        threshold,
        grid: grid_spec.points()?,
        config,
    })
}

fn cmd_lmg_sweep(args: &LmgScanArgs, w: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scan(args, "sweep")?;
    let records = scan(args.eps, &resolved.grid, resolved.source)?;
    writeln!(w, "{}", resolved.config)?;
    writeln!(w, "lambda,rank_m1,rank_m2,L1,S1,L2,S2,energy")?;
    for r in &records {
        let rank1 = numerical_rank(&r.spectrum_m1, resolved.threshold)?;
        let rank2 = numerical_rank(&r.spectrum_m2, resolved.threshold)?;
        let p1 = info_point(&r.spectrum_m1)?;
        let p2 = info_point(&r.spectrum_m2)?;
        let energy = r.energy.map(csv).unwrap_or_default();
        writeln!(
            w,
            "{},{rank1},{rank2},{},{},{},{},{energy}",
            csv(r.lambda),
            csv(p1.linear),
            csv(p1.von_neumann),
            csv(p2.linear),
            csv(p2.von_neumann)
        )?;
    }
    Ok(())
}

fn cmd_lmg_qpt(args: &LmgScanArgs, w: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scan(args, "qpt")?;
    let result = rank_scan(
        args.eps,
        &resolved.grid,
        resolved.source,
        resolved.threshold,
    )?;
    writeln!(w, "{}", resolved.config)?;
    writeln!(w, "M,lambda_jump,rank_before,rank_after")?;
    for (m, jumps) in [(1, &result.jumps_m1), (2, &result.jumps_m2)] {
        for j in jumps {
            writeln!(
                w,
                "{m},{},{},{}",
                csv(j.lambda),
                j.rank_before,
                j.rank_after
            )?;
        }
    }
    Ok(())
}

fn cmd_lmg_energy(args: &LmgEnergyArgs, w: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for lam in args.lambda.points()? {
        let analytic = ground_energy_density(args.eps, lam)?;
        let p = LmgParams::new(args.particles, args.eps, lam)?;
        let (numeric, _) = solve_ground_state(&p)?;
        rows.push((lam, analytic, numeric));
    }
    writeln!(
        w,
        "# catdiag lmg energy --eps {} --lambda {} --N {} --seed {}",
        args.eps,
        args.lambda,
        args.particles,
        seed_of(args.seed)
    )?;
    writeln!(w, "lambda,E0_analytic,E_numeric")?;
    for (lam, analytic, numeric) in rows {
        writeln!(w, "{},{},{}", csv(lam), csv(analytic), csv(numeric))?;
    }
    Ok(())
}

/// One named check: Ok(()) prints PASS, Err(detail) prints FAIL.
type Check = (&'static str, fn() -> std::result::Result<(), String>);

fn check_err<E: std::fmt::Display>(e: E) -> String {
    format!("{e}")
}

fn approx(tag: &str, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{tag}: got {got}, want {want} within {tol}"))
    }
}

fn selfcheck_boundary() -> std::result::Result<(), String> {
    let max = ExtremalFamily::max_boundary(5).map_err(check_err)?;
    let origin = boundary_entropies(&max, 0.0).map_err(check_err)?;
    approx("max boundary at eps=0: L", origin.linear, 1.0, 1e-15)?;
    approx("max boundary at eps=0: S", origin.von_neumann, 1.0, 1e-15)?;
    let pure = boundary_entropies(&max, 1.0 - 1e-12).map_err(check_err)?;
    if pure.linear > 1e-10 || pure.von_neumann > 1e-9 {
        return Err(format!(
            "pure corner not reached: ({}, {})",
            pure.linear, pure.von_neumann
        ));
    }
    for k in 1..5 {
        let min = ExtremalFamily::min_boundary(5, k).map_err(check_err)?;
        for eps in min.eps_samples(17) {
            let p = boundary_entropies(&min, eps).map_err(check_err)?;
            let (lo, hi) = von_neumann_bounds(5, p.linear).map_err(check_err)?;
            if p.von_neumann < lo - 1e-9 || p.von_neumann > hi + 1e-9 {
                return Err(format!(
                    "min branch k={k} point ({}, {}) outside [{lo}, {hi}]",
                    p.linear, p.von_neumann
                ));
            }
        }
    }
    Ok(())
}

fn selfcheck_asymptotes() -> std::result::Result<(), String> {
    let at_one = asymptotic_s_of_l(5, AsymptoticRegime::MixedCorner, 1.0).map_err(check_err)?;
    approx("mixed-corner asymptote at L=1", at_one, 1.0, 0.0)?;
    let l = 1e-3;
    let upper = asymptotic_s_of_l(5, AsymptoticRegime::PureMax, l).map_err(check_err)?;
    let lower = asymptotic_s_of_l(5, AsymptoticRegime::PureMin1, l).map_err(check_err)?;
    if !(lower < upper && lower > 0.0) {
        return Err(format!(
            "pure-corner asymptote order broken: {lower} vs {upper}"
        ));
    }
    let (_, s_max) = von_neumann_bounds(5, l).map_err(check_err)?;
    approx(
        "upper asymptote tracks the boundary at small L",
        upper,
        s_max,
        1e-4,
    )
}

fn selfcheck_random_containment() -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..2000 {
        let s = sample_random_spectrum(5, 2, &mut rng).map_err(check_err)?;
        let p = info_point(&s).map_err(check_err)?;
        let (lo, hi) = von_neumann_bounds(5, p.linear).map_err(check_err)?;
        if p.von_neumann < lo - 1e-9 || p.von_neumann > hi + 1e-9 {
            return Err(format!(
                "sample {i} at ({}, {}) escapes [{lo}, {hi}]",
                p.linear, p.von_neumann
            ));
        }
        let rank = numerical_rank(&s, DEFAULT_RANK_THRESHOLD).map_err(check_err)?;
        let floor = minimal_rank_region(5, p).map_err(check_err)?;
        if rank < floor {
            return Err(format!(
                "sample {i}: rank {rank} below region floor {floor}"
            ));
        }
    }
    Ok(())
}

fn selfcheck_coherent_separability() -> std::result::Result<(), String> {
    use crate::fock::{dscs, enumerate_basis, PhasePoint};
    let basis = enumerate_basis(3, 10).map_err(check_err)?;
    for (a, b) in [(0.0, 0.0), (0.8, 0.0), (0.6, 1.1)] {
        let z = PhasePoint::qutrit(crate::C64::new(a, 0.0), crate::C64::new(b, 0.0));
        let state = dscs(&basis, &z).map_err(check_err)?;
        let m = rdm1(&state).map_err(check_err)?;
        let p = info_point(m.spectrum()).map_err(check_err)?;
        if p.linear > 1e-10 || p.von_neumann > 1e-10 {
            return Err(format!(
                "coherent ({a}, {b}) one-particle marginal is mixed: ({}, {})",
                p.linear, p.von_neumann
            ));
        }
    }
    Ok(())
}

fn selfcheck_cat_marginals() -> std::result::Result<(), String> {
    use crate::fock::{dcat, enumerate_basis, PhasePoint};
    let basis = enumerate_basis(3, 8).map_err(check_err)?;
    let cat = dcat(
        &basis,
        &PhasePoint::qutrit(crate::C64::new(0.9, 0.0), crate::C64::new(0.4, 0.0)),
    )
    .map_err(check_err)?;
    let numeric = rdm2(&cat).map_err(check_err)?;
    let req = CatSpectrumRequest::new(3, 2, CatN::Finite(8), &[0.9, 0.4]).map_err(check_err)?;
    let closed = crate::rdm::cat_rdm2_spectrum(&req).map_err(check_err)?;
    for (i, (a, b)) in numeric
        .spectrum()
        .values()
        .iter()
        .zip(closed.values())
        .enumerate()
    {
        approx(&format!("two-particle cat eigenvalue {i}"), *a, *b, 1e-10)?;
    }
    Ok(())
}

fn selfcheck_hamiltonian_symmetries() -> std::result::Result<(), String> {
    use crate::fock::enumerate_basis;
    use crate::lmg::build_hamiltonian;
    let p = LmgParams::new(6, 1.0, 1.3).map_err(check_err)?;
    let h = build_hamiltonian(&p).map_err(check_err)?;
    let basis = enumerate_basis(3, 6).map_err(check_err)?;
    for r in 0..h.dim() {
        for c in 0..h.dim() {
            if h.get(r, c) != h.get(c, r).conj() {
                return Err(format!("H not exactly symmetric at ({r}, {c})"));
            }
        }
    }
    // [H, parity] = 0 exactly in structure: H never couples states of
    // different level-occupation parity.
    for r in 0..h.dim() {
        for c in 0..h.dim() {
            if h.get(r, c).norm() > 0.0 {
                let (sr, sc) = (basis.state(r), basis.state(c));
                if sr[1] % 2 != sc[1] % 2 || sr[2] % 2 != sc[2] % 2 {
                    return Err(format!("H couples different parity sectors at ({r}, {c})"));
                }
            }
        }
    }
    Ok(())
}

fn selfcheck_stationary_identity() -> std::result::Result<(), String> {
    use rand::Rng as _;
    approx(
        "phase I energy",
        ground_energy_density(1.0, 0.25).map_err(check_err)?,
        -1.0,
        0.0,
    )?;
    approx(
        "phase II energy",
        ground_energy_density(1.0, 1.0).map_err(check_err)?,
        -1.125,
        1e-15,
    )?;
    approx(
        "phase III energy",
        ground_energy_density(1.0, 3.0).map_err(check_err)?,
        -13.0 / 6.0,
        1e-15,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let eps = rng.gen_range(0.2..2.0);
        let lam = rng.gen_range(0.0..5.0);
        let sp = stationary_point(eps, lam).map_err(check_err)?;
        let direct = crate::lmg::energy_surface(
            crate::C64::new(sp.alpha0, 0.0),
            crate::C64::new(sp.beta0, 0.0),
            eps,
            lam,
        )
        .map_err(check_err)?;
        approx(
            &format!("surface vs closed form at eps={eps}, lam={lam}"),
            direct,
            ground_energy_density(eps, lam).map_err(check_err)?,
            1e-12,
        )?;
    }
    Ok(())
}

fn selfcheck_variational_bound() -> std::result::Result<(), String> {
    for lam in [0.3, 1.0, 2.0] {
        let p = LmgParams::new(10, 1.0, lam).map_err(check_err)?;
        let (exact, _) = solve_ground_state(&p).map_err(check_err)?;
        let cat = variational_cat_state(&p).map_err(check_err)?;
        let trial = energy_expectation(&p, &cat).map_err(check_err)?;
        if trial < exact - 1e-10 {
            return Err(format!(
                "variational bound broken at lam={lam}: {trial} < {exact}"
            ));
        }
    }
    let near = |n: u32| -> std::result::Result<f64, String> {
        let p = LmgParams::new(n, 1.0, 1.0).map_err(check_err)?;
        Ok((solve_ground_state(&p).map_err(check_err)?.0 + 1.125).abs())
    };
    if near(20)? >= near(10)? {
        return Err("finite-size energy gap not shrinking from N=10 to N=20".into());
    }
    Ok(())
}

fn selfcheck_rank_jumps() -> std::result::Result<(), String> {
    let grid: Vec<f64> = (0..=300).map(|i| 0.01 * f64::from(i)).collect();
    let result = rank_scan(
        1.0,
        &grid,
        ScanSource::VariationalInf,
        DEFAULT_RANK_THRESHOLD,
    )
    .map_err(check_err)?;
    if result.jumps_m1.len() != 2 || result.jumps_m2.len() != 2 {
        return Err(format!(
            "expected 2 jumps per marginal, got {} and {}",
            result.jumps_m1.len(),
            result.jumps_m2.len()
        ));
    }
    approx("first jump", result.jumps_m1[0].lambda, 0.5, 0.011)?;
    approx("second jump", result.jumps_m1[1].lambda, 1.5, 0.011)?;
    let seq1 = (result.rank_m1[0], result.jumps_m1[1].rank_after);
    let seq2 = (result.rank_m2[0], result.jumps_m2[1].rank_after);
    if seq1 != (1, 3) || seq2 != (1, 4) {
        return Err(format!("rank sequences broke: {seq1:?}, {seq2:?}"));
    }
    Ok(())
}

fn selfcheck_trajectory_endpoints() -> std::result::Result<(), String> {
    let one = crate::lmg::info_trajectory(1.0, &[0.1], ScanSource::VariationalInf, 1)
        .map_err(check_err)?;
    approx("origin L", one[0].linear, 0.0, 1e-12)?;
    approx("origin S", one[0].von_neumann, 0.0, 1e-12)?;
    let end1 = crate::lmg::info_trajectory(1.0, &[1e6], ScanSource::VariationalInf, 1)
        .map_err(check_err)?;
    approx("strong-coupling L1", end1[0].linear, 1.0, 1e-5)?;
    approx("strong-coupling S1", end1[0].von_neumann, 1.0, 1e-5)?;
    let end2 = crate::lmg::info_trajectory(1.0, &[1e6], ScanSource::VariationalInf, 2)
        .map_err(check_err)?;
    approx("strong-coupling L2", end2[0].linear, 5.0 / 6.0, 1e-3)?;
    let s2 = 5.0 / 6.0 - 2f64.ln() / (3.0 * 3f64.ln());
    approx("strong-coupling S2", end2[0].von_neumann, s2, 1e-3)
}

fn selfcheck_csv_determinism() -> std::result::Result<(), String> {
    let args = SampleArgs {
        d: 3,
        n: 200,
        dof: 2,
        seed: Some(7),
        out: None,
    };
    let mut first = Vec::new();
    let mut second = Vec::new();
    cmd_sample(&args, &mut first).map_err(check_err)?;
    cmd_sample(&args, &mut second).map_err(check_err)?;
    if first != second {
        return Err("same seed produced different bytes".into());
    }
    Ok(())
}

fn run_selfcheck() -> i32 {
    let checks: [Check; 11] = [
        ("boundary-endpoints", selfcheck_boundary),
        ("asymptotic-curves", selfcheck_asymptotes),
        ("random-spectrum-containment", selfcheck_random_containment),
        ("coherent-separability", selfcheck_coherent_separability),
        ("cat-marginal-closed-forms", selfcheck_cat_marginals),
        ("hamiltonian-symmetries", selfcheck_hamiltonian_symmetries),
        ("stationary-identity", selfcheck_stationary_identity),
        ("variational-bound", selfcheck_variational_bound),
        ("variational-rank-jumps", selfcheck_rank_jumps),
        ("trajectory-endpoints", selfcheck_trajectory_endpoints),
        ("csv-determinism", selfcheck_csv_determinism),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failures += 1;
            }
        }
    }
    if failures == 0 {
        0
    } else {
        eprintln!("{failures} check(s) failed");
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(buf: &[u8]) -> Vec<String> {
        String::from_utf8(buf.to_vec())
            .unwrap()
            .lines()
            .map(str::to_owned)
            .collect()
    }

    #[test]
    fn grid_spec_parses_and_expands() {
        let g: GridSpec = "0:3:0.5".parse().unwrap();
        assert_eq!(g.points().unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        let single: GridSpec = "1:1:0.1".parse().unwrap();
        assert_eq!(single.points().unwrap(), vec![1.0]);
        assert_eq!(g.to_string(), "0:3:0.5");
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("a:b:c".parse::<GridSpec>().is_err());
        assert!(GridSpec {
            start: 0.0,
            stop: 1.0,
            step: -0.1
        }
        .points()
        .is_err());
        assert!(GridSpec {
            start: 2.0,
            stop: 1.0,
            step: 0.1
        }
        .points()
        .is_err());
    }

    #[test]
    fn particle_count_parses_inf_and_integers() {
        assert_eq!(
            "inf".parse::<ParticleCount>().unwrap(),
            ParticleCount::Infinite
        );
        assert_eq!(
            "50".parse::<ParticleCount>().unwrap(),
            ParticleCount::Finite(50)
        );
        assert!("-3".parse::<ParticleCount>().is_err());
        assert!("many".parse::<ParticleCount>().is_err());
    }

    #[test]
    fn boundary_csv_shape_and_config_line() {
        let args = BoundaryArgs {
            d: 5,
            n: 10,
            asymptotes: false,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_boundary(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(rows[0], "# catdiag boundary --d 5 --n 10 --seed 0");
        assert_eq!(rows[1], "family,k,eps,L,S");
        // 1 max + 4 min + 4 inner branches, 10 samples each.
        assert_eq!(rows.len(), 2 + 9 * 10);
        assert!(rows[2].starts_with("max_boundary,,0.0000000000000000e0,"));
        let mixed_corner = rows[2].split(',').collect::<Vec<_>>();
        assert_eq!(mixed_corner[3], "1.0000000000000000e0");
        assert_eq!(mixed_corner[4], "1.0000000000000000e0");
    }

    #[test]
    fn boundary_asymptote_rows_are_appended() {
        let args = BoundaryArgs {
            d: 5,
            n: 8,
            asymptotes: true,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_boundary(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(rows.len(), 2 + 9 * 8 + 3 * 8);
        assert!(rows[0].ends_with("--asymptotes"));
        let last = rows.last().unwrap();
        assert!(last.starts_with("asymptote_mixed_corner,,,1.0000000000000000e0,"));
    }

    #[test]
    fn sample_csv_is_deterministic_and_in_bounds() {
        let args = SampleArgs {
            d: 4,
            n: 50,
            dof: 2,
            seed: Some(3),
            out: None,
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        cmd_sample(&args, &mut a).unwrap();
        cmd_sample(&args, &mut b).unwrap();
        assert_eq!(a, b);
        let rows = lines(&a);
        assert_eq!(rows[0], "# catdiag sample --d 4 --n 50 --dof 2 --seed 3");
        assert_eq!(rows[1], "L,S,rank");
        assert_eq!(rows.len(), 52);
        for row in &rows[2..] {
            let cells: Vec<&str> = row.split(',').collect();
            let l: f64 = cells[0].parse().unwrap();
            let s: f64 = cells[1].parse().unwrap();
            let rank: usize = cells[2].parse().unwrap();
            assert!((0.0..=1.0).contains(&l) && (0.0..=1.0).contains(&s));
            assert!((1..=4).contains(&rank));
        }
    }

    #[test]
    fn cat_surface_reference_points() {
        let args = CatSurfaceArgs {
            levels: 3,
            kept: 1,
            particles: ParticleCount::Infinite,
            grid: "1:1:0.5".parse().unwrap(),
            stationary: false,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_cat_surface(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(rows.len(), 3);
        let cells: Vec<&str> = rows[2].split(',').collect();
        let l: f64 = cells[3].parse().unwrap();
        let s: f64 = cells[4].parse().unwrap();
        assert!((l - 1.0).abs() < 1e-12, "L at (1,1): {l}");
        assert!((s - 1.0).abs() < 1e-12, "S at (1,1): {s}");

        let args2 = CatSurfaceArgs { kept: 2, ..args };
        let mut buf2 = Vec::new();
        cmd_cat_surface(&args2, &mut buf2).unwrap();
        let rows2 = lines(&buf2);
        let cells2: Vec<&str> = rows2[2].split(',').collect();
        let l2: f64 = cells2[3].parse().unwrap();
        assert!((l2 - 5.0 / 6.0).abs() < 1e-12, "L2 at (1,1): {l2}");
    }

    #[test]
    fn cat_surface_origin_is_pure_and_d2_drops_beta() {
        let args = CatSurfaceArgs {
            levels: 3,
            kept: 1,
            particles: ParticleCount::Infinite,
            grid: "0:0:1".parse().unwrap(),
            stationary: false,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_cat_surface(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        let cells: Vec<&str> = rows[2].split(',').collect();
        assert_eq!(cells[3], "0.0000000000000000e0");
        assert_eq!(cells[4], "0.0000000000000000e0");

        let qubit = CatSurfaceArgs {
            levels: 2,
            particles: ParticleCount::Finite(6),
            grid: "0.7:0.7:1".parse().unwrap(),
            ..args
        };
        let mut buf2 = Vec::new();
        cmd_cat_surface(&qubit, &mut buf2).unwrap();
        let rows2 = lines(&buf2);
        let cells2: Vec<&str> = rows2[2].split(',').collect();
        assert_eq!(cells2[1], "", "qubit surface has no second modulus");
    }

    #[test]
    fn stationary_overlay_requires_three_levels() {
        let args = CatSurfaceArgs {
            levels: 2,
            kept: 1,
            particles: ParticleCount::Infinite,
            grid: "0:1:0.5".parse().unwrap(),
            stationary: true,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        assert!(cmd_cat_surface(&args, &mut buf).is_err());
    }

    #[test]
    fn lmg_qpt_reports_both_variational_jumps() {
        let args = LmgScanArgs {
            eps: 1.0,
            lambda: Some("0:3:0.05".parse().unwrap()),
            source: SourceArg::VariationalInf,
            particles: 50,
            threshold: None,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_lmg_qpt(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(rows[1], "M,lambda_jump,rank_before,rank_after");
        assert_eq!(rows.len(), 6);
        let first: Vec<&str> = rows[2].split(',').collect();
        assert_eq!(first[0], "1");
        let lam: f64 = first[1].parse().unwrap();
        assert!((lam - 0.525).abs() < 1e-12, "first m1 jump at {lam}");
        let last: Vec<&str> = rows[5].split(',').collect();
        assert_eq!((last[0], last[2], last[3]), ("2", "2", "4"));
    }

    #[test]
    fn lmg_sweep_emits_blank_energy_for_the_analytic_source() {
        let args = LmgScanArgs {
            eps: 1.0,
            lambda: Some("0:1:0.5".parse().unwrap()),
            source: SourceArg::VariationalInf,
            particles: 50,
            threshold: None,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_lmg_sweep(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(
            rows[0],
            "# catdiag lmg sweep --eps 1 --lambda 0:1:0.5 --source variational-inf \
             --threshold 0.00000001 --seed 0"
        );
        assert_eq!(rows[1], "lambda,rank_m1,rank_m2,L1,S1,L2,S2,energy");
        assert_eq!(rows.len(), 5);
        assert!(rows[2].ends_with(','), "analytic energy cell must be empty");
        let cells: Vec<&str> = rows[2].split(',').collect();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[1], "1");
        assert_eq!(cells[2], "1");
    }

    #[test]
    fn lmg_sweep_finite_source_populates_energy() {
        let args = LmgScanArgs {
            eps: 1.0,
            lambda: Some("1:1:1".parse().unwrap()),
            source: SourceArg::Numerical,
            particles: 10,
            threshold: None,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_lmg_sweep(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert!(rows[0].contains("--source numerical --N 10 --threshold 0.025"));
        let cells: Vec<&str> = rows[2].split(',').collect();
        // Finite N approaches the density -1.125 from below.
        let energy: f64 = cells[7].parse().unwrap();
        assert!(
            energy < -1.125 && energy > -1.35,
            "N=10 ground energy {energy}"
        );
    }

    #[test]
    fn lmg_energy_reference_row() {
        let args = LmgEnergyArgs {
            eps: 1.0,
            lambda: "0.25:0.25:1".parse().unwrap(),
            particles: 8,
            seed: None,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_lmg_energy(&args, &mut buf).unwrap();
        let rows = lines(&buf);
        assert_eq!(rows[1], "lambda,E0_analytic,E_numeric");
        let cells: Vec<&str> = rows[2].split(',').collect();
        let analytic: f64 = cells[1].parse().unwrap();
        assert_eq!(analytic, -1.0);
        let numeric: f64 = cells[2].parse().unwrap();
        assert!(numeric <= -1.0, "exact energy sits below the density");
    }
}
