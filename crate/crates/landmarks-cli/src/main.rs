//! Command-line front end: parse problem JSON, dispatch to the library,
//! emit deterministic CSV/JSON.

mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use landmarks::cometric::{Euclidean, HalfSpace, LandmarkCometric, Sphere};
use landmarks::curvature;
use landmarks::geodesics;
use landmarks::kernels::{Kernel, MaternOrder, RadialKernel};
use landmarks::landmark_curvature;
use landmarks::manifold::{Covector, Landmarks};
use landmarks::sampling::random_section;
use landmarks::two_point;
use landmarks::Error as LibError;

use output::{fmt17, report_json, write_text, CsvBuilder};
use problem::{kernel_from_arg, ProblemSpec};

/// CLI failure with its exit code: 1 malformed input, 2 degenerate
/// configuration, 3 oracle residual above threshold.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn degenerate(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn residual(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<LibError> for CliError {
    fn from(err: LibError) -> Self {
        match err {
            LibError::InvalidKernel(_) | LibError::Shape(_) | LibError::Support(_) => {
                CliError::input(err.to_string())
            }
            LibError::Degenerate(_)
            | LibError::IntegrationStopped { .. }
            | LibError::TurningPoint(_)
            | LibError::Quadrature(_)
            | LibError::Inconclusive(_) => CliError::degenerate(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "landmarks",
    about = "Geodesics and sectional curvature of kernel metrics on landmark configurations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonIo {
    /// Problem description JSON file
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Kernel JSON, inline or a file path; overrides the problem's kernel
    #[arg(long)]
    kernel_json: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate γ, its derivatives, and the two-point curvature
    /// coefficients over a ρ grid
    KernelTable {
        #[command(flatten)]
        io: CommonIo,
        /// Kernel family (gaussian, matern, cauchy)
        #[arg(long)]
        family: Option<String>,
        /// Kernel length constant
        #[arg(long)]
        scale: Option<f64>,
        /// Matérn order (1/2, 3/2, 5/2, 7/2)
        #[arg(long)]
        order: Option<String>,
        /// Largest ρ in the table
        #[arg(long)]
        rho_max: Option<f64>,
        /// Number of grid rows
        #[arg(long, default_value_t = 400)]
        rho_count: usize,
    },
    /// Curvature report for a configuration and a pair of covectors
    Curvature {
        #[command(flatten)]
        io: CommonIo,
    },
    /// Shoot a geodesic and record the path with conservation diagnostics
    Geodesic {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Advect passive points under the flow of a geodesic
    Advect {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Conserved quantities, classification and the reduced radial solution
    /// for a two-landmark geodesic
    TwoPoint {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Radial refinement tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Cross-check the cometric-side curvature against the classical route
    /// on built-in models and randomized landmark sections
    Oracle {
        /// Randomized landmark sections to draw
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Seed for the ChaCha8 generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest admissible relative residual
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::KernelTable {
            io,
            family,
            scale,
            order,
            rho_max,
            rho_count,
        } => kernel_table(io, family, scale, order, rho_max, rho_count),
        Command::Curvature { io } => curvature_command(io),
        Command::Geodesic { io, t_end, steps } => geodesic_command(io, t_end, steps),
        Command::Advect { io, t_end, steps } => advect_command(io, t_end, steps),
        Command::TwoPoint {
            io,
            t_end,
            steps,
            tol,
        } => two_point_command(io, t_end, steps, tol),
        Command::Oracle {
            trials,
            seed,
            tol,
            out,
        } => oracle_command(trials, seed, tol, out),
    }
}

fn load_problem(io: &CommonIo) -> Result<Option<ProblemSpec>, CliError> {
    io.problem.as_deref().map(ProblemSpec::load).transpose()
}

fn resolve_kernel(io: &CommonIo, spec: Option<&ProblemSpec>) -> Result<Kernel, CliError> {
    if let Some(arg) = &io.kernel_json {
        return kernel_from_arg(arg);
    }
    if let Some(kernel) = spec.and_then(|s| s.kernel) {
        kernel
            .validate()
            .map_err(|e| CliError::input(e.to_string()))?;
        return Ok(kernel);
    }
    Err(CliError::input(
        "no kernel given; use --kernel-json or a problem file with a \"kernel\" field",
    ))
}

fn rows_to_landmarks(rows: &Option<Vec<Vec<f64>>>, what: &str) -> Result<Landmarks, CliError> {
    let rows = rows
        .as_ref()
        .ok_or_else(|| CliError::input(format!("problem is missing \"{what}\"")))?;
    Ok(Landmarks::from_rows(rows)?)
}

fn rows_to_covector(rows: &Option<Vec<Vec<f64>>>, what: &str) -> Result<Covector, CliError> {
    let rows = rows
        .as_ref()
        .ok_or_else(|| CliError::input(format!("problem is missing \"{what}\"")))?;
    Ok(Covector::from_rows(rows)?)
}

fn kernel_table(
    io: CommonIo,
    family: Option<String>,
    scale: Option<f64>,
    order: Option<String>,
    rho_max: Option<f64>,
    rho_count: usize,
) -> Result<(), CliError> {
    let kernel = if io.kernel_json.is_some() {
        resolve_kernel(&io, None)?
    } else {
        let family = family
            .ok_or_else(|| CliError::input("kernel-table needs --family or --kernel-json"))?;
        let scale = scale.unwrap_or(1.0);
        match family.as_str() {
            "gaussian" => Kernel::gaussian(scale)?,
            "cauchy" => Kernel::cauchy(scale)?,
            "matern" => {
                let order = order.ok_or_else(|| CliError::input("matern kernel needs --order"))?;
                Kernel::matern(scale, MaternOrder::parse(&order)?)?
            }
            other => {
                return Err(CliError::input(format!(
                    "unknown kernel family {other:?} (gaussian, matern, cauchy)"
                )))
            }
        }
    };
    if rho_count == 0 {
        return Err(CliError::input("--rho-count must be positive"));
    }
    let rho_max = rho_max.unwrap_or(4.0 * kernel.scale());
    if !rho_max.is_finite() || rho_max <= 0.0 {
        return Err(CliError::input("--rho-max must be positive"));
    }

    let header: Vec<String> = [
        "rho", "gamma", "dgamma", "ddgamma", "k1", "k2", "k3", "k4", "coefT1", "coefT2", "coefT3",
        "coefT4", "coefT5", "K_L2R1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut csv = CsvBuilder::new(&header);
    for i in 1..=rho_count {
        let rho = rho_max * i as f64 / rho_count as f64;
        let (g, dg, ddg) = landmarks::kernels::gamma_derivs(&kernel, rho);
        let k = two_point::k_coefficients(&kernel, rho);
        let coefs = two_point::t_coefficients(&k);
        csv.row(&[
            rho,
            g,
            dg,
            ddg,
            k.k1,
            k.k2,
            k.k3,
            k.k4,
            coefs[0],
            coefs[1],
            coefs[2],
            coefs[3],
            coefs[4],
            two_point::curvature_l2r1(&kernel, rho),
        ]);
    }
    write_text(io.out.as_deref(), &csv.finish())
}

fn curvature_command(io: CommonIo) -> Result<(), CliError> {
    let spec = load_problem(&io)?.ok_or_else(|| CliError::input("curvature needs --problem"))?;
    let kernel = resolve_kernel(&io, Some(&spec))?;
    spec.require_exact_matching("curvature")?;
    let landmarks = rows_to_landmarks(&spec.q, "q")?;
    let alpha = rows_to_covector(&spec.alpha, "alpha")?;
    let beta = rows_to_covector(&spec.beta, "beta")?;
    let report = landmark_curvature::curvature_terms(&landmarks, &kernel, &alpha, &beta)?;
    let out = io.out.as_deref().or(spec.out.as_deref());
    write_text(out, &(report_json(&report) + "\n"))
}

fn geodesic_command(
    io: CommonIo,
    t_end: Option<f64>,
    steps: Option<usize>,
) -> Result<(), CliError> {
    let spec = load_problem(&io)?.ok_or_else(|| CliError::input("geodesic needs --problem"))?;
    let kernel = resolve_kernel(&io, Some(&spec))?;
    spec.require_exact_matching("geodesic")?;
    let landmarks = rows_to_landmarks(&spec.q, "q")?;
    let p = rows_to_covector(&spec.p, "p")?;
    let t_end = t_end.or(spec.t_end).unwrap_or(1.0);
    let steps = steps.or(spec.steps).unwrap_or(1000);

    let path = geodesics::integrate(&landmarks, &p, &kernel, t_end, steps)?;

    let (n, d) = (landmarks.count(), landmarks.dim());
    let mut header = vec!["t".to_string()];
    for a in 1..=n {
        for i in 1..=d {
            header.push(format!("q_{a}_{i}"));
        }
    }
    for a in 1..=n {
        for i in 1..=d {
            header.push(format!("p_{a}_{i}"));
        }
    }
    header.push("H".to_string());

    let mut csv = CsvBuilder::new(&header);
    for idx in 0..path.times.len() {
        let mut row = Vec::with_capacity(2 + 2 * n * d);
        row.push(path.times[idx]);
        for a in 0..n {
            for i in 0..d {
                row.push(path.q_samples[idx][(a, i)]);
            }
        }
        for a in 0..n {
            for i in 0..d {
                row.push(path.p_samples[idx][(a, i)]);
            }
        }
        row.push(path.hamiltonian_samples[idx]);
        csv.row(&row);
    }

    let summary = format!(
        "{{\"h_initial\":{},\"h_final\":{},\"h_drift\":{},\"momentum_drift\":{}}}\n",
        fmt17(path.hamiltonian_samples[0]),
        fmt17(*path.hamiltonian_samples.last().unwrap()),
        fmt17(path.hamiltonian_drift()),
        fmt17(path.momentum_drift()),
    );

    let out = io.out.as_deref().or(spec.out.as_deref());
    write_text(out, &csv.finish())?;
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn advect_command(io: CommonIo, t_end: Option<f64>, steps: Option<usize>) -> Result<(), CliError> {
    let spec = load_problem(&io)?.ok_or_else(|| CliError::input("advect needs --problem"))?;
    let kernel = resolve_kernel(&io, Some(&spec))?;
    spec.require_exact_matching("advect")?;
    let landmarks = rows_to_landmarks(&spec.q, "q")?;
    let p = rows_to_covector(&spec.p, "p")?;
    let t_end = t_end.or(spec.t_end).unwrap_or(1.0);
    let steps = steps.or(spec.steps).unwrap_or(1000);

    let passive_rows = match (&spec.passive, &spec.grid) {
        (Some(rows), None) => rows.clone(),
        (None, Some(grid)) => {
            if landmarks.dim() != 2 {
                return Err(CliError::input("grid specs need a two-dimensional problem"));
            }
            grid.points()?
        }
        (Some(_), Some(_)) => {
            return Err(CliError::input(
                "give either \"passive\" or \"grid\", not both",
            ))
        }
        (None, None) => {
            return Err(CliError::input(
                "advect needs \"passive\" points or a \"grid\"",
            ))
        }
    };
    if passive_rows.is_empty() || passive_rows.iter().any(|r| r.len() != landmarks.dim()) {
        return Err(CliError::input("passive points must be M x D"));
    }
    let flat: Vec<f64> = passive_rows.iter().flatten().copied().collect();
    let passive = DMatrix::from_row_slice(passive_rows.len(), landmarks.dim(), &flat);

    let path = geodesics::integrate(&landmarks, &p, &kernel, t_end, steps)?;
    let trajectories = geodesics::advect(&path, &kernel, &passive);

    let mut header = vec!["id".to_string(), "t".to_string()];
    for i in 1..=landmarks.dim() {
        header.push(format!("x_{i}"));
    }
    let mut csv = CsvBuilder::new(&header);
    for (idx, sample) in trajectories.iter().enumerate() {
        for m in 0..sample.nrows() {
            let mut row = vec![m as f64, path.times[idx]];
            for i in 0..sample.ncols() {
                row.push(sample[(m, i)]);
            }
            csv.row(&row);
        }
    }
    let out = io.out.as_deref().or(spec.out.as_deref());
    write_text(out, &csv.finish())
}

fn two_point_command(
    io: CommonIo,
    t_end: Option<f64>,
    steps: Option<usize>,
    tol: Option<f64>,
) -> Result<(), CliError> {
    let spec = load_problem(&io)?.ok_or_else(|| CliError::input("two-point needs --problem"))?;
    let kernel = resolve_kernel(&io, Some(&spec))?;
    spec.require_exact_matching("two-point")?;
    let landmarks = rows_to_landmarks(&spec.q, "q")?;
    let p = rows_to_covector(&spec.p, "p")?;
    if landmarks.count() != 2 || p.0.nrows() != 2 {
        return Err(CliError::input("two-point needs exactly two landmarks"));
    }
    let t_end = t_end.or(spec.t_end).unwrap_or(1.0);
    let steps = steps.or(spec.steps).unwrap_or(2000);
    let tol = tol.or(spec.tol).unwrap_or(1e-9);

    let state = two_point::to_mean_diff(
        &landmarks.point(0),
        &landmarks.point(1),
        &p.row(0),
        &p.row(1),
    )?;
    let cons = two_point::conserved(&state, &kernel);
    let class = two_point::classify(&state, &kernel)?;
    let sol = two_point::solve_two_point(&state, &kernel, t_end, tol)?;

    // residual of the reduction against direct Hamiltonian integration
    let path = geodesics::integrate(&landmarks, &p, &kernel, t_end, steps)?;
    let mut residual = 0.0f64;
    for (i, &t) in path.times.iter().enumerate() {
        let (r1, r2) = sol.positions_at(t);
        let qs = &path.q_samples[i];
        residual = residual.max((r1 - qs.row(0).transpose()).norm());
        residual = residual.max((r2 - qs.row(1).transpose()).norm());
    }

    let d = landmarks.dim();
    let mut header = vec!["t".to_string(), "rho".to_string(), "theta".to_string()];
    for i in 1..=d {
        header.push(format!("qbar_{i}"));
    }
    let mut csv = CsvBuilder::new(&header);
    for i in 0..=steps {
        let t = t_end * i as f64 / steps as f64;
        let mut row = vec![t, sol.rho_at(t), sol.theta_at(t)];
        let qbar = sol.qbar_at(t);
        for j in 0..d {
            row.push(qbar[j]);
        }
        csv.row(&row);
    }

    let pbar_json = cons
        .pbar
        .iter()
        .map(|v| fmt17(*v))
        .collect::<Vec<_>>()
        .join(",");
    let summary = format!(
        "{{\"energy\":{},\"pbar\":[{}],\"omega\":{},\"classification\":\"{}\",\"quadrature_vs_ode_residual\":{}}}\n",
        fmt17(cons.energy),
        pbar_json,
        fmt17(cons.omega),
        class.as_str(),
        fmt17(residual),
    );

    let out = io.out.as_deref().or(spec.out.as_deref());
    write_text(out, &csv.finish())?;
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn oracle_command(
    trials: usize,
    seed: u64,
    tol: f64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let mut max_residual = 0.0f64;

    fn check<M: landmarks::cometric::Cometric + ?Sized>(
        model: &M,
        x: &[f64],
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> Result<f64, CliError> {
        let fast = curvature::cometric_numerator(model, x, a, b)?;
        let classical = curvature::classical_numerator(model, x, a, b)?;
        Ok((fast - classical).abs() / (1.0 + classical.abs()))
    }

    // built-in constant-curvature models, with their forced values
    for radius in [0.5, 1.0, 2.0] {
        let model = Sphere { radius, dim: 2 };
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let x = [rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)];
            let a = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            worst = worst.max(check(&model, &x, &a, &b)?);
            let rep = curvature::cometric_report(&model, &x, &a, &b)?;
            let expected = 1.0 / (radius * radius);
            worst = worst.max((rep.sectional.unwrap_or(f64::NAN) - expected).abs());
        }
        max_residual = max_residual.max(worst);
        lines.push(format!("sphere r={radius}: residual {}", fmt17(worst)));
    }
    {
        let model = HalfSpace { dim: 2 };
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)];
            let a = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            worst = worst.max(check(&model, &x, &a, &b)?);
            let rep = curvature::cometric_report(&model, &x, &a, &b)?;
            worst = worst.max((rep.sectional.unwrap_or(f64::NAN) + 1.0).abs());
        }
        max_residual = max_residual.max(worst);
        lines.push(format!("hyperbolic half-plane: residual {}", fmt17(worst)));
    }
    {
        let model = Euclidean { dim: 3 };
        let x = [0.0, 0.0, 0.0];
        let a = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let rep = curvature::cometric_report(&model, &x, &a, &b)?;
        let worst = rep.numerator.abs().max(check(&model, &x, &a, &b)?);
        max_residual = max_residual.max(worst);
        lines.push(format!("euclidean: residual {}", fmt17(worst)));
    }

    // randomized landmark sections: cometric route vs classical route, and
    // the landmark-specialized formulas vs the generic engine
    let kernels = [
        Kernel::gaussian(1.0).unwrap(),
        Kernel::matern(1.0, MaternOrder::ThreeHalves).unwrap(),
    ];
    let mut worst_landmark = 0.0f64;
    for trial in 0..trials {
        let kernel = kernels[trial % kernels.len()];
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(1..=3usize);
        let section = random_section(&mut rng, n, d, 0.3 * kernel.scale(), 1.5);
        let model = LandmarkCometric::new(n, d, kernel);
        let x = LandmarkCometric::<Kernel>::flatten(section.landmarks.points());
        let a = DVector::from_vec(LandmarkCometric::<Kernel>::flatten(&section.alpha.0));
        let b = DVector::from_vec(LandmarkCometric::<Kernel>::flatten(&section.beta.0));
        worst_landmark = worst_landmark.max(check(&model, &x, &a, &b)?);

        let report = landmark_curvature::curvature_terms(
            &section.landmarks,
            &kernel,
            &section.alpha,
            &section.beta,
        )?;
        let fast = curvature::cometric_report(&model, &x, &a, &b)?;
        worst_landmark = worst_landmark
            .max((report.numerator - fast.numerator).abs() / (1.0 + fast.numerator.abs()));
    }
    max_residual = max_residual.max(worst_landmark);
    lines.push(format!(
        "landmark sections ({trials} trials): residual {}",
        fmt17(worst_landmark)
    ));

    lines.push(format!("max residual {}", fmt17(max_residual)));
    let text = lines.join("\n") + "\n";
    write_text(out.as_deref(), &text)?;

    if max_residual <= tol {
        Ok(())
    } else {
        Err(CliError::residual(format!(
            "oracle residual {} above threshold {}",
            fmt17(max_residual),
            fmt17(tol)
        )))
    }
}
