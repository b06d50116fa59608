//! Command-line front end: analyze, optimize, verify, and catalog commands,
//! plus artifact persistence (history CSVs, result documents, run logs).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, Benchmark, ConnectionVariant};
use crate::config::{into_problem, ProblemConfig};
use crate::constraints::{self, ConstraintReport};
use crate::error::{Error, Result};
use crate::fuzzy::{FitnessMode, MembershipShape};
use crate::model::{frame_weight, SizedFrame};
use crate::optimizer::{
    self, history_csv, BestDesign, GaConfig, OptimizationRun, NEWTONS_PER_TONNE,
};
use crate::problem::{DesignOutcome, MembershipSet, Problem};
use crate::sections::{Section, SectionCatalog, INCH};
use crate::solver::AnalysisResult;

/// Environment variable holding a replacement section catalog CSV path.
pub const CATALOG_ENV: &str = "SEMIRIGID_CATALOG";

#[derive(Debug, Parser)]
#[command(
    name = "semirigid",
    version,
    about = "Weight optimization of steel frames with semi-rigid connections"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze the fixed design named in a problem config
    Analyze {
        /// JSON problem config with a `design` table
        config: PathBuf,
        /// Artifact directory (default runs/<config stem>)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the genetic algorithm on a benchmark or a config file
    Optimize {
        /// frame3 | frame5 | frame9 | verify, or a JSON config path
        target: String,
        /// Beam-column connection for benchmarks: rigid, 1, 4, 5, or 7
        #[arg(long)]
        connection: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        /// Per-bit mutation probability
        #[arg(long)]
        mutation: Option<f64>,
        /// crisp | linear | bilinear
        #[arg(long = "fuzzy-shape")]
        fuzzy_shape: Option<String>,
        /// lambda | phi
        #[arg(long)]
        fitness: Option<String>,
        /// Fitness-evaluation threads
        #[arg(long)]
        jobs: Option<usize>,
        /// Artifact directory (default runs/<target>)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the semi-rigid element against its independent oracle
    Verify {
        /// Beam span in m
        #[arg(long)]
        span: Option<f64>,
        /// Uniform load in N/m
        #[arg(long)]
        load: Option<f64>,
        /// Write the report JSON here too
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the section catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// Print every section
    List,
    /// Print one section in SI and inch units
    Show { name: String },
}

/// Maps an error to the process exit code: unstable structures are 3,
/// everything else (config, catalog, IO) is 2.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Singular { .. } => 3,
        _ => 2,
    }
}

pub fn load_catalog() -> Result<SectionCatalog> {
    match std::env::var_os(CATALOG_ENV) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            SectionCatalog::load_csv(&text)
        }
        None => Ok(SectionCatalog::builtin()),
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_shape(text: &str) -> Result<MembershipShape> {
    match text.trim().to_ascii_lowercase().as_str() {
        "crisp" => Ok(MembershipShape::Crisp),
        "linear" => Ok(MembershipShape::Linear),
        "bilinear" => Ok(MembershipShape::Bilinear),
        other => Err(Error::config(format!(
            "unknown membership shape '{other}' (expected crisp, linear, or bilinear)"
        ))),
    }
}

fn parse_mode(text: &str) -> Result<FitnessMode> {
    match text.trim().to_ascii_lowercase().as_str() {
        "lambda" => Ok(FitnessMode::Lambda),
        "phi" => Ok(FitnessMode::Phi),
        other => {
            Err(Error::config(format!("unknown fitness mode '{other}' (expected lambda or phi)")))
        }
    }
}

/// Entry point behind `main`: returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze { config, out } => cmd_analyze(&config, out),
        Command::Optimize {
            target,
            connection,
            seed,
            restarts,
            generations,
            population,
            mutation,
            fuzzy_shape,
            fitness,
            jobs,
            out,
        } => {
            let overrides = Overrides {
                connection,
                seed,
                restarts,
                generations,
                population,
                mutation,
                fuzzy_shape,
                fitness,
                jobs,
            };
            cmd_optimize(&target, &overrides, out)
        }
        Command::Verify { span, load, out } => cmd_verify(span, load, out),
        Command::Catalog { action } => cmd_catalog(action),
    }
}

struct Overrides {
    connection: Option<String>,
    seed: Option<u64>,
    restarts: Option<usize>,
    generations: Option<usize>,
    population: Option<usize>,
    mutation: Option<f64>,
    fuzzy_shape: Option<String>,
    fitness: Option<String>,
    jobs: Option<usize>,
}

#[derive(Serialize)]
struct AnalyzeDocument<'a> {
    assignment: Vec<(String, String)>,
    weight_n: f64,
    weight_tonnes: f64,
    outcome: DesignOutcome,
    constraint_report: &'a ConstraintReport,
    /// One solved case per load combination: gravity, gravity + seismic in
    /// +x, gravity + seismic in −x.
    cases: &'a [AnalysisResult],
}

fn cmd_analyze(config_path: &Path, out: Option<PathBuf>) -> Result<i32> {
    let config = ProblemConfig::from_path(config_path)?;
    let catalog = load_catalog()?;
    let bundle = into_problem(&config, &catalog)?;
    let design = bundle.design.as_ref().ok_or_else(|| {
        Error::config("analyze needs a design table (group label → section name) in the config")
    })?;
    let problem = &bundle.problem;
    let sized = SizedFrame::from_names(&problem.frame, design)?;
    let (cases, report) = problem.analyze(&sized)?;

    let weight = frame_weight(&sized, problem.limits.unit_weight);
    let ms = problem.resolve_memberships(problem.max_pool_weight())?;
    let roof = constraints::roof_displacement(&cases, &problem.frame);
    let outcome = problem.outcome_from_report(weight, &report, roof, &ms);

    let document = AnalyzeDocument {
        assignment: sized.assignment_by_label(),
        weight_n: weight,
        weight_tonnes: weight / NEWTONS_PER_TONNE,
        outcome,
        constraint_report: &report,
        cases: &cases,
    };

    let mut text = String::new();
    for (label, section) in &document.assignment {
        writeln!(text, "{label} = {section}").unwrap();
    }
    writeln!(text, "weight        {:.1} N ({:.4} t)", weight, document.weight_tonnes).unwrap();
    writeln!(text, "worst ratio   {:.4}", report.worst()).unwrap();
    writeln!(text, "drift ratio   {:.4}", report.drift_ratio).unwrap();
    writeln!(text, "roof disp     {:.4} cm", roof * 100.0).unwrap();
    writeln!(text, "satisfaction  {:.4}", outcome.satisfaction).unwrap();
    writeln!(text, "feasible      {}", outcome.feasible).unwrap();
    print!("{text}");

    let dir = out.unwrap_or_else(|| default_out_dir(config_path));
    write_atomic(&dir.join("analysis.json"), &to_pretty_json(&document)?)?;
    write_atomic(&dir.join("run.log"), &text)?;
    println!("artifacts in {}", dir.display());
    Ok(0)
}

fn default_out_dir(config_path: &Path) -> PathBuf {
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from("runs").join(stem)
}

#[derive(Serialize)]
struct OptimizeDocument<'a> {
    target: &'a str,
    connection: Option<&'a str>,
    ga: GaConfig,
    fuzzy_shape: MembershipShape,
    fitness_mode: FitnessMode,
    bounds: optimizer::ResolvedBounds,
    membership: MembershipSet,
    best: &'a BestDesign,
    restart_bests: &'a [BestDesign],
}

fn cmd_optimize(target: &str, overrides: &Overrides, out: Option<PathBuf>) -> Result<i32> {
    let catalog = load_catalog()?;
    let benchmark_id = Benchmark::parse(target);
    let (mut problem, mut ga, target_name, connection_label) = match benchmark_id {
        Some(id) => {
            let conn = match &overrides.connection {
                Some(text) => ConnectionVariant::parse(text)?,
                None => ConnectionVariant::Rigid,
            };
            let bundle = bench::benchmark(id, conn)?;
            (bundle.problem, bundle.ga, id.name().to_string(), Some(conn.label().to_string()))
        }
        None => {
            let path = Path::new(target);
            if !path.exists() {
                return Err(Error::config(format!(
                    "'{target}' is neither a benchmark (frame3, frame5, frame9, verify) \
                     nor an existing config file"
                )));
            }
            if overrides.connection.is_some() {
                return Err(Error::config(
                    "--connection applies to built-in benchmarks; set conn_a/conn_b or \
                     grid.beam_conn in the config instead",
                ));
            }
            let config = ProblemConfig::from_path(path)?;
            let bundle = into_problem(&config, &catalog)?;
            let stem =
                path.file_stem().and_then(|s| s.to_str()).unwrap_or("config").to_string();
            (bundle.problem, bundle.ga, stem, None)
        }
    };

    if let Some(v) = overrides.seed {
        ga.seed = v;
    }
    if let Some(v) = overrides.restarts {
        ga.restarts = v;
    }
    if let Some(v) = overrides.generations {
        ga.generations = v;
    }
    if let Some(v) = overrides.population {
        ga.population = v;
    }
    if let Some(v) = overrides.mutation {
        ga.mutation_rate = v;
    }
    if let Some(v) = overrides.jobs {
        ga.jobs = v;
    }
    if let Some(text) = &overrides.fuzzy_shape {
        problem.fuzzy.shape = parse_shape(text)?;
    }
    if let Some(text) = &overrides.fitness {
        problem.fuzzy.mode = parse_mode(text)?;
    }

    let run = optimizer::run(&problem, &ga)?;
    let dir = out.unwrap_or_else(|| PathBuf::from("runs").join(&target_name));

    for (i, records) in run.histories.iter().enumerate() {
        write_atomic(&dir.join(format!("history_r{i:02}.csv")), &history_csv(records))?;
    }

    let log = render_run_log(&target_name, connection_label.as_deref(), &problem, &run);
    print!("{log}");

    let document = OptimizeDocument {
        target: &target_name,
        connection: connection_label.as_deref(),
        ga: run.config,
        fuzzy_shape: problem.fuzzy.shape,
        fitness_mode: problem.fuzzy.mode,
        bounds: run.bounds,
        membership: run.membership,
        best: &run.best,
        restart_bests: &run.restart_bests,
    };
    write_atomic(&dir.join("result.json"), &to_pretty_json(&document)?)?;
    write_atomic(&dir.join("run.log"), &log)?;
    println!("artifacts in {}", dir.display());
    Ok(0)
}

fn render_run_log(
    target: &str,
    connection: Option<&str>,
    problem: &Problem,
    run: &OptimizationRun,
) -> String {
    let mut log = String::new();
    let ga = &run.config;
    writeln!(log, "target {target}  connection {}", connection.unwrap_or("(from config)"))
        .unwrap();
    writeln!(
        log,
        "population {}  generations {}  mutation {}  elitism {}  seed {}  restarts {}",
        ga.population, ga.generations, ga.mutation_rate, ga.elitism_rate, ga.seed, ga.restarts
    )
    .unwrap();
    writeln!(
        log,
        "shape {:?}  mode {:?}  bounds f_lower {} f_upper {} f_max {}{}",
        problem.fuzzy.shape,
        problem.fuzzy.mode,
        run.bounds.f_lower,
        run.bounds.f_upper,
        run.bounds.f_max,
        match run.bounds.pilot_weight_n {
            Some(w) => format!("  (pilot best {w})"),
            None => String::new(),
        }
    )
    .unwrap();
    for b in &run.restart_bests {
        writeln!(
            log,
            "restart {:2} seed {}: weight {:.1} N ({:.4} t)  lambda {:.4}  worst {:.4}  \
             roof {:.4} cm  feasible {}",
            b.restart,
            b.seed,
            b.weight_n,
            b.weight_tonnes,
            b.satisfaction,
            b.worst_ratio,
            b.roof_displacement_m * 100.0,
            b.feasible
        )
        .unwrap();
    }
    let best = &run.best;
    let assignment: Vec<String> =
        best.assignment.iter().map(|(g, s)| format!("{g}={s}")).collect();
    writeln!(
        log,
        "best: restart {} generation {}  weight {:.1} N ({:.4} t)  lambda {:.4}  \
         roof {:.4} cm  feasible {}",
        best.restart,
        best.generation,
        best.weight_n,
        best.weight_tonnes,
        best.satisfaction,
        best.roof_displacement_m * 100.0,
        best.feasible
    )
    .unwrap();
    writeln!(log, "design: {}", assignment.join("  ")).unwrap();
    log
}

fn cmd_verify(span: Option<f64>, load: Option<f64>, out: Option<PathBuf>) -> Result<i32> {
    let report = bench::run_verification(
        span.unwrap_or(bench::DEFAULT_VERIFY_SPAN),
        load.unwrap_or(bench::DEFAULT_VERIFY_LOAD),
    )?;

    let mut text = String::new();
    writeln!(text, "spring-beam verification").unwrap();
    writeln!(
        text,
        "  E    {:>12.1} k/in²     = {:.6e} Pa",
        report.e_ksi, report.e_pa
    )
    .unwrap();
    writeln!(text, "  I    {:>12.1} in⁴       = {:.6e} m⁴", report.i_in4, report.i_m4).unwrap();
    writeln!(
        text,
        "  K_i  {:>12.1} k·in/rad  = {:.6e} N·m/rad",
        report.k_kip_in_per_rad, report.k_nm_per_rad
    )
    .unwrap();
    writeln!(text, "  span {} m, uniform load {} N/m", report.span_m, report.load_npm).unwrap();
    writeln!(
        text,
        "  α = {:.6}, end-moment reduction 1/(1+2α) = {:.6}",
        report.alpha, report.reduction_factor
    )
    .unwrap();
    writeln!(
        text,
        "  end moment {:.1} N·m = {:.2} k·in  (rigid-connection value {:.1} N·m)",
        report.end_moment_nm, report.end_moment_kip_in, report.rigid_end_moment_nm
    )
    .unwrap();
    if let Some(p) = report.perturbation {
        writeln!(text, "  NOTE: test hook active, closed-form moment scaled by {p}").unwrap();
    }
    for check in &report.checks {
        writeln!(
            text,
            "  [{}] {}: got {:.3e}, want {:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.got,
            check.want
        )
        .unwrap();
    }
    writeln!(text, "verification {}", if report.pass { "PASSED" } else { "FAILED" }).unwrap();
    print!("{text}");

    if let Some(dir) = out {
        write_atomic(&dir.join("verify.json"), &to_pretty_json(&report)?)?;
        write_atomic(&dir.join("run.log"), &text)?;
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn inch_units(section: &Section) -> [f64; 7] {
    [
        section.area / (INCH * INCH),
        section.depth / INCH,
        section.moment_of_inertia_major / INCH.powi(4),
        section.section_modulus_major / INCH.powi(3),
        section.radius_of_gyration_minor / INCH,
        section.flange_width / INCH,
        section.flange_thickness / INCH,
    ]
}

fn cmd_catalog(action: CatalogAction) -> Result<i32> {
    let catalog = load_catalog()?;
    match action {
        CatalogAction::List => {
            println!("{:<10} {:>12} {:>10} {:>14} {:>12}", "name", "area m²", "depth m", "Ix m⁴", "ry m");
            for s in catalog.sections() {
                println!(
                    "{:<10} {:>12.6e} {:>10.4} {:>14.6e} {:>12.4}",
                    s.name, s.area, s.depth, s.moment_of_inertia_major, s.radius_of_gyration_minor
                );
            }
            println!("{} sections", catalog.len());
        }
        CatalogAction::Show { name } => {
            let s = catalog.lookup(&name)?;
            let [area, depth, ix, sx, ry, bf, tf] = inch_units(s);
            println!("{}", s.name);
            println!("  area  {:.6e} m²      = {:.2} in²", s.area, area);
            println!("  depth {:.4} m        = {:.2} in", s.depth, depth);
            println!("  Ix    {:.6e} m⁴      = {:.1} in⁴", s.moment_of_inertia_major, ix);
            println!("  Sx    {:.6e} m³      = {:.2} in³", s.section_modulus_major, sx);
            println!("  ry    {:.4} m        = {:.2} in", s.radius_of_gyration_minor, ry);
            println!("  bf    {:.4} m        = {:.2} in", s.flange_width, bf);
            println!("  tf    {:.4} m        = {:.2} in", s.flange_thickness, tf);
            println!("  unit weight {:.1} N/m", s.unit_weight_per_length());
        }
    }
    Ok(0)
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
