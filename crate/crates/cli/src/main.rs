//! scaffold: porous scaffold generation in trivariate B-spline solids.
//!
//! The pipeline: design a threshold distribution field (TDF) over the unit
//! parameter cube (`tdf-build`), optionally edit it (`modify`), expand it
//! into a TPMS triangle mesh mapped through the solid (`generate`), and
//! measure porosity (`analyze`). All commands are deterministic: the same
//! inputs and flags produce byte-identical outputs regardless of
//! `--threads`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tpms_scaffold::analysis::{
    mesh_statistics, porosity_sweep, threshold_steps, voxel_porosity, write_porosity_csv,
    DEFAULT_SWEEP_RESOLUTION,
};
use tpms_scaffold::io::{read_stl, read_tbss, read_tdf, write_stl, write_tdf, StlMode, TdfDocument};
use tpms_scaffold::lspia::{lspia_fit, lspia_local_modify, LspiaReport, DEFAULT_LSPIA_MAX_ITERS};
use tpms_scaffold::mapper::{map_mesh, validate_jacobian, JacobianReport, DEFAULT_JACOBIAN_SAMPLES};
use tpms_scaffold::mesh::TriangleMesh;
use tpms_scaffold::polygonize::{polygonize_structure, sample_field};
use tpms_scaffold::tdf::{
    filling_method, layer_method, normalize_to_range, prescribed_function, sym3,
    CurvatureQuantity, EditSet, LayerMode, ParametricGrid, DEFAULT_FILLING_MAX_ITERS,
};
use tpms_scaffold::tpms::{ThresholdSource, DEFAULT_SHEET_EPSILON};
use tpms_scaffold::{
    ImplicitFieldSpec, PeriodCoefficients, StructureKind, TpmsType, TrivariateScalarField,
};

#[derive(Parser)]
#[command(
    name = "scaffold",
    version,
    about = "Heterogeneous porous scaffold generation in trivariate B-spline solids"
)]
struct Cli {
    /// Cap the worker thread pool; does not change output bytes.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a threshold distribution field over a B-spline solid.
    TdfBuild(TdfBuildArgs),
    /// Expand a TDF file into a scaffold mesh in physical space.
    Generate(GenerateArgs),
    /// Apply local vertex edits to a stored TDF.
    Modify(ModifyArgs),
    /// Porosity measurements.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Convert between file formats (tdf -> stl expansion, stl re-encoding).
    Convert(ConvertArgs),
    /// Parse a file and report whether it is valid.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Diffuse boundary curvature into the interior.
    Filling,
    /// Assign per-layer values.
    Layer,
    /// Evaluate a prescribed function at every vertex.
    Function,
}

#[derive(Clone, Copy, ValueEnum)]
enum Curvature {
    Mean,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerAxis {
    /// Slabs stacked along the w axis.
    W,
    /// Onion rings by distance from the four side faces.
    Onion,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Binary,
    Ascii,
}

impl Format {
    fn stl_mode(self) -> StlMode {
        match self {
            Format::Binary => StlMode::Binary,
            Format::Ascii => StlMode::Ascii,
        }
    }
}

/// Vertex function selector for `tdf-build --method function`.
#[derive(Clone, Copy)]
enum FieldFn {
    Sym3,
    Const(f64),
}

fn parse_tpms(s: &str) -> Result<TpmsType, String> {
    TpmsType::from_name(s)
        .ok_or_else(|| format!("unknown TPMS type {s:?} (expected P, D, G, or IWP)"))
}

fn parse_structure(s: &str) -> Result<StructureKind, String> {
    StructureKind::from_name(s)
        .ok_or_else(|| format!("unknown structure {s:?} (expected pore, rod, or sheet)"))
}

fn parse_res3(s: &str) -> Result<(usize, usize, usize), String> {
    let one = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid resolution component {t:?}"))
    };
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [n] => one(n).map(|n| (n, n, n)),
        [a, b, c] => Ok((one(a)?, one(b)?, one(c)?)),
        _ => Err(format!("expected N or NU,NV,NW, got {s:?}")),
    }
}

fn parse_sample_res(s: &str) -> Result<(usize, usize, usize), String> {
    let res = parse_res3(s)?;
    if res.0 < 2 || res.1 < 2 || res.2 < 2 {
        return Err("sampling resolution must be at least 2 per axis".to_string());
    }
    Ok(res)
}

fn parse_cells(s: &str) -> Result<(u32, u32, u32), String> {
    let one = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid cell count {t:?}"))
    };
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [n] => one(n).map(|n| (n, n, n)),
        [a, b, c] => Ok((one(a)?, one(b)?, one(c)?)),
        _ => Err(format!("expected K or KX,KY,KZ, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let one = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid range bound {t:?}"))
    };
    match parts.as_slice() {
        [lo, hi] => Ok((one(lo)?, one(hi)?)),
        _ => Err(format!("expected LO,HI, got {s:?}")),
    }
}

fn parse_field_fn(s: &str) -> Result<FieldFn, String> {
    if s.eq_ignore_ascii_case("sym3") {
        return Ok(FieldFn::Sym3);
    }
    if let Some(value) = s.strip_prefix("const:") {
        return value
            .trim()
            .parse::<f64>()
            .map(FieldFn::Const)
            .map_err(|_| format!("invalid constant {value:?}"));
    }
    Err(format!("unknown function {s:?} (expected sym3 or const:VALUE)"))
}

/// Layer values: either an explicit comma list or `ramp:START:END:COUNT`
/// for COUNT evenly spaced values from START to END inclusive.
fn parse_layer_values(s: &str) -> Result<Vec<f64>> {
    if let Some(rest) = s.strip_prefix("ramp:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, end, count] = parts.as_slice() else {
            bail!("expected ramp:START:END:COUNT, got {s:?}");
        };
        let start: f64 = start.trim().parse().context("invalid ramp start")?;
        let end: f64 = end.trim().parse().context("invalid ramp end")?;
        let count: usize = count.trim().parse().context("invalid ramp count")?;
        if count == 0 {
            bail!("ramp count must be positive");
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        return Ok((0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid layer value {t:?}"))
        })
        .collect()
}

#[derive(Args)]
struct TdfBuildArgs {
    /// Input trivariate B-spline solid file.
    #[arg(long, value_name = "FILE")]
    tbss: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Curvature quantity diffused by the filling method.
    #[arg(long, value_enum, default_value = "mean")]
    curvature: Curvature,
    /// Layer shape for the layer method.
    #[arg(long, value_enum, default_value = "w")]
    axis: LayerAxis,
    /// Layer values: comma list or ramp:START:END:COUNT.
    #[arg(long, required_if_eq("method", "layer"), value_name = "VALUES")]
    values: Option<String>,
    /// Vertex function for the function method: sym3 or const:VALUE.
    #[arg(
        long = "fn",
        value_name = "FN",
        value_parser = parse_field_fn,
        required_if_eq("method", "function")
    )]
    function: Option<FieldFn>,
    /// TPMS type whose valid threshold range the TDF is normalized into.
    #[arg(long, value_parser = parse_tpms, default_value = "P")]
    tpms: TpmsType,
    /// Normalize into this sub-interval of the valid range instead.
    #[arg(long, value_parser = parse_range, value_name = "LO,HI")]
    range: Option<(f64, f64)>,
    /// Data grid resolution (N or NU,NV,NW vertices).
    #[arg(long, value_parser = parse_res3, default_value = "50", value_name = "RES")]
    grid_res: (usize, usize, usize),
    /// Control grid resolution of the fitted field.
    #[arg(long, value_parser = parse_res3, default_value = "20", value_name = "RES")]
    control_res: (usize, usize, usize),
    /// Periods per axis (unit cells), stored in the output file.
    #[arg(long, value_parser = parse_cells, default_value = "2,2,2", value_name = "KX,KY,KZ")]
    cells: (u32, u32, u32),
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_name = "FILE")]
    tdf: PathBuf,
    #[arg(long, value_parser = parse_structure)]
    structure: StructureKind,
    /// TPMS type (the TDF file does not record one).
    #[arg(long, value_parser = parse_tpms, default_value = "P")]
    tpms: TpmsType,
    /// Sheet half-thickness.
    #[arg(long, default_value_t = DEFAULT_SHEET_EPSILON)]
    epsilon: f64,
    /// Sampling resolution (vertices per axis; N or NU,NV,NW).
    #[arg(long, value_parser = parse_sample_res, default_value = "100", value_name = "RES")]
    resolution: (usize, usize, usize),
    /// Override the period coefficients stored in the TDF file.
    #[arg(long, value_parser = parse_cells, value_name = "KX,KY,KZ")]
    cells: Option<(u32, u32, u32)>,
    #[arg(long, value_enum, default_value = "binary")]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ModifyArgs {
    #[arg(long, value_name = "FILE")]
    tdf: PathBuf,
    /// Edit file: one "A B C VALUE" vertex override per line.
    #[arg(long, value_name = "FILE")]
    edits: PathBuf,
    /// TPMS type whose valid range edits are clamped into.
    #[arg(long, value_parser = parse_tpms, default_value = "P")]
    tpms: TpmsType,
    /// Data grid resolution the edit indices refer to.
    #[arg(long, value_parser = parse_res3, default_value = "50", value_name = "RES")]
    grid_res: (usize, usize, usize),
    /// Output file; rewrites the input in place when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Porosity as a function of a constant threshold.
    Sweep(SweepArgs),
    /// Porosity of a TDF-driven structure.
    Porosity(PorosityArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_tpms)]
    tpms: TpmsType,
    #[arg(long, value_parser = parse_structure)]
    structure: StructureKind,
    /// Number of evenly spaced thresholds across the valid range.
    #[arg(long, default_value_t = 17)]
    steps: usize,
    #[arg(long, value_parser = parse_cells, default_value = "2,2,2", value_name = "KX,KY,KZ")]
    cells: (u32, u32, u32),
    /// Sheet half-thickness.
    #[arg(long, default_value_t = DEFAULT_SHEET_EPSILON)]
    epsilon: f64,
    /// Voxels per axis.
    #[arg(long, default_value_t = DEFAULT_SWEEP_RESOLUTION)]
    resolution: usize,
    /// CSV output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PorosityArgs {
    #[arg(long, value_name = "FILE")]
    tdf: PathBuf,
    #[arg(long, value_parser = parse_structure)]
    structure: StructureKind,
    /// TPMS type (the TDF file does not record one).
    #[arg(long, value_parser = parse_tpms, default_value = "P")]
    tpms: TpmsType,
    /// Sheet half-thickness.
    #[arg(long, default_value_t = DEFAULT_SHEET_EPSILON)]
    epsilon: f64,
    /// Voxels per axis.
    #[arg(long, default_value_t = DEFAULT_SWEEP_RESOLUTION)]
    resolution: usize,
    /// Override the period coefficients stored in the TDF file.
    #[arg(long, value_parser = parse_cells, value_name = "KX,KY,KZ")]
    cells: Option<(u32, u32, u32)>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input file (.tdf or .stl).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// STL encoding of the output.
    #[arg(long, value_enum, default_value = "binary")]
    format: Format,
    /// Structure kind for TDF expansion.
    #[arg(long, value_parser = parse_structure, default_value = "pore")]
    structure: StructureKind,
    /// TPMS type for TDF expansion.
    #[arg(long, value_parser = parse_tpms, default_value = "P")]
    tpms: TpmsType,
    /// Sheet half-thickness.
    #[arg(long, default_value_t = DEFAULT_SHEET_EPSILON)]
    epsilon: f64,
    /// Sampling resolution for TDF expansion.
    #[arg(long, value_parser = parse_sample_res, default_value = "100", value_name = "RES")]
    resolution: (usize, usize, usize),
}

#[derive(Args)]
struct ValidateArgs {
    /// File to check (.tdf, .tbss, or .stl).
    #[arg(value_name = "FILE")]
    file: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Configure before any parallel work; pool size never affects
        // output bytes, only wall time.
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: could not configure thread pool: {err}");
        }
    }
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TdfBuild(args) => cmd_tdf_build(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Modify(args) => cmd_modify(args),
        Command::Analyze(AnalyzeCommand::Sweep(args)) => cmd_sweep(args),
        Command::Analyze(AnalyzeCommand::Porosity(args)) => cmd_porosity(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_tdf_file(path: &Path) -> Result<TdfDocument> {
    read_tdf(&read_text(path)?).with_context(|| format!("invalid TDF file {}", path.display()))
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<fs::File>) -> tpms_scaffold::Result<()>,
) -> Result<()> {
    let file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}

fn report_lspia(report: &LspiaReport) {
    eprintln!(
        "lspia: {} iterations, residual {:.3e}{}",
        report.iterations,
        report.final_residual(),
        if report.converged { "" } else { " (not converged)" }
    );
}

fn warn_if_folded(report: &JacobianReport) {
    if !report.positive {
        let (u, v, w) = report.location;
        eprintln!(
            "warning: Jacobian determinant {:.3e} at ({u:.3}, {v:.3}, {w:.3}) is not positive; \
             the mapped mesh may fold over itself",
            report.min_det
        );
    }
}

fn periods_for(stored: PeriodCoefficients, cells: Option<(u32, u32, u32)>) -> PeriodCoefficients {
    match cells {
        Some((kx, ky, kz)) => PeriodCoefficients::from_cells(kx, ky, kz),
        None => stored,
    }
}

/// Shared expansion path for `generate` and `convert`: sample the stored
/// threshold field, polygonize and close the structure, then map the mesh
/// through the solid.
fn build_physical_mesh(
    doc: &TdfDocument,
    tpms: TpmsType,
    structure: StructureKind,
    epsilon: f64,
    resolution: (usize, usize, usize),
    cells: Option<(u32, u32, u32)>,
) -> Result<(TriangleMesh, JacobianReport)> {
    let spec = ImplicitFieldSpec {
        tpms,
        periods: periods_for(doc.periods, cells),
        threshold: ThresholdSource::Field(&doc.tdf),
    };
    let samples = sample_field(&spec, resolution)?;
    let parametric = polygonize_structure(&samples, structure, epsilon)?;
    let jacobian = validate_jacobian(&doc.solid, DEFAULT_JACOBIAN_SAMPLES)?;
    let physical = map_mesh(&doc.solid, &parametric)?;
    Ok((physical, jacobian))
}

/// Reconstructs a data grid from a fitted field by sampling it at the grid
/// vertex parameters. `modify` needs one because the file format stores
/// only the fitted coefficients, not the grid they approximated.
fn sample_field_grid(
    field: &TrivariateScalarField,
    resolution: (usize, usize, usize),
) -> Result<ParametricGrid> {
    let grid = ParametricGrid::zeros(resolution)?;
    let (us, vs, ws) = grid.axis_params();
    Ok(ParametricGrid::from_values(field.eval_on_grid(&us, &vs, &ws)?)?)
}

fn cmd_tdf_build(args: TdfBuildArgs) -> Result<()> {
    let start = Instant::now();
    let solid = read_tbss(&read_text(&args.tbss)?)
        .with_context(|| format!("invalid TBSS file {}", args.tbss.display()))?;
    let grid = ParametricGrid::zeros(args.grid_res)?;
    let raw = match args.method {
        Method::Filling => {
            let quantity = match args.curvature {
                Curvature::Mean => CurvatureQuantity::Mean,
                Curvature::Gaussian => CurvatureQuantity::Gaussian,
            };
            let (filled, report) =
                filling_method(&solid, &grid, quantity, None, DEFAULT_FILLING_MAX_ITERS)?;
            eprintln!(
                "diffusion: {} iterations, max change {:.3e}{}",
                report.iterations,
                report.max_change,
                if report.converged { "" } else { " (not converged)" }
            );
            if report.degenerate_boundary_samples > 0 {
                eprintln!(
                    "warning: {} boundary sample(s) had degenerate curvature and were filled \
                     from neighbors",
                    report.degenerate_boundary_samples
                );
            }
            filled
        }
        Method::Layer => {
            let mode = match args.axis {
                LayerAxis::W => LayerMode::AxisW,
                LayerAxis::Onion => LayerMode::OnionSides,
            };
            let values = parse_layer_values(args.values.as_deref().expect("required by clap"))?;
            layer_method(&grid, mode, &values)?
        }
        Method::Function => match args.function.expect("required by clap") {
            FieldFn::Sym3 => prescribed_function(&grid, sym3)?,
            FieldFn::Const(value) => prescribed_function(&grid, move |_, _, _| value)?,
        },
    };
    let normalized = normalize_to_range(&raw, args.tpms, args.range)?;
    let (field, report) = lspia_fit(&normalized, args.control_res, None, DEFAULT_LSPIA_MAX_ITERS)?;
    report_lspia(&report);
    let (kx, ky, kz) = args.cells;
    let doc = TdfDocument {
        periods: PeriodCoefficients::from_cells(kx, ky, kz),
        tdf: field,
        solid,
    };
    write_file(&args.out, |out| write_tdf(&doc, out))?;
    eprintln!(
        "wrote {} in {:.2} s",
        args.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let start = Instant::now();
    let doc = read_tdf_file(&args.tdf)?;
    let (mesh, jacobian) = build_physical_mesh(
        &doc,
        args.tpms,
        args.structure,
        args.epsilon,
        args.resolution,
        args.cells,
    )?;
    warn_if_folded(&jacobian);
    write_file(&args.out, |out| write_stl(&mesh, args.format.stl_mode(), out))?;
    println!("{}", mesh_statistics(&mesh));
    eprintln!(
        "wrote {} in {:.2} s",
        args.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_modify(args: ModifyArgs) -> Result<()> {
    let mut doc = read_tdf_file(&args.tdf)?;
    let mut edits = EditSet::from_file(&args.edits)?;
    let clamped = edits.clamp_to_valid_range(args.tpms);
    if clamped > 0 {
        eprintln!(
            "warning: clamped {clamped} edit value(s) into the {} threshold range",
            args.tpms.name()
        );
    }
    let grid = sample_field_grid(&doc.tdf, args.grid_res)?;
    let (field, report) =
        lspia_local_modify(&doc.tdf, &grid, &edits, None, DEFAULT_LSPIA_MAX_ITERS)?;
    report_lspia(&report);
    doc.tdf = field;
    let out = args.out.as_deref().unwrap_or(&args.tdf);
    write_file(out, |w| write_tdf(&doc, w))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cs = threshold_steps(args.tpms, args.steps);
    let (kx, ky, kz) = args.cells;
    let rows = porosity_sweep(
        args.tpms,
        args.structure,
        args.epsilon,
        PeriodCoefficients::from_cells(kx, ky, kz),
        &cs,
        args.resolution,
    )?;
    match &args.out {
        Some(path) => write_file(path, |out| write_porosity_csv(&rows, out))?,
        None => write_porosity_csv(&rows, &mut std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_porosity(args: PorosityArgs) -> Result<()> {
    let doc = read_tdf_file(&args.tdf)?;
    let spec = ImplicitFieldSpec {
        tpms: args.tpms,
        periods: periods_for(doc.periods, args.cells),
        threshold: ThresholdSource::Field(&doc.tdf),
    };
    let porosity = voxel_porosity(&spec, args.structure, args.epsilon, args.resolution)?;
    println!("{porosity}");
    Ok(())
}

fn extension_of(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let from = extension_of(&args.input);
    let to = extension_of(&args.out);
    match (from.as_str(), to.as_str()) {
        ("tdf", "stl") => {
            let doc = read_tdf_file(&args.input)?;
            let (mesh, jacobian) = build_physical_mesh(
                &doc,
                args.tpms,
                args.structure,
                args.epsilon,
                args.resolution,
                None,
            )?;
            warn_if_folded(&jacobian);
            write_file(&args.out, |out| write_stl(&mesh, args.format.stl_mode(), out))?;
        }
        ("stl", "stl") => {
            let bytes =
                fs::read(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
            let mesh = read_stl(&bytes)
                .with_context(|| format!("invalid STL file {}", args.input.display()))?;
            write_file(&args.out, |out| write_stl(&mesh, args.format.stl_mode(), out))?;
        }
        _ => bail!("unsupported conversion {from:?} -> {to:?} (expected tdf -> stl or stl -> stl)"),
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let path = &args.file;
    match extension_of(path).as_str() {
        "tdf" => {
            let doc = read_tdf(&read_text(path)?)
                .with_context(|| format!("invalid TDF file {}", path.display()))?;
            let (nu, nv, nw) = doc.tdf.coeffs().dims();
            let (cu, cv, cw) = doc.solid.control().dims();
            println!(
                "OK: TDF with {nu}x{nv}x{nw} threshold coefficients over a {cu}x{cv}x{cw} solid"
            );
        }
        "tbss" => {
            let solid = read_tbss(&read_text(path)?)
                .with_context(|| format!("invalid TBSS file {}", path.display()))?;
            let (cu, cv, cw) = solid.control().dims();
            println!("OK: TBSS with {cu}x{cv}x{cw} control points");
        }
        "stl" => {
            let bytes =
                fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            let mesh = read_stl(&bytes)
                .with_context(|| format!("invalid STL file {}", path.display()))?;
            println!(
                "OK: STL with {} triangles, {} vertices{}",
                mesh.num_triangles(),
                mesh.num_vertices(),
                if mesh.is_closed() { ", closed" } else { "" }
            );
        }
        other => bail!("unknown file extension {other:?} (expected tdf, tbss, or stl)"),
    }
    Ok(())
}
