use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use johnforge_core::geometry::{
    distance_transform, rasterize, whitney, BoundingBox, CompactSetMask, MaskFile, Point, ShapeSpec,
};
use johnforge_core::john::{estimate_john_constant, JohnCenter, JohnEstimate};
use johnforge_core::potential::{
    capacity_estimate, harmonic_measure_wos, verify_beurling, AngularArc, CapacityMethod,
    ConformalMap, WalkDomain,
};
use johnforge_core::removability::{
    build_test_function, energy_density, nonremovability_witness, offk_energy, removability_report,
    smooth_in_collar, Collar, TraceSpec,
};
use johnforge_core::simplify::{
    build_graph, cut_slits, verify_simplified, JohnGraph, SlitSet, VerificationReport, DEFAULT_A,
    DEFAULT_DELTA,
};
use johnforge_core::svg;
use johnforge_core::{WhitneyDecomposition, WhitneyFile};

use crate::args::*;
use crate::output::{csv, emit, read_result, write_atomic, write_field};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let config = match &cli.config {
        Some(p) => Some(crate::args::load_config(p, name)?),
        None => None,
    };
    let config = config.as_ref();
    match &cli.command {
        Command::Rasterize(a) => rasterize_cmd(merge(a, config)?),
        Command::Whitney(a) => whitney_cmd(merge(a, config)?),
        Command::JohnEstimate(a) => john_cmd(merge(a, config)?),
        Command::Simplify(a) => simplify_cmd(merge(a, config)?),
        Command::Verify(a) => verify_cmd(merge(a, config)?),
        Command::Capacity(a) => capacity_cmd(merge(a, config)?),
        Command::Harmonic(a) => harmonic_cmd(merge(a, config)?),
        Command::Measure(a) => measure_cmd(merge(a, config)?),
        Command::Removability(a) => removability_cmd(merge(a, config)?),
        Command::Witness(a) => witness_cmd(merge(a, config)?),
        Command::Beurling(a) => beurling_cmd(merge(a, config)?),
    }
}

/// Parses a flag value, reporting failures as usage errors.
fn parse_flag<T: FromStr<Err = johnforge_core::Error>>(value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|e: johnforge_core::Error| CliError::Usage(e.to_string()))
}

fn parse_point(name: &str, s: &str) -> Result<Point, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--{name}: expected `x,y`, got `{s}`")))?;
    match v.as_slice() {
        [x, y] => Ok(Point::new(*x, *y)),
        _ => Err(CliError::Usage(format!(
            "--{name}: expected `x,y`, got `{s}`"
        ))),
    }
}

fn fmt_point(p: Point) -> String {
    format!("{},{}", p.x, p.y)
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(()),
    }
}

/// Borrowed view of the set-source fields of a subcommand.
struct Source<'a> {
    shape: &'a Option<String>,
    mask: &'a Option<PathBuf>,
    level: &'a mut Option<u32>,
    half_side: &'a mut Option<f64>,
    box_center: &'a mut Option<String>,
}

trait HasSource {
    fn source(&mut self) -> Source<'_>;
}

macro_rules! has_source {
    ($($t:ty),*) => {$(
        impl HasSource for $t {
            fn source(&mut self) -> Source<'_> {
                Source {
                    shape: &self.shape,
                    mask: &self.mask,
                    level: &mut self.level,
                    half_side: &mut self.half_side,
                    box_center: &mut self.box_center,
                }
            }
        }
    )*};
}

has_source!(
    WhitneyArgs,
    JohnArgs,
    SimplifyArgs,
    CapacityArgs,
    HarmonicArgs,
    MeasureArgs,
    RemovabilityArgs,
    WitnessArgs
);

fn has_set(a: &mut impl HasSource) -> bool {
    let s = a.source();
    s.shape.is_some() || s.mask.is_some()
}

fn bbox_for(
    spec: &ShapeSpec,
    half: Option<f64>,
    center: Option<&String>,
) -> Result<BoundingBox, CliError> {
    let default = spec.default_box();
    let center = match center {
        Some(c) => parse_point("box-center", c)?,
        None => match &default {
            Ok(b) => b.center,
            Err(_) => Point::ORIGIN,
        },
    };
    match half {
        Some(h) => Ok(BoundingBox::new(center, h)?),
        None => Ok(BoundingBox::new(center, default?.half_side)?),
    }
}

/// Loads the set from a mask file or rasterizes the shape, and records the
/// level and box actually used.
fn load_set(a: &mut impl HasSource, default_level: u32) -> Result<CompactSetMask, CliError> {
    let s = a.source();
    let mask = match (s.shape, s.mask) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --shape or --mask, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a set is required: --shape or --mask".into(),
            ))
        }
        (None, Some(path)) => {
            let file: MaskFile = serde_json::from_value(read_result(path)?)
                .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
            let m = CompactSetMask::from_file(&file)?;
            if s.level.is_some_and(|l| l != m.level) {
                return Err(CliError::Usage(format!(
                    "--level conflicts with the mask level {}",
                    m.level
                )));
            }
            m
        }
        (Some(shape), None) => {
            let spec: ShapeSpec = parse_flag(shape)?;
            let level = s.level.unwrap_or(default_level);
            let bbox = bbox_for(&spec, *s.half_side, s.box_center.as_ref())?;
            rasterize(&spec, bbox, level)?
        }
    };
    *s.level = Some(mask.level);
    *s.half_side = Some(mask.bbox.half_side);
    *s.box_center = Some(fmt_point(mask.bbox.center));
    Ok(mask)
}

fn load_whitney(
    path: &Path,
) -> Result<(CompactSetMask, WhitneyDecomposition, WhitneyFile), CliError> {
    let file: WhitneyFile = serde_json::from_value(read_result(path)?)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let (mask, w) = file.load()?;
    Ok((mask, w, file))
}

/// A Whitney decomposition from `--in`, or built from the set source.
fn whitney_input(
    input: &Option<PathBuf>,
    a: &mut impl HasSource,
) -> Result<(CompactSetMask, WhitneyDecomposition, WhitneyFile), CliError> {
    match input {
        Some(p) if has_set(a) => Err(CliError::Usage(format!(
            "give either --in {} or a set source, not both",
            p.display()
        ))),
        Some(p) => load_whitney(p),
        None => {
            let mask = load_set(a, 9)?;
            let w = whitney(&mask, mask.level)?;
            let f = WhitneyFile::new(&mask, &w);
            Ok((mask, w, f))
        }
    }
}

fn rasterize_cmd(mut a: RasterizeArgs) -> Result<(), CliError> {
    let shape = a
        .shape
        .as_ref()
        .ok_or_else(|| CliError::Usage("--shape is required".into()))?;
    let spec: ShapeSpec = parse_flag(shape)?;
    let level = *a.level.get_or_insert(9);
    let bbox = bbox_for(&spec, a.half_side, a.box_center.as_ref())?;
    let mask = rasterize(&spec, bbox, level)?;
    a.half_side = Some(bbox.half_side);
    a.box_center = Some(fmt_point(bbox.center));
    emit("rasterize", &a, &mask.to_file(), a.out.as_deref())
}

fn whitney_cmd(mut a: WhitneyArgs) -> Result<(), CliError> {
    let mask = load_set(&mut a, 9)?;
    let deepest = *a.deepest.get_or_insert(mask.level);
    let w = whitney(&mask, deepest)?;
    let file = WhitneyFile::new(&mask, &w);
    write_text(&a.svg, &svg::whitney_svg(&mask, &w))?;
    emit("whitney", &a, &file, a.out.as_deref())
}

fn john_cmd(mut a: JohnArgs) -> Result<(), CliError> {
    let center: JohnCenter = parse_flag(a.center.get_or_insert_with(|| "inf".into()))?;
    let samples = *a.samples.get_or_insert(64);
    let seed = *a.seed.get_or_insert(0);
    let input = a.input.clone();
    let (mask, w, _) = whitney_input(&input, &mut a)?;
    let est: JohnEstimate = estimate_john_constant(&w, center, samples, seed)?;
    write_text(&a.svg, &svg::john_svg(&mask, &w, &est))?;
    emit("john-estimate", &a, &est, a.out.as_deref())
}

/// Output of `simplify`; carries its input so `verify` can rebuild it.
#[derive(Serialize, Deserialize)]
struct SimplifyOutput {
    whitney: WhitneyFile,
    graph: JohnGraph,
    slits: SlitSet,
    sub_level: u32,
    wall_cells: usize,
}

fn simplify_cmd(mut a: SimplifyArgs) -> Result<(), CliError> {
    let a_const = *a.a.get_or_insert(DEFAULT_A);
    let delta = *a.delta.get_or_insert(DEFAULT_DELTA);
    let input = a.input.clone();
    let (_, w, file) = whitney_input(&input, &mut a)?;
    let g = build_graph(&w, a_const, a.n_max)?;
    a.n_max = Some(g.n_max);
    let s = cut_slits(&w, &g, delta)?;
    write_text(&a.svg, &svg::simplified_svg(&s))?;
    let out = SimplifyOutput {
        whitney: file,
        wall_cells: s.wall_owner.iter().filter(|&&o| o != usize::MAX).count(),
        sub_level: s.sub_level,
        graph: s.graph,
        slits: s.slits,
    };
    emit("simplify", &a, &out, a.out.as_deref())
}

#[derive(Serialize)]
struct VerifyOutput {
    /// The graph and slits rebuilt from the embedded input equal the stored ones.
    reproduced: bool,
    report: VerificationReport,
}

fn verify_cmd(mut a: VerifyArgs) -> Result<(), CliError> {
    let path = a
        .input
        .clone()
        .ok_or_else(|| CliError::Usage("--in is required".into()))?;
    let samples = *a.john_samples.get_or_insert(64);
    let seed = *a.seed.get_or_insert(0);
    let stored: SimplifyOutput = serde_json::from_value(read_result(&path)?)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let (_, w) = stored.whitney.load()?;
    let g = build_graph(&w, stored.graph.a, Some(stored.graph.n_max))?;
    let s = cut_slits(&w, &g, stored.slits.delta)?;
    let reproduced = s.graph == stored.graph && s.slits == stored.slits;
    if !reproduced {
        return Err(CliError::Format(format!(
            "{}: stored graph or slits differ from the reconstruction",
            path.display()
        )));
    }
    let report = verify_simplified(&s, samples, seed)?;
    emit(
        "verify",
        &a,
        &VerifyOutput { reproduced, report },
        a.out.as_deref(),
    )
}

fn capacity_cmd(mut a: CapacityArgs) -> Result<(), CliError> {
    let method: CapacityMethod = parse_flag(a.method.get_or_insert_with(|| "energy".into()))?;
    let points = *a.points.get_or_insert(512);
    let seed = *a.seed.get_or_insert(0);
    let mask = load_set(&mut a, 10)?;
    let est = capacity_estimate(&mask, method, points, seed)?;
    emit("capacity", &a, &est, a.out.as_deref())
}

#[derive(Serialize)]
struct HarmonicOutput {
    trace: TraceSpec,
    offk_energy: f64,
    min: f64,
    max: f64,
    residual: f64,
    tolerance: f64,
    iterations: usize,
    maximum_principle: bool,
    harmonic_nodes: usize,
}

fn harmonic_cmd(mut a: HarmonicArgs) -> Result<(), CliError> {
    let trace: TraceSpec = parse_flag(a.trace.get_or_insert_with(|| "random".into()))?;
    let seed = *a.seed.get_or_insert(0);
    let mask = load_set(&mut a, 8)?;
    let f = build_test_function(&mask, &trace, seed)?;
    let finite = f.values.iter().copied().filter(|v| v.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if let Some(p) = &a.field {
        write_field(p, f.bbox, f.level, &f.values)?;
    }
    let out = HarmonicOutput {
        offk_energy: offk_energy(&f, &mask),
        min,
        max,
        residual: f.residual,
        tolerance: f.tolerance,
        iterations: f.iterations,
        maximum_principle: f.maximum_principle_holds(),
        harmonic_nodes: f.harmonic_region.iter().filter(|&&h| h).count(),
        trace,
    };
    emit("harmonic", &a, &out, a.out.as_deref())
}

fn parse_arcs(s: &str) -> Result<Vec<AngularArc>, CliError> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let p = parse_point("arcs", t)?;
            Ok(AngularArc {
                start: p.x,
                width: p.y,
            })
        })
        .collect()
}

fn measure_cmd(mut a: MeasureArgs) -> Result<(), CliError> {
    let walks = *a.walks.get_or_insert(100_000);
    let seed = *a.seed.get_or_insert(0);
    let (domain, default_shell, default_start) = if has_set(&mut a) {
        let mask = load_set(&mut a, 9)?;
        let target = match &a.target {
            Some(t) => {
                let spec: ShapeSpec = parse_flag(t)?;
                let tm = rasterize(&spec, mask.bbox, mask.level)?;
                (0..mask.n() * mask.n())
                    .map(|k| mask.get_index(k) && tm.get_index(k))
                    .collect()
            }
            None => mask.to_bits(),
        };
        let shell = 1.5 * mask.pixel_size();
        let domain = WalkDomain::Mask {
            field: distance_transform(&mask),
            target,
        };
        (domain, shell, None)
    } else {
        let radius = *a.radius.get_or_insert(1.0);
        let center = parse_point(
            "disk-center",
            a.disk_center.get_or_insert_with(|| "0,0".into()),
        )?;
        let arcs = parse_arcs(
            a.arcs
                .get_or_insert_with(|| format!("0,{}", std::f64::consts::PI)),
        )?;
        let level = *a.level.get_or_insert(10);
        let shell = 1.5 * 2.0 * radius / (1u64 << level) as f64;
        let domain = WalkDomain::Disk {
            center,
            radius,
            target: arcs,
        };
        (domain, shell, Some(center))
    };
    let start = match (&a.start, default_start) {
        (Some(s), _) => parse_point("start", s)?,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(CliError::Usage(
                "--start is required for set-complement domains".into(),
            ))
        }
    };
    a.start = Some(fmt_point(start));
    let shell = *a.shell.get_or_insert(default_shell);
    let est = harmonic_measure_wos(&domain, start, walks, shell, seed)?;
    emit("measure", &a, &est, a.out.as_deref())
}

fn removability_cmd(mut a: RemovabilityArgs) -> Result<(), CliError> {
    let trace: TraceSpec = parse_flag(a.trace.get_or_insert_with(|| "random".into()))?;
    let n_list = a.n_list.get_or_insert_with(|| vec![4, 8, 16, 32]).clone();
    let unit = *a.unit.get_or_insert(1.0);
    let seed = *a.seed.get_or_insert(0);
    let mask = load_set(&mut a, 10)?;
    let report = removability_report(&mask, &trace, &n_list, unit, seed)?;
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| vec![r.n as f64, r.verdict_gap])
        .collect();
    write_text(&a.csv, &csv(&["n", "verdict_gap"], &rows))?;
    if a.svg.is_some() {
        let f = build_test_function(&mask, &trace, seed)?;
        let delta = unit / *n_list.last().expect("nonempty list") as f64;
        let collar = Collar::new(&distance_transform(&mask), delta)?;
        let smooth = smooth_in_collar(&f, &collar)?;
        let density: Vec<f64> = energy_density(&smooth)
            .into_iter()
            .zip(&collar.nodes)
            .map(|(v, &c)| if c { v } else { f64::NAN })
            .collect();
        write_text(&a.svg, &svg::heat_map_svg(mask.bbox, mask.level, &density))?;
    }
    emit("removability", &a, &report, a.out.as_deref())
}

fn witness_cmd(mut a: WitnessArgs) -> Result<(), CliError> {
    let n_list = a.n_list.get_or_insert_with(|| vec![4, 8, 16, 32]).clone();
    let mask = load_set(&mut a, 9)?;
    let report = nonremovability_witness(&mask, &n_list)?;
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n as f64,
                r.sup_norm,
                r.offk_gradient_energy,
                r.dbar_energy,
            ]
        })
        .collect();
    write_text(
        &a.csv,
        &csv(
            &["n", "sup_norm", "offk_gradient_energy", "dbar_energy"],
            &rows,
        ),
    )?;
    emit("witness", &a, &report, a.out.as_deref())
}

fn beurling_cmd(mut a: BeurlingArgs) -> Result<(), CliError> {
    use std::f64::consts::PI;
    let map: ConformalMap = parse_flag(a.map.get_or_insert_with(|| "koebe".into()))?;
    let widths = a
        .arc_widths
        .get_or_insert_with(|| vec![PI / 8.0, PI / 4.0, PI / 2.0, PI])
        .clone();
    let lambdas = a
        .lambdas
        .get_or_insert_with(|| vec![1.0, 2.0, 4.0, 8.0])
        .clone();
    let points = *a.points.get_or_insert(256);
    let seed = *a.seed.get_or_insert(0);
    let report = verify_beurling(map, &widths, &lambdas, points, seed)?;
    emit("beurling", &a, &report, a.out.as_deref())
}
