use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "johnforge",
    version,
    about = "Whitney decompositions, John-domain surgery and planar potential theory on dyadic grids"
)]
pub struct Cli {
    /// TOML file holding parameters of the subcommand (flag names with
    /// underscores). Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rasterize a shape into a mask file.
    Rasterize(RasterizeArgs),
    /// Whitney decomposition of the complement of a set.
    Whitney(WhitneyArgs),
    /// Certified lower bound for the John constant.
    JohnEstimate(JohnArgs),
    /// Build the layered John graph and cut slits along it.
    Simplify(SimplifyArgs),
    /// Re-run the construction from a simplify output and check the cut domain.
    Verify(VerifyArgs),
    /// Logarithmic capacity of a set.
    Capacity(CapacityArgs),
    /// Harmonic extension of a trace off a set.
    Harmonic(HarmonicArgs),
    /// Harmonic measure by walk-on-spheres.
    Measure(MeasureArgs),
    /// Collar-smoothing removability experiment.
    Removability(RemovabilityArgs),
    /// Cauchy-transform witness of non-removability for sets of positive area.
    Witness(WitnessArgs),
    /// Distortion checks for univalent maps of the disk.
    Beurling(BeurlingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rasterize(_) => "rasterize",
            Command::Whitney(_) => "whitney",
            Command::JohnEstimate(_) => "john-estimate",
            Command::Simplify(_) => "simplify",
            Command::Verify(_) => "verify",
            Command::Capacity(_) => "capacity",
            Command::Harmonic(_) => "harmonic",
            Command::Measure(_) => "measure",
            Command::Removability(_) => "removability",
            Command::Witness(_) => "witness",
            Command::Beurling(_) => "beurling",
        }
    }
}

/// Fields shared by every subcommand that starts from a compact set. Either
/// `shape` (rasterized at `level` in the shape's default box or in `box`) or
/// `mask` (a mask file) is required.
macro_rules! set_source_args {
    ($(#[$meta:meta])* pub struct $name:ident { $($body:tt)* }) => {
        $(#[$meta])*
        #[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name {
            /// Shape spec, e.g. `disk:0.5`, `segment:4`, `cantor:0.25,6`, `julia:0,1`.
            #[arg(long)]
            pub shape: Option<String>,
            /// Mask file written by `rasterize` (instead of `shape`).
            #[arg(long)]
            pub mask: Option<PathBuf>,
            /// Grid level: the box is split into 2^level pixels per side.
            #[arg(long)]
            pub level: Option<u32>,
            /// Half-side of the bounding box (default: the shape's own frame).
            #[arg(long = "box")]
            #[serde(rename = "box")]
            pub half_side: Option<f64>,
            /// Center `x,y` of the bounding box.
            #[arg(long)]
            pub box_center: Option<String>,
            $($body)*
        }
    };
}

#[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RasterizeArgs {
    /// Shape spec, e.g. `disk:0.5`, `segment:4`, `cantor:0.25,6`, `julia:0,1`
    #[arg(long)]
    pub shape: Option<String>,
    /// Grid level: the box is split into 2^level pixels per side
    #[arg(long)]
    pub level: Option<u32>,
    /// Half-side of the bounding box (default: the shape's own frame)
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub half_side: Option<f64>,
    /// Center `x,y` of the bounding box
    #[arg(long)]
    pub box_center: Option<String>,
    /// JSON output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

set_source_args! {
    pub struct WhitneyArgs {
        /// Deepest subdivision level (default: the mask level).
        #[arg(long)]
        pub deepest: Option<u32>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// SVG rendering
        #[arg(long)]
        pub svg: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct JohnArgs {
        /// Whitney file written by `whitney` (instead of a set source).
        #[arg(long = "in")]
        #[serde(rename = "in")]
        pub input: Option<PathBuf>,
        /// `inf` or a point `x,y` of the domain.
        #[arg(long)]
        pub center: Option<String>,
        /// Number of sampled boundary points
        #[arg(long)]
        pub samples: Option<usize>,
        /// Seed for every random choice
        #[arg(long)]
        pub seed: Option<u64>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// SVG rendering
        #[arg(long)]
        pub svg: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct SimplifyArgs {
        /// Input file written by the previous stage
        #[arg(long = "in")]
        #[serde(rename = "in")]
        pub input: Option<PathBuf>,
        /// Layer constant.
        #[arg(long = "A")]
        #[serde(rename = "A")]
        pub a: Option<f64>,
        /// Gate parameter.
        #[arg(long)]
        pub delta: Option<f64>,
        /// Last layer (default: until the layers reach the smallest square).
        #[arg(long)]
        pub n_max: Option<u32>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// SVG rendering
        #[arg(long)]
        pub svg: Option<PathBuf>,
    }
}

#[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyArgs {
    /// Output of `simplify`.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Boundary samples for the John comparison (0 skips it).
    #[arg(long)]
    pub john_samples: Option<usize>,
    /// Seed for every random choice
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

set_source_args! {
    pub struct CapacityArgs {
        /// `fekete` or `energy`.
        #[arg(long)]
        pub method: Option<String>,
        /// Number of capacity sites
        #[arg(long)]
        pub points: Option<usize>,
        /// Seed for every random choice
        #[arg(long)]
        pub seed: Option<u64>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct HarmonicArgs {
        /// `constant[:c]`, `coordinate[:scale]` or `random[:terms]`.
        #[arg(long)]
        pub trace: Option<String>,
        /// Seed for every random choice
        #[arg(long)]
        pub seed: Option<u64>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// Flat binary export of the field (sidecar at `<field>.json`).
        #[arg(long)]
        pub field: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct MeasureArgs {
        /// Disk domain radius (used when no set source is given).
        #[arg(long)]
        pub radius: Option<f64>,
        /// Disk center `x,y`.
        #[arg(long)]
        pub disk_center: Option<String>,
        /// Target arcs on the disk boundary, `start,width;start,width`.
        #[arg(long)]
        pub arcs: Option<String>,
        /// Shape whose pixels, intersected with the set, form the target
        /// (set-complement domains only; default: the whole set).
        #[arg(long)]
        pub target: Option<String>,
        /// Start point `x,y`.
        #[arg(long)]
        pub start: Option<String>,
        /// Number of walks
        #[arg(long)]
        pub walks: Option<usize>,
        /// Stopping shell width (default: 1.5 pixels at `level`).
        #[arg(long)]
        pub shell: Option<f64>,
        /// Seed for every random choice
        #[arg(long)]
        pub seed: Option<u64>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct RemovabilityArgs {
        /// Trace on the set: `random[:terms]`, `constant[:value]` or `coordinate[:scale]`
        #[arg(long)]
        pub trace: Option<String>,
        /// Collar indices: collar widths are `unit / n`.
        #[arg(long, value_delimiter = ',')]
        pub n_list: Option<Vec<usize>>,
        /// Length unit for the collar widths
        #[arg(long)]
        pub unit: Option<f64>,
        /// Seed for every random choice
        #[arg(long)]
        pub seed: Option<u64>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// CSV of `(n, verdict_gap)`.
        #[arg(long)]
        pub csv: Option<PathBuf>,
        /// Heat map of the smoothed gradient density in the finest collar.
        #[arg(long)]
        pub svg: Option<PathBuf>,
    }
}

set_source_args! {
    pub struct WitnessArgs {
        /// Comma-separated frequencies
        #[arg(long, value_delimiter = ',')]
        pub n_list: Option<Vec<usize>>,
        /// JSON output file (default: stdout)
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// CSV table
        #[arg(long)]
        pub csv: Option<PathBuf>,
    }
}

#[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BeurlingArgs {
    /// `identity`, `koebe` or `sqrt_slit`.
    #[arg(long)]
    pub map: Option<String>,
    /// Angular widths of the arcs (centered at pi).
    #[arg(long, value_delimiter = ',')]
    pub arc_widths: Option<Vec<f64>>,
    /// Ray-length thresholds.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Number of capacity sites
    #[arg(long)]
    pub points: Option<usize>,
    /// Seed for every random choice
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Overlays the flags given on the command line onto the config table.
/// Unknown config keys are rejected by the target type.
pub fn merge<T: Serialize + DeserializeOwned>(
    cli: &T,
    config: Option<&toml::Table>,
) -> Result<T, CliError> {
    let mut base = match config {
        Some(t) => serde_json::to_value(t).map_err(|e| CliError::Usage(format!("config: {e}")))?,
        None => Value::Object(Default::default()),
    };
    let over = serde_json::to_value(cli).map_err(|e| CliError::Usage(e.to_string()))?;
    if let (Value::Object(b), Value::Object(o)) = (&mut base, over) {
        for (k, v) in o {
            if !v.is_null() {
                b.insert(k, v);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// Reads a TOML config. An optional `command` key must name the subcommand.
pub fn load_config(path: &std::path::Path, command: &str) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut table: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    if let Some(v) = table.remove("command") {
        if v.as_str() != Some(command) {
            return Err(CliError::Usage(format!(
                "config {} is for `{v}`, not `{command}`",
                path.display()
            )));
        }
    }
    Ok(table)
}
