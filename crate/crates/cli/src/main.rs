//! `convpyr` command-line interface.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "convpyr", version, about = "Dense multiscale convolutional descriptor pyramids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Pyramid configuration. Precedence: flag > --config file > built-in default.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// JSON config file with any of: interval, max_scale, min_size_px,
    /// canvas_w, canvas_h, border_px, mean, net {preset, seed}
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Scales per octave [default: 5]
    #[arg(long)]
    pub interval: Option<usize>,
    /// Largest pyramid scale [default: 2.0]
    #[arg(long)]
    pub max_scale: Option<f64>,
    /// Smallest allowed short side of a level, in pixels [default: 16]
    #[arg(long = "min-size", value_name = "PX")]
    pub min_size: Option<usize>,
    /// Canvas size as WxH [default: 1200x1200]
    #[arg(long, value_name = "WxH", value_parser = commands::parse_dims)]
    pub canvas: Option<(usize, usize)>,
    /// Border added around every level, in pixels [default: 16]
    #[arg(long, value_name = "PX")]
    pub border: Option<usize>,
    /// Mean pixel as R,G,B [default: 104,117,123]
    #[arg(long, value_name = "R,G,B", value_parser = commands::parse_mean)]
    pub mean: Option<convpyr::MeanPixel>,
    /// Network preset: tiny, small or stride16 [default: small]
    #[arg(long)]
    pub preset: Option<String>,
    /// Seed for generated network weights [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a feature pyramid and write manifest.json plus per-level tensors
    Extract {
        /// Input image (PNG, PPM or PGM)
        #[arg(required_unless_present = "glob")]
        image: Option<PathBuf>,
        /// Process every file matching this pattern into OUT/<file stem>/
        #[arg(long, conflicts_with = "image")]
        glob: Option<String>,
        /// Output directory
        #[arg(long, short)]
        out: PathBuf,
        /// Also build a warped pyramid per aspect ratio (width/height) into
        /// OUT/aspect_<i>/
        #[arg(long = "aspect", value_name = "RATIO")]
        aspects: Vec<f64>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Crop the descriptor region for an image-space box from a saved pyramid
    Crop {
        /// Directory written by `extract`
        pyramid: PathBuf,
        /// Source-image box as x0,y0,x1,y1 (half-open)
        #[arg(long = "box", value_name = "X0,Y0,X1,Y1", value_parser = commands::parse_box)]
        region: convpyr::BoxPx,
        /// Desired crop size in feature cells as W,H
        #[arg(long, value_name = "W,H", value_parser = commands::parse_pair)]
        target: (usize, usize),
        /// Output tensor path; a JSON sidecar is written next to it
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write one pyramid level as a PGM of per-cell channel sums
    Visualize {
        /// Directory written by `extract`
        pyramid: PathBuf,
        /// Level index
        #[arg(long)]
        level: usize,
        /// Output PGM path
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Time one dense forward plus crops against per-window forwards
    Bench {
        /// Input image (PNG, PPM or PGM)
        image: PathBuf,
        /// Network preset [default: tiny]
        #[arg(long, default_value = "tiny")]
        preset: String,
        /// Weight seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of stride-aligned windows
        #[arg(long, default_value_t = 500)]
        windows: usize,
        /// Window side in pixels [default: receptive field]
        #[arg(long, value_name = "PX")]
        window_side: Option<usize>,
        /// Mean pixel as R,G,B
        #[arg(long, value_name = "R,G,B", value_parser = commands::parse_mean, default_value = "104,117,123")]
        mean: convpyr::MeanPixel,
        /// Emit JSON instead of a text table
        #[arg(long)]
        json: bool,
    },
    /// Analytic region count and dense-vs-per-region speedup
    Analytic {
        /// Image side N in pixels
        n: u64,
        /// Region side M in pixels
        m: u64,
        /// Window stride in pixels
        stride: u64,
        /// Count (N-M)/stride positions per axis, without the +1 fencepost
        #[arg(long)]
        paper_faithful: bool,
        /// Emit JSON instead of a text table
        #[arg(long)]
        json: bool,
    },
    /// Dump the canvas packing plan (JSON) and optional occupancy masks
    PackDebug {
        /// Input image (PNG, PPM or PGM)
        image: PathBuf,
        /// Output directory
        #[arg(long, short)]
        out: PathBuf,
        /// Also write one PGM occupancy mask per canvas
        #[arg(long)]
        masks: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Extract { image, glob, out, aspects, cfg } => {
            commands::extract(image.as_deref(), glob.as_deref(), &out, &aspects, &cfg)
        }
        Command::Crop { pyramid, region, target, out } => commands::crop(&pyramid, &region, target, &out),
        Command::Visualize { pyramid, level, out } => commands::visualize(&pyramid, level, &out),
        Command::Bench { image, preset, seed, windows, window_side, mean, json } => {
            commands::bench(&image, &preset, seed, windows, window_side, mean, json)
        }
        Command::Analytic { n, m, stride, paper_faithful, json } => {
            commands::analytic(n, m, stride, paper_faithful, json)
        }
        Command::PackDebug { image, out, masks, cfg } => commands::pack_debug(&image, &out, masks, &cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
