use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vqdemark::edges::{self, CannyParams};
use vqdemark::glcm::{self, GlcmFeature};
use vqdemark::imaging::{self, ImageFormat};
use vqdemark::pipeline::{self, PhantomSpec, PipelineConfig};
use vqdemark::vq;
use vqdemark::watershed::{self, WatershedParams};
use vqdemark::Error;

#[derive(Parser)]
#[command(name = "vqdemark", version, about = "Texture segmentation and demarcation of grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full run: cluster images, edge maps, overlays, GLCM maps, watershed and report.
    Pipeline {
        input: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
    },
    /// Vector-quantization cluster images only.
    Vq {
        input: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
    },
    /// One GLCM feature map.
    Glcm {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// probability | entropy | variance | correlation
        #[arg(long, default_value = "entropy")]
        feature: String,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 32)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        distance: usize,
        #[arg(long, default_value_t = 0)]
        angle: u32,
        /// Histogram-equalize the rendered map.
        #[arg(long)]
        equalize: bool,
    },
    /// Sobel gradient plus immersion watershed, written as an overlay.
    Watershed {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Gaussian pre-smoothing sigma; off when omitted.
        #[arg(long)]
        presmooth: Option<f64>,
    },
    /// Canny edge map.
    Canny {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.4)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        low: f64,
        #[arg(long, default_value_t = 0.3)]
        high: f64,
        /// Draw the edges over the input instead of writing a bare mask.
        #[arg(long)]
        overlay: bool,
    },
    /// Synthetic disc phantom.
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 128)]
        width: usize,
        #[arg(long, default_value_t = 128)]
        height: usize,
        #[arg(long, default_value_t = 64.0)]
        cx: f64,
        #[arg(long, default_value_t = 64.0)]
        cy: f64,
        #[arg(long, default_value_t = 15.0)]
        radius: f64,
        #[arg(long, default_value_t = 60.0)]
        bg: f64,
        #[arg(long, default_value_t = 200.0)]
        tumor: f64,
        #[arg(long, default_value_t = 10.0)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run every method and print the comparison report as JSON.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
    },
}

#[derive(Args)]
struct PipelineOpts {
    /// INI file with `key = value` settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    codebook_size: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    /// Block size as WxH, e.g. 4x3.
    #[arg(long)]
    block: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    low: Option<f64>,
    #[arg(long)]
    high: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list of clusters, edges, superimposed, glcm, watershed, report (or `all`).
    #[arg(long)]
    emit: Option<String>,
    /// pgm or png.
    #[arg(long)]
    format: Option<String>,
    /// Ground-truth disc `cx,cy,r` for phantom metrics.
    #[arg(long)]
    truth: Option<String>,
    /// Record wall-clock stage times in report.json.
    #[arg(long)]
    timings: bool,
}

impl PipelineOpts {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_ini_file(path)?,
            None => PipelineConfig::default(),
        };
        let overrides: [(&str, Option<String>); 13] = [
            ("codebook_size", self.codebook_size.map(|v| v.to_string())),
            ("groups", self.groups.map(|v| v.to_string())),
            ("block", self.block.clone()),
            ("window", self.window.map(|v| v.to_string())),
            ("levels", self.levels.map(|v| v.to_string())),
            ("sigma", self.sigma.map(|v| v.to_string())),
            ("low", self.low.map(|v| v.to_string())),
            ("high", self.high.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("emit", self.emit.clone()),
            ("format", self.format.clone()),
            ("truth", self.truth.clone()),
            ("timings", self.timings.then(|| "true".to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_feature(s: &str) -> Result<GlcmFeature, Error> {
    match s.to_ascii_lowercase().as_str() {
        "probability" | "max_probability" => Ok(GlcmFeature::MaxProbability),
        "entropy" => Ok(GlcmFeature::Entropy),
        "variance" => Ok(GlcmFeature::Variance),
        "correlation" => Ok(GlcmFeature::Correlation),
        other => Err(Error::Config(format!("unknown GLCM feature `{other}`"))),
    }
}

fn save(img: &imaging::GrayImage, path: &Path) -> Result<(), Error> {
    imaging::save_image(img, path, ImageFormat::from_path(path))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Pipeline { input, opts } => {
            let cfg = opts.resolve()?;
            pipeline::run_pipeline(&cfg, &input)?;
        }
        Command::Vq { input, opts } => {
            let mut cfg = opts.resolve()?;
            cfg.emit = [pipeline::Emit::Clusters].into_iter().collect();
            let img = imaging::load_image(&input)?;
            let ts = vq::extract_training_vectors(&img, cfg.block_w, cfg.block_h)?;
            let (cb, asg) = vq::lbg_generate(&ts.vectors, cfg.codebook_size, &cfg.split)?;
            let gm = vq::requantize(&cb, cfg.group_count, &cfg.split)?;
            let images = vq::cluster_images(&img, &ts.geometry, &asg, &gm)?;
            std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::IoFailure {
                path: cfg.output_dir.clone(),
                source: e,
            })?;
            let ext = match cfg.format {
                ImageFormat::Pgm => "pgm",
                ImageFormat::Png => "png",
            };
            for (g, c) in images.iter().enumerate() {
                imaging::save_image(c, cfg.output_dir.join(format!("cluster_{g}.{ext}")), cfg.format)?;
            }
            println!("codebook {} distortion {:.6}", cb.len(), cb.distortion);
        }
        Command::Glcm {
            input,
            out,
            feature,
            window,
            levels,
            distance,
            angle,
            equalize,
        } => {
            let mut cfg = PipelineConfig::default();
            cfg.set("window", &window.to_string())?;
            cfg.set("levels", &levels.to_string())?;
            cfg.set("distance", &distance.to_string())?;
            cfg.set("angle", &angle.to_string())?;
            cfg.glcm.validate().map_err(|e| Error::Config(e.to_string()))?;
            let feature = parse_feature(&feature)?;
            let img = imaging::load_image(&input)?;
            let map = glcm::feature_map(&img, &cfg.glcm, feature)?;
            let mut rendered = glcm::render_feature(&map);
            if equalize {
                rendered = imaging::histogram_equalize(&rendered);
            }
            save(&rendered, &out)?;
        }
        Command::Watershed {
            input,
            out,
            presmooth,
        } => {
            let img = imaging::load_image(&input)?;
            let params = WatershedParams {
                presmooth_sigma: presmooth,
            };
            let labels = watershed::segment_image(&img, &params)?;
            let overlay = edges::superimpose(&img, &watershed::watershed_edges(&labels))?;
            save(&overlay, &out)?;
            println!("regions {}", labels.region_count);
        }
        Command::Canny {
            input,
            out,
            sigma,
            low,
            high,
            overlay,
        } => {
            let params = CannyParams { sigma, low, high };
            params.validate().map_err(|e| Error::Config(e.to_string()))?;
            let img = imaging::load_image(&input)?;
            let em = edges::canny(&img, &params)?;
            let rendered = if overlay {
                edges::superimpose(&img, &em)?
            } else {
                em.to_image()
            };
            save(&rendered, &out)?;
        }
        Command::Phantom {
            out,
            width,
            height,
            cx,
            cy,
            radius,
            bg,
            tumor,
            noise,
            seed,
        } => {
            let spec = PhantomSpec {
                width,
                height,
                tumor_cx: cx,
                tumor_cy: cy,
                tumor_r: radius,
                bg_mean: bg,
                tumor_mean: tumor,
                noise_sigma: noise,
                seed,
            };
            let img = pipeline::generate_phantom(&spec).map_err(|e| Error::Config(e.to_string()))?;
            save(&img, &out)?;
        }
        Command::Compare { input, opts } => {
            let cfg = opts.resolve()?;
            let report = pipeline::compare_methods(&input, &cfg)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
            println!("{text}");
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::IoFailure { .. } | Error::MalformedFile(_) | Error::UnsupportedDepth(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match pipeline::thread_pool_from_env() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("vqdemark: {e}");
            return ExitCode::from(3);
        }
    };
    let result = match pool {
        Some(pool) => pool.install(|| run(cli.command)),
        None => run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vqdemark: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
