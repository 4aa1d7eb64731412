use clap::Args;
use medial_salience::ingest::{BinarizePolicy, Connectivity};
use medial_salience::output::{BitDepth, ChannelSpec, Colormap};
use medial_salience::pipeline::PipelineConfig;
use medial_salience::salience::{parse_measures, Measure, Projection, SalienceConfig};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// AOF threshold for skeleton points, in (0, 2/pi]
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Salience half-window K, in unit samples along a branch
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Radius of the flux disk, in pixels
    #[arg(long, global = true)]
    pub disk_radius: Option<f64>,
    /// Flux samples on the disk boundary
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Branch smoothing before derivatives, in samples
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Comma-separated measures: separation, ribbon, taper
    #[arg(long, global = true)]
    pub measures: Option<String>,
    /// Channel spec such as `contours,ribbon,separation`; repeatable
    #[arg(long, global = true)]
    pub channels: Vec<String>,
    /// Top fraction for splits; repeatable
    #[arg(long, global = true)]
    pub fraction: Vec<f64>,
    /// Background region connectivity: 4 or 8
    #[arg(long, global = true)]
    pub connectivity: Option<String>,
    /// Worker threads for the image pool
    #[arg(long, short = 'j', global = true)]
    pub jobs: Option<usize>,
    /// Also write distance, flux, reconstruction and branch CSV artifacts
    #[arg(long, global = true)]
    pub debug: bool,
    /// Flip the polarity of composed channels and split masks
    #[arg(long, global = true)]
    pub invert_polarity: bool,
    /// TOML config file; flags take precedence over its keys
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, short = 'o', global = true, env = "MEDSAL_OUTPUT", value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Binarization: a gray level (contours are darker) or `adaptive`
    #[arg(long, global = true)]
    pub threshold: Option<Threshold>,
    /// Gaussian smoothing of contour fragments before analysis; 0 only thins
    #[arg(long, global = true)]
    pub contour_sigma: Option<f64>,
    /// Do not treat the image border as a contour
    #[arg(long, global = true)]
    pub no_frame: bool,
    /// Project salience to the nearest medial point instead of along spokes
    #[arg(long, global = true)]
    pub nearest_medial: bool,
    /// Colormap for salience renderings: hot or gray
    #[arg(long, global = true)]
    pub colormap: Option<Colormap>,
    /// Append a legend bar to colormap renderings
    #[arg(long, global = true)]
    pub legend: bool,
    /// Write 16-bit salience and channel PNGs
    #[arg(long, global = true)]
    pub sixteen_bit: bool,
    /// Write the per-branch CSV table
    #[arg(long, global = true)]
    pub csv: bool,
    /// Include stage timings in stats reports (makes them run-dependent)
    #[arg(long, global = true)]
    pub timings: bool,
}

/// Binarization threshold as written on the command line or in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold(pub BinarizePolicy);

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "adaptive" | "otsu" => Ok(Threshold(BinarizePolicy::Adaptive)),
            level => level
                .parse::<u8>()
                .map(|t| Threshold(BinarizePolicy::Fixed(t)))
                .map_err(|_| format!("expected a gray level 0-255 or `adaptive`, got `{level}`")),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            BinarizePolicy::Fixed(t) => write!(f, "{t}"),
            BinarizePolicy::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            BinarizePolicy::Fixed(t) => s.serialize_u8(t),
            BinarizePolicy::Adaptive => s.serialize_str("adaptive"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Level(i64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Level(v) => u8::try_from(v)
                .map(|t| Threshold(BinarizePolicy::Fixed(t)))
                .map_err(|_| serde::de::Error::custom(format!("threshold {v} is outside 0-255"))),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Keys accepted in the config file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    tau: Option<f64>,
    window: Option<usize>,
    disk_radius: Option<f64>,
    samples: Option<usize>,
    sigma: Option<f64>,
    measures: Option<Vec<Measure>>,
    channels: Option<Vec<ChannelSpec>>,
    fractions: Option<Vec<f64>>,
    connectivity: Option<u8>,
    jobs: Option<usize>,
    debug: Option<bool>,
    invert_polarity: Option<bool>,
    output: Option<PathBuf>,
    threshold: Option<Threshold>,
    contour_sigma: Option<f64>,
    frame: Option<bool>,
    projection: Option<Projection>,
    colormap: Option<String>,
    legend: Option<bool>,
    sixteen_bit: Option<bool>,
    csv: Option<bool>,
    timings: Option<bool>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// The fully resolved run configuration. Its serialized form is echoed
/// beside the outputs; the worker count and output directory are left out
/// because they do not change any artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub threshold: Threshold,
    pub contour_sigma: f64,
    pub tau: f64,
    pub window: usize,
    pub disk_radius: f64,
    pub samples: usize,
    pub sigma: f64,
    pub stroke_sigma: f64,
    pub measures: Vec<Measure>,
    pub connectivity: u8,
    pub frame: bool,
    pub projection: Projection,
    pub channels: Vec<ChannelSpec>,
    pub fractions: Vec<f64>,
    pub colormap: String,
    pub legend: bool,
    pub sixteen_bit: bool,
    pub invert_polarity: bool,
    pub debug: bool,
    pub csv: bool,
    pub timings: bool,
    #[serde(skip)]
    pub jobs: usize,
    #[serde(skip)]
    pub output: PathBuf,
}

impl RunConfig {
    pub fn resolve(command: &str, inputs: Vec<PathBuf>, flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let base = SalienceConfig::default();
        let measures = match (&flags.measures, file.measures) {
            (Some(list), _) => parse_measures(list).map_err(|e| bad(e.to_string()))?,
            (None, Some(list)) => list,
            (None, None) => base.measures.clone(),
        };
        let channels = if flags.channels.is_empty() {
            file.channels
                .unwrap_or_else(|| vec!["contours,ribbon,separation".parse().expect("default channel spec parses")])
        } else {
            flags
                .channels
                .iter()
                .map(|c| c.parse::<ChannelSpec>().map_err(|e| bad(e.to_string())))
                .collect::<Result<_, _>>()?
        };
        let fractions = if flags.fraction.is_empty() { file.fractions.unwrap_or_else(|| vec![0.5]) } else { flags.fraction.clone() };
        let connectivity = match (&flags.connectivity, file.connectivity) {
            (Some(c), _) => c.trim().parse::<u8>().map_err(|_| bad(format!("connectivity must be 4 or 8, got `{c}`")))?,
            (None, Some(c)) => c,
            (None, None) => 4,
        };
        let colormap = match (&flags.colormap, &file.colormap) {
            (Some(c), _) => *c,
            (None, Some(c)) => c.parse().map_err(|e: medial_salience::Error| bad(e.to_string()))?,
            (None, None) => Colormap::Hot,
        };
        let projection = if flags.nearest_medial { Projection::NearestMedial } else { file.projection.unwrap_or_default() };
        let output = flags.output.clone().or(file.output).unwrap_or_else(|| PathBuf::from("medsal-out"));
        let cfg = RunConfig {
            command: command.to_string(),
            inputs,
            threshold: flags.threshold.or(file.threshold).unwrap_or(Threshold(BinarizePolicy::default())),
            contour_sigma: flags.contour_sigma.or(file.contour_sigma).unwrap_or(0.0),
            tau: flags.tau.or(file.tau).unwrap_or(base.tau),
            window: flags.window.or(file.window).unwrap_or(base.window),
            disk_radius: flags.disk_radius.or(file.disk_radius).unwrap_or(base.disk_radius),
            samples: flags.samples.or(file.samples).unwrap_or(base.samples),
            sigma: flags.sigma.or(file.sigma).unwrap_or(base.sigma),
            stroke_sigma: base.stroke_sigma,
            measures,
            connectivity,
            frame: !flags.no_frame && file.frame.unwrap_or(true),
            projection,
            channels,
            fractions,
            colormap: colormap.to_string(),
            legend: flags.legend || file.legend.unwrap_or(false),
            sixteen_bit: flags.sixteen_bit || file.sixteen_bit.unwrap_or(false),
            invert_polarity: flags.invert_polarity || file.invert_polarity.unwrap_or(false),
            debug: flags.debug || file.debug.unwrap_or(false),
            csv: flags.csv || file.csv.unwrap_or(false),
            timings: flags.timings || file.timings.unwrap_or(false),
            jobs: flags.jobs.or(file.jobs).unwrap_or_else(default_jobs),
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline().salience.validate().map_err(|e| bad(e.to_string()))?;
        if self.jobs == 0 {
            return Err(bad("jobs must be at least 1"));
        }
        if !matches!(self.connectivity, 4 | 8) {
            return Err(bad(format!("connectivity must be 4 or 8, got {}", self.connectivity)));
        }
        if !(self.contour_sigma >= 0.0 && self.contour_sigma.is_finite()) {
            return Err(bad(format!("contour_sigma must be non-negative, got {}", self.contour_sigma)));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(bad(format!("fraction must lie in [0, 1], got {f}")));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            salience: SalienceConfig {
                window: self.window,
                measures: self.measures.clone(),
                tau: self.tau,
                sigma: self.sigma,
                disk_radius: self.disk_radius,
                samples: self.samples,
                stroke_sigma: self.stroke_sigma,
                projection: self.projection,
            },
            connectivity: if self.connectivity == 8 { Connectivity::Eight } else { Connectivity::Four },
            frame: self.frame,
        }
    }

    pub fn colormap(&self) -> Colormap {
        self.colormap.parse().unwrap_or(Colormap::Hot)
    }

    pub fn bit_depth(&self) -> BitDepth {
        if self.sixteen_bit {
            BitDepth::Sixteen
        } else {
            BitDepth::Eight
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
