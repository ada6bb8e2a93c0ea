//! JSON experiment configurations and their conversion to core types.

use anyhow::{anyhow, bail, Result};
use emproc_core::{
    CoordinationProblem, DiscreteMeasure, FunctionClass, JointPmf, ModelMeasure, Point,
    ProductSplit, SideInfoProblem, WzStage1,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureDto {
    /// Finitely supported over alphabet symbols.
    Finite { support: Vec<usize>, weights: Vec<f64> },
    /// Finitely supported over points in R^d.
    Vector { support: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl MeasureDto {
    pub fn to_core(&self) -> Result<DiscreteMeasure> {
        let (support, weights) = match self {
            MeasureDto::Finite { support, weights } => (
                support.iter().map(|&s| Point::Symbol(s)).collect::<Vec<_>>(),
                weights.clone(),
            ),
            MeasureDto::Vector { support, weights } => (
                support.iter().map(|v| Point::Vector(v.clone())).collect(),
                weights.clone(),
            ),
        };
        Ok(DiscreteMeasure::new(support, weights)?)
    }

    pub fn from_core(m: &DiscreteMeasure) -> Self {
        let weights = m.weights().to_vec();
        match m.kind() {
            emproc_core::PointKind::Symbol => MeasureDto::Finite {
                support: m.support().iter().map(|p| p.symbol().unwrap()).collect(),
                weights,
            },
            emproc_core::PointKind::Vector(_) => MeasureDto::Vector {
                support: m
                    .support()
                    .iter()
                    .map(|p| p.coords().unwrap().to_vec())
                    .collect(),
                weights,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelDto {
    FinitePmf { weights: Vec<f64> },
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    ReferenceSample { sample: MeasureDto, nonatomic: bool },
}

impl ModelDto {
    pub fn to_core(&self) -> Result<ModelMeasure> {
        Ok(match self {
            ModelDto::FinitePmf { weights } => ModelMeasure::finite_pmf(weights.clone())?,
            ModelDto::UniformBox { lo, hi } => ModelMeasure::uniform_box(lo.clone(), hi.clone())?,
            ModelDto::ReferenceSample { sample, nonatomic } => {
                ModelMeasure::reference_sample(sample.to_core()?, *nonatomic)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "split", rename_all = "snake_case")]
pub enum SplitDto {
    VectorPrefix { x_dim: usize },
    SymbolPair { x_card: usize, y_card: usize },
}

impl SplitDto {
    pub fn to_core(&self) -> ProductSplit {
        match self {
            SplitDto::VectorPrefix { x_dim } => ProductSplit::VectorPrefix { x_dim: *x_dim },
            SplitDto::SymbolPair { x_card, y_card } => ProductSplit::SymbolPair {
                x_card: *x_card,
                y_card: *y_card,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassDto {
    AllFunctions { alphabet: usize },
    HalfLines,
    Halfspaces { dim: usize },
    Rectangles { dim: usize },
    Balls { dim: usize },
    VoronoiCells { sites: usize, dim: usize },
    BoundedLipschitz,
    ConvexHull { table: Vec<Vec<f64>> },
    Composed { base: Box<ClassDto>, split: SplitDto },
}

impl ClassDto {
    pub fn to_core(&self) -> FunctionClass {
        match self {
            ClassDto::AllFunctions { alphabet } => FunctionClass::AllFunctions {
                alphabet: *alphabet,
            },
            ClassDto::HalfLines => FunctionClass::HalfLines,
            ClassDto::Halfspaces { dim } => FunctionClass::Halfspaces { dim: *dim },
            ClassDto::Rectangles { dim } => FunctionClass::Rectangles { dim: *dim },
            ClassDto::Balls { dim } => FunctionClass::Balls { dim: *dim },
            ClassDto::VoronoiCells { sites, dim } => FunctionClass::VoronoiCells {
                sites: *sites,
                dim: *dim,
            },
            ClassDto::BoundedLipschitz => FunctionClass::BoundedLipschitz,
            ClassDto::ConvexHull { table } => FunctionClass::ConvexHull {
                table: table.clone(),
            },
            ClassDto::Composed { base, split } => FunctionClass::Composed {
                base: Box::new(base.to_core()),
                split: split.to_core(),
            },
        }
    }
}

/// Right side of a seminorm difference: a measure or a model law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsDto {
    Measure(MeasureDto),
    Model(ModelDto),
}

/// A tuple of sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TupleDto {
    Symbols(Vec<usize>),
    Vectors(Vec<Vec<f64>>),
}

impl TupleDto {
    pub fn to_points(&self) -> Vec<Point> {
        match self {
            TupleDto::Symbols(v) => v.iter().map(|&s| Point::Symbol(s)).collect(),
            TupleDto::Vectors(v) => v.iter().map(|c| Point::Vector(c.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordinationDto {
    pub source: Vec<f64>,
    pub kernel: Vec<Vec<f64>>,
    pub class: ClassDto,
    pub delta: f64,
}

impl CoordinationDto {
    pub fn to_core(&self) -> CoordinationProblem {
        CoordinationProblem {
            source: self.source.clone(),
            kernel: self.kernel.clone(),
            class: self.class.to_core(),
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideInfoDto {
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<f64>,
    pub class: ClassDto,
    pub delta: f64,
    pub u_bound: usize,
}

impl SideInfoDto {
    pub fn to_core(&self) -> Result<SideInfoProblem> {
        Ok(SideInfoProblem {
            joint: JointPmf::new(self.nx, self.ny, self.cells.clone())?,
            class: self.class.to_core(),
            delta: self.delta,
            u_bound: self.u_bound,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Stage1Dto {
    Identity,
    Piggyback { kernel: Vec<Vec<f64>>, rate: f64 },
}

impl Stage1Dto {
    pub fn to_core(&self) -> WzStage1 {
        match self {
            Stage1Dto::Identity => WzStage1::Identity,
            Stage1Dto::Piggyback { kernel, rate } => WzStage1::Piggyback {
                kernel: kernel.clone(),
                rate: *rate,
            },
        }
    }
}

/// One experiment: the command plus its inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandDto {
    Seminorm {
        class: ClassDto,
        lhs: MeasureDto,
        rhs: RhsDto,
    },
    Typical {
        class: ClassDto,
        model: ModelDto,
        tuple: TupleDto,
        epsilon: f64,
    },
    Converge {
        class: ClassDto,
        model: ModelDto,
        n_grid: Vec<usize>,
        trials: usize,
    },
    Rate {
        problem: CoordinationDto,
    },
    RateCurve {
        problem: CoordinationDto,
        delta_grid: Vec<f64>,
    },
    SimulateCoord {
        problem: CoordinationDto,
        /// Absolute rate in bits per symbol; alternatively give an offset
        /// above the solved rate at the problem's delta.
        rate: Option<f64>,
        rate_above_solution: Option<f64>,
        n: usize,
        trials: usize,
    },
    SimulateWz {
        problem: SideInfoDto,
        g: Vec<Vec<usize>>,
        stage1: Stage1Dto,
        r_bin: f64,
        n1: usize,
        n2: usize,
        trials: usize,
        density_slack: Option<f64>,
    },
    Shatter {
        class: ClassDto,
        points: Vec<Vec<f64>>,
    },
    Scaling {
        class: ClassDto,
        model: ModelDto,
        n_grid: Vec<usize>,
        trials: usize,
    },
    Quantize {
        mu: MeasureDto,
        class: ClassDto,
        m: usize,
        split: Option<SplitDto>,
    },
}

impl CommandDto {
    pub fn name(&self) -> &'static str {
        match self {
            CommandDto::Seminorm { .. } => "seminorm",
            CommandDto::Typical { .. } => "typical",
            CommandDto::Converge { .. } => "converge",
            CommandDto::Rate { .. } => "rate",
            CommandDto::RateCurve { .. } => "rate-curve",
            CommandDto::SimulateCoord { .. } => "simulate-coord",
            CommandDto::SimulateWz { .. } => "simulate-wz",
            CommandDto::Shatter { .. } => "shatter",
            CommandDto::Scaling { .. } => "scaling",
            CommandDto::Quantize { .. } => "quantize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// The config file: a command plus optional defaults for the run flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: CommandDto,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| anyhow!("config parse error: {e}"))
}

/// Resolved run parameters after merging flags over config defaults.
pub struct Resolved {
    pub seed: u64,
    pub out: std::path::PathBuf,
    pub format: OutputFormat,
    pub threads: usize,
}

pub fn resolve(
    cfg: &ExperimentConfig,
    seed_flag: Option<u64>,
    out_flag: Option<std::path::PathBuf>,
    format_flag: Option<OutputFormat>,
    threads_flag: Option<usize>,
) -> Result<Resolved> {
    let seed = seed_flag
        .or(cfg.seed)
        .ok_or_else(|| anyhow!("a seed is required (config `seed` or --seed)"))?;
    let out = out_flag
        .or_else(|| cfg.out.as_ref().map(std::path::PathBuf::from))
        .ok_or_else(|| anyhow!("an output path is required (config `out` or --out)"))?;
    let format = format_flag.or(cfg.format).unwrap_or(OutputFormat::Csv);
    let threads = match threads_flag {
        Some(t) => t,
        None => match std::env::var("GC_COORD_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| anyhow!("GC_COORD_THREADS must be an integer"))?,
            Err(_) => 1,
        },
    };
    if threads == 0 {
        bail!("threads must be at least 1");
    }
    Ok(Resolved {
        seed,
        out,
        format,
        threads,
    })
}
