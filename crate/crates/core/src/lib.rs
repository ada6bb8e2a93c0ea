//! Empirical-process seminorms, typical sets, coordination rate functions,
//! and random-codebook simulators over finite alphabets and point data in
//! R^d, verified against brute-force oracles at desk scale.
//!
//! The crate is `no_std` + `alloc`: the algorithmic core carries no IO. File
//! formats, CSV/JSON artifacts and the experiment CLI live in the companion
//! `emproc-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod math;

pub mod brute;
pub mod classes;
pub mod coding;
pub mod concentration;
pub mod error;
pub mod lp;
pub mod measure;
pub mod pmf;
pub mod point;
pub mod quantizer;
pub mod rng;
pub mod rates;
pub mod seminorm;
pub mod typicality;

pub use brute::brute_force_sup;
pub use classes::{eval_member, FunctionClass, MemberParams, ProductSplit};
pub use coding::{
    converse_check, mi_sampling_tolerance, simulate_coordination, simulate_wz,
    time_mixed_joint, BlockedPiggyback, ConverseCheck, CoordinationSim, CoordinationTrial,
    PiggybackCode, SimulationReport, WzSim, WzSimConfig, WzSimReport, WzStage1, WzTrial,
};
pub use concentration::{
    covering_number, deviation_scaling, shatter_check, vc_probe, ScalingTable, ShatterResult,
    VcProbe,
};
pub use error::{Error, Result};
pub use math::binary_entropy;
pub use measure::{
    empirical_measure, DiscreteMeasure, ModelKind, ModelMeasure, RhsMeasure, SignedDifference,
};
pub use pmf::{mutual_information, CmiPattern, JointPmf, JointPmf3};
pub use point::{Point, PointKind};
pub use quantizer::{design_quantizer, AssignRule, Quantizer, QuantizerResult};
pub use rates::{
    coordination_rate, multi_distortion_rate, wz_rate, CoordinationProblem,
    MultiDistortionProblem, RateSolution, SideInfoProblem, WzSolution,
};
pub use rng::SplitMix64;
pub use seminorm::{seminorm, SeminormValue};
pub use typicality::{
    convergence_curve, is_typical, project_typical, sample_iid, DeviationRecord,
    TypicalityQuery, TypicalityResult,
};
