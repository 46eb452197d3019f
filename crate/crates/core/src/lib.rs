//! A fixed-point-free Anosov diffeomorphism of the plane with a Reeb component,
//! its invariant foliations, an adapted metric and a numerical verifier.

pub mod config;
pub mod error;
pub mod geometry;
pub mod global_dynamics;
mod json_float;
pub mod local_map;
pub mod norms;
pub mod numeric;
pub mod report;
pub mod scalar_flow;
pub mod svg;
pub mod verifier;

pub use config::{CheckName, Config};
pub use error::{Error, Result};
pub use geometry::{Geometry, PlanePoint, RegionId, Vec2};
pub use global_dynamics::{Bundle, Dynamics, OrbitSegment, TangentVector};
pub use local_map::{Jacobian2, LocalMap, ProfileParams};
pub use norms::{BnCurve, FinalNormSpec, Norms, WeightU};
pub use report::ReportDocument;
pub use scalar_flow::{FlowParams, ScalarFlow};
pub use verifier::{CheckReport, HyperbolicityEstimate, SampleBox, Verifier};
