//! Numerical laboratory for Cartan-type connections on pseudo-Finsler manifolds.
//!
//! Every geometric quantity is computed in one chart at a point `(x, y)` of
//! the slit tangent bundle `M'`, with derivatives supplied by forward-mode
//! [`Jet`]s. The core is generic over [`Scalar`]; the aliases below fix it
//! to `f64`.

pub mod connection;
pub mod expr;
pub mod jet;
pub mod kahler;
pub mod linalg;
pub mod metric;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod scenario;
pub mod tolerance;

pub use connection::{
    AdaptedField, AdaptedVector, ConnectionData, ConnectionError, ConnectionSource, CoordField,
    FrameBrackets, NonlinearConnection, SkewTensor, TorsionBlocks, TorsionInputs,
};
pub use jet::{Jet, JetError, Layout, VarIndex};
pub use metric::{ChartPoint, FundamentalTensor, GeometryError, MetricSpec};
pub use report::{emit_report, run_checks, CheckId, CheckReport, Format, Status};
pub use sampling::SamplePlan;
pub use scalar::Scalar;
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
pub use tolerance::{Discrepancy, Tolerance};

pub type Jet64 = Jet<f64>;
pub type ChartPoint64 = ChartPoint<f64>;
pub type ConnectionData64 = ConnectionData<f64>;
pub type AdaptedVector64 = AdaptedVector<f64>;
pub type AdaptedField64 = AdaptedField<f64>;
pub type FundamentalTensor64 = FundamentalTensor<f64>;
