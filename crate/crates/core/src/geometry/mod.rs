//! Flow maps, parameter domains and the induced metric of an evolving surface.

pub mod catalog;
pub mod domain;
pub mod flowmap;
pub mod metric;

pub use catalog::{SurfaceConfig, SURFACE_CATALOG};
pub use domain::{BoundarySegment, DomainKind, ParamDomain, Side};
pub use flowmap::{FlowMap, FlowMapSpec, Frozen, Jet, Perturbed, Planar};
pub use metric::{
    eval_conormal, eval_metric, eval_velocity, DerivativeMode, Geometry, MetricState,
};
