//! Hyperelliptic curves with real branch points: periods, Abel–Jacobi map and
//! the divisor-class map into the Jacobian.

mod abel;
mod cache;
mod curve;
mod divisor;
mod lattice;
mod periods;
pub mod quadrature;

pub use abel::{
    abel_jacobi, abel_jacobi_with, random_point, random_point_from, PathOptions, PathRoute,
    SampleRegion, SurfacePoint, PATH_EXCLUSION,
};
pub use cache::{cache_path, load_cached, periods_cached, store, CacheStatus, PeriodCacheFile};
pub use curve::{CurveFile, HyperellipticCurve, MIN_RELATIVE_GAP};
pub use divisor::{divisor_class, divisor_class_with, weierstrass_class, Divisor};
pub use lattice::{lattice_coordinates, lattice_reduce, lattice_residual, quasi_periodicity_factor};
pub use periods::{periods, PeriodData, CALIBRATION_TOLERANCE};
