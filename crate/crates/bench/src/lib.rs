//! Fixtures shared by the benchmarks.

use s3sr_core::{geodesic_bc, GeodesicParam, TargetPoint};

/// Forward image of a moderate geodesic; reached by a handful of others.
pub fn sample_target() -> TargetPoint {
    TargetPoint::from_point(&geodesic_bc(&GeodesicParam::at_identity(0.7, 0.3), 1.2))
}
