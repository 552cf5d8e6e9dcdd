//! Families approaching the sharp constants, concentration scans and a
//! derivative-free search over discretized profiles.

mod families;
mod optimize;
mod scan;

pub use families::{
    adams_cap, adams_profile_unscaled, adams_um, cutoff, make_bubble, make_truncated_bubble, poincare_spreading,
    rellich_powerlaw, smooth_step, ProfileFamily, FAMILY_DENSITY, RELLICH_SHAPE,
};
pub use optimize::{optimize_ratio, optimize_seeds, OptKind, OptimizeConfig, OptimizeResult};
pub use scan::{
    adams_normalization_fit, adams_sequence, adams_sharpness_scan, keytool_deficit, ls_slope, poincare_scan,
    rellich_ratio, rellich_sharpness_scan, sobolev_ratio, sobolev_sharpness_scan, AdamsMember, ScanResult,
    BUBBLE_CUTOFF, RELLICH_OUTER_RADIUS,
};
