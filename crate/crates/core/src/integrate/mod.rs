//! Event-detecting adaptive ODE integration, closed-orbit detection,
//! trapped-set scans, and exit-matching sweeps shared by all plugs.

pub mod dopri;
pub mod scans;
pub mod shooting;

pub use dopri::{
    integrate, integrate_fixed_step, FaceAction, FaceDir, FlowSystem, IntegratorConfig, RawEvent,
    RawTrajectory,
};
pub use scans::{
    closed_orbit_scan, distinct_orbits, exit_match_scan, max_level, trapped_scan,
    ClosedOrbitCandidate, OrbitCensus, Outcome, RecurrenceConfig, SeedRow,
};
pub use shooting::{shoot_periodic, ShootResult};
