//! Role placement (SOAPs, beacons, secret servlets) and the target's
//! perimeter filter.

mod assign;
mod filter;
mod lease;

pub use assign::{beacon_key, derive_beacons, select_servlets, select_servlets_avoiding, RoleAssignment};
pub use filter::{filter_check, update_filter, FilterPolicy, FilterVerdict, PerimeterFilter};
pub use lease::{LeaseBook, ServletLease};
