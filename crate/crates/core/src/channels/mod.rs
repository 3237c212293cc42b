//! Channels: Kraus maps, cq channels, compound sets, Choi calculus and θ-nets.

mod choi;
mod compound;
mod cq;
pub mod json;
mod kraus;
pub mod library;

pub use choi::{diamond_distance_bounds, ChoiMatrix};
pub use compound::{build_net, distance_table, net_cardinality_bound, net_indices, CompoundSet};
pub use cq::CqChannel;
pub use kraus::{ChannelKind, KrausChannel, CPTP_TOL, TENSOR_POWER_BUDGET};
