pub mod address;
pub mod analysis;
pub mod error;
pub mod harness;
pub mod packet;
pub mod ring;
pub mod roles;
pub mod seed;
pub mod threat;
pub mod world;

pub use address::Address;
pub use error::{Error, Result};
