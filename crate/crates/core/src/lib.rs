pub mod error;
pub mod events;
pub mod fibonacci;
pub mod kasteleyn;
pub mod lattice;
pub mod limits;
pub mod linalg;
pub mod ring;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
