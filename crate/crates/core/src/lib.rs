pub mod airy;
pub mod error;
pub mod fredholm;
pub mod identities;
pub mod kernels;
pub mod linalg;
pub mod pipeline;
pub mod liu;
pub mod quadrature;
pub mod settings;
pub mod verify;

pub use error::{Error, Result};
pub use settings::Settings;
