pub mod analysis;
pub mod bose_hubbard;
pub mod decoherence;
pub mod error;
pub mod linalg;
#[doc(hidden)]
pub mod oracle;
pub mod spectrum;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/decoherence.md")]
    mod decoherence {}
    #[doc = include_str!("../../../book/src/echo.md")]
    mod echo {}
    #[doc = include_str!("../../../book/src/bose_hubbard.md")]
    mod bose_hubbard {}
    #[doc = include_str!("../../../book/src/scan.md")]
    mod scan {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
