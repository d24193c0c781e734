//! Trace functions over prime fields and empirical moments of Dirichlet L-values.
//!
//! The crate is organised in five layers:
//!
//! - [`ffield`]: prime-field contexts (primitive root, discrete-log table),
//!   multiplicative characters, Gauss sums and their angles;
//! - [`tracefn`]: complete exponential-sum tables (Kloosterman, mixed
//!   power-twisted sums, hypergeometric sums), multiplicative convolution,
//!   the naive Fourier transform, and exact identity checks between them;
//! - [`sheafclass`]: the multiset calculus on characters and the monodromy
//!   classification pipeline (Kummer/Belyi induction, twist-selfduality,
//!   candidate groups, the gallant verdict with its exception list);
//! - [`lmoments`]: central values of Dirichlet L-functions computed exactly
//!   at prime modulus, twisted second moments, mollified moments, angular
//!   non-vanishing counts and the Cauchy-Schwarz lower-bound certificate;
//! - [`bilinear`]: bilinear/type-I correlation sums, the polynomial
//!   vanishing oracle behind their estimates, and empirical decay profiles.

pub mod bilinear;
pub mod dft;
mod error;
pub mod ffield;
pub mod lmoments;
pub mod sheafclass;
pub mod tracefn;

pub use error::Error;
pub use ffield::{DirichletCharacter, FieldContext};
pub use lmoments::LValueTable;
pub use sheafclass::{CharacterMultiset, ClassificationVerdict};
pub use tracefn::{SheafDescriptor, TraceTable};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
