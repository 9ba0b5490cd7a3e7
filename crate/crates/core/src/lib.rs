//! Combinatorial free probability over exact rationals.
//!
//! Noncrossing partitions and their Möbius function, the moment–cumulant
//! transforms, free products, Poisson limit theorems for projection
//! families, positivity checks for infinite divisibility, full Fock space
//! realisations of free Lévy processes, and a small expression language.

pub mod cumulant;
pub mod dsl;
pub mod error;
pub mod fock;
pub mod freeness;
pub mod infdiv;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod models;
pub mod nc;
pub mod poly;
pub mod scalar;
pub mod word;

pub use cumulant::{cumulants_to_moments, kappa_pi, moments_to_cumulants, phi_pi, CumulantFunctional, MomentFunctional};
pub use error::{Error, Result};
pub use io::{Functional, FunctionalKind};
pub use freeness::{check_freeness, free_product, FreeProductLaw, FreenessReport};
pub use nc::{catalan, enumerate_nc, mobius, MobiusValue, NcPartition};
pub use poly::NcPolynomial;
pub use scalar::{Rational, Scalar};
pub use word::{Word, WordTable};
