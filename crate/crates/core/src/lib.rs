//! Finite ultrametric spaces over exact rational distances.
//!
//! An ultrametric space satisfies the strong triangle inequality
//! `d(x,z) <= max(d(x,y), d(y,z))`, so every triangle is isosceles with the
//! two largest sides equal. This crate provides:
//!
//! * validated construction of finite ultrametric spaces ([`Space`]),
//! * the tree of closed balls with its diameter labelling ([`NerveTree`]),
//! * isometry search, the isometry-extension algorithm, and decision
//!   procedures for transitivity, homogeneity and spectral homogeneity
//!   (module [`isometry`]),
//! * finitely-supported function spaces over a degree function, together
//!   with the canonical embedding of an arbitrary finite ultrametric space
//!   into one (module [`funcspace`]),
//! * symmetric labelled 2-structures, their strong and robust modules, and
//!   the decomposition tree, which coincides with the nerve (module
//!   [`twostruct`]),
//! * deterministic space generators and a JSON file format (modules
//!   [`gen`] and [`mod@format`]).
//!
//! Distance values are generic over [`Value`]: any totally ordered scalar
//! with a zero. All the structure theory here uses only comparisons and
//! maxima, never field arithmetic. The crate-level alias [`Rational`]
//! (exact rationals in lowest terms) is the scalar used by the file format,
//! the generators and the CLI; floating-point types do not implement `Ord`
//! and are deliberately unusable here, since rounding would corrupt ball
//! membership.
//!
//! ```
//! use ultramet::{rat, Space};
//! use ultramet::isometry::{extend_isometry, is_homogeneous};
//!
//! // One close pair plus a far point: not homogeneous (the far point has
//! // a different spectrum), but the swap of the pair still extends.
//! let space = Space::from_entries(
//!     &["a", "b", "c"],
//!     &[("a", "b", rat(1, 2)), ("a", "c", rat(1, 1)), ("b", "c", rat(1, 1))],
//! )?;
//! assert!(!is_homogeneous(&space));
//! let swap = extend_isometry(&space, &[(0, 1)].into_iter().collect())?;
//! assert_eq!(swap, Some(vec![1, 0, 2]));
//! # Ok::<(), ultramet::Error>(())
//! ```

#![forbid(unsafe_code)]
// Error values carry the offending identifiers and distances as strings;
// the enum is large but cold.
#![allow(clippy::result_large_err)]

use std::fmt;

use num_traits::Zero;

pub mod format;
pub mod funcspace;
pub mod gen;
pub mod isometry;
pub mod nerve;
pub mod space;
pub mod twostruct;

mod error;

pub use error::Error;
pub use funcspace::{DegreeFunction, Embedding, FinSupportPoint, SigmaFamily};
pub use isometry::{CanonicalCode, PartialIsometry, SearchLimits, SpecIsometry};
pub use nerve::{DegreeSequence, NerveTree};
pub use space::{Ball, Openness, Space, SpectrumSet};
pub use twostruct::{DecompositionTree, TwoStructure};

/// Scalar type for distance values: totally ordered, with a zero.
///
/// Blanket-implemented; `Rational` is the intended instantiation, but any
/// exact ordered scalar works (e.g. plain integers).
pub trait Value: Clone + Ord + Zero + fmt::Debug + fmt::Display {}

impl<T> Value for T where T: Clone + Ord + Zero + fmt::Debug + fmt::Display {}

/// Exact rational scalar: always in lowest terms with positive denominator.
pub type Rational = num_rational::Rational64;

/// A finite ultrametric space over exact rationals, the instantiation used
/// by the file format, the generators and the CLI.
pub type RationalSpace = Space<Rational>;

/// Shorthand for constructing a [`Rational`] from numerator and denominator.
///
/// Panics if `den` is zero.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Parses a rational from the textual form `p` or `p/q`.
///
/// Rejects anything else, in particular decimal floats (`0.5`), exponents,
/// whitespace and zero denominators.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let bad = || Error::InvalidRational(s.to_string());
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let check = |part: &str| -> Result<i64, Error> {
        let digits = part.strip_prefix('-').unwrap_or(part);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        part.parse::<i64>().map_err(|_| bad())
    };
    let num = check(num_str)?;
    let den = match den_str {
        Some(d) => {
            let den = check(d)?;
            if den == 0 {
                return Err(bad());
            }
            den
        }
        None => 1,
    };
    Ok(Rational::new(num, den))
}
