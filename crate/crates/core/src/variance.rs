//! The four-valued variance algebra and varities of multi-argument functors.
//!
//! A variance records how a functor slot acts on morphisms: free slots are
//! ignored, covariant slots keep direction, contravariant slots reverse it and
//! fixed slots only accept identities. Composition `•` makes the set a
//! commutative monoid with unit `+`, and the order `⊥ ≼ +, − ≼ ⊤` gives joins.

use std::fmt;

use thiserror::Error;

/// A single variance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    /// `⊥`: the slot is ignored.
    Free,
    /// `+`
    Covariant,
    /// `−`
    Contravariant,
    /// `⊤`: the slot admits identities only.
    Fixed,
}

use Variance::{Contravariant as Con, Covariant as Cov, Fixed as Fix, Free};

impl Variance {
    /// All four variances, in table order.
    pub const ALL: [Variance; 4] = [Free, Cov, Con, Fix];

    const fn index(self) -> usize {
        match self {
            Free => 0,
            Cov => 1,
            Con => 2,
            Fix => 3,
        }
    }

    /// Composition `u • v`.
    pub fn compose(self, other: Variance) -> Variance {
        COMPOSE[self.index()][other.index()]
    }

    /// Least upper bound under `⊥ ≼ +, − ≼ ⊤`.
    pub fn lub(self, other: Variance) -> Variance {
        LUB[self.index()][other.index()]
    }

    /// `self ≼ other`.
    pub fn le(self, other: Variance) -> bool {
        self.lub(other) == other
    }

    /// The internal one-character symbol: `b`, `+`, `-` or `t`.
    pub fn symbol(self) -> char {
        match self {
            Free => 'b',
            Cov => '+',
            Con => '-',
            Fix => 't',
        }
    }

    /// Inverse of [`Variance::symbol`].
    pub fn from_symbol(c: char) -> Option<Variance> {
        match c {
            'b' => Some(Free),
            '+' => Some(Cov),
            '-' => Some(Con),
            't' => Some(Fix),
            _ => None,
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

const COMPOSE: [[Variance; 4]; 4] = [
    [Free, Free, Free, Free],
    [Free, Cov, Con, Fix],
    [Free, Con, Cov, Fix],
    [Free, Fix, Fix, Fix],
];

const LUB: [[Variance; 4]; 4] = [
    [Free, Cov, Con, Fix],
    [Cov, Cov, Fix, Fix],
    [Con, Fix, Con, Fix],
    [Fix, Fix, Fix, Fix],
];

/// Free-standing form of [`Variance::compose`].
pub fn compose_variance(u: Variance, v: Variance) -> Variance {
    u.compose(v)
}

/// Free-standing form of [`Variance::lub`].
pub fn lub_variance(u: Variance, v: Variance) -> Variance {
    u.lub(v)
}

/// Errors from varity arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarianceError {
    #[error(
        "varity product dimension mismatch: vector has length {vector} but matrix has {rows} rows"
    )]
    DimensionMismatch { vector: usize, rows: usize },
    #[error("ragged variance matrix: row {row} has length {len}, expected {expected}")]
    RaggedMatrix {
        row: usize,
        len: usize,
        expected: usize,
    },
}

/// The sequence of variances of a functor, one per argument slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Varity(pub Vec<Variance>);

impl Varity {
    /// The varity `⊥…⊥` of length `n`.
    pub fn free(n: usize) -> Varity {
        Varity(vec![Free; n])
    }

    /// The varity of the projection onto slot `i` of `n`: `+` at `i`, `⊥` elsewhere.
    pub fn projection(n: usize, i: usize) -> Varity {
        let mut v = vec![Free; n];
        v[i] = Cov;
        Varity(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Variance {
        self.0[i]
    }

    /// Pointwise join of two varities of equal length.
    pub fn lub(&self, other: &Varity) -> Varity {
        assert_eq!(self.len(), other.len(), "varity join of unequal lengths");
        Varity(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.lub(*b))
                .collect(),
        )
    }

    /// Composes every slot with `u` on the left.
    pub fn scale(&self, u: Variance) -> Varity {
        Varity(self.0.iter().map(|v| u.compose(*v)).collect())
    }

    /// The internal symbol string, e.g. `"+b"`.
    pub fn symbols(&self) -> String {
        self.0.iter().map(|v| v.symbol()).collect()
    }

    /// Parses an internal symbol string.
    pub fn from_symbols(s: &str) -> Option<Varity> {
        s.chars()
            .map(Variance::from_symbol)
            .collect::<Option<Vec<_>>>()
            .map(Varity)
    }
}

/// Renders as `(+,-)`; a constant renders as the empty string.
impl fmt::Display for Varity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return Ok(());
        }
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Multiplies the row vector `u` (length n) by the n×m matrix `rows` in the
/// semiring (lub, •): `w_i = ⋁_j u_j • rows[j][i]`.
///
/// `m` is taken from `width`, so that a zero-row product still has a length.
pub fn varity_product(u: &Varity, rows: &[Varity], width: usize) -> Result<Varity, VarianceError> {
    if u.len() != rows.len() {
        return Err(VarianceError::DimensionMismatch {
            vector: u.len(),
            rows: rows.len(),
        });
    }
    if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(VarianceError::RaggedMatrix {
            row,
            len: r.len(),
            expected: width,
        });
    }
    let mut out = Varity::free(width);
    for (uj, row) in u.0.iter().zip(rows) {
        out = out.lub(&row.scale(*uj));
    }
    Ok(out)
}
