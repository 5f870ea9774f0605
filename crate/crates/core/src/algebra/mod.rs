//! Finite-dimensional C*-algebras `B = M_{n_1} ⊕ ... ⊕ M_{n_k}`.
//!
//! Elements are block-diagonal complex matrices. Coordinates stack the
//! columns of each block, blocks in descriptor order; every linear map
//! `B -> B` is stored as a `d × d` matrix acting on that coordinate vector,
//! where `d = Σ n_i²`.

mod element;
mod expm;
mod superop;
mod tensor;

pub use element::AlgebraElement;
pub use expm::expm;
pub use superop::SuperOperator;
pub use tensor::{tensor_algebra, tensor_coordinate, TensorLayout};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Block structure of a finite-dimensional C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraDescriptor {
    block_sizes: Vec<usize>,
}

impl AlgebraDescriptor {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() {
            return Err(Error::Shape("algebra needs at least one block".into()));
        }
        if block_sizes.contains(&0) {
            return Err(Error::Shape(format!(
                "block sizes must be positive, got {block_sizes:?}"
            )));
        }
        Ok(Self { block_sizes })
    }

    /// The complex numbers, `B = C`.
    pub fn scalar() -> Self {
        Self {
            block_sizes: vec![1],
        }
    }

    /// The full matrix algebra `M_n`.
    pub fn matrix(n: usize) -> Self {
        assert!(n > 0, "matrix algebra needs n >= 1");
        Self {
            block_sizes: vec![n],
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// `N = Σ n_i`, the size of the block-diagonal embedding `B ⊆ M_N`.
    pub fn embedding_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// `d = Σ n_i²`, the complex dimension of the algebra.
    pub fn coord_dim(&self) -> usize {
        self.block_sizes.iter().map(|n| n * n).sum()
    }

    /// Coordinate offset of each block.
    pub fn coord_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.block_sizes
            .iter()
            .map(|n| {
                let here = off;
                off += n * n;
                here
            })
            .collect()
    }

    /// Row/column offset of each block inside the embedding `M_N`.
    pub fn embedding_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.block_sizes
            .iter()
            .map(|n| {
                let here = off;
                off += n;
                here
            })
            .collect()
    }

    /// Locates coordinate `k` as `(block, row, col)`.
    pub fn coordinate_position(&self, k: usize) -> (usize, usize, usize) {
        let mut k = k;
        for (i, &n) in self.block_sizes.iter().enumerate() {
            if k < n * n {
                return (i, k % n, k / n);
            }
            k -= n * n;
        }
        panic!("coordinate index out of range for {:?}", self.block_sizes);
    }

    /// Matrix units in coordinate order; `basis()[k]` has coordinate vector `e_k`.
    pub fn basis(&self) -> Vec<AlgebraElement> {
        (0..self.coord_dim())
            .map(|k| {
                let (block, row, col) = self.coordinate_position(k);
                AlgebraElement::matrix_unit(self, block, row, col)
            })
            .collect()
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch {
                expected: self.block_sizes.clone(),
                found: other.block_sizes.clone(),
            })
        }
    }
}

impl TryFrom<Vec<usize>> for AlgebraDescriptor {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlgebraDescriptor> for Vec<usize> {
    fn from(a: AlgebraDescriptor) -> Self {
        a.block_sizes
    }
}
