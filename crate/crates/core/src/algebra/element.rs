use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{AlgebraDescriptor, C64};
use crate::error::{Error, Result};

/// An element of a block-diagonal matrix algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: AlgebraDescriptor,
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn new(algebra: &AlgebraDescriptor, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(algebra.block_sizes()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::Shape(format!(
                    "block {i} has shape {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub fn zero(algebra: &AlgebraDescriptor) -> Self {
        Self::scalar(algebra, C64::new(0.0, 0.0))
    }

    pub fn unit(algebra: &AlgebraDescriptor) -> Self {
        Self::scalar(algebra, C64::new(1.0, 0.0))
    }

    /// `c · 1`.
    pub fn scalar(algebra: &AlgebraDescriptor, c: C64) -> Self {
        let blocks = algebra
            .block_sizes()
            .iter()
            .map(|&n| DMatrix::from_diagonal_element(n, n, c))
            .collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    /// Matrix unit `e_{row,col}` inside block `block`.
    pub fn matrix_unit(algebra: &AlgebraDescriptor, block: usize, row: usize, col: usize) -> Self {
        let mut e = Self::zero(algebra);
        e.blocks[block][(row, col)] = C64::new(1.0, 0.0);
        e
    }

    /// Builds an element of a single-block algebra `M_n` from a square matrix.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Shape(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let algebra = AlgebraDescriptor::matrix(m.nrows());
        Ok(Self {
            algebra,
            blocks: vec![m],
        })
    }

    pub fn from_coords(algebra: &AlgebraDescriptor, coords: &DVector<C64>) -> Result<Self> {
        if coords.len() != algebra.coord_dim() {
            return Err(Error::Shape(format!(
                "coordinate vector has length {}, expected {}",
                coords.len(),
                algebra.coord_dim()
            )));
        }
        let mut blocks = Vec::with_capacity(algebra.num_blocks());
        let mut off = 0;
        for &n in algebra.block_sizes() {
            blocks.push(DMatrix::from_column_slice(n, n, &coords.as_slice()[off..off + n * n]));
            off += n * n;
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    /// Column-stacked coordinates, blocks in order.
    pub fn coords(&self) -> DVector<C64> {
        let mut v = Vec::with_capacity(self.algebra.coord_dim());
        for b in &self.blocks {
            v.extend_from_slice(b.as_slice());
        }
        DVector::from_vec(v)
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<C64> {
        &self.blocks[i]
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn cstar_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                if b.nrows() == 1 {
                    b[(0, 0)].norm()
                } else {
                    b.clone()
                        .svd(false, false)
                        .singular_values
                        .iter()
                        .fold(0.0_f64, |m, &s| m.max(s))
                }
            })
            .fold(0.0, f64::max)
    }

    /// `‖a - b‖` in the C*-norm.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).cstar_norm()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    /// Eigenvalues of the Hermitian part `(a + a*)/2`, all blocks, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| {
                let h = (b + b.adjoint()).scale(0.5);
                SymmetricEigen::new(h).eigenvalues.iter().copied().collect::<Vec<_>>()
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// `a ≥ 0` up to `tol`: self-adjoint within `tol` and spectrum above `-tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_self_adjoint(tol) && self.min_eigenvalue() >= -tol
    }

    /// Block-diagonal image in `M_N`.
    pub fn embed(&self) -> DMatrix<C64> {
        let n = self.algebra.embedding_dim();
        let mut m = DMatrix::zeros(n, n);
        for (b, off) in self.blocks.iter().zip(self.algebra.embedding_offsets()) {
            m.view_mut((off, off), b.shape()).copy_from(b);
        }
        m
    }

    pub fn try_inverse(&self) -> Option<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.clone().try_inverse())
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            algebra: self.algebra.clone(),
            blocks,
        })
    }

    /// Largest singular value divided by the smallest, over all blocks.
    pub fn condition_number(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for b in &self.blocks {
            for &s in b.clone().svd(false, false).singular_values.iter() {
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|b| b * C64::new(c, 0.0))
    }

    fn map_blocks(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>,
    ) -> Self {
        assert_eq!(
            self.algebra, other.algebra,
            "operands belong to different algebras"
        );
        Self {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_blocks(|b| -b)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: Self) -> AlgebraElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: &AlgebraElement) -> AlgebraElement {
                (&self).$m(rhs)
            }
        }
        impl $tr<AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: AlgebraElement) -> AlgebraElement {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        -&self
    }
}
