use std::ops::{Add, Sub};

use nalgebra::DMatrix;

use super::{expm, AlgebraDescriptor, AlgebraElement, C64};
use crate::error::{Error, Result};

/// A complex-linear map `B -> B`, stored as its matrix on column-stacked
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    algebra: AlgebraDescriptor,
    matrix: DMatrix<C64>,
}

impl SuperOperator {
    pub fn new(algebra: &AlgebraDescriptor, matrix: DMatrix<C64>) -> Result<Self> {
        let d = algebra.coord_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "superoperator matrix is {}x{}, expected {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            algebra: algebra.clone(),
            matrix,
        })
    }

    /// Builds the operator from its action on the matrix-unit basis.
    pub fn from_fn(algebra: &AlgebraDescriptor, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> Self {
        let d = algebra.coord_dim();
        let mut matrix = DMatrix::zeros(d, d);
        for (k, e) in algebra.basis().iter().enumerate() {
            matrix.set_column(k, &f(e).coords());
        }
        Self {
            algebra: algebra.clone(),
            matrix,
        }
    }

    pub fn zero(algebra: &AlgebraDescriptor) -> Self {
        let d = algebra.coord_dim();
        Self {
            algebra: algebra.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    /// `id_B`.
    pub fn identity(algebra: &AlgebraDescriptor) -> Self {
        let d = algebra.coord_dim();
        Self {
            algebra: algebra.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    /// `L_a : b ↦ a·b`, matrix `⊕ (I ⊗ a_i)`.
    pub fn left_mul(a: &AlgebraElement) -> Self {
        Self::block_kron(a, |blk, n| DMatrix::<C64>::identity(n, n).kronecker(blk))
    }

    /// `R_a : b ↦ b·a`, matrix `⊕ (a_iᵀ ⊗ I)`.
    pub fn right_mul(a: &AlgebraElement) -> Self {
        Self::block_kron(a, |blk, n| blk.transpose().kronecker(&DMatrix::<C64>::identity(n, n)))
    }

    fn block_kron(a: &AlgebraElement, f: impl Fn(&DMatrix<C64>, usize) -> DMatrix<C64>) -> Self {
        let algebra = a.algebra();
        let d = algebra.coord_dim();
        let mut matrix = DMatrix::zeros(d, d);
        for ((blk, &n), off) in a
            .blocks()
            .iter()
            .zip(algebra.block_sizes())
            .zip(algebra.coord_offsets())
        {
            matrix.view_mut((off, off), (n * n, n * n)).copy_from(&f(blk, n));
        }
        Self {
            algebra: algebra.clone(),
            matrix,
        }
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, b: &AlgebraElement) -> AlgebraElement {
        assert_eq!(b.algebra(), &self.algebra, "operand from a different algebra");
        let v = &self.matrix * b.coords();
        AlgebraElement::from_coords(&self.algebra, &v).expect("dimension preserved")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.algebra, other.algebra, "operands from different algebras");
        Self {
            algebra: self.algebra.clone(),
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            matrix: &self.matrix * c,
        }
    }

    /// `b ↦ (L(b*))*`; a kernel table is Hermitian iff `L^{y,x} = (L^{x,y})^♯`.
    pub fn star_conjugate(&self) -> Self {
        let perm = adjoint_permutation(&self.algebra);
        let d = perm.len();
        let mut matrix = DMatrix::zeros(d, d);
        for c in 0..d {
            for r in 0..d {
                matrix[(perm[r], perm[c])] = self.matrix[(r, c)].conj();
            }
        }
        Self {
            algebra: self.algebra.clone(),
            matrix,
        }
    }

    /// `exp(t·L)`.
    pub fn exp(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NumericInput(format!("time {t} is not finite")));
        }
        let m = expm(&(&self.matrix * C64::new(t, 0.0)))?;
        Ok(Self {
            algebra: self.algebra.clone(),
            matrix: m,
        })
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.algebra, other.algebra, "operands from different algebras");
        (&self.matrix - &other.matrix).norm()
    }

    /// Largest C*-norm of `L(e)` over the matrix-unit basis.
    pub fn max_basis_image_norm(&self) -> f64 {
        self.algebra
            .basis()
            .iter()
            .map(|e| self.apply(e).cstar_norm())
            .fold(0.0, f64::max)
    }
}

/// Coordinate permutation realizing transposition of every block;
/// `coords(b*) = conj(coords(b)[perm])`.
fn adjoint_permutation(algebra: &AlgebraDescriptor) -> Vec<usize> {
    let mut perm = Vec::with_capacity(algebra.coord_dim());
    for (&n, off) in algebra.block_sizes().iter().zip(algebra.coord_offsets()) {
        for col in 0..n {
            for row in 0..n {
                // entry (row, col) of b* is conj of entry (col, row) of b
                perm.push(off + row * n + col);
            }
        }
    }
    perm
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: Self) -> SuperOperator {
        assert_eq!(self.algebra, rhs.algebra, "operands from different algebras");
        SuperOperator {
            algebra: self.algebra.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: Self) -> SuperOperator {
        assert_eq!(self.algebra, rhs.algebra, "operands from different algebras");
        SuperOperator {
            algebra: self.algebra.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Add for SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: Self) -> SuperOperator {
        &self + &rhs
    }
}

impl Sub for SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: Self) -> SuperOperator {
        &self - &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(algebra: &AlgebraDescriptor, seed: u64) -> AlgebraElement {
        // small deterministic LCG; keeps these unit tests free of rand
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let blocks = algebra
            .block_sizes()
            .iter()
            .map(|&n| DMatrix::from_fn(n, n, |_, _| C64::new(next(), next())))
            .collect();
        AlgebraElement::new(algebra, blocks).unwrap()
    }

    #[test]
    fn left_and_right_multiplication() {
        let alg = AlgebraDescriptor::new(vec![2, 3, 1]).unwrap();
        let a = sample(&alg, 1);
        let b = sample(&alg, 2);
        let la = SuperOperator::left_mul(&a);
        let ra = SuperOperator::right_mul(&a);
        assert!(la.apply(&b).distance(&(&a * &b)) < 1e-14);
        assert!(ra.apply(&b).distance(&(&b * &a)) < 1e-14);
    }

    #[test]
    fn identity_and_composition() {
        let alg = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let a = sample(&alg, 3);
        let c = sample(&alg, 4);
        let b = sample(&alg, 5);
        assert_eq!(SuperOperator::identity(&alg).apply(&b), b);
        let p = SuperOperator::left_mul(&a);
        let q = SuperOperator::right_mul(&c);
        let lhs = p.compose(&q).apply(&b);
        let rhs = p.apply(&q.apply(&b));
        assert!(lhs.distance(&rhs) < 1e-13);
        // L_a and R_c commute
        assert!(p.compose(&q).distance(&q.compose(&p)) <= 1e-12);
    }

    #[test]
    fn star_conjugate_matches_definition() {
        let alg = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let a = sample(&alg, 6);
        let c = sample(&alg, 7);
        // L(b) = a b c
        let l = SuperOperator::left_mul(&a).compose(&SuperOperator::right_mul(&c));
        let sharp = l.star_conjugate();
        for e in alg.basis() {
            let want = l.apply(&e.adjoint()).adjoint();
            assert!(sharp.apply(&e).distance(&want) < 1e-14);
        }
        assert!(sharp.star_conjugate().distance(&l) < 1e-15);
    }

    #[test]
    fn exp_examples() {
        let m2 = AlgebraDescriptor::matrix(2);
        let l = SuperOperator::left_mul(&sample(&m2, 8));
        assert!(l.exp(0.0).unwrap().distance(&SuperOperator::identity(&m2)) < 1e-15);

        let c = AlgebraDescriptor::scalar();
        let e = SuperOperator::identity(&c).exp(1.0).unwrap();
        assert!((e.matrix()[(0, 0)].re - std::f64::consts::E).abs() < 1e-15);

        // L_{e12} is nilpotent: exp(t L) b = b + t e12 b
        let e12 = AlgebraElement::matrix_unit(&m2, 0, 0, 1);
        let l = SuperOperator::left_mul(&e12);
        let t = 0.7;
        let b = sample(&m2, 9);
        let got = l.exp(t).unwrap().apply(&b);
        let want = &b + &(&e12 * &b).scale_real(t);
        assert!(got.distance(&want) < 1e-14);

        assert!(matches!(l.exp(f64::INFINITY), Err(Error::NumericInput(_))));
    }

    #[test]
    fn from_fn_reproduces_matrix() {
        let alg = AlgebraDescriptor::new(vec![1, 2]).unwrap();
        let a = sample(&alg, 10);
        let direct = SuperOperator::left_mul(&a);
        let built = SuperOperator::from_fn(&alg, |b| &a * b);
        assert!(direct.distance(&built) < 1e-15);
    }
}
