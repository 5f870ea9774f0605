use nalgebra::DMatrix;

use super::{AlgebraDescriptor, AlgebraElement, SuperOperator, C64};
use crate::error::Result;

/// `A ⊗ B` together with the maps from the factors.
///
/// Blocks of the product are `n_i·m_j` in row-major `(i, j)` order and the
/// elementary tensor of two elements is the blockwise Kronecker product.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorLayout {
    pub left: AlgebraDescriptor,
    pub right: AlgebraDescriptor,
    pub product: AlgebraDescriptor,
}

pub fn tensor_algebra(left: &AlgebraDescriptor, right: &AlgebraDescriptor) -> TensorLayout {
    let blocks = left
        .block_sizes()
        .iter()
        .flat_map(|&n| right.block_sizes().iter().map(move |&m| n * m))
        .collect();
    TensorLayout {
        left: left.clone(),
        right: right.clone(),
        product: AlgebraDescriptor::new(blocks).expect("products of positive sizes"),
    }
}

/// Coordinate of `e ⊗ f` in the product algebra, where `e`, `f` are the
/// matrix units with coordinates `ka`, `kb` in their factors.
pub fn tensor_coordinate(layout: &TensorLayout, ka: usize, kb: usize) -> usize {
    let (i, p, q) = layout.left.coordinate_position(ka);
    let (j, r, s) = layout.right.coordinate_position(kb);
    let m = layout.right.block_sizes()[j];
    let block = i * layout.right.num_blocks() + j;
    let size = layout.product.block_sizes()[block];
    let row = p * m + r;
    let col = q * m + s;
    layout.product.coord_offsets()[block] + col * size + row
}

impl TensorLayout {
    /// `a ⊗ b`.
    pub fn element(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.left.ensure_same(a.algebra())?;
        self.right.ensure_same(b.algebra())?;
        let blocks: Vec<DMatrix<C64>> = a
            .blocks()
            .iter()
            .flat_map(|x| b.blocks().iter().map(move |y| x.kronecker(y)))
            .collect();
        AlgebraElement::new(&self.product, blocks)
    }

    /// `a ⊗ 1`.
    pub fn left_element(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.element(a, &AlgebraElement::unit(&self.right))
    }

    /// `1 ⊗ b`.
    pub fn right_element(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.element(&AlgebraElement::unit(&self.left), b)
    }

    /// `P ⊗ Q`, acting factorwise on elementary tensors.
    pub fn superoperator(&self, p: &SuperOperator, q: &SuperOperator) -> Result<SuperOperator> {
        self.left.ensure_same(p.algebra())?;
        self.right.ensure_same(q.algebra())?;
        let (da, db) = (self.left.coord_dim(), self.right.coord_dim());
        let d = self.product.coord_dim();
        let mut m = DMatrix::zeros(d, d);
        let (pm, qm) = (p.matrix(), q.matrix());
        for ka in 0..da {
            for kb in 0..db {
                let col = tensor_coordinate(self, ka, kb);
                for ra in 0..da {
                    let pa = pm[(ra, ka)];
                    if pa == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for rb in 0..db {
                        let row = tensor_coordinate(self, ra, rb);
                        m[(row, col)] += pa * qm[(rb, kb)];
                    }
                }
            }
        }
        SuperOperator::new(&self.product, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(alg: &AlgebraDescriptor, shift: f64) -> AlgebraElement {
        let blocks = alg
            .block_sizes()
            .iter()
            .map(|&n| {
                DMatrix::from_fn(n, n, |i, j| C64::new(i as f64 + shift, j as f64 - 2.0 * shift))
            })
            .collect();
        AlgebraElement::new(alg, blocks).unwrap()
    }

    #[test]
    fn scalar_factor_is_transparent() {
        let c = AlgebraDescriptor::scalar();
        let m2 = AlgebraDescriptor::matrix(2);
        let t = tensor_algebra(&c, &m2);
        assert_eq!(t.product, m2);
        let a = elem(&m2, 0.3);
        assert_eq!(t.right_element(&a).unwrap(), a);
    }

    #[test]
    fn projection_tensor_projection_is_idempotent() {
        let m2 = AlgebraDescriptor::matrix(2);
        let t = tensor_algebra(&m2, &m2);
        assert_eq!(t.product, AlgebraDescriptor::matrix(4));
        let e11 = AlgebraElement::matrix_unit(&m2, 0, 0, 0);
        let p = t.element(&e11, &e11).unwrap();
        assert_eq!(&p * &p, p);
    }

    #[test]
    fn block_order_is_row_major() {
        let a = AlgebraDescriptor::new(vec![1, 2]).unwrap();
        let b = AlgebraDescriptor::new(vec![3, 1]).unwrap();
        assert_eq!(tensor_algebra(&a, &b).product.block_sizes(), &[3, 1, 6, 2]);
    }

    #[test]
    fn tensor_coordinates_are_a_bijection() {
        let a = AlgebraDescriptor::new(vec![1, 2]).unwrap();
        let b = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let t = tensor_algebra(&a, &b);
        let mut seen = vec![false; t.product.coord_dim()];
        let (ba, bb) = (a.basis(), b.basis());
        for (ka, ea) in ba.iter().enumerate() {
            for (kb, eb) in bb.iter().enumerate() {
                let k = tensor_coordinate(&t, ka, kb);
                assert!(!seen[k]);
                seen[k] = true;
                let e = t.element(ea, eb).unwrap();
                assert_eq!(e.coords()[k], C64::new(1.0, 0.0));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn superoperator_acts_factorwise() {
        let a = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let b = AlgebraDescriptor::matrix(2);
        let t = tensor_algebra(&a, &b);
        let p = SuperOperator::left_mul(&elem(&a, 0.1));
        let q = SuperOperator::right_mul(&elem(&b, -0.4));
        let pq = t.superoperator(&p, &q).unwrap();
        let (x, y) = (elem(&a, 0.7), elem(&b, 0.2));
        let lhs = pq.apply(&t.element(&x, &y).unwrap());
        let rhs = t.element(&p.apply(&x), &q.apply(&y)).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }
}
