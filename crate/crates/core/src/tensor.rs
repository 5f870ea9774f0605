//! Outer tensor products of kernel systems.
//!
//! The unit `x ⊗ x'` of the product system over `A ⊗ B` has generator
//! `L^{x⊗x', y⊗y'} = L^{x,y} ⊗ id + id ⊗ L^{x',y'}`, which on elementary
//! tensors is the Leibniz rule `a ⊗ L^{x',y'}(b) + L^{x,y}(a) ⊗ b`.

use crate::algebra::{tensor_algebra, AlgebraElement, SuperOperator, TensorLayout};
use crate::error::Result;
use crate::index::{self, central_check, inner, CentralReport};
use crate::kernels::{KernelSystem, UnitLabel};
use crate::random;
use crate::units::{self, random_expr, IdentityCheck, UnitExpr};

#[derive(Clone, Debug)]
pub struct TensorSystem {
    pub system: KernelSystem,
    pub layout: TensorLayout,
    pub left: KernelSystem,
    pub right: KernelSystem,
}

/// Label of `x ⊗ y`.
pub fn pair_label(x: &UnitLabel, y: &UnitLabel) -> UnitLabel {
    UnitLabel::new(format!("{x}⊗{y}"))
}

/// Product system with labels `x⊗y` in row-major order and reference `ω⊗ω'`.
pub fn tensor_system(a: &KernelSystem, b: &KernelSystem) -> Result<TensorSystem> {
    let layout = tensor_algebra(a.algebra(), b.algebra());
    let (sa, sb) = (a.len(), b.len());
    let id_a = SuperOperator::identity(a.algebra());
    let id_b = SuperOperator::identity(b.algebra());
    let mut left_parts = Vec::with_capacity(sa * sa);
    for i in 0..sa {
        for j in 0..sa {
            left_parts.push(layout.superoperator(a.kernel_at(i, j), &id_b)?);
        }
    }
    let mut right_parts = Vec::with_capacity(sb * sb);
    for i in 0..sb {
        for j in 0..sb {
            right_parts.push(layout.superoperator(&id_a, b.kernel_at(i, j))?);
        }
    }
    let mut labels = Vec::with_capacity(sa * sb);
    for x in a.labels() {
        for y in b.labels() {
            labels.push(pair_label(x, y));
        }
    }
    let reference = pair_label(a.reference(), b.reference());
    let system = KernelSystem::from_fn(&layout.product, labels, &reference, |p, q| {
        let (x, x2) = (p / sb, p % sb);
        let (y, y2) = (q / sb, q % sb);
        &left_parts[x * sa + y] + &right_parts[x2 * sb + y2]
    })?;
    Ok(TensorSystem {
        system,
        layout,
        left: a.clone(),
        right: b.clone(),
    })
}

impl TensorSystem {
    /// `x ⊗ ω'` for an expression `x` over the left factor.
    pub fn lift_left(&self, x: &UnitExpr) -> Result<UnitExpr> {
        let w2 = self.right.reference();
        x.try_map(&|l| pair_label(l, w2), &|k| self.layout.left_element(k))
    }

    /// `ω ⊗ y` for an expression `y` over the right factor.
    pub fn lift_right(&self, y: &UnitExpr) -> Result<UnitExpr> {
        let w = self.left.reference();
        y.try_map(&|l| pair_label(w, l), &|k| self.layout.right_element(k))
    }

    /// `T([x] ⊗ β, α ⊗ [y]) = (x ⊗ ω')·(1 ⊗ β) + (α ⊗ 1')·(ω ⊗ y)`.
    pub fn embed_t(
        &self,
        x: &UnitExpr,
        beta: &AlgebraElement,
        alpha: &AlgebraElement,
        y: &UnitExpr,
    ) -> Result<UnitExpr> {
        let sys = &self.system;
        let first = units::mul_right(sys, &self.lift_left(x)?, &self.layout.right_element(beta)?);
        let second = units::mul_left(sys, &self.layout.left_element(alpha)?, &self.lift_right(y)?);
        Ok(units::add(sys, &first, &second))
    }

    /// `⟨x,x⟩ ⊗ β*β + α*α ⊗ ⟨y,y⟩`, the norm the embedding must preserve.
    pub fn embed_t_norm(
        &self,
        x: &UnitExpr,
        beta: &AlgebraElement,
        alpha: &AlgebraElement,
        y: &UnitExpr,
    ) -> Result<AlgebraElement> {
        let xx = inner(&self.left, x, x, &AlgebraElement::unit(self.left.algebra()))?;
        let yy = inner(&self.right, y, y, &AlgebraElement::unit(self.right.algebra()))?;
        Ok(&self.layout.element(&xx, &(&beta.adjoint() * beta))?
            + &self.layout.element(&(&alpha.adjoint() * alpha), &yy)?)
    }

    /// Residual of the isometry identity for one input.
    pub fn isometry_residual(
        &self,
        x: &UnitExpr,
        beta: &AlgebraElement,
        alpha: &AlgebraElement,
        y: &UnitExpr,
    ) -> Result<f64> {
        let z = self.embed_t(x, beta, alpha, y)?;
        let zz = inner(&self.system, &z, &z, &AlgebraElement::unit(&self.layout.product))?;
        Ok(zz.distance(&self.embed_t_norm(x, beta, alpha, y)?))
    }

    pub fn central_reference(&self, tol: f64) -> Result<CentralReport> {
        central_check(&self.system, self.system.reference(), tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtimesReport {
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
}

impl OtimesReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const OTIMES_ITEMS: [&str; 10] = [
    "(a) Leibniz rule on elementary tensors",
    "(b) ⟨x⊗x', y⊗y'⟩ = 1⊗⟨x',y'⟩ + ⟨x,y⟩⊗1'",
    "(c) (x⊗ω')·(α⊗1') = (x·α)⊗ω'",
    "(c) (ω⊗y)·(1⊗β) = ω⊗(y·β)",
    "(d) x⊗y = x⊗ω' + ω⊗y",
    "(e) (x⊗ω')·(1⊗β) = (1⊗β)·(x⊗ω')",
    "(e) (ω⊗y)·(α⊗1') = (α⊗1')·(ω⊗y)",
    "(f) ⟨x⊗ω', ω⊗y⟩ = 0",
    "T is isometric",
    "T respects multiplication by a⊗b",
];

fn null_distance(sys: &KernelSystem, p: &UnitExpr, q: &UnitExpr) -> Result<f64> {
    let d = units::sub(sys, p, q);
    Ok(inner(sys, &d, &d, &AlgebraElement::unit(sys.algebra()))?.cstar_norm())
}

fn otimes_residual(ts: &TensorSystem, rng: &mut random::SampleRng, item: usize) -> Result<f64> {
    let (sa, sb, sys) = (&ts.left, &ts.right, &ts.system);
    let (alg_a, alg_b) = (sa.algebra(), sb.algebra());
    let lay = &ts.layout;
    let label_a = |rng: &mut random::SampleRng| sa.labels()[rand::Rng::random_range(rng, 0..sa.len())].clone();
    let label_b = |rng: &mut random::SampleRng| sb.labels()[rand::Rng::random_range(rng, 0..sb.len())].clone();
    let coef = |rng: &mut random::SampleRng, alg| random::element_with_norm_in(rng, alg, 0.2, 1.5);
    Ok(match item {
        0 => {
            let (x, x2, y, y2) = (label_a(rng), label_b(rng), label_a(rng), label_b(rng));
            let a = random::gaussian_element(rng, alg_a);
            let b = random::gaussian_element(rng, alg_b);
            let l = sys.kernel(&pair_label(&x, &x2), &pair_label(&y, &y2))?;
            let lhs = l.apply(&lay.element(&a, &b)?);
            let rhs = &lay.element(&a, &sb.kernel(&x2, &y2)?.apply(&b))?
                + &lay.element(&sa.kernel(&x, &y)?.apply(&a), &b)?;
            lhs.distance(&rhs)
        }
        1 => {
            let (x, x2, y, y2) = (label_a(rng), label_b(rng), label_a(rng), label_b(rng));
            let lhs = inner(
                sys,
                &UnitExpr::Base(pair_label(&x, &x2)),
                &UnitExpr::Base(pair_label(&y, &y2)),
                &AlgebraElement::unit(&lay.product),
            )?;
            let ia = inner(sa, &x.into(), &y.into(), &AlgebraElement::unit(alg_a))?;
            let ib = inner(sb, &x2.into(), &y2.into(), &AlgebraElement::unit(alg_b))?;
            lhs.distance(&(&lay.right_element(&ib)? + &lay.left_element(&ia)?))
        }
        2 => {
            let x = random_expr(sa, rng, 1);
            let alpha = coef(rng, alg_a);
            let lhs = units::mul_right(sys, &ts.lift_left(&x)?, &lay.left_element(&alpha)?);
            let rhs = ts.lift_left(&units::mul_right(sa, &x, &alpha))?;
            units::kernel_distance(sys, &lhs, &rhs)?
        }
        3 => {
            let y = random_expr(sb, rng, 1);
            let beta = coef(rng, alg_b);
            let lhs = units::mul_right(sys, &ts.lift_right(&y)?, &lay.right_element(&beta)?);
            let rhs = ts.lift_right(&units::mul_right(sb, &y, &beta))?;
            units::kernel_distance(sys, &lhs, &rhs)?
        }
        4 => {
            let (x, y) = (label_a(rng), label_b(rng));
            let lhs = UnitExpr::Base(pair_label(&x, &y));
            let rhs = units::add(
                sys,
                &UnitExpr::Base(pair_label(&x, sb.reference())),
                &UnitExpr::Base(pair_label(sa.reference(), &y)),
            );
            units::kernel_distance(sys, &lhs, &rhs)?
        }
        5 => {
            let x = ts.lift_left(&random_expr(sa, rng, 1))?;
            let beta = lay.right_element(&coef(rng, alg_b))?;
            units::kernel_distance(sys, &units::mul_right(sys, &x, &beta), &units::mul_left(sys, &beta, &x))?
        }
        6 => {
            let y = ts.lift_right(&random_expr(sb, rng, 1))?;
            let alpha = lay.left_element(&coef(rng, alg_a))?;
            units::kernel_distance(sys, &units::mul_right(sys, &y, &alpha), &units::mul_left(sys, &alpha, &y))?
        }
        7 => {
            let x = ts.lift_left(&random_expr(sa, rng, 2))?;
            let y = ts.lift_right(&random_expr(sb, rng, 2))?;
            inner(sys, &x, &y, &AlgebraElement::unit(&lay.product))?.cstar_norm()
        }
        8 => {
            let x = random_expr(sa, rng, 2);
            let y = random_expr(sb, rng, 2);
            let beta = random::gaussian_element(rng, alg_b);
            let alpha = random::gaussian_element(rng, alg_a);
            ts.isometry_residual(&x, &beta, &alpha, &y)?
        }
        _ => {
            let x = random_expr(sa, rng, 1);
            let y = random_expr(sb, rng, 1);
            let beta = coef(rng, alg_b);
            let alpha = coef(rng, alg_a);
            let a = coef(rng, alg_a);
            let b = coef(rng, alg_b);
            let ab = lay.element(&a, &b)?;
            // right: T(x·a ⊗ βb, αa ⊗ y·b) ~ T(x ⊗ β, α ⊗ y)·(a⊗b)
            let t = ts.embed_t(&x, &beta, &alpha, &y)?;
            let right = ts.embed_t(
                &units::mul_right(sa, &x, &a),
                &(&beta * &b),
                &(&alpha * &a),
                &units::mul_right(sb, &y, &b),
            )?;
            let r1 = null_distance(sys, &right, &units::mul_right(sys, &t, &ab))?;
            // left: T(a·x ⊗ bβ, aα ⊗ b·y) ~ (a⊗b)·T(x ⊗ β, α ⊗ y)
            let left = ts.embed_t(
                &units::mul_left(sa, &a, &x),
                &(&b * &beta),
                &(&a * &alpha),
                &units::mul_left(sb, &b, &y),
            )?;
            let r2 = null_distance(sys, &left, &units::mul_left(sys, &ab, &t))?;
            r1.max(r2)
        }
    })
}

/// Randomized suite for the tensor-product identities and the embedding `T`.
pub fn check_otimes(ts: &TensorSystem, samples: usize, tol: f64, seed: u64) -> Result<OtimesReport> {
    let mut checks: Vec<IdentityCheck> = OTIMES_ITEMS
        .iter()
        .map(|&name| IdentityCheck {
            name,
            instances: samples,
            max_residual: 0.0,
            pass: true,
        })
        .collect();
    for s in 0..samples {
        for (item, check) in checks.iter_mut().enumerate() {
            let mut rng = random::stream_rng(seed, (s * OTIMES_ITEMS.len() + item) as u64);
            let r = otimes_residual(ts, &mut rng, item)?;
            check.max_residual = check.max_residual.max(r);
            check.pass &= r <= tol;
        }
    }
    Ok(OtimesReport { tol, checks })
}

/// Index rank of all product units against the rank of the image of `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankGap {
    pub product_rank: usize,
    pub image_rank: usize,
}

impl RankGap {
    pub fn gap(&self) -> usize {
        self.product_rank - self.image_rank.min(self.product_rank)
    }
}

/// Compares the rank of all units `x⊗y` with that of the generators
/// `x⊗ω'` and `ω⊗y` of the image of `T`.
pub fn rank_gap(ts: &TensorSystem, tol: f64) -> Result<RankGap> {
    let sys = &ts.system;
    let all = index::base_exprs(sys);
    let mut image = Vec::new();
    for x in ts.left.labels() {
        image.push(UnitExpr::Base(pair_label(x, ts.right.reference())));
    }
    for y in ts.right.labels() {
        image.push(UnitExpr::Base(pair_label(ts.left.reference(), y)));
    }
    Ok(RankGap {
        product_rank: index::index_report(sys, &all, tol)?.numerical_rank,
        image_rank: index::index_report(sys, &image, tol)?.numerical_rank,
    })
}

/// `L^{x⊗x', y⊗y'}` against the Leibniz rule on every pair of basis tensors.
pub fn leibniz_residual(ts: &TensorSystem) -> Result<f64> {
    let (sa, sb) = (&ts.left, &ts.right);
    let (ba, bb) = (sa.algebra().basis(), sb.algebra().basis());
    let mut worst = 0.0_f64;
    for (i, x) in sa.labels().iter().enumerate() {
        for (j, y) in sa.labels().iter().enumerate() {
            for (k, x2) in sb.labels().iter().enumerate() {
                for (l, y2) in sb.labels().iter().enumerate() {
                    let op = ts.system.kernel(&pair_label(x, x2), &pair_label(y, y2))?;
                    for a in &ba {
                        let la = sa.kernel_at(i, j).apply(a);
                        for b in &bb {
                            let lb = sb.kernel_at(k, l).apply(b);
                            let want = &ts.layout.element(a, &lb)? + &ts.layout.element(&la, b)?;
                            worst = worst.max(op.apply(&ts.layout.element(a, b)?).distance(&want));
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}
