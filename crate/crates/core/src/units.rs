//! Formal unit expressions and their kernels.
//!
//! Expressions are built from base labels by exponential shifts `x^β` and
//! box-sums with algebra coefficients on either side. Their generator
//! kernels follow by bilinear expansion:
//!
//! * `L^{x^β, w} = L^{x,w} + L_{β*}` and `L^{w, x^β} = L^{w,x} + R_β`,
//! * `L^{Σ x_i κ_i, w} = Σ L_{κ_i*} ∘ L^{x_i,w}` and `L^{w, Σ x_i κ_i} = Σ R_{κ_i} ∘ L^{w,x_i}`,
//! * `L^{Σ κ_i x_i, w} = Σ L^{x_i,w} ∘ L_{κ_i*}` and `L^{w, Σ κ_i x_i} = Σ L^{w,x_i} ∘ R_{κ_i}`.
//!
//! Two expressions denote the same unit iff their four mutual kernels agree.

use rand::Rng;

use crate::algebra::{AlgebraElement, SuperOperator, C64};
use crate::error::{Error, Result};
use crate::kernels::{KernelSystem, UnitLabel};
use crate::random;

/// Kernel-equality tolerance used when none is given.
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-9;

const COEFFICIENT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum UnitExpr {
    Base(UnitLabel),
    /// `inner^beta`.
    Shift {
        inner: Box<UnitExpr>,
        beta: AlgebraElement,
    },
    /// `x_1 κ_1 ⊞ ... ⊞ x_n κ_n`, coefficients on the right.
    RightCombo(Vec<(UnitExpr, AlgebraElement)>),
    /// `κ_1 x_1 ⊞ ... ⊞ κ_n x_n`, coefficients on the left.
    LeftCombo(Vec<(AlgebraElement, UnitExpr)>),
}

impl UnitExpr {
    pub fn base(label: impl Into<UnitLabel>) -> Self {
        Self::Base(label.into())
    }

    pub fn shift(self, beta: AlgebraElement) -> Self {
        Self::Shift {
            inner: Box::new(self),
            beta,
        }
    }

    /// Base labels occurring in the expression, in first-seen order.
    pub fn base_labels(&self) -> Vec<UnitLabel> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<UnitLabel>) {
        match self {
            Self::Base(l) => {
                if !out.contains(l) {
                    out.push(l.clone());
                }
            }
            Self::Shift { inner, .. } => inner.collect_labels(out),
            Self::RightCombo(terms) => terms.iter().for_each(|(e, _)| e.collect_labels(out)),
            Self::LeftCombo(terms) => terms.iter().for_each(|(_, e)| e.collect_labels(out)),
        }
    }

    /// Replaces every base label and maps every coefficient and shift.
    /// Used to lift factor expressions into tensor systems.
    pub fn try_map(
        &self,
        label: &impl Fn(&UnitLabel) -> UnitLabel,
        element: &impl Fn(&AlgebraElement) -> Result<AlgebraElement>,
    ) -> Result<Self> {
        Ok(match self {
            Self::Base(l) => Self::Base(label(l)),
            Self::Shift { inner, beta } => Self::Shift {
                inner: Box::new(inner.try_map(label, element)?),
                beta: element(beta)?,
            },
            Self::RightCombo(terms) => Self::RightCombo(
                terms
                    .iter()
                    .map(|(e, k)| Ok((e.try_map(label, element)?, element(k)?)))
                    .collect::<Result<_>>()?,
            ),
            Self::LeftCombo(terms) => Self::LeftCombo(
                terms
                    .iter()
                    .map(|(k, e)| Ok((element(k)?, e.try_map(label, element)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

impl From<UnitLabel> for UnitExpr {
    fn from(l: UnitLabel) -> Self {
        Self::Base(l)
    }
}

fn check_coefficients<'a>(
    sys: &KernelSystem,
    coefficients: impl Iterator<Item = &'a AlgebraElement>,
) -> Result<()> {
    let alg = sys.algebra();
    let mut sum = AlgebraElement::zero(alg);
    let mut scale = 1.0_f64;
    let mut count = 0;
    for k in coefficients {
        alg.ensure_same(k.algebra())?;
        scale += k.cstar_norm();
        sum = &sum + k;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Input("box-sum with no terms".into()));
    }
    let residual = sum.distance(&AlgebraElement::unit(alg));
    if residual > COEFFICIENT_SUM_TOL * scale {
        return Err(Error::Normalization { residual });
    }
    Ok(())
}

/// `L^{e1,e2}` by recursive bilinear expansion.
pub fn eval_kernel(sys: &KernelSystem, e1: &UnitExpr, e2: &UnitExpr) -> Result<SuperOperator> {
    match e1 {
        UnitExpr::Base(x) => eval_right(sys, sys.index_of(x)?, e2),
        UnitExpr::Shift { inner, beta } => {
            sys.algebra().ensure_same(beta.algebra())?;
            Ok(&eval_kernel(sys, inner, e2)? + &SuperOperator::left_mul(&beta.adjoint()))
        }
        UnitExpr::RightCombo(terms) => {
            check_coefficients(sys, terms.iter().map(|(_, k)| k))?;
            let mut acc = SuperOperator::zero(sys.algebra());
            for (x, k) in terms {
                let l = eval_kernel(sys, x, e2)?;
                acc = &acc + &SuperOperator::left_mul(&k.adjoint()).compose(&l);
            }
            Ok(acc)
        }
        UnitExpr::LeftCombo(terms) => {
            check_coefficients(sys, terms.iter().map(|(k, _)| k))?;
            let mut acc = SuperOperator::zero(sys.algebra());
            for (k, x) in terms {
                let l = eval_kernel(sys, x, e2)?;
                acc = &acc + &l.compose(&SuperOperator::left_mul(&k.adjoint()));
            }
            Ok(acc)
        }
    }
}

fn eval_right(sys: &KernelSystem, x: usize, e2: &UnitExpr) -> Result<SuperOperator> {
    match e2 {
        UnitExpr::Base(y) => Ok(sys.kernel_at(x, sys.index_of(y)?).clone()),
        UnitExpr::Shift { inner, beta } => {
            sys.algebra().ensure_same(beta.algebra())?;
            Ok(&eval_right(sys, x, inner)? + &SuperOperator::right_mul(beta))
        }
        UnitExpr::RightCombo(terms) => {
            check_coefficients(sys, terms.iter().map(|(_, k)| k))?;
            let mut acc = SuperOperator::zero(sys.algebra());
            for (y, k) in terms {
                let l = eval_right(sys, x, y)?;
                acc = &acc + &SuperOperator::right_mul(k).compose(&l);
            }
            Ok(acc)
        }
        UnitExpr::LeftCombo(terms) => {
            check_coefficients(sys, terms.iter().map(|(k, _)| k))?;
            let mut acc = SuperOperator::zero(sys.algebra());
            for (k, y) in terms {
                let l = eval_right(sys, x, y)?;
                acc = &acc + &l.compose(&SuperOperator::right_mul(k));
            }
            Ok(acc)
        }
    }
}

fn omega(sys: &KernelSystem) -> UnitExpr {
    UnitExpr::Base(sys.reference().clone())
}

fn scalar(sys: &KernelSystem, re: f64) -> AlgebraElement {
    AlgebraElement::scalar(sys.algebra(), C64::new(re, 0.0))
}

/// `x + y = x ⊞ y ⊞ (-ω)`.
pub fn add(sys: &KernelSystem, x: &UnitExpr, y: &UnitExpr) -> UnitExpr {
    UnitExpr::RightCombo(vec![
        (x.clone(), scalar(sys, 1.0)),
        (y.clone(), scalar(sys, 1.0)),
        (omega(sys), scalar(sys, -1.0)),
    ])
}

/// `-x = 2ω ⊞ (-x)`.
pub fn neg(sys: &KernelSystem, x: &UnitExpr) -> UnitExpr {
    UnitExpr::RightCombo(vec![
        (omega(sys), scalar(sys, 2.0)),
        (x.clone(), scalar(sys, -1.0)),
    ])
}

/// `x - y = x + (-y)`.
pub fn sub(sys: &KernelSystem, x: &UnitExpr, y: &UnitExpr) -> UnitExpr {
    add(sys, x, &neg(sys, y))
}

/// `a·x = a x ⊞ (1 - a) ω`.
pub fn mul_left(sys: &KernelSystem, a: &AlgebraElement, x: &UnitExpr) -> UnitExpr {
    let rest = &AlgebraElement::unit(sys.algebra()) - a;
    UnitExpr::LeftCombo(vec![(a.clone(), x.clone()), (rest, omega(sys))])
}

/// `x·a = x a ⊞ ω (1 - a)`.
pub fn mul_right(sys: &KernelSystem, x: &UnitExpr, a: &AlgebraElement) -> UnitExpr {
    let rest = &AlgebraElement::unit(sys.algebra()) - a;
    UnitExpr::RightCombo(vec![(x.clone(), a.clone()), (omega(sys), rest)])
}

/// Largest pairwise distance among `L^{e1,e1}, L^{e1,e2}, L^{e2,e1}, L^{e2,e2}`.
pub fn kernel_distance(sys: &KernelSystem, e1: &UnitExpr, e2: &UnitExpr) -> Result<f64> {
    let k = [
        eval_kernel(sys, e1, e1)?,
        eval_kernel(sys, e1, e2)?,
        eval_kernel(sys, e2, e1)?,
        eval_kernel(sys, e2, e2)?,
    ];
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in i + 1..4 {
            worst = worst.max(k[i].distance(&k[j]));
        }
    }
    Ok(worst)
}

/// Unit equality: the four mutual kernels coincide within `tol`.
pub fn units_equal(sys: &KernelSystem, e1: &UnitExpr, e2: &UnitExpr, tol: f64) -> Result<bool> {
    Ok(kernel_distance(sys, e1, e2)? <= tol)
}

/// Returns `x^{-β/2}` with `β = L^{x,x}(1)`, a unital unit.
pub fn normalize(sys: &KernelSystem, x: &UnitExpr) -> Result<UnitExpr> {
    let one = AlgebraElement::unit(sys.algebra());
    let beta = eval_kernel(sys, x, x)?.apply(&one);
    let residual = beta.distance(&beta.adjoint());
    if residual > 1e-9 {
        let name = format!("{x}");
        return Err(Error::Symmetry {
            x: name.clone(),
            y: name,
            residual,
        });
    }
    Ok(x.clone().shift(beta.scale_real(-0.5)))
}

/// Finds `β` with `x = y^β`, if one exists.
///
/// The difference `D_ξ = L^{x,ξ} - L^{y,ξ}` must be a left multiplication
/// `L_{β*}` for ξ ranging over `x`, `y` and every base label, with the same
/// `β` throughout; the candidate is then confirmed by unit equality.
pub fn detect_shift(
    sys: &KernelSystem,
    x: &UnitExpr,
    y: &UnitExpr,
    tol: f64,
) -> Result<Option<AlgebraElement>> {
    let one = AlgebraElement::unit(sys.algebra());
    let mut probes = vec![x.clone(), y.clone()];
    probes.extend(sys.labels().iter().cloned().map(UnitExpr::Base));

    let mut beta_star: Option<AlgebraElement> = None;
    for xi in &probes {
        let d = &eval_kernel(sys, x, xi)? - &eval_kernel(sys, y, xi)?;
        let cand = d.apply(&one);
        if d.distance(&SuperOperator::left_mul(&cand)) > tol {
            return Ok(None);
        }
        match &beta_star {
            None => beta_star = Some(cand),
            Some(b) if b.distance(&cand) > tol => return Ok(None),
            Some(_) => {}
        }
    }
    let beta = beta_star.expect("at least two probes").adjoint();
    if units_equal(sys, x, &y.clone().shift(beta.clone()), tol)? {
        Ok(Some(beta))
    } else {
        Ok(None)
    }
}

/// Random expression over the system's base labels, nested up to `depth`.
pub fn random_expr<R: Rng + ?Sized>(sys: &KernelSystem, rng: &mut R, depth: usize) -> UnitExpr {
    let alg = sys.algebra();
    let label = |rng: &mut R| UnitExpr::Base(sys.labels()[rng.random_range(0..sys.len())].clone());
    if depth == 0 {
        return label(rng);
    }
    let coefficient = |rng: &mut R| random::element_with_norm_in(rng, alg, 0.2, 1.5);
    match rng.random_range(0..4) {
        0 => label(rng),
        1 => random_expr(sys, rng, depth - 1).shift(coefficient(rng)),
        kind => {
            let n = rng.random_range(2..=3);
            let mut ks: Vec<AlgebraElement> = (0..n - 1).map(|_| coefficient(rng)).collect();
            let partial = ks.iter().fold(AlgebraElement::zero(alg), |acc, k| &acc + k);
            ks.push(&AlgebraElement::unit(alg) - &partial);
            let inners: Vec<UnitExpr> = (0..n).map(|_| random_expr(sys, rng, depth - 1)).collect();
            if kind == 2 {
                UnitExpr::RightCombo(inners.into_iter().zip(ks).collect())
            } else {
                UnitExpr::LeftCombo(ks.into_iter().zip(inners).collect())
            }
        }
    }
}

/// Worst residual of one identity over all sampled instances.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub instances: usize,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

type Pair = (UnitExpr, UnitExpr);

fn run_identities(
    sys: &KernelSystem,
    names: &[&'static str],
    instances: usize,
    tol: f64,
    seed: u64,
    build: impl Fn(&mut random::SampleRng, usize) -> Pair,
) -> Result<AxiomReport> {
    let mut checks: Vec<IdentityCheck> = names
        .iter()
        .map(|&name| IdentityCheck {
            name,
            instances,
            max_residual: 0.0,
            pass: true,
        })
        .collect();
    for s in 0..instances {
        for (which, check) in checks.iter_mut().enumerate() {
            let mut rng = random::stream_rng(seed, (s * names.len() + which) as u64);
            let (lhs, rhs) = build(&mut rng, which);
            let r = kernel_distance(sys, &lhs, &rhs)?;
            check.max_residual = check.max_residual.max(r);
            check.pass &= r <= tol;
        }
    }
    Ok(AxiomReport { tol, checks })
}

pub const MODULE_AXIOMS: [&str; 9] = [
    "addition is associative",
    "reference unit is neutral",
    "2ω ⊞ (-x) is the inverse",
    "addition is commutative",
    "(x·a)·b = x·(ab)",
    "a·(b·x) = (ab)·x",
    "a·(x+y) = a·x + a·y",
    "(x+y)·a = x·a + y·a",
    "1·x = x·1 = x",
];

/// Bimodule axioms for `(U, +, ·)` on random expressions and coefficients.
pub fn check_module_axioms(
    sys: &KernelSystem,
    instances: usize,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    let alg = sys.algebra().clone();
    let w = omega(sys);
    let one = AlgebraElement::unit(&alg);
    run_identities(sys, &MODULE_AXIOMS, instances, tol, seed, |rng, which| {
        let x = random_expr(sys, rng, 2);
        let y = random_expr(sys, rng, 2);
        let z = random_expr(sys, rng, 1);
        let a = random::element_with_norm_in(rng, &alg, 0.2, 1.5);
        let b = random::element_with_norm_in(rng, &alg, 0.2, 1.5);
        match which {
            0 => (add(sys, &add(sys, &x, &y), &z), add(sys, &x, &add(sys, &y, &z))),
            1 => (add(sys, &x, &w), x),
            2 => (add(sys, &x, &neg(sys, &x)), w.clone()),
            3 => (add(sys, &x, &y), add(sys, &y, &x)),
            4 => (mul_right(sys, &mul_right(sys, &x, &a), &b), mul_right(sys, &x, &(&a * &b))),
            5 => (mul_left(sys, &a, &mul_left(sys, &b, &x)), mul_left(sys, &(&a * &b), &x)),
            6 => (
                mul_left(sys, &a, &add(sys, &x, &y)),
                add(sys, &mul_left(sys, &a, &x), &mul_left(sys, &a, &y)),
            ),
            7 => (
                mul_right(sys, &add(sys, &x, &y), &a),
                add(sys, &mul_right(sys, &x, &a), &mul_right(sys, &y, &a)),
            ),
            _ => {
                // both halves of the unit law in one residual
                if rng.random_bool(0.5) {
                    (mul_left(sys, &one, &x), x)
                } else {
                    (mul_right(sys, &x, &one), x)
                }
            }
        }
    })
}

pub const SHIFT_COMPATIBILITY: [&str; 3] = [
    "x^β + y^α = (x+y)^{α+β}",
    "x^β·a = (x·a)^{βa}",
    "a·x^β = (a·x)^{aβ}",
];

/// Compatibility of exponential shifts with the module operations.
pub fn check_shift_compatibility(
    sys: &KernelSystem,
    instances: usize,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    let alg = sys.algebra().clone();
    run_identities(sys, &SHIFT_COMPATIBILITY, instances, tol, seed, |rng, which| {
        let x = random_expr(sys, rng, 2);
        let y = random_expr(sys, rng, 2);
        let a = random::element_with_norm_in(rng, &alg, 0.2, 1.5);
        let alpha = random::element_with_norm_in(rng, &alg, 0.2, 1.5);
        let beta = random::element_with_norm_in(rng, &alg, 0.2, 1.5);
        match which {
            0 => (
                add(sys, &x.clone().shift(beta.clone()), &y.clone().shift(alpha.clone())),
                add(sys, &x, &y).shift(&alpha + &beta),
            ),
            1 => (
                mul_right(sys, &x.clone().shift(beta.clone()), &a),
                mul_right(sys, &x, &a).shift(&beta * &a),
            ),
            _ => (
                mul_left(sys, &a, &x.clone().shift(beta.clone())),
                mul_left(sys, &a, &x).shift(&a * &beta),
            ),
        }
    })
}
