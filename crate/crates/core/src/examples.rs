//! Example kernel systems: time-ordered Fock units, twisted units, and
//! random systems in Christensen–Evans form.

use crate::algebra::{AlgebraDescriptor, AlgebraElement, SuperOperator, C64};
use crate::error::{Error, Result};
use crate::kernels::{KernelSystem, UnitLabel};
use crate::random;

/// A unit `u(ζ, β)` of a time-ordered Fock system, `ζ ∈ B^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockUnit {
    pub label: UnitLabel,
    pub zeta: Vec<AlgebraElement>,
    pub beta: AlgebraElement,
}

impl FockUnit {
    pub fn new(label: impl Into<UnitLabel>, zeta: Vec<AlgebraElement>, beta: AlgebraElement) -> Self {
        Self {
            label: label.into(),
            zeta,
            beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockSpec {
    pub algebra: AlgebraDescriptor,
    pub fock_dim: usize,
    pub units: Vec<FockUnit>,
    pub reference: UnitLabel,
}

impl FockSpec {
    pub fn new(
        algebra: &AlgebraDescriptor,
        fock_dim: usize,
        units: Vec<FockUnit>,
        reference: impl Into<UnitLabel>,
    ) -> Self {
        Self {
            algebra: algebra.clone(),
            fock_dim,
            units,
            reference: reference.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.fock_dim == 0 {
            return Err(Error::Input("Fock dimension must be positive".into()));
        }
        for u in &self.units {
            if u.zeta.len() != self.fock_dim {
                return Err(Error::Shape(format!(
                    "unit {} has {} zeta components, expected {}",
                    u.label,
                    u.zeta.len(),
                    self.fock_dim
                )));
            }
            for z in u.zeta.iter().chain(std::iter::once(&u.beta)) {
                self.algebra.ensure_same(z.algebra())?;
                if !z.is_finite() {
                    return Err(Error::NumericInput(format!("unit {} has non-finite entries", u.label)));
                }
            }
        }
        let r = self
            .units
            .iter()
            .find(|u| u.label == self.reference)
            .ok_or_else(|| Error::Reference(self.reference.to_string()))?;
        if r.beta.cstar_norm() != 0.0 || r.zeta.iter().any(|z| z.cstar_norm() != 0.0) {
            return Err(Error::Input(format!(
                "reference {} must be u(0, 0)",
                self.reference
            )));
        }
        Ok(())
    }
}

/// `⟨ζ, b ζ'⟩ = Σ_k ζ_k* b ζ'_k` as a superoperator in `b`.
pub fn zeta_kernel(zeta: &[AlgebraElement], zeta2: &[AlgebraElement]) -> SuperOperator {
    let alg = zeta[0].algebra();
    zeta.iter()
        .zip(zeta2)
        .fold(SuperOperator::zero(alg), |acc, (z, w)| {
            &acc + &SuperOperator::left_mul(&z.adjoint()).compose(&SuperOperator::right_mul(w))
        })
}

/// `L^{u(ζ,β), u(ζ',β')}(b) = ⟨ζ, b ζ'⟩ + β* b + b β'`.
pub fn fock_system(spec: &FockSpec) -> Result<KernelSystem> {
    spec.validate()?;
    let labels = spec.units.iter().map(|u| u.label.clone()).collect();
    let units = &spec.units;
    KernelSystem::from_fn(&spec.algebra, labels, &spec.reference, |i, j| {
        let (x, y) = (&units[i], &units[j]);
        &(&zeta_kernel(&x.zeta, &y.zeta) + &SuperOperator::left_mul(&x.beta.adjoint()))
            + &SuperOperator::right_mul(&y.beta)
    })
}

/// Units `ξ_t = e^{tA_ξ}` of the system twisted by `e^{ith}` on `B = M_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSpec {
    pub n: usize,
    pub h: AlgebraElement,
    pub units: Vec<(UnitLabel, AlgebraElement)>,
    pub reference: UnitLabel,
}

impl TwistedSpec {
    pub fn algebra(&self) -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(self.n)
    }
}

/// `L^{ξ,η}(b) = b (A_η - ih) + (A_ξ* + ih) b`.
pub fn twisted_system(spec: &TwistedSpec) -> Result<KernelSystem> {
    if spec.n == 0 {
        return Err(Error::Input("twisted system needs n >= 1".into()));
    }
    let alg = spec.algebra();
    alg.ensure_same(spec.h.algebra())?;
    let residual = spec.h.distance(&spec.h.adjoint());
    if residual > 1e-12 {
        return Err(Error::Input(format!("h is not self-adjoint (residual {residual:e})")));
    }
    for (l, a) in &spec.units {
        alg.ensure_same(a.algebra())?;
        if !a.is_finite() {
            return Err(Error::NumericInput(format!("unit {l} has non-finite entries")));
        }
    }
    let reference = spec
        .units
        .iter()
        .find(|(l, _)| *l == spec.reference)
        .ok_or_else(|| Error::Reference(spec.reference.to_string()))?;
    if reference.1.cstar_norm() != 0.0 {
        return Err(Error::Input(format!("reference {} must have A = 0", spec.reference)));
    }
    let ih = spec.h.scale(C64::new(0.0, 1.0));
    let labels = spec.units.iter().map(|(l, _)| l.clone()).collect();
    KernelSystem::from_fn(&alg, labels, &spec.reference, |i, j| {
        let a_xi = &spec.units[i].1;
        let a_eta = &spec.units[j].1;
        &SuperOperator::right_mul(&(a_eta - &ih)) + &SuperOperator::left_mul(&(&a_xi.adjoint() + &ih))
    })
}

/// Random Fock spec: reference `w = u(0,0)` and units `u1, u2, ...` with
/// Gaussian `ζ`, `β` rescaled into the unit ball.
pub fn random_ce_spec(
    algebra: &AlgebraDescriptor,
    fock_dim: usize,
    unit_count: usize,
    seed: u64,
) -> Result<FockSpec> {
    if unit_count == 0 || fock_dim == 0 {
        return Err(Error::Input("unit count and Fock dimension must be positive".into()));
    }
    let mut rng = random::seeded_rng(seed);
    let zero = AlgebraElement::zero(algebra);
    let mut units = vec![FockUnit::new("w", vec![zero.clone(); fock_dim], zero)];
    for k in 1..unit_count {
        let zeta = (0..fock_dim)
            .map(|_| random::ball_element(&mut rng, algebra))
            .collect();
        let beta = random::ball_element(&mut rng, algebra);
        units.push(FockUnit::new(format!("u{k}"), zeta, beta));
    }
    Ok(FockSpec::new(algebra, fock_dim, units, "w"))
}

pub fn random_ce_system(
    algebra: &AlgebraDescriptor,
    fock_dim: usize,
    unit_count: usize,
    seed: u64,
) -> Result<KernelSystem> {
    fock_system(&random_ce_spec(algebra, fock_dim, unit_count, seed)?)
}

/// Random twisted spec on `M_n`: self-adjoint `h` and `unit_count - 1`
/// Gaussian `A`'s besides the reference `w`.
pub fn random_twisted_spec(n: usize, unit_count: usize, seed: u64) -> Result<TwistedSpec> {
    if unit_count == 0 || n == 0 {
        return Err(Error::Input("unit count and n must be positive".into()));
    }
    let alg = AlgebraDescriptor::matrix(n);
    let mut rng = random::seeded_rng(seed);
    let h = random::hermitian_element(&mut rng, &alg);
    let mut units = vec![(UnitLabel::from("w"), AlgebraElement::zero(&alg))];
    for k in 1..unit_count {
        units.push((format!("a{k}").into(), random::ball_element(&mut rng, &alg)));
    }
    Ok(TwistedSpec {
        n,
        h,
        units,
        reference: "w".into(),
    })
}
