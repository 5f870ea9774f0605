//! Semi-inner products on units and the index module they define.

use nalgebra::DMatrix;

use crate::algebra::{AlgebraElement, SuperOperator, C64};
use crate::error::{Error, Result};
use crate::kernels::{KernelSystem, UnitLabel};
use crate::random;
use crate::units::{self, eval_kernel, random_expr, IdentityCheck, UnitExpr};

/// Tolerance for the centrality and unitality preconditions.
pub const CENTRAL_TOL: f64 = 1e-9;

/// `⟨x, y⟩_b = (L^{x,y} - L^{x,ω} - L^{ω,y} + L^{ω,ω})(b)`.
pub fn inner(sys: &KernelSystem, x: &UnitExpr, y: &UnitExpr, b: &AlgebraElement) -> Result<AlgebraElement> {
    Ok(inner_kernel(sys, x, y)?.apply(b))
}

/// The superoperator `b ↦ ⟨x, y⟩_b`.
pub fn inner_kernel(sys: &KernelSystem, x: &UnitExpr, y: &UnitExpr) -> Result<SuperOperator> {
    let w = UnitExpr::Base(sys.reference().clone());
    let lxy = eval_kernel(sys, x, y)?;
    let lxw = eval_kernel(sys, x, &w)?;
    let lwy = eval_kernel(sys, &w, y)?;
    let lww = eval_kernel(sys, &w, &w)?;
    Ok(&(&(&lxy - &lxw) - &lwy) + &lww)
}

fn one(sys: &KernelSystem) -> AlgebraElement {
    AlgebraElement::unit(sys.algebra())
}

/// Gram matrix `G_ij = ⟨x_i, x_j⟩` and its realization in `M_{m·N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramData {
    pub exprs: Vec<UnitExpr>,
    pub entries: Vec<Vec<AlgebraElement>>,
    pub realization: DMatrix<C64>,
}

pub fn gram(sys: &KernelSystem, exprs: &[UnitExpr]) -> Result<GramData> {
    let m = exprs.len();
    let n = sys.algebra().embedding_dim();
    let unit = one(sys);
    let mut entries = vec![Vec::with_capacity(m); m];
    for (i, x) in exprs.iter().enumerate() {
        for y in exprs {
            entries[i].push(inner(sys, x, y, &unit)?);
        }
    }
    let mut realization = DMatrix::zeros(m * n, m * n);
    for (i, row) in entries.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            realization.view_mut((i * n, j * n), (n, n)).copy_from(&g.embed());
        }
    }
    // symmetrize away rounding so the eigensolver sees a Hermitian matrix
    let realization = (&realization + realization.adjoint()) * C64::new(0.5, 0.0);
    Ok(GramData {
        exprs: exprs.to_vec(),
        entries,
        realization,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport {
    pub gram: GramData,
    pub tol: f64,
    /// `‖⟨x_i, x_i⟩‖ ≤ tol`.
    pub null_mask: Vec<bool>,
    pub numerical_rank: usize,
    pub quotient_dim: usize,
    /// Eigenvalues of the realization, descending.
    pub eigenvalues: Vec<f64>,
}

fn hermitian_eigenvalues_desc(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Gram spectrum, rank and null vectors of a family of units.
pub fn index_report(sys: &KernelSystem, exprs: &[UnitExpr], tol: f64) -> Result<IndexReport> {
    if exprs.is_empty() {
        return Err(Error::Input("index report needs at least one expression".into()));
    }
    let gram = gram(sys, exprs)?;
    let eigenvalues = hermitian_eigenvalues_desc(&gram.realization);
    let lmax = eigenvalues.first().copied().unwrap_or(0.0);
    let lmin = eigenvalues.last().copied().unwrap_or(0.0);
    if lmin < -10.0 * tol * lmax.max(1.0) {
        return Err(Error::Positivity { min_eigenvalue: lmin });
    }
    let cutoff = tol * lmax.max(1.0);
    let numerical_rank = eigenvalues.iter().filter(|&&l| l > cutoff).count();
    let null_mask = (0..exprs.len())
        .map(|i| gram.entries[i][i].cstar_norm() <= tol)
        .collect();
    Ok(IndexReport {
        gram,
        tol,
        null_mask,
        numerical_rank,
        quotient_dim: numerical_rank,
        eigenvalues,
    })
}

/// All base labels, the default family for an index report.
pub fn base_exprs(sys: &KernelSystem) -> Vec<UnitExpr> {
    sys.labels().iter().cloned().map(UnitExpr::Base).collect()
}

/// Finite-time check of `⟨x-y, x-y⟩ = lim (K_t^{xx} - K_t^{xy} - K_t^{yx} + K_t^{yy})(1) / t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitCheck {
    pub pair: Option<(UnitLabel, UnitLabel)>,
    pub error_coarse: f64,
    pub error_fine: f64,
    /// Worst ratio over nondegenerate pairs (the one farthest from 2).
    pub ratio: Option<f64>,
    pub pass: bool,
}

pub const LIMIT_TIMES: (f64, f64) = (1e-2, 5e-3);
pub const RATIO_RANGE: (f64, f64) = (1.6, 2.5);

fn limit_error(sys: &KernelSystem, x: usize, y: usize, t: f64) -> Result<f64> {
    let unit = one(sys);
    let k = |i: usize, j: usize| -> Result<AlgebraElement> { Ok(sys.kernel_at(i, j).exp(t)?.apply(&unit)) };
    let finite = &(&(&k(x, x)? - &k(x, y)?) - &k(y, x)?) + &k(y, y)?;
    let diff = units::sub(
        sys,
        &UnitExpr::Base(sys.labels()[x].clone()),
        &UnitExpr::Base(sys.labels()[y].clone()),
    );
    let limit = inner(sys, &diff, &diff, &unit)?;
    Ok(finite.scale_real(1.0 / t).distance(&limit))
}

/// Runs the limit check on every ordered pair of distinct base labels.
pub fn check_limit(sys: &KernelSystem) -> Result<LimitCheck> {
    let (t1, t2) = LIMIT_TIMES;
    let mut out = LimitCheck {
        pair: None,
        error_coarse: 0.0,
        error_fine: 0.0,
        ratio: None,
        pass: true,
    };
    for x in 0..sys.len() {
        for y in 0..sys.len() {
            if x == y {
                continue;
            }
            let e1 = limit_error(sys, x, y, t1)?;
            let e2 = limit_error(sys, x, y, t2)?;
            // below this the error is rounding, not the O(t) term
            if e1 <= 1e-9 {
                continue;
            }
            let r = e1 / e2;
            let ok = (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&r);
            let worse = out.ratio.is_none_or(|old| (r - 2.0).abs() > (old - 2.0).abs());
            if worse {
                out.pair = Some((sys.labels()[x].clone(), sys.labels()[y].clone()));
                out.error_coarse = e1;
                out.error_fine = e2;
                out.ratio = Some(r);
            }
            out.pass &= ok;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkpReport {
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
    pub limit: LimitCheck,
}

impl SkpReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.limit.pass
    }
}

pub const SKP_ITEMS: [&str; 9] = [
    "(a) C-linearity in the second argument",
    "(b) ⟨x, y·a⟩_b = ⟨x, y⟩_b a",
    "(c) ⟨x, y⟩_b = ⟨y, x⟩_b*",
    "(d) ⟨x, x⟩_b ≥ 0 for b ≥ 0",
    "(e) ⟨x^β, y^γ⟩_b = ⟨x, y⟩_b",
    "(f) ⟨x, a·y⟩ = ⟨x, y⟩_a",
    "(g) ⟨x, x⟩_b ≤ ⟨x, x⟩ for 0 ≤ b ≤ 1",
    "Cauchy-Schwarz ⟨x,y⟩⟨y,x⟩ ≤ ‖⟨y,y⟩‖⟨x,x⟩",
    "shifts of ω are orthogonal to everything",
];

fn negative_part(a: &AlgebraElement) -> f64 {
    let herm = (a + &a.adjoint()).scale_real(0.5);
    (-herm.min_eigenvalue()).max(0.0) + a.distance(&a.adjoint())
}

/// Residual of one property-suite item on one random sample.
pub fn skp_residual<R: rand::Rng + ?Sized>(sys: &KernelSystem, rng: &mut R, item: usize) -> Result<f64> {
    let alg = sys.algebra();
    let unit = one(sys);
    let x = random_expr(sys, rng, 2);
    let y = random_expr(sys, rng, 2);
    let b = random::positive_element(rng, alg);
    let ip = |p: &UnitExpr, q: &UnitExpr, c: &AlgebraElement| inner(sys, p, q, c);
    Ok(match item {
        0 => {
            let z = random_expr(sys, rng, 2);
            let lam = random::complex_gaussian(rng);
            let mu = random::complex_gaussian(rng);
            let (sl, sm) = (AlgebraElement::scalar(alg, lam), AlgebraElement::scalar(alg, mu));
            let comb = units::add(sys, &units::mul_right(sys, &y, &sl), &units::mul_right(sys, &z, &sm));
            let lhs = ip(&x, &comb, &b)?;
            let rhs = &ip(&x, &y, &b)?.scale(lam) + &ip(&x, &z, &b)?.scale(mu);
            lhs.distance(&rhs)
        }
        1 => {
            let a = random::gaussian_element(rng, alg);
            ip(&x, &units::mul_right(sys, &y, &a), &b)?.distance(&(&ip(&x, &y, &b)? * &a))
        }
        2 => ip(&x, &y, &b)?.distance(&ip(&y, &x, &b)?.adjoint()),
        3 => negative_part(&ip(&x, &x, &b)?),
        4 => {
            let beta = random::gaussian_element(rng, alg);
            let gamma = random::gaussian_element(rng, alg);
            ip(&x.clone().shift(beta), &y.clone().shift(gamma), &b)?.distance(&ip(&x, &y, &b)?)
        }
        5 => {
            let a = random::positive_element(rng, alg);
            ip(&x, &units::mul_left(sys, &a, &y), &unit)?.distance(&ip(&x, &y, &a)?)
        }
        6 => negative_part(&(&ip(&x, &x, &unit)? - &ip(&x, &x, &b)?)),
        7 => {
            let xy = ip(&x, &y, &unit)?;
            let bound = ip(&x, &x, &unit)?.scale_real(ip(&y, &y, &unit)?.cstar_norm());
            negative_part(&(&bound - &(&xy * &xy.adjoint())))
        }
        _ => {
            let beta = random::gaussian_element(rng, alg);
            let null = UnitExpr::Base(sys.reference().clone()).shift(beta);
            ip(&null, &y, &b)?.cstar_norm() + ip(&null, &null, &b)?.cstar_norm()
        }
    })
}

/// Randomized suite for the semi-inner product properties.
pub fn check_skp(sys: &KernelSystem, samples: usize, tol: f64, seed: u64) -> Result<SkpReport> {
    let mut checks: Vec<IdentityCheck> = SKP_ITEMS
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
            let mut rng = random::stream_rng(seed, (s * SKP_ITEMS.len() + item) as u64);
            let r = skp_residual(sys, &mut rng, item)?;
            check.max_residual = check.max_residual.max(r);
            check.pass &= r <= tol;
        }
    }
    Ok(SkpReport {
        tol,
        checks,
        limit: check_limit(sys)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralReport {
    pub central: bool,
    pub unital: bool,
    pub central_residual: f64,
    pub unital_residual: f64,
}

/// Kernel-level centrality and unitality of a base unit.
pub fn central_check(sys: &KernelSystem, w: &UnitLabel, tol: f64) -> Result<CentralReport> {
    let wi = sys.index_of(w)?;
    let unit = one(sys);
    let basis = sys.algebra().basis();
    let mut central_residual = 0.0_f64;
    for xi in 0..sys.len() {
        let lxw = sys.kernel_at(xi, wi);
        let lwx = sys.kernel_at(wi, xi);
        let (c1, c2) = (lxw.apply(&unit), lwx.apply(&unit));
        for b in &basis {
            central_residual = central_residual
                .max(lxw.apply(b).distance(&(&c1 * b)))
                .max(lwx.apply(b).distance(&(b * &c2)));
        }
    }
    let unital_residual = sys.kernel_at(wi, wi).apply(&unit).cstar_norm();
    Ok(CentralReport {
        central: central_residual <= tol,
        unital: unital_residual <= tol,
        central_residual,
        unital_residual,
    })
}

fn require_central_reference(sys: &KernelSystem) -> Result<()> {
    let rep = central_check(sys, sys.reference(), CENTRAL_TOL)?;
    if rep.central && rep.unital {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "reference {} is not central and unital (centrality residual {:e}, unitality residual {:e})",
            sys.reference(),
            rep.central_residual,
            rep.unital_residual
        )))
    }
}

/// `j(x) = L^{ω,x}(1)`; needs a central unital reference.
pub fn splitting_j(sys: &KernelSystem, x: &UnitExpr) -> Result<AlgebraElement> {
    require_central_reference(sys)?;
    let w = UnitExpr::Base(sys.reference().clone());
    Ok(eval_kernel(sys, &w, x)?.apply(&one(sys)))
}

/// For a null unit `x`, returns `β = (L^{ω,ω} - L^{ω,x})(1)` when `x^β = ω`.
pub fn sim_implies_shift(sys: &KernelSystem, x: &UnitExpr, tol: f64) -> Result<Option<AlgebraElement>> {
    let unit = one(sys);
    let norm = inner(sys, x, x, &unit)?.cstar_norm();
    if norm > tol {
        return Err(Error::Precondition(format!("⟨x, x⟩ has norm {norm:e} > {tol:e}")));
    }
    let w = UnitExpr::Base(sys.reference().clone());
    let beta = (&eval_kernel(sys, &w, &w)? - &eval_kernel(sys, &w, x)?).apply(&unit);
    if units::units_equal(sys, &x.clone().shift(beta.clone()), &w, tol)? {
        Ok(Some(beta))
    } else {
        Ok(None)
    }
}

/// `x^{β}` with `β = -L^{ω,x}(1)`; then `L^{ω, x^β} = 0` when ω is central and unital.
pub fn recenter(sys: &KernelSystem, x: &UnitExpr) -> Result<UnitExpr> {
    let w = UnitExpr::Base(sys.reference().clone());
    let beta = eval_kernel(sys, &w, x)?.apply(&one(sys)).scale_real(-1.0);
    Ok(x.clone().shift(beta))
}

/// `L^{x,y}(b) ≈ ⟨ζ_x, b ζ_y⟩ + β_x* b + b β_y` for every pair of base labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristensenEvansData {
    pub labels: Vec<UnitLabel>,
    pub betas: Vec<AlgebraElement>,
    pub fock_dim: usize,
    pub zetas: Vec<Vec<AlgebraElement>>,
    pub residual: f64,
}

impl ChristensenEvansData {
    /// `b ↦ ⟨ζ_x, b ζ_y⟩`.
    pub fn zeta_kernel(&self, x: usize, y: usize, sys: &KernelSystem) -> SuperOperator {
        if self.fock_dim == 0 {
            return SuperOperator::zero(sys.algebra());
        }
        crate::examples::zeta_kernel(&self.zetas[x], &self.zetas[y])
    }

    /// Rebuilt `L^{x,y}`.
    pub fn kernel(&self, x: usize, y: usize, sys: &KernelSystem) -> SuperOperator {
        &(&self.zeta_kernel(x, y, sys) + &SuperOperator::left_mul(&self.betas[x].adjoint()))
            + &SuperOperator::right_mul(&self.betas[y])
    }
}

/// Christensen–Evans factorization relative to a central unital reference.
///
/// The positive part `Q^{x,y} = L^{x,y} - L_{β_x*} - R_{β_y}` is factored
/// block by block through the Choi-type matrix
/// `J[(x,p,r), (y,q,s)] = Q^{x,y}(e_pq)[r,s]`.
pub fn christensen_evans(sys: &KernelSystem, tol: f64) -> Result<ChristensenEvansData> {
    require_central_reference(sys)?;
    let alg = sys.algebra();
    let unit = one(sys);
    let wi = sys.reference_index();
    let s = sys.len();
    let betas: Vec<AlgebraElement> = (0..s).map(|x| sys.kernel_at(wi, x).apply(&unit)).collect();
    let q = |x: usize, y: usize| -> SuperOperator {
        &(sys.kernel_at(x, y) - &SuperOperator::left_mul(&betas[x].adjoint())) - &SuperOperator::right_mul(&betas[y])
    };
    let qs: Vec<SuperOperator> = (0..s * s).map(|k| q(k / s, k % s)).collect();

    // per block: (n, eigenvalues, eigenvectors)
    let mut factors = Vec::with_capacity(alg.num_blocks());
    let mut lmax = 0.0_f64;
    let mut lmin = 0.0_f64;
    for (blk, (&n, off)) in alg.block_sizes().iter().zip(alg.coord_offsets()).enumerate() {
        let nn = n * n;
        let mut j = DMatrix::<C64>::zeros(s * nn, s * nn);
        for x in 0..s {
            for y in 0..s {
                let qm = qs[x * s + y].matrix();
                for p in 0..n {
                    for qq in 0..n {
                        // column of e_{p,qq} in block blk
                        let col = off + qq * n + p;
                        for r in 0..n {
                            for c in 0..n {
                                j[(x * nn + p * n + r, y * nn + qq * n + c)] = qm[(off + c * n + r, col)];
                            }
                        }
                    }
                }
            }
        }
        let _ = blk;
        let j = (&j + j.adjoint()) * C64::new(0.5, 0.0);
        let eig = j.symmetric_eigen();
        for &l in eig.eigenvalues.iter() {
            lmax = lmax.max(l);
            lmin = lmin.min(l);
        }
        factors.push((n, eig));
    }
    if lmin < -10.0 * tol * lmax.max(1.0) {
        return Err(Error::NotCpd { min_eigenvalue: lmin });
    }
    let cutoff = tol * lmax;
    let retained: Vec<Vec<usize>> = factors
        .iter()
        .map(|(_, e)| (0..e.eigenvalues.len()).filter(|&k| lmax > 0.0 && e.eigenvalues[k] > cutoff).collect())
        .collect();
    let m = retained.iter().map(Vec::len).max().unwrap_or(0);

    let mut zetas = vec![vec![AlgebraElement::zero(alg); m]; s];
    for (x, zx) in zetas.iter_mut().enumerate() {
        for (k, z) in zx.iter_mut().enumerate() {
            let blocks = factors
                .iter()
                .zip(&retained)
                .map(|((n, eig), keep)| {
                    let n = *n;
                    let nn = n * n;
                    match keep.get(k) {
                        None => DMatrix::zeros(n, n),
                        Some(&l) => {
                            let sq = eig.eigenvalues[l].sqrt();
                            let u = eig.eigenvectors.column(l);
                            // ζ[p, r] = conj(√λ u[(x, p, r)])
                            DMatrix::from_fn(n, n, |p, r| (u[x * nn + p * n + r] * sq).conj())
                        }
                    }
                })
                .collect();
            *z = AlgebraElement::new(alg, blocks)?;
        }
    }
    let mut data = ChristensenEvansData {
        labels: sys.labels().to_vec(),
        betas,
        fock_dim: m,
        zetas,
        residual: 0.0,
    };
    let basis = alg.basis();
    let mut residual = 0.0_f64;
    for x in 0..s {
        for y in 0..s {
            let rebuilt = data.kernel(x, y, sys);
            let l = sys.kernel_at(x, y);
            for b in &basis {
                residual = residual.max(rebuilt.apply(b).distance(&l.apply(b)));
            }
        }
    }
    data.residual = residual;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraDescriptor;
    use crate::examples::{fock_system, random_ce_spec, random_ce_system, random_twisted_spec, twisted_system, FockSpec, FockUnit};
    use crate::units::units_equal;

    fn scalar_fock(zetas: &[[f64; 2]]) -> KernelSystem {
        let c = AlgebraDescriptor::scalar();
        let el = |v: f64| AlgebraElement::scalar(&c, C64::new(v, 0.0));
        let mut units = vec![FockUnit::new("w", vec![el(0.0), el(0.0)], el(0.0))];
        for (k, z) in zetas.iter().enumerate() {
            units.push(FockUnit::new(format!("x{k}"), vec![el(z[0]), el(z[1])], el(0.3 * k as f64)));
        }
        fock_system(&FockSpec::new(&c, 2, units, "w")).unwrap()
    }

    #[test]
    fn reference_has_zero_norm_and_rank() {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, 1).unwrap();
        let w = UnitExpr::Base(sys.reference().clone());
        let mut rng = random::seeded_rng(0);
        let b = random::gaussian_element(&mut rng, sys.algebra());
        assert!(inner(&sys, &w, &w, &b).unwrap().cstar_norm() < 1e-15);
        let rep = index_report(&sys, &[w], 1e-9).unwrap();
        assert_eq!(rep.numerical_rank, 0);
        assert_eq!(rep.null_mask, vec![true]);
    }

    #[test]
    fn scalar_fock_rank_is_gram_rank() {
        let sys = scalar_fock(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let exprs: Vec<UnitExpr> = ["x0", "x1", "x2"].iter().map(|&l| UnitExpr::base(l)).collect();
        let rep = index_report(&sys, &exprs, 1e-9).unwrap();
        assert_eq!(rep.numerical_rank, 2);
        // ⟨x0, x2⟩ = ⟨e1, e1 + e2⟩ = 1
        assert!((rep.gram.entries[0][2].block(0)[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        let all = index_report(&sys, &base_exprs(&sys), 1e-9).unwrap();
        assert_eq!(all.numerical_rank, 2);
        assert_eq!(all.null_mask, vec![true, false, false, false]);
    }

    #[test]
    fn twisted_inner_products_vanish() {
        let sys = twisted_system(&random_twisted_spec(3, 4, 2).unwrap()).unwrap();
        let rep = index_report(&sys, &base_exprs(&sys), 1e-10).unwrap();
        assert_eq!(rep.numerical_rank, 0);
        for row in &rep.gram.entries {
            for e in row {
                assert!(e.cstar_norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn skp_suite_passes_on_ce_and_zero_systems() {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, 7).unwrap();
        let rep = check_skp(&sys, 5, 1e-8, 3).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert!(rep.limit.ratio.is_some());

        let c = AlgebraDescriptor::scalar();
        let zero = KernelSystem::from_fn(&c, vec!["w".into(), "x".into()], &"w".into(), |_, _| SuperOperator::zero(&c)).unwrap();
        let rep = check_skp(&zero, 3, 1e-14, 1).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn centrality() {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, 7).unwrap();
        let rep = central_check(&sys, &"w".into(), 1e-12).unwrap();
        assert!(rep.central && rep.unital);
        // a Fock unit with nonzero ζ is not central over M_2
        assert!(!central_check(&sys, &"u1".into(), 1e-9).unwrap().central);

        let scalar = scalar_fock(&[[1.0, 0.0]]);
        for l in scalar.labels() {
            assert!(central_check(&scalar, l, 1e-12).unwrap().central);
        }

        let mut spec = random_twisted_spec(2, 3, 4).unwrap();
        spec.h = crate::random::hermitian_element(&mut random::seeded_rng(1), &AlgebraDescriptor::matrix(2));
        let tw = twisted_system(&spec).unwrap();
        let rep = central_check(&tw, &"w".into(), 1e-9).unwrap();
        assert!(rep.unital && !rep.central);
        assert!(matches!(splitting_j(&tw, &UnitExpr::base("a1")), Err(Error::Precondition(_))));
    }

    #[test]
    fn splitting_map() {
        let alg = AlgebraDescriptor::matrix(2);
        let spec = random_ce_spec(&alg, 2, 3, 9).unwrap();
        let sys = fock_system(&spec).unwrap();
        let w = UnitExpr::base("w");
        assert!(splitting_j(&sys, &w).unwrap().cstar_norm() < 1e-15);
        let mut rng = random::seeded_rng(4);
        let beta = random::gaussian_element(&mut rng, &alg);
        assert!(splitting_j(&sys, &w.clone().shift(beta.clone())).unwrap().distance(&beta) < 1e-14);
        for u in &spec.units {
            let j = splitting_j(&sys, &UnitExpr::Base(u.label.clone())).unwrap();
            assert!(j.distance(&u.beta) < 1e-14);
        }
        let (x, y) = (UnitExpr::base("u1"), UnitExpr::base("u2"));
        let a = random::gaussian_element(&mut rng, &alg);
        let jx = splitting_j(&sys, &x).unwrap();
        let jy = splitting_j(&sys, &y).unwrap();
        assert!(splitting_j(&sys, &units::add(&sys, &x, &y)).unwrap().distance(&(&jx + &jy)) < 1e-13);
        assert!(splitting_j(&sys, &units::mul_right(&sys, &x, &a)).unwrap().distance(&(&jx * &a)) < 1e-13);
        assert!(splitting_j(&sys, &units::mul_left(&sys, &a, &x)).unwrap().distance(&(&a * &jx)) < 1e-13);
    }

    #[test]
    fn null_units_are_shifts_of_the_reference() {
        let alg = AlgebraDescriptor::matrix(2);
        let sys = random_ce_system(&alg, 2, 3, 2).unwrap();
        let mut rng = random::seeded_rng(8);
        let gamma = random::gaussian_element(&mut rng, &alg);
        let x = UnitExpr::base("w").shift(gamma.clone());
        let beta = sim_implies_shift(&sys, &x, 1e-9).unwrap().unwrap();
        assert!(beta.distance(&gamma.scale_real(-1.0)) < 1e-13);
        assert!(matches!(
            sim_implies_shift(&sys, &UnitExpr::base("u1"), 1e-9),
            Err(Error::Precondition(_))
        ));

        let tw = twisted_system(&random_twisted_spec(2, 3, 5).unwrap()).unwrap();
        let a1 = UnitExpr::base("a1");
        let beta = sim_implies_shift(&tw, &a1, 1e-9).unwrap().unwrap();
        assert!(units_equal(&tw, &a1.shift(beta), &UnitExpr::base("w"), 1e-9).unwrap());
    }

    #[test]
    fn recentering_kills_the_reference_kernel() {
        let alg = AlgebraDescriptor::matrix(2);
        let sys = random_ce_system(&alg, 2, 3, 3).unwrap();
        let mut rng = random::seeded_rng(1);
        let x = random_expr(&sys, &mut rng, 2);
        let z = recenter(&sys, &x).unwrap();
        let l = eval_kernel(&sys, &UnitExpr::base("w"), &z).unwrap();
        assert!(l.norm() < 1e-9);
    }

    #[test]
    fn christensen_evans_recovers_fock_data() {
        let alg = AlgebraDescriptor::new(vec![2, 1]).unwrap();
        let spec = random_ce_spec(&alg, 2, 4, 12).unwrap();
        let sys = fock_system(&spec).unwrap();
        let ce = christensen_evans(&sys, 1e-9).unwrap();
        assert!(ce.residual < 1e-10, "{}", ce.residual);
        for (x, u) in spec.units.iter().enumerate() {
            assert!(ce.betas[x].distance(&u.beta) < 1e-12);
            for (y, v) in spec.units.iter().enumerate() {
                let planted = crate::examples::zeta_kernel(&u.zeta, &v.zeta);
                assert!(ce.zeta_kernel(x, y, &sys).distance(&planted) < 1e-10);
            }
        }
    }

    #[test]
    fn christensen_evans_trivial_cases() {
        let c = AlgebraDescriptor::scalar();
        let zero = KernelSystem::from_fn(&c, vec!["w".into()], &"w".into(), |_, _| SuperOperator::zero(&c)).unwrap();
        let ce = christensen_evans(&zero, 1e-9).unwrap();
        assert_eq!(ce.fock_dim, 0);
        assert_eq!(ce.residual, 0.0);

        let one = scalar_fock(&[[1.0, 0.0]]);
        let ce = christensen_evans(&one, 1e-9).unwrap();
        assert_eq!(ce.fock_dim, 1);
        assert!((ce.zetas[1][0].block(0)[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn planted_violation_is_not_cpd() {
        let alg = AlgebraDescriptor::matrix(2);
        let c = AlgebraElement::matrix_unit(&alg, 0, 0, 1);
        let l = SuperOperator::left_mul(&c.adjoint())
            .compose(&SuperOperator::right_mul(&c))
            .scale(C64::new(-1.0, 0.0));
        let sys = KernelSystem::from_fn(&alg, vec!["w".into(), "x".into()], &"w".into(), |i, j| {
            if i == 1 && j == 1 {
                l.clone()
            } else {
                SuperOperator::zero(&alg)
            }
        })
        .unwrap();
        assert!(matches!(christensen_evans(&sys, 1e-9), Err(Error::NotCpd { .. })));
        assert!(matches!(index_report(&sys, &base_exprs(&sys), 1e-9), Err(Error::Positivity { .. })));
    }

    #[test]
    fn relabeling_keeps_the_spectrum() {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 4, 5).unwrap();
        let renamed = sys.relabeled(|l| format!("{l}'").into()).unwrap();
        let a = index_report(&sys, &base_exprs(&sys), 1e-9).unwrap();
        let b = index_report(&renamed, &base_exprs(&renamed), 1e-9).unwrap();
        assert_eq!(a.numerical_rank, b.numerical_rank);
        for (p, q) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((p - q).abs() <= 1e-10);
        }
    }
}
