//! Generator kernel systems `(x, y) ↦ L^{x,y}` on a finite label set.
//!
//! A [`KernelSystem`] stores one superoperator per ordered pair of labels,
//! is Hermitian (`L^{y,x}(b) = L^{x,y}(b*)*`) and carries a reference unit
//! ω that the module operations and inner products are built around.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, SuperOperator};
use crate::error::{Error, Result};
use crate::random;

pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-8;

/// Name of a base unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitLabel(String);

impl UnitLabel {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UnitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UnitLabel {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for UnitLabel {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Unvalidated kernel table, as read from a file or assembled by hand.
#[derive(Clone, Debug)]
pub struct KernelTable {
    algebra: AlgebraDescriptor,
    labels: Vec<UnitLabel>,
    entries: HashMap<(usize, usize), SuperOperator>,
}

/// Worst Hermitian-symmetry violation found in a table.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub max_residual: f64,
    /// `(x, y, basis index, residual)` of the worst entry.
    pub worst: Option<(UnitLabel, UnitLabel, usize, f64)>,
}

impl SymmetryReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

impl KernelTable {
    pub fn new(algebra: &AlgebraDescriptor, labels: Vec<UnitLabel>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        if labels.is_empty() {
            return Err(Error::Input("a kernel table needs at least one label".into()));
        }
        Ok(Self {
            algebra: algebra.clone(),
            labels,
            entries: HashMap::new(),
        })
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn labels(&self) -> &[UnitLabel] {
        &self.labels
    }

    fn position(&self, l: &UnitLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|m| m == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))
    }

    pub fn insert(&mut self, x: &UnitLabel, y: &UnitLabel, op: SuperOperator) -> Result<()> {
        self.algebra.ensure_same(op.algebra())?;
        let key = (self.position(x)?, self.position(y)?);
        self.entries.insert(key, op);
        Ok(())
    }

    pub fn get(&self, x: &UnitLabel, y: &UnitLabel) -> Option<&SuperOperator> {
        let key = (self.position(x).ok()?, self.position(y).ok()?);
        self.entries.get(&key)
    }

    pub fn ensure_complete(&self) -> Result<()> {
        let n = self.labels.len();
        for i in 0..n {
            for j in 0..n {
                if !self.entries.contains_key(&(i, j)) {
                    return Err(Error::Incomplete {
                        x: self.labels[i].to_string(),
                        y: self.labels[j].to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks `L^{y,x}(b) = (L^{x,y}(b*))*` on every basis element.
    pub fn symmetry_report(&self) -> Result<SymmetryReport> {
        self.ensure_complete()?;
        let n = self.labels.len();
        let basis_len = self.algebra.coord_dim();
        let mut report = SymmetryReport {
            max_residual: 0.0,
            worst: None,
        };
        for i in 0..n {
            for j in i..n {
                let forward = &self.entries[&(i, j)];
                let backward = &self.entries[&(j, i)];
                let diff = backward - &forward.star_conjugate();
                for k in 0..basis_len {
                    let col = diff.matrix().column(k).into_owned();
                    let r = AlgebraElement::from_coords(&self.algebra, &col)?.cstar_norm();
                    if r > report.max_residual || report.worst.is_none() {
                        report.max_residual = r;
                        report.worst = Some((self.labels[j].clone(), self.labels[i].clone(), k, r));
                    }
                }
            }
        }
        Ok(report)
    }
}

/// A validated, Hermitian kernel system with a reference unit.
#[derive(Clone, Debug)]
pub struct KernelSystem {
    algebra: AlgebraDescriptor,
    labels: Vec<UnitLabel>,
    index: HashMap<UnitLabel, usize>,
    // row-major: table[i * n + j] = L^{labels[i], labels[j]}
    table: Vec<SuperOperator>,
    reference: usize,
}

impl KernelSystem {
    /// Validates a table with the default symmetry tolerance.
    pub fn new(table: KernelTable, reference: &UnitLabel) -> Result<Self> {
        Self::with_tolerance(table, reference, DEFAULT_SYMMETRY_TOL)
    }

    pub fn with_tolerance(table: KernelTable, reference: &UnitLabel, symmetry_tol: f64) -> Result<Self> {
        let reference = table
            .labels
            .iter()
            .position(|l| l == reference)
            .ok_or_else(|| Error::Reference(reference.to_string()))?;
        let sym = table.symmetry_report()?;
        if !sym.passes(symmetry_tol) {
            let (x, y, _, residual) = sym.worst.expect("failing report has a witness");
            return Err(Error::Symmetry {
                x: x.to_string(),
                y: y.to_string(),
                residual,
            });
        }
        let n = table.labels.len();
        let mut entries = table.entries;
        let mut ops = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                ops.push(entries.remove(&(i, j)).expect("completeness checked"));
            }
        }
        let index = table
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(Self {
            algebra: table.algebra,
            labels: table.labels,
            index,
            table: ops,
            reference,
        })
    }

    /// Builds a system from a kernel function on label indices.
    pub fn from_fn(
        algebra: &AlgebraDescriptor,
        labels: Vec<UnitLabel>,
        reference: &UnitLabel,
        kernel: impl Fn(usize, usize) -> SuperOperator,
    ) -> Result<Self> {
        let mut table = KernelTable::new(algebra, labels.clone())?;
        for (i, x) in labels.iter().enumerate() {
            for (j, y) in labels.iter().enumerate() {
                table.insert(x, y, kernel(i, j))?;
            }
        }
        Self::new(table, reference)
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn labels(&self) -> &[UnitLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn reference(&self) -> &UnitLabel {
        &self.labels[self.reference]
    }

    pub fn reference_index(&self) -> usize {
        self.reference
    }

    pub fn index_of(&self, label: &UnitLabel) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &UnitLabel) -> bool {
        self.index.contains_key(label)
    }

    /// `L^{x,y}`.
    pub fn kernel(&self, x: &UnitLabel, y: &UnitLabel) -> Result<&SuperOperator> {
        Ok(self.kernel_at(self.index_of(x)?, self.index_of(y)?))
    }

    pub fn kernel_at(&self, i: usize, j: usize) -> &SuperOperator {
        &self.table[i * self.labels.len() + j]
    }

    /// Same table, different reference unit.
    pub fn with_reference(&self, reference: &UnitLabel) -> Result<Self> {
        let idx = self
            .index
            .get(reference)
            .copied()
            .ok_or_else(|| Error::Reference(reference.to_string()))?;
        Ok(Self {
            reference: idx,
            ..self.clone()
        })
    }

    /// Renames every label; the kernel table is carried over verbatim.
    pub fn relabeled(&self, rename: impl Fn(&UnitLabel) -> UnitLabel) -> Result<Self> {
        let labels: Vec<UnitLabel> = self.labels.iter().map(rename).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            labels,
            index,
            table: self.table.clone(),
            reference: self.reference,
        })
    }

    pub fn to_table(&self) -> KernelTable {
        let n = self.labels.len();
        let mut entries = HashMap::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.insert((i, j), self.kernel_at(i, j).clone());
            }
        }
        KernelTable {
            algebra: self.algebra.clone(),
            labels: self.labels.clone(),
            entries,
        }
    }
}

/// `K_t^{x,y}(b) = exp(t L^{x,y})(b)`.
pub fn semigroup_eval(
    sys: &KernelSystem,
    x: &UnitLabel,
    y: &UnitLabel,
    t: f64,
    b: &AlgebraElement,
) -> Result<AlgebraElement> {
    let l = sys.kernel(x, y)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NumericInput(format!("time must be finite and nonnegative, got {t}")));
    }
    sys.algebra.ensure_same(b.algebra())?;
    Ok(l.exp(t)?.apply(b))
}

/// One constraint tuple of the conditional positivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct CcpdWitness {
    pub labels: Vec<UnitLabel>,
    pub a: Vec<AlgebraElement>,
    pub b: Vec<AlgebraElement>,
    pub value: AlgebraElement,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CcpdReport {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub pass: bool,
    pub witness: Option<CcpdWitness>,
}

/// `Σ_{i,j} b_i* L^{x_i,x_j}(a_i* a_j) b_j`.
///
/// The tuple is only meaningful for the conditional positivity test when
/// `Σ a_j b_j = 0`; that constraint is not checked here.
pub fn ccpd_sum(
    sys: &KernelSystem,
    labels: &[UnitLabel],
    a: &[AlgebraElement],
    b: &[AlgebraElement],
) -> Result<AlgebraElement> {
    if labels.len() != a.len() || a.len() != b.len() || labels.is_empty() {
        return Err(Error::Input(format!(
            "tuple lengths differ or are empty: {} labels, {} a's, {} b's",
            labels.len(),
            a.len(),
            b.len()
        )));
    }
    let idx = labels
        .iter()
        .map(|l| sys.index_of(l))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = AlgebraElement::zero(&sys.algebra);
    for i in 0..idx.len() {
        for j in 0..idx.len() {
            let inner = sys.kernel_at(idx[i], idx[j]).apply(&(&a[i].adjoint() * &a[j]));
            sum = &sum + &(&(&b[i].adjoint() * &inner) * &b[j]);
        }
    }
    Ok(sum)
}

const MAX_REDRAWS: usize = 64;
const MAX_CONDITION: f64 = 1e6;

/// Randomized test of conditional complete positive definiteness.
///
/// Each sample draws `n ∈ {2, 3}` labels (with repetition), elements
/// `a_1..a_n`, `b_1..b_{n-1}` and solves `b_n = -a_n^{-1} Σ_{j<n} a_j b_j`,
/// redrawing `a_n` while it is badly conditioned. Tuples are rescaled so all
/// entries have norm at most one before the sum is formed.
pub fn check_ccpd(sys: &KernelSystem, sample_count: usize, tol: f64, seed: u64) -> CcpdReport {
    let mut report = CcpdReport {
        samples: sample_count,
        min_eigenvalue: f64::INFINITY,
        pass: true,
        witness: None,
    };
    let alg = &sys.algebra;
    for s in 0..sample_count {
        let mut rng = random::stream_rng(seed, s as u64);
        let n = if rand::Rng::random_bool(&mut rng, 0.5) { 2 } else { 3 };
        let labels: Vec<UnitLabel> = (0..n)
            .map(|_| sys.labels[rand::Rng::random_range(&mut rng, 0..sys.len())].clone())
            .collect();
        let mut a: Vec<AlgebraElement> =
            (0..n).map(|_| random::gaussian_element(&mut rng, alg)).collect();
        let mut redraws = 0;
        while a[n - 1].condition_number() > MAX_CONDITION && redraws < MAX_REDRAWS {
            a[n - 1] = random::gaussian_element(&mut rng, alg);
            redraws += 1;
        }
        let Some(inv) = a[n - 1].try_inverse() else {
            continue;
        };
        let mut b: Vec<AlgebraElement> =
            (0..n - 1).map(|_| random::gaussian_element(&mut rng, alg)).collect();
        let partial = (0..n - 1).fold(AlgebraElement::zero(alg), |acc, j| &acc + &(&a[j] * &b[j]));
        b.push(-(&inv * &partial));

        let amax = a.iter().map(AlgebraElement::cstar_norm).fold(0.0, f64::max);
        let bmax = b.iter().map(AlgebraElement::cstar_norm).fold(0.0, f64::max);
        if amax > 0.0 {
            a.iter_mut().for_each(|x| *x = x.scale_real(1.0 / amax));
        }
        if bmax > 0.0 {
            b.iter_mut().for_each(|x| *x = x.scale_real(1.0 / bmax));
        }

        let value = ccpd_sum(sys, &labels, &a, &b).expect("labels drawn from the system");
        let ev = value.min_eigenvalue();
        if ev < report.min_eigenvalue {
            report.min_eigenvalue = ev;
        }
        if ev < -tol && report.witness.as_ref().is_none_or(|w| ev < w.min_eigenvalue) {
            report.pass = false;
            report.witness = Some(CcpdWitness {
                labels,
                a,
                b,
                value,
                min_eigenvalue: ev,
            });
        }
    }
    if sample_count == 0 || !report.min_eigenvalue.is_finite() {
        report.min_eigenvalue = 0.0;
    }
    report
}
