//! File formats: element literals, system files and expression literals.
//!
//! An element literal is a JSON array of blocks, each block an array of
//! rows, each entry an `[re, im]` pair. Floats are written in shortest
//! round-trip form, so writing and reading a file is bit-exact.
//!
//! Expression literals are prefix forms:
//!
//! ```text
//! x                        base label (also `(base x)`)
//! (shift E K)              E^K
//! (rcombo (E K) ...)       coefficients on the right, summing to 1
//! (lcombo (K E) ...)       coefficients on the left, summing to 1
//! (add E F) (sub E F) (neg E) (lmul K E) (rmul E K)
//! ```
//!
//! A coefficient `K` is an element literal, a real number `r` (meaning
//! `r·1`) or a complex pair `[re, im]`.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, SuperOperator, C64};
use crate::error::{Error, Result};
use crate::examples::{fock_system, random_ce_spec, twisted_system, FockSpec, FockUnit, TwistedSpec};
use crate::kernels::{KernelSystem, KernelTable, UnitLabel};
use crate::units::{self, UnitExpr};

pub const SCHEMA_VERSION: u32 = 1;

pub type ElementLiteral = Vec<Vec<Vec<[f64; 2]>>>;
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

pub fn element_to_literal(a: &AlgebraElement) -> ElementLiteral {
    a.blocks().iter().map(matrix_to_literal).collect()
}

pub fn element_from_literal(algebra: &AlgebraDescriptor, lit: &ElementLiteral) -> Result<AlgebraElement> {
    if lit.len() != algebra.num_blocks() {
        return Err(Error::Shape(format!(
            "element literal has {} blocks, algebra has {}",
            lit.len(),
            algebra.num_blocks()
        )));
    }
    let blocks = lit
        .iter()
        .zip(algebra.block_sizes())
        .map(|(b, &n)| matrix_from_literal(b, n))
        .collect::<Result<Vec<_>>>()?;
    let a = AlgebraElement::new(algebra, blocks)?;
    if !a.is_finite() {
        return Err(Error::NumericInput("element literal has non-finite entries".into()));
    }
    Ok(a)
}

fn matrix_to_literal(m: &DMatrix<C64>) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_literal(rows: &MatrixLiteral, n: usize) -> Result<DMatrix<C64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("expected a {n}x{n} matrix literal")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub x: String,
    pub y: String,
    pub matrix: MatrixLiteral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsLiteral {
    pub labels: Vec<String>,
    pub table: Vec<KernelEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockUnitLiteral {
    pub label: String,
    pub zeta: Vec<ElementLiteral>,
    pub beta: ElementLiteral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockLiteral {
    pub fock_dim: usize,
    pub units: Vec<FockUnitLiteral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistedUnitLiteral {
    pub label: String,
    pub a: ElementLiteral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistedLiteral {
    pub h: ElementLiteral,
    pub units: Vec<TwistedUnitLiteral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCeLiteral {
    pub fock_dim: usize,
    pub unit_count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Fock(FockLiteral),
    Twisted(TwistedLiteral),
    RandomCe(RandomCeLiteral),
}

/// On-disk description of a kernel system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: u32,
    pub algebra: AlgebraDescriptor,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelsLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                file.schema_version
            )));
        }
        match (&file.kernels, &file.generator) {
            (Some(_), None) | (None, Some(_)) => Ok(file),
            _ => Err(Error::Input("exactly one of `kernels` and `generator` must be present".into())),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// Reads a file; I/O failures are returned separately from format errors.
    pub fn load(path: &Path) -> std::result::Result<Result<Self>, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_json(&text))
    }

    /// Explicit kernel file for a validated system.
    pub fn from_system(sys: &KernelSystem) -> Self {
        let mut table = Vec::with_capacity(sys.len() * sys.len());
        for (i, x) in sys.labels().iter().enumerate() {
            for (j, y) in sys.labels().iter().enumerate() {
                table.push(KernelEntry {
                    x: x.to_string(),
                    y: y.to_string(),
                    matrix: matrix_to_literal(sys.kernel_at(i, j).matrix()),
                });
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            algebra: sys.algebra().clone(),
            reference: sys.reference().to_string(),
            kernels: Some(KernelsLiteral {
                labels: sys.labels().iter().map(|l| l.to_string()).collect(),
                table,
            }),
            generator: None,
        }
    }

    pub fn from_fock(spec: &FockSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            algebra: spec.algebra.clone(),
            reference: spec.reference.to_string(),
            kernels: None,
            generator: Some(Generator::Fock(FockLiteral {
                fock_dim: spec.fock_dim,
                units: spec
                    .units
                    .iter()
                    .map(|u| FockUnitLiteral {
                        label: u.label.to_string(),
                        zeta: u.zeta.iter().map(element_to_literal).collect(),
                        beta: element_to_literal(&u.beta),
                    })
                    .collect(),
            })),
        }
    }

    pub fn from_twisted(spec: &TwistedSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            algebra: spec.algebra(),
            reference: spec.reference.to_string(),
            kernels: None,
            generator: Some(Generator::Twisted(TwistedLiteral {
                h: element_to_literal(&spec.h),
                units: spec
                    .units
                    .iter()
                    .map(|(l, a)| TwistedUnitLiteral {
                        label: l.to_string(),
                        a: element_to_literal(a),
                    })
                    .collect(),
            })),
        }
    }

    /// Unvalidated kernel table, for reporting symmetry witnesses.
    pub fn to_table(&self) -> Result<KernelTable> {
        let alg = &self.algebra;
        match (&self.kernels, &self.generator) {
            (Some(k), _) => {
                let labels = k.labels.iter().map(UnitLabel::new).collect();
                let mut table = KernelTable::new(alg, labels)?;
                for e in &k.table {
                    let d = alg.coord_dim();
                    let m = matrix_from_literal(&e.matrix, d)
                        .map_err(|_| Error::Shape(format!("kernel ({}, {}) must be {d}x{d}", e.x, e.y)))?;
                    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(Error::NumericInput(format!("kernel ({}, {}) has non-finite entries", e.x, e.y)));
                    }
                    let (x, y) = (UnitLabel::new(e.x.as_str()), UnitLabel::new(e.y.as_str()));
                    if table.get(&x, &y).is_some() {
                        return Err(Error::Input(format!("kernel ({}, {}) given twice", e.x, e.y)));
                    }
                    table.insert(&x, &y, SuperOperator::new(alg, m)?)?;
                }
                table.ensure_complete()?;
                Ok(table)
            }
            (None, Some(_)) => Ok(self.to_system()?.to_table()),
            (None, None) => Err(Error::Input("file has neither kernels nor generator".into())),
        }
    }

    pub fn to_system(&self) -> Result<KernelSystem> {
        let alg = &self.algebra;
        let reference = UnitLabel::new(self.reference.as_str());
        match (&self.kernels, &self.generator) {
            (Some(_), _) => KernelSystem::new(self.to_table()?, &reference),
            (None, Some(Generator::Fock(f))) => {
                let units = f
                    .units
                    .iter()
                    .map(|u| {
                        Ok(FockUnit::new(
                            u.label.as_str(),
                            u.zeta
                                .iter()
                                .map(|z| element_from_literal(alg, z))
                                .collect::<Result<_>>()?,
                            element_from_literal(alg, &u.beta)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                fock_system(&FockSpec::new(alg, f.fock_dim, units, reference))
            }
            (None, Some(Generator::Twisted(t))) => {
                if alg.num_blocks() != 1 {
                    return Err(Error::Input("twisted generator needs a single-block algebra".into()));
                }
                let units = t
                    .units
                    .iter()
                    .map(|u| Ok((UnitLabel::new(u.label.as_str()), element_from_literal(alg, &u.a)?)))
                    .collect::<Result<Vec<_>>>()?;
                twisted_system(&TwistedSpec {
                    n: alg.block_sizes()[0],
                    h: element_from_literal(alg, &t.h)?,
                    units,
                    reference,
                })
            }
            (None, Some(Generator::RandomCe(r))) => {
                let spec = random_ce_spec(alg, r.fock_dim, r.unit_count, r.seed)?;
                if spec.reference != reference {
                    return Err(Error::Reference(self.reference.clone()));
                }
                fock_system(&spec)
            }
            (None, None) => Err(Error::Input("file has neither kernels nor generator".into())),
        }
    }
}

// ---- expression literals ----

fn coefficient_literal(k: &AlgebraElement) -> String {
    serde_json::to_string(&element_to_literal(k)).expect("plain data serializes")
}

impl fmt::Display for UnitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitExpr::Base(l) => write!(f, "{l}"),
            UnitExpr::Shift { inner, beta } => write!(f, "(shift {inner} {})", coefficient_literal(beta)),
            UnitExpr::RightCombo(terms) => {
                write!(f, "(rcombo")?;
                for (e, k) in terms {
                    write!(f, " ({e} {})", coefficient_literal(k))?;
                }
                write!(f, ")")
            }
            UnitExpr::LeftCombo(terms) => {
                write!(f, "(lcombo")?;
                for (k, e) in terms {
                    write!(f, " ({} {e})", coefficient_literal(k))?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String, usize),
    Json(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::Json(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, at: usize, msg: impl fmt::Display) -> Error {
        Error::Parse(format!("at offset {at}: {msg}"))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn read(&mut self) -> Result<Sexp> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.src[self.pos..].chars().next() else {
            return Err(self.err(start, "unexpected end of input"));
        };
        match c {
            '(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src[self.pos..].chars().next() {
                        None => return Err(self.err(start, "unclosed '('")),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            ')' => Err(self.err(start, "unexpected ')'")),
            '[' => {
                let mut depth = 0usize;
                for (i, ch) in self.src[start..].char_indices() {
                    match ch {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                self.pos = start + i + 1;
                                return Ok(Sexp::Json(self.src[start..self.pos].to_string(), start));
                            }
                        }
                        _ => {}
                    }
                }
                Err(self.err(start, "unclosed '['"))
            }
            _ => {
                let end = self.src[start..]
                    .char_indices()
                    .find(|&(_, ch)| ch.is_whitespace() || "()[]".contains(ch))
                    .map_or(self.src.len(), |(i, _)| start + i);
                self.pos = end;
                Ok(Sexp::Atom(self.src[start..end].to_string(), start))
            }
        }
    }
}

struct ExprParser<'a> {
    sys: &'a KernelSystem,
}

impl ExprParser<'_> {
    fn err(&self, at: usize, msg: impl fmt::Display) -> Error {
        Error::Parse(format!("at offset {at}: {msg}"))
    }

    fn label(&self, name: &str, at: usize) -> Result<UnitExpr> {
        let l = UnitLabel::new(name);
        if !self.sys.contains(&l) {
            return Err(Error::UnknownLabel(format!("{name} (at offset {at})")));
        }
        Ok(UnitExpr::Base(l))
    }

    fn coefficient(&self, s: &Sexp) -> Result<AlgebraElement> {
        let alg = self.sys.algebra();
        match s {
            Sexp::Atom(a, at) => {
                let r: f64 = a
                    .parse()
                    .map_err(|_| self.err(*at, format!("expected a coefficient, found {a:?}")))?;
                if !r.is_finite() {
                    return Err(self.err(*at, "coefficient is not finite"));
                }
                Ok(AlgebraElement::scalar(alg, C64::new(r, 0.0)))
            }
            Sexp::Json(text, at) => {
                if let Ok([re, im]) = serde_json::from_str::<[f64; 2]>(text) {
                    return Ok(AlgebraElement::scalar(alg, C64::new(re, im)));
                }
                let lit: ElementLiteral =
                    serde_json::from_str(text).map_err(|e| self.err(*at, format!("bad element literal: {e}")))?;
                element_from_literal(alg, &lit).map_err(|e| self.err(*at, e))
            }
            Sexp::List(_, at) => Err(self.err(*at, "expected a coefficient, found a list")),
        }
    }

    fn args<'s>(&self, items: &'s [Sexp], n: usize, head: &str, at: usize) -> Result<&'s [Sexp]> {
        if items.len() != n + 1 {
            return Err(self.err(at, format!("`{head}` takes {n} argument(s), got {}", items.len() - 1)));
        }
        Ok(&items[1..])
    }

    fn pair<'s>(&self, s: &'s Sexp) -> Result<(&'s Sexp, &'s Sexp)> {
        match s {
            Sexp::List(v, _) if v.len() == 2 => Ok((&v[0], &v[1])),
            other => Err(self.err(other.pos(), "expected a two-element term")),
        }
    }

    fn expr(&self, s: &Sexp) -> Result<UnitExpr> {
        let (items, at) = match s {
            Sexp::Atom(a, at) => return self.label(a, *at),
            Sexp::Json(_, at) => return Err(self.err(*at, "expected an expression, found an element literal")),
            Sexp::List(items, at) => (items, *at),
        };
        let Some(Sexp::Atom(head, _)) = items.first() else {
            return Err(self.err(at, "expected an operator name"));
        };
        let sys = self.sys;
        match head.as_str() {
            "base" => match self.args(items, 1, head, at)? {
                [Sexp::Atom(a, p)] => self.label(a, *p),
                [other] => Err(self.err(other.pos(), "`base` takes a label")),
                _ => unreachable!(),
            },
            "shift" => {
                let a = self.args(items, 2, head, at)?;
                Ok(self.expr(&a[0])?.shift(self.coefficient(&a[1])?))
            }
            "rcombo" | "lcombo" => {
                if items.len() < 2 {
                    return Err(self.err(at, format!("`{head}` needs at least one term")));
                }
                if head == "rcombo" {
                    let terms = items[1..]
                        .iter()
                        .map(|t| {
                            let (e, k) = self.pair(t)?;
                            Ok((self.expr(e)?, self.coefficient(k)?))
                        })
                        .collect::<Result<_>>()?;
                    Ok(UnitExpr::RightCombo(terms))
                } else {
                    let terms = items[1..]
                        .iter()
                        .map(|t| {
                            let (k, e) = self.pair(t)?;
                            Ok((self.coefficient(k)?, self.expr(e)?))
                        })
                        .collect::<Result<_>>()?;
                    Ok(UnitExpr::LeftCombo(terms))
                }
            }
            "add" => {
                let a = self.args(items, 2, head, at)?;
                Ok(units::add(sys, &self.expr(&a[0])?, &self.expr(&a[1])?))
            }
            "sub" => {
                let a = self.args(items, 2, head, at)?;
                Ok(units::sub(sys, &self.expr(&a[0])?, &self.expr(&a[1])?))
            }
            "neg" => {
                let a = self.args(items, 1, head, at)?;
                Ok(units::neg(sys, &self.expr(&a[0])?))
            }
            "lmul" => {
                let a = self.args(items, 2, head, at)?;
                Ok(units::mul_left(sys, &self.coefficient(&a[0])?, &self.expr(&a[1])?))
            }
            "rmul" => {
                let a = self.args(items, 2, head, at)?;
                Ok(units::mul_right(sys, &self.expr(&a[0])?, &self.coefficient(&a[1])?))
            }
            other => Err(self.err(at, format!("unknown operator `{other}`"))),
        }
    }
}

/// Parses an expression literal against a system's labels and algebra.
pub fn parse_expr(sys: &KernelSystem, text: &str) -> Result<UnitExpr> {
    let mut reader = Reader { src: text, pos: 0 };
    let sexp = reader.read()?;
    reader.skip_ws();
    if reader.pos != text.len() {
        return Err(reader.err(reader.pos, "trailing input"));
    }
    ExprParser { sys }.expr(&sexp)
}
