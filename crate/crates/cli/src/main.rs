//! `unitindex`: validate kernel systems, compute index reports, build tensor
//! products and write example files.
//!
//! Exit codes: 0 pass, 1 property failure, 2 input error, 3 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use unitindex::examples::{random_twisted_spec, FockSpec, FockUnit};
use unitindex::index::{base_exprs, check_skp, index_report, IndexReport, SkpReport};
use unitindex::kernels::{check_ccpd, CcpdReport, SymmetryReport, DEFAULT_SYMMETRY_TOL};
use unitindex::schema::{element_to_literal, parse_expr, Generator, RandomCeLiteral, SystemFile, SCHEMA_VERSION};
use unitindex::tensor::tensor_system;
use unitindex::units::{check_module_axioms, check_shift_compatibility, AxiomReport, IdentityCheck};
use unitindex::{AlgebraDescriptor, AlgebraElement, Error, KernelSystem, C64};

#[derive(Debug, Parser)]
#[command(name = "unitindex", version, about = "Kernel-level calculus and index of units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the symmetry, positivity, module-axiom and inner-product suites.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gram spectrum and numerical rank of a family of units.
    Index {
        file: PathBuf,
        /// Expression literals; defaults to every base label.
        #[arg(long, num_args = 1..)]
        exprs: Vec<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Write the outer tensor product of two systems with explicit kernels.
    Tensor {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an example system file.
    Examples {
        name: ExampleName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleName {
    /// Scalar Fock system with two independent units (seed unused).
    FockDemo,
    /// Twisted system on M_3 with a random self-adjoint twist and four units.
    TwistedDemo,
    /// Random Christensen–Evans system on M_2, Fock dimension 2, four units.
    RandomCe,
}

/// A failed command: exit code plus message.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Symmetry { .. } | Error::Positivity { .. } | Error::NotCpd { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate {
            file,
            samples,
            tol,
            seed,
        } => validate(&file, samples, tol, seed),
        Command::Index { file, exprs, tol } => index(&file, &exprs, tol),
        Command::Tensor { file_a, file_b, out } => tensor(&file_a, &file_b, &out),
        Command::Examples { name, seed, out } => examples(name, seed, &out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<SystemFile, Failure> {
    match SystemFile::load(path) {
        Ok(parsed) => parsed.map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        }),
        Err(e) => Err(io_failure(path, e)),
    }
}

fn load_system(path: &Path) -> Result<KernelSystem, Failure> {
    Ok(load(path)?.to_system()?)
}

fn write_file(path: &Path, file: &SystemFile) -> Outcome {
    std::fs::write(path, file.to_json()).map_err(|e| io_failure(path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(true)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("plain data serializes"));
}

fn literal(a: &AlgebraElement) -> Value {
    json!(element_to_literal(a))
}

// ---- validate ----

fn validate(path: &Path, samples: usize, tol: f64, seed: u64) -> Outcome {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Input(format!("tolerance must be finite and nonnegative, got {tol}")).into());
    }
    let file = load(path)?;
    let mut table = String::new();
    if file.kernels.is_some() {
        let symmetry = file.to_table()?.symmetry_report()?;
        let pass = symmetry.passes(DEFAULT_SYMMETRY_TOL);
        row(&mut table, "symmetry", symmetry.max_residual, pass);
        if !pass {
            eprint!("{table}");
            print_json(&json!({
                "file": path.display().to_string(),
                "pass": false,
                "symmetry": symmetry_json(&symmetry, pass),
            }));
            return Ok(false);
        }
    }
    let sys = file.to_system()?;
    let ccpd = check_ccpd(&sys, samples, tol, seed);
    let axioms = check_module_axioms(&sys, samples, tol, seed)?;
    let shifts = check_shift_compatibility(&sys, samples, tol, seed)?;
    let skp = check_skp(&sys, samples, tol, seed)?;
    let pass = ccpd.pass && axioms.pass() && shifts.pass() && skp.pass();

    let symmetry = sys.to_table().symmetry_report()?;
    if file.kernels.is_none() {
        row(&mut table, "symmetry", symmetry.max_residual, true);
    }
    row(&mut table, "ccpd min eigenvalue", ccpd.min_eigenvalue, ccpd.pass);
    for c in axioms.checks.iter().chain(&shifts.checks).chain(&skp.checks) {
        row(&mut table, c.name, c.max_residual, c.pass);
    }
    match skp.limit.ratio {
        Some(r) => row(&mut table, "finite-time limit ratio", r, skp.limit.pass),
        None => row(&mut table, "finite-time limit (degenerate)", 0.0, skp.limit.pass),
    }
    eprint!("{table}");
    eprintln!("{}", if pass { "all suites pass" } else { "FAILED" });

    print_json(&json!({
        "file": path.display().to_string(),
        "pass": pass,
        "labels": sys.labels().iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        "reference": sys.reference().as_str(),
        "samples": samples,
        "tol": tol,
        "seed": seed,
        "symmetry": symmetry_json(&symmetry, true),
        "ccpd": ccpd_json(&ccpd),
        "module_axioms": axioms_json(&axioms),
        "shift_compatibility": axioms_json(&shifts),
        "skp": skp_json(&skp),
    }));
    Ok(pass)
}

fn row(out: &mut String, name: &str, value: f64, pass: bool) {
    let mark = if pass { "ok  " } else { "FAIL" };
    let _ = writeln!(out, "{mark} {value:>12.3e}  {name}");
}

fn symmetry_json(r: &SymmetryReport, pass: bool) -> Value {
    json!({
        "pass": pass,
        "max_residual": r.max_residual,
        "witness": r.worst.as_ref().map(|(x, y, basis, residual)| json!({
            "x": x.as_str(),
            "y": y.as_str(),
            "basis_index": basis,
            "residual": residual,
        })),
    })
}

fn ccpd_json(r: &CcpdReport) -> Value {
    json!({
        "pass": r.pass,
        "samples": r.samples,
        "min_eigenvalue": r.min_eigenvalue,
        "witness": r.witness.as_ref().map(|w| json!({
            "labels": w.labels.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
            "a": w.a.iter().map(literal).collect::<Vec<_>>(),
            "b": w.b.iter().map(literal).collect::<Vec<_>>(),
            "value": literal(&w.value),
            "min_eigenvalue": w.min_eigenvalue,
        })),
    })
}

fn check_json(c: &IdentityCheck) -> Value {
    json!({
        "name": c.name,
        "instances": c.instances,
        "max_residual": c.max_residual,
        "pass": c.pass,
    })
}

fn axioms_json(r: &AxiomReport) -> Value {
    json!({
        "pass": r.pass(),
        "tol": r.tol,
        "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
    })
}

fn skp_json(r: &SkpReport) -> Value {
    let l = &r.limit;
    json!({
        "pass": r.pass(),
        "tol": r.tol,
        "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
        "limit": {
            "pass": l.pass,
            "pair": l.pair.as_ref().map(|(x, y)| [x.as_str(), y.as_str()]),
            "error_coarse": l.error_coarse,
            "error_fine": l.error_fine,
            "ratio": l.ratio,
        },
    })
}

// ---- index ----

fn index(path: &Path, literals: &[String], tol: f64) -> Outcome {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Input(format!("tolerance must be finite and nonnegative, got {tol}")).into());
    }
    let sys = load_system(path)?;
    let exprs = if literals.is_empty() {
        base_exprs(&sys)
    } else {
        literals
            .iter()
            .map(|s| parse_expr(&sys, s))
            .collect::<unitindex::Result<Vec<_>>>()?
    };
    let report = index_report(&sys, &exprs, tol)?;
    eprint!("{}", index_table(&report));
    print_json(&index_json(&report));
    Ok(true)
}

fn index_table(r: &IndexReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "numerical rank {} (tol {:e})", r.numerical_rank, r.tol);
    for (e, null) in r.gram.exprs.iter().zip(&r.null_mask) {
        let _ = writeln!(out, "  {:<5} {e}", if *null { "null" } else { "" });
    }
    let shown: Vec<String> = r.eigenvalues.iter().map(|l| format!("{l:.6e}")).collect();
    let _ = writeln!(out, "eigenvalues {}", shown.join(" "));
    out
}

fn index_json(r: &IndexReport) -> Value {
    json!({
        "exprs": r.gram.exprs.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "tol": r.tol,
        "numerical_rank": r.numerical_rank,
        "quotient_dim": r.quotient_dim,
        "null_mask": r.null_mask,
        "eigenvalues": r.eigenvalues,
        "gram": r.gram.entries.iter()
            .map(|row| row.iter().map(literal).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

// ---- tensor and examples ----

fn tensor(a: &Path, b: &Path, out: &Path) -> Outcome {
    let (sa, sb) = (load_system(a)?, load_system(b)?);
    let ts = tensor_system(&sa, &sb)?;
    write_file(out, &SystemFile::from_system(&ts.system))
}

fn fock_demo() -> FockSpec {
    let alg = AlgebraDescriptor::scalar();
    let c = |re: f64| AlgebraElement::scalar(&alg, C64::new(re, 0.0));
    let units = vec![
        FockUnit::new("w", vec![c(0.0), c(0.0)], c(0.0)),
        FockUnit::new("x", vec![c(1.0), c(0.0)], c(0.5)),
        FockUnit::new("y", vec![c(0.0), c(1.0)], c(-0.25)),
    ];
    FockSpec::new(&alg, 2, units, "w")
}

fn examples(name: ExampleName, seed: u64, out: &Path) -> Outcome {
    let file = match name {
        ExampleName::FockDemo => SystemFile::from_fock(&fock_demo()),
        ExampleName::TwistedDemo => SystemFile::from_twisted(&random_twisted_spec(3, 4, seed)?),
        ExampleName::RandomCe => SystemFile {
            schema_version: SCHEMA_VERSION,
            algebra: AlgebraDescriptor::matrix(2),
            reference: "w".into(),
            kernels: None,
            generator: Some(Generator::RandomCe(RandomCeLiteral {
                fock_dim: 2,
                unit_count: 4,
                seed,
            })),
        },
    };
    // every example must load back into a valid system
    file.to_system()?;
    write_file(out, &file)
}
