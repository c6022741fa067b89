//! `gentangle` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification property failed, 2 malformed input or invalid
//! parameters, 3 an input violates a state invariant, 4 the dimension guard tripped.

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::basis::{gram_schmidt_orthonormalize, spin_one_candidates, spin_one_reference_basis};
use crate::error::GeError;
use crate::measure::{ge_purity_form, general_entanglement, genuine_entanglement, GeReport};
use crate::rng;
use crate::state::{random_product_state, random_pure_state, MultipartiteState, NORM_TOL};
use crate::suites::{max_entangled_qutrits, run_suite, spin_one_ge, Suite};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Norm deviation accepted (and repaired) when reading a state file.
pub const INGEST_NORM_TOL: f64 = 1e-8;

/// Default tolerance for the report's form-agreement check.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "gentangle",
    version,
    about = "General Entanglement of multipartite pure states"
)]
pub struct Cli {
    /// Seed for generators and verification suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the JSON output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print only the headline number (compute) or verdict (verify).
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Comparison tolerance used in reports.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the measure for a state file or a generated state.
    Compute {
        /// State file (JSON).
        #[arg(conflicts_with = "gen", required_unless_present = "gen")]
        input: Option<PathBuf>,
        /// Generate the state instead of reading one.
        #[arg(long = "gen", value_enum)]
        gen: Option<Kind>,
        #[command(flatten)]
        params: GenParams,
        /// Also compute the genuine multipartite variant.
        #[arg(long)]
        genuine: bool,
    },
    /// Write a state file.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        params: GenParams,
    },
    /// Run a seeded property suite.
    Verify {
        /// One of: lemma, lu-invariance, measurement-independence, locc, oracle-max
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Rebuild the spin-1 basis by Gram-Schmidt and evaluate the qutrit form of the measure.
    #[command(name = "spin1-demo")]
    Spin1Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Ghz,
    W,
    Bell,
    Product,
    Random,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GenParams {
    /// Number of subsystems (ghz, w).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated subsystem dimensions, e.g. 2,3,2.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    fn invariant(msg: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<GeError> for CliError {
    fn from(e: GeError) -> Self {
        let code = match e {
            GeError::InvalidArgument(_) => 2,
            GeError::InvariantViolation(_) | GeError::Degenerate { .. } => 3,
            GeError::ResourceLimit { .. } => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// On-disk pure state: `amplitudes` holds `[re, im]` pairs in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &MultipartiteState, label: Option<String>) -> Self {
        Self {
            label,
            dims: state.dims().to_vec(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Validates the file and returns the state plus a warning if it had to be renormalized.
    pub fn to_state(&self) -> Result<(MultipartiteState, Option<String>), CliError> {
        if self.dims.len() < 2 {
            return Err(CliError::invariant(format!(
                "dims: need at least two subsystems, got {}",
                self.dims.len()
            )));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(CliError::invariant(format!(
                "dims: every dimension must be at least 2, found {d}"
            )));
        }
        let total = crate::state::checked_total_dim(&self.dims)?;
        if self.amplitudes.len() != total {
            return Err(CliError::invariant(format!(
                "amplitudes: length {} does not match dimension product {total}",
                self.amplitudes.len()
            )));
        }
        let amps: Vec<C64> = self.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > INGEST_NORM_TOL {
            return Err(CliError::invariant(format!(
                "normalization: squared norm {norm_sq} differs from 1 by more than {INGEST_NORM_TOL:e}"
            )));
        }
        if (norm_sq - 1.0).abs() > NORM_TOL {
            let state = MultipartiteState::normalized(self.dims.clone(), amps)?;
            return Ok((state, Some(format!("input renormalized (squared norm was {norm_sq})"))));
        }
        Ok((MultipartiteState::new(self.dims.clone(), amps)?, None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile {
    pub tool: &'static str,
    pub version: &'static str,
    pub label: Option<String>,
    pub dims: Vec<usize>,
    pub seed: Option<u64>,
    pub per_subsystem: Vec<crate::measure::SubsystemEntanglement>,
    pub ge_raw: f64,
    pub ge_normalized: f64,
    pub ge_via_purity: f64,
    pub agreement_defect: f64,
    pub tolerance: f64,
    pub forms_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genuine: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ReportFile {
    pub fn new(
        state: &MultipartiteState,
        report: GeReport,
        label: Option<String>,
        seed: Option<u64>,
        tolerance: f64,
        warning: Option<String>,
    ) -> Self {
        Self {
            tool: "gentangle",
            version: VERSION,
            label,
            dims: state.dims().to_vec(),
            seed,
            forms_agree: report.agreement_defect < tolerance,
            per_subsystem: report.per_subsystem,
            ge_raw: report.ge_raw,
            ge_normalized: report.ge_normalized,
            ge_via_purity: report.ge_via_purity,
            agreement_defect: report.agreement_defect,
            tolerance,
            genuine: report.genuine,
            warning,
        }
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_sig17(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Decimal rendering with 17 significant digits, which round-trips every finite `f64`.
/// Non-finite values become `null`.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Builds one of the named probe states.
pub fn generate_state(kind: Kind, params: &GenParams, seed: u64) -> Result<(MultipartiteState, String), CliError> {
    let qubits_n = |default: usize| -> Result<usize, CliError> {
        if let Some(dims) = &params.dims {
            if dims.iter().any(|&d| d != 2) {
                return Err(CliError::usage(format!("{kind:?} is defined for qubits only")));
            }
            return Ok(dims.len());
        }
        Ok(params.n.unwrap_or(default))
    };
    let real = |x: f64| C64::new(x, 0.0);
    match kind {
        Kind::Bell => {
            if params.n.is_some_and(|n| n != 2) || params.dims.as_ref().is_some_and(|d| d != &[2, 2]) {
                return Err(CliError::usage(
                    "bell is the two-qubit state; --n/--dims cannot change it",
                ));
            }
            let a = real(std::f64::consts::FRAC_1_SQRT_2);
            let z = real(0.0);
            Ok((MultipartiteState::new(vec![2, 2], vec![a, z, z, a])?, "bell".into()))
        }
        Kind::Ghz => {
            let dims = match &params.dims {
                Some(dims) => {
                    if dims.windows(2).any(|w| w[0] != w[1]) {
                        return Err(CliError::usage("ghz needs equal local dimensions"));
                    }
                    if params.n.is_some_and(|n| n != dims.len()) {
                        return Err(CliError::usage("--n disagrees with --dims"));
                    }
                    dims.clone()
                }
                None => vec![2; params.n.unwrap_or(3)],
            };
            if dims.len() < 2 {
                return Err(CliError::usage("ghz needs n >= 2"));
            }
            let total = crate::state::checked_total_dim(&dims).map_err(usage_unless_guard)?;
            let d = dims[0];
            let mut amps = vec![real(0.0); total];
            // |a a ... a> sits at a * (1 + d + d^2 + ...)
            let step = (total - 1) / (d - 1);
            let amp = real(1.0 / (d as f64).sqrt());
            for a in 0..d {
                amps[a * step] = amp;
            }
            let label = format!("ghz-{}x{}", dims.len(), d);
            Ok((MultipartiteState::new(dims, amps)?, label))
        }
        Kind::W => {
            let n = qubits_n(3)?;
            if n < 2 {
                return Err(CliError::usage("w needs n >= 2"));
            }
            let dims = vec![2; n];
            let total = crate::state::checked_total_dim(&dims).map_err(usage_unless_guard)?;
            let mut amps = vec![real(0.0); total];
            let amp = real(1.0 / (n as f64).sqrt());
            for k in 0..n {
                amps[1 << k] = amp;
            }
            Ok((MultipartiteState::new(dims, amps)?, format!("w-{n}")))
        }
        Kind::Product => {
            let dims = params.dims.clone().unwrap_or_else(|| vec![2; params.n.unwrap_or(2)]);
            if dims.len() < 2 {
                return Err(CliError::usage("product needs at least two subsystems"));
            }
            let state = random_product_state(&mut rng::seeded(seed), &dims).map_err(usage_unless_guard)?;
            Ok((state, format!("product-{}-seed{seed}", dims_label(&dims))))
        }
        Kind::Random => {
            let dims = params.dims.clone().unwrap_or_else(|| vec![2; params.n.unwrap_or(2)]);
            let state = random_pure_state(&dims, seed).map_err(usage_unless_guard)?;
            Ok((state, format!("random-{}-seed{seed}", dims_label(&dims))))
        }
    }
}

fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

/// Generator parameter errors are usage errors, except the dimension guard.
fn usage_unless_guard(e: GeError) -> CliError {
    let code = if matches!(e, GeError::ResourceLimit { .. }) {
        4
    } else {
        2
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

pub fn read_state_file(path: &Path) -> Result<StateFile, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("malformed state file {}: {e}", path.display())))
}

/// Full report for an in-memory state.
pub fn compute_report(
    state: &MultipartiteState,
    label: Option<String>,
    seed: Option<u64>,
    with_genuine: bool,
    tolerance: f64,
    warning: Option<String>,
) -> Result<ReportFile, CliError> {
    let mut report = general_entanglement(state)?;
    if with_genuine {
        report.genuine = Some(genuine_entanglement(state)?);
    }
    Ok(ReportFile::new(state, report, label, seed, tolerance, warning))
}

#[derive(Debug, Serialize)]
struct Spin1Operator {
    index: usize,
    matrix: Vec<Vec<[f64; 2]>>,
    deviation_from_reference: f64,
}

#[derive(Debug, Serialize)]
struct Spin1Report {
    basis: Vec<Spin1Operator>,
    basis_passes_verification: bool,
    max_basis_deviation: f64,
    random_state_seed: u64,
    random_state_ge_spin1_form: f64,
    random_state_ge_purity_form: f64,
    random_state_agreement_defect: f64,
    max_entangled_ge: f64,
    product_ge: f64,
    passed: bool,
}

fn spin1_demo(seed: u64, tolerance: f64) -> Result<Spin1Report, CliError> {
    let basis = gram_schmidt_orthonormalize(&spin_one_candidates())?;
    let reference = spin_one_reference_basis();
    let ops: Vec<Spin1Operator> = basis
        .operators()
        .iter()
        .zip(&reference)
        .enumerate()
        .map(|(k, (m, r))| Spin1Operator {
            index: k + 1,
            matrix: (0..3)
                .map(|i| (0..3).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
            deviation_from_reference: m.max_abs_diff(r),
        })
        .collect();
    let max_dev = ops.iter().map(|o| o.deviation_from_reference).fold(0.0, f64::max);
    let state = random_pure_state(&[3, 3], seed)?;
    let spin1 = spin_one_ge(&state)?;
    let purity = ge_purity_form(&state)?;
    let max_ent = spin_one_ge(&max_entangled_qutrits())?;
    let product = spin_one_ge(&random_product_state(&mut rng::seeded(seed), &[3, 3])?)?;
    let passed = max_dev < 1e-10
        && (spin1 - purity).abs() < tolerance
        && (max_ent - 1.0).abs() < tolerance
        && product.abs() < tolerance;
    Ok(Spin1Report {
        basis: ops,
        basis_passes_verification: basis.verify().passed,
        max_basis_deviation: max_dev,
        random_state_seed: seed,
        random_state_ge_spin1_form: spin1,
        random_state_ge_purity_form: purity,
        random_state_agreement_defect: (spin1 - purity).abs(),
        max_entangled_ge: max_ent,
        product_ge: product,
        passed,
    })
}

fn emit(cli: &Cli, json: &str, quiet_line: Option<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::usage(format!("write failed: {e}"));
    if let Some(path) = &cli.out {
        std::fs::write(path, json).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    match quiet_line {
        Some(line) if cli.quiet => writeln!(stdout, "{line}").map_err(io_err),
        _ if cli.out.is_none() => stdout.write_all(json.as_bytes()).map_err(io_err),
        _ => Ok(()),
    }
}

/// Runs a parsed command line; returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Compute {
            input,
            gen,
            params,
            genuine,
        } => {
            let tolerance = cli.tolerance.unwrap_or(AGREEMENT_TOL);
            let (state, label, seed_used, warning) = match (input, gen) {
                (Some(path), _) => {
                    let file = read_state_file(path)?;
                    let (state, warning) = file.to_state()?;
                    (state, file.label, cli.seed, warning)
                }
                (None, Some(kind)) => {
                    let (state, label) = generate_state(*kind, params, seed)?;
                    let used = matches!(kind, Kind::Random | Kind::Product).then_some(seed);
                    (state, Some(label), used, None)
                }
                (None, None) => return Err(CliError::usage("give a state file or --gen")),
            };
            let report = compute_report(&state, label, seed_used, *genuine, tolerance, warning)?;
            if let Some(w) = &report.warning {
                let _ = writeln!(stderr, "warning: {w}");
            }
            emit(cli, &to_json(&report), Some(format_sig17(report.ge_normalized)), stdout)?;
            Ok(0)
        }
        Command::Generate { kind, params } => {
            let (state, label) = generate_state(*kind, params, seed)?;
            let file = StateFile::from_state(&state, Some(label));
            emit(cli, &to_json(&file), None, stdout)?;
            Ok(0)
        }
        Command::Verify { suite, trials } => {
            if *trials == 0 {
                return Err(CliError::usage("--trials must be at least 1"));
            }
            let report = run_suite(*suite, *trials, seed, cli.tolerance)?;
            for r in report.results.iter().filter(|r| !r.passed) {
                let _ = writeln!(
                    stderr,
                    "FAIL {suite} trial {} seed {} defect {:e}",
                    r.trial, r.seed, r.defect
                );
            }
            let verdict = format!(
                "{} {suite} trials={} failures={} max_defect={:e}",
                if report.passed { "PASS" } else { "FAIL" },
                report.trials,
                report.failures,
                report.max_defect
            );
            emit(cli, &to_json(&report), Some(verdict), stdout)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Spin1Demo => {
            let report = spin1_demo(seed, cli.tolerance.unwrap_or(AGREEMENT_TOL))?;
            let line = format!(
                "max_basis_deviation={:e} passed={}",
                report.max_basis_deviation, report.passed
            );
            emit(cli, &to_json(&report), Some(line), stdout)?;
            Ok(0)
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    execute(&cli, &mut io::stdout().lock(), &mut io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("gentangle").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(&cli, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn value(json: &str) -> serde_json::Value {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn sig17_formatting() {
        assert_eq!(format_sig17(1.0), "1.0000000000000000");
        assert_eq!(format_sig17(0.875), "0.87500000000000000");
        assert_eq!(format_sig17(8.0 / 9.0), "0.88888888888888884");
        assert_eq!(format_sig17(0.0), "0.0000000000000000");
        assert_eq!(format_sig17(1.5e-17), "1.5000000000000000e-17");
        assert_eq!(format_sig17(f64::NAN), "null");
        for x in [std::f64::consts::PI, -1.0 / 3.0, 1e-300, 6.02e23, 1.0 - f64::EPSILON] {
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn generate_examples() {
        let (code, out, _) = run(&["generate", "bell"]);
        assert_eq!(code, 0);
        let f: StateFile = serde_json::from_str(&out).unwrap();
        assert_eq!(f.dims, vec![2, 2]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.amplitudes, vec![[h, 0.0], [0.0, 0.0], [0.0, 0.0], [h, 0.0]]);

        let (_, out, _) = run(&["generate", "ghz", "--n", "3"]);
        let f: StateFile = serde_json::from_str(&out).unwrap();
        let nz: Vec<usize> = f
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a[0] != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nz, vec![0, 7]);

        let (_, out, _) = run(&["generate", "w", "--n", "3"]);
        let f: StateFile = serde_json::from_str(&out).unwrap();
        let nz: Vec<usize> = f
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a[0] != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nz, vec![1, 2, 4]);
        assert!(nz
            .iter()
            .all(|&i| (f.amplitudes[i][0] - 1.0 / 3f64.sqrt()).abs() < 1e-16));

        let (_, out, _) = run(&["generate", "ghz", "--dims", "3,3,3"]);
        let f: StateFile = serde_json::from_str(&out).unwrap();
        let nz: Vec<usize> = f
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a[0] != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nz, vec![0, 13, 26]);
    }

    #[test]
    fn generate_rejects_bad_params() {
        assert_eq!(run(&["generate", "ghz", "--dims", "2,3"]).0, 2);
        assert_eq!(run(&["generate", "w", "--n", "1"]).0, 2);
        assert_eq!(run(&["generate", "w", "--dims", "2,3"]).0, 2);
        assert_eq!(run(&["generate", "random", "--dims", "2,1"]).0, 2);
        assert_eq!(run(&["generate", "random", "--dims", "4,4,4,4,4,4,4,4,4,4,4,4"]).0, 4);
    }

    #[test]
    fn compute_examples() {
        let (code, out, _) = run(&["compute", "--gen", "bell"]);
        assert_eq!(code, 0);
        assert_eq!(value(&out)["ge_normalized"].as_f64().unwrap(), 1.0);

        let (_, out, _) = run(&["compute", "--gen", "product", "--dims", "2,3,2"]);
        assert!(value(&out)["ge_normalized"].as_f64().unwrap().abs() < 1e-15);

        let (_, out, _) = run(&["compute", "--gen", "w", "--n", "3", "--genuine"]);
        let v = value(&out);
        assert!((v["ge_normalized"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!(v["genuine"].as_f64().unwrap() > 0.0);
        assert_eq!(v["forms_agree"], true);

        let (_, out, _) = run(&["compute", "--gen", "bell", "--quiet"]);
        assert_eq!(out.trim(), "1.0000000000000000");
    }

    #[test]
    fn compute_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, body).unwrap();
            p.to_str().unwrap().to_string()
        };
        let bad_json = write("a.json", "{\"dims\": [2, 2], \"amplitudes\": ");
        assert_eq!(run(&["compute", &bad_json]).0, 2);
        let short = write("b.json", r#"{"dims": [2, 2], "amplitudes": [[1, 0], [0, 0], [0, 0]]}"#);
        let (code, _, err) = run(&["compute", &short]);
        assert_eq!(code, 3);
        assert!(err.contains("amplitudes"));
        let unnorm = write(
            "c.json",
            r#"{"dims": [2, 2], "amplitudes": [[1, 0], [1, 0], [0, 0], [0, 0]]}"#,
        );
        let (code, _, err) = run(&["compute", &unnorm]);
        assert_eq!(code, 3);
        assert!(err.contains("normalization"));
        let single = write("d.json", r#"{"dims": [2], "amplitudes": [[1, 0], [0, 0]]}"#);
        assert_eq!(run(&["compute", &single]).0, 3);
        let huge = write("e.json", r#"{"dims": [2048, 4096], "amplitudes": []}"#);
        assert_eq!(run(&["compute", &huge]).0, 4);
        let missing = dir.path().join("missing.json");
        assert_eq!(run(&["compute", missing.to_str().unwrap()]).0, 2);
    }

    #[test]
    fn ingestion_renormalizes_small_drift() {
        let dir = tempfile::tempdir().unwrap();
        let a = (0.5f64 + 2e-9).sqrt();
        let body =
            format!(r#"{{"label": "drift", "dims": [2, 2], "amplitudes": [[{a}, 0], [0, 0], [0, 0], [{a}, 0]]}}"#);
        let p = dir.path().join("s.json");
        std::fs::write(&p, body).unwrap();
        let (code, out, err) = run(&["compute", p.to_str().unwrap()]);
        assert_eq!(code, 0);
        let v = value(&out);
        assert!(v["warning"].as_str().unwrap().contains("renormalized"));
        assert!(err.contains("warning"));
        assert!((v["ge_normalized"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v["label"], "drift");
    }

    #[test]
    fn verify_runs_and_reports() {
        let (code, out, _) = run(&["verify", "lemma", "--trials", "20", "--seed", "7"]);
        assert_eq!(code, 0);
        let v = value(&out);
        assert_eq!(v["passed"], true);
        assert!(v["max_defect"].as_f64().unwrap() < 1e-9);
        assert_eq!(v["results"].as_array().unwrap().len(), 20);

        let (code, out, err) = run(&["verify", "lemma", "--trials", "3", "--tolerance", "0", "--quiet"]);
        assert_eq!(code, 1);
        assert!(out.starts_with("FAIL"));
        assert!(err.contains("seed"));
        assert_eq!(run(&["verify", "locc", "--trials", "0"]).0, 2);
    }

    #[test]
    fn spin1_demo_passes() {
        let (code, out, _) = run(&["spin1-demo", "--seed", "3"]);
        assert_eq!(code, 0);
        let v = value(&out);
        assert_eq!(v["passed"], true);
        assert!(v["max_basis_deviation"].as_f64().unwrap() < 1e-10);
        assert_eq!(v["basis"].as_array().unwrap().len(), 8);
    }
}
