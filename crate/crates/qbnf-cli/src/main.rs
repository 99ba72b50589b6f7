//! `qbnf` — forward/inverse quantum Birkhoff normal forms with JSON I/O.
//!
//! Exit codes: 0 success, 2 parse or configuration error, 3 degenerate
//! mathematical input, 4 verification failure, 5 internal inconsistency.

mod selftest;

use clap::{Args, Parser, Subcommand};
use qbnf_core::dos::{
    heaviside_jump_fit, log_singularity_fit, DosError, HeavisideJumpFit, LogSingularityFit,
};
use qbnf_core::inversion::{invert_qbnf, InversionError, InversionReport};
use qbnf_core::normal_form::{
    birkhoff_forward, jet_normal_form, weyl_to_functional, JetDto, NormalFormDto, NormalFormError,
    NormalFormSeries, PotentialJet,
};
use qbnf_core::spectra::{convergence_study, predict_eigenvalues, EigensolverConfig, SpectraError};
use qbnf_core::weyl::{Sign, TermRecord, WeylPoly};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qbnf",
    version,
    about = "Quantum Birkhoff normal forms for 1D Schrödinger operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Input file, or '-' for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the normal form of a potential jet (or raw symbol).
    Forward {
        #[command(flatten)]
        io: IoArgs,
        /// Truncation degree (even, 4..=16); defaults to QBNF_MAX_DEGREE or 10.
        #[arg(long)]
        max_degree: Option<u32>,
        /// Include the conjugation generator in the output.
        #[arg(long)]
        emit_generator: bool,
        /// Treat the input as a raw Weyl symbol {"sign", "terms": [...]}.
        #[arg(long)]
        hamiltonian: bool,
    },
    /// Recover the potential jet from a normal form.
    Invert {
        #[command(flatten)]
        io: IoArgs,
        /// Sign choice for a3: "+" or "-".
        #[arg(long, default_value = "+")]
        sign: String,
    },
    /// Predict eigenvalues from the jet's functional normal form.
    Predict {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_delimiter = ',')]
        hbar_list: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Convergence study: numeric eigenvalues vs normal-form predictions.
    Verify {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_delimiter = ',')]
        hbar_list: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Density-of-states log-singularity probe near a local maximum.
    DosMax {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.005")]
        hbar_list: Vec<f64>,
        /// Fit window (offsets above the critical value): "lo,hi".
        #[arg(long, default_value = "0.03,0.25")]
        window: String,
        /// Directory for gnuplot-compatible (E, density) data files.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Density-of-states Heaviside-jump probe near a local minimum.
    DosMin {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.005")]
        hbar_list: Vec<f64>,
        /// Absolute energy window: "lo,hi".
        #[arg(long, default_value = "-0.15,0.3")]
        window: String,
    },
    /// Forward, then invert, and compare exactly.
    Roundtrip {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Deterministic randomized self-checks of the engine.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Checks per randomized family.
        #[arg(long, default_value_t = 6)]
        cases: u64,
    },
}

enum CliError {
    Parse(String),
    Degenerate(String),
    Verification(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Degenerate(m)
            | CliError::Verification(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl From<NormalFormError> for CliError {
    fn from(e: NormalFormError) -> Self {
        match e {
            NormalFormError::Inconsistency(_) => CliError::Internal(e.to_string()),
            _ => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<InversionError> for CliError {
    fn from(e: InversionError) -> Self {
        match e {
            InversionError::DegenerateA3 | InversionError::NegativeDiscriminant => {
                CliError::Degenerate(e.to_string())
            }
            InversionError::SingularStage(_) | InversionError::EngineInconsistency(_) => {
                CliError::Internal(e.to_string())
            }
            InversionError::ZeroScale => CliError::Degenerate(e.to_string()),
            InversionError::NormalForm(inner) => inner.into(),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::WrongSign => CliError::Degenerate(e.to_string()),
            SpectraError::ConfigError(_) => CliError::Parse(e.to_string()),
            SpectraError::NormalForm(inner) => inner.into(),
        }
    }
}

impl From<DosError> for CliError {
    fn from(e: DosError) -> Self {
        CliError::Verification(e.to_string())
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Parse(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))
    }
}

fn write_output(io: &IoArgs, text: &str) -> Result<(), CliError> {
    match &io.output {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_json<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T, CliError> {
    serde_json::from_str(s).map_err(|e| {
        CliError::Parse(format!(
            "json parse error at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn parse_jet(s: &str) -> Result<PotentialJet, CliError> {
    let dto: JetDto = parse_json(s)?;
    PotentialJet::from_dto(&dto).map_err(|e| CliError::Parse(e.to_string()))
}

fn default_degree(explicit: Option<u32>) -> Result<u32, CliError> {
    let d = match explicit {
        Some(d) => d,
        None => match std::env::var("QBNF_MAX_DEGREE") {
            Ok(s) => s
                .parse::<u32>()
                .map_err(|_| CliError::Parse(format!("QBNF_MAX_DEGREE={s:?} is not an integer")))?,
            Err(_) => 10,
        },
    };
    if d % 2 != 0 || !(4..=16).contains(&d) {
        return Err(CliError::Parse(format!(
            "max degree must be even and within 4..=16, got {d}"
        )));
    }
    Ok(d)
}

fn check_hbar_list(hbars: &[f64]) -> Result<(), CliError> {
    if hbars.is_empty() || hbars.iter().any(|&h| h <= 0.0) {
        return Err(CliError::Parse(
            "hbar list must be nonempty and positive".into(),
        ));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Parse(
            "hbar list must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Parse(format!("window {s:?}: expected \"lo,hi\"")));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("window low bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("window high bound {:?}", parts[1])))?;
    if hi <= lo {
        return Err(CliError::Parse("window must have lo < hi".into()));
    }
    Ok((lo, hi))
}

fn to_pretty(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serialization")
}

#[derive(Deserialize)]
struct HamiltonianDto {
    sign: String,
    terms: Vec<TermRecord>,
}

#[derive(Serialize)]
struct ForwardOut {
    #[serde(flatten)]
    normal_form: NormalFormDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<Vec<TermRecord>>,
}

fn cmd_forward(
    io: &IoArgs,
    max_degree: Option<u32>,
    emit_generator: bool,
    hamiltonian: bool,
) -> Result<(), CliError> {
    let degree = default_degree(max_degree)?;
    let text = read_input(&io.input)?;
    let (nf, gen) = if hamiltonian {
        let dto: HamiltonianDto = parse_json(&text)?;
        let sign = Sign::parse(&dto.sign)
            .ok_or_else(|| CliError::Parse(format!("unrecognized sign {:?}", dto.sign)))?;
        let h = WeylPoly::from_records(&dto.terms).map_err(|e| CliError::Parse(e.to_string()))?;
        birkhoff_forward(&h, sign, degree)?
    } else {
        let jet = parse_jet(&text)?;
        jet_normal_form(&jet, degree)?
    };
    let out = ForwardOut {
        normal_form: nf.to_dto(),
        generator: emit_generator.then(|| gen.s.to_records()),
    };
    write_output(io, &to_pretty(&out))
}

#[derive(Serialize)]
struct InvertOut {
    jet: JetDto,
    provenance: InversionReport,
}

fn cmd_invert(io: &IoArgs, sign: &str) -> Result<(), CliError> {
    let sign_choice =
        Sign::parse(sign).ok_or_else(|| CliError::Parse(format!("unrecognized sign {sign:?}")))?;
    let text = read_input(&io.input)?;
    let dto: NormalFormDto = parse_json(&text)?;
    let nf = NormalFormSeries::from_dto(&dto).map_err(|e| CliError::Parse(e.to_string()))?;
    let (jet, report) = invert_qbnf(&nf, sign_choice)?;
    let out = InvertOut {
        jet: jet.trimmed().to_dto(),
        provenance: report,
    };
    write_output(io, &to_pretty(&out))
}

#[derive(Serialize)]
struct PredictionRow {
    hbar: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct PredictOut {
    degree: u32,
    levels: usize,
    predictions: Vec<PredictionRow>,
}

fn cmd_predict(
    io: &IoArgs,
    hbars: &[f64],
    levels: usize,
    degree: Option<u32>,
) -> Result<(), CliError> {
    check_hbar_list(hbars)?;
    let degree = default_degree(degree)?;
    let jet = parse_jet(&read_input(&io.input)?)?;
    let (nf, _) = jet_normal_form(&jet, degree)?;
    let fnf = weyl_to_functional(&nf);
    let mut predictions = Vec::new();
    for &hbar in hbars {
        let values = predict_eigenvalues(&fnf, hbar, levels)?;
        predictions.push(PredictionRow { hbar, values });
    }
    let out = PredictOut {
        degree,
        levels,
        predictions,
    };
    write_output(io, &to_pretty(&out))
}

fn cmd_verify(
    io: &IoArgs,
    hbars: &[f64],
    levels: usize,
    degree: Option<u32>,
) -> Result<(), CliError> {
    check_hbar_list(hbars)?;
    let degree = default_degree(degree)?;
    let jet = parse_jet(&read_input(&io.input)?)?;
    let report = convergence_study(&jet, hbars, degree, levels)?;
    eprint!("{}", report.to_table());
    write_output(io, &to_pretty(&report))?;
    if !report.passed {
        return Err(CliError::Verification(
            "a fitted convergence slope missed its bound".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct DosMaxOut {
    e0: f64,
    fits: Vec<LogSingularityFit>,
}

/// Stretched-coordinate solver box wide enough for the requested window.
fn dos_config(jet: &PotentialJet, hbar: f64, e_max: f64) -> EigensolverConfig {
    let np = jet.numeric();
    qbnf_core::dos::auto_config(&|x| np.eval(x), hbar, e_max)
}

fn cmd_dos_max(
    io: &IoArgs,
    hbars: &[f64],
    window: &str,
    data_dir: &Option<PathBuf>,
) -> Result<(), CliError> {
    check_hbar_list(hbars)?;
    let (w_lo, w_hi) = parse_window(window)?;
    let jet = parse_jet(&read_input(&io.input)?)?;
    if jet.sign != Sign::Minus {
        return Err(CliError::Degenerate(
            "dos-max expects a potential with a local maximum (sign \"-\")".into(),
        ));
    }
    let e0 = qbnf_core::rational::rat_to_f64(&jet.e0);
    let np = jet.numeric();
    let v = |x: f64| np.eval(x);
    // one independent solve-and-fit per hbar
    let results: Vec<Result<LogSingularityFit, DosError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = hbars
            .iter()
            .map(|&hbar| {
                let v = &v;
                let jet = &jet;
                scope.spawn(move || {
                    let cfg = dos_config(jet, hbar, e0 + w_hi);
                    log_singularity_fit(v, e0, hbar, (w_lo, w_hi), &cfg)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("dos worker panicked"))
            .collect()
    });
    let mut fits = Vec::new();
    for fit in results {
        let fit = fit?;
        if let Some(dir) = data_dir {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
            let mut data = String::from("# E density\n");
            for (e, d) in &fit.samples {
                data.push_str(&format!("{e:.16e} {d:.16e}\n"));
            }
            let path = dir.join(format!("dos_max_hbar_{}.dat", fit.hbar));
            std::fs::write(&path, data)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        }
        fits.push(fit);
    }
    write_output(io, &to_pretty(&DosMaxOut { e0, fits }))
}

#[derive(Serialize)]
struct DosMinOut {
    e0: f64,
    fits: Vec<HeavisideJumpFit>,
}

fn cmd_dos_min(io: &IoArgs, hbars: &[f64], window: &str) -> Result<(), CliError> {
    check_hbar_list(hbars)?;
    let (e_lo, e_hi) = parse_window(window)?;
    let jet = parse_jet(&read_input(&io.input)?)?;
    if jet.sign != Sign::Plus {
        return Err(CliError::Degenerate(
            "dos-min expects a potential with a local minimum (sign \"+\")".into(),
        ));
    }
    let e0 = qbnf_core::rational::rat_to_f64(&jet.e0);
    let np = jet.numeric();
    let v = |x: f64| np.eval(x);
    let results: Vec<Result<HeavisideJumpFit, DosError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = hbars
            .iter()
            .map(|&hbar| {
                let v = &v;
                let jet = &jet;
                scope.spawn(move || {
                    let cfg = dos_config(jet, hbar, e_hi.max(e0 + 0.1));
                    heaviside_jump_fit(v, e0, hbar, (e_lo, e_hi), &cfg)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("dos worker panicked"))
            .collect()
    });
    let fits = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_output(io, &to_pretty(&DosMinOut { e0, fits }))
}

#[derive(Serialize)]
struct RoundtripOut {
    matched: bool,
    jet: JetDto,
    recovered: JetDto,
}

fn cmd_roundtrip(io: &IoArgs, degree: Option<u32>) -> Result<(), CliError> {
    let degree = default_degree(degree)?;
    let jet = parse_jet(&read_input(&io.input)?)?;
    let (nf, _) = jet_normal_form(&jet, degree)?;
    let sign_choice = if num_traits::Signed::is_negative(&jet.a(3)) {
        Sign::Minus
    } else {
        Sign::Plus
    };
    let (recovered, _) = invert_qbnf(&nf, sign_choice)?;
    let want = jet.resized(2 * (degree / 2)).trimmed();
    let got = recovered.trimmed();
    let matched = want == got;
    let out = RoundtripOut {
        matched,
        jet: want.to_dto(),
        recovered: got.to_dto(),
    };
    write_output(io, &to_pretty(&out))?;
    if !matched {
        return Err(CliError::Internal(
            "inverse did not reproduce the jet".into(),
        ));
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Forward {
            io,
            max_degree,
            emit_generator,
            hamiltonian,
        } => cmd_forward(io, *max_degree, *emit_generator, *hamiltonian),
        Command::Invert { io, sign } => cmd_invert(io, sign),
        Command::Predict {
            io,
            hbar_list,
            levels,
            degree,
        } => cmd_predict(io, hbar_list, *levels, *degree),
        Command::Verify {
            io,
            hbar_list,
            levels,
            degree,
        } => cmd_verify(io, hbar_list, *levels, *degree),
        Command::DosMax {
            io,
            hbar_list,
            window,
            data_dir,
        } => cmd_dos_max(io, hbar_list, window, data_dir),
        Command::DosMin {
            io,
            hbar_list,
            window,
        } => cmd_dos_min(io, hbar_list, window),
        Command::Roundtrip { io, degree } => cmd_roundtrip(io, *degree),
        Command::Selftest { seed, cases } => selftest::run(*seed, *cases),
    }
}

fn main() -> ExitCode {
    match std::panic::catch_unwind(run) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            eprintln!("internal error: {msg}");
            ExitCode::from(5)
        }
    }
}
