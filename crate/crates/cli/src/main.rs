use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use catlocc::catstates::{classification_table, parse_angle};
use catlocc::locc::clone_member;
use catlocc::qstate::entanglement_entropy;
use catlocc::witness::{self, Verdict};
use catlocc::{
    cat_state, classify_pair, ghz_state, negativity, theorem4_protocol, theorem5_protocol, validate_set, Bipartition,
    CatLabel, PairKind, PureState, StateDocument,
};

mod error;

use error::CliError;

const OUT_DIR_ENV: &str = "CATLOCC_OUT_DIR";

#[derive(Parser)]
#[command(name = "catlocc", version, about = "LOCC cloning of CAT and GHZ states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negativity of the mixed input and output states over a grid of angles, as CSV.
    Sweep {
        #[arg(long, default_value = "0.01")]
        alpha_min: String,
        #[arg(long, default_value = "pi/4")]
        alpha_max: String,
        #[arg(long, default_value_t = witness::DEFAULT_SWEEP_STEPS)]
        steps: usize,
        /// Output file, or `-` for stdout. Defaults to `$CATLOCC_OUT_DIR/negativity_sweep.csv`
        /// when the variable is set, stdout otherwise.
        #[arg(long)]
        out: Option<String>,
    },
    /// Negativity witness against cloning a set of labels.
    Witness {
        /// Labels `p,tail[@alpha]`.
        #[arg(long, num_args = 1.., required = true)]
        set: Vec<String>,
        /// `ghz` or a label.
        #[arg(long, default_value = "ghz")]
        blank: String,
        /// Angle for labels written without `@alpha`.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Classify a pair of labels, or print the table of all pairs.
    Classify {
        #[arg(long, num_args = 2, value_names = ["A", "B"], required_unless_present = "table")]
        pair: Vec<String>,
        #[arg(long, conflicts_with = "pair")]
        table: bool,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Orthogonality, equal entanglement and type-I membership of a set.
    ValidateSet {
        #[arg(long, num_args = 1.., required = true)]
        set: Vec<String>,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Run a cloning protocol on one state with a GHZ blank.
    Clone {
        #[arg(long, value_enum)]
        protocol: ProtocolChoice,
        #[arg(long)]
        n: Option<usize>,
        /// Protocol angle; also used for a state label written without `@alpha`.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        state: String,
        /// Write the step-by-step protocol trace to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Local unitary between `cos|00> + sin|11>` and `sin|00> - cos|11>`, if any.
    Convertibility {
        #[arg(long)]
        alpha: String,
    },
    /// Emit a state document for a label or a GHZ state.
    State {
        #[arg(long, conflicts_with = "ghz", required_unless_present = "ghz")]
        label: Option<String>,
        #[arg(long)]
        ghz: Option<usize>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Negativity of a pure state document across a cut.
    Negativity {
        /// State document path, or `-` for stdin.
        #[arg(long)]
        state: String,
        /// Comma-separated qubits on side A.
        #[arg(long)]
        cut: String,
    },
    /// Largest single-qubit entanglement entropy over seeded random pure states.
    EntropyCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolChoice {
    Theorem4,
    #[value(name = "theorem5-i")]
    Theorem5I,
    #[value(name = "theorem5-ii")]
    Theorem5Ii,
}

fn angle(s: &str) -> Result<f64, CliError> {
    parse_angle(s).map_err(|e| CliError::Validation(format!("bad angle: {e}")))
}

/// Parses `p,tail@alpha`, filling in `default_alpha` when `@alpha` is absent.
fn label(s: &str, default_alpha: Option<f64>) -> Result<CatLabel, CliError> {
    if s.contains('@') {
        return Ok(s.parse()?);
    }
    match default_alpha {
        Some(a) => Ok(format!("{s}@{a:?}").parse()?),
        None => Err(CliError::Validation(format!("label {s:?} needs '@alpha' or --alpha"))),
    }
}

fn labels(items: &[String], alpha: Option<&str>) -> Result<Vec<CatLabel>, CliError> {
    let alpha = alpha.map(angle).transpose()?;
    items.iter().map(|s| label(s, alpha)).collect()
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        // a closed pipe (`| head`) is not an error
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Internal(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    write_stdout(&format!("{text}\n"))
}

fn write_output(out: Option<&str>, default_name: &str, text: &str) -> Result<(), CliError> {
    let path = match out {
        Some("-") | Some("stdout") => None,
        Some(p) => Some(PathBuf::from(p)),
        None => std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(default_name)),
    };
    match path {
        None => write_stdout(text),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
            }
            fs::write(&p, text).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PairReport {
    a: String,
    b: String,
    #[serde(flatten)]
    class: catlocc::PairClass,
}

#[derive(Serialize)]
struct CloneOutput {
    protocol: String,
    state: String,
    blank: String,
    branches: Vec<catlocc::locc::BranchFidelity>,
    min_fidelity: f64,
    total_probability: f64,
    cloned: bool,
}

#[derive(Serialize)]
struct ConvertibilityOutput {
    alpha: f64,
    convertible: bool,
    /// Row-major `[re, im]` entries of `U` when it exists.
    unitary: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize)]
struct NegativityOutput {
    n: usize,
    cut: String,
    negativity: f64,
}

#[derive(Serialize)]
struct EntropyOutput {
    seed: u64,
    samples: usize,
    n: usize,
    max_entropy: f64,
    bound_holds: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            alpha_min,
            alpha_max,
            steps,
            out,
        } => {
            let (lo, hi) = (angle(&alpha_min)?, angle(&alpha_max)?);
            let rows = witness::sweep(lo, hi, steps)?;
            write_output(out.as_deref(), "negativity_sweep.csv", &witness::sweep_csv(&rows))
        }
        Command::Witness {
            set,
            blank,
            alpha,
            json,
        } => {
            let set = labels(&set, alpha.as_deref())?;
            let n = set[0].n();
            let blank_state = if blank == "ghz" {
                ghz_state(n)?
            } else {
                let default = alpha.as_deref().map(angle).transpose()?.or(Some(set[0].alpha()));
                cat_state(&label(&blank, default)?)?
            };
            let report = witness::witness_labels(&set, &blank_state)?;
            if json {
                return print_json(&report);
            }
            let mut text = String::new();
            for c in &report.cuts {
                text += &format!("party {:?}: n_in = {:.12} n_out = {:.12}\n", c.cut, c.n_in, c.n_out);
            }
            text += match report.verdict {
                Verdict::Impossible => "verdict: Impossible (negativity would increase)\n",
                Verdict::Inconclusive => "verdict: Inconclusive (no cut shows an increase)\n",
            };
            write_stdout(&text)
        }
        Command::Classify { pair, table, n, alpha } => {
            if table {
                let alpha = alpha.as_deref().map(angle).transpose()?.unwrap_or(0.3);
                return print_json(&classification_table(n, alpha)?);
            }
            let ls = labels(&pair, alpha.as_deref())?;
            let class = classify_pair(&ls[0], &ls[1])?;
            print_json(&PairReport {
                a: ls[0].to_string(),
                b: ls[1].to_string(),
                class,
            })
        }
        Command::ValidateSet { set, alpha } => print_json(&validate_set(&labels(&set, alpha.as_deref())?)?),
        Command::Clone {
            protocol,
            n,
            alpha,
            state,
            trace,
        } => {
            let alpha = alpha.as_deref().map(angle).transpose()?;
            let default_alpha = match protocol {
                ProtocolChoice::Theorem4 => alpha,
                _ => alpha.or(Some(std::f64::consts::FRAC_PI_4)),
            };
            let target = label(&state, default_alpha)?;
            if let Some(n) = n.filter(|&n| n != target.n()) {
                return Err(CliError::Validation(format!("--n {n} does not match label {target}")));
            }
            let n = target.n();
            let proto = match protocol {
                ProtocolChoice::Theorem4 => theorem4_protocol(n, alpha.unwrap_or(target.alpha()))?,
                ProtocolChoice::Theorem5I => theorem5_protocol(n, PairKind::I)?,
                ProtocolChoice::Theorem5Ii => theorem5_protocol(n, PairKind::II)?,
            };
            let blank = ghz_state(n)?;
            let (report, outcomes) = clone_member(&proto, &cat_state(&target)?, &blank)?;
            if trace {
                let mut err = io::stderr().lock();
                for b in &outcomes {
                    writeln!(err, "# branch transcript={:?} p={:.12}", b.transcript, b.probability).ok();
                    for entry in &b.trace {
                        writeln!(err, "{entry}").ok();
                    }
                }
            }
            print_json(&CloneOutput {
                protocol: proto.name,
                state: target.to_string(),
                blank: format!("ghz{n}"),
                cloned: report.min_fidelity >= 1.0 - catlocc::locc::CLONE_TOL,
                branches: report.branches,
                min_fidelity: report.min_fidelity,
                total_probability: report.total_probability,
            })
        }
        Command::Convertibility { alpha } => {
            let alpha = angle(&alpha)?;
            if !(alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_4 + 1e-12) {
                return Err(CliError::Validation(format!("alpha = {alpha} outside (0, pi/4]")));
            }
            let (psi, phi) = witness::nonmaximal_pair(alpha)?;
            let u = witness::convertibility(&psi, &phi)?;
            let unitary = u.map(|m| {
                (0..m.rows())
                    .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            });
            print_json(&ConvertibilityOutput {
                alpha,
                convertible: unitary.is_some(),
                unitary,
            })
        }
        Command::State {
            label: l,
            ghz,
            alpha,
            out,
        } => {
            let psi = match (l, ghz) {
                (Some(l), _) => cat_state(&label(&l, alpha.as_deref().map(angle).transpose()?)?)?,
                (None, Some(n)) => ghz_state(n)?,
                (None, None) => unreachable!("clap requires --label or --ghz"),
            };
            let text =
                serde_json::to_string_pretty(&psi.to_document()).map_err(|e| CliError::Internal(e.to_string()))?;
            write_output(
                Some(out.as_deref().and_then(|p| p.to_str()).unwrap_or("-")),
                "",
                &format!("{text}\n"),
            )
        }
        Command::Negativity { state, cut } => {
            let text = if state == "-" {
                let mut s = String::new();
                io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| CliError::Validation(format!("stdin: {e}")))?;
                s
            } else {
                fs::read_to_string(&state).map_err(|e| CliError::Validation(format!("{state}: {e}")))?
            };
            let doc: StateDocument =
                serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{state}: {e}")))?;
            let psi = PureState::from_document(&doc)?;
            let side_a = cut
                .split(',')
                .map(|q| q.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Validation(format!("bad --cut {cut:?}: {e}")))?;
            let cut = Bipartition::new(psi.n_qubits(), side_a)?;
            let rho = catlocc::qstate::projector(&psi)?;
            print_json(&NegativityOutput {
                n: psi.n_qubits(),
                cut: cut.to_string(),
                negativity: negativity(&rho, &cut)?,
            })
        }
        Command::EntropyCheck { seed, samples, n } => {
            if n < 2 {
                return Err(CliError::Validation("--n must be at least 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max_entropy: f64 = 0.0;
            for _ in 0..samples {
                let psi = PureState::random(n, &mut rng);
                for q in 1..=n {
                    max_entropy = max_entropy.max(entanglement_entropy(&psi, &Bipartition::new(n, [q])?)?);
                }
            }
            print_json(&EntropyOutput {
                seed,
                samples,
                n,
                max_entropy,
                bound_holds: max_entropy <= 1.0 + 1e-9,
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
