//! Command-line surface for the block Jacobi spectral pipeline.
//!
//! Exit codes: 0 on success, 1 when the input data fails a validation or a
//! computation rejects it (reports go to stdout), 2 on I/O or schema errors
//! (messages go to stderr).

use clap::{Parser, Subcommand};
use mvjacobi::inverse::{herglotz_decompose, inverse_map};
use mvjacobi::io::{
    gen_operator, load_operator, load_spectral, save_operator, save_spectral, FileError,
};
use mvjacobi::operator::Flavor;
use mvjacobi::spectral::{forward_map, residues};
use mvjacobi::tame::{is_p_tame, polynomial_obstruction, validate_sp, TameSystem};
use mvjacobi::{C64, CMatrix, Tolerances};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mvjacobi",
    version,
    about = "Direct and inverse spectral problems for finite matrix-valued Jacobi operators"
)]
struct Cli {
    /// Acceptance tolerance of the invoked command (round-trip deviation,
    /// residue-sum defect); command-specific default otherwise.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Eigenvalue clustering factor (gap threshold is this times
    /// 1 + spectral radius).
    #[arg(long, global = true)]
    cluster_tol: Option<f64>,

    /// Relative singular-value threshold for rank and kernel decisions.
    #[arg(long, global = true)]
    rank_tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute spectral data of a stored operator.
    Forward {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an operator of the given flavor from spectral data.
    Inverse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_flavor)]
        flavor: Flavor,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full admissibility checks on spectral data.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Test p-tameness of the eigenvalue/projector system.
    Tame {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: usize,
    },
    /// Evaluate the Weyl function of spectral data at a point, or a level of
    /// the Weyl hierarchy of a stored operator.
    Mfun {
        #[arg(long = "in")]
        input: PathBuf,
        /// Evaluation point as `re,im`.
        #[arg(long, value_parser = parse_complex)]
        z: C64,
        /// Hierarchy level n in 1..=p+1 (requires --op).
        #[arg(long)]
        level: Option<usize>,
        /// Operator file for --level evaluation.
        #[arg(long)]
        op: Option<PathBuf>,
    },
    /// Herglotz decomposition of the inverted Weyl function.
    Herglotz {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_flavor)]
        flavor: Flavor,
    },
    /// Forward then inverse map; report the largest blockwise deviation.
    Roundtrip {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Generate a seeded random operator (and optionally its spectral data).
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, value_parser = parse_flavor)]
        flavor: Flavor,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        spectral: Option<PathBuf>,
    },
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse()
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got `{s}`"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?;
    Ok(C64::new(re, im))
}

enum Failure {
    /// Input data rejected by validation or computation; report on stdout.
    Validation(String),
    /// I/O or schema problem; message on stderr.
    File(FileError),
}

impl From<FileError> for Failure {
    fn from(err: FileError) -> Self {
        Failure::File(err)
    }
}

impl From<mvjacobi::Error> for Failure {
    fn from(err: mvjacobi::Error) -> Self {
        Failure::Validation(err.to_string())
    }
}

fn format_complex(z: &C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn print_matrix(label: &str, mat: &CMatrix) {
    println!("{label} =");
    for i in 0..mat.nrows() {
        let row: Vec<String> = (0..mat.ncols()).map(|j| format_complex(&mat[(i, j)])).collect();
        println!("  [ {} ]", row.join(", "));
    }
}

fn tolerances(cli: &Cli) -> Tolerances {
    let mut tols = Tolerances::default();
    if let Some(cluster) = cli.cluster_tol {
        tols.cluster_factor = cluster;
    }
    if let Some(rank) = cli.rank_tol {
        tols.kernel_rank = rank;
    }
    if let Some(tol) = cli.tol {
        tols.residue_sum = tol;
    }
    tols
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let tols = tolerances(cli);
    match &cli.command {
        Command::Forward { input, out } => {
            let op = load_operator(input, &tols)?;
            let data = forward_map(&op, &tols)?;
            save_spectral(out, &data)?;
            println!(
                "forward: m = {}, p = {}, {} eigenvalues, total multiplicity {}",
                data.block_size,
                data.len,
                data.n_points(),
                data.total_multiplicity()
            );
            Ok(())
        }
        Command::Inverse { input, flavor, out } => {
            let data = load_spectral(input, &tols)?;
            let report = validate_sp(&data, &tols);
            if !report.ok {
                return Err(Failure::Validation(format!(
                    "spectral data is not admissible; reconstruction refused\n{report}"
                )));
            }
            let op = inverse_map(&data, *flavor, &tols)?;
            save_operator(out, &op)?;
            println!("inverse: reconstructed {} operator, m = {}, p = {}", flavor, op.block_size(), op.len());
            Ok(())
        }
        Command::Validate { input } => {
            let data = load_spectral(input, &tols)?;
            let report = validate_sp(&data, &tols);
            println!("{report}");
            if report.ok {
                Ok(())
            } else {
                Err(Failure::Validation(String::new()))
            }
        }
        Command::Tame { input, p } => {
            let data = load_spectral(input, &tols)?;
            let sys = TameSystem::from_spectral_data(&data);
            let verdict = is_p_tame(&sys, *p, &tols);
            println!(
                "rank sum {} (expected {}), Hankel min eigenvalue {:.6e}",
                verdict.rank_sum,
                sys.block_size * p,
                verdict.min_eigenvalue
            );
            match polynomial_obstruction(&sys, *p, &tols) {
                None => println!("no polynomial obstruction of degree <= {}", p - 1),
                Some(coeffs) => {
                    println!("polynomial obstruction found; coefficients v_0..v_{}:", p - 1);
                    for (s, c) in coeffs.iter().enumerate() {
                        let entries: Vec<String> = c.iter().map(format_complex).collect();
                        println!("  v_{s} = [ {} ]", entries.join(", "));
                    }
                }
            }
            if verdict.tame {
                println!("system is {p}-tame");
                Ok(())
            } else {
                Err(Failure::Validation(format!("system is not {p}-tame")))
            }
        }
        Command::Mfun { input, z, level, op } => {
            match (level, op) {
                (Some(n), Some(op_path)) => {
                    let operator = load_operator(op_path, &tols)?;
                    let value = operator.m_level(*z, *n, &tols)?;
                    print_matrix(&format!("M_{n}({})", format_complex(z)), &value);
                }
                (Some(_), None) => {
                    return Err(Failure::Validation(
                        "--level requires --op <operator file>".into(),
                    ));
                }
                (None, _) => {
                    let data = load_spectral(input, &tols)?;
                    let prf = residues(&data, &tols)?;
                    let value = prf.eval(*z, &tols)?;
                    print_matrix(&format!("M({})", format_complex(z)), &value);
                }
            }
            Ok(())
        }
        Command::Herglotz { input, flavor } => {
            let data = load_spectral(input, &tols)?;
            let dec = herglotz_decompose(&data, *flavor, &tols)?;
            let m = data.block_size;
            print_matrix(
                "C",
                dec.function.const_coeff().unwrap_or(&CMatrix::zeros(m, m)),
            );
            for ((mu, residue), rank) in dec.function.poles().iter().zip(&dec.pole_ranks) {
                println!("pole mu = {mu} (rank {rank})");
                print_matrix("  D", residue);
            }
            println!(
                "rank count: {} (generic value m*(p-1) = {})",
                dec.rank_sum(),
                m * (data.len - 1)
            );
            if dec.coincidence {
                println!("note: a pole coincides with an eigenvalue; the generic rank count does not apply");
            }
            Ok(())
        }
        Command::Roundtrip { input } => {
            let op = load_operator(input, &tols)?;
            if op.flavor() == Flavor::General {
                return Err(Failure::Validation(
                    "roundtrip requires a splus or lplus operator; general-flavor \
                     coefficients are not determined by their spectral data"
                        .into(),
                ));
            }
            let tol = cli.tol.unwrap_or(1e-8);
            let data = forward_map(&op, &tols)?;
            let rebuilt = inverse_map(&data, op.flavor(), &tols)?;
            let mut worst = 0.0_f64;
            for n in 0..op.len() {
                let scale = op.diag_block(n).norm().max(1.0);
                worst = worst.max((rebuilt.diag_block(n) - op.diag_block(n)).norm() / scale);
            }
            for n in 0..op.len().saturating_sub(1) {
                let scale = op.offdiag_block(n).norm().max(1.0);
                worst = worst.max((rebuilt.offdiag_block(n) - op.offdiag_block(n)).norm() / scale);
            }
            println!("max blockwise deviation = {worst:.6e} (tolerance {tol:.1e})");
            if worst <= tol {
                Ok(())
            } else {
                Err(Failure::Validation(format!(
                    "round trip deviation {worst:.6e} exceeds tolerance {tol:.1e}"
                )))
            }
        }
        Command::Gen {
            m,
            p,
            flavor,
            seed,
            out,
            spectral,
        } => {
            let op = gen_operator(*m, *p, *flavor, *seed, &tols);
            save_operator(out, &op)?;
            println!("generated {} operator, m = {m}, p = {p}, seed = {seed}", flavor);
            if let Some(spec_path) = spectral {
                let data = forward_map(&op, &tols)?;
                save_spectral(spec_path, &data)?;
                println!(
                    "spectral data: {} eigenvalues, total multiplicity {}",
                    data.n_points(),
                    data.total_multiplicity()
                );
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(Failure::Validation(msg)) => {
            if !msg.is_empty() {
                println!("{msg}");
            }
            std::process::exit(1);
        }
        Err(Failure::File(err)) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}
