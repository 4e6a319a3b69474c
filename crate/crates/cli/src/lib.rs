//! Command-line front end for the `foip` library.
//!
//! Exit codes: `0` success (true/accept/reproduced/PASS), `1` a negative
//! outcome (reject, not reproduced, FAIL), `2` usage, parse or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use foip::fo::{parse_instance, Instance};
use foip::oracle::model_check;
use foip::protocol::{
    run_protocol_with, soundness_experiment, verify_transcript, ProverStrategy, RunOptions, Transcript, Verdict,
};

#[derive(Debug, Parser)]
#[command(name = "foip", version, about = "Interactive proofs for first-order model checking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide an instance by brute force and print `true` or `false`.
    Check { instance: PathBuf },
    /// Run the protocol and emit the transcript.
    Run {
        instance: PathBuf,
        #[arg(long, default_value = "honest")]
        prover: ProverStrategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the transcript here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use at least this modulus.
        #[arg(long, default_value_t = 0)]
        q_min: u64,
    },
    /// Replay a transcript against its instance.
    Verify { instance: PathBuf, transcript: PathBuf },
    /// Estimate a prover's acceptance rate on a false instance.
    Experiment {
        instance: PathBuf,
        #[arg(long, default_value = "round-fixing")]
        prover: ProverStrategy,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        q_min: u64,
    },
}

/// Failure that maps to exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Fatal> {
    parse_instance(&read(path)?).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fatal> {
    match cmd {
        Command::Check { instance } => {
            let inst = load_instance(&instance)?;
            writeln!(out, "{}", model_check(&inst))?;
            Ok(0)
        }
        Command::Run { instance, prover, seed, out: path, q_min } => {
            let inst = load_instance(&instance)?;
            let (tr, _) = run_protocol_with(&inst, prover, seed, RunOptions { q_min })?;
            match path {
                Some(p) => fs::write(&p, tr.to_string()).map_err(|e| Fatal(format!("{}: {e}", p.display())))?,
                None => write!(out, "{tr}")?,
            }
            writeln!(err, "verdict {}", tr.verdict())?;
            Ok(if tr.verdict() == Verdict::Accept { 0 } else { 1 })
        }
        Command::Verify { instance, transcript } => {
            let inst = load_instance(&instance)?;
            let tr: Transcript = read(&transcript)?
                .parse()
                .map_err(|e| Fatal(format!("{}: {e}", transcript.display())))?;
            let v = verify_transcript(&inst, &tr)?;
            for d in &v.diagnostics {
                writeln!(err, "diagnostic: {d:?}")?;
            }
            let status = if v.reproduced() { "reproduced" } else { "not-reproduced" };
            writeln!(out, "verdict {} recorded {} {status}", v.verdict, v.recorded)?;
            Ok(if v.reproduced() { 0 } else { 1 })
        }
        Command::Experiment { instance, prover, trials, seed, q_min } => {
            let inst = load_instance(&instance)?;
            let r = soundness_experiment(&inst, prover, trials, seed, q_min)?;
            writeln!(out, "trials {}", r.trials)?;
            writeln!(out, "accepts {}", r.accepts)?;
            writeln!(out, "rate {:.6}", r.rate)?;
            writeln!(out, "bound {:.6}", r.bound)?;
            writeln!(out, "margin {:.6}", r.margin)?;
            writeln!(out, "result {}", if r.passed() { "PASS" } else { "FAIL" })?;
            Ok(if r.passed() { 0 } else { 1 })
        }
    }
}
