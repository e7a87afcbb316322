//! `cam`: construct the word family and the Z^d patterns, run the
//! verification suites and print their reports as JSON lines.

mod group;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use cam_core::decomposition::{
    decompose_tokens, token_count, verify_decomposition_claims_capped, write_tokens_csv,
    TokenStream, DEFAULT_TOKEN_CAP,
};
use cam_core::language::{find_nonpower_witness, verify_coverage_lemma};
use cam_core::quotient::{
    build_limit_pair, cantor_distance, certificate_relation, least_period_certificate,
    nonexpansivity_certificate, quotient_distance, Window, DEFAULT_RADIUS,
};
use cam_core::words::DEFAULT_MATERIALIZE_CAP;
use cam_core::{Error, WordFamily};

/// Levels available to commands that only read words lazily.
const LAZY_LEVELS: usize = 40;
/// Decompositions longer than this are summarized instead of listed.
const TOKEN_LIST_LIMIT: u64 = 10_000;

#[derive(Parser)]
#[command(name = "cam", version, about = "Chaotic almost minimal subshift verifier")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Largest word, in letters, that may be expanded in memory.
    #[arg(long, global = true, default_value_t = DEFAULT_MATERIALIZE_CAP,
          value_parser = clap::value_parser!(u64).range(1..))]
    materialize_cap: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect words of the family.
    Words {
        #[command(subcommand)]
        action: WordsCmd,
    },
    /// Positions where w_{2n} and w_{2n+1} differ.
    Diff {
        #[arg(long)]
        n: usize,
    },
    /// Decompose w_{2n} into tokens w_0, ..., w_{2k}.
    Decomp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Check the boundary and gap claims.
        #[arg(long)]
        verify: bool,
        /// Write the tokens as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOKEN_CAP,
              value_parser = clap::value_parser!(u64).range(1..))]
        token_cap: u64,
    },
    /// Coverage lemma over all windows of w_{2·host}.
    Lemma {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        host: usize,
    },
    /// A subword of w_{2n} of length 2|w_{2k}| that is not a short-period power.
    Witness {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Windows of the limit pair (x, y).
    Pair {
        #[arg(long)]
        radius: usize,
    },
    /// Quotient distances and certificates.
    Quotient {
        #[command(subcommand)]
        action: QuotientCmd,
    },
    /// The construction on Z^d.
    Group {
        #[command(subcommand)]
        action: group::GroupCmd,
    },
}

#[derive(Subcommand)]
enum WordsCmd {
    /// Print w_n.
    Show {
        #[arg(long)]
        n: usize,
    },
    /// Print |w_n|.
    Len {
        #[arg(long)]
        n: usize,
    },
    /// Print letter i of w_n.
    At {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        i: BigUint,
    },
}

#[derive(Subcommand)]
enum QuotientCmd {
    /// Bound the quotient distance between shifted periodic points.
    Dist {
        /// Word index of the left point w_left^Z.
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
        /// Both points are shifted left by this amount.
        #[arg(long, default_value_t = 0)]
        shift: u64,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
        #[arg(long, default_value_t = 2)]
        hops: usize,
    },
    /// Nonexpansivity certificate at resolution 2^-r.
    Cert {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: usize,
        #[arg(long, default_value_t = 2)]
        hops: usize,
    },
    /// Least periods of w_{2n}^Z and faithfulness witnesses.
    Period {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Print every faithfulness witness.
        #[arg(long)]
        witnesses: bool,
    },
}

/// A non-zero exit: 1 for a failed verification, 2 for bad input or caps.
pub struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotFound(_) | Error::PostCondition(_) | Error::EmptyWord => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

/// The report stream: one JSON object per line, `kind` first.
pub struct Out<W: Write> {
    sink: W,
    failed: bool,
}

impl<W: Write> Out<W> {
    pub fn emit<T: Serialize>(&mut self, kind: &str, body: &T) -> Result<(), Failure> {
        let mut line = serde_json::Map::new();
        line.insert("kind".into(), Value::from(kind));
        match serde_json::to_value(body).map_err(|e| Failure::config(e.to_string()))? {
            Value::Object(fields) => line.extend(fields),
            other => {
                line.insert("value".into(), other);
            }
        }
        serde_json::to_writer(&mut self.sink, &line).map_err(|e| Failure::config(e.to_string()))?;
        writeln!(self.sink).map_err(|e| Failure::config(e.to_string()))
    }

    /// Emits a report and records whether its claim held.
    pub fn check<T: Serialize>(&mut self, kind: &str, body: &T, ok: bool) -> Result<(), Failure> {
        self.failed |= !ok;
        self.emit(kind, body)
    }
}

fn family_for(index: usize, cap: u64) -> WordFamily {
    WordFamily::new((index / 2).max(1)).with_materialize_cap(cap)
}

fn run<W: Write>(cli: Cli, out: &mut Out<W>) -> Result<(), Failure> {
    let cap = cli.materialize_cap;
    match cli.command {
        Command::Words { action } => match action {
            WordsCmd::Show { n } => {
                let word = family_for(n, cap).materialize(n)?;
                out.emit("words.show", &json!({ "n": n, "word": word.to_string() }))?;
            }
            WordsCmd::Len { n } => {
                let family = family_for(n, cap);
                let length = family.length(n)?.to_string();
                out.emit("words.len", &json!({ "n": n, "length": length }))?;
            }
            WordsCmd::At { n, i } => {
                let letter = family_for(n, cap).letter_at(n, &i)?;
                out.emit(
                    "words.at",
                    &json!({ "n": n, "i": i.to_string(), "letter": letter.bit() }),
                )?;
            }
        },
        Command::Diff { n } => {
            let family = family_for(2 * n + 1, cap);
            let expected = family.length(2 * n.max(1) - 2)?.to_string();
            let report = match family.diff_positions(n) {
                Ok(set) => {
                    let positions: Vec<String> = set.iter().map(|p| p.to_string()).collect();
                    let ok = positions == [expected.clone()];
                    (json!({ "n": n, "positions": positions, "expected": expected, "ok": ok }), ok)
                }
                Err(e @ Error::PostCondition(_)) => (
                    json!({ "n": n, "expected": expected, "ok": false, "error": e.to_string() }),
                    false,
                ),
                Err(e) => return Err(e.into()),
            };
            out.check("diff", &report.0, report.1)?;
        }
        Command::Decomp {
            n,
            k,
            verify,
            csv,
            token_cap,
        } => {
            let family = family_for(2 * (n.max(k) + 1) + 1, cap);
            let h = token_count(&family, n, k)?;
            if let Some(path) = &csv {
                let file = File::create(path)
                    .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
                let rows = write_tokens_csv(
                    TokenStream::new(&family, n, k, token_cap)?,
                    BufWriter::new(file),
                )?;
                out.emit(
                    "decomp.csv",
                    &json!({ "n": n, "k": k, "path": path.display().to_string(), "rows": rows }),
                )?;
            }
            if verify {
                let report = verify_decomposition_claims_capped(&family, n, k, token_cap)?;
                let ok = report.first_last_ok && report.gap_ok;
                out.check("decomp.verify", &report, ok)?;
            } else {
                let tokens: Option<Vec<usize>> = if h <= BigUint::from(TOKEN_LIST_LIMIT) {
                    Some(
                        decompose_tokens(&family, n, k)?
                            .map(|t| t.map(|t| t.index.0))
                            .collect::<Result<_, _>>()?,
                    )
                } else {
                    None
                };
                out.emit(
                    "decomp",
                    &json!({ "n": n, "k": k, "h": h.to_string(), "tokens": tokens }),
                )?;
            }
        }
        Command::Lemma { k, host } => {
            let family = family_for(2 * host.max(k + 1) + 1, cap);
            let report = verify_coverage_lemma(&family, k, host)?;
            let ok = report.passed();
            out.check("lemma", &report, ok)?;
        }
        Command::Witness { k, n } => {
            let family = family_for(2 * n.max(k) + 1, cap);
            let witness = find_nonpower_witness(&family, k, n)?;
            out.emit("witness", &witness)?;
        }
        Command::Pair { radius } => {
            let family = WordFamily::new(LAZY_LEVELS).with_materialize_cap(cap);
            let pair = build_limit_pair(&family, radius)?;
            let ok = pair.stabilized;
            out.check("pair", &pair, ok)?;
        }
        Command::Quotient { action } => quotient(action, cap, out)?,
        Command::Group { action } => group::run(action, out)?,
    }
    Ok(())
}

fn quotient<W: Write>(action: QuotientCmd, cap: u64, out: &mut Out<W>) -> Result<(), Failure> {
    let family = WordFamily::new(LAZY_LEVELS).with_materialize_cap(cap);
    match action {
        QuotientCmd::Dist {
            left,
            right,
            shift,
            radius,
            hops,
        } => {
            let rel = certificate_relation(&family, radius, hops)?;
            let lw = family.materialize(left)?;
            let rw = family.materialize(right)?;
            let p = Window::from_periodic(lw.letters(), shift, radius);
            let q = Window::from_periodic(rw.letters(), shift, radius);
            let direct = cantor_distance(&p, &q)?;
            let bound = quotient_distance(&p, &q, &rel)?;
            out.emit(
                "quotient.dist",
                &json!({
                    "left": left, "right": right, "shift": shift, "radius": radius,
                    "hops": hops, "cantor": direct, "quotient": bound,
                }),
            )?;
        }
        QuotientCmd::Cert {
            r,
            n_max,
            radius,
            hops,
        } => {
            let cert = nonexpansivity_certificate(&family, r, n_max, radius, hops)?;
            let ok = cert.found;
            out.check("quotient.cert", &cert, ok)?;
        }
        QuotientCmd::Period { n_max, witnesses } => {
            let cert = least_period_certificate(&family, n_max)?;
            if witnesses {
                for w in &cert.witnesses {
                    out.emit("quotient.faithful", w)?;
                }
            }
            out.emit(
                "quotient.period",
                &json!({
                    "n_max": cert.n_max, "levels": cert.levels, "m_max": cert.m_max,
                    "witnesses": cert.witnesses.len(),
                }),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
        {
            eprintln!("cam: cannot start {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = io::stdout();
    let mut out = Out {
        sink: BufWriter::new(stdout.lock()),
        failed: false,
    };
    let result = run(cli, &mut out);
    let code = match result {
        Ok(()) if out.failed => 1,
        Ok(()) => 0,
        Err(f) => {
            let _ = out.emit("error", &json!({ "message": f.message, "exit": f.code }));
            eprintln!("cam: {}", f.message);
            f.code
        }
    };
    if out.sink.flush().is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
