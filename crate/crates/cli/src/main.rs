//! Batch front-end: generate instances, extract disjoint rainbow bases,
//! verify certificates, run the exact oracle, and collect statistics.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verification failure,
//! 3 resource cap exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rainbow_core::error::Error;
use rainbow_core::extract::{extract_all, Certificate, ExtractConfig};
use rainbow_core::oracle::{
    exact_max_disjoint, gen_instance, verify_certificate, GenMode, InstanceSpec,
};
use rainbow_core::Instance;

#[derive(Parser)]
#[command(
    name = "rainbow",
    about = "Disjoint rainbow bases in binary matroids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        n: usize,
        k: usize,
        seed: u64,
        /// Output path; stdout when omitted.
        out: Option<PathBuf>,
        /// Plant a parallel class instead of sampling uniformly.
        #[arg(long)]
        planted: bool,
    },
    /// Extract disjoint rainbow bases and write the certificate.
    Extract {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        retries: u32,
        /// Print the repair trace (paths and exchanges).
        #[arg(long, short)]
        verbose: bool,
        /// Dump the residual graph's edges before each step.
        #[arg(long)]
        dump_graph: bool,
    },
    /// Verify a certificate against its instance.
    Verify { input: PathBuf, cert: PathBuf },
    /// Exact maximum number of disjoint rainbow bases (small instances).
    Oracle { input: PathBuf },
    /// Run many seeds and print a CSV of observed shortfalls.
    Stats {
        n: usize,
        k: usize,
        count: usize,
        seed: u64,
        #[arg(long, default_value_t = 8)]
        retries: u32,
        /// Worker threads; instances are merged back in seed order.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Input(_) | Error::Consistency(_) => 1,
        Error::Resource(_) => 3,
    }
}

fn read_instance(path: &PathBuf) -> Result<Instance, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    Instance::parse(&text)
}

fn run() -> Result<u8, Error> {
    match Cli::parse().command {
        Command::Gen {
            n,
            k,
            seed,
            out,
            planted,
        } => {
            let mode = if planted {
                GenMode::Planted
            } else {
                GenMode::Uniform
            };
            let inst = gen_instance(&InstanceSpec { n, k, seed, mode })?;
            let text = inst.to_text();
            match out {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Extract {
            input,
            output,
            seed,
            retries,
            verbose,
            dump_graph,
        } => {
            let inst = read_instance(&input)?;
            let cfg = ExtractConfig {
                seed,
                retries,
                trace: verbose,
                ..Default::default()
            };
            let out = extract_all(&inst.matroid, &inst.bases, &cfg)?;
            if dump_graph {
                eprint!("{}", out.state.graph.dump_edges());
            }
            if verbose {
                for report in &out.state.reports {
                    for line in &report.trace {
                        eprintln!("{line}");
                    }
                }
            }
            fs::write(&output, out.certificate.to_text())
                .map_err(|e| Error::Input(format!("cannot write {}: {e}", output.display())))?;
            println!(
                "t={} b0_observed={} stop={}",
                out.certificate.t(),
                out.certificate.b0_observed(),
                out.certificate.stop.token()
            );
            Ok(0)
        }
        Command::Verify { input, cert } => {
            let inst = read_instance(&input)?;
            let text = fs::read_to_string(&cert)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", cert.display())))?;
            let certificate = Certificate::parse(&text)?;
            if verify_certificate(&inst.matroid, &inst.bases, &certificate)? {
                println!("ok");
                Ok(0)
            } else {
                println!("invalid");
                Ok(2)
            }
        }
        Command::Oracle { input } => {
            let inst = read_instance(&input)?;
            let t = exact_max_disjoint(&inst.matroid, &inst.bases)?;
            println!("t={t}");
            Ok(0)
        }
        Command::Stats {
            n,
            k,
            count,
            seed,
            retries,
            jobs,
        } => {
            let rows = run_stats(n, k, count, seed, retries, jobs.max(1))?;
            println!("n,k,seed,t,b0_observed,stop_reason");
            for row in rows {
                println!("{row}");
            }
            Ok(0)
        }
    }
}

fn run_stats(
    n: usize,
    k: usize,
    count: usize,
    seed: u64,
    retries: u32,
    jobs: usize,
) -> Result<Vec<String>, Error> {
    let seeds: Vec<u64> = (0..count as u64).map(|i| seed + i).collect();
    let chunk = count.div_ceil(jobs).max(1);
    let mut results: Vec<(u64, Result<String, Error>)> = Vec::with_capacity(count);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for piece in seeds.chunks(chunk) {
            handles.push(scope.spawn(move || {
                piece
                    .iter()
                    .map(|&s| (s, stats_row(n, k, s, retries)))
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            results.extend(h.join().expect("stats worker panicked"));
        }
    });
    results.sort_by_key(|(s, _)| *s);
    results.into_iter().map(|(_, r)| r).collect()
}

fn stats_row(n: usize, k: usize, seed: u64, retries: u32) -> Result<String, Error> {
    let inst = gen_instance(&InstanceSpec {
        n,
        k,
        seed,
        mode: GenMode::Uniform,
    })?;
    let cfg = ExtractConfig {
        seed,
        retries,
        ..Default::default()
    };
    let out = extract_all(&inst.matroid, &inst.bases, &cfg)?;
    Ok(format!(
        "{n},{k},{seed},{},{},{}",
        out.certificate.t(),
        out.certificate.b0_observed(),
        out.certificate.stop.token()
    ))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
