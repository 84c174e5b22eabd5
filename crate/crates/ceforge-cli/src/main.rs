//! Command-line shell around the library: file ingestion, command
//! dispatch, deterministic plain-text reports.
//!
//! Exit codes: 0 for success or PASS, 1 for a failed property or a
//! refutation, 2 for usage, file, or parse problems.

use ceforge::ce::{ce_isomorphic_bruteforce, BraidReport, CESystem, CompareOutcome};
use ceforge::connection::{
    certify_unique_differential, check_morse_smale, reduce, MorseSmaleGrading,
};
use ceforge::error::Error;
use ceforge::graded::GradedDifferentialGroup;
use ceforge::instance::{
    coefficients_tag, parse_ce_iso, parse_instance, parse_mask, serialize_ce_iso,
    serialize_chain_map, serialize_instance, serialize_map_blocks,
};
use ceforge::iso::build_filtered_iso;
use ceforge::poset::ElemMask;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

/// Default cap on poset size, overridable with CEFORGE_MAX_ELEMENTS.
const DEFAULT_MAX_ELEMENTS: usize = 20;

#[derive(Parser)]
#[command(
    name = "ceforge",
    version,
    about = "Exact computation with poset-graded differential groups and their Cartan-Eilenberg systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an instance file.
    Validate {
        /// Instance file.
        file: PathBuf,
    },
    /// Homology of the subquotient carried by a convex set of grades.
    Homology {
        /// Instance file.
        file: PathBuf,
        /// Convex set as comma-separated elements (`-` for empty).
        #[arg(long)]
        convex: String,
    },
    /// The term of a nested pair of down-sets.
    Ce {
        /// Instance file.
        file: PathBuf,
        /// Lower down-set as comma-separated elements (`-` for empty).
        #[arg(long)]
        alpha: String,
        /// Upper down-set as comma-separated elements.
        #[arg(long)]
        beta: String,
    },
    /// Run the full axiom battery on the system of an instance.
    CeVerify {
        /// Instance file.
        file: PathBuf,
        /// Bound on the number of convex sets enumerated.
        #[arg(long, default_value_t = 4096)]
        max_downsets: usize,
        /// Worker threads for the independent checks.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Exhaustively compare the systems of two instances.
    Compare {
        /// First instance file.
        file1: PathBuf,
        /// Second instance file.
        file2: PathBuf,
        /// Cap on the number of candidate families examined.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Seed for the candidate enumeration order.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the found isomorphism here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a filtered chain isomorphism from a term-family isomorphism.
    BuildIso {
        /// Source instance file.
        file1: PathBuf,
        /// Target instance file.
        file2: PathBuf,
        /// Term-family isomorphism file.
        #[arg(long = "ce-iso")]
        ce_iso: PathBuf,
        /// Accepted for report reproducibility; the construction itself is
        /// deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the chain map here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a field-coefficient instance to its connection matrix.
    Connect {
        /// Instance file.
        file: PathBuf,
        /// Write `<PREFIX>.a.inst`, `<PREFIX>.f.map`, `<PREFIX>.g.map`,
        /// `<PREFIX>.h.map` instead of printing the documents.
        #[arg(long)]
        out: Option<String>,
    },
    /// Check the Morse-Smale property; with a second file, certify
    /// uniqueness of the strict differential.
    MorseSmale {
        /// Instance file.
        file: PathBuf,
        /// Grading values, comma-separated, in element declaration order.
        #[arg(long)]
        mu: String,
        /// Second instance over the same poset and grading.
        file2: Option<PathBuf>,
    },
}

/// A command outcome that already knows its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure { code: 1, message: msg.into() }
}

fn max_elements() -> usize {
    std::env::var("CEFORGE_MAX_ELEMENTS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_ELEMENTS)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<GradedDifferentialGroup, Failure> {
    let text = read_file(path)?;
    let group = parse_instance(&text).map_err(|e| match e {
        Error::Parse { line, msg } => {
            usage(format!("parse error in {}, line {line}: {msg}", path.display()))
        }
        other => fail(format!("FAIL {}: {other}", path.display())),
    })?;
    let cap = max_elements();
    if group.poset.len() > cap {
        return Err(usage(format!(
            "{} declares {} elements; CEFORGE_MAX_ELEMENTS caps runs at {cap}",
            path.display(),
            group.poset.len()
        )));
    }
    Ok(group)
}

/// Down-set argument: parse the labels and check down-closure.  Both
/// faults are usage errors.
fn arg_down_set(group: &GradedDifferentialGroup, what: &str, csv: &str) -> Result<ElemMask, Failure> {
    let mask = parse_mask(&group.poset, csv)
        .map_err(|e| usage(format!("bad --{what} `{csv}`: {e}")))?;
    group
        .poset
        .down_set(mask)
        .map_err(|e| usage(format!("bad --{what} `{csv}`: {e}")))?;
    Ok(mask)
}

/// Render a column vector as a combination of the group's generators.
fn combination(group: &GradedDifferentialGroup, col: &[ceforge::linalg::Scalar]) -> String {
    use num::{One, Signed, Zero};
    let coeffs = group.coeffs;
    let mut parts: Vec<String> = Vec::new();
    for (i, v) in col.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let name = group.generator_name(i);
        let (sign, mag) = if v.is_negative() {
            ("-", -v.clone())
        } else {
            ("+", v.clone())
        };
        let term = if mag.is_one() {
            name
        } else {
            format!("{}*{}", coeffs.format_scalar(&mag), name)
        };
        if parts.is_empty() {
            parts.push(if sign == "-" { format!("-{term}") } else { term });
        } else {
            parts.push(format!("{sign} {term}"));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ")
    }
}

/// The term report shared by `homology` and `ce`: presentation plus one
/// representative cycle per homology generator.
fn term_report(group: &GradedDifferentialGroup, xi: ElemMask) -> Result<String, Failure> {
    let h = group
        .convex_homology(xi)
        .map_err(|e| usage(format!("bad convex set: {e}")))?;
    let mut out = String::new();
    out.push_str(&format!(
        "term of {}: {}\n",
        group.poset.format_mask(xi),
        h.group
    ));
    for k in 0..h.group.total_rank() {
        let col: Vec<ceforge::linalg::Scalar> =
            (0..h.representatives.rows).map(|r| h.representatives.at(r, k).clone()).collect();
        out.push_str(&format!(
            "generator {k}: represented by {}\n",
            combination(group, &col)
        ));
    }
    Ok(out)
}

fn write_or_print(out: &Option<PathBuf>, label: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            println!("{label} written to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Validate { file } => {
            let group = load_instance(&file)?;
            println!(
                "PASS {}: valid instance ({} elements, {} generators, coefficients {}{})",
                file.display(),
                group.poset.len(),
                group.total_rank(),
                coefficients_tag(group.coeffs),
                if group.degrees.is_some() { ", chain mode" } else { "" }
            );
            Ok(0)
        }
        Command::Homology { file, convex } => {
            let group = load_instance(&file)?;
            let mask = parse_mask(&group.poset, &convex)
                .map_err(|e| usage(format!("bad --convex `{convex}`: {e}")))?;
            group
                .poset
                .convex_set(mask)
                .map_err(|e| usage(format!("bad --convex `{convex}`: {e}")))?;
            print!("{}", term_report(&group, mask)?);
            Ok(0)
        }
        Command::Ce { file, alpha, beta } => {
            let group = load_instance(&file)?;
            let a = arg_down_set(&group, "alpha", &alpha)?;
            let b = arg_down_set(&group, "beta", &beta)?;
            if a & !b != 0 {
                return Err(usage(format!(
                    "--alpha {} is not contained in --beta {}",
                    group.poset.format_mask(a),
                    group.poset.format_mask(b)
                )));
            }
            println!(
                "pair alpha={} beta={}",
                group.poset.format_mask(a),
                group.poset.format_mask(b)
            );
            print!("{}", term_report(&group, b & !a)?);
            Ok(0)
        }
        Command::CeVerify { file, max_downsets, jobs } => {
            let group = load_instance(&file)?;
            let system = CESystem::new(group);
            let items = system
                .braid_items(max_downsets, ceforge::ce::DEFAULT_QUADRUPLE_CAP)
                .map_err(|e| usage(format!("{e}")))?;
            let results: Vec<Result<(String, Vec<String>), Error>> = if jobs > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| usage(format!("cannot start {jobs} workers: {e}")))?;
                pool.install(|| {
                    use rayon::prelude::*;
                    items.par_iter().map(|it| system.run_braid_item(it)).collect()
                })
            } else {
                items.iter().map(|it| system.run_braid_item(it)).collect()
            };
            let mut report = BraidReport::default();
            for (item, result) in items.iter().zip(results) {
                let (label, fails) = result.map_err(|e| fail(format!("FAIL: {e}")))?;
                report.count(item);
                report.record(label, fails);
            }
            for line in &report.lines {
                if line.contains(": FAIL") {
                    println!("{line}");
                }
            }
            println!(
                "checked {} triangles, {} incomparable pairs, {} octahedra",
                report.triangles, report.incomparable, report.octahedra
            );
            if report.passed() {
                println!("PASS");
                Ok(0)
            } else {
                println!("FAIL: {} checks failed", report.failures);
                Ok(1)
            }
        }
        Command::Compare { file1, file2, budget, seed, out } => {
            let g1 = load_instance(&file1)?;
            let g2 = load_instance(&file2)?;
            let s1 = CESystem::new(g1);
            let s2 = CESystem::new(g2);
            let outcome = ce_isomorphic_bruteforce(&s1, &s2, budget, seed)
                .map_err(|e| fail(format!("FAIL: {e}")))?;
            match outcome {
                CompareOutcome::Isomorphic(iso) => {
                    println!("PASS: the systems are isomorphic");
                    let text = serialize_ce_iso(&iso, s1.poset(), s1.group.coeffs);
                    write_or_print(&out, "isomorphism", &text)?;
                    Ok(0)
                }
                CompareOutcome::NotIsomorphic { alpha, beta, reason } => {
                    println!(
                        "FAIL: not isomorphic; distinguished by the pair alpha={} beta={}: {reason}",
                        s1.poset().format_mask(alpha),
                        s1.poset().format_mask(beta)
                    );
                    Ok(1)
                }
                CompareOutcome::BudgetExceeded => {
                    println!(
                        "FAIL: search budget {budget} exhausted; no isomorphism found and \
                         non-isomorphism was not certified"
                    );
                    Ok(1)
                }
            }
        }
        Command::BuildIso { file1, file2, ce_iso, seed: _, out } => {
            let source = load_instance(&file1)?;
            let target = load_instance(&file2)?;
            let s_sys = CESystem::new(source.clone());
            let t_sys = CESystem::new(target.clone());
            let iso_text = read_file(&ce_iso)?;
            let iso = parse_ce_iso(&iso_text, &s_sys, &t_sys).map_err(|e| match e {
                Error::Parse { line, msg } => usage(format!(
                    "parse error in {}, line {line}: {msg}",
                    ce_iso.display()
                )),
                other => fail(format!("FAIL {}: {other}", ce_iso.display())),
            })?;
            let (map, certificate) =
                build_filtered_iso(&source, &target, &iso).map_err(|e| fail(format!("FAIL: {e}")))?;
            for line in &certificate.lines {
                println!("{line}");
            }
            println!("PASS: filtered chain isomorphism constructed");
            let text = serialize_chain_map(&map);
            write_or_print(&out, "chain map", &text)?;
            Ok(0)
        }
        Command::Connect { file, out } => {
            let group = load_instance(&file)?;
            let witness = reduce(&group).map_err(|e| fail(format!("FAIL: {e}")))?;
            println!("connection matrix ranks:");
            for p in 0..group.poset.len() {
                println!(
                    "  {}: {} of {}",
                    group.poset.labels()[p],
                    witness.a.ranks[p],
                    group.ranks[p]
                );
            }
            let a_text = serialize_instance(&witness.a);
            let f_text = serialize_chain_map(&witness.f);
            let g_text = serialize_chain_map(&witness.g);
            let h_text = serialize_map_blocks(&group, &group, &witness.h.matrix);
            match out {
                Some(prefix) => {
                    for (suffix, text) in [
                        ("a.inst", &a_text),
                        ("f.map", &f_text),
                        ("g.map", &g_text),
                        ("h.map", &h_text),
                    ] {
                        let path = format!("{prefix}.{suffix}");
                        std::fs::write(&path, text)
                            .map_err(|e| usage(format!("cannot write {path}: {e}")))?;
                        println!("wrote {path}");
                    }
                }
                None => {
                    println!("# connection matrix");
                    print!("{a_text}");
                    println!("# inclusion (reduced into input)");
                    print!("{f_text}");
                    println!("# retraction (input onto reduced)");
                    print!("{g_text}");
                    println!("# homotopy on the input");
                    print!("{h_text}");
                }
            }
            Ok(0)
        }
        Command::MorseSmale { file, mu, file2 } => {
            let group = load_instance(&file)?;
            let values: Result<Vec<i64>, _> =
                mu.split(',').map(|t| t.trim().parse::<i64>()).collect();
            let values = values.map_err(|_| usage(format!("bad --mu `{mu}`")))?;
            if values.len() != group.poset.len() {
                return Err(usage(format!(
                    "--mu has {} values for {} elements",
                    values.len(),
                    group.poset.len()
                )));
            }
            let grading = MorseSmaleGrading { mu: values };
            let check = check_morse_smale(&group, &grading);
            for reason in &check.reasons {
                println!("reason: {reason}");
            }
            if !check.ok {
                println!("FAIL: {} is not Morse-Smale for this grading", file.display());
                return Ok(1);
            }
            println!("PASS: {} is Morse-Smale for this grading", file.display());
            let Some(file2) = file2 else {
                return Ok(0);
            };
            let other = load_instance(&file2)?;
            let check2 = check_morse_smale(&other, &grading);
            for reason in &check2.reasons {
                println!("reason: {reason}");
            }
            if !check2.ok {
                println!(
                    "FAIL: {} is not Morse-Smale for this grading",
                    file2.display()
                );
                return Ok(1);
            }
            match certify_unique_differential(&group, &other) {
                Ok(true) => {
                    println!(
                        "PASS: the differentials are equal and the exhaustive comparison \
                         confirms the systems are isomorphic"
                    );
                    Ok(0)
                }
                Ok(false) => {
                    println!(
                        "FAIL: the differentials differ and the exhaustive comparison \
                         confirms the systems are not isomorphic"
                    );
                    Ok(1)
                }
                Err(e) => Err(fail(format!("FAIL: {e}"))),
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match std::panic::catch_unwind(move || run(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(failure)) => {
            if failure.code == 2 {
                eprintln!("error: {}", failure.message);
            } else {
                println!("{}", failure.message);
            }
            failure.code
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    };
    std::process::exit(code);
}
