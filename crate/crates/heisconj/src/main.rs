//! Command-line front end: group-spec ingestion, element arithmetic,
//! invariant reports, conjugacy queries, class enumeration, and the
//! self-certification suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid data, 3 selftest
//! mismatch.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use heisconj::conj::ConjContext;
use heisconj::docs::{
    element_to_doc, ext_element_to_doc, parse_element, ClassDoc, ClassesDoc, ConjugacyDoc,
    FiniteInvariantDoc, Model, ModelElement, ZInvariantDoc,
};
use heisconj::oracle::{oracle_finite, oracle_z, OracleVerdict};
use heisconj::selftest::{all_passed, run as run_selftest, SelftestConfig};
use heisconj::zheis;
use heisconj::{Error, Result};

const USAGE_EXIT: u8 = 1;
const DATA_EXIT: u8 = 2;
const SELFTEST_EXIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "heisconj",
    version,
    about = "Exact conjugacy-class invariants for discrete and extended Heisenberg groups",
    long_about = "Exact conjugacy-class invariants for discrete and extended Heisenberg groups.\n\n\
        Groups are described by JSON specs (see the catalog/ directory): abelian\n\
        factors N, P, C are products of cyclic groups given by their moduli, with\n\
        modulus 0 standing for a copy of the integers; congruence mod 0 means\n\
        equality. K lists one graded automorphism per generator. The integer\n\
        model {\"model\": \"integer\"} selects the extended integer Heisenberg\n\
        group with the action k(p, c, n) = (p + kn, c + k n(n-1)/2, n).\n\n\
        Elements are JSON objects {\"p\": .., \"c\": .., \"n\": .., \"k\": ..} with\n\
        plain integers in the integer model and coordinate vectors otherwise."
)]
struct Cli {
    /// JSON group spec file
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "integer")]
    group: Option<PathBuf>,
    /// use the extended integer Heisenberg group
    #[arg(long, global = true)]
    integer: bool,
    /// pretty-print JSON output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply two elements (left operand acts)
    Mul { x: String, y: String },
    /// Invert an element
    Inv { x: String },
    /// Conjugate: print g x g⁻¹
    Conj { g: String, x: String },
    /// Print the conjugacy-class invariant record of an element
    Invariants { x: String },
    /// Decide whether two elements are conjugate
    #[command(name = "is-conjugate")]
    IsConjugate {
        x: String,
        y: String,
        /// decide by brute-force oracle instead of invariants
        #[arg(long)]
        oracle: bool,
        /// search for and print an explicit conjugator
        #[arg(long)]
        witness: bool,
    },
    /// List all conjugacy classes of a finite model
    Classes,
    /// Run the full self-certification suite (exit 3 on any failure)
    Selftest {
        /// seed for the randomized checks
        #[arg(long, default_value_t = 0x4845_4953)]
        seed: u64,
        /// effort bound scaling the exhaustive ranges (40 = full)
        #[arg(long, default_value_t = 40)]
        r#box: i64,
        /// extra group spec files to include in the instance sweep
        #[arg(long, value_name = "FILE")]
        catalog: Vec<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: DATA_EXIT,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE_EXIT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_model(cli: &Cli) -> std::result::Result<Model, Failure> {
    if cli.integer {
        return Ok(Model::Integer);
    }
    let Some(path) = &cli.group else {
        return Err(Failure::usage(
            "this command needs a group: pass --integer or --group FILE",
        ));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(Model::parse_json(&text)?)
}

fn print_json<T: serde::Serialize>(cli: &Cli, value: &T) -> std::result::Result<(), Failure> {
    let text = if cli.json {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| Failure::data(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: &Cli) -> std::result::Result<u8, Failure> {
    match &cli.command {
        Command::Mul { x, y } => {
            let model = load_model(cli)?;
            let x = parse_element(&model, x)?;
            let y = parse_element(&model, y)?;
            let out = match (&model, &x, &y) {
                (Model::Integer, ModelElement::Integer(a), ModelElement::Integer(b)) => {
                    ModelElement::Integer(a.mul(b)?)
                }
                (Model::Explicit(g), ModelElement::Explicit(a), ModelElement::Explicit(b)) => {
                    ModelElement::Explicit(g.mul(a, b)?)
                }
                _ => unreachable!("elements always match the model"),
            };
            print_json(cli, &element_to_doc(&out))?;
            Ok(0)
        }
        Command::Inv { x } => {
            let model = load_model(cli)?;
            let x = parse_element(&model, x)?;
            let out = match (&model, &x) {
                (Model::Integer, ModelElement::Integer(a)) => ModelElement::Integer(a.inv()?),
                (Model::Explicit(g), ModelElement::Explicit(a)) => {
                    ModelElement::Explicit(g.inv(a)?)
                }
                _ => unreachable!(),
            };
            print_json(cli, &element_to_doc(&out))?;
            Ok(0)
        }
        Command::Conj { g, x } => {
            let model = load_model(cli)?;
            let ge = parse_element(&model, g)?;
            let xe = parse_element(&model, x)?;
            let out = match (&model, &ge, &xe) {
                (Model::Integer, ModelElement::Integer(a), ModelElement::Integer(b)) => {
                    ModelElement::Integer(b.conjugate_by(a)?)
                }
                (Model::Explicit(grp), ModelElement::Explicit(a), ModelElement::Explicit(b)) => {
                    ModelElement::Explicit(grp.conjugate(a, b)?)
                }
                _ => unreachable!(),
            };
            print_json(cli, &element_to_doc(&out))?;
            Ok(0)
        }
        Command::Invariants { x } => {
            let model = load_model(cli)?;
            match (&model, parse_element(&model, x)?) {
                (Model::Integer, ModelElement::Integer(z)) => {
                    let doc = ZInvariantDoc::from(zheis::invariants(&z)?);
                    print_json(cli, &doc)?;
                }
                (Model::Explicit(g), ModelElement::Explicit(e)) => {
                    let ctx = ConjContext::new(g, &e.n, &e.k)?;
                    let rec = ctx.invariant_record(&e)?;
                    print_json(cli, &FiniteInvariantDoc::from(&rec))?;
                }
                _ => unreachable!(),
            }
            Ok(0)
        }
        Command::IsConjugate {
            x,
            y,
            oracle,
            witness,
        } => {
            let model = load_model(cli)?;
            let xe = parse_element(&model, x)?;
            let ye = parse_element(&model, y)?;
            let doc = is_conjugate(&model, &xe, &ye, *oracle, *witness)?;
            print_json(cli, &doc)?;
            Ok(0)
        }
        Command::Classes => {
            let model = load_model(cli)?;
            let Model::Explicit(g) = &model else {
                return Err(Failure::data(
                    "the integer model has infinitely many classes; use is-conjugate or invariants",
                ));
            };
            let doc = classes(g)?;
            print_json(cli, &doc)?;
            Ok(0)
        }
        Command::Selftest {
            seed,
            r#box,
            catalog,
        } => {
            let mut cfg = SelftestConfig::with_box(*r#box, *seed);
            for path in catalog {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
                match Model::parse_json(&text)? {
                    Model::Explicit(g) => {
                        let name = path
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| "extra".into());
                        cfg.extra_instances.push((name, *g));
                    }
                    Model::Integer => {
                        return Err(Failure::data(
                            "--catalog expects finite instances; the integer model is built in",
                        ))
                    }
                }
            }
            let results = run_selftest(&cfg);
            for r in &results {
                println!("{}", r.format_line());
            }
            if all_passed(&results) {
                println!("selftest: PASS ({} criteria)", results.len());
                Ok(0)
            } else {
                let failed = results.iter().filter(|r| !r.passed).count();
                println!("selftest: FAIL ({failed} of {} criteria)", results.len());
                Ok(SELFTEST_EXIT)
            }
        }
    }
}

fn is_conjugate(
    model: &Model,
    x: &ModelElement,
    y: &ModelElement,
    use_oracle: bool,
    want_witness: bool,
) -> std::result::Result<ConjugacyDoc, Failure> {
    match (model, x, y) {
        (Model::Integer, ModelElement::Integer(a), ModelElement::Integer(b)) => {
            let decision = zheis::is_conjugate_z(a, b)?;
            let oracle_verdict: Option<OracleVerdict<zheis::ZExtElement>> =
                if use_oracle || want_witness {
                    Some(oracle_z(a, b)?)
                } else {
                    None
                };
            if let Some(o) = &oracle_verdict {
                if o.conjugate != decision.conjugate {
                    return Err(Failure::from(Error::InvariantViolation(format!(
                        "invariant decision {} disagrees with the oracle {}",
                        decision.conjugate, o.conjugate
                    ))));
                }
            }
            let witness = oracle_verdict.as_ref().and_then(|o| {
                o.witness
                    .as_ref()
                    .map(|w| element_to_doc(&ModelElement::Integer(*w)))
            });
            Ok(ConjugacyDoc {
                conjugate: decision.conjugate,
                method: if use_oracle { "oracle" } else { "invariants" }.into(),
                witness: if want_witness { witness } else { None },
                detail: Some(format!("{:?}", decision.detail)),
            })
        }
        (Model::Explicit(g), ModelElement::Explicit(a), ModelElement::Explicit(b)) => {
            if a.n != b.n || a.k != b.k {
                return Ok(ConjugacyDoc {
                    conjugate: false,
                    method: "invariants".into(),
                    witness: None,
                    detail: Some("n or k components differ".into()),
                });
            }
            let ctx = ConjContext::new(g, &a.n, &a.k)?;
            let decision = ctx.are_conjugate_finite(a, b)?;
            let oracle_verdict = if use_oracle || want_witness {
                Some(oracle_finite(g, a, b)?)
            } else {
                None
            };
            if let Some(o) = &oracle_verdict {
                if o.conjugate != decision {
                    return Err(Failure::from(Error::InvariantViolation(format!(
                        "invariant decision {decision} disagrees with the oracle {}",
                        o.conjugate
                    ))));
                }
            }
            let witness = oracle_verdict
                .as_ref()
                .and_then(|o| o.witness.as_ref().map(ext_element_to_doc));
            Ok(ConjugacyDoc {
                conjugate: decision,
                method: if use_oracle { "oracle" } else { "invariants" }.into(),
                witness: if want_witness { witness } else { None },
                detail: None,
            })
        }
        _ => unreachable!(),
    }
}

fn classes(g: &heisconj::heis::ExtGroup) -> Result<ClassesDoc> {
    let order: u64 = g
        .order()?
        .ok_or(Error::InfiniteEnumeration)?
        .try_into()
        .map_err(|_| Error::Overflow("order"))?;
    let elements = g.enumerate()?;
    let index: BTreeMap<&heisconj::heis::ExtElement, usize> = elements.iter().zip(0..).collect();
    let mut labels: Vec<Option<(Vec<i64>, usize)>> = vec![None; elements.len()];
    let mut records: Vec<Option<heisconj::conj::InvariantRecord>> = vec![None; elements.len()];
    for n in g.heis().n_group().enumerate()? {
        for k in g.kgroup().group().enumerate()? {
            let ctx = ConjContext::new(g, &n, &k)?;
            for (x, rec) in ctx.fiber_records()? {
                let i = index[&x];
                labels[i] = Some((rec.label(), 0));
                records[i] = Some(rec);
            }
        }
    }
    // group elements by label, classes ordered by first representative
    let mut class_of: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut classes: Vec<ClassDoc> = Vec::new();
    for (i, slot) in labels.iter().enumerate() {
        let (label, _) = slot.as_ref().expect("labeled");
        if let Some(&c) = class_of.get(label) {
            classes[c].size += 1;
        } else {
            let rec = records[i].as_ref().expect("record");
            class_of.insert(label.clone(), classes.len());
            classes.push(ClassDoc {
                representative: ext_element_to_doc(&elements[i]),
                size: 1,
                invariants: FiniteInvariantDoc::from(rec),
            });
        }
    }
    Ok(ClassesDoc {
        order,
        class_count: classes.len(),
        classes,
    })
}
