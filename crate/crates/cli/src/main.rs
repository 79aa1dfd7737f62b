use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use icx::alignment::{build_rate_half_vector_scheme, build_scalar_scheme, check_feasibility, AlignmentError};
use icx::bounds::{
    certificates_to_json, chain_bounds, simple_bounds, symmetric_capacity, BoundsError, DEFAULT_CHAIN_BUDGET,
    DEFAULT_MAX_N,
};
use icx::galois::FieldSpec;
use icx::model::{
    fmt_rational, gen_neighboring_antidotes, gen_neighboring_interference, gen_x_network, instance_to_json,
    parse_instance, Instance, ModelError, RateVector,
};
use icx::oracle::{best_scalar_scheme, minrank_gf2, OracleError};
use icx::scheme::{
    dimension_audit, parse_scheme, scheme_to_json, simulate_exhaustive, verify, verify_decoders, verify_rank,
    LinearScheme, SchemeError, SimOutcome, DEFAULT_BUDGET,
};
use icx::symmetric::{build_antidote_scheme, build_interference_scheme, build_x_scheme, builtin_example};
use icx::unicast::{scheme_to_unicast, to_unicast};

/// Index coding toolkit: instances, alignment feasibility, linear schemes,
/// exhaustive simulation, the unicast reduction, bounds and oracles.
#[derive(Parser)]
#[command(name = "icx", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Global {
    /// Field for built-in examples: p=<prime> or gf2m=<m>.
    #[arg(long, global = true, default_value = "p=2")]
    field: String,
    /// Work limit for exhaustive searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Longest alignment chain enumerated by the bound search.
    #[arg(long = "maxN", global = true, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Antidotes,
    Interference,
    XNetwork,
}

#[derive(Args)]
struct FamilyParams {
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "U")]
    u: Option<usize>,
    #[arg(long = "D")]
    d: Option<usize>,
    #[arg(long = "L")]
    l: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Rank,
    Decoders,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a symmetric family instance.
    Gen {
        family: Family,
        #[command(flatten)]
        params: FamilyParams,
    },
    /// Check an instance file.
    Validate { instance: PathBuf },
    /// Decide whether rate 1/(L+1) per message is achievable.
    CheckFeasibility {
        instance: PathBuf,
        #[arg(long = "L")]
        l: usize,
    },
    /// Build a scheme for a family or, from an instance file, the
    /// alignment construction at rate 1/(L+1).
    Scheme {
        instance: Option<PathBuf>,
        #[arg(long)]
        family: Option<Family>,
        #[command(flatten)]
        params: FamilyParams,
        /// Use the GF(2) spread construction (rate 1/2 only).
        #[arg(long)]
        spread: bool,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        simulate: bool,
        /// Include the dimension audit (neighboring-antidotes only).
        #[arg(long)]
        audit: bool,
    },
    /// Verify a scheme against an instance.
    Verify {
        instance: PathBuf,
        scheme: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        #[arg(long)]
        audit: bool,
    },
    /// Decode every message tuple.
    Simulate { instance: PathBuf, scheme: PathBuf },
    /// Build the equivalent multiple unicast instance.
    Transform {
        instance: PathBuf,
        #[arg(long = "L")]
        l: Option<usize>,
        /// Leave out the auxiliary messages and destinations.
        #[arg(long)]
        no_aux: bool,
        /// Also lift this scheme to the transformed instance.
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
    /// Outer-bound certificates.
    Bounds {
        instance: PathBuf,
        #[arg(long = "L")]
        l: Option<usize>,
    },
    /// Brute-force minrank or scalar scheme search.
    Oracle {
        instance: PathBuf,
        #[arg(long, conflicts_with = "scalar_search", required_unless_present = "scalar_search")]
        minrank: bool,
        #[arg(long)]
        scalar_search: bool,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// One of the three built-in worked examples.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        simulate: bool,
    },
}

/// Exit status with the JSON that explains it.
enum Outcome {
    Ok(Value),
    /// Invalid or infeasible verdict.
    Negative(Value),
    Budget(Value),
}

enum Fail {
    Usage(String),
    Invalid(String),
    Budget(String),
}

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::BadParams(_) => Fail::Usage(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<SchemeError> for Fail {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::BudgetExceeded { .. } => Fail::Budget(e.to_string()),
            SchemeError::UnsupportedFamily(_) => Fail::Usage(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<AlignmentError> for Fail {
    fn from(e: AlignmentError) -> Self {
        match e {
            AlignmentError::UnsupportedL(_) => Fail::Usage(e.to_string()),
            AlignmentError::Model(m) => m.into(),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<OracleError> for Fail {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => Fail::Budget(e.to_string()),
            OracleError::NotUnicast | OracleError::TooLarge(_) => Fail::Usage(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Fail> {
    Ok(parse_instance(&read(path)?)?)
}

/// Accepts a bare scheme file or any JSON object carrying one under `"scheme"`.
fn load_scheme(path: &Path) -> Result<LinearScheme, Fail> {
    let text = read(path)?;
    let inner = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.get("scheme").cloned())
        .map(|v| v.to_string());
    Ok(parse_scheme(inner.as_deref().unwrap_or(&text))?)
}

fn need(v: Option<usize>, name: &str) -> Result<usize, Fail> {
    v.ok_or_else(|| Fail::Usage(format!("--{name} is required for this family")))
}

fn family_instance(family: Family, p: &FamilyParams) -> Result<Instance, Fail> {
    let k = need(p.k, "K")?;
    Ok(match family {
        Family::Antidotes => gen_neighboring_antidotes(k, need(p.u, "U")?, need(p.d, "D")?)?,
        Family::Interference => gen_neighboring_interference(k, need(p.u, "U")?, need(p.d, "D")?)?,
        Family::XNetwork => gen_x_network(k, need(p.l, "L")?)?,
    })
}

fn family_scheme(family: Family, p: &FamilyParams) -> Result<LinearScheme, Fail> {
    let k = need(p.k, "K")?;
    let built = match family {
        Family::Antidotes => build_antidote_scheme(k, need(p.u, "U")?, need(p.d, "D")?),
        Family::Interference => build_interference_scheme(k, need(p.u, "U")?, need(p.d, "D")?),
        Family::XNetwork => build_x_scheme(k, need(p.l, "L")?),
    };
    built.map_err(|e| Fail::Usage(e.to_string()))
}

fn simulation_json(out: &SimOutcome) -> Value {
    match out {
        SimOutcome::AllDecoded { tuples } => json!({"all_decoded": true, "tuples": tuples}),
        SimOutcome::Counterexample(c) => json!({"all_decoded": false, "counterexample": c.to_json()}),
    }
}

/// Scheme summary plus optional verification and simulation; negative when
/// either fails.
fn scheme_report(inst: &Instance, s: &LinearScheme, do_verify: bool, do_sim: bool, budget: u64) -> Result<Outcome, Fail> {
    let mut doc = json!({
        "n": s.n,
        "rate": fmt_rational(s.symmetric_rate()),
        "rates": s.rates().to_strings(),
    });
    let mut ok = true;
    if do_verify {
        let rep = verify(inst, s)?;
        ok &= rep.valid;
        doc["verification"] = rep.to_json();
    }
    if do_sim {
        let out = simulate_exhaustive(inst, s, budget)?;
        ok &= out.is_ok();
        doc["simulation"] = simulation_json(&out);
    }
    doc["scheme"] = scheme_to_json(s);
    Ok(if ok { Outcome::Ok(doc) } else { Outcome::Negative(doc) })
}

fn run(cli: Cli) -> Result<Outcome, Fail> {
    let g = &cli.global;
    let budget = g.budget.unwrap_or(DEFAULT_BUDGET);
    match cli.verb {
        Verb::Gen { family, params } => Ok(Outcome::Ok(instance_to_json(&family_instance(family, &params)?))),

        Verb::Validate { instance } => {
            let text = read(&instance)?;
            match parse_instance(&text) {
                Ok(inst) => Ok(Outcome::Ok(json!({
                    "valid": true,
                    "messages": inst.num_messages,
                    "destinations": inst.num_destinations(),
                    "multiple_unicast": inst.is_multiple_unicast(),
                    "uniform_demand": inst.uniform_demand(),
                }))),
                Err(ModelError::Invalid(v)) => Ok(Outcome::Negative(json!({
                    "valid": false,
                    "violations": v.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                }))),
                Err(ModelError::Parse(p)) => Ok(Outcome::Negative(json!({
                    "valid": false,
                    "parse_error": {"line": p.line, "column": p.column, "message": p.message},
                }))),
                Err(e) => Err(e.into()),
            }
        }

        Verb::CheckFeasibility { instance, l } => {
            let inst = load_instance(&instance)?;
            let verdict = check_feasibility(&inst, l)?;
            let mut doc = verdict.to_json();
            if verdict.feasible {
                return Ok(Outcome::Ok(doc));
            }
            let rates = RateVector::uniform(inst.num_messages, num_rational::Rational64::new(1, l as i64 + 1));
            let max_n = g.max_n.max(inst.num_messages.saturating_sub(1));
            let certs = match chain_bounds(&inst, l, max_n, g.budget.unwrap_or(DEFAULT_CHAIN_BUDGET)) {
                Ok(c) => c,
                Err(BoundsError::BudgetExceeded { partial, .. }) => partial,
                Err(e) => return Err(Fail::Invalid(e.to_string())),
            };
            doc["certificate"] = certs.iter().find(|c| c.violated_by(&rates)).map(|c| c.to_json()).into();
            Ok(Outcome::Negative(doc))
        }

        Verb::Scheme { instance, family, params, spread, verify: v, simulate, audit } => {
            let (inst, s) = match (instance, family) {
                (Some(path), None) => {
                    let inst = load_instance(&path)?;
                    let l = params.l.or(inst.uniform_demand()).ok_or_else(|| {
                        Fail::Usage("--L is required when destinations desire different numbers of messages".into())
                    })?;
                    let s = if spread { build_rate_half_vector_scheme(&inst, l)? } else { build_scalar_scheme(&inst, l)? };
                    (inst, s)
                }
                (None, Some(f)) => (family_instance(f, &params)?, family_scheme(f, &params)?),
                _ => return Err(Fail::Usage("give either an instance file or --family".into())),
            };
            let mut outcome = scheme_report(&inst, &s, v, simulate, budget)?;
            if audit {
                let a = dimension_audit(&inst, &s)?;
                let holds = a.holds();
                match &mut outcome {
                    Outcome::Ok(doc) | Outcome::Negative(doc) | Outcome::Budget(doc) => doc["audit"] = a.to_json(),
                }
                if !holds {
                    if let Outcome::Ok(doc) = outcome {
                        outcome = Outcome::Negative(doc);
                    }
                }
            }
            Ok(outcome)
        }

        Verb::Verify { instance, scheme, mode, audit } => {
            let inst = load_instance(&instance)?;
            let s = load_scheme(&scheme)?;
            let rep = match mode {
                Mode::Auto => verify(&inst, &s)?,
                Mode::Rank => verify_rank(&inst, &s)?,
                Mode::Decoders => verify_decoders(&inst, &s)?,
            };
            let mut ok = rep.valid;
            let mut doc = rep.to_json();
            if audit {
                let a = dimension_audit(&inst, &s)?;
                ok &= a.holds();
                doc["audit"] = a.to_json();
            }
            Ok(if ok { Outcome::Ok(doc) } else { Outcome::Negative(doc) })
        }

        Verb::Simulate { instance, scheme } => {
            let inst = load_instance(&instance)?;
            let s = load_scheme(&scheme)?;
            let out = simulate_exhaustive(&inst, &s, budget)?;
            let doc = simulation_json(&out);
            Ok(if out.is_ok() { Outcome::Ok(doc) } else { Outcome::Negative(doc) })
        }

        Verb::Transform { instance, l, no_aux, scheme } => {
            let inst = load_instance(&instance)?;
            let map = to_unicast(&inst, l, !no_aux).map_err(|e| Fail::Invalid(e.to_string()))?;
            let mut doc = map.to_json();
            doc["instance"] = instance_to_json(&map.transformed);
            if let Some(path) = scheme {
                let s = load_scheme(&path)?;
                let lifted = scheme_to_unicast(&map, &s).map_err(|e| Fail::Invalid(e.to_string()))?;
                doc["scheme"] = scheme_to_json(&lifted);
            }
            Ok(Outcome::Ok(doc))
        }

        Verb::Bounds { instance, l } => {
            let inst = load_instance(&instance)?;
            let mut doc = json!({"simple": certificates_to_json(&simple_bounds(&inst))});
            let mut exhausted = false;
            if let Some(l) = l.or(inst.uniform_demand()) {
                let chain = match chain_bounds(&inst, l, g.max_n, g.budget.unwrap_or(DEFAULT_CHAIN_BUDGET)) {
                    Ok(c) => c,
                    Err(BoundsError::BudgetExceeded { partial, .. }) => {
                        exhausted = true;
                        partial
                    }
                    Err(e) => return Err(Fail::Invalid(e.to_string())),
                };
                doc["chain"] = certificates_to_json(&chain);
                doc["chain_complete"] = json!(!exhausted);
            }
            if let Ok((c, cert)) = symmetric_capacity(&inst) {
                doc["symmetric_capacity"] = json!({"value": fmt_rational(c), "certificate": cert.to_json()});
            }
            Ok(if exhausted { Outcome::Budget(doc) } else { Outcome::Ok(doc) })
        }

        Verb::Oracle { instance, minrank, q, n_max, .. } => {
            let inst = load_instance(&instance)?;
            let res = if minrank { minrank_gf2(&inst, budget)? } else { best_scalar_scheme(&inst, q, n_max, budget)? };
            let doc = res.to_json();
            Ok(if res.value.is_some() { Outcome::Ok(doc) } else { Outcome::Negative(doc) })
        }

        Verb::Example { id, verify: v, simulate } => {
            let field: FieldSpec = g.field.parse().map_err(|e: icx::galois::GaloisError| Fail::Usage(e.to_string()))?;
            let ex = builtin_example(id, field).ok_or_else(|| Fail::Usage(format!("no example {id}")))?;
            let outcome = scheme_report(&ex.instance, &ex.scheme, v, simulate, budget)?;
            Ok(match outcome {
                Outcome::Ok(mut doc) => {
                    doc["claimed_rate"] = json!(fmt_rational(ex.claimed_rate));
                    doc["instance"] = instance_to_json(&ex.instance);
                    Outcome::Ok(doc)
                }
                other => other,
            })
        }
    }
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).expect("JSON values serialize") + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.global.out.clone();
    let (doc, code) = match run(cli) {
        Ok(Outcome::Ok(d)) => (d, 0),
        Ok(Outcome::Negative(d)) => (d, 1),
        Ok(Outcome::Budget(d)) => (d, 3),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Fail::Invalid(m)) => {
            eprintln!("error: {m}");
            (json!({"error": m}), 1)
        }
        Err(Fail::Budget(m)) => {
            eprintln!("error: {m}");
            (json!({"error": m, "budget_exceeded": true}), 3)
        }
    };
    if let Err(e) = emit(&doc, out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
