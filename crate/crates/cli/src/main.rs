//! Command-line surface for the lattice and order library. Every command
//! reads/writes JSON and is deterministic for a fixed `--seed`.
//!
//! Exit codes: 0 on success, 1 when a campaign or check reports a
//! violation, 2 on input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use hermlat::json::{
    matrix_to_strings, GammaPairDocument, LatticeDocument, LatticePairDocument, WitnessDocument,
};
use hermlat::lattice::{
    build_isometry_witness, isometric_integral_nearly_unimodular, isometric_rational,
    jordan_invariant_oracle, rational_class, GramForm,
};
use hermlat::matrix::Matrix;
use hermlat::orders::{
    check_star_property, residue_unitary_enumerate, scan_star_property, BlockOrder,
    ResidueInvolution, ValuationIdeal, ValuationPattern,
};
use hermlat::refine::refine_to_nearly_unimodular;
use hermlat::transfer::{build_context, descent_experiment};
use hermlat::{IMat, PLocal};

#[derive(Parser)]
#[command(name = "hermlat", version, about = "exact p-local lattice and order computations")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JsonInput {
    /// Path to the JSON input document.
    #[arg(long)]
    json: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Coradical profile of a lattice document.
    Corad(JsonInput),
    /// Rational class, Jordan invariants and coradical of a lattice.
    Classify(JsonInput),
    /// Integral isometry decision for a pair of lattices; emits a witness
    /// when one is requested and available.
    Isom {
        #[command(flatten)]
        input: JsonInput,
        /// Witness precision `k` (the witness is delivered mod p^k).
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Refine a rational form to a nearly unimodular lattice.
    Refine(JsonInput),
    /// Block-order computations.
    Orders {
        #[command(subcommand)]
        sub: OrdersCommand,
    },
    /// Run the integral-descent campaign for a diagonal context.
    TransferDescent {
        #[arg(long)]
        p: u64,
        /// Comma-separated diagonal entries, e.g. `1,3`.
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Isometry decision for a pair of group-form documents.
    Gamma(JsonInput),
    /// Run the golden-vector corpus.
    Golden,
    /// Run a reduced verification battery over every module.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum OrdersCommand {
    /// Integer power of the Jacobson radical of a block order.
    RadicalPower {
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Comma-separated block sizes, e.g. `1,1`.
        #[arg(long)]
        sizes: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Check or scan the (*)-property for a tiled-order pattern.
    StarCheck {
        /// JSON document: {"p": 3, "lambda": [[..]], "l": [[..]]?}
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Enumerate the residue unitary group of the rank-one example.
    ResidueUnitary {
        #[arg(long)]
        p: u64,
        /// `off-diagonal` or `diagonal`.
        #[arg(long)]
        involution: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, value: &T) -> anyhow::Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    match &cli.out {
        Some(path) => std::fs::write(path, s + "\n")?,
        None => println!("{s}"),
    }
    Ok(())
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &PathBuf) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_i64_list(s: &str) -> anyhow::Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| anyhow::anyhow!("bad entry {t:?}: {e}")))
        .collect()
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Corad(input) => {
            let doc: LatticeDocument = read_doc(&input.json)?;
            let f = doc.to_gram_form()?;
            let c = f.coradical();
            emit(
                cli,
                &json!({
                    "p": f.prime(),
                    "coradical": { "exponents": c.exponents(), "rank_defect": c.rank_defect() },
                    "nearly_unimodular": f.is_nearly_unimodular(),
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify(input) => {
            let doc: LatticeDocument = read_doc(&input.json)?;
            let f = doc.to_gram_form()?;
            let c = f.coradical();
            let class = rational_class(&f)?;
            let jordan = jordan_invariant_oracle(&f)?;
            emit(
                cli,
                &json!({
                    "p": f.prime(),
                    "rank": f.rank(),
                    "rational_class": {
                        "disc_val_odd": class.disc_val_odd,
                        "disc_legendre": class.disc_leg,
                        "hasse": class.hasse,
                    },
                    "jordan": jordan
                        .iter()
                        .map(|(s, r, d)| json!({"scale": s, "rank": r, "disc_legendre": d}))
                        .collect::<Vec<_>>(),
                    "coradical": { "exponents": c.exponents(), "rank_defect": c.rank_defect() },
                    "nearly_unimodular": f.is_nearly_unimodular(),
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Isom { input, precision } => {
            let doc: LatticePairDocument = read_doc(&input.json)?;
            let f = doc.first.to_gram_form()?;
            let g = doc.second.to_gram_form()?;
            let rational = isometric_rational(&f, &g)?;
            let oracle = f.rank() == g.rank()
                && jordan_invariant_oracle(&f)? == jordan_invariant_oracle(&g)?;
            let decision = match isometric_integral_nearly_unimodular(&f, &g) {
                Ok(v) => Some(v),
                Err(hermlat::Error::NotNearlyUnimodular) => None,
                Err(e) => return Err(e.into()),
            };
            let mut out = json!({
                "isometric": oracle,
                "rationally_isometric": rational,
                "nearly_unimodular_decision": decision,
            });
            // witnesses are delivered mod p^k, default k = 8
            let k = precision.or(doc.first.precision).unwrap_or(8);
            if decision == Some(true) {
                let w = build_isometry_witness(&f, &g, k)?;
                out["witness"] = serde_json::to_value(WitnessDocument {
                    witness: matrix_to_strings(&w),
                    precision: k,
                })?;
            }
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Refine(input) => {
            let doc: LatticeDocument = read_doc(&input.json)?;
            let ambient = doc.to_ambient_form()?;
            let (out, trace) = refine_to_nearly_unimodular(&ambient)?;
            let gram = out.gram_in_basis();
            emit(
                cli,
                &json!({
                    "p": out.prime(),
                    "gram": matrix_to_strings(&gram),
                    "basis": matrix_to_strings(out.basis()),
                    "iterations": trace
                        .steps
                        .iter()
                        .map(|s| json!({
                            "colength": s.colength,
                            "max_exponent": s.max_exponent,
                            "n": s.n,
                        }))
                        .collect::<Vec<_>>(),
                    "initial_colength": trace.initial_colength,
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Orders { sub } => run_orders(cli, sub),
        Command::TransferDescent {
            p,
            form,
            trials,
            seed,
        } => {
            let entries = parse_i64_list(form)?;
            let f = GramForm::diagonal(*p, &entries)?;
            let ctx = build_context(&f)?;
            let report = descent_experiment(&ctx, *trials, *seed)?;
            emit(cli, &report)?;
            let clean = !report.anisotropic
                || (report.integral_witness_count == report.trials
                    && report.claim9_violations == 0
                    && report.claim11_violations == 0);
            Ok(if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Gamma(input) => {
            let doc: GammaPairDocument = read_doc(&input.json)?;
            let a = doc.first.to_lattice()?;
            let b = doc.second.to_lattice()?;
            let verdict = hermlat::gamma::gamma_isometric_split_abelian(&a, &b)?;
            emit(cli, &json!({ "isometric": verdict }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Golden => {
            let findings = golden_corpus()?;
            emit(cli, &json!({ "golden": findings, "ok": true }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed } => {
            let report = selftest(*seed)?;
            let ok = report["ok"].as_bool().unwrap_or(false);
            emit(cli, &report)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn run_orders(cli: &Cli, sub: &OrdersCommand) -> anyhow::Result<ExitCode> {
    match sub {
        OrdersCommand::RadicalPower { p, sizes, n } => {
            let sizes: Vec<usize> = parse_i64_list(sizes)?
                .into_iter()
                .map(|x| usize::try_from(x).map_err(|_| anyhow::anyhow!("sizes must be positive")))
                .collect::<anyhow::Result<_>>()?;
            let o = BlockOrder::new(*p, sizes)?;
            let power = o.radical_power(*n);
            let rows: Vec<Vec<i64>> = (0..o.dimension())
                .map(|i| (0..o.dimension()).map(|j| power.bounds()[(i, j)]).collect())
                .collect();
            emit(cli, &json!({ "p": p, "n": n, "bounds": rows }))?;
            Ok(ExitCode::SUCCESS)
        }
        OrdersCommand::StarCheck { pattern } => {
            #[derive(serde::Deserialize)]
            struct StarDoc {
                p: u64,
                lambda: Vec<Vec<i64>>,
                #[serde(default)]
                l: Option<Vec<Vec<i64>>>,
            }
            let doc: StarDoc = read_doc(pattern)?;
            let to_imat = |rows: &[Vec<i64>]| -> IMat {
                Matrix::from_rows(rows.to_vec())
            };
            let pat = ValuationPattern::new(doc.p, to_imat(&doc.lambda))?;
            match &doc.l {
                Some(l) => {
                    let ideal = ValuationIdeal::from_bounds(doc.p, to_imat(l))?;
                    let v = check_star_property(&pat, &ideal)?;
                    emit(
                        cli,
                        &json!({
                            "premise": v.premise,
                            "conclusion": v.conclusion,
                            "holds": v.holds(),
                        }),
                    )?;
                    Ok(if v.holds() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    })
                }
                None => {
                    let report = scan_star_property(&pat, 5_000_000)?;
                    let violations: Vec<Vec<Vec<i64>>> = report
                        .violations
                        .iter()
                        .map(|m| {
                            (0..m.rows())
                                .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
                                .collect()
                        })
                        .collect();
                    emit(
                        cli,
                        &json!({
                            "candidates": report.candidates,
                            "premise_count": report.premise_count,
                            "violations": violations,
                        }),
                    )?;
                    Ok(if report.violations.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    })
                }
            }
        }
        OrdersCommand::ResidueUnitary { p, involution } => {
            let inv = match involution.as_str() {
                "off-diagonal" => ResidueInvolution::OffDiagonalSwap,
                "diagonal" => ResidueInvolution::DiagonalSwap,
                other => anyhow::bail!("unknown involution {other:?}"),
            };
            let (component, total) = residue_unitary_enumerate(*p, inv)?;
            emit(
                cli,
                &json!({ "p": p, "identity_component": component, "total": total }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The golden corpus around the non-semisimple and nearly unimodular
/// example pairs; every fact is asserted and reported.
fn golden_corpus() -> anyhow::Result<Vec<serde_json::Value>> {
    let mut findings = Vec::new();
    let d = |entries: &[i64]| GramForm::diagonal(3, entries).unwrap();

    let a = d(&[1, 9]);
    let b = d(&[2, 18]);
    anyhow::ensure!(isometric_rational(&a, &b)?, "corpus (a): rational classes");
    anyhow::ensure!(
        jordan_invariant_oracle(&a)? != jordan_invariant_oracle(&b)?,
        "corpus (a): integral classes"
    );
    findings.push(json!({"pair": "<1,9> vs <2,18>", "rational": true, "integral": false}));

    let t = Matrix::from_rows(vec![
        vec![PLocal::from_int(1, 3), PLocal::from_int(3, 3)],
        vec![PLocal::from_ratio(1, 3, 3), PLocal::from_int(-1, 3)],
    ]);
    anyhow::ensure!(a.apply(&t) == *b.gram(), "corpus (b): witness identity");
    anyhow::ensure!(!t.is_integral(), "corpus (b): witness must be rational-only");
    findings.push(json!({"witness": "[[1,3],[1/3,-1]]", "verified": true, "integral": false}));

    anyhow::ensure!(a.coradical().exponents() == [2], "corpus (c): coradical");
    findings.push(json!({"coradical": "<1,9>", "exponents": [2]}));

    let c = d(&[1, 1, 9]);
    let e = d(&[1, 2, 18]);
    anyhow::ensure!(isometric_rational(&c, &e)?, "corpus (d): rational classes");
    anyhow::ensure!(
        jordan_invariant_oracle(&c)? != jordan_invariant_oracle(&e)?,
        "corpus (d): integral classes"
    );
    findings.push(json!({"pair": "<1,1,9> vs <1,2,18>", "rational": true, "integral": false}));

    let f = d(&[1, 1, -1]);
    let g = d(&[1, 3, -3]);
    anyhow::ensure!(
        f.is_nearly_unimodular() && g.is_nearly_unimodular(),
        "corpus (e): near unimodularity"
    );
    anyhow::ensure!(isometric_rational(&f, &g)?, "corpus (e): rational classes");
    anyhow::ensure!(
        !isometric_integral_nearly_unimodular(&f, &g)?,
        "corpus (e): decision"
    );
    findings.push(json!({
        "pair": "<1,1,-1> vs <1,3,-3>",
        "nearly_unimodular": true,
        "rational": true,
        "integral": false
    }));
    Ok(findings)
}

/// A reduced battery across every module: small campaign sizes, fixed
/// seeds, deterministic output.
fn selftest(seed: u64) -> anyhow::Result<serde_json::Value> {
    use hermlat::lattice::{random_gl_r, random_nearly_unimodular};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut ok = true;
    let record = |name: &str, pass: bool, checks: &mut Vec<serde_json::Value>| {
        checks.push(json!({"check": name, "pass": pass}));
        pass
    };

    // oracle equivalence on a small campaign
    let mut pass = true;
    for _ in 0..60 {
        let p = *[3u64, 5].get(rng.gen_range(0..2)).unwrap();
        let rank = rng.gen_range(1..=4);
        let f = random_nearly_unimodular(&mut rng, p, rank);
        let g = if rng.gen_bool(0.5) {
            let x = random_gl_r(&mut rng, p, rank);
            GramForm::new(p, 1, f.apply(&x))?
        } else {
            random_nearly_unimodular(&mut rng, p, rank)
        };
        let decision = isometric_integral_nearly_unimodular(&f, &g)?;
        let oracle = jordan_invariant_oracle(&f)? == jordan_invariant_oracle(&g)?;
        pass &= decision == oracle;
    }
    ok &= record("decision_oracle_equivalence", pass, &mut checks);

    // refinement on random rational forms
    let mut pass = true;
    for _ in 0..30 {
        let p = *[3u64, 5].get(rng.gen_range(0..2)).unwrap();
        let n = rng.gen_range(1..=4);
        let gram = loop {
            let m: hermlat::PMat = Matrix::from_fn(n, n, |_, _| {
                PLocal::from_int(rng.gen_range(-9i64..=9), p)
                    * PLocal::p_power(rng.gen_range(-2i64..=2), p)
            });
            let sym = &m + &m.transpose();
            if !sym.det().inv().is_none() {
                break sym;
            }
        };
        let ambient = hermlat::refine::AmbientForm::with_standard_basis(p, gram)?;
        let class_in = ambient.rational_class()?;
        let (out, _) = refine_to_nearly_unimodular(&ambient)?;
        let f = GramForm::new(p, 1, out.gram_in_basis())?;
        pass &= f.is_nearly_unimodular() && out.rational_class()? == class_in;
    }
    ok &= record("refinement", pass, &mut checks);

    // radical power law on two-block orders
    let mut pass = true;
    for sizes in [vec![1usize, 1], vec![2, 1], vec![2, 2]] {
        let o = BlockOrder::new(3, sizes)?;
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                pass &= hermlat::orders::ideal_multiply(&o.radical_power(a), &o.radical_power(b))?
                    == o.radical_power(a + b);
            }
        }
    }
    ok &= record("radical_power_law", pass, &mut checks);

    // descent on the smallest anisotropic context
    let ctx = build_context(&GramForm::diagonal(3, &[1, 3])?)?;
    let rep = descent_experiment(&ctx, 40, seed)?;
    let pass = rep.integral_witness_count == 40
        && rep.claim9_violations == 0
        && rep.claim11_violations == 0;
    ok &= record("descent", pass, &mut checks);

    // residue unitary groups
    let (c1, _) = residue_unitary_enumerate(3, ResidueInvolution::OffDiagonalSwap)?;
    let (c2, _) = residue_unitary_enumerate(3, ResidueInvolution::DiagonalSwap)?;
    let pass = c1 == 3 && c2 == 2;
    ok &= record("residue_unitary", pass, &mut checks);

    // gamma twist detection
    let group = hermlat::gamma::FiniteGroup::cyclic(2);
    let action = hermlat::gamma::regular_representation(&group, 5);
    let mut pass = true;
    for _ in 0..10 {
        let l = hermlat::gamma::random_invariant_form(&group, &action, 5, &mut rng, true)?;
        let x = random_gl_r(&mut rng, 5, l.rank());
        let twisted = hermlat::gamma::twist_lattice(&l, &x)?;
        pass &= hermlat::gamma::gamma_isometric_split_abelian(&l, &twisted)?;
    }
    ok &= record("gamma_twists", pass, &mut checks);

    Ok(json!({ "seed": seed, "checks": checks, "ok": ok }))
}
