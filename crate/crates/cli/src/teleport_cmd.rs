use std::collections::BTreeMap;

use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use trihyper::hilbert::C64;
use trihyper::teleport::{
    corrections, default_profile, outcome_probabilities, prepare, reduce_to_parity_pair,
    run_teleport, teleport_prepared, verify_table1, CorrectionRecipe, InputQubits, PrepMode,
    SobaOutcome, Table1Audit, TeleportTrace, FIDELITY_TOL,
};

use crate::report::{amp_pairs, emit_json, outcome, Assertion, Outcome, Report, Timer, VERSION};
use crate::{ModeArg, TeleportRunArgs, VerifyArgs};

#[derive(Serialize)]
struct RecipeView {
    pre: &'static str,
    post: &'static str,
    display: String,
}

impl From<CorrectionRecipe> for RecipeView {
    fn from(r: CorrectionRecipe) -> Self {
        Self {
            pre: r.pre.name(),
            post: r.post.name(),
            display: r.to_string(),
        }
    }
}

#[derive(Serialize)]
struct FidelityRow {
    outcome: SobaOutcome,
    template: String,
    recipe: RecipeView,
    equivalent_recipes: usize,
    inputs_tested: usize,
    min_fidelity: f64,
}

#[derive(Serialize)]
struct VerifyConfig {
    seed: u64,
    random_inputs: u64,
    modes: [&'static str; 2],
}

#[derive(Serialize)]
struct VerifyResults {
    fidelity: Vec<FidelityRow>,
    all_outcomes_restored: bool,
    table1_audit: Table1Audit,
    table1_fully_matches: bool,
    assertions: Vec<Assertion>,
}

fn mode(m: ModeArg) -> PrepMode {
    match m {
        ModeArg::Circuit => PrepMode::Circuit,
        ModeArg::Spdc => PrepMode::Spdc,
    }
}

pub fn verify(args: &VerifyArgs, no_timing: bool) -> anyhow::Result<Outcome> {
    let timer = Timer::start(no_timing);
    let table = corrections()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut inputs = InputQubits::canonical().to_vec();
    inputs.extend((0..args.inputs).map(|_| InputQubits::random(&mut rng)));

    let mut uniform = true;
    let mut min_f = [1.0f64; 16];
    for input in &inputs {
        for m in [PrepMode::Circuit, PrepMode::Spdc] {
            let state = prepare(input, m);
            let probs = outcome_probabilities(&state)?;
            uniform &= probs.iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-12);
            for o in SobaOutcome::all() {
                let f = teleport_prepared(&state, input, o)?.fidelity_to_target;
                min_f[o.index()] = min_f[o.index()].min(f);
            }
        }
    }

    let fidelity: Vec<FidelityRow> = SobaOutcome::all()
        .into_iter()
        .map(|o| {
            let row = table.row(o);
            FidelityRow {
                outcome: o,
                template: row.template.render(),
                recipe: row.recipe.into(),
                equivalent_recipes: row.alternatives.len(),
                inputs_tested: inputs.len() * 2,
                min_fidelity: min_f[o.index()],
            }
        })
        .collect();
    let all_outcomes_restored = fidelity
        .iter()
        .all(|r| r.min_fidelity >= 1.0 - FIDELITY_TOL);
    let audit = verify_table1()?;
    let assertions = vec![
        Assertion::new(
            "derived_recipes_restore_every_outcome",
            all_outcomes_restored,
        ),
        Assertion::new("outcome_probabilities_uniform", uniform),
        Assertion::new(
            "printed_mismatches_have_replacements",
            audit
                .rows
                .iter()
                .all(|r| r.internally_consistent || r.replacement_recipe.is_some()),
        ),
    ];
    let verdict = outcome(&assertions);
    let report = Report {
        version: VERSION,
        command: "teleport verify",
        config: VerifyConfig {
            seed: args.seed,
            random_inputs: args.inputs,
            modes: ["circuit", "spdc"],
        },
        results: VerifyResults {
            fidelity,
            all_outcomes_restored,
            table1_fully_matches: audit.fully_matches(),
            table1_audit: audit,
            assertions,
        },
        duration_ms: timer.elapsed_ms(),
    };
    emit_json(args.out.out.as_deref(), &report)?;
    Ok(verdict)
}

#[derive(Serialize)]
struct InputView {
    a: [f64; 2],
    b: [f64; 2],
    alpha: [f64; 2],
    beta: [f64; 2],
}

impl From<&InputQubits> for InputView {
    fn from(i: &InputQubits) -> Self {
        let p = |c: C64| [c.re, c.im];
        Self {
            a: p(i.a),
            b: p(i.b),
            alpha: p(i.alpha),
            beta: p(i.beta),
        }
    }
}

#[derive(Serialize)]
struct RunConfig {
    seed: u64,
    trials: u64,
    mode: PrepMode,
    input: Option<InputView>,
    random: bool,
}

#[derive(Serialize)]
struct TraceView {
    outcome: SobaOutcome,
    outcome_probability: f64,
    recipe: RecipeView,
    bob_pre_correction: Vec<[f64; 2]>,
    bob_final: Vec<[f64; 2]>,
    target: Vec<[f64; 2]>,
    fidelity: f64,
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    outcome: SobaOutcome,
    fidelity: f64,
}

#[derive(Serialize)]
struct RunResults {
    successes: u64,
    min_fidelity: f64,
    outcome_counts: BTreeMap<String, u64>,
    heralding_probability: Option<f64>,
    first_trace: TraceView,
    trials: Vec<TrialRow>,
    assertions: Vec<Assertion>,
}

fn trace_view(t: &TeleportTrace, input: &InputQubits) -> TraceView {
    TraceView {
        outcome: t.outcome,
        outcome_probability: t.outcome_probability,
        recipe: t.recipe.into(),
        bob_pre_correction: amp_pairs(&t.bob_pre_correction),
        bob_final: amp_pairs(&t.bob_final),
        target: amp_pairs(&input.target()),
        fidelity: t.fidelity_to_target,
    }
}

pub fn run(args: &TeleportRunArgs, no_timing: bool) -> anyhow::Result<Outcome> {
    let timer = Timer::start(no_timing);
    let fixed = match &args.input {
        Some(v) => {
            anyhow::ensure!(
                v.len() == 8,
                "--input needs 8 comma-separated numbers, got {}",
                v.len()
            );
            let c = |i: usize| C64::new(v[2 * i], v[2 * i + 1]);
            Some(InputQubits::normalized(c(0), c(1), c(2), c(3)).context("--input")?)
        }
        None => None,
    };
    let m = mode(args.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut counts: BTreeMap<String, u64> = SobaOutcome::all()
        .into_iter()
        .map(|o| (o.ascii(), 0))
        .collect();
    let mut rows = Vec::with_capacity(args.trials as usize);
    let mut first = None;
    let mut min_f: f64 = 1.0;
    let mut successes = 0;
    for trial in 0..args.trials {
        let input = match fixed {
            Some(i) => i,
            None => InputQubits::random(&mut rng),
        };
        let t = run_teleport(&input, m, &mut rng)?;
        *counts
            .get_mut(&t.outcome.ascii())
            .expect("all outcomes listed") += 1;
        min_f = min_f.min(t.fidelity_to_target);
        successes += u64::from(t.succeeded());
        if first.is_none() {
            first = Some(trace_view(&t, &input));
        }
        rows.push(TrialRow {
            trial,
            outcome: t.outcome,
            fidelity: t.fidelity_to_target,
        });
    }
    let heralding_probability = match m {
        PrepMode::Spdc => Some(reduce_to_parity_pair(&default_profile())?.heralding_probability),
        PrepMode::Circuit => None,
    };
    let assertions = vec![Assertion::new(
        "fidelity_within_tolerance",
        successes == args.trials,
    )];
    let verdict = outcome(&assertions);
    let report = Report {
        version: VERSION,
        command: "teleport run",
        config: RunConfig {
            seed: args.seed,
            trials: args.trials,
            mode: m,
            input: fixed.as_ref().map(InputView::from),
            random: fixed.is_none(),
        },
        results: RunResults {
            successes,
            min_fidelity: min_f,
            outcome_counts: counts,
            heralding_probability,
            first_trace: first.expect("trials >= 1"),
            trials: rows,
            assertions,
        },
        duration_ms: timer.elapsed_ms(),
    };
    emit_json(args.out.out.as_deref(), &report)?;
    Ok(verdict)
}
