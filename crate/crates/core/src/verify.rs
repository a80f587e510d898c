//! Cross-checks of every semantics against [`simulate_direct`].
//!
//! Each check draws its inputs from the given generator and compares full
//! output states. When a semantics only produces the part of the output owned
//! by one component, the rest is supplied by simulating the diagram with that
//! component removed on the rest of the input.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{
    eval_canonical, reduce_annihilator, reduce_creator, reduce_scalar, substitute_annihilator,
    substitute_creator, unravel, CanonicalForm, VMode,
};
use crate::diagram::{find_path, stage_with_gates, ComponentClass, Diagram, PathEnd, Topology};
use crate::eval::{eval_component, eval_diagram, eval_path, eval_path_antilinear, simulate_direct, EvalResult};
use crate::random::{restate, sub_seed};
use crate::tensor::{random_state_with, rel_err, rng_from_seed, tensor_product, State, WireDecl};

/// Default tolerance on relative deviations.
pub const TOLERANCE: f64 = 1e-9;

fn random_on(wires: Vec<WireDecl>, rng: &mut impl Rng) -> State {
    random_state_with(wires, rng).expect("diagram size is guarded")
}

/// Splits the input wires into a component's inputs and the rest, and draws
/// an independent random ket on each.
fn split_input(d: &Diagram, own: &[WireDecl], rng: &mut impl Rng) -> (State, State) {
    let rest: Vec<WireDecl> = d.input_wires().into_iter().filter(|w| !own.contains(w)).collect();
    (random_on(own.to_vec(), rng), random_on(rest, rng))
}

/// Full output from a component's own output `part` and the rest of the
/// diagram run on `rest`, compared with the oracle on `part_in ⊗ rest`.
fn reassembled(topo: &Topology, c: usize, part_in: &State, part: &State, rest: &State) -> EvalResult<f64> {
    let rest_out = simulate_direct(&topo.without_component(c), rest)?;
    let full = tensor_product(part, &rest_out)?.sorted();
    let oracle = simulate_direct(topo.diagram(), &tensor_product(part_in, rest)?)?;
    Ok(rel_err(&full, &oracle))
}

/// Worst deviation of `eval_path` (both forms) over all bottom-to-top paths
/// from input wires, or `None` when there is none.
pub fn path_deviation(d: &Diagram, rng: &mut impl Rng) -> EvalResult<Option<f64>> {
    let topo = Topology::build(d);
    let mut worst: Option<f64> = None;
    for w in d.input_wires() {
        let Ok(p) = find_path(&topo, w.id, PathEnd::Bottom) else { continue };
        if !p.is_through() {
            continue;
        }
        let c = topo.component_of_segment(topo.input_segment(w.id).expect("input wire"));
        if !topo.is_bipartite(c) {
            continue;
        }
        let (phi, rest) = split_input(d, &[w], rng);
        let out = eval_path(&topo, &p, &phi)?;
        let anti = eval_path_antilinear(&topo, &p, &phi)?;
        let dev = reassembled(&topo, c, &phi, &out, &rest)?.max(rel_err(&out, &anti));
        worst = Some(worst.map_or(dev, |x: f64| x.max(dev)));
    }
    Ok(worst)
}

/// Worst deviation of `eval_component` over the processors that can be
/// staged, or `None` when there is none.
pub fn component_deviation(d: &Diagram, rng: &mut impl Rng) -> EvalResult<Option<f64>> {
    let topo = Topology::build(d);
    let mut worst: Option<f64> = None;
    for comp in topo.components() {
        if comp.class != ComponentClass::Processor {
            continue;
        }
        let Ok(plan) = stage_with_gates(&topo, comp.index) else { continue };
        let (phi, rest) = split_input(d, &topo.input_decls(comp.index), rng);
        let out = eval_component(&topo, &plan, &phi)?;
        let dev = reassembled(&topo, comp.index, &phi, &out, &rest)?;
        worst = Some(worst.map_or(dev, |x: f64| x.max(dev)));
    }
    Ok(worst)
}

/// Worst deviation of `eval_canonical` over the gate-free processors that
/// can be staged, against both the oracle and `eval_component`.
pub fn canonical_deviation(
    d: &Diagram,
    vmode: VMode,
    corrupt: bool,
    rng: &mut impl Rng,
) -> EvalResult<Option<f64>> {
    let topo = Topology::build(d);
    let mut worst: Option<f64> = None;
    for comp in topo.components() {
        if comp.class != ComponentClass::Processor || topo.has_gates(comp.index) {
            continue;
        }
        let Ok(plan) = stage_with_gates(&topo, comp.index) else { continue };
        let cf = match unravel(&topo, &plan, vmode) {
            Ok(cf) => cf,
            Err(_) => {
                worst = Some(f64::INFINITY);
                continue;
            }
        };
        let cf: CanonicalForm = if corrupt { cf.corrupted().unwrap_or(cf) } else { cf };
        let (phi, rest) = split_input(d, &topo.input_decls(comp.index), rng);
        let dev = match eval_canonical(&cf, &phi) {
            Ok(out) => {
                let staged = eval_component(&topo, &plan, &phi)?;
                reassembled(&topo, comp.index, &phi, &out, &rest)?.max(rel_err(&out, &staged))
            }
            Err(_) => f64::INFINITY,
        };
        worst = Some(worst.map_or(dev, |x: f64| x.max(dev)));
    }
    Ok(worst)
}

/// Deviation of `eval_diagram`, with one random factor per component that
/// has inputs and one per free line.
pub fn diagram_deviation(d: &Diagram, rng: &mut impl Rng) -> EvalResult<f64> {
    let topo = Topology::build(d);
    let mut factors = Vec::new();
    for comp in topo.components() {
        let ins = topo.input_decls(comp.index);
        if !ins.is_empty() {
            factors.push(random_on(ins, rng));
        }
    }
    let result = eval_diagram(d, &factors)?;
    let phi = crate::tensor::tensor_all(factors.iter())?;
    let oracle = simulate_direct(d, &phi)?;
    Ok(rel_err(&result.full_state(), &oracle))
}

/// Worst deviation after replacing a gate-free creator, annihilator or
/// scalar component by its reduction, or `None` when there is none.
pub fn reduction_deviation(d: &Diagram, rng: &mut impl Rng) -> EvalResult<Option<f64>> {
    let topo = Topology::build(d);
    let phi = random_on(d.input_wires(), rng);
    let oracle = simulate_direct(d, &phi)?;
    let mut worst: Option<f64> = None;
    for comp in topo.components() {
        let c = comp.index;
        if topo.has_gates(c) {
            continue;
        }
        let got = match comp.class {
            ComponentClass::Creator => reduce_creator(&topo, c)
                .and_then(|l| substitute_creator(&topo, c, &l))
                .map(|sub| simulate_direct(&sub, &phi)),
            ComponentClass::Annihilator => reduce_annihilator(&topo, c)
                .and_then(|o| substitute_annihilator(&topo, c, &o))
                .map(|sub| simulate_direct(&sub, &phi)),
            ComponentClass::Scalar => reduce_scalar(&topo, c)
                .map(|s| simulate_direct(&topo.without_component(c), &phi).map(|out| out.scale(s))),
            _ => continue,
        };
        let dev = match got {
            Ok(out) => rel_err(&out?, &oracle),
            Err(_) => f64::INFINITY,
        };
        worst = Some(worst.map_or(dev, |x: f64| x.max(dev)));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tolerance: f64,
    pub inject_random_v: bool,
    /// Evaluate corrupted canonical forms (negative control).
    pub corrupt_canonical: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { tolerance: TOLERANCE, inject_random_v: false, corrupt_canonical: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub seed: u64,
    pub semantics: String,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_rel_err: f64,
    pub pass: bool,
    pub entries: Vec<CheckEntry>,
}

fn trial(d: &Diagram, seed: u64, opts: &CheckOptions) -> Vec<CheckEntry> {
    let mut entries = Vec::new();
    for (r, regime) in ["product", "entangled"].iter().enumerate() {
        let s = sub_seed(seed, r as u64);
        let mut rng = rng_from_seed(s);
        let inst = restate(d, r == 0, &mut rng);
        let vmode = if opts.inject_random_v { VMode::Random(rng.random()) } else { VMode::Identity };
        let mut push = |name: &str, dev: EvalResult<Option<f64>>| {
            let dev = match dev {
                Ok(None) => return,
                Ok(Some(x)) => x,
                Err(_) => f64::INFINITY,
            };
            entries.push(CheckEntry {
                seed: s,
                semantics: format!("{regime}/{name}"),
                max_rel_err: dev,
                pass: dev <= opts.tolerance,
            });
        };
        push("path", path_deviation(&inst, &mut rng));
        push("component", component_deviation(&inst, &mut rng));
        push("canonical", canonical_deviation(&inst, vmode, opts.corrupt_canonical, &mut rng));
        let topo = Topology::build(&inst);
        let stageable = topo.components().iter().all(|c| match c.class {
            ComponentClass::Processor | ComponentClass::Annihilator => stage_with_gates(&topo, c.index).is_ok(),
            _ => true,
        });
        if stageable {
            push("diagram", diagram_deviation(&inst, &mut rng).map(Some));
        }
        push("reduction", reduction_deviation(&inst, &mut rng));
    }
    entries
}

/// Runs `trials` seeded trials on `d`. Each trial evaluates the diagram with
/// fresh product box states and with fresh entangled box states, and records
/// one entry per applicable semantics. Trials run in parallel; entries are
/// reported in trial order.
pub fn equivalence_check(d: &Diagram, trials: usize, seed: u64, opts: &CheckOptions) -> CheckReport {
    let entries: Vec<CheckEntry> = (0..trials.max(1) as u64)
        .into_par_iter()
        .map(|t| trial(d, sub_seed(seed, t), opts))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let max_rel_err = entries.iter().map(|e| e.max_rel_err).fold(0.0, f64::max);
    let pass = entries.iter().all(|e| e.pass);
    CheckReport { trials: trials.max(1), seed, tolerance: opts.tolerance, max_rel_err, pass, entries }
}
