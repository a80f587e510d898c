//! Command-line front end. [`run`] takes the argument vector and two sinks so
//! tests can drive it in-process.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::canon::{canonical_dsl, unravel_component, VMode};
use crate::diagram::{
    find_path, parse, parse::parse_state_literal, render, stage, stage_with_gates, ComponentClass, Diagram,
    Path, PathEnd, PathStep, RenderStyle, Topology,
};
use crate::eval::{
    component_map, eval_diagram, eval_path, simulate_direct, teleport_demo, wave_maps, MAX_MAP_DIM,
};
use crate::flow::{FlowMap, Port};
use crate::tensor::{rel_err, random_state, total_dim, Matrix, Polarity, State, WireDecl, WireId};
use crate::verify::{equivalence_check, CheckOptions};
use crate::C64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Style {
    Dot,
    Ascii,
}

#[derive(Debug, Parser)]
#[command(name = "qflow", version, about = "Evaluate and canonicalize rank-one box diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// State as JSON: {"wires":[{"id":1,"dim":2}],"polarity":"ket","amps":[[re,im],..]}.
    #[arg(long, conflicts_with = "input_dsl")]
    input: Option<PathBuf>,

    /// State literal such as `prod(ket 0, rand 3)`.
    #[arg(long)]
    input_dsl: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a diagram, and report its components.
    Check { file: PathBuf },
    /// Run the diagram directly on an input state.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Trace the path from an input wire and evaluate it.
    Flow {
        file: PathBuf,
        /// Wire name or id; defaults to the lowest input wire of each processor.
        #[arg(long)]
        start_wire: Option<String>,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        dump_maps: bool,
    },
    /// Stage every component and evaluate the diagram component by component.
    Prop {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        dump_maps: bool,
    },
    /// Canonical form of every component.
    Canon {
        file: PathBuf,
        /// Re-home internal segments through random unitaries.
        #[arg(long)]
        inject_random_v: bool,
    },
    /// Check all semantics against direct simulation on seeded trials.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = crate::verify::TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        inject_random_v: bool,
    },
    /// Draw the diagram.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Style::Dot)]
        style: Style,
    },
    /// Teleport a random qudit through every measurement branch.
    DemoTeleport {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Input literal on the single input wire instead of a seeded random state.
        #[arg(long)]
        input_dsl: Option<String>,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

struct Outcome {
    output: Output,
    pass: bool,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Self { output, pass: true }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code: 0 on success, 1 on a numeric failure, 2 on a usage or parse
/// error.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            let text = match outcome.output {
                Output::Json(v) => serde_json::to_string_pretty(&v).expect("json values serialize") + "\n",
                Output::Text(t) => t,
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            if outcome.pass {
                EXIT_OK
            } else {
                let _ = writeln!(err, "check failed");
                EXIT_NUMERIC
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn load(file: &PathBuf) -> Result<Diagram, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    parse(&text).map_err(|e| usage(format!("{}:\n{e}", file.display())))
}

/// Input state on `wires`; `|0…0⟩` when none is given.
fn read_input(args: &InputArgs, wires: &[WireDecl]) -> Result<State, CliError> {
    let s = if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let s: State = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        s.sorted()
    } else if let Some(lit) = &args.input_dsl {
        parse_state_literal(lit, wires).map_err(|e| usage(format!("--input-dsl: {e}")))?
    } else {
        State::basis(wires.to_vec(), 0).map_err(usage)?
    };
    if s.polarity() != Polarity::Ket || s.wires() != wires {
        return Err(usage(format!("input must be a ket on wires {:?}, got {}", ids(wires), s.describe())));
    }
    Ok(s)
}

fn ids(wires: &[WireDecl]) -> Vec<u32> {
    wires.iter().map(|w| w.id.0).collect()
}

fn wire_name(d: &Diagram, id: WireId) -> String {
    d.wire(id).map_or_else(|| id.to_string(), |w| w.name.clone())
}

fn seg_wires(topo: &Topology, segs: &[crate::diagram::SegId]) -> Vec<u32> {
    segs.iter().map(|&s| topo.segment(s).wire.0).collect()
}

fn component_labels(topo: &Topology, c: usize) -> Vec<String> {
    let d = topo.diagram();
    let mut elems: Vec<usize> = topo.component(c).halves.iter().map(|&h| topo.half(h).element).collect();
    elems.dedup();
    elems.sort_unstable();
    elems.dedup();
    elems.into_iter().map(|e| d.elements()[e].label().to_string()).collect()
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let text = cli.format == Format::Text;
    match &cli.command {
        Command::Check { file } => check(&load(file)?, text),
        Command::Simulate { file, input } => {
            let d = load(file)?;
            let phi = read_input(input, &d.input_wires())?;
            let psi = simulate_direct(&d, &phi).map_err(numeric)?;
            Ok(Outcome::ok(if text {
                Output::Text(format!("{}\n", psi.describe()))
            } else {
                Output::Json(json!({ "input": phi, "output": psi }))
            }))
        }
        Command::Flow { file, start_wire, input, dump_maps } => {
            flow(&load(file)?, start_wire.as_deref(), input, *dump_maps, text)
        }
        Command::Prop { file, input, dump_maps } => prop(&load(file)?, input, *dump_maps, text),
        Command::Canon { file, inject_random_v } => {
            let vmode = if *inject_random_v { VMode::Random(cli.seed) } else { VMode::Identity };
            canon(&load(file)?, vmode, text)
        }
        Command::Verify { file, trials, tolerance, inject_random_v } => {
            if *trials == 0 {
                return Err(usage("--trials must be at least 1"));
            }
            if !(*tolerance > 0.0) {
                return Err(usage("--tolerance must be positive"));
            }
            let d = load(file)?;
            let opts = CheckOptions { tolerance: *tolerance, inject_random_v: *inject_random_v, ..CheckOptions::default() };
            let report = equivalence_check(&d, *trials, cli.seed, &opts);
            let output = if text {
                let mut s = format!(
                    "trials {} seed {} max_rel_err {:.3e} {}\n",
                    report.trials,
                    report.seed,
                    report.max_rel_err,
                    if report.pass { "PASS" } else { "FAIL" }
                );
                for e in report.entries.iter().filter(|e| !e.pass) {
                    s += &format!("  seed {} {} rel_err {:.3e}\n", e.seed, e.semantics, e.max_rel_err);
                }
                Output::Text(s)
            } else {
                Output::Json(serde_json::to_value(&report).expect("report serializes"))
            };
            Ok(Outcome { output, pass: report.pass })
        }
        Command::Render { file, style } => {
            let style = match style {
                Style::Dot => RenderStyle::Dot,
                Style::Ascii => RenderStyle::Ascii,
            };
            Ok(Outcome::ok(Output::Text(render(&load(file)?, style))))
        }
        Command::DemoTeleport { dim, input_dsl } => {
            if *dim < 2 {
                return Err(usage("--dim must be at least 2"));
            }
            let wire = [WireDecl::new(1, *dim)];
            let phi = match input_dsl {
                Some(lit) => parse_state_literal(lit, &wire).map_err(|e| usage(format!("--input-dsl: {e}")))?,
                None => random_state(wire.to_vec(), cli.seed).map_err(numeric)?,
            };
            let report = teleport_demo(&phi, *dim).map_err(numeric)?;
            let output = if text {
                let mut s = format!("{:>3} {:>3} {:>12} {:>12} {:>12}\n", "j", "k", "probability", "fidelity", "uncorrected");
                for o in &report.outcomes {
                    s += &format!(
                        "{:>3} {:>3} {:>12.9} {:>12.9} {:>12.9}\n",
                        o.j, o.k, o.probability, o.fidelity, o.uncorrected_fidelity
                    );
                }
                s += if report.pass { "PASS\n" } else { "FAIL\n" };
                Output::Text(s)
            } else {
                Output::Json(json!({ "input": phi, "report": report }))
            };
            Ok(Outcome { output, pass: report.pass })
        }
    }
}

fn check(d: &Diagram, text: bool) -> Result<Outcome, CliError> {
    let topo = Topology::build(d);
    let comps: Vec<Value> = topo
        .components()
        .iter()
        .map(|c| {
            let staging = match c.class {
                ComponentClass::Freeline => Value::Null,
                _ => match stage_with_gates(&topo, c.index) {
                    Ok(plan) => json!({ "ok": true, "waves": plan.waves.len() }),
                    Err(e) => json!({ "ok": false, "error": e.to_string() }),
                },
            };
            json!({
                "index": c.index,
                "class": c.class,
                "boxes": component_labels(&topo, c.index),
                "inputs": seg_wires(&topo, &c.inputs),
                "outputs": seg_wires(&topo, &c.outputs),
                "staging": staging,
            })
        })
        .collect();
    let wires: Vec<Value> = d.wires().iter().map(|w| json!({ "id": w.id, "name": w.name, "dim": w.dim })).collect();
    let report = json!({
        "valid": true,
        "wires": wires,
        "elements": d.elements().len(),
        "bipartite": topo.is_bipartite_diagram(),
        "has_unitaries": d.has_unitaries(),
        "components": comps,
    });
    if !text {
        return Ok(Outcome::ok(Output::Json(report)));
    }
    let mut s = format!("valid: {} wires, {} elements\n", d.wires().len(), d.elements().len());
    for c in topo.components() {
        s += &format!(
            "component {} {} in {:?} out {:?} boxes {:?}\n",
            c.index,
            c.class,
            seg_wires(&topo, &c.inputs),
            seg_wires(&topo, &c.outputs),
            component_labels(&topo, c.index)
        );
    }
    Ok(Outcome::ok(Output::Text(s)))
}

fn resolve_wire(d: &Diagram, spec: &str) -> Result<WireDecl, CliError> {
    let w = match spec.parse::<u32>() {
        Ok(id) => d.wire(WireId(id)),
        Err(_) => d.wire_by_name(spec),
    };
    w.map(|w| w.decl()).ok_or_else(|| usage(format!("unknown wire `{spec}`")))
}

/// Linear map of a through path, column by column.
fn path_map(topo: &Topology, p: &Path, start: WireDecl) -> Result<FlowMap, CliError> {
    let end = topo.diagram().wire(p.end_wire).expect("path ends on a wire").decl();
    let mut m = Matrix::zeros(end.dim, start.dim);
    for i in 0..start.dim {
        let col = eval_path(topo, p, &State::basis(vec![start], i).map_err(numeric)?).map_err(numeric)?;
        for (r, a) in col.amps().iter().enumerate() {
            m[(r, i)] = *a;
        }
    }
    FlowMap::new(vec![Port::new(start, Polarity::Ket)], vec![Port::new(end, Polarity::Ket)], m, false).map_err(numeric)
}

fn path_json(d: &Diagram, p: &Path) -> Value {
    let steps: Vec<Value> = p
        .steps
        .iter()
        .filter_map(|s| match s {
            PathStep::Cross { element, kind, entry, exit, .. } => Some(json!({
                "box": d.elements()[*element].label(),
                "half": kind.symbol(),
                "from": wire_name(d, *entry),
                "to": wire_name(d, *exit),
            })),
            PathStep::Gate { element, direction, .. } => Some(json!({
                "gate": d.elements()[*element].label(),
                "direction": direction,
            })),
            PathStep::Leg { .. } => None,
        })
        .collect();
    let boxes: Vec<&str> = p.box_order().iter().map(|&e| d.elements()[e].label()).collect();
    json!({
        "start_wire": wire_name(d, p.start_wire),
        "end_wire": wire_name(d, p.end_wire),
        "end": p.end,
        "through": p.is_through(),
        "boxes": boxes,
        "steps": steps,
    })
}

fn flow(d: &Diagram, start: Option<&str>, input: &InputArgs, dump: bool, text: bool) -> Result<Outcome, CliError> {
    let topo = Topology::build(d);
    let starts: Vec<WireDecl> = match start {
        Some(spec) => {
            let w = resolve_wire(d, spec)?;
            if !d.is_input(w.id) {
                return Err(usage(format!("wire `{spec}` is not an input wire")));
            }
            vec![w]
        }
        None => topo
            .components()
            .iter()
            .filter(|c| c.class == ComponentClass::Processor)
            .filter_map(|c| c.inputs.first().map(|&s| topo.segment(s).wire_decl()))
            .collect(),
    };
    if starts.is_empty() {
        return Err(usage("no processor component to start a path in; pass --start-wire"));
    }
    let mut paths = Vec::new();
    let mut lines = String::new();
    for w in starts {
        let phi = read_input(input, &[w])?;
        let p = match find_path(&topo, w.id, PathEnd::Bottom) {
            Ok(p) => p,
            Err(e) => {
                lines += &format!("{}: {e}\n", wire_name(d, w.id));
                paths.push(json!({ "start_wire": wire_name(d, w.id), "error": e.to_string() }));
                continue;
            }
        };
        let mut entry = path_json(d, &p);
        let boxes = entry["boxes"].clone();
        if p.is_through() {
            let psi = eval_path(&topo, &p, &phi).map_err(numeric)?;
            lines += &format!(
                "{} -> {} via {}: {}\n",
                wire_name(d, p.start_wire),
                wire_name(d, p.end_wire),
                boxes,
                psi.describe()
            );
            entry["input"] = json!(phi);
            entry["output"] = json!(psi);
            if dump {
                entry["map"] = path_map(&topo, &p, w)?.to_json();
            }
        } else {
            lines += &format!(
                "{} returns to the bottom of {} via {}\n",
                wire_name(d, p.start_wire),
                wire_name(d, p.end_wire),
                boxes
            );
        }
        paths.push(entry);
    }
    Ok(Outcome::ok(if text { Output::Text(lines) } else { Output::Json(json!({ "paths": paths })) }))
}

/// Digits of basis index `i` over `wires`, first wire most significant.
fn digits(mut i: usize, wires: &[WireDecl]) -> Vec<usize> {
    let mut out = vec![0; wires.len()];
    for (k, w) in wires.iter().enumerate().rev() {
        out[k] = i % w.dim;
        i /= w.dim;
    }
    out
}

/// Component-wise evaluation of the whole diagram on an arbitrary input,
/// expanded over the input basis so each term factors wire by wire.
fn prop_output(d: &Diagram, phi: &State) -> Result<State, CliError> {
    let wires = d.input_wires();
    let mut acc: Option<State> = None;
    for (i, a) in phi.amps().iter().enumerate() {
        if *a == C64::new(0.0, 0.0) {
            continue;
        }
        let factors: Vec<State> = wires
            .iter()
            .zip(digits(i, &wires))
            .map(|(w, k)| State::basis(vec![*w], k).expect("digit within dimension"))
            .collect();
        let term = eval_diagram(d, &factors).map_err(numeric)?.full_state().scale(*a);
        acc = Some(match acc {
            None => term,
            Some(s) => s.add(&term).map_err(numeric)?,
        });
    }
    match acc {
        Some(s) => Ok(s),
        None => {
            let zero = eval_diagram(d, &wires.iter().map(|w| State::basis(vec![*w], 0).expect("dim ≥ 1")).collect::<Vec<_>>())
                .map_err(numeric)?
                .full_state();
            Ok(zero.scale(C64::new(0.0, 0.0)))
        }
    }
}

fn prop(d: &Diagram, input: &InputArgs, dump: bool, text: bool) -> Result<Outcome, CliError> {
    let topo = Topology::build(d);
    let phi = read_input(input, &d.input_wires())?;
    if total_dim(&d.input_wires()).map_err(numeric)? > MAX_MAP_DIM && phi.amps().iter().filter(|a| a.norm() > 0.0).count() > MAX_MAP_DIM {
        return Err(numeric("input has too many nonzero amplitudes for component-wise evaluation"));
    }
    let mut comps = Vec::new();
    let mut lines = String::new();
    for c in topo.components() {
        if c.class == ComponentClass::Freeline {
            continue;
        }
        let mut entry = json!({ "index": c.index, "class": c.class, "boxes": component_labels(&topo, c.index) });
        match stage_with_gates(&topo, c.index) {
            Ok(plan) => {
                let waves: Vec<Value> = plan
                    .waves
                    .iter()
                    .map(|w| {
                        let labels: Vec<String> = w.halves.iter().map(|&h| topo.half(h).label.clone()).collect();
                        json!({ "kind": w.kind.symbol(), "halves": labels })
                    })
                    .collect();
                lines += &format!("component {} {}: {} waves {}\n", c.index, c.class, waves.len(), json!(waves));
                entry["waves"] = json!(waves);
                entry["gate_free"] = json!(stage(&topo, c.index).is_ok());
                if dump {
                    entry["maps"] = match (wave_maps(&topo, &plan), component_map(&topo, &plan)) {
                        (Ok(ws), Ok(total)) => json!({
                            "waves": ws.iter().map(FlowMap::to_json).collect::<Vec<_>>(),
                            "component": total.to_json(),
                        }),
                        (Err(e), _) | (_, Err(e)) => json!({ "error": e.to_string() }),
                    };
                }
            }
            Err(e) => {
                lines += &format!("component {} {}: {e}\n", c.index, c.class);
                entry["staging_error"] = json!(e.to_string());
            }
        }
        comps.push(entry);
    }
    let psi = prop_output(d, &phi)?;
    let oracle = simulate_direct(d, &phi).map_err(numeric)?;
    let dev = rel_err(&psi, &oracle);
    let pass = dev <= crate::verify::TOLERANCE;
    lines += &format!("output {}\nrel_err vs direct {:.3e}\n", psi.describe(), dev);
    let output = if text {
        Output::Text(lines)
    } else {
        Output::Json(json!({ "components": comps, "input": phi, "output": psi, "rel_err_vs_direct": dev }))
    };
    Ok(Outcome { output, pass })
}

fn canon(d: &Diagram, vmode: VMode, text: bool) -> Result<Outcome, CliError> {
    let topo = Topology::build(d);
    let mut forms = Vec::new();
    let mut lines = String::new();
    for c in topo.components() {
        if c.class == ComponentClass::Freeline {
            continue;
        }
        match unravel_component(&topo, c.index, vmode).and_then(|cf| Ok((cf.to_json()?, canonical_dsl(&cf)?))) {
            Ok((mut v, dsl)) => {
                lines += &format!("# component {} ({})\n{dsl}\n", c.index, c.class);
                v["dsl"] = json!(dsl);
                forms.push(v);
            }
            Err(e) => {
                lines += &format!("# component {} ({}): {e}\n", c.index, c.class);
                forms.push(json!({ "component": c.index, "class": c.class, "error": e.to_string() }));
            }
        }
    }
    Ok(Outcome::ok(if text { Output::Text(lines) } else { Output::Json(json!({ "forms": forms })) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_row_major() {
        let w = [WireDecl::new(1, 2), WireDecl::new(2, 3)];
        assert_eq!(digits(0, &w), vec![0, 0]);
        assert_eq!(digits(4, &w), vec![1, 1]);
        assert_eq!(digits(5, &w), vec![1, 2]);
    }

    #[test]
    fn bad_flag_is_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["qflow", "check", "--bogus"], &mut o, &mut e), EXIT_USAGE);
        assert!(!e.is_empty());
    }

    #[test]
    fn help_goes_to_stdout() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["qflow", "--help"], &mut o, &mut e), EXIT_OK);
        assert!(String::from_utf8(o).unwrap().contains("demo-teleport"));
    }
}
