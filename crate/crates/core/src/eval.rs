//! The three semantics of a diagram and what is built on them.
//!
//! [`simulate_direct`] applies every element in order and is the reference
//! all other evaluations are compared to. [`eval_path`] composes the flow maps
//! met along a bottom-to-top path. [`eval_component`] runs a staged component
//! wave by wave. [`eval_diagram`] splits a whole diagram into components and
//! evaluates each one on its own factor of the input.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{
    stage_with_gates, ComponentClass, Diagram, DiagramError, Direction, Element, Gate, HalfBox,
    HalfKind, Path, PathError, PathStep, QBox, SegId, StageError, StagePlan, Topology, Wire,
};
use crate::flow::{compose, f_map, g_map, ket_transfer, tensor_of_maps, FlowError, FlowMap, Orientation, Port, PortVector};
use crate::tensor::{
    apply_rank_one, apply_single_wire, apply_unitary, contract, inner, rel_err, tensor_all,
    tensor_product, total_dim, Matrix, Polarity, State, TensorError, WireDecl, WireId,
};
use crate::C64;

/// Largest dense map `component_map` will build.
pub const MAX_MAP_DIM: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("input state is on {found:?}, the diagram needs {expected:?}")]
    InputMismatch { expected: Vec<WireDecl>, found: Vec<WireDecl> },

    #[error("input must be a ket")]
    InputPolarity,

    #[error("path must run from the bottom to the top of the diagram")]
    NotThrough,

    #[error("incompatible input factorization: {0}")]
    IncompatibleFactorization(String),

    #[error("caps do not match the output wires: {0}")]
    CapMismatch(String),

    #[error("element {element} is not a projector")]
    NotAProjector { element: usize },

    #[error("not normalized: {0}")]
    NotNormalized(String),

    #[error("component {component} is a {class}")]
    WrongClass { component: usize, class: ComponentClass },

    #[error("dense map would exceed {MAX_MAP_DIM} rows or columns")]
    TooLarge,

    #[error("teleportation needs dimension at least 2, got {0}")]
    BadDimension(usize),

    #[error(transparent)]
    Stage(#[from] StageError),

    #[error(transparent)]
    Path(#[from] PathError),

    #[error(transparent)]
    Flow(#[from] FlowError),

    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

pub type EvalResult<T> = Result<T, EvalError>;

fn check_input(expected: &[WireDecl], phi: &State) -> EvalResult<State> {
    if phi.polarity() != Polarity::Ket {
        return Err(EvalError::InputPolarity);
    }
    let phi = phi.sorted();
    let mut want = expected.to_vec();
    want.sort_by_key(|w| w.id);
    if phi.wires() != want.as_slice() {
        return Err(EvalError::InputMismatch { expected: want, found: phi.wires().to_vec() });
    }
    Ok(phi)
}

/// Order in which [`simulate_direct`] applies elements: a topological order
/// of the per-wire succession graph that always picks the lowest ready
/// element index. Moving a box in time without changing any wire's event
/// order leaves this order unchanged.
pub fn schedule(d: &Diagram) -> Vec<usize> {
    let n = d.elements().len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut indeg = vec![0usize; n];
    for w in d.live_wires() {
        let events = d.timeline(w.id);
        for pair in events.windows(2) {
            let (a, b) = (pair[0].element, pair[1].element);
            if a != b && succ[a].insert(b) {
                indeg[b] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    order
}

fn apply_element(e: &Element, state: &State) -> EvalResult<State> {
    Ok(match e {
        Element::Q(q) => apply_rank_one(&q.lambda, &q.omega, state)?,
        Element::Half(h) => match h.kind {
            HalfKind::Omega => contract(&h.state, state)?,
            HalfKind::Lambda => tensor_product(&h.state, state)?.sorted(),
        },
        Element::Unitary(g) => apply_unitary(&g.matrix, g.wire, state)?,
    })
}

/// Applies every element of `d` to `phi`, a ket on the input wires. The
/// result is a ket on the output wires in ascending id order.
pub fn simulate_direct(d: &Diagram, phi: &State) -> EvalResult<State> {
    let mut state = check_input(&d.input_wires(), phi)?;
    for i in schedule(d) {
        state = apply_element(&d.elements()[i], &state)?;
    }
    Ok(state)
}

fn gate_matrix(topo: &Topology, element: usize) -> &Matrix {
    match &topo.diagram().elements()[element] {
        Element::Unitary(g) => &g.matrix,
        _ => unreachable!("gate steps refer to unitaries"),
    }
}

fn half_orientation(state: &State, entry: WireId) -> Orientation {
    if state.wire_ids()[0] == entry {
        Orientation::Declared
    } else {
        Orientation::Op
    }
}

fn path_input(p: &Path, topo: &Topology, phi_in: &State) -> EvalResult<State> {
    if !p.is_through() {
        return Err(EvalError::NotThrough);
    }
    let dim = topo.diagram().wire(p.start_wire).map_or(0, |w| w.dim);
    check_input(&[WireDecl { id: p.start_wire, dim }], phi_in)
}

/// Evaluates a bottom-to-top path on `phi_in`, a ket on its start wire, by
/// composing `g` maps at Ω halves and `f` maps at Λ halves. Unitaries act on
/// the ket on upward legs and on the bra (as `⟨x|U`) on downward legs.
pub fn eval_path(topo: &Topology, p: &Path, phi_in: &State) -> EvalResult<State> {
    let mut cur = path_input(p, topo, phi_in)?;
    for step in &p.steps {
        match step {
            PathStep::Leg { .. } => {}
            PathStep::Gate { element, wire, .. } => {
                cur = apply_single_wire(gate_matrix(topo, *element), *wire, &cur)?;
            }
            PathStep::Cross { half, kind, entry, exit, .. } => {
                let state = &topo.half(*half).state;
                let map = match kind {
                    HalfKind::Omega => g_map(state, &[*entry], &[*exit])?,
                    HalfKind::Lambda => f_map(state, &[*entry], &[*exit])?,
                };
                cur = map.apply_state(&cur)?;
            }
        }
    }
    Ok(cur)
}

/// The same path evaluated with the antilinear ket-to-ket transfers only;
/// downward legs apply `U†`.
pub fn eval_path_antilinear(topo: &Topology, p: &Path, phi_in: &State) -> EvalResult<State> {
    let mut cur = path_input(p, topo, phi_in)?;
    for step in &p.steps {
        match step {
            PathStep::Leg { .. } => {}
            PathStep::Gate { element, wire, direction } => {
                let u = gate_matrix(topo, *element);
                let m = match direction {
                    Direction::Up => u.clone(),
                    Direction::Down => u.adjoint(),
                };
                cur = apply_single_wire(&m, *wire, &cur)?;
            }
            PathStep::Cross { half, entry, .. } => {
                let state = &topo.half(*half).state;
                cur = ket_transfer(state, half_orientation(state, *entry))?.apply_state(&cur)?;
            }
        }
    }
    Ok(cur)
}

fn gate_on_port(v: &PortVector, port: Port, u: &Matrix) -> EvalResult<PortVector> {
    let m = match port.polarity {
        Polarity::Ket => u.clone(),
        Polarity::Bra => u.transpose(),
    };
    Ok(FlowMap::new(vec![port], vec![port], m, false)?.apply_on(v)?)
}

/// Gates met by a freshly produced segment value, in the order it meets them.
fn segment_gates(topo: &Topology, s: SegId, dir: Direction) -> Vec<&Matrix> {
    let gates = topo.segment(s).gates.iter().map(|g| &g.matrix);
    match dir {
        Direction::Up => gates.collect(),
        Direction::Down => gates.rev().collect(),
    }
}

fn seg_port(topo: &Topology, s: SegId, polarity: Polarity) -> Port {
    Port::new(topo.segment(s).decl(), polarity)
}

fn component_input(topo: &Topology, plan: &StagePlan, phi_in: &State) -> EvalResult<State> {
    let comp = topo.component(plan.component);
    let phi = check_input(&topo.input_decls(comp.index), phi_in)?;
    let by_wire: BTreeMap<WireId, SegId> =
        comp.inputs.iter().map(|&s| (topo.segment(s).wire, s)).collect();
    Ok(phi.relabel(|w| by_wire[&w].as_wire())?)
}

/// The map of one half with the gates on its produced segments folded in,
/// in segment-labelled space.
fn half_map(topo: &Topology, plan: &StagePlan, h: crate::diagram::HalfId) -> EvalResult<FlowMap> {
    let node = topo.half(h);
    let state = node.segment_state();
    let ins: Vec<WireId> = plan.incoming(topo, h).iter().map(|s| s.as_wire()).collect();
    let outs: Vec<WireId> = plan.outgoing(topo, h).iter().map(|s| s.as_wire()).collect();
    Ok(match node.kind {
        HalfKind::Omega => g_map(&state, &ins, &outs)?,
        HalfKind::Lambda => f_map(&state, &ins, &outs)?,
    })
}

fn produced_direction(kind: HalfKind) -> Direction {
    match kind {
        HalfKind::Omega => Direction::Down,
        HalfKind::Lambda => Direction::Up,
    }
}

/// Evaluates a staged component on `phi_in`, a ket on its input wires. Each
/// wave applies the `g` (Ω wave) or `f` (Λ wave) maps of its halves, with the
/// identity on every segment the wave does not touch. The result is a ket on
/// the component's output wires; an annihilator yields a scalar state.
pub fn eval_component(topo: &Topology, plan: &StagePlan, phi_in: &State) -> EvalResult<State> {
    let comp = topo.component(plan.component);
    let phi = component_input(topo, plan, phi_in)?;
    let mut cur = PortVector::from_state(&phi);
    for &s in &comp.inputs {
        for u in segment_gates(topo, s, Direction::Up) {
            cur = gate_on_port(&cur, seg_port(topo, s, Polarity::Ket), u)?;
        }
    }
    for wave in &plan.waves {
        for &h in &wave.halves {
            cur = half_map(topo, plan, h)?.apply_on(&cur)?;
            let dir = produced_direction(wave.kind);
            let polarity = match dir {
                Direction::Up => Polarity::Ket,
                Direction::Down => Polarity::Bra,
            };
            for s in plan.outgoing(topo, h) {
                for u in segment_gates(topo, s, dir) {
                    cur = gate_on_port(&cur, seg_port(topo, s, polarity), u)?;
                }
            }
        }
    }
    let order: Vec<WireId> = comp.outputs.iter().map(|s| s.as_wire()).collect();
    let out = cur.reorder(&order)?.to_state()?;
    Ok(out.relabel(|w| topo.segment(SegId::from_wire(w)).wire)?)
}

fn gate_chain(topo: &Topology, s: SegId, dir: Direction) -> EvalResult<FlowMap> {
    let polarity = match dir {
        Direction::Up => Polarity::Ket,
        Direction::Down => Polarity::Bra,
    };
    let port = seg_port(topo, s, polarity);
    let mut m = FlowMap::identity(vec![port])?;
    for u in segment_gates(topo, s, dir) {
        let g = match polarity {
            Polarity::Ket => u.clone(),
            Polarity::Bra => u.transpose(),
        };
        m = compose(&FlowMap::new(vec![port], vec![port], g, false)?, &m)?;
    }
    Ok(m)
}

fn guard(ports: &[Port]) -> EvalResult<()> {
    let wires: Vec<WireDecl> = ports.iter().map(|p| p.wire).collect();
    match total_dim(&wires) {
        Ok(n) if n <= MAX_MAP_DIM => Ok(()),
        _ => Err(EvalError::TooLarge),
    }
}

/// One dense map per wave (preceded by the input gates, when there are any),
/// each the tensor product of the wave's half maps and identities on the
/// segments passing through. Maps act on segment-labelled ports.
pub fn wave_maps(topo: &Topology, plan: &StagePlan) -> EvalResult<Vec<FlowMap>> {
    let comp = topo.component(plan.component);
    let mut live: Vec<Port> = comp.inputs.iter().map(|&s| seg_port(topo, s, Polarity::Ket)).collect();
    let mut maps = Vec::new();
    if comp.inputs.iter().any(|&s| !topo.segment(s).gates.is_empty()) {
        let chains: Vec<FlowMap> =
            comp.inputs.iter().map(|&s| gate_chain(topo, s, Direction::Up)).collect::<EvalResult<_>>()?;
        maps.push(tensor_of_maps(&chains)?);
    }
    for wave in &plan.waves {
        let mut parts = Vec::new();
        let mut consumed = BTreeSet::new();
        let mut produced = Vec::new();
        for &h in &wave.halves {
            let m = half_map(topo, plan, h)?;
            consumed.extend(m.input_ids());
            let dir = produced_direction(wave.kind);
            let outs = plan.outgoing(topo, h);
            let m = if outs.is_empty() {
                m
            } else {
                let chains: Vec<FlowMap> =
                    outs.iter().map(|&s| gate_chain(topo, s, dir)).collect::<EvalResult<_>>()?;
                compose(&tensor_of_maps(&chains)?, &m)?
            };
            produced.extend_from_slice(m.outputs());
            parts.push(m);
        }
        let pass: Vec<Port> = live.iter().filter(|p| !consumed.contains(&p.id())).copied().collect();
        if !pass.is_empty() {
            parts.push(FlowMap::identity(pass.clone())?);
        }
        let m = tensor_of_maps(&parts)?;
        guard(m.inputs())?;
        guard(m.outputs())?;
        live = pass;
        live.extend(produced);
        maps.push(m);
    }
    Ok(maps)
}

/// The whole component as one dense map from input to output segments.
pub fn component_map(topo: &Topology, plan: &StagePlan) -> EvalResult<FlowMap> {
    let comp = topo.component(plan.component);
    let ins: Vec<Port> = comp.inputs.iter().map(|&s| seg_port(topo, s, Polarity::Ket)).collect();
    guard(&ins)?;
    let mut acc = FlowMap::identity(ins)?;
    for m in wave_maps(topo, plan)? {
        acc = compose(&m, &acc)?;
    }
    let order: Vec<WireId> = comp.outputs.iter().map(|s| s.as_wire()).collect();
    Ok(acc.reorder_outputs(&order)?)
}

/// Output of [`eval_diagram`]: the full output state is `scalar` times the
/// tensor product of the factors. Only that product is meaningful; how
/// scalars are spread between the factors is not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactoredResult {
    pub factors: Vec<(Vec<WireId>, State)>,
    #[serde(serialize_with = "ser_c64")]
    pub scalar: C64,
    pub annihilated: bool,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl FactoredResult {
    pub fn full_state(&self) -> State {
        let prod = tensor_all(self.factors.iter().map(|(_, s)| s)).expect("factors are disjoint");
        prod.sorted().scale(self.scalar)
    }

    /// `scalar` times the coefficients of the factors along `reference`: the
    /// number `M` with `full_state() == M · reference` when the output is
    /// parallel to `reference`.
    pub fn coefficient_along(&self, reference: &State) -> EvalResult<C64> {
        let full = self.full_state();
        let den = inner(reference, reference)?;
        Ok(inner(reference, &full)? / den)
    }
}

/// The diagram restricted to one component.
fn isolate(topo: &Topology, c: usize) -> Diagram {
    let others: Vec<usize> = (0..topo.components().len()).filter(|&k| k != c).collect();
    topo.without_components(&others)
}

/// Evaluates a diagram component by component. `inputs` must partition the
/// input wires, and each factor must lie inside the inputs of one component
/// or entirely on free lines.
pub fn eval_diagram(d: &Diagram, inputs: &[State]) -> EvalResult<FactoredResult> {
    let topo = Topology::build(d);
    let mut seen: Vec<WireDecl> = Vec::new();
    for f in inputs {
        if f.polarity() != Polarity::Ket {
            return Err(EvalError::InputPolarity);
        }
        seen.extend_from_slice(f.wires());
    }
    seen.sort_by_key(|w| w.id);
    if seen != d.input_wires() {
        return Err(EvalError::InputMismatch { expected: d.input_wires(), found: seen });
    }
    let mut per_component: BTreeMap<usize, Vec<&State>> = BTreeMap::new();
    let mut free: Vec<&State> = Vec::new();
    for f in inputs {
        let owners: BTreeSet<usize> = f
            .wire_ids()
            .iter()
            .map(|&w| topo.component_of_segment(topo.input_segment(w).expect("input wire")))
            .collect();
        let all_free = owners.iter().all(|&c| topo.component(c).class == ComponentClass::Freeline);
        if all_free {
            free.push(f);
        } else if owners.len() == 1 {
            per_component.entry(*owners.iter().next().unwrap()).or_default().push(f);
        } else {
            return Err(EvalError::IncompatibleFactorization(format!(
                "factor on {:?} spans components {:?}",
                f.wire_ids(),
                owners
            )));
        }
    }
    let mut factors = Vec::new();
    let mut scalar = C64::new(1.0, 0.0);
    for comp in topo.components() {
        let c = comp.index;
        let phi = || tensor_all(per_component.get(&c).into_iter().flatten().copied());
        match comp.class {
            ComponentClass::Freeline => {}
            ComponentClass::Processor | ComponentClass::Annihilator => {
                let plan = stage_with_gates(&topo, c)?;
                let out = eval_component(&topo, &plan, &phi()?)?;
                if comp.class == ComponentClass::Processor {
                    factors.push((out.wire_ids(), out));
                } else {
                    scalar *= out.as_scalar().expect("annihilators have no outputs");
                }
            }
            ComponentClass::Creator | ComponentClass::Scalar => {
                let out = simulate_direct(&isolate(&topo, c), &State::scalar(C64::new(1.0, 0.0)))?;
                if comp.class == ComponentClass::Creator {
                    factors.push((out.wire_ids(), out));
                } else {
                    scalar *= out.as_scalar().expect("scalar components have no outputs");
                }
            }
        }
    }
    for f in free {
        let mut s = f.clone();
        for w in f.wire_ids() {
            let seg = topo.segment(topo.input_segment(w).expect("input wire"));
            for g in &seg.gates {
                s = apply_unitary(&g.matrix, w, &s)?;
            }
        }
        factors.push((s.wire_ids(), s));
    }
    factors.sort_by_key(|(ids, _)| ids.iter().min().copied());
    let annihilated = scalar == C64::new(0.0, 0.0) || factors.iter().any(|(_, s)| s.is_zero());
    if annihilated {
        scalar = C64::new(0.0, 0.0);
    }
    Ok(FactoredResult { factors, scalar, annihilated })
}

/// `(Θ, Ψ)` for the output `Ψ` of `d` on `phi`. The caps must be kets on
/// disjoint wire sets that together cover the output wires.
pub fn amplitude(theta: &[State], d: &Diagram, phi: &State) -> EvalResult<C64> {
    let mut covered: Vec<WireDecl> = theta.iter().flat_map(|t| t.wires().to_vec()).collect();
    covered.sort_by_key(|w| w.id);
    if covered != d.output_wires() {
        return Err(EvalError::CapMismatch(format!(
            "caps cover {:?}, outputs are {:?}",
            covered.iter().map(|w| w.id).collect::<Vec<_>>(),
            d.output_wires().iter().map(|w| w.id).collect::<Vec<_>>()
        )));
    }
    let cap = tensor_all(theta.iter()).map_err(|e| EvalError::CapMismatch(e.to_string()))?;
    let psi = simulate_direct(d, phi)?;
    Ok(inner(&cap, &psi)?)
}

const NORM_TOL: f64 = 1e-9;

/// Probability `‖Ψ‖²` of the branch a projector diagram describes.
pub fn outcome_probability(d: &Diagram, phi: &State) -> EvalResult<f64> {
    for (i, e) in d.elements().iter().enumerate() {
        match e {
            Element::Q(q) => {
                if rel_err(&q.omega, &q.lambda) > NORM_TOL {
                    return Err(EvalError::NotAProjector { element: i });
                }
                if (q.omega.norm() - 1.0).abs() > NORM_TOL {
                    return Err(EvalError::NotNormalized(format!("element {i}")));
                }
            }
            Element::Half(_) => return Err(EvalError::NotAProjector { element: i }),
            Element::Unitary(_) => {}
        }
    }
    if (phi.norm() - 1.0).abs() > NORM_TOL {
        return Err(EvalError::NotNormalized("input state".into()));
    }
    Ok(simulate_direct(d, phi)?.norm_sqr())
}

fn omega_root(d: usize, k: i64) -> C64 {
    let theta = 2.0 * std::f64::consts::PI * (k.rem_euclid(d as i64) as f64) / d as f64;
    C64::from_polar(1.0, theta)
}

/// Shift `X|m⟩ = |m+1⟩`.
pub fn shift(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |r, c| if r == (c + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Clock `Z|m⟩ = ω^m |m⟩`.
pub fn clock(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |r, c| if r == c { omega_root(d, r as i64) } else { C64::new(0.0, 0.0) })
}

fn mat_pow(m: &Matrix, k: usize) -> Matrix {
    (0..k).fold(Matrix::identity(m.nrows(), m.ncols()), |acc, _| &acc * m)
}

/// `B_jk = d^{-1/2} Σ_m ω^{jm} |m⟩|m+k⟩` on two wires of dimension `d`.
pub fn bell_basis_state(d: usize, j: usize, k: usize, wires: [WireId; 2]) -> State {
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let norm = (d as f64).sqrt().recip();
    for m in 0..d {
        amps[m * d + (m + k) % d] = omega_root(d, (j * m) as i64) * norm;
    }
    State::ket(vec![WireDecl { id: wires[0], dim: d }, WireDecl { id: wires[1], dim: d }], amps)
        .expect("two small wires")
}

/// Correction `Z^j X^{-k}` for outcome `B_jk`.
pub fn teleport_correction(d: usize, j: usize, k: usize) -> Matrix {
    mat_pow(&clock(d), j % d) * mat_pow(&shift(d), (d - k % d) % d)
}

/// The teleportation branch for outcome `(j, k)`: a normalized resource on
/// `(b, c)`, the projector onto `B_jk` on `(a, b)` and, when `correct`, the
/// correction on `c`.
pub fn teleport_diagram(d: usize, j: usize, k: usize, correct: bool) -> Diagram {
    let wires = vec![Wire::new(1, "a", d), Wire::new(2, "b", d), Wire::new(3, "c", d)];
    let resource = bell_basis_state(d, 0, 0, [WireId(2), WireId(3)]);
    let b = bell_basis_state(d, j, k, [WireId(1), WireId(2)]);
    let mut elements = vec![
        Element::Half(HalfBox {
            kind: HalfKind::Lambda,
            time: 1,
            slot: 1,
            wires: vec![WireId(2), WireId(3)],
            state: resource,
            label: "R".into(),
        }),
        Element::Q(QBox { time: 2, wires: vec![WireId(1), WireId(2)], omega: b.clone(), lambda: b, label: format!("B{j}{k}") }),
    ];
    if correct {
        elements.push(Element::Unitary(Gate {
            time: 3,
            wire: WireId(3),
            matrix: teleport_correction(d, j, k),
            label: "C".into(),
        }));
    }
    Diagram::new(wires, elements).expect("teleport diagram is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportOutcome {
    pub j: usize,
    pub k: usize,
    pub probability: f64,
    pub fidelity: f64,
    pub uncorrected_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportReport {
    pub dim: usize,
    pub outcomes: Vec<TeleportOutcome>,
    pub pass: bool,
}

fn fidelity(a: &State, b: &State) -> f64 {
    let overlap = inner(a, b).map(|z| z.norm_sqr()).unwrap_or(0.0);
    let den = a.norm_sqr() * b.norm_sqr();
    if den == 0.0 {
        0.0
    } else {
        overlap / den
    }
}

/// Runs every measurement branch of one-qudit teleportation on `input` (a ket
/// on one wire of dimension `d`, normalized here).
pub fn teleport_demo(input: &State, d: usize) -> EvalResult<TeleportReport> {
    if d < 2 {
        return Err(EvalError::BadDimension(d));
    }
    if input.dims() != [d] {
        return Err(EvalError::InputMismatch {
            expected: vec![WireDecl { id: WireId(1), dim: d }],
            found: input.wires().to_vec(),
        });
    }
    if input.is_zero() {
        return Err(EvalError::NotNormalized("zero input".into()));
    }
    let phi = input.normalized().relabel(|_| WireId(1))?;
    let on_c = phi.relabel(|_| WireId(3))?;
    let tol = 1e-9;
    let mut outcomes = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            let b = bell_basis_state(d, j, k, [WireId(1), WireId(2)]);
            let run = |correct| -> EvalResult<(f64, State)> {
                let out = simulate_direct(&teleport_diagram(d, j, k, correct), &phi)?;
                Ok((out.norm_sqr(), contract(&b, &out)?))
            };
            let (probability, corrected) = run(true)?;
            let (_, raw) = run(false)?;
            outcomes.push(TeleportOutcome {
                j,
                k,
                probability,
                fidelity: fidelity(&on_c, &corrected),
                uncorrected_fidelity: fidelity(&on_c, &raw),
            });
        }
    }
    let target = 1.0 / (d * d) as f64;
    let pass = outcomes
        .iter()
        .all(|o| (o.fidelity - 1.0).abs() <= tol && (o.probability - target).abs() <= tol);
    Ok(TeleportReport { dim: d, outcomes, pass })
}
