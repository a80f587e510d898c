//! Canonical `V⁻¹ ∘ f_Λ̂ ∘ g_Ω̂` form of a component, and the reductions of
//! components without inputs or outputs.
//!
//! Unravelling gives every segment `α` of a component its own space `K_α`
//! (wire id `α`), isomorphic to the segment's wire through a unitary `V_α`.
//! Segments are numbered inputs first (by wire), then internal segments (by
//! staging wave, wire and position along the wire), then outputs (by wire).
//! Every box state is moved onto the spaces of its segments and transformed by
//! the `V_α`. The Ω halves together give `Ω̂` on `L₁ ⊗ L₂` (inputs and
//! internal segments), the Λ halves give `Λ̂` on `L₂ ⊗ L₃` (internal segments
//! and outputs).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{
    ComponentClass, Diagram, DiagramError, Element, HalfBox, HalfKind, SegId, StageError, StagePlan,
    Topology,
};
use crate::eval::EvalError;
use crate::flow::{compose, f_map, g_map, FlowError, FlowMap, Port, PortVector};
use crate::random::sub_seed;
use crate::tensor::{
    apply_single_wire, contract, inner, random_unitary, tensor_all, total_dim, Matrix, Polarity, State,
    TensorError, WireDecl, WireId, MAX_TOTAL_DIM,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonError {
    #[error("component {component} contains unitary gates")]
    UnitaryPresent { component: usize },

    #[error("component {component} is a {class}")]
    ClassMismatch { component: usize, class: ComponentClass },

    #[error("input state is on {found:?}, the component needs {expected:?}")]
    InputMismatch { expected: Vec<WireDecl>, found: Vec<WireDecl> },

    #[error("canonical form exceeds the size limit")]
    TooLarge,

    #[error(transparent)]
    Stage(#[from] StageError),

    #[error(transparent)]
    Flow(#[from] FlowError),

    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

pub type CanonResult<T> = Result<T, CanonError>;

/// Choice of the unitaries `V_α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VMode {
    Identity,
    /// Seeded random unitaries on every segment that is not an input.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnravelledWire {
    pub alpha: usize,
    /// Wire id of `K_α`, equal to `α`.
    pub space: WireId,
    pub dim: usize,
    #[serde(serialize_with = "ser_matrix")]
    pub v: Matrix,
    #[serde(serialize_with = "ser_seg")]
    pub segment: SegId,
    /// Original diagram wire of the segment.
    pub wire: WireId,
}

fn ser_seg<S: serde::Serializer>(s: &SegId, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u64(s.0 as u64)
}

pub(crate) fn matrix_rows(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn ser_matrix<S: serde::Serializer>(m: &Matrix, ser: S) -> Result<S::Ok, S::Error> {
    matrix_rows(m).serialize(ser)
}

/// Segment role inside a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Input,
    Internal,
    Output,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub component: usize,
    pub class: ComponentClass,
    /// Indexed by `α − 1`.
    pub wires: Vec<UnravelledWire>,
    /// Lifted Ω halves; their tensor product is `Ω̂`.
    pub omega_factors: Vec<State>,
    /// Lifted Λ halves; their tensor product is `Λ̂`.
    pub lambda_factors: Vec<State>,
    roles: Vec<Role>,
}

fn decls_of(wires: &[&UnravelledWire]) -> Vec<WireDecl> {
    wires.iter().map(|w| WireDecl { id: w.space, dim: w.dim }).collect()
}

fn bounded(decls: &[WireDecl]) -> CanonResult<usize> {
    match total_dim(decls) {
        Ok(n) if n <= MAX_TOTAL_DIM => Ok(n),
        _ => Err(CanonError::TooLarge),
    }
}

impl CanonicalForm {
    fn with_role(&self, role: Role) -> Vec<&UnravelledWire> {
        self.wires.iter().zip(&self.roles).filter(|(_, r)| **r == role).map(|(w, _)| w).collect()
    }

    /// `L₁`: spaces of the input segments.
    pub fn l1(&self) -> Vec<WireDecl> {
        decls_of(&self.with_role(Role::Input))
    }

    /// `L₂`: spaces of the internal segments.
    pub fn l2(&self) -> Vec<WireDecl> {
        decls_of(&self.with_role(Role::Internal))
    }

    /// `L₃`: spaces of the output segments.
    pub fn l3(&self) -> Vec<WireDecl> {
        decls_of(&self.with_role(Role::Output))
    }

    fn wire(&self, space: WireId) -> &UnravelledWire {
        &self.wires[space.0 as usize - 1]
    }

    /// `Ω̂` as one state on `L₁ ⊗ L₂`, ascending α.
    pub fn omega_hat(&self) -> CanonResult<State> {
        let mut all = self.l1();
        all.extend(self.l2());
        bounded(&all)?;
        Ok(tensor_all(self.omega_factors.iter())?.sorted())
    }

    /// `Λ̂` as one state on `L₂ ⊗ L₃`, ascending α.
    pub fn lambda_hat(&self) -> CanonResult<State> {
        let mut all = self.l2();
        all.extend(self.l3());
        bounded(&all)?;
        Ok(tensor_all(self.lambda_factors.iter())?.sorted())
    }

    /// `V` on `L₃`, the Kronecker product of the output `V_α` in α order.
    pub fn v_out(&self) -> Matrix {
        self.with_role(Role::Output)
            .iter()
            .fold(Matrix::identity(1, 1), |acc, w| acc.kronecker(&w.v))
    }

    /// Original wire to space, for the input segments.
    pub fn input_map(&self) -> BTreeMap<WireId, WireId> {
        self.with_role(Role::Input).iter().map(|w| (w.wire, w.space)).collect()
    }

    /// Space to original wire, for the output segments.
    pub fn output_map(&self) -> BTreeMap<WireId, WireId> {
        self.with_role(Role::Output).iter().map(|w| (w.space, w.wire)).collect()
    }

    /// Same form with `Ω̂`'s wire list reversed and its amplitudes left in
    /// place. Used as a negative control.
    pub fn corrupted(&self) -> CanonResult<CanonicalForm> {
        let hat = self.omega_hat()?;
        let mut wires = hat.wires().to_vec();
        wires.reverse();
        let bad = State::new(wires, hat.amps().to_vec(), Polarity::Ket)?;
        Ok(CanonicalForm { omega_factors: vec![bad], ..self.clone() })
    }

    pub fn to_json(&self) -> CanonResult<serde_json::Value> {
        #[derive(Serialize)]
        struct Repr<'a> {
            component: usize,
            class: ComponentClass,
            wires: &'a [UnravelledWire],
            l1: Vec<u32>,
            l2: Vec<u32>,
            l3: Vec<u32>,
            omega_hat: State,
            lambda_hat: State,
            v_out: Vec<Vec<[f64; 2]>>,
        }
        let ids = |w: Vec<WireDecl>| w.iter().map(|d| d.id.0).collect();
        let repr = Repr {
            component: self.component,
            class: self.class,
            wires: &self.wires,
            l1: ids(self.l1()),
            l2: ids(self.l2()),
            l3: ids(self.l3()),
            omega_hat: self.omega_hat()?,
            lambda_hat: self.lambda_hat()?,
            v_out: matrix_rows(&self.v_out()),
        };
        Ok(serde_json::to_value(repr).expect("canonical forms serialize"))
    }
}

fn build_form(topo: &Topology, c: usize, plan: Option<&StagePlan>, vmode: VMode) -> CanonResult<CanonicalForm> {
    if topo.has_gates(c) {
        return Err(CanonError::UnitaryPresent { component: c });
    }
    let comp = topo.component(c);
    let role = |s: SegId| {
        let seg = topo.segment(s);
        if seg.is_input() {
            Role::Input
        } else if seg.is_output() {
            Role::Output
        } else {
            Role::Internal
        }
    };
    let key = |s: SegId| {
        let seg = topo.segment(s);
        let wave = plan.map_or(0, |p| p.oriented_in[&s]);
        let rank = match role(s) {
            Role::Input => 0,
            Role::Internal => 1,
            Role::Output => 2,
        };
        match role(s) {
            Role::Internal => (rank, wave, seg.wire, seg.position),
            _ => (rank, 0, seg.wire, seg.position),
        }
    };
    let mut segs = comp.segments.clone();
    segs.sort_by_key(|&s| key(s));
    let mut wires = Vec::with_capacity(segs.len());
    let mut roles = Vec::with_capacity(segs.len());
    let mut alpha_of: BTreeMap<SegId, WireId> = BTreeMap::new();
    for (i, &s) in segs.iter().enumerate() {
        let seg = topo.segment(s);
        let alpha = i + 1;
        let v = match (vmode, role(s)) {
            (VMode::Random(seed), r) if r != Role::Input => random_unitary(seg.dim, sub_seed(seed, alpha as u64)),
            _ => Matrix::identity(seg.dim, seg.dim),
        };
        let space = WireId(alpha as u32);
        alpha_of.insert(s, space);
        wires.push(UnravelledWire { alpha, space, dim: seg.dim, v, segment: s, wire: seg.wire });
        roles.push(role(s));
    }
    let mut omega_factors = Vec::new();
    let mut lambda_factors = Vec::new();
    for &h in &comp.halves {
        let node = topo.half(h);
        let mut lifted = node.segment_state().relabel(|w| alpha_of[&SegId::from_wire(w)])?;
        for space in lifted.wire_ids() {
            let v = &wires[space.0 as usize - 1].v;
            lifted = apply_single_wire(v, space, &lifted)?;
        }
        let lifted = lifted.sorted();
        match node.kind {
            HalfKind::Omega => omega_factors.push(lifted),
            HalfKind::Lambda => lambda_factors.push(lifted),
        }
    }
    Ok(CanonicalForm { component: c, class: comp.class, wires, omega_factors, lambda_factors, roles })
}

/// Unravels a staged, gate-free component.
pub fn unravel(topo: &Topology, plan: &StagePlan, vmode: VMode) -> CanonResult<CanonicalForm> {
    build_form(topo, plan.component, Some(plan), vmode)
}

/// Unravels any gate-free component; components that cannot be staged
/// number their internal segments by wire and position only.
pub fn unravel_component(topo: &Topology, c: usize, vmode: VMode) -> CanonResult<CanonicalForm> {
    match crate::diagram::stage(topo, c) {
        Ok(plan) => unravel(topo, &plan, vmode),
        Err(StageError::UnitaryPresent { component }) => Err(CanonError::UnitaryPresent { component }),
        Err(_) => build_form(topo, c, None, vmode),
    }
}

fn ids_in(s: &State, set: &[WireDecl]) -> (Vec<WireId>, Vec<WireId>) {
    s.wire_ids().into_iter().partition(|id| set.iter().any(|w| w.id == *id))
}

fn apply_v_inverse(cf: &CanonicalForm, s: &State) -> CanonResult<State> {
    let mut out = s.clone();
    for space in s.wire_ids() {
        out = apply_single_wire(&cf.wire(space).v.adjoint(), space, &out)?;
    }
    Ok(out)
}

/// `V⁻¹ ∘ f_Λ̂ ∘ g_Ω̂` applied to `phi_in`, a ket on the component's input
/// wires. `g_Ω̂` and `f_Λ̂` are applied one lifted half at a time, which is
/// the same map since `Ω̂` and `Λ̂` are tensor products. The result is on the
/// original output wires.
pub fn eval_canonical(cf: &CanonicalForm, phi_in: &State) -> CanonResult<State> {
    eval_canonical_with(cf, phi_in, true)
}

/// As [`eval_canonical`]; `correct = false` skips the final `V⁻¹`.
pub fn eval_canonical_with(cf: &CanonicalForm, phi_in: &State, correct: bool) -> CanonResult<State> {
    let input_map = cf.input_map();
    let phi = phi_in.sorted();
    let mut expected: Vec<WireDecl> =
        cf.with_role(Role::Input).iter().map(|w| WireDecl { id: w.wire, dim: w.dim }).collect();
    expected.sort_by_key(|w| w.id);
    if phi.polarity() != Polarity::Ket || phi.wires() != expected.as_slice() {
        return Err(CanonError::InputMismatch { expected, found: phi.wires().to_vec() });
    }
    let (l1, l2, l3) = (cf.l1(), cf.l2(), cf.l3());
    bounded(&[l1.clone(), l2.clone()].concat())?;
    bounded(&[l2.clone(), l3.clone()].concat())?;
    let mut cur = PortVector::from_state(&phi.relabel(|w| input_map[&w])?);
    for omega in &cf.omega_factors {
        let (ins, outs) = ids_in(omega, &l1);
        cur = g_map(omega, &ins, &outs)?.apply_on(&cur)?;
    }
    for lambda in &cf.lambda_factors {
        let (ins, outs) = ids_in(lambda, &l2);
        cur = f_map(lambda, &ins, &outs)?.apply_on(&cur)?;
    }
    let order: Vec<WireId> = l3.iter().map(|w| w.id).collect();
    let mut out = cur.reorder(&order)?.to_state()?;
    if correct {
        out = apply_v_inverse(cf, &out)?;
    }
    let back = cf.output_map();
    Ok(out.relabel(|w| back[&w])?.sorted())
}

/// The canonical form as one dense map `L₁ → L₃` (kets to kets).
pub fn canonical_map(cf: &CanonicalForm) -> CanonResult<FlowMap> {
    let ids = |w: &[WireDecl]| w.iter().map(|d| d.id).collect::<Vec<_>>();
    let (l1, l2, l3) = (cf.l1(), cf.l2(), cf.l3());
    let g = g_map(&cf.omega_hat()?, &ids(&l1), &ids(&l2))?;
    let f = f_map(&cf.lambda_hat()?, &ids(&l2), &ids(&l3))?;
    let ports: Vec<Port> = l3.iter().map(|&w| Port::new(w, Polarity::Ket)).collect();
    let v_inv = FlowMap::new(ports.clone(), ports, cf.v_out().adjoint(), false)?;
    Ok(compose(&v_inv, &compose(&f, &g)?)?)
}

fn expect_class(topo: &Topology, c: usize, class: ComponentClass) -> CanonResult<()> {
    let found = topo.component(c).class;
    if found != class {
        return Err(CanonError::ClassMismatch { component: c, class: found });
    }
    Ok(())
}

fn to_original(cf: &CanonicalForm, s: &State) -> CanonResult<State> {
    let back: BTreeMap<WireId, WireId> = cf.wires.iter().map(|w| (w.space, w.wire)).collect();
    Ok(apply_v_inverse(cf, s)?.relabel(|w| back[&w])?.sorted())
}

/// A component with only output lines as one Λ state, `Ω̂⌋Λ̂`.
pub fn reduce_creator(topo: &Topology, c: usize) -> CanonResult<State> {
    expect_class(topo, c, ComponentClass::Creator)?;
    let cf = unravel_component(topo, c, VMode::Identity)?;
    let mut acc = cf.lambda_hat()?;
    for omega in &cf.omega_factors {
        acc = contract(omega, &acc)?;
    }
    to_original(&cf, &acc)
}

/// A component with only input lines as one Ω state, `Λ̂⌋Ω̂`; its value on
/// an input `φ` is `(Ω, φ)`.
pub fn reduce_annihilator(topo: &Topology, c: usize) -> CanonResult<State> {
    expect_class(topo, c, ComponentClass::Annihilator)?;
    let cf = unravel_component(topo, c, VMode::Identity)?;
    let mut acc = cf.omega_hat()?;
    for lambda in &cf.lambda_factors {
        acc = contract(lambda, &acc)?;
    }
    to_original(&cf, &acc)
}

/// A closed component as the number `(Ω̂, Λ̂)`.
pub fn reduce_scalar(topo: &Topology, c: usize) -> CanonResult<C64> {
    expect_class(topo, c, ComponentClass::Scalar)?;
    let cf = unravel_component(topo, c, VMode::Identity)?;
    Ok(inner(&cf.omega_hat()?, &cf.lambda_hat()?)?)
}

fn reattach(d: &Diagram, ids: &[WireId], extra: Element) -> CanonResult<Diagram> {
    let wires = d
        .wires()
        .iter()
        .map(|w| {
            let mut w = w.clone();
            if ids.contains(&w.id) {
                w.detached = false;
            }
            w
        })
        .collect();
    let mut elements = d.elements().to_vec();
    elements.push(extra);
    Ok(Diagram::new(wires, elements)?)
}

/// The diagram with a creator replaced by one Λ box on its output wires,
/// placed after every other element.
pub fn substitute_creator(topo: &Topology, c: usize, lambda: &State) -> CanonResult<Diagram> {
    let rest = topo.without_component(c);
    let time = topo.diagram().max_time().unwrap_or(0) + 1;
    let ids = lambda.wire_ids();
    let half = HalfBox { kind: HalfKind::Lambda, time, slot: 1, wires: ids.clone(), state: lambda.clone(), label: "L*".into() };
    reattach(&rest, &ids, Element::Half(half))
}

/// The diagram with an annihilator replaced by one Ω box on its input
/// wires, placed before every other element.
pub fn substitute_annihilator(topo: &Topology, c: usize, omega: &State) -> CanonResult<Diagram> {
    let rest = topo.without_component(c);
    let time = topo.diagram().min_time().unwrap_or(0) - 1;
    let ids = omega.wire_ids();
    let half = HalfBox { kind: HalfKind::Omega, time, slot: 0, wires: ids.clone(), state: omega.clone(), label: "O*".into() };
    reattach(&rest, &ids, Element::Half(half))
}

/// Element list of the two-box diagram equivalent to a canonical form, in the
/// text format: `L` for `Λ̂`, `O` for `Ω̂`, and unitaries for `V⁻¹`. Spaces
/// are named `k1, k2, …` after α.
pub fn canonical_dsl(cf: &CanonicalForm) -> CanonResult<String> {
    use crate::tensor::format_complex;
    let name = |id: WireId| format!("k{}", id.0);
    let decls: Vec<String> = cf.wires.iter().map(|w| format!("{}:{}", name(w.space), w.dim)).collect();
    let amps = |s: &State| s.amps().iter().map(|a| format_complex(*a)).collect::<Vec<_>>().join(", ");
    let on = |s: &State| s.wire_ids().iter().map(|&w| name(w)).collect::<Vec<_>>().join(",");
    let mut out = format!("wires {}\n", decls.join(" "));
    let (omega, lambda) = (cf.omega_hat()?, cf.lambda_hat()?);
    if !lambda.wires().is_empty() {
        out.push_str(&format!("L t=1 on ({}) lambda=amps [{}] label=Lhat\n", on(&lambda), amps(&lambda)));
    }
    if !omega.wires().is_empty() {
        out.push_str(&format!("O t=2 on ({}) omega=amps [{}] label=Ohat\n", on(&omega), amps(&omega)));
    }
    for w in cf.with_role(Role::Output) {
        if w.v != Matrix::identity(w.dim, w.dim) {
            let inv = w.v.adjoint();
            let entries: Vec<String> = (0..w.dim)
                .flat_map(|r| (0..w.dim).map(move |c| (r, c)))
                .map(|(r, c)| format_complex(inv[(r, c)]))
                .collect();
            out.push_str(&format!("U t=3 on ({}) matrix=[{}]\n", name(w.space), entries.join(", ")));
        }
    }
    Ok(out)
}
