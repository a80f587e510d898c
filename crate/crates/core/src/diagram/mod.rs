//! Diagram data model: wires, time-stamped boxes and the structural passes
//! that operate on them.
//!
//! Every wire carries a timeline of events ordered by `(time, slot)`. An
//! Ω half consumes the wire (it must be present), a Λ half recreates it (it
//! must be absent) and a unitary needs it present. A paired Q-box occupies one
//! time with its Ω half at slot 0 and its Λ half at slot 1.
//!
//! A wire is an input when its first event is not a Λ half, and an output when
//! it is present after its last event.

pub mod parse;
pub mod path;
pub mod render;
pub mod stage;
pub mod topology;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tensor::{
    check_unitary, tensor_product, total_dim, Matrix, Polarity, State, TensorError, WireDecl,
    WireId,
};

pub use parse::{parse, ParseError, ParseErrors};
pub use path::{find_path, Direction, Path, PathEnd, PathError, PathStep};
pub use render::{render, RenderStyle};
pub use stage::{stage, stage_with_gates, StageError, StagePlan, Wave};
pub use topology::{Component, ComponentClass, End, HalfId, HalfNode, SegId, Segment, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("no wires declared")]
    NoWires,

    #[error("wire {0} declared twice")]
    DuplicateWire(String),

    #[error("wire {0} has dimension 0")]
    ZeroDim(String),

    #[error("element {element}: unknown wire {wire}")]
    UnknownWire { element: usize, wire: WireId },

    #[error("element {element}: wire {wire} listed twice")]
    RepeatedWire { element: usize, wire: WireId },

    #[error("element {element}: box has no wires")]
    EmptyBox { element: usize },

    #[error("element {element}: state does not fit the box ({reason})")]
    StateShape { element: usize, reason: String },

    #[error("elements {first} and {second} share wire {wire} at time {time}")]
    DuplicateTime { first: usize, second: usize, wire: WireId, time: i64 },

    #[error("element {element}: {reason} on wire {wire}")]
    Sequence { element: usize, wire: WireId, reason: &'static str },

    #[error("element {element}: {source}")]
    BadUnitary { element: usize, source: TensorError },

    #[error("element {element} touches detached wire {wire}")]
    Detached { element: usize, wire: WireId },

    #[error("total dimension exceeds the limit")]
    TooLarge,

    #[error("component {0} is a free line and cannot be padded")]
    PadFreeline(usize),
}

pub type DiagramResult<T> = Result<T, DiagramError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Wire {
    pub id: WireId,
    pub name: String,
    pub dim: usize,
    /// Detached wires carry no state at all. They appear after removing a
    /// component that owned every segment of the wire.
    pub detached: bool,
}

impl Wire {
    pub fn new(id: u32, name: impl Into<String>, dim: usize) -> Self {
        Self { id: WireId(id), name: name.into(), dim, detached: false }
    }

    pub fn decl(&self) -> WireDecl {
        WireDecl { id: self.id, dim: self.dim }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HalfKind {
    Omega,
    Lambda,
}

impl HalfKind {
    pub fn flip(self) -> Self {
        match self {
            HalfKind::Omega => HalfKind::Lambda,
            HalfKind::Lambda => HalfKind::Omega,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            HalfKind::Omega => "Ω",
            HalfKind::Lambda => "Λ",
        }
    }
}

impl fmt::Display for HalfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfKind::Omega => write!(f, "omega"),
            HalfKind::Lambda => write!(f, "lambda"),
        }
    }
}

/// The rank-one operator `|Λ⟩⟨Ω|` on `wires`.
#[derive(Debug, Clone, PartialEq)]
pub struct QBox {
    pub time: i64,
    pub wires: Vec<WireId>,
    pub omega: State,
    pub lambda: State,
    pub label: String,
}

/// One half of a Q-box, or a standalone contraction / creation.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfBox {
    pub kind: HalfKind,
    pub time: i64,
    /// Orders the halves of a split Q-box that share a time: Ω is 0, Λ is 1.
    pub slot: u8,
    pub wires: Vec<WireId>,
    pub state: State,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub time: i64,
    pub wire: WireId,
    pub matrix: Matrix,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Q(QBox),
    Half(HalfBox),
    Unitary(Gate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Omega,
    Lambda,
    Unitary,
}

/// One element's action on one wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub element: usize,
    pub time: i64,
    pub slot: u8,
    pub kind: EventKind,
}

impl Element {
    pub fn time(&self) -> i64 {
        match self {
            Element::Q(q) => q.time,
            Element::Half(h) => h.time,
            Element::Unitary(g) => g.time,
        }
    }

    pub fn wires(&self) -> &[WireId] {
        match self {
            Element::Q(q) => &q.wires,
            Element::Half(h) => &h.wires,
            Element::Unitary(g) => std::slice::from_ref(&g.wire),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Element::Q(q) => &q.label,
            Element::Half(h) => &h.label,
            Element::Unitary(g) => &g.label,
        }
    }

    pub fn set_time(&mut self, t: i64) {
        match self {
            Element::Q(q) => q.time = t,
            Element::Half(h) => h.time = t,
            Element::Unitary(g) => g.time = t,
        }
    }

    fn events(&self, index: usize) -> Vec<(WireId, Event)> {
        let ev = |time, slot, kind| Event { element: index, time, slot, kind };
        match self {
            Element::Q(q) => q
                .wires
                .iter()
                .flat_map(|&w| {
                    [(w, ev(q.time, 0, EventKind::Omega)), (w, ev(q.time, 1, EventKind::Lambda))]
                })
                .collect(),
            Element::Half(h) => {
                let kind = match h.kind {
                    HalfKind::Omega => EventKind::Omega,
                    HalfKind::Lambda => EventKind::Lambda,
                };
                h.wires.iter().map(|&w| (w, ev(h.time, h.slot, kind))).collect()
            }
            Element::Unitary(g) => vec![(g.wire, ev(g.time, 0, EventKind::Unitary))],
        }
    }
}

/// A validated diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    wires: Vec<Wire>,
    elements: Vec<Element>,
}

impl Diagram {
    pub fn new(mut wires: Vec<Wire>, elements: Vec<Element>) -> DiagramResult<Self> {
        wires.sort_by_key(|w| w.id);
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].iter().any(|v| v.id == w.id || v.name == w.name) {
                return Err(DiagramError::DuplicateWire(w.name.clone()));
            }
            if w.dim == 0 {
                return Err(DiagramError::ZeroDim(w.name.clone()));
            }
        }
        let live: Vec<WireDecl> = wires.iter().filter(|w| !w.detached).map(Wire::decl).collect();
        total_dim(&live).map_err(|_| DiagramError::TooLarge)?;
        let d = Diagram { wires, elements };
        d.validate()?;
        Ok(d)
    }

    /// A diagram with no wires and no boxes.
    pub fn empty() -> Self {
        Diagram { wires: Vec::new(), elements: Vec::new() }
    }

    fn validate(&self) -> DiagramResult<()> {
        for (i, e) in self.elements.iter().enumerate() {
            self.validate_element(i, e)?;
        }
        for w in &self.wires {
            let timeline = self.timeline(w.id);
            for pair in timeline.windows(2) {
                if (pair[0].time, pair[0].slot) == (pair[1].time, pair[1].slot) && pair[0].element != pair[1].element {
                    return Err(DiagramError::DuplicateTime {
                        first: pair[0].element.min(pair[1].element),
                        second: pair[0].element.max(pair[1].element),
                        wire: w.id,
                        time: pair[0].time,
                    });
                }
            }
            let mut present = timeline.first().is_none_or(|e| e.kind != EventKind::Lambda);
            for ev in &timeline {
                let fail = |reason| DiagramError::Sequence { element: ev.element, wire: w.id, reason };
                match ev.kind {
                    EventKind::Omega if !present => return Err(fail("contraction of an absent wire")),
                    EventKind::Lambda if present => return Err(fail("creation on a wire that is still present")),
                    EventKind::Unitary if !present => return Err(fail("unitary on an absent wire")),
                    EventKind::Omega => present = false,
                    EventKind::Lambda => present = true,
                    EventKind::Unitary => {}
                }
            }
        }
        Ok(())
    }

    fn validate_element(&self, i: usize, e: &Element) -> DiagramResult<()> {
        let ids = e.wires();
        if ids.is_empty() {
            return Err(DiagramError::EmptyBox { element: i });
        }
        let mut decls = Vec::with_capacity(ids.len());
        for (k, id) in ids.iter().enumerate() {
            let w = self.wire(*id).ok_or(DiagramError::UnknownWire { element: i, wire: *id })?;
            if w.detached {
                return Err(DiagramError::Detached { element: i, wire: *id });
            }
            if ids[..k].contains(id) {
                return Err(DiagramError::RepeatedWire { element: i, wire: *id });
            }
            decls.push(w.decl());
        }
        let check_state = |s: &State| -> DiagramResult<()> {
            let reason = if s.wires() != decls.as_slice() {
                Some(format!("state wires {:?}, box wires {:?}", s.wire_ids(), ids))
            } else if s.polarity() != Polarity::Ket {
                Some("box states must be kets".to_string())
            } else {
                None
            };
            match reason {
                Some(reason) => Err(DiagramError::StateShape { element: i, reason }),
                None => Ok(()),
            }
        };
        match e {
            Element::Q(q) => {
                check_state(&q.omega)?;
                check_state(&q.lambda)?;
            }
            Element::Half(h) => check_state(&h.state)?,
            Element::Unitary(g) => {
                let dim = decls[0].dim;
                if g.matrix.nrows() != dim || g.matrix.ncols() != dim {
                    return Err(DiagramError::BadUnitary {
                        element: i,
                        source: TensorError::DimMismatch { expected: dim, found: g.matrix.nrows() },
                    });
                }
                check_unitary(&g.matrix).map_err(|source| DiagramError::BadUnitary { element: i, source })?;
            }
        }
        Ok(())
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn wire(&self, id: WireId) -> Option<&Wire> {
        self.wires.iter().find(|w| w.id == id)
    }

    pub fn wire_by_name(&self, name: &str) -> Option<&Wire> {
        self.wires.iter().find(|w| w.name == name)
    }

    pub fn live_wires(&self) -> impl Iterator<Item = &Wire> {
        self.wires.iter().filter(|w| !w.detached)
    }

    /// Events on one wire in `(time, slot)` order.
    pub fn timeline(&self, wire: WireId) -> Vec<Event> {
        let mut events: Vec<Event> = self
            .elements
            .iter()
            .enumerate()
            .flat_map(|(i, e)| e.events(i))
            .filter(|(w, _)| *w == wire)
            .map(|(_, ev)| ev)
            .collect();
        events.sort_by_key(|e| (e.time, e.slot, e.element));
        events
    }

    pub fn is_input(&self, wire: WireId) -> bool {
        match self.wire(wire) {
            Some(w) if !w.detached => self.timeline(wire).first().is_none_or(|e| e.kind != EventKind::Lambda),
            _ => false,
        }
    }

    pub fn is_output(&self, wire: WireId) -> bool {
        match self.wire(wire) {
            Some(w) if !w.detached => {
                let timeline = self.timeline(wire);
                match timeline.iter().rev().find(|e| e.kind != EventKind::Unitary) {
                    Some(e) => e.kind == EventKind::Lambda,
                    None => self.is_input(wire),
                }
            }
            _ => false,
        }
    }

    pub fn input_wires(&self) -> Vec<WireDecl> {
        self.live_wires().filter(|w| self.is_input(w.id)).map(Wire::decl).collect()
    }

    pub fn output_wires(&self) -> Vec<WireDecl> {
        self.live_wires().filter(|w| self.is_output(w.id)).map(Wire::decl).collect()
    }

    /// True when no paired Q-boxes remain.
    pub fn is_split(&self) -> bool {
        !self.elements.iter().any(|e| matches!(e, Element::Q(_)))
    }

    pub fn has_unitaries(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Unitary(_)))
    }

    /// Rebuilds the diagram with each element replaced by `f(index, element)`.
    pub fn map_elements(&self, mut f: impl FnMut(usize, &Element) -> Element) -> DiagramResult<Diagram> {
        let elements = self.elements.iter().enumerate().map(|(i, e)| f(i, e)).collect();
        Diagram::new(self.wires.clone(), elements)
    }

    /// Same diagram with element `index` moved to time `t`.
    pub fn with_time(&self, index: usize, t: i64) -> DiagramResult<Diagram> {
        self.map_elements(|i, e| {
            let mut e = e.clone();
            if i == index {
                e.set_time(t);
            }
            e
        })
    }

    /// |0…0⟩ on the input wires.
    pub fn zero_input(&self) -> State {
        State::basis(self.input_wires(), 0).expect("diagram size is guarded")
    }

    pub fn max_time(&self) -> Option<i64> {
        self.elements.iter().map(Element::time).max()
    }

    pub fn min_time(&self) -> Option<i64> {
        self.elements.iter().map(Element::time).min()
    }
}

/// Replaces every paired Q-box by its Ω half (slot 0) and Λ half (slot 1).
pub fn split_boxes(d: &Diagram) -> Diagram {
    let mut elements = Vec::with_capacity(d.elements.len());
    for e in &d.elements {
        match e {
            Element::Q(q) => {
                elements.push(Element::Half(HalfBox {
                    kind: HalfKind::Omega,
                    time: q.time,
                    slot: 0,
                    wires: q.wires.clone(),
                    state: q.omega.clone(),
                    label: q.label.clone(),
                }));
                elements.push(Element::Half(HalfBox {
                    kind: HalfKind::Lambda,
                    time: q.time,
                    slot: 1,
                    wires: q.wires.clone(),
                    state: q.lambda.clone(),
                    label: q.label.clone(),
                }));
            }
            other => elements.push(other.clone()),
        }
    }
    Diagram { wires: d.wires.clone(), elements }
}

/// The time-reversed diagram: times negated, Ω and Λ roles exchanged and
/// unitaries replaced by their adjoints.
pub fn adjoint(d: &Diagram) -> Diagram {
    let elements = d
        .elements
        .iter()
        .map(|e| match e {
            Element::Q(q) => Element::Q(QBox {
                time: -q.time,
                wires: q.wires.clone(),
                omega: q.lambda.clone(),
                lambda: q.omega.clone(),
                label: q.label.clone(),
            }),
            Element::Half(h) => Element::Half(HalfBox {
                kind: h.kind.flip(),
                time: -h.time,
                slot: 1 - h.slot,
                wires: h.wires.clone(),
                state: h.state.clone(),
                label: h.label.clone(),
            }),
            Element::Unitary(g) => Element::Unitary(Gate {
                time: -g.time,
                wire: g.wire,
                matrix: g.matrix.adjoint(),
                label: g.label.clone(),
            }),
        })
        .collect();
    Diagram { wires: d.wires.clone(), elements }
}

fn fresh_names(d: &Diagram, count: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(count);
    let mut k = 1;
    while names.len() < count {
        let name = format!("c{k}");
        if d.wire_by_name(&name).is_none() {
            names.push(name);
        }
        k += 1;
    }
    names
}

fn next_wire_id(d: &Diagram) -> u32 {
    d.wires.iter().map(|w| w.id.0).max().unwrap_or(0) + 1
}

/// Adds `count` one-dimensional free lines.
pub fn pad_trivial_lines(d: &Diagram, count: usize) -> Diagram {
    let mut wires = d.wires.clone();
    let first = next_wire_id(d);
    for (k, name) in fresh_names(d, count).into_iter().enumerate() {
        wires.push(Wire::new(first + k as u32, name, 1));
    }
    Diagram { wires, elements: d.elements.clone() }
}

/// Which boundary a padding line is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadSide {
    Input,
    Output,
}

fn scalar_one(wires: &[WireDecl]) -> State {
    State::ket(wires.to_vec(), vec![C64::new(1.0, 0.0)]).expect("one-dimensional wires")
}

fn extend_half(h: &HalfBox, wire: WireDecl) -> HalfBox {
    let mut h = h.clone();
    h.wires.push(wire.id);
    h.state = tensor_product(&h.state, &scalar_one(&[wire])).expect("fresh wire");
    h
}

/// Gives a component an extra input or output line of dimension 1 without
/// changing what it computes. The result is split.
///
/// An output line is added by extending a Λ half of the component; when it
/// has none, a new Λ box on two fresh lines is placed just below one of its Ω
/// halves, which absorbs one of the lines. Inputs are symmetric.
pub fn pad_component(d: &Diagram, component: usize, side: PadSide) -> DiagramResult<Diagram> {
    let topo = Topology::build(d);
    let comp = &topo.components()[component];
    if comp.class == ComponentClass::Freeline {
        return Err(DiagramError::PadFreeline(component));
    }
    let split = split_boxes(d);
    // a half already on the boundary keeps its wave, so staging is unchanged
    let on_boundary = |h: &HalfNode| {
        h.segments.iter().any(|&s| {
            let seg = topo.segment(s);
            match side {
                PadSide::Input => seg.lower == End::Bottom,
                PadSide::Output => seg.upper == End::Top,
            }
        })
    };
    let owned = |kind: HalfKind| {
        let all: Vec<&HalfNode> = comp.halves.iter().map(|&h| topo.half(h)).filter(|h| h.kind == kind).collect();
        all.iter().find(|h| on_boundary(h)).or(all.first()).map(|h| h.split_index)
    };
    let (direct, fallback) = match side {
        PadSide::Output => (HalfKind::Lambda, HalfKind::Omega),
        PadSide::Input => (HalfKind::Omega, HalfKind::Lambda),
    };
    let mut wires = split.wires.clone();
    let mut elements = split.elements.clone();
    let first = next_wire_id(d);
    if let Some(idx) = owned(direct) {
        let name = fresh_names(d, 1).remove(0);
        let wire = Wire::new(first, name, 1);
        let Element::Half(h) = &elements[idx] else { unreachable!("halves index halves") };
        elements[idx] = Element::Half(extend_half(h, wire.decl()));
        wires.push(wire);
    } else {
        let idx = owned(fallback).expect("non-free component has a half");
        let names = fresh_names(d, 2);
        let c1 = Wire::new(first, names[0].clone(), 1);
        let c2 = Wire::new(first + 1, names[1].clone(), 1);
        let Element::Half(h) = &elements[idx] else { unreachable!("halves index halves") };
        let h = h.clone();
        let (kind, time, slot, touched) = match side {
            PadSide::Output => (HalfKind::Lambda, h.time - 1, 1, c1.decl()),
            PadSide::Input => (HalfKind::Omega, h.time + 1, 0, c2.decl()),
        };
        elements[idx] = Element::Half(extend_half(&h, touched));
        elements.push(Element::Half(HalfBox {
            kind,
            time,
            slot,
            wires: vec![c1.id, c2.id],
            state: scalar_one(&[c1.decl(), c2.decl()]),
            label: "1".into(),
        }));
        wires.push(c1);
        wires.push(c2);
    }
    Diagram::new(wires, elements)
}

/// Drops one-dimensional wires from a state, which leaves its amplitudes unchanged.
pub fn strip_trivial(s: &State) -> State {
    let wires: Vec<WireDecl> = s.wires().iter().filter(|w| w.dim != 1).copied().collect();
    State::new(wires, s.amps().to_vec(), s.polarity()).expect("dimension unchanged")
}

/// Element index to wire list, for reports.
pub fn element_wires(d: &Diagram) -> BTreeMap<usize, Vec<WireId>> {
    d.elements.iter().enumerate().map(|(i, e)| (i, e.wires().to_vec())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random_state;

    fn wires(n: u32, dim: usize) -> Vec<Wire> {
        (1..=n).map(|i| Wire::new(i, format!("w{i}"), dim)).collect()
    }

    fn qbox(time: i64, ids: &[u32], seed: u64) -> Element {
        let decls: Vec<WireDecl> = ids.iter().map(|&i| WireDecl::new(i, 2)).collect();
        Element::Q(QBox {
            time,
            wires: ids.iter().map(|&i| WireId(i)).collect(),
            omega: random_state(decls.clone(), seed).unwrap(),
            lambda: random_state(decls, seed + 1000).unwrap(),
            label: format!("P{seed}"),
        })
    }

    #[test]
    fn rejects_duplicate_time_on_shared_wire() {
        let err = Diagram::new(wires(3, 2), vec![qbox(1, &[1, 2], 1), qbox(1, &[2, 3], 2)]);
        assert!(matches!(err, Err(DiagramError::DuplicateTime { wire: WireId(2), time: 1, .. })));
        assert!(Diagram::new(wires(4, 2), vec![qbox(1, &[1, 2], 1), qbox(1, &[3, 4], 2)]).is_ok());
    }

    #[test]
    fn rejects_bad_sequences() {
        let w = wires(2, 2);
        let decls = vec![WireDecl::new(1, 2)];
        let omega = |t| {
            Element::Half(HalfBox {
                kind: HalfKind::Omega,
                time: t,
                slot: 0,
                wires: vec![WireId(1)],
                state: State::basis(decls.clone(), 0).unwrap(),
                label: "o".into(),
            })
        };
        let err = Diagram::new(w, vec![omega(1), omega(2)]);
        assert!(matches!(err, Err(DiagramError::Sequence { element: 1, .. })));
    }

    #[test]
    fn split_is_idempotent() {
        let d = Diagram::new(wires(2, 2), vec![qbox(1, &[1, 2], 1)]).unwrap();
        let s = split_boxes(&d);
        assert_eq!(s.elements().len(), 2);
        assert_eq!(split_boxes(&s), s);
        assert!(s.is_split());
    }

    #[test]
    fn adjoint_swaps_states_and_is_involutive() {
        let d = Diagram::new(
            wires(3, 2),
            vec![qbox(1, &[1, 2], 1), qbox(2, &[2, 3], 2), qbox(3, &[1, 3], 3)],
        )
        .unwrap();
        let a = adjoint(&d);
        let (Element::Q(q), Element::Q(qa)) = (&d.elements()[0], &a.elements()[0]) else { panic!() };
        assert_eq!(qa.omega, q.lambda);
        assert_eq!(qa.lambda, q.omega);
        assert_eq!(qa.time, -1);
        assert_eq!(adjoint(&a), d);
        assert_eq!(adjoint(&Diagram::empty()), Diagram::empty());
        let s = split_boxes(&d);
        assert_eq!(adjoint(&adjoint(&s)), s);
        assert!(Diagram::new(a.wires().to_vec(), a.elements().to_vec()).is_ok());
    }

    #[test]
    fn inputs_and_outputs() {
        let d = Diagram::new(wires(3, 2), vec![qbox(1, &[1, 2], 1)]).unwrap();
        assert_eq!(d.input_wires().len(), 3);
        assert_eq!(d.output_wires().len(), 3);
        let s = split_boxes(&d);
        let only_lambda = Diagram::new(s.wires().to_vec(), vec![s.elements()[1].clone()]).unwrap();
        assert_eq!(only_lambda.input_wires(), vec![WireDecl::new(3, 2)]);
        assert_eq!(only_lambda.output_wires().len(), 3);
    }

    #[test]
    fn pad_zero_is_identity() {
        let d = Diagram::new(wires(2, 2), vec![qbox(1, &[1, 2], 1)]).unwrap();
        assert_eq!(pad_trivial_lines(&d, 0), d);
        let p = pad_trivial_lines(&d, 2);
        assert_eq!(p.wires().len(), 4);
        assert_eq!(p.wires()[3].name, "c2");
        assert_eq!(p.wires()[3].dim, 1);
    }
}
