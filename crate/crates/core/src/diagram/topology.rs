//! Segments, halves and connected components of a split diagram.
//!
//! A segment is a maximal stretch of one wire during which it is present. Its
//! lower end is the diagram bottom or the Λ half that created it, its upper
//! end the diagram top or the Ω half that consumes it. Unitaries sit on
//! segments. Segment ids follow `(wire, position along the wire)`, so they do
//! not depend on how boxes on different wires are timed relative to each
//! other.

use std::collections::BTreeMap;

use crate::tensor::{Matrix, State, WireDecl, WireId};

use super::{Diagram, Element, EventKind, HalfKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegId(pub usize);

impl SegId {
    /// The segment viewed as a wire of its own, for segment-labelled spaces.
    pub fn as_wire(self) -> WireId {
        WireId(self.0 as u32 + 1)
    }

    pub fn from_wire(w: WireId) -> SegId {
        SegId(w.0 as usize - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfNode {
    pub id: HalfId,
    pub kind: HalfKind,
    pub time: i64,
    pub slot: u8,
    pub wires: Vec<WireId>,
    pub state: State,
    /// Index of the originating element in the unsplit diagram.
    pub element: usize,
    /// Index of this half in `split_boxes` of the diagram.
    pub split_index: usize,
    pub label: String,
    /// Segment on each of `wires`, in the same order.
    pub segments: Vec<SegId>,
}

impl HalfNode {
    pub fn segment_on(&self, wire: WireId) -> Option<SegId> {
        self.wires.iter().position(|&w| w == wire).map(|i| self.segments[i])
    }

    /// The half's state with every wire renamed to its segment.
    pub fn segment_state(&self) -> State {
        let map: BTreeMap<WireId, WireId> =
            self.wires.iter().zip(&self.segments).map(|(&w, s)| (w, s.as_wire())).collect();
        self.state.relabel(|w| map[&w]).expect("segments of one half are distinct")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Bottom,
    Top,
    Half(HalfId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGate {
    pub element: usize,
    pub time: i64,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: SegId,
    pub wire: WireId,
    pub dim: usize,
    /// Index along the wire, counting from the bottom.
    pub position: usize,
    pub lower: End,
    pub upper: End,
    /// Gates in bottom-to-top order.
    pub gates: Vec<SegmentGate>,
}

impl Segment {
    pub fn is_input(&self) -> bool {
        self.lower == End::Bottom
    }

    pub fn is_output(&self) -> bool {
        self.upper == End::Top
    }

    /// The segment as a wire declaration in segment-labelled space.
    pub fn decl(&self) -> WireDecl {
        WireDecl { id: self.id.as_wire(), dim: self.dim }
    }

    /// The same segment as a declaration of its original wire.
    pub fn wire_decl(&self) -> WireDecl {
        WireDecl { id: self.wire, dim: self.dim }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Processor,
    Creator,
    Annihilator,
    Scalar,
    Freeline,
}

impl std::fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ComponentClass::Processor => "processor",
            ComponentClass::Creator => "creator",
            ComponentClass::Annihilator => "annihilator",
            ComponentClass::Scalar => "scalar",
            ComponentClass::Freeline => "freeline",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub index: usize,
    pub class: ComponentClass,
    pub halves: Vec<HalfId>,
    pub segments: Vec<SegId>,
    /// Input segments, ascending by wire.
    pub inputs: Vec<SegId>,
    /// Output segments, ascending by wire.
    pub outputs: Vec<SegId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    diagram: Diagram,
    halves: Vec<HalfNode>,
    segments: Vec<Segment>,
    components: Vec<Component>,
    half_component: Vec<usize>,
    segment_component: Vec<usize>,
    gate_segment: BTreeMap<usize, SegId>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Topology {
    pub fn build(d: &Diagram) -> Topology {
        // halves in split order
        let mut halves = Vec::new();
        let mut half_of: BTreeMap<(usize, u8), HalfId> = BTreeMap::new();
        let mut split_index = 0;
        for (i, e) in d.elements().iter().enumerate() {
            let mut push = |kind, time, slot, wires: &[WireId], state: &State, label: &str, split_index| {
                let id = HalfId(halves.len());
                half_of.insert((i, slot), id);
                halves.push(HalfNode {
                    id,
                    kind,
                    time,
                    slot,
                    wires: wires.to_vec(),
                    state: state.clone(),
                    element: i,
                    split_index,
                    label: label.to_string(),
                    segments: Vec::new(),
                });
            };
            match e {
                Element::Q(q) => {
                    push(HalfKind::Omega, q.time, 0, &q.wires, &q.omega, &q.label, split_index);
                    push(HalfKind::Lambda, q.time, 1, &q.wires, &q.lambda, &q.label, split_index + 1);
                    split_index += 2;
                }
                Element::Half(h) => {
                    push(h.kind, h.time, h.slot, &h.wires, &h.state, &h.label, split_index);
                    split_index += 1;
                }
                Element::Unitary(_) => split_index += 1,
            }
        }

        let mut segments: Vec<Segment> = Vec::new();
        let mut gate_segment = BTreeMap::new();
        for w in d.live_wires() {
            let mut open: Option<Segment> = None;
            let mut position = 0;
            let new_seg = |lower, position: &mut usize, segments: &Vec<Segment>| {
                let s = Segment {
                    id: SegId(segments.len()),
                    wire: w.id,
                    dim: w.dim,
                    position: *position,
                    lower,
                    upper: End::Top,
                    gates: Vec::new(),
                };
                *position += 1;
                s
            };
            if d.is_input(w.id) {
                open = Some(new_seg(End::Bottom, &mut position, &segments));
            }
            for ev in d.timeline(w.id) {
                match ev.kind {
                    EventKind::Omega => {
                        let h = half_of[&(ev.element, ev.slot)];
                        let mut s = open.take().expect("validated: wire present");
                        s.upper = End::Half(h);
                        segments.push(s);
                    }
                    EventKind::Lambda => {
                        let h = half_of[&(ev.element, ev.slot)];
                        open = Some(new_seg(End::Half(h), &mut position, &segments));
                    }
                    EventKind::Unitary => {
                        let s = open.as_mut().expect("validated: wire present");
                        let Element::Unitary(g) = &d.elements()[ev.element] else { unreachable!() };
                        s.gates.push(SegmentGate { element: ev.element, time: g.time, matrix: g.matrix.clone() });
                        gate_segment.insert(ev.element, s.id);
                    }
                }
            }
            if let Some(s) = open {
                segments.push(s);
            }
        }

        for s in &segments {
            for end in [s.lower, s.upper] {
                if let End::Half(h) = end {
                    let node = &mut halves[h.0];
                    if node.segments.len() < node.wires.len() {
                        node.segments.resize(node.wires.len(), SegId(usize::MAX));
                    }
                    let k = node.wires.iter().position(|&w| w == s.wire).expect("half touches wire");
                    node.segments[k] = s.id;
                }
            }
        }

        // union-find over halves (0..H) and segments (H..H+S)
        let nh = halves.len();
        let mut parent: Vec<usize> = (0..nh + segments.len()).collect();
        for s in &segments {
            for end in [s.lower, s.upper] {
                if let End::Half(h) = end {
                    let (a, b) = (find(&mut parent, h.0), find(&mut parent, nh + s.id.0));
                    parent[a] = b;
                }
            }
        }
        let mut by_root: BTreeMap<usize, (usize, Vec<HalfId>, Vec<SegId>)> = BTreeMap::new();
        for s in &segments {
            let r = find(&mut parent, nh + s.id.0);
            let entry = by_root.entry(r).or_insert((s.id.0, Vec::new(), Vec::new()));
            entry.0 = entry.0.min(s.id.0);
            entry.2.push(s.id);
        }
        for h in &halves {
            let r = find(&mut parent, h.id.0);
            by_root.get_mut(&r).expect("every half has a segment").1.push(h.id);
        }
        let mut groups: Vec<(usize, Vec<HalfId>, Vec<SegId>)> = by_root.into_values().collect();
        groups.sort_by_key(|g| g.0);

        let mut components = Vec::with_capacity(groups.len());
        let mut half_component = vec![0; nh];
        let mut segment_component = vec![0; segments.len()];
        for (index, (_, mut hs, mut ss)) in groups.into_iter().enumerate() {
            hs.sort();
            ss.sort();
            let by_wire = |pred: &dyn Fn(&Segment) -> bool| {
                let mut v: Vec<SegId> = ss.iter().copied().filter(|s| pred(&segments[s.0])).collect();
                v.sort_by_key(|s| segments[s.0].wire);
                v
            };
            let inputs = by_wire(&|s| s.is_input());
            let outputs = by_wire(&|s| s.is_output());
            let class = if hs.is_empty() {
                ComponentClass::Freeline
            } else {
                match (inputs.is_empty(), outputs.is_empty()) {
                    (false, false) => ComponentClass::Processor,
                    (true, false) => ComponentClass::Creator,
                    (false, true) => ComponentClass::Annihilator,
                    (true, true) => ComponentClass::Scalar,
                }
            };
            for h in &hs {
                half_component[h.0] = index;
            }
            for s in &ss {
                segment_component[s.0] = index;
            }
            components.push(Component { index, class, halves: hs, segments: ss, inputs, outputs });
        }

        Topology {
            diagram: d.clone(),
            halves,
            segments,
            components,
            half_component,
            segment_component,
            gate_segment,
        }
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn halves(&self) -> &[HalfNode] {
        &self.halves
    }

    pub fn half(&self, id: HalfId) -> &HalfNode {
        &self.halves[id.0]
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegId) -> &Segment {
        &self.segments[id.0]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, index: usize) -> &Component {
        &self.components[index]
    }

    pub fn component_of_half(&self, h: HalfId) -> usize {
        self.half_component[h.0]
    }

    pub fn component_of_segment(&self, s: SegId) -> usize {
        self.segment_component[s.0]
    }

    pub fn segment_of_gate(&self, element: usize) -> Option<SegId> {
        self.gate_segment.get(&element).copied()
    }

    /// The input segment of a wire, if the wire is an input.
    pub fn input_segment(&self, wire: WireId) -> Option<SegId> {
        self.segments.iter().find(|s| s.wire == wire && s.is_input()).map(|s| s.id)
    }

    pub fn output_segment(&self, wire: WireId) -> Option<SegId> {
        self.segments.iter().find(|s| s.wire == wire && s.is_output()).map(|s| s.id)
    }

    pub fn input_decls(&self, c: usize) -> Vec<WireDecl> {
        self.components[c].inputs.iter().map(|s| self.segments[s.0].wire_decl()).collect()
    }

    pub fn output_decls(&self, c: usize) -> Vec<WireDecl> {
        self.components[c].outputs.iter().map(|s| self.segments[s.0].wire_decl()).collect()
    }

    pub fn has_gates(&self, c: usize) -> bool {
        self.components[c].segments.iter().any(|s| !self.segments[s.0].gates.is_empty())
    }

    /// True when every half of the component touches exactly two wires.
    pub fn is_bipartite(&self, c: usize) -> bool {
        self.components[c].halves.iter().all(|h| self.halves[h.0].wires.len() == 2)
    }

    pub fn is_bipartite_diagram(&self) -> bool {
        self.halves.iter().all(|h| h.wires.len() == 2)
    }

    /// The diagram with one component removed. Wires whose every segment
    /// belonged to the component become detached.
    pub fn without_component(&self, c: usize) -> Diagram {
        self.without_components(&[c])
    }

    pub fn without_components(&self, cs: &[usize]) -> Diagram {
        let removed_half = |h: HalfId| cs.contains(&self.half_component[h.0]);
        let mut elements = Vec::new();
        let split = super::split_boxes(&self.diagram);
        let mut split_iter = split.elements().iter();
        for (i, e) in self.diagram.elements().iter().enumerate() {
            let n = if matches!(e, Element::Q(_)) { 2 } else { 1 };
            for slot_elem in split_iter.by_ref().take(n) {
                let keep = match slot_elem {
                    Element::Half(h) => {
                        let id = self
                            .halves
                            .iter()
                            .find(|n| n.element == i && n.slot == h.slot)
                            .map(|n| n.id)
                            .expect("half present");
                        !removed_half(id)
                    }
                    Element::Unitary(_) => {
                        let s = self.gate_segment[&i];
                        !cs.contains(&self.segment_component[s.0])
                    }
                    Element::Q(_) => unreachable!("split diagram"),
                };
                if keep {
                    elements.push(slot_elem.clone());
                }
            }
        }
        let wires = self
            .diagram
            .wires()
            .iter()
            .map(|w| {
                let mut w = w.clone();
                let segs: Vec<&Segment> = self.segments.iter().filter(|s| s.wire == w.id).collect();
                if !segs.is_empty() && segs.iter().all(|s| cs.contains(&self.segment_component[s.id.0])) {
                    w.detached = true;
                }
                w
            })
            .collect();
        Diagram::new(wires, elements).expect("removing whole components keeps timelines valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse;

    #[test]
    fn boxless_diagram_is_all_freelines() {
        let d = parse("wires a:2 b:3 c:2").unwrap();
        let t = Topology::build(&d);
        assert_eq!(t.components().len(), 3);
        assert!(t.components().iter().all(|c| c.class == ComponentClass::Freeline));
    }

    #[test]
    fn single_box_components() {
        let d = parse("wires a:2 b:2\nQ t=1 on (a,b) omega=bell lambda=bell").unwrap();
        let t = Topology::build(&d);
        let classes: Vec<ComponentClass> = t.components().iter().map(|c| c.class).collect();
        assert_eq!(classes, vec![ComponentClass::Annihilator, ComponentClass::Creator]);
        assert_eq!(t.segments().len(), 4);
    }

    #[test]
    fn removing_a_component_detaches_its_wires() {
        let d = parse("wires a:2 b:2 c:2\nQ t=1 on (a,b) omega=bell lambda=bell").unwrap();
        let t = Topology::build(&d);
        let rest = t.without_component(0);
        assert!(rest.wire(WireId(1)).unwrap().detached == false);
        assert_eq!(rest.input_wires().len(), 1);
        assert_eq!(rest.output_wires().len(), 3);
        let t2 = Topology::build(&rest);
        assert_eq!(t2.components().len(), 2);
        let only_c = t.without_components(&[0, 1]);
        assert!(only_c.wire(WireId(1)).unwrap().detached);
        assert_eq!(only_c.input_wires(), vec![WireDecl::new(3, 2)]);
    }
}
