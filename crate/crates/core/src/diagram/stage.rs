//! Arrow propagation: orders the halves of a component into alternating
//! Ω and Λ waves.
//!
//! Input segments point up. A half joins the wave in which an oriented
//! segment first points into it, and on joining it orients all of its other
//! segments away from itself: down for Ω halves, up for Λ halves.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::path::Direction;
use super::topology::{ComponentClass, End, HalfId, SegId, Topology};
use super::HalfKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error("component {component} contains unitary gates")]
    UnitaryPresent { component: usize },

    #[error("component {component} contains a feedback loop")]
    FeedbackDetected { component: usize },

    #[error("component {component} is a {class}, staging needs input lines")]
    ClassMismatch { component: usize, class: ComponentClass },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wave {
    pub kind: HalfKind,
    pub halves: Vec<HalfId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    pub component: usize,
    pub waves: Vec<Wave>,
    /// Orientation of every segment of the component.
    pub orientation: BTreeMap<SegId, Direction>,
    /// Wave that oriented each segment; 0 for input segments.
    pub oriented_in: BTreeMap<SegId, usize>,
}

impl StagePlan {
    pub fn wave_of(&self, h: HalfId) -> Option<usize> {
        self.waves.iter().position(|w| w.halves.contains(&h)).map(|i| i + 1)
    }

    /// Segments of a half that point into it, ascending.
    pub fn incoming(&self, topo: &Topology, h: HalfId) -> Vec<SegId> {
        let node = topo.half(h);
        let inward = match node.kind {
            HalfKind::Omega => Direction::Up,
            HalfKind::Lambda => Direction::Down,
        };
        let mut v: Vec<SegId> =
            node.segments.iter().copied().filter(|s| self.orientation[s] == inward).collect();
        v.sort();
        v
    }

    /// Segments of a half that point away from it, ascending.
    pub fn outgoing(&self, topo: &Topology, h: HalfId) -> Vec<SegId> {
        let incoming = self.incoming(topo, h);
        let mut v: Vec<SegId> =
            topo.half(h).segments.iter().copied().filter(|s| !incoming.contains(s)).collect();
        v.sort();
        v
    }

    pub fn half_count(&self) -> usize {
        self.waves.iter().map(|w| w.halves.len()).sum()
    }
}

/// Stages a component that has input lines and no unitaries.
pub fn stage(topo: &Topology, component: usize) -> Result<StagePlan, StageError> {
    if topo.has_gates(component) {
        return Err(StageError::UnitaryPresent { component });
    }
    stage_with_gates(topo, component)
}

/// Like [`stage`] but lets unitaries ride on segments; evaluation applies them
/// in the direction each segment is oriented.
pub fn stage_with_gates(topo: &Topology, component: usize) -> Result<StagePlan, StageError> {
    let comp = topo.component(component);
    match comp.class {
        ComponentClass::Scalar => return Err(StageError::FeedbackDetected { component }),
        ComponentClass::Creator => {
            return Err(StageError::ClassMismatch { component, class: comp.class })
        }
        _ => {}
    }
    let mut orientation: BTreeMap<SegId, Direction> = BTreeMap::new();
    let mut oriented_in: BTreeMap<SegId, usize> = BTreeMap::new();
    for &s in &comp.inputs {
        orientation.insert(s, Direction::Up);
        oriented_in.insert(s, 0);
    }
    let mut placed: BTreeSet<HalfId> = BTreeSet::new();
    let mut frontier: Vec<SegId> = comp.inputs.clone();
    let mut waves = Vec::new();
    let mut kind = HalfKind::Omega;
    while !frontier.is_empty() {
        let mut reached: BTreeSet<HalfId> = BTreeSet::new();
        for &s in &frontier {
            let seg = topo.segment(s);
            let end = match orientation[&s] {
                Direction::Up => seg.upper,
                Direction::Down => seg.lower,
            };
            if let End::Half(h) = end {
                if placed.contains(&h) || topo.half(h).kind != kind {
                    return Err(StageError::FeedbackDetected { component });
                }
                reached.insert(h);
            }
        }
        if reached.is_empty() {
            break;
        }
        let wave_index = waves.len() + 1;
        let outward = match kind {
            HalfKind::Omega => Direction::Down,
            HalfKind::Lambda => Direction::Up,
        };
        let mut next = Vec::new();
        for &h in &reached {
            placed.insert(h);
            for &s in &topo.half(h).segments {
                if let std::collections::btree_map::Entry::Vacant(e) = orientation.entry(s) {
                    e.insert(outward);
                    oriented_in.insert(s, wave_index);
                    next.push(s);
                }
            }
        }
        waves.push(Wave { kind, halves: reached.into_iter().collect() });
        frontier = next;
        kind = kind.flip();
    }
    if comp.segments.iter().any(|s| !orientation.contains_key(s)) || placed.len() != comp.halves.len() {
        return Err(StageError::FeedbackDetected { component });
    }
    Ok(StagePlan { component, waves, orientation, oriented_in })
}
