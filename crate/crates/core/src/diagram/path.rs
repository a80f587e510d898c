//! Paths through bipartite diagrams.
//!
//! A path follows a wire until it meets a box half, crosses to the half's
//! other wire and continues in the opposite vertical direction. Going up it
//! can only meet Ω halves, going down only Λ halves.

use serde::Serialize;
use thiserror::Error;

use crate::tensor::WireId;

use super::topology::{End, HalfId, SegId, Topology};
use super::HalfKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("no path starts at the {end} of wire {wire}")]
    NoPath { wire: WireId, end: PathEnd },

    #[error("path returns to an already visited box half (element {element})")]
    PathCollision { element: usize },

    #[error("path meets a box on {wires} wires (element {element}); paths need bipartite boxes")]
    NotBipartite { element: usize, wires: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathEnd {
    Bottom,
    Top,
}

impl std::fmt::Display for PathEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PathEnd::Bottom => "bottom",
            PathEnd::Top => "top",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathStep {
    /// Travel along a segment.
    Leg { segment: SegId, wire: WireId, direction: Direction },
    /// Cross a half from `entry` to `exit`.
    Cross { half: HalfId, element: usize, kind: HalfKind, entry: WireId, exit: WireId },
    /// A unitary met on the current leg.
    Gate { element: usize, wire: WireId, direction: Direction },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub start_wire: WireId,
    pub start: PathEnd,
    pub end_wire: WireId,
    pub end: PathEnd,
    pub steps: Vec<PathStep>,
}

impl Path {
    /// Original diagram elements in the order their halves are crossed.
    pub fn box_order(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                PathStep::Cross { element, .. } => Some(*element),
                _ => None,
            })
            .collect()
    }

    pub fn crossings(&self) -> impl Iterator<Item = (HalfId, HalfKind, WireId, WireId)> + '_ {
        self.steps.iter().filter_map(|s| match s {
            PathStep::Cross { half, kind, entry, exit, .. } => Some((*half, *kind, *entry, *exit)),
            _ => None,
        })
    }

    /// True when the path enters at the bottom and leaves at the top.
    pub fn is_through(&self) -> bool {
        self.start == PathEnd::Bottom && self.end == PathEnd::Top
    }
}

/// Traces the path entering at `from` on `wire`.
pub fn find_path(topo: &Topology, wire: WireId, from: PathEnd) -> Result<Path, PathError> {
    let start_seg = match from {
        PathEnd::Bottom => topo.input_segment(wire),
        PathEnd::Top => topo.output_segment(wire),
    }
    .ok_or(PathError::NoPath { wire, end: from })?;
    let mut direction = match from {
        PathEnd::Bottom => Direction::Up,
        PathEnd::Top => Direction::Down,
    };
    let mut seg = start_seg;
    let mut visited: Vec<HalfId> = Vec::new();
    let mut steps = Vec::new();
    loop {
        let s = topo.segment(seg);
        steps.push(PathStep::Leg { segment: seg, wire: s.wire, direction });
        let gates: Vec<_> = match direction {
            Direction::Up => s.gates.iter().collect(),
            Direction::Down => s.gates.iter().rev().collect(),
        };
        for g in gates {
            steps.push(PathStep::Gate { element: g.element, wire: s.wire, direction });
        }
        let end = match direction {
            Direction::Up => s.upper,
            Direction::Down => s.lower,
        };
        let h = match end {
            End::Top => {
                return Ok(Path { start_wire: wire, start: from, end_wire: s.wire, end: PathEnd::Top, steps })
            }
            End::Bottom => {
                return Ok(Path { start_wire: wire, start: from, end_wire: s.wire, end: PathEnd::Bottom, steps })
            }
            End::Half(h) => h,
        };
        let node = topo.half(h);
        if node.wires.len() != 2 {
            return Err(PathError::NotBipartite { element: node.element, wires: node.wires.len() });
        }
        if visited.contains(&h) {
            return Err(PathError::PathCollision { element: node.element });
        }
        visited.push(h);
        let exit = if node.wires[0] == s.wire { node.wires[1] } else { node.wires[0] };
        steps.push(PathStep::Cross { half: h, element: node.element, kind: node.kind, entry: s.wire, exit });
        seg = node.segment_on(exit).expect("half has a segment on each wire");
        direction = direction.reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse;

    #[test]
    fn single_box_exits_at_bottom() {
        let d = parse("wires a:2 b:2\nQ t=1 on (a,b) omega=bell lambda=bell").unwrap();
        let t = Topology::build(&d);
        let p = find_path(&t, WireId(1), PathEnd::Bottom).unwrap();
        assert_eq!(p.box_order(), vec![0]);
        assert_eq!((p.end_wire, p.end), (WireId(2), PathEnd::Bottom));
        assert!(!p.is_through());
    }

    #[test]
    fn path_needs_an_input() {
        let d = parse("wires a:2 b:2\nL t=1 on (a,b) lambda=bell").unwrap();
        let t = Topology::build(&d);
        assert_eq!(
            find_path(&t, WireId(1), PathEnd::Bottom),
            Err(PathError::NoPath { wire: WireId(1), end: PathEnd::Bottom })
        );
        let p = find_path(&t, WireId(1), PathEnd::Top).unwrap();
        assert_eq!((p.end_wire, p.end), (WireId(2), PathEnd::Top));
    }

    #[test]
    fn tripartite_box_blocks_path() {
        let d = parse("wires a:2 b:2 c:2\nQ t=1 on (a,b,c) omega=bell lambda=bell").unwrap();
        let t = Topology::build(&d);
        assert!(matches!(find_path(&t, WireId(1), PathEnd::Bottom), Err(PathError::NotBipartite { wires: 3, .. })));
    }

    #[test]
    fn path_alternates_direction() {
        let d = parse(
            "wires a:2 b:2 c:2\nQ t=1 on (b,c) omega=bell lambda=bell\nQ t=2 on (a,b) omega=bell lambda=bell",
        )
        .unwrap();
        let t = Topology::build(&d);
        let p = find_path(&t, WireId(1), PathEnd::Bottom).unwrap();
        let dirs: Vec<Direction> = p
            .steps
            .iter()
            .filter_map(|s| match s {
                PathStep::Leg { direction, .. } => Some(*direction),
                _ => None,
            })
            .collect();
        for pair in dirs.windows(2) {
            assert_eq!(pair[1], pair[0].reverse());
        }
        assert_eq!(p, find_path(&t, WireId(1), PathEnd::Bottom).unwrap());
    }
}
