//! DOT and ASCII renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::path::Direction;
use super::stage::stage;
use super::topology::{ComponentClass, End, SegId, Topology};
use super::{Diagram, Element, EventKind, HalfKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Dot,
    Ascii,
}

pub fn render(d: &Diagram, style: RenderStyle) -> String {
    match style {
        RenderStyle::Dot => render_dot(d),
        RenderStyle::Ascii => render_ascii(d),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node per box half, a point node per boundary end, one edge per
/// segment. Components that can be staged get their segments oriented, and
/// downward segments are marked with `*`. The two halves of a Q-box are
/// joined by a dashed undirected edge. Free lines are omitted.
fn render_dot(d: &Diagram) -> String {
    let topo = Topology::build(d);
    let mut orientation: BTreeMap<SegId, Direction> = BTreeMap::new();
    for c in topo.components() {
        if matches!(c.class, ComponentClass::Processor | ComponentClass::Annihilator) {
            if let Ok(plan) = stage(&topo, c.index) {
                orientation.extend(plan.orientation);
            }
        }
    }
    let mut out = String::from("digraph diagram {\n  rankdir=BT;\n  node [shape=box];\n");
    for h in topo.halves() {
        let wires: Vec<String> = h.wires.iter().map(|w| w.0.to_string()).collect();
        let label = format!("{} {} ({}) t={}", h.kind.symbol(), h.label, wires.join(","), h.time);
        let _ = writeln!(out, "  h{} [label={}];", h.id.0, quote(&label));
    }
    for s in topo.segments() {
        if s.lower == End::Bottom && s.upper == End::Top {
            continue;
        }
        let node = |end: End, tag: &str, out: &mut String| -> String {
            match end {
                End::Half(h) => format!("h{}", h.0),
                _ => {
                    let name = format!("{tag}{}", s.id.0);
                    let _ = writeln!(out, "  {name} [shape=point];");
                    name
                }
            }
        };
        let lower = node(s.lower, "in", &mut out);
        let upper = node(s.upper, "out", &mut out);
        let mut label = s.wire.0.to_string();
        let (from, to) = match orientation.get(&s.id) {
            Some(Direction::Down) => {
                label.push('*');
                (upper, lower)
            }
            _ => (lower, upper),
        };
        for g in &s.gates {
            let _ = write!(label, " {}", d.elements()[g.element].label());
        }
        let _ = writeln!(out, "  {from} -> {to} [label={}];", quote(&label));
    }
    for (i, e) in d.elements().iter().enumerate() {
        if let Element::Q(_) = e {
            let halves: Vec<usize> =
                topo.halves().iter().filter(|h| h.element == i).map(|h| h.id.0).collect();
            let _ = writeln!(out, "  h{} -> h{} [style=dashed, arrowhead=none];", halves[0], halves[1]);
        }
    }
    out.push_str("}\n");
    out
}

/// A time-by-wire grid, latest time at the top.
fn render_ascii(d: &Diagram) -> String {
    const W: usize = 6;
    let wires: Vec<_> = d.live_wires().collect();
    let mut rows: BTreeMap<(i64, u8), Vec<(usize, usize, EventKind)>> = BTreeMap::new();
    for (col, w) in wires.iter().enumerate() {
        for ev in d.timeline(w.id) {
            let slot = if matches!(d.elements()[ev.element], Element::Q(_)) { 0 } else { ev.slot };
            rows.entry((ev.time, slot)).or_default().push((col, ev.element, ev.kind));
        }
    }
    // presence of each wire below each row
    let mut present: Vec<bool> = wires.iter().map(|w| d.is_input(w.id)).collect();
    let mut lines = Vec::new();
    for ((time, _), events) in &rows {
        let mut cells: Vec<String> = present.iter().map(|&p| if p { "|".into() } else { " ".into() }).collect();
        let mut by_element: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(col, element, kind) in events {
            by_element.entry(element).or_default().push(col);
            let symbol = match (&d.elements()[element], kind) {
                (Element::Q(_), _) => "Q",
                (_, EventKind::Omega) => HalfKind::Omega.symbol(),
                (_, EventKind::Lambda) => HalfKind::Lambda.symbol(),
                (_, EventKind::Unitary) => "U",
            };
            cells[col] = symbol.to_string();
        }
        let mut joins = vec![false; wires.len()];
        for cols in by_element.values() {
            let (lo, hi) = (*cols.iter().min().unwrap(), *cols.iter().max().unwrap());
            for j in joins.iter_mut().take(hi).skip(lo) {
                *j = true;
            }
        }
        let mut line = format!("{:<8}", format!("t={time}"));
        for (col, cell) in cells.iter().enumerate() {
            let fill = if joins[col] { '-' } else { ' ' };
            line.push_str(cell);
            if col + 1 < cells.len() {
                line.extend(std::iter::repeat_n(fill, W - 1));
            }
        }
        lines.push(line.trim_end().to_string());
        for &(col, _, kind) in events {
            match kind {
                EventKind::Omega => present[col] = false,
                EventKind::Lambda => present[col] = true,
                EventKind::Unitary => {}
            }
        }
    }
    let mut header = " ".repeat(8);
    for (col, w) in wires.iter().enumerate() {
        header.push_str(&w.name);
        if col + 1 < wires.len() {
            header.extend(std::iter::repeat_n(' ', W.saturating_sub(w.name.chars().count())));
        }
    }
    let mut out = String::new();
    for line in lines.iter().rev() {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(header.trim_end());
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse;

    #[test]
    fn empty_diagram_is_header_only() {
        let dot = render(&Diagram::empty(), RenderStyle::Dot);
        assert_eq!(dot, "digraph diagram {\n  rankdir=BT;\n  node [shape=box];\n}\n");
    }

    #[test]
    fn one_box_two_nodes_one_internal_edge() {
        let d = parse("wires a:2 b:2\nQ t=1 on (a,b) omega=bell lambda=bell").unwrap();
        let dot = render(&d, RenderStyle::Dot);
        let half_nodes = dot.lines().filter(|l| l.trim_start().starts_with('h') && !l.contains("->")).count();
        assert_eq!(half_nodes, 2);
        let internal = dot.lines().filter(|l| l.contains("h0 -> h1") || l.contains("h1 -> h0")).count();
        assert_eq!(internal, 1);
        assert_eq!(render(&d, RenderStyle::Dot), dot);
    }

    #[test]
    fn ascii_grid() {
        let d = parse("wires a:2 b:2 c:2\nQ t=1 on (b,c) omega=bell lambda=bell\nQ t=2 on (a,b) omega=bell lambda=bell").unwrap();
        let text = render(&d, RenderStyle::Ascii);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t=2     Q-----Q     |");
        assert_eq!(lines[1], "t=1     |     Q-----Q");
        assert_eq!(lines[2], "        a     b     c");
    }
}
