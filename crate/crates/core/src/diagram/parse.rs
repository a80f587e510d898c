//! Line-oriented text format for diagrams.
//!
//! ```text
//! wires a:2 b:2 c:2
//! # comment
//! Q t=1 on (b,c) omega=bell lambda=bell
//! O t=2 on (a,b) omega=prod(ket 0, rand 7)
//! L t=3 on (a,b) lambda=amps [1, 0, 0, 1]
//! U t=4 on (c) matrix=[0, 1, 1, 0]
//! ```
//!
//! State literals are `ket K`, `bell`, `rand SEED`, `amps [..]` and
//! `prod(s1, s2, ..)`. Inside `prod` every argument but the last takes one
//! wire, except an `amps` list which takes as many leading wires as its length
//! needs; the last argument takes the remaining wires. Any box line may end in
//! `label=NAME`.

use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tensor::{random_state, tensor_product, Matrix, State, WireDecl, WireId};

use super::{Diagram, DiagramError, Element, Gate, HalfBox, HalfKind, QBox, Wire};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum StateLit {
    Ket(usize),
    Bell,
    Rand(u64),
    Amps(Vec<C64>),
    Prod(Vec<StateLit>),
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected '{c}' near '{}'", self.snippet()))
        }
    }

    fn snippet(&self) -> String {
        self.rest().chars().take(16).collect()
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(self.rest().len(), |(i, _)| i);
        if len == 0 {
            return None;
        }
        let w = &self.rest()[..len];
        self.pos += len;
        Some(w)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), String> {
        let save = self.pos;
        match self.word() {
            Some(w) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                Err(format!("expected '{kw}' near '{}'", self.snippet()))
            }
        }
    }

    fn int(&mut self) -> Result<i64, String> {
        self.skip_ws();
        let len = self
            .rest()
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+'))))
            .map_or(self.rest().len(), |(i, _)| i);
        let tok = &self.rest()[..len];
        let v = tok.parse::<i64>().map_err(|_| format!("expected an integer near '{}'", self.snippet()))?;
        self.pos += len;
        Ok(v)
    }

    fn uint(&mut self) -> Result<u64, String> {
        let v = self.int()?;
        u64::try_from(v).map_err(|_| format!("expected a non-negative integer, got {v}"))
    }

    /// Raw text between `[` and the matching `]`.
    fn bracketed(&mut self) -> Result<&'a str, String> {
        self.expect('[')?;
        let end = self.rest().find(']').ok_or("unterminated '['")?;
        let inner = &self.rest()[..end];
        self.pos += end + 1;
        Ok(inner)
    }
}

/// Parses `a`, `-1.5`, `0.5+2i`, `1-1e-3i`, `2i` or `-i`.
pub fn parse_complex(tok: &str) -> Result<C64, String> {
    let s: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("bad complex number '{tok}'");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse().map_err(|_| bad())?,
    };
    let z = C64::new(re, im);
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(bad());
    }
    Ok(z)
}

fn parse_complex_list(text: &str) -> Result<Vec<C64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_complex).collect()
}

fn parse_state_lit(cur: &mut Cursor) -> Result<StateLit, String> {
    let word = cur.word().ok_or_else(|| format!("expected a state near '{}'", cur.snippet()))?;
    match word {
        "ket" => Ok(StateLit::Ket(cur.uint()? as usize)),
        "bell" => Ok(StateLit::Bell),
        "rand" => Ok(StateLit::Rand(cur.uint()?)),
        "amps" => Ok(StateLit::Amps(parse_complex_list(cur.bracketed()?)?)),
        "prod" => {
            cur.expect('(')?;
            let mut parts = vec![parse_state_lit(cur)?];
            while cur.eat(',') {
                parts.push(parse_state_lit(cur)?);
            }
            cur.expect(')')?;
            Ok(StateLit::Prod(parts))
        }
        other => Err(format!("unknown state literal '{other}'")),
    }
}

fn build_state(lit: &StateLit, wires: &[WireDecl]) -> Result<State, String> {
    let n: usize = wires.iter().map(|w| w.dim).product();
    match lit {
        StateLit::Ket(k) => State::basis(wires.to_vec(), *k)
            .map_err(|_| format!("ket {k} out of range for dimension {n}")),
        StateLit::Bell => State::bell(wires.to_vec()).map_err(|_| "bell needs equal wire dimensions".to_string()),
        StateLit::Rand(seed) => random_state(wires.to_vec(), *seed).map_err(|e| e.to_string()),
        StateLit::Amps(v) => {
            if v.len() != n {
                return Err(format!("amps has {} entries, wires need {n}", v.len()));
            }
            State::ket(wires.to_vec(), v.clone()).map_err(|e| e.to_string())
        }
        StateLit::Prod(parts) => {
            let mut rest = wires;
            let mut acc: Option<State> = None;
            for (i, part) in parts.iter().enumerate() {
                let take = if i + 1 == parts.len() {
                    rest.len()
                } else if let StateLit::Amps(v) = part {
                    let mut k = 0;
                    let mut size = 1;
                    while size < v.len() && k < rest.len() {
                        size *= rest[k].dim;
                        k += 1;
                    }
                    if size != v.len() || k == 0 {
                        return Err(format!("amps of length {} does not fit the next wires", v.len()));
                    }
                    k
                } else {
                    1
                };
                if take == 0 || take > rest.len() {
                    return Err("prod has more factors than wires".into());
                }
                let s = build_state(part, &rest[..take])?;
                rest = &rest[take..];
                acc = Some(match acc {
                    None => s,
                    Some(a) => tensor_product(&a, &s).map_err(|e| e.to_string())?,
                });
            }
            acc.ok_or_else(|| "empty prod".to_string())
        }
    }
}

/// Parses a state literal and builds it on the given wires.
pub fn parse_state_literal(text: &str, wires: &[WireDecl]) -> Result<State, String> {
    let mut cur = Cursor::new(text);
    let lit = parse_state_lit(&mut cur)?;
    if !cur.at_end() {
        return Err(format!("unexpected text '{}'", cur.snippet()));
    }
    build_state(&lit, wires)
}

struct Header {
    wires: Vec<Wire>,
}

fn parse_header(line: &str) -> Result<Header, String> {
    let mut cur = Cursor::new(line);
    cur.keyword("wires").map_err(|_| "no wires declared".to_string())?;
    let mut wires = Vec::new();
    while !cur.at_end() {
        let name = cur.word().ok_or_else(|| format!("expected a wire name near '{}'", cur.snippet()))?;
        cur.expect(':')?;
        let dim = cur.uint()? as usize;
        if dim == 0 {
            return Err(format!("wire {name} has dimension 0"));
        }
        if wires.iter().any(|w: &Wire| w.name == name) {
            return Err(format!("wire {name} declared twice"));
        }
        wires.push(Wire::new(wires.len() as u32 + 1, name, dim));
    }
    if wires.is_empty() {
        return Err("no wires declared".into());
    }
    Ok(Header { wires })
}

fn parse_element(line: &str, header: &Header, index: usize) -> Result<Element, String> {
    let mut cur = Cursor::new(line);
    let kind = cur.word().ok_or("expected a statement")?;
    if !matches!(kind, "Q" | "O" | "L" | "U") {
        return Err(format!("unknown statement '{kind}'"));
    }
    cur.keyword("t")?;
    cur.expect('=')?;
    let time = cur.int()?;
    cur.keyword("on")?;
    cur.expect('(')?;
    let mut names = Vec::new();
    loop {
        names.push(cur.word().ok_or_else(|| format!("expected a wire name near '{}'", cur.snippet()))?);
        if !cur.eat(',') {
            break;
        }
    }
    cur.expect(')')?;
    let mut decls = Vec::with_capacity(names.len());
    for name in &names {
        let w = header
            .wires
            .iter()
            .find(|w| w.name == *name)
            .ok_or_else(|| format!("unknown wire '{name}'"))?;
        if decls.iter().any(|d: &WireDecl| d.id == w.id) {
            return Err(format!("wire '{name}' listed twice"));
        }
        decls.push(w.decl());
    }
    let ids: Vec<WireId> = decls.iter().map(|d| d.id).collect();
    let state_arg = |key: &str, cur: &mut Cursor| -> Result<State, String> {
        cur.keyword(key)?;
        cur.expect('=')?;
        let lit = parse_state_lit(cur)?;
        build_state(&lit, &decls).map_err(|e| format!("{key}: {e}"))
    };
    let mut element = match kind {
        "Q" => {
            let omega = state_arg("omega", &mut cur)?;
            let lambda = state_arg("lambda", &mut cur)?;
            Element::Q(QBox { time, wires: ids, omega, lambda, label: String::new() })
        }
        "O" | "L" => {
            let (half, key, slot) =
                if kind == "O" { (HalfKind::Omega, "omega", 0) } else { (HalfKind::Lambda, "lambda", 1) };
            let state = state_arg(key, &mut cur)?;
            Element::Half(HalfBox { kind: half, time, slot, wires: ids, state, label: String::new() })
        }
        _ => {
            if decls.len() != 1 {
                return Err("a unitary acts on exactly one wire".into());
            }
            cur.keyword("matrix")?;
            cur.expect('=')?;
            let entries = parse_complex_list(cur.bracketed()?)?;
            let dim = decls[0].dim;
            if entries.len() != dim * dim {
                return Err(format!("matrix has {} entries, wire needs {}", entries.len(), dim * dim));
            }
            Element::Unitary(Gate {
                time,
                wire: ids[0],
                matrix: Matrix::from_row_slice(dim, dim, &entries),
                label: String::new(),
            })
        }
    };
    let label = if cur.at_end() {
        format!("{kind}{}", index + 1)
    } else {
        cur.keyword("label")?;
        cur.expect('=')?;
        let l = cur.word().ok_or("expected a label")?.to_string();
        if !cur.at_end() {
            return Err(format!("unexpected text '{}'", cur.snippet()));
        }
        l
    };
    match &mut element {
        Element::Q(q) => q.label = label,
        Element::Half(h) => h.label = label,
        Element::Unitary(g) => g.label = label,
    }
    Ok(element)
}

fn element_of(e: &DiagramError) -> Option<usize> {
    match e {
        DiagramError::UnknownWire { element, .. }
        | DiagramError::RepeatedWire { element, .. }
        | DiagramError::EmptyBox { element }
        | DiagramError::StateShape { element, .. }
        | DiagramError::Sequence { element, .. }
        | DiagramError::BadUnitary { element, .. }
        | DiagramError::Detached { element, .. } => Some(*element),
        DiagramError::DuplicateTime { second, .. } => Some(*second),
        _ => None,
    }
}

/// Parses a diagram, collecting one error per offending line.
pub fn parse(text: &str) -> Result<Diagram, ParseErrors> {
    let mut header: Option<Header> = None;
    let mut elements = Vec::new();
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match &header {
            None => match parse_header(line) {
                Ok(h) => header = Some(h),
                Err(message) => {
                    errors.push(ParseError { line: line_no, message });
                    return Err(ParseErrors(errors));
                }
            },
            Some(h) => match parse_element(line, h, elements.len()) {
                Ok(e) => {
                    elements.push(e);
                    lines.push(line_no);
                }
                Err(message) => errors.push(ParseError { line: line_no, message }),
            },
        }
    }
    let Some(header) = header else {
        return Err(ParseErrors(vec![ParseError { line: last_line.max(1), message: "no wires declared".into() }]));
    };
    if !errors.is_empty() {
        return Err(ParseErrors(errors));
    }
    Diagram::new(header.wires, elements).map_err(|e| {
        let line = element_of(&e).map_or(1, |i| lines[i]);
        ParseErrors(vec![ParseError { line, message: e.to_string() }])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_box() {
        let d = parse("wires a:2 b:2\nQ t=1 on (a,b) omega=bell lambda=bell").unwrap();
        assert_eq!(d.wires().len(), 2);
        assert_eq!(d.elements().len(), 1);
        assert_eq!(d.elements()[0].label(), "Q1");
    }

    #[test]
    fn empty_wire_list() {
        let err = parse("wires\n").unwrap_err();
        assert_eq!(err.0[0].message, "no wires declared");
        let err = parse("# nothing\n").unwrap_err();
        assert_eq!(err.0[0].message, "no wires declared");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("wires a:2 b:2\n\nQ t=1 on (a,z) omega=bell lambda=bell\nQ t=2 on (a,b) omega=ket 9 lambda=bell")
            .unwrap_err();
        assert_eq!(err.0.len(), 2);
        assert_eq!(err.0[0].line, 3);
        assert!(err.0[0].message.contains("unknown wire"));
        assert_eq!(err.0[1].line, 4);
        let err = parse("wires a:2 b:2\nQ t=1 on (a,b) omega=bell lambda=bell\nQ t=1 on (b,a) omega=bell lambda=bell")
            .unwrap_err();
        assert_eq!(err.0[0].line, 3);
        assert!(err.0[0].message.contains("share wire"));
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("1").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("0.5+2i").unwrap(), C64::new(0.5, 2.0));
        assert_eq!(parse_complex("1 - 1e-3i").unwrap(), C64::new(1.0, -1e-3));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("2.5e-1i").unwrap(), C64::new(0.0, 0.25));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn state_literals() {
        let wires = [WireDecl::new(1, 2), WireDecl::new(2, 3), WireDecl::new(3, 2)];
        let s = parse_state_literal("prod(ket 1, amps [0, 1, 0, 0, 0, 0])", &wires).unwrap();
        assert_eq!(s.amps()[7], C64::new(1.0, 0.0));
        let s = parse_state_literal("prod(amps [0,0,0,1,0,0], ket 0)", &wires).unwrap();
        assert_eq!(s.amps()[6], C64::new(1.0, 0.0));
        assert!(parse_state_literal("bell", &wires).is_err());
        assert!(parse_state_literal("prod(ket 0, ket 0, ket 0, ket 0)", &wires).is_err());
        let r = parse_state_literal("rand 5", &wires).unwrap();
        assert_eq!(r, random_state(wires.to_vec(), 5).unwrap());
    }

    #[test]
    fn unitary_lines() {
        let d = parse("wires a:2\nU t=1 on (a) matrix=[0, 1, 1, 0] label=X").unwrap();
        assert_eq!(d.elements()[0].label(), "X");
        let err = parse("wires a:2\nU t=1 on (a) matrix=[1, 1, 0, 1]").unwrap_err();
        assert!(err.0[0].message.contains("not unitary"));
    }
}
