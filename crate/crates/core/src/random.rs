//! Seeded random diagrams for sweeps.
//!
//! A diagram is drawn from one ChaCha8 stream: the wire count, each wire's
//! dimension, the box count, then per box its arity, its wire set (sampled
//! without replacement) and its Ω and Λ states. Box `i` sits at time
//! `2(i+1)`; optional unitaries sit at odd times. A draw that violates a
//! requested constraint is discarded and the next draw from the same stream
//! is used, so a seed always replays to the same diagram.

use rand::seq::index::sample;
use rand::Rng;

use crate::diagram::{ComponentClass, Diagram, Element, Gate, HalfBox, QBox, Topology, Wire};
use crate::tensor::{
    random_state_with, random_unitary_with, rng_from_seed, tensor_all, total_dim, State, WireDecl,
    WireId,
};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub min_wires: usize,
    pub max_wires: usize,
    pub dims: Vec<usize>,
    pub min_boxes: usize,
    pub max_boxes: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    /// Box states are products of single-wire states.
    pub product_states: bool,
    pub max_gates: usize,
    /// Keep only diagrams with at least one processor component.
    pub require_processor: bool,
    /// Bound on the canonical-form spaces of every gate-free processor,
    /// see [`canonical_dims`].
    pub max_canonical_dim: Option<usize>,
}

impl GenOptions {
    /// Up to 5 wires of dimension 2 or 3 and up to 6 two-wire boxes.
    pub fn bipartite() -> Self {
        Self {
            min_wires: 2,
            max_wires: 5,
            dims: vec![2, 3],
            min_boxes: 1,
            max_boxes: 6,
            min_arity: 2,
            max_arity: 2,
            product_states: false,
            max_gates: 0,
            require_processor: true,
            max_canonical_dim: None,
        }
    }

    /// As [`GenOptions::bipartite`] with boxes on one to three wires.
    pub fn multipartite() -> Self {
        Self { min_arity: 1, max_arity: 3, max_canonical_dim: Some(1 << 16), ..Self::bipartite() }
    }

    pub fn product(self) -> Self {
        Self { product_states: true, ..self }
    }

    pub fn with_gates(self, max_gates: usize) -> Self {
        Self { max_gates, ..self }
    }
}

/// splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for item `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// A random ket on `wires`, either generic or a product of single-wire kets.
pub fn random_box_state(wires: &[WireDecl], product: bool, rng: &mut impl Rng) -> State {
    if product {
        let parts: Vec<State> =
            wires.iter().map(|w| random_state_with(vec![*w], rng).expect("small wire")).collect();
        tensor_all(parts.iter()).expect("distinct wires")
    } else {
        random_state_with(wires.to_vec(), rng).expect("diagram size is guarded")
    }
}

fn letter(i: usize) -> String {
    let letters = "abcdefghijklmnopqrstuvwxyz";
    letters[i % 26..i % 26 + 1].to_string() + &"'".repeat(i / 26)
}

fn draw(opts: &GenOptions, rng: &mut impl Rng) -> Diagram {
    let n = rng.random_range(opts.min_wires..=opts.max_wires);
    let wires: Vec<Wire> = (0..n)
        .map(|i| Wire::new(i as u32 + 1, letter(i), opts.dims[rng.random_range(0..opts.dims.len())]))
        .collect();
    let boxes = rng.random_range(opts.min_boxes..=opts.max_boxes);
    let mut elements = Vec::new();
    for b in 0..boxes {
        let arity = rng.random_range(opts.min_arity..=opts.max_arity.min(n));
        let picked: Vec<usize> = sample(rng, n, arity).into_vec();
        let decls: Vec<WireDecl> = picked.iter().map(|&i| wires[i].decl()).collect();
        let omega = random_box_state(&decls, opts.product_states, rng);
        let lambda = random_box_state(&decls, opts.product_states, rng);
        elements.push(Element::Q(QBox {
            time: 2 * (b as i64 + 1),
            wires: decls.iter().map(|w| w.id).collect(),
            omega,
            lambda,
            label: format!("Q{}", b + 1),
        }));
    }
    let gates = if opts.max_gates == 0 { 0 } else { rng.random_range(0..=opts.max_gates) };
    for g in 0..gates {
        let w = &wires[rng.random_range(0..n)];
        let slot = rng.random_range(0..=boxes);
        elements.push(Element::Unitary(Gate {
            time: 2 * slot as i64 + 1,
            wire: w.id,
            matrix: random_unitary_with(w.dim, rng),
            label: format!("U{}", g + 1),
        }));
    }
    Diagram::new(wires, elements).unwrap_or_else(|_| Diagram::empty())
}

/// Largest of `dim(L1 ⊗ L2)` and `dim(L2 ⊗ L3)` over the gate-free
/// processors of a diagram: the largest vector the canonical form passes
/// through.
pub fn canonical_dims(topo: &Topology) -> usize {
    let mut worst = 1;
    for c in topo.components() {
        if c.class != ComponentClass::Processor || topo.has_gates(c.index) {
            continue;
        }
        let decls = |pred: &dyn Fn(&crate::diagram::Segment) -> bool| -> Vec<WireDecl> {
            c.segments.iter().map(|&s| topo.segment(s)).filter(|s| pred(s)).map(|s| s.decl()).collect()
        };
        let lower = decls(&|s| !s.is_output());
        let upper = decls(&|s| !s.is_input());
        let size = |w: &[WireDecl]| total_dim(w).unwrap_or(usize::MAX);
        worst = worst.max(size(&lower)).max(size(&upper));
    }
    worst
}

fn accept(d: &Diagram, opts: &GenOptions) -> bool {
    if d.wires().is_empty() {
        return false;
    }
    let topo = Topology::build(d);
    if opts.require_processor && !topo.components().iter().any(|c| c.class == ComponentClass::Processor) {
        return false;
    }
    opts.max_canonical_dim.is_none_or(|m| canonical_dims(&topo) <= m)
}

/// Draws diagrams from `rng` until one satisfies `opts`.
pub fn random_diagram_with(opts: &GenOptions, rng: &mut impl Rng) -> Diagram {
    for _ in 0..MAX_ATTEMPTS {
        let d = draw(opts, rng);
        if accept(&d, opts) {
            return d;
        }
    }
    panic!("no diagram satisfying {opts:?} in {MAX_ATTEMPTS} draws");
}

pub fn random_diagram(seed: u64, opts: &GenOptions) -> Diagram {
    random_diagram_with(opts, &mut rng_from_seed(seed))
}

/// Same structure with fresh box states; unitaries are kept.
pub fn restate(d: &Diagram, product: bool, rng: &mut impl Rng) -> Diagram {
    let decls = |ids: &[WireId]| -> Vec<WireDecl> { ids.iter().map(|&id| d.wire(id).expect("known").decl()).collect() };
    let mut elements = Vec::with_capacity(d.elements().len());
    for e in d.elements() {
        elements.push(match e {
            Element::Q(q) => {
                let w = decls(&q.wires);
                let omega = random_box_state(&w, product, rng);
                let lambda = random_box_state(&w, product, rng);
                Element::Q(QBox { omega, lambda, ..q.clone() })
            }
            Element::Half(h) => {
                let state = random_box_state(&decls(&h.wires), product, rng);
                Element::Half(HalfBox { state, ..h.clone() })
            }
            Element::Unitary(g) => Element::Unitary(g.clone()),
        });
    }
    Diagram::new(d.wires().to_vec(), elements).expect("same structure")
}
