//! Linear and antilinear maps between tensor subproducts and their duals.
//!
//! A [`FlowMap`] carries its domain and codomain as ordered port lists, where
//! each port is a wire plus a polarity. The action on a coordinate vector is
//! `v ↦ M·v` for linear maps and `v ↦ M·conj(v)` for antilinear ones.
//!
//! Conventions, with `S` the inputs and `S′` the outputs of the map, both in
//! ascending wire order and the state permuted to `S ++ S′`:
//!
//! | map | domain → codomain | `M[b, a]` | action |
//! |-----|-------------------|-----------|--------|
//! | `g_Ω` | kets on `S` → bras on `S′` | `conj(Ω[a, b])` | linear |
//! | `f_Λ` | bras on `S` → kets on `S′` | `Λ[a, b]` | linear |
//! | `F_Ω` | kets → kets | `Ω[a, b]` | antilinear |
//! | `G_Ω` | bras → bras | `conj(Ω[a, b])` | antilinear |

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::tensor::{
    apply_leading, permute_amps, rel_err_amps, total_dim, Matrix, Polarity, State, TensorError,
    WireDecl, WireId,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("input and output sets must partition the state's wires")]
    BadPartition,

    #[error("map needs a bipartite state, got {0} wires")]
    NotBipartite(usize),

    #[error("cannot compose: {0}")]
    ComposeMismatch(String),

    #[error("cannot tensor linear and antilinear maps")]
    MixedLinearity,

    #[error("wire {0} appears in more than one factor")]
    WireCollision(WireId),

    #[error("vector does not match the map's domain: {0}")]
    DomainMismatch(String),

    #[error("partial application needs a linear map")]
    AntilinearPartial,

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type FlowResult<T> = Result<T, FlowError>;

/// A wire seen as a (co)domain factor of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Port {
    #[serde(flatten)]
    pub wire: WireDecl,
    pub polarity: Polarity,
}

impl Port {
    pub fn new(wire: WireDecl, polarity: Polarity) -> Self {
        Self { wire, polarity }
    }

    pub fn id(&self) -> WireId {
        self.wire.id
    }

    pub fn dim(&self) -> usize {
        self.wire.dim
    }
}

/// A coordinate vector over ports that may mix kets and bras.
#[derive(Debug, Clone, PartialEq)]
pub struct PortVector {
    pub ports: Vec<Port>,
    pub amps: Vec<C64>,
}

impl PortVector {
    pub fn new(ports: Vec<Port>, amps: Vec<C64>) -> FlowResult<Self> {
        let wires: Vec<WireDecl> = ports.iter().map(|p| p.wire).collect();
        let n = total_dim(&wires)?;
        if amps.len() != n {
            return Err(FlowError::DimMismatch(format!("{} amplitudes for dimension {n}", amps.len())));
        }
        for (i, p) in ports.iter().enumerate() {
            if ports[..i].iter().any(|q| q.id() == p.id()) {
                return Err(FlowError::WireCollision(p.id()));
            }
        }
        Ok(Self { ports, amps })
    }

    pub fn from_state(s: &State) -> Self {
        let ports = s.wires().iter().map(|&w| Port::new(w, s.polarity())).collect();
        Self { ports, amps: s.amps().to_vec() }
    }

    /// Converts back to a [`State`]; all ports must share one polarity.
    /// A vector on no ports becomes a scalar ket.
    pub fn to_state(&self) -> FlowResult<State> {
        let polarity = self.ports.first().map_or(Polarity::Ket, |p| p.polarity);
        if let Some(p) = self.ports.iter().find(|p| p.polarity != polarity) {
            return Err(FlowError::DomainMismatch(format!("mixed polarity at wire {}", p.id())));
        }
        let wires = self.ports.iter().map(|p| p.wire).collect();
        Ok(State::new(wires, self.amps.clone(), polarity)?)
    }

    fn dims(&self) -> Vec<usize> {
        self.ports.iter().map(|p| p.dim()).collect()
    }

    /// Reorders to the given port id order.
    pub fn reorder(&self, order: &[WireId]) -> FlowResult<PortVector> {
        let perm = permutation_to(&self.ports, order)
            .ok_or_else(|| FlowError::DomainMismatch(format!("cannot reorder to {order:?}")))?;
        let amps = permute_amps(&self.amps, &self.dims(), &perm);
        let ports = perm.iter().map(|&p| self.ports[p]).collect();
        Ok(PortVector { ports, amps })
    }
}

/// `perm[k]` = index in `ports` of `order[k]`, if `order` is a permutation of the ids.
fn permutation_to(ports: &[Port], order: &[WireId]) -> Option<Vec<usize>> {
    if order.len() != ports.len() {
        return None;
    }
    let mut perm = Vec::with_capacity(order.len());
    for (k, id) in order.iter().enumerate() {
        if order[..k].contains(id) {
            return None;
        }
        perm.push(ports.iter().position(|p| p.id() == *id)?);
    }
    Some(perm)
}

/// A (possibly antilinear) map between port lists.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    matrix: Matrix,
    antilinear: bool,
}

fn port_dim(ports: &[Port]) -> FlowResult<usize> {
    let wires: Vec<WireDecl> = ports.iter().map(|p| p.wire).collect();
    Ok(total_dim(&wires)?)
}

impl FlowMap {
    pub fn new(inputs: Vec<Port>, outputs: Vec<Port>, matrix: Matrix, antilinear: bool) -> FlowResult<Self> {
        let (n_in, n_out) = (port_dim(&inputs)?, port_dim(&outputs)?);
        if matrix.nrows() != n_out || matrix.ncols() != n_in {
            return Err(FlowError::DimMismatch(format!(
                "matrix is {}x{}, ports need {n_out}x{n_in}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { inputs, outputs, matrix, antilinear })
    }

    pub fn identity(ports: Vec<Port>) -> FlowResult<Self> {
        let n = port_dim(&ports)?;
        Self::new(ports.clone(), ports, Matrix::identity(n, n), false)
    }

    pub fn inputs(&self) -> &[Port] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Port] {
        &self.outputs
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn input_ids(&self) -> Vec<WireId> {
        self.inputs.iter().map(|p| p.id()).collect()
    }

    pub fn output_ids(&self) -> Vec<WireId> {
        self.outputs.iter().map(|p| p.id()).collect()
    }

    /// Same map with the domain factors listed in `order`.
    pub fn reorder_inputs(&self, order: &[WireId]) -> FlowResult<FlowMap> {
        let perm = permutation_to(&self.inputs, order)
            .ok_or_else(|| FlowError::DomainMismatch(format!("cannot reorder inputs to {order:?}")))?;
        let dims: Vec<usize> = self.inputs.iter().map(|p| p.dim()).collect();
        let matrix = permute_axes(&self.matrix, &dims, &perm, Axis::Columns);
        let inputs = perm.iter().map(|&p| self.inputs[p]).collect();
        Ok(FlowMap { inputs, matrix, ..self.clone() })
    }

    /// Same map with the codomain factors listed in `order`.
    pub fn reorder_outputs(&self, order: &[WireId]) -> FlowResult<FlowMap> {
        let perm = permutation_to(&self.outputs, order)
            .ok_or_else(|| FlowError::DomainMismatch(format!("cannot reorder outputs to {order:?}")))?;
        let dims: Vec<usize> = self.outputs.iter().map(|p| p.dim()).collect();
        let matrix = permute_axes(&self.matrix, &dims, &perm, Axis::Rows);
        let outputs = perm.iter().map(|&p| self.outputs[p]).collect();
        Ok(FlowMap { outputs, matrix, ..self.clone() })
    }

    fn check_domain(&self, v: &PortVector) -> FlowResult<PortVector> {
        let order = self.input_ids();
        let v = v.reorder(&order)?;
        if v.ports != self.inputs {
            return Err(FlowError::DomainMismatch(format!(
                "expected {:?}, got {:?}",
                self.inputs, v.ports
            )));
        }
        Ok(v)
    }

    /// Applies the map to a vector on exactly its domain (any port order).
    pub fn apply(&self, v: &PortVector) -> FlowResult<PortVector> {
        let v = self.check_domain(v)?;
        let x = nalgebra::DVector::from_iterator(
            v.amps.len(),
            v.amps.iter().map(|a| if self.antilinear { a.conj() } else { *a }),
        );
        let y = &self.matrix * x;
        Ok(PortVector { ports: self.outputs.clone(), amps: y.as_slice().to_vec() })
    }

    /// Applies the map to a state with uniform polarity and returns a state.
    pub fn apply_state(&self, s: &State) -> FlowResult<State> {
        self.apply(&PortVector::from_state(s))?.to_state()
    }

    /// Applies a linear map to some of the ports of `v`, identity on the rest.
    /// The result lists the map's outputs first, then the untouched ports.
    pub fn apply_on(&self, v: &PortVector) -> FlowResult<PortVector> {
        if self.antilinear {
            return Err(FlowError::AntilinearPartial);
        }
        let mut order = self.input_ids();
        let rest: Vec<Port> =
            v.ports.iter().filter(|p| !order.contains(&p.id())).copied().collect();
        order.extend(rest.iter().map(|p| p.id()));
        let lead = v.reorder(&order)?;
        if lead.ports[..self.inputs.len()] != self.inputs[..] {
            return Err(FlowError::DomainMismatch(format!(
                "expected {:?}, got {:?}",
                self.inputs,
                &lead.ports[..self.inputs.len()]
            )));
        }
        if let Some(p) = rest.iter().find(|p| self.outputs.iter().any(|o| o.id() == p.id())) {
            return Err(FlowError::WireCollision(p.id()));
        }
        let amps = apply_leading(&self.matrix, &lead.amps);
        let mut ports = self.outputs.clone();
        ports.extend(rest);
        Ok(PortVector { ports, amps })
    }

    /// JSON form used by `--dump-maps`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("flow maps serialize")
    }
}

impl Serialize for FlowMap {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            inputs: &'a [Port],
            outputs: &'a [Port],
            antilinear: bool,
            matrix: Vec<Vec<[f64; 2]>>,
        }
        let matrix = (0..self.matrix.nrows())
            .map(|r| (0..self.matrix.ncols()).map(|c| {
                let z = self.matrix[(r, c)];
                [z.re, z.im]
            }).collect())
            .collect();
        Repr { inputs: &self.inputs, outputs: &self.outputs, antilinear: self.antilinear, matrix }
            .serialize(ser)
    }
}

#[derive(Clone, Copy)]
enum Axis {
    Rows,
    Columns,
}

/// Permutes the tensor factors indexing the rows or the columns of `m`.
fn permute_axes(m: &Matrix, dims: &[usize], perm: &[usize], axis: Axis) -> Matrix {
    let new_index = {
        // new_index[old] = position of basis vector `old` after permutation
        let n: usize = dims.iter().product();
        let labels: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 0.0)).collect();
        let moved = permute_amps(&labels, dims, perm);
        let mut inv = vec![0usize; n];
        for (new, old) in moved.iter().enumerate() {
            inv[old.re as usize] = new;
        }
        inv
    };
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let (nr, nc) = match axis {
                Axis::Rows => (new_index[r], c),
                Axis::Columns => (r, new_index[c]),
            };
            out[(nr, nc)] = m[(r, c)];
        }
    }
    out
}

/// Splits `state` into sorted input and output port lists and returns its
/// coordinates as a `|S| × |S′|` matrix `Ω[a, b]`.
fn split_state(state: &State, s: &[WireId], s_out: &[WireId]) -> FlowResult<(Vec<WireDecl>, Vec<WireDecl>, Matrix)> {
    let mut s: Vec<WireId> = s.to_vec();
    let mut s_out: Vec<WireId> = s_out.to_vec();
    s.sort();
    s_out.sort();
    let all: BTreeSet<WireId> = s.iter().chain(&s_out).copied().collect();
    let own: BTreeSet<WireId> = state.wire_ids().into_iter().collect();
    if all.len() != s.len() + s_out.len() || all != own {
        return Err(FlowError::BadPartition);
    }
    let order: Vec<WireId> = s.iter().chain(&s_out).copied().collect();
    let p = state.permute(&order)?;
    let ins: Vec<WireDecl> = p.wires()[..s.len()].to_vec();
    let outs: Vec<WireDecl> = p.wires()[s.len()..].to_vec();
    let rows: usize = ins.iter().map(|w| w.dim).product();
    let cols: usize = outs.iter().map(|w| w.dim).product();
    Ok((ins, outs, DMatrix::from_row_slice(rows, cols, p.amps())))
}

fn ports(wires: &[WireDecl], polarity: Polarity) -> Vec<Port> {
    wires.iter().map(|&w| Port::new(w, polarity)).collect()
}

/// `g_Ω`: kets on `S` to bras on `S′`, `φ ↦ Σ_a conj(Ω[a, ·]) φ[a]`.
pub fn g_map(omega: &State, s: &[WireId], s_out: &[WireId]) -> FlowResult<FlowMap> {
    require_ket(omega)?;
    let (ins, outs, w) = split_state(omega, s, s_out)?;
    FlowMap::new(ports(&ins, Polarity::Ket), ports(&outs, Polarity::Bra), w.adjoint(), false)
}

/// `f_Λ`: bras on `S` to kets on `S′`, `x ↦ Σ_a Λ[a, ·] x[a]`.
pub fn f_map(lambda: &State, s: &[WireId], s_out: &[WireId]) -> FlowResult<FlowMap> {
    require_ket(lambda)?;
    let (ins, outs, l) = split_state(lambda, s, s_out)?;
    FlowMap::new(ports(&ins, Polarity::Bra), ports(&outs, Polarity::Ket), l.transpose(), false)
}

fn require_ket(s: &State) -> FlowResult<()> {
    if s.polarity() != Polarity::Ket {
        return Err(TensorError::PolarityMismatch { expected: Polarity::Ket, found: s.polarity() }.into());
    }
    Ok(())
}

/// Which factor of a bipartite state is the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// First listed wire in, second out.
    Declared,
    /// Factor roles swapped.
    Op,
}

fn bipartite_roles(state: &State, orientation: Orientation) -> FlowResult<([WireId; 1], [WireId; 1])> {
    let ids = state.wire_ids();
    if ids.len() != 2 {
        return Err(FlowError::NotBipartite(ids.len()));
    }
    Ok(match orientation {
        Orientation::Declared => ([ids[0]], [ids[1]]),
        Orientation::Op => ([ids[1]], [ids[0]]),
    })
}

/// `F_Ω`: antilinear kets to kets, `φ ↦ Σ_a Ω[a, ·] conj(φ[a])`.
pub fn ket_transfer(omega: &State, orientation: Orientation) -> FlowResult<FlowMap> {
    require_ket(omega)?;
    let (s, s_out) = bipartite_roles(omega, orientation)?;
    let (ins, outs, w) = split_state(omega, &s, &s_out)?;
    FlowMap::new(ports(&ins, Polarity::Ket), ports(&outs, Polarity::Ket), w.transpose(), true)
}

/// `G_Ω`: antilinear bras to bras, defined by `G(x) = g(x†)`.
pub fn bra_transfer(omega: &State, orientation: Orientation) -> FlowResult<FlowMap> {
    let (s, s_out) = bipartite_roles(omega, orientation)?;
    let g = g_map(omega, &s, &s_out)?;
    // x† has ket coordinates conj(x), so G(x) = M_g · conj(x)
    let inputs = g.inputs.iter().map(|p| Port::new(p.wire, Polarity::Bra)).collect();
    FlowMap::new(inputs, g.outputs, g.matrix, true)
}

/// `outer ∘ inner`. The inner codomain must equal the outer domain as a set of
/// ports; the outer map is reordered to match.
pub fn compose(outer: &FlowMap, inner: &FlowMap) -> FlowResult<FlowMap> {
    let order = inner.output_ids();
    let outer = outer
        .reorder_inputs(&order)
        .map_err(|_| FlowError::ComposeMismatch(format!("{:?} then {:?}", inner.outputs, outer.inputs)))?;
    if outer.inputs != inner.outputs {
        return Err(FlowError::ComposeMismatch(format!("{:?} then {:?}", inner.outputs, outer.inputs)));
    }
    let m1 = if outer.antilinear { inner.matrix.map(|z| z.conj()) } else { inner.matrix.clone() };
    FlowMap::new(
        inner.inputs.clone(),
        outer.outputs.clone(),
        &outer.matrix * m1,
        outer.antilinear ^ inner.antilinear,
    )
}

/// Composes maps listed in application order (first applied first).
pub fn compose_all(maps: &[FlowMap]) -> FlowResult<FlowMap> {
    let mut iter = maps.iter();
    let first = iter.next().ok_or_else(|| FlowError::ComposeMismatch("no maps".into()))?.clone();
    iter.try_fold(first, |acc, m| compose(m, &acc))
}

/// Kronecker product of maps on pairwise disjoint wires.
pub fn tensor_of_maps(ms: &[FlowMap]) -> FlowResult<FlowMap> {
    let antilinear = ms.first().is_some_and(|m| m.antilinear);
    if ms.iter().any(|m| m.antilinear != antilinear) {
        return Err(FlowError::MixedLinearity);
    }
    let mut seen_in = BTreeSet::new();
    let mut seen_out = BTreeSet::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut matrix = Matrix::from_element(1, 1, C64::new(1.0, 0.0));
    for m in ms {
        for p in &m.inputs {
            if !seen_in.insert(p.id()) {
                return Err(FlowError::WireCollision(p.id()));
            }
        }
        for p in &m.outputs {
            if !seen_out.insert(p.id()) {
                return Err(FlowError::WireCollision(p.id()));
            }
        }
        inputs.extend_from_slice(&m.inputs);
        outputs.extend_from_slice(&m.outputs);
        matrix = matrix.kronecker(&m.matrix);
    }
    FlowMap::new(inputs, outputs, matrix, antilinear)
}

/// The pairing `C(g_Ω ⊗ f^op_Λ)`: the trace of `f^op_Λ ∘ g_Ω`. `lambda` is
/// matched to `omega`'s wires positionally.
pub fn time_loop(omega: &State, lambda: &State) -> FlowResult<C64> {
    let ids = omega.wire_ids();
    if ids.len() != 2 {
        return Err(FlowError::NotBipartite(ids.len()));
    }
    if lambda.dims() != omega.dims() {
        return Err(FlowError::DimMismatch(format!("{:?} vs {:?}", omega.dims(), lambda.dims())));
    }
    let lids = lambda.wire_ids();
    let lambda = lambda.relabel(|id| if id == lids[0] { ids[0] } else { ids[1] })?;
    let g = g_map(omega, &ids[..1], &ids[1..])?;
    let f_op = f_map(&lambda, &ids[1..], &ids[..1])?;
    Ok(compose(&f_op, &g)?.matrix.trace())
}

/// Pairing between a bra-valued and a ket-valued vector on the same ports.
pub fn pair_vectors(bra: &PortVector, ket: &PortVector) -> FlowResult<C64> {
    let ket = ket.reorder(&bra.ports.iter().map(|p| p.id()).collect::<Vec<_>>())?;
    Ok(bra.amps.iter().zip(&ket.amps).map(|(a, b)| a * b).sum())
}

/// Largest relative deviation between two maps' matrices, or infinity when
/// their port lists or linearity differ.
pub fn map_distance(a: &FlowMap, b: &FlowMap) -> f64 {
    let b = match b.reorder_inputs(&a.input_ids()).and_then(|m| m.reorder_outputs(&a.output_ids())) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    if a.inputs != b.inputs || a.outputs != b.outputs || a.antilinear != b.antilinear {
        return f64::INFINITY;
    }
    rel_err_amps(a.matrix.as_slice(), b.matrix.as_slice())
}
