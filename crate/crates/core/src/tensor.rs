//! Dense multilinear algebra over explicitly ordered wire lists.
//!
//! Every [`State`] carries the list of wires it lives on. Amplitudes are stored
//! row-major with the *first* listed wire most significant, so the tensor
//! product of two states is a plain outer product of their amplitude vectors.
//!
//! A bra stores the coordinates of the functional in the dual basis, i.e. the
//! conjugated coordinates of the ket it came from. With that convention
//! [`State::dagger`] is elementwise conjugation plus a polarity flip, and
//! pairing a bra with a ket is an unconjugated dot product ([`State::pair`]).
//!
//! Nothing here normalizes. Zero vectors are ordinary values.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense complex matrix used for unitaries and flow maps.
pub type Matrix = DMatrix<C64>;

/// Upper bound on the total dimension of any state or diagram.
pub const MAX_TOTAL_DIM: usize = 1 << 20;

/// Tolerance used when checking that a matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("wire {0} appears on both sides of a tensor product")]
    WireCollision(WireId),

    #[error("wire {0} listed more than once")]
    DuplicateWire(WireId),

    #[error("wire {0} has dimension 0")]
    ZeroDim(WireId),

    #[error("polarity mismatch: expected {expected}, found {found}")]
    PolarityMismatch { expected: Polarity, found: Polarity },

    #[error("order {0:?} is not a permutation of the state's wires")]
    BadPermutation(Vec<WireId>),

    #[error("wire sets do not match: {0}")]
    WireMismatch(String),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("total dimension {0} exceeds the limit of {MAX_TOTAL_DIM}")]
    TooLarge(usize),

    #[error("non-finite amplitude")]
    NonFinite,
}

pub type TensorResult<T> = Result<T, TensorError>;

/// Identifier of a wire (a tensor factor). Declaration order is id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireId(pub u32);

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A wire together with the dimension of its Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WireDecl {
    pub id: WireId,
    pub dim: usize,
}

impl WireDecl {
    pub fn new(id: u32, dim: usize) -> Self {
        Self { id: WireId(id), dim }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Ket,
    Bra,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Ket => Polarity::Bra,
            Polarity::Bra => Polarity::Ket,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Ket => write!(f, "ket"),
            Polarity::Bra => write!(f, "bra"),
        }
    }
}

/// A vector in a tensor subproduct, or a functional on one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct State {
    wires: Vec<WireDecl>,
    amps: Vec<C64>,
    polarity: Polarity,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    wires: Vec<WireDecl>,
    polarity: Polarity,
    amps: Vec<[f64; 2]>,
}

impl TryFrom<StateJson> for State {
    type Error = TensorError;

    fn try_from(j: StateJson) -> TensorResult<Self> {
        let amps = j.amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
        State::new(j.wires, amps, j.polarity)
    }
}

impl From<State> for StateJson {
    fn from(s: State) -> Self {
        StateJson {
            wires: s.wires,
            polarity: s.polarity,
            amps: s.amps.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

pub(crate) fn total_dim(wires: &[WireDecl]) -> TensorResult<usize> {
    let mut total: usize = 1;
    for w in wires {
        if w.dim == 0 {
            return Err(TensorError::ZeroDim(w.id));
        }
        total = total
            .checked_mul(w.dim)
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or(TensorError::TooLarge(usize::MAX))?;
    }
    Ok(total)
}

fn check_distinct(wires: &[WireDecl]) -> TensorResult<()> {
    for (i, w) in wires.iter().enumerate() {
        if wires[..i].iter().any(|v| v.id == w.id) {
            return Err(TensorError::DuplicateWire(w.id));
        }
    }
    Ok(())
}

/// Row-major strides for the given dimensions.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Reorders a row-major tensor. `perm[k]` is the old axis that becomes new axis `k`.
pub(crate) fn permute_amps(amps: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return amps.to_vec();
    }
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
    let mut out = Vec::with_capacity(amps.len());
    let mut idx = vec![0usize; new_dims.len()];
    let mut src = 0usize;
    for _ in 0..amps.len() {
        out.push(amps[src]);
        // odometer increment over the new axes
        for k in (0..new_dims.len()).rev() {
            idx[k] += 1;
            src += src_strides[k];
            if idx[k] < new_dims[k] {
                break;
            }
            src -= src_strides[k] * new_dims[k];
            idx[k] = 0;
        }
    }
    out
}

/// Applies `m` (rows = Π out, cols = Π in) to the leading axes of a tensor
/// whose first block has size `m.ncols()`. Returns the row-major result with
/// the new block leading.
pub(crate) fn apply_leading(m: &Matrix, amps: &[C64]) -> Vec<C64> {
    let cols = m.ncols();
    debug_assert_eq!(amps.len() % cols.max(1), 0);
    let rest = if cols == 0 { 0 } else { amps.len() / cols };
    let block = DMatrix::from_row_slice(cols, rest, amps);
    let prod = m * block;
    // nalgebra stores column-major; transpose to read rows in order
    prod.transpose().as_slice().to_vec()
}

impl State {
    pub fn new(wires: Vec<WireDecl>, amps: Vec<C64>, polarity: Polarity) -> TensorResult<Self> {
        check_distinct(&wires)?;
        let n = total_dim(&wires)?;
        if amps.len() != n {
            return Err(TensorError::DimMismatch { expected: n, found: amps.len() });
        }
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        Ok(Self { wires, amps, polarity })
    }

    pub fn ket(wires: Vec<WireDecl>, amps: Vec<C64>) -> TensorResult<Self> {
        Self::new(wires, amps, Polarity::Ket)
    }

    /// Computational basis ket `|index⟩` in the row-major product basis.
    pub fn basis(wires: Vec<WireDecl>, index: usize) -> TensorResult<Self> {
        let n = total_dim(&wires)?;
        if index >= n {
            return Err(TensorError::DimMismatch { expected: n, found: index + 1 });
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[index] = C64::new(1.0, 0.0);
        Self::ket(wires, amps)
    }

    pub fn zeros(wires: Vec<WireDecl>, polarity: Polarity) -> TensorResult<Self> {
        let n = total_dim(&wires)?;
        Self::new(wires, vec![C64::new(0.0, 0.0); n], polarity)
    }

    /// A state on no wires: a single complex number.
    pub fn scalar(c: C64) -> Self {
        Self { wires: Vec::new(), amps: vec![c], polarity: Polarity::Ket }
    }

    /// `Σ_i |i…i⟩`, unnormalized. All wires must share a dimension.
    pub fn bell(wires: Vec<WireDecl>) -> TensorResult<Self> {
        let d = wires.first().map_or(1, |w| w.dim);
        if let Some(w) = wires.iter().find(|w| w.dim != d) {
            return Err(TensorError::DimMismatch { expected: d, found: w.dim });
        }
        let n = total_dim(&wires)?;
        let mut amps = vec![C64::new(0.0, 0.0); n];
        let step: usize = strides(&wires.iter().map(|w| w.dim).collect::<Vec<_>>()).iter().sum();
        for i in 0..d {
            amps[i * step] = C64::new(1.0, 0.0);
        }
        Self::ket(wires, amps)
    }

    pub fn wires(&self) -> &[WireDecl] {
        &self.wires
    }

    pub fn wire_ids(&self) -> Vec<WireId> {
        self.wires.iter().map(|w| w.id).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.wires.iter().map(|w| w.dim).collect()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn has_wire(&self, id: WireId) -> bool {
        self.wires.iter().any(|w| w.id == id)
    }

    /// The single amplitude of a state on no wires.
    pub fn as_scalar(&self) -> Option<C64> {
        self.wires.is_empty().then(|| self.amps[0])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, c: C64) -> State {
        State { amps: self.amps.iter().map(|a| a * c).collect(), ..self.clone() }
    }

    pub fn normalized(&self) -> State {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(C64::new(1.0 / n, 0.0))
        }
    }

    /// Elementwise conjugate, polarity unchanged.
    pub fn conj(&self) -> State {
        State { amps: self.amps.iter().map(|a| a.conj()).collect(), ..self.clone() }
    }

    /// `self + other`, with `other` permuted into this state's wire order.
    pub fn add(&self, other: &State) -> TensorResult<State> {
        self.check_same_polarity(other)?;
        let other = other.permute(&self.wire_ids())?;
        if other.dims() != self.dims() {
            return Err(TensorError::WireMismatch("dimensions differ".into()));
        }
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect();
        Ok(State { amps, ..self.clone() })
    }

    fn check_same_polarity(&self, other: &State) -> TensorResult<()> {
        if self.polarity != other.polarity {
            return Err(TensorError::PolarityMismatch { expected: self.polarity, found: other.polarity });
        }
        Ok(())
    }

    fn require(&self, polarity: Polarity) -> TensorResult<()> {
        if self.polarity != polarity {
            return Err(TensorError::PolarityMismatch { expected: polarity, found: self.polarity });
        }
        Ok(())
    }

    fn axis_of(&self, id: WireId) -> Option<usize> {
        self.wires.iter().position(|w| w.id == id)
    }

    /// Re-indexes the same abstract vector so that its wires appear in `order`.
    pub fn permute(&self, order: &[WireId]) -> TensorResult<State> {
        let bad = || TensorError::BadPermutation(order.to_vec());
        if order.len() != self.wires.len() {
            return Err(bad());
        }
        let mut perm = Vec::with_capacity(order.len());
        for (k, id) in order.iter().enumerate() {
            let axis = self.axis_of(*id).ok_or_else(bad)?;
            if order[..k].contains(id) {
                return Err(bad());
            }
            perm.push(axis);
        }
        let amps = permute_amps(&self.amps, &self.dims(), &perm);
        let wires = perm.iter().map(|&p| self.wires[p]).collect();
        Ok(State { wires, amps, polarity: self.polarity })
    }

    /// Permutes into ascending wire id order.
    pub fn sorted(&self) -> State {
        let mut order = self.wire_ids();
        order.sort();
        self.permute(&order).expect("sorted ids are a permutation")
    }

    /// Renames wires, keeping dimensions and amplitudes.
    pub fn relabel(&self, map: impl Fn(WireId) -> WireId) -> TensorResult<State> {
        let wires: Vec<WireDecl> =
            self.wires.iter().map(|w| WireDecl { id: map(w.id), dim: w.dim }).collect();
        check_distinct(&wires)?;
        Ok(State { wires, ..self.clone() })
    }

    /// Dagger: flips polarity and conjugates coordinates.
    pub fn dagger(&self) -> State {
        State {
            wires: self.wires.clone(),
            amps: self.amps.iter().map(|a| a.conj()).collect(),
            polarity: self.polarity.flip(),
        }
    }

    /// Evaluates a bra on a ket over the same wires (no conjugation).
    pub fn pair(bra: &State, ket: &State) -> TensorResult<C64> {
        bra.require(Polarity::Bra)?;
        ket.require(Polarity::Ket)?;
        let ket = ket.permute(&bra.wire_ids()).map_err(|_| mismatch(bra, ket))?;
        Ok(bra.amps.iter().zip(&ket.amps).map(|(a, b)| a * b).sum())
    }

    /// Renders the state as a short text line.
    pub fn describe(&self) -> String {
        let wires: Vec<String> = self.wires.iter().map(|w| format!("{}:{}", w.id, w.dim)).collect();
        let amps: Vec<String> = self.amps.iter().map(|c| format_complex(*c)).collect();
        format!("{} on ({}) [{}]", self.polarity, wires.join(","), amps.join(", "))
    }
}

pub(crate) fn format_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn mismatch(a: &State, b: &State) -> TensorError {
    TensorError::WireMismatch(format!("{:?} vs {:?}", a.wire_ids(), b.wire_ids()))
}

/// Outer product; result wires are `a.wires ++ b.wires`.
pub fn tensor_product(a: &State, b: &State) -> TensorResult<State> {
    a.check_same_polarity(b)?;
    if let Some(w) = a.wires.iter().find(|w| b.has_wire(w.id)) {
        return Err(TensorError::WireCollision(w.id));
    }
    let mut wires = a.wires.clone();
    wires.extend_from_slice(&b.wires);
    total_dim(&wires)?;
    let mut amps = Vec::with_capacity(a.amps.len() * b.amps.len());
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    Ok(State { wires, amps, polarity: a.polarity })
}

/// Tensor product of a list of states, in order. The empty product is the scalar 1.
pub fn tensor_all<'a>(states: impl IntoIterator<Item = &'a State>) -> TensorResult<State> {
    let mut acc = State::scalar(C64::new(1.0, 0.0));
    for s in states {
        if acc.wires.is_empty() && acc.polarity != s.polarity {
            acc.polarity = s.polarity;
        }
        acc = tensor_product(&acc, s)?;
    }
    Ok(acc)
}

/// Inner product `(a, b)`, antilinear in `a`.
pub fn inner(a: &State, b: &State) -> TensorResult<C64> {
    a.require(Polarity::Ket)?;
    b.require(Polarity::Ket)?;
    let b = b.permute(&a.wire_ids()).map_err(|_| mismatch(a, b))?;
    if a.dims() != b.dims() {
        return Err(mismatch(a, &b));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Partial inner product `Ω⌋Φ`. The result lives on `phi`'s remaining wires,
/// in `phi`'s order; contracting every wire yields a scalar state.
pub fn contract(omega: &State, phi: &State) -> TensorResult<State> {
    omega.require(Polarity::Ket)?;
    phi.require(Polarity::Ket)?;
    let mut order = Vec::with_capacity(phi.wires.len());
    for w in &omega.wires {
        match phi.wires.iter().find(|p| p.id == w.id) {
            Some(p) if p.dim == w.dim => order.push(p.id),
            _ => return Err(mismatch(omega, phi)),
        }
    }
    let rest: Vec<WireDecl> =
        phi.wires.iter().filter(|p| !omega.has_wire(p.id)).copied().collect();
    order.extend(rest.iter().map(|w| w.id));
    let lead = phi.permute(&order)?;
    let row = Matrix::from_row_iterator(1, omega.amps.len(), omega.amps.iter().map(|a| a.conj()));
    let amps = apply_leading(&row, &lead.amps);
    Ok(State { wires: rest, amps, polarity: Polarity::Ket })
}

/// Applies the rank-one operator `|Λ⟩⟨Ω|` (identity elsewhere) to `phi`.
/// The result is in ascending wire id order.
pub fn apply_rank_one(lambda: &State, omega: &State, phi: &State) -> TensorResult<State> {
    let residual = contract(omega, phi)?;
    Ok(tensor_product(lambda, &residual)?.sorted())
}

pub fn unitarity_deviation(u: &Matrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &Matrix) -> TensorResult<()> {
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(TensorError::NotUnitary(dev));
    }
    Ok(())
}

/// Applies a single-wire matrix to `wire` of `phi` without checking unitarity.
/// Bras transform by the transpose, so that `⟨ψ|` becomes `⟨ψ|U`.
pub(crate) fn apply_single_wire(u: &Matrix, wire: WireId, phi: &State) -> TensorResult<State> {
    let axis = phi
        .axis_of(wire)
        .ok_or_else(|| TensorError::WireMismatch(format!("wire {wire} not present")))?;
    let dim = phi.wires[axis].dim;
    if u.nrows() != dim || u.ncols() != dim {
        return Err(TensorError::DimMismatch { expected: dim, found: u.nrows() });
    }
    let mut order = phi.wire_ids();
    order.remove(axis);
    order.insert(0, wire);
    let lead = phi.permute(&order)?;
    let m = match phi.polarity {
        Polarity::Ket => u.clone(),
        Polarity::Bra => u.transpose(),
    };
    let amps = apply_leading(&m, &lead.amps);
    let moved = State { wires: lead.wires, amps, polarity: phi.polarity };
    moved.permute(&phi.wire_ids())
}

/// Applies a unitary on one wire, identity elsewhere.
pub fn apply_unitary(u: &Matrix, wire: WireId, phi: &State) -> TensorResult<State> {
    if let Some(w) = phi.wires.iter().find(|w| w.id == wire) {
        if u.nrows() != w.dim || u.ncols() != w.dim {
            return Err(TensorError::DimMismatch { expected: w.dim, found: u.nrows() });
        }
    }
    check_unitary(u)?;
    apply_single_wire(u, wire, phi)
}

/// Seeded generator used throughout: ChaCha8 seeded via `seed_from_u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One complex Gaussian sample: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random ket with i.i.d. complex Gaussian amplitudes drawn from `rng`.
pub fn random_state_with(wires: Vec<WireDecl>, rng: &mut impl Rng) -> TensorResult<State> {
    let n = total_dim(&wires)?;
    let amps = (0..n).map(|_| complex_gaussian(rng)).collect();
    State::ket(wires, amps)
}

/// Deterministic random ket: ChaCha8 seeded with `seed`, amplitudes drawn in
/// row-major order, real part first.
pub fn random_state(wires: Vec<WireDecl>, seed: u64) -> TensorResult<State> {
    random_state_with(wires, &mut rng_from_seed(seed))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary_with(dim: usize, rng: &mut impl Rng) -> Matrix {
    let g = Matrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(dim: usize, seed: u64) -> Matrix {
    random_unitary_with(dim, &mut rng_from_seed(seed))
}

/// Relative L2 distance `‖a − b‖ / max(‖a‖, ‖b‖)`, 0 when both vanish.
pub fn rel_err_amps(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rel_err on vectors of different length");
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Relative L2 distance between two states after aligning wire order.
/// Mismatched wire sets or polarities count as infinitely far apart.
pub fn rel_err(a: &State, b: &State) -> f64 {
    if a.polarity != b.polarity {
        return f64::INFINITY;
    }
    match b.permute(&a.wire_ids()) {
        Ok(b) if b.dims() == a.dims() => rel_err_amps(&a.amps, &b.amps),
        _ => f64::INFINITY,
    }
}

pub fn rel_err_scalar(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn q(id: u32) -> WireDecl {
        WireDecl::new(id, 2)
    }

    #[test]
    fn basis_outer_product() {
        let a = State::basis(vec![q(1)], 0).unwrap();
        let b = State::basis(vec![q(2)], 1).unwrap();
        let p = tensor_product(&a, &b).unwrap();
        assert_eq!(p.wire_ids(), vec![WireId(1), WireId(2)]);
        assert_eq!(p.amps(), &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    }

    #[test]
    fn scalar_moves_between_factors() {
        let a = State::basis(vec![q(1)], 0).unwrap();
        let b = State::basis(vec![q(2)], 0).unwrap();
        let two = c(2.0, 0.0);
        let lhs = tensor_product(&a.scale(two), &b).unwrap();
        let rhs = tensor_product(&a, &b.scale(two)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn outer_product_matches_double_loop() {
        let a = random_state(vec![WireDecl::new(1, 2)], 7).unwrap();
        let b = random_state(vec![WireDecl::new(2, 3)], 8).unwrap();
        let p = tensor_product(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(p.amps()[i * 3 + j], a.amps()[i] * b.amps()[j]);
            }
        }
    }

    #[test]
    fn product_errors() {
        let a = State::basis(vec![q(1)], 0).unwrap();
        assert_eq!(tensor_product(&a, &a), Err(TensorError::WireCollision(WireId(1))));
        let b = State::basis(vec![q(2)], 0).unwrap().dagger();
        assert!(matches!(tensor_product(&a, &b), Err(TensorError::PolarityMismatch { .. })));
    }

    #[test]
    fn permute_swaps_coordinates() {
        let s = State::basis(vec![q(1), q(2)], 1).unwrap(); // |01⟩
        let p = s.permute(&[WireId(2), WireId(1)]).unwrap();
        assert_eq!(p.amps()[2], c(1.0, 0.0)); // |10⟩ over (2,1)
        assert_eq!(s.permute(&s.wire_ids()).unwrap(), s);
        assert!(matches!(s.permute(&[WireId(1)]), Err(TensorError::BadPermutation(_))));
        assert!(matches!(s.permute(&[WireId(1), WireId(1)]), Err(TensorError::BadPermutation(_))));
        assert!(matches!(s.permute(&[WireId(1), WireId(3)]), Err(TensorError::BadPermutation(_))));
    }

    #[test]
    fn permute_round_trip_three_wires() {
        let wires = vec![WireDecl::new(1, 2), WireDecl::new(2, 3), WireDecl::new(3, 2)];
        let s = random_state(wires, 11).unwrap();
        let order = [WireId(3), WireId(1), WireId(2)];
        let back = s.permute(&order).unwrap().permute(&s.wire_ids()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn inner_products() {
        let zero = State::basis(vec![q(1)], 0).unwrap();
        let one = State::basis(vec![q(1)], 1).unwrap();
        assert_eq!(inner(&zero, &one).unwrap(), c(0.0, 0.0));
        let theta = State::bell(vec![q(1), q(2)]).unwrap();
        assert_eq!(inner(&theta, &theta).unwrap(), c(2.0, 0.0));
        let a = random_state(vec![q(1), q(2)], 1).unwrap();
        let b = random_state(vec![q(1), q(2)], 2).unwrap();
        let lhs = inner(&a.scale(c(0.0, 1.0)), &b).unwrap();
        let rhs = c(0.0, -1.0) * inner(&a, &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        let other = State::basis(vec![q(3)], 0).unwrap();
        assert!(matches!(inner(&zero, &other), Err(TensorError::WireMismatch(_))));
    }

    #[test]
    fn dagger_conjugates() {
        let zero = State::basis(vec![q(1)], 0).unwrap();
        let bra = zero.dagger();
        assert_eq!(bra.polarity(), Polarity::Bra);
        assert_eq!(bra.amps(), zero.amps());
        let i0 = zero.scale(c(0.0, 1.0)).dagger();
        assert_eq!(i0.amps(), &[c(0.0, -1.0), c(0.0, 0.0)]);
        let s = random_state(vec![q(1), WireDecl::new(2, 3)], 5).unwrap();
        assert_eq!(s.dagger().dagger(), s);
    }

    #[test]
    fn contraction_examples() {
        let omega = State::basis(vec![q(2), q(3)], 0).unwrap();
        let phi = State::basis(vec![q(1), q(2), q(3)], 0).unwrap();
        let r = contract(&omega, &phi).unwrap();
        assert_eq!(r, State::basis(vec![q(1)], 0).unwrap());

        let omega = State::basis(vec![q(2)], 1).unwrap();
        let phi = State::basis(vec![q(1), q(2)], 0).unwrap();
        let r = contract(&omega, &phi).unwrap();
        assert_eq!(r.wire_ids(), vec![WireId(1)]);
        assert!(r.is_zero());

        let bad = State::basis(vec![q(9)], 0).unwrap();
        assert!(matches!(contract(&bad, &phi), Err(TensorError::WireMismatch(_))));
    }

    #[test]
    fn full_contraction_is_inner() {
        let omega = random_state(vec![q(1), WireDecl::new(2, 3)], 3).unwrap();
        let phi = random_state(vec![WireDecl::new(2, 3), q(1)], 4).unwrap();
        let r = contract(&omega, &phi).unwrap();
        let s = r.as_scalar().unwrap();
        assert!((s - inner(&omega, &phi).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn contraction_of_product_input() {
        // Ω on (1,2), Φ = α ⊗ β with α on (1,2), β on 3: Ω⌋Φ = (Ω, α) β
        let omega = random_state(vec![q(1), q(2)], 21).unwrap();
        let alpha = random_state(vec![q(1), q(2)], 22).unwrap();
        let beta = random_state(vec![q(3)], 23).unwrap();
        let phi = tensor_product(&alpha, &beta).unwrap();
        let r = contract(&omega, &phi).unwrap();
        let expect = beta.scale(inner(&omega, &alpha).unwrap());
        assert!(rel_err(&r, &expect) < 1e-12);
    }

    #[test]
    fn rank_one_examples() {
        let zz = State::basis(vec![q(1), q(2)], 0).unwrap();
        assert_eq!(apply_rank_one(&zz, &zz, &zz).unwrap(), zz);
        let theta = State::bell(vec![q(1), q(2)]).unwrap();
        let phi = State::basis(vec![q(1), q(2)], 1).unwrap();
        assert!(apply_rank_one(&theta, &theta, &phi).unwrap().is_zero());
    }

    #[test]
    fn unitary_examples() {
        let phi = State::basis(vec![q(1), q(2)], 0).unwrap();
        let id = Matrix::identity(2, 2);
        assert_eq!(apply_unitary(&id, WireId(1), &phi).unwrap(), phi);
        let x = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let out = apply_unitary(&x, WireId(1), &phi).unwrap();
        assert_eq!(out, State::basis(vec![q(1), q(2)], 2).unwrap());
        let not_u = Matrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(apply_unitary(&not_u, WireId(1), &phi), Err(TensorError::NotUnitary(_))));
        let big = Matrix::identity(3, 3);
        assert!(matches!(apply_unitary(&big, WireId(1), &phi), Err(TensorError::DimMismatch { .. })));
    }

    #[test]
    fn random_unitary_preserves_norm() {
        let phi = random_state(vec![q(1), WireDecl::new(2, 3)], 9).unwrap();
        let u = random_unitary(3, 10);
        check_unitary(&u).unwrap();
        let out = apply_unitary(&u, WireId(2), &phi).unwrap();
        assert!((out.norm() - phi.norm()).abs() <= 1e-9 * phi.norm());
    }

    #[test]
    fn random_state_is_deterministic() {
        let a = random_state(vec![q(1), q(2)], 42).unwrap();
        let b = random_state(vec![q(1), q(2)], 42).unwrap();
        assert_eq!(a, b);
        let c1 = random_state(vec![q(1)], 1).unwrap();
        let c2 = random_state(vec![q(1)], 2).unwrap();
        assert_ne!(c1, c2);
    }

    #[test]
    fn bell_on_qutrits() {
        let t = State::bell(vec![WireDecl::new(1, 3), WireDecl::new(2, 3)]).unwrap();
        let ones: Vec<usize> =
            t.amps().iter().enumerate().filter(|(_, a)| a.re == 1.0).map(|(i, _)| i).collect();
        assert_eq!(ones, vec![0, 4, 8]);
        assert!(State::bell(vec![q(1), WireDecl::new(2, 3)]).is_err());
    }

    #[test]
    fn constructor_guards() {
        assert!(matches!(
            State::ket(vec![q(1)], vec![c(1.0, 0.0)]),
            Err(TensorError::DimMismatch { .. })
        ));
        assert!(matches!(
            State::ket(vec![q(1)], vec![c(f64::NAN, 0.0), c(0.0, 0.0)]),
            Err(TensorError::NonFinite)
        ));
        let huge: Vec<WireDecl> = (1..=21).map(q).collect();
        assert!(matches!(State::zeros(huge, Polarity::Ket), Err(TensorError::TooLarge(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = random_state(vec![q(1), WireDecl::new(2, 3)], 4).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"wires":[{"id":1,"dim":2},{"id":2,"dim":3}],"polarity":"ket","amps":[["#));
        let back: State = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"wires":[{"id":1,"dim":2}],"polarity":"ket","amps":[[1,0]]}"#;
        assert!(serde_json::from_str::<State>(bad).is_err());
    }
}
