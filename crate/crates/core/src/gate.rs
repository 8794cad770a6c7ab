//! Gate vocabulary and dense unitaries.
//!
//! Two-qubit matrices use the basis order `|00>, |01>, |10>, |11>` where the
//! first operand of an instruction is the most significant bit. Every truth
//! table in this crate (and the simulator's amplitude layout) follows that
//! convention.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Tolerance for checking that constructed matrices are unitary.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for comparing decompositions against their targets.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("gate {kind} needs {expected} bound parameter(s), got {got}")]
    UnboundParameters {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// The ten gate kinds understood by the toolchain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    /// Single-qubit rotation `R(theta, phi)`.
    R,
    /// Ising interaction `XX(chi)` (ion traps).
    XX,
    /// Cross-resonance interaction `ZX(chi)`.
    ZX,
    CZ,
    H,
    T,
    /// Alias of `R(pi, 0)`.
    X,
    /// Alias of `R(pi, pi/2)`.
    Y,
    CNOT,
    SWAP,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::R,
        GateKind::XX,
        GateKind::ZX,
        GateKind::CZ,
        GateKind::H,
        GateKind::T,
        GateKind::X,
        GateKind::Y,
        GateKind::CNOT,
        GateKind::SWAP,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::R | GateKind::H | GateKind::T | GateKind::X | GateKind::Y => 1,
            GateKind::XX | GateKind::ZX | GateKind::CZ | GateKind::CNOT | GateKind::SWAP => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::R => 2,
            GateKind::XX | GateKind::ZX => 1,
            _ => 0,
        }
    }

    /// Names of the bound parameters, in order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            GateKind::R => &["theta", "phi"],
            GateKind::XX | GateKind::ZX => &["chi"],
            _ => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::R => "R",
            GateKind::XX => "XX",
            GateKind::ZX => "ZX",
            GateKind::CZ => "CZ",
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::CNOT => "CNOT",
            GateKind::SWAP => "SWAP",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense square unitary stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<C64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Unitary { dim, entries }
    }

    /// Builds a matrix from row-major entries. Panics if the entry count is
    /// not a perfect square.
    pub fn from_rows(entries: Vec<C64>) -> Self {
        let dim = (entries.len() as f64).sqrt() as usize;
        assert_eq!(dim * dim, entries.len(), "entry count must be square");
        Unitary { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        Unitary {
            dim: n,
            entries: out,
        }
    }

    pub fn dagger(&self) -> Unitary {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                out[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Unitary {
            dim: n,
            entries: out,
        }
    }

    pub fn scale(&self, factor: C64) -> Unitary {
        Unitary {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// Kronecker product with `self` on the more significant index.
    pub fn kron(&self, rhs: &Unitary) -> Unitary {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut out = vec![ZERO; n * n];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.entries[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        out[(r1 * b + r2) * n + c1 * b + c2] = x * rhs.entries[r2 * b + c2];
                    }
                }
            }
        }
        Unitary {
            dim: n,
            entries: out,
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.entries[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// True when `U U^dagger` is the identity to within `tol` per entry.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.dagger())
            .max_abs_diff(&Unitary::identity(self.dim))
            <= tol
    }
}

/// `R(theta, phi)`: `|0> -> cos(theta/2)|0> - i e^{-i phi} sin(theta/2)|1>` and
/// `|1> -> cos(theta/2)|1> - i e^{i phi} sin(theta/2)|0>`.
pub fn rotation_unitary(theta: f64, phi: f64) -> Unitary {
    let (s, c) = (theta / 2.0).sin_cos();
    let minus_i = -I;
    Unitary::from_rows(vec![
        C64::new(c, 0.0),
        minus_i * C64::from_polar(1.0, phi) * s,
        minus_i * C64::from_polar(1.0, -phi) * s,
        C64::new(c, 0.0),
    ])
}

/// `exp(-i chi P)` for a two-qubit Pauli product `P` given as a 4x4 matrix.
fn pauli_exponential(chi: f64, pauli: &Unitary) -> Unitary {
    let (s, c) = chi.sin_cos();
    let mut out = pauli.scale(C64::new(0.0, -s));
    for i in 0..4 {
        out.entries[i * 4 + i] += c;
    }
    out
}

/// Single-qubit Pauli matrices, indexed I, X, Y, Z.
pub fn pauli(index: usize) -> Unitary {
    match index {
        0 => Unitary::identity(2),
        1 => Unitary::from_rows(vec![ZERO, ONE, ONE, ZERO]),
        2 => Unitary::from_rows(vec![ZERO, -I, I, ZERO]),
        3 => Unitary::from_rows(vec![ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// `XX(chi) = exp(-i chi X⊗X)`.
pub fn xx_unitary(chi: f64) -> Unitary {
    pauli_exponential(chi, &pauli(1).kron(&pauli(1)))
}

/// `ZX(chi) = exp(-i chi Z⊗X)`, Z on the first operand.
pub fn zx_unitary(chi: f64) -> Unitary {
    pauli_exponential(chi, &pauli(3).kron(&pauli(1)))
}

/// `exp(-i chi P_a⊗P_b)` for Pauli indices `a`, `b`.
pub fn pauli_rotation(chi: f64, a: usize, b: usize) -> Unitary {
    pauli_exponential(chi, &pauli(a).kron(&pauli(b)))
}

fn real(values: &[f64]) -> Unitary {
    Unitary::from_rows(values.iter().map(|&v| C64::new(v, 0.0)).collect())
}

/// Matrix for a parameter-free gate kind.
pub fn standard_unitary(kind: GateKind) -> Result<Unitary, GateError> {
    let u = match kind {
        GateKind::R | GateKind::XX | GateKind::ZX => {
            return Err(GateError::UnboundParameters {
                kind,
                expected: kind.param_count(),
                got: 0,
            })
        }
        GateKind::CZ => real(&[
            1., 0., 0., 0., //
            0., 1., 0., 0., //
            0., 0., 1., 0., //
            0., 0., 0., -1.,
        ]),
        GateKind::H => real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
        GateKind::T => Unitary::from_rows(vec![ONE, ZERO, ZERO, C64::from_polar(1.0, FRAC_PI_4)]),
        GateKind::X => rotation_unitary(PI, 0.0),
        GateKind::Y => rotation_unitary(PI, FRAC_PI_2),
        GateKind::CNOT => real(&[
            1., 0., 0., 0., //
            0., 1., 0., 0., //
            0., 0., 0., 1., //
            0., 0., 1., 0.,
        ]),
        GateKind::SWAP => real(&[
            1., 0., 0., 0., //
            0., 0., 1., 0., //
            0., 1., 0., 0., //
            0., 0., 0., 1.,
        ]),
    };
    Ok(u)
}

/// Matrix for any gate kind with its bound parameters.
pub fn gate_unitary(kind: GateKind, params: &[f64]) -> Result<Unitary, GateError> {
    if params.len() != kind.param_count() {
        return Err(GateError::UnboundParameters {
            kind,
            expected: kind.param_count(),
            got: params.len(),
        });
    }
    match kind {
        GateKind::R => Ok(rotation_unitary(params[0], params[1])),
        GateKind::XX => Ok(xx_unitary(params[0])),
        GateKind::ZX => Ok(zx_unitary(params[0])),
        _ => standard_unitary(kind),
    }
}

/// True iff some unit-modulus `c` gives `max|a - c b| <= tol`. The phase is
/// read off the largest-magnitude entry of `b`.
pub fn equal_up_to_global_phase(a: &Unitary, b: &Unitary, tol: f64) -> Result<bool, GateError> {
    if a.dim != b.dim {
        return Err(GateError::DimensionMismatch(a.dim, b.dim));
    }
    let (idx, pivot) = b
        .entries
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(i, v)| (i, *v))
        .expect("non-empty matrix");
    if pivot.norm() == 0.0 {
        return Ok(a.entries.iter().all(|e| e.norm() <= tol));
    }
    let ratio = a.entries[idx] / pivot;
    if ratio.norm() == 0.0 {
        return Ok(false);
    }
    let phase = ratio / ratio.norm();
    Ok(a.max_abs_diff(&b.scale(phase)) <= tol)
}

/// Which two-qubit interaction a backend implements natively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntanglingFamily {
    Xx,
    Zx,
    Cz,
}

impl EntanglingFamily {
    pub fn name(self) -> &'static str {
        match self {
            EntanglingFamily::Xx => "xx",
            EntanglingFamily::Zx => "zx",
            EntanglingFamily::Cz => "cz",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "xx" => Some(EntanglingFamily::Xx),
            "zx" => Some(EntanglingFamily::Zx),
            "cz" => Some(EntanglingFamily::Cz),
            _ => None,
        }
    }

    pub fn entangler(self) -> GateKind {
        match self {
            EntanglingFamily::Xx => GateKind::XX,
            EntanglingFamily::Zx => GateKind::ZX,
            EntanglingFamily::Cz => GateKind::CZ,
        }
    }
}

/// The instructions a backend executes without compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeGateSet {
    pub name: String,
    pub family: EntanglingFamily,
    pub single_qubit: Vec<GateKind>,
    pub two_qubit: Vec<GateKind>,
    /// Angle the entangler is calibrated to; zero for the parameter-free CZ.
    pub entangling_angle: f64,
}

impl NativeGateSet {
    pub fn new(family: EntanglingFamily) -> Self {
        let entangling_angle = match family {
            EntanglingFamily::Xx | EntanglingFamily::Zx => FRAC_PI_4,
            EntanglingFamily::Cz => 0.0,
        };
        NativeGateSet {
            name: family.name().to_string(),
            family,
            single_qubit: vec![GateKind::R],
            two_qubit: vec![family.entangler()],
            entangling_angle,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        EntanglingFamily::from_name(name).map(NativeGateSet::new)
    }

    pub fn contains(&self, kind: GateKind) -> bool {
        self.single_qubit.contains(&kind) || self.two_qubit.contains(&kind)
    }
}
