//! Single-dot spin⊗valley model.
//!
//! The dot space is `spin ⊗ valley`. Basis index 0 of each factor is the
//! "up" state: `|+1/2⟩_S` for spin and `|↑⟩_L` (m_l = +1, clockwise
//! circulation) for valley. The four product states are
//!
//! | index | state | spin | valley |
//! |-------|-------|------|--------|
//! | 0     | α     | +1/2 | ↑      |
//! | 1     | δ     | +1/2 | ↓      |
//! | 2     | β     | −1/2 | ↑      |
//! | 3     | γ     | −1/2 | ↓      |

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::clebsch_gordan;
use crate::qstate::{
    self, pauli, CMatrix, CVector, HilbertSpace, Operator, QStateError, QuantumState, C64,
};
use crate::units::MU_B;

pub const SPIN_FACTOR: usize = 0;
pub const VALLEY_FACTOR: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DotError {
    #[error("invalid dot parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("field grid is empty")]
    EmptyGrid,
    #[error("field grid must be strictly increasing (index {0})")]
    UnsortedGrid(usize),
    #[error("no level crossing or anti-crossing inside [{0}, {1}] T")]
    NoCrossingFound(f64, f64),
    #[error(transparent)]
    State(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, DotError>;

/// Physical constants of one nanotube dot.
///
/// `delta_so` is the zero-field splitting between the two Kramers doublets.
/// The bare spin-orbit coefficient entering the Hamiltonian is
/// `sqrt(delta_so² − delta_kk²)`, so valley mixing does not move the doublet
/// centres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotParameters {
    /// Zero-field Kramers-doublet splitting (μeV).
    pub delta_so: f64,
    /// Valley-mixing anti-crossing gap (μeV).
    pub delta_kk: f64,
    /// Spin g-factor.
    pub g_s: f64,
    /// Orbital magnetic moment (μeV/T).
    pub mu_orb: f64,
    /// Gate lever arm (μeV/V).
    pub lever_arm: f64,
    /// Sign (±1) of the spin-orbit term `(Δ/2)·σz^S·σz^L`.
    pub spin_orbit_sign: f64,
    /// Sign (±1) shared by the orbital and spin Zeeman terms.
    pub zeeman_sign: f64,
}

impl Default for DotParameters {
    fn default() -> Self {
        Self {
            delta_so: 400.0,
            delta_kk: 65.0,
            g_s: 2.0,
            mu_orb: 330.0,
            lever_arm: 1.0e5,
            spin_orbit_sign: -1.0,
            zeeman_sign: 1.0,
        }
    }
}

impl DotParameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(DotError::InvalidParameter {
                field,
                reason: reason.to_string(),
            })
        };
        let finite = [
            ("delta_so", self.delta_so),
            ("delta_kk", self.delta_kk),
            ("g_s", self.g_s),
            ("mu_orb", self.mu_orb),
            ("lever_arm", self.lever_arm),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if self.delta_so <= 0.0 {
            return bad("delta_so", "must be > 0");
        }
        if self.delta_kk < 0.0 {
            return bad("delta_kk", "must be >= 0");
        }
        if self.delta_kk > self.delta_so {
            return bad("delta_kk", "must not exceed delta_so");
        }
        if self.g_s <= 0.0 {
            return bad("g_s", "must be > 0");
        }
        if self.mu_orb <= 0.0 {
            return bad("mu_orb", "must be > 0");
        }
        if self.spin_orbit_sign.abs() != 1.0 {
            return bad("spin_orbit_sign", "must be +1 or -1");
        }
        if self.zeeman_sign.abs() != 1.0 {
            return bad("zeeman_sign", "must be +1 or -1");
        }
        Ok(())
    }

    /// Spin-orbit coefficient of the Hamiltonian (μeV).
    pub fn bare_spin_orbit(&self) -> f64 {
        (self.delta_so * self.delta_so - self.delta_kk * self.delta_kk)
            .max(0.0)
            .sqrt()
    }
}

pub fn dot_space() -> HilbertSpace {
    HilbertSpace::new([("spin", 2usize), ("valley", 2)]).expect("static space")
}

/// Labels of the named dot states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateLabel {
    Alpha,
    Beta,
    Gamma,
    Delta,
    Omega1,
    Omega2,
    Kramers1,
    Kramers2,
}

impl StateLabel {
    pub const PRODUCT: [StateLabel; 4] = [
        StateLabel::Alpha,
        StateLabel::Delta,
        StateLabel::Beta,
        StateLabel::Gamma,
    ];

    /// Basis index of a product state, `None` for superpositions.
    pub fn basis_index(self) -> Option<usize> {
        match self {
            StateLabel::Alpha => Some(0),
            StateLabel::Delta => Some(1),
            StateLabel::Beta => Some(2),
            StateLabel::Gamma => Some(3),
            _ => None,
        }
    }

    pub fn from_basis_index(i: usize) -> StateLabel {
        Self::PRODUCT[i]
    }

    /// `(σz^S, σz^L)` eigenvalues of a product state.
    pub fn spin_valley_signs(self) -> Option<(f64, f64)> {
        self.basis_index().map(|i| {
            let s = if i < 2 { 1.0 } else { -1.0 };
            let l = if i % 2 == 0 { 1.0 } else { -1.0 };
            (s, l)
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::Alpha => "alpha",
            StateLabel::Beta => "beta",
            StateLabel::Gamma => "gamma",
            StateLabel::Delta => "delta",
            StateLabel::Omega1 => "omega1",
            StateLabel::Omega2 => "omega2",
            StateLabel::Kramers1 => "kramers1",
            StateLabel::Kramers2 => "kramers2",
        }
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedState {
    pub label: StateLabel,
    pub state: QuantumState,
    /// Relative phase used to build the state (0 for product states).
    pub phase: f64,
}

pub fn product_state(label: StateLabel) -> QuantumState {
    let i = label
        .basis_index()
        .expect("product_state: not a product-state label");
    QuantumState::basis(dot_space(), i).expect("static basis state")
}

pub fn named_product(label: StateLabel) -> NamedState {
    NamedState {
        label,
        state: product_state(label),
        phase: 0.0,
    }
}

fn superpose(label: StateLabel, a: StateLabel, b: StateLabel, phi: f64) -> NamedState {
    let mut amps = CVector::zeros(4);
    amps[a.basis_index().unwrap()] = C64::new(1.0, 0.0);
    amps[b.basis_index().unwrap()] = C64::from_polar(1.0, phi);
    let state = QuantumState::normalized(dot_space(), amps).expect("non-zero superposition");
    NamedState {
        label,
        state,
        phase: phi,
    }
}

/// Kramers doublets `|Ω₁⟩ = (α + e^{iφ₁}γ)/√2` and `|Ω₂⟩ = (β + e^{iφ₂}δ)/√2`.
pub fn kramers_states(phi1: f64, phi2: f64) -> (NamedState, NamedState) {
    (
        superpose(
            StateLabel::Kramers1,
            StateLabel::Alpha,
            StateLabel::Gamma,
            phi1,
        ),
        superpose(
            StateLabel::Kramers2,
            StateLabel::Beta,
            StateLabel::Delta,
            phi2,
        ),
    )
}

/// Valley superpositions at fixed spin:
/// `|ω₁⟩ = |−1/2⟩(|↓⟩ + e^{iφ₃}|↑⟩)/√2`, `|ω₂⟩ = |+1/2⟩(|↑⟩ + e^{iφ₄}|↓⟩)/√2`.
pub fn omega_states(phi3: f64, phi4: f64) -> (NamedState, NamedState) {
    (
        superpose(
            StateLabel::Omega1,
            StateLabel::Gamma,
            StateLabel::Beta,
            phi3,
        ),
        superpose(
            StateLabel::Omega2,
            StateLabel::Alpha,
            StateLabel::Delta,
            phi4,
        ),
    )
}

/// 4×4 dot Hamiltonian in μeV:
///
/// `H = s_so (Δ₀/2) σz^S σz^L + s_z (μ_orb B σz^L + (g_s/2) μ_B B σz^S)
///      + (Δ_KK′/2) σx^L + lever_arm · V_g`
///
/// with `Δ₀ = sqrt(Δ_SO² − Δ_KK′²)`.
pub fn build_hamiltonian(p: &DotParameters, b: f64, vg: f64) -> Result<Operator> {
    p.validate()?;
    let space = dot_space();
    let sz = Operator::embed(&space, SPIN_FACTOR, &pauli::z())?;
    let lz = Operator::embed(&space, VALLEY_FACTOR, &pauli::z())?;
    let lx = Operator::embed(&space, VALLEY_FACTOR, &pauli::x())?;
    let so = qstate::kron(
        &Operator::new(HilbertSpace::qubit("spin"), pauli::z())?,
        &Operator::new(HilbertSpace::qubit("valley"), pauli::z())?,
    );
    let m = so.matrix() * C64::new(p.spin_orbit_sign * p.bare_spin_orbit() / 2.0, 0.0)
        + lz.matrix() * C64::new(p.zeeman_sign * p.mu_orb * b, 0.0)
        + sz.matrix() * C64::new(p.zeeman_sign * 0.5 * p.g_s * MU_B * b, 0.0)
        + lx.matrix() * C64::new(p.delta_kk / 2.0, 0.0)
        + CMatrix::identity(4, 4) * C64::new(p.lever_arm * vg, 0.0);
    Ok(Operator::hermitian(space, m)?)
}

/// Diagonal matrix element of a product state (the level energy with
/// valley mixing neglected).
pub fn diagonal_energy(p: &DotParameters, label: StateLabel, b: f64, vg: f64) -> Result<f64> {
    let h = build_hamiltonian(p, b, vg)?;
    let i = label.basis_index().ok_or(DotError::InvalidParameter {
        field: "label",
        reason: format!("{label} is not a product state"),
    })?;
    Ok(h.matrix()[(i, i)].re)
}

#[derive(Clone, Debug)]
pub struct SpectrumPoint {
    pub b_field: f64,
    pub gate_v: f64,
    /// Ascending energies (μeV).
    pub energies: [f64; 4],
    /// Eigenvectors as columns, ordered like `energies`.
    pub states: CMatrix,
}

pub fn spectrum_point(p: &DotParameters, b: f64, vg: f64) -> Result<SpectrumPoint> {
    let h = build_hamiltonian(p, b, vg)?;
    let eig = qstate::eigh(&h)?;
    let mut energies = [0.0; 4];
    energies.copy_from_slice(&eig.values);
    Ok(SpectrumPoint {
        b_field: b,
        gate_v: vg,
        energies,
        states: eig.vectors,
    })
}

/// Spectrum on a strictly increasing field grid. Points are computed in
/// parallel; output order follows the grid.
pub fn spectrum_sweep(p: &DotParameters, b_grid: &[f64], vg: f64) -> Result<Vec<SpectrumPoint>> {
    if b_grid.is_empty() {
        return Err(DotError::EmptyGrid);
    }
    if let Some(i) = b_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(DotError::UnsortedGrid(i + 1));
    }
    p.validate()?;
    b_grid
        .par_iter()
        .map(|&b| spectrum_point(p, b, vg))
        .collect()
}

/// A located gap minimum between two adjacent levels.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub b_star: f64,
    /// Minimal splitting (μeV).
    pub gap: f64,
    /// Product states spanning the two levels at `b_star`, in basis order.
    pub pair: (StateLabel, StateLabel),
    /// Indices (ascending order) of the two adjacent levels.
    pub levels: (usize, usize),
}

const CROSSING_SCAN_POINTS: usize = 801;
const GOLDEN_TOL: f64 = 1e-10;

fn level_gap(p: &DotParameters, b: f64, lower: usize) -> Result<f64> {
    let e = spectrum_point(p, b, 0.0)?.energies;
    Ok(e[lower + 1] - e[lower])
}

/// Golden-section minimization of `f` on `[lo, hi]`.
pub(crate) fn golden_section(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// Locates every local minimum of the gaps between adjacent levels inside
/// `b_range` (at `V_g = 0`). Each minimum is bracketed on a uniform scan and
/// refined by golden-section search.
pub fn find_crossings(p: &DotParameters, b_range: (f64, f64)) -> Result<Vec<Crossing>> {
    p.validate()?;
    let (b_lo, b_hi) = b_range;
    if !(b_hi > b_lo) {
        return Err(DotError::InvalidParameter {
            field: "b_range",
            reason: "upper bound must exceed lower bound".into(),
        });
    }
    let n = CROSSING_SCAN_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| b_lo + (b_hi - b_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let spectra = spectrum_sweep(p, &grid, 0.0)?;
    let mut out = Vec::new();
    for lower in 0..3 {
        let gaps: Vec<f64> = spectra
            .iter()
            .map(|s| s.energies[lower + 1] - s.energies[lower])
            .collect();
        for j in 1..n - 1 {
            if !(gaps[j] < gaps[j - 1] && gaps[j] <= gaps[j + 1]) {
                continue;
            }
            let (b_star, gap) = golden_section(grid[j - 1], grid[j + 1], GOLDEN_TOL, |b| {
                level_gap(p, b, lower)
            })?;
            let pt = spectrum_point(p, b_star, 0.0)?;
            out.push(Crossing {
                b_star,
                gap: gap.max(0.0),
                pair: dominant_pair(&pt.states, lower),
                levels: (lower, lower + 1),
            });
        }
    }
    if out.is_empty() {
        return Err(DotError::NoCrossingFound(b_lo, b_hi));
    }
    out.sort_by(|a, b| a.b_star.total_cmp(&b.b_star).then(a.levels.cmp(&b.levels)));
    Ok(out)
}

/// The two product states carrying most weight in the span of eigenvectors
/// `lower` and `lower + 1`. The weights are basis-independent inside that
/// span, so exact degeneracies are handled.
fn dominant_pair(vectors: &CMatrix, lower: usize) -> (StateLabel, StateLabel) {
    let mut weights: Vec<(usize, f64)> = (0..4)
        .map(|i| {
            (
                i,
                vectors[(i, lower)].norm_sqr() + vectors[(i, lower + 1)].norm_sqr(),
            )
        })
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (mut i, mut j) = (weights[0].0, weights[1].0);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    (
        StateLabel::from_basis_index(i),
        StateLabel::from_basis_index(j),
    )
}

/// Coupled `|J, m_j⟩` states of `L = 1 ⊗ S = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledState {
    /// Twice `J`.
    pub two_j: i64,
    /// Twice `m_j`.
    pub two_m: i64,
}

impl std::fmt::Display for CoupledState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{}/2,{}/2>", self.two_j, self.two_m)
    }
}

pub const COUPLED_BASIS: [CoupledState; 6] = [
    CoupledState { two_j: 3, two_m: 3 },
    CoupledState { two_j: 3, two_m: 1 },
    CoupledState {
        two_j: 3,
        two_m: -1,
    },
    CoupledState {
        two_j: 3,
        two_m: -3,
    },
    CoupledState { two_j: 1, two_m: 1 },
    CoupledState {
        two_j: 1,
        two_m: -1,
    },
];

/// Full 6×6 change of basis from uncoupled `|m_l, m_s⟩` (ordered m_l = 1, 0,
/// −1 major, m_s = +1/2, −1/2 minor) to [`COUPLED_BASIS`].
pub fn coupled_basis_unitary() -> DMatrix<f64> {
    let uncoupled: Vec<(i64, i64)> = [2, 0, -2]
        .iter()
        .flat_map(|&ml| [(ml, 1), (ml, -1)])
        .collect();
    DMatrix::from_fn(6, 6, |r, c| {
        let cs = COUPLED_BASIS[r];
        let (ml, ms) = uncoupled[c];
        clebsch_gordan(2, ml, 1, ms, cs.two_j, cs.two_m)
    })
}

/// 6×4 isometry mapping the dot space (m_l = ±1 only) into the coupled basis.
pub fn coupled_basis_matrix() -> DMatrix<f64> {
    let full = coupled_basis_unitary();
    // dot index -> uncoupled column: spin digit s (0 = +1/2), valley digit l (0 = m_l +1).
    DMatrix::from_fn(6, 4, |r, i| {
        let (s, l) = (i / 2, i % 2);
        let ml_col = if l == 0 { 0 } else { 2 };
        full[(r, 2 * ml_col + s)]
    })
}

/// Coefficients of a dot state on [`COUPLED_BASIS`].
pub fn coupled_basis_transform(s: &QuantumState) -> Result<Vec<(CoupledState, C64)>> {
    if !s.space().same_shape(&dot_space()) {
        return Err(QStateError::SpaceMismatch(
            "coupled-basis transform needs the 4-dim spin⊗valley space".into(),
        )
        .into());
    }
    let t = coupled_basis_matrix().map(|x| C64::new(x, 0.0));
    let coeffs = t * s.amplitudes();
    Ok(COUPLED_BASIS
        .iter()
        .copied()
        .zip(coeffs.iter().copied())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Logical qubit on the zero-field Kramers pair: `|0⟩ = γ`, `|1⟩ = α`.
    BZero,
    /// Logical qubit on orbital angular momentum: `|0⟩ = β`, `|1⟩ = γ`.
    BPlus,
}

/// `(|0⟩, |1⟩)` of a logical encoding.
pub fn logical_encoding(regime: Regime) -> (NamedState, NamedState) {
    match regime {
        Regime::BZero => (
            named_product(StateLabel::Gamma),
            named_product(StateLabel::Alpha),
        ),
        Regime::BPlus => (
            named_product(StateLabel::Beta),
            named_product(StateLabel::Gamma),
        ),
    }
}
