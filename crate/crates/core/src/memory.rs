//! Central-spin memory: the dot electron coupled to a chain of spin-1/2
//! nuclei on the tube axis.
//!
//! Space layout is `electron_spin ⊗ electron_valley ⊗ nucleus_1 ⊗ … ⊗
//! nucleus_N`; digit 0 of every factor is "up". With the dipole axis along
//! the tube, each site contributes
//!
//! `−J_k [I_z L_z + 2 I_z S_z] + (J_k/2)(I₊S₋ + I₋S₊)`, `J_k = c/|z_k − z_e|³`,
//!
//! which conserves `S_z + Σ I_z` and the valley.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dotmodel::{DotError, DotParameters};
use crate::qstate::{
    CMatrix, CVector, HilbertSpace, Operator, Propagator, QStateError, QuantumState, C64,
};
use crate::units::{HBAR, MU_B, MU_N};

pub const MAX_NUCLEI: usize = 10;
/// Proton g-factor.
pub const G_PROTON: f64 = 5.5857;
pub const ELECTRON_SPIN: usize = 0;
pub const ELECTRON_VALLEY: usize = 1;
/// Largest field (T) searched for the Hartmann-Hahn point.
pub const HH_SEARCH_LIMIT: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MemoryError {
    #[error("nucleus {index} sits on the electron position {position} Å")]
    CoincidentPositions { index: usize, position: f64 },
    #[error("invalid memory parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("no Hartmann-Hahn resonance within ±{0} T")]
    NoResonanceFound(f64),
    #[error(transparent)]
    Dot(#[from] DotError),
    #[error(transparent)]
    State(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, MemoryError>;

/// Spin-1/2 nuclei on the tube axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclearChain {
    /// Axial coordinates (Å), strictly increasing.
    pub positions: Vec<f64>,
    /// Nuclear g-factor.
    pub g_n: f64,
}

impl NuclearChain {
    /// `n` nuclei at `first, first + spacing, …`.
    pub fn uniform(n: usize, first: f64, spacing: f64) -> Self {
        Self {
            positions: (0..n).map(|k| first + spacing * k as f64).collect(),
            g_n: G_PROTON,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(MemoryError::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        if self.positions.is_empty() || self.positions.len() > MAX_NUCLEI {
            return bad("positions", &format!("need 1..={MAX_NUCLEI} nuclei"));
        }
        if self.positions.iter().any(|x| !x.is_finite()) {
            return bad("positions", "must be finite");
        }
        if self.positions.windows(2).any(|w| w[1] <= w[0]) {
            return bad("positions", "must be strictly increasing");
        }
        if !self.g_n.is_finite() {
            return bad("g_n", "must be finite");
        }
        Ok(())
    }
}

impl Default for NuclearChain {
    fn default() -> Self {
        Self::uniform(1, 3.0, 3.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valley {
    Up,
    Down,
}

impl Valley {
    fn digit(self) -> usize {
        match self {
            Valley::Up => 0,
            Valley::Down => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryScenario {
    pub chain: NuclearChain,
    pub dot: DotParameters,
    /// Axial electron position (Å).
    pub electron_position: f64,
    /// Static field (T).
    pub b_field: f64,
    /// Prefactor of the `1/r³` law (μeV·Å³).
    pub coupling_scale: f64,
    /// Valley the electron occupies while writing.
    pub electron_valley: Valley,
}

impl Default for MemoryScenario {
    fn default() -> Self {
        // Nearest-neighbour coupling of 1 μeV.
        Self {
            chain: NuclearChain::default(),
            dot: DotParameters::default(),
            electron_position: 0.0,
            b_field: 0.0,
            coupling_scale: 27.0,
            electron_valley: Valley::Down,
        }
    }
}

impl MemoryScenario {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.dot.validate()?;
        let bad = |field, reason: &str| {
            Err(MemoryError::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        if !self.electron_position.is_finite() {
            return bad("electron_position", "must be finite");
        }
        if !self.b_field.is_finite() {
            return bad("b_field", "must be finite");
        }
        if !(self.coupling_scale >= 0.0) || !self.coupling_scale.is_finite() {
            return bad("coupling_scale", "must be finite and >= 0");
        }
        for (index, &z) in self.chain.positions.iter().enumerate() {
            if z == self.electron_position {
                return Err(MemoryError::CoincidentPositions { index, position: z });
            }
        }
        Ok(())
    }

    /// Site couplings `J_k = coupling_scale/|z_k − z_e|³` (μeV).
    pub fn couplings(&self) -> Vec<f64> {
        self.chain
            .positions
            .iter()
            .map(|z| self.coupling_scale / (z - self.electron_position).abs().powi(3))
            .collect()
    }

    pub fn space(&self) -> HilbertSpace {
        memory_space(self.chain.len())
    }
}

pub fn memory_space(n: usize) -> HilbertSpace {
    let mut f = vec![
        ("electron_spin".to_string(), 2usize),
        ("electron_valley".to_string(), 2),
    ];
    f.extend((1..=n).map(|k| (format!("nucleus_{k}"), 2)));
    HilbertSpace::new(f).expect("memory space stays below the dimension cap")
}

/// Spin digits of basis index `i`: ±1 for electron spin, valley, nuclei.
struct Bits {
    n: usize,
}

impl Bits {
    fn shift(&self, factor: usize) -> usize {
        self.n + 1 - factor
    }
    fn digit(&self, i: usize, factor: usize) -> usize {
        (i >> self.shift(factor)) & 1
    }
    fn sign(&self, i: usize, factor: usize) -> f64 {
        1.0 - 2.0 * self.digit(i, factor) as f64
    }
    fn flip(&self, i: usize, factor: usize) -> usize {
        i ^ (1 << self.shift(factor))
    }
}

/// Diagonal (Ising) part of the hyperfine coupling for basis index `i`.
fn ising_energy(bits: &Bits, j: &[f64], i: usize) -> f64 {
    let s = bits.sign(i, ELECTRON_SPIN);
    let l = bits.sign(i, ELECTRON_VALLEY);
    j.iter()
        .enumerate()
        .map(|(k, jk)| {
            let iz = 0.5 * bits.sign(i, 2 + k);
            -jk * (iz * l + iz * s)
        })
        .sum()
}

/// Zeeman energy of basis index `i`.
fn zeeman_energy(s: &MemoryScenario, bits: &Bits, b: f64, i: usize) -> f64 {
    let p = &s.dot;
    let electron = p.zeeman_sign
        * (0.5 * p.g_s * MU_B * b * bits.sign(i, ELECTRON_SPIN)
            + p.mu_orb * b * bits.sign(i, ELECTRON_VALLEY));
    let nuclear: f64 = (0..s.chain.len())
        .map(|k| -s.chain.g_n * MU_N * b * 0.5 * bits.sign(i, 2 + k))
        .sum();
    electron + nuclear
}

/// Electron-nuclear coupling without Zeeman terms.
pub fn hyperfine_hamiltonian(s: &MemoryScenario) -> Result<Operator> {
    s.validate()?;
    let n = s.chain.len();
    let bits = Bits { n };
    let j = s.couplings();
    let dim = 1usize << (n + 2);
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(ising_energy(&bits, &j, i), 0.0);
        // Flip-flop: electron ↓ with nucleus k ↑  <->  electron ↑ with nucleus k ↓.
        if bits.digit(i, ELECTRON_SPIN) == 1 {
            for (k, jk) in j.iter().enumerate() {
                if bits.digit(i, 2 + k) == 0 {
                    let partner = bits.flip(bits.flip(i, ELECTRON_SPIN), 2 + k);
                    m[(partner, i)] = C64::new(0.5 * jk, 0.0);
                    m[(i, partner)] = C64::new(0.5 * jk, 0.0);
                }
            }
        }
    }
    Ok(Operator::hermitian(s.space(), m)?)
}

/// Adds the electron (spin and orbital) and nuclear Zeeman terms at the
/// scenario field.
pub fn add_zeeman(s: &MemoryScenario, h: &Operator) -> Result<Operator> {
    add_zeeman_at(s, h, s.b_field)
}

fn add_zeeman_at(s: &MemoryScenario, h: &Operator, b: f64) -> Result<Operator> {
    if !h.space().same_shape(&s.space()) {
        return Err(QStateError::SpaceMismatch(
            "Hamiltonian does not match the scenario chain".into(),
        )
        .into());
    }
    let bits = Bits { n: s.chain.len() };
    let mut m = h.matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] += C64::new(zeeman_energy(s, &bits, b, i), 0.0);
    }
    Ok(Operator::hermitian(h.space().clone(), m)?)
}

/// Full memory Hamiltonian at field `b`.
pub fn memory_hamiltonian(s: &MemoryScenario, b: f64) -> Result<Operator> {
    add_zeeman_at(s, &hyperfine_hamiltonian(s)?, b)
}

/// `S_z + Σ_k I_z^k`, diagonal.
pub fn total_magnetization(n: usize) -> Operator {
    let bits = Bits { n };
    let dim = 1usize << (n + 2);
    let diag = CVector::from_fn(dim, |i, _| {
        let m = 0.5 * bits.sign(i, ELECTRON_SPIN)
            + (0..n).map(|k| 0.5 * bits.sign(i, 2 + k)).sum::<f64>();
        C64::new(m, 0.0)
    });
    Operator::hermitian(memory_space(n), CMatrix::from_diagonal(&diag))
        .expect("diagonal is Hermitian")
}

/// Collective partner of "electron ↓, all nuclei ⇑": the single nuclear
/// flip weighted by the site flip-flop amplitudes, normalized, together
/// with the collective coupling `A = sqrt(Σ (J_k/2)²)`.
fn collective_flip(j: &[f64]) -> (Vec<f64>, f64) {
    let a: Vec<f64> = j.iter().map(|x| 0.5 * x).collect();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        let w = 1.0 / (a.len() as f64).sqrt();
        return (vec![w; a.len()], 0.0);
    }
    (a.iter().map(|x| x / norm).collect(), norm)
}

/// Index with electron spin `e`, the scenario valley, all nuclei ⇑ except
/// `down` (if any).
fn basis_index(s: &MemoryScenario, e: usize, down: Option<usize>) -> usize {
    let n = s.chain.len();
    let bits = Bits { n };
    let mut i = (e << bits.shift(ELECTRON_SPIN))
        | (s.electron_valley.digit() << bits.shift(ELECTRON_VALLEY));
    if let Some(k) = down {
        i |= 1 << bits.shift(2 + k);
    }
    i
}

/// `⟨↑_e, D|H_d(b)|↑_e, D⟩ − ⟨↓_e, ⇑…⇑|H_d(b)|↓_e, ⇑…⇑⟩` with `H_d` the
/// diagonal part of the memory Hamiltonian.
pub fn hartmann_hahn_detuning(s: &MemoryScenario, b: f64) -> f64 {
    let n = s.chain.len();
    let bits = Bits { n };
    let j = s.couplings();
    let (w, _) = collective_flip(&j);
    let diag = |i: usize| ising_energy(&bits, &j, i) + zeeman_energy(s, &bits, b, i);
    let upper: f64 = (0..n)
        .map(|k| w[k] * w[k] * diag(basis_index(s, 0, Some(k))))
        .sum();
    upper - diag(basis_index(s, 1, None))
}

/// Field where the flip-flop pair is degenerate, from a scan over
/// `±HH_SEARCH_LIMIT` followed by bisection.
pub fn hartmann_hahn_field(s: &MemoryScenario) -> Result<f64> {
    s.validate()?;
    let f = |b: f64| hartmann_hahn_detuning(s, b);
    let n_scan = 2000;
    let grid: Vec<f64> = (0..=n_scan)
        .map(|k| -HH_SEARCH_LIMIT + 2.0 * HH_SEARCH_LIMIT * k as f64 / n_scan as f64)
        .collect();
    // Prefer the root closest to zero field.
    let mut best: Option<(f64, f64)> = None;
    for w in grid.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if fa == 0.0 || fa.signum() != fb.signum() {
            let mid = 0.5 * (w[0] + w[1]);
            if best.is_none_or(|(lo, hi)| mid.abs() < (0.5 * (lo + hi)).abs()) {
                best = Some((w[0], w[1]));
            }
        }
    }
    let (mut lo, mut hi) = best.ok_or(MemoryError::NoResonanceFound(HH_SEARCH_LIMIT))?;
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || mid == lo || mid == hi {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of writing an electron spin qubit into the nuclei.
#[derive(Clone, Debug)]
pub struct WriteResult {
    pub joint: QuantumState,
    pub transfer_fidelity: f64,
    /// Hartmann-Hahn field used (T).
    pub b_field: f64,
    /// Swap time `πħ/(2A)` (ns).
    pub t_swap: f64,
    /// Collective flip-flop element `A` (μeV); equals `J/2` for one nucleus.
    pub flip_flop: f64,
}

/// Full-swap time `πħ/(2A)` for flip-flop element `a`; zero when `a = 0`.
pub fn swap_time(a: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        PI * HBAR / (2.0 * a.abs())
    }
}

/// Initial joint state: `electron_qubit ⊗ valley ⊗ |⇑…⇑⟩`.
pub fn initial_state(s: &MemoryScenario, electron_qubit: &QuantumState) -> Result<QuantumState> {
    if electron_qubit.space().dim() != 2 {
        return Err(
            QStateError::SpaceMismatch("electron qubit must be a single spin".into()).into(),
        );
    }
    let mut amps = CVector::zeros(s.space().dim());
    for e in 0..2 {
        amps[basis_index(s, e, None)] = electron_qubit.amplitudes()[e];
    }
    Ok(QuantumState::new(s.space(), amps)?)
}

/// Hartmann-Hahn flip-flop swap of `a|↑⟩ + b|↓⟩` into the nuclei.
///
/// The field is set to the resonance, the joint state evolves for
/// `πħ/(2A)`, and the fidelity is `⟨χ|ρ_n|χ⟩` with `χ = a|⇑…⇑⟩ − i·b|D⟩`,
/// the ideal swap image, evaluated in the frame co-rotating with the
/// diagonal part of the Hamiltonian.
pub fn write_protocol(s: &MemoryScenario, electron_qubit: &QuantumState) -> Result<WriteResult> {
    let b = hartmann_hahn_field(s)?;
    let j = s.couplings();
    let (w, a_coll) = collective_flip(&j);
    let t_swap = swap_time(a_coll);
    let h = memory_hamiltonian(s, b)?;
    let psi0 = initial_state(s, electron_qubit)?;
    let joint = Propagator::new(&h)?.evolve(&psi0, t_swap)?;

    // Remove the free (diagonal) phases before comparing.
    let rotated = CVector::from_fn(joint.space().dim(), |i, _| {
        joint.amplitudes()[i] * C64::from_polar(1.0, h.matrix()[(i, i)].re * t_swap / HBAR)
    });
    let rotated = QuantumState::new(joint.space().clone(), rotated)?;
    let n = s.chain.len();
    let nuclei: Vec<usize> = (2..n + 2).collect();
    let rho = rotated.reduced_density_matrix(&nuclei)?;
    let a = electron_qubit.amplitudes()[0];
    let bb = electron_qubit.amplitudes()[1];
    let mut chi = CVector::zeros(1 << n);
    chi[0] = a;
    for (k, wk) in w.iter().enumerate() {
        chi[1 << (n - 1 - k)] = C64::new(0.0, -1.0) * bb * *wk;
    }
    let transfer_fidelity = (chi.adjoint() * &rho * &chi)[(0, 0)].re.clamp(0.0, 1.0);
    Ok(WriteResult {
        joint,
        transfer_fidelity,
        b_field: b,
        t_swap,
        flip_flop: a_coll,
    })
}

/// `⟨Σ_k I_z^k⟩/N` of a joint memory state.
pub fn faraday_readout(joint: &QuantumState, chain: &NuclearChain) -> Result<f64> {
    let n = chain.len();
    if n == 0 || !joint.space().same_shape(&memory_space(n)) {
        return Err(
            QStateError::SpaceMismatch("state does not match the nuclear chain".into()).into(),
        );
    }
    let bits = Bits { n };
    let total: f64 = joint
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * (0..n).map(|k| 0.5 * bits.sign(i, 2 + k)).sum::<f64>())
        .sum();
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceTrajectory {
    pub times: Vec<f64>,
    /// `Tr[ρ_e(0)·ρ̃_e(t)]` with the electron Zeeman precession removed.
    pub overlap: Vec<f64>,
    /// Same with the coupling switched off.
    pub overlap_offloaded: Vec<f64>,
    /// Nuclear polarization `⟨Σ I_z⟩/N`.
    pub faraday: Vec<f64>,
}

fn electron_overlaps(
    s: &MemoryScenario,
    psi0: &QuantumState,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = add_zeeman(s, &hyperfine_hamiltonian(s)?)?;
    let prop = Propagator::new(&h)?;
    let electron = [ELECTRON_SPIN, ELECTRON_VALLEY];
    let rho0 = psi0.reduced_density_matrix(&electron)?;
    // Electron Zeeman energies on the 4 electron levels.
    let bits = Bits { n: 0 };
    let p = &s.dot;
    let ez: Vec<f64> = (0..4)
        .map(|i| {
            p.zeeman_sign
                * (0.5 * p.g_s * MU_B * s.b_field * bits.sign(i, ELECTRON_SPIN)
                    + p.mu_orb * s.b_field * bits.sign(i, ELECTRON_VALLEY))
        })
        .collect();
    let mut overlap = Vec::with_capacity(times.len());
    let mut faraday = Vec::with_capacity(times.len());
    for &t in times {
        let psi = prop.evolve(psi0, t)?;
        let rho = psi.reduced_density_matrix(&electron)?;
        let tilde = CMatrix::from_fn(4, 4, |r, c| {
            rho[(r, c)] * C64::from_polar(1.0, (ez[r] - ez[c]) * t / HBAR)
        });
        overlap.push((&rho0 * tilde).trace().re);
        faraday.push(faraday_readout(&psi, &s.chain)?);
    }
    Ok((overlap, faraday))
}

/// Electron-state overlap along free evolution at the scenario field,
/// with and without the nuclear coupling.
pub fn coherence_trajectory(
    s: &MemoryScenario,
    psi0: &QuantumState,
    times: &[f64],
) -> Result<CoherenceTrajectory> {
    s.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(MemoryError::InvalidParameter {
            field: "times",
            reason: "must be finite and ascending".into(),
        });
    }
    if !psi0.space().same_shape(&s.space()) {
        return Err(
            QStateError::SpaceMismatch("initial state does not match the scenario".into()).into(),
        );
    }
    let (overlap, faraday) = electron_overlaps(s, psi0, times)?;
    let off = MemoryScenario {
        coupling_scale: 0.0,
        ..s.clone()
    };
    let (overlap_offloaded, _) = electron_overlaps(&off, psi0, times)?;
    Ok(CoherenceTrajectory {
        times: times.to_vec(),
        overlap,
        overlap_offloaded,
        faraday,
    })
}
