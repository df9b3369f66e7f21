//! One- and two-qubit gate protocols for nanotube dots.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dotmodel::{self, DotError, DotParameters, StateLabel};
use crate::qstate::{
    self, exp_minus_i, pauli, CMatrix, CVector, HilbertSpace, Operator, QStateError, QuantumState,
    C64,
};
use crate::units::{angular_ghz, resonant_ghz, HBAR, MICRO_EV_IN_J, MU0_OVER_4PI_SI};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("pulse kind {found:?} cannot drive {op} (expected {expected:?})")]
    WrongPulseKind {
        op: &'static str,
        expected: PulseKind,
        found: PulseKind,
    },
    #[error("integrator step too coarse: {0}")]
    StepSizeTooCoarse(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid gate parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error(transparent)]
    Dot(#[from] DotError),
    #[error(transparent)]
    State(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, GateError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    FieldKick,
    MicrowaveDrive,
    Free,
}

/// One control segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Static field during the segment (T).
    pub b_field: f64,
    /// Segment length (ns).
    pub duration: f64,
    /// Drive amplitude on the valley-flip channel (μeV).
    pub drive_amp: f64,
    /// Drive frequency (GHz).
    pub drive_freq: f64,
    /// Drive phase (rad).
    pub phase: f64,
}

impl PulseSpec {
    pub fn field_kick(b_field: f64, duration: f64) -> Self {
        Self {
            kind: PulseKind::FieldKick,
            b_field,
            duration,
            drive_amp: 0.0,
            drive_freq: 0.0,
            phase: 0.0,
        }
    }

    pub fn free(b_field: f64, duration: f64) -> Self {
        Self {
            kind: PulseKind::Free,
            ..Self::field_kick(b_field, duration)
        }
    }

    pub fn microwave(
        b_field: f64,
        duration: f64,
        drive_amp: f64,
        drive_freq: f64,
        phase: f64,
    ) -> Self {
        Self {
            kind: PulseKind::MicrowaveDrive,
            b_field,
            duration,
            drive_amp,
            drive_freq,
            phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(GateError::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return bad("duration", "must be finite and >= 0");
        }
        if !self.b_field.is_finite() {
            return bad("b_field", "must be finite");
        }
        if self.kind == PulseKind::MicrowaveDrive {
            if !self.drive_amp.is_finite() || !self.phase.is_finite() {
                return bad("drive_amp", "must be finite");
            }
            if !(self.drive_freq >= 0.0) || !self.drive_freq.is_finite() {
                return bad("drive_freq", "must be finite and >= 0");
            }
        } else if self.drive_amp != 0.0 || self.drive_freq != 0.0 {
            return bad(
                "drive_amp",
                "drive fields are only used by microwave pulses",
            );
        }
        Ok(())
    }

    fn expect(&self, op: &'static str, kind: PulseKind) -> Result<()> {
        if self.kind != kind {
            return Err(GateError::WrongPulseKind {
                op,
                expected: kind,
                found: self.kind,
            });
        }
        self.validate()
    }
}

/// Result of a field-kick phase gate on the `B = 0` logical qubit.
#[derive(Clone, Debug)]
pub struct PhaseGate {
    /// Ideal gate `diag(1, e^{-iθ})` in the logical basis `(|0⟩ = γ, |1⟩ = α)`.
    pub unitary: CMatrix,
    /// `θ = (E_α − E_γ)·t/ħ` with the diagonal (mixing-free) level energies.
    pub theta: f64,
    /// Exact 4-level evolution projected on `(γ, α)`.
    pub projected: CMatrix,
    /// Largest population lost from the logical subspace over the two
    /// logical inputs.
    pub leakage: f64,
}

/// Relative-phase gate produced by holding the field `kick.b_field` for
/// `kick.duration`.
pub fn phase_gate(p: &DotParameters, kick: &PulseSpec) -> Result<PhaseGate> {
    kick.expect("phase_gate", PulseKind::FieldKick)?;
    let h = dotmodel::build_hamiltonian(p, kick.b_field, 0.0)?;
    let ia = StateLabel::Alpha.basis_index().unwrap();
    let ig = StateLabel::Gamma.basis_index().unwrap();
    let e_alpha = h.matrix()[(ia, ia)].re;
    let e_gamma = h.matrix()[(ig, ig)].re;
    let theta = (e_alpha - e_gamma) * kick.duration / HBAR;

    let mut unitary = CMatrix::identity(2, 2);
    unitary[(1, 1)] = C64::from_polar(1.0, -theta);

    let u = qstate::propagator(&h, kick.duration)?;
    let logical = [ig, ia];
    let projected = CMatrix::from_fn(2, 2, |r, c| u[(logical[r], logical[c])]);
    let leakage = (0..2)
        .map(|c| 1.0 - (0..2).map(|r| projected[(r, c)].norm_sqr()).sum::<f64>())
        .fold(0.0_f64, f64::max)
        .max(0.0);
    Ok(PhaseGate {
        unitary,
        theta,
        projected,
        leakage,
    })
}

/// Relative phase `arg(U₁₁/U₀₀)` of a diagonal-dominant 2×2 unitary, in
/// `(-π, π]`.
pub fn relative_phase(u: &CMatrix) -> f64 {
    (u[(1, 1)] / u[(0, 0)]).arg()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiMode {
    RwaTwoLevel,
    FullFourLevel,
}

/// Default integrator step as a fraction of the drive period.
pub const STEPS_PER_PERIOD: f64 = 200.0;
/// Largest accepted change of the final amplitudes under step halving.
pub const STEP_HALVING_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 10;

#[derive(Clone, Debug)]
pub struct RabiRun {
    pub times: Vec<f64>,
    /// Population of the bare β state at each sample time.
    pub p_beta: Vec<f64>,
    pub final_state: QuantumState,
    /// `Ω_R = |a·d|/(2ħ)` in rad/ns, `d` the valley-flip matrix element
    /// between the two dressed levels.
    pub rabi_frequency: f64,
    /// `δ = (ω − ω₀)/2` in rad/ns.
    pub detuning: f64,
    /// Accepted integrator step (ns); `None` for the RWA model.
    pub step: Option<f64>,
}

/// Two-level rotating-wave model of the valley drive.
///
/// The static spin-down block `{β, γ}` is diagonalized first; the drive
/// `a·cos(ωt + φ)·σx^L` is projected onto the transition between its two
/// eigenstates and its counter-rotating part is dropped. Populations are
/// reported in the bare basis.
#[derive(Clone, Debug)]
pub struct RwaModel {
    e_low: f64,
    omega0: f64,
    omega: f64,
    /// Dressed levels expressed on `(β, γ)`.
    dressed: [[C64; 2]; 2],
    h_rot: CMatrix,
    c0: [C64; 2],
    rabi_frequency: f64,
}

const BETA: usize = 2;
const GAMMA: usize = 3;

impl RwaModel {
    pub fn new(p: &DotParameters, drive: &PulseSpec) -> Result<Self> {
        drive.expect("valley_rabi", PulseKind::MicrowaveDrive)?;
        let h = dotmodel::build_hamiltonian(p, drive.b_field, 0.0)?;
        let block = CMatrix::from_fn(2, 2, |r, c| h.matrix()[(BETA + r, BETA + c)]);
        let eig = qstate::eigh_matrix(&block);
        let mut dressed = [[C64::default(); 2]; 2];
        for (k, d) in dressed.iter_mut().enumerate() {
            let v = eig.vectors.column(k);
            // Fix the gauge: largest component real and positive.
            let big = if v[0].norm() >= v[1].norm() {
                v[0]
            } else {
                v[1]
            };
            let g = big.conj() / big.norm();
            *d = [v[0] * g, v[1] * g];
        }
        // ⟨0|σx|1⟩ in the (β, γ) block.
        let d01 = dressed[0][0].conj() * dressed[1][1] + dressed[0][1].conj() * dressed[1][0];
        let omega0 = (eig.values[1] - eig.values[0]) / HBAR;
        let omega = angular_ghz(drive.drive_freq);
        let half = 0.5 * drive.drive_amp;
        let mut h_rot = CMatrix::zeros(2, 2);
        h_rot[(0, 1)] = d01 * C64::from_polar(half, drive.phase);
        h_rot[(1, 0)] = h_rot[(0, 1)].conj();
        h_rot[(1, 1)] = C64::new(HBAR * (omega0 - omega), 0.0);
        // Start in bare γ.
        let c0 = [dressed[0][1].conj(), dressed[1][1].conj()];
        Ok(Self {
            e_low: eig.values[0],
            omega0,
            omega,
            dressed,
            h_rot,
            c0,
            rabi_frequency: (drive.drive_amp * d01.norm()).abs() / (2.0 * HBAR),
        })
    }

    pub fn rabi_frequency(&self) -> f64 {
        self.rabi_frequency
    }

    /// Transition angular frequency of the dressed pair (rad/ns).
    pub fn transition_frequency(&self) -> f64 {
        self.omega0
    }

    pub fn detuning(&self) -> f64 {
        0.5 * (self.omega - self.omega0)
    }

    /// Amplitudes on `(β, γ)` in the lab frame.
    pub fn amplitudes_at(&self, t: f64) -> [C64; 2] {
        let u = exp_minus_i(&(&self.h_rot * C64::new(t / HBAR, 0.0)));
        let r0 = u[(0, 0)] * self.c0[0] + u[(0, 1)] * self.c0[1];
        let r1 = u[(1, 0)] * self.c0[0] + u[(1, 1)] * self.c0[1];
        let l0 = r0 * C64::from_polar(1.0, -self.e_low * t / HBAR);
        let l1 = r1 * C64::from_polar(1.0, -(self.e_low / HBAR + self.omega) * t);
        [
            l0 * self.dressed[0][0] + l1 * self.dressed[1][0],
            l0 * self.dressed[0][1] + l1 * self.dressed[1][1],
        ]
    }

    pub fn p_beta(&self, t: f64) -> f64 {
        self.amplitudes_at(t)[0].norm_sqr()
    }

    pub fn state_at(&self, t: f64) -> QuantumState {
        let [b, g] = self.amplitudes_at(t);
        let mut amps = CVector::zeros(4);
        amps[BETA] = b;
        amps[GAMMA] = g;
        QuantumState::normalized(dotmodel::dot_space(), amps)
            .expect("unitary evolution keeps the norm")
    }
}

/// Frequency (GHz) resonant with the spin-down `{β, γ}` pair at field `b`.
pub fn valley_resonance_ghz(p: &DotParameters, b: f64) -> Result<f64> {
    let h = dotmodel::build_hamiltonian(p, b, 0.0)?;
    let block = CMatrix::from_fn(2, 2, |r, c| h.matrix()[(BETA + r, BETA + c)]);
    let e = qstate::eigh_matrix(&block).values;
    Ok(resonant_ghz(e[1] - e[0]))
}

/// Stroboscopic sample times: every drive period plus the end of the pulse.
fn default_samples(drive: &PulseSpec) -> Vec<f64> {
    let mut times = vec![0.0];
    if drive.drive_freq > 0.0 {
        let period = 1.0 / drive.drive_freq;
        let n = (drive.duration / period).floor() as usize;
        times.extend((1..=n).map(|k| k as f64 * period));
    } else {
        times.extend((1..=100).map(|k| drive.duration * k as f64 / 100.0));
    }
    if drive.duration > *times.last().unwrap() * (1.0 + 1e-12) {
        times.push(drive.duration);
    }
    times
}

/// Drives bare `γ` with `drive` and records `P_β` once per drive period
/// (and at the end of the pulse).
pub fn valley_rabi(p: &DotParameters, drive: &PulseSpec, mode: RabiMode) -> Result<RabiRun> {
    drive.expect("valley_rabi", PulseKind::MicrowaveDrive)?;
    valley_rabi_at(p, drive, mode, &default_samples(drive))
}

/// Same as [`valley_rabi`] with explicit ascending sample times inside
/// `[0, drive.duration]`.
pub fn valley_rabi_at(
    p: &DotParameters,
    drive: &PulseSpec,
    mode: RabiMode,
    times: &[f64],
) -> Result<RabiRun> {
    let rwa = RwaModel::new(p, drive)?;
    if times.is_empty() || times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(GateError::InvalidParameter {
            field: "times",
            reason: "must be non-empty, ascending and >= 0".into(),
        });
    }
    match mode {
        RabiMode::RwaTwoLevel => Ok(RabiRun {
            times: times.to_vec(),
            p_beta: times.iter().map(|&t| rwa.p_beta(t)).collect(),
            final_state: rwa.state_at(*times.last().unwrap()),
            rabi_frequency: rwa.rabi_frequency(),
            detuning: rwa.detuning(),
            step: None,
        }),
        RabiMode::FullFourLevel => {
            let drive_op =
                Operator::embed(&dotmodel::dot_space(), dotmodel::VALLEY_FACTOR, &pauli::x())?;
            let h0 = dotmodel::build_hamiltonian(p, drive.b_field, 0.0)?;
            let problem = DrivenProblem {
                h0: h0.matrix().clone(),
                drive_op: drive_op.matrix().clone(),
                amp: drive.drive_amp,
                omega: angular_ghz(drive.drive_freq),
                phase: drive.phase,
            };
            let psi0 = dotmodel::product_state(StateLabel::Gamma).into_amplitudes();
            let base_step = if drive.drive_freq > 0.0 {
                1.0 / (STEPS_PER_PERIOD * drive.drive_freq)
            } else {
                f64::INFINITY
            };
            let (step, samples) = integrate_adaptive(&problem, &psi0, times, base_step)?;
            let p_beta = samples.iter().map(|s| s[BETA].norm_sqr()).collect();
            let last = samples.into_iter().last().unwrap();
            Ok(RabiRun {
                times: times.to_vec(),
                p_beta,
                final_state: QuantumState::normalized(dotmodel::dot_space(), last)?,
                rabi_frequency: rwa.rabi_frequency(),
                detuning: rwa.detuning(),
                step: Some(step),
            })
        }
    }
}

/// `H(t) = h0 + amp·cos(omega·t + phase)·drive_op`.
pub(crate) struct DrivenProblem {
    pub h0: CMatrix,
    pub drive_op: CMatrix,
    pub amp: f64,
    pub omega: f64,
    pub phase: f64,
}

impl DrivenProblem {
    fn at(&self, t: f64) -> CMatrix {
        &self.h0 + &self.drive_op * C64::new(self.amp * (self.omega * t + self.phase).cos(), 0.0)
    }

    /// Fourth-order Magnus step on `[t, t + h]`: two Gauss-Legendre nodes,
    /// exact exponential of the Hermitian effective generator.
    fn step(&self, t: f64, h: f64) -> CMatrix {
        let c = 3f64.sqrt() / 6.0;
        let h1 = self.at(t + (0.5 - c) * h);
        let h2 = self.at(t + (0.5 + c) * h);
        let comm = &h2 * &h1 - &h1 * &h2;
        let g = (&h1 + &h2) * C64::new(0.5 * h / HBAR, 0.0)
            - comm * C64::new(0.0, 3f64.sqrt() * h * h / (12.0 * HBAR * HBAR));
        exp_minus_i(&g)
    }
}

fn integrate_fixed(
    problem: &DrivenProblem,
    psi0: &CVector,
    times: &[f64],
    max_step: f64,
) -> Vec<CVector> {
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n = if max_step.is_finite() {
                (span / max_step).ceil().max(1.0) as usize
            } else {
                1
            };
            let h = span / n as f64;
            for k in 0..n {
                psi = problem.step(t + k as f64 * h, h) * psi;
            }
            t = target;
        }
        out.push(psi.clone());
    }
    out
}

/// Integrates with `base_step`, halving until a further halving moves the
/// final amplitudes by less than [`STEP_HALVING_TOL`].
fn integrate_adaptive(
    problem: &DrivenProblem,
    psi0: &CVector,
    times: &[f64],
    base_step: f64,
) -> Result<(f64, Vec<CVector>)> {
    let mut step = base_step;
    let mut coarse = integrate_fixed(problem, psi0, times, step);
    if !step.is_finite() {
        check_norm(&coarse)?;
        return Ok((step, coarse));
    }
    for _ in 0..MAX_HALVINGS {
        let fine = integrate_fixed(problem, psi0, times, step / 2.0);
        let diff = (coarse.last().unwrap() - fine.last().unwrap()).camax();
        if diff < STEP_HALVING_TOL {
            check_norm(&coarse)?;
            return Ok((step, coarse));
        }
        step /= 2.0;
        coarse = fine;
    }
    Err(GateError::StepSizeTooCoarse(format!(
        "step halving still changes amplitudes by more than {STEP_HALVING_TOL:e} at step {step:e} ns"
    )))
}

fn check_norm(samples: &[CVector]) -> Result<()> {
    let drift = samples
        .iter()
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0_f64, f64::max);
    if drift > STEP_HALVING_TOL {
        return Err(GateError::StepSizeTooCoarse(format!(
            "unitarity drift {drift:e}"
        )));
    }
    Ok(())
}

/// Two dots placed end to end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoDotGeometry {
    /// Centre-to-centre distance (Å).
    pub separation: f64,
    /// Orbital dipole coupling `J_dd` (μeV).
    pub coupling_strength: f64,
}

impl TwoDotGeometry {
    /// Geometry with `J_dd` computed from the orbital moment of `p`.
    pub fn from_dot(p: &DotParameters, separation: f64) -> Result<Self> {
        if !(separation > 0.0) || !separation.is_finite() {
            return Err(GateError::InvalidParameter {
                field: "separation",
                reason: "must be > 0".into(),
            });
        }
        Ok(Self {
            separation,
            coupling_strength: dipole_coupling_strength(p.mu_orb, separation),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(GateError::InvalidParameter {
                field: "separation",
                reason: "must be > 0".into(),
            });
        }
        if !self.coupling_strength.is_finite() {
            return Err(GateError::InvalidParameter {
                field: "coupling_strength",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// `J_dd = (μ₀/2π)·μ_orb²/r³` in μeV for `μ_orb` in μeV/T and `r` in Å.
pub fn dipole_coupling_strength(mu_orb: f64, separation: f64) -> f64 {
    let mu_si = mu_orb * MICRO_EV_IN_J;
    let r_si = separation * crate::units::ANGSTROM_IN_M;
    2.0 * MU0_OVER_4PI_SI * mu_si * mu_si / (r_si * r_si * r_si) / MICRO_EV_IN_J
}

/// `spin1 ⊗ valley1 ⊗ spin2 ⊗ valley2`.
pub fn two_dot_space() -> HilbertSpace {
    HilbertSpace::new([
        ("spin1", 2usize),
        ("valley1", 2),
        ("spin2", 2),
        ("valley2", 2),
    ])
    .expect("static space")
}

const VALLEY1: usize = 1;
const VALLEY2: usize = 3;

/// Orbital dipole coupling `−J_dd·σz^{L1}·σz^{L2}` on the two-dot space.
pub fn dipole_coupling_hamiltonian(g: &TwoDotGeometry) -> Result<Operator> {
    g.validate()?;
    let space = two_dot_space();
    let l1 = Operator::embed(&space, VALLEY1, &pauli::z())?;
    let l2 = Operator::embed(&space, VALLEY2, &pauli::z())?;
    let m = (l1.matrix() * l2.matrix()) * C64::new(-g.coupling_strength, 0.0);
    Ok(Operator::hermitian(space, m)?)
}

#[derive(Clone, Debug)]
pub struct TwoQubitGate {
    /// Full 16×16 propagator.
    pub unitary: CMatrix,
    /// Action on `valley1 ⊗ valley2` (spins are untouched).
    pub valley_unitary: CMatrix,
    /// Controlled phase `θ₀₀ − θ₀₁ − θ₁₀ + θ₁₁` of the diagonal valley
    /// unitary, in `(-π, π]`.
    pub phase: f64,
    /// Locally equivalent to CZ (Makhlin invariants `G1 = 0`, `G2 = 1`).
    pub is_cphase: bool,
    pub entangling_power: f64,
}

/// Tolerance on the Makhlin invariants for the CZ-equivalence flag.
pub const LOCAL_INVARIANT_TOL: f64 = 1e-9;

/// Propagator of the dipole coupling for time `t`, with its
/// controlled-phase diagnostics. CZ equivalence occurs at `t = πħ/(4J_dd)`.
pub fn two_qubit_gate(g: &TwoDotGeometry, t: f64) -> Result<TwoQubitGate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(GateError::InvalidParameter {
            field: "t",
            reason: "must be finite and >= 0".into(),
        });
    }
    let h = dipole_coupling_hamiltonian(g)?;
    let unitary = qstate::propagator(&h, t)?;
    let space = two_dot_space();
    // Spin digits fixed to 0.
    let idx = |l1: usize, l2: usize| space.index_of(&[0, l1, 0, l2]);
    let valley_unitary =
        CMatrix::from_fn(4, 4, |r, c| unitary[(idx(r / 2, r % 2), idx(c / 2, c % 2))]);
    let d = |k: usize| valley_unitary[(k, k)].arg();
    let phase = wrap_phase(d(0) - d(1) - d(2) + d(3));
    let (g1, g2) = makhlin_invariants(&valley_unitary)?;
    let is_cphase =
        g1.norm() < LOCAL_INVARIANT_TOL && (g2 - C64::new(1.0, 0.0)).norm() < LOCAL_INVARIANT_TOL;
    let entangling_power = entangling_power(&valley_unitary)?;
    Ok(TwoQubitGate {
        unitary,
        valley_unitary,
        phase,
        is_cphase,
        entangling_power,
    })
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// `spin1 ⊗ spin2`.
pub fn two_spin_space() -> HilbertSpace {
    HilbertSpace::new([("spin1", 2usize), ("spin2", 2)]).expect("static space")
}

/// Heisenberg exchange `j_ex·(S₁·S₂)` on two spins, `S = σ/2`.
pub fn exchange_hamiltonian(j_ex: f64) -> Result<Operator> {
    let space = two_spin_space();
    let mut m = CMatrix::zeros(4, 4);
    for p in [pauli::x(), pauli::y(), pauli::z()] {
        m += p.kronecker(&p);
    }
    Ok(Operator::hermitian(space, m * C64::new(0.25 * j_ex, 0.0))?)
}

/// `exp(−i·j_ex·(S₁·S₂)·t/ħ)` on `spin1 ⊗ spin2`.
pub fn exchange_gate(j_ex: f64, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() || !j_ex.is_finite() {
        return Err(GateError::InvalidParameter {
            field: "t",
            reason: "j_ex and t must be finite, t >= 0".into(),
        });
    }
    Ok(qstate::propagator(&exchange_hamiltonian(j_ex)?, t)?)
}

/// Lifts a `spin1 ⊗ spin2` gate to the two-dot space, identity on valleys.
pub fn embed_spin_gate(u: &CMatrix) -> Result<CMatrix> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(GateError::DimensionMismatch(u.nrows(), 4));
    }
    let space = two_dot_space();
    let mut out = CMatrix::zeros(16, 16);
    for r in 0..16 {
        let dr = space.digits(r);
        for c in 0..16 {
            let dc = space.digits(c);
            if dr[1] == dc[1] && dr[3] == dc[3] {
                out[(r, c)] = u[(dr[0] * 2 + dr[2], dc[0] * 2 + dc[2])];
            }
        }
    }
    Ok(out)
}

/// `|tr(u†v)|²/d²`, insensitive to global phase.
pub fn gate_fidelity(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(GateError::DimensionMismatch(u.nrows(), v.nrows()));
    }
    let d = u.nrows() as f64;
    let tr = (u.adjoint() * v).trace();
    Ok((tr.norm_sqr() / (d * d)).clamp(0.0, 1.0))
}

fn magic_basis() -> CMatrix {
    let r = 1.0 / 2f64.sqrt();
    let o = C64::new(0.0, 0.0);
    let a = C64::new(r, 0.0);
    let i = C64::new(0.0, r);
    CMatrix::from_row_slice(4, 4, &[a, o, o, i, o, i, a, o, o, i, -a, o, a, o, o, -i])
}

/// Makhlin local invariants `(G1, G2)` of a two-qubit unitary. Two gates
/// are equal up to single-qubit operations iff both invariants agree.
pub fn makhlin_invariants(u: &CMatrix) -> Result<(C64, C64)> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(GateError::DimensionMismatch(u.nrows(), 4));
    }
    let q = magic_basis();
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let det = u.clone().determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (C64::new(16.0, 0.0) * det);
    let g2 = (tr * tr - tr2) / (C64::new(4.0, 0.0) * det);
    Ok((g1, g2))
}

/// Entangling power `(2/9)(1 − |G1|)`; CZ reaches the maximum 2/9.
pub fn entangling_power(u: &CMatrix) -> Result<f64> {
    let (g1, _) = makhlin_invariants(u)?;
    Ok((2.0 / 9.0) * (1.0 - g1.norm()))
}

/// Reference gates.
pub mod reference {
    use super::{CMatrix, C64};

    pub fn cz() -> CMatrix {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = C64::new(-1.0, 0.0);
        m
    }

    pub fn cnot() -> CMatrix {
        let one = C64::new(1.0, 0.0);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = one;
        m[(1, 1)] = one;
        m[(2, 3)] = one;
        m[(3, 2)] = one;
        m
    }

    pub fn swap() -> CMatrix {
        let one = C64::new(1.0, 0.0);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = one;
        m[(1, 2)] = one;
        m[(2, 1)] = one;
        m[(3, 3)] = one;
        m
    }

    /// `SWAP^{1/2}`.
    pub fn sqrt_swap() -> CMatrix {
        let one = C64::new(1.0, 0.0);
        let a = C64::new(0.5, 0.5);
        let b = C64::new(0.5, -0.5);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = one;
        m[(1, 1)] = a;
        m[(1, 2)] = b;
        m[(2, 1)] = b;
        m[(2, 2)] = a;
        m[(3, 3)] = one;
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_error(u: &CMatrix) -> f64 {
        (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).camax()
    }

    #[test]
    fn zero_duration_kick_is_identity() {
        let g = phase_gate(&DotParameters::default(), &PulseSpec::field_kick(0.7, 0.0)).unwrap();
        assert_eq!(g.theta, 0.0);
        assert!((gate_fidelity(&g.unitary, &CMatrix::identity(2, 2)).unwrap() - 1.0).abs() < 1e-15);
        assert!(g.leakage < 1e-15);
    }

    #[test]
    fn pi_kick_is_logical_z() {
        let p = DotParameters::default();
        let b = 0.2;
        let t = PI * HBAR / ((2.0 * p.mu_orb + p.g_s * crate::units::MU_B) * b);
        let g = phase_gate(&p, &PulseSpec::field_kick(b, t)).unwrap();
        assert!((g.theta - PI).abs() < 1e-12);
        assert!((gate_fidelity(&g.unitary, &pauli::z()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projected_phase_matches_without_mixing() {
        let p = DotParameters {
            delta_kk: 0.0,
            ..Default::default()
        };
        let kick = PulseSpec::field_kick(0.31, 0.004);
        let g = phase_gate(&p, &kick).unwrap();
        assert!(g.leakage < 1e-14);
        assert!((wrap_phase(relative_phase(&g.projected) + g.theta)).abs() < 1e-10);
        assert!(unitarity_error(&g.unitary) < 1e-14);
    }

    #[test]
    fn mixing_causes_leakage_from_alpha() {
        let g = phase_gate(
            &DotParameters::default(),
            &PulseSpec::field_kick(0.598, 0.05),
        )
        .unwrap();
        assert!(g.leakage > 1e-3);
    }

    #[test]
    fn phase_gate_rejects_microwave() {
        let err = phase_gate(
            &DotParameters::default(),
            &PulseSpec::microwave(0.0, 1.0, 1.0, 1.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GateError::WrongPulseKind { .. }));
    }

    #[test]
    fn rabi_rejects_field_kick() {
        let err = valley_rabi(
            &DotParameters::default(),
            &PulseSpec::field_kick(0.0, 1.0),
            RabiMode::RwaTwoLevel,
        );
        assert!(matches!(err, Err(GateError::WrongPulseKind { .. })));
    }

    #[test]
    fn undriven_gamma_at_anticrossing_precesses() {
        // At the β/γ anti-crossing, bare γ oscillates with the splitting.
        let p = DotParameters::default();
        let b_minus = -p.bare_spin_orbit() / (2.0 * p.mu_orb);
        let t_end = 0.2;
        let drive = PulseSpec::microwave(b_minus, t_end, 0.0, 0.0, 0.0);
        let times: Vec<f64> = (0..=40).map(|k| t_end * k as f64 / 40.0).collect();
        for mode in [RabiMode::RwaTwoLevel, RabiMode::FullFourLevel] {
            let run = valley_rabi_at(&p, &drive, mode, &times).unwrap();
            for (t, pb) in run.times.iter().zip(&run.p_beta) {
                let want = (p.delta_kk * t / (2.0 * HBAR)).sin().powi(2);
                assert!((pb - want).abs() < 1e-9, "{mode:?} t={t} {pb} vs {want}");
            }
        }
    }

    #[test]
    fn undriven_eigenstate_stays_put() {
        let p = DotParameters {
            delta_kk: 0.0,
            ..Default::default()
        };
        let drive = PulseSpec::microwave(0.4, 1.0, 0.0, 10.0, 0.0);
        for mode in [RabiMode::RwaTwoLevel, RabiMode::FullFourLevel] {
            let run = valley_rabi(&p, &drive, mode).unwrap();
            assert!(run.p_beta.iter().all(|&x| x < 1e-20), "{mode:?}");
        }
    }

    #[test]
    fn dipole_spectrum_is_ising() {
        let g = TwoDotGeometry {
            separation: 1000.0,
            coupling_strength: 2.5,
        };
        let h = dipole_coupling_hamiltonian(&g).unwrap();
        let e = qstate::eigh(&h).unwrap().values;
        assert!(e[..8].iter().all(|&x| (x + 2.5).abs() < 1e-12));
        assert!(e[8..].iter().all(|&x| (x - 2.5).abs() < 1e-12));
        // |↑↑⟩ valleys with both spins up: index 0.
        assert_eq!(h.matrix()[(0, 0)], C64::new(-2.5, 0.0));
    }

    #[test]
    fn dipole_strength_scales_as_inverse_cube() {
        let a = dipole_coupling_strength(330.0, 1000.0);
        let b = dipole_coupling_strength(330.0, 2000.0);
        assert!((a / b - 8.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_gate_at_zero_time() {
        let g = TwoDotGeometry {
            separation: 1000.0,
            coupling_strength: 1.0,
        };
        let gate = two_qubit_gate(&g, 0.0).unwrap();
        assert!((gate.unitary.clone() - CMatrix::identity(16, 16)).camax() < 1e-15);
        assert!(!gate.is_cphase);
        assert!(gate.entangling_power.abs() < 1e-15);
    }

    #[test]
    fn exchange_limits() {
        let j = 3.0;
        let id = exchange_gate(j, 0.0).unwrap();
        assert!((id - CMatrix::identity(4, 4)).camax() < 1e-15);
        let swap = exchange_gate(j, PI * HBAR / j).unwrap();
        assert!(gate_fidelity(&swap, &reference::swap()).unwrap() > 1.0 - 1e-12);
        // |↑↓⟩ (index 1) goes to |↓↑⟩ (index 2).
        assert!((swap[(2, 1)].norm() - 1.0).abs() < 1e-12);
        let root = exchange_gate(j, 0.5 * PI * HBAR / j).unwrap();
        assert!(gate_fidelity(&root, &reference::sqrt_swap()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn invariants_of_reference_gates() {
        let (g1, g2) = makhlin_invariants(&reference::cz()).unwrap();
        assert!(g1.norm() < 1e-14 && (g2 - C64::new(1.0, 0.0)).norm() < 1e-14);
        let (g1, g2) = makhlin_invariants(&reference::cnot()).unwrap();
        assert!(g1.norm() < 1e-14 && (g2 - C64::new(1.0, 0.0)).norm() < 1e-14);
        let (g1, g2) = makhlin_invariants(&reference::swap()).unwrap();
        assert!(
            (g1 + C64::new(1.0, 0.0)).norm() < 1e-14 && (g2 + C64::new(3.0, 0.0)).norm() < 1e-14
        );
        let (g1, g2) = makhlin_invariants(&CMatrix::identity(4, 4)).unwrap();
        assert!(
            (g1 - C64::new(1.0, 0.0)).norm() < 1e-14 && (g2 - C64::new(3.0, 0.0)).norm() < 1e-14
        );
        assert!((entangling_power(&reference::cz()).unwrap() - 2.0 / 9.0).abs() < 1e-14);
        assert!((entangling_power(&reference::sqrt_swap()).unwrap() - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_basics() {
        let id = CMatrix::identity(2, 2);
        assert_eq!(gate_fidelity(&id, &id).unwrap(), 1.0);
        assert_eq!(gate_fidelity(&id, &pauli::x()).unwrap(), 0.0);
        let phased = &id * C64::from_polar(1.0, 0.77);
        assert!((gate_fidelity(&id, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            gate_fidelity(&id, &CMatrix::identity(4, 4)),
            Err(GateError::DimensionMismatch(2, 4))
        ));
    }

    #[test]
    fn embedded_swap_leaves_valleys() {
        let u = embed_spin_gate(&reference::swap()).unwrap();
        assert!(unitarity_error(&u) < 1e-15);
        let space = two_dot_space();
        // spin1 up, valley1 down, spin2 down, valley2 up -> spins exchanged.
        let from = space.index_of(&[0, 1, 1, 0]);
        let to = space.index_of(&[1, 1, 0, 0]);
        assert_eq!(u[(to, from)], C64::new(1.0, 0.0));
    }

    #[test]
    fn pulse_validation() {
        assert!(PulseSpec::field_kick(0.1, -1.0).validate().is_err());
        let mut kick = PulseSpec::field_kick(0.1, 1.0);
        kick.drive_amp = 1.0;
        assert!(kick.validate().is_err());
        assert!(PulseSpec::microwave(0.0, 1.0, 1.0, -2.0, 0.0)
            .validate()
            .is_err());
    }
}
