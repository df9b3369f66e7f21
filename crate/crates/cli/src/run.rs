use std::f64::consts::FRAC_1_SQRT_2;

use cntqd_core::dotmodel;
use cntqd_core::gates::{self, PulseSpec};
use cntqd_core::memory::{self, MemoryScenario};
use cntqd_core::qstate::{CVector, HilbertSpace, QuantumState, C64};
use cntqd_core::trap::{self, RelaxOptions, TrapConfig};
use cntqd_core::units::HBAR;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::scenario::{Job, Param, Scenario};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    /// Header cell, `name [unit]`.
    pub fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario_hash: String,
    pub columns: Vec<Column>,
    pub rows: usize,
    /// Scalar results of the run, keyed `name [unit]`.
    pub summary: Map<String, Value>,
    pub parameters: std::collections::BTreeMap<String, Param>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

impl ResultTable {
    pub fn new(s: &Scenario, columns: &[(&str, &str)]) -> Self {
        let columns: Vec<Column> = columns
            .iter()
            .map(|(n, u)| Column {
                name: n.to_string(),
                unit: u.to_string(),
            })
            .collect();
        let metadata = Metadata {
            tool: "cntqd".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: s.command.name().into(),
            scenario_hash: s.hash(),
            columns: columns.clone(),
            rows: 0,
            summary: Map::new(),
            parameters: s.values.clone(),
        };
        Self {
            columns,
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row arity");
        self.rows.push(row);
        self.metadata.rows = self.rows.len();
    }

    pub fn note(&mut self, name: &str, unit: &str, x: f64) {
        self.metadata
            .summary
            .insert(format!("{name} [{unit}]"), Value::from(x));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub table: ResultTable,
    /// Relaxed geometry for trap runs.
    pub xyz: Option<String>,
}

pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let ctx = |e: &dyn std::fmt::Display| CliError::numeric(s.command.name(), e);
    let mut xyz = None;
    let table = match &s.job {
        Job::Spectrum {
            dot,
            b_grid,
            gate_v,
        } => {
            let mut t = ResultTable::new(
                s,
                &[
                    ("b_field", "T"),
                    ("E1", "ueV"),
                    ("E2", "ueV"),
                    ("E3", "ueV"),
                    ("E4", "ueV"),
                ],
            );
            for p in dotmodel::spectrum_sweep(dot, b_grid, *gate_v).map_err(|e| ctx(&e))? {
                let e = p.energies;
                t.push(vec![p.b_field, e[0], e[1], e[2], e[3]]);
            }
            t
        }
        Job::PhaseGate {
            dot,
            b_field,
            times,
        } => {
            let mut t = ResultTable::new(
                s,
                &[
                    ("t", "ns"),
                    ("theta", "rad"),
                    ("exact_phase", "rad"),
                    ("leakage", "1"),
                    ("p_gamma", "1"),
                    ("p_alpha", "1"),
                ],
            );
            let rows: Vec<Vec<f64>> = times
                .par_iter()
                .map(|&time| {
                    let g = gates::phase_gate(dot, &PulseSpec::field_kick(*b_field, time))?;
                    let plus = C64::new(FRAC_1_SQRT_2, 0.0);
                    let out = &g.projected * CVector::from_vec(vec![plus, plus]);
                    let exact = gates::wrap_phase(-gates::relative_phase(&g.projected));
                    Ok(vec![
                        time,
                        g.theta,
                        exact,
                        g.leakage,
                        out[0].norm_sqr(),
                        out[1].norm_sqr(),
                    ])
                })
                .collect::<std::result::Result<_, gates::GateError>>()
                .map_err(|e| ctx(&e))?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        Job::Rabi {
            dot,
            drive,
            mode,
            times,
        } => {
            let run = match times {
                Some(ts) => gates::valley_rabi_at(dot, drive, *mode, ts),
                None => gates::valley_rabi(dot, drive, *mode),
            }
            .map_err(|e| ctx(&e))?;
            let mut t = ResultTable::new(s, &[("t", "ns"), ("p_beta", "1")]);
            for (time, p) in run.times.iter().zip(&run.p_beta) {
                t.push(vec![*time, *p]);
            }
            t.note("drive_freq", "GHz", drive.drive_freq);
            t.note("rabi_frequency", "rad/ns", run.rabi_frequency);
            t.note("detuning", "rad/ns", run.detuning);
            if let Some(step) = run.step {
                t.note("step", "ns", step);
            }
            t
        }
        Job::Dipole { geometry, times } => {
            let mut t = ResultTable::new(
                s,
                &[
                    ("t", "ns"),
                    ("controlled_phase", "rad"),
                    ("entangling_power", "1"),
                    ("cz_equivalent", "1"),
                ],
            );
            let rows: Vec<Vec<f64>> = times
                .par_iter()
                .map(|&time| {
                    let g = gates::two_qubit_gate(geometry, time)?;
                    Ok(vec![
                        time,
                        g.phase,
                        g.entangling_power,
                        if g.is_cphase { 1.0 } else { 0.0 },
                    ])
                })
                .collect::<std::result::Result<_, gates::GateError>>()
                .map_err(|e| ctx(&e))?;
            rows.into_iter().for_each(|r| t.push(r));
            t.note("coupling_strength", "ueV", geometry.coupling_strength);
            t.note(
                "t_cz",
                "ns",
                std::f64::consts::PI * HBAR / (4.0 * geometry.coupling_strength.abs()),
            );
            t
        }
        Job::Exchange { coupling, times } => {
            let mut t = ResultTable::new(
                s,
                &[
                    ("t", "ns"),
                    ("swap_fidelity", "1"),
                    ("entangling_power", "1"),
                ],
            );
            let swap = gates::reference::swap();
            let rows: Vec<Vec<f64>> = times
                .par_iter()
                .map(|&time| {
                    let u = gates::exchange_gate(*coupling, time)?;
                    Ok(vec![
                        time,
                        gates::gate_fidelity(&u, &swap)?,
                        gates::entangling_power(&u)?,
                    ])
                })
                .collect::<std::result::Result<_, gates::GateError>>()
                .map_err(|e| ctx(&e))?;
            rows.into_iter().for_each(|r| t.push(r));
            t.note("coupling_strength", "ueV", *coupling);
            t.note("t_swap", "ns", std::f64::consts::PI * HBAR / coupling.abs());
            t
        }
        Job::Memory {
            scenario,
            qubit,
            b_field,
            times,
        } => run_memory(s, scenario, qubit, *b_field, times.as_deref())?,
        Job::Trap {
            config,
            n_atoms,
            relax,
        } => {
            let (t, geometry) = run_trap(s, config, *n_atoms, relax)?;
            xyz = Some(geometry);
            t
        }
    };
    Ok(RunOutput { table, xyz })
}

fn run_memory(
    s: &Scenario,
    scenario: &MemoryScenario,
    qubit: &[C64; 2],
    b_field: Option<f64>,
    times: Option<&[f64]>,
) -> Result<ResultTable> {
    let ctx = |e: memory::MemoryError| CliError::numeric(s.command.name(), e);
    let q = QuantumState::from_slice(HilbertSpace::qubit("electron_spin"), qubit)
        .map_err(|e| CliError::numeric("memory", e))?;
    let write = memory::write_protocol(scenario, &q).map_err(ctx)?;
    let at = MemoryScenario {
        b_field: b_field.unwrap_or(write.b_field),
        ..scenario.clone()
    };
    let default_times;
    let times = match times {
        Some(t) => t,
        None => {
            default_times = crate::scenario::linspace(
                0.0,
                4.0 * write.t_swap,
                if write.t_swap > 0.0 { 101 } else { 1 },
            );
            &default_times
        }
    };
    let psi0 = memory::initial_state(&at, &q).map_err(ctx)?;
    let tr = memory::coherence_trajectory(&at, &psi0, times).map_err(ctx)?;
    let mut t = ResultTable::new(
        s,
        &[
            ("t", "ns"),
            ("overlap", "1"),
            ("overlap_offloaded", "1"),
            ("faraday", "1"),
        ],
    );
    for k in 0..tr.times.len() {
        t.push(vec![
            tr.times[k],
            tr.overlap[k],
            tr.overlap_offloaded[k],
            tr.faraday[k],
        ]);
    }
    t.note("transfer_fidelity", "1", write.transfer_fidelity);
    t.note("hartmann_hahn_field", "T", write.b_field);
    t.note("t_swap", "ns", write.t_swap);
    t.note("flip_flop", "ueV", write.flip_flop);
    t.note("b_field", "T", at.b_field);
    Ok(t)
}

fn run_trap(
    s: &Scenario,
    c: &TrapConfig,
    n_atoms: usize,
    opts: &RelaxOptions,
) -> Result<(ResultTable, String)> {
    let ctx = |e: trap::TrapError| CliError::numeric(s.command.name(), e);
    let state = trap::relax_chain_with(n_atoms, c, opts).map_err(ctx)?;
    if !state.converged {
        return Err(ctx(trap::TrapError::NotConverged));
    }
    let modes = trap::normal_modes(&state, c, c.atom_mass).map_err(ctx)?;
    let stiffness = trap::transverse_stability(&state, c).map_err(ctx)?;
    let mut t = ResultTable::new(
        s,
        &[
            ("mode", "1"),
            ("wavenumber", "cm^-1"),
            ("eigenvalue", "meV/(A^2*amu)"),
            ("transverse_weight", "1"),
            ("translation", "1"),
        ],
    );
    for k in 0..modes.frequencies.len() {
        let translation = if modes.translation_mode == Some(k) {
            1.0
        } else {
            0.0
        };
        t.push(vec![
            k as f64,
            modes.frequencies[k],
            modes.eigenvalues[k],
            modes.transverse_weight[k],
            translation,
        ]);
    }
    let spacings = state.spacings();
    t.note("energy", "meV", state.energy);
    t.note("gradient_norm", "meV/A", state.gradient_norm);
    t.note("iterations", "1", state.iterations as f64);
    if !spacings.is_empty() {
        t.note(
            "mean_spacing",
            "A",
            spacings.iter().sum::<f64>() / spacings.len() as f64,
        );
    }
    t.note("max_radial", "A", state.max_radial());
    t.note("min_transverse_curvature", "meV/A^2", stiffness);
    let comment = format!(
        "{} atoms, energy {:.10e} meV, scenario {}",
        n_atoms, state.energy, t.metadata.scenario_hash
    );
    Ok((t, state.to_xyz(&c.element, &comment)))
}
