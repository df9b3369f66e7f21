//! Statics of an atom chain inside a nanotube.
//!
//! The tube is a continuum cylinder of Lennard-Jones centres at areal
//! density `surface_density`. The axial integral of the 12-6 potential is
//! done in closed form, the angular one by the periodic trapezoid rule.
//! Atoms interact pairwise through the same 12-6 form. Energies are in meV,
//! lengths in Å.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::wavenumber_from_curvature;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error("atom at radial distance {radial} Å is outside the tube (radius {radius} Å)")]
    OutsideTube { radial: f64, radius: f64 },
    #[error("invalid trap parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("minimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:e} meV/Å)")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("chain state is not converged")]
    NotConverged,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parameter file: {0}")]
    ParamsFile(String),
}

pub type Result<T> = std::result::Result<T, TrapError>;

/// Smallest tube radius accepted (Å).
pub const MIN_TUBE_RADIUS: f64 = 3.0;
pub const DEFAULT_QUADRATURE_ORDER: usize = 256;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100_000;
/// Central-difference step for Hessians (Å).
pub const HESSIAN_STEP: f64 = 1e-4;
const PARAMS_TOML: &str = include_str!("../data/trap_params.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    /// Element symbol used in XYZ output.
    pub element: String,
    pub tube_radius: f64,
    /// Tube length (Å), centred on `z = 0`; `None` is an infinite tube.
    #[serde(default)]
    pub tube_length: Option<f64>,
    pub wall_epsilon: f64,
    pub wall_sigma: f64,
    /// Areal density of wall centres (Å⁻²).
    pub surface_density: f64,
    pub atom_epsilon: f64,
    pub atom_sigma: f64,
    /// Atomic mass (amu).
    pub atom_mass: f64,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
}

fn default_order() -> usize {
    DEFAULT_QUADRATURE_ORDER
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self::preset("hydrogen").expect("bundled parameters parse")
    }
}

impl TrapConfig {
    /// Named entry of the bundled parameter file.
    pub fn preset(name: &str) -> Result<Self> {
        Self::from_params_str(PARAMS_TOML, name)
    }

    pub fn preset_names() -> Vec<String> {
        let table: toml::Table = PARAMS_TOML.parse().expect("bundled parameters parse");
        table.keys().cloned().collect()
    }

    /// Entry `name` of a TOML parameter file.
    pub fn from_params_file(path: &Path, name: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TrapError::ParamsFile(format!("{}: {e}", path.display())))?;
        Self::from_params_str(&text, name)
    }

    pub fn from_params_str(text: &str, name: &str) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| TrapError::ParamsFile(e.to_string()))?;
        let entry = table
            .remove(name)
            .ok_or_else(|| TrapError::UnknownPreset(name.to_string()))?;
        let c: TrapConfig = entry
            .try_into()
            .map_err(|e: toml::de::Error| TrapError::ParamsFile(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(TrapError::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        let positive = [
            ("tube_radius", self.tube_radius),
            ("wall_epsilon", self.wall_epsilon),
            ("wall_sigma", self.wall_sigma),
            ("surface_density", self.surface_density),
            ("atom_epsilon", self.atom_epsilon),
            ("atom_sigma", self.atom_sigma),
            ("atom_mass", self.atom_mass),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(field, "must be finite and > 0");
            }
        }
        if self.tube_radius < MIN_TUBE_RADIUS {
            return bad("tube_radius", &format!("must be >= {MIN_TUBE_RADIUS} Å"));
        }
        if let Some(l) = self.tube_length {
            if !(l > 0.0) || !l.is_finite() {
                return bad("tube_length", "must be finite and > 0");
            }
        }
        if self.quadrature_order < 8 {
            return bad("quadrature_order", "must be >= 8");
        }
        Ok(())
    }
}

/// `∫_{-∞}^{∞} (s² + u²)^{-n} du = c_n s^{1-2n}`.
fn full_line_coefficient(n: u32) -> f64 {
    (1..n).fold(PI, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64)
}

/// `I_1..=I_nmax` of `∫_0^u (s² + v²)^{-n} dv` via the standard reduction.
fn partial_integrals(s2: f64, u: f64, nmax: usize) -> Vec<f64> {
    let s = s2.sqrt();
    let q = s2 + u * u;
    let mut out = vec![(u / s).atan() / s];
    for n in 2..=nmax {
        let m = (n - 1) as f64;
        let prev = out[n - 2];
        out.push(
            u / (2.0 * m * s2 * q.powi(n as i32 - 1)) + (2.0 * m - 1.0) / (2.0 * m * s2) * prev,
        );
    }
    out
}

/// Wall energy and its derivatives `(V, ∂V/∂ρ, ∂V/∂z)` for an atom at
/// radial distance `radial` and axial position `axial`.
pub fn wall_potential(radial: f64, axial: f64, c: &TrapConfig) -> Result<(f64, f64, f64)> {
    if !(radial >= 0.0) || radial >= c.tube_radius || !axial.is_finite() {
        return Err(TrapError::OutsideTube {
            radial,
            radius: c.tube_radius,
        });
    }
    let r = c.tube_radius;
    let sig6 = c.wall_sigma.powi(6);
    let sig12 = sig6 * sig6;
    let m = c.quadrature_order;
    let w = 2.0 * PI / m as f64;
    let (mut v, mut dv_drho, mut dv_dz) = (0.0, 0.0, 0.0);
    for k in 0..m {
        let cos = (w * k as f64).cos();
        let s2 = r * r + radial * radial - 2.0 * r * radial * cos;
        let ds2 = 2.0 * radial - 2.0 * r * cos;
        // j[n] = ∫ (s² + u²)^{-n} du over the tube, n = 3, 4, 6, 7.
        let (j3, j4, j6, j7, dz) = match c.tube_length {
            None => {
                let s = s2.sqrt();
                let s5 = s2 * s2 * s;
                let s7 = s5 * s2;
                let s11 = s7 * s2 * s2;
                let s13 = s11 * s2;
                (
                    full_line_coefficient(3) / s5,
                    full_line_coefficient(4) / s7,
                    full_line_coefficient(6) / s11,
                    full_line_coefficient(7) / s13,
                    0.0,
                )
            }
            Some(len) => {
                let a = -0.5 * len - axial;
                let b = 0.5 * len - axial;
                let ia = partial_integrals(s2, a, 7);
                let ib = partial_integrals(s2, b, 7);
                let f = |u: f64, n: i32| (s2 + u * u).powi(-n);
                // d/dz ∫_a^b = f(a) − f(b).
                let dz = sig12 * (f(a, 6) - f(b, 6)) - sig6 * (f(a, 3) - f(b, 3));
                (
                    ib[2] - ia[2],
                    ib[3] - ia[3],
                    ib[5] - ia[5],
                    ib[6] - ia[6],
                    dz,
                )
            }
        };
        v += sig12 * j6 - sig6 * j3;
        // ∂/∂s² of ∫(s²+u²)^{-n} = −n ∫(s²+u²)^{-n-1}.
        dv_drho += (-6.0 * sig12 * j7 + 3.0 * sig6 * j4) * ds2;
        dv_dz += dz;
    }
    let pre = 4.0 * c.wall_epsilon * c.surface_density * r * w;
    let dv_drho = if radial == 0.0 { 0.0 } else { pre * dv_drho };
    Ok((pre * v, dv_drho, pre * dv_dz))
}

/// 12-6 pair energy and `dV/dr`.
pub fn pair_potential(r: f64, c: &TrapConfig) -> (f64, f64) {
    let x6 = (c.atom_sigma / r).powi(6);
    let x12 = x6 * x6;
    (
        4.0 * c.atom_epsilon * (x12 - x6),
        4.0 * c.atom_epsilon * (-12.0 * x12 + 6.0 * x6) / r,
    )
}

pub type Point = [f64; 3];

/// Total energy (pairs plus wall) and Cartesian gradient.
pub fn chain_energy(coords: &[Point], c: &TrapConfig) -> Result<(f64, Vec<Point>)> {
    let mut e = 0.0;
    let mut g = vec![[0.0; 3]; coords.len()];
    for (i, p) in coords.iter().enumerate() {
        let rho = p[0].hypot(p[1]);
        let (v, dr, dz) = wall_potential(rho, p[2], c)?;
        e += v;
        if rho > 0.0 {
            g[i][0] += dr * p[0] / rho;
            g[i][1] += dr * p[1] / rho;
        }
        g[i][2] += dz;
    }
    for i in 0..coords.len() {
        for j in (i + 1)..coords.len() {
            let d = [
                coords[j][0] - coords[i][0],
                coords[j][1] - coords[i][1],
                coords[j][2] - coords[i][2],
            ];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let (v, dv) = pair_potential(r, c);
            e += v;
            for a in 0..3 {
                let f = dv * d[a] / r;
                g[j][a] += f;
                g[i][a] -= f;
            }
        }
    }
    Ok((e, g))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainState {
    pub coordinates: Vec<Point>,
    pub energy: f64,
    pub converged: bool,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Energy after every accepted iteration, starting with the seed.
    pub energy_history: Vec<f64>,
}

impl ChainState {
    /// Consecutive axial spacings after sorting by `z`.
    pub fn spacings(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.coordinates.iter().map(|p| p[2]).collect();
        z.sort_by(f64::total_cmp);
        z.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_radial(&self) -> f64 {
        self.coordinates
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max)
    }

    /// XYZ text with one line per atom.
    pub fn to_xyz(&self, element: &str, comment: &str) -> String {
        let mut out = format!(
            "{}\n{}\n",
            self.coordinates.len(),
            comment.replace('\n', " ")
        );
        for p in &self.coordinates {
            out.push_str(&format!(
                "{element} {:.10} {:.10} {:.10}\n",
                p[0], p[1], p[2]
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxOptions {
    /// Uniform random displacement bound for every seed coordinate (Å).
    pub seed_jitter: f64,
    pub seed: u64,
    /// Seed spacing; `None` uses the pair minimum `2^{1/6}σ`.
    pub spacing: Option<f64>,
    pub gradient_tol: f64,
    pub max_iterations: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            seed_jitter: 0.0,
            seed: 7,
            spacing: None,
            gradient_tol: GRADIENT_TOL,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Uniformly spaced on-axis chain centred at `z = 0`, plus jitter.
pub fn seed_chain(n_atoms: usize, c: &TrapConfig, opts: &RelaxOptions) -> Vec<Point> {
    let a = opts.spacing.unwrap_or(2f64.powf(1.0 / 6.0) * c.atom_sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..n_atoms)
        .map(|k| {
            let mut p = [0.0, 0.0, a * (k as f64 - 0.5 * (n_atoms as f64 - 1.0))];
            if opts.seed_jitter > 0.0 {
                for x in &mut p {
                    *x += rng.gen_range(-opts.seed_jitter..=opts.seed_jitter);
                }
            }
            p
        })
        .collect()
}

/// Relaxes `n_atoms` from a jittered on-axis seed.
pub fn relax_chain(n_atoms: usize, c: &TrapConfig, seed_jitter: f64) -> Result<ChainState> {
    relax_chain_with(
        n_atoms,
        c,
        &RelaxOptions {
            seed_jitter,
            ..Default::default()
        },
    )
}

pub fn relax_chain_with(n_atoms: usize, c: &TrapConfig, opts: &RelaxOptions) -> Result<ChainState> {
    if n_atoms == 0 {
        return Err(TrapError::InvalidParameter {
            field: "n_atoms",
            reason: "must be >= 1".into(),
        });
    }
    if !(opts.seed_jitter >= 0.0) || !opts.seed_jitter.is_finite() {
        return Err(TrapError::InvalidParameter {
            field: "seed_jitter",
            reason: "must be finite and >= 0".into(),
        });
    }
    relax_from(&seed_chain(n_atoms, c, opts), c, opts)
}

fn flatten(p: &[Point]) -> Vec<f64> {
    p.iter().flat_map(|q| q.iter().copied()).collect()
}

fn unflatten(x: &[f64]) -> Vec<Point> {
    x.chunks(3).map(|q| [q[0], q[1], q[2]]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn objective(x: &[f64], c: &TrapConfig) -> Option<(f64, Vec<f64>)> {
    chain_energy(&unflatten(x), c)
        .ok()
        .map(|(e, g)| (e, flatten(&g)))
}

/// Energies this close are treated as equal in the line search; the
/// gradient norm must then decrease instead.
const ENERGY_ROUNDING: f64 = 1e-12;
const LBFGS_MEMORY: usize = 8;
const NEWTON_SWITCH: f64 = 1e-3;

struct Point1 {
    x: Vec<f64>,
    e: f64,
    g: Vec<f64>,
}

/// Backtracking line search along `d`. Accepts on the Armijo condition, or
/// on a rounding-level energy change that lowers the gradient norm.
fn line_search(cur: &Point1, d: &[f64], alpha0: f64, c: &TrapConfig) -> Option<Point1> {
    let slope = dot(&cur.g, d);
    if slope >= 0.0 {
        return None;
    }
    let gnorm = norm(&cur.g);
    let mut alpha = alpha0;
    for _ in 0..60 {
        let x: Vec<f64> = cur.x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        if let Some((e, g)) = objective(&x, c) {
            let armijo = e <= cur.e + 1e-4 * alpha * slope;
            let flat =
                (e - cur.e).abs() <= ENERGY_ROUNDING * cur.e.abs().max(1.0) && norm(&g) < gnorm;
            if armijo || flat {
                return Some(Point1 { x, e, g });
            }
        }
        alpha *= 0.5;
    }
    None
}

/// Central-difference Hessian of the analytic gradient, symmetrized.
fn hessian(x: &[f64], c: &TrapConfig) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + HESSIAN_STEP;
        let gp = flatten(&chain_energy(&unflatten(&xp), c)?.1);
        xp[j] = x[j] - HESSIAN_STEP;
        let gm = flatten(&chain_energy(&unflatten(&xp), c)?.1);
        xp[j] = x[j];
        for i in 0..n {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * HESSIAN_STEP);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Newton direction with null modes dropped and negative curvature flipped.
fn newton_direction(x: &[f64], g: &[f64], c: &TrapConfig) -> Option<Vec<f64>> {
    let h = hessian(x, c).ok()?;
    let eig = SymmetricEigen::new(h);
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut d = vec![0.0; x.len()];
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() <= 1e-8 * scale {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let coef = -v.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / lam.abs();
        for (di, vi) in d.iter_mut().zip(v.iter()) {
            *di += coef * vi;
        }
    }
    Some(d)
}

/// Minimizes from explicit starting coordinates: L-BFGS with Armijo
/// backtracking, switching to damped Newton near convergence or when the
/// quasi-Newton step fails.
pub fn relax_from(start: &[Point], c: &TrapConfig, opts: &RelaxOptions) -> Result<ChainState> {
    c.validate()?;
    let x0 = flatten(start);
    let (e0, g0) = objective(&x0, c).ok_or_else(|| {
        let p = start
            .iter()
            .find(|p| p[0].hypot(p[1]) >= c.tube_radius)
            .copied()
            .unwrap_or([0.0; 3]);
        TrapError::OutsideTube {
            radial: p[0].hypot(p[1]),
            radius: c.tube_radius,
        }
    })?;
    let mut cur = Point1 {
        x: x0,
        e: e0,
        g: g0,
    };
    let mut history = vec![e0];
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let gnorm = norm(&cur.g);
        if gnorm < opts.gradient_tol {
            break;
        }
        iterations += 1;
        let mut next = None;
        if gnorm > NEWTON_SWITCH {
            let d = lbfgs_direction(&cur.g, &mem);
            let alpha0 = if mem.is_empty() {
                (0.1 / gnorm).min(1.0)
            } else {
                1.0
            };
            next = line_search(&cur, &d, alpha0, c);
        }
        if next.is_none() {
            if let Some(d) = newton_direction(&cur.x, &cur.g, c) {
                next = line_search(&cur, &d, 1.0, c);
            }
        }
        if next.is_none() {
            let d: Vec<f64> = cur.g.iter().map(|v| -v).collect();
            next = line_search(&cur, &d, (0.1 / gnorm).min(1.0), c);
        }
        let Some(next) = next else { break };
        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
            mem.push((s, y, 1.0 / sy));
            if mem.len() > LBFGS_MEMORY {
                mem.remove(0);
            }
        }
        history.push(next.e);
        cur = next;
    }
    let gradient_norm = norm(&cur.g);
    let converged = gradient_norm < opts.gradient_tol;
    if !converged && iterations >= opts.max_iterations {
        return Err(TrapError::NonConvergence {
            iterations,
            gradient_norm,
        });
    }
    Ok(ChainState {
        coordinates: unflatten(&cur.x),
        energy: cur.e,
        converged,
        gradient_norm,
        iterations,
        energy_history: history,
    })
}

fn lbfgs_direction(g: &[f64], mem: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.last() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalModes {
    /// Ascending; imaginary modes are reported as negative wavenumbers.
    pub frequencies: Vec<f64>,
    /// Mass-weighted Hessian eigenvalues (meV/(Å²·amu)).
    pub eigenvalues: Vec<f64>,
    /// Index of the free axial translation, if the tube is infinite.
    pub translation_mode: Option<usize>,
    /// Largest transverse fraction of each mode's displacement.
    pub transverse_weight: Vec<f64>,
}

/// Harmonic frequencies (cm⁻¹) from a finite-difference Hessian.
pub fn normal_modes(state: &ChainState, c: &TrapConfig, mass: f64) -> Result<NormalModes> {
    if !state.converged {
        return Err(TrapError::NotConverged);
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(TrapError::InvalidParameter {
            field: "mass",
            reason: "must be > 0".into(),
        });
    }
    let x = flatten(&state.coordinates);
    let h = hessian(&x, c)? / mass;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = state.coordinates.len();
    let mut eigenvalues = Vec::new();
    let mut frequencies = Vec::new();
    let mut transverse_weight = Vec::new();
    let mut best = (0.0, None);
    for (rank, &k) in order.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        eigenvalues.push(lam);
        frequencies.push(wavenumber_from_curvature(lam));
        let axial: f64 = (0..n).map(|a| v[3 * a + 2]).sum::<f64>() / (n as f64).sqrt();
        let transverse: f64 = (0..n)
            .map(|a| v[3 * a] * v[3 * a] + v[3 * a + 1] * v[3 * a + 1])
            .sum();
        transverse_weight.push(transverse);
        if axial.abs() > best.0 {
            best = (axial.abs(), Some(rank));
        }
    }
    let translation_mode = if c.tube_length.is_none() && best.0 > 0.99 {
        best.1
    } else {
        None
    };
    Ok(NormalModes {
        frequencies,
        eigenvalues,
        translation_mode,
        transverse_weight,
    })
}

/// Smallest eigenvalue of the Hessian block over transverse coordinates
/// (meV/Å²).
pub fn transverse_stability(state: &ChainState, c: &TrapConfig) -> Result<f64> {
    if !state.converged {
        return Err(TrapError::NotConverged);
    }
    let x = flatten(&state.coordinates);
    let h = hessian(&x, c)?;
    let idx: Vec<usize> = (0..x.len()).filter(|i| i % 3 != 2).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, s| h[(idx[r], idx[s])]);
    Ok(SymmetricEigen::new(sub)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}
