use cntqd_core::trap::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn interior(spacings: &[f64]) -> &[f64] {
    &spacings[1..spacings.len() - 1]
}

fn fd_gradient(coords: &[Point], c: &TrapConfig, h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..coords.len() {
        for a in 0..3 {
            let mut p = coords.to_vec();
            p[i][a] += h;
            let ep = chain_energy(&p, c).unwrap().0;
            p[i][a] -= 2.0 * h;
            let em = chain_energy(&p, c).unwrap().0;
            out.push((ep - em) / (2.0 * h));
        }
    }
    out
}

fn relative_gradient_error(coords: &[Point], c: &TrapConfig) -> f64 {
    let (_, g) = chain_energy(coords, c).unwrap();
    let g: Vec<f64> = g.iter().flatten().copied().collect();
    let fd = fd_gradient(coords, c, 1e-5);
    let diff = g
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-2);
    diff / scale
}

fn random_chain(rng: &mut ChaCha8Rng, c: &TrapConfig) -> Vec<Point> {
    let n = rng.gen_range(1..=6);
    let max_r = c.tube_radius - 0.6 * c.wall_sigma;
    (0..n)
        .map(|k| {
            let r = rng.gen_range(0.0..max_r);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = 3.2 * k as f64 + rng.gen_range(-0.4..0.4);
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for config in [
        TrapConfig::default(),
        TrapConfig::preset("nitrogen").unwrap(),
        TrapConfig {
            tube_length: Some(20.0),
            ..TrapConfig::default()
        },
    ] {
        for _ in 0..34 {
            let coords = random_chain(&mut rng, &config);
            let err = relative_gradient_error(&coords, &config);
            assert!(err < 1e-6, "{err} at {coords:?}");
        }
    }
}

#[test]
fn quadrature_order_doubling_is_converged() {
    let c = TrapConfig::default();
    let fine = TrapConfig {
        quadrature_order: 2 * c.quadrature_order,
        ..c.clone()
    };
    let finite = TrapConfig {
        tube_length: Some(15.0),
        ..c.clone()
    };
    let finite_fine = TrapConfig {
        quadrature_order: 2 * c.quadrature_order,
        ..finite.clone()
    };
    for radial in [0.0, 0.5, 1.0, 1.5, c.tube_radius - 0.5 * c.wall_sigma] {
        let a = wall_potential(radial, 1.0, &c).unwrap().0;
        let b = wall_potential(radial, 1.0, &fine).unwrap().0;
        assert!((a - b).abs() < 1e-9, "{radial}: {a} vs {b}");
        let a = wall_potential(radial, 5.0, &finite).unwrap().0;
        let b = wall_potential(radial, 5.0, &finite_fine).unwrap().0;
        assert!((a - b).abs() < 1e-9);
    }
    // Ten times finer quadrature agrees too.
    let ten = TrapConfig {
        quadrature_order: 10 * c.quadrature_order,
        ..c.clone()
    };
    let a = wall_potential(0.0, 0.0, &c).unwrap().0;
    assert!((a - wall_potential(0.0, 0.0, &ten).unwrap().0).abs() < 1e-9);
}

#[test]
fn on_axis_well_matches_direct_surface_sum() {
    // Brute-force oracle: midpoint sum over a fine (θ, z) grid of wall points.
    let c = TrapConfig::default();
    let (nz, zmax) = (40_000, 60.0);
    let dz = 2.0 * zmax / nz as f64;
    let mut sum = 0.0;
    for j in 0..nz {
        let z = -zmax + (j as f64 + 0.5) * dz;
        let d2 = c.tube_radius * c.tube_radius + z * z;
        let x6 = c.wall_sigma.powi(6) / (d2 * d2 * d2);
        sum += 4.0 * c.wall_epsilon * (x6 * x6 - x6) * dz;
    }
    // Far tail, where the attractive z⁻⁶ term dominates.
    sum -= 8.0 * c.wall_epsilon * c.wall_sigma.powi(6) / (5.0 * zmax.powi(5));
    // Integrand is θ-independent on axis.
    let oracle = sum * c.surface_density * c.tube_radius * 2.0 * std::f64::consts::PI;
    let v = wall_potential(0.0, 0.0, &c).unwrap().0;
    assert!((v - oracle).abs() < 1e-8 * oracle.abs(), "{v} vs {oracle}");
}

#[test]
fn translation_invariance_of_infinite_tube() {
    let c = TrapConfig::default();
    let coords = vec![[0.1, 0.0, 0.0], [0.0, -0.2, 3.0], [0.05, 0.05, 6.1]];
    let shifted: Vec<Point> = coords.iter().map(|p| [p[0], p[1], p[2] + 17.3]).collect();
    let a = chain_energy(&coords, &c).unwrap().0;
    let b = chain_energy(&shifted, &c).unwrap().0;
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn pair_at_minimum_contributes_minus_epsilon() {
    let c = TrapConfig::default();
    let rm = 2f64.powf(1.0 / 6.0) * c.atom_sigma;
    let well = wall_potential(0.0, 0.0, &c).unwrap().0;
    let e = chain_energy(&[[0.0; 3], [0.0, 0.0, rm]], &c).unwrap().0;
    assert!((e - 2.0 * well + c.atom_epsilon).abs() < 1e-12);
}

#[test]
fn eight_atom_chain_is_uniform_and_on_axis() {
    let c = TrapConfig::default();
    let s = relax_chain(8, &c, 0.1).unwrap();
    assert!(s.converged && s.gradient_norm < 1e-6);
    let sp = s.spacings();
    let inner = interior(&sp);
    let mean = inner.iter().sum::<f64>() / inner.len() as f64;
    let spread = inner.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean;
    let rm = 2f64.powf(1.0 / 6.0) * c.atom_sigma;
    println!("spacings {sp:?} spread {spread:e} rm {rm}");
    assert!(spread < 0.01);
    assert!((mean - rm).abs() < 0.02 * rm);
    assert!(s.max_radial() < 1e-4);
    assert!(transverse_stability(&s, &c).unwrap() > 0.0);
}

#[test]
fn energy_history_is_monotone() {
    let c = TrapConfig::default();
    let s = relax_chain(8, &c, 0.2).unwrap();
    for w in s.energy_history.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0),
            "{} -> {}",
            w[0],
            w[1]
        );
    }
    assert_eq!(*s.energy_history.last().unwrap(), s.energy);
}

/// Independent 1D oracle: on the axis of an infinite tube the wall term is
/// constant, so cyclic golden-section coordinate descent on the pair sum
/// alone gives the axial positions.
fn axial_oracle(n: usize, c: &TrapConfig) -> Vec<f64> {
    let rm = 2f64.powf(1.0 / 6.0) * c.atom_sigma;
    let mut z: Vec<f64> = (0..n).map(|k| rm * k as f64).collect();
    let energy = |z: &[f64]| {
        let mut e = 0.0;
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                let x6 = (c.atom_sigma / (z[j] - z[i]).abs()).powi(6);
                e += 4.0 * c.atom_epsilon * (x6 * x6 - x6);
            }
        }
        e
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..2000 {
        let mut moved = 0.0_f64;
        for i in 1..n {
            let (mut lo, mut hi) = (z[i] - 0.3, z[i] + 0.3);
            let mut trial = z.clone();
            while hi - lo > 1e-12 {
                let a = hi - g * (hi - lo);
                let b = lo + g * (hi - lo);
                trial[i] = a;
                let ea = energy(&trial);
                trial[i] = b;
                if ea < energy(&trial) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let new = 0.5 * (lo + hi);
            moved = moved.max((new - z[i]).abs());
            z[i] = new;
        }
        if moved < 1e-10 {
            break;
        }
    }
    z.windows(2).map(|w| w[1] - w[0]).collect()
}

#[test]
fn spacings_match_axial_scan_oracle() {
    let c = TrapConfig::default();
    let s = relax_chain(8, &c, 0.0).unwrap();
    let oracle = axial_oracle(8, &c);
    for (a, b) in s.spacings().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}

#[test]
fn off_axis_seeds_return_to_axis() {
    let c = TrapConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = RelaxOptions::default();
    for _ in 0..5 {
        let mut seed = seed_chain(8, &c, &opts);
        for p in &mut seed {
            let r = rng.gen_range(0.0..=0.5);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            p[0] = r * phi.cos();
            p[1] = r * phi.sin();
        }
        let s = relax_from(&seed, &c, &opts).unwrap();
        assert!(s.converged);
        assert!(s.max_radial() < 1e-4, "{}", s.max_radial());
    }
}

#[test]
fn relaxed_chain_is_jitter_invariant() {
    let c = TrapConfig::default();
    let reference = relax_chain(8, &c, 0.0).unwrap();
    let centre = |s: &ChainState| {
        let mut z: Vec<f64> = s.coordinates.iter().map(|p| p[2]).collect();
        z.sort_by(f64::total_cmp);
        let m = z.iter().sum::<f64>() / z.len() as f64;
        z.iter().map(|v| v - m).collect::<Vec<f64>>()
    };
    let z0 = centre(&reference);
    for (seed, jitter) in [(1, 0.05), (2, 0.1), (3, 0.2)] {
        let s = relax_chain_with(
            8,
            &c,
            &RelaxOptions {
                seed_jitter: jitter,
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((s.energy - reference.energy).abs() < 1e-8);
        for (a, b) in centre(&s).iter().zip(&z0) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!(s.max_radial() < 1e-4);
    }
}

#[test]
fn single_atom_modes() {
    let c = TrapConfig::default();
    let s = relax_chain(1, &c, 0.0).unwrap();
    let modes = normal_modes(&s, &c, c.atom_mass).unwrap();
    assert_eq!(modes.frequencies.len(), 3);
    assert_eq!(modes.translation_mode, Some(0));
    assert!(modes.frequencies[0].abs() < 1e-3);
    let (f1, f2) = (modes.frequencies[1], modes.frequencies[2]);
    assert!(f1 > 0.0 && (f1 - f2).abs() < 1e-6 * f1);
    // Transverse stiffness equals the wall curvature on axis.
    let h = 1e-4;
    let curv = (wall_potential(h, 0.0, &c).unwrap().1 - 0.0) / h;
    let k = transverse_stability(&s, &c).unwrap();
    assert!((k - curv).abs() < 1e-4 * curv, "{k} vs {curv}");
}

#[test]
fn dimer_stretch_matches_pair_curvature() {
    let c = TrapConfig::default();
    let s = relax_chain(2, &c, 0.0).unwrap();
    let modes = normal_modes(&s, &c, c.atom_mass).unwrap();
    let rm = 2f64.powf(1.0 / 6.0) * c.atom_sigma;
    let k = 72.0 * c.atom_epsilon / (rm * rm);
    let want = cntqd_core::units::wavenumber_from_curvature(2.0 * k / c.atom_mass);
    // The stretch is the purely axial mode that is not the translation.
    let stretch = (0..modes.frequencies.len())
        .filter(|&i| Some(i) != modes.translation_mode && modes.transverse_weight[i] < 1e-6)
        .map(|i| modes.frequencies[i])
        .next()
        .unwrap();
    assert!((stretch - want).abs() < 1e-3 * want, "{stretch} vs {want}");
}

#[test]
fn eight_atom_modes_are_real() {
    let c = TrapConfig::default();
    let s = relax_chain(8, &c, 0.0).unwrap();
    let modes = normal_modes(&s, &c, c.atom_mass).unwrap();
    let t = modes.translation_mode.unwrap();
    for (i, f) in modes.frequencies.iter().enumerate() {
        if i != t {
            assert!(*f > 0.0, "mode {i} is {f}");
        }
    }
}

#[test]
fn wide_tube_axis_is_unstable() {
    let c = TrapConfig {
        tube_radius: 10.0,
        ..TrapConfig::default()
    };
    let s = relax_chain(1, &c, 0.0).unwrap();
    assert!(s.converged);
    assert!(transverse_stability(&s, &c).unwrap() < 0.0);
    // Radial scan oracle: the wall potential has an off-axis minimum.
    let axis = wall_potential(0.0, 0.0, &c).unwrap().0;
    let best = (1..900)
        .map(|k| wall_potential(k as f64 * 0.01, 0.0, &c).unwrap().0)
        .fold(f64::INFINITY, f64::min);
    assert!(best < axis);
}

#[test]
fn nitrogen_chain_spacing() {
    let c = TrapConfig::preset("nitrogen").unwrap();
    let s = relax_chain(8, &c, 0.05).unwrap();
    let sp = s.spacings();
    let inner = interior(&sp);
    let mean = inner.iter().sum::<f64>() / inner.len() as f64;
    assert!((mean - 3.5).abs() < 0.1, "{mean}");
    assert!(transverse_stability(&s, &c).unwrap() > 0.0);
}

#[test]
fn finite_tube_relaxes() {
    let c = TrapConfig {
        tube_length: Some(40.0),
        ..TrapConfig::default()
    };
    let s = relax_chain(4, &c, 0.05).unwrap();
    assert!(s.converged);
    let modes = normal_modes(&s, &c, c.atom_mass).unwrap();
    assert_eq!(modes.translation_mode, None);
}
