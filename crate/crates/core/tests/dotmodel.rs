use cntqd_core::dotmodel::*;
use cntqd_core::qstate::{entanglement_entropy, C64};

#[test]
fn zero_field_doublets_are_spin_orbit_apart() {
    for kk in [0.0, 65.0, 200.0] {
        let p = DotParameters {
            delta_kk: kk,
            ..Default::default()
        };
        let e = spectrum_point(&p, 0.0, 0.0).unwrap().energies;
        assert!((e[1] - e[0]).abs() < 1e-10);
        assert!((e[3] - e[2]).abs() < 1e-10);
        let centres = 0.5 * (e[2] + e[3]) - 0.5 * (e[0] + e[1]);
        assert!((centres - p.delta_so).abs() < 1e-10, "{centres}");
    }
}

#[test]
fn anticrossing_gap_and_position() {
    let p = DotParameters::default();
    let crossings = find_crossings(&p, (0.0, 1.5)).unwrap();
    let b_plus = p.bare_spin_orbit() / (2.0 * p.mu_orb);
    let c = crossings
        .iter()
        .find(|c| c.pair == (StateLabel::Alpha, StateLabel::Delta))
        .expect("alpha/delta anti-crossing");
    assert!((c.gap - p.delta_kk).abs() < 1e-3, "{}", c.gap);
    assert!((c.b_star - b_plus).abs() < 1e-6, "{} vs {b_plus}", c.b_star);
    // Equal diagonal energies there.
    let ea = diagonal_energy(&p, StateLabel::Alpha, b_plus, 0.0).unwrap();
    let ed = diagonal_energy(&p, StateLabel::Delta, b_plus, 0.0).unwrap();
    assert!((ea - ed).abs() < 1e-10);
}

#[test]
fn negative_field_partner_crossing() {
    let p = DotParameters::default();
    let crossings = find_crossings(&p, (-1.5, 0.0)).unwrap();
    let c = crossings
        .iter()
        .find(|c| c.pair == (StateLabel::Beta, StateLabel::Gamma))
        .unwrap();
    assert!((c.b_star + p.bare_spin_orbit() / (2.0 * p.mu_orb)).abs() < 1e-6);
    assert!((c.gap - p.delta_kk).abs() < 1e-3);
}

#[test]
fn kramers_states_are_maximally_entangled() {
    for k in 0..32 {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
        let (o1, o2) = kramers_states(phi, -phi);
        for s in [o1.state, o2.state] {
            let h = entanglement_entropy(&s, &[SPIN_FACTOR]).unwrap();
            assert!((h - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn coupled_basis_expansions() {
    let third = (1.0f64 / 3.0).sqrt();
    let two_thirds = (2.0f64 / 3.0).sqrt();
    let coeff = |label: StateLabel, two_j: i64, two_m: i64| -> C64 {
        coupled_basis_transform(&product_state(label))
            .unwrap()
            .into_iter()
            .find(|(s, _)| s.two_j == two_j && s.two_m == two_m)
            .unwrap()
            .1
    };
    // δ = (|3/2,−1/2⟩ − √2|1/2,−1/2⟩)/√3
    assert!((coeff(StateLabel::Delta, 3, -1) - C64::new(third, 0.0)).norm() < 1e-12);
    assert!((coeff(StateLabel::Delta, 1, -1) - C64::new(-two_thirds, 0.0)).norm() < 1e-12);
    // β = (|3/2,1/2⟩ + √2|1/2,1/2⟩)/√3
    assert!((coeff(StateLabel::Beta, 3, 1) - C64::new(third, 0.0)).norm() < 1e-12);
    assert!((coeff(StateLabel::Beta, 1, 1) - C64::new(two_thirds, 0.0)).norm() < 1e-12);
    // α and γ are the stretched states.
    assert!((coeff(StateLabel::Alpha, 3, 3).re - 1.0).abs() < 1e-12);
    assert!((coeff(StateLabel::Gamma, 3, -3).re - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_preserves_grid_order() {
    let p = DotParameters::default();
    let grid: Vec<f64> = (0..50).map(|k| -1.0 + 0.04 * k as f64).collect();
    let pts = spectrum_sweep(&p, &grid, 0.0).unwrap();
    for (pt, b) in pts.iter().zip(&grid) {
        assert_eq!(pt.b_field, *b);
        assert_eq!(pt.energies, spectrum_point(&p, *b, 0.0).unwrap().energies);
    }
}
