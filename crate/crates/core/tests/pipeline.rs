//! End-to-end runs through the public API on small grids.

use matterwave::labframe::{GravityModel, HeisenbergTrajectory};
use matterwave::measurement::{pattern_shifted, Pattern};
use matterwave::visibility::{
    dephasing_phase, fit_visibility, phasor_visibility, FringeModel, MassSpectrum,
};
use matterwave::wavepacket::{AxisLabel, GridAxis, InitialState};
use matterwave::worldline::ScreenWorldline;

const K0: f64 = 200.0;
const L: f64 = 100.0;

fn setup() -> (InitialState, GridAxis) {
    (
        InitialState::double_slit(0.5, -0.5, 0.02, 1.0, 1.0, K0).unwrap(),
        GridAxis::centered(AxisLabel::Z, 16384, 0.01).unwrap(),
    )
}

#[test]
fn pattern_survives_json() {
    let (ini, axis) = setup();
    let s = MassSpectrum::single(1e4).unwrap();
    let p = pattern_shifted(&ini, &axis, &s, &ScreenWorldline::rest(L).unwrap()).unwrap();
    let back: Pattern = serde_json::from_str(&p.to_json().unwrap()).unwrap();
    assert_eq!(back, p);
}

#[test]
fn models_survive_json() {
    let spectrum = MassSpectrum::thermal(1000.0, 2.0, 10.0).unwrap();
    let text = serde_json::to_string(&spectrum).unwrap();
    assert_eq!(serde_json::from_str::<MassSpectrum>(&text).unwrap(), spectrum);

    let model = GravityModel::violating_z(&[(1.0, -1e-3), (2.0, -2e-3)]);
    let text = serde_json::to_string(&model).unwrap();
    assert!(text.contains("\"kind\":\"violating\""), "{text}");
    assert_eq!(serde_json::from_str::<GravityModel>(&text).unwrap(), model);

    let traj = HeisenbergTrajectory {
        x0: [0.0; 3],
        p0: [0.0, 0.0, 1.0],
        mass: 2.0,
        model: GravityModel::eep_z(1e-3),
    };
    let text = serde_json::to_string(&traj).unwrap();
    assert_eq!(serde_json::from_str::<HeisenbergTrajectory>(&text).unwrap(), traj);
}

#[test]
fn two_masses_on_accelerating_screen_match_phasor() {
    let (ini, axis) = setup();
    let s = MassSpectrum::discrete(&[(9950.0, 0.5), (10050.0, 0.5)]).unwrap();
    // mean arrival t̄ = m̄ L / k0 = 5000; phase gap g t̄ δm Δz = 1
    let g = 1.0 / (5000.0 * 100.0);
    let w = ScreenWorldline::uniform_acceleration(g, L, 0.5 / g).unwrap();
    let p = pattern_shifted(&ini, &axis, &s, &w).unwrap();
    let alpha = K0 / L;
    let fit = fit_visibility(&p, alpha).unwrap();
    let fringe = FringeModel::new(1.0, 1.0, alpha, 0.0).unwrap();
    let phasor = phasor_visibility(&s, &dephasing_phase(&s, &fringe, &w, K0).unwrap()).unwrap();
    // oracle: |cos(1/2)|
    assert!((phasor.visibility - 0.5f64.cos()).abs() < 1e-12);
    assert!((fit.visibility - phasor.visibility).abs() < 0.02, "{fit:?}");
}
