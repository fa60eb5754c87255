use std::f64::consts::TAU;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use vortex_core::dynamics::{
    circulation_state, flow_field, hamiltonian, integrate, vortex_velocities, IntegratorOptions, PhaseState, Scheme,
    Vortex, VortexModel,
};
use vortex_core::greens::{SphereGreen, TorusGreen};
use vortex_core::homology::Covector;
use vortex_core::pairlab::dipole_field;
use vortex_core::surface::{ChartId, ChartPoint, FlatTorus, Sphere, Surface};
use vortex_core::VortexError;

type P = ChartPoint<f64>;

fn loop_integral(center: C, radius: f64, f: impl Fn(&P) -> Covector<f64>) -> f64 {
    let n = 512;
    (0..n)
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            let e = C::from_polar(1.0, th);
            f(&P::front(center + e * radius)).apply(C::new(0.0, radius) * e) * TAU / n as f64
        })
        .sum()
}

fn torus_pair(tau: C) -> PhaseState<f64> {
    PhaseState::new(
        vec![Vortex::new(P::front(0.3 + tau * 0.4), 1.0), Vortex::new(P::front(0.7 + tau * 0.65), 0.6)],
        vec![0.3],
        vec![-0.2],
    )
}

#[test]
fn flow_has_vortex_circulation_around_each_vortex() {
    let tau = C::new(0.15, 1.05);
    let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
    let sys = VortexModel::new(&g).unwrap();
    let st = torus_pair(tau);
    let cs = circulation_state(&sys, &st).unwrap();
    let rho = 1e-2;
    // the loop also encloses the uniform counter-vorticity
    let background = st.total_strength() / g.torus().volume() * std::f64::consts::PI * rho * rho;
    for v in &st.vortices {
        let around = loop_integral(v.position.z, rho, |p| flow_field(&sys, &st, &cs, p).unwrap());
        assert!((around - (v.strength - background)).abs() < 1e-10, "{around} vs {}", v.strength);
    }
}

#[test]
fn flow_periods_are_the_circulations() {
    let tau = C::new(0.15, 1.05);
    let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
    let sys = VortexModel::new(&g).unwrap();
    let st = torus_pair(tau);
    let cs = circulation_state(&sys, &st).unwrap();
    let n = 1024;
    for (cycle, target) in [(sys.basis.alpha(0), st.a[0]), (sys.basis.beta(0), st.b[0])] {
        let sum: f64 = (0..n)
            .map(|k| flow_field(&sys, &st, &cs, &cycle.point(k as f64 / n as f64)).unwrap().apply(cycle.span))
            .sum();
        assert!((sum / n as f64 - target).abs() < 1e-10);
    }
}

#[test]
fn pair_flow_approaches_dipole() {
    let m = SphereGreen::new();
    let sys = VortexModel::new(&m).unwrap();
    let (w, dir, gamma) = (C::new(0.2, -0.1), C::from_polar(1.0, 0.6), 1.5);
    let quotient = |eps: f64, z: &P| {
        let st = PhaseState::new(
            vec![Vortex::new(P::front(w + dir * eps), gamma), Vortex::new(P::front(w - dir * eps), -gamma)],
            vec![],
            vec![],
        );
        let cs = circulation_state(&sys, &st).unwrap();
        flow_field(&sys, &st, &cs, z).unwrap().scale(TAU / (2.0 * eps * gamma))
    };
    let z = P::front(w + C::from_polar(0.3, 2.0));
    let dip = dipole_field(&P::front(w), dir, &z).unwrap();
    let gap = |eps: f64| {
        let r = quotient(eps, &z) - dip;
        r.p.hypot(r.q) / dip.p.hypot(dip.q)
    };
    let (coarse, fine) = (gap(2e-2), gap(1e-2));
    assert!(coarse < 1e-2);
    assert!((fine / coarse - 0.25).abs() < 0.01, "{coarse} {fine}");
}

#[test]
fn midpoint_scheme_conserves_energy() {
    let tau = C::new(0.15, 1.05);
    let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
    let sys = VortexModel::new(&g).unwrap();
    let opts = IntegratorOptions { scheme: Scheme::Midpoint, stride: 10, ..IntegratorOptions::default() };
    let traj = integrate(&sys, &torus_pair(tau), 1e-2, 0.5, opts).unwrap();
    assert!(traj.hamiltonian_drift_rel() < 1e-6);
}

#[test]
fn vortices_on_a_cycle_are_rejected() {
    let tau = C::new(0.0, 1.0);
    let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
    let sys = VortexModel::new(&g).unwrap();
    let cycle = sys.basis.alpha(0);
    let st = PhaseState::new(vec![Vortex::new(cycle.point(0.5), 1.0)], vec![0.0], vec![0.0]);
    assert!(matches!(hamiltonian(&sys, &st), Err(VortexError::VortexOnCycle { .. })));
}

#[test]
fn f32_sphere_vortex_is_stationary() {
    let m = SphereGreen::new();
    let sys = VortexModel::<f32>::new(&m).unwrap();
    let st = PhaseState::new(vec![Vortex::new(ChartPoint::<f32>::xy(0.4, -0.3), 2.0)], vec![], vec![]);
    assert!(vortex_velocities(&sys, &st).unwrap()[0].norm() < 1e-5);
}

fn chart_flip(p: &P) -> P {
    P::new(ChartId(1 - p.chart.0), p.z.inv())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sphere_velocities_transform_between_charts(
        pts in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64, -2.0..2.0f64), 2..4),
        flip in 0usize..3,
    ) {
        let m = SphereGreen::new();
        let sys = VortexModel::new(&m).unwrap();
        let vortices: Vec<_> = pts.iter().map(|&(x, y, g)| Vortex::new(P::xy(x, y), g)).collect();
        let st = PhaseState::new(vortices, vec![], vec![]);
        prop_assume!(st.min_separation(&Sphere).map(|s| s.0 > 0.1).unwrap_or(false));
        let k = flip % st.vortices.len();
        prop_assume!(st.vortices[k].position.z.norm() > 0.2);
        let mut other = st.clone();
        other.vortices[k].position = chart_flip(&st.vortices[k].position);
        let v = vortex_velocities(&sys, &st).unwrap();
        let u = vortex_velocities(&sys, &other).unwrap();
        let z = st.vortices[k].position.z;
        let mapped = -v[k] / (z * z);
        prop_assert!((mapped - u[k]).norm() <= 1e-9 * (1.0 + mapped.norm()));
        for j in (0..v.len()).filter(|&j| j != k) {
            prop_assert!((v[j] - u[j]).norm() <= 1e-9 * (1.0 + v[j].norm()));
        }
    }

    #[test]
    fn reversal_negates_velocities(s1 in 0.1..0.45f64, t1 in 0.1..0.9f64, s2 in 0.55..0.9f64, t2 in 0.1..0.9f64, a in -1.0..1.0f64) {
        let tau = C::new(0.1, 1.2);
        let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
        let sys = VortexModel::new(&g).unwrap();
        let st = PhaseState::new(
            vec![Vortex::new(P::front(s1 + tau * t1), 0.8), Vortex::new(P::front(s2 + tau * t2), -0.3)],
            vec![a],
            vec![0.25],
        );
        prop_assume!(st.vortices.iter().all(|v| sys.basis.clearance(&v.position) > 1e-2));
        let v = vortex_velocities(&sys, &st).unwrap();
        let r = vortex_velocities(&sys, &st.time_reversed()).unwrap();
        for (x, y) in v.iter().zip(&r) {
            prop_assert!((x + y).norm() < 1e-12 * (1.0 + x.norm()));
        }
        let h = hamiltonian(&sys, &st).unwrap();
        prop_assert!((h - hamiltonian(&sys, &st.time_reversed()).unwrap()).abs() < 1e-12 * (1.0 + h.abs()));
    }
}
