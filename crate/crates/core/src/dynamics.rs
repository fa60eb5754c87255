//! Hamiltonian point-vortex dynamics with circulation variables.
//!
//! The phase space holds vortex positions `w_k` (strengths `Gamma_k`) and the
//! circulations `a`, `b` of the flow around the homology cycles. The
//! homology-invariant circulations are `A = a + oint_alpha *dG^omega` and
//! `B = b + oint_beta *dG^omega`.

use num_complex::Complex;

use crate::error::{Result, VortexError};
use crate::greens::{green, regular_coeffs, robin_function, GreenModel};
use crate::homology::{
    conjugate_green_form, conjugate_green_periods, harmonic_basis, period_matrix, Covector, CycleShift, HarmonicBasis,
    PeriodMatrix,
};
use crate::scalar::Real;
use crate::surface::{metric_density, r_metric, ChartPoint, Surface};

/// Separation (chart units) below which two vortices are considered collided.
pub const COLLISION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vortex<T> {
    pub position: ChartPoint<T>,
    pub strength: T,
}

impl<T: Real> Vortex<T> {
    pub fn new(position: ChartPoint<T>, strength: T) -> Self {
        Self { position, strength }
    }
}

/// A point of phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState<T> {
    pub vortices: Vec<Vortex<T>>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub t: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(vortices: Vec<Vortex<T>>, a: Vec<T>, b: Vec<T>) -> Self {
        Self { vortices, a, b, t: T::zero() }
    }

    /// Total strength `Gamma`.
    pub fn total_strength(&self) -> T {
        self.vortices.iter().fold(T::zero(), |s, v| s + v.strength)
    }

    pub fn weighted_points(&self) -> Vec<(ChartPoint<T>, T)> {
        self.vortices.iter().map(|v| (v.position, v.strength)).collect()
    }

    pub fn positions(&self) -> Vec<ChartPoint<T>> {
        self.vortices.iter().map(|v| v.position).collect()
    }

    /// The state whose forward evolution retraces this one backwards.
    pub fn time_reversed(&self) -> Self {
        Self {
            vortices: self.vortices.iter().map(|v| Vortex::new(v.position, -v.strength)).collect(),
            a: self.a.iter().map(|x| -*x).collect(),
            b: self.b.iter().map(|x| -*x).collect(),
            t: self.t,
        }
    }

    /// Smallest pairwise separation and the pair attaining it.
    pub fn min_separation(&self, s: &dyn Surface<T>) -> Result<(T, usize, usize)> {
        let mut best = (T::infinity(), 0, 0);
        for i in 0..self.vortices.len() {
            for j in i + 1..self.vortices.len() {
                let (p, q) = (&self.vortices[i].position, &self.vortices[j].position);
                let d = match s.relative(p, q) {
                    Some(d) => d.norm(),
                    None => s.distance(p, q)?,
                };
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        Ok(best)
    }

    /// Checks vector lengths and vortex separation.
    pub fn validate(&self, s: &dyn Surface<T>) -> Result<()> {
        let g = s.genus();
        if self.a.len() != g || self.b.len() != g {
            return Err(VortexError::InvalidArgument(format!(
                "circulation vectors have lengths ({}, {}) but genus is {g}",
                self.a.len(),
                self.b.len()
            )));
        }
        for v in &self.vortices {
            metric_density(s, &v.position)?;
        }
        let (d, i, j) = self.min_separation(s)?;
        if d <= T::lit(COLLISION) {
            return Err(VortexError::NearCollision { i, j, separation: d.as_f64() });
        }
        Ok(())
    }
}

/// The homology-invariant circulations `A`, `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirculationState<T> {
    pub big_a: Vec<T>,
    pub big_b: Vec<T>,
}

/// Green function, harmonic basis and period matrix of one surface.
#[derive(Clone)]
pub struct VortexModel<'a, T> {
    pub green: &'a dyn GreenModel<T>,
    pub basis: HarmonicBasis<T>,
    pub periods: Option<PeriodMatrix<T>>,
}

impl<'a, T: Real> VortexModel<'a, T> {
    pub fn new(green: &'a dyn GreenModel<T>) -> Result<Self> {
        let basis = harmonic_basis(green.surface())?;
        Self::with_basis(green, basis)
    }

    pub fn with_basis(green: &'a dyn GreenModel<T>, basis: HarmonicBasis<T>) -> Result<Self> {
        let periods = if basis.genus() > 0 { Some(period_matrix(&basis)?) } else { None };
        Ok(Self { green, basis, periods })
    }

    pub fn surface(&self) -> &dyn Surface<T> {
        self.green.surface()
    }

    pub fn genus(&self) -> usize {
        self.basis.genus()
    }

    fn rebased(&self, basis: HarmonicBasis<T>) -> Self {
        Self { green: self.green, basis, periods: self.periods.clone() }
    }
}

/// `A = a + oint_alpha *dG^omega`, `B = b + oint_beta *dG^omega`.
pub fn circulation_state<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<CirculationState<T>> {
    if sys.genus() == 0 {
        return Ok(CirculationState { big_a: vec![], big_b: vec![] });
    }
    let (pa, pb) = conjugate_green_periods(sys.green, &sys.basis, &st.weighted_points())?;
    Ok(CirculationState {
        big_a: st.a.iter().zip(&pa).map(|(x, y)| *x + *y).collect(),
        big_b: st.b.iter().zip(&pb).map(|(x, y)| *x + *y).collect(),
    })
}

fn hamiltonian_with<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>, cs: &CirculationState<T>) -> Result<T> {
    let mut twice = T::zero();
    for (k, vk) in st.vortices.iter().enumerate() {
        twice += vk.strength * vk.strength * robin_function(sys.green, &vk.position)?;
        for (j, vj) in st.vortices.iter().enumerate() {
            if j != k {
                twice += vk.strength * vj.strength * green(sys.green, &vk.position, &vj.position)?;
            }
        }
    }
    if let Some(pm) = &sys.periods {
        twice += pm.energy(&cs.big_a, &cs.big_b);
    }
    Ok(twice / T::lit(2.0))
}

/// Hamiltonian
/// `H = (sum_k Gamma_k^2 R(w_k) + sum_{k != j} Gamma_k Gamma_j G(w_k, w_j) + (A, B) M (A, B)) / 2`.
pub fn hamiltonian<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<T> {
    st.validate(sys.surface())?;
    let cs = circulation_state(sys, st)?;
    hamiltonian_with(sys, st, &cs)
}

fn velocities_with<T: Real>(
    sys: &VortexModel<'_, T>,
    st: &PhaseState<T>,
    cs: &CirculationState<T>,
) -> Result<Vec<Complex<T>>> {
    let s = sys.surface();
    let two = T::lit(2.0);
    let i = Complex::new(T::zero(), T::one());
    let mut out = Vec::with_capacity(st.vortices.len());
    for (k, vk) in st.vortices.iter().enumerate() {
        let w = &vk.position;
        let lam = metric_density(s, w)?;
        let h1 = regular_coeffs(sys.green, w)?.h1;
        let dbar_log_lambda = r_metric(s, w)?.conj() / two;
        let mut rhs = (h1.conj() + dbar_log_lambda) * vk.strength / (i * T::TAU());
        for (j, vj) in st.vortices.iter().enumerate() {
            if j != k {
                rhs -= i * two * vj.strength * sys.green.dz(w, &vj.position).conj();
            }
        }
        for l in 0..sys.genus() {
            let ua = sys.basis.d_u_alpha(l, w).dzbar();
            let ub = sys.basis.d_u_beta(l, w).dzbar();
            rhs += (ua * cs.big_b[l] - ub * cs.big_a[l]) * two;
        }
        out.push(rhs / (lam * lam));
    }
    Ok(out)
}

/// Velocities `dw_k/dt` in each vortex's chart.
pub fn vortex_velocities<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<Vec<Complex<T>>> {
    st.validate(sys.surface())?;
    let cs = circulation_state(sys, st)?;
    velocities_with(sys, st, &cs)
}

/// `(da/dt, db/dt) = (Gamma / V) (-R^T -Q; P R) (A, B)`.
pub fn circulation_rates<T: Real>(
    pm: &PeriodMatrix<T>,
    cs: &CirculationState<T>,
    volume: T,
    gamma: T,
) -> (Vec<T>, Vec<T>) {
    let g = pm.genus;
    let k = gamma / volume;
    let mut da = vec![T::zero(); g];
    let mut db = vec![T::zero(); g];
    for j in 0..g {
        for l in 0..g {
            da[j] -= k * (pm.r(l, j) * cs.big_a[l] + pm.q(j, l) * cs.big_b[l]);
            db[j] += k * (pm.p(j, l) * cs.big_a[l] + pm.r(j, l) * cs.big_b[l]);
        }
    }
    (da, db)
}

/// Flow one-form `nu = eta - *dG^omega` at `z`, with
/// `eta = sum_j (B_j dU_alpha_j - A_j dU_beta_j)`.
pub fn flow_field<T: Real>(
    sys: &VortexModel<'_, T>,
    st: &PhaseState<T>,
    cs: &CirculationState<T>,
    z: &ChartPoint<T>,
) -> Result<Covector<T>> {
    for v in &st.vortices {
        if let Some(d) = sys.surface().relative(z, &v.position) {
            if d.norm() < T::lit(crate::greens::COINCIDENCE) {
                return Err(VortexError::Coincident(d.norm().as_f64()));
            }
        }
    }
    let eta = (0..sys.genus()).fold(Covector::default(), |acc, j| {
        acc + sys.basis.d_u_alpha(j, z).scale(cs.big_b[j]) - sys.basis.d_u_beta(j, z).scale(cs.big_a[j])
    });
    Ok(eta - conjugate_green_form(sys.green, &st.weighted_points(), z))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    Rk4,
    Midpoint,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions<T> {
    pub scheme: Scheme,
    /// Record every `stride`-th step (the final step is always recorded).
    pub stride: usize,
    /// Lattice fraction below which a cycle is moved away from a vortex.
    pub reselect_fraction: T,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, stride: 1, reselect_fraction: T::lit(0.1) }
    }
}

/// A cycle move with the jump it caused in `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleEvent<T> {
    pub t: T,
    pub shifts: Vec<CycleShift<T>>,
    pub delta_a: Vec<T>,
    pub delta_b: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Sample<T> {
    pub state: PhaseState<T>,
    pub hamiltonian: T,
    pub circulation: CirculationState<T>,
    pub cycle_offsets: Vec<(T, T)>,
    pub min_separation: T,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub events: Vec<CycleEvent<T>>,
    /// Basis in force at the end of the run.
    pub basis: HarmonicBasis<T>,
}

impl<T: Real> Trajectory<T> {
    /// `max |H(t) - H(0)| / max(|H(0)|, tiny)`.
    pub fn hamiltonian_drift_rel(&self) -> T {
        let Some(first) = self.samples.first() else { return T::zero() };
        let h0 = first.hamiltonian;
        let scale = h0.abs().max(T::min_positive_value());
        self.samples.iter().fold(T::zero(), |m, s| m.max((s.hamiltonian - h0).abs() / scale))
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

struct Derivative<T> {
    dw: Vec<Complex<T>>,
    da: Vec<T>,
    db: Vec<T>,
}

fn rhs<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<Derivative<T>> {
    let cs = circulation_state(sys, st)?;
    let dw = velocities_with(sys, st, &cs)?;
    let (da, db) = match &sys.periods {
        Some(pm) => circulation_rates(pm, &cs, sys.surface().volume(), st.total_strength()),
        None => (vec![], vec![]),
    };
    Ok(Derivative { dw, da, db })
}

fn advanced<T: Real>(st: &PhaseState<T>, d: &Derivative<T>, h: T) -> PhaseState<T> {
    PhaseState {
        vortices: st
            .vortices
            .iter()
            .zip(&d.dw)
            .map(|(v, dw)| Vortex::new(ChartPoint::new(v.position.chart, v.position.z + *dw * h), v.strength))
            .collect(),
        a: st.a.iter().zip(&d.da).map(|(x, dx)| *x + *dx * h).collect(),
        b: st.b.iter().zip(&d.db).map(|(x, dx)| *x + *dx * h).collect(),
        t: st.t + h,
    }
}

fn combine<T: Real>(parts: &[(&Derivative<T>, T)]) -> Derivative<T> {
    let n = parts[0].0.dw.len();
    let g = parts[0].0.da.len();
    let mut out =
        Derivative { dw: vec![Complex::new(T::zero(), T::zero()); n], da: vec![T::zero(); g], db: vec![T::zero(); g] };
    for (d, c) in parts {
        for k in 0..n {
            out.dw[k] += d.dw[k] * *c;
        }
        for j in 0..g {
            out.da[j] += d.da[j] * *c;
            out.db[j] += d.db[j] * *c;
        }
    }
    out
}

fn rk4_step<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>, h: T) -> Result<PhaseState<T>> {
    let half = h / T::lit(2.0);
    let k1 = rhs(sys, st)?;
    let k2 = rhs(sys, &advanced(st, &k1, half))?;
    let k3 = rhs(sys, &advanced(st, &k2, half))?;
    let k4 = rhs(sys, &advanced(st, &k3, h))?;
    let sixth = T::one() / T::lit(6.0);
    let third = T::one() / T::lit(3.0);
    let k = combine(&[(&k1, sixth), (&k2, third), (&k3, third), (&k4, sixth)]);
    Ok(advanced(st, &k, h))
}

fn state_gap<T: Real>(x: &PhaseState<T>, y: &PhaseState<T>) -> T {
    let mut d = T::zero();
    for (u, v) in x.vortices.iter().zip(&y.vortices) {
        d = d.max((u.position.z - v.position.z).norm());
    }
    for (u, v) in x.a.iter().chain(&x.b).zip(y.a.iter().chain(&y.b)) {
        d = d.max((*u - *v).abs());
    }
    d
}

fn midpoint_step<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>, h: T) -> Result<PhaseState<T>> {
    let mut next = advanced(st, &rhs(sys, st)?, h);
    for _ in 0..100 {
        let mid = combine_states(st, &next);
        let candidate = advanced(st, &rhs(sys, &mid)?, h);
        let gap = state_gap(&candidate, &next);
        next = candidate;
        if gap <= T::epsilon() * T::lit(16.0) {
            return Ok(next);
        }
    }
    Err(VortexError::StepFailure("implicit midpoint iteration did not converge".into()))
}

fn combine_states<T: Real>(x: &PhaseState<T>, y: &PhaseState<T>) -> PhaseState<T> {
    let half = T::lit(0.5);
    PhaseState {
        vortices: x
            .vortices
            .iter()
            .zip(&y.vortices)
            .map(|(u, v)| {
                Vortex::new(ChartPoint::new(u.position.chart, (u.position.z + v.position.z) * half), u.strength)
            })
            .collect(),
        a: x.a.iter().zip(&y.a).map(|(p, q)| (*p + *q) * half).collect(),
        b: x.b.iter().zip(&y.b).map(|(p, q)| (*p + *q) * half).collect(),
        t: (x.t + y.t) * half,
    }
}

/// Moves cycles away from vortices, rebasing `(a, b)` so that `(A, B)` is unchanged.
fn reselect<T: Real>(
    sys: &mut VortexModel<'_, T>,
    st: &mut PhaseState<T>,
    fraction: T,
) -> Result<Option<CycleEvent<T>>> {
    let Some((basis, shifts)) = sys.basis.reselected(&st.positions(), fraction) else {
        return Ok(None);
    };
    let cs = circulation_state(sys, st)?;
    let moved = sys.rebased(basis);
    let (pa, pb) = conjugate_green_periods(moved.green, &moved.basis, &st.weighted_points())?;
    let new_a: Vec<T> = cs.big_a.iter().zip(&pa).map(|(x, y)| *x - *y).collect();
    let new_b: Vec<T> = cs.big_b.iter().zip(&pb).map(|(x, y)| *x - *y).collect();
    let event = CycleEvent {
        t: st.t,
        shifts,
        delta_a: new_a.iter().zip(&st.a).map(|(x, y)| *x - *y).collect(),
        delta_b: new_b.iter().zip(&st.b).map(|(x, y)| *x - *y).collect(),
    };
    st.a = new_a;
    st.b = new_b;
    *sys = moved;
    Ok(Some(event))
}

fn sample<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<Sample<T>> {
    let cs = circulation_state(sys, st)?;
    Ok(Sample {
        hamiltonian: hamiltonian_with(sys, st, &cs)?,
        circulation: cs,
        cycle_offsets: sys.basis.offsets(),
        min_separation: st.min_separation(sys.surface())?.0,
        state: st.clone(),
    })
}

/// Advances positions and circulations jointly from `st0` for time `t_end`.
pub fn integrate<T: Real>(
    sys: &VortexModel<'_, T>,
    st0: &PhaseState<T>,
    dt: T,
    t_end: T,
    opts: IntegratorOptions<T>,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) {
        return Err(VortexError::InvalidArgument("integration needs dt > 0 and T >= 0".into()));
    }
    let surface = sys.surface();
    st0.validate(surface)?;
    let mut sys = sys.clone();
    let mut st = st0.clone();
    for v in &mut st.vortices {
        v.position = surface.normalize(v.position);
    }
    let mut events = Vec::new();
    if let Some(e) = reselect(&mut sys, &mut st, opts.reselect_fraction)? {
        events.push(e);
    }
    let stride = opts.stride.max(1);
    let steps = (t_end / dt - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let mut samples = vec![sample(&sys, &st)?];
    let t0 = st.t;
    for k in 1..=steps {
        let t_k = (t0 + dt * T::from_usize(k).unwrap()).min(t0 + t_end);
        let h = t_k - st.t;
        let mut next = match opts.scheme {
            Scheme::Rk4 => rk4_step(&sys, &st, h)?,
            Scheme::Midpoint => midpoint_step(&sys, &st, h)?,
        };
        next.t = t_k;
        for v in &mut next.vortices {
            if !(v.position.z.re.is_finite() && v.position.z.im.is_finite()) {
                return Err(VortexError::StepFailure(format!("non-finite position at t = {}", t_k)));
            }
            v.position = surface.normalize(v.position);
        }
        let (d, i, j) = next.min_separation(surface)?;
        if d <= T::lit(COLLISION) {
            return Err(VortexError::NearCollision { i, j, separation: d.as_f64() });
        }
        st = next;
        if let Some(e) = reselect(&mut sys, &mut st, opts.reselect_fraction)? {
            events.push(e);
        }
        if k % stride == 0 || k == steps {
            samples.push(sample(&sys, &st)?);
        }
    }
    Ok(Trajectory { samples, events, basis: sys.basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{SphereGreen, TorusGreen};
    use crate::surface::FlatTorus;
    use std::f64::consts::PI;

    type P = ChartPoint<f64>;

    #[test]
    fn sphere_single_vortex() {
        let m = SphereGreen::new();
        let sys = VortexModel::<f64>::new(&m).unwrap();
        let st = PhaseState::new(vec![Vortex::new(P::xy(0.4, -1.3), 1.7)], vec![], vec![]);
        let v = vortex_velocities(&sys, &st).unwrap();
        assert!(v[0].norm() < 1e-15);
        let h = hamiltonian(&sys, &st).unwrap();
        assert!((h - 1.7f64.powi(2) * (2.0 * 2f64.ln() - 1.0) / (8.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn label_swap_keeps_energy() {
        let m = SphereGreen::new();
        let sys = VortexModel::<f64>::new(&m).unwrap();
        let a = Vortex::new(P::xy(0.1, 0.2), 1.0);
        let b = Vortex::new(P::xy(-0.5, 0.7), -0.4);
        let h1 = hamiltonian(&sys, &PhaseState::new(vec![a, b], vec![], vec![])).unwrap();
        let h2 = hamiltonian(&sys, &PhaseState::new(vec![b, a], vec![], vec![])).unwrap();
        assert!((h1 - h2).abs() < 1e-15);
    }

    #[test]
    fn zero_total_strength_freezes_circulations() {
        let g = TorusGreen::new(FlatTorus::<f64>::square()).unwrap();
        let sys = VortexModel::new(&g).unwrap();
        let st = PhaseState::new(
            vec![Vortex::new(P::xy(0.3, 0.3), 1.0), Vortex::new(P::xy(0.6, 0.55), -1.0)],
            vec![0.2],
            vec![-0.1],
        );
        let traj = integrate(&sys, &st, 1e-2, 0.1, IntegratorOptions::default()).unwrap();
        let last = &traj.last().state;
        assert_eq!(last.a, st.a);
        assert_eq!(last.b, st.b);
    }

    #[test]
    fn genus_mismatch_is_rejected() {
        let g = TorusGreen::new(FlatTorus::<f64>::square()).unwrap();
        let sys = VortexModel::new(&g).unwrap();
        let st = PhaseState::new(vec![Vortex::new(P::xy(0.3, 0.3), 1.0)], vec![], vec![]);
        assert!(matches!(hamiltonian(&sys, &st), Err(VortexError::InvalidArgument(_))));
    }

    #[test]
    fn collision_is_rejected() {
        let m = SphereGreen::new();
        let sys = VortexModel::<f64>::new(&m).unwrap();
        let st = PhaseState::new(
            vec![Vortex::new(P::xy(0.1, 0.2), 1.0), Vortex::new(P::xy(0.1, 0.2 + 1e-10), 1.0)],
            vec![],
            vec![],
        );
        assert!(matches!(vortex_velocities(&sys, &st), Err(VortexError::NearCollision { .. })));
    }

    #[test]
    fn circulation_rates_linear() {
        let pm = PeriodMatrix { genus: 1, p: vec![2.0], q: vec![0.5], r: vec![0.0] };
        let cs = CirculationState { big_a: vec![1.0], big_b: vec![3.0] };
        assert_eq!(circulation_rates(&pm, &cs, 2.0, 0.0), (vec![0.0], vec![0.0]));
        let (a1, b1) = circulation_rates(&pm, &cs, 2.0, 1.0);
        let (a2, b2) = circulation_rates(&pm, &cs, 2.0, 2.0);
        assert_eq!((2.0 * a1[0], 2.0 * b1[0]), (a2[0], b2[0]));
    }
}
