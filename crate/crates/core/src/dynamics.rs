//! Kinematic bicycle model integrated with explicit Euler steps.
//!
//! State is `[x, y, heading, v, alpha]`: planar position, yaw, forward
//! speed, and front-wheel steering angle. Controls are `[u1, u2]`:
//! steering rate and longitudinal acceleration. The model cannot
//! reverse (speed clamps at zero) and the steering angle saturates at
//! a symmetric bound.

use crate::config::DynamicsParams;
use crate::{Error, Result};

/// Vehicle state `[x, y, heading, v, alpha]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Yaw angle in radians; 0 points along +x, pi/2 along +y.
    pub heading: f64,
    /// Forward speed, always >= 0.
    pub v: f64,
    /// Front-wheel steering angle, |alpha| <= alpha_max.
    pub alpha: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, v: f64, alpha: f64) -> Self {
        Self { x, y, heading, v, alpha }
    }

    /// The state as a flat array, in field order.
    pub fn as_array(&self) -> [f64; 5] {
        [self.x, self.y, self.heading, self.v, self.alpha]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|c| c.is_finite())
    }
}

/// Control input `[u1, u2]`: steering rate and acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub u1: f64,
    pub u2: f64,
}

impl ControlInput {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

/// One explicit-Euler step of the bicycle model:
///
/// ```text
/// x'       = v cos(heading)
/// y'       = v sin(heading)
/// heading' = (v / L) tan(alpha)
/// v'       = u2            (acceleration)
/// alpha'   = u1            (steering rate)
/// ```
///
/// All derivatives are evaluated at the current state. After the
/// update the speed is clamped at zero and the steering angle at
/// `+/- alpha_max`. Controls outside their bounds are clamped before
/// integrating, so stored control sequences re-integrate exactly.
pub fn step(s: &VehicleState, u: ControlInput, p: &DynamicsParams) -> Result<VehicleState> {
    if !s.is_finite() {
        return Err(Error::NonFinite { context: "vehicle state" });
    }
    if !u.is_finite() {
        return Err(Error::NonFinite { context: "control input" });
    }
    let u1 = u.u1.clamp(-p.u1_max, p.u1_max);
    let u2 = u.u2.clamp(-p.u2_max, p.u2_max);
    Ok(VehicleState {
        x: s.x + s.v * s.heading.cos() * p.dt,
        y: s.y + s.v * s.heading.sin() * p.dt,
        heading: s.heading + s.v / p.axle_length * s.alpha.tan() * p.dt,
        v: (s.v + u2 * p.dt).max(0.0),
        alpha: (s.alpha + u1 * p.dt).clamp(-p.alpha_max, p.alpha_max),
    })
}

/// A rolled-out trajectory: `states.len() == controls.len() + 1` and
/// consecutive states are related by [`step`] under the stored `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<VehicleState>,
    pub controls: Vec<ControlInput>,
}

impl Trajectory {
    /// Number of control steps (states minus one).
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    pub fn start(&self) -> &VehicleState {
        &self.states[0]
    }

    pub fn end(&self) -> &VehicleState {
        self.states.last().expect("trajectory has at least one state")
    }

    /// Re-integrates the stored controls and confirms each stored
    /// state matches bit-for-bit (the integrator is deterministic).
    pub fn is_consistent(&self, p: &DynamicsParams) -> bool {
        if self.states.len() != self.controls.len() + 1 || self.dt != p.dt {
            return false;
        }
        self.controls.iter().enumerate().all(|(t, &u)| {
            step(&self.states[t], u, p).map(|s| s == self.states[t + 1]).unwrap_or(false)
        })
    }
}

/// Rolls the model forward from `start` applying `controls` in order.
/// Errors if `controls` is empty or any intermediate state goes
/// non-finite.
pub fn rollout(start: VehicleState, controls: &[ControlInput], p: &DynamicsParams) -> Result<Trajectory> {
    if controls.is_empty() {
        return Err(Error::EmptyControls);
    }
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(start);
    for &u in controls {
        let next = step(states.last().unwrap(), u, p)?;
        states.push(next);
    }
    Ok(Trajectory { dt: p.dt, states, controls: controls.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> DynamicsParams {
        DynamicsParams::default()
    }

    /// Reference integrator for the same ODE written independently of
    /// `step`: subdivides one macro step into `n` explicit substeps,
    /// applying the same clamps, so its error term is ~n times smaller.
    fn fine_step(s: &VehicleState, u: ControlInput, p: &DynamicsParams, n: usize) -> VehicleState {
        let h = p.dt / n as f64;
        let (mut x, mut y, mut th, mut v, mut al) = (s.x, s.y, s.heading, s.v, s.alpha);
        let u1 = u.u1.clamp(-p.u1_max, p.u1_max);
        let u2 = u.u2.clamp(-p.u2_max, p.u2_max);
        for _ in 0..n {
            let (nx, ny) = (x + v * th.cos() * h, y + v * th.sin() * h);
            let nth = th + v / p.axle_length * al.tan() * h;
            let nv = (v + u2 * h).max(0.0);
            let nal = (al + u1 * h).clamp(-p.alpha_max, p.alpha_max);
            x = nx;
            y = ny;
            th = nth;
            v = nv;
            al = nal;
        }
        VehicleState::new(x, y, th, v, al)
    }

    fn state_gap(a: &VehicleState, b: &VehicleState) -> f64 {
        a.as_array()
            .iter()
            .zip(b.as_array())
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }

    fn state_norm(s: &VehicleState) -> f64 {
        s.as_array().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_velocity_is_a_fixed_point() {
        let s = VehicleState::new(3.0, -2.0, 0.7, 0.0, 0.2);
        let next = step(&s, ControlInput::default(), &params()).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn straight_coasting_advances_x_only() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 10.0, 0.0);
        let next = step(&s, ControlInput::default(), &params()).unwrap();
        assert!((next.x - 1.0).abs() < 1e-12);
        assert_eq!(next.y, 0.0);
        assert_eq!(next.heading, 0.0);
        assert_eq!(next.v, 10.0);
        assert_eq!(next.alpha, 0.0);
    }

    #[test]
    fn step_tracks_fine_integrator_on_curved_motion() {
        // Moderate curvature cases: one Euler macro step must stay
        // within 1% of the state magnitude of a 1000-substep rollout.
        let cases = [
            VehicleState::new(0.0, 0.0, 0.0, 10.0, 0.1),
            VehicleState::new(5.0, -3.0, 1.2, 30.0, -0.05),
            VehicleState::new(-4.0, 8.0, std::f64::consts::FRAC_PI_2, 55.0, 0.02),
            VehicleState::new(0.0, 0.0, -2.0, 20.0, 0.08),
        ];
        for s in cases {
            let u = ControlInput::new(0.5, -2.0);
            let coarse = step(&s, u, &params()).unwrap();
            let fine = fine_step(&s, u, &params(), 1000);
            let tol = 0.01 * state_norm(&fine).max(1.0);
            assert!(
                state_gap(&coarse, &fine) <= tol,
                "euler step strayed {} (> {tol}) from the reference at {s:?}",
                state_gap(&coarse, &fine)
            );
        }
    }

    #[test]
    fn fine_integrator_error_shrinks_with_substeps() {
        let s = VehicleState::new(0.0, 0.0, 0.3, 25.0, 0.12);
        let u = ControlInput::new(1.0, 3.0);
        let reference = fine_step(&s, u, &params(), 10_000);
        let coarse_err = state_gap(&step(&s, u, &params()).unwrap(), &reference);
        let mid_err = state_gap(&fine_step(&s, u, &params(), 10), &reference);
        let fine_err = state_gap(&fine_step(&s, u, &params(), 100), &reference);
        assert!(mid_err < coarse_err);
        assert!(fine_err < mid_err);
    }

    #[test]
    fn speed_clamps_at_zero_and_alpha_at_bound() {
        let p = params();
        let s = VehicleState::new(0.0, 0.0, 0.0, 0.3, 0.49);
        let next = step(&s, ControlInput::new(p.u1_max, -p.u2_max), &p).unwrap();
        assert_eq!(next.v, 0.0);
        assert_eq!(next.alpha, p.alpha_max);
    }

    #[test]
    fn controls_are_clamped_to_bounds_before_integrating() {
        let p = params();
        let s = VehicleState::new(0.0, 0.0, 0.0, 10.0, 0.0);
        let wild = step(&s, ControlInput::new(100.0, 100.0), &p).unwrap();
        let capped = step(&s, ControlInput::new(p.u1_max, p.u2_max), &p).unwrap();
        assert_eq!(wild, capped);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let p = params();
        let bad = VehicleState::new(f64::NAN, 0.0, 0.0, 1.0, 0.0);
        assert!(matches!(
            step(&bad, ControlInput::default(), &p),
            Err(Error::NonFinite { .. })
        ));
        let s = VehicleState::new(0.0, 0.0, 0.0, 1.0, 0.0);
        assert!(step(&s, ControlInput::new(f64::INFINITY, 0.0), &p).is_err());
    }

    #[test]
    fn rollout_matches_manual_step_composition() {
        let p = params();
        let start = VehicleState::new(0.0, 0.0, 1.0, 12.0, 0.0);
        let controls: Vec<ControlInput> =
            (0..20).map(|t| ControlInput::new(0.1 * (t as f64).sin(), 0.5)).collect();
        let traj = rollout(start, &controls, &p).unwrap();
        assert_eq!(traj.states.len(), controls.len() + 1);
        let mut s = start;
        for (t, &u) in controls.iter().enumerate() {
            s = step(&s, u, &p).unwrap();
            assert_eq!(traj.states[t + 1], s);
        }
        assert!(traj.is_consistent(&p));
    }

    #[test]
    fn rollout_rejects_empty_controls() {
        let start = VehicleState::new(0.0, 0.0, 0.0, 1.0, 0.0);
        assert!(matches!(rollout(start, &[], &params()), Err(Error::EmptyControls)));
    }

    fn arb_state() -> impl Strategy<Value = VehicleState> {
        (
            -100.0..100.0f64,
            -100.0..100.0f64,
            -std::f64::consts::PI..std::f64::consts::PI,
            0.0..80.0f64,
            -0.5..0.5f64,
        )
            .prop_map(|(x, y, heading, v, alpha)| VehicleState::new(x, y, heading, v, alpha))
    }

    proptest! {
        #[test]
        fn straight_rollout_conserves_heading_and_speed(s in arb_state(), steps in 1usize..60) {
            let p = params();
            let start = VehicleState { alpha: 0.0, ..s };
            let controls = vec![ControlInput::default(); steps];
            let traj = rollout(start, &controls, &p).unwrap();
            for st in &traj.states {
                prop_assert_eq!(st.heading, start.heading);
                prop_assert_eq!(st.v, start.v);
                prop_assert_eq!(st.alpha, 0.0);
            }
        }

        #[test]
        fn step_is_deterministic(s in arb_state(), u1 in -2.0..2.0f64, u2 in -10.0..10.0f64) {
            let p = params();
            let u = ControlInput::new(u1, u2);
            let a = step(&s, u, &p).unwrap();
            let b = step(&s, u, &p).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn invariants_hold_along_rollouts(s in arb_state(), u1 in -2.0..2.0f64, u2 in -10.0..10.0f64, steps in 1usize..50) {
            let p = params();
            let controls = vec![ControlInput::new(u1, u2); steps];
            let traj = rollout(s, &controls, &p).unwrap();
            for st in &traj.states {
                prop_assert!(st.v >= 0.0);
                prop_assert!(st.alpha.abs() <= p.alpha_max + 1e-15);
                prop_assert!(st.is_finite());
            }
        }
    }
}
