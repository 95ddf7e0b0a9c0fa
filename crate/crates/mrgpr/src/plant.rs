//! Discrete-time plants in normal form, the reference model, and simulation.
//!
//! A plant is `y(t+1) = f(z,y) + g(z,y) u(t)`, `z(t+1) = h(z,y)` with scalar
//! input/output and internal state `z` of dimension `n-1`. Plants are plain
//! descriptions built from function objects, so the worked example system is
//! just one registration among any the caller supplies. The example plant
//! additionally exposes analytic oracles (the history-to-state map and the
//! exact inverse controller) used to verify the learned controller.

use std::sync::Arc;

use thiserror::Error;

/// Rollouts abort once any state component leaves this box; the example
/// plant squares its output, so uncontrolled runs blow up fast and tests
/// need a clean failure instead of infinities.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Input gains smaller than this trip the relative-degree check.
pub const MIN_INPUT_GAIN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("state diverged at step {step}: |{component}| = {value:e} exceeds {limit:e}")]
    Diverged {
        step: usize,
        component: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("non-finite {component} produced at step {step}")]
    NonFinite { component: &'static str, step: usize },
    #[error("relative degree violation: |g(z, y)| = {gain:e} below {MIN_INPUT_GAIN:e}")]
    RelativeDegreeViolation { gain: f64 },
    #[error("state dimension mismatch: expected z of length {expected}, got {actual}")]
    StateDimension { expected: usize, actual: usize },
    #[error("history vector length mismatch: expected {expected}, got {actual}")]
    HistoryLength { expected: usize, actual: usize },
    #[error("reference model gain {gain} is not stable (|gain| must be < 1)")]
    UnstableReference { gain: f64 },
    #[error("controller fault at step {step}: {fault}")]
    Controller {
        step: usize,
        #[source]
        fault: ControlFault,
    },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
}

/// Raised by a feedback law that cannot produce a usable input.
#[derive(Debug, Error)]
#[error("{reason}")]
pub struct ControlFault {
    pub reason: String,
}

impl ControlFault {
    pub fn new(reason: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
        }
    }
}

/// Internal state `z` (length `n-1`) together with the measured output `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub z: Vec<f64>,
    pub y: f64,
}

impl PlantState {
    pub fn new(y: f64, z: Vec<f64>) -> Self {
        Self { z, y }
    }

    /// Convenience for the common scalar-z case.
    pub fn scalar(y: f64, z: f64) -> Self {
        Self { z: vec![z], y }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.z.iter().all(|v| v.is_finite())
    }
}

type ScalarMap = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
type StateMap = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// A control-affine normal-form plant with relative degree one.
#[derive(Clone)]
pub struct NormalFormPlant {
    n: usize,
    f: ScalarMap,
    g: ScalarMap,
    h: StateMap,
}

impl NormalFormPlant {
    /// Registers a plant of dimension `n >= 1` from its three maps. The
    /// input gain `g` is checked at every evaluation rather than up front.
    pub fn new(
        n: usize,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        h: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(n >= 1, "plant dimension must be at least 1");
        Self {
            n,
            f: Arc::new(f),
            g: Arc::new(g),
            h: Arc::new(h),
        }
    }

    /// Plant dimension `n`; the internal state has length `n - 1`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn drift(&self, z: &[f64], y: f64) -> f64 {
        (self.f)(z, y)
    }

    /// Input gain, checked against [`MIN_INPUT_GAIN`].
    pub fn input_gain(&self, z: &[f64], y: f64) -> Result<f64, PlantError> {
        let gain = (self.g)(z, y);
        if gain.abs() < MIN_INPUT_GAIN {
            return Err(PlantError::RelativeDegreeViolation { gain });
        }
        Ok(gain)
    }

    pub fn internal_map(&self, z: &[f64], y: f64) -> Vec<f64> {
        (self.h)(z, y)
    }

    /// One step of the plant: `y' = f(z,y) + g(z,y) u`, `z' = h(z,y)`.
    pub fn step(&self, state: &PlantState, u: f64) -> Result<PlantState, PlantError> {
        if state.z.len() != self.n - 1 {
            return Err(PlantError::StateDimension {
                expected: self.n - 1,
                actual: state.z.len(),
            });
        }
        let gain = self.input_gain(&state.z, state.y)?;
        let y_next = self.drift(&state.z, state.y) + gain * u;
        let z_next = self.internal_map(&state.z, state.y);
        if !y_next.is_finite() {
            return Err(PlantError::NonFinite {
                component: "output",
                step: 0,
            });
        }
        if z_next.iter().any(|v| !v.is_finite()) {
            return Err(PlantError::NonFinite {
                component: "internal state",
                step: 0,
            });
        }
        Ok(PlantState {
            z: z_next,
            y: y_next,
        })
    }
}

impl std::fmt::Debug for NormalFormPlant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalFormPlant").field("n", &self.n).finish()
    }
}

/// Stable reference dynamics `y_r(t+1) = f_r(y_r(t))`.
#[derive(Clone)]
pub struct ReferenceModel {
    f_r: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ReferenceModel {
    pub fn new(f_r: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f_r: Arc::new(f_r) }
    }

    /// Linear reference `f_r(y) = gain * y`; requires `|gain| < 1`.
    pub fn linear(gain: f64) -> Result<Self, PlantError> {
        if !(gain.abs() < 1.0) {
            return Err(PlantError::UnstableReference { gain });
        }
        Ok(Self::new(move |y| gain * y))
    }

    /// One step of the reference model.
    pub fn step(&self, y_r: f64) -> f64 {
        (self.f_r)(y_r)
    }
}

impl std::fmt::Debug for ReferenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ReferenceModel")
    }
}

/// The worked example: `y(t+1) = y^2 + z + u`, `z(t+1) = 0.5 sin(y) z`,
/// with `n = 2` and unit input gain.
pub fn example_plant() -> NormalFormPlant {
    NormalFormPlant::new(
        2,
        |z, y| y * y + z[0],
        |_, _| 1.0,
        |z, y| vec![0.5 * y.sin() * z[0]],
    )
}

/// History-to-state map of the example plant:
/// `z(t) = 0.5 sin(y(t-1)) (y(t) - y(t-1)^2 - u(t-1))`.
///
/// `zeta0` is `[y(t-1), u(t-1)]`, matching the `n = 2` regressor layout.
pub fn example_theta(zeta0: &[f64], y: f64) -> Result<f64, PlantError> {
    if zeta0.len() != 2 {
        return Err(PlantError::HistoryLength {
            expected: 2,
            actual: zeta0.len(),
        });
    }
    let (y_prev, u_prev) = (zeta0[0], zeta0[1]);
    Ok(0.5 * y_prev.sin() * (y - y_prev * y_prev - u_prev))
}

/// A plant whose maps are known analytically, together with the
/// history-to-state map that Lemma-style observability guarantees. Only
/// such plants can evaluate the exact inverse controller.
#[derive(Clone)]
pub struct PlantOracle {
    plant: NormalFormPlant,
    theta: Arc<dyn Fn(&[f64], f64) -> Result<Vec<f64>, PlantError> + Send + Sync>,
}

impl PlantOracle {
    pub fn new(
        plant: NormalFormPlant,
        theta: impl Fn(&[f64], f64) -> Result<Vec<f64>, PlantError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            plant,
            theta: Arc::new(theta),
        }
    }

    pub fn plant(&self) -> &NormalFormPlant {
        &self.plant
    }

    /// Reconstructed internal state from the history `zeta0 = [y-hist; u-hist]`
    /// and the current output.
    pub fn theta(&self, zeta0: &[f64], y: f64) -> Result<Vec<f64>, PlantError> {
        let expected = 2 * (self.plant.n - 1);
        if zeta0.len() != expected {
            return Err(PlantError::HistoryLength {
                expected,
                actual: zeta0.len(),
            });
        }
        (self.theta)(zeta0, y)
    }

    /// Exact inverse controller
    /// `c([zeta1; s]) = (s - f(theta(zeta0, y), y)) / g(theta(zeta0, y), y)`
    /// where `zeta1 = [zeta0; y]` has length `2n - 1` and `s` is the desired
    /// next output.
    pub fn ideal_control(&self, zeta1: &[f64], s: f64) -> Result<f64, PlantError> {
        let expected = 2 * self.plant.n - 1;
        if zeta1.len() != expected {
            return Err(PlantError::HistoryLength {
                expected,
                actual: zeta1.len(),
            });
        }
        let (zeta0, y) = zeta1.split_at(zeta1.len() - 1);
        let y = y[0];
        let z = self.theta(zeta0, y)?;
        let gain = self.plant.input_gain(&z, y)?;
        Ok((s - self.plant.drift(&z, y)) / gain)
    }
}

impl std::fmt::Debug for PlantOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlantOracle").field("plant", &self.plant).finish()
    }
}

/// The example plant bundled with its analytic history-to-state map.
pub fn example_oracle() -> PlantOracle {
    PlantOracle::new(example_plant(), |zeta0, y| {
        Ok(vec![example_theta(zeta0, y)?])
    })
}

/// Output-feedback law queried once per step of a closed-loop rollout.
/// Implementations see the measured output only, never the internal state.
pub trait Controller {
    fn control(&mut self, y: f64) -> Result<f64, ControlFault>;
}

/// Replays a recorded input sequence; errors if the rollout outlives it.
#[derive(Debug, Clone)]
pub struct OpenLoop {
    inputs: Vec<f64>,
    cursor: usize,
}

impl OpenLoop {
    pub fn new(inputs: Vec<f64>) -> Self {
        Self { inputs, cursor: 0 }
    }
}

impl Controller for OpenLoop {
    fn control(&mut self, _y: f64) -> Result<f64, ControlFault> {
        let u = self
            .inputs
            .get(self.cursor)
            .copied()
            .ok_or_else(|| ControlFault::new("open-loop input sequence exhausted"))?;
        self.cursor += 1;
        Ok(u)
    }
}

/// Full log of a simulated run: `outputs` and `states` hold `horizon + 1`
/// samples (including the initial condition), `inputs` holds `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

/// Closed-loop rollout under an output-feedback law.
pub fn rollout(
    plant: &NormalFormPlant,
    controller: &mut dyn Controller,
    init: &PlantState,
    horizon: usize,
) -> Result<Trajectory, PlantError> {
    rollout_with(plant, init, horizon, |step, state| {
        controller
            .control(state.y)
            .map_err(|fault| PlantError::Controller { step, fault })
    })
}

/// Closed-loop rollout under the exact state-feedback inverse
/// `u = (f_r(y) - f(z,y)) / g(z,y)`, which uses the true internal state and
/// therefore matches the reference model from the very first step.
pub fn rollout_ideal(
    plant: &NormalFormPlant,
    reference: &ReferenceModel,
    init: &PlantState,
    horizon: usize,
) -> Result<Trajectory, PlantError> {
    rollout_with(plant, init, horizon, |_, state| {
        let gain = plant.input_gain(&state.z, state.y)?;
        Ok((reference.step(state.y) - plant.drift(&state.z, state.y)) / gain)
    })
}

fn rollout_with(
    plant: &NormalFormPlant,
    init: &PlantState,
    horizon: usize,
    mut law: impl FnMut(usize, &PlantState) -> Result<f64, PlantError>,
) -> Result<Trajectory, PlantError> {
    if horizon == 0 {
        return Err(PlantError::EmptyHorizon);
    }
    check_bounds(init, 0)?;
    let mut state = init.clone();
    let mut traj = Trajectory {
        inputs: Vec::with_capacity(horizon),
        outputs: Vec::with_capacity(horizon + 1),
        states: Vec::with_capacity(horizon + 1),
    };
    traj.outputs.push(state.y);
    traj.states.push(state.z.clone());
    for step in 0..horizon {
        let u = law(step, &state)?;
        if !u.is_finite() {
            return Err(PlantError::Controller {
                step,
                fault: ControlFault::new(format!("non-finite input {u}")),
            });
        }
        state = plant.step(&state, u).map_err(|e| at_step(e, step))?;
        check_bounds(&state, step + 1)?;
        traj.inputs.push(u);
        traj.outputs.push(state.y);
        traj.states.push(state.z.clone());
    }
    Ok(traj)
}

fn check_bounds(state: &PlantState, step: usize) -> Result<(), PlantError> {
    if !state.y.is_finite() || state.y.abs() > DIVERGENCE_LIMIT {
        return Err(PlantError::Diverged {
            step,
            component: "y",
            value: state.y,
            limit: DIVERGENCE_LIMIT,
        });
    }
    for v in &state.z {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(PlantError::Diverged {
                step,
                component: "z",
                value: *v,
                limit: DIVERGENCE_LIMIT,
            });
        }
    }
    Ok(())
}

fn at_step(err: PlantError, step: usize) -> PlantError {
    match err {
        PlantError::NonFinite { component, .. } => PlantError::NonFinite { component, step },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_plant_step_matches_hand_evaluation() {
        let plant = example_plant();
        let next = plant.step(&PlantState::scalar(1.1, 1.1), 0.0).unwrap();
        assert!((next.y - 2.31).abs() < 1e-12);
        assert!((next.z[0] - 0.5 * 1.1f64.sin() * 1.1).abs() < 1e-12);
    }

    #[test]
    fn origin_is_an_equilibrium() {
        let plant = example_plant();
        let next = plant.step(&PlantState::scalar(0.0, 0.0), 0.0).unwrap();
        assert_eq!(next, PlantState::scalar(0.0, 0.0));
    }

    #[test]
    fn example_plant_maps() {
        let plant = example_plant();
        assert_eq!(plant.input_gain(&[3.0], -2.0).unwrap(), 1.0);
        assert_eq!(plant.drift(&[0.0], 0.0), 0.0);
        assert_eq!(plant.internal_map(&[0.0], 0.0), vec![0.0]);
        assert_eq!(plant.drift(&[1.0], 2.0), 5.0);
    }

    #[test]
    fn step_closes_loop_with_ideal_control_value() {
        // u = c-value at (y_prev, u_prev, y) = (0.5, 0.2, 0.3), s = -0.12
        let oracle = example_oracle();
        let u = oracle.ideal_control(&[0.5, 0.2, 0.3], -0.12).unwrap();
        assert!((u - -0.174043).abs() < 1e-6);
        // applying it from the state the history implies yields y' = -0.12
        let z = oracle.theta(&[0.5, 0.2], 0.3).unwrap();
        let next = oracle
            .plant()
            .step(&PlantState::new(0.3, z), u)
            .unwrap();
        assert!((next.y - -0.12).abs() < 1e-12);
        assert!((next.y - -0.4 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn reference_model_paper_gain() {
        let r = ReferenceModel::linear(-0.4).unwrap();
        assert!((r.step(1.0) - -0.4).abs() < 1e-15);
        assert_eq!(r.step(0.0), 0.0);
        let mut y = 1.0;
        for _ in 0..10 {
            y = r.step(y);
        }
        assert!((y - (-0.4f64).powi(10)).abs() < 1e-15);
        assert!((y - 1.048576e-4).abs() < 1e-10);
    }

    #[test]
    fn reference_model_rejects_unstable_gain() {
        assert!(ReferenceModel::linear(1.0).is_err());
        assert!(ReferenceModel::linear(-1.5).is_err());
        assert!(ReferenceModel::linear(0.99).is_ok());
    }

    #[test]
    fn example_theta_analytic_values() {
        let v = example_theta(&[0.5, 0.2], 0.3).unwrap();
        assert!((v - 0.5 * 0.5f64.sin() * (-0.15)).abs() < 1e-15);
        assert!((v - -0.0359569).abs() < 1e-6);
        // sin(0) = 0 regardless of the remaining arguments
        assert_eq!(example_theta(&[0.0, 0.7], -0.9).unwrap(), 0.0);
    }

    #[test]
    fn theta_tracks_simulated_state() {
        let plant = example_plant();
        let mut state = PlantState::scalar(0.9, -0.7);
        let inputs = [0.3, -0.5, 0.8, 0.1];
        let mut prev = (state.y, inputs[0]);
        for (t, &u) in inputs.iter().enumerate() {
            let next = plant.step(&state, u).unwrap();
            if t >= 1 {
                let got = example_theta(&[prev.0, prev.1], state.y).unwrap();
                assert!(
                    (got - state.z[0]).abs() <= 1e-12,
                    "t={t}: {got} vs {}",
                    state.z[0]
                );
            }
            prev = (state.y, u);
            state = next;
        }
    }

    #[test]
    fn ideal_control_is_zero_at_origin() {
        let oracle = example_oracle();
        assert_eq!(oracle.ideal_control(&[0.0, 0.0, 0.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ideal_control_recovers_applied_inputs_along_trajectories() {
        // u(t) = c([zeta1(t); y(t+1)]) along any simulated transition
        let oracle = example_oracle();
        let plant = oracle.plant();
        let mut state = PlantState::scalar(-0.4, 1.0);
        let inputs = [0.9, -1.1, 0.25, 0.0, 0.6];
        let mut prev: Option<(f64, f64)> = None;
        for &u in &inputs {
            let next = plant.step(&state, u).unwrap();
            if let Some((y_prev, u_prev)) = prev {
                let zeta1 = [y_prev, u_prev, state.y];
                let recovered = oracle.ideal_control(&zeta1, next.y).unwrap();
                assert!((recovered - u).abs() < 1e-10, "{recovered} vs {u}");
            }
            prev = Some((state.y, u));
            state = next;
        }
    }

    #[test]
    fn relative_degree_violation_is_reported() {
        let degenerate = NormalFormPlant::new(2, |_, _| 0.0, |_, y| y, |z, _| z.to_vec());
        let err = degenerate
            .step(&PlantState::scalar(0.0, 0.0), 1.0)
            .unwrap_err();
        assert!(matches!(err, PlantError::RelativeDegreeViolation { .. }));
    }

    #[test]
    fn rollout_ideal_matches_reference_from_the_start() {
        let plant = example_plant();
        let reference = ReferenceModel::linear(-0.4).unwrap();
        let traj = rollout_ideal(&plant, &reference, &PlantState::scalar(1.1, 1.1), 30).unwrap();
        // exact matching: y(t+1) = -0.4 y(t) for every step
        for t in 0..traj.horizon() {
            assert!(
                (traj.outputs[t + 1] + 0.4 * traj.outputs[t]).abs() <= 1e-10,
                "t={t}"
            );
        }
        // so |y(t)| = 1.1 * 0.4^t <= 1.1 * 0.4^(t-1)
        for t in 1..=traj.horizon() {
            assert!(traj.outputs[t].abs() <= 1.1 * 0.4f64.powi(t as i32 - 1) + 1e-9);
        }
    }

    #[test]
    fn zero_controller_keeps_origin_fixed() {
        let plant = example_plant();
        let mut zero = OpenLoop::new(vec![0.0; 20]);
        let traj = rollout(&plant, &mut zero, &PlantState::scalar(0.0, 0.0), 20).unwrap();
        assert!(traj.outputs.iter().all(|y| *y == 0.0));
        assert!(traj.states.iter().all(|z| z[0] == 0.0));
    }

    #[test]
    fn open_loop_replay_is_exact() {
        let plant = example_plant();
        let inputs = vec![0.4, -0.2, 0.9, 0.05];
        let init = PlantState::scalar(0.3, -0.8);
        let mut a = OpenLoop::new(inputs.clone());
        let t1 = rollout(&plant, &mut a, &init, 4).unwrap();
        let mut b = OpenLoop::new(inputs.clone());
        let t2 = rollout(&plant, &mut b, &init, 4).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.inputs, inputs);
    }

    #[test]
    fn divergence_carries_step_index() {
        let plant = example_plant();
        let mut big = OpenLoop::new(vec![1.2; 12]);
        let err = rollout(&plant, &mut big, &PlantState::scalar(1.2, 1.2), 12).unwrap_err();
        match err {
            PlantError::Diverged { step, .. } => assert!(step > 0 && step < 12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn internal_dynamics_contract_by_half_each_step() {
        let plant = example_plant();
        let mut inputs = OpenLoop::new(vec![0.7, -0.3, 0.2, 0.5]);
        let traj = rollout(&plant, &mut inputs, &PlantState::scalar(1.0, 1.2), 4).unwrap();
        for t in 0..4 {
            assert!(traj.states[t + 1][0].abs() <= 0.5 * traj.states[t][0].abs() + 1e-15);
        }
        for t in 0..=4 {
            assert!(traj.states[t][0].abs() <= 0.5f64.powi(t as i32) * 1.2 + 1e-15);
        }
    }

    #[test]
    fn rollout_rejects_zero_horizon() {
        let plant = example_plant();
        let mut zero = OpenLoop::new(vec![]);
        assert!(matches!(
            rollout(&plant, &mut zero, &PlantState::scalar(0.0, 0.0), 0),
            Err(PlantError::EmptyHorizon)
        ));
    }
}
