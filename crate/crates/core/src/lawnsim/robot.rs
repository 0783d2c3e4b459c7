use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::{LawnGrid, SimError};

/// Half-width of the uniform heading perturbation applied after a wall bounce.
pub const BOUNCE_JITTER: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    /// Position in metres, inside `[0, width] x [0, height]`.
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub step_length: f64,
}

impl RobotState {
    pub fn new(
        x: f64,
        y: f64,
        heading: f64,
        step_length: f64,
        grid: &LawnGrid,
    ) -> Result<Self, SimError> {
        if !(step_length.is_finite() && step_length > 0.0) {
            return Err(SimError::ConfigInvalid(format!(
                "step_length must be positive, got {step_length}"
            )));
        }
        let (w, h) = grid.extent();
        if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) || !heading.is_finite() {
            return Err(SimError::ConfigInvalid(format!(
                "robot pose ({x}, {y}, {heading}) outside the {w} x {h} m lawn"
            )));
        }
        Ok(Self {
            x,
            y,
            heading,
            step_length,
        })
    }

    /// The point one cell ahead along the heading, where the camera looks.
    pub fn look_ahead(&self, distance: f64) -> (f64, f64) {
        (
            self.x + distance * self.heading.cos(),
            self.y + distance * self.heading.sin(),
        )
    }

    /// Cell observed by the camera.
    pub fn sensed_cell(&self, grid: &LawnGrid) -> usize {
        let (x, y) = self.look_ahead(grid.cell_size());
        grid.cell_at(x, y)
    }
}

/// Random-walk step: advance `step_length` along the heading; a step that
/// would leave the lawn instead mirrors the heading off the wall(s) it hits,
/// perturbs it uniformly within [`BOUNCE_JITTER`], and moves along the new
/// heading. The final position is clamped onto the lawn.
pub fn step_robot<R: Rng + ?Sized>(state: &RobotState, grid: &LawnGrid, rng: &mut R) -> RobotState {
    let (w, h) = grid.extent();
    let (nx, ny) = state.look_ahead(state.step_length);
    let hits_x = !(0.0..=w).contains(&nx);
    let hits_y = !(0.0..=h).contains(&ny);
    let mut next = *state;
    if !hits_x && !hits_y {
        next.x = nx;
        next.y = ny;
        return next;
    }
    let (mut dx, mut dy) = (state.heading.cos(), state.heading.sin());
    if hits_x {
        dx = -dx;
    }
    if hits_y {
        dy = -dy;
    }
    let jitter = rng.random_range(-BOUNCE_JITTER..=BOUNCE_JITTER);
    next.heading = (dy.atan2(dx) + jitter).rem_euclid(TAU);
    let (mx, my) = next.look_ahead(state.step_length);
    next.x = mx.clamp(0.0, w);
    next.y = my.clamp(0.0, h);
    next
}
