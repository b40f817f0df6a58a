use std::time::Instant;
use willmore2d::flow::{ExtraForces, FlowParams, FlowState, Stepper};
use willmore2d::grid::{BoundaryMode, Field, Grid2};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let steps: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let params = FlowParams::default();
    let pair = params.make_pair();
    let grid = Grid2::unit_square(n, BoundaryMode::Neumann);
    let eps = params.epsilon;
    let d = |x: f64, y: f64| 0.25 - ((x - 0.5f64).powi(2) + (y - 0.5).powi(2)).sqrt();
    let u = Field::from_fn(grid, |x, y| pair.profile1(d(x, y) / eps));
    let v = Field::from_fn(grid, |x, y| pair.profile2(d(x, y) / eps));
    let mut state = FlowState::coupled(u, v, &pair, &params).unwrap();
    let mut stepper = Stepper::new(grid, pair, params, ExtraForces::none()).unwrap();
    // warm up both histories
    for _ in 0..3 {
        stepper.step_modified(&mut state).unwrap();
    }
    let t0 = Instant::now();
    let mut iters = 0usize;
    for _ in 0..steps {
        let sr = stepper.step_modified(&mut state).unwrap();
        iters += sr.solver_iterations;
    }
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "n={n}: {:.0} ms/step, {:.1} iters/step (both species)",
        dt / steps as f64 * 1e3,
        iters as f64 / steps as f64
    );
}
