use willmore2d::flow::{ExtraForces, FlowParams, FlowState, Stepper};
use willmore2d::grid::{BoundaryMode, Field, Grid2};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let m: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let steps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut params = FlowParams::default();
    params.m_penalty = m;
    let pair = params.make_pair();
    let grid = Grid2::unit_square(n, BoundaryMode::Neumann);
    let eps = params.epsilon;
    let d = |x: f64, y: f64| 0.25 - ((x - 0.5f64).powi(2) + (y - 0.5).powi(2)).sqrt();
    let u = Field::from_fn(grid, |x, y| pair.profile1(d(x, y) / eps));
    let v = Field::from_fn(grid, |x, y| pair.profile2(d(x, y) / eps));
    let mut state = FlowState::coupled(u, v, &pair, &params).unwrap();
    let mut stepper = Stepper::new(grid, pair.clone(), params, ExtraForces::none()).unwrap();
    for k in 0..steps {
        match stepper.step_modified(&mut state) {
            Ok(sr) => {
                if k % 10 == 0 || k < 4 {
                    let s_max = state
                        .u
                        .values()
                        .iter()
                        .zip(state.v.as_ref().unwrap().values())
                        .map(|(&a, &b)| (pair.phi(a) - b).abs())
                        .fold(0.0f64, f64::max);
                    println!(
                        "k={k:4} rate {:9.1} iters {:3} s_max {:.5} u [{:.3},{:.3}] v [{:.3},{:.3}]",
                        sr.max_rate, sr.solver_iterations, s_max,
                        state.u.min(), state.u.max(),
                        state.v.as_ref().unwrap().min(), state.v.as_ref().unwrap().max()
                    );
                }
            }
            Err(e) => { println!("step {k} FAILED: {e}"); break; }
        }
    }
}
