use willmore2d::grid::{BoundaryMode, Grid2};
use willmore2d::mg::{BlockMg, BlockOperator, StencilGeom};
use willmore2d::solver::{gmres, LinearOperator};

fn run(n: usize, bc: BoundaryMode, shift_fn: &dyn Fn(f64, f64) -> f64, label: &str) {
    let grid = Grid2::unit_square(n, bc);
    let a = 0.125 / 1e-5;
    let eps = 0.125;
    let shift: Vec<f64> = (0..grid.len())
        .map(|k| shift_fn(grid.x(k % n), grid.y(k / n)))
        .collect();
    let op = BlockOperator { geom: StencilGeom::of(&grid), shift: &shift, a, eps };
    let want: Vec<f64> = (0..2 * grid.len())
        .map(|k| (k as f64 * 0.0137).sin() + 0.3 * (k as f64 * 0.0071).cos())
        .collect();
    let mut rhs = vec![0.0; 2 * grid.len()];
    op.apply(&want, &mut rhs);
    let mut pc = BlockMg::new(&grid, &shift, a, eps);
    match gmres(&op, &rhs, None, 1e-10, 400, 30, Some(&mut pc)) {
        Ok((x, stats)) => {
            let err = x.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0f64, f64::max);
            println!("{label} n={n}: {} iters, err {err:.2e}", stats.iterations);
        }
        Err(e) => println!("{label} n={n}: FAILED {e}"),
    }
}

fn main() {
    let ring = |x: f64, y: f64| {
        let r = ((x - 0.5f64).powi(2) + (y - 0.5).powi(2)).sqrt();
        if (r - 0.25).abs() < 0.05 { -1152.0 } else { 2304.0 }
    };
    let ring2 = |x: f64, y: f64| {
        let r = ((x - 0.5f64).powi(2) + (y - 0.5).powi(2)).sqrt();
        if (r - 0.25).abs() < 0.05 { -4608.0 } else { 9216.0 }
    };
    run(64, BoundaryMode::Neumann, &|_, _| 0.0, "zero   ");
    run(64, BoundaryMode::Neumann, &|_, _| -1152.0, "neg const");
    run(64, BoundaryMode::Neumann, &ring, "ring w1");
    run(64, BoundaryMode::Neumann, &ring2, "ring w2");
    run(65, BoundaryMode::Neumann, &ring, "ring w1");
    run(64, BoundaryMode::Periodic, &ring, "ring w1 per");
    run(128, BoundaryMode::Neumann, &ring, "ring w1");
    run(256, BoundaryMode::Neumann, &ring2, "ring w2");
}
