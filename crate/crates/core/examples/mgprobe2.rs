use std::time::Instant;
use willmore2d::grid::{BoundaryMode, Grid2};
use willmore2d::mg::{BlockMg, BlockOperator, StencilGeom};
use willmore2d::potentials::PotentialPair;
use willmore2d::solver::{gmres, LinearOperator};

fn main() {
    let pair = PotentialPair::standard();
    let eps = 0.125f64;
    let a = eps / 1e-5;
    for (n, which) in [(256usize, 1), (256, 2), (128, 1), (128, 2)] {
        let grid = Grid2::unit_square(n, BoundaryMode::Neumann);
        // realistic frozen coefficients: W''(q(d/eps))/eps^2 for a circle
        let shift: Vec<f64> = (0..grid.len())
            .map(|k| {
                let (x, y) = (grid.x(k % n), grid.y(k / n));
                let d = 0.25 - ((x - 0.5f64).powi(2) + (y - 0.5).powi(2)).sqrt();
                if which == 1 {
                    pair.w1.second(pair.profile1(d / eps)) / (eps * eps)
                } else {
                    pair.w2.second(pair.profile2(d / eps)) / (eps * eps)
                }
            })
            .collect();
        let op = BlockOperator { geom: StencilGeom::of(&grid), shift: &shift, a, eps };
        let want: Vec<f64> = (0..2 * grid.len())
            .map(|k| (k as f64 * 0.0137).sin() + 0.3 * (k as f64 * 0.0071).cos())
            .collect();
        let mut rhs = vec![0.0; 2 * grid.len()];
        op.apply(&want, &mut rhs);
        let t0 = Instant::now();
        let mut pc = BlockMg::new(&grid, &shift, a, eps);
        let setup = t0.elapsed();
        let t1 = Instant::now();
        match gmres(&op, &rhs, None, 1e-9, 400, 100, Some(&mut pc)) {
            Ok((x, stats)) => {
                let err = x.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0f64, f64::max);
                println!(
                    "n={n} W{which}: {} iters in {:.0} ms (setup {:.0} ms), err {err:.2e}",
                    stats.iterations,
                    t1.elapsed().as_secs_f64() * 1e3,
                    setup.as_secs_f64() * 1e3
                );
            }
            Err(e) => println!("n={n} W{which}: FAILED {e}"),
        }
    }
}
