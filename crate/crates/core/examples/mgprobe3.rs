use std::time::Instant;
use willmore2d::grid::{BoundaryMode, Grid2};
use willmore2d::mg::{BlockMg, BlockOperator, StencilGeom};
use willmore2d::potentials::PotentialPair;
use willmore2d::solver::{gmres, LinearOperator};

fn main() {
    let pair = PotentialPair::standard();
    let eps = 0.125f64;
    let a = eps / 1e-5;
    for (n, which) in [(256usize, 1), (256, 2)] {
        let grid = Grid2::unit_square(n, BoundaryMode::Neumann);
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
        // "previous step" solution and a nearby "current" one
        let want: Vec<f64> = (0..2 * grid.len())
            .map(|k| {
                let (i, j) = (k % n, (k / n) % n);
                let d = 0.25
                    - ((grid.x(i) - 0.5f64).powi(2) + (grid.y(j) - 0.5).powi(2)).sqrt();
                if k < grid.len() { pair.profile1(d / eps) } else { 0.02 * (d / eps).tanh() }
            })
            .collect();
        let guess: Vec<f64> = want
            .iter()
            .enumerate()
            .map(|(k, &v)| v + 2e-4 * ((k as f64) * 0.01).sin())
            .collect();
        let mut rhs = vec![0.0; 2 * grid.len()];
        op.apply(&want, &mut rhs);
        let mut pc = BlockMg::new(&grid, &shift, a, eps);
        let t1 = Instant::now();
        match gmres(&op, &rhs, Some(&guess), 1e-9, 400, 100, Some(&mut pc)) {
            Ok((_, stats)) => println!(
                "warm n={n} W{which}: {} iters in {:.0} ms, final rel res {:.1e}",
                stats.iterations,
                t1.elapsed().as_secs_f64() * 1e3,
                stats.residual
            ),
            Err(e) => println!("warm n={n} W{which}: FAILED {e}"),
        }
    }
}
