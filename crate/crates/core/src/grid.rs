//! Uniform Cartesian grids, discrete differential operators and quadrature.
//!
//! Nodes are stored row-major with x fastest: `idx = j*nx + i`. In Neumann
//! mode the nodes include both boundaries (`hx = lx/(nx-1)`) and the 5-point
//! Laplacian uses mirror ghost nodes, which realizes the no-flux boundary
//! conditions and makes the operator self-adjoint with respect to the
//! trapezoidal inner product. Periodic mode wraps indices (`hx = lx/nx`).

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryMode {
    Neumann,
    Periodic,
}

impl BoundaryMode {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::Neumann => "neumann",
            BoundaryMode::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "neumann" => Some(BoundaryMode::Neumann),
            "periodic" => Some(BoundaryMode::Periodic),
            _ => None,
        }
    }
}

/// Uniform node grid over the rectangle [x0, x0+lx] × [y0, y0+ly].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    lx: f64,
    ly: f64,
    bc: BoundaryMode,
}

impl Grid2 {
    pub fn new(
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        lx: f64,
        ly: f64,
        bc: BoundaryMode,
    ) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Grid(format!("node counts must be >= 3, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::Grid(format!("extents must be positive, got {lx}x{ly}")));
        }
        Ok(Grid2 {
            nx,
            ny,
            x0,
            y0,
            lx,
            ly,
            bc,
        })
    }

    /// n×n grid on the unit square.
    pub fn unit_square(n: usize, bc: BoundaryMode) -> Self {
        Self::new(n, n, 0.0, 0.0, 1.0, 1.0, bc).expect("unit square grid")
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn x0(&self) -> f64 {
        self.x0
    }
    #[inline]
    pub fn y0(&self) -> f64 {
        self.y0
    }
    #[inline]
    pub fn lx(&self) -> f64 {
        self.lx
    }
    #[inline]
    pub fn ly(&self) -> f64 {
        self.ly
    }
    #[inline]
    pub fn bc(&self) -> BoundaryMode {
        self.bc
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        match self.bc {
            BoundaryMode::Neumann => self.lx / (self.nx - 1) as f64,
            BoundaryMode::Periodic => self.lx / self.nx as f64,
        }
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        match self.bc {
            BoundaryMode::Neumann => self.ly / (self.ny - 1) as f64,
            BoundaryMode::Periodic => self.ly / self.ny as f64,
        }
    }

    /// Node coordinate, bit-exact from the index.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure of the quadrature domain: lx·ly in both modes.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Trapezoidal weight (Neumann) or 1 (periodic) for node (i, j),
    /// excluding the hx·hy factor.
    #[inline]
    pub fn quad_weight(&self, i: usize, j: usize) -> f64 {
        match self.bc {
            BoundaryMode::Periodic => 1.0,
            BoundaryMode::Neumann => {
                let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
                wx * wy
            }
        }
    }
}

/// Scalar field sampled on the nodes of a [`Grid2`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid2,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid2) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid2, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), y));
            }
        }
        Field { grid, values }
    }

    /// Wraps raw values; length must match the grid.
    pub fn from_values(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "value count {} does not match grid {}x{}",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(Field { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> Grid2 {
        self.grid
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// All values finite.
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Grid("field contains non-finite values".into()))
        }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::Grid("fields live on different grids".into()))
        }
    }
}

#[inline]
fn wrap_prev(i: usize, n: usize, bc: BoundaryMode) -> usize {
    if i == 0 {
        match bc {
            BoundaryMode::Neumann => 1,
            BoundaryMode::Periodic => n - 1,
        }
    } else {
        i - 1
    }
}

#[inline]
fn wrap_next(i: usize, n: usize, bc: BoundaryMode) -> usize {
    if i == n - 1 {
        match bc {
            BoundaryMode::Neumann => n - 2,
            BoundaryMode::Periodic => 0,
        }
    } else {
        i + 1
    }
}

/// 5-point Laplacian into a preallocated buffer (`dst.len() == src.len()`).
pub(crate) fn laplacian_slices(grid: &Grid2, src: &[f64], dst: &mut [f64]) {
    let (nx, ny, bc) = (grid.nx(), grid.ny(), grid.bc());
    let cx = 1.0 / (grid.hx() * grid.hx());
    let cy = 1.0 / (grid.hy() * grid.hy());
    for j in 0..ny {
        let jm = wrap_prev(j, ny, bc);
        let jp = wrap_next(j, ny, bc);
        let row = &src[j * nx..(j + 1) * nx];
        let rm = &src[jm * nx..jm * nx + nx];
        let rp = &src[jp * nx..jp * nx + nx];
        let out = &mut dst[j * nx..(j + 1) * nx];
        // x-boundary columns
        let il = wrap_prev(0, nx, bc);
        let ir = wrap_next(nx - 1, nx, bc);
        out[0] = (row[il] - 2.0 * row[0] + row[1]) * cx + (rm[0] - 2.0 * row[0] + rp[0]) * cy;
        for i in 1..nx - 1 {
            out[i] = (row[i - 1] - 2.0 * row[i] + row[i + 1]) * cx
                + (rm[i] - 2.0 * row[i] + rp[i]) * cy;
        }
        out[nx - 1] = (row[nx - 2] - 2.0 * row[nx - 1] + row[ir]) * cx
            + (rm[nx - 1] - 2.0 * row[nx - 1] + rp[nx - 1]) * cy;
    }
}

/// Discrete Laplacian with the grid's boundary treatment.
pub fn laplacian(f: &Field) -> Field {
    let mut out = Field::zeros(f.grid());
    laplacian_slices(&f.grid(), f.values(), out.values_mut());
    out
}

/// |∇f|² by central differences; one-sided second-order stencils at Neumann
/// boundaries.
pub fn grad_norm_sq(f: &Field) -> Field {
    let g = f.grid();
    let (nx, ny, bc) = (g.nx(), g.ny(), g.bc());
    let sx = 1.0 / (2.0 * g.hx());
    let sy = 1.0 / (2.0 * g.hy());
    let src = f.values();
    let mut out = Field::zeros(g);
    let dst = out.values_mut();
    for j in 0..ny {
        let row = &src[j * nx..(j + 1) * nx];
        let (jm, jp, ym_side, yp_side) = match bc {
            BoundaryMode::Periodic => (
                wrap_prev(j, ny, bc),
                wrap_next(j, ny, bc),
                false,
                false,
            ),
            BoundaryMode::Neumann => (j.saturating_sub(1), (j + 1).min(ny - 1), j == 0, j == ny - 1),
        };
        let rm = &src[jm * nx..jm * nx + nx];
        let rp = &src[jp * nx..jp * nx + nx];
        let r2m = if ym_side { &src[2 * nx..3 * nx] } else { rm };
        let r2p = if yp_side {
            &src[(ny - 3) * nx..(ny - 2) * nx]
        } else {
            rp
        };
        for i in 0..nx {
            let gx = if bc == BoundaryMode::Periodic {
                (row[wrap_next(i, nx, bc)] - row[wrap_prev(i, nx, bc)]) * sx
            } else if i == 0 {
                (-3.0 * row[0] + 4.0 * row[1] - row[2]) * sx
            } else if i == nx - 1 {
                (3.0 * row[nx - 1] - 4.0 * row[nx - 2] + row[nx - 3]) * sx
            } else {
                (row[i + 1] - row[i - 1]) * sx
            };
            let gy = if ym_side {
                (-3.0 * row[i] + 4.0 * rp[i] - r2m[i]) * sy
            } else if yp_side {
                (3.0 * row[i] - 4.0 * rm[i] + r2p[i]) * sy
            } else {
                (rp[i] - rm[i]) * sy
            };
            dst[j * nx + i] = gx * gx + gy * gy;
        }
    }
    out
}

/// ∇·(g ∇f) in flux form with arithmetic face averages of `g`; mirror ghosts
/// in Neumann mode give zero boundary flux.
pub fn div_g_grad(g: &Field, f: &Field) -> Field {
    f.same_grid(g).expect("div_g_grad: grid mismatch");
    let gr = f.grid();
    let (nx, ny, bc) = (gr.nx(), gr.ny(), gr.bc());
    let cx = 0.5 / (gr.hx() * gr.hx());
    let cy = 0.5 / (gr.hy() * gr.hy());
    let fv = f.values();
    let gv = g.values();
    let mut out = Field::zeros(gr);
    let dst = out.values_mut();
    for j in 0..ny {
        let jm = wrap_prev(j, ny, bc);
        let jp = wrap_next(j, ny, bc);
        for i in 0..nx {
            let im = wrap_prev(i, nx, bc);
            let ip = wrap_next(i, nx, bc);
            let c = j * nx + i;
            let fx = (gv[j * nx + ip] + gv[c]) * (fv[j * nx + ip] - fv[c])
                - (gv[c] + gv[j * nx + im]) * (fv[c] - fv[j * nx + im]);
            let fy = (gv[jp * nx + i] + gv[c]) * (fv[jp * nx + i] - fv[c])
                - (gv[c] + gv[jm * nx + i]) * (fv[c] - fv[jm * nx + i]);
            dst[c] = fx * cx + fy * cy;
        }
    }
    out
}

/// Domain integral: trapezoidal rule in Neumann mode, rectangle rule in
/// periodic mode. Row sums are accumulated left to right and combined in
/// index order, so the result is independent of any threading.
pub fn integrate(f: &Field) -> f64 {
    let g = f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let src = f.values();
    let cell = g.hx() * g.hy();
    match g.bc() {
        BoundaryMode::Periodic => {
            let mut total = 0.0;
            for j in 0..ny {
                let row = &src[j * nx..(j + 1) * nx];
                let mut s = 0.0;
                for &v in row {
                    s += v;
                }
                total += s;
            }
            total * cell
        }
        BoundaryMode::Neumann => {
            let mut total = 0.0;
            for j in 0..ny {
                let row = &src[j * nx..(j + 1) * nx];
                let mut s = 0.5 * row[0];
                for &v in &row[1..nx - 1] {
                    s += v;
                }
                s += 0.5 * row[nx - 1];
                let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
                total += wy * s;
            }
            total * cell
        }
    }
}

/// Quadrature-weighted inner product ⟨f, g⟩ (the trapezoidal inner product
/// in Neumann mode).
pub fn inner_product(f: &Field, g: &Field) -> f64 {
    f.same_grid(g).expect("inner_product: grid mismatch");
    let gr = f.grid();
    let (nx, ny) = (gr.nx(), gr.ny());
    let cell = gr.hx() * gr.hy();
    let fv = f.values();
    let gv = g.values();
    let mut total = 0.0;
    for j in 0..ny {
        let mut s = 0.0;
        for i in 0..nx {
            let k = j * nx + i;
            s += gr.quad_weight(i, j) * fv[k] * gv[k];
        }
        total += s;
    }
    total * cell
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_fill(field: &mut Field, seed: u64) {
        // small deterministic LCG; test-only
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for v in field.values_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        for bc in [BoundaryMode::Neumann, BoundaryMode::Periodic] {
            let g = Grid2::unit_square(17, bc);
            let f = Field::constant(g, 3.25);
            let l = laplacian(&f);
            assert!(l.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = Grid2::unit_square(33, BoundaryMode::Neumann);
        let f = Field::from_fn(g, |x, y| x * x + y * y);
        let l = laplacian(&f);
        for j in 1..32 {
            for i in 1..32 {
                assert!((l.at(i, j) - 4.0).abs() < 1e-9, "at ({i},{j}): {}", l.at(i, j));
            }
        }
    }

    #[test]
    fn laplacian_periodic_sine() {
        let g = Grid2::unit_square(128, BoundaryMode::Periodic);
        let f = Field::from_fn(g, |x, _| (2.0 * std::f64::consts::PI * x).sin());
        let l = laplacian(&f);
        let k2 = (2.0 * std::f64::consts::PI).powi(2);
        let h = g.hx();
        let tol = 10.0 * h * h * k2; // second-order accurate
        for k in 0..g.len() {
            assert!(
                (l.values()[k] + k2 * f.values()[k]).abs() < tol,
                "node {k}: {} vs {}",
                l.values()[k],
                -k2 * f.values()[k]
            );
        }
    }

    #[test]
    fn laplacian_convergence_order() {
        // smooth Neumann-compatible test function; order from two refinements
        let f = |x: f64, y: f64| (std::f64::consts::PI * x).cos() * (2.0 * std::f64::consts::PI * y).cos();
        let exact = |x: f64, y: f64| {
            -(std::f64::consts::PI.powi(2) + (2.0 * std::f64::consts::PI).powi(2))
                * (std::f64::consts::PI * x).cos()
                * (2.0 * std::f64::consts::PI * y).cos()
        };
        let mut errs = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid2::unit_square(n, BoundaryMode::Neumann);
            let fd = laplacian(&Field::from_fn(g, f));
            let mut e: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    e = e.max((fd.at(i, j) - exact(g.x(i), g.y(j))).abs());
                }
            }
            errs.push(e);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 > 1.9 && order2 > 1.9, "orders {order1:.2}, {order2:.2}");
    }

    #[test]
    fn neumann_laplacian_self_adjoint() {
        let g = Grid2::unit_square(31, BoundaryMode::Neumann);
        let mut f = Field::zeros(g);
        let mut h = Field::zeros(g);
        rng_fill(&mut f, 7);
        rng_fill(&mut h, 13);
        let lhs = inner_product(&laplacian(&f), &h);
        let rhs = inner_product(&f, &laplacian(&h));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        for bc in [BoundaryMode::Neumann, BoundaryMode::Periodic] {
            let g = Grid2::unit_square(41, bc);
            let mut f = Field::zeros(g);
            rng_fill(&mut f, 42);
            let total = integrate(&laplacian(&f));
            assert!(total.abs() < 1e-10, "{bc:?}: {total}");
        }
    }

    #[test]
    fn div_g_grad_self_adjoint_and_conservative() {
        let g = Grid2::unit_square(29, BoundaryMode::Neumann);
        let mut f = Field::zeros(g);
        let mut h = Field::zeros(g);
        rng_fill(&mut f, 3);
        rng_fill(&mut h, 4);
        let w = Field::from_fn(g, |x, y| 1.0 + 0.5 * (x + y));
        let lhs = inner_product(&div_g_grad(&w, &f), &h);
        let rhs = inner_product(&f, &div_g_grad(&w, &h));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        assert!(integrate(&div_g_grad(&w, &f)).abs() < 1e-10);
    }

    #[test]
    fn gradient_examples() {
        let g = Grid2::unit_square(21, BoundaryMode::Neumann);
        assert!(grad_norm_sq(&Field::constant(g, 2.0))
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let f = Field::from_fn(g, |x, _| 3.0 * x);
        let gn = grad_norm_sq(&f);
        for k in 0..g.len() {
            assert!((gn.values()[k] - 9.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_profile_chain_rule() {
        // f = q1(d/eps) for a planar d: |∇f|² = (q1'(d/eps)/eps)² + O(h²)
        use crate::potentials::DoubleWell;
        let w1 = DoubleWell::standard1();
        let eps = 0.125;
        let g = Grid2::unit_square(257, BoundaryMode::Neumann);
        let f = Field::from_fn(g, |x, _| w1.profile((x - 0.5) / eps));
        let gn = grad_norm_sq(&f);
        let h = g.hx();
        for j in [0, 64, 128, 200] {
            for i in 1..256 {
                let expect = (w1.profile_prime((g.x(i) - 0.5) / eps) / eps).powi(2);
                // 2(q'/ε)(h²/6)(q'''/ε³) bounds the central-difference error
                let tol = 7e4 * h * h + 1e-12;
                assert!(
                    (gn.at(i, j) - expect).abs() < tol,
                    "at i={i}: {} vs {expect}",
                    gn.at(i, j)
                );
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let g = Grid2::unit_square(33, BoundaryMode::Neumann);
        assert!((integrate(&Field::constant(g, 1.0)) - 1.0).abs() < 1e-14);
        let g2 = Grid2::new(17, 33, -1.0, 2.0, 2.0, 3.0, BoundaryMode::Neumann).unwrap();
        assert!((integrate(&Field::constant(g2, 2.5)) - 2.5 * 6.0).abs() < 1e-12);
        let f = Field::from_fn(g, |x, _| x);
        assert!((integrate(&f) - 0.5).abs() < 1e-14);
        // periodic rectangle rule is exact for constants
        let gp = Grid2::unit_square(32, BoundaryMode::Periodic);
        assert!((integrate(&Field::constant(gp, 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn node_coordinates_reproducible() {
        let g = Grid2::new(256, 128, -1.1, -2.2, 2.2, 4.4, BoundaryMode::Periodic).unwrap();
        for i in [0, 1, 100, 255] {
            assert_eq!(g.x(i), -1.1 + i as f64 * g.hx());
        }
        assert_eq!(g.hx(), 2.2 / 256.0);
        let gn = Grid2::new(256, 128, 0.0, 0.0, 1.0, 1.0, BoundaryMode::Neumann).unwrap();
        assert_eq!(gn.hx(), 1.0 / 255.0);
    }
}
