//! Geometric multigrid preconditioner for the semi-implicit steps.
//!
//! One step solves, per species, the coupled block system
//!
//!   a·u + B·μ = r₁,      ε·B·u − μ = r₂,          B = -Δ + D(x),
//!
//! with a = ε/τ and D = W''(uⁿ)/ε². Eliminating μ leaves the Schur operator
//! A = a·I + εB², which is symmetric positive definite no matter the sign of
//! D (B is only squared). The preconditioner applies one V-cycle to A with a
//! Chebyshev–Jacobi smoother — on a definite operator a Chebyshev polynomial
//! over [λmax/α, λmax] damps the high end without amplifying anything, which
//! keeps the cycle robust even where W'' < 0 makes B locally indefinite —
//! and reconstructs the μ correction from δμ = ε·B·δu - r₂. Coarse levels
//! rediscretize B with doubled spacing and full-weighting restriction of D.

use crate::grid::{BoundaryMode, Grid2};
use crate::solver::{LinearOperator, Preconditioner};

/// Stencil geometry of one level.
#[derive(Clone, Copy, Debug)]
pub struct StencilGeom {
    pub nx: usize,
    pub ny: usize,
    pub inv_hx2: f64,
    pub inv_hy2: f64,
    pub bc: BoundaryMode,
}

impl StencilGeom {
    pub fn of(grid: &Grid2) -> Self {
        StencilGeom {
            nx: grid.nx(),
            ny: grid.ny(),
            inv_hx2: 1.0 / (grid.hx() * grid.hx()),
            inv_hy2: 1.0 / (grid.hy() * grid.hy()),
            bc: grid.bc(),
        }
    }

    #[inline]
    fn prev(&self, i: usize, n: usize) -> usize {
        if i == 0 {
            match self.bc {
                BoundaryMode::Neumann => 1,
                BoundaryMode::Periodic => n - 1,
            }
        } else {
            i - 1
        }
    }

    #[inline]
    fn next(&self, i: usize, n: usize) -> usize {
        if i == n - 1 {
            match self.bc {
                BoundaryMode::Neumann => n - 2,
                BoundaryMode::Periodic => 0,
            }
        } else {
            i + 1
        }
    }
}

/// y = A x = (a + q)·x + ε·B(Bx) with explicit scratch `t`.
fn apply_a_slices(
    geom: &StencilGeom,
    shift: &[f64],
    qdiag: &[f64],
    a: f64,
    eps: f64,
    x: &[f64],
    t: &mut [f64],
    y: &mut [f64],
) {
    apply_b(geom, shift, x, t);
    apply_b(geom, shift, t, y);
    for ((yi, &xi), &qi) in y.iter_mut().zip(x).zip(qdiag) {
        *yi = (a + qi) * xi + eps * *yi;
    }
}

/// y = B x = -Δx + D·x with the level stencil.
pub(crate) fn apply_b(geom: &StencilGeom, shift: &[f64], x: &[f64], y: &mut [f64]) {
    let (nx, ny) = (geom.nx, geom.ny);
    let (cx, cy) = (geom.inv_hx2, geom.inv_hy2);
    let lap_diag = 2.0 * (cx + cy);
    for j in 0..ny {
        let jm = geom.prev(j, ny);
        let jp = geom.next(j, ny);
        let row = &x[j * nx..j * nx + nx];
        let rm = &x[jm * nx..jm * nx + nx];
        let rp = &x[jp * nx..jp * nx + nx];
        let sh = &shift[j * nx..j * nx + nx];
        let out = &mut y[j * nx..j * nx + nx];
        let il = geom.prev(0, nx);
        let ir = geom.next(nx - 1, nx);
        out[0] = (lap_diag + sh[0]) * row[0]
            - ((row[il] + row[1]) * cx + (rm[0] + rp[0]) * cy);
        for i in 1..nx - 1 {
            out[i] = (lap_diag + sh[i]) * row[i]
                - ((row[i - 1] + row[i + 1]) * cx + (rm[i] + rp[i]) * cy);
        }
        out[nx - 1] = (lap_diag + sh[nx - 1]) * row[nx - 1]
            - ((row[nx - 2] + row[ir]) * cx + (rm[nx - 1] + rp[nx - 1]) * cy);
    }
}

/// The coupled operator on stacked vectors x = [u; μ]:
/// y₁ = (a + q)·u + Bμ, y₂ = ε·Bu − μ, where q ≥ 0 is the diagonal of the
/// semi-implicit penalty linearization.
pub struct BlockOperator<'a> {
    pub geom: StencilGeom,
    /// D = W''(uⁿ)/ε².
    pub shift: &'a [f64],
    /// q = M_ε·P̃''(sⁿ)·(Φ'(uⁿ))² (or M_ε·P̃''(sⁿ) for the v species).
    pub qdiag: &'a [f64],
    /// a = ε/τ.
    pub a: f64,
    pub eps: f64,
}

impl LinearOperator<f64> for BlockOperator<'_> {
    fn dim(&self) -> usize {
        2 * self.geom.nx * self.geom.ny
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.geom;
        let (nx, ny) = (g.nx, g.ny);
        let n = nx * ny;
        let (cx, cy) = (g.inv_hx2, g.inv_hy2);
        let lap_diag = 2.0 * (cx + cy);
        let (u, mu) = x.split_at(n);
        let (y1, y2) = y.split_at_mut(n);
        for j in 0..ny {
            let jm = g.prev(j, ny);
            let jp = g.next(j, ny);
            let base = j * nx;
            let ur = &u[base..base + nx];
            let um = &u[jm * nx..jm * nx + nx];
            let up = &u[jp * nx..jp * nx + nx];
            let mr = &mu[base..base + nx];
            let mm = &mu[jm * nx..jm * nx + nx];
            let mp = &mu[jp * nx..jp * nx + nx];
            let sh = &self.shift[base..base + nx];
            let qd = &self.qdiag[base..base + nx];
            let o1 = &mut y1[base..base + nx];
            let o2 = &mut y2[base..base + nx];
            let il = g.prev(0, nx);
            let ir = g.next(nx - 1, nx);
            let edge = |i: usize, iw: usize, ie: usize, o1: &mut [f64], o2: &mut [f64]| {
                let bd = lap_diag + sh[i];
                let nb_mu = (mr[iw] + mr[ie]) * cx + (mm[i] + mp[i]) * cy;
                let nb_u = (ur[iw] + ur[ie]) * cx + (um[i] + up[i]) * cy;
                o1[i] = (self.a + qd[i]) * ur[i] + bd * mr[i] - nb_mu;
                o2[i] = self.eps * (bd * ur[i] - nb_u) - mr[i];
            };
            edge(0, il, 1, o1, o2);
            for i in 1..nx - 1 {
                let bd = lap_diag + sh[i];
                let nb_mu = (mr[i - 1] + mr[i + 1]) * cx + (mm[i] + mp[i]) * cy;
                let nb_u = (ur[i - 1] + ur[i + 1]) * cx + (um[i] + up[i]) * cy;
                o1[i] = (self.a + qd[i]) * ur[i] + bd * mr[i] - nb_mu;
                o2[i] = self.eps * (bd * ur[i] - nb_u) - mr[i];
            }
            edge(nx - 1, nx - 2, ir, o1, o2);
        }
    }
}

struct Level {
    geom: StencilGeom,
    shift: Vec<f64>,
    qdiag: Vec<f64>,
    /// Jacobi scaling: 1/diag(A) with diag(A) ≈ a + ε((Bd)² + Σ w²).
    inv_diag: Vec<f64>,
    /// Upper bound for λmax(D⁻¹A) (Gershgorin).
    lam_hi: f64,
    /// Lower bound for λmin(D⁻¹A) (from A ⪰ a·I).
    lam_lo: f64,
    // scratch
    x: Vec<f64>,
    b: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    d: Vec<f64>,
    t: Vec<f64>,
}

impl Level {
    fn new(geom: StencilGeom, shift: Vec<f64>, qdiag: Vec<f64>, a: f64, eps: f64) -> Self {
        let n = geom.nx * geom.ny;
        let mut lvl = Level {
            geom,
            shift,
            qdiag,
            inv_diag: vec![0.0; n],
            lam_hi: 0.0,
            lam_lo: 0.0,
            x: vec![0.0; n],
            b: vec![0.0; n],
            r: vec![0.0; n],
            z: vec![0.0; n],
            d: vec![0.0; n],
            t: vec![0.0; n],
        };
        lvl.rebuild(a, eps);
        lvl
    }

    fn rebuild(&mut self, a: f64, eps: f64) {
        let g = self.geom;
        let lap_diag = 2.0 * (g.inv_hx2 + g.inv_hy2);
        let w2 = 2.0 * (g.inv_hx2 * g.inv_hx2 + g.inv_hy2 * g.inv_hy2);
        let mut max_row = 0.0f64;
        let mut max_q = 0.0f64;
        let mut max_inv_diag = 0.0f64;
        let mut min_inv_diag = f64::INFINITY;
        for ((id, &dv), &qv) in self
            .inv_diag
            .iter_mut()
            .zip(self.shift.iter())
            .zip(self.qdiag.iter())
        {
            let bd = lap_diag + dv;
            *id = 1.0 / (a + qv + eps * (bd * bd + w2));
            max_inv_diag = max_inv_diag.max(*id);
            min_inv_diag = min_inv_diag.min(*id);
            max_row = max_row.max(bd.abs() + lap_diag);
            max_q = max_q.max(qv);
        }
        // Gershgorin bound λmax(D⁻¹A) ≤ (a + max q + ε‖B‖∞²)·max(1/diag);
        // the lower end uses A ⪰ a·I with a safety factor for boundary rows
        self.lam_hi = (a + max_q + eps * max_row * max_row) * max_inv_diag * 1.02;
        self.lam_lo = 0.25 * a * min_inv_diag;
    }
}

/// V-cycle preconditioner for [`BlockOperator`]; reusable across time steps
/// through [`BlockMg::refresh`].
pub struct BlockMg {
    levels: Vec<Level>,
    a: f64,
    eps: f64,
    /// Chebyshev degree of pre- and post-smoothing.
    degree: usize,
    /// Smoothing covers [λmax/alpha, λmax].
    alpha: f64,
}

impl BlockMg {
    pub fn new(grid: &Grid2, shift: &[f64], qdiag: &[f64], a: f64, eps: f64) -> Self {
        let mut levels = Vec::new();
        let mut geom = StencilGeom::of(grid);
        let mut d = shift.to_vec();
        let mut q = qdiag.to_vec();
        loop {
            levels.push(Level::new(geom, d.clone(), q.clone(), a, eps));
            match coarsen_geom(&geom) {
                Some(cg) => {
                    d = restrict_field(&geom, &cg, &d);
                    q = restrict_field(&geom, &cg, &q);
                    geom = cg;
                }
                None => break,
            }
        }
        BlockMg {
            levels,
            a,
            eps,
            degree: 4,
            alpha: 25.0,
        }
    }

    /// Rebuilds all levels for new frozen coefficient fields (same grid).
    pub fn refresh(&mut self, shift: &[f64], qdiag: &[f64]) {
        let (a, eps) = (self.a, self.eps);
        {
            let l0 = &mut self.levels[0];
            debug_assert_eq!(shift.len(), l0.shift.len());
            l0.shift.copy_from_slice(shift);
            l0.qdiag.copy_from_slice(qdiag);
            l0.rebuild(a, eps);
        }
        for l in 1..self.levels.len() {
            let (fine, coarse) = self.levels.split_at_mut(l);
            let f = &fine[l - 1];
            let c = &mut coarse[0];
            restrict_into(&f.geom, &c.geom, &f.shift, {
                let buf: &mut [f64] = &mut c.shift;
                buf
            });
            restrict_into(&f.geom, &c.geom, &f.qdiag, {
                let buf: &mut [f64] = &mut c.qdiag;
                buf
            });
            c.rebuild(a, eps);
        }
    }

    /// Chebyshev smoothing of A x = b over [λmax/α, λmax] of D⁻¹A,
    /// updating the level iterate in place.
    fn smooth(&mut self, level: usize, degree: usize) {
        let hi = self.levels[level].lam_hi;
        let lo = hi / self.alpha;
        self.smooth_range(level, degree, lo, hi);
    }

    fn smooth_range(&mut self, level: usize, degree: usize, lo: f64, hi: f64) {
        let (a, eps) = (self.a, self.eps);
        let Level {
            geom,
            shift,
            qdiag,
            inv_diag,
            x,
            b,
            r,
            z,
            d,
            t,
            ..
        } = &mut self.levels[level];
        let theta = 0.5 * (hi + lo);
        let delta = 0.5 * (hi - lo);
        let sigma = theta / delta;
        let mut rho = 1.0 / sigma;
        // r = b - A x
        apply_a_slices(geom, shift, qdiag, a, eps, x, t, r);
        for (ri, &bi) in r.iter_mut().zip(b.iter()) {
            *ri = bi - *ri;
        }
        // d = (1/θ)·D⁻¹ r
        for ((di, &ri), &idg) in d.iter_mut().zip(r.iter()).zip(inv_diag.iter()) {
            *di = ri * idg / theta;
        }
        for _ in 0..degree {
            for (xi, &di) in x.iter_mut().zip(d.iter()) {
                *xi += di;
            }
            // r -= A d
            apply_a_slices(geom, shift, qdiag, a, eps, d, t, z);
            for (ri, &zi) in r.iter_mut().zip(z.iter()) {
                *ri -= zi;
            }
            let rho_new = 1.0 / (2.0 * sigma - rho);
            for ((di, &ri), &idg) in d.iter_mut().zip(r.iter()).zip(inv_diag.iter()) {
                *di = rho_new * rho * *di + 2.0 * rho_new / delta * ri * idg;
            }
            rho = rho_new;
        }
        for (xi, &di) in x.iter_mut().zip(d.iter()) {
            *xi += di;
        }
    }

    /// Full-spectrum Chebyshev at the coarsest level: unlike smoothing it
    /// must reduce every mode, so it runs over [λmin, λmax].
    fn coarse_solve(&mut self, level: usize) {
        let (lo, hi) = {
            let lvl = &self.levels[level];
            (lvl.lam_lo, lvl.lam_hi)
        };
        let kappa = (hi / lo).max(1.0);
        let degree = (2.5 * kappa.sqrt()).ceil().min(120.0) as usize;
        self.smooth_range(level, degree, lo, hi);
    }

    fn vcycle(&mut self, level: usize) {
        if level + 1 == self.levels.len() {
            self.coarse_solve(level);
            return;
        }
        self.smooth(level, self.degree);
        {
            // residual after pre-smoothing
            let (a, eps) = (self.a, self.eps);
            let Level {
                geom,
                shift,
                qdiag,
                x,
                b,
                r,
                t,
                ..
            } = &mut self.levels[level];
            apply_a_slices(geom, shift, qdiag, a, eps, x, t, r);
            for (ri, &bi) in r.iter_mut().zip(b.iter()) {
                *ri = bi - *ri;
            }
        }
        {
            let (fine, coarse) = self.levels.split_at_mut(level + 1);
            let f = &fine[level];
            let c = &mut coarse[0];
            restrict_into(&f.geom, &c.geom, &f.r, &mut c.b);
            c.x.iter_mut().for_each(|v| *v = 0.0);
        }
        self.vcycle(level + 1);
        {
            let (fine, coarse) = self.levels.split_at_mut(level + 1);
            let f = &mut fine[level];
            let c = &coarse[0];
            prolong_add(&f.geom, &c.geom, &c.x, &mut f.x);
        }
        self.smooth(level, self.degree);
    }

    /// One V-cycle for A z = r starting from z = 0 (linear in r).
    fn solve_schur(&mut self, rhs: &[f64], z: &mut [f64]) {
        self.levels[0].b.copy_from_slice(rhs);
        self.levels[0].x.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(0);
        z.copy_from_slice(&self.levels[0].x);
    }
}

impl Preconditioner<f64> for BlockMg {
    /// Approximate block inverse through the Schur complement:
    /// δu ≈ (a·I + εB²)⁻¹ (r₁ + B r₂) by one V-cycle, δμ = ε·B·δu - r₂.
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let n = self.levels[0].geom.nx * self.levels[0].geom.ny;
        let (r1, r2) = r.split_at(n);
        let (z1, z2) = z.split_at_mut(n);
        // rhs = r1 + B r2 (reuse level scratch)
        {
            let lvl = &mut self.levels[0];
            apply_b(&lvl.geom, &lvl.shift, r2, &mut lvl.z);
            for ((zi, &r1i), _) in lvl.z.iter_mut().zip(r1).zip(0..n) {
                *zi += r1i;
            }
        }
        let rhs = self.levels[0].z.clone();
        self.solve_schur(&rhs, z1);
        {
            let lvl = &mut self.levels[0];
            apply_b(&lvl.geom, &lvl.shift, z1, &mut lvl.z);
            for ((z2i, &bz), &r2i) in z2.iter_mut().zip(&lvl.z).zip(r2) {
                *z2i = self.eps * bz - r2i;
            }
        }
    }
}

/// Next-coarser geometry by index halving, or None at the coarsest level.
fn coarsen_geom(g: &StencilGeom) -> Option<StencilGeom> {
    let ok = |n: usize| match g.bc {
        BoundaryMode::Neumann => n >= 9,
        BoundaryMode::Periodic => n >= 8 && n % 2 == 0,
    };
    if !ok(g.nx) || !ok(g.ny) {
        return None;
    }
    let half = |n: usize| match g.bc {
        BoundaryMode::Neumann => n.div_ceil(2),
        BoundaryMode::Periodic => n / 2,
    };
    Some(StencilGeom {
        nx: half(g.nx),
        ny: half(g.ny),
        inv_hx2: g.inv_hx2 / 4.0,
        inv_hy2: g.inv_hy2 / 4.0,
        bc: g.bc,
    })
}

fn fine_index(g: &StencilGeom, i: isize, n: usize) -> usize {
    if i < 0 {
        match g.bc {
            BoundaryMode::Neumann => 1,
            BoundaryMode::Periodic => n - 1,
        }
    } else if i as usize >= n {
        match g.bc {
            BoundaryMode::Neumann => n - 2,
            BoundaryMode::Periodic => (i as usize) - n,
        }
    } else {
        i as usize
    }
}

/// Full-weighting restriction (allocating).
fn restrict_field(fine: &StencilGeom, coarse: &StencilGeom, src: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; coarse.nx * coarse.ny];
    restrict_into(fine, coarse, src, &mut out);
    out
}

fn restrict_into(fine: &StencilGeom, coarse: &StencilGeom, src: &[f64], out: &mut [f64]) {
    let wts = [0.25, 0.5, 0.25];
    for jc in 0..coarse.ny {
        for ic in 0..coarse.nx {
            let (fi, fj) = (2 * ic as isize, 2 * jc as isize);
            let mut acc = 0.0;
            for (dj, wj) in (-1..=1).zip(wts) {
                let jj = fine_index(fine, fj + dj, fine.ny);
                for (di, wi) in (-1..=1).zip(wts) {
                    let ii = fine_index(fine, fi + di, fine.nx);
                    acc += wj * wi * src[jj * fine.nx + ii];
                }
            }
            out[jc * coarse.nx + ic] = acc;
        }
    }
}

/// Bicubic prolongation, added onto the fine iterate. Fourth-order
/// interpolation is required here: with the biharmonic-type Schur operator,
/// transfer orders must satisfy m_P + m_R > 4, which bilinear interpolation
/// misses and the cycle then amplifies transferred high frequencies.
fn prolong_add(fine: &StencilGeom, coarse: &StencilGeom, src: &[f64], dst: &mut [f64]) {
    let (nxc, nyc) = (coarse.nx, coarse.ny);
    let cidx = |i: isize, n: usize| -> usize {
        match fine.bc {
            BoundaryMode::Periodic => i.rem_euclid(n as isize) as usize,
            BoundaryMode::Neumann => {
                // mirror about the ends of the coarse index range
                let m = if i < 0 { -i } else { i };
                let m = m as usize;
                if m >= n {
                    n.saturating_sub(2 + (m - n)).min(n - 1)
                } else {
                    m
                }
            }
        }
    };
    // 1d cubic midpoint weights (-1, 9, 9, -1)/16
    let interp = |a: f64, b: f64, c: f64, d: f64| (-a + 9.0 * b + 9.0 * c - d) * (1.0 / 16.0);
    for j in 0..fine.ny {
        let jc = (j / 2) as isize;
        let jodd = j % 2 == 1;
        for i in 0..fine.nx {
            let ic = (i / 2) as isize;
            let iodd = i % 2 == 1;
            let cv = |di: isize, dj: isize| -> f64 {
                src[cidx(jc + dj, nyc) * nxc + cidx(ic + di, nxc)]
            };
            let v = match (iodd, jodd) {
                (false, false) => cv(0, 0),
                (true, false) => interp(cv(-1, 0), cv(0, 0), cv(1, 0), cv(2, 0)),
                (false, true) => interp(cv(0, -1), cv(0, 0), cv(0, 1), cv(0, 2)),
                (true, true) => {
                    let r0 = interp(cv(-1, -1), cv(0, -1), cv(1, -1), cv(2, -1));
                    let r1 = interp(cv(-1, 0), cv(0, 0), cv(1, 0), cv(2, 0));
                    let r2 = interp(cv(-1, 1), cv(0, 1), cv(1, 1), cv(2, 1));
                    let r3 = interp(cv(-1, 2), cv(0, 2), cv(1, 2), cv(2, 2));
                    interp(r0, r1, r2, r3)
                }
            };
            dst[j * fine.nx + i] += v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::gmres;

    fn interface_shift(grid: &Grid2, lo: f64, hi: f64) -> Vec<f64> {
        let n = grid.nx();
        (0..grid.len())
            .map(|k| {
                let i = k % n;
                let j = k / n;
                let x = grid.x(i) - 0.5;
                let y = grid.y(j) - 0.5;
                let r = (x * x + y * y).sqrt();
                if (r - 0.25).abs() < 0.05 {
                    lo
                } else {
                    hi
                }
            })
            .collect()
    }

    fn solve_block(n: usize, bc: BoundaryMode, a: f64, eps: f64, lo: f64, hi: f64) -> usize {
        let grid = Grid2::unit_square(n, bc);
        let shift = interface_shift(&grid, lo, hi);
        let q0 = vec![0.0; grid.len()];
        let op = BlockOperator {
            geom: StencilGeom::of(&grid),
            shift: &shift,
            qdiag: &q0,
            a,
            eps,
        };
        let want: Vec<f64> = (0..2 * grid.len())
            .map(|k| (k as f64 * 0.0137).sin() + 0.3 * (k as f64 * 0.0071).cos())
            .collect();
        let mut rhs = vec![0.0; 2 * grid.len()];
        op.apply(&want, &mut rhs);
        let mut pc = BlockMg::new(&grid, &shift, &q0, a, eps);
        let (x, stats) =
            gmres(&op, &rhs, None, 1e-10, 600, 50, Some(&mut pc)).expect("block solve");
        let err = x
            .iter()
            .zip(&want)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max);
        // the rhs carries magnitudes ~ ε·(4/h²)²·|x|; compare to that scale
        let scale = 1.0 + eps * (8.0 * (n as f64) * (n as f64)).powi(2) / a;
        assert!(err < 1e-5 * scale, "n={n} {bc:?}: max error {err}");
        stats.iterations
    }

    #[test]
    fn mg_preconditioned_block_solves_quickly() {
        // time-step-like parameters: a = ε/τ, shifts of W''/ε² size
        let a = 0.125 / 1e-5;
        for (n, bc) in [
            (64, BoundaryMode::Neumann),
            (65, BoundaryMode::Neumann),
            (64, BoundaryMode::Periodic),
            (96, BoundaryMode::Neumann),
        ] {
            let iters = solve_block(n, bc, a, 0.125, -1152.0, 2304.0);
            assert!(iters <= 90, "n={n} {bc:?}: {iters} iterations");
        }
        // the sharper species has 4x the well curvature; its slow interface
        // modes are the hardest for the hierarchy
        let iters = solve_block(96, BoundaryMode::Neumann, a, 0.125, -4608.0, 9216.0);
        assert!(iters <= 250, "w2 shifts: {iters} iterations");
    }

    #[test]
    fn vcycle_contracts_as_stationary_iteration() {
        // on a nonnegative-shift operator the cycle is a genuine contraction
        // (with W'' < 0 it serves as a preconditioner, not an iteration)
        let grid = Grid2::unit_square(64, BoundaryMode::Neumann);
        let a = 0.125 / 1e-5;
        let eps = 0.125;
        let shift = interface_shift(&grid, 0.0, 2304.0);
        let q0 = vec![0.0; grid.len()];
        let op = BlockOperator {
            geom: StencilGeom::of(&grid),
            shift: &shift,
            qdiag: &q0,
            a,
            eps,
        };
        let mut pc = BlockMg::new(&grid, &shift, &q0, a, eps);
        let b: Vec<f64> = (0..2 * grid.len())
            .map(|k| (k as f64 * 0.013).sin())
            .collect();
        let mut x = vec![0.0; b.len()];
        let mut r = b.clone();
        let mut z = vec![0.0; b.len()];
        let norm = |v: &[f64]| v.iter().map(|q| q * q).sum::<f64>().sqrt();
        let r0 = norm(&r);
        for _ in 0..8 {
            pc.apply(&r, &mut z);
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi += zi;
            }
            let mut fx = vec![0.0; b.len()];
            op.apply(&x, &mut fx);
            for ((ri, &bi), &fi) in r.iter_mut().zip(&b).zip(&fx) {
                *ri = bi - fi;
            }
        }
        let factor = (norm(&r) / r0).powf(1.0 / 8.0);
        assert!(factor < 0.85, "block iteration contraction factor {factor}");
    }
}
