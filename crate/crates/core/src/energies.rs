//! Diffuse energy functionals and their bookkeeping.
//!
//! All integrands are evaluated nodewise with the discrete operators from
//! [`crate::grid`] and integrated with the grid quadrature. The total energy
//! of the two-variable model is
//!
//!   F_ε(u, v) = W_ε^{(1)}(u) + W_ε^{(2)}(v) + M_ε ∫ P̃(Φ(u) - v),
//!
//! with W_ε^{(j)}(f) = ∫ (1/2ε)(-εΔf + W_j'(f)/ε)² and M_ε = M/ε². Scenario
//! extras (adhesion, confinement, volume, fidelity) enter the report with
//! their strengths applied; adhesion is a gain and carries a minus sign.

use crate::flow::{ExtraForces, FlowParams};
use crate::grid::{div_g_grad, grad_norm_sq, integrate, laplacian, Field};
use crate::potentials::{DoubleWell, PotentialPair};
use crate::Result;

/// Time-stamped record of all energy components and interface diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub time: f64,
    /// Diffuse interface length of u: ∫ (ε/2)|∇u|² + W₁(u)/ε.
    pub area1: f64,
    /// Diffuse interface length of v (with W₂).
    pub area2: f64,
    pub willmore1: f64,
    pub willmore2: f64,
    /// M_ε ∫ P̃(Φ(u) - v).
    pub penalty: f64,
    /// Weighted adhesion gain (enters `total` with a minus sign).
    pub adhesion: f64,
    pub confinement: f64,
    pub volume: f64,
    pub fidelity: f64,
    /// willmore1 + willmore2 + penalty - adhesion + confinement + volume + fidelity.
    pub total: f64,
    /// σ-normalized diffuse perimeters, area1/σ₁ and area2/σ₂.
    pub perimeter1: f64,
    pub perimeter2: f64,
    /// Marching-squares diagnostics of the u = 1/2 level set; filled by the
    /// run loop, zero when not computed.
    pub contour_components: usize,
    pub contour_length: f64,
}

/// Diffuse mean curvature μ = -εΔf + W'(f)/ε.
pub fn diffuse_mean_curvature(f: &Field, dw: &DoubleWell, eps: f64) -> Field {
    let mut mu = laplacian(f);
    let inv_eps = 1.0 / eps;
    for (m, &v) in mu.values_mut().iter_mut().zip(f.values()) {
        *m = -eps * *m + inv_eps * dw.prime(v);
    }
    mu
}

/// Cahn–Hilliard (diffuse area) energy ∫ (ε/2)|∇f|² + W(f)/ε.
pub fn diffuse_area(f: &Field, dw: &DoubleWell, eps: f64) -> f64 {
    let mut e = grad_norm_sq(f);
    let inv_eps = 1.0 / eps;
    for (g, &v) in e.values_mut().iter_mut().zip(f.values()) {
        *g = 0.5 * eps * *g + inv_eps * dw.eval(v);
    }
    integrate(&e)
}

/// Diffuse Willmore energy ∫ μ²/(2ε) with μ the diffuse mean curvature.
pub fn willmore_energy(f: &Field, dw: &DoubleWell, eps: f64) -> f64 {
    let mut mu = diffuse_mean_curvature(f, dw, eps);
    let c = 0.5 / eps;
    for m in mu.values_mut() {
        *m = c * *m * *m;
    }
    integrate(&mu)
}

/// Penalty energy M_ε ∫ P̃(Φ(u) - v) with the pair's exponent and threshold.
pub fn penalty_energy(u: &Field, v: &Field, pair: &PotentialPair, m_eps: f64) -> Result<f64> {
    u.same_grid(v)?;
    let mut p = Field::zeros(u.grid());
    for ((w, &a), &b) in p.values_mut().iter_mut().zip(u.values()).zip(v.values()) {
        *w = pair.penalty(pair.phi(a) - b);
    }
    Ok(m_eps * integrate(&p))
}

/// Adhesion energy ∫ ((ε/2)|∇f|² + W(f)/ε) · (2/ε)W(ψ): the diffuse area
/// density weighted by the inclusion's own interface density.
pub fn adhesion_energy(f: &Field, psi: &Field, dw: &DoubleWell, eps: f64) -> f64 {
    let mut e = grad_norm_sq(f);
    let inv_eps = 1.0 / eps;
    for ((g, &v), &p) in e.values_mut().iter_mut().zip(f.values()).zip(psi.values()) {
        *g = (0.5 * eps * *g + inv_eps * dw.eval(v)) * (2.0 * inv_eps * dw.eval(p));
    }
    integrate(&e)
}

/// Confinement integrand ∫ ψ²(1 - f - ψ)²; strengths are applied by callers.
pub fn confinement_penalty(f: &Field, psi: &Field) -> f64 {
    let mut e = Field::zeros(f.grid());
    for ((w, &v), &p) in e.values_mut().iter_mut().zip(f.values()).zip(psi.values()) {
        let r = 1.0 - v - p;
        *w = p * p * r * r;
    }
    integrate(&e)
}

/// Volume penalty (strength/2)·(∫f - target)².
pub fn volume_penalty(f: &Field, target: f64, strength: f64) -> f64 {
    let d = integrate(f) - target;
    0.5 * strength * d * d
}

/// Fidelity penalty (strength/2)·∫(f - ψ)².
pub fn fidelity_penalty(f: &Field, psi: &Field, strength: f64) -> f64 {
    let mut e = Field::zeros(f.grid());
    for ((w, &v), &p) in e.values_mut().iter_mut().zip(f.values()).zip(psi.values()) {
        let d = v - p;
        *w = d * d;
    }
    0.5 * strength * integrate(&e)
}

/// Assembles the full energy report of a state. `v = None` is the
/// one-variable flow: the v-components and the penalty are zero.
pub fn total_energy(
    u: &Field,
    v: Option<&Field>,
    pair: &PotentialPair,
    params: &FlowParams,
    extras: &ExtraForces,
) -> Result<EnergyReport> {
    let eps = params.epsilon;
    let mut rep = EnergyReport {
        area1: diffuse_area(u, &pair.w1, eps),
        willmore1: willmore_energy(u, &pair.w1, eps),
        ..Default::default()
    };
    if let Some(v) = v {
        rep.area2 = diffuse_area(v, &pair.w2, eps);
        rep.willmore2 = willmore_energy(v, &pair.w2, eps);
        rep.penalty = penalty_energy(u, v, pair, params.m_eps())?;
    }
    if let Some((psi1, psi2)) = &extras.inclusion_psi {
        if extras.adhesion_weight > 0.0 {
            rep.adhesion = extras.adhesion_weight * adhesion_energy(u, psi1, &pair.w1, eps);
            if let Some(v) = v {
                rep.adhesion +=
                    extras.adhesion_weight * adhesion_energy(v, psi2, &pair.w2, eps);
            }
        }
        if extras.confinement_strength > 0.0 {
            rep.confinement = extras.confinement_strength * confinement_penalty(u, psi1);
            if let Some(v) = v {
                rep.confinement += extras.confinement_strength * confinement_penalty(v, psi2);
            }
        }
    }
    if let Some((target, strength)) = extras.volume {
        rep.volume = volume_penalty(u, target, strength);
    }
    if let Some(fid) = &extras.fidelity {
        rep.fidelity = fidelity_penalty(u, &fid.psi1, fid.strength);
        if let Some(v) = v {
            rep.fidelity += fidelity_penalty(v, &fid.psi2, fid.strength);
        }
    }
    rep.total = rep.willmore1 + rep.willmore2 + rep.penalty - rep.adhesion
        + rep.confinement
        + rep.volume
        + rep.fidelity;
    rep.perimeter1 = rep.area1 / pair.sigma1;
    rep.perimeter2 = if v.is_some() {
        rep.area2 / pair.sigma2
    } else {
        0.0
    };
    Ok(rep)
}

/// Descent force of the adhesion gain on species `f`:
/// +w·(-ε ∇·(g∇f) + g·W'(f)/ε) with g = (2/ε)W(ψ). The sign is positive
/// because adhesion enters the total energy negatively.
pub(crate) fn adhesion_force(
    f: &Field,
    psi: &Field,
    dw: &DoubleWell,
    eps: f64,
    weight: f64,
) -> Field {
    let inv_eps = 1.0 / eps;
    let mut g = Field::zeros(f.grid());
    for (gv, &p) in g.values_mut().iter_mut().zip(psi.values()) {
        *gv = 2.0 * inv_eps * dw.eval(p);
    }
    let mut force = div_g_grad(&g, f);
    for ((fv, &gv), &v) in force
        .values_mut()
        .iter_mut()
        .zip(g.values())
        .zip(f.values())
    {
        *fv = weight * (-eps * *fv + inv_eps * gv * dw.prime(v));
    }
    force
}
