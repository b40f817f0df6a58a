//! Double-well potentials, optimal transition profiles, the profile
//! transform Φ and the interface penalty.
//!
//! The simulations use W₁(r) = 18 r²(1-r)² and W₂ = 4 W₁. Their optimal
//! profiles are logistics, q₁(r) = e^{6r}/(1+e^{6r}) and q₂ = q₁(2·), the
//! surface tensions are σ₁ = 1 and σ₂ = 2, and the transform Φ = q₂ ∘ q₁⁻¹
//! has the closed form Φ(p) = p² / (1 - 2p + 2p²). Everything below is also
//! available for generic smooth wells through quadrature and root finding;
//! the closed forms are the fast path.

use std::sync::Arc;

use crate::quad;
use crate::{Error, Result};

/// Input clamp for the transform evaluations; keeps Ψ well defined when a
/// phase field overshoots [0, 1] slightly. Below every test tolerance.
const PHI_CLAMP: f64 = 1e-12;

/// User-supplied smooth double well. Implementations must satisfy the
/// double-well conditions: W(0) = W(1) = 0, W > 0 elsewhere, W''(0), W''(1) > 0.
pub trait WellFn: Send + Sync {
    fn eval(&self, r: f64) -> f64;
    fn prime(&self, r: f64) -> f64;
    fn second(&self, r: f64) -> f64;
}

/// A double-well potential.
///
/// `StandardQuartic { scale: c }` is W(r) = c·r²(1-r)², for which the profile
/// and surface tension are known in closed form. `Custom` wells fall back to
/// quadrature and ODE inversion for profiles.
#[derive(Clone)]
pub enum DoubleWell {
    StandardQuartic { scale: f64 },
    Custom(Arc<dyn WellFn>),
}

impl std::fmt::Debug for DoubleWell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DoubleWell::StandardQuartic { scale } => {
                write!(f, "StandardQuartic {{ scale: {scale} }}")
            }
            DoubleWell::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl DoubleWell {
    /// W₁ of the simulations: 18 r²(1-r)².
    pub fn standard1() -> Self {
        DoubleWell::StandardQuartic { scale: 18.0 }
    }

    /// W₂ = 4 W₁ = 72 r²(1-r)².
    pub fn standard2() -> Self {
        DoubleWell::StandardQuartic { scale: 72.0 }
    }

    /// W(r).
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DoubleWell::StandardQuartic { scale } => {
                let s = r * (1.0 - r);
                scale * s * s
            }
            DoubleWell::Custom(w) => w.eval(r),
        }
    }

    /// W'(r) = 2c·r(1-r)(1-2r) for the quartic family.
    #[inline]
    pub fn prime(&self, r: f64) -> f64 {
        match self {
            DoubleWell::StandardQuartic { scale } => {
                2.0 * scale * r * (1.0 - r) * (1.0 - 2.0 * r)
            }
            DoubleWell::Custom(w) => w.prime(r),
        }
    }

    /// W''(r) = 2c·(1 - 6r + 6r²) for the quartic family.
    #[inline]
    pub fn second(&self, r: f64) -> f64 {
        match self {
            DoubleWell::StandardQuartic { scale } => {
                2.0 * scale * (1.0 - 6.0 * r + 6.0 * r * r)
            }
            DoubleWell::Custom(w) => w.second(r),
        }
    }

    /// W(1 - u) evaluated from `u` directly. Near the well at 1 this avoids
    /// the cancellation of forming 1 - u first (the quartic is symmetric,
    /// custom wells fall back to eval(1 - u)).
    #[inline]
    fn eval_reflected(&self, u: f64) -> f64 {
        match self {
            DoubleWell::StandardQuartic { scale } => {
                let s = u * (1.0 - u);
                scale * s * s
            }
            DoubleWell::Custom(w) => w.eval(1.0 - u),
        }
    }

    /// Logistic rate √(2c) of the closed-form profile, when available.
    fn logistic_rate(&self) -> Option<f64> {
        match self {
            DoubleWell::StandardQuartic { scale } => Some((2.0 * scale).sqrt()),
            DoubleWell::Custom(_) => None,
        }
    }

    /// Surface tension σ = ∫₀¹ √(2W(s)) ds by adaptive quadrature
    /// (relative accuracy 1e-8 or better).
    pub fn sigma(&self) -> Result<f64> {
        let f = |s: f64| (2.0 * self.eval(s)).sqrt();
        quad::adaptive(&f, 0.0, 1.0, 1e-14, 1e-10)
    }

    /// Optimal profile q(r): the increasing solution of q' = √(2W(q)),
    /// q(0) = 1/2, connecting the wells. Closed-form logistic for the
    /// quartic family; quadrature inversion of the profile coordinate
    /// otherwise (residual of the profile ODE below 1e-8).
    pub fn profile(&self, r: f64) -> f64 {
        if let Some(rate) = self.logistic_rate() {
            return logistic(rate * r);
        }
        self.profile_generic(r)
    }

    /// q'(r) = √(2W(q(r))). Evaluating through W keeps the tails consistent
    /// with the wells: once q(r) rounds to a pure phase the slope is exactly 0.
    pub fn profile_prime(&self, r: f64) -> f64 {
        (2.0 * self.eval(self.profile(r))).sqrt()
    }

    /// Generic profile: invert r(q) = ∫_{1/2}^{q} (2W)^{-1/2} ds by bisection
    /// plus Newton (r'(q) = (2W(q))^{-1/2}).
    fn profile_generic(&self, r: f64) -> f64 {
        // clamp far tails; the coordinate diverges logarithmically at wells
        if r > 100.0 {
            return 1.0;
        }
        if r < -100.0 {
            return 0.0;
        }
        let coord =
            |q: f64| profile_coordinate(self, 0.5, q).expect("profile coordinate quadrature");
        let (mut lo, mut hi) = (PHI_CLAMP, 1.0 - PHI_CLAMP);
        // bisection to a decent bracket, then Newton
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if coord(mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut q = 0.5 * (lo + hi);
        for _ in 0..8 {
            let fr = coord(q) - r;
            let dq = fr * (2.0 * self.eval(q)).sqrt();
            q = (q - dq).clamp(lo, hi);
            if dq.abs() < 1e-14 {
                break;
            }
        }
        q
    }

    /// Samples the double-well conditions: W(0) = W(1) = 0, W > 0 on a grid
    /// of interior and exterior points, W''(0) > 0, W''(1) > 0.
    pub fn validate(&self) -> Result<()> {
        if self.eval(0.0).abs() > 1e-12 || self.eval(1.0).abs() > 1e-12 {
            return Err(Error::Shape("double well must vanish at 0 and 1".into()));
        }
        for k in 1..400 {
            let r = -1.0 + 3.0 * k as f64 / 400.0;
            if (r.abs() > 1e-9) && ((r - 1.0).abs() > 1e-9) && self.eval(r) <= 0.0 {
                return Err(Error::Shape(format!("double well not positive at r = {r}")));
            }
        }
        if self.second(0.0) <= 0.0 || self.second(1.0) <= 0.0 {
            return Err(Error::Shape("double well needs W''(0), W''(1) > 0".into()));
        }
        Ok(())
    }
}

#[inline]
fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// The pair (W₁, W₂) with surface tensions, the transform between their
/// profiles and the penalty parameters.
#[derive(Clone, Debug)]
pub struct PotentialPair {
    pub w1: DoubleWell,
    pub w2: DoubleWell,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Even penalty exponent k in P(s) = s^k.
    pub penalty_exponent: u32,
    /// Threshold θ of the cut-off penalty (s^k - θ^k)₊.
    pub threshold: f64,
    transform: Transform,
}

/// How Φ = q₂ ∘ q₁⁻¹ is evaluated.
#[derive(Clone, Debug)]
enum Transform {
    /// Both wells quartic: Φ(p) = p^m / (p^m + (1-p)^m) with m = √(c₂/c₁).
    Power { m: f64 },
    /// Generic wells: quadrature + root finding per evaluation.
    Generic,
}

impl PotentialPair {
    /// The simulation pair: W₁ = 18r²(1-r)², W₂ = 4W₁, k = 4, θ = 0.004.
    pub fn standard() -> Self {
        Self::new(DoubleWell::standard1(), DoubleWell::standard2(), 4, 0.004)
            .expect("standard pair is valid")
    }

    /// Builds a pair, computing surface tensions by quadrature.
    pub fn new(w1: DoubleWell, w2: DoubleWell, penalty_exponent: u32, threshold: f64) -> Result<Self> {
        if penalty_exponent < 2 || penalty_exponent % 2 != 0 {
            return Err(Error::Shape(
                "penalty exponent must be an even integer >= 2".into(),
            ));
        }
        if threshold < 0.0 {
            return Err(Error::Shape("penalty threshold must be >= 0".into()));
        }
        let sigma1 = w1.sigma()?;
        let sigma2 = w2.sigma()?;
        let transform = match (&w1, &w2) {
            (
                DoubleWell::StandardQuartic { scale: c1 },
                DoubleWell::StandardQuartic { scale: c2 },
            ) => Transform::Power { m: (c2 / c1).sqrt() },
            _ => Transform::Generic,
        };
        Ok(PotentialPair {
            w1,
            w2,
            sigma1,
            sigma2,
            penalty_exponent,
            threshold,
            transform,
        })
    }

    /// Optimal profile of W₁.
    #[inline]
    pub fn profile1(&self, r: f64) -> f64 {
        self.w1.profile(r)
    }

    /// Optimal profile of W₂.
    #[inline]
    pub fn profile2(&self, r: f64) -> f64 {
        self.w2.profile(r)
    }

    /// Φ(p) = q₂(q₁⁻¹(p)).
    #[inline]
    pub fn phi(&self, p: f64) -> f64 {
        match &self.transform {
            Transform::Power { m } if *m == 2.0 => phi_eval(p),
            Transform::Power { m } => {
                let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
                let a = p.powf(*m);
                let b = (1.0 - p).powf(*m);
                a / (a + b)
            }
            Transform::Generic => phi_from_wells(&self.w1, &self.w2, p)
                .expect("generic transform quadrature"),
        }
    }

    /// Φ'(p).
    #[inline]
    pub fn phi_prime(&self, p: f64) -> f64 {
        match &self.transform {
            Transform::Power { m } if *m == 2.0 => phi_prime(p),
            Transform::Power { m } => {
                let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
                let s = p.powf(*m) + (1.0 - p).powf(*m);
                let c = (p * (1.0 - p)).powf(*m - 1.0);
                m * c / (s * s)
            }
            Transform::Generic => {
                // W₂(Φ) = (Φ')² W₁ gives Φ' = √(W₂(Φ(p)) / W₁(p))
                let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
                (self.w2.eval(self.phi(p)) / self.w1.eval(p)).sqrt()
            }
        }
    }

    /// Φ''(p).
    #[inline]
    pub fn phi_second(&self, p: f64) -> f64 {
        match &self.transform {
            Transform::Power { m } if *m == 2.0 => phi_second(p),
            Transform::Power { m } => {
                let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
                let pm1 = p.powf(*m - 1.0);
                let qm1 = (1.0 - p).powf(*m - 1.0);
                let s = p * pm1 + (1.0 - p) * qm1;
                let sp = m * (pm1 - qm1);
                let c = (p * (1.0 - p)).powf(*m - 2.0) * (1.0 - 2.0 * p) * (m - 1.0);
                m * (c * s - 2.0 * (p * (1.0 - p)).powf(*m - 1.0) * sp) / (s * s * s)
            }
            Transform::Generic => {
                // W₂'(Φ) = 2Φ''W₁ + Φ'W₁' gives Φ''
                let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
                let phi = self.phi(p);
                let phip = self.phi_prime(p);
                (self.w2.prime(phi) - phip * self.w1.prime(p)) / (2.0 * self.w1.eval(p))
            }
        }
    }

    /// Ψ = Φ⁻¹.
    #[inline]
    pub fn psi(&self, s: f64) -> f64 {
        match &self.transform {
            Transform::Power { m } if *m == 2.0 => psi_eval(s),
            Transform::Power { m } => {
                let s = s.clamp(0.0, 1.0);
                let a = s.powf(1.0 / m);
                let b = (1.0 - s).powf(1.0 / m);
                a / (a + b)
            }
            Transform::Generic => phi_from_wells(&self.w2, &self.w1, s)
                .expect("generic inverse transform quadrature"),
        }
    }

    /// Cut-off penalty P̃(s) with this pair's exponent and threshold.
    #[inline]
    pub fn penalty(&self, s: f64) -> f64 {
        penalty_eval(s, self.penalty_exponent, self.threshold)
    }

    /// P̃'(s) with this pair's exponent and threshold.
    #[inline]
    pub fn penalty_prime(&self, s: f64) -> f64 {
        penalty_prime(s, self.penalty_exponent, self.threshold)
    }

    /// P̃''(s) with this pair's exponent and threshold.
    #[inline]
    pub fn penalty_second(&self, s: f64) -> f64 {
        penalty_second(s, self.penalty_exponent, self.threshold)
    }
}

/// Closed-form transform of the standard pair: Φ(p) = p² / (1 - 2p + 2p²).
/// Arguments are clamped to [1e-12, 1 - 1e-12].
#[inline]
pub fn phi_eval(p: f64) -> f64 {
    let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
    let d = 1.0 + 2.0 * p * (p - 1.0);
    p * p / d
}

/// Φ'(p) = 2p(1-p) / (1 - 2p + 2p²)².
#[inline]
pub fn phi_prime(p: f64) -> f64 {
    let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
    let d = 1.0 + 2.0 * p * (p - 1.0);
    2.0 * p * (1.0 - p) / (d * d)
}

/// Φ''(p) = 2(1-2p)(1+2p-2p²) / (1 - 2p + 2p²)³.
///
/// On [0, 1] the second factor is positive, so Φ'' vanishes only at p = 1/2.
#[inline]
pub fn phi_second(p: f64) -> f64 {
    let p = p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
    let d = 1.0 + 2.0 * p * (p - 1.0);
    2.0 * (1.0 - 2.0 * p) * (1.0 + 2.0 * p - 2.0 * p * p) / (d * d * d)
}

/// Ψ(s) = Φ⁻¹(s) = √s / (√s + √(1-s)) for the standard pair.
#[inline]
pub fn psi_eval(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let a = s.sqrt();
    let b = (1.0 - s).sqrt();
    a / (a + b)
}

/// Profile coordinate ∫_a^b (2W(s))^{-1/2} ds with 0 < a, b < 1 in either
/// order. The integrand blows up like 1/(s√(W''(0))) at the wells, so panels
/// near 0 and 1 use the substitution s = e^t (resp. 1 - s = e^t) under which
/// they are smooth; the reflected branch evaluates W through
/// [`DoubleWell::eval_reflected`] to stay accurate up to 1 - 1e-12.
pub(crate) fn profile_coordinate(w: &DoubleWell, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    assert!(
        lo > 0.0 && hi < 1.0,
        "profile coordinate requires arguments in (0, 1)"
    );
    let delta = 0.1;
    let mut total = 0.0;
    if lo < delta {
        let top = hi.min(delta);
        let sub = |t: f64| {
            let s = t.exp();
            s / (2.0 * w.eval(s)).sqrt()
        };
        total += quad::adaptive(&sub, lo.ln(), top.ln(), 1e-12, 1e-11)?;
    }
    let mid_lo = lo.max(delta);
    let mid_hi = hi.min(1.0 - delta);
    if mid_hi > mid_lo {
        let g = |s: f64| 1.0 / (2.0 * w.eval(s)).sqrt();
        total += quad::adaptive(&g, mid_lo, mid_hi, 1e-12, 1e-11)?;
    }
    if hi > 1.0 - delta {
        let bot = lo.max(1.0 - delta);
        let sub = |t: f64| {
            let u = t.exp();
            u / (2.0 * w.eval_reflected(u)).sqrt()
        };
        total += quad::adaptive(&sub, (1.0 - hi).ln(), (1.0 - bot).ln(), 1e-12, 1e-11)?;
    }
    Ok(sign * total)
}

/// Generic transform: solves ∫_{1/2}^{Φ} (2W₂)^{-1/2} = ∫_{1/2}^{r} (2W₁)^{-1/2}
/// by quadrature and a monotone root find (absolute tolerance 1e-10 on Φ).
pub fn phi_from_wells(w1: &DoubleWell, w2: &DoubleWell, r: f64) -> Result<f64> {
    let r = r.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP);
    if (r - 0.5).abs() < 1e-15 {
        return Ok(0.5);
    }
    let target = profile_coordinate(w1, 0.5, r)?;
    // Φ is on the same side of 1/2 as r; bracket accordingly.
    let (mut lo, mut hi) = if target > 0.0 {
        (0.5, 1.0 - PHI_CLAMP)
    } else {
        (PHI_CLAMP, 0.5)
    };
    if profile_coordinate(w2, 0.5, lo.max(PHI_CLAMP))? > target
        || profile_coordinate(w2, 0.5, hi)? < target
    {
        return Err(Error::Quadrature(format!(
            "transform root not bracketed for r = {r}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if profile_coordinate(w2, 0.5, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cut-off penalty P̃(s) = (s^k - θ^k)₊ for even k.
#[inline]
pub fn penalty_eval(s: f64, k: u32, theta: f64) -> f64 {
    debug_assert!(k >= 2 && k % 2 == 0, "penalty exponent must be even, >= 2");
    (s.powi(k as i32) - theta.powi(k as i32)).max(0.0)
}

/// P̃'(s) = k·s^{k-1} where |s| > θ, else 0.
#[inline]
pub fn penalty_prime(s: f64, k: u32, theta: f64) -> f64 {
    debug_assert!(k >= 2 && k % 2 == 0, "penalty exponent must be even, >= 2");
    if s.abs() > theta {
        k as f64 * s.powi(k as i32 - 1)
    } else {
        0.0
    }
}

/// P̃''(s) = k(k-1)·s^{k-2} where |s| > θ, else 0 (nonnegative for even k);
/// the diagonal weight of the semi-implicit penalty linearization.
#[inline]
pub fn penalty_second(s: f64, k: u32, theta: f64) -> f64 {
    debug_assert!(k >= 2 && k % 2 == 0, "penalty exponent must be even, >= 2");
    if s.abs() > theta {
        (k * (k - 1)) as f64 * s.powi(k as i32 - 2)
    } else {
        0.0
    }
}

/// Diagnostic value (|log ε|·q₂'(|log ε|))^k · ε·|log ε|·M_ε from the penalty
/// scaling assumption; it must decrease along an ε-sequence with admissible
/// penalty magnitudes M_ε.
pub fn penalty_scaling_check(w2: &DoubleWell, eps: f64, m_eps: f64, k: u32) -> f64 {
    let s = eps.ln().abs();
    (s * w2.profile_prime(s)).powi(k as i32) * eps * s * m_eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn well_closed_forms() {
        let w1 = DoubleWell::standard1();
        assert_eq!(w1.eval(0.0), 0.0);
        assert_eq!(w1.eval(1.0), 0.0);
        assert_eq!(w1.eval(0.5), 1.125); // 18/16
        assert_eq!(w1.prime(0.5), 0.0);
        let w2 = DoubleWell::standard2();
        for k in 1..20 {
            let r = -0.5 + 2.0 * k as f64 / 20.0;
            if r.abs() < 1e-12 || (r - 1.0).abs() < 1e-12 {
                continue;
            }
            assert!(rel_err(w2.eval(r) / w1.eval(r), 4.0) < 1e-14);
        }
        w1.validate().unwrap();
        w2.validate().unwrap();
    }

    #[test]
    fn well_derivatives_match_finite_differences() {
        let w1 = DoubleWell::standard1();
        let h = 1e-6;
        let h2 = 1e-4; // wider step for the second difference (roundoff)
        for k in 0..=30 {
            let r = -0.5 + 2.0 * k as f64 / 30.0;
            let fd1 = (w1.eval(r + h) - w1.eval(r - h)) / (2.0 * h);
            let fd2 = (w1.eval(r + h2) - 2.0 * w1.eval(r) + w1.eval(r - h2)) / (h2 * h2);
            assert!((w1.prime(r) - fd1).abs() < 1e-6, "W' at {r}");
            assert!((w1.second(r) - fd2).abs() < 1e-5, "W'' at {r}");
        }
    }

    #[test]
    fn surface_tensions() {
        assert!(rel_err(DoubleWell::standard1().sigma().unwrap(), 1.0) < 1e-9);
        assert!(rel_err(DoubleWell::standard2().sigma().unwrap(), 2.0) < 1e-9);
        // scaled well 2·W₁ has sigma √2
        let w = DoubleWell::StandardQuartic { scale: 36.0 };
        assert!(rel_err(w.sigma().unwrap(), std::f64::consts::SQRT_2) < 1e-9);
    }

    #[test]
    fn profiles() {
        let w1 = DoubleWell::standard1();
        let w2 = DoubleWell::standard2();
        assert_eq!(w1.profile(0.0), 0.5);
        assert_eq!(w2.profile(0.0), 0.5);
        // q₁(1) = e⁶/(1+e⁶)
        let e6 = 6.0f64.exp();
        assert!(rel_err(w1.profile(1.0), e6 / (1.0 + e6)) < 1e-14);
        assert!((w1.profile(1.0) - 0.99752737684).abs() < 1e-10);
        // q₂(r) = q₁(2r), exactly
        for k in -10..=10 {
            let r = k as f64 / 4.0;
            assert_eq!(w2.profile(r), w1.profile(2.0 * r));
        }
    }

    #[test]
    fn profile_ode_residual_by_finite_differences() {
        let w1 = DoubleWell::standard1();
        let h = 1e-5;
        for k in -8..=8 {
            let r = k as f64 / 4.0;
            let fd = (w1.profile(r + h) - w1.profile(r - h)) / (2.0 * h);
            assert!(
                (fd - w1.profile_prime(r)).abs() < 1e-6,
                "profile ODE residual at r = {r}"
            );
        }
    }

    #[test]
    fn generic_profile_matches_closed_form() {
        // route the standard well through the generic quadrature inversion
        struct Q18;
        impl WellFn for Q18 {
            fn eval(&self, r: f64) -> f64 {
                18.0 * r * r * (1.0 - r) * (1.0 - r)
            }
            fn prime(&self, r: f64) -> f64 {
                36.0 * r * (1.0 - r) * (1.0 - 2.0 * r)
            }
            fn second(&self, r: f64) -> f64 {
                36.0 * (1.0 - 6.0 * r + 6.0 * r * r)
            }
        }
        let generic = DoubleWell::Custom(Arc::new(Q18));
        let closed = DoubleWell::standard1();
        for k in -6..=6 {
            let r = k as f64 / 3.0;
            assert!(
                (generic.profile(r) - closed.profile(r)).abs() < 1e-9,
                "generic profile at {r}"
            );
        }
        assert!(rel_err(generic.sigma().unwrap(), 1.0) < 1e-8);
    }

    #[test]
    fn transform_closed_form_values() {
        assert!(phi_eval(0.0).abs() < 1e-12);
        assert!((phi_eval(1.0) - 1.0).abs() < 1e-12);
        assert!(rel_err(phi_eval(0.25), 0.1) < 1e-14);
        assert!(rel_err(phi_prime(0.5), 2.0) < 1e-14);
        // symmetry Φ(p) + Φ(1-p) = 1
        for k in 0..=40 {
            let p = k as f64 / 40.0;
            assert!((phi_eval(p) + phi_eval(1.0 - p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_derivatives_match_finite_differences() {
        let h = 1e-6;
        for k in 1..40 {
            let p = k as f64 / 40.0;
            let fd1 = (phi_eval(p + h) - phi_eval(p - h)) / (2.0 * h);
            let fd2 = (phi_eval(p + h) - 2.0 * phi_eval(p) + phi_eval(p - h)) / (h * h);
            assert!((phi_prime(p) - fd1).abs() < 1e-8, "Φ' at {p}");
            assert!((phi_second(p) - fd2).abs() < 2e-3, "Φ'' at {p}");
        }
    }

    #[test]
    fn pair_identities() {
        let pair = PotentialPair::standard();
        assert!(rel_err(pair.sigma2, 2.0 * pair.sigma1) < 1e-9);
        for k in 1..200 {
            let p = k as f64 / 200.0;
            // W₂(Φ) = (Φ')² W₁
            let lhs = pair.w2.eval(pair.phi(p));
            let rhs = pair.phi_prime(p).powi(2) * pair.w1.eval(p);
            assert!((lhs - rhs).abs() < 1e-10, "energy transform at {p}");
            // W₂'(Φ) = 2Φ''W₁ + Φ'W₁'
            let lhs = pair.w2.prime(pair.phi(p));
            let rhs = 2.0 * pair.phi_second(p) * pair.w1.eval(p)
                + pair.phi_prime(p) * pair.w1.prime(p);
            assert!((lhs - rhs).abs() < 1e-8, "gradient transform at {p}");
            // Ψ(Φ(p)) = p
            assert!((pair.psi(pair.phi(p)) - p).abs() < 1e-10, "inverse at {p}");
        }
        // q₂ = Φ(q₁)
        for k in -12..=12 {
            let r = k as f64 / 4.0;
            assert!(
                (pair.profile2(r) - pair.phi(pair.profile1(r))).abs() < 1e-10,
                "profile transform at {r}"
            );
        }
    }

    #[test]
    fn generic_transform_matches_closed_form() {
        let w1 = DoubleWell::standard1();
        let w2 = DoubleWell::standard2();
        assert!((phi_from_wells(&w1, &w1, 0.37).unwrap() - 0.37).abs() < 1e-10);
        assert_eq!(phi_from_wells(&w1, &w2, 0.5).unwrap(), 0.5);
        for &r in &[0.05, 0.25, 0.4, 0.6, 0.9] {
            let got = phi_from_wells(&w1, &w2, r).unwrap();
            assert!(
                (got - phi_eval(r)).abs() < 1e-8,
                "generic transform at {r}: {got} vs {}",
                phi_eval(r)
            );
        }
    }

    #[test]
    fn penalty_values() {
        assert_eq!(penalty_eval(0.0, 4, 0.004), 0.0);
        assert!(rel_err(penalty_eval(0.1, 4, 0.0), 1e-4) < 1e-12);
        assert_eq!(penalty_eval(0.003, 4, 0.004), 0.0);
        assert_eq!(penalty_prime(0.003, 4, 0.004), 0.0);
        assert_eq!(penalty_prime(-0.003, 4, 0.004), 0.0);
        let s = 0.01;
        assert!(rel_err(penalty_prime(s, 4, 0.004), 4.0 * s * s * s) < 1e-12);
        assert!(rel_err(penalty_prime(-s, 4, 0.004), -4.0 * s * s * s) < 1e-12);
    }

    #[test]
    fn profile_coordinate_matches_logistic() {
        // ∫_{1/2}^{q(r)} (2W₁)^{-1/2} ds = r for the logistic profile
        let w1 = DoubleWell::standard1();
        for &r in &[-1.5, -0.3, 0.0, 0.2, 1.0, 2.0] {
            let q = w1.profile(r);
            let got = profile_coordinate(&w1, 0.5, q).unwrap();
            assert!((got - r).abs() < 1e-10, "r={r}: got {got}");
        }
        // near-well reflected branch stays usable deep into the tail; the
        // argument 1 - 1e-12 itself only pins the gap to ~1e-4 relative
        let c = profile_coordinate(&w1, 0.5, 1.0 - 1e-12).unwrap();
        assert!((c - (1e-12f64).ln().abs() / 6.0).abs() < 1e-4, "tail coordinate {c}");
    }

    #[test]
    fn penalty_scaling_decreases() {
        let w2 = DoubleWell::standard2();
        let m = 1e7;
        let v8 = penalty_scaling_check(&w2, 0.125, m * 64.0, 4);
        let v16 = penalty_scaling_check(&w2, 0.0625, m * 256.0, 4);
        assert!(v8.is_finite() && v8 > 0.0);
        assert!(v16 < v8, "scaling value must decrease: {v8} -> {v16}");
        // deep tail underflows to an exact zero in double precision
        assert_eq!(penalty_scaling_check(&w2, 1.0 / 32.0, m * 1024.0, 4), 0.0);
        // degenerate exponent k = 0 leaves ε|log ε|M_ε
        let v = penalty_scaling_check(&w2, 0.125, 2.0, 0);
        assert!(rel_err(v, 0.125 * 0.125f64.ln().abs() * 2.0) < 1e-14);
    }
}
