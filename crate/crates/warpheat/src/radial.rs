//! Rotationally symmetric metric measure spaces reduced to their radial
//! data: area density A(r) = V′(r), volume V(r), and the drift A′/A that
//! enters the radial heat operator u ↦ u″ + (A′/A)u′.
//!
//! A cone with volume exponent α has A = α r^{α-1}, V = r^α, and its heat
//! kernel diagonal at t = 1 is the cone constant C(α) = [α 2^{α-1} Γ(α/2)]⁻¹;
//! euclidean-n is the α = n cone (the normalization constant of A drops out
//! of V(√t)·H). The surrogate space alternates two exponents across radial
//! bands with C¹ log-space blends.

use crate::error::Error;

/// Closed form C(α) = [α·2^{α-1}·Γ(α/2)]⁻¹; equals ω(n)(4π)^{-n/2} at
/// integer α = n.
pub fn cone_constant(alpha: f64) -> Result<f64, Error> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("cone constant needs alpha > 0, got {alpha}")));
    }
    Ok(1.0 / (alpha * 2f64.powf(alpha - 1.0) * libm::tgamma(alpha / 2.0)))
}

/// Independent quadrature route: C(α) = [∫₀^∞ e^{-u²/4} α u^{α-1} du]⁻¹,
/// composite 16-point Gauss–Legendre on [0, 60].
pub fn cone_constant_quadrature(alpha: f64) -> Result<f64, Error> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("cone constant needs alpha > 0, got {alpha}")));
    }
    let mut total = 0.0;
    // On [0,1] substitute u = s² to regularize the u^{α-1} endpoint:
    // ∫₀¹ e^{-u²/4} α u^{α-1} du = ∫₀¹ e^{-s⁴/4} 2α s^{2α-1} ds.
    let inner = |s: f64| (-0.25 * s.powi(4)).exp() * 2.0 * alpha * s.powf(2.0 * alpha - 1.0);
    for p in 0..16 {
        let a = p as f64 / 16.0;
        let b = (p + 1) as f64 / 16.0;
        total += gauss_legendre_16(&inner, a, b);
    }
    let outer = |u: f64| (-0.25 * u * u).exp() * alpha * u.powf(alpha - 1.0);
    let panels = 236;
    for p in 0..panels {
        let a = 1.0 + 59.0 * p as f64 / panels as f64;
        let b = 1.0 + 59.0 * (p + 1) as f64 / panels as f64;
        total += gauss_legendre_16(&outer, a, b);
    }
    Ok(1.0 / total)
}

/// 16-point Gauss–Legendre quadrature on [a, b].
pub fn gauss_legendre_16(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
    }
    acc * half
}

/// Closed-form cone heat kernel C(α)·t^{-α/2}·exp(−r²/4t).
pub fn cone_kernel(alpha: f64, r: f64, t: f64) -> Result<f64, Error> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("cone kernel needs t > 0, got {t}")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("cone kernel needs r >= 0, got {r}")));
    }
    Ok(cone_constant(alpha)? * t.powf(-0.5 * alpha) * (-r * r / (4.0 * t)).exp())
}

/// Oscillating-exponent surrogate specification.
#[derive(Clone, Debug)]
pub struct OscillationSpec {
    /// Exponent of the innermost region (and every even region).
    pub alpha1: f64,
    /// Exponent of the odd regions.
    pub alpha2: f64,
    /// Region boundaries as log₁₀ r, strictly increasing.
    pub edges_log10: Vec<f64>,
    /// Blend half-width in ln r.
    pub blend_half_width: f64,
    /// Outer domain radius.
    pub domain_max: f64,
}

impl Default for OscillationSpec {
    fn default() -> Self {
        OscillationSpec {
            alpha1: 6.0,
            alpha2: 5.0,
            edges_log10: vec![1.0, 2.5, 4.5, 7.0],
            blend_half_width: 0.3,
            domain_max: 1e9,
        }
    }
}

/// Piecewise power-law area density with C¹ blends and a cached volume.
#[derive(Clone, Debug)]
pub struct SurrogateProfile {
    /// Region exponents α_k (alternating), region k below edge k.
    alphas: Vec<f64>,
    /// Region boundaries in ln r.
    edges_ln: Vec<f64>,
    /// ln of the volume coefficient per region (V-piece = c_k r^{α_k}).
    ln_coeff: Vec<f64>,
    blend: f64,
    domain_max: f64,
    /// ln V sampled on a uniform ln-r grid for interpolation.
    grid_lam: Vec<f64>,
    grid_ln_v: Vec<f64>,
}

impl SurrogateProfile {
    /// ln A and d(ln A)/d(ln r).
    fn ln_density(&self, lam: f64) -> (f64, f64) {
        let base =
            |k: usize| self.ln_coeff[k] + self.alphas[k].ln() + (self.alphas[k] - 1.0) * lam;
        let w = self.blend;
        for (e, &edge) in self.edges_ln.iter().enumerate() {
            let u = lam - edge;
            if u.abs() < w {
                let x = 0.5 * (u / w + 1.0);
                let s = x * x * (3.0 - 2.0 * x); // smoothstep
                let sp = 6.0 * x * (1.0 - x) / (2.0 * w);
                let (la, lb) = (base(e), base(e + 1));
                let val = (1.0 - s) * la + s * lb;
                let slope = (1.0 - s) * (self.alphas[e] - 1.0)
                    + s * (self.alphas[e + 1] - 1.0)
                    + sp * (lb - la);
                return (val, slope);
            }
        }
        let k = self.region(lam);
        (base(k), self.alphas[k] - 1.0)
    }

    fn region(&self, lam: f64) -> usize {
        self.edges_ln.iter().take_while(|&&e| lam > e).count()
    }
}

/// A rotationally symmetric space the solver can handle at machine scale.
#[derive(Clone, Debug)]
pub enum RadialSpace {
    /// A = α r^{α-1}, V = r^α on [0, domain_max].
    Cone { alpha: f64, domain_max: f64 },
    Surrogate(SurrogateProfile),
}

impl RadialSpace {
    pub fn cone(alpha: f64, domain_max: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!(
                "cone exponent must be positive, got {alpha}"
            )));
        }
        Ok(RadialSpace::Cone { alpha, domain_max })
    }

    /// euclidean-n: the α = n cone.
    pub fn euclidean(n: u32, domain_max: f64) -> Result<Self, Error> {
        Self::cone(n as f64, domain_max)
    }

    pub fn area_density(&self, r: f64) -> f64 {
        match self {
            RadialSpace::Cone { alpha, .. } => alpha * r.powf(alpha - 1.0),
            RadialSpace::Surrogate(s) => {
                if r <= 0.0 {
                    return 0.0;
                }
                let (ln_a, _) = s.ln_density(r.ln());
                ln_a.exp()
            }
        }
    }

    pub fn volume(&self, r: f64) -> f64 {
        match self {
            RadialSpace::Cone { alpha, .. } => r.powf(*alpha),
            RadialSpace::Surrogate(s) => {
                if r <= 0.0 {
                    return 0.0;
                }
                let lam = r.ln();
                if lam <= s.grid_lam[0] {
                    // pure inner cone
                    return (s.ln_coeff[0] + s.alphas[0] * lam).exp();
                }
                let hi = s.grid_lam.len() - 1;
                let step = (s.grid_lam[hi] - s.grid_lam[0]) / hi as f64;
                let x = ((lam - s.grid_lam[0]) / step).min(hi as f64 - 1e-9);
                let i = x as usize;
                let frac = x - i as f64;
                ((1.0 - frac) * s.grid_ln_v[i] + frac * s.grid_ln_v[i + 1]).exp()
            }
        }
    }

    /// Drift coefficient A′(r)/A(r) of the radial operator.
    pub fn drift(&self, r: f64) -> Result<f64, Error> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("drift has a pole at r = 0 (got {r})")));
        }
        match self {
            RadialSpace::Cone { alpha, .. } => Ok((alpha - 1.0) / r),
            RadialSpace::Surrogate(s) => {
                let (_, slope) = s.ln_density(r.ln());
                Ok(slope / r)
            }
        }
    }

    /// m with A(r) ~ c·r^m as r → 0.
    pub fn small_r_exponent(&self) -> f64 {
        match self {
            RadialSpace::Cone { alpha, .. } => alpha - 1.0,
            RadialSpace::Surrogate(s) => s.alphas[0] - 1.0,
        }
    }

    pub fn domain_max(&self) -> f64 {
        match self {
            RadialSpace::Cone { domain_max, .. } => *domain_max,
            RadialSpace::Surrogate(s) => s.domain_max,
        }
    }
}

/// Build the oscillating surrogate: A is C¹, equals c_k·α_k·r^{α_k−1} away
/// from the blends, with V by cached quadrature.
pub fn surrogate_profile(spec: &OscillationSpec) -> Result<RadialSpace, Error> {
    if !(spec.alpha1 > 0.0 && spec.alpha2 > 0.0) {
        return Err(Error::InvalidBand("exponents must be positive".into()));
    }
    if spec.blend_half_width <= 0.0 {
        return Err(Error::InvalidBand("blend width must be positive".into()));
    }
    if spec.edges_log10.is_empty() {
        return Err(Error::InvalidBand("need at least one band edge".into()));
    }
    let edges_ln: Vec<f64> = spec
        .edges_log10
        .iter()
        .map(|e| e * std::f64::consts::LN_10)
        .collect();
    for w in edges_ln.windows(2) {
        if !(w[1] > w[0] + 2.0 * spec.blend_half_width) {
            return Err(Error::InvalidBand(format!(
                "edges must be increasing and separated by more than one blend: {w:?}"
            )));
        }
    }
    if spec.domain_max.ln() <= edges_ln.last().unwrap() + spec.blend_half_width {
        return Err(Error::InvalidBand("domain_max must clear the last blend".into()));
    }

    let n_regions = edges_ln.len() + 1;
    let mut alphas = Vec::with_capacity(n_regions);
    for k in 0..n_regions {
        alphas.push(if k % 2 == 0 { spec.alpha1 } else { spec.alpha2 });
    }
    // Power-law continuity at edges: c_{k+1} = c_k·r_e^{α_k − α_{k+1}}.
    let mut ln_coeff = vec![0.0; n_regions];
    for k in 0..edges_ln.len() {
        ln_coeff[k + 1] = ln_coeff[k] + (alphas[k] - alphas[k + 1]) * edges_ln[k];
    }

    let mut profile = SurrogateProfile {
        alphas,
        edges_ln: edges_ln.clone(),
        ln_coeff,
        blend: spec.blend_half_width,
        domain_max: spec.domain_max,
        grid_lam: Vec::new(),
        grid_ln_v: Vec::new(),
    };

    // Cumulative volume by Simpson in ln r from below the first blend.
    let lam0 = edges_ln[0] - spec.blend_half_width - 0.5;
    let lam1 = spec.domain_max.ln() + 1e-9;
    let n_grid = 32768usize;
    let step = (lam1 - lam0) / n_grid as f64;
    let integrand = |p: &SurrogateProfile, lam: f64| {
        let (ln_a, _) = p.ln_density(lam);
        (ln_a + lam).exp() // A(r)·r per unit ln r
    };
    let mut grid_lam = Vec::with_capacity(n_grid + 1);
    let mut grid_ln_v = Vec::with_capacity(n_grid + 1);
    let mut v = (profile.ln_coeff[0] + profile.alphas[0] * lam0).exp();
    grid_lam.push(lam0);
    grid_ln_v.push(v.ln());
    for i in 0..n_grid {
        let a = lam0 + i as f64 * step;
        let b = a + step;
        let m = 0.5 * (a + b);
        v += step / 6.0
            * (integrand(&profile, a) + 4.0 * integrand(&profile, m) + integrand(&profile, b));
        grid_lam.push(b);
        grid_ln_v.push(v.ln());
    }
    profile.grid_lam = grid_lam;
    profile.grid_ln_v = grid_ln_v;
    Ok(RadialSpace::Surrogate(profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cone_constants_match_reported_values() {
        assert_relative_eq!(cone_constant(3.0).unwrap(), 0.0940316, max_relative = 1e-5);
        assert_relative_eq!(cone_constant(5.0).unwrap(), 0.0094032, max_relative = 1e-5);
        assert_relative_eq!(cone_constant(6.0).unwrap(), 1.0 / 384.0, max_relative = 1e-14);
        // C(5) is exactly C(3)/10.
        assert_relative_eq!(
            cone_constant(5.0).unwrap(),
            cone_constant(3.0).unwrap() / 10.0,
            max_relative = 1e-14
        );
        // ω(n)(4π)^{-n/2} at n = 3: ω₃ = 4π/3.
        let omega3 = 4.0 * std::f64::consts::PI / 3.0;
        let want = omega3 * (4.0 * std::f64::consts::PI).powf(-1.5);
        assert_relative_eq!(cone_constant(3.0).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        for alpha in [2.5, 3.0, 5.0, 6.0, 6.2, 8.0] {
            let q = cone_constant_quadrature(alpha).unwrap();
            let c = cone_constant(alpha).unwrap();
            assert_relative_eq!(q, c, max_relative = 1e-10);
        }
    }

    #[test]
    fn cone_constant_monotone_on_5_to_7() {
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let alpha = 5.0 + 2.0 * i as f64 / 40.0;
            let c = cone_constant(alpha).unwrap();
            assert!(c < prev, "C not decreasing at {alpha}");
            prev = c;
        }
    }

    #[test]
    fn cone_constant_rejects_nonpositive() {
        assert!(cone_constant(0.0).is_err());
        assert!(cone_constant(-1.0).is_err());
        assert!(cone_kernel(3.0, 1.0, 0.0).is_err());
        assert!(cone_kernel(3.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_diagonal_is_cone_constant() {
        for alpha in [3.0, 5.0, 6.2] {
            assert_relative_eq!(
                cone_kernel(alpha, 0.0, 1.0).unwrap(),
                cone_constant(alpha).unwrap(),
                max_relative = 1e-15
            );
        }
    }

    proptest! {
        #[test]
        fn kernel_parabolic_scaling(
            alpha in 2.0f64..9.0,
            r in 0.0f64..5.0,
            t in 0.1f64..10.0,
            lambda in 0.2f64..5.0
        ) {
            let lhs = cone_kernel(alpha, lambda * r, lambda * lambda * t).unwrap();
            let rhs = lambda.powf(-alpha) * cone_kernel(alpha, r, t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }

    #[test]
    fn drift_closed_forms() {
        let e3 = RadialSpace::euclidean(3, 10.0).unwrap();
        assert_relative_eq!(e3.drift(2.0).unwrap(), 1.0, max_relative = 1e-14); // 2/r
        let e8 = RadialSpace::euclidean(8, 10.0).unwrap();
        assert_relative_eq!(e8.drift(2.0).unwrap(), 3.5, max_relative = 1e-14); // 7/r
        let c = RadialSpace::cone(5.5, 10.0).unwrap();
        assert_relative_eq!(c.drift(3.0).unwrap(), 4.5 / 3.0, max_relative = 1e-14);
        assert!(e3.drift(0.0).is_err());
    }

    #[test]
    fn surrogate_single_exponent_is_pure_cone() {
        let spec = OscillationSpec {
            alpha1: 6.0,
            alpha2: 6.0,
            edges_log10: vec![2.0],
            blend_half_width: 0.3,
            domain_max: 1e6,
        };
        let s = surrogate_profile(&spec).unwrap();
        for r in [0.5, 3.0, 100.0, 1e4, 9e5] {
            assert_relative_eq!(s.volume(r), r.powf(6.0), max_relative = 1e-6);
            assert_relative_eq!(s.area_density(r), 6.0 * r.powf(5.0), max_relative = 1e-9);
        }
    }

    #[test]
    fn surrogate_volume_continuous_and_increasing_at_junction() {
        let s = surrogate_profile(&OscillationSpec::default()).unwrap();
        let e = 10f64;
        let below = s.volume(e * 0.999);
        let above = s.volume(e * 1.001);
        assert!(above > below);
        assert_relative_eq!(above, below, max_relative = 2e-2);
        // V′ matches A by finite differences, including across the blend.
        for r in [5.0, 10.0, 20.0, 1e3] {
            let h = r * 1e-5;
            let fd = (s.volume(r + h) - s.volume(r - h)) / (2.0 * h);
            assert_relative_eq!(fd, s.area_density(r), max_relative = 1e-3);
        }
    }

    #[test]
    fn surrogate_band_centers_look_like_pure_power_laws() {
        let s = surrogate_profile(&OscillationSpec::default()).unwrap();
        // Band centers at log₁₀ r ∈ {1.75, 3.5, 5.75}; exponents 5, 6, 5.
        for (center, alpha) in [(1.75, 5.0), (3.5, 6.0), (5.75, 5.0)] {
            let rc = 10f64.powf(center);
            let vc = s.volume(rc);
            for r in [0.5 * rc, 0.8 * rc, 1.5 * rc, 2.0 * rc] {
                let want = vc * (r / rc).powf(alpha);
                assert_relative_eq!(s.volume(r), want, max_relative = 2e-2);
            }
        }
    }

    #[test]
    fn surrogate_rejects_bad_bands() {
        let spec = OscillationSpec {
            edges_log10: vec![2.0, 2.1],
            ..OscillationSpec::default()
        };
        assert!(matches!(surrogate_profile(&spec), Err(Error::InvalidBand(_))));
    }
}
