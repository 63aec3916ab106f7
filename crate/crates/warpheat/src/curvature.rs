//! Closed-form Ricci curvature of g = dr² + f²k₁ + h²k₂ over the Hopf
//! fibration S³ → S⁷ → S⁴, and sample-based nonnegativity certification.
//!
//! Everything is computed in the r²-scaled (dimensionless) form
//!
//! ```text
//! r²·Rc|k₁ = 2(1/q_f² − d1_f²) − d2_f + 4 q_f²/q_h⁴ − 4 d1_f d1_h
//! r²·Rc|k₂ = 12/q_h² − 6 q_f²/q_h⁴ − d2_h − 3 d1_h² − 3 d1_f d1_h
//! r²·Rc(n,n) = −3 d2_f − 4 d2_h
//! ```
//!
//! with q = f/r, d1 = r f′/f, d2 = r² f″/f, which keeps every term finite
//! (or cleanly saturated) no matter how large the radius is. The scaling is
//! sign-preserving, so certification operates on these values directly.

use crate::error::Error;
use crate::lognum::LogNum;
use crate::profile::{Joint, PointEval, Region, WarpProfile};
use rayon::prelude::*;

/// Fiber-direction Ricci of the metric f²k₁ + h²k₂ on S⁷:
/// (2/f² + 4f²/h⁴, 6(2h² − f²)/h⁴).
pub fn ricci_fiber(f: f64, h: f64) -> Result<(f64, f64), Error> {
    if !(f > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!("ricci_fiber needs f, h > 0, got {f}, {h}")));
    }
    let k1 = 2.0 / (f * f) + 4.0 * f * f / (h * h * h * h);
    let k2 = 6.0 * (2.0 * h * h - f * f) / (h * h * h * h);
    Ok((k1, k2))
}

/// Scaled curvature components r²·Rc.
#[derive(Clone, Copy, Debug)]
pub struct ScaledRicci {
    pub k1: LogNum,
    pub k2: LogNum,
    pub rad: LogNum,
}

/// Core evaluation from the dimensionless point data of both warp factors.
///
/// Terms are summed in plain f64 whenever they all fit (which keeps exact
/// cancellations like the flat case 12−6−3−3 = 0 exact); the signed-log
/// path takes over only when a term saturates f64.
pub fn ricci_scaled(f: &PointEval, h: &PointEval) -> ScaledRicci {
    let ln2 = std::f64::consts::LN_2;
    let sum_terms = |lns: [(i8, f64); 2], plain: [f64; 3]| -> LogNum {
        let in_range = lns.iter().all(|&(_, l)| l < 690.0);
        if in_range {
            let mut acc = 0.0;
            for &(s, l) in &lns {
                acc += f64::from(s) * l.exp();
            }
            for &p in &plain {
                acc += p;
            }
            LogNum::from_f64(acc)
        } else {
            let mut terms = vec![LogNum::from_f64(plain.iter().sum())];
            for &(s, l) in &lns {
                terms.push(LogNum::from_sign_ln(s, l));
            }
            LogNum::sum(&terms)
        }
    };

    let k1 = sum_terms(
        [
            (1, ln2 - 2.0 * f.ln_q),                          // 2/q_f²
            (1, 2.0 * ln2 + 2.0 * f.ln_q - 4.0 * h.ln_q),     // 4q_f²/q_h⁴
        ],
        [-2.0 * f.d1 * f.d1, -f.d2, -4.0 * f.d1 * h.d1],
    );
    let k2 = sum_terms(
        [
            (1, (12.0f64).ln() - 2.0 * h.ln_q),               // 12/q_h²
            (-1, (6.0f64).ln() + 2.0 * f.ln_q - 4.0 * h.ln_q), // −6q_f²/q_h⁴
        ],
        [-h.d2, -3.0 * h.d1 * h.d1, -3.0 * f.d1 * h.d1],
    );
    let rad = LogNum::from_f64(-3.0 * f.d2 - 4.0 * h.d2);
    ScaledRicci { k1, k2, rad }
}

/// Curvature at one point of a warp profile.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureSample {
    pub lam_r: LogNum,
    pub scaled: ScaledRicci,
}

impl CurvatureSample {
    /// Unscaled Rc values (units 1/length²); saturate to 0/±∞ outside f64.
    pub fn rc_k1(&self) -> f64 {
        self.unscale(self.scaled.k1)
    }

    pub fn rc_k2(&self) -> f64 {
        self.unscale(self.scaled.k2)
    }

    pub fn rc_rad(&self) -> f64 {
        self.unscale(self.scaled.rad)
    }

    fn unscale(&self, v: LogNum) -> f64 {
        LogNum::from_sign_ln(v.sign(), v.ln_abs() - 2.0 * self.lam_r.to_f64()).to_f64()
    }
}

/// Evaluate the three Ricci components of the profile metric at a point.
pub fn ricci_at(profile: &WarpProfile, region: Region) -> Result<CurvatureSample, Error> {
    let (f, h) = profile.eval_pair(region)?;
    Ok(CurvatureSample {
        lam_r: profile.lam_r(region),
        scaled: ricci_scaled(&f, &h),
    })
}

/// Sampling plan for certification.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    /// Log-uniform interior samples per band.
    pub per_band: usize,
    /// Number of bands to certify, starting at band 0.
    pub bands: usize,
    /// Also sweep the cap [0, b₀].
    pub include_cap: bool,
    /// Densification factor inside smoothing windows.
    pub window_densify: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            per_band: 4096,
            bands: 4,
            include_cap: true,
            window_densify: 10,
        }
    }
}

pub const COMPONENTS: [&str; 3] = ["k1", "k2", "rad"];

/// Per-band minimum of one component.
#[derive(Clone, Debug)]
pub struct ComponentMin {
    pub component: &'static str,
    /// Minimum of r²·Rc over the band's samples.
    pub min_scaled: f64,
    pub argmin_lam_r: LogNum,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct BandCertification {
    /// −1 is the cap, k ≥ 0 the band (b_k, b_{k+1}].
    pub band_index: i64,
    pub mins: Vec<ComponentMin>,
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub bands: Vec<BandCertification>,
    pub slack: f64,
}

impl CertificationReport {
    /// Pass iff every per-band component minimum is ≥ −slack.
    pub fn pass(&self) -> bool {
        self.bands
            .iter()
            .all(|b| b.mins.iter().all(|m| m.min_scaled >= -self.slack))
    }

    pub fn worst(&self) -> Option<(&BandCertification, &ComponentMin)> {
        self.bands
            .iter()
            .flat_map(|b| b.mins.iter().map(move |m| (b, m)))
            .min_by(|a, b| a.1.min_scaled.partial_cmp(&b.1.min_scaled).unwrap())
    }
}

fn band_regions(profile: &WarpProfile, band: usize, plan: &SamplePlan) -> Vec<Region> {
    let mut regions = Vec::with_capacity(plan.per_band + 64);
    let n = plan.per_band.max(2);
    for j in 0..n {
        let theta = (j as f64 + 0.5) / n as f64;
        regions.push(Region::BandFrac { band, theta });
    }
    // The structural minima sit at O(1) log-distance from the band edges,
    // which log-uniform sampling of a 10^k-long band never visits; add
    // absolute-offset ladders on both edges.
    let ladder = [1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
    for &s in &ladder {
        regions.push(Region::Band { band, from_right: false, s });
        regions.push(Region::Band { band, from_right: true, s });
    }
    regions.push(Region::Band { band, from_right: true, s: 0.0 });
    // Window interiors, densified.
    for (joint, w) in profile.window_joints() {
        let m = plan.window_densify.max(1) * 8;
        match joint {
            Joint::Band(k) if k == band => {
                for j in 0..m {
                    let u = w * (j as f64 + 0.5) / m as f64;
                    regions.push(Region::Band { band, from_right: false, s: u });
                }
            }
            Joint::Band(k) if k == band + 1 => {
                for j in 0..m {
                    let u = w * (j as f64 + 0.5) / m as f64;
                    regions.push(Region::Band { band, from_right: true, s: u });
                }
            }
            Joint::CapEdge if band == 0 => {
                for j in 0..m {
                    let u = w * (j as f64 + 0.5) / m as f64;
                    regions.push(Region::Band { band: 0, from_right: false, s: u });
                }
            }
            _ => {}
        }
    }
    regions
}

fn cap_regions(profile: &WarpProfile, plan: &SamplePlan) -> Vec<Region> {
    let b0 = profile.params.b0();
    let l0 = b0.ln();
    let n = plan.per_band.max(2);
    let lo = l0 - 14.0;
    let mut regions: Vec<Region> = (0..n)
        .map(|j| Region::Cap { lam_r: lo + (l0 - lo) * (j as f64 + 0.5) / n as f64 })
        .collect();
    for (joint, w) in profile.window_joints() {
        let m = plan.window_densify.max(1) * 8;
        let c = match joint {
            Joint::CapHalf => l0 - std::f64::consts::LN_2,
            Joint::CapEdge => l0,
            Joint::Band(_) => continue,
        };
        for j in 0..(2 * m) {
            let u = -w + 2.0 * w * (j as f64 + 0.5) / (2 * m) as f64;
            let lam = c + u;
            if lam <= l0 {
                regions.push(Region::Cap { lam_r: lam });
            }
        }
    }
    regions
}

/// Certify Rc ≥ 0 on the sampled plan. `slack` admits minima down to
/// −slack on the r²-scaled components (0 = strict).
pub fn certify_nonneg(
    profile: &WarpProfile,
    plan: &SamplePlan,
    slack: f64,
) -> Result<CertificationReport, Error> {
    let mut jobs: Vec<(i64, Vec<Region>)> = Vec::new();
    if plan.include_cap {
        jobs.push((-1, cap_regions(profile, plan)));
    }
    for band in 0..plan.bands.min(profile.n_bands()) {
        jobs.push((band as i64, band_regions(profile, band, plan)));
    }

    let bands: Result<Vec<BandCertification>, Error> = jobs
        .par_iter()
        .map(|(index, regions)| {
            let mut mins: Vec<ComponentMin> = COMPONENTS
                .iter()
                .map(|c| ComponentMin {
                    component: c,
                    min_scaled: f64::INFINITY,
                    argmin_lam_r: LogNum::ZERO,
                    samples: regions.len(),
                })
                .collect();
            for &region in regions {
                let sample = ricci_at(profile, region)?;
                let vals = [sample.scaled.k1, sample.scaled.k2, sample.scaled.rad];
                for (m, v) in mins.iter_mut().zip(vals) {
                    let v64 = v.to_f64().min(1e308);
                    if v64 < m.min_scaled {
                        m.min_scaled = v64;
                        m.argmin_lam_r = sample.lam_r;
                    }
                }
            }
            Ok(BandCertification { band_index: *index, mins })
        })
        .collect();

    Ok(CertificationReport { bands: bands?, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{generate_params, ParamSchedule};
    use crate::profile::{assemble_c1, eval_bar, smooth_c2, WarpFn, WindowSchedule};
    use approx::assert_relative_eq;

    fn point(ln_q: f64, d1: f64, d2: f64) -> PointEval {
        PointEval { ln_q, d1, d2, lam: LogNum::ZERO }
    }

    #[test]
    fn round_s7_fiber() {
        let (k1, k2) = ricci_fiber(1.0, 1.0).unwrap();
        assert_eq!((k1, k2), (6.0, 6.0));
        // f = h collapses to 6/f².
        let (k1, k2) = ricci_fiber(0.5, 0.5).unwrap();
        assert_relative_eq!(k1, 24.0, max_relative = 1e-14);
        assert_relative_eq!(k2, 24.0, max_relative = 1e-14);
    }

    #[test]
    fn fiber_one_two() {
        let (k1, k2) = ricci_fiber(1.0, 2.0).unwrap();
        assert_relative_eq!(k1, 2.25, max_relative = 1e-14);
        assert_relative_eq!(k2, 2.625, max_relative = 1e-14);
    }

    #[test]
    fn fiber_rejects_nonpositive() {
        assert!(ricci_fiber(0.0, 1.0).is_err());
        assert!(ricci_fiber(1.0, -2.0).is_err());
    }

    #[test]
    fn flat_space_is_exactly_zero() {
        // f = h = r: ln_q = 0, d1 = 1, d2 = 0.
        let e = point(0.0, 1.0, 0.0);
        let rc = ricci_scaled(&e, &e);
        assert!(rc.k1.is_zero(), "k1 = {}", rc.k1);
        assert!(rc.k2.is_zero(), "k2 = {}", rc.k2);
        assert!(rc.rad.is_zero());
    }

    #[test]
    fn round_sphere_has_ricci_seven() {
        // f = h = sin r on S⁸ at r = π/2: q = 2/π, d1 = 0, d2 = −r².
        let r = std::f64::consts::FRAC_PI_2;
        let e = point((2.0 / std::f64::consts::PI).ln(), 0.0, -r * r);
        let rc = ricci_scaled(&e, &e);
        for v in [rc.k1, rc.k2, rc.rad] {
            assert_relative_eq!(v.to_f64() / (r * r), 7.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn scale_covariance_on_sine_profile() {
        // f_c(r) = c f(r/c) leaves (ln q, d1, d2) at c·r equal to the ones
        // at r, so r²Rc is invariant; check with f = sin at two scales.
        let x = 0.8f64;
        let parts = |c: f64| {
            // at radius r = c·x: f_c(r) = c sin(x)
            let (s, co) = (x.sin(), x.cos());
            point((c * s / (c * x)).ln(), x * co / s, -x * x)
        };
        let a = ricci_scaled(&parts(1.0), &parts(1.0));
        let b = ricci_scaled(&parts(3.0), &parts(3.0));
        assert_relative_eq!(a.k1.to_f64(), b.k1.to_f64(), max_relative = 1e-12);
        assert_relative_eq!(a.k2.to_f64(), b.k2.to_f64(), max_relative = 1e-12);
        assert_relative_eq!(a.rad.to_f64(), b.rad.to_f64(), max_relative = 1e-12);
    }

    fn smoothed_profile() -> WarpProfile {
        let p = generate_params(&ParamSchedule::default()).unwrap();
        let pr = assemble_c1(&p).unwrap();
        smooth_c2(&pr, &WindowSchedule::default_for(p.n_bands)).unwrap()
    }

    #[test]
    fn band0_k1_positive_and_above_paper_bound() {
        let pr = smoothed_profile();
        let p = &pr.params;
        // Bar-profile bound on (b₀,b₁]: r²Rc|k1 ≥ 2[β₀^{-2}b₁^{2ω₀}r^{2η₁}
        //                                        − (1−η₁)(3+2ε₀−η₁)].
        for &s in &[1e-3, 0.5, 2.0, 10.0, 40.0] {
            let lam_r = p.log_b[0].add(LogNum::from_f64(s));
            let f = eval_bar(p, WarpFn::F, lam_r).unwrap();
            let h = eval_bar(p, WarpFn::H, lam_r).unwrap();
            let rc = ricci_scaled(&f, &h);
            let bound = 2.0
                * ((-2.0 * p.ln_beta[0] + 2.0 * p.w_prod[0].to_f64()
                    + 2.0 * p.eta1 * lam_r.to_f64())
                    .exp()
                    - (1.0 - p.eta1) * (3.0 + 2.0 * p.eps(0) - p.eta1));
            assert!(
                rc.k1.to_f64() >= bound && bound > 0.0,
                "bar k1 {} below bound {bound} at s={s}",
                rc.k1.to_f64()
            );
        }
        // Hatted profile at the geometric midpoint of (b₀, b₁).
        let mid = ricci_at(&pr, Region::BandFrac { band: 0, theta: 0.5 }).unwrap();
        assert!(mid.scaled.k1.is_positive());
    }

    #[test]
    fn certify_flat_core_min_is_zero() {
        // Inside [0, b₀/2] the profile is exactly flat; every component
        // vanishes identically there.
        let pr = smoothed_profile();
        let b0 = pr.params.b0();
        for j in 0..200 {
            let lam = (0.5 * b0).ln() - 6.0 + 5.9 * (j as f64 + 0.5) / 200.0;
            let s = ricci_at(&pr, Region::Cap { lam_r: lam }).unwrap();
            assert!(s.scaled.k1.is_zero());
            assert!(s.scaled.k2.is_zero());
            assert!(s.scaled.rad.is_zero());
        }
    }

    #[test]
    fn default_profile_certifies_first_four_bands() {
        let pr = smoothed_profile();
        let plan = SamplePlan { per_band: 512, ..SamplePlan::default() };
        let rep = certify_nonneg(&pr, &plan, 0.0).unwrap();
        assert!(
            rep.pass(),
            "worst: {:?}",
            rep.worst().map(|(b, m)| (b.band_index, m.clone()))
        );
    }

    #[test]
    fn oversized_eps_breaks_radial_curvature() {
        // Injecting a large ε into an even band makes h̄ strongly convex
        // there: r²Rc(n,n) = −3d2_f − 4d2_h ≈ 3η₁(1−η₁) − 4ε(1+ε) flips
        // negative once 4ε(1+ε) > 3η₁(1−η₁) — the balance the radial
        // curvature bound protects.
        let mut p = generate_params(&ParamSchedule::default()).unwrap();
        p.ln_eps[2] = 0.2f64.ln();
        let pr = assemble_c1(&p).unwrap();
        let plan = SamplePlan {
            per_band: 256,
            bands: 3,
            include_cap: false,
            window_densify: 1,
        };
        let rep = certify_nonneg(&pr, &plan, 0.0).unwrap();
        assert!(!rep.pass(), "expected a negative sample");
        let band2 = rep.bands.iter().find(|b| b.band_index == 2).unwrap();
        let rad = band2.mins.iter().find(|m| m.component == "rad").unwrap();
        assert!(rad.min_scaled < 0.0, "rad min {}", rad.min_scaled);
    }

    #[test]
    fn finite_differences_reproduce_derivatives() {
        // Central differences of f against d1, d2 at pseudo-random radii in
        // the cap and band 0, away from window edges.
        let pr = smoothed_profile();
        let b0 = pr.params.b0();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 100 {
            let u = next();
            // Parabolic cap stretch and the band-0 range where the jump
            // correction has decayed (d2 is O(1) in both); window edges
            // and the joints are excluded.
            let lam = if next() < 0.4 {
                b0.ln() + (0.55f64.ln()) * (1.0 - u) - 0.05f64 * u
            } else {
                b0.ln() + 10.0 + 20.0 * u
            };
            let dist_half = (lam - (b0.ln() - std::f64::consts::LN_2)).abs();
            let dist_edge = (lam - b0.ln()).abs();
            if dist_half < 5e-3 || dist_edge < 5e-3 {
                continue;
            }
            checked += 1;
            let reg = |l: f64| {
                if l <= b0.ln() {
                    Region::Cap { lam_r: l }
                } else {
                    Region::Band { band: 0, from_right: false, s: l - b0.ln() }
                }
            };
            let r = lam.exp();
            let hh = r * 5e-4;
            let fm = pr.eval(WarpFn::F, reg((r - hh).ln())).unwrap().value();
            let f0 = pr.eval(WarpFn::F, reg(lam)).unwrap();
            let fp = pr.eval(WarpFn::F, reg((r + hh).ln())).unwrap().value();
            let v = f0.value();
            let d1_fd = r * (fp - fm) / (2.0 * hh) / v;
            let d2_fd = r * r * (fp - 2.0 * v + fm) / (hh * hh) / v;
            assert_relative_eq!(d1_fd, f0.d1, max_relative = 1e-6);
            assert_relative_eq!(d2_fd, f0.d2, max_relative = 1e-6);
        }
    }
}
