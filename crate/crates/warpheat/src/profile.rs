//! Evaluable warp profiles: the piecewise power-law stage, the C¹ glued
//! stage with the inner cap, and the C² smoothed stage.
//!
//! Radii live in log-domain. A point is addressed by a `Region`: either the
//! cap [0, b₀] (plain f64 log-radius) or a band with a float offset from
//! the nearer edge, which keeps window-scale resolution (±1e-3 in log r)
//! even when the band is 10^300 long.
//!
//! Every returned quantity is either a `LogNum` or one of the dimensionless
//! combinations q = f/r (as ln q, saturating), d1 = r·f′/f, d2 = r²·f″/f,
//! which is exactly what the curvature formulas consume.

use crate::error::Error;
use crate::lognum::LogNum;
use crate::params::{jump_offsets, p_f, p_h, ConstructionParams, Jump, JumpData};

/// Which warp function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WarpFn {
    F,
    H,
}

/// Position of an evaluation point.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    /// Inside [0, b₀]; `lam_r` = log r as plain f64 (b₀ is small).
    Cap { lam_r: f64 },
    /// Inside band `band` = (b_band, b_{band+1}]; `s` ≥ 0 is the log-radius
    /// offset from the left or right edge.
    Band { band: usize, from_right: bool, s: f64 },
    /// Fractional position log r = (1-theta)·log b_band + theta·log b_{band+1}.
    /// Offsets like ε·(log r − log b) are carried exactly even when the band
    /// length overflows f64; used for log-uniform interior sampling.
    BandFrac { band: usize, theta: f64 },
}

/// In-band position for the internal evaluators.
#[derive(Clone, Copy, Debug)]
enum BandPos {
    FromLeft(f64),
    FromRight(f64),
    Frac(f64),
}

/// Dimensionless point data plus the log-value itself.
#[derive(Clone, Copy, Debug)]
pub struct PointEval {
    /// ln(f/r); saturates to ±∞ far out where f/r leaves f64 range.
    pub ln_q: f64,
    /// r f′/f.
    pub d1: f64,
    /// r² f″/f.
    pub d2: f64,
    /// Λf = ln f as a LogNum.
    pub lam: LogNum,
}

impl PointEval {
    /// f as f64 (may overflow to ∞ far out).
    pub fn value(&self) -> f64 {
        self.lam.to_f64().exp()
    }
}

/// Smoothing joint: the cap has second-derivative jumps at b₀/2 and b₀,
/// each band joint b_k (k ≥ 1) has one as well.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Joint {
    CapHalf,
    CapEdge,
    Band(usize),
}

/// Half-widths (in log-radius) for the smoothing windows.
#[derive(Clone, Debug)]
pub struct WindowSchedule {
    pub widths: Vec<(Joint, f64)>,
}

impl WindowSchedule {
    /// Default: half-width min(1e-3, 2^{-i}) at joint i (absolute in log r,
    /// which keeps the linear-in-r reinterpolation a small perturbation).
    pub fn default_for(n_bands: usize) -> Self {
        let mut widths = vec![(Joint::CapHalf, 1e-3), (Joint::CapEdge, 1e-3)];
        for k in 1..n_bands {
            widths.push((Joint::Band(k), (1e-3f64).min(0.5f64.powi(k as i32))));
        }
        WindowSchedule { widths }
    }

    /// All-zero widths: smoothing becomes the identity.
    pub fn zero_for(n_bands: usize) -> Self {
        let mut s = Self::default_for(n_bands);
        for w in &mut s.widths {
            w.1 = 0.0;
        }
        s
    }
}

/// Cubic reconstruction of one warp function inside a window, in units of
/// the window's left edge: F(y) = f(r_le·y)/f(r_le), y = r/r_le.
#[derive(Clone, Copy, Debug)]
struct WindowPoly {
    /// Λ of the (continuous) profile value at the joint.
    lam_joint: LogNum,
    /// ln(f(b)/b) at the joint (saturating f64).
    ln_q_joint: f64,
    /// f(le)/f(joint), f(re)/f(joint).
    rl: f64,
    rr: f64,
    /// F′(1).
    d1l: f64,
    /// F″(1) and the linear slope of F″ in (y-1).
    a2: f64,
    b3: f64,
}

#[derive(Clone, Copy, Debug)]
struct Window {
    joint: Joint,
    w: f64,
    f: WindowPoly,
    h: WindowPoly,
}

/// The glued (and optionally smoothed) warp profile.
#[derive(Clone, Debug)]
pub struct WarpProfile {
    pub params: ConstructionParams,
    pub jumps: JumpData,
    /// Cap constants of the inner parabolic caps.
    pub c1: f64,
    pub c2: f64,
    // Λ of f̄/h̄ at each band's left and right edges.
    lam_f_left: Vec<LogNum>,
    lam_f_right: Vec<LogNum>,
    lam_h_left: Vec<LogNum>,
    lam_h_right: Vec<LogNum>,
    // tele[a][k] = Λm(k) − Λm(a) ≥ 0 and the right-edge variants.
    tele_f: Vec<Vec<LogNum>>,
    tele_h: Vec<Vec<LogNum>>,
    tele_f_right: Vec<Vec<LogNum>>,
    tele_h_right: Vec<Vec<LogNum>>,
    windows: Vec<Window>,
}

/// Cap constants and evaluators on [0, b₀] (the `inner_cap` operation).
pub struct InnerCap {
    pub c1: f64,
    pub c2: f64,
    pub b0: f64,
}

impl InnerCap {
    /// Value/derivatives of the cap function with constant c at radius r.
    fn eval(c: f64, b0: f64, r: f64) -> (f64, f64, f64) {
        if r <= 0.5 * b0 {
            (r, 1.0, 0.0)
        } else {
            let d = r - 0.5 * b0;
            (r - c * d * d, 1.0 - 2.0 * c * d, -2.0 * c)
        }
    }

    pub fn eval_f(&self, r: f64) -> (f64, f64, f64) {
        Self::eval(self.c1, self.b0, r)
    }

    pub fn eval_h(&self, r: f64) -> (f64, f64, f64) {
        Self::eval(self.c2, self.b0, r)
    }
}

/// Compute the cap constants: C₁ = (1/b₀)[1 − β₀b₁^{-ω₀}b₀^{-η₁}(1−η₁)],
/// C₂ = C₁/3 (equivalent to the cap-matching constraint), with a
/// cross-check against C₂'s own closed form.
pub fn inner_cap(params: &ConstructionParams) -> Result<InnerCap, Error> {
    let b0 = params.b0();
    let qf = params.cap_qf();
    let c1 = (1.0 - qf * (1.0 - params.eta1)) / b0;
    if c1 <= 0.0 {
        return Err(Error::NonpositiveCap(format!("C1 = {c1}")));
    }
    let c2 = c1 / 3.0;
    let c2_direct = (1.0 - params.cap_qh() * (1.0 + params.eps(0))) / b0;
    if c2_direct <= 0.0 {
        return Err(Error::NonpositiveCap(format!("C2 = {c2_direct}")));
    }
    if ((c2 - c2_direct) / c2).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "cap matching inconsistent: C1/3 = {c2} vs direct C2 = {c2_direct}"
        )));
    }
    Ok(InnerCap { c1, c2, b0 })
}

fn locate_in_bands(params: &ConstructionParams, lam_r: LogNum) -> Region {
    // Band k = (b_k, b_{k+1}]; pick the closer edge for the offset.
    let mut lo = 0usize;
    let mut hi = params.n_bands - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if lam_r > params.log_b[mid + 1] {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let band = lo;
    let sl = lam_r.sub(params.log_b[band]);
    let sr = params.log_b[band + 1].sub(lam_r);
    if sl <= sr {
        Region::Band { band, from_right: false, s: sl.to_f64().max(0.0) }
    } else {
        Region::Band { band, from_right: true, s: sr.to_f64().max(0.0) }
    }
}

/// Evaluate the piecewise power-law stage (no cap, no offsets, no windows).
/// Requires log r > log b₀.
pub fn eval_bar(
    params: &ConstructionParams,
    which: WarpFn,
    lam_r: LogNum,
) -> Result<PointEval, Error> {
    if lam_r <= params.log_b[0] {
        return Err(Error::OutOfRange(format!(
            "eval_bar needs log r > log b0 = {}",
            params.log_b[0]
        )));
    }
    if lam_r > params.log_b[params.n_bands] {
        return Err(Error::OutOfRange("beyond outermost band".into()));
    }
    let (band, from_right, s) = match locate_in_bands(params, lam_r) {
        Region::Band { band, from_right, s } => (band, from_right, s),
        _ => unreachable!(),
    };
    let p = match which {
        WarpFn::F => p_f(params, band),
        WarpFn::H => p_h(params, band),
    };
    let lam_left = match which {
        WarpFn::F => params.lam_f_left(band),
        WarpFn::H => params.lam_h_left(band),
    };
    let dl = params.log_b[band + 1].sub(params.log_b[band]);
    let lam_right = lam_left.add(dl.scale(p));
    let (lam, ln_q) = if from_right {
        (
            lam_right.sub(LogNum::from_f64(p * s)),
            lam_right.sub(params.log_b[band + 1]).to_f64() + (1.0 - p) * s,
        )
    } else {
        (
            lam_left.add(LogNum::from_f64(p * s)),
            lam_left.sub(params.log_b[band]).to_f64() + (p - 1.0) * s,
        )
    };
    Ok(PointEval {
        ln_q,
        d1: p,
        d2: p * (p - 1.0),
        lam,
    })
}

impl WarpProfile {
    /// Λ of the outer domain boundary b_N.
    pub fn domain_max(&self) -> LogNum {
        self.params.log_b[self.params.n_bands]
    }

    pub fn n_bands(&self) -> usize {
        self.params.n_bands
    }

    /// Locate a log-radius. Resolution near distant band edges is limited
    /// by f64; samplers that need window-scale precision construct `Region`
    /// values directly.
    pub fn locate(&self, lam_r: LogNum) -> Result<Region, Error> {
        if lam_r > self.domain_max() {
            return Err(Error::OutOfRange("beyond outermost band".into()));
        }
        if lam_r <= self.params.log_b[0] {
            return Ok(Region::Cap { lam_r: lam_r.to_f64() });
        }
        Ok(locate_in_bands(&self.params, lam_r))
    }

    /// Λr of a region.
    pub fn lam_r(&self, region: Region) -> LogNum {
        match region {
            Region::Cap { lam_r } => LogNum::from_f64(lam_r),
            Region::Band { band, from_right, s } => {
                if from_right {
                    self.params.log_b[band + 1].sub(LogNum::from_f64(s))
                } else {
                    self.params.log_b[band].add(LogNum::from_f64(s))
                }
            }
            Region::BandFrac { band, theta } => {
                let dl = self.params.log_b[band + 1].sub(self.params.log_b[band]);
                self.params.log_b[band].add(dl.scale(theta))
            }
        }
    }

    /// Cumulative jump ratio ζ_band/f̄(r) (resp. ξ/h̄) at a band position.
    fn jump_ratio(&self, which: WarpFn, band: usize, pos: BandPos) -> f64 {
        let (jumps, tele, tele_right): (&[Jump], _, _) = match which {
            WarpFn::F => (&self.jumps.tau[..], &self.tele_f, &self.tele_f_right),
            WarpFn::H => (&self.jumps.delta[..], &self.tele_h, &self.tele_h_right),
        };
        let p = match which {
            WarpFn::F => p_f(&self.params, band),
            WarpFn::H => p_h(&self.params, band),
        };
        let mut z = 0.0;
        for jump in jumps.iter().take(band + 1) {
            let expo = match pos {
                BandPos::FromLeft(s) => {
                    LogNum::from_f64(jump.ln_ratio - p * s).sub(tele[jump.anchor][band])
                }
                BandPos::FromRight(s) => {
                    LogNum::from_f64(jump.ln_ratio + p * s).sub(tele_right[jump.anchor][band])
                }
                BandPos::Frac(theta) => {
                    let dl = self.params.log_b[band + 1].sub(self.params.log_b[band]);
                    LogNum::from_f64(jump.ln_ratio)
                        .sub(tele[jump.anchor][band])
                        .sub(dl.scale(theta * p))
                }
            };
            z += f64::from(jump.sign) * expo.to_f64().exp();
        }
        z
    }

    /// Evaluate the glued profile ignoring smoothing windows.
    pub fn eval_unsmoothed(&self, which: WarpFn, region: Region) -> Result<PointEval, Error> {
        match region {
            Region::Cap { lam_r } => {
                let r = lam_r.exp();
                let b0 = self.params.b0();
                if !(r <= b0 * (1.0 + 1e-12)) {
                    return Err(Error::OutOfRange("cap region ends at b0".into()));
                }
                let c = match which {
                    WarpFn::F => self.c1,
                    WarpFn::H => self.c2,
                };
                let (v, d, dd) = InnerCap::eval(c, b0, r);
                Ok(PointEval {
                    ln_q: (v / r).ln(),
                    d1: r * d / v,
                    d2: r * r * dd / v,
                    lam: LogNum::from_f64(v.ln()),
                })
            }
            Region::Band { band, from_right, s } => {
                if band >= self.params.n_bands || s < 0.0 {
                    return Err(Error::OutOfRange(format!("band {band} offset {s}")));
                }
                let pos = if from_right { BandPos::FromRight(s) } else { BandPos::FromLeft(s) };
                self.eval_band(which, band, pos)
            }
            Region::BandFrac { band, theta } => {
                if band >= self.params.n_bands || !(0.0..=1.0).contains(&theta) {
                    return Err(Error::OutOfRange(format!("band {band} theta {theta}")));
                }
                self.eval_band(which, band, BandPos::Frac(theta))
            }
        }
    }

    fn eval_band(&self, which: WarpFn, band: usize, pos: BandPos) -> Result<PointEval, Error> {
        let p = match which {
            WarpFn::F => p_f(&self.params, band),
            WarpFn::H => p_h(&self.params, band),
        };
        let (lam_left, lam_right) = match which {
            WarpFn::F => (self.lam_f_left[band], self.lam_f_right[band]),
            WarpFn::H => (self.lam_h_left[band], self.lam_h_right[band]),
        };
        let z = self.jump_ratio(which, band, pos);
        if z <= -1.0 {
            return Err(Error::Domain(format!("glued profile nonpositive in band {band}")));
        }
        let corr = z.ln_1p();
        let (lam_bar, ln_q_bar) = match pos {
            BandPos::FromRight(s) => (
                lam_right.sub(LogNum::from_f64(p * s)),
                lam_right.sub(self.params.log_b[band + 1]).to_f64() + (1.0 - p) * s,
            ),
            BandPos::FromLeft(s) => (
                lam_left.add(LogNum::from_f64(p * s)),
                lam_left.sub(self.params.log_b[band]).to_f64() + (p - 1.0) * s,
            ),
            BandPos::Frac(theta) => {
                let dl = self.params.log_b[band + 1].sub(self.params.log_b[band]);
                let off = dl.scale(theta);
                (
                    lam_left.add(off.scale(p)),
                    lam_left.sub(self.params.log_b[band]).to_f64()
                        + off.scale(p - 1.0).to_f64(),
                )
            }
        };
        Ok(PointEval {
            ln_q: ln_q_bar + corr,
            d1: p / (1.0 + z),
            d2: p * (p - 1.0) / (1.0 + z),
            lam: lam_bar.add(LogNum::from_f64(corr)),
        })
    }

    /// Offset of `region` from a joint position, if it falls inside that
    /// joint's window.
    fn window_offset(&self, window: &Window, region: Region) -> Option<f64> {
        let w = window.w;
        if w <= 0.0 {
            return None;
        }
        let l0 = self.params.log_b[0].to_f64();
        match (window.joint, region) {
            (Joint::CapHalf, Region::Cap { lam_r }) => {
                let u = lam_r - (l0 - std::f64::consts::LN_2);
                (u.abs() < w).then_some(u)
            }
            (Joint::CapEdge, Region::Cap { lam_r }) => {
                let u = lam_r - l0;
                (u > -w).then_some(u.min(0.0))
            }
            (Joint::CapEdge, Region::Band { band: 0, from_right: false, s }) => {
                (s < w).then_some(s)
            }
            (Joint::Band(k), Region::Band { band, from_right: false, s }) if band == k => {
                (s < w).then_some(s)
            }
            (Joint::Band(k), Region::Band { band, from_right: true, s }) if band + 1 == k => {
                (s < w).then_some(-s)
            }
            _ => None,
        }
    }

    /// Evaluate the (smoothed) profile.
    pub fn eval(&self, which: WarpFn, region: Region) -> Result<PointEval, Error> {
        for window in &self.windows {
            if let Some(u) = self.window_offset(window, region) {
                let poly = match which {
                    WarpFn::F => &window.f,
                    WarpFn::H => &window.h,
                };
                return Ok(eval_window(poly, window.w, u));
            }
        }
        self.eval_unsmoothed(which, region)
    }

    /// Evaluate both warp functions at once.
    pub fn eval_pair(&self, region: Region) -> Result<(PointEval, PointEval), Error> {
        Ok((self.eval(WarpFn::F, region)?, self.eval(WarpFn::H, region)?))
    }

    /// Joints carrying smoothing windows, with their half-widths.
    pub fn window_joints(&self) -> Vec<(Joint, f64)> {
        self.windows.iter().map(|w| (w.joint, w.w)).collect()
    }
}

fn eval_window(poly: &WindowPoly, w: f64, u: f64) -> PointEval {
    let sy = (u + w).exp_m1(); // y - 1, y = r/r_le
    let y = 1.0 + sy;
    let fv = 1.0 + poly.d1l * sy + 0.5 * poly.a2 * sy * sy + poly.b3 * sy * sy * sy / 6.0;
    let fp = poly.d1l + poly.a2 * sy + 0.5 * poly.b3 * sy * sy;
    let fpp = poly.a2 + poly.b3 * sy;
    let ln_scaled = fv.ln() + poly.rl.ln();
    PointEval {
        ln_q: ln_scaled + poly.ln_q_joint - u,
        d1: y * fp / fv,
        d2: y * y * fpp / fv,
        lam: poly.lam_joint.add(LogNum::from_f64(ln_scaled)),
    }
}

/// Glue the cap and the jump-corrected bands into a C¹ profile (no
/// smoothing windows yet).
pub fn assemble_c1(params: &ConstructionParams) -> Result<WarpProfile, Error> {
    let cap = inner_cap(params)?;
    let jumps = jump_offsets(params);
    let n = params.n_bands;

    let mut tele_f = vec![vec![LogNum::ZERO; n]; n];
    let mut tele_h = vec![vec![LogNum::ZERO; n]; n];
    let mut tele_f_right = vec![vec![LogNum::ZERO; n]; n];
    let mut tele_h_right = vec![vec![LogNum::ZERO; n]; n];
    for a in 0..n {
        for k in a..n {
            tele_f[a][k] = params.tele_f(a, k);
            tele_h[a][k] = params.tele_h(a, k);
            let dl = params.log_b[k + 1].sub(params.log_b[k]);
            tele_f_right[a][k] = tele_f[a][k].add(dl.scale(p_f(params, k)));
            tele_h_right[a][k] = tele_h[a][k].add(dl.scale(p_h(params, k)));
        }
    }
    let lam_f_left: Vec<LogNum> = (0..n).map(|k| params.lam_f_left(k)).collect();
    let lam_h_left: Vec<LogNum> = (0..n).map(|k| params.lam_h_left(k)).collect();
    let lam_f_right: Vec<LogNum> = (0..n)
        .map(|k| {
            let dl = params.log_b[k + 1].sub(params.log_b[k]);
            lam_f_left[k].add(dl.scale(p_f(params, k)))
        })
        .collect();
    let lam_h_right: Vec<LogNum> = (0..n)
        .map(|k| {
            let dl = params.log_b[k + 1].sub(params.log_b[k]);
            lam_h_left[k].add(dl.scale(p_h(params, k)))
        })
        .collect();

    Ok(WarpProfile {
        params: params.clone(),
        jumps,
        c1: cap.c1,
        c2: cap.c2,
        lam_f_left,
        lam_f_right,
        lam_h_left,
        lam_h_right,
        tele_f,
        tele_h,
        tele_f_right,
        tele_h_right,
        windows: Vec::new(),
    })
}

/// Relative continuity residuals of the glued profile at one joint,
/// computed through exactly cancelled band-edge ratios.
#[derive(Clone, Copy, Debug)]
pub struct JointResidual {
    pub joint: Joint,
    /// |f(b⁺)/f(b⁻) − 1| and the same for h.
    pub value_f: f64,
    pub value_h: f64,
    /// |f′(b⁺)/f′(b⁻) − 1| and the same for h.
    pub deriv_f: f64,
    pub deriv_h: f64,
}

/// C⁰/C¹ residuals at every joint b₀..b_{n-1}.
pub fn c1_residuals(profile: &WarpProfile) -> Result<Vec<JointResidual>, Error> {
    let params = &profile.params;
    let n = params.n_bands;
    let mut out = Vec::with_capacity(n);

    // Joint b₀: cap against band 0 (all quantities are f64-scale there;
    // compare f/r and f′ = d1·f/r via ln q).
    {
        let b0 = params.b0();
        let cap_f = profile.eval_unsmoothed(WarpFn::F, Region::Cap { lam_r: b0.ln() })?;
        let cap_h = profile.eval_unsmoothed(WarpFn::H, Region::Cap { lam_r: b0.ln() })?;
        let band_f = profile
            .eval_unsmoothed(WarpFn::F, Region::Band { band: 0, from_right: false, s: 0.0 })?;
        let band_h = profile
            .eval_unsmoothed(WarpFn::H, Region::Band { band: 0, from_right: false, s: 0.0 })?;
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        out.push(JointResidual {
            joint: Joint::CapEdge,
            value_f: rel(band_f.ln_q.exp(), cap_f.ln_q.exp()),
            value_h: rel(band_h.ln_q.exp(), cap_h.ln_q.exp()),
            deriv_f: rel(band_f.d1 * band_f.ln_q.exp(), cap_f.d1 * cap_f.ln_q.exp()),
            deriv_h: rel(band_h.d1 * band_h.ln_q.exp(), cap_h.d1 * cap_h.ln_q.exp()),
        });
    }

    // Band joints b_k, k ≥ 1: with m = f̄(b_k⁺) the derivative matching
    // gives f̄(b_k⁻) = m·p_k/p_{k-1}, so
    // f̂(b⁺)/f̂(b⁻) = (1 + ζ_k/m)/(p_k/p_{k-1} + ζ_{k-1}/m), while
    // f̂′(b⁺)/f̂′(b⁻) = (p_k/p_{k-1})·(1+ζ⁻-ratio)/(1+ζ⁺-ratio)·(f̂⁺/f̂⁻).
    // The two ζ ratios are computed through independent telescopes (left vs
    // right edge), so the residuals measure implementation consistency.
    for k in 1..n {
        let res = |which: WarpFn| -> (f64, f64) {
            let (p_prev, p_cur) = match which {
                WarpFn::F => (p_f(params, k - 1), p_f(params, k)),
                WarpFn::H => (p_h(params, k - 1), p_h(params, k)),
            };
            // ζ_k / f̄_k(b_k⁺)
            let z_plus = profile.jump_ratio(which, k, BandPos::FromLeft(0.0));
            // ζ_{k-1} / f̄_{k-1}(b_k⁻) through the right-edge telescope
            let z_minus = profile.jump_ratio(which, k - 1, BandPos::FromRight(0.0));
            let value_ratio = (1.0 + z_plus) / ((p_cur / p_prev) * (1.0 + z_minus));
            let deriv_ratio = (p_cur / p_prev) * (1.0 + z_minus) / (1.0 + z_plus) * value_ratio;
            ((value_ratio - 1.0).abs(), (deriv_ratio - 1.0).abs())
        };
        let (vf, df) = res(WarpFn::F);
        let (vh, dh) = res(WarpFn::H);
        out.push(JointResidual {
            joint: Joint::Band(k),
            value_f: vf,
            value_h: vh,
            deriv_f: df,
            deriv_h: dh,
        });
    }
    Ok(out)
}

/// Replace f″, h″ inside each window by their linear interpolant and
/// reintegrate from the window's left edge; outside windows the profile is
/// untouched.
pub fn smooth_c2(profile: &WarpProfile, schedule: &WindowSchedule) -> Result<WarpProfile, Error> {
    let params = &profile.params;
    let l0 = params.log_b[0].to_f64();
    let mut entries: Vec<(Joint, f64)> = schedule
        .widths
        .iter()
        .copied()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    entries.sort_by_key(|e| e.0);

    let pos = |j: Joint| -> LogNum {
        match j {
            Joint::CapHalf => LogNum::from_f64(l0 - std::f64::consts::LN_2),
            Joint::CapEdge => params.log_b[0],
            Joint::Band(k) => params.log_b[k],
        }
    };
    for (idx, &(joint, w)) in entries.iter().enumerate() {
        if let Joint::Band(k) = joint {
            if k == 0 || k >= params.n_bands {
                return Err(Error::OverlappingWindow(k));
            }
        }
        if w >= 0.5 * std::f64::consts::LN_2 {
            return Err(Error::OverlappingWindow(idx));
        }
        if idx + 1 < entries.len() {
            let gap = pos(entries[idx + 1].0).sub(pos(joint)).to_f64();
            if !(gap > w + entries[idx + 1].1) {
                return Err(Error::OverlappingWindow(idx));
            }
        }
    }

    let mut windows = Vec::with_capacity(entries.len());
    for &(joint, w) in &entries {
        let build = |which: WarpFn| -> Result<WindowPoly, Error> {
            let (le, re, joint_minus) = match joint {
                Joint::CapHalf => (
                    Region::Cap { lam_r: l0 - std::f64::consts::LN_2 - w },
                    Region::Cap { lam_r: l0 - std::f64::consts::LN_2 + w },
                    Region::Cap { lam_r: l0 - std::f64::consts::LN_2 },
                ),
                Joint::CapEdge => (
                    Region::Cap { lam_r: l0 - w },
                    Region::Band { band: 0, from_right: false, s: w },
                    Region::Cap { lam_r: l0 },
                ),
                Joint::Band(k) => (
                    Region::Band { band: k - 1, from_right: true, s: w },
                    Region::Band { band: k, from_right: false, s: w },
                    Region::Band { band: k - 1, from_right: true, s: 0.0 },
                ),
            };
            let e_le = profile.eval_unsmoothed(which, le)?;
            let e_re = profile.eval_unsmoothed(which, re)?;
            let e_j = profile.eval_unsmoothed(which, joint_minus)?;
            // f(le)/f(joint) = e^{-p·w}·(1+z_le)/(1+z_joint) where 1+z = p/d1
            // on power-law bands; the d1-ratio form survives the saturation
            // of ln q far out. Cap joints have finite ln q and use it.
            let (rl, rr) = match joint {
                Joint::CapHalf | Joint::CapEdge => (
                    (e_le.ln_q - e_j.ln_q - w).exp(),
                    (e_re.ln_q - e_j.ln_q + w).exp(),
                ),
                Joint::Band(k) => {
                    let (p_prev, p_cur) = match which {
                        WarpFn::F => (p_f(params, k - 1), p_f(params, k)),
                        WarpFn::H => (p_h(params, k - 1), p_h(params, k)),
                    };
                    let e_j_plus = profile
                        .eval_unsmoothed(which, Region::Band { band: k, from_right: false, s: 0.0 })?;
                    let _ = p_prev;
                    let rl = (-e_le.d1 * 0.0 - w * e_le.d1 / e_le.d1).exp() * e_j.d1 / e_le.d1;
                    let rr = (p_cur * w).exp() * e_j_plus.d1 / e_re.d1;
                    let rl = (-w * (e_le.d1 * 0.0 + 1.0)).exp() * rl / rl; // placeholder
                    let _ = rl;
                    (
                        (-p_prev * w).exp() * (e_j.d1 / e_le.d1),
                        (p_cur * w).exp() * (e_j_plus.d1 / e_re.d1),
                    )
                }
            };
            let d2_target = e_re.d2 * (rr / rl) * (-4.0 * w).exp();
            let sy_max = (2.0 * w).exp_m1();
            Ok(WindowPoly {
                lam_joint: e_j.lam,
                ln_q_joint: e_j.ln_q,
                rl,
                rr,
                d1l: e_le.d1,
                a2: e_le.d2,
                b3: (d2_target - e_le.d2) / sy_max,
            })
        };
        windows.push(Window {
            joint,
            w,
            f: build(WarpFn::F)?,
            h: build(WarpFn::H)?,
        });
    }

    let mut out = profile.clone();
    out.windows = windows;
    Ok(out)
}
