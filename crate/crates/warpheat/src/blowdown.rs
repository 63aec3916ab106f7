//! Blow-down analysis: rescaled volume profiles V(√t·r)/V(√t), fitted
//! limit exponents along time sequences, the radial-drift consistency
//! criterion, and the oscillating-diagonal demonstration.
//!
//! The glued warp profile has volume exponent 8−3η₁+4ε on even bands and
//! 8−3η₂−4ε on odd bands, across radii that are doubly exponential; all of
//! its volume arithmetic therefore runs in reduced per-band form, anchored
//! at band edges where the dimensionless factors v_k = V(b_k)(m_k+1)/(A b_k)
//! stay O(1). Surrogate and cone spaces go through plain f64.

use crate::error::Error;
use crate::lognum::LogNum;
use crate::params::{p_f, p_h, ConstructionParams};
use crate::profile::{Region, WarpProfile};
use crate::radial::{cone_constant, RadialSpace};
use crate::solver::{normalized_diag, SolverConfig};

/// Fiber volume constant of the product metric (S³ × rescaled S⁴).
const FIBER_VOLUME: f64 = 32.46969701133253; // π⁴/3

/// A sequence of blow-down times, stored as log t.
#[derive(Clone, Debug)]
pub struct BlowdownSequence {
    pub label: String,
    pub log_t: Vec<LogNum>,
}

impl BlowdownSequence {
    pub fn from_log10(label: &str, log10_t: &[f64]) -> Self {
        BlowdownSequence {
            label: label.to_string(),
            log_t: log10_t
                .iter()
                .map(|l| LogNum::from_f64(l * std::f64::consts::LN_10))
                .collect(),
        }
    }
}

/// Volume data of the glued warp profile, reduced to per-band anchors.
#[derive(Clone, Debug)]
pub struct WarpVolume {
    /// Band area exponents m_k = 3p_f + 4p_h (A ~ r^{m_k} in band k).
    m: Vec<f64>,
    /// v_k = V(b_k)·(m_k+1)/(A(b_k⁺)·b_k), O(1).
    v: Vec<f64>,
    /// Λ of A at each band's left edge (LogNum; includes the fiber volume).
    lam_a_left: Vec<LogNum>,
    /// Band boundaries (log radii).
    log_b: Vec<LogNum>,
    /// Band lengths in log r, saturating f64.
    dl: Vec<f64>,
}

impl WarpVolume {
    pub fn new(profile: &WarpProfile) -> Result<Self, Error> {
        let params = &profile.params;
        let n = params.n_bands;
        let b0 = params.b0();

        // Cap volume by Simpson on [0, b₀].
        let cap = crate::profile::inner_cap(params)?;
        let integrand = |r: f64| {
            let (f, _, _) = cap.eval_f(r);
            let (h, _, _) = cap.eval_h(r);
            FIBER_VOLUME * f.powi(3) * h.powi(4)
        };
        let steps = 4000;
        let mut v_cap = 0.0;
        for i in 0..steps {
            let a = b0 * i as f64 / steps as f64;
            let b = b0 * (i + 1) as f64 / steps as f64;
            v_cap += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
        }

        let mut m = Vec::with_capacity(n);
        let mut lam_a_left = Vec::with_capacity(n);
        for k in 0..n {
            m.push(3.0 * p_f(params, k) + 4.0 * p_h(params, k));
            let (f, h) = profile.eval_pair(Region::Band { band: k, from_right: false, s: 0.0 })?;
            lam_a_left.push(
                f.lam
                    .scale(3.0)
                    .add(h.lam.scale(4.0))
                    .add(LogNum::from_f64(FIBER_VOLUME.ln())),
            );
        }

        let dl: Vec<f64> = (0..n)
            .map(|k| params.log_b[k + 1].sub(params.log_b[k]).to_f64())
            .collect();

        // v₀ anchored at the cap volume, then the edge recursion
        // v_{k+1} = (m_{k+1}+1)/(m_k+1)·[1 − (1−v_k)e^{-(m_k+1)ΔL_k}].
        let mut v = Vec::with_capacity(n);
        let a_b0 = lam_a_left[0].to_f64().exp();
        v.push(v_cap * (m[0] + 1.0) / (a_b0 * b0));
        for k in 0..n - 1 {
            let decay = (-(m[k] + 1.0) * dl[k]).exp();
            v.push((m[k + 1] + 1.0) / (m[k] + 1.0) * (1.0 - (1.0 - v[k]) * decay));
        }

        Ok(WarpVolume {
            m,
            v,
            lam_a_left,
            log_b: params.log_b.clone(),
            dl,
        })
    }

    fn n_bands(&self) -> usize {
        self.m.len()
    }

    /// Band index of a log radius (must lie beyond b₀).
    fn band_of(&self, lam_r: LogNum) -> Result<usize, Error> {
        if lam_r <= self.log_b[0] || lam_r > self.log_b[self.n_bands()] {
            return Err(Error::OutOfRange(format!(
                "blow-down radius {lam_r} outside the band range"
            )));
        }
        let mut lo = 0usize;
        let mut hi = self.n_bands() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if lam_r > self.log_b[mid + 1] {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// u-factor 1 − (1−v_k)e^{-(m_k+1)s} of the in-band volume integral.
    fn u_factor(&self, band: usize, s: f64) -> f64 {
        1.0 - (1.0 - self.v[band]) * (-(self.m[band] + 1.0) * s).exp()
    }

    /// ln V at log radius base + dr for base in band `k` at offset `s` ≥ 0
    /// from the left edge, relative to ln V(base). |dr| must be small
    /// against band lengths (at most one joint is crossed).
    fn ln_v_ratio_from(&self, band: usize, s: f64, dr: f64) -> Result<f64, Error> {
        let sx = s + dr;
        if sx >= 0.0 && sx <= self.dl[band] {
            // same band
            let m1 = self.m[band] + 1.0;
            return Ok(m1 * dr + (self.u_factor(band, sx) / self.u_factor(band, s)).ln());
        }
        if sx > self.dl[band] {
            // crosses into band+1
            if band + 1 >= self.n_bands() {
                return Err(Error::OutOfRange("rescaled radius beyond outer band".into()));
            }
            let to_edge = self.dl[band] - s;
            let base = self.ln_v_ratio_from(band, s, to_edge)?;
            let s2 = sx - self.dl[band];
            let m2 = self.m[band + 1] + 1.0;
            let tail = ((m2 * s2).exp_m1() / self.v[band + 1]).ln_1p();
            return Ok(base + tail);
        }
        // crosses into band-1
        if band == 0 {
            return Err(Error::OutOfRange("rescaled radius below b0".into()));
        }
        // V(x)/V(b_band): x in band-1 at offset s₂ below the edge.
        let s2 = -sx;
        let m0 = self.m[band - 1] + 1.0;
        let down = -((m0 * s2).exp_m1() / self.v[band]).ln_1p();
        // adjust: V(b_band)/V(y) = −ln_v_ratio from y to the edge
        let to_edge = -s; // dr that lands exactly on the left edge
        let m1 = self.m[band] + 1.0;
        let base = m1 * to_edge + (self.u_factor(band, 0.0) / self.u_factor(band, s)).ln();
        Ok(base + down)
    }
}

/// A volume evaluator: machine-scale radial spaces or the warp profile.
pub enum VolumeModel {
    Radial(RadialSpace),
    Warp(WarpVolume),
}

impl VolumeModel {
    /// ln [V(√t·r)/V(√t)] with r given as ln r ∈ [−ln 4, ln 4]-ish.
    pub fn ln_rescaled(&self, log_t: LogNum, ln_r: f64) -> Result<f64, Error> {
        match self {
            VolumeModel::Radial(space) => {
                let st = (0.5 * log_t.to_f64()).exp();
                if !(st > 0.0 && st.is_finite()) {
                    return Err(Error::OutOfRange("time outside f64 for this space".into()));
                }
                let x = st * ln_r.exp();
                let (va, vb) = (space.volume(x), space.volume(st));
                if !(va > 0.0 && vb > 0.0) {
                    return Err(Error::OutOfRange("volume vanished".into()));
                }
                Ok((va / vb).ln())
            }
            VolumeModel::Warp(w) => {
                let lam_sqrt = log_t.scale(0.5);
                let band = w.band_of(lam_sqrt)?;
                let s = lam_sqrt.sub(w.log_b[band]).to_f64();
                w.ln_v_ratio_from(band, s, ln_r)
            }
        }
    }

    /// Bishop–Gromov style ratio V(r)/rⁿ (f64-scale spaces only return
    /// finite values; the warp profile saturates to 0 far out).
    pub fn volume_ratio(&self, n: f64, r: f64) -> Result<f64, Error> {
        if !(r > 0.0) {
            return Err(Error::Domain("volume ratio needs r > 0".into()));
        }
        match self {
            VolumeModel::Radial(space) => Ok(space.volume(r) / r.powf(n)),
            VolumeModel::Warp(w) => {
                let lam_r = LogNum::from_f64(r.ln());
                let band = w.band_of(lam_r)?;
                let s = lam_r.sub(w.log_b[band]).to_f64();
                let m1 = w.m[band] + 1.0;
                let ln_v = w.lam_a_left[band].to_f64() + m1 * s + w.log_b[band].to_f64()
                    - m1.ln()
                    + w.u_factor(band, s).ln();
                Ok((ln_v - n * r.ln()).exp())
            }
        }
    }
}

/// Least-squares slope of ln V(√t·r)/V(√t) against ln r.
pub fn limit_exponent(
    model: &VolumeModel,
    seq: &BlowdownSequence,
    r_samples: &[f64],
) -> Result<Vec<f64>, Error> {
    if r_samples.iter().any(|&r| !(0.25..=4.0).contains(&r)) {
        return Err(Error::Domain("r samples must lie in [0.25, 4]".into()));
    }
    let mut out = Vec::with_capacity(seq.log_t.len());
    for &log_t in &seq.log_t {
        let xs: Vec<f64> = r_samples.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| model.ln_rescaled(log_t, x))
            .collect::<Result<_, _>>()?;
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        out.push(sxy / sxx);
    }
    Ok(out)
}

/// Default 33 log-uniform fit radii in [0.25, 4].
pub fn default_r_samples() -> Vec<f64> {
    (0..33)
        .map(|i| (0.25f64.ln() + (4.0f64 / 0.25).ln() * i as f64 / 32.0).exp())
        .collect()
}

/// A candidate limit volume profile for the consistency criterion.
#[derive(Clone, Debug)]
pub enum LimitProfile {
    /// c·r^α.
    PowerLaw { alpha: f64, coeff: f64 },
}

impl LimitProfile {
    fn d1(&self, r: f64) -> f64 {
        match self {
            LimitProfile::PowerLaw { alpha, coeff } => coeff * alpha * r.powf(alpha - 1.0),
        }
    }
}

/// Consistency verdict: the two rescaled limits produce the same radial
/// heat operator iff h″/h′ agree, i.e. ln h′ − ln h̃′ is constant in r.
#[derive(Clone, Copy, Debug)]
pub struct ConsistencyResult {
    pub consistent: bool,
    pub residual: f64,
}

pub fn consistency_check(
    h: &LimitProfile,
    h_tilde: &LimitProfile,
    r_samples: &[f64],
) -> Result<ConsistencyResult, Error> {
    let mut g = Vec::with_capacity(r_samples.len());
    for &r in r_samples {
        let (a, b) = (h.d1(r), h_tilde.d1(r));
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::DegenerateProfile(format!(
                "nonpositive derivative at r = {r}"
            )));
        }
        g.push(a.ln() - b.ln());
    }
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let residual = g.iter().map(|x| (x - mean).abs()).fold(0.0f64, f64::max);
    Ok(ConsistencyResult {
        consistent: residual < 1e-6,
        residual,
    })
}

/// The §9 blow-down sequences: log tᵢ = 2(1−ε_{2i})·log b_{2i+1} and
/// log t̃ᵢ = 2(1−ε_{2i+1})·log b_{2i+2}.
pub fn example_sequences(
    params: &ConstructionParams,
) -> (BlowdownSequence, BlowdownSequence) {
    let mut t = Vec::new();
    let mut tt = Vec::new();
    let mut i = 0;
    while 2 * i + 1 <= params.n_bands {
        // ε_{2i}·L_{2i+1} is the stored product E_{2i}
        t.push(
            params.log_b[2 * i + 1]
                .sub(LogNum::from_f64(params.e_prod[2 * i]))
                .scale(2.0),
        );
        if 2 * i + 2 <= params.n_bands && 2 * i + 1 < params.e_prod.len() {
            tt.push(
                params.log_b[2 * i + 2]
                    .sub(LogNum::from_f64(params.e_prod[2 * i + 1]))
                    .scale(2.0),
            );
        }
        i += 1;
    }
    (
        BlowdownSequence { label: "t".into(), log_t: t },
        BlowdownSequence { label: "t_tilde".into(), log_t: tt },
    )
}

/// One row of the oscillation demo.
#[derive(Clone, Debug)]
pub struct DemoRow {
    pub label: String,
    pub index: usize,
    pub log_t: f64,
    pub normalized: f64,
    pub target: f64,
    pub rel_dev: f64,
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub rows: Vec<DemoRow>,
    /// Mean normalized diagonal per sequence.
    pub clusters: [f64; 2],
    pub targets: [f64; 2],
    /// Worst single-cone solver error (relative) under the same config.
    pub cone_error: f64,
}

impl DemoReport {
    /// Clusters within tolerance of their targets, ordered, and separated
    /// by more than 5x the single-cone error bar.
    pub fn pass(&self, tol: f64) -> bool {
        let within = (self.clusters[0] / self.targets[0] - 1.0).abs() < tol
            && (self.clusters[1] / self.targets[1] - 1.0).abs() < tol;
        let ordered = self.clusters[0] < self.clusters[1];
        let sep = (self.clusters[1] - self.clusters[0]).abs()
            > 5.0 * self.cone_error * self.clusters[1].abs();
        within && ordered && sep
    }
}

/// Run the blow-down diagonal along two sequences on a surrogate space and
/// compare the clusters against the two cone constants.
pub fn oscillation_demo(
    space: &RadialSpace,
    alpha1: f64,
    alpha2: f64,
    seq1: &BlowdownSequence,
    seq2: &BlowdownSequence,
    config: &SolverConfig,
) -> Result<DemoReport, Error> {
    let targets = [cone_constant(alpha1)?, cone_constant(alpha2)?];
    let mut rows = Vec::new();
    let mut clusters = [0.0f64; 2];
    for (which, (seq, target)) in [(seq1, targets[0]), (seq2, targets[1])]
        .into_iter()
        .enumerate()
    {
        let mut acc = 0.0;
        for (i, &log_t) in seq.log_t.iter().enumerate() {
            let t = log_t.to_f64().exp();
            if !t.is_finite() {
                return Err(Error::OutOfRange(
                    "demo sequence time outside f64; use the surrogate scale".into(),
                ));
            }
            let nd = normalized_diag(space, t, config)?;
            acc += nd;
            rows.push(DemoRow {
                label: seq.label.clone(),
                index: i,
                log_t: log_t.to_f64(),
                normalized: nd,
                target,
                rel_dev: nd / target - 1.0,
            });
        }
        clusters[which] = acc / seq.log_t.len() as f64;
    }

    // Single-cone error bar under the same configuration.
    let mut cone_error = 0.0f64;
    for &alpha in &[alpha1, alpha2] {
        let cone = RadialSpace::cone(alpha, 0.0)?;
        let nd = normalized_diag(&cone, 100.0, config)?;
        cone_error = cone_error.max((nd / cone_constant(alpha)? - 1.0).abs());
    }

    Ok(DemoReport {
        rows,
        clusters,
        targets,
        cone_error,
    })
}

/// Sequences targeting the band centers of an oscillation spec: even-region
/// centers for the α₁ sequence, odd-region centers for α₂.
pub fn demo_sequences(spec: &crate::radial::OscillationSpec) -> (BlowdownSequence, BlowdownSequence) {
    let e = &spec.edges_log10;
    let mut centers = vec![e[0] - 0.75];
    for w in e.windows(2) {
        centers.push(0.5 * (w[0] + w[1]));
    }
    centers.push(e[e.len() - 1] + 0.75);
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        if k % 2 == 0 {
            even.push(2.0 * c);
        } else {
            odd.push(2.0 * c);
        }
    }
    (
        BlowdownSequence::from_log10("alpha1", &even),
        BlowdownSequence::from_log10("alpha2", &odd),
    )
}
