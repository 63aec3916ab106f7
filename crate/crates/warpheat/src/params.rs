//! Parameter sequences for the doubly warped product metric on ℝ⁸.
//!
//! The warp functions are piecewise power laws
//!
//! ```text
//! f̄(r) = β_{2i} b_{2i+1}^{-ω_{2i}} r^{1-η₁}    on (b_{2i},   b_{2i+1}]
//!      = β_{2i+1} b_{2i+2}^{ω_{2i+1}} r^{1-η₂}  on (b_{2i+1}, b_{2i+2}]
//! h̄(r) = α_{2i} b_{2i+1}^{-ε_{2i}} r^{1+ε_{2i}}
//!      = α_{2i+1} b_{2i+2}^{ε_{2i+1}} r^{1-ε_{2i+1}}
//! ```
//!
//! with first derivatives matching at every joint. The band radii grow
//! doubly exponentially, so everything is carried in log-domain: log bᵢ and
//! the products Wᵢ = ωᵢ·log b_{i+1} are `LogNum`, εᵢ is held as ln εᵢ, and
//! Eᵢ = εᵢ·log b_{i+1} is an O(1)–O(10) float fixed by construction.
//!
//! Because the derivative matching makes the log-coefficients cancel
//! exactly across joints, band-edge values chain as
//! `f̄(b_k⁺) = f̄(b_k⁻) · p_{k-1}/p_k` where p is the band exponent; all
//! claim and continuity margins are computed through that chain so that no
//! catastrophic cancellation of huge logs ever happens.

use crate::error::Error;
use crate::lognum::LogNum;

/// Generation knobs. The α/β targets drive the band radii through the
/// matching recursions; see `generate_params`.
#[derive(Clone, Debug)]
pub struct ParamSchedule {
    pub eta1: f64,
    pub eta2: f64,
    pub eps0: f64,
    pub omega0: f64,
    pub n_bands: usize,
    /// Even-index β target: β_{2i} = 1 - (1-beta0)·2^{-i}.
    pub beta0: f64,
    /// Odd-index β target: β_{2i+1} = beta1·4^{-i}.
    pub beta1: f64,
    /// Even-index α target: α_{2i} = 1 - (1-alpha0)·2^{-i}; α₀ also enters
    /// the cap-matching constraint that fixes log b₁.
    pub alpha0: f64,
    /// Odd-index α target: α_{2i+1} = alpha1·4^{-i}.
    pub alpha1: f64,
}

impl Default for ParamSchedule {
    fn default() -> Self {
        ParamSchedule {
            eta1: 0.6,
            eta2: 0.604,
            eps0: 1e-6,
            omega0: 1e-5,
            n_bands: 8,
            beta0: 0.995,
            beta1: 0.005,
            alpha0: 0.995,
            alpha1: 0.005,
        }
    }
}

/// Generated parameter set. Coefficient sequences are indexed 0..n_bands;
/// `log_b` has one extra entry (band k spans (b_k, b_{k+1}]).
#[derive(Clone, Debug)]
pub struct ConstructionParams {
    pub eta1: f64,
    pub eta2: f64,
    pub n_bands: usize,
    /// ln εᵢ (εᵢ itself underflows f64 for large i).
    pub ln_eps: Vec<f64>,
    /// Lᵢ = log bᵢ, i = 0..=n_bands.
    pub log_b: Vec<LogNum>,
    /// ln αᵢ.
    pub ln_alpha: Vec<f64>,
    /// ln βᵢ.
    pub ln_beta: Vec<f64>,
    /// Eᵢ = εᵢ·L_{i+1}.
    pub e_prod: Vec<f64>,
    /// Wᵢ = ωᵢ·L_{i+1}.
    pub w_prod: Vec<LogNum>,
    /// δ = Σ εₗ.
    pub delta_sum: f64,
    /// τ = Σ_{l≥1} b_l^{-(η₂-η₁)/2}.
    pub tau_sum: f64,
}

/// Band exponent of f̄ (1-η₁ on even bands, 1-η₂ on odd).
pub fn p_f(params: &ConstructionParams, band: usize) -> f64 {
    if band % 2 == 0 {
        1.0 - params.eta1
    } else {
        1.0 - params.eta2
    }
}

/// Band exponent of h̄ (1+ε on even bands, 1-ε on odd).
pub fn p_h(params: &ConstructionParams, band: usize) -> f64 {
    let e = params.ln_eps[band].exp();
    if band % 2 == 0 {
        1.0 + e
    } else {
        1.0 - e
    }
}

impl ConstructionParams {
    pub fn eps(&self, i: usize) -> f64 {
        self.ln_eps[i].exp()
    }

    pub fn omega(&self, i: usize) -> LogNum {
        self.w_prod[i].div(self.log_b[i + 1])
    }

    pub fn b0(&self) -> f64 {
        self.log_b[0].to_f64().exp()
    }

    /// β₀ b₁^{-ω₀} b₀^{-η₁}: the outer f̄ slope factor at b₀ (f̄'(b₀⁺)/(1-η₁)).
    pub fn cap_qf(&self) -> f64 {
        (self.ln_beta[0] - self.w_prod[0].to_f64() - self.eta1 * self.log_b[0].to_f64()).exp()
    }

    /// α₀(b₀/b₁)^{ε₀}: the outer h̄ value factor at b₀ (h̄(b₀⁺)/b₀).
    pub fn cap_qh(&self) -> f64 {
        (self.ln_alpha[0] + self.eps(0) * self.log_b[0].to_f64() - self.e_prod[0]).exp()
    }

    /// Λ of f̄ at the left edge of `band` (the in-band minimum; f̄ increases).
    pub fn lam_f_left(&self, band: usize) -> LogNum {
        self.lam_f_left_base().add(self.tele_f(0, band))
    }

    /// Λ of h̄ at the left edge of `band`.
    pub fn lam_h_left(&self, band: usize) -> LogNum {
        self.lam_h_left_base().add(self.tele_h(0, band))
    }

    fn lam_f_left_base(&self) -> LogNum {
        // f̄(b₀⁺) = β₀ b₁^{-ω₀} b₀^{1-η₁}
        LogNum::from_f64(self.ln_beta[0])
            .sub(self.w_prod[0])
            .add(self.log_b[0].scale(1.0 - self.eta1))
    }

    fn lam_h_left_base(&self) -> LogNum {
        // h̄(b₀⁺) = α₀ b₁^{-ε₀} b₀^{1+ε₀}
        LogNum::from_f64(self.ln_alpha[0])
            .sub(LogNum::from_f64(self.e_prod[0]))
            .add(self.log_b[0].scale(1.0 + self.eps(0)))
    }

    /// Λm_f(to) − Λm_f(from): telescoped band-edge ratio of f̄,
    /// Σ p_l·(L_{l+1}−L_l) plus the exponent-ratio constant. The summands
    /// are positive, so this stays well conditioned at any band.
    pub fn tele_f(&self, from: usize, to: usize) -> LogNum {
        assert!(from <= to);
        let mut acc = LogNum::from_f64((p_f(self, from) / p_f(self, to)).ln());
        for l in from..to {
            let dl = self.log_b[l + 1].sub(self.log_b[l]);
            acc = acc.add(dl.scale(p_f(self, l)));
        }
        acc
    }

    /// Λm_h(to) − Λm_h(from) for h̄.
    pub fn tele_h(&self, from: usize, to: usize) -> LogNum {
        assert!(from <= to);
        let mut acc = LogNum::from_f64((p_h(self, from) / p_h(self, to)).ln());
        for l in from..to {
            let dl = self.log_b[l + 1].sub(self.log_b[l]);
            acc = acc.add(dl.scale(p_h(self, l)));
        }
        acc
    }
}

/// Solve the cap-matching constraint (Assumption 13) for L₁ = log b₁ given
/// α₀:  α₀(1+ε₀)e^{-ε₀(L₁-L₀)} = 2/3 + (1/3)(1-η₁)β₀ e^{-ω₀L₁} b₀^{-η₁}.
fn solve_l1(sch: &ParamSchedule, l0: f64) -> Result<f64, Error> {
    let g = |l1: f64| -> f64 {
        let lhs = sch.alpha0.ln() + sch.eps0.ln_1p() - sch.eps0 * (l1 - l0);
        let rhs = (2.0 / 3.0
            + (1.0 - sch.eta1) * sch.beta0 * (-sch.omega0 * l1).exp()
                / (3.0 * (sch.eta1 * l0).exp()))
        .ln();
        lhs - rhs
    };
    let mut lo = l0;
    let mut hi = l0 + 20.0 / sch.eps0;
    if g(lo) <= 0.0 {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 13".into(),
            detail: format!(
                "cap matching has no solution with alpha0 = {} at log b1 > log b0",
                sch.alpha0
            ),
        });
    }
    if g(hi) >= 0.0 {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 13".into(),
            detail: "cap matching does not cross zero".into(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generate all band sequences from a schedule.
///
/// ε follows the double-square law εᵢ = ε₀^{2^i}. The band radii come out of
/// the derivative-matching recursions driven by the α targets
/// (log b_{k+1} = Eₖ/εₖ with Eₖ fixed by consecutive ln α differences); ω is
/// then solved from the β recursions, and log b₁ from the cap constraint.
/// Every finite-index assumption is checked before returning.
pub fn generate_params(sch: &ParamSchedule) -> Result<ConstructionParams, Error> {
    let n = sch.n_bands;
    if n < 4 {
        return Err(Error::InfeasibleSchedule {
            assumption: "band count".into(),
            detail: format!("need at least 4 bands, got {n}"),
        });
    }
    // Assumption 1 η-part and Assumption 2/17 gate the whole construction.
    let ratio = (1.0 - sch.eta2) / (1.0 - sch.eta1);
    if !(sch.eta2 > sch.eta1
        && sch.eta2 < 1.0
        && sch.eta1 > 0.5 * (1.0 + sch.eps0)
        && ratio >= 0.99 - 1e-15
        && ratio < 1.0 - sch.eps0)
    {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 1".into(),
            detail: format!(
                "need 1-eps0 > (1-eta2)/(1-eta1) >= 99/100 and 1 > eta2 > eta1 > (1+eps0)/2; \
                 got ratio {ratio}"
            ),
        });
    }
    if !(sch.omega0 > 0.0 && sch.omega0 < (sch.eta2 - sch.eta1) / 100.0) {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 2".into(),
            detail: format!("omega0 = {} not in (0, (eta2-eta1)/100)", sch.omega0),
        });
    }
    if sch.eps0 >= sch.omega0 {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 17".into(),
            detail: format!("need eps0 < omega0, got {} >= {}", sch.eps0, sch.omega0),
        });
    }
    if !(sch.beta0 >= 0.99 && sch.beta0 < 1.0 && sch.alpha0 >= 0.99 && sch.alpha0 < 1.0) {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 1".into(),
            detail: "alpha0/beta0 targets must lie in [0.99, 1)".into(),
        });
    }
    if !(sch.beta1 <= 0.01 && sch.beta1 > 0.0 && sch.alpha1 <= 0.01 && sch.alpha1 > 0.0) {
        return Err(Error::InfeasibleSchedule {
            assumption: "Assumption 4".into(),
            detail: "alpha1/beta1 targets must lie in (0, 0.01]".into(),
        });
    }

    // ln εᵢ = 2^i ln ε₀.
    let ln_eps: Vec<f64> = (0..=n)
        .map(|i| (1u64 << i) as f64 * sch.eps0.ln())
        .collect();

    // Coefficient targets.
    let mut ln_alpha = vec![0.0; n];
    let mut ln_beta = vec![0.0; n];
    for i in 0..n {
        let k = (i / 2) as i32;
        if i % 2 == 0 {
            ln_alpha[i] = (1.0 - (1.0 - sch.alpha0) * 0.5f64.powi(k)).ln();
            ln_beta[i] = (1.0 - (1.0 - sch.beta0) * 0.5f64.powi(k)).ln();
        } else {
            ln_alpha[i] = sch.alpha1.ln() - f64::from(k) * 4f64.ln();
            ln_beta[i] = sch.beta1.ln() - f64::from(k) * 4f64.ln();
        }
    }

    // b₀ from Assumption 7 (b₀^{η₁} = 7), L₁ from the cap constraint.
    let l0 = 7f64.ln() / sch.eta1;
    let l1 = solve_l1(sch, l0)?;

    let mut log_b = vec![LogNum::ZERO; n + 1];
    log_b[0] = LogNum::from_f64(l0);
    log_b[1] = LogNum::from_f64(l1);

    let mut e_prod = vec![0.0; n];
    e_prod[0] = sch.eps0 * l1;

    // L_{k+1} = E_k/ε_k with E_k from the h̄-derivative matching (8.8)/(8.9):
    //   k = 2i+1: E_k = ln α_{2i} − ln α_{2i+1} + ln((1+ε_{2i})/(1−ε_{2i+1})) + ε_k L_k
    //   k = 2i+2: E_k = ln α_{2i+2} − ln α_{2i+1} − ln((1−ε_{2i+1})/(1+ε_{2i+2})) + ε_k L_k
    for k in 1..n {
        let eps_k = ln_eps[k].exp();
        let eps_l_k = (ln_eps[k] + log_b[k].ln_abs()).exp(); // ε_k·L_k, tiny
        let e_k = if k % 2 == 1 {
            let ep = ln_eps[k - 1].exp();
            ln_alpha[k - 1] - ln_alpha[k] + ep.ln_1p() - (-eps_k).ln_1p() + eps_l_k
        } else {
            let em = ln_eps[k - 1].exp();
            ln_alpha[k] - ln_alpha[k - 1] - (-em).ln_1p() + eps_k.ln_1p() + eps_l_k
        };
        if !(e_k > 0.0) {
            return Err(Error::InfeasibleSchedule {
                assumption: "Assumption 5".into(),
                detail: format!("alpha targets force nonincreasing radii at index {k}"),
            });
        }
        e_prod[k] = e_k;
        log_b[k + 1] = LogNum::from_f64(e_k).mul(LogNum::from_ln(-ln_eps[k]));
        if !(log_b[k + 1] > log_b[k]) {
            return Err(Error::InfeasibleSchedule {
                assumption: "Assumption 5".into(),
                detail: format!("log b not increasing at index {}", k + 1),
            });
        }
    }

    // Wᵢ from the f̄-derivative matching (8.1.3)/(8.1.4).
    let ln_eta_ratio = ((1.0 - sch.eta1) / (1.0 - sch.eta2)).ln();
    let deta = sch.eta2 - sch.eta1;
    let mut w_prod = vec![LogNum::ZERO; n];
    w_prod[0] = LogNum::from_f64(sch.omega0 * l1);
    for k in 1..n {
        let const_part = if k % 2 == 1 {
            ln_beta[k - 1] - ln_beta[k] + ln_eta_ratio
        } else {
            ln_beta[k] - ln_beta[k - 1] + ln_eta_ratio
        };
        w_prod[k] = log_b[k]
            .scale(deta)
            .sub(w_prod[k - 1])
            .add(LogNum::from_f64(const_part));
        if !w_prod[k].is_positive() {
            return Err(Error::InfeasibleSchedule {
                assumption: "Assumption 2".into(),
                detail: format!("omega not positive at index {k}"),
            });
        }
    }

    let delta_sum: f64 = ln_eps[..n].iter().map(|l| l.exp()).sum();
    let mut tau_sum = 0.0;
    for lb in log_b.iter().take(n + 1).skip(1) {
        tau_sum += (-0.5 * deta * lb.to_f64()).exp();
    }

    let params = ConstructionParams {
        eta1: sch.eta1,
        eta2: sch.eta2,
        n_bands: n,
        ln_eps,
        log_b,
        ln_alpha,
        ln_beta,
        e_prod,
        w_prod,
        delta_sum,
        tau_sum,
    };

    let report = check_assumptions(&params, n);
    if let Some(bad) = report.entries.iter().find(|e| !e.pass) {
        return Err(Error::InfeasibleSchedule {
            assumption: bad.name.clone(),
            detail: format!("margin {:.3e} at index {:?}", bad.margin, bad.index),
        });
    }
    Ok(params)
}

/// One assumption verdict: worst margin over the checked indices.
/// Margins are normalized so that pass ⇔ margin ≥ 0 (with 1e-12 slack for
/// exact-equality cases).
#[derive(Clone, Debug)]
pub struct AssumptionCheck {
    pub name: String,
    pub index: Option<usize>,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&AssumptionCheck> {
        self.entries.iter().find(|e| e.name == name)
    }

    fn push_worst(&mut self, name: &str, worst: Option<(f64, Option<usize>)>) {
        // No applicable index: vacuous pass.
        let (margin, index) = worst.unwrap_or((f64::INFINITY, None));
        self.entries.push(AssumptionCheck {
            name: name.to_string(),
            index,
            margin,
            pass: margin >= -1e-12,
        });
    }
}

fn fold_worst(items: impl IntoIterator<Item = (f64, usize)>) -> Option<(f64, Option<usize>)> {
    let mut worst: Option<(f64, Option<usize>)> = None;
    for (m, i) in items {
        if worst.map_or(true, |(wm, _)| m < wm) {
            worst = Some((m, Some(i)));
        }
    }
    worst
}

/// Evaluate every finite-index check of Assumptions 1–22 on indices below
/// `count`. Failures become report entries, not errors. The limits in
/// Assumptions 1, 2, 4, 5, 22 are represented by their monotone finite-index
/// trends.
pub fn check_assumptions(params: &ConstructionParams, count: usize) -> AssumptionReport {
    let n = count.min(params.n_bands);
    let mut rep = AssumptionReport::default();
    let eta1 = params.eta1;
    let eta2 = params.eta2;
    let deta = eta2 - eta1;
    let eps0 = params.eps(0);
    let l0 = params.log_b[0].to_f64();

    if n == 0 {
        return rep;
    }

    // A1: η bounds; β ordering; β₀ ≥ 99/100, β₁ ≤ 1/100.
    {
        let ratio = (1.0 - eta2) / (1.0 - eta1);
        let mut ms = vec![
            (1.0 - eps0 - ratio, 0),
            (ratio - 0.99, 0),
            (1.0 - eta2, 0),
            (deta, 0),
            (eta1 - 0.5 * (1.0 + eps0), 0),
            (params.ln_beta[0] - 0.99f64.ln(), 0),
        ];
        if n > 1 {
            ms.push((0.01f64.ln() - params.ln_beta[1], 1));
        }
        for i in 2..n {
            if i % 2 == 0 {
                ms.push((params.ln_beta[i] - params.ln_beta[i - 2], i));
            } else {
                ms.push((params.ln_beta[i - 2] - params.ln_beta[i], i));
            }
        }
        rep.push_worst("Assumption 1", fold_worst(ms));
    }

    // A2: ω₀ < (η₂-η₁)/100, ω strictly decreasing and positive.
    {
        let mut ms = vec![((deta / 100.0).ln() - params.omega(0).ln_abs(), 0)];
        for i in 1..n {
            ms.push((params.omega(i - 1).ln_abs() - params.omega(i).ln_abs(), i));
            ms.push((if params.w_prod[i].is_positive() { 1.0 } else { -1.0 }, i));
        }
        rep.push_worst("Assumption 2", fold_worst(ms));
    }

    // A3: β recursions (8.1.3)/(8.1.4), relative residual in log-domain.
    {
        let ln_eta_ratio = ((1.0 - eta1) / (1.0 - eta2)).ln();
        let mut ms = Vec::new();
        for k in 1..n {
            let const_part = if k % 2 == 1 {
                params.ln_beta[k - 1] - params.ln_beta[k] + ln_eta_ratio
            } else {
                params.ln_beta[k] - params.ln_beta[k - 1] + ln_eta_ratio
            };
            let lhs = params.w_prod[k].add(params.w_prod[k - 1]);
            let rhs = params.log_b[k].scale(deta).add(LogNum::from_f64(const_part));
            let scale = lhs.abs().max(rhs.abs());
            let rel = lhs.sub(rhs).abs().div(scale).to_f64();
            ms.push((1e-12 - rel, k));
        }
        rep.push_worst("Assumption 3", fold_worst(ms));
    }

    // A4: α ordering and endpoint bounds.
    {
        let mut ms = vec![(params.ln_alpha[0] - 0.99f64.ln(), 0)];
        if n > 1 {
            ms.push((0.01f64.ln() - params.ln_alpha[1], 1));
        }
        for i in 2..n {
            if i % 2 == 0 {
                ms.push((params.ln_alpha[i] - params.ln_alpha[i - 2], i));
            } else {
                ms.push((params.ln_alpha[i - 2] - params.ln_alpha[i], i));
            }
        }
        rep.push_worst("Assumption 4", fold_worst(ms));
    }

    // A5: 1 < b₀ and b strictly increasing; 1 > ε₀ and ε strictly decreasing.
    {
        let mut ms = vec![(l0, 0), (-params.ln_eps[0], 0)];
        for i in 1..=n {
            let d = params.log_b[i].sub(params.log_b[i - 1]);
            ms.push((if d.is_positive() { 1.0 } else { -1.0 }, i));
        }
        for i in 1..n {
            ms.push((params.ln_eps[i - 1] - params.ln_eps[i], i));
        }
        rep.push_worst("Assumption 5", fold_worst(ms));
    }

    // A6: α recursions (8.8)/(8.9), relative residual on E.
    {
        let mut ms = Vec::new();
        for k in 1..n {
            let eps_k = params.ln_eps[k].exp();
            let eps_l_k = (params.ln_eps[k] + params.log_b[k].ln_abs()).exp();
            let want = if k % 2 == 1 {
                let ep = params.ln_eps[k - 1].exp();
                params.ln_alpha[k - 1] - params.ln_alpha[k] + ep.ln_1p() - (-eps_k).ln_1p()
                    + eps_l_k
            } else {
                let em = params.ln_eps[k - 1].exp();
                params.ln_alpha[k] - params.ln_alpha[k - 1] - (-em).ln_1p() + eps_k.ln_1p()
                    + eps_l_k
            };
            let rel = (params.e_prod[k] - want).abs() / params.e_prod[k].abs().max(1.0);
            ms.push((1e-12 - rel, k));
        }
        rep.push_worst("Assumption 6", fold_worst(ms));
    }

    // A7: b₀^{η₁} ≥ 7.
    rep.push_worst("Assumption 7", Some((eta1 * l0 - 7f64.ln(), Some(0))));

    // A8: α₀ b₀^{η₁} > (b₁/b₀)^{ε₀}.
    {
        let lhs = params.ln_alpha[0] + eta1 * l0;
        let rhs = params.e_prod[0] - eps0 * l0;
        rep.push_worst("Assumption 8", Some((lhs - rhs, Some(0))));
    }

    // A9: ε_{2i} < (α_{2i}^{-1} - 1)/2.
    {
        let ms = (0..n).step_by(2).map(|i| {
            let bound = 0.5 * (-params.ln_alpha[i]).exp_m1();
            (bound.ln() - params.ln_eps[i], i)
        });
        rep.push_worst("Assumption 9", fold_worst(ms));
    }

    // A10: ε₀ < ¼ η₁(1-η₁) b₀^{-η₁} b₁^{-ω₀}.
    {
        let bound = (0.25 * eta1 * (1.0 - eta1)).ln() - eta1 * l0 - params.w_prod[0].to_f64();
        rep.push_worst("Assumption 10", Some((bound - params.ln_eps[0], Some(0))));
    }

    // A11: b_{2i}^{η₁} > α_{2i-1}^{-1}(1+ε_{2i})/(1-ε_{2i-1}), i ≥ 1.
    {
        let ms = (2..n).step_by(2).map(|i| {
            let lhs = params.log_b[i].scale(eta1);
            let rhs =
                -params.ln_alpha[i - 1] + params.eps(i).ln_1p() - (-params.eps(i - 1)).ln_1p();
            (lhs.sub(LogNum::from_f64(rhs)).to_f64(), i)
        });
        rep.push_worst("Assumption 11", fold_worst(ms));
    }

    // A13: α₀(1+ε₀)(b₀/b₁)^{ε₀} = 2/3 + β₀ b₁^{-ω₀} b₀^{-η₁}(1-η₁)/3.
    {
        let lhs = params.ln_alpha[0] + eps0.ln_1p() + eps0 * l0 - params.e_prod[0];
        let rhs = (2.0 / 3.0 + (1.0 - eta1) * params.cap_qf() / 3.0).ln();
        rep.push_worst("Assumption 13", Some((1e-10 - (lhs - rhs).abs(), Some(0))));
    }

    // A14: b_{2k+1}^{1-(η₁+η₂)/2} ≤ b_{2k+2}^{1-η₂}.
    {
        let ms = (1..n).step_by(2).map(|i| {
            let lhs = params.log_b[i].scale(1.0 - 0.5 * (eta1 + eta2));
            let rhs = params.log_b[i + 1].scale(1.0 - eta2);
            (rhs.sub(lhs).to_f64(), i)
        });
        rep.push_worst("Assumption 14", fold_worst(ms));
    }

    // A15: δ < 1, τ < 1.
    rep.push_worst(
        "Assumption 15",
        fold_worst([(1.0 - params.delta_sum, 0usize), (1.0 - params.tau_sum, 0usize)]),
    );

    // A17: ε_{2i} < ω_{2i}.
    {
        let ms = (0..n)
            .step_by(2)
            .map(|i| (params.omega(i).ln_abs() - params.ln_eps[i], i));
        rep.push_worst("Assumption 17", fold_worst(ms));
    }

    // Shared quantities for A18–A21.
    let b0_over_b1 = (l0 - params.log_b[1].to_f64()).exp();
    let gap = 1.0 - 3.0 * b0_over_b1 - 4.0 * params.delta_sum;

    // A18: 2b₀/b₁^{1-η₁-ω₀} + (η₂-η₁)/(1-η₂) + τ < η₁³ and
    //      b₁^{2η₁} > 2 + 20/(1 - 3b₀/b₁ - 4δ).
    {
        let w0 = params.w_prod[0].to_f64();
        let t1 = 2.0 * l0.exp() * (w0 - (1.0 - eta1) * params.log_b[1].to_f64()).exp();
        let m1 = eta1.powi(3) - (t1 + deta / (1.0 - eta2) + params.tau_sum);
        let m2 = 2.0 * eta1 * params.log_b[1].to_f64() - (2.0 + 20.0 / gap).ln();
        rep.push_worst("Assumption 18", fold_worst([(m1, 0usize), (m2, 1usize)]));
    }

    // A19: ε₀ ≤ η₁(1-η₁)(1-3b₀/b₁-4δ)/10.
    rep.push_worst(
        "Assumption 19",
        Some(((eta1 * (1.0 - eta1) * gap / 10.0).ln() - params.ln_eps[0], Some(0))),
    );

    // A20: b₁^{η₁} ≥ 100/(1-4δ).
    rep.push_worst(
        "Assumption 20",
        Some((
            eta1 * params.log_b[1].to_f64() - (100.0 / (1.0 - 4.0 * params.delta_sum)).ln(),
            Some(1),
        )),
    );

    // A21: 3b₀/b₁ + 4δ ≤ η₁.
    rep.push_worst(
        "Assumption 21",
        Some((eta1 - 3.0 * b0_over_b1 - 4.0 * params.delta_sum, Some(0))),
    );

    // A22 finite-index trends: εᵢLᵢ decreasing toward 0, Eᵢ = εᵢL_{i+1}
    // increasing, εᵢEᵢ = εᵢ²L_{i+1} decreasing.
    {
        let el = |i: usize| (params.ln_eps[i] + params.log_b[i].ln_abs()).exp();
        let ee = |i: usize| params.ln_eps[i] + params.e_prod[i].ln();
        let mut ms = Vec::new();
        for i in 1..n {
            ms.push((el(i - 1) - el(i), i));
            ms.push((params.e_prod[i] - params.e_prod[i - 1], i));
            ms.push((ee(i - 1) - ee(i), i));
        }
        rep.push_worst("Assumption 22", fold_worst(ms));
    }

    rep
}

/// One correction jump expressed relative to a band-edge value so that it
/// stays evaluable at any band: value = sign · exp(ln_ratio) · m(anchor),
/// where m(anchor) is the left-edge value of f̄ (for τ) or h̄ (for δ).
#[derive(Clone, Copy, Debug)]
pub struct Jump {
    pub sign: i8,
    pub anchor: usize,
    pub ln_ratio: f64,
}

/// Jump corrections for both warp functions.
#[derive(Clone, Debug)]
pub struct JumpData {
    pub tau: Vec<Jump>,
    pub delta: Vec<Jump>,
}

impl JumpData {
    /// Λ|τ_i|.
    pub fn lam_tau_abs(&self, params: &ConstructionParams, i: usize) -> LogNum {
        let j = self.tau[i];
        params.lam_f_left(j.anchor).add(LogNum::from_f64(j.ln_ratio))
    }

    /// Λ|δ_i|.
    pub fn lam_delta_abs(&self, params: &ConstructionParams, i: usize) -> LogNum {
        let j = self.delta[i];
        params.lam_h_left(j.anchor).add(LogNum::from_f64(j.ln_ratio))
    }

    /// Signed τ_i as a LogNum.
    pub fn tau_value(&self, params: &ConstructionParams, i: usize) -> LogNum {
        LogNum::from_sign_ln(self.tau[i].sign, self.lam_tau_abs(params, i).to_f64())
    }

    /// Signed δ_i as a LogNum.
    pub fn delta_value(&self, params: &ConstructionParams, i: usize) -> LogNum {
        LogNum::from_sign_ln(self.delta[i].sign, self.lam_delta_abs(params, i).to_f64())
    }
}

/// Compute the jumps τᵢ, δᵢ of the C¹ gluing.
///
/// τ₀ = (b₀/4)[3 − (3+η₁)β₀b₁^{-ω₀}b₀^{-η₁}], δ₀ = (b₀/4)[3 − (3−ε₀)α₀(b₀/b₁)^{ε₀}];
/// for i ≥ 1 the jumps are fixed multiples of band-edge values:
/// τ_{2i+1} = −((η₂−η₁)/(1−η₁))·f̄(b_{2i+1}⁺), τ_{2i+2} = ((η₂−η₁)/(1−η₂))·f̄(b_{2i+2}⁺),
/// δ_{2i+1} = −((ε_{2i}+ε_{2i+1})/(1+ε_{2i}))·h̄(b_{2i+1}⁺),
/// δ_{2i+2} = ((ε_{2i+1}+ε_{2i+2})/(1−ε_{2i+1}))·h̄(b_{2i+2}⁺).
pub fn jump_offsets(params: &ConstructionParams) -> JumpData {
    let n = params.n_bands;
    let deta = params.eta2 - params.eta1;
    let mut tau = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);

    let b0 = params.b0();
    let tau0 = 0.25 * b0 * (3.0 - (3.0 + params.eta1) * params.cap_qf());
    let mf0 = params.lam_f_left(0).to_f64().exp();
    tau.push(Jump {
        sign: if tau0 >= 0.0 { 1 } else { -1 },
        anchor: 0,
        ln_ratio: (tau0.abs() / mf0).ln(),
    });
    let delta0 = 0.25 * b0 * (3.0 - (3.0 - params.eps(0)) * params.cap_qh());
    let mh0 = params.lam_h_left(0).to_f64().exp();
    delta.push(Jump {
        sign: if delta0 >= 0.0 { 1 } else { -1 },
        anchor: 0,
        ln_ratio: (delta0.abs() / mh0).ln(),
    });

    for i in 1..n {
        if i % 2 == 1 {
            tau.push(Jump {
                sign: -1,
                anchor: i,
                ln_ratio: (deta / (1.0 - params.eta1)).ln(),
            });
            // |δ_{2k+1}|/h̄(b⁺) = (ε_{2k}+ε_{2k+1})/(1+ε_{2k})
            let r = (params.ln_eps[i] - params.ln_eps[i - 1]).exp();
            delta.push(Jump {
                sign: -1,
                anchor: i,
                ln_ratio: params.ln_eps[i - 1] + r.ln_1p() - params.eps(i - 1).ln_1p(),
            });
        } else {
            tau.push(Jump {
                sign: 1,
                anchor: i,
                ln_ratio: (deta / (1.0 - params.eta2)).ln(),
            });
            // |δ_{2k+2}|/h̄(b⁺) = (ε_{2k+1}+ε_{2k+2})/(1−ε_{2k+1})
            let r = (params.ln_eps[i] - params.ln_eps[i - 1]).exp();
            delta.push(Jump {
                sign: 1,
                anchor: i,
                ln_ratio: params.ln_eps[i - 1] + r.ln_1p() - (-params.eps(i - 1)).ln_1p(),
            });
        }
    }

    JumpData { tau, delta }
}

/// One claim inequality verdict; margin is ln(bound) − ln(value): pass ⇔
/// margin ≥ 0 (1e-12 slack covers the exact-equality case of tau 1.2).
#[derive(Clone, Debug)]
pub struct ClaimCheck {
    pub name: String,
    pub i: usize,
    pub j: usize,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ClaimReport {
    pub entries: Vec<ClaimCheck>,
}

impl ClaimReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn worst(&self, name: &str) -> Option<&ClaimCheck> {
        self.entries
            .iter()
            .filter(|e| e.name == name)
            .min_by(|a, b| a.margin.partial_cmp(&b.margin).unwrap())
    }

    fn push(&mut self, name: &str, i: usize, j: usize, margin: f64) {
        self.entries.push(ClaimCheck {
            name: name.into(),
            i,
            j,
            margin,
            pass: margin >= -1e-12,
        });
    }
}

/// Verify the jump-size claims: |τᵢ| against band minima of f̄ and |δᵢ|
/// against band minima of h̄, all through telescoped band-edge ratios.
pub fn verify_claims(params: &ConstructionParams) -> ClaimReport {
    let n = params.n_bands;
    assert!(n >= 3, "claims need at least 3 bands");
    let jumps = jump_offsets(params);
    let deta = params.eta2 - params.eta1;
    let mut rep = ClaimReport::default();

    // tau 1.1: |τ₀| ≤ (2b₀ b₁^{η₁+ω₀-1}) min f̄ over band j, j ≥ 1.
    for j in 1..n {
        let lam_bound = LogNum::from_f64((2.0 * params.b0()).ln())
            .sub(params.log_b[1].scale(1.0 - params.eta1))
            .add(params.w_prod[0])
            .add(params.lam_f_left(0))
            .add(params.tele_f(0, j));
        let lam_tau0 = jumps.lam_tau_abs(params, 0);
        rep.push("tau 1.1", 0, j, lam_bound.sub(lam_tau0).to_f64());
    }

    // tau 1.2: |τᵢ| ≤ ((η₂−η₁)/(1−η₂)) min f̄ over band i, i ≥ 1. Odd i has
    // ratio (1−η₂)/(1−η₁) < 1; even i is an exact equality via (8.1.4).
    for i in 1..n {
        let margin = if i % 2 == 1 {
            ((1.0 - params.eta1) / (1.0 - params.eta2)).ln()
        } else {
            0.0
        };
        rep.push("tau 1.2", i, i, margin);
    }

    // tau 1.3: |τᵢ| ≤ b_i^{-(η₂-η₁)/2} min f̄ over band j, j > i ≥ 1.
    for i in 1..n {
        let anchor = jumps.tau[i].anchor;
        let tau_rel = jumps.tau[i].ln_ratio;
        for j in (i + 1)..n {
            let m = params
                .tele_f(anchor, j)
                .sub(LogNum::from_f64(tau_rel))
                .sub(params.log_b[i].scale(0.5 * deta))
                .to_f64();
            rep.push("tau 1.3", i, j, m);
        }
    }

    // delta 1.1: |δ₀| ≤ 3(b₀/b₁) min h̄ over band j, j ≥ 1.
    for j in 1..n {
        let lam_bound = LogNum::from_f64(3f64.ln() + params.log_b[0].to_f64())
            .sub(params.log_b[1])
            .add(params.lam_h_left(0))
            .add(params.tele_h(0, j));
        let lam_d0 = jumps.lam_delta_abs(params, 0);
        rep.push("delta 1.1", 0, j, lam_bound.sub(lam_d0).to_f64());
    }

    // delta 1.2: |δᵢ| ≤ 4ε_{i-1} min h̄ over band j, 1 ≤ i ≤ j.
    for i in 1..n {
        let anchor = jumps.delta[i].anchor;
        let d_rel = jumps.delta[i].ln_ratio;
        for j in i..n {
            let m = LogNum::from_f64(4f64.ln() + params.ln_eps[i - 1] - d_rel)
                .add(params.tele_h(anchor, j))
                .to_f64();
            rep.push("delta 1.2", i, j, m);
        }
    }

    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults() -> ConstructionParams {
        generate_params(&ParamSchedule::default()).expect("default schedule feasible")
    }

    #[test]
    fn eta_ratio_at_the_bound() {
        // η₁=0.6, η₂=0.604 sits exactly on the 99/100 edge of Assumption 1.
        let ratio = (1.0 - 0.604) / (1.0 - 0.6);
        assert_relative_eq!(ratio, 0.99, max_relative = 1e-14);
        let p = defaults();
        assert!(check_assumptions(&p, p.n_bands).entry("Assumption 1").unwrap().pass);
    }

    #[test]
    fn b0_solves_assumption_7() {
        // Independent bisection of b^0.6 = 7.
        let (mut lo, mut hi) = (1.0f64, 100.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid.powf(0.6) < 7.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = defaults();
        assert_relative_eq!(p.b0(), 0.5 * (lo + hi), max_relative = 1e-10);
        assert!(p.b0() > 25.61 && p.b0() < 25.62);
    }

    #[test]
    fn infeasible_eta2_names_assumption_1() {
        let sch = ParamSchedule {
            eta2: 0.9,
            ..ParamSchedule::default()
        };
        match generate_params(&sch) {
            Err(Error::InfeasibleSchedule { assumption, .. }) => {
                assert_eq!(assumption, "Assumption 1")
            }
            other => panic!("expected infeasible schedule, got {other:?}"),
        }
    }

    #[test]
    fn defaults_pass_all_assumptions() {
        let p = defaults();
        let rep = check_assumptions(&p, p.n_bands);
        for e in &rep.entries {
            assert!(e.pass, "{} failed with margin {:.3e} at {:?}", e.name, e.margin, e.index);
        }
    }

    #[test]
    fn large_eps0_breaks_assumption_10() {
        let mut p = defaults();
        // Replace ε₀ by 0.5 post hoc and re-check.
        p.ln_eps[0] = 0.5f64.ln();
        let rep = check_assumptions(&p, p.n_bands);
        assert!(!rep.entry("Assumption 10").unwrap().pass);
    }

    #[test]
    fn empty_count_is_vacuous() {
        let p = defaults();
        let rep = check_assumptions(&p, 0);
        assert!(rep.all_pass());
        assert!(rep.entries.is_empty());
    }

    #[test]
    fn tau0_matches_closed_form() {
        let p = defaults();
        let jumps = jump_offsets(&p);
        let tau0 = jumps.tau_value(&p, 0).to_f64();
        let qf = p.cap_qf();
        let want = 0.25 * p.b0() * (3.0 - (3.0 + p.eta1) * qf);
        assert_relative_eq!(tau0, want, max_relative = 1e-12);
        assert!(tau0 > 0.0 && tau0 < 0.75 * p.b0());
        let d0 = jumps.delta_value(&p, 0).to_f64();
        assert!(d0 > 0.0 && d0 <= 0.75 * p.b0());
    }

    #[test]
    fn jump_sign_pattern() {
        let p = defaults();
        let jumps = jump_offsets(&p);
        for i in 1..p.n_bands {
            let expect = if i % 2 == 1 { -1 } else { 1 };
            assert_eq!(jumps.tau[i].sign, expect, "tau sign at {i}");
            assert_eq!(jumps.delta[i].sign, expect, "delta sign at {i}");
        }
    }

    #[test]
    fn chain_matches_raw_coefficients_on_low_bands() {
        // Independent route: Λf̄(b_k⁺) from the raw band coefficients
        // (valid while W_k is small enough for f64 to carry its O(1) part).
        let p = defaults();
        for k in 0..3usize {
            // Agreement is limited by the ulp of the dominant log term.
            let tol = |v: LogNum| 1e-8 + 1e-13 * v.abs().to_f64();
            let raw_f = if k % 2 == 0 {
                LogNum::from_f64(p.ln_beta[k])
                    .sub(p.w_prod[k])
                    .add(p.log_b[k].scale(1.0 - p.eta1))
            } else {
                LogNum::from_f64(p.ln_beta[k])
                    .add(p.w_prod[k])
                    .add(p.log_b[k].scale(1.0 - p.eta2))
            };
            let chain = p.lam_f_left(k);
            let diff = chain.sub(raw_f).abs().to_f64();
            assert!(diff <= tol(chain), "band {k}: chain {chain} vs raw {raw_f}");

            let raw_h = if k % 2 == 0 {
                LogNum::from_f64(p.ln_alpha[k] - p.e_prod[k])
                    .add(p.log_b[k].scale(1.0 + p.eps(k)))
            } else {
                LogNum::from_f64(p.ln_alpha[k] + p.e_prod[k])
                    .add(p.log_b[k].scale(1.0 - p.eps(k)))
            };
            let chain_h = p.lam_h_left(k);
            let diff_h = chain_h.sub(raw_h).abs().to_f64();
            assert!(diff_h <= tol(chain_h), "h band {k}: diff {diff_h}");
        }
    }

    #[test]
    fn tau_13_brute_force_on_low_bands() {
        // Evaluate both sides of tau 1.3 directly from raw coefficients for
        // i, j ≤ 2 and compare with the reduced-form margins.
        let p = defaults();
        let jumps = jump_offsets(&p);
        let rep = verify_claims(&p);
        for i in 1..=2usize {
            for j in (i + 1)..=2usize {
                let lam_tau = jumps.lam_tau_abs(&p, i);
                let bound = p
                    .lam_f_left(j)
                    .sub(p.log_b[i].scale(0.5 * (p.eta2 - p.eta1)));
                let direct = bound.sub(lam_tau).to_f64();
                let entry = rep
                    .entries
                    .iter()
                    .find(|e| e.name == "tau 1.3" && e.i == i && e.j == j)
                    .unwrap();
                assert_relative_eq!(entry.margin, direct, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn claims_all_pass() {
        let rep = verify_claims(&defaults());
        for e in &rep.entries {
            assert!(
                e.pass,
                "{} (i={}, j={}) failed with margin {:.3e}",
                e.name, e.i, e.j, e.margin
            );
        }
        // delta 1.1 at j = 1 is the documented ~12x margin.
        let w = rep.worst("delta 1.1").unwrap();
        assert!(w.margin > 1.0 && w.margin < 4.0, "margin {}", w.margin);
    }

    #[test]
    fn ten_band_generation_stays_feasible() {
        let sch = ParamSchedule {
            n_bands: 10,
            ..ParamSchedule::default()
        };
        let p = generate_params(&sch).expect("10 bands feasible");
        assert!(check_assumptions(&p, 10).all_pass());
        assert!(verify_claims(&p).all_pass());
        // log b₁₀ is far outside f64; the ln of the log must stay finite.
        assert!(p.log_b[10].ln_abs().is_finite());
        assert!(p.log_b[10].to_f64().is_infinite());
    }
}
