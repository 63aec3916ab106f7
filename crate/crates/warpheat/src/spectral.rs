//! Dirichlet heat kernels on balls via Sturm–Liouville eigen-expansion.
//!
//! The generalized problem −(Aφ′)′ = λAφ with Dirichlet data at R and the
//! zero-flux regularity stencil at the pole is discretized with the same
//! finite volumes as the time stepper, then symmetrized with the cell
//! masses: T = M^{-1/2} K M^{-1/2} is real symmetric tridiagonal, so the
//! lowest J eigenvalues come from Sturm bisection and the eigenvectors
//! from shifted inverse iteration. Orthonormality in the weighted measure
//! holds by construction up to solver precision and is re-checked.

use crate::error::Error;
use crate::radial::{cone_kernel, RadialSpace};
use crate::solver::{cell_masses, conductances};

/// Count eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below x via the Sturm sequence of the LDLT pivots.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let guard = 1e-300;
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard { guard.copysign(q) } else { q };
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th (0-based) eigenvalue by bisection between Gershgorin bounds.
fn bisect_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let el = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let er = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - el - er);
        hi = hi.max(diag[i] + el + er);
    }
    lo -= 1.0;
    hi += 1.0;
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < 2.0 * f64::EPSILON * mid.abs().max(1e-30) {
            break;
        }
        if sturm_count(diag, off, mid) <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Solve (T − shift·I)x = rhs in place; near-singular pivots are guarded,
/// which is exactly what inverse iteration wants.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = rhs.len();
    let guard = 1e-280;
    let mut c = vec![0.0; n];
    let mut piv = diag[0] - shift;
    if piv.abs() < guard {
        piv = guard.copysign(piv);
    }
    c[0] = off[0] / piv;
    rhs[0] /= piv;
    for i in 1..n {
        let mut denom = (diag[i] - shift) - off[i - 1] * c[i - 1];
        if denom.abs() < guard {
            denom = guard.copysign(denom);
        }
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Dirichlet eigenpairs on the ball of radius R, orthonormal in ∫··A dr.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub radius: f64,
    /// Node radii 0 = r₀ < … < r_{n-1} = R.
    pub r: Vec<f64>,
    /// Cell masses of the measure A dr.
    pub masses: Vec<f64>,
    /// λ₁ ≤ λ₂ ≤ … (J entries).
    pub lambda: Vec<f64>,
    /// φⱼ on the nodes (φⱼ(R) = 0 held explicitly).
    pub phi: Vec<Vec<f64>>,
}

/// Lowest J Dirichlet eigenpairs on B(R) with `grid` uniform cells.
pub fn eigensolve(
    space: &RadialSpace,
    radius: f64,
    modes: usize,
    grid: usize,
) -> Result<SpectralDecomposition, Error> {
    if modes + 2 >= grid {
        return Err(Error::Eigensolver(format!(
            "J = {modes} too large for grid {grid}"
        )));
    }
    let n_nodes = grid + 1;
    let r: Vec<f64> = (0..n_nodes)
        .map(|i| radius * i as f64 / (n_nodes - 1) as f64)
        .collect();
    let masses = cell_masses(space, &r);
    let cond = conductances(space, &r);
    // Unknowns exclude the Dirichlet node at R.
    let n = n_nodes - 1;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let cl = if i > 0 { cond[i - 1] } else { 0.0 };
        let cr = cond[i];
        diag[i] = (cl + cr) / masses[i];
        if i + 1 < n {
            off[i] = -cond[i] / (masses[i] * masses[i + 1]).sqrt();
        }
    }

    let mut lambda = Vec::with_capacity(modes);
    let mut phi = Vec::with_capacity(modes);
    // Deterministic start vector for the inverse iterations.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for k in 0..modes {
        let lam = bisect_eigenvalue(&diag, &off, k);
        if !lam.is_finite() {
            return Err(Error::Eigensolver(format!("eigenvalue {k} not finite")));
        }
        let mut v: Vec<f64> = (0..n).map(|_| next()).collect();
        for _ in 0..3 {
            shifted_solve(&diag, &off, lam, &mut v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Eigensolver(format!("inverse iteration failed at {k}")));
            }
            for x in &mut v {
                *x /= norm;
            }
        }
        // Back to φ = M^{-1/2}ψ, M-normalized, with φ(0) > 0 and the
        // boundary value pinned to zero.
        let mut f: Vec<f64> = (0..n).map(|i| v[i] / masses[i].sqrt()).collect();
        // The pole cells carry measure ~h^{1+m}, so the inverse-iteration
        // components there sit near the roundoff floor of the ℓ² solve.
        // Rebuild the inner quarter from the outward three-term recurrence
        // (stable toward growing r) and match the amplitude by least
        // squares over the well-conditioned middle of the ball.
        let i_quarter = n / 4;
        let i_half = n / 2;
        if i_half > i_quarter + 8 {
            let mut p = vec![0.0; i_half + 1];
            p[0] = 1.0;
            p[1] = (cond[0] - lam * masses[0]) * p[0] / cond[0];
            for i in 1..i_half {
                p[i + 1] = ((cond[i - 1] + cond[i] - lam * masses[i]) * p[i]
                    - cond[i - 1] * p[i - 1])
                    / cond[i];
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for i in i_quarter..=i_half {
                num += f[i] * p[i] * masses[i];
                den += p[i] * p[i] * masses[i];
            }
            let scale = num / den;
            for i in 0..i_quarter {
                f[i] = scale * p[i];
            }
        }
        let norm2: f64 = f.iter().zip(&masses).map(|(x, m)| x * x * m).sum();
        let scale = norm2.sqrt();
        for x in &mut f {
            *x /= scale;
        }
        if f[0] < 0.0 {
            for x in &mut f {
                *x = -*x;
            }
        }
        f.push(0.0);
        lambda.push(lam);
        phi.push(f);
    }

    Ok(SpectralDecomposition {
        radius,
        r,
        masses,
        lambda,
        phi,
    })
}

impl SpectralDecomposition {
    /// Max |∫φᵢφⱼ A dr − δᵢⱼ| over the computed pairs.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.phi.len() {
            for j in i..self.phi.len() {
                let dot: f64 = self.phi[i]
                    .iter()
                    .zip(&self.phi[j])
                    .zip(&self.masses)
                    .map(|((a, b), m)| a * b * m)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    /// φⱼ at an arbitrary radius by linear interpolation.
    pub fn phi_at(&self, j: usize, x: f64) -> f64 {
        let n = self.r.len();
        if x <= 0.0 {
            return self.phi[j][0];
        }
        if x >= self.radius {
            return 0.0;
        }
        let h = self.radius / (n - 1) as f64;
        let i = ((x / h) as usize).min(n - 2);
        let w = (x - self.r[i]) / h;
        self.phi[j][i] * (1.0 - w) + self.phi[j][i + 1] * w
    }

    pub fn sup_phi(&self, j: usize) -> f64 {
        self.phi[j].iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }
}

/// Kernel value plus the truncation-tail bound that was in force.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Σ_{j≤J} e^{-λⱼt} φⱼ(x)φⱼ(y) with a tail bound assembled from the
/// fitted growth of λⱼ and sup|φⱼ|; errs when the bound is not small
/// against the partial sum.
pub fn kernel(
    spec: &SpectralDecomposition,
    x: f64,
    y: f64,
    t: f64,
    n_dim: f64,
) -> Result<KernelValue, Error> {
    if !(t > 0.0) {
        return Err(Error::Domain("kernel needs t > 0".into()));
    }
    let total: f64 = (0..spec.lambda.len())
        .map(|j| (-spec.lambda[j] * t).exp() * (spec.phi_at(j, x) * spec.phi_at(j, y)))
        .sum();
    let jj = spec.lambda.len();
    // λ_j ≥ λ_J·(j/J)^{1/n} and sup|φ_j| ≤ c·j^{n/2} with c fitted.
    let lam_j = spec.lambda[jj - 1];
    let c_sup = (0..jj)
        .map(|j| spec.sup_phi(j) / ((j + 1) as f64).powf(n_dim / 2.0))
        .fold(0.0f64, f64::max);
    let mut tail = 0.0;
    let mut j = jj + 1;
    loop {
        let lam = lam_j * (j as f64 / jj as f64).powf(1.0 / n_dim);
        let term = (-lam * t).exp() * (c_sup * (j as f64).powf(n_dim / 2.0)).powi(2);
        tail += term;
        if j > 4 * jj && (term == 0.0 || term < 1e-30 * tail.max(1e-250)) {
            break;
        }
        j += 1;
        if j > jj + 2_000_000 {
            return Err(Error::TruncationTime { t, j: jj, bound: f64::INFINITY });
        }
    }
    let scale = total.abs().max((-spec.lambda[0] * t).exp() * c_sup * c_sup);
    if tail > 1e-4 * scale {
        return Err(Error::TruncationTime { t, j: jj, bound: tail });
    }
    Ok(KernelValue { value: total, tail_bound: tail })
}

/// Fitted eigenvalue growth constants: c₁·R^{-2}·j^{1/n} ≤ λⱼ ≤ c₂·R^{-2}·j².
#[derive(Clone, Copy, Debug)]
pub struct WeylReport {
    pub c_lower: f64,
    pub c_upper: f64,
    pub pass: bool,
}

pub fn weyl_check(spec: &SpectralDecomposition, n_dim: f64) -> WeylReport {
    let r2 = spec.radius * spec.radius;
    let mut c_lower = f64::INFINITY;
    let mut c_upper: f64 = 0.0;
    let mut increasing = true;
    for (j, &lam) in spec.lambda.iter().enumerate() {
        let jj = (j + 1) as f64;
        c_lower = c_lower.min(lam * r2 / jj.powf(1.0 / n_dim));
        c_upper = c_upper.max(lam * r2 / (jj * jj));
        if j > 0 && lam < spec.lambda[j - 1] {
            increasing = false;
        }
    }
    WeylReport {
        c_lower,
        c_upper,
        pass: increasing && c_lower > 0.0 && c_upper.is_finite(),
    }
}

/// Fitted sup-norm constant: sup|φⱼ| ≤ c·j^{n/2}.
#[derive(Clone, Copy, Debug)]
pub struct LinfReport {
    pub c: f64,
    pub pass: bool,
}

pub fn linf_check(spec: &SpectralDecomposition, n_dim: f64) -> LinfReport {
    let c = (0..spec.lambda.len())
        .map(|j| spec.sup_phi(j) / ((j + 1) as f64).powf(n_dim / 2.0))
        .fold(0.0f64, f64::max);
    LinfReport { c, pass: c.is_finite() && c > 0.0 }
}

/// ∫_{R-δ}^{R} φⱼ² A dr over the solver's cell partition.
pub fn annulus_mass(spec: &SpectralDecomposition, j: usize, delta: f64) -> f64 {
    let n = spec.r.len();
    let r_out = spec.radius - delta;
    let face = |i: usize| -> f64 {
        if i + 1 < n {
            0.5 * (spec.r[i] + spec.r[i + 1])
        } else {
            spec.r[n - 1]
        }
    };
    let mut acc = 0.0;
    let mut lo_face = 0.0f64;
    for i in 0..n {
        let hi_face = face(i);
        if hi_face > r_out {
            let lo = lo_face.max(r_out);
            // piecewise-constant φ² over the cell fraction, linear measure
            let frac = (hi_face - lo) / (hi_face - lo_face).max(1e-300);
            acc += spec.phi[j][i] * spec.phi[j][i] * spec.masses[i] * frac;
        }
        lo_face = hi_face;
    }
    acc
}

/// Fitted gradient-bound constant: |φⱼ′| ≤ c(2/R + λⱼ)·sup|φⱼ| on B(R/2).
#[derive(Clone, Copy, Debug)]
pub struct GradientReport {
    pub c: f64,
    pub pass: bool,
}

pub fn gradient_bound_check(spec: &SpectralDecomposition) -> GradientReport {
    let n = spec.r.len();
    let h = spec.radius / (n - 1) as f64;
    let mut c: f64 = 0.0;
    for j in 0..spec.lambda.len() {
        let sup = spec.sup_phi(j);
        let bound = (2.0 / spec.radius + spec.lambda[j]) * sup;
        for i in 1..n - 1 {
            if spec.r[i] > 0.5 * spec.radius {
                break;
            }
            let grad = (spec.phi[j][i + 1] - spec.phi[j][i - 1]).abs() / (2.0 * h);
            c = c.max(grad / bound);
        }
    }
    GradientReport { c, pass: c.is_finite() && c > 0.0 }
}

/// Dirichlet → global comparison data.
#[derive(Clone, Debug)]
pub struct GlobalCompareReport {
    pub radii: Vec<f64>,
    /// H_R(0,0,t) per radius.
    pub center: Vec<f64>,
    /// Global kernel H(0,0,t).
    pub global_center: f64,
    /// sup_x |H_R(x,0,t) − H(x,0,t)| per radius.
    pub sup_diff: Vec<f64>,
    /// Fitted c in M_R ≤ c·max(e^{-R²/5t}, R^{-n}).
    pub fitted_c: f64,
}

/// Grid and truncation for `global_compare`.
#[derive(Clone, Debug)]
pub struct GlobalCompareConfig {
    /// Unit-ball grid cells (each R reuses the same spectrum by scaling).
    pub grid: usize,
    pub modes: usize,
    /// Richardson-extrapolate kernel values from grid and 2·grid solves.
    pub richardson: bool,
}

impl Default for GlobalCompareConfig {
    fn default() -> Self {
        GlobalCompareConfig { grid: 4000, modes: 48, richardson: true }
    }
}

/// Compare Dirichlet kernels on growing balls against the global kernel.
///
/// On a cone the ball problems are exact rescalings of the unit ball:
/// λⱼ^{(R)} = λⱼ/R², φⱼ^{(R)}(x) = R^{-α/2}φⱼ(x/R). One unit-ball
/// eigensolve therefore serves every radius, which removes all cross-R
/// discretization noise — essential, since the true kernel gaps decay
/// like e^{-R²/t}. Errs on a pointwise maximum-principle violation.
pub fn global_compare(
    space: &RadialSpace,
    radii: &[f64],
    t: f64,
    config: &GlobalCompareConfig,
) -> Result<GlobalCompareReport, Error> {
    let alpha = match space {
        RadialSpace::Cone { alpha, .. } => *alpha,
        _ => {
            return Err(Error::Domain(
                "global_compare needs a cone space (closed-form global kernel)".into(),
            ))
        }
    };
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.is_empty() {
        return Err(Error::Domain("radii must be increasing".into()));
    }

    let unit = RadialSpace::cone(alpha, 0.0)?;
    // The finite-volume pole stencil carries an h³ error term next to the
    // h² one, so two-grid Richardson stalls near 1e-10; the three-grid
    // combination (1, −12, 32)/21 on grids (g, 2g, 4g) annihilates both
    // and leaves O(h⁴).
    let specs: Vec<(f64, SpectralDecomposition)> = if config.richardson {
        vec![
            (1.0 / 21.0, eigensolve(&unit, 1.0, config.modes, config.grid)?),
            (-12.0 / 21.0, eigensolve(&unit, 1.0, config.modes, 2 * config.grid)?),
            (32.0 / 21.0, eigensolve(&unit, 1.0, config.modes, 4 * config.grid)?),
        ]
    } else {
        vec![(1.0, eigensolve(&unit, 1.0, config.modes, config.grid)?)]
    };
    // H_R(x,0,t) = R^{-α} Σ e^{-λⱼ t/R²} φⱼ(x/R) φⱼ(0).
    let ball_kernel = |spec: &SpectralDecomposition, radius: f64, x: f64| -> f64 {
        let s = t / (radius * radius);
        (0..spec.lambda.len())
            .map(|j| (-spec.lambda[j] * s).exp() * (spec.phi_at(j, x / radius) * spec.phi[j][0]))
            .sum::<f64>()
            * radius.powf(-alpha)
    };
    let eval = |radius: f64, x: f64| -> f64 {
        specs
            .iter()
            .map(|(w, spec)| w * ball_kernel(spec, radius, x))
            .sum()
    };

    // Common evaluation radii: fractions of the smallest ball.
    let r_small = radii[0];
    let xs: Vec<f64> = (0..33).map(|i| r_small * i as f64 / 32.0).collect();

    let mut center = Vec::with_capacity(radii.len());
    let mut sup_diff = Vec::with_capacity(radii.len());
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(radii.len());
    for &radius in radii {
        let row: Vec<f64> = xs.iter().map(|&x| eval(radius, x)).collect();
        center.push(row[0]);
        let mut sup: f64 = 0.0;
        for (&x, &hr) in xs.iter().zip(&row) {
            let hg = cone_kernel(alpha, x, t)?;
            sup = sup.max((hg - hr).abs());
        }
        // The sup over the full ball is attained near the boundary where
        // H_R = 0; include it.
        sup = sup.max(cone_kernel(alpha, radius, t)?);
        sup_diff.push(sup);
        rows.push(row);
    }

    // Pointwise maximum principle across consecutive radii: the rows share
    // one spectrum, but off-node values carry the linear-interpolation
    // error O(h²·φ″), so the tolerance tracks the grid. The comparison
    // against the exact global kernel additionally carries the scheme's
    // h² eigenvalue bias and gets a looser tolerance.
    let h = 1.0 / config.grid as f64;
    let tol = (1e-9 + 10.0 * h * h) * cone_kernel(alpha, 0.0, t)?;
    let tol_global = 1e-3 * cone_kernel(alpha, 0.0, t)?;
    for k in 1..rows.len() {
        for (i, &x) in xs.iter().enumerate() {
            if rows[k - 1][i] > rows[k][i] + tol {
                return Err(Error::MonotonicityViolation(format!(
                    "H_{{R={}}}({x}) = {} exceeds H_{{R={}}}({x}) = {}",
                    radii[k - 1],
                    rows[k - 1][i],
                    radii[k],
                    rows[k][i]
                )));
            }
            let hg = cone_kernel(alpha, x, t)?;
            if rows[k][i] > hg + tol_global {
                return Err(Error::MonotonicityViolation(format!(
                    "H_{{R={}}}({x}) exceeds the global kernel",
                    radii[k]
                )));
            }
        }
    }

    let n_dim = alpha;
    let fitted_c = radii
        .iter()
        .zip(&sup_diff)
        .map(|(&radius, &m)| {
            m / (-radius * radius / (5.0 * t)).exp().max(radius.powf(-n_dim))
        })
        .fold(0.0f64, f64::max);

    Ok(GlobalCompareReport {
        radii: radii.to_vec(),
        center,
        global_center: cone_kernel(alpha, 0.0, t)?,
        sup_diff,
        fitted_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::cone_constant;
    use crate::solver::{solve, SolverConfig};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ball3(grid: usize, modes: usize) -> SpectralDecomposition {
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        eigensolve(&space, 1.0, modes, grid).unwrap()
    }

    #[test]
    fn unit_ball_eigenvalues_match_sine_modes() {
        let spec = ball3(2000, 10);
        for j in 0..10 {
            let want = ((j + 1) as f64 * PI).powi(2);
            assert_relative_eq!(spec.lambda[j], want, max_relative = 5e-3);
        }
        // φⱼ ∝ sin(jπr)/r: check the first mode profile at a few radii.
        let c = (2.0f64 / 3.0).sqrt();
        for &x in &[0.25, 0.5, 0.75] {
            let want = c * (PI * x).sin() / x;
            assert_relative_eq!(spec.phi_at(0, x), want, max_relative = 1e-3);
        }
    }

    #[test]
    fn interval_neumann_pole_gives_cosine_modes() {
        // A ≡ 1 (α = 1 cone): zero flux at 0 and Dirichlet at 1 give
        // λⱼ = ((j − ½)π)².
        let space = RadialSpace::cone(1.0, 0.0).unwrap();
        let spec = eigensolve(&space, 1.0, 6, 2000).unwrap();
        for j in 0..6 {
            let want = (((j + 1) as f64 - 0.5) * PI).powi(2);
            assert_relative_eq!(spec.lambda[j], want, max_relative = 5e-3);
        }
    }

    #[test]
    fn orthonormality_holds() {
        let spec = ball3(2000, 12);
        assert!(spec.orthonormality_residual() < 1e-8);
    }

    #[test]
    fn eigensolver_rejects_oversized_mode_count() {
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        assert!(matches!(
            eigensolve(&space, 1.0, 100, 50),
            Err(Error::Eigensolver(_))
        ));
    }

    #[test]
    fn kernel_symmetry_and_spectral_gap() {
        let spec = ball3(1500, 24);
        let a = kernel(&spec, 0.3, 0.6, 0.05, 3.0).unwrap().value;
        let b = kernel(&spec, 0.6, 0.3, 0.05, 3.0).unwrap().value;
        assert_eq!(a, b);
        // Large t: kernel → e^{-λ₁t}φ₁(x)φ₁(y) with deviation < e^{-(λ₂-λ₁)t}.
        let t = 0.5;
        let k = kernel(&spec, 0.4, 0.5, t, 3.0).unwrap().value;
        let leading = (-spec.lambda[0] * t).exp() * spec.phi_at(0, 0.4) * spec.phi_at(0, 0.5);
        let gap = (-(spec.lambda[1] - spec.lambda[0]) * t).exp();
        assert!(((k - leading) / leading).abs() < gap);
    }

    #[test]
    fn kernel_truncation_guard_fires_for_tiny_t() {
        let spec = ball3(1000, 8);
        assert!(matches!(
            kernel(&spec, 0.5, 0.5, 1e-6, 3.0),
            Err(Error::TruncationTime { .. })
        ));
    }

    #[test]
    fn truncation_bound_dominates_observed_difference() {
        let coarse = ball3(1500, 16);
        let fine = ball3(1500, 32);
        let t = 0.02;
        let a = kernel(&coarse, 0.5, 0.5, t, 3.0).unwrap();
        let b = kernel(&fine, 0.5, 0.5, t, 3.0).unwrap();
        assert!(
            (a.value - b.value).abs() <= a.tail_bound,
            "observed {} vs bound {}",
            (a.value - b.value).abs(),
            a.tail_bound
        );
    }

    #[test]
    fn weyl_constants_are_tight_for_the_ball() {
        let spec = ball3(2000, 10);
        let rep = weyl_check(&spec, 3.0);
        assert!(rep.pass);
        // Upper bound λⱼ ≤ c₂ j² is attained at j = 1 with c₂ = π².
        assert_relative_eq!(rep.c_upper, PI * PI, max_relative = 1e-2);
        assert!(rep.c_lower > 0.0);
    }

    #[test]
    fn eigenvalues_scale_like_inverse_square_radius() {
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        let a = eigensolve(&space, 1.0, 5, 1200).unwrap();
        let b = eigensolve(&space, 2.0, 5, 1200).unwrap();
        for j in 0..5 {
            assert_relative_eq!(a.lambda[j], 4.0 * b.lambda[j], max_relative = 1e-12);
        }
    }

    #[test]
    fn linf_constant_stable_under_grid_doubling() {
        let a = linf_check(&ball3(1500, 10), 3.0);
        let b = linf_check(&ball3(3000, 10), 3.0);
        assert!(a.pass && b.pass);
        assert_relative_eq!(a.c, b.c, max_relative = 5e-2);
    }

    #[test]
    fn annulus_mass_matches_closed_form() {
        let spec = ball3(4000, 3);
        // 2∫_{0.9}^{1} sin²(πr) dr ≈ 0.00645
        let got = annulus_mass(&spec, 0, 0.1);
        assert_relative_eq!(got, 0.00645, max_relative = 2e-2);
        // Full ball = normalization.
        assert_relative_eq!(annulus_mass(&spec, 0, 1.0), 1.0, max_relative = 1e-10);
        // Monotone in δ.
        let mut prev = 0.0;
        for k in 1..=10 {
            let m = annulus_mass(&spec, 0, 0.1 * k as f64);
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn gradient_constant_is_order_one_and_scale_free() {
        let spec = ball3(2000, 6);
        let rep = gradient_bound_check(&spec);
        assert!(rep.pass);
        assert!(rep.c < 10.0, "c = {}", rep.c);
        // Stability under grid doubling within 10%.
        let rep2 = gradient_bound_check(&ball3(4000, 6));
        assert_relative_eq!(rep.c, rep2.c, max_relative = 0.1);
    }

    #[test]
    fn expansion_matches_time_stepper() {
        // Shell source at r = 0.5 on the unit ball: spectral kernel against
        // the Crank–Nicolson run from a concentrated Gaussian shell.
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        let spec = eigensolve(&space, 1.0, 48, 3000).unwrap();
        let t = 0.02;
        let s0 = 1e-4;
        let init = move |r: f64| (-(r - 0.5) * (r - 0.5) / (4.0 * s0)).exp();
        let config = SolverConfig {
            n_grid: 4000,
            r_max: Some(1.0),
            r_min_frac: 1e-2,
            dlog_t: 0.005,
            ..SolverConfig::default()
        };
        let field = solve(&space, &init, s0, &[t], &config).unwrap();
        let mass0 = {
            // normalize the shell to unit measure like a kernel row
            let f0 = solve(&space, &init, s0, &[s0 * 1.0000001], &config).unwrap();
            f0.tail_mass(&space, 0, 0.0)
        };
        // compare at x = 0.5
        let idx = field
            .r
            .iter()
            .position(|&x| x >= 0.5)
            .unwrap();
        let got = field.values[0][idx] / mass0;
        let want = kernel(&spec, field.r[idx], 0.5, t, 3.0).unwrap().value;
        assert_relative_eq!(got, want, max_relative = 2e-2);
    }

    #[test]
    fn dirichlet_kernels_increase_to_the_global_kernel() {
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        let config = GlobalCompareConfig { grid: 2000, modes: 32, richardson: true };
        let rep = global_compare(&space, &[4.0, 6.0, 8.0], 1.0, &config).unwrap();
        // The 4 → 6 gap (7e-6 relative) is strictly resolvable; the 6 → 8
        // gap (3.3e-14 relative) sits far below f64 eigensolver resolution,
        // so it is asserted within the measured 1e-9 noise band.
        assert!(rep.center[0] < rep.center[1]);
        assert!(rep.center[1] <= rep.center[2] + 1e-9 * rep.global_center);
        assert!(rep.center[2] <= rep.global_center * (1.0 + 1e-9));
        // Differences at the center shrink by ≥ 10x per step.
        let d: Vec<f64> = rep.center.iter().map(|&c| rep.global_center - c).collect();
        assert!(d[0] > 10.0 * d[1].max(0.0));
        assert!(rep.fitted_c.is_finite());
        // C(3) sanity of the global center.
        assert_relative_eq!(
            rep.global_center,
            cone_constant(3.0).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn identical_radii_give_identical_kernels() {
        let space = RadialSpace::euclidean(3, 0.0).unwrap();
        let config = GlobalCompareConfig { grid: 500, modes: 16, richardson: false };
        let a = global_compare(&space, &[4.0, 6.0], 1.0, &config).unwrap();
        let b = global_compare(&space, &[4.0, 6.0], 1.0, &config).unwrap();
        assert_eq!(a.center, b.center);
    }
}
