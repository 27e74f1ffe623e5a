//! Zero-`eps` limit objects.
//!
//! With `gamma = lim eta/eps`, the CCPB boundary value tends to `t` and the
//! interior value to `c`, where
//!
//! ```text
//! phi_plus - t = gamma sqrt(f(t - c) - f(0))          (1)
//! f(t - c) = f(-t - c),      |c| < t <= phi_plus      (2)
//! ```
//!
//! Writing `s = t - c`, (1) gives `t` in terms of `s` and (2) becomes the
//! scalar equation `f(s) = f(k(s))` with
//! `k(s) = s - 2 phi_plus + 2 gamma sqrt(f(s) - f(0))`, which is what
//! [`solve_tc`] bisects.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ions::IonSystem;
use crate::roots::bisect;

/// Absolute tolerance for the scalar reductions.
pub const ROOT_TOL: f64 = 1e-13;

const NEWTON_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPair {
    pub gamma: f64,
    pub t: f64,
    pub c: f64,
    pub eq1_residual: f64,
    pub eq2_residual: f64,
}

impl LimitPair {
    pub fn t_minus_c(&self) -> f64 {
        self.t - self.c
    }
}

fn check_phi(phi_plus: f64) -> Result<()> {
    if !(phi_plus > 0.0) || !phi_plus.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "phi_plus must be positive, got {phi_plus}"
        )));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite and nonnegative, got {gamma}"
        )));
    }
    Ok(())
}

fn residuals(sys: &IonSystem, phi_plus: f64, gamma: f64, t: f64, c: f64) -> Result<(f64, f64)> {
    let r1 = phi_plus - t - gamma * sys.f_excess(t - c)?.max(0.0).sqrt();
    let r2 = sys.f_excess(t - c)? - sys.f_excess(-t - c)?;
    Ok((r1, r2))
}

/// The limit pair `(t, c)` for an electroneutral system.
pub fn solve_tc(sys: &IonSystem, phi_plus: f64, gamma: f64) -> Result<LimitPair> {
    sys.require_electroneutral()?;
    check_phi(phi_plus)?;
    check_gamma(gamma)?;
    if gamma == 0.0 {
        let c = c_star_neutral(sys, phi_plus)?;
        let (r1, r2) = residuals(sys, phi_plus, gamma, phi_plus, c)?;
        return Ok(LimitPair {
            gamma,
            t: phi_plus,
            c,
            eq1_residual: r1,
            eq2_residual: r2,
        });
    }

    let root = |s: f64| -> Result<f64> { Ok(gamma * sys.f_excess(s)?.max(0.0).sqrt()) };
    let k = |s: f64| -> Result<f64> { Ok(s - 2.0 * phi_plus + 2.0 * root(s)?) };

    let s1 = bisect_fallible(k, 0.0, 2.0 * phi_plus)?;
    let s2 = bisect_fallible(
        |s| Ok(sys.f_excess(s)? - sys.f_excess(k(s)?)?),
        0.0,
        s1,
    )?;
    let mut t = phi_plus - root(s2)?;
    let mut c = t - s2;
    newton_polish(sys, phi_plus, gamma, &mut t, &mut c)?;
    let (r1, r2) = residuals(sys, phi_plus, gamma, t, c)?;
    Ok(LimitPair {
        gamma,
        t,
        c,
        eq1_residual: r1,
        eq2_residual: r2,
    })
}

// Bisection where each evaluation may overflow; the first error wins.
fn bisect_fallible<F>(mut f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut err = None;
    let root = bisect(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        ROOT_TOL,
    );
    match err {
        Some(e) => Err(e),
        None => root,
    }
}

fn newton_polish(sys: &IonSystem, phi_plus: f64, gamma: f64, t: &mut f64, c: &mut f64) -> Result<()> {
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut r = residuals(sys, phi_plus, gamma, *t, *c)?;
    for _ in 0..NEWTON_STEPS {
        if norm(r) < 1e-15 {
            break;
        }
        let s = *t - *c;
        let fe = sys.f_excess(s)?;
        if fe <= 0.0 {
            break;
        }
        let fs = sys.f_prime(s)?;
        let fm = sys.f_prime(-*t - *c)?;
        let g = gamma * fs / (2.0 * fe.sqrt());
        let (j11, j12) = (-1.0 - g, g);
        let (j21, j22) = (fs + fm, -fs + fm);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dt = -(r.0 * j22 - j12 * r.1) / det;
        let dc = -(j11 * r.1 - j21 * r.0) / det;
        let (nt, nc) = (*t + dt, *c + dc);
        if !(nc.abs() < nt) || nt > phi_plus + 1e-12 {
            break;
        }
        let nr = residuals(sys, phi_plus, gamma, nt, nc)?;
        if norm(nr) >= norm(r) {
            break;
        }
        *t = nt;
        *c = nc;
        r = nr;
    }
    Ok(())
}

/// Interior limit at `gamma = 0`: the root of
/// `f(phi_plus - c) = f(-phi_plus - c)` in `(-phi_plus, phi_plus)`.
pub fn c_star_neutral(sys: &IonSystem, phi_plus: f64) -> Result<f64> {
    sys.require_electroneutral()?;
    let p = phi_plus.abs();
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "phi_plus must be nonzero, got {phi_plus}"
        )));
    }
    bisect_fallible(
        |c| Ok(sys.f_excess(p - c)? - sys.f_excess(-p - c)?),
        -p,
        p,
    )
}

/// `(1/3) log sech t`, a lower bound for `c` when the only species are a
/// monovalent anion and mono- plus divalent cations.
pub fn c_star_bracket(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    // log cosh t without overflow
    let log_cosh = t + (-2.0 * t).exp().ln_1p() - std::f64::consts::LN_2;
    Ok(-log_cosh / 3.0)
}

fn check_tc(t: f64, c: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need t > 0 and finite c, got ({t}, {c})"
        )));
    }
    if c == 0.0 {
        return Err(Error::Degenerate("c = 0 makes the ratio 0/0".into()));
    }
    Ok(())
}

/// Cation ratio `beta_1/beta_2` implied by `(t, c)` for a monovalent anion
/// with mono- and divalent cations:
/// `(1 - e^{3c} cosh t) / (e^c sinh c)`.
pub fn ratio_ca1(t: f64, c: f64) -> Result<f64> {
    check_tc(t, c)?;
    Ok((1.0 - (3.0 * c).exp() * t.cosh()) / (c.exp() * c.sinh()))
}

/// Generalization of [`ratio_ca1`] to a `z`-valent second cation:
/// `(z - e^{(1+z)c} sinh(z t)/sinh t) / (2 e^c sinh c)`.
pub fn ratio_ca2(t: f64, c: f64, z: f64) -> Result<f64> {
    check_tc(t, c)?;
    if !(z >= 2.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("valence z must be >= 2, got {z}")));
    }
    let ratio = (z * t).sinh() / t.sinh();
    if !ratio.is_finite() {
        return Err(Error::Degenerate(format!("sinh({z} t)/sinh t overflows at t = {t}")));
    }
    Ok((z - ((1.0 + z) * c).exp() * ratio) / (2.0 * c.exp() * c.sinh()))
}

/// Boundary limit of the PB solution: the root of
/// `|phi_plus - t| = gamma sqrt(f(t) - f(0))` between 0 and `phi_plus`.
pub fn pb_t_hat(sys: &IonSystem, phi_plus: f64, gamma: f64) -> Result<f64> {
    sys.require_electroneutral()?;
    check_gamma(gamma)?;
    if !phi_plus.is_finite() {
        return Err(Error::InvalidParameter("phi_plus must be finite".into()));
    }
    if gamma == 0.0 || phi_plus == 0.0 {
        return Ok(phi_plus);
    }
    let (lo, hi) = (phi_plus.min(0.0), phi_plus.max(0.0));
    bisect_fallible(
        |t| Ok((phi_plus - t).abs() - gamma * sys.f_excess(t)?.max(0.0).sqrt()),
        lo,
        hi,
    )
}

/// The unique zero of `f'`, the PB interior limit for any system.
pub fn pb_nonneutral_r(sys: &IonSystem) -> Result<f64> {
    let mut width = 1.0;
    loop {
        let (a, b) = (sys.f_prime(-width)?, sys.f_prime(width)?);
        if a <= 0.0 && b >= 0.0 {
            return bisect_fallible(|s| sys.f_prime(s), -width, width);
        }
        width *= 2.0;
    }
}

/// `n` points evenly spaced in `log10` between `lo` and `hi`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

pub const DEFAULT_SWEEP_POINTS: usize = 200;

/// 200 log-spaced values on `[1e-3, 1e3]`.
pub fn default_gammas() -> Vec<f64> {
    log_spaced(1e-3, 1e3, DEFAULT_SWEEP_POINTS)
}

/// Slack used for monotonicity and turning-point detection.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<LimitPair>,
    pub monotone_t: bool,
    pub monotone_tc: bool,
    /// Row indices where `c` turns around.
    pub c_extrema: Vec<usize>,
}

impl SweepTable {
    pub fn from_rows(rows: Vec<LimitPair>) -> Self {
        let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
        let tc: Vec<f64> = rows.iter().map(LimitPair::t_minus_c).collect();
        let c: Vec<f64> = rows.iter().map(|r| r.c).collect();
        Self {
            monotone_t: decreasing_violations(&t).is_empty(),
            monotone_tc: decreasing_violations(&tc).is_empty(),
            c_extrema: turning_points(&c),
            rows,
        }
    }
}

/// Indices `i` with `v[i+1] - v[i] > -MONOTONE_SLACK`, i.e. steps that fail
/// to decrease.
pub fn decreasing_violations(v: &[f64]) -> Vec<usize> {
    v.windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] > -MONOTONE_SLACK)
        .map(|(i, _)| i)
        .collect()
}

/// Interior indices where consecutive differences change sign; differences
/// within `MONOTONE_SLACK` of zero are skipped.
pub fn turning_points(v: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last = 0i8;
    for (i, w) in v.windows(2).enumerate() {
        let d = w[1] - w[0];
        let sign = if d > MONOTONE_SLACK {
            1
        } else if d < -MONOTONE_SLACK {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last != 0 && sign != last {
                out.push(i);
            }
            last = sign;
        }
    }
    out
}

/// Solves the limit pair at every `gamma`.
pub fn gamma_sweep(
    sys: &IonSystem,
    phi_plus: f64,
    gammas: &[f64],
    exec: Execution,
) -> Result<SweepTable> {
    sys.require_electroneutral()?;
    if gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("gammas must be strictly increasing".into()));
    }
    let rows = exec.try_map(gammas, |&g| {
        solve_tc(sys, phi_plus, g).map_err(|e| Error::InvalidParameter(format!("gamma {g}: {e}")))
    })?;
    Ok(SweepTable::from_rows(rows))
}
