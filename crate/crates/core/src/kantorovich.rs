//! Scalar majorant `h(t) = κℓ₂/6·t³ + κℓ₁/2·t² − t + η`, its admissibility
//! threshold and roots, the Halley-type majorant sequences, and the
//! semilocal convergence certificate built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{PrecisionContext, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    pub kappa: Scalar,
    pub l1: Scalar,
    /// Lipschitz constant of `f''`; zero gives the classical quadratic majorant.
    pub l2: Scalar,
    pub eta: Scalar,
}

impl MajorantParams {
    pub fn new(kappa: Scalar, l1: Scalar, l2: Scalar, eta: Scalar) -> Result<Self> {
        let p = MajorantParams { kappa, l1, l2, eta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let positive = [&self.kappa, &self.l1, &self.eta].iter().all(|v| v.is_positive());
        if !positive || self.l2.is_negative() || !self.l2.is_finite() {
            return Err(Error::InvalidArgument(
                "kappa, l1, eta must be positive and l2 nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn ctx(&self) -> PrecisionContext {
        let digits = [&self.kappa, &self.l1, &self.l2, &self.eta]
            .iter()
            .map(|s| s.digits())
            .max()
            .unwrap_or(PrecisionContext::DEFAULT_DIGITS);
        PrecisionContext::new(digits.max(PrecisionContext::MIN_DIGITS)).expect("valid digits")
    }

    fn kl1(&self) -> Scalar {
        &self.kappa * &self.l1
    }

    fn kl2(&self) -> Scalar {
        &self.kappa * &self.l2
    }
}

/// `(h(t), h'(t), h''(t))`.
pub fn h_eval(p: &MajorantParams, t: &Scalar) -> (Scalar, Scalar, Scalar) {
    let c = p.ctx();
    let (kl1, kl2) = (p.kl1(), p.kl2());
    let t2 = t * t;
    let h = &kl2 * &t2 * t / c.int(6) + &kl1 * &t2 / c.int(2) - t + &p.eta;
    let dh = &kl2 * &t2 / c.int(2) + &kl1 * t - c.one();
    let d2h = &kl2 * t + &kl1;
    (h, dh, d2h)
}

/// `2(κℓ₁ + 2√(κ²ℓ₁² + 2κℓ₂)) / (3(κℓ₁ + √(κ²ℓ₁² + 2κℓ₂))²)`.
pub fn eta_threshold(kappa: &Scalar, l1: &Scalar, l2: &Scalar) -> Scalar {
    let kl1 = kappa * l1;
    let kl2 = kappa * l2;
    let root = (&kl1 * &kl1 + &kl2 + &kl2).sqrt();
    let two = Scalar::from_float(rug::Float::with_val(kl1.prec(), 2));
    let three = Scalar::from_float(rug::Float::with_val(kl1.prec(), 3));
    let num = &two * (&kl1 + &two * &root);
    let den = three * (&kl1 + &root).powi(2);
    num / den
}

fn admissible_threshold(p: &MajorantParams) -> Result<Scalar> {
    p.validate()?;
    let threshold = eta_threshold(&p.kappa, &p.l1, &p.l2);
    if p.eta < threshold {
        Ok(threshold)
    } else {
        Err(Error::NotAdmissible {
            eta: p.eta.to_sig_string(12),
            threshold: threshold.to_sig_string(12),
        })
    }
}

/// Positive stationary point of `h`, where it attains its minimum on `t > 0`.
fn stationary_point(p: &MajorantParams) -> Scalar {
    let (kl1, kl2) = (p.kl1(), p.kl2());
    if kl2.is_zero() {
        return p.ctx().one() / kl1;
    }
    ((&kl1 * &kl1 + &kl2 + &kl2).sqrt() - &kl1) / kl2
}

/// Root of `h` on `[lo, hi]` with `h(lo)` and `h(hi)` of opposite signs:
/// Newton steps safeguarded by bisection until `|h| ≤ 10^(20 - digits)`.
fn bracketed_root(p: &MajorantParams, mut lo: Scalar, mut hi: Scalar, tol: &Scalar) -> Scalar {
    let c = p.ctx();
    let half = c.ratio(1, 2);
    let lo_sign = h_eval(p, &lo).0.cmp0();
    let mut t = (&lo + &hi) * &half;
    // bisection alone needs about `bits` steps; the cap is a backstop
    for _ in 0..4 * c.bits() {
        let (h, dh, _) = h_eval(p, &t);
        if h.abs() <= *tol {
            return t;
        }
        if h.cmp0() == lo_sign {
            lo = t.clone();
        } else {
            hi = t.clone();
        }
        let newton = if dh.is_zero() { None } else { Some(&t - &h / &dh) };
        t = match newton {
            Some(n) if n > lo && n < hi => n,
            _ => (&lo + &hi) * &half,
        };
        if lo == hi {
            break;
        }
    }
    t
}

/// Smallest and second positive roots `t̄ ≤ t̂` of `h`.
pub fn roots_of_h(p: &MajorantParams) -> Result<(Scalar, Scalar)> {
    admissible_threshold(p)?;
    let c = p.ctx();
    let tol = c.pow10(20 - c.digits() as i32);
    let kl1 = p.kl1();
    if p.kl2().is_zero() {
        // κℓ₁/2·t² − t + η = 0
        let disc = (c.one() - c.int(2) * &kl1 * &p.eta).sqrt();
        let t_bar = c.int(2) * &p.eta / (c.one() + &disc);
        let t_hat = (c.one() + disc) / kl1;
        return Ok((t_bar, t_hat));
    }
    let t_star = stationary_point(p);
    let t_bar = bracketed_root(p, c.zero(), t_star.clone(), &tol);
    let mut t_big = &t_star + &t_star;
    while !h_eval(p, &t_big).0.is_positive() {
        t_big = &t_big + &t_big;
    }
    let t_hat = bracketed_root(p, t_star, t_big, &tol);
    Ok((t_bar, t_hat))
}

/// `t₀ = s₀ = 0`, `s_{k+1} = t_k − h(t_k)/h'(t_k)`,
/// `t_{k+1} = t_k − h(t_k)/(h'(t_k) + ½h''(t_k)(s_{k+1} − t_k))` for
/// `k = 0..n-1`.
pub fn majorant_sequences(p: &MajorantParams, n: usize) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    admissible_threshold(p)?;
    let c = p.ctx();
    let half = c.ratio(1, 2);
    let mut s_seq = vec![c.zero()];
    let mut t_seq = vec![c.zero()];
    for k in 0..n {
        let t = &t_seq[k];
        let (h, dh, d2h) = h_eval(p, t);
        let s_next = t - &h / &dh;
        let denom = dh + &half * d2h * (&s_next - t);
        let t_next = t - h / denom;
        s_seq.push(s_next);
        t_seq.push(t_next);
    }
    Ok((s_seq, t_seq))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateInput {
    pub params: MajorantParams,
    /// Domain radius `a`.
    pub a: Scalar,
    /// Range radius `b`.
    pub b: Scalar,
    pub y0_norm: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub lhs: Option<Scalar>,
    pub rhs: Option<Scalar>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantReport {
    pub eta_max: Scalar,
    pub admissible: bool,
    pub t_bar: Option<Scalar>,
    pub t_hat: Option<Scalar>,
    pub s_seq: Vec<Scalar>,
    pub t_seq: Vec<Scalar>,
    pub conditions: Vec<ConditionCheck>,
    pub certificate: Verdict,
    /// Least-squares fit of `ln(t̄ − t_k) ≈ ln M + 3^k ln α`; empirical, not a
    /// proof constant.
    pub alpha_fit: Option<Scalar>,
    #[serde(rename = "M_fit")]
    pub m_fit: Option<Scalar>,
}

impl MajorantReport {
    pub fn passed(&self) -> bool {
        self.certificate == Verdict::Pass
    }

    pub fn table(&self) -> String {
        let mut out = String::from("condition                          lhs              rhs              verdict\n");
        for c in &self.conditions {
            let fmt = |v: &Option<Scalar>| v.as_ref().map_or("-".to_string(), |s| s.to_sig_string(10));
            out.push_str(&format!(
                "{:<34} {:<16} {:<16} {:?}\n",
                c.condition,
                fmt(&c.lhs),
                fmt(&c.rhs),
                c.verdict
            ));
        }
        out.push_str(&format!("certificate: {:?}\n", self.certificate));
        out
    }
}

pub const DEFAULT_CERTIFY_STEPS: usize = 8;

/// Evaluates the four semilocal conditions
/// `κ‖y₀‖ < η`, `η < η_max`, `3ℓ₁/2·t̄² + ‖y₀‖ < b`, `t̄ < a`.
pub fn certify(inp: &CertificateInput, steps: usize) -> Result<MajorantReport> {
    let p = &inp.params;
    p.validate()?;
    let c = p.ctx();
    let eta_max = eta_threshold(&p.kappa, &p.l1, &p.l2);
    let admissible = p.eta < eta_max;
    let roots = if admissible { Some(roots_of_h(p)?) } else { None };
    let t_bar = roots.as_ref().map(|r| r.0.clone());

    let check = |name: &str, lhs: Option<Scalar>, rhs: Option<Scalar>| {
        let verdict = match (&lhs, &rhs) {
            (Some(l), Some(r)) => Verdict::of(l < r),
            _ => Verdict::Fail,
        };
        ConditionCheck {
            condition: name.into(),
            lhs,
            rhs,
            verdict,
        }
    };
    let range_lhs = t_bar.as_ref().map(|t| c.ratio(3, 2) * &p.l1 * t * t + &inp.y0_norm);
    let conditions = vec![
        check("kappa*|y0| < eta", Some(&p.kappa * &inp.y0_norm), Some(p.eta.clone())),
        check("eta < eta_max", Some(p.eta.clone()), Some(eta_max.clone())),
        check("3*l1/2*tbar^2 + |y0| < b", range_lhs, Some(inp.b.clone())),
        check("tbar < a", t_bar.clone(), Some(inp.a.clone())),
    ];
    let certificate = Verdict::of(conditions.iter().all(|c| c.verdict == Verdict::Pass));

    let mut report = MajorantReport {
        eta_max,
        admissible,
        t_bar: t_bar.clone(),
        t_hat: roots.map(|r| r.1),
        s_seq: Vec::new(),
        t_seq: Vec::new(),
        conditions,
        certificate,
        alpha_fit: None,
        m_fit: None,
    };
    if certificate == Verdict::Pass {
        let (s_seq, t_seq) = majorant_sequences(p, steps)?;
        if let Some((alpha, m)) = fit_r_cubic(t_bar.as_ref().expect("admissible"), &t_seq, &c) {
            report.alpha_fit = Some(alpha);
            report.m_fit = Some(m);
        }
        report.s_seq = s_seq;
        report.t_seq = t_seq;
    }
    Ok(report)
}

/// Least squares of `ln(t̄ − t_k)` against `3^k` over gaps above the noise
/// floor; returns `(α, M)`.
fn fit_r_cubic(t_bar: &Scalar, t_seq: &[Scalar], c: &PrecisionContext) -> Option<(Scalar, Scalar)> {
    let floor = c.pow10(20 - c.digits() as i32);
    let pts: Vec<(Scalar, Scalar)> = t_seq
        .iter()
        .enumerate()
        .map(|(k, t)| (c.int(3).powi(k as i32), t_bar - t))
        .take_while(|(_, g)| *g > floor)
        .map(|(x, g)| (x, g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = c.int(pts.len() as i64);
    let sx = pts.iter().fold(c.zero(), |acc, (x, _)| acc + x);
    let sy = pts.iter().fold(c.zero(), |acc, (_, y)| acc + y);
    let sxx = pts.iter().fold(c.zero(), |acc, (x, _)| acc + x * x);
    let sxy = pts.iter().fold(c.zero(), |acc, (x, y)| acc + x * y);
    let den = &n * &sxx - &sx * &sx;
    if den.is_zero() {
        return None;
    }
    let slope = (&n * &sxy - &sx * &sy) / den;
    let intercept = (sy - &slope * sx) / n;
    Some((slope.exp(), intercept.exp()))
}
