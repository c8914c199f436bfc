use crate::error::{invalid, Error, Result};

/// Perturbation count schedule `b_n = max(1, floor((log n / eta)^{1/beta}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub beta: f64,
    pub gamma: f64,
    pub r: f64,
    pub kappa2: f64,
    pub eta: f64,
}

impl Schedule {
    pub fn new(beta: f64, gamma: f64, r: f64, kappa2: f64) -> Result<Self> {
        if !(beta > 0.0) || !(gamma > 0.0) {
            return Err(invalid(format!(
                "beta = {beta} and gamma = {gamma} must be positive"
            )));
        }
        if !(kappa2 > 0.5) {
            return Err(invalid(format!("kappa2 = {kappa2} must exceed 1/2")));
        }
        let eta = (1.0 - 2.0 * r / (2.0 * kappa2 - 1.0)) / gamma;
        if !(eta > 0.0) {
            return Err(Error::Infeasible(format!(
                "eta = {eta} <= 0: r = {r} must lie below kappa2 - 1/2 = {}",
                kappa2 - 0.5
            )));
        }
        Ok(Self {
            beta,
            gamma,
            r,
            kappa2,
            eta,
        })
    }

    /// `((1/eta) log n)^{1/beta}` before the integer part.
    pub fn b_real(&self, n: f64) -> f64 {
        ((n.max(1.0)).ln() / self.eta).powf(1.0 / self.beta)
    }

    pub fn b_n(&self, n: u64) -> usize {
        (self.b_real(n as f64).floor() as usize).max(1)
    }
}

/// `(eta, b_n)` for one sample size.
pub fn schedule(n: u64, beta: f64, gamma: f64, r: f64, kappa2: f64) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let s = Schedule::new(beta, gamma, r, kappa2)?;
    Ok((s.eta, s.b_n(n)))
}

/// Open interval of admissible `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RWindow {
    pub lo: f64,
    pub hi: f64,
}

impl RWindow {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo < r && r < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// `(max(p + 3/2, kappa2 / (2 kappa1)), kappa2 - 1/2)`.
pub fn rpkappa_window(p: f64, kappa1: f64, kappa2: f64) -> Result<RWindow> {
    if !(kappa1 > 0.0 && kappa1 < 1.0) || !(kappa2 > 1.0) {
        return Err(invalid(format!(
            "need kappa1 in (0,1) and kappa2 > 1, got {kappa1}, {kappa2}"
        )));
    }
    Ok(RWindow {
        lo: (p + 1.5).max(kappa2 / (2.0 * kappa1)),
        hi: kappa2 - 0.5,
    })
}

/// Tail exponents `(kappa1, kappa2) = (3/5, p + 12/5)` valid for the
/// powered-stable construction.
pub fn default_kappas(p: f64) -> (f64, f64) {
    (0.6, p + 2.4)
}

/// [`rpkappa_window`] at [`default_kappas`].
pub fn default_window(p: f64) -> Result<RWindow> {
    let (k1, k2) = default_kappas(p);
    rpkappa_window(p, k1, k2)
}
