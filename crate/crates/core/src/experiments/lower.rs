use super::config::LowerBoundStudyConfig;
use crate::error::Result;
use crate::lowerbound::{
    chi2_decay_study, le_cam_from_chi2, Chi2Setup, DecayStudyConfig, PerturbationFamily,
    PerturbationH, Schedule,
};
use crate::lowerbound::{shared_axis, BasePowerDensity, Bump};

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub n: u64,
    pub b_n: usize,
    pub log_chi2: f64,
    /// `log(n chi2)`; the schedule targets a bounded value.
    pub log_n_chi2: f64,
    /// Two-point bound `1/2 (1 - chi2/2)^{2n}`.
    pub le_cam: f64,
    /// `(1 / b_n) int_0^1 |H^{(-1)}|`.
    pub proxy_raw: f64,
    /// Raw proxy with the constant `1 / (int_0^1 |H^{(-1)}| eta^{1/beta})`.
    pub proxy: f64,
    /// `(log n)^{-1/beta}`.
    pub reference: f64,
    /// `proxy / reference`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundStudy {
    pub rows: Vec<LowerBoundRow>,
    pub eta: f64,
    pub amplitude: f64,
    pub primitive_l1: f64,
    /// Slope check of the underlying chi-square decay study.
    pub decay_passes: bool,
}

/// Chi-square and two-point bounds along the schedule `b_n(n)`, with the
/// implied risk proxy next to `(log n)^{-1/beta}`.
pub fn run_lowerbound_study(cfg: &LowerBoundStudyConfig) -> Result<LowerBoundStudy> {
    let noise = cfg.noise.build()?;
    let schedule = Schedule::new(cfg.beta, cfg.gamma, cfg.r, cfg.kappa2)?;
    let mut bn: Vec<usize> = cfg.n_list.iter().map(|&n| schedule.b_n(n)).collect();
    bn.sort_unstable();
    bn.dedup();
    let mut decay_cfg = DecayStudyConfig::new(
        cfg.r,
        cfg.kappa1,
        cfg.kappa2,
        cfg.gamma,
        cfg.beta,
        bn.clone(),
    );
    decay_cfg.cross_check_up_to = 0;
    // the regression needs two distinct b_n; fall back to the chi-square values alone
    let decay = if bn.len() >= 2 {
        Some(chi2_decay_study(&noise, &decay_cfg)?)
    } else {
        None
    };
    let h = PerturbationH::cached(cfg.r, Bump::default())?;
    let amplitude = match &decay {
        Some(d) => d.amplitude,
        None => 0.5 * PerturbationFamily::max_amplitude(&h, bn[0], shared_axis())?,
    };
    let setup = Chi2Setup {
        noise: &noise,
        h: &h,
        base: BasePowerDensity::new(cfg.r)?,
        amplitude,
        spacing: shared_axis().spacing(),
        noise_reach: shared_axis().max,
    };
    let l1 = h.primitive_l1;
    let calibration = 1.0 / (l1 * schedule.eta.powf(1.0 / cfg.beta));
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let b = schedule.b_n(n);
        let log_chi2 = match decay
            .as_ref()
            .and_then(|d| d.rows.iter().find(|r| r.b_n == b))
        {
            Some(row) => row.log_chi2,
            None => setup.log_chi2(b)?,
        };
        let proxy_raw = l1 / b as f64;
        let proxy = calibration * proxy_raw;
        let reference = if n > 1 {
            (n as f64).ln().powf(-1.0 / cfg.beta)
        } else {
            f64::INFINITY
        };
        rows.push(LowerBoundRow {
            n,
            b_n: b,
            log_chi2,
            log_n_chi2: log_chi2 + (n as f64).ln(),
            le_cam: le_cam_from_chi2(log_chi2.exp(), n).value,
            proxy_raw,
            proxy,
            reference,
            ratio: proxy / reference,
        });
    }
    Ok(LowerBoundStudy {
        rows,
        eta: schedule.eta,
        amplitude,
        primitive_l1: l1,
        decay_passes: decay.is_none_or(|d| d.passes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_uses_one_bump() {
        let mut cfg = LowerBoundStudyConfig::gaussian_default();
        cfg.n_list = vec![1];
        let s = run_lowerbound_study(&cfg).unwrap();
        assert_eq!(s.rows[0].b_n, 1);
        assert_eq!(s.rows[0].proxy_raw, s.primitive_l1);
    }
}
