use crate::error::{Error, Result};
use crate::grid::GridDensity;

fn shared(h0: &GridDensity, h1: &GridDensity) -> Result<()> {
    h0.require_1d()?;
    h1.require_1d()?;
    if !h0.axis(0).same_nodes(h1.axis(0), 1e-12) {
        return Err(Error::GridCoverage(
            "densities live on different grids".into(),
        ));
    }
    Ok(())
}

/// `int (h1 - h0)^2 / h0` by the trapezoid rule.
pub fn chi2_divergence(h0: &GridDensity, h1: &GridDensity) -> Result<f64> {
    shared(h0, h1)?;
    let axis = h0.axis(0);
    let mut integrand = Vec::with_capacity(h0.len());
    for (i, (&a, &b)) in h0.values().iter().zip(h1.values()).enumerate() {
        if a == b {
            integrand.push(0.0);
        } else if a <= 1e-300 {
            return Err(Error::ZeroDenominator {
                index: i,
                x: axis.node(i),
                h1: b,
            });
        } else {
            integrand.push((b - a) * (b - a) / a);
        }
    }
    Ok(crate::quadrature::trapezoid(&integrand, axis.spacing()))
}

/// Hellinger affinity `int sqrt(h0 h1)`.
pub fn hellinger_affinity(h0: &GridDensity, h1: &GridDensity) -> Result<f64> {
    shared(h0, h1)?;
    let v: Vec<f64> = h0
        .values()
        .iter()
        .zip(h1.values())
        .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
        .collect();
    Ok(crate::quadrature::trapezoid(&v, h0.axis(0).spacing()))
}

/// Testing affinity `int min(h0, h1)`.
pub fn min_affinity(h0: &GridDensity, h1: &GridDensity) -> Result<f64> {
    shared(h0, h1)?;
    let v: Vec<f64> = h0
        .values()
        .iter()
        .zip(h1.values())
        .map(|(a, b)| a.min(*b))
        .collect();
    Ok(crate::quadrature::trapezoid(&v, h0.axis(0).spacing()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeCamBound {
    pub value: f64,
    pub chi2: f64,
    /// `chi2 >= 2`: the bound degenerates to zero.
    pub saturated: bool,
}

/// `1/2 [1 - chi2/2]^{2n}` from a known divergence.
pub fn le_cam_from_chi2(chi2: f64, n: u64) -> LeCamBound {
    if !(chi2 < 2.0) {
        return LeCamBound {
            value: 0.0,
            chi2,
            saturated: true,
        };
    }
    let value = 0.5 * (2.0 * n as f64 * (-0.5 * chi2).ln_1p()).exp();
    LeCamBound {
        value,
        chi2,
        saturated: false,
    }
}

/// Lower bound on the affinity between the n-fold products of `h0` and `h1`.
pub fn le_cam_bound(h0: &GridDensity, h1: &GridDensity, n: u64) -> Result<LeCamBound> {
    Ok(le_cam_from_chi2(chi2_divergence(h0, h1)?, n))
}
