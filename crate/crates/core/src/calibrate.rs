//! Fitting noise parameters to measured figures.
//!
//! Every trial point is simulated with the same seed, so successive trials
//! share their random draws and the objective moves smoothly with the knob
//! being searched.

use crate::bench::{fit_gaussian, fit_linear_first4, points, sweep, ExperimentKind, ExperimentSpec, FitResult};
use crate::config::Backend;
use crate::Error;

pub const P2_MAX: f64 = 0.2;
pub const SIGMA_MAX: f64 = 1.0;
const MAX_STEPS: usize = 40;

/// Swap chains with 1 to 4 SWAPs, fitted by a straight line.
pub fn linear_regime_fit(backend: &Backend, shots: u64, seed: u64) -> Result<FitResult, Error> {
    let spec = ExperimentSpec::new(ExperimentKind::SwapChain);
    let records = sweep(&spec, &[1, 2, 3, 4], backend, shots, seed)?;
    Ok(fit_linear_first4(&points(&records))?)
}

/// Gaussian fit to the CNOT chain over its default depth grid.
pub fn gaussian_regime_fit(backend: &Backend, shots: u64, seed: u64) -> Result<FitResult, Error> {
    let spec = ExperimentSpec::new(ExperimentKind::CnotChain);
    let records = sweep(&spec, &spec.default_grid(), backend, shots, seed)?;
    Ok(fit_gaussian(&points(&records))?)
}

fn with_p2(backend: &Backend, p2: f64) -> Backend {
    let mut b = backend.clone();
    b.depolarizing.p2 = p2;
    b
}

fn with_sigma(backend: &Backend, sigma: f64) -> Backend {
    let mut b = backend.clone();
    b.coherent.sigma = sigma;
    b
}

/// Smallest two-qubit depolarizing probability at which the swap-chain slope (success
/// lost per SWAP) matches `target_slope` to within `rel_tol`. The other noise
/// channels of `backend` stay as they are. A single-qubit rate given
/// explicitly in the config is kept; otherwise it follows p2.
pub fn calibrate_depolarizing(
    backend: &Backend,
    target_slope: f64,
    shots: u64,
    seed: u64,
    rel_tol: f64,
) -> Result<f64, Error> {
    if !(target_slope > 0.0 && target_slope < 1.0) {
        return Err(Error::Calibration(format!("target slope {target_slope} is not in (0, 1)")));
    }
    let slope = |p2: f64| -> Result<f64, Error> {
        Ok(-linear_regime_fit(&with_p2(backend, p2), shots, seed)?.params.1)
    };
    let close = |s: f64| (s - target_slope).abs() <= rel_tol * target_slope;
    let s0 = slope(0.0)?;
    if s0 >= target_slope || close(s0) {
        return Ok(0.0);
    }
    // The slope peaks and then falls again once the first points saturate,
    // so bracket the first crossing on a coarse grid before bisecting.
    let mut lo = 0.0;
    let mut hi = None;
    let mut best = (0.0, (s0 - target_slope).abs());
    for k in 1..=20 {
        let p2 = P2_MAX * 2f64.powf(-0.5 * (20 - k) as f64);
        let s = slope(p2)?;
        if (s - target_slope).abs() < best.1 {
            best = (p2, (s - target_slope).abs());
        }
        if close(s) {
            return Ok(p2);
        }
        if s > target_slope {
            hi = Some(p2);
            break;
        }
        lo = p2;
    }
    let Some(mut hi) = hi else {
        return Err(Error::Calibration(format!(
            "no p2 in (0, {P2_MAX}] reaches slope {target_slope}; the closest is p2 = {:.4}",
            best.0
        )));
    };
    for _ in 0..MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let s = slope(mid)?;
        if (s - target_slope).abs() < best.1 {
            best = (mid, (s - target_slope).abs());
        }
        if close(s) {
            return Ok(mid);
        }
        if s < target_slope {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSearch {
    pub sigma: f64,
    /// Fitted 1/e depth at `sigma`; infinite when the curve does not decay.
    pub d0: f64,
    pub converged: bool,
}

/// Searches for the coherent spread at which the Gaussian fit of the CNOT
/// chain gives a 1/e depth of `target_d0` CNOTs (within `rel_tol`). The
/// fitted depth need not fall monotonically with sigma, so a coarse log scan
/// locates the first crossing before bisecting. Without a crossing the
/// closest point of the scan is returned, marked as not converged.
pub fn search_coherent_sigma(
    backend: &Backend,
    target_d0: f64,
    shots: u64,
    seed: u64,
    rel_tol: f64,
) -> Result<SigmaSearch, Error> {
    if target_d0.is_nan() || target_d0 <= 0.0 {
        return Err(Error::Calibration(format!("target d0 {target_d0} must be positive")));
    }
    let d0 = |sigma: f64| -> Result<f64, Error> {
        match gaussian_regime_fit(&with_sigma(backend, sigma), shots, seed) {
            Ok(f) => Ok(f.params.0),
            Err(Error::Fit(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let done = |sigma: f64, d0: f64| SigmaSearch { sigma, d0, converged: true };
    let scan = (0..=16).map(|k| SIGMA_MAX * 10f64.powf(-3.0 + 3.0 * k as f64 / 16.0));
    let mut best = (0.0, d0(0.0)?);
    let mut prev = best;
    for sigma in scan {
        let d = d0(sigma)?;
        if (d - target_d0).abs() < (best.1 - target_d0).abs() {
            best = (sigma, d);
        }
        if (d - target_d0).abs() <= rel_tol * target_d0 {
            return Ok(done(sigma, d));
        }
        if prev.1 > target_d0 && d < target_d0 {
            let (mut lo, mut hi) = ((prev.0, prev.1), (sigma, d));
            for _ in 0..MAX_STEPS {
                let mid = 0.5 * (lo.0 + hi.0);
                let dm = d0(mid)?;
                if (dm - target_d0).abs() <= rel_tol * target_d0 {
                    return Ok(done(mid, dm));
                }
                if dm > target_d0 {
                    lo = (mid, dm);
                } else {
                    hi = (mid, dm);
                }
            }
            let (sigma, d0) = if (lo.1 - target_d0).abs() < (hi.1 - target_d0).abs() { lo } else { hi };
            return Ok(SigmaSearch { sigma, d0, converged: false });
        }
        prev = (sigma, d);
    }
    Ok(SigmaSearch {
        sigma: best.0,
        d0: best.1,
        converged: false,
    })
}

/// Like [`search_coherent_sigma`] but failing when the target is not met.
pub fn calibrate_coherent_sigma(
    backend: &Backend,
    target_d0: f64,
    shots: u64,
    seed: u64,
    rel_tol: f64,
) -> Result<f64, Error> {
    let s = search_coherent_sigma(backend, target_d0, shots, seed, rel_tol)?;
    if s.converged {
        Ok(s.sigma)
    } else {
        Err(Error::Calibration(format!(
            "no sigma in [0, {SIGMA_MAX}] gives d0 = {target_d0}; closest d0 = {:.2} at sigma = {:.4}",
            s.d0, s.sigma
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCalibration {
    pub sigma: f64,
    pub p2: f64,
    pub intercept: f64,
    pub slope: f64,
}

/// Matches both the intercept and the slope of the swap-chain line. Coherent
/// error bends the first points downward (raising the fitted intercept) while
/// depolarizing error bends them upward, so for each trial sigma p2 is
/// re-calibrated against the slope and sigma is bisected against the
/// intercept. Sigma stays at zero when depolarizing noise alone already puts
/// the intercept above the target.
pub fn calibrate_linear_regime(
    backend: &Backend,
    target_intercept: f64,
    target_slope: f64,
    shots: u64,
    seed: u64,
    rel_tol: f64,
    intercept_tol: f64,
) -> Result<LinearCalibration, Error> {
    let trial = |sigma: f64| -> Result<LinearCalibration, Error> {
        let b = with_sigma(backend, sigma);
        let p2 = calibrate_depolarizing(&b, target_slope, shots, seed, rel_tol)?;
        let fit = linear_regime_fit(&with_p2(&b, p2), shots, seed)?;
        Ok(LinearCalibration {
            sigma,
            p2,
            intercept: fit.params.0,
            slope: -fit.params.1,
        })
    };
    let at_zero = trial(0.0)?;
    if at_zero.intercept >= target_intercept - intercept_tol {
        return Ok(at_zero);
    }
    let mut lo = at_zero;
    let mut sigma = 0.01;
    let mut hi = loop {
        let t = trial(sigma)?;
        if t.intercept >= target_intercept || t.p2 == 0.0 {
            break t;
        }
        lo = t;
        sigma *= 2.0;
        if sigma > SIGMA_MAX {
            return Err(Error::Calibration(format!(
                "intercept {:.4} at sigma = {SIGMA_MAX} is still below {target_intercept}",
                t.intercept
            )));
        }
    };
    for _ in 0..MAX_STEPS {
        let slope_ok = (hi.slope - target_slope).abs() <= rel_tol * target_slope;
        if slope_ok && (hi.intercept - target_intercept).abs() <= intercept_tol / 4.0 {
            return Ok(hi);
        }
        let mid = trial(0.5 * (lo.sigma + hi.sigma))?;
        if mid.intercept < target_intercept && mid.p2 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (lo.intercept - target_intercept).abs() < (hi.intercept - target_intercept).abs() {
        lo
    } else {
        hi
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_target_gives_zero_p2() {
        let b = Backend::preset("ibm-vigo").unwrap().noiseless();
        assert_eq!(calibrate_depolarizing(&with_sigma(&b, 0.3), 1e-3, 256, 1, 0.05).unwrap(), 0.0);
        let small = calibrate_depolarizing(&b, 0.005, 4096, 1, 0.1).unwrap();
        assert!(small > 0.0 && small < 0.01, "{small}");
        assert!(calibrate_depolarizing(&b, 0.0, 256, 1, 0.05).is_err());
    }

    #[test]
    fn unreachable_slope_is_an_error() {
        let b = Backend::preset("ibm-vigo").unwrap().noiseless();
        assert!(matches!(
            calibrate_depolarizing(&b, 0.9, 256, 1, 0.05),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn flat_curve_has_no_sigma() {
        let b = Backend::preset("ibm-vigo").unwrap().noiseless();
        let e = calibrate_coherent_sigma(&b, 28.0, 64, 1, 0.1);
        assert!(matches!(e, Err(Error::Calibration(_))), "{e:?}");
    }

    #[test]
    fn recovers_slope_on_noiseless_device() {
        let b = Backend::preset("ibm-vigo").unwrap().noiseless();
        let p2 = calibrate_depolarizing(&b, 0.05, 2048, 3, 0.02).unwrap();
        assert!(p2 > 0.0 && p2 < P2_MAX);
        let slope = -linear_regime_fit(&with_p2(&b, p2), 2048, 3).unwrap().params.1;
        assert!((slope - 0.05).abs() <= 0.02 * 0.05, "{slope}");
    }
}
