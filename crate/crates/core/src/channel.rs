//! Rayleigh fading and received-signal generation for both phases.
//!
//! Fade coefficients are zero-mean circularly symmetric complex Gaussians
//! with per-link variances; additive noise is unit-variance complex Gaussian
//! (1/2 per real dimension). Symbols are scaled by `sqrt(Es)` before
//! transmission, so the sweep variable is the average symbol energy in dB
//! while the noise floor stays fixed.

use crate::labeling::{LabelingProfile, Message, Scheme};
use crate::{Error, Result, SignalSet};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Link variances and symbol energy, all in dB.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    /// Source-destination link variance (dB).
    pub sigma_ds_db: f64,
    /// Source-relay link variance (dB).
    pub sigma_rs_db: f64,
    /// Relay-destination link variance (dB).
    pub sigma_dr_db: f64,
    /// Average symbol energy `E_S` (dB).
    pub es_db: f64,
}

impl ChannelParams {
    pub fn new(sigma_ds_db: f64, sigma_rs_db: f64, sigma_dr_db: f64, es_db: f64) -> Result<Self> {
        let params = Self {
            sigma_ds_db,
            sigma_rs_db,
            sigma_dr_db,
            es_db,
        };
        for (name, v) in [
            ("sigma_ds", params.sigma_ds_sq()),
            ("sigma_rs", params.sigma_rs_sq()),
            ("sigma_dr", params.sigma_dr_sq()),
            ("es", params.es_linear()),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!(
                    "{name}: linear value must be positive and finite, got {v}"
                )));
            }
        }
        Ok(params)
    }

    /// Returns a copy with a different symbol energy; sweeps vary only `E_S`.
    pub fn with_es_db(&self, es_db: f64) -> Self {
        Self { es_db, ..*self }
    }

    /// Linear S-D link variance.
    pub fn sigma_ds_sq(&self) -> f64 {
        db_to_linear(self.sigma_ds_db)
    }

    /// Linear S-R link variance.
    pub fn sigma_rs_sq(&self) -> f64 {
        db_to_linear(self.sigma_rs_db)
    }

    /// Linear R-D link variance.
    pub fn sigma_dr_sq(&self) -> f64 {
        db_to_linear(self.sigma_dr_db)
    }

    /// Linear symbol energy.
    pub fn es_linear(&self) -> f64 {
        db_to_linear(self.es_db)
    }

    /// Amplitude scale `sqrt(Es)` applied to every transmitted symbol.
    pub fn amplitude(&self) -> f64 {
        self.es_linear().sqrt()
    }

    /// The link-variance ratio `alpha = sigma_ds^2 / sigma_dr^2` the
    /// labelling metric uses.
    pub fn alpha(&self) -> f64 {
        self.sigma_ds_sq() / self.sigma_dr_sq()
    }
}

/// dB to linear power.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One realization of the four fade coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeDraw {
    /// Source-relay fade (phase 1).
    pub c_rs: Complex64,
    /// Source-destination fade during phase 1.
    pub c_ds1: Complex64,
    /// Source-destination fade during phase 2; independent of `c_ds1`.
    pub c_ds2: Complex64,
    /// Relay-destination fade (phase 2).
    pub c_dr: Complex64,
}

/// Received samples for one message: relay in phase 1, destination in both
/// phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedPair {
    pub y_r: Complex64,
    pub y_d1: Complex64,
    pub y_d2: Complex64,
}

/// Draws a zero-mean circularly symmetric complex Gaussian with total
/// variance `var` (`var / 2` per real dimension).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws the four independent fade coefficients for one symbol interval.
pub fn draw_fades<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> FadeDraw {
    FadeDraw {
        c_rs: complex_gaussian(rng, params.sigma_rs_sq()),
        c_ds1: complex_gaussian(rng, params.sigma_ds_sq()),
        c_ds2: complex_gaussian(rng, params.sigma_ds_sq()),
        c_dr: complex_gaussian(rng, params.sigma_dr_sq()),
    }
}

/// Unit-variance complex noise sample.
fn noise<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    complex_gaussian(rng, 1.0)
}

/// Core received-signal equations with explicit noise samples. The relay
/// forwards its own decision `m_hat`, which need not equal `m`; with an ODF
/// profile the phase-2 source term is zero. `relay_phase_rad` rotates the
/// relay's copy of the signal set.
#[allow(clippy::too_many_arguments)]
pub fn received_with_noise(
    params: &ChannelParams,
    fades: &FadeDraw,
    m: Message,
    m_hat_relay: Message,
    profile: &LabelingProfile,
    set: &SignalSet,
    relay_phase_rad: f64,
    z_r: Complex64,
    z_d1: Complex64,
    z_d2: Complex64,
) -> ReceivedPair {
    let amp = params.amplitude();
    let s1 = profile.x_s1().symbol(set, m) * amp;
    let s2 = profile.phase2_source_symbol(set, m) * amp;
    let r = profile.x_r().symbol(set, m_hat_relay)
        * Complex64::from_polar(amp, relay_phase_rad);
    ReceivedPair {
        y_r: fades.c_rs * s1 + z_r,
        y_d1: fades.c_ds1 * s1 + z_d1,
        y_d2: fades.c_ds2 * s2 + fades.c_dr * r + z_d2,
    }
}

/// Received signals for one NODF symbol interval, drawing fresh noise.
pub fn transmit_nodf<R: Rng + ?Sized>(
    params: &ChannelParams,
    fades: &FadeDraw,
    m: Message,
    m_hat_relay: Message,
    profile: &LabelingProfile,
    set: &SignalSet,
    rng: &mut R,
) -> Result<ReceivedPair> {
    if profile.scheme() != Scheme::Nodf {
        return Err(Error::Precondition("profile is not an NODF profile".into()));
    }
    let (z_r, z_d1, z_d2) = (noise(rng), noise(rng), noise(rng));
    Ok(received_with_noise(
        params, fades, m, m_hat_relay, profile, set, 0.0, z_r, z_d1, z_d2,
    ))
}

/// Received signals for one ODF symbol interval, drawing fresh noise. Only
/// the relay transmits in phase 2.
pub fn transmit_odf<R: Rng + ?Sized>(
    params: &ChannelParams,
    fades: &FadeDraw,
    m: Message,
    m_hat_relay: Message,
    profile: &LabelingProfile,
    set: &SignalSet,
    rng: &mut R,
) -> Result<ReceivedPair> {
    if profile.scheme() != Scheme::Odf {
        return Err(Error::Precondition("profile is not an ODF profile".into()));
    }
    let (z_r, z_d1, z_d2) = (noise(rng), noise(rng), noise(rng));
    Ok(received_with_noise(
        params, fades, m, m_hat_relay, profile, set, 0.0, z_r, z_d1, z_d2,
    ))
}
