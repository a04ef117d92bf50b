//! Monte Carlo BER/SER estimation.
//!
//! A trial draws fresh fades and noise, runs phase 1, lets the relay decode
//! (or hands it the truth in genie mode), runs phase 2 with the relay's
//! decision, decodes at the destination and counts message and bit errors.
//! Trials are grouped into fixed-size batches; batch `b` of sweep point `p`
//! always uses the random stream derived from `(master_seed, p, b)`, and
//! batch results merge by integer addition, so a sweep is bit-reproducible
//! for any worker count. Early stopping is decided on whole waves of batches
//! in batch order, which keeps the stopping point worker-count independent
//! too.

use crate::channel::{draw_fades, ChannelParams, FadeDraw};
use crate::decoder::{DecoderScratch, PreparedDecoder};
use crate::labeling::{LabelingProfile, Message, Scheme};
use crate::rng::derive_stream;
use crate::{Error, Result, SignalSet};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

/// Trials per batch; batches are the unit of random-stream derivation.
const BATCH_TRIALS: u64 = 8192;
/// Batches per wave; early stopping is evaluated at wave boundaries.
const WAVE_BATCHES: u64 = 16;

/// How the relay behaves in the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayMode {
    /// The relay runs per-symbol ML on its noisy reception; the destination
    /// runs the near-ML rule. Relay errors propagate.
    Realistic,
    /// The relay forwards the true message; the destination runs the
    /// matching error-free-relay ML rule.
    Genie,
}

/// Full description of one Monte Carlo sweep.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub set: SignalSet,
    pub profile: LabelingProfile,
    /// Link variances; the energy field is replaced per sweep point.
    pub params: ChannelParams,
    pub es_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    /// Stop a point early once this many bit errors accumulate.
    pub target_errors: Option<u64>,
    pub master_seed: u64,
    pub workers: usize,
    pub relay_mode: RelayMode,
    /// Diagnostic mode: suppress all additive noise.
    pub zero_noise: bool,
    /// Rotation of the relay's copy of the signal set.
    pub relay_phase_rad: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.set.size() != self.profile.size() {
            return Err(Error::Precondition(
                "signal set and profile cover different message counts".into(),
            ));
        }
        if self.es_grid_db.is_empty() {
            return Err(Error::Precondition("energy grid is empty".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::Precondition("trials_per_point must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Precondition("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimates for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub es_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub message_errors: u64,
    pub ber: f64,
    pub ser: f64,
    /// Half-width of the normal-approximation 95% interval on the BER.
    pub ci95_halfwidth: f64,
    /// Set when fewer than 20 bit errors were observed; the interval is
    /// unreliable then.
    pub low_errors: bool,
}

/// A BER curve: one record per sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// Renders the curve as CSV; byte-stable for identical inputs.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("es_db,trials,bit_errors,message_errors,ber,ser,ci95_halfwidth,low_errors\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.4},{},{},{},{:.6e},{:.6e},{:.6e},{}\n",
                p.es_db,
                p.trials,
                p.bit_errors,
                p.message_errors,
                p.ber,
                p.ser,
                p.ci95_halfwidth,
                u8::from(p.low_errors),
            ));
        }
        out
    }

    /// Parses the format written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("es_db") || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Parse(format!(
                    "line {}: expected 8 CSV fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse_f = |s: &str, what: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("line {}: bad {what}: {e}", lineno + 1)))
            };
            let parse_u = |s: &str, what: &str| -> Result<u64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("line {}: bad {what}: {e}", lineno + 1)))
            };
            points.push(BerPoint {
                es_db: parse_f(fields[0], "es_db")?,
                trials: parse_u(fields[1], "trials")?,
                bit_errors: parse_u(fields[2], "bit_errors")?,
                message_errors: parse_u(fields[3], "message_errors")?,
                ber: parse_f(fields[4], "ber")?,
                ser: parse_f(fields[5], "ser")?,
                ci95_halfwidth: parse_f(fields[6], "ci95_halfwidth")?,
                low_errors: fields[7].trim() == "1",
            });
        }
        if points.is_empty() {
            return Err(Error::Parse("empty BER curve".into()));
        }
        Ok(Self { points })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    trials: u64,
    bit_errors: u64,
    message_errors: u64,
}

impl Counts {
    fn add(self, other: Counts) -> Counts {
        Counts {
            trials: self.trials + other.trials,
            bit_errors: self.bit_errors + other.bit_errors,
            message_errors: self.message_errors + other.message_errors,
        }
    }
}

/// Runs one sweep point. Deterministic given `(master_seed, point_index)`,
/// whatever the worker count.
pub fn run_point(config: &SimConfig, point_index: usize) -> Result<BerPoint> {
    config.validate()?;
    let es_db = *config
        .es_grid_db
        .get(point_index)
        .ok_or_else(|| Error::Precondition(format!("no grid point {point_index}")))?;
    let params = config.params.with_es_db(es_db);
    let prepared = PreparedDecoder::new(&config.set, &config.profile, &params, config.relay_phase_rad);

    let total_batches = config.trials_per_point.div_ceil(BATCH_TRIALS);
    let mut acc = Counts::default();
    let mut next_batch = 0u64;
    while next_batch < total_batches {
        let wave_end = (next_batch + WAVE_BATCHES).min(total_batches);
        let wave: Counts = (next_batch..wave_end)
            .into_par_iter()
            .map(|batch| run_batch(config, &params, &prepared, point_index as u64, batch))
            .reduce(Counts::default, Counts::add);
        acc = acc.add(wave);
        next_batch = wave_end;
        if let Some(target) = config.target_errors {
            if acc.bit_errors >= target {
                break;
            }
        }
    }

    let bits_per_msg = config.set.bits_per_message() as u64;
    let total_bits = acc.trials * bits_per_msg;
    let ber = acc.bit_errors as f64 / total_bits as f64;
    let ser = acc.message_errors as f64 / acc.trials as f64;
    let ci95 = 1.96 * (ber * (1.0 - ber) / total_bits as f64).sqrt();
    Ok(BerPoint {
        es_db,
        trials: acc.trials,
        bit_errors: acc.bit_errors,
        message_errors: acc.message_errors,
        ber,
        ser,
        ci95_halfwidth: ci95,
        low_errors: acc.bit_errors < 20,
    })
}

fn run_batch(
    config: &SimConfig,
    params: &ChannelParams,
    prepared: &PreparedDecoder,
    point_index: u64,
    batch_index: u64,
) -> Counts {
    let mut rng = derive_stream(config.master_seed, &[point_index, batch_index]);
    let first_trial = batch_index * BATCH_TRIALS;
    let n = BATCH_TRIALS.min(config.trials_per_point - first_trial);
    let m = config.set.size();
    let mut scratch = DecoderScratch::new(m);
    let mut counts = Counts {
        trials: n,
        ..Counts::default()
    };
    let zero = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let sent = Message::new(rng.gen_range(1..=m), m).expect("in range");
        let fades = draw_fades(params, &mut rng);
        let decided = match config.relay_mode {
            RelayMode::Realistic => {
                let z_r = if config.zero_noise { zero } else { noise(&mut rng) };
                let z_d1 = if config.zero_noise { zero } else { noise(&mut rng) };
                let z_d2 = if config.zero_noise { zero } else { noise(&mut rng) };
                let y_r = fades.c_rs * prepared.s1_symbol(sent) + z_r;
                let m_hat = prepared.relay_ml(y_r, fades.c_rs);
                let y_d1 = fades.c_ds1 * prepared.s1_symbol(sent) + z_d1;
                let y_d2 = fades.c_ds2 * prepared.s2_symbol(sent)
                    + fades.c_dr * prepared.r_symbol(m_hat)
                    + z_d2;
                prepared.near_ml(y_d1, y_d2, &fades, &mut scratch)
            }
            RelayMode::Genie => {
                let z_d1 = if config.zero_noise { zero } else { noise(&mut rng) };
                let z_d2 = if config.zero_noise { zero } else { noise(&mut rng) };
                let y_d1 = fades.c_ds1 * prepared.s1_symbol(sent) + z_d1;
                let y_d2 = fades.c_ds2 * prepared.s2_symbol(sent)
                    + fades.c_dr * prepared.r_symbol(sent)
                    + z_d2;
                prepared.ideal_ml(y_d1, y_d2, &fades)
            }
        };
        if decided != sent {
            counts.message_errors += 1;
            counts.bit_errors += u64::from(sent.bit_distance(decided));
        }
    }
    counts
}

fn noise<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    crate::channel::complex_gaussian(rng, 1.0)
}

/// Runs every sweep point on a worker pool of the configured size.
pub fn run_sweep(config: &SimConfig) -> Result<BerCurve> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot build worker pool: {e}")))?;
    let points = pool.install(|| -> Result<Vec<BerPoint>> {
        (0..config.es_grid_db.len())
            .map(|idx| run_point(config, idx))
            .collect()
    })?;
    Ok(BerCurve { points })
}

/// Binary-restricted pairwise experiment: the source always sends `a`, the
/// destination chooses between `a` and `abar` only, and the returned rate is
/// the fraction of trials decided in favour of `abar`. The relay is
/// unrestricted in realistic mode (its errors are part of the event).
#[allow(clippy::too_many_arguments)]
pub fn run_pairwise_rate(
    set: &SignalSet,
    profile: &LabelingProfile,
    params: &ChannelParams,
    relay_mode: RelayMode,
    a: Message,
    abar: Message,
    trials: u64,
    master_seed: u64,
) -> Result<f64> {
    if a == abar {
        return Err(Error::Precondition("pairwise experiment needs distinct messages".into()));
    }
    if set.size() != profile.size() {
        return Err(Error::Precondition(
            "signal set and profile cover different message counts".into(),
        ));
    }
    let prepared = PreparedDecoder::new(set, profile, params, 0.0);
    let mut rng = derive_stream(
        master_seed,
        &[a.get() as u64, abar.get() as u64, params.es_db.to_bits()],
    );
    let mut scratch = DecoderScratch::new(set.size());
    let mut errors = 0u64;
    for _ in 0..trials {
        let fades = draw_fades(params, &mut rng);
        let prefers_abar = match relay_mode {
            RelayMode::Realistic => {
                let y_r = fades.c_rs * prepared.s1_symbol(a) + noise(&mut rng);
                let m_hat = prepared.relay_ml(y_r, fades.c_rs);
                let y_d1 = fades.c_ds1 * prepared.s1_symbol(a) + noise(&mut rng);
                let y_d2 = fades.c_ds2 * prepared.s2_symbol(a)
                    + fades.c_dr * prepared.r_symbol(m_hat)
                    + noise(&mut rng);
                let f_a = prepared.min_f_over_relay(y_d1, y_d2, &fades, a, &mut scratch);
                let f_abar = prepared.min_f_over_relay(y_d1, y_d2, &fades, abar, &mut scratch);
                f_abar < f_a
            }
            RelayMode::Genie => {
                let y_d1 = fades.c_ds1 * prepared.s1_symbol(a) + noise(&mut rng);
                let y_d2 = fades.c_ds2 * prepared.s2_symbol(a)
                    + fades.c_dr * prepared.r_symbol(a)
                    + noise(&mut rng);
                prepared.ideal_metric(y_d1, y_d2, &fades, abar)
                    < prepared.ideal_metric(y_d1, y_d2, &fades, a)
            }
        };
        if prefers_abar {
            errors += 1;
        }
    }
    Ok(errors as f64 / trials as f64)
}

/// Fits the BER slope in decades per 10 dB between two grid points; `2.0`
/// means diversity order two. Both points need at least 100 bit errors.
pub fn measure_slope(points: &[BerPoint], es_lo_db: f64, es_hi_db: f64) -> Result<f64> {
    let find = |es: f64| -> Result<&BerPoint> {
        points
            .iter()
            .find(|p| (p.es_db - es).abs() < 1e-9)
            .ok_or_else(|| Error::Precondition(format!("no sweep point at {es} dB")))
    };
    let lo = find(es_lo_db)?;
    let hi = find(es_hi_db)?;
    for p in [lo, hi] {
        if p.bit_errors < 100 {
            return Err(Error::InsufficientData(format!(
                "{} bit errors at {} dB; raise trials_per_point (or target_errors) until both \
                 slope points have at least 100",
                p.bit_errors, p.es_db
            )));
        }
    }
    Ok(-(hi.ber.log10() - lo.ber.log10()) / ((es_hi_db - es_lo_db) / 10.0))
}

/// Energy (dB) at which the curve crosses `ber_target`, by linear
/// interpolation of `log10(ber)` against energy.
fn es_at_ber(points: &[BerPoint], ber_target: f64) -> Result<f64> {
    if !(ber_target > 0.0) {
        return Err(Error::Precondition("BER target must be positive".into()));
    }
    let lt = ber_target.log10();
    let mut sorted: Vec<&BerPoint> = points.iter().collect();
    sorted.sort_by(|p, q| p.es_db.partial_cmp(&q.es_db).expect("finite energies"));
    for w in sorted.windows(2) {
        let (p0, p1) = (w[0], w[1]);
        if p0.ber <= 0.0 || p1.ber <= 0.0 {
            continue;
        }
        let (l0, l1) = (p0.ber.log10(), p1.ber.log10());
        if (l0 - lt) * (l1 - lt) <= 0.0 {
            if (l1 - l0).abs() < 1e-15 {
                return Ok(p0.es_db);
            }
            return Ok(p0.es_db + (lt - l0) * (p1.es_db - p0.es_db) / (l1 - l0));
        }
    }
    Err(Error::InsufficientData(format!(
        "curve does not bracket BER {ber_target:.3e}"
    )))
}

/// Horizontal dB gap between two curves at a target BER: positive when
/// `curve_a` reaches the target at lower energy (i.e. `curve_a` is better).
pub fn gap_at_ber(curve_a: &[BerPoint], curve_b: &[BerPoint], ber_target: f64) -> Result<f64> {
    let es_a = es_at_ber(curve_a, ber_target)?;
    let es_b = es_at_ber(curve_b, ber_target)?;
    Ok(es_b - es_a)
}
