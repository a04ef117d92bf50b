//! Relay and destination decoders.
//!
//! The relay decodes phase 1 by per-symbol ML. The destination cannot run
//! the exact ML rule (it would have to weigh every relay-error pattern), so
//! it minimizes, over message hypotheses `a` and relay hypotheses `j`, the
//! metric
//!
//! ```text
//! f^j(a) = 1/4 |c_rs (S1(a) - S1(j))|^2
//!        + |y_d1 - c_ds1 S1(a)|^2
//!        + |y_d2 - c_ds2 S2(a) - c_dr R(j)|^2
//! ```
//!
//! where `S1`, `S2`, `R` are the energy-scaled per-node symbol maps and the
//! `S2` term is zero for ODF. The first term charges a hypothesis `j != a`
//! with how unlikely that relay error was. With an error-free relay the
//! optimal rule drops the relay hypothesis (`ideal_ml`).
//!
//! Ties are broken toward the lowest message index everywhere; under
//! continuous noise they have probability zero.

use crate::channel::{ChannelParams, FadeDraw};
use crate::labeling::{Labeling, LabelingProfile, Message};
use crate::{Error, Result, SignalSet};
use num_complex::Complex64;

/// Everything the destination knows when decoding one symbol interval.
#[derive(Debug, Clone)]
pub struct DecoderInput<'a> {
    pub y_d1: Complex64,
    pub y_d2: Complex64,
    pub fades: FadeDraw,
    pub params: &'a ChannelParams,
    pub profile: &'a LabelingProfile,
    pub set: &'a SignalSet,
    /// Rotation applied to the relay's copy of the signal set.
    pub relay_phase_rad: f64,
}

impl<'a> DecoderInput<'a> {
    pub fn new(
        y_d1: Complex64,
        y_d2: Complex64,
        fades: FadeDraw,
        params: &'a ChannelParams,
        profile: &'a LabelingProfile,
        set: &'a SignalSet,
    ) -> Result<Self> {
        if profile.size() != set.size() {
            return Err(Error::Precondition(
                "profile and signal set cover different message counts".into(),
            ));
        }
        Ok(Self {
            y_d1,
            y_d2,
            fades,
            params,
            profile,
            set,
            relay_phase_rad: 0.0,
        })
    }

    pub fn with_relay_phase(mut self, relay_phase_rad: f64) -> Self {
        self.relay_phase_rad = relay_phase_rad;
        self
    }
}

/// The destination metric for every (relay hypothesis, message hypothesis)
/// pair: `f[j-1][a-1] = f^j(a)`.
#[derive(Debug, Clone)]
pub struct FMetricTable {
    f: Vec<Vec<f64>>,
}

impl FMetricTable {
    pub fn compute(input: &DecoderInput) -> Self {
        let prepared = PreparedDecoder::from_input(input);
        let m = input.set.size();
        let f = (1..=m)
            .map(|j| {
                (1..=m)
                    .map(|a| prepared.f_metric_raw(input.y_d1, input.y_d2, &input.fades, j, a))
                    .collect()
            })
            .collect();
        Self { f }
    }

    /// `f^j(a)`, 1-based.
    pub fn get(&self, j: Message, a: Message) -> f64 {
        self.f[j.get() - 1][a.get() - 1]
    }
}

/// Per-symbol ML decoding at the relay.
pub fn relay_ml(
    y_r: Complex64,
    c_rs: Complex64,
    set: &SignalSet,
    x_s1: &Labeling,
    es_db: f64,
) -> Message {
    let amp = 10f64.powf(es_db / 20.0);
    let m = set.size();
    let mut best = f64::INFINITY;
    let mut arg = 1usize;
    for cand in 1..=m {
        let msg = Message::new(cand, m).expect("in range");
        let metric = (y_r - c_rs * (x_s1.symbol(set, msg) * amp)).norm_sqr();
        if metric < best {
            best = metric;
            arg = cand;
        }
    }
    Message::new(arg, m).expect("in range")
}

/// The destination metric `f^j(a)` for one hypothesis pair.
pub fn f_metric(input: &DecoderInput, j: Message, a: Message) -> f64 {
    PreparedDecoder::from_input(input).f_metric_raw(input.y_d1, input.y_d2, &input.fades, j.get(), a.get())
}

/// Near-ML destination rule: minimize `f^j(a)` over both hypotheses and
/// return the message hypothesis of the minimizing pair.
pub fn near_ml(input: &DecoderInput) -> Message {
    let prepared = PreparedDecoder::from_input(input);
    let mut scratch = DecoderScratch::new(input.set.size());
    prepared.near_ml(input.y_d1, input.y_d2, &input.fades, &mut scratch)
}

/// Destination ML rule for an error-free relay: the relay hypothesis is
/// pinned to the message hypothesis. Callers guarantee `y_d2` was built with
/// the true message at the relay.
pub fn ideal_ml(input: &DecoderInput) -> Message {
    let prepared = PreparedDecoder::from_input(input);
    prepared.ideal_ml(input.y_d1, input.y_d2, &input.fades)
}

/// Reusable buffers for the near-ML hot path.
#[derive(Debug, Clone)]
pub struct DecoderScratch {
    /// `y_d2 - c_ds2 S2(a)` per message hypothesis.
    u: Vec<Complex64>,
    /// `|y_d1 - c_ds1 S1(a)|^2` per message hypothesis.
    t2: Vec<f64>,
    /// `c_dr R(j)` per relay hypothesis.
    v: Vec<Complex64>,
}

impl DecoderScratch {
    pub fn new(m: usize) -> Self {
        Self {
            u: vec![Complex64::new(0.0, 0.0); m],
            t2: vec![0.0; m],
            v: vec![Complex64::new(0.0, 0.0); m],
        }
    }
}

/// Symbol tables precomputed once per (set, profile, energy, relay phase);
/// the Monte Carlo harness reuses one across every trial of a sweep point.
#[derive(Debug, Clone)]
pub struct PreparedDecoder {
    m: usize,
    /// Energy-scaled phase-1 source symbols per message.
    s1: Vec<Complex64>,
    /// Energy-scaled phase-2 source symbols per message (zero for ODF).
    s2: Vec<Complex64>,
    /// Energy-scaled, phase-rotated relay symbols per message.
    r: Vec<Complex64>,
}

impl PreparedDecoder {
    pub fn new(
        set: &SignalSet,
        profile: &LabelingProfile,
        params: &ChannelParams,
        relay_phase_rad: f64,
    ) -> Self {
        let m = set.size();
        let amp = params.amplitude();
        let rot = Complex64::from_polar(amp, relay_phase_rad);
        let mut s1 = Vec::with_capacity(m);
        let mut s2 = Vec::with_capacity(m);
        let mut r = Vec::with_capacity(m);
        for v in 1..=m {
            let msg = Message::new(v, m).expect("in range");
            s1.push(profile.x_s1().symbol(set, msg) * amp);
            s2.push(profile.phase2_source_symbol(set, msg) * amp);
            r.push(profile.x_r().symbol(set, msg) * rot);
        }
        Self { m, s1, s2, r }
    }

    fn from_input(input: &DecoderInput) -> Self {
        Self::new(input.set, input.profile, input.params, input.relay_phase_rad)
    }

    /// `f^j(a)` with 1-based raw indices.
    fn f_metric_raw(
        &self,
        y_d1: Complex64,
        y_d2: Complex64,
        fades: &FadeDraw,
        j: usize,
        a: usize,
    ) -> f64 {
        let term1 = 0.25
            * fades.c_rs.norm_sqr()
            * (self.s1[a - 1] - self.s1[j - 1]).norm_sqr();
        let term2 = (y_d1 - fades.c_ds1 * self.s1[a - 1]).norm_sqr();
        let term3 = (y_d2 - fades.c_ds2 * self.s2[a - 1] - fades.c_dr * self.r[j - 1]).norm_sqr();
        term1 + term2 + term3
    }

    /// Relay ML decision for one received sample.
    pub fn relay_ml(&self, y_r: Complex64, c_rs: Complex64) -> Message {
        let mut best = f64::INFINITY;
        let mut arg = 1usize;
        for cand in 0..self.m {
            let metric = (y_r - c_rs * self.s1[cand]).norm_sqr();
            if metric < best {
                best = metric;
                arg = cand + 1;
            }
        }
        Message::new(arg, self.m).expect("in range")
    }

    /// Near-ML destination decision; `scratch` must be sized for `M`.
    pub fn near_ml(
        &self,
        y_d1: Complex64,
        y_d2: Complex64,
        fades: &FadeDraw,
        scratch: &mut DecoderScratch,
    ) -> Message {
        let m = self.m;
        let q = 0.25 * fades.c_rs.norm_sqr();
        for i in 0..m {
            scratch.u[i] = y_d2 - fades.c_ds2 * self.s2[i];
            scratch.t2[i] = (y_d1 - fades.c_ds1 * self.s1[i]).norm_sqr();
            scratch.v[i] = fades.c_dr * self.r[i];
        }
        let mut best = f64::INFINITY;
        let mut arg = 1usize;
        for a in 0..m {
            let base = scratch.t2[a];
            let ua = scratch.u[a];
            for j in 0..m {
                let f = q * (self.s1[a] - self.s1[j]).norm_sqr()
                    + base
                    + (ua - scratch.v[j]).norm_sqr();
                if f < best {
                    best = f;
                    arg = a + 1;
                }
            }
        }
        Message::new(arg, m).expect("in range")
    }

    /// Destination ML decision assuming an error-free relay.
    pub fn ideal_ml(&self, y_d1: Complex64, y_d2: Complex64, fades: &FadeDraw) -> Message {
        let mut best = f64::INFINITY;
        let mut arg = 1usize;
        for a in 0..self.m {
            let metric = self.ideal_metric(y_d1, y_d2, fades, Message::new(a + 1, self.m).expect("in range"));
            if metric < best {
                best = metric;
                arg = a + 1;
            }
        }
        Message::new(arg, self.m).expect("in range")
    }

    /// The error-free-relay metric for one hypothesis.
    pub fn ideal_metric(
        &self,
        y_d1: Complex64,
        y_d2: Complex64,
        fades: &FadeDraw,
        a: Message,
    ) -> f64 {
        let i = a.get() - 1;
        (y_d1 - fades.c_ds1 * self.s1[i]).norm_sqr()
            + (y_d2 - fades.c_ds2 * self.s2[i] - fades.c_dr * self.r[i]).norm_sqr()
    }

    /// `min over j of f^j(a)` for one message hypothesis.
    pub fn min_f_over_relay(
        &self,
        y_d1: Complex64,
        y_d2: Complex64,
        fades: &FadeDraw,
        a: Message,
        scratch: &mut DecoderScratch,
    ) -> f64 {
        let i = a.get() - 1;
        let q = 0.25 * fades.c_rs.norm_sqr();
        let base = (y_d1 - fades.c_ds1 * self.s1[i]).norm_sqr();
        let ua = y_d2 - fades.c_ds2 * self.s2[i];
        for j in 0..self.m {
            scratch.v[j] = fades.c_dr * self.r[j];
        }
        let mut best = f64::INFINITY;
        for j in 0..self.m {
            let f = q * (self.s1[i] - self.s1[j]).norm_sqr() + base + (ua - scratch.v[j]).norm_sqr();
            best = best.min(f);
        }
        best
    }

    /// Energy-scaled phase-1 source symbol for a message.
    pub fn s1_symbol(&self, m: Message) -> Complex64 {
        self.s1[m.get() - 1]
    }

    /// Energy-scaled phase-2 source symbol for a message (zero for ODF).
    pub fn s2_symbol(&self, m: Message) -> Complex64 {
        self.s2[m.get() - 1]
    }

    /// Energy-scaled, phase-rotated relay symbol for a message.
    pub fn r_symbol(&self, m: Message) -> Complex64 {
        self.r[m.get() - 1]
    }
}
