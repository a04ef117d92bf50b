//! Analytic pairwise-error-probability bounds.
//!
//! The binary-decision kernel bounds the probability of preferring one
//! vector over another under a metric offset `c` (the relay-error charge):
//! exactly a Q-function, Chernoff-bounded by `(1/2) exp(-||d||^2/4 - c/2)`.
//! Averaging the kernel over Rayleigh fades turns each exponential into a
//! `1/(1 + variance * distance / 4)` bracket. Keeping only the order-2 terms
//! gives the closed-form pair bounds ([`theorem1_pep`] for NODF,
//! [`corollary1_pep`] for ODF); [`full_pep_eq14`] keeps every term of the
//! double sum. With an error-free relay the bound loses the relay-hypothesis
//! sum ([`ideal_pep_eq17`], with conditional form [`pep_exact_ideal_eq15`]).
//!
//! All bounds scale squared symbol distances by the linear symbol energy, so
//! one unit-energy constellation serves every sweep point. Every bound
//! depends on relay symbols only through their pairwise distances, which is
//! why rotating the relay's signal set leaves all of them unchanged.

use crate::channel::{ChannelParams, FadeDraw};
use crate::labeling::{LabelingProfile, Message, Scheme};
use crate::{Error, Result, SignalSet};
use num_complex::Complex64;
use statrs::function::erf::erfc;

/// Complementary CDF of the standard Gaussian, via the complementary error
/// function at double precision.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inputs shared by the analytic bounds.
#[derive(Debug, Clone)]
pub struct BoundContext<'a> {
    set: &'a SignalSet,
    profile: &'a LabelingProfile,
    params: &'a ChannelParams,
    relay_phase_rad: f64,
}

impl<'a> BoundContext<'a> {
    pub fn new(
        set: &'a SignalSet,
        profile: &'a LabelingProfile,
        params: &'a ChannelParams,
    ) -> Result<Self> {
        if set.size() != profile.size() {
            return Err(Error::Precondition(
                "signal set and profile cover different message counts".into(),
            ));
        }
        Ok(Self {
            set,
            profile,
            params,
            relay_phase_rad: 0.0,
        })
    }

    /// Rotates the relay's copy of the signal set.
    pub fn with_relay_phase(mut self, relay_phase_rad: f64) -> Self {
        self.relay_phase_rad = relay_phase_rad;
        self
    }

    pub fn set(&self) -> &SignalSet {
        self.set
    }

    pub fn profile(&self) -> &LabelingProfile {
        self.profile
    }

    pub fn params(&self) -> &ChannelParams {
        self.params
    }

    fn size(&self) -> usize {
        self.set.size()
    }

    fn check_pair(&self, a: Message, abar: Message) -> Result<()> {
        if a == abar {
            return Err(Error::Precondition(
                "pairwise bounds require two distinct messages".into(),
            ));
        }
        Ok(())
    }

    /// Squared phase-1 source symbol distance (unit-energy set).
    fn d1(&self, a: Message, b: Message) -> f64 {
        let l = self.profile.x_s1();
        self.set.sq_dist_unchecked(l.point_for(a), l.point_for(b))
    }

    /// Squared relay symbol distance, computed through the rotated relay set.
    fn d_r(&self, a: Message, b: Message) -> f64 {
        let l = self.profile.x_r();
        let rot = Complex64::from_polar(1.0, self.relay_phase_rad);
        let pa = self.set.points()[l.point_for(a) - 1] * rot;
        let pb = self.set.points()[l.point_for(b) - 1] * rot;
        (pa - pb).norm_sqr()
    }

    /// Squared phase-2 source symbol distance; zero for ODF.
    fn d2(&self, a: Message, b: Message) -> f64 {
        match self.profile.x_s2() {
            Some(l) => self.set.sq_dist_unchecked(l.point_for(a), l.point_for(b)),
            None => 0.0,
        }
    }

    fn msg(&self, v: usize) -> Message {
        Message::new(v, self.size()).expect("in range")
    }
}

/// Exact probability that the binary decision kernel prefers `x2` given `x1`
/// was sent: decide `2` when `||y - x1||^2 > ||y - x2||^2 + c`, `y = x1 + z`,
/// `z` unit-variance complex Gaussian per component.
pub fn lemma1_exact(x1: &[Complex64], x2: &[Complex64], c: f64) -> Result<f64> {
    let dist_sq: f64 = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    if x1.len() != x2.len() {
        return Err(Error::Precondition(
            "vectors must have the same length".into(),
        ));
    }
    if dist_sq == 0.0 {
        return Err(Error::Precondition(
            "kernel requires distinct transmit vectors".into(),
        ));
    }
    let dist = dist_sq.sqrt();
    Ok(q_function(std::f64::consts::SQRT_2 * (dist / 2.0 + c / (2.0 * dist))))
}

/// Chernoff form of the kernel: `(1/2) exp(-||x1 - x2||^2 / 4 - c / 2)`.
pub fn lemma1_bound(x1: &[Complex64], x2: &[Complex64], c: f64) -> f64 {
    let dist_sq: f64 = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    0.5 * (-dist_sq / 4.0 - c / 2.0).exp()
}

/// Order-2 NODF pair bound: both transmit phases contribute a fading
/// bracket; the relay hypothesis is pinned to the competing message.
pub fn theorem1_pep(ctx: &BoundContext, a: Message, abar: Message) -> Result<f64> {
    ctx.check_pair(a, abar)?;
    let es = ctx.params.es_linear();
    let g_ds = es * ctx.params.sigma_ds_sq() / 4.0;
    let g_dr = es * ctx.params.sigma_dr_sq() / 4.0;
    let b1 = 1.0 / (1.0 + g_ds * ctx.d1(a, abar));
    let b2 = 1.0 / (1.0 + g_ds * ctx.d2(a, abar) + g_dr * ctx.d_r(a, abar));
    Ok(0.5 * b1 * b2)
}

/// Order-2 ODF pair bound: the direct term plus the relay-error terms, which
/// survive at order 2 because the orthogonal scheme has no phase-2 source
/// transmission to suppress them.
pub fn corollary1_pep(ctx: &BoundContext, a: Message, abar: Message) -> Result<f64> {
    ctx.check_pair(a, abar)?;
    if ctx.profile.scheme() != Scheme::Odf {
        return Err(Error::Precondition(
            "the ODF pair bound requires an ODF profile".into(),
        ));
    }
    let es = ctx.params.es_linear();
    let g_ds = es * ctx.params.sigma_ds_sq() / 4.0;
    let g_dr = es * ctx.params.sigma_dr_sq() / 4.0;
    let g_rs = es * ctx.params.sigma_rs_sq() / 8.0;
    let m1 = ctx.d1(a, abar);
    let b1 = 1.0 / (1.0 + g_ds * m1);
    let term_a = b1 / (1.0 + g_dr * ctx.d_r(a, abar));
    let mut relay_sum = 0.0;
    for j in 1..=ctx.size() {
        if j == a.get() {
            continue;
        }
        relay_sum += 1.0 / (1.0 + g_rs * (ctx.d1(a, ctx.msg(j)) + m1));
    }
    Ok(term_a + b1 * relay_sum)
}

/// The complete Rayleigh-averaged double-sum bound, all orders kept.
///
/// The first sum runs over the destination's relay hypothesis with the relay
/// correct; the second over actual relay errors `j` and hypotheses `m`. The
/// order-2 content of the first sum is the `l = abar` term, which equals
/// [`theorem1_pep`].
pub fn full_pep_eq14(ctx: &BoundContext, a: Message, abar: Message) -> Result<f64> {
    ctx.check_pair(a, abar)?;
    let es = ctx.params.es_linear();
    let g_ds = es * ctx.params.sigma_ds_sq() / 4.0;
    let g_dr = es * ctx.params.sigma_dr_sq() / 4.0;
    let g_rs = es * ctx.params.sigma_rs_sq() / 8.0;
    let m = ctx.size();
    let b1 = 1.0 / (1.0 + g_ds * ctx.d1(a, abar));
    let d2_pair = ctx.d2(a, abar);

    let mut sum1 = 0.0;
    for l in 1..=m {
        let lm = ctx.msg(l);
        let mid = 1.0 / (1.0 + g_ds * d2_pair + g_dr * ctx.d_r(a, lm));
        let relay = 1.0 / (1.0 + g_rs * ctx.d1(abar, lm));
        sum1 += b1 * mid * relay;
    }

    let mut sum2 = 0.0;
    for j in 1..=m {
        if j == a.get() {
            continue;
        }
        let jm = ctx.msg(j);
        let charge_j = g_rs * ctx.d1(a, jm);
        for hyp in 1..=m {
            let hm = ctx.msg(hyp);
            let mid = 1.0 / (1.0 + g_ds * d2_pair + g_dr * ctx.d_r(a, hm));
            let relay = 1.0 / (1.0 + charge_j + g_rs * ctx.d1(abar, hm));
            sum2 += b1 * mid * relay;
        }
    }

    Ok(0.5 * sum1 + 0.25 * sum2)
}

/// Pair bound with an error-free relay (no 1/2 prefactor).
pub fn ideal_pep_eq17(ctx: &BoundContext, a: Message, abar: Message) -> Result<f64> {
    ctx.check_pair(a, abar)?;
    let es = ctx.params.es_linear();
    let g_ds = es * ctx.params.sigma_ds_sq() / 4.0;
    let g_dr = es * ctx.params.sigma_dr_sq() / 4.0;
    let b1 = 1.0 / (1.0 + g_ds * ctx.d1(a, abar));
    let b2 = 1.0 / (1.0 + g_ds * ctx.d2(a, abar) + g_dr * ctx.d_r(a, abar));
    Ok(b1 * b2)
}

/// Exact pairwise error probability conditioned on the fades, for an
/// error-free relay.
pub fn pep_exact_ideal_eq15(
    fades: &FadeDraw,
    ctx: &BoundContext,
    a: Message,
    abar: Message,
) -> Result<f64> {
    ctx.check_pair(a, abar)?;
    let amp = ctx.params.amplitude();
    let rot = Complex64::from_polar(1.0, ctx.relay_phase_rad);
    let s1 = |m: Message| ctx.profile.x_s1().symbol(ctx.set, m) * amp;
    let s2 = |m: Message| ctx.profile.phase2_source_symbol(ctx.set, m) * amp;
    let r = |m: Message| ctx.profile.x_r().symbol(ctx.set, m) * rot * amp;
    let phase1 = (fades.c_ds1 * (s1(a) - s1(abar))).norm_sqr();
    let phase2 =
        (fades.c_ds2 * (s2(a) - s2(abar)) + fades.c_dr * (r(a) - r(abar))).norm_sqr();
    Ok(q_function(((phase1 + phase2) / 2.0).sqrt()))
}

/// Union bound on the message error rate over an energy grid:
/// `(1/M) sum_a sum_{abar != a} bound(a, abar)`, with the pair bound chosen
/// by the profile's scheme. Returns `(es_db, bound)` per grid point.
pub fn union_bound_curve(
    set: &SignalSet,
    profile: &LabelingProfile,
    params: &ChannelParams,
    es_grid_db: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if es_grid_db.is_empty() {
        return Err(Error::Precondition("empty energy grid".into()));
    }
    let m = set.size();
    let mut out = Vec::with_capacity(es_grid_db.len());
    for &es_db in es_grid_db {
        let point_params = params.with_es_db(es_db);
        let ctx = BoundContext::new(set, profile, &point_params)?;
        let mut acc = 0.0;
        for a in 1..=m {
            for abar in 1..=m {
                if a == abar {
                    continue;
                }
                let (am, bm) = (ctx.msg(a), ctx.msg(abar));
                acc += match profile.scheme() {
                    Scheme::Nodf => theorem1_pep(&ctx, am, bm)?,
                    Scheme::Odf => corollary1_pep(&ctx, am, bm)?,
                };
            }
        }
        out.push((es_db, acc / m as f64));
    }
    Ok(out)
}
