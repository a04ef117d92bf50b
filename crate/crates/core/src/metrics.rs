//! High-SNR labelling metrics.
//!
//! For a message pair `(a, abar)` let `m1`, `m2`, `m3` be the squared symbol
//! distances under the phase-1 source map, the relay map and the phase-2
//! source map. The pair metric that governs the dominant error events is
//! `m1 * (alpha * m3 + m2)` for NODF and `m1 * m2` for ODF, where `alpha` is
//! the ratio of the source-destination to relay-destination link variances.
//! A labelling is judged by the worst pair, `d(L) = min over pairs`; the gain
//! of a labelling over the identity baseline `L_0` is the dB ratio of their
//! `d` values.

use crate::labeling::{LabelingProfile, Message, Scheme};
use crate::{Error, Result, SignalSet};

/// Everything needed to evaluate the pair metric for one labelling.
#[derive(Debug, Clone)]
pub struct MetricContext<'a> {
    set: &'a SignalSet,
    profile: &'a LabelingProfile,
    alpha: f64,
}

impl<'a> MetricContext<'a> {
    /// Bundles a signal set, a profile and the link-variance ratio `alpha`.
    /// `alpha` is ignored by the ODF metric.
    pub fn new(set: &'a SignalSet, profile: &'a LabelingProfile, alpha: f64) -> Result<Self> {
        if set.size() != profile.size() {
            return Err(Error::Precondition(
                "signal set and profile cover different message counts".into(),
            ));
        }
        if !(alpha >= 0.0) {
            return Err(Error::Precondition(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self {
            set,
            profile,
            alpha,
        })
    }

    pub fn set(&self) -> &SignalSet {
        self.set
    }

    pub fn profile(&self) -> &LabelingProfile {
        self.profile
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Squared distance between the phase-1 source symbols of two messages.
    pub(crate) fn m1(&self, a: Message, abar: Message) -> f64 {
        let l = self.profile.x_s1();
        self.set.sq_dist_unchecked(l.point_for(a), l.point_for(abar))
    }

    /// Squared distance between the relay symbols of two messages.
    pub(crate) fn m2(&self, a: Message, abar: Message) -> f64 {
        let l = self.profile.x_r();
        self.set.sq_dist_unchecked(l.point_for(a), l.point_for(abar))
    }

    /// Squared distance between the phase-2 source symbols of two messages;
    /// zero for ODF profiles, which keep the source silent in phase 2.
    pub(crate) fn m3(&self, a: Message, abar: Message) -> f64 {
        match self.profile.x_s2() {
            Some(l) => self
                .set
                .sq_dist_unchecked(l.point_for(a), l.point_for(abar)),
            None => 0.0,
        }
    }
}

/// The high-SNR pair metric `m(a, abar)`.
pub fn pair_metric(ctx: &MetricContext, a: Message, abar: Message) -> Result<f64> {
    if a == abar {
        return Err(Error::Precondition(
            "pair metric requires two distinct messages".into(),
        ));
    }
    let m1 = ctx.m1(a, abar);
    let m2 = ctx.m2(a, abar);
    Ok(match ctx.profile.scheme() {
        Scheme::Nodf => m1 * (ctx.alpha * ctx.m3(a, abar) + m2),
        Scheme::Odf => m1 * m2,
    })
}

/// `p(a)`: the worst pair metric over all alternatives to message `a`.
pub fn worst_case_per_message(ctx: &MetricContext, a: Message) -> f64 {
    let m = ctx.set.size();
    let mut best = f64::INFINITY;
    for other in 1..=m {
        if other == a.get() {
            continue;
        }
        let abar = Message::new(other, m).expect("in range");
        best = best.min(pair_metric(ctx, a, abar).expect("distinct"));
    }
    best
}

/// `d(L)`: the minimum pair metric over all ordered message pairs.
pub fn labeling_min_metric(ctx: &MetricContext) -> f64 {
    let m = ctx.set.size();
    (1..=m)
        .map(|a| worst_case_per_message(ctx, Message::new(a, m).expect("in range")))
        .fold(f64::INFINITY, f64::min)
}

/// Labelling gain `10 log10(d(L) / d(L_0))` in dB.
///
/// Both contexts must evaluate the same signal set, scheme and `alpha`;
/// `ctx_l0` is the baseline (typically the identity profile).
pub fn labeling_gain_db(ctx_l: &MetricContext, ctx_l0: &MetricContext) -> Result<f64> {
    if ctx_l.profile.scheme() != ctx_l0.profile.scheme() {
        return Err(Error::Precondition(
            "labelling gain compares profiles of the same scheme".into(),
        ));
    }
    if ctx_l.set != ctx_l0.set {
        return Err(Error::Precondition(
            "labelling gain compares profiles over the same signal set".into(),
        ));
    }
    if ctx_l.alpha != ctx_l0.alpha {
        return Err(Error::Precondition(
            "labelling gain compares metrics at the same alpha".into(),
        ));
    }
    let d = labeling_min_metric(ctx_l);
    let d0 = labeling_min_metric(ctx_l0);
    if d0 <= 0.0 {
        return Err(Error::Precondition(
            "baseline labelling has zero worst-case metric".into(),
        ));
    }
    Ok(10.0 * (d / d0).log10())
}

/// Rounds a reported metric to 4 decimal places, the precision used by the
/// exported tables.
pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Labeling;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn msg(v: usize, m: usize) -> Message {
        Message::new(v, m).unwrap()
    }

    fn psk8_nodf_reference() -> LabelingProfile {
        LabelingProfile::new(
            Scheme::Nodf,
            Labeling::identity(8),
            Labeling::new(vec![1, 5, 2, 7, 3, 8, 4, 6]).unwrap(),
            Some(Labeling::new(vec![1, 3, 5, 6, 8, 2, 4, 7]).unwrap()),
        )
        .unwrap()
    }

    fn psk8_odf_reference() -> LabelingProfile {
        LabelingProfile::new(
            Scheme::Odf,
            Labeling::identity(8),
            Labeling::new(vec![1, 5, 2, 7, 3, 8, 4, 6]).unwrap(),
            None,
        )
        .unwrap()
    }

    fn psk4_nodf_reference() -> LabelingProfile {
        LabelingProfile::new(
            Scheme::Nodf,
            Labeling::identity(4),
            Labeling::new(vec![1, 3, 4, 2]).unwrap(),
            Some(Labeling::new(vec![1, 2, 4, 3]).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn pair_metric_identity_adjacent_psk8() {
        let set = SignalSet::mpsk(8).unwrap();
        let l0 = LabelingProfile::identity(Scheme::Nodf, 8);
        let ctx = MetricContext::new(&set, &l0, 0.1).unwrap();
        let m = pair_metric(&ctx, msg(1, 8), msg(2, 8)).unwrap();
        assert_relative_eq!(round4(m), 0.3775, epsilon = 1e-12);
    }

    #[test]
    fn pair_metric_psk4_reference_pair() {
        let set = SignalSet::mpsk(4).unwrap();
        let profile = psk4_nodf_reference();
        let ctx = MetricContext::new(&set, &profile, 0.1).unwrap();
        let m = pair_metric(&ctx, msg(1, 4), msg(4, 4)).unwrap();
        assert_relative_eq!(m, 4.8, epsilon = 1e-12);
    }

    #[test]
    fn pair_metric_odf_antipodal() {
        let set = SignalSet::mpsk(4).unwrap();
        // Identity relay map keeps antipodal messages on antipodal points.
        let profile = LabelingProfile::identity(Scheme::Odf, 4);
        let ctx = MetricContext::new(&set, &profile, 0.0).unwrap();
        let m = pair_metric(&ctx, msg(1, 4), msg(3, 4)).unwrap();
        assert_relative_eq!(m, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn pair_metric_rejects_equal_messages() {
        let set = SignalSet::mpsk(4).unwrap();
        let profile = LabelingProfile::identity(Scheme::Odf, 4);
        let ctx = MetricContext::new(&set, &profile, 0.0).unwrap();
        assert!(pair_metric(&ctx, msg(2, 4), msg(2, 4)).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let set8 = SignalSet::mpsk(8).unwrap();
        let nodf = psk8_nodf_reference();
        let ctx = MetricContext::new(&set8, &nodf, 0.1).unwrap();
        assert_relative_eq!(
            round4(worst_case_per_message(&ctx, msg(7, 8))),
            1.3716,
            epsilon = 1e-12
        );

        let odf = psk8_odf_reference();
        let ctx = MetricContext::new(&set8, &odf, 0.0).unwrap();
        assert_relative_eq!(
            round4(worst_case_per_message(&ctx, msg(1, 8))),
            1.1716,
            epsilon = 1e-12
        );

        let set4 = SignalSet::mpsk(4).unwrap();
        let l0 = LabelingProfile::identity(Scheme::Nodf, 4);
        let ctx = MetricContext::new(&set4, &l0, 0.1).unwrap();
        for a in 1..=4 {
            assert_relative_eq!(worst_case_per_message(&ctx, msg(a, 4)), 4.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn min_metric_examples() {
        let set8 = SignalSet::mpsk(8).unwrap();
        let nodf = psk8_nodf_reference();
        let ctx = MetricContext::new(&set8, &nodf, 0.1).unwrap();
        assert_relative_eq!(round4(labeling_min_metric(&ctx)), 1.3716, epsilon = 1e-12);

        let l0 = LabelingProfile::identity(Scheme::Nodf, 8);
        let ctx0 = MetricContext::new(&set8, &l0, 0.1).unwrap();
        assert_relative_eq!(round4(labeling_min_metric(&ctx0)), 0.3775, epsilon = 1e-12);
    }

    #[test]
    fn gain_examples() {
        let set8 = SignalSet::mpsk(8).unwrap();
        let nodf = psk8_nodf_reference();
        let l0_nodf = LabelingProfile::identity(Scheme::Nodf, 8);
        let ctx = MetricContext::new(&set8, &nodf, 0.1).unwrap();
        let ctx0 = MetricContext::new(&set8, &l0_nodf, 0.1).unwrap();
        let gain = labeling_gain_db(&ctx, &ctx0).unwrap();
        assert!((gain - 5.6031).abs() < 1e-3, "NODF gain {gain}");

        let odf = psk8_odf_reference();
        let l0_odf = LabelingProfile::identity(Scheme::Odf, 8);
        let ctx = MetricContext::new(&set8, &odf, 0.0).unwrap();
        let ctx0 = MetricContext::new(&set8, &l0_odf, 0.0).unwrap();
        let gain = labeling_gain_db(&ctx, &ctx0).unwrap();
        assert!((gain - 5.3336).abs() < 1e-3, "ODF gain {gain}");

        // 4-PSK ODF: every bijection achieves the same worst case.
        let set4 = SignalSet::mpsk(4).unwrap();
        let profile = LabelingProfile::new(
            Scheme::Odf,
            Labeling::identity(4),
            Labeling::new(vec![1, 3, 4, 2]).unwrap(),
            None,
        )
        .unwrap();
        let l0 = LabelingProfile::identity(Scheme::Odf, 4);
        let ctx = MetricContext::new(&set4, &profile, 0.0).unwrap();
        let ctx0 = MetricContext::new(&set4, &l0, 0.0).unwrap();
        assert_relative_eq!(labeling_gain_db(&ctx, &ctx0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gain_psk4_nodf() {
        let set = SignalSet::mpsk(4).unwrap();
        let profile = psk4_nodf_reference();
        let l0 = LabelingProfile::identity(Scheme::Nodf, 4);
        let ctx = MetricContext::new(&set, &profile, 0.1).unwrap();
        let ctx0 = MetricContext::new(&set, &l0, 0.1).unwrap();
        let gain = labeling_gain_db(&ctx, &ctx0).unwrap();
        assert!((gain - 0.3779).abs() < 1e-3, "gain {gain}");
    }

    #[test]
    fn identity_baseline_closed_form() {
        // d(L_0) = delta^2 (1 + alpha) for NODF and delta^2 for ODF.
        for m in [2usize, 4, 8, 16] {
            let set = SignalSet::mpsk(m).unwrap();
            let delta = set.min_sq_dist();
            for &alpha in &[0.0, 0.1, 0.5] {
                let nodf = LabelingProfile::identity(Scheme::Nodf, m);
                let ctx = MetricContext::new(&set, &nodf, alpha).unwrap();
                assert_relative_eq!(
                    labeling_min_metric(&ctx),
                    delta * delta * (1.0 + alpha),
                    epsilon = 1e-12
                );
            }
            let odf = LabelingProfile::identity(Scheme::Odf, m);
            let ctx = MetricContext::new(&set, &odf, 0.0).unwrap();
            assert_relative_eq!(labeling_min_metric(&ctx), delta * delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_leaves_pair_metric_unchanged() {
        let base = SignalSet::mpsk(8).unwrap();
        let theta = 0.7312;
        let rot = num_complex::Complex64::from_polar(1.0, theta);
        let rotated =
            SignalSet::from_points(base.points().iter().map(|p| p * rot).collect()).unwrap();
        let profile = psk8_nodf_reference();
        let ctx_a = MetricContext::new(&base, &profile, 0.1).unwrap();
        let ctx_b = MetricContext::new(&rotated, &profile, 0.1).unwrap();
        for a in 1..=8 {
            for b in 1..=8 {
                if a == b {
                    continue;
                }
                let pa = pair_metric(&ctx_a, msg(a, 8), msg(b, 8)).unwrap();
                let pb = pair_metric(&ctx_b, msg(a, 8), msg(b, 8)).unwrap();
                assert_relative_eq!(pa, pb, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        /// The pair metric is symmetric in its arguments.
        #[test]
        fn pair_metric_symmetry(a in 1usize..=8, b in 1usize..=8, alpha in 0.0f64..2.0) {
            prop_assume!(a != b);
            let set = SignalSet::mpsk(8).unwrap();
            let profile = psk8_nodf_reference();
            let ctx = MetricContext::new(&set, &profile, alpha).unwrap();
            let ma = pair_metric(&ctx, msg(a, 8), msg(b, 8)).unwrap();
            let mb = pair_metric(&ctx, msg(b, 8), msg(a, 8)).unwrap();
            prop_assert!((ma - mb).abs() < 1e-12);
        }

        /// The ODF metric is the NODF metric evaluated at alpha = 0,
        /// whatever x_s2 the NODF profile carries.
        #[test]
        fn odf_equals_nodf_alpha_zero(seed in 0u64..500) {
            let m = 8usize;
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state
            };
            let mut perm = || {
                let mut v: Vec<usize> = (1..=m).collect();
                for i in (1..m).rev() {
                    let j = (next() % (i as u64 + 1)) as usize;
                    v.swap(i, j);
                }
                v
            };
            let x_r = Labeling::new(perm()).unwrap();
            let x_s2 = Labeling::new(perm()).unwrap();
            let set = SignalSet::mpsk(m).unwrap();
            let nodf = LabelingProfile::new(Scheme::Nodf, Labeling::identity(m), x_r.clone(), Some(x_s2)).unwrap();
            let odf = LabelingProfile::new(Scheme::Odf, Labeling::identity(m), x_r, None).unwrap();
            let ctx_n = MetricContext::new(&set, &nodf, 0.0).unwrap();
            let ctx_o = MetricContext::new(&set, &odf, 0.0).unwrap();
            for a in 1..=m {
                for b in 1..=m {
                    if a == b { continue; }
                    let mn = pair_metric(&ctx_n, msg(a, m), msg(b, m)).unwrap();
                    let mo = pair_metric(&ctx_o, msg(a, m), msg(b, m)).unwrap();
                    prop_assert!((mn - mo).abs() < 1e-12);
                }
            }
        }

        /// Every bijective relay map on 4-PSK achieves d(L) = 4 under ODF.
        #[test]
        fn psk4_odf_worst_case_is_four(seed in 0u64..500) {
            let m = 4usize;
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(7);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state
            };
            let mut v: Vec<usize> = (1..=m).collect();
            for i in (1..m).rev() {
                let j = (next() % (i as u64 + 1)) as usize;
                v.swap(i, j);
            }
            let set = SignalSet::mpsk(m).unwrap();
            let profile = LabelingProfile::new(Scheme::Odf, Labeling::identity(m), Labeling::new(v).unwrap(), None).unwrap();
            let ctx = MetricContext::new(&set, &profile, 0.0).unwrap();
            prop_assert!((labeling_min_metric(&ctx) - 4.0).abs() < 1e-12);
        }
    }
}
