//! Complex signal sets used at the source and the relay.
//!
//! A [`SignalSet`] is an ordered list of distinct complex points with unit
//! average energy. Point indices are 1-based in every user-facing interface;
//! message `j` carries the `log2 M`-bit big-endian label of `j - 1`.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Tolerance on the unit-average-energy invariant.
const ENERGY_TOL: f64 = 1e-12;

/// An ordered complex constellation with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    points: Vec<Complex64>,
}

impl SignalSet {
    /// Builds the M-PSK set with `points[k] = exp(i 2 pi (k-1) / M)`,
    /// `s_1 = 1 + 0i` and counter-clockwise ordering.
    pub fn mpsk(m: usize) -> Result<Self> {
        validate_cardinality(m)?;
        let points = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Ok(Self { points })
    }

    /// Accepts an arbitrary constellation, normalizing it to unit average
    /// energy (division by the RMS magnitude) before validation.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        validate_cardinality(points.len())?;
        let mean_energy: f64 =
            points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if mean_energy <= 0.0 || !mean_energy.is_finite() {
            return Err(Error::Constellation(
                "points must have positive finite average energy".into(),
            ));
        }
        let scale = mean_energy.sqrt();
        let points: Vec<Complex64> = points.into_iter().map(|p| p / scale).collect();
        // Distinctness after normalization; repeated points make every
        // labelling metric degenerate.
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if (points[i] - points[j]).norm_sqr() == 0.0 {
                    return Err(Error::Constellation(format!(
                        "points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let set = Self { points };
        debug_assert!((set.mean_energy() - 1.0).abs() <= ENERGY_TOL);
        Ok(set)
    }

    /// Number of points (and messages), `M`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Bits per message, `log2 M`.
    pub fn bits_per_message(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    /// The point with 1-based index `idx`.
    pub fn point(&self, idx: usize) -> Result<Complex64> {
        self.check_index(idx)?;
        Ok(self.points[idx - 1])
    }

    /// All points in index order.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Average energy `(1/M) sum |s_k|^2`; equals 1 by construction.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Squared Euclidean distance `|s_i - s_j|^2` between 1-based indices.
    pub fn sq_dist(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.sq_dist_unchecked(i, j))
    }

    /// `sq_dist` without index validation; callers guarantee `1 <= i, j <= M`.
    pub(crate) fn sq_dist_unchecked(&self, i: usize, j: usize) -> f64 {
        (self.points[i - 1] - self.points[j - 1]).norm_sqr()
    }

    /// Minimum squared distance over all point pairs (`delta`).
    pub fn min_sq_dist(&self) -> f64 {
        let m = self.points.len();
        let mut best = f64::INFINITY;
        for i in 1..=m {
            for j in (i + 1)..=m {
                best = best.min(self.sq_dist_unchecked(i, j));
            }
        }
        best
    }

    /// Returns the big-endian bit label of message `j` (1-based), as a string
    /// of `log2 M` characters. Message 1 maps to the all-zero label.
    pub fn bit_label(&self, j: usize) -> Result<String> {
        self.check_index(j)?;
        let width = self.bits_per_message() as usize;
        let mut out = String::with_capacity(width);
        for b in (0..width).rev() {
            out.push(if (j - 1) >> b & 1 == 1 { '1' } else { '0' });
        }
        Ok(out)
    }

    /// Renders the constellation as a text table: one `index bits real imag`
    /// row per point, values to 6 significant digits.
    pub fn export_table(&self) -> String {
        let mut out = String::from("index\tbits\treal\timag\n");
        for (k, p) in self.points.iter().enumerate() {
            let idx = k + 1;
            let bits = self.bit_label(idx).expect("index in range");
            writeln!(out, "{idx}\t{bits}\t{:.6e}\t{:.6e}", p.re, p.im).expect("string write");
        }
        out
    }

    /// Parses the format written by [`export_table`](Self::export_table).
    /// Rows may appear in any order; each index must appear exactly once.
    pub fn import_table(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, Complex64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("index") || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected 4 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let idx: usize = fields[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad index: {e}", lineno + 1)))?;
            let re: f64 = fields[2]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad real part: {e}", lineno + 1)))?;
            let im: f64 = fields[3]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad imag part: {e}", lineno + 1)))?;
            rows.push((idx, Complex64::new(re, im)));
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty constellation table".into()));
        }
        let m = rows.len();
        let mut points = vec![None; m];
        for (idx, p) in rows {
            if idx == 0 || idx > m {
                return Err(Error::Parse(format!("point index {idx} out of range 1..={m}")));
            }
            if points[idx - 1].replace(p).is_some() {
                return Err(Error::Parse(format!("duplicate point index {idx}")));
            }
        }
        let points: Vec<Complex64> = points.into_iter().map(|p| p.expect("all filled")).collect();
        Self::from_points(points)
    }

    fn check_index(&self, idx: usize) -> Result<()> {
        if idx == 0 || idx > self.points.len() {
            return Err(Error::IndexRange(format!(
                "point index {idx} not in 1..={}",
                self.points.len()
            )));
        }
        Ok(())
    }
}

fn validate_cardinality(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Constellation(format!(
            "cardinality must be a power of 2 and at least 2, got {m}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn mpsk4_points() {
        let set = SignalSet::mpsk(4).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (p, e) in set.points().iter().zip(expect) {
            assert_relative_eq!(p.re, e.re, epsilon = 1e-15);
            assert_relative_eq!(p.im, e.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn mpsk2_is_antipodal() {
        let set = SignalSet::mpsk(2).unwrap();
        assert_relative_eq!(set.point(1).unwrap().re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(set.point(2).unwrap().re, -1.0, epsilon = 1e-15);
        assert!(set.point(2).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn mpsk8_adjacent_distance() {
        let set = SignalSet::mpsk(8).unwrap();
        assert_relative_eq!(set.sq_dist(1, 2).unwrap(), 2.0 - SQRT2, epsilon = 1e-12);
    }

    #[test]
    fn sq_dist_examples() {
        let psk4 = SignalSet::mpsk(4).unwrap();
        assert_relative_eq!(psk4.sq_dist(1, 3).unwrap(), 4.0, epsilon = 1e-12);
        let psk8 = SignalSet::mpsk(8).unwrap();
        assert_relative_eq!(psk8.sq_dist(1, 4).unwrap(), 2.0 + SQRT2, epsilon = 1e-12);
        assert_eq!(psk8.sq_dist(5, 5).unwrap(), 0.0);
    }

    #[test]
    fn sq_dist_rejects_out_of_range() {
        let set = SignalSet::mpsk(4).unwrap();
        assert!(set.sq_dist(0, 1).is_err());
        assert!(set.sq_dist(1, 5).is_err());
    }

    #[test]
    fn min_sq_dist_examples() {
        assert_relative_eq!(
            SignalSet::mpsk(8).unwrap().min_sq_dist(),
            2.0 - SQRT2,
            epsilon = 1e-12
        );
        assert_relative_eq!(SignalSet::mpsk(4).unwrap().min_sq_dist(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(SignalSet::mpsk(2).unwrap().min_sq_dist(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_cardinality_rejected() {
        assert!(SignalSet::mpsk(0).is_err());
        assert!(SignalSet::mpsk(1).is_err());
        assert!(SignalSet::mpsk(3).is_err());
        assert!(SignalSet::mpsk(12).is_err());
    }

    #[test]
    fn custom_points_are_normalized() {
        // 4-QAM with raw corner coordinates; RMS normalization brings the
        // average energy back to 1.
        let raw = vec![
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, -1.0),
        ];
        let set = SignalSet::from_points(raw).unwrap();
        assert_relative_eq!(set.mean_energy(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(set.point(1).unwrap().re, 1.0 / SQRT2, epsilon = 1e-12);
    }

    #[test]
    fn repeated_points_rejected() {
        let raw = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        assert!(SignalSet::from_points(raw).is_err());
    }

    #[test]
    fn bit_labels_big_endian() {
        let set = SignalSet::mpsk(8).unwrap();
        assert_eq!(set.bit_label(1).unwrap(), "000");
        assert_eq!(set.bit_label(2).unwrap(), "001");
        assert_eq!(set.bit_label(8).unwrap(), "111");
    }

    #[test]
    fn table_round_trip() {
        let set = SignalSet::mpsk(8).unwrap();
        let text = set.export_table();
        let back = SignalSet::import_table(&text).unwrap();
        for (a, b) in set.points().iter().zip(back.points()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-5);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-5);
        }
    }

    #[test]
    fn import_rejects_duplicate_index() {
        let text = "1 00 1.0 0.0\n1 00 0.0 1.0\n2 01 -1.0 0.0\n3 10 0.0 -1.0\n";
        assert!(SignalSet::import_table(text).is_err());
    }

    proptest! {
        /// For M-PSK the squared distance depends only on |i - j| mod M.
        #[test]
        fn mpsk_distances_are_circulant(exp in 1u32..6, i in 1usize..64, j in 1usize..64, k in 0usize..64) {
            let m = 1usize << exp;
            prop_assume!(i <= m && j <= m);
            let set = SignalSet::mpsk(m).unwrap();
            let shift = |x: usize| (x - 1 + k) % m + 1;
            let d1 = set.sq_dist(i, j).unwrap();
            let d2 = set.sq_dist(shift(i), shift(j)).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-12);
        }

        /// Unit-energy invariant holds after construction for all M.
        #[test]
        fn mpsk_energy_is_unit(exp in 1u32..9) {
            let set = SignalSet::mpsk(1usize << exp).unwrap();
            prop_assert!((set.mean_energy() - 1.0).abs() <= 1e-12);
        }

        /// min_sq_dist(M-PSK) = 2 - 2 cos(2 pi / M) exactly.
        #[test]
        fn mpsk_min_distance_closed_form(exp in 1u32..9) {
            let m = 1usize << exp;
            let set = SignalSet::mpsk(m).unwrap();
            let expect = 2.0 - 2.0 * (2.0 * PI / m as f64).cos();
            prop_assert!((set.min_sq_dist() - expect).abs() < 1e-12);
        }
    }
}
