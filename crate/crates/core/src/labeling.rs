//! Message-to-symbol maps and per-scheme labelling profiles.
//!
//! A [`Labeling`] assigns every message a distinct constellation point
//! (bijections only). A [`LabelingProfile`] bundles the maps a scheme needs:
//! the NODF scheme uses three maps (source phase 1, source phase 2, relay)
//! while the ODF scheme uses two (source, relay); the ODF destination metric
//! treats the missing phase-2 source symbol as zero.

use crate::{Error, Result, SignalSet};
use num_complex::Complex64;
use std::fmt::Write as _;

/// Relay protocol selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Non-orthogonal decode and forward: source and relay transmit in phase 2.
    Nodf,
    /// Orthogonal decode and forward: only the relay transmits in phase 2.
    Odf,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Nodf => write!(f, "nodf"),
            Scheme::Odf => write!(f, "odf"),
        }
    }
}

/// A 1-based message index in `{1, ..., M}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message(usize);

impl Message {
    /// Wraps a 1-based message value, validating it against the set size.
    pub fn new(value: usize, m: usize) -> Result<Self> {
        if value == 0 || value > m {
            return Err(Error::IndexRange(format!(
                "message {value} not in 1..={m}"
            )));
        }
        Ok(Self(value))
    }

    /// The 1-based value.
    pub fn get(self) -> usize {
        self.0
    }

    /// Hamming distance between the bit labels of two messages.
    pub fn bit_distance(self, other: Message) -> u32 {
        ((self.0 - 1) ^ (other.0 - 1)).count_ones()
    }
}

/// A bijective map from messages to constellation point indices (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    assign: Vec<usize>,
}

impl Labeling {
    /// Builds a labelling from `assign[j-1]` = point index used by message `j`.
    pub fn new(assign: Vec<usize>) -> Result<Self> {
        let m = assign.len();
        if m == 0 {
            return Err(Error::Labeling("empty assignment".into()));
        }
        let mut seen = vec![false; m];
        for (j, &p) in assign.iter().enumerate() {
            if p == 0 || p > m {
                return Err(Error::Labeling(format!(
                    "message {} maps to point {p}, outside 1..={m}",
                    j + 1
                )));
            }
            if seen[p - 1] {
                return Err(Error::Labeling(format!(
                    "point {p} assigned to more than one message"
                )));
            }
            seen[p - 1] = true;
        }
        Ok(Self { assign })
    }

    /// The identity map on `{1, ..., m}`.
    pub fn identity(m: usize) -> Self {
        Self {
            assign: (1..=m).collect(),
        }
    }

    /// Number of messages.
    pub fn size(&self) -> usize {
        self.assign.len()
    }

    /// Point index used by message `j`.
    pub fn point_for(&self, j: Message) -> usize {
        self.assign[j.get() - 1]
    }

    /// The underlying assignment, `assign[j-1]` = point index of message `j`.
    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    /// The complex symbol this labelling sends for message `j`.
    pub fn symbol(&self, set: &SignalSet, j: Message) -> Complex64 {
        set.points()[self.point_for(j) - 1]
    }
}

/// The labelling maps a scheme uses at the source and the relay.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelingProfile {
    scheme: Scheme,
    x_s1: Labeling,
    x_r: Labeling,
    x_s2: Option<Labeling>,
}

impl LabelingProfile {
    /// Assembles a profile, enforcing scheme shape and consistent sizes.
    pub fn new(
        scheme: Scheme,
        x_s1: Labeling,
        x_r: Labeling,
        x_s2: Option<Labeling>,
    ) -> Result<Self> {
        let m = x_s1.size();
        if x_r.size() != m || x_s2.as_ref().is_some_and(|l| l.size() != m) {
            return Err(Error::Labeling(
                "all maps in a profile must cover the same message set".into(),
            ));
        }
        match (scheme, &x_s2) {
            (Scheme::Nodf, None) => {
                return Err(Error::Labeling("NODF profile requires an X_s2 map".into()))
            }
            (Scheme::Odf, Some(_)) => {
                return Err(Error::Labeling("ODF profile must not carry an X_s2 map".into()))
            }
            _ => {}
        }
        Ok(Self {
            scheme,
            x_s1,
            x_r,
            x_s2,
        })
    }

    /// The baseline profile in which every map is the identity.
    pub fn identity(scheme: Scheme, m: usize) -> Self {
        let x_s2 = matches!(scheme, Scheme::Nodf).then(|| Labeling::identity(m));
        Self {
            scheme,
            x_s1: Labeling::identity(m),
            x_r: Labeling::identity(m),
            x_s2,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of messages covered by the profile.
    pub fn size(&self) -> usize {
        self.x_s1.size()
    }

    /// Source map for phase 1 (the ODF source map `X_s` lives here too).
    pub fn x_s1(&self) -> &Labeling {
        &self.x_s1
    }

    /// Relay map for phase 2.
    pub fn x_r(&self) -> &Labeling {
        &self.x_r
    }

    /// Source map for phase 2; present exactly for NODF profiles.
    pub fn x_s2(&self) -> Option<&Labeling> {
        self.x_s2.as_ref()
    }

    /// Phase-2 source symbol for message `j`: the mapped point for NODF,
    /// zero for ODF (the orthogonal scheme keeps the source silent).
    pub fn phase2_source_symbol(&self, set: &SignalSet, j: Message) -> Complex64 {
        match &self.x_s2 {
            Some(map) => map.symbol(set, j),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Renders the profile as a delimiter-separated table with columns
    /// `bits  message  x_s1  x_r  [x_s2]`, point entries in `s<k>` form.
    pub fn export_table(&self, set: &SignalSet) -> Result<String> {
        if set.size() != self.size() {
            return Err(Error::Labeling(
                "signal set size does not match profile size".into(),
            ));
        }
        let mut out = String::from("bits\tmessage\tx_s1\tx_r");
        if self.x_s2.is_some() {
            out.push_str("\tx_s2");
        }
        out.push('\n');
        for j in 1..=self.size() {
            let msg = Message::new(j, self.size())?;
            write!(
                out,
                "{}\t{}\ts{}\ts{}",
                set.bit_label(j)?,
                j,
                self.x_s1.point_for(msg),
                self.x_r.point_for(msg)
            )
            .expect("string write");
            if let Some(x_s2) = &self.x_s2 {
                write!(out, "\ts{}", x_s2.point_for(msg)).expect("string write");
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses the format written by [`export_table`](Self::export_table).
    /// Rows are keyed by the message integer; each message must appear
    /// exactly once and every map must be a bijection.
    pub fn import_table(scheme: Scheme, text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, usize, usize, Option<usize>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("bits") || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let expect = match scheme {
                Scheme::Nodf => 5,
                Scheme::Odf => 4,
            };
            if fields.len() != expect {
                return Err(Error::Parse(format!(
                    "line {}: expected {expect} fields for {scheme} rows, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let msg: usize = fields[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad message: {e}", lineno + 1)))?;
            let s1 = parse_point(fields[2], lineno)?;
            let r = parse_point(fields[3], lineno)?;
            let s2 = match scheme {
                Scheme::Nodf => Some(parse_point(fields[4], lineno)?),
                Scheme::Odf => None,
            };
            rows.push((msg, s1, r, s2));
        }
        Self::from_rows(scheme, &rows)
    }

    /// Builds a profile from `(message, x_s1, x_r, optional x_s2)` rows.
    pub fn from_rows(scheme: Scheme, rows: &[(usize, usize, usize, Option<usize>)]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Parse("empty labelling table".into()));
        }
        let mut s1 = vec![0usize; m];
        let mut r = vec![0usize; m];
        let mut s2 = vec![0usize; m];
        let mut seen = vec![false; m];
        let mut any_s2 = false;
        for &(msg, p1, pr, ps2) in rows {
            if msg == 0 || msg > m {
                return Err(Error::Parse(format!("message {msg} out of range 1..={m}")));
            }
            if seen[msg - 1] {
                return Err(Error::Parse(format!("message {msg} listed twice")));
            }
            seen[msg - 1] = true;
            s1[msg - 1] = p1;
            r[msg - 1] = pr;
            if let Some(p2) = ps2 {
                s2[msg - 1] = p2;
                any_s2 = true;
            }
        }
        match (scheme, any_s2) {
            (Scheme::Nodf, false) => {
                return Err(Error::Parse("NODF table lacks the x_s2 column".into()))
            }
            (Scheme::Odf, true) => {
                return Err(Error::Parse("ODF table must not carry an x_s2 column".into()))
            }
            _ => {}
        }
        let x_s2 = match scheme {
            Scheme::Nodf => Some(Labeling::new(s2)?),
            Scheme::Odf => None,
        };
        Self::new(scheme, Labeling::new(s1)?, Labeling::new(r)?, x_s2)
    }
}

fn parse_point(field: &str, lineno: usize) -> Result<usize> {
    let digits = field.strip_prefix('s').unwrap_or(field);
    digits
        .parse()
        .map_err(|e| Error::Parse(format!("line {}: bad point '{field}': {e}", lineno + 1)))
}
