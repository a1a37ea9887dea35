//! Report values shared by the library and the CLI: exact probabilities,
//! pass/fail check rows, and the combined document layout.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

/// Serializes any `Display` value as a JSON string (counts travel as decimal
/// strings so no reader truncates them).
pub fn ser_display<T: fmt::Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub fn ser_opt_display<T: fmt::Display, S: Serializer>(x: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

/// An exact probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(pub Ratio<u64>);

impl Prob {
    pub fn new(num: u64, den: u64) -> Self {
        Prob(Ratio::new(num, den))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// Six-place decimal rendering, rounded half up.
    pub fn decimal(&self) -> String {
        let (n, d) = (u128::from(self.numer()), u128::from(self.denom()));
        let scaled = (n * 1_000_000 * 2 + d) / (2 * d);
        format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Prob", 2)?;
        st.serialize_field("fraction", &self.to_string())?;
        st.serialize_field("decimal", &self.decimal())?;
        st.end()
    }
}

/// One `expected` vs `observed` comparison.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl fmt::Display, observed: impl fmt::Display) -> Self {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        Self {
            name: name.into(),
            pass: expected == observed,
            expected,
            observed,
        }
    }

    /// A check whose outcome is decided by the caller rather than string equality.
    pub fn with_outcome(
        name: impl Into<String>,
        expected: impl fmt::Display,
        observed: impl fmt::Display,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: expected {}, observed {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.observed
        )
    }
}

/// A flat CSV table with a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
