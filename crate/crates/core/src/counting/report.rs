use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Branch-counting rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Count every branch whose weight clears a numerical zero.
    Naive,
    /// Equal share for every non-zero outcome of each experiment.
    EquiOutcome,
    /// Count fine-grained branches of fixed norm τ.
    EquiAmplitude,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Naive => "naive",
            Rule::EquiOutcome => "equi_outcome",
            Rule::EquiAmplitude => "equi_amplitude",
        })
    }
}

/// One coarse history in a [`CountReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub label: String,
    pub count: u64,
    /// Born weight of the coarse history (sum of member branch weights).
    pub weight: f64,
    /// `w - N τ²` for the equi-amplitude rule; absent otherwise.
    pub rounding_error: Option<f64>,
    #[serde(with = "undefined")]
    pub born_prob: Option<f64>,
    #[serde(with = "undefined")]
    pub count_prob: Option<f64>,
}

/// `N_β / N_β'` as an exact integer pair, with the matching Born ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub numerator: String,
    pub denominator: String,
    pub counts: [u64; 2],
    #[serde(with = "undefined")]
    pub count_ratio: Option<f64>,
    #[serde(with = "undefined")]
    pub born_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub rule: Rule,
    pub tau: Option<f64>,
    pub tau_sq: Option<f64>,
    pub threshold: Option<f64>,
    pub total_count: u64,
    pub total_weight: f64,
    pub rows: Vec<CountRow>,
    pub ratios: Vec<RatioEntry>,
    /// `max_β |N_β/N_tot - w_β/Σw|`.
    #[serde(with = "undefined")]
    pub max_prob_gap: Option<f64>,
}

pub const CSV_HEADER: &str = "rule,label,N,w,rounding_error,born_prob,count_prob";

impl CountReport {
    pub(crate) fn assemble(
        rule: Rule,
        tau_sq: Option<f64>,
        threshold: Option<f64>,
        rows: Vec<(String, u64, f64, Option<f64>)>,
    ) -> Self {
        let total_count: u64 = rows.iter().map(|r| r.1).sum();
        let total_weight = weight_sum(rows.iter().map(|r| r.2));
        let rows: Vec<CountRow> = rows
            .into_iter()
            .map(|(label, count, weight, rounding_error)| CountRow {
                label,
                count,
                weight,
                rounding_error,
                born_prob: ratio(weight, total_weight),
                count_prob: ratio(count as f64, total_count as f64),
            })
            .collect();
        let mut ratios = Vec::new();
        for a in &rows {
            for b in &rows {
                if a.label == b.label {
                    continue;
                }
                ratios.push(RatioEntry {
                    numerator: a.label.clone(),
                    denominator: b.label.clone(),
                    counts: [a.count, b.count],
                    count_ratio: ratio(a.count as f64, b.count as f64),
                    born_ratio: ratio(a.weight, b.weight),
                });
            }
        }
        let max_prob_gap = rows
            .iter()
            .map(|r| match (r.count_prob, r.born_prob) {
                (Some(p), Some(q)) => Some((p - q).abs()),
                _ => None,
            })
            .try_fold(0.0f64, |acc, g| g.map(|g| acc.max(g)));
        Self {
            rule,
            tau: tau_sq.map(f64::sqrt),
            tau_sq,
            threshold,
            total_count,
            total_weight,
            rows,
            ratios,
            max_prob_gap,
        }
    }

    pub fn row(&self, label: &str) -> Option<&CountRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn count(&self, label: &str) -> Option<u64> {
        self.row(label).map(|r| r.count)
    }

    pub fn ratio(&self, numerator: &str, denominator: &str) -> Option<&RatioEntry> {
        self.ratios.iter().find(|r| r.numerator == numerator && r.denominator == denominator)
    }

    /// One CSV line per coarse label, without the header.
    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    self.rule,
                    csv_field(&r.label),
                    r.count,
                    fmt_num(r.weight),
                    r.rounding_error.map(fmt_num).unwrap_or_default(),
                    fmt_opt(r.born_prob),
                    fmt_opt(r.count_prob),
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for line in self.csv_rows() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Sum starting from `+0.0`, so an empty group weighs `0` rather than `-0`.
pub(crate) fn weight_sum(ws: impl IntoIterator<Item = f64>) -> f64 {
    ws.into_iter().fold(0.0, |acc, w| acc + w)
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e16)`.
pub(crate) fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub(crate) fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "undefined".into())
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `Option<f64>` as a number, or the string `"undefined"` for a division by zero.
pub(crate) mod undefined {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Marker(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("undefined"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(x) => Ok(Some(x)),
            Repr::Marker(m) if m == "undefined" => Ok(None),
            Repr::Marker(m) => Err(serde::de::Error::custom(format!("unexpected `{m}`"))),
        }
    }
}
