//! Transient performance measures of a regulation trace.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LfcError, Result};

pub const TRACE_HEADER: [&str; 5] = ["t", "f_err_hz", "p_gen_kw", "p_load_kw", "p_slc_kw"];

/// Sampled closed-loop response. `f_err` is the measured frequency deviation
/// (Hz), negative when the frequency sags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    pub t: Vec<f64>,
    pub f_err: Vec<f64>,
    pub p_gen: Vec<f64>,
    pub p_load: Vec<f64>,
    pub p_slc: Vec<f64>,
}

impl SimTrace {
    pub fn with_capacity(n: usize) -> Self {
        SimTrace {
            t: Vec::with_capacity(n),
            f_err: Vec::with_capacity(n),
            p_gen: Vec::with_capacity(n),
            p_load: Vec::with_capacity(n),
            p_slc: Vec::with_capacity(n),
        }
    }

    /// Trace with only a frequency channel; power channels are zero.
    pub fn from_error(t: Vec<f64>, f_err: Vec<f64>) -> Self {
        let n = t.len();
        SimTrace {
            t,
            f_err,
            p_gen: vec![0.0; n],
            p_load: vec![0.0; n],
            p_slc: vec![0.0; n],
        }
    }

    pub fn push(&mut self, t: f64, f_err: f64, p_gen: f64, p_load: f64, p_slc: f64) {
        self.t.push(t);
        self.f_err.push(f_err);
        self.p_gen.push(p_gen);
        self.p_load.push(p_load);
        self.p_slc.push(p_slc);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(LfcError::domain(format!("trace needs >= 2 samples, has {n}")));
        }
        if [self.f_err.len(), self.p_gen.len(), self.p_load.len(), self.p_slc.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(LfcError::domain("trace channels have unequal lengths"));
        }
        let dt = self.t[1] - self.t[0];
        if !(dt > 0.0) {
            return Err(LfcError::domain("trace time must be strictly increasing"));
        }
        for w in self.t.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - dt).abs() > 1e-6 * dt.max(1e-9) + 1e-12 {
                return Err(LfcError::domain(format!(
                    "trace time is not uniform near t = {}",
                    w[0]
                )));
            }
        }
        if self.f_err.iter().any(|v| !v.is_finite()) {
            return Err(LfcError::domain("trace contains non-finite frequency error"));
        }
        Ok(())
    }

    /// Time of the first load change, or the start of the trace.
    pub fn disturbance_time(&self) -> f64 {
        let Some(&first) = self.p_load.first() else {
            return 0.0;
        };
        self.p_load
            .iter()
            .position(|&p| p != first)
            .map(|k| self.t[k])
            .unwrap_or(self.t.first().copied().unwrap_or(0.0))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let wrap = |e: csv::Error| LfcError::domain(format!("csv write: {e}"));
        out.write_record(TRACE_HEADER).map_err(wrap)?;
        for k in 0..self.len() {
            out.write_record([
                self.t[k].to_string(),
                self.f_err[k].to_string(),
                self.p_gen[k].to_string(),
                self.p_load[k].to_string(),
                self.p_slc[k].to_string(),
            ])
            .map_err(wrap)?;
        }
        out.flush().map_err(|e| LfcError::domain(format!("csv flush: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr
            .headers()
            .map_err(|e| LfcError::config(format!("trace header: {e}")))?
            .clone();
        if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
            return Err(LfcError::config(format!(
                "trace header must be {TRACE_HEADER:?}, got {header:?}"
            )));
        }
        let mut trace = SimTrace::default();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| LfcError::config(format!("trace row {}: {e}", line + 2)))?;
            let mut vals = [0.0; 5];
            for (i, v) in vals.iter_mut().enumerate() {
                let field = rec.get(i).ok_or_else(|| {
                    LfcError::config(format!("trace row {} has too few columns", line + 2))
                })?;
                *v = field.trim().parse().map_err(|_| {
                    LfcError::config(format!("trace row {}: bad number {field:?}", line + 2))
                })?;
            }
            trace.push(vals[0], vals[1], vals[2], vals[3], vals[4]);
        }
        Ok(trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integration {
    #[default]
    Rectangle,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportOptions {
    /// Half-width of the settling band (Hz).
    pub settle_band_hz: f64,
    /// Fraction of the trace, at its end, averaged for steady-state error.
    pub tail_fraction: f64,
    pub integration: Integration,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            settle_band_hz: 0.05,
            tail_fraction: 0.1,
            integration: Integration::Rectangle,
        }
    }
}

impl ReportOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.settle_band_hz.is_finite() && self.settle_band_hz > 0.0) {
            return Err(LfcError::domain(format!(
                "settle band must be > 0, got {}",
                self.settle_band_hz
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(LfcError::domain(format!(
                "tail fraction must be in (0, 0.5], got {}",
                self.tail_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    /// Peak positive frequency deviation (Hz).
    pub overshoot: f64,
    /// Magnitude of the peak negative frequency deviation (Hz).
    pub undershoot: f64,
    /// Time from the disturbance until the deviation last leaves the band (s).
    pub settling_time: f64,
    /// False when the deviation is still outside the band at the last sample.
    pub settled: bool,
    /// Mean absolute deviation over the trace tail (Hz).
    pub sse: f64,
    pub iae: f64,
    pub ise: f64,
    pub itae: f64,
}

pub fn compute_report(trace: &SimTrace, settle_band: f64, tail_fraction: f64) -> Result<MetricReport> {
    compute_report_with(
        trace,
        &ReportOptions {
            settle_band_hz: settle_band,
            tail_fraction,
            ..ReportOptions::default()
        },
    )
}

pub fn compute_report_with(trace: &SimTrace, opts: &ReportOptions) -> Result<MetricReport> {
    trace.validate()?;
    opts.validate()?;
    let e = &trace.f_err;
    let t = &trace.t;
    let n = e.len();
    let t_d = trace.disturbance_time();

    let overshoot = e.iter().copied().fold(0.0, f64::max);
    let undershoot = -e.iter().copied().fold(0.0, f64::min);

    let (settling_time, settled) = match e.iter().rposition(|v| v.abs() > opts.settle_band_hz) {
        None => (0.0, true),
        Some(k) if k + 1 == n => (t[n - 1] - t_d, false),
        Some(k) => ((t[k + 1] - t_d).max(0.0), true),
    };

    let tail = ((n as f64 * opts.tail_fraction).ceil() as usize).clamp(1, n);
    let sse = e[n - tail..].iter().map(|v| v.abs()).sum::<f64>() / tail as f64;

    let (mut iae, mut ise, mut itae) = (0.0, 0.0, 0.0);
    for k in 0..n - 1 {
        let h = t[k + 1] - t[k];
        let w0 = (t[k] - t_d).max(0.0);
        let (a, s, ta) = match opts.integration {
            Integration::Rectangle => (e[k].abs(), e[k] * e[k], w0 * e[k].abs()),
            Integration::Trapezoid => {
                let w1 = (t[k + 1] - t_d).max(0.0);
                (
                    0.5 * (e[k].abs() + e[k + 1].abs()),
                    0.5 * (e[k] * e[k] + e[k + 1] * e[k + 1]),
                    0.5 * (w0 * e[k].abs() + w1 * e[k + 1].abs()),
                )
            }
        };
        iae += a * h;
        ise += s * h;
        itae += ta * h;
    }

    Ok(MetricReport {
        overshoot,
        undershoot,
        settling_time,
        settled,
        sse,
        iae,
        ise,
        itae,
    })
}

/// Metric names in table order.
pub const METRIC_NAMES: [&str; 7] = [
    "overshoot",
    "undershoot",
    "settling_time",
    "sse",
    "iae",
    "ise",
    "itae",
];

impl MetricReport {
    pub fn values(&self) -> [f64; 7] {
        [
            self.overshoot,
            self.undershoot,
            self.settling_time,
            self.sse,
            self.iae,
            self.ise,
            self.itae,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub metric: &'static str,
    pub values: Vec<f64>,
    /// Competition ranks, 1 = smallest value; ties share a rank.
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub names: Vec<String>,
    pub rows: Vec<MetricRow>,
    /// Index of the controller strictly best on IAE, ISE and ITAE, if any.
    pub dominant: Option<usize>,
}

pub fn compare_reports(reports: &[(String, MetricReport)]) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(LfcError::domain("comparison needs at least two reports"));
    }
    let names = reports.iter().map(|(n, _)| n.clone()).collect();
    let rows: Vec<MetricRow> = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(m, &metric)| {
            let values: Vec<f64> = reports.iter().map(|(_, r)| r.values()[m]).collect();
            let ranks = values
                .iter()
                .map(|v| 1 + values.iter().filter(|&&o| o < *v).count())
                .collect();
            MetricRow {
                metric,
                values,
                ranks,
            }
        })
        .collect();

    let integral_rows = [4, 5, 6];
    let dominant = (0..reports.len()).find(|&i| {
        integral_rows.iter().all(|&m| {
            let row = &rows[m];
            row.ranks[i] == 1 && row.ranks.iter().filter(|&&r| r == 1).count() == 1
        })
    });

    Ok(Comparison {
        names,
        rows,
        dominant,
    })
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric");
        for n in &self.names {
            let _ = write!(s, ",{n},{n}_rank");
        }
        s.push('\n');
        for row in &self.rows {
            s.push_str(row.metric);
            for (v, r) in row.values.iter().zip(&row.ranks) {
                let _ = write!(s, ",{v},{r}");
            }
            s.push('\n');
        }
        s
    }

    /// Aligned plain-text table with ranks in parentheses.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                row.values
                    .iter()
                    .zip(&row.ranks)
                    .map(|(v, r)| format!("{v:.4} ({r})"))
                    .collect()
            })
            .collect();
        let first = METRIC_NAMES.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
        let widths: Vec<usize> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| cells.iter().map(|r| r[i].len()).max().unwrap_or(0).max(n.len()))
            .collect();
        let mut s = format!("{:<first$}", "metric");
        for (n, w) in self.names.iter().zip(&widths) {
            let _ = write!(s, "  {n:>w$}");
        }
        s.push('\n');
        for (row, c) in self.rows.iter().zip(&cells) {
            let _ = write!(s, "{:<first$}", row.metric);
            for (v, w) in c.iter().zip(&widths) {
                let _ = write!(s, "  {v:>w$}");
            }
            s.push('\n');
        }
        if let Some(d) = self.dominant {
            let _ = writeln!(s, "dominant on IAE/ISE/ITAE: {}", self.names[d]);
        }
        s
    }
}
