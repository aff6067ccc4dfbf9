//! CSV writers for trajectories, jump logs, sweeps, heatmaps and validation
//! tables.
//!
//! Every file starts with `#` comment lines holding the command, its
//! settings and the full resolved configuration, so that re-running with
//! those values reproduces the file byte for byte.

use std::io::{self, Write};

use keenjump_core::config::serialize;
use keenjump_core::montecarlo::{McResult, PointError};
use keenjump_core::{ModelParams, SimConfig, Trajectory};

/// Decimal notation rounded to 12 significant digits, trailing zeros
/// dropped. Non-finite values print as `nan`, `inf` and `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let before_point = exp + 1;
    let mut out = String::with_capacity(digits.len() + 8);
    if x < 0.0 {
        out.push('-');
    }
    if before_point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-before_point) as usize));
        out.push_str(digits);
    } else if before_point as usize >= digits.len() {
        out.push_str(digits);
        out.extend(std::iter::repeat_n('0', before_point as usize - digits.len()));
    } else {
        let (int, frac) = digits.split_at(before_point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Comment block written at the top of every output file.
#[derive(Debug, Clone, Default)]
pub struct Header {
    lines: Vec<String>,
    config: String,
}

impl Header {
    pub fn new(command: &str, p: &ModelParams, cfg: &SimConfig) -> Self {
        Header {
            lines: vec![format!("keenjump {command}")],
            config: serialize(p, cfg),
        }
    }

    pub fn note(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for l in &self.lines {
            writeln!(w, "# {l}")?;
        }
        for l in self.config.lines() {
            writeln!(w, "# {l}")?;
        }
        Ok(())
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn into_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t", "omega", "e", "m", "ell", "pi", "f", "r", "premium", "S", "S_disc", "mu",
];

pub fn write_trajectory<W: Write>(mut w: W, header: &Header, traj: &Trajectory) -> io::Result<()> {
    header.write_to(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(TRAJECTORY_COLUMNS).map_err(into_io)?;
    for s in &traj.samples {
        let row = [
            s.t,
            s.econ.omega,
            s.econ.e,
            s.econ.m,
            s.econ.ell,
            s.pi,
            s.f,
            s.r,
            s.premium,
            s.market.s,
            s.s_disc,
            s.market.mu,
        ];
        out.write_record(row.iter().map(|&x| fmt_num(x))).map_err(into_io)?;
    }
    out.flush()
}

pub fn write_jumps<W: Write>(mut w: W, header: &Header, traj: &Trajectory) -> io::Result<()> {
    header.write_to(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(["t", "kind", "factor"]).map_err(into_io)?;
    for j in &traj.jumps {
        out.write_record([fmt_num(j.t), j.kind.as_str().to_string(), fmt_num(j.factor)])
            .map_err(into_io)?;
    }
    out.flush()
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "param",
    "value",
    "n_runs",
    "n_crisis",
    "p_hat",
    "ci_low",
    "ci_high",
    "n_blowup",
    "mean_crisis_time",
];

/// Writes one row per value. Points that could not be evaluated get
/// `n_runs = 0`, `nan` estimates, and a comment line naming the problem.
pub fn write_sweep<W: Write>(
    mut w: W,
    header: &Header,
    name: &str,
    values: &[f64],
    results: &[Result<McResult, PointError>],
) -> io::Result<()> {
    let mut header = header.clone();
    for (v, r) in values.iter().zip(results) {
        if let Err(e) = r {
            header.push("error", format!("{name} = {}: {e}", fmt_num(*v)));
        }
    }
    header.write_to(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(SWEEP_COLUMNS).map_err(into_io)?;
    for (v, r) in values.iter().zip(results) {
        let row = match r {
            Ok(m) => [
                name.to_string(),
                fmt_num(*v),
                m.n_runs.to_string(),
                m.n_crisis.to_string(),
                fmt_num(m.p_hat),
                fmt_num(m.ci_low),
                fmt_num(m.ci_high),
                m.n_blowup.to_string(),
                fmt_num(m.mean_crisis_time),
            ],
            Err(_) => [
                name.to_string(),
                fmt_num(*v),
                "0".into(),
                "0".into(),
                "nan".into(),
                "nan".into(),
                "nan".into(),
                "0".into(),
                "nan".into(),
            ],
        };
        out.write_record(row).map_err(into_io)?;
    }
    out.flush()
}

pub const HEATMAP_COLUMNS: [&str; 6] = ["p1", "p1_value", "p2", "p2_value", "n_runs", "p_hat"];

/// Row-major grid: the first axis is the outer loop.
pub fn write_heatmap<W: Write>(
    mut w: W,
    header: &Header,
    axes: (&str, &[f64]),
    axes2: (&str, &[f64]),
    results: &[Result<McResult, PointError>],
) -> io::Result<()> {
    let (n1, v1) = axes;
    let (n2, v2) = axes2;
    let mut header = header.clone();
    let cells = v1.iter().flat_map(|a| v2.iter().map(move |b| (*a, *b)));
    for ((a, b), r) in cells.clone().zip(results) {
        if let Err(e) = r {
            header.push("error", format!("{n1} = {}, {n2} = {}: {e}", fmt_num(a), fmt_num(b)));
        }
    }
    header.write_to(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(HEATMAP_COLUMNS).map_err(into_io)?;
    for ((a, b), r) in cells.zip(results) {
        let (n, p) = match r {
            Ok(m) => (m.n_runs, m.p_hat),
            Err(_) => (0, f64::NAN),
        };
        out.write_record([
            n1.to_string(),
            fmt_num(a),
            n2.to_string(),
            fmt_num(b),
            n.to_string(),
            fmt_num(p),
        ])
        .map_err(into_io)?;
    }
    out.flush()
}
