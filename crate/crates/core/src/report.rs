//! Run reports: the persisted JSON schema and a plain-text table view.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::cournot::CounterexampleReport;
use crate::equilibrium::{
    CheckEntry, ConstructedNash, EquivalenceReport, FixedPoint, ProfileEquilibrium,
    SymmetricEquilibrium, TheoremReport,
};
use crate::minimax::PairMinimaxReport;

pub const VERSION: &str = concat!("zerosum-alien ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Nash,
    Maximin,
    Fixedpoint,
    Verify,
    Counterexample,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Nash,
        Command::Maximin,
        Command::Fixedpoint,
        Command::Verify,
        Command::Counterexample,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Nash => "nash",
            Command::Maximin => "maximin",
            Command::Fixedpoint => "fixedpoint",
            Command::Verify => "verify",
            Command::Counterexample => "counterexample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Fault,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Fault => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandResult {
    Nash {
        profile: Vec<f64>,
        payoffs: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        symmetric: Option<SymmetricEquilibrium>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        general: Option<ProfileEquilibrium>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        closed_form: Option<[f64; 4]>,
    },
    Maximin {
        /// Common group-1 pinning; absent when every pair is pinned at the
        /// per-player Nash profile of a non-symmetric game.
        pinning: Option<f64>,
        pairs: Vec<PairMinimaxReport>,
    },
    Fixedpoint {
        fixed_point: FixedPoint,
        constructed: ConstructedNash,
        profile: Vec<f64>,
        payoffs: Vec<f64>,
    },
    Verify {
        report: EquivalenceReport,
    },
    Counterexample {
        closed_form: CounterexampleReport,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        numeric_nash: Option<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        numeric_maximin: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        numeric_gap: Option<f64>,
        conclusion: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: Command,
    pub game: String,
    pub config: RunConfig,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<CommandResult>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Pretty JSON with every float written to 17 significant digits.
struct SigDigits(PrettyFormatter<'static>);

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Reads a float that may have been written as `null` (non-finite).
pub(crate) fn f64_or_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(text)
}

pub fn render_report(r: &RunReport, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Table => render_table(r),
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10}")
    } else {
        "-".into()
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<String>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.iter().map(|h| h.to_string()).collect()));
    let _ = writeln!(
        out,
        "{}",
        widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")
    );
    for row in rows {
        let _ = writeln!(out, "{}", line(row.clone()));
    }
}

fn player_rows(profile: &[f64], payoffs: &[f64]) -> Vec<Vec<String>> {
    let alien = profile.len() - 1;
    profile
        .iter()
        .zip(payoffs)
        .enumerate()
        .map(|(i, (s, u))| {
            let role = if i == alien { "alien" } else { "group 1" };
            vec![(i + 1).to_string(), role.to_string(), num(*s), num(*u)]
        })
        .collect()
}

fn checks_table(out: &mut String, title: &str, checks: &[CheckEntry]) {
    let _ = writeln!(out, "\n{title}");
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                num(c.lhs),
                num(c.rhs),
                format!("{:.3e}", c.gap),
                if c.pass { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    table(out, &["check", "lhs", "rhs", "gap", "result"], &rows);
}

fn theorem(out: &mut String, t: &TheoremReport) {
    checks_table(out, &format!("{} ({})", t.direction, if t.pass { "pass" } else { "FAIL" }), &t.checks);
    for d in &t.diagnostics {
        let _ = writeln!(out, "  note: {d}");
    }
}

fn render_table(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}  command: {}  game: {}", r.version, r.command.name(), r.game);
    let _ = writeln!(out, "verdict: {:?}", r.verdict);
    match &r.result {
        Some(CommandResult::Nash { profile, payoffs, closed_form, .. }) => {
            let _ = writeln!(out, "\nNash equilibrium");
            let mut rows = player_rows(profile, payoffs);
            if let Some(cf) = closed_form {
                for (row, v) in rows.iter_mut().zip(cf) {
                    row.push(num(*v));
                }
                table(&mut out, &["player", "role", "strategy", "payoff", "closed form"], &rows);
            } else {
                table(&mut out, &["player", "role", "strategy", "payoff"], &rows);
            }
        }
        Some(CommandResult::Maximin { pinning, pairs }) => {
            match pinning {
                Some(p) => {
                    let _ = writeln!(out, "\nmaximin/minimax against the alien, group 1 pinned at {}", num(*p));
                }
                None => {
                    let _ = writeln!(out, "\nmaximin/minimax against the alien, others pinned at the Nash profile");
                }
            }
            let rows: Vec<Vec<String>> = pairs
                .iter()
                .map(|p| {
                    vec![
                        (p.player + 1).to_string(),
                        num(p.maximin_arg),
                        num(p.maximin_value),
                        num(p.minimax_arg),
                        num(p.minimax_value),
                        format!("{:.3e}", p.gap),
                        format!("{:?}", p.status).to_lowercase(),
                    ]
                })
                .collect();
            table(
                &mut out,
                &["player", "maximin arg", "maximin value", "minimax arg", "minimax value", "gap", "status"],
                &rows,
            );
        }
        Some(CommandResult::Fixedpoint { fixed_point, constructed, profile, payoffs }) => {
            let _ = writeln!(
                out,
                "\nfixed point {} (|map(s) - s| = {:.3e}, {:?}, {} map evaluations)",
                num(fixed_point.s),
                fixed_point.residual,
                fixed_point.method,
                fixed_point.iterations
            );
            let _ = writeln!(out, "alien transfer gap {:.3e}", constructed.transfer_gap);
            table(&mut out, &["player", "role", "strategy", "payoff"], &player_rows(profile, payoffs));
        }
        Some(CommandResult::Verify { report }) => {
            checks_table(&mut out, "game structure", &report.structure);
            theorem(&mut out, &report.theorem1);
            theorem(&mut out, &report.theorem2);
            let _ = writeln!(out, "\nequivalence: {}", if report.pass { "holds" } else { "fails" });
        }
        Some(CommandResult::Counterexample { closed_form, numeric_nash, numeric_maximin, numeric_gap, conclusion }) => {
            let _ = writeln!(out);
            let mut rows = vec![
                vec!["Nash x_A (closed form)".to_string(), num(closed_form.nash_group1)],
                vec!["maximin x_A vs D (closed form)".to_string(), num(closed_form.maximin)],
                vec!["gap".to_string(), num(closed_form.gap)],
                vec!["|c_D - c_A| / 8".to_string(), num(closed_form.gap_formula)],
            ];
            if let (Some(n), Some(m), Some(g)) = (numeric_nash, numeric_maximin, numeric_gap) {
                rows.push(vec!["Nash x_A (numeric)".to_string(), num(n[0])]);
                rows.push(vec!["maximin x_A (numeric)".to_string(), num(*m)]);
                rows.push(vec!["gap (numeric)".to_string(), num(*g)]);
            }
            table(&mut out, &["quantity", "value"], &rows);
            let _ = writeln!(out, "\n{conclusion}");
        }
        None => {}
    }
    if !r.failures.is_empty() {
        let _ = writeln!(out, "\nfailures");
        for f in &r.failures {
            let _ = writeln!(out, "  - {f}");
        }
    }
    if !r.warnings.is_empty() {
        let _ = writeln!(out, "\nwarnings");
        for w in &r.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}

/// JSON text with the `timing` member removed, for byte comparisons.
pub fn strip_timing(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("valid report json");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timing");
    }
    to_json(&v)
}
