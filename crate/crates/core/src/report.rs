//! Residual rows, convergence orders and CSV output.
//!
//! Numbers are written with `{:.16e}` (17 significant digits), `.` as the
//! decimal separator and `\n` line ends, so identical runs give identical bytes.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Relative residual at or below which a check counts as exact (roundoff floor).
pub const EXACT_FLOOR: f64 = 1e-11;

/// Convergence order between two consecutive resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// First (coarsest) row of a study.
    None,
    /// Both residuals are at the roundoff floor.
    Exact,
    Value(f64),
}

impl Order {
    pub fn meets(&self, min: f64) -> bool {
        match *self {
            Order::None => true,
            Order::Exact => true,
            Order::Value(p) => p >= min,
        }
    }

    fn to_field(self) -> String {
        match self {
            Order::None => String::new(),
            Order::Exact => "exact".into(),
            Order::Value(p) => fmt_num(p),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "" => Ok(Order::None),
            "exact" => Ok(Order::Exact),
            _ => s
                .parse()
                .map(Order::Value)
                .map_err(|_| Error::config("observed_order", format!("not a number: '{s}'"))),
        }
    }
}

/// One residual of one check at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub h: f64,
    pub dt: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub observed_order: Order,
}

impl CheckRow {
    pub fn new(name: &str, h: f64, dt: f64, lhs: f64, rhs: f64) -> Self {
        let abs = (lhs - rhs).abs();
        CheckRow {
            name: name.to_string(),
            h,
            dt,
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: abs / lhs.abs().max(rhs.abs()).max(1.0),
            observed_order: Order::None,
        }
    }

    /// A row whose residual is known directly rather than as `lhs − rhs`.
    pub fn residual(name: &str, h: f64, dt: f64, residual: f64, scale: f64) -> Self {
        let mut r = CheckRow::new(name, h, dt, residual, 0.0);
        r.rel_residual = residual.abs() / scale.abs().max(1.0);
        r
    }

    pub fn is_exact(&self) -> bool {
        self.rel_residual <= EXACT_FLOOR
    }
}

/// Fills `observed_order` for every check name, comparing each row with the
/// previous row of the same name (rows are expected coarse to fine).
pub fn assign_orders(rows: &mut [CheckRow]) {
    let mut names: Vec<String> = Vec::new();
    for r in rows.iter() {
        if !names.contains(&r.name) {
            names.push(r.name.clone());
        }
    }
    for name in names {
        let idx: Vec<usize> = (0..rows.len()).filter(|&k| rows[k].name == name).collect();
        for w in idx.windows(2) {
            let (a, b) = (&rows[w[0]], &rows[w[1]]);
            let order = if b.is_exact() {
                Order::Exact
            } else {
                Order::Value((a.abs_residual / b.abs_residual).ln() / (a.h / b.h).ln())
            };
            rows[w[1]].observed_order = order;
        }
    }
}

/// Per-check verdict over a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSummary {
    pub name: String,
    pub resolutions: usize,
    /// Smallest observed order, `None` when every step was exact or only one row exists.
    pub min_order: Option<f64>,
    pub finest_rel_residual: f64,
    pub exact: bool,
}

impl OrderSummary {
    pub fn passes(&self, max_rel: f64, min_order: f64) -> bool {
        self.finest_rel_residual <= max_rel && self.min_order.is_none_or(|p| p >= min_order)
    }
}

pub fn summarize(rows: &[CheckRow]) -> Vec<OrderSummary> {
    let mut out: Vec<OrderSummary> = Vec::new();
    for r in rows {
        let pos = match out.iter().position(|s| s.name == r.name) {
            Some(p) => p,
            None => {
                out.push(OrderSummary {
                    name: r.name.clone(),
                    resolutions: 0,
                    min_order: None,
                    finest_rel_residual: r.rel_residual,
                    exact: true,
                });
                out.len() - 1
            }
        };
        let s = &mut out[pos];
        s.resolutions += 1;
        s.finest_rel_residual = r.rel_residual;
        s.exact &= r.is_exact();
        if let Order::Value(p) = r.observed_order {
            s.min_order = Some(s.min_order.map_or(p, |m: f64| m.min(p)));
        }
    }
    out
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CHECK_HEADER: &str = "name,h,dt,lhs,rhs,abs_residual,rel_residual,observed_order";

pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut s = String::new();
    s.push_str(CHECK_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.name,
            fmt_num(r.h),
            fmt_num(r.dt),
            fmt_num(r.lhs),
            fmt_num(r.rhs),
            fmt_num(r.abs_residual),
            fmt_num(r.rel_residual),
            r.observed_order.to_field()
        );
    }
    s
}

pub fn rows_from_csv(text: &str) -> Result<Vec<CheckRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CHECK_HEADER => {}
        _ => return Err(Error::config("report", format!("expected header '{CHECK_HEADER}'"))),
    }
    let num = |s: &str, field: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::config(field, format!("not a number: '{s}'")))
    };
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::config(
                format!("report line {}", ln + 2),
                format!("expected 8 fields, got {}", f.len()),
            ));
        }
        rows.push(CheckRow {
            name: f[0].to_string(),
            h: num(f[1], "h")?,
            dt: num(f[2], "dt")?,
            lhs: num(f[3], "lhs")?,
            rhs: num(f[4], "rhs")?,
            abs_residual: num(f[5], "abs_residual")?,
            rel_residual: num(f[6], "rel_residual")?,
            observed_order: Order::parse(f[7])?,
        });
    }
    Ok(rows)
}

/// Generic numeric table with a header row.
pub fn table_to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt_num(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Plain-text convergence table.
pub fn format_summary(summaries: &[OrderSummary]) -> String {
    let mut s = format!(
        "{:<36} {:>5} {:>14} {:>10}\n",
        "check", "runs", "finest rel", "min order"
    );
    for r in summaries {
        let order = match (r.min_order, r.exact) {
            (_, true) => "exact".to_string(),
            (Some(p), _) => format!("{p:.3}"),
            (None, _) => "-".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<36} {:>5} {:>14.3e} {:>10}",
            r.name, r.resolutions, r.finest_rel_residual, order
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_from_quadratic_decay() {
        let mut rows: Vec<CheckRow> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| CheckRow::new("q", h, 0.0, 1.0 + h * h, 1.0))
            .collect();
        assign_orders(&mut rows);
        assert_eq!(rows[0].observed_order, Order::None);
        for r in &rows[1..] {
            let Order::Value(p) = r.observed_order else { panic!() };
            assert!((p - 2.0).abs() < 1e-6);
        }
        let s = summarize(&rows);
        assert!(s[0].passes(1e-2, 1.9));
    }

    #[test]
    fn floor_rows_are_exact() {
        let mut rows = vec![
            CheckRow::new("e", 0.1, 0.0, 1.0, 1.0),
            CheckRow::new("e", 0.05, 0.0, 1.0, 1.0 + 1e-15),
        ];
        assign_orders(&mut rows);
        assert_eq!(rows[1].observed_order, Order::Exact);
        assert!(summarize(&rows)[0].exact);
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![
            CheckRow::new("a", 0.1, 0.01, 2.0, 1.5),
            CheckRow::new("a", 0.05, 0.005, 2.0, 1.875),
        ];
        assign_orders(&mut rows);
        let csv = rows_to_csv(&rows);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(rows_from_csv(&csv).unwrap(), rows);
    }
}
