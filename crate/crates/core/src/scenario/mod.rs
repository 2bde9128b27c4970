//! Scenario files: parsing, running the selected suites over a refinement
//! study and writing the reports.

mod config;
mod suites;

pub use config::{
    ActionConfig, DiffusionConfig, DtPolicy, FieldsConfig, ManufacturedConfig, Scenario, Suite, TimeConfig, Tolerance,
    VariationalConfig,
};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::quadrature::QuadratureRule;
use crate::report::{assign_orders, fmt_num, rows_to_csv, summarize, write_file, CheckRow, OrderSummary};
use rayon::prelude::*;
use std::path::Path;
use suites::{Level, LevelRows};

pub const SUMMARY_HEADER: &str = "suite,name,resolutions,finest_rel_residual,min_order,max_rel,required_order,pass";

/// Verdict on one check over all resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub summary: OrderSummary,
    pub tolerance: Tolerance,
    pub pass: bool,
}

/// All rows and verdicts of one suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    /// Coarse to fine, in check order within a resolution.
    pub rows: Vec<CheckRow>,
    pub verdicts: Vec<Verdict>,
    /// Additional per-resolution reports as `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub outcomes: Vec<SuiteOutcome>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(SuiteOutcome::passed)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (Suite, &Verdict)> {
        self.outcomes
            .iter()
            .flat_map(|o| o.verdicts.iter().map(move |v| (o.suite, v)))
    }

    /// Every report file with its contents; empty when no suite ran.
    pub fn files(&self) -> Vec<(String, String)> {
        if self.outcomes.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for o in &self.outcomes {
            out.push((format!("{}.csv", o.suite.name()), rows_to_csv(&o.rows)));
            out.extend(o.files.iter().cloned());
        }
        out.push(("summary.csv".into(), self.summary_csv()));
        out
    }

    pub fn summary_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        let mut s = String::from(SUMMARY_HEADER);
        s.push('\n');
        for (suite, v) in self.verdicts() {
            let order = if v.summary.exact {
                "exact".to_string()
            } else {
                opt(v.summary.min_order)
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                suite.name(),
                v.summary.name,
                v.summary.resolutions,
                fmt_num(v.summary.finest_rel_residual),
                order,
                opt(v.tolerance.max_rel),
                opt(v.tolerance.min_order),
                v.pass
            ));
        }
        s
    }

    /// Plain-text table of all verdicts.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<16} {:<36} {:>12} {:>10} {:>10} {:>10}  result\n",
            "suite", "check", "finest rel", "max rel", "order", "needed"
        );
        for (suite, v) in self.verdicts() {
            let order = match (v.summary.exact, v.summary.min_order) {
                (true, _) => "exact".to_string(),
                (_, Some(p)) => format!("{p:.3}"),
                _ => "-".to_string(),
            };
            let needed = v.tolerance.min_order.map_or("-".to_string(), |p| format!("{p:.2}"));
            let max_rel = v.tolerance.max_rel.map_or("-".to_string(), |r| format!("{r:.1e}"));
            s.push_str(&format!(
                "{:<16} {:<36} {:>12.3e} {:>10} {:>10} {:>10}  {}\n",
                suite.name(),
                v.summary.name,
                v.summary.finest_rel_residual,
                max_rel,
                order,
                needed,
                if v.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }

    /// Writes every report file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let mut paths = Vec::new();
        for (name, contents) in self.files() {
            let p = dir.join(name);
            write_file(&p, &contents)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

impl Scenario {
    /// Tolerance of a check: built-in default, then the suite entry, then the check entry.
    pub fn tolerance(&self, suite: Suite, check: &str) -> Tolerance {
        suites::default_tolerance(suite, check)
            .merged(self.tolerances.get(suite.name()))
            .merged(self.tolerances.get(check))
    }
}

fn run_level(sc: &Scenario, n: usize) -> Result<Vec<LevelRows>> {
    let spec = sc.surface.build()?;
    let grid = spec.domain.grid(n, n, sc.stencil_order)?;
    let geo = Geometry::build(&spec, &grid, sc.time.t, sc.derivative_mode)?;
    let rule = QuadratureRule::new(&grid, sc.quadrature)?;
    let cs = sc.constitutive.resolve("constitutive")?;
    let lv = Level {
        sc,
        n,
        spec,
        grid,
        geo,
        rule,
        cs,
    };
    sc.suites.iter().map(|&s| suites::run(s, &lv)).collect()
}

/// Runs every selected suite at every resolution on the current thread pool.
pub fn run_scenario(sc: &Scenario) -> Result<RunReport> {
    sc.validate()?;
    if sc.suites.is_empty() {
        return Ok(RunReport {
            name: sc.name.clone(),
            outcomes: Vec::new(),
        });
    }
    let levels: Vec<Vec<LevelRows>> = sc
        .resolutions
        .par_iter()
        .map(|&n| run_level(sc, n))
        .collect::<Result<_>>()?;
    let outcomes = sc
        .suites
        .iter()
        .enumerate()
        .map(|(k, &suite)| {
            let mut rows: Vec<CheckRow> = levels.iter().flat_map(|l| l[k].rows.iter().cloned()).collect();
            let files = levels.iter().flat_map(|l| l[k].files.iter().cloned()).collect();
            assign_orders(&mut rows);
            let verdicts = summarize(&rows)
                .into_iter()
                .map(|summary| {
                    let tolerance = sc.tolerance(suite, &summary.name);
                    let pass = summary.passes(
                        tolerance.max_rel.unwrap_or(f64::INFINITY),
                        tolerance.min_order.unwrap_or(f64::NEG_INFINITY),
                    );
                    Verdict {
                        summary,
                        tolerance,
                        pass,
                    }
                })
                .collect();
            SuiteOutcome {
                suite,
                rows,
                verdicts,
                files,
            }
        })
        .collect();
    Ok(RunReport {
        name: sc.name.clone(),
        outcomes,
    })
}

/// Runs on a dedicated pool of `threads` workers, or the global pool for `None`.
pub fn run_with_threads(sc: &Scenario, threads: Option<usize>) -> Result<RunReport> {
    match threads {
        None => run_scenario(sc),
        Some(0) => Err(Error::config("threads", "need at least one thread")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(|| run_scenario(sc)),
    }
}
