//! Grid comparisons, terminal-output snapshots and CSV export.
//!
//! Grid points are evaluated on a rayon pool sized by `FISCIDS_THREADS`
//! (hardware count when unset). Results are collected in grid order, so
//! reports and tables do not depend on scheduling.

use std::fmt;
use std::io::Write;

use fiscids_core::integrate::{integrate, output_at, outputs_at};
use fiscids_core::{FiscidsSystem, IntegrationConfig};
use rayon::prelude::*;

/// One axis `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("axis `{0}`: expected lo:hi:count")]
    Syntax(String),
    #[error("axis {0}: need lo < hi and count >= 2")]
    Invalid(usize),
}

/// A tensor grid, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(axes: Vec<Axis>) -> Result<Self, GridError> {
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo < a.hi) || a.count < 2 {
                return Err(GridError::Invalid(i));
            }
        }
        Ok(GridSpec { axes })
    }

    /// Parses `lo:hi:count,lo:hi:count,...`.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let axes = text
            .split(',')
            .map(|part| {
                let f: Vec<&str> = part.trim().split(':').collect();
                match f.as_slice() {
                    [lo, hi, n] => Ok(Axis {
                        lo: lo.parse().map_err(|_| GridError::Syntax(part.to_string()))?,
                        hi: hi.parse().map_err(|_| GridError::Syntax(part.to_string()))?,
                        count: n.parse().map_err(|_| GridError::Syntax(part.to_string()))?,
                    }),
                    _ => Err(GridError::Syntax(part.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        GridSpec::new(axes)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.axes.len()];
        for _ in 0..self.len() {
            out.push(self.axes.iter().zip(&idx).map(|(a, &i)| a.value(i)).collect());
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < self.axes[d].count {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }
}

/// Deviations of a system from a reference over a set of points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub points: usize,
    pub max_abs: f64,
    /// Relative to `max(1, |reference|)`.
    pub max_rel: f64,
    pub argmax: Option<Vec<f64>>,
    pub failures: Vec<(Vec<f64>, String)>,
}

impl ErrorReport {
    pub fn successes(&self) -> usize {
        self.points - self.failures.len()
    }

    pub fn passed(&self, max_err: f64) -> bool {
        self.failures.is_empty() && self.max_abs <= max_err
    }
}

fn join(x: &[f64]) -> String {
    x.iter().map(|v| format!("{:.16e}", v)).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points: {}", self.points)?;
        writeln!(f, "failures: {}", self.failures.len())?;
        writeln!(f, "max_abs: {:.16e}", self.max_abs)?;
        writeln!(f, "max_rel: {:.16e}", self.max_rel)?;
        if let Some(p) = &self.argmax {
            writeln!(f, "argmax: {}", join(p))?;
        }
        for (p, why) in &self.failures {
            writeln!(f, "failed at {}: {}", join(p), why)?;
        }
        Ok(())
    }
}

/// Thread count from `FISCIDS_THREADS`, 0 meaning rayon's default.
pub fn thread_count() -> usize {
    std::env::var("FISCIDS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn par_map<T, F>(points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    let run = || points.par_iter().map(|p| f(p)).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build() {
        Ok(pool) => pool.install(run),
        Err(_) => points.iter().map(|p| f(p)).collect(),
    }
}

type Outcome = Result<(Vec<f64>, Vec<f64>), String>;

fn reduce(points: &[Vec<f64>], results: Vec<Outcome>) -> ErrorReport {
    let mut rep = ErrorReport {
        points: points.len(),
        ..Default::default()
    };
    for (p, r) in points.iter().zip(results) {
        match r {
            Err(why) => rep.failures.push((p.clone(), why)),
            Ok((y, want)) => {
                if y.len() != want.len() {
                    rep.failures.push((
                        p.clone(),
                        format!("output has {} entries, reference {}", y.len(), want.len()),
                    ));
                    continue;
                }
                for (a, b) in y.iter().zip(&want) {
                    let err = (a - b).abs();
                    if !err.is_finite() {
                        rep.failures.push((p.clone(), String::from("non-finite output")));
                        break;
                    }
                    if err > rep.max_abs || rep.argmax.is_none() {
                        rep.max_abs = err;
                        rep.argmax = Some(p.clone());
                    }
                    rep.max_rel = rep.max_rel.max(err / b.abs().max(1.0));
                }
            }
        }
    }
    rep
}

/// Reference evaluator for [`grid_compare`].
pub type Reference<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>, String> + Sync + 'a;

/// `y(1; ξ)` against `reference(ξ)` at every point.
pub fn grid_compare(
    sys: &FiscidsSystem,
    reference: &Reference<'_>,
    points: &[Vec<f64>],
    config: &IntegrationConfig,
) -> ErrorReport {
    let results = par_map(points, |xi| {
        let y = output_at(sys, xi, 1.0, config).map_err(|e| e.to_string())?;
        let want = reference(xi).map_err(|e| format!("reference: {}", e))?;
        Ok((y, want))
    });
    reduce(points, results)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("systems differ in shape: n = {0} vs {1}, m = {2} vs {3}")]
pub struct ShapeMismatch(pub usize, pub usize, pub usize, pub usize);

/// Terminal outputs of `a` against those of `b`.
pub fn cross_compare(
    a: &FiscidsSystem,
    b: &FiscidsSystem,
    points: &[Vec<f64>],
    config: &IntegrationConfig,
) -> Result<ErrorReport, ShapeMismatch> {
    if a.n() != b.n() || a.m() != b.m() {
        return Err(ShapeMismatch(a.n(), b.n(), a.m(), b.m()));
    }
    let reference = |xi: &[f64]| output_at(b, xi, 1.0, config).map_err(|e| e.to_string());
    Ok(grid_compare(a, &reference, points, config))
}

/// `max |z2(t) − exp(ξ2 z1(t)/ξ1)|` over the accepted steps of the
/// two-input quadratic system at `ξ`.
pub fn tt_identity_deviation(sys: &FiscidsSystem, xi: &[f64], config: &IntegrationConfig) -> Result<f64, String> {
    let traj = integrate(sys, xi, config).map_err(|e| e.to_string())?;
    Ok(traj
        .states()
        .iter()
        .map(|z| (z[1] - (xi[1] * z[0] / xi[0]).exp()).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub t: f64,
    pub xi: Vec<f64>,
    /// `Err` carries the failure reason; no values are made up.
    pub y: Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub input_names: Vec<String>,
    pub m: usize,
    /// Time-major, then grid order.
    pub rows: Vec<SnapshotRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnapshotError {
    #[error("times must be sorted and within [0, 1]")]
    Times,
}

/// Outputs at each of `times` for every point, one integration per point.
pub fn snapshot(
    sys: &FiscidsSystem,
    points: &[Vec<f64>],
    times: &[f64],
    config: &IntegrationConfig,
) -> Result<Snapshot, SnapshotError> {
    if times.iter().any(|t| !(0.0..=1.0).contains(t)) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(SnapshotError::Times);
    }
    let per_point = par_map(points, |xi| {
        outputs_at(sys, xi, times, config).map_err(|e| e.to_string())
    });
    let mut rows = Vec::with_capacity(times.len() * points.len());
    for (k, &t) in times.iter().enumerate() {
        for (xi, ys) in points.iter().zip(&per_point) {
            rows.push(SnapshotRow {
                t,
                xi: xi.clone(),
                y: ys.as_ref().map(|ys| ys[k].clone()).map_err(Clone::clone),
            });
        }
    }
    Ok(Snapshot {
        input_names: sys.input_names().to_vec(),
        m: sys.m(),
        rows,
    })
}

fn num(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Writes `t, <inputs>, y1..ym, status`.
pub fn write_csv<W: Write>(snap: &Snapshot, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::from("t")];
    header.extend(snap.input_names.iter().cloned());
    header.extend((1..=snap.m).map(|i| format!("y{}", i)));
    header.push(String::from("status"));
    w.write_record(&header)?;
    for row in &snap.rows {
        let mut rec = vec![num(row.t)];
        rec.extend(row.xi.iter().copied().map(num));
        match &row.y {
            Ok(y) => {
                rec.extend(y.iter().copied().map(num));
                rec.push(String::from("ok"));
            }
            Err(why) => {
                rec.extend(std::iter::repeat_n(String::new(), snap.m));
                rec.push(format!("failed: {}", why));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fiscids_core::catalog;

    #[test]
    fn grid_order_and_endpoints() {
        let g = GridSpec::parse("-1:1:3,0:2:2").unwrap();
        assert_eq!(g.len(), 6);
        let p = g.points();
        assert_eq!(p[0], vec![-1.0, 0.0]);
        assert_eq!(p[1], vec![-1.0, 2.0]);
        assert_eq!(p[5], vec![1.0, 2.0]);
        assert!(GridSpec::parse("1:0:3").is_err());
        assert!(GridSpec::parse("0:1:1").is_err());
        assert!(GridSpec::parse("0:1").is_err());
    }

    #[test]
    fn identical_systems_agree_exactly() {
        let s = catalog::logpoly(fiscids_core::Class::Quadratic);
        let pts = GridSpec::parse("-1:1:5").unwrap().points();
        let rep = cross_compare(&s, &s, &pts, &IntegrationConfig::default()).unwrap();
        assert_eq!(rep.max_abs, 0.0);
        assert_eq!(rep.successes(), 5);
    }

    #[test]
    fn failures_are_listed_not_skipped() {
        let s = catalog::gaussian();
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let reference = |xi: &[f64]| {
            if xi[0] > 0.5 {
                Err(String::from("outside"))
            } else {
                Ok(vec![1.0])
            }
        };
        let rep = grid_compare(&s, &reference, &pts, &IntegrationConfig::default());
        assert_eq!(rep.points, 2);
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].0, vec![1.0, 1.0]);
    }

    #[test]
    fn empty_snapshot_has_only_a_header() {
        let s = catalog::gaussian();
        let snap = snapshot(&s, &[], &[0.0, 1.0], &IntegrationConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&snap, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x1,x2,y1,status\n");
        assert!(snapshot(&s, &[], &[1.0, 0.0], &IntegrationConfig::default()).is_err());
    }
}
