//! Experiment harness: covolume constants, T-sweeps, error-exponent
//! regression, config parsing and CSV emission.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geom::{MultiPoint, Point};
use crate::orbit::{count_box, count_hypercube, count_strip, BoxSpec, CountResult, StripSpec};
use crate::reduction::height_components;
use crate::selberg::{main_term_box, main_term_hypercube, main_term_strip};

/// Supported groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// PSL_2(Z) acting on H.
    Modular,
    /// PSL_2(O_F) for F = Q(sqrt m), acting on H^2.
    Hilbert { m: i64 },
}

impl GroupKind {
    pub fn field_spec(self) -> Result<FieldSpec> {
        match self {
            GroupKind::Modular => Ok(FieldSpec::rationals()),
            GroupKind::Hilbert { m } => FieldSpec::real_quadratic(m),
        }
    }
}

/// Covolume of Gamma \ H^d in the product invariant measure.
///
/// PSL_2(Z): pi/3, the area of {|x| <= 1/2, |z| >= 1} in dx dy / y^2
/// (validated by direct numeric integration in the test suite).
/// m = 5: 4 pi^2 / 15 = 2 (2 pi)^2 zeta_F(-1) with zeta_F(-1) = 1/30
/// (validated through the functional equation from zeta(2) L(2, chi_5)).
pub fn covolume(group: GroupKind) -> Result<f64> {
    match group {
        GroupKind::Modular => Ok(PI / 3.0),
        GroupKind::Hilbert { m: 5 } => Ok(4.0 * PI * PI / 15.0),
        GroupKind::Hilbert { m } => Err(Error::UnsupportedField(m)),
    }
}

/// What a run shall count.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    /// N(z;T) over the T grid.
    Hypercube,
    /// cnt(U,V;z) with V_j = grid value and U per `BoxUMode`.
    Box { u_mode: BoxUMode },
    /// N_E(z;T) over the T grid with fixed intervals on E.
    Strip { e: Vec<usize>, a: Vec<f64>, b: Vec<f64> },
}

/// How the lower box bound follows the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxUMode {
    Zero,
    HalfV,
}

/// One experiment: group, base point, kind and a T (or V) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub group: GroupKind,
    pub z: Vec<(f64, f64)>,
    pub kind: ExperimentKind,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    /// q-hat annotation parameter, defaults to #Q.
    pub qhat: Option<f64>,
    /// Spectral-gap annotation parameter (never computed).
    pub tauhat: f64,
    pub out_path: Option<String>,
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut t = self.grid_min;
        while t <= self.grid_max + 1e-12 {
            v.push(t);
            t += self.grid_step;
        }
        v
    }

    pub fn multipoint(&self) -> MultiPoint {
        MultiPoint::new(self.z.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let d = match self.group {
            GroupKind::Modular => 1,
            GroupKind::Hilbert { .. } => 2,
        };
        if self.z.len() != d {
            return Err(Error::Parse { line: 0, msg: format!("z has {} coordinates, group needs {d}", self.z.len()) });
        }
        if self.grid().is_empty() {
            return Err(Error::EmptyGrid);
        }
        if let ExperimentKind::Strip { e, .. } = &self.kind {
            let q = d - e.len();
            if let Some(qhat) = self.qhat {
                if qhat < q as f64 {
                    return Err(Error::Parse { line: 0, msg: "qhat must be >= #Q".into() });
                }
            }
        }
        Ok(())
    }
}

/// One row of an experiment run.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub t: f64,
    pub count: u64,
    pub main_term: f64,
    pub ratio: f64,
    pub excess: f64,
    pub n_of_z: f64,
    pub near_boundary: u64,
    pub wall_s: f64,
}

fn report_from(t: f64, r: &CountResult, main: f64, n_of_z: f64) -> CountReport {
    CountReport {
        t,
        count: r.count,
        main_term: main,
        ratio: r.count as f64 / main,
        excess: r.count as f64 - main,
        n_of_z,
        near_boundary: r.near_boundary,
        wall_s: r.wall_s,
    }
}

/// Run the configured counting sweep. Deterministic (apart from wall times)
/// across thread counts: all reductions are integer sums.
pub fn run_count_experiment(cfg: &ExperimentConfig) -> Result<Vec<CountReport>> {
    cfg.validate()?;
    let spec = cfg.group.field_spec()?;
    let vol = covolume(cfg.group)?;
    let z = cfg.multipoint();
    let d = spec.degree();
    let n_of_z = height_components(&z, &spec)?.n_of_z;
    let run = || -> Result<Vec<CountReport>> {
        let mut out = Vec::new();
        for t in cfg.grid() {
            let row = match &cfg.kind {
                ExperimentKind::Hypercube => {
                    let r = count_hypercube(&z, t, &spec)?;
                    let main = main_term_hypercube(t, vol, d);
                    report_from(t, &r, main, n_of_z)
                }
                ExperimentKind::Box { u_mode } => {
                    let v = t;
                    let u = match u_mode {
                        BoxUMode::Zero => 0.0,
                        BoxUMode::HalfV => v / 2.0,
                    };
                    let b = BoxSpec::new(vec![u; d], vec![v; d]);
                    let r = count_box(&z, &b, &spec)?;
                    let main = main_term_box(&b, vol, d);
                    report_from(t, &r, main, n_of_z)
                }
                ExperimentKind::Strip { e, a, b } => {
                    let strip = StripSpec { e: e.clone(), a: a.clone(), b: b.clone(), t };
                    let r = count_strip(&z, &strip, &spec)?;
                    let main = main_term_strip(&strip, vol, d);
                    report_from(t, &r, main, n_of_z)
                }
            };
            out.push(row);
        }
        Ok(out)
    };
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Parse { line: 0, msg: format!("thread pool: {e}") })?;
        pool.install(run)
    } else {
        run()
    }
}

/// Least-squares fit of log|excess| against T.
#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub sign_changes: bool,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fit the empirical error exponent: regression of log|excess| on T over the
/// rows with nonzero excess.
pub fn fit_error_exponent(reports: &[CountReport]) -> Result<ExponentFit> {
    let rows: Vec<&CountReport> = reports.iter().filter(|r| r.excess != 0.0).collect();
    if rows.is_empty() {
        return Err(Error::DegenerateFit);
    }
    assert!(rows.len() >= 4, "need >= 4 rows with nonzero excess");
    let xs: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.excess.abs().ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let sign_changes = rows.windows(2).any(|w| w[0].excess.signum() != w[1].excess.signum());
    Ok(ExponentFit { slope, intercept, r2, sign_changes })
}

// ---------------------------------------------------------------------------
// CSV and config formats
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "T,count,main_term,ratio,excess,n_of_z,near_boundary,wall_s";

pub fn csv_string(reports: &[CountReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.3}",
            r.t, r.count, r.main_term, r.ratio, r.excess, r.n_of_z, r.near_boundary, r.wall_s
        );
    }
    s
}

pub fn write_csv(reports: &[CountReport], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(reports))?;
    Ok(())
}

/// Parse the plain-text key=value config format. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut group_kind: Option<String> = None;
    let mut group_m: Option<i64> = None;
    let mut zs: Vec<(Option<f64>, Option<f64>)> = Vec::new();
    let mut kind_name: Option<String> = None;
    let mut box_umode: Option<String> = None;
    let mut grid = (None::<f64>, None::<f64>, None::<f64>);
    let mut strip_e: Option<Vec<usize>> = None;
    let mut strip_a: Option<Vec<f64>> = None;
    let mut strip_b: Option<Vec<f64>> = None;
    let mut qhat = None;
    let mut tauhat = 0.0;
    let mut out_path = None;
    let mut threads = 0usize;

    let perr = |line: usize, msg: String| Error::Parse { line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(line_no, format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let fp = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| perr(line_no, format!("bad number {v:?} for {key}")))
        };
        let list_f = |v: &str| -> Result<Vec<f64>> {
            v.split(',').map(|x| fp(x.trim())).collect()
        };
        match key {
            "group.kind" => group_kind = Some(value.to_string()),
            "group.m" => {
                group_m = Some(value.parse().map_err(|_| perr(line_no, format!("bad integer {value:?}")))?)
            }
            "experiment.kind" => kind_name = Some(value.to_string()),
            "box.umode" => box_umode = Some(value.to_string()),
            "grid.min" => grid.0 = Some(fp(value)?),
            "grid.max" => grid.1 = Some(fp(value)?),
            "grid.step" => grid.2 = Some(fp(value)?),
            "strip.E" => {
                strip_e = Some(
                    value
                        .split(',')
                        .map(|x| x.trim().parse::<usize>().map_err(|_| perr(line_no, format!("bad index {x:?}"))))
                        .collect::<Result<Vec<usize>>>()?,
                )
            }
            "strip.A" => strip_a = Some(list_f(value)?),
            "strip.B" => strip_b = Some(list_f(value)?),
            "qhat" => qhat = Some(fp(value)?),
            "tauhat" => tauhat = fp(value)?,
            "out.path" => out_path = Some(value.to_string()),
            "threads" => {
                threads = value.parse().map_err(|_| perr(line_no, format!("bad integer {value:?}")))?
            }
            _ if key.starts_with("z.") => {
                let rest = &key[2..];
                let (i, coord) = rest
                    .split_once('.')
                    .ok_or_else(|| perr(line_no, format!("unknown key {key:?}")))?;
                let i: usize = i.parse().map_err(|_| perr(line_no, format!("bad z index in {key:?}")))?;
                while zs.len() <= i {
                    zs.push((None, None));
                }
                match coord {
                    "x" => zs[i].0 = Some(fp(value)?),
                    "y" => zs[i].1 = Some(fp(value)?),
                    _ => return Err(perr(line_no, format!("unknown key {key:?}"))),
                }
            }
            _ => return Err(perr(line_no, format!("unknown key {key:?}"))),
        }
    }

    let group = match group_kind.as_deref() {
        Some("modular") => GroupKind::Modular,
        Some("hilbert") => GroupKind::Hilbert {
            m: group_m.ok_or_else(|| perr(0, "group.m required for hilbert".into()))?,
        },
        Some(other) => return Err(perr(0, format!("unknown group.kind {other:?}"))),
        None => return Err(perr(0, "missing key group.kind".into())),
    };
    let z: Vec<(f64, f64)> = zs
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| match (x, y) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(perr(0, format!("incomplete coordinate z.{i}"))),
        })
        .collect::<Result<_>>()?;
    let kind = match kind_name.as_deref() {
        Some("hypercube") | None => ExperimentKind::Hypercube,
        Some("box") => ExperimentKind::Box {
            u_mode: match box_umode.as_deref() {
                Some("half") => BoxUMode::HalfV,
                Some("zero") | None => BoxUMode::Zero,
                Some(other) => return Err(perr(0, format!("unknown box.umode {other:?}"))),
            },
        },
        Some("strip") => ExperimentKind::Strip {
            e: strip_e.ok_or_else(|| perr(0, "missing key strip.E".into()))?,
            a: strip_a.ok_or_else(|| perr(0, "missing key strip.A".into()))?,
            b: strip_b.ok_or_else(|| perr(0, "missing key strip.B".into()))?,
        },
        Some("transform-suite") => {
            return Err(perr(0, "transform-suite has no count grid; use the CLI subcommand".into()))
        }
        Some(other) => return Err(perr(0, format!("unknown experiment.kind {other:?}"))),
    };
    let (gmin, gmax, gstep) = match grid {
        (Some(a), Some(b), Some(c)) if c > 0.0 => (a, b, c),
        _ => return Err(perr(0, "grid.min, grid.max, grid.step (> 0) are required".into())),
    };
    let cfg = ExperimentConfig {
        group,
        z,
        kind,
        grid_min: gmin,
        grid_max: gmax,
        grid_step: gstep,
        qhat,
        tauhat,
        out_path,
        threads,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical serialization of a config, inverse of `parse_config`.
pub fn config_string(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    match cfg.group {
        GroupKind::Modular => s.push_str("group.kind = modular\n"),
        GroupKind::Hilbert { m } => {
            s.push_str("group.kind = hilbert\n");
            let _ = writeln!(s, "group.m = {m}");
        }
    }
    for (i, (x, y)) in cfg.z.iter().enumerate() {
        let _ = writeln!(s, "z.{i}.x = {x}");
        let _ = writeln!(s, "z.{i}.y = {y}");
    }
    match &cfg.kind {
        ExperimentKind::Hypercube => s.push_str("experiment.kind = hypercube\n"),
        ExperimentKind::Box { u_mode } => {
            s.push_str("experiment.kind = box\n");
            let _ = writeln!(
                s,
                "box.umode = {}",
                match u_mode {
                    BoxUMode::Zero => "zero",
                    BoxUMode::HalfV => "half",
                }
            );
        }
        ExperimentKind::Strip { e, a, b } => {
            s.push_str("experiment.kind = strip\n");
            let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            let _ = writeln!(s, "strip.E = {}", e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            let _ = writeln!(s, "strip.A = {}", join(a));
            let _ = writeln!(s, "strip.B = {}", join(b));
        }
    }
    let _ = writeln!(s, "grid.min = {}", cfg.grid_min);
    let _ = writeln!(s, "grid.max = {}", cfg.grid_max);
    let _ = writeln!(s, "grid.step = {}", cfg.grid_step);
    if let Some(q) = cfg.qhat {
        let _ = writeln!(s, "qhat = {q}");
    }
    if cfg.tauhat != 0.0 {
        let _ = writeln!(s, "tauhat = {}", cfg.tauhat);
    }
    if let Some(p) = &cfg.out_path {
        let _ = writeln!(s, "out.path = {p}");
    }
    if cfg.threads != 0 {
        let _ = writeln!(s, "threads = {}", cfg.threads);
    }
    s
}

// ---------------------------------------------------------------------------
// transform suite
// ---------------------------------------------------------------------------

/// One check of the transform property battery.
#[derive(Debug, Clone)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Numerical property battery for the Selberg transform machinery. Numeric
/// breakdowns (quadrature failures etc.) come back as errors; individual
/// property violations come back as failed checks.
pub fn transform_suite() -> Result<Vec<SuiteCheck>> {
    use crate::selberg::{
        eta_charfun, eta_main_term, integrate_real, selberg_transform_bump,
        BumpSide, BumpSpec,
    };
    use num_complex::Complex64;

    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        checks.push(SuiteCheck { name, passed, detail });
    };
    let half = Complex64::new(0.5, 0.0);

    // h(1/2) = 4 pi int k for a smooth bump kernel
    let bump = BumpSpec::new(0.5, 2.0, 0.5, BumpSide::Outer)?;
    let h = selberg_transform_bump(&bump, half)?.h.re;
    let (mass, _) = integrate_real(&|x| bump.eval(x), 0.0, bump.support_hi(), 1e-12)?;
    let lhs_rhs = (h - 4.0 * PI * mass).abs();
    push("h(1/2) equals 4 pi times the kernel mass", lhs_rhs < 1e-7, format!("delta = {lhs_rhs:.3e}"));

    // eta(U,V;1/2) = 4 pi (V - U)
    let eta = eta_charfun(0.0, 1.0, half)?.re;
    let delta = (eta - 4.0 * PI).abs();
    push("eta(0,1;1/2) = 4 pi", delta < 1e-7, format!("delta = {delta:.3e}"));
    let eta = eta_charfun(2.0, 5.0, half)?.re;
    let delta = (eta - 12.0 * PI).abs();
    push("eta(2,5;1/2) = 12 pi", delta < 1e-7, format!("delta = {delta:.3e}"));

    // bump sandwich at tau = 1/2
    let inner = BumpSpec::new(2.0, 5.0, 0.25, BumpSide::Inner)?;
    let outer = BumpSpec::new(2.0, 5.0, 0.25, BumpSide::Outer)?;
    let hi = selberg_transform_bump(&inner, half)?.h.re;
    let ho = selberg_transform_bump(&outer, half)?.h.re;
    let eta = eta_charfun(2.0, 5.0, half)?.re;
    push(
        "inner bump <= characteristic <= outer bump at tau = 1/2",
        hi <= eta + 1e-6 && eta <= ho + 1e-6,
        format!("{hi:.6} <= {eta:.6} <= {ho:.6}"),
    );

    // |h(i t)| <= h(0) on the tempered line
    let mut ok = true;
    let mut worst = 0.0f64;
    let h0 = selberg_transform_bump(&bump, Complex64::new(0.0, 0.0))?.h.norm();
    for k in 1..=5 {
        let t = k as f64 * 0.7;
        let ht = selberg_transform_bump(&bump, Complex64::new(0.0, t))?.h.norm();
        worst = worst.max(ht - h0);
        if ht > h0 + 1e-8 {
            ok = false;
        }
    }
    push("|h(i t)| <= h(0) for a nonnegative kernel", ok, format!("max excess = {worst:.3e}"));

    // h increasing along the real segment [0, 1/2]
    let mut ok = true;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=5 {
        let tau = k as f64 * 0.1;
        let h = selberg_transform_bump(&bump, Complex64::new(tau, 0.0))?.h.re;
        if h < prev - 1e-8 {
            ok = false;
        }
        prev = h;
    }
    push("h increasing on real tau in [0, 1/2]", ok, format!("h(1/2) = {prev:.6}"));

    // large-V asymptotic of eta at real tau
    let tau = 0.3;
    let v = 1.0e4;
    let eta = eta_charfun(0.0, v, Complex64::new(tau, 0.0))?.re;
    let main = eta_main_term(0.0, v, tau);
    let rel = ((eta - main) / main).abs();
    push(
        "eta(0,V;tau) approaches its main term as V grows",
        rel < 10.0 * v.powf(-2.0 * tau),
        format!("rel = {rel:.3e} at V = {v:.0e}"),
    );

    Ok(checks)
}

/// Predicted error exponent annotation for a strip run, from the theorem's
/// case split on tau-hat against q / (2 (d+2)).
pub fn predicted_strip_exponent(d: usize, q: usize, tauhat: f64) -> f64 {
    let e = d - q;
    let threshold = q as f64 / (2.0 * (d as f64 + 2.0));
    if tauhat <= threshold {
        (d as f64 + 1.0) / (d as f64 + 2.0) * q as f64
    } else {
        (1.0 + 2.0 * tauhat + e as f64) / (2.0 + e as f64) * q as f64
    }
}
