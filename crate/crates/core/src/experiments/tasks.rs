//! One function per experiment kind. Each fans its grid points out over the
//! pool and merges the per-point results in grid order.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Kind};
use super::emit::{Artifact, Cell, Check, Table};
use crate::bounds::{
    bound_cube_pair, bound_karnik_1d, bound_main1, bound_main2, bound_mrs, bound_stage1, cheby_count_check,
    crossing_check, fit_constant, fit_exponent, landau_widom, n_eps_window, schatten_subadditivity, BoundValue,
};
use crate::dyadic::{build_cover, verify_cover};
use crate::geometry::{Aabb, Domain, DomainSpec, DomainStats, Primitive};
use crate::operator::{
    count_above, count_above_sensitive, count_plunge, count_plunge_sensitive, default_nodes_per_dim, discretize,
    discretize_shared, plunge_norm, spectrum, trace_mass, BandKernel, Quadrature, Spectrum,
};
use crate::{Error, Result};

/// Random pairs in the Schatten subadditivity check.
const SUBADDITIVITY_TRIALS: usize = 100;
const SUBADDITIVITY_MAX_N: usize = 64;

/// Rows, checks and files produced by one grid point.
#[derive(Default)]
struct Partial {
    rows: BTreeMap<&'static str, Vec<Vec<Cell>>>,
    checks: Vec<Check>,
    warnings: Vec<String>,
    artifacts: Vec<(String, Artifact)>,
}

impl Partial {
    fn row(&mut self, table: &'static str, row: Vec<Cell>) {
        self.rows.entry(table).or_default().push(row);
    }

    fn check(&mut self, name: String, pass: bool, detail: String) {
        self.checks.push(Check { name, pass, detail });
    }
}

/// Output of a kind before it becomes a record.
#[derive(Default)]
pub(super) struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
    pub artifacts: BTreeMap<String, Artifact>,
}

impl Outcome {
    fn with_schema(schema: &[(&str, &[&str])]) -> Self {
        Self { tables: schema.iter().map(|(n, c)| Table::new(n, c)).collect(), ..Default::default() }
    }

    fn table_mut(&mut self, name: &str) -> &mut Table {
        self.tables.iter_mut().find(|t| t.name == name).unwrap_or_else(|| panic!("unknown table {name}"))
    }

    fn absorb(&mut self, label: &str, r: Result<Partial>) {
        match r {
            Ok(p) => {
                for (name, rows) in p.rows {
                    let t = self.table_mut(name);
                    for row in rows {
                        t.push(row);
                    }
                }
                self.checks.extend(p.checks);
                self.warnings.extend(p.warnings);
                self.artifacts.extend(p.artifacts);
            }
            Err(e) => self.failures.push(format!("{label}: {e}")),
        }
    }
}

const CHEBY: (&str, &[&str]) = ("cheby", &["label", "eps", "p", "m_eps", "bound", "ratio", "pass"]);
const CROSSING: (&str, &[&str]) =
    ("crossing", &["label", "trace", "plunge_trace", "n_upper", "n_lower", "lambda_upper", "lambda_lower", "pass"]);

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Int(i) => *i as f64,
        Cell::Float(x) => *x,
        _ => f64::NAN,
    }
}

/// Chebyshev and crossing checks plus warnings for one spectrum.
fn spectrum_checks(label: &str, spec: &Spectrum, eps: &[f64], ps: &[f64], out: &mut Partial) -> Result<()> {
    let mut violations = 0;
    for &e in eps {
        for &p in ps {
            let r = cheby_count_check(spec, e, p)?;
            let pass = r.pass == Some(true);
            violations += usize::from(!pass);
            out.row(
                CHEBY.0,
                vec![
                    label.into(),
                    e.into(),
                    p.into(),
                    r.empirical.into(),
                    r.bound.value.into(),
                    r.ratio.into(),
                    pass.into(),
                ],
            );
        }
        let m = count_plunge_sensitive(spec, e)?;
        let n = count_above_sensitive(spec, e)?;
        if !m.is_stable() || !n.is_stable() {
            out.warnings.push(format!(
                "{label}: counts at eps={e} move under a 1e-6 relative threshold change (M {:?}, N {:?})",
                (m.at_lower_eps, m.count, m.at_upper_eps),
                (n.at_lower_eps, n.count, n.at_upper_eps)
            ));
        }
    }
    if !ps.is_empty() {
        out.check(
            format!("cheby {label}"),
            violations == 0,
            format!("{violations} violations over {} (eps, p) pairs", eps.len() * ps.len()),
        );
    }
    let c = crossing_check(spec)?;
    out.row(
        CROSSING.0,
        vec![
            label.into(),
            c.trace.into(),
            c.plunge_trace.into(),
            c.n_upper.into(),
            c.n_lower.into(),
            c.lambda_upper.into(),
            c.lambda_lower.into(),
            c.pass.into(),
        ],
    );
    out.check(
        format!("crossing {label}"),
        c.pass,
        format!("lambda_{} = {:e}, lambda_{} = {:?}", c.n_upper, c.lambda_upper, c.n_lower, c.lambda_lower),
    );
    if spec.clip_flag {
        out.warnings.push(format!(
            "{label}: raw eigenvalues outside [0, 1] beyond tolerance ({:e}, {:e})",
            spec.raw_extremes.0, spec.raw_extremes.1
        ));
    }
    if spec.meta.as_ref().is_some_and(|m| m.capped) {
        out.warnings.push(format!("{label}: automatic resolution was capped at the node limit"));
    }
    Ok(())
}

fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

pub(super) fn run_kind(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.kind {
        Kind::Spectrum => run_spectrum(cfg),
        Kind::Cover => run_cover(cfg, true),
        Kind::VerifyCover => run_cover(cfg, false),
        Kind::ScanDilation => run_scan(cfg),
        Kind::Verify1d => run_verify_1d(cfg),
        Kind::VerifyBounds => run_verify_bounds(cfg),
        Kind::Synthesis => run_synthesis(cfg),
    }
}

fn run_spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fs = cfg.f_domains()?;
    let s = cfg.s_domain()?;
    let g = &cfg.grids;
    let mut out = Outcome::with_schema(&[
        (
            "spectrum_summary",
            &["f_index", "n", "capped", "trace", "trace_mass", "trace_residual", "clip_flag", "raw_min", "raw_max"],
        ),
        ("counts", &["f_index", "eps", "m_eps", "m_eps_lower", "m_eps_upper", "n_eps", "n_eps_lower", "n_eps_upper"]),
        ("spectrum_values", &["f_index", "index", "lambda"]),
        CHEBY,
        CROSSING,
    ]);
    let results = par_map(fs.len(), |i| -> Result<Partial> {
        let f = &fs[i];
        let op = discretize(f, &s, &cfg.resolution)?;
        let spec = spectrum(&op)?;
        let mut p = Partial::default();
        let mass = trace_mass(f, &s);
        p.row(
            "spectrum_summary",
            vec![
                i.into(),
                op.n().into(),
                op.meta.capped.into(),
                spec.trace().into(),
                mass.into(),
                ((spec.trace() - mass).abs() / mass).into(),
                spec.clip_flag.into(),
                spec.raw_extremes.0.into(),
                spec.raw_extremes.1.into(),
            ],
        );
        for &e in &g.eps {
            let m = count_plunge_sensitive(&spec, e)?;
            let n = count_above_sensitive(&spec, e)?;
            p.row(
                "counts",
                vec![
                    i.into(),
                    e.into(),
                    m.count.into(),
                    m.at_lower_eps.into(),
                    m.at_upper_eps.into(),
                    n.count.into(),
                    n.at_lower_eps.into(),
                    n.at_upper_eps.into(),
                ],
            );
        }
        for (k, v) in spec.values.iter().enumerate() {
            p.row("spectrum_values", vec![i.into(), (k + 1).into(), (*v).into()]);
        }
        spectrum_checks(&format!("f{i}"), &spec, &g.eps, &g.p, &mut p)?;
        p.artifacts.push((format!("spectrum_f{i}.json"), Artifact::Json(spec.to_json())));
        if cfg.output.dump_matrices {
            let mut bytes = (op.n() as u64).to_le_bytes().to_vec();
            bytes.extend(op.matrix.iter().flat_map(|x| x.to_le_bytes()));
            p.artifacts.push((format!("operator_f{i}.bin"), Artifact::Bytes(bytes)));
        }
        Ok(p)
    });
    for (i, r) in results.into_iter().enumerate() {
        out.absorb(&format!("f{i}"), r);
    }
    Ok(out)
}

fn run_cover(cfg: &ExperimentConfig, export: bool) -> Result<Outcome> {
    let fs = cfg.f_domains()?;
    let etas = &cfg.grids.eta;
    let mut out = Outcome::with_schema(&[
        ("cover_summary", &["f_index", "eta", "cubes", "kappa", "boundary_area", "disjoint", "maximal", "all_pass"]),
        ("cover_conditions", &["f_index", "eta", "condition", "pass", "detail"]),
        ("cover_scales", &["f_index", "eta", "level", "side", "count", "bound_rhs", "pass"]),
    ]);
    let jobs: Vec<(usize, f64)> = (0..fs.len()).flat_map(|i| etas.iter().map(move |&e| (i, e))).collect();
    let results = par_map(jobs.len(), |j| -> Result<Partial> {
        let (i, eta) = jobs[j];
        let cover = build_cover(&fs[i], eta)?;
        let report = verify_cover(&fs[i], &cover)?;
        let mut p = Partial::default();
        p.row(
            "cover_summary",
            vec![
                i.into(),
                eta.into(),
                cover.len().into(),
                report.kappa.into(),
                report.boundary_area.into(),
                report.disjoint.into(),
                report.maximal.into(),
                report.all_pass().into(),
            ],
        );
        for c in &report.conditions {
            p.row(
                "cover_conditions",
                vec![i.into(), eta.into(), (c.condition as usize).into(), c.pass.into(), c.detail.clone().into()],
            );
        }
        for s in &report.scales {
            p.row(
                "cover_scales",
                vec![
                    i.into(),
                    eta.into(),
                    s.level.into(),
                    2f64.powi(s.level).into(),
                    s.count.into(),
                    s.bound_rhs.into(),
                    s.pass.into(),
                ],
            );
        }
        let failed: Vec<String> =
            report.conditions.iter().filter(|c| !c.pass).map(|c| format!("condition {}", c.condition)).collect();
        p.check(
            format!("cover f{i} eta={eta}"),
            report.all_pass(),
            if failed.is_empty() { format!("{} cubes, all conditions hold", cover.len()) } else { failed.join(", ") },
        );
        if export {
            let mut doc = cover.to_json();
            doc["report"] = serde_json::to_value(&report)?;
            p.artifacts.push((format!("cover_f{i}_eta{eta}.json"), Artifact::Json(doc)));
        }
        Ok(p)
    });
    for (j, r) in results.into_iter().enumerate() {
        out.absorb(&format!("f{} eta={}", jobs[j].0, jobs[j].1), r);
    }
    Ok(out)
}

fn run_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fs = cfg.f_domains()?;
    let s = cfg.s_domain()?;
    let g = &cfg.grids;
    let mut out = Outcome::with_schema(&[
        (
            "scan",
            &["f_index", "r", "eps", "n", "n_eps", "n_eps_scaled", "target", "relative_deviation", "m_eps", "capped"],
        ),
        ("scan_fit", &["f_index", "eps", "quantity", "slope", "r2"]),
        CHEBY,
        CROSSING,
    ]);
    let jobs: Vec<(usize, f64)> = (0..fs.len()).flat_map(|i| g.r.iter().map(move |&r| (i, r))).collect();
    let results = par_map(jobs.len(), |j| -> Result<Partial> {
        let (i, r) = jobs[j];
        let f = &fs[i];
        let sr = s.dilate(r)?;
        let op = discretize(f, &sr, &cfg.resolution)?;
        let spec = spectrum(&op)?;
        let d = f.dim() as i32;
        let target = trace_mass(f, &s);
        let mut p = Partial::default();
        for &e in &g.eps {
            let n = count_above(&spec, e)?;
            let scaled = n as f64 / r.powi(d);
            p.row(
                "scan",
                vec![
                    i.into(),
                    r.into(),
                    e.into(),
                    op.n().into(),
                    n.into(),
                    scaled.into(),
                    target.into(),
                    ((scaled - target) / target).into(),
                    count_plunge(&spec, e)?.into(),
                    op.meta.capped.into(),
                ],
            );
        }
        spectrum_checks(&format!("f{i} r={r}"), &spec, &g.eps, &g.p, &mut p)?;
        Ok(p)
    });
    for (j, r) in results.into_iter().enumerate() {
        out.absorb(&format!("f{} r={}", jobs[j].0, jobs[j].1), r);
    }
    let scan = out.table_mut("scan").clone();
    let col = |n: &str| scan.column(n).expect("scan column");
    let (ci, cr, ce, cn, cm) = (col("f_index"), col("r"), col("eps"), col("n_eps"), col("m_eps"));
    let mut fits = Vec::new();
    for i in 0..fs.len() {
        for &e in &g.eps {
            let rows: Vec<_> = scan.rows.iter().filter(|row| num(&row[ci]) == i as f64 && num(&row[ce]) == e).collect();
            for (q, c) in [("m_eps", cm), ("n_eps", cn)] {
                let pts: Vec<(f64, f64)> =
                    rows.iter().map(|row| (num(&row[cr]), num(&row[c]))).filter(|(_, y)| *y > 0.0).collect();
                if let Ok((slope, r2)) = fit_exponent(&pts) {
                    fits.push(vec![i.into(), e.into(), q.into(), slope.into(), r2.into()]);
                }
            }
        }
    }
    for row in fits {
        out.table_mut("scan_fit").push(row);
    }
    Ok(out)
}

fn run_verify_1d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fs = cfg.f_domains()?;
    let g = &cfg.grids;
    let base = cfg.log_base;
    let mut out = Outcome::with_schema(&[
        (
            "verify_1d",
            &[
                "f_index",
                "w",
                "w_over_pi",
                "w_eff",
                "eps",
                "n",
                "m_eps",
                "n_eps",
                "karnik_bound",
                "landau_widom",
                "karnik_ratio",
                "landau_widom_ratio",
                "pass",
                "log_base",
            ],
        ),
        CHEBY,
        CROSSING,
    ]);
    let jobs: Vec<(usize, f64)> = (0..fs.len()).flat_map(|i| g.w.iter().map(move |&w| (i, w))).collect();
    let results = par_map(jobs.len(), |j| -> Result<Partial> {
        let (i, w) = jobs[j];
        let f = &fs[i];
        if f.dim() != 1 {
            return Err(Error::Unsupported("verify_1d needs one-dimensional spatial domains".into()));
        }
        let s = Domain::symmetric_interval(w)?;
        let op = discretize(f, &s, &cfg.resolution)?;
        let spec = spectrum(&op)?;
        // T_{[0,L],[-W,W]} is unitarily equivalent to T_{[0,1],[-WL,WL]}.
        let w_eff = w * f.volume();
        let mut p = Partial::default();
        let mut violations = 0;
        for &e in &g.eps {
            let m = count_plunge(&spec, e)?;
            let n = count_above(&spec, e)?;
            let karnik = bound_karnik_1d(w_eff, e, base).ok();
            let lw = landau_widom(w_eff, e, base).ok();
            let pass = karnik.map(|k| m as f64 <= k);
            violations += usize::from(pass == Some(false));
            if karnik.is_none() {
                p.warnings.push(format!("f{i} w={w}: explicit bound needs W|F| >= 2π"));
            }
            p.row(
                "verify_1d",
                vec![
                    i.into(),
                    w.into(),
                    (w / PI).into(),
                    w_eff.into(),
                    e.into(),
                    op.n().into(),
                    m.into(),
                    n.into(),
                    karnik.into(),
                    lw.into(),
                    karnik.map(|k| m as f64 / k).into(),
                    lw.map(|l| m as f64 / l).into(),
                    pass.into(),
                    base.as_str().into(),
                ],
            );
        }
        let label = format!("f{i} w={}π", w / PI);
        p.check(format!("karnik {label}"), violations == 0, format!("{violations} violations"));
        spectrum_checks(&label, &spec, &g.eps, &g.p, &mut p)?;
        Ok(p)
    });
    for (j, r) in results.into_iter().enumerate() {
        out.absorb(&format!("f{} w={}π", jobs[j].0, jobs[j].1 / PI), r);
    }
    Ok(out)
}

/// Per-point data kept for the window check after the constants are fitted.
struct BoundsPoint {
    f_index: usize,
    r: f64,
    stats_f: DomainStats,
    stats_s: DomainStats,
    sr: Domain,
    n_eps: Vec<usize>,
}

fn run_verify_bounds(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fs = cfg.f_domains()?;
    let s = cfg.s_domain()?;
    let g = &cfg.grids;
    let rs = if g.r.is_empty() { vec![1.0] } else { g.r.clone() };
    let mut out = Outcome::with_schema(&[
        (
            "bounds",
            &[
                "bound",
                "f_index",
                "r",
                "eps",
                "alpha",
                "value",
                "empirical",
                "ratio",
                "constant_mode",
                "log_base",
                "notes",
            ],
        ),
        ("constants", &["bound", "full", "half", "points", "full_over_half", "stable"]),
        ("window", &["f_index", "r", "eps", "n_eps", "trace_mass", "lo", "hi", "constant", "contains"]),
        ("subadditivity", &["trial", "n", "p", "lhs", "rhs", "slack", "pass"]),
        CHEBY,
        CROSSING,
    ]);
    let s_cube_side = match s.primitive() {
        Primitive::Cube { side, .. } => Some(side),
        Primitive::Interval { a, b } => Some(b - a),
        _ => None,
    };
    let jobs: Vec<(usize, f64)> = (0..fs.len()).flat_map(|i| rs.iter().map(move |&r| (i, r))).collect();
    let results = par_map(jobs.len(), |j| -> Result<(Partial, BoundsPoint, Vec<BoundValue>, Vec<f64>)> {
        let (i, r) = jobs[j];
        let f = &fs[i];
        let sr = s.dilate(r)?;
        let (stats_f, stats_s) = (f.stats()?, sr.stats()?);
        let spec = spectrum(&discretize(f, &sr, &cfg.resolution)?)?;
        let mass = trace_mass(f, &sr);
        let mut p = Partial::default();
        let mut values = Vec::new();
        let mut empirical = Vec::new();
        let mut n_eps = Vec::new();
        let label = format!("f{i} r={r}");
        for &e in &g.eps {
            let m = count_plunge(&spec, e)? as f64;
            let n = count_above(&spec, e)?;
            n_eps.push(n);
            let mut candidates: Vec<(Result<BoundValue>, f64)> = vec![
                (bound_main1(&stats_f, &stats_s, e), m),
                (bound_main2(&stats_f, &stats_s, e), (n as f64 - mass).abs()),
            ];
            for &a in &g.alpha {
                candidates.push((bound_mrs(&stats_f, &stats_s, e, a), m));
            }
            if let Some(side) = s_cube_side {
                candidates.push((bound_stage1(side * r, &stats_f, e), m));
                if let Primitive::Cube { side: fside, .. } = f.primitive() {
                    candidates.push((bound_cube_pair(fside, side * r, e, f.dim()), m));
                }
            }
            for (b, emp) in candidates {
                match b {
                    Ok(b) => {
                        values.push(b);
                        empirical.push(emp);
                    }
                    Err(err) => p.warnings.push(format!("{label} eps={e}: {err}")),
                }
            }
        }
        spectrum_checks(&label, &spec, &g.eps, &g.p, &mut p)?;
        let point = BoundsPoint { f_index: i, r, stats_f, stats_s, sr, n_eps };
        Ok((p, point, values, empirical))
    });
    let mut points = Vec::new();
    let mut by_bound: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (j, res) in results.into_iter().enumerate() {
        let (i, r) = jobs[j];
        match res {
            Ok((p, point, values, empirical)) => {
                for (b, emp) in values.iter().zip(&empirical) {
                    let rep = b.report(*emp, 1.0);
                    by_bound.entry(b.name.clone()).or_default().push((b.value, *emp));
                    out.table_mut("bounds").push(vec![
                        b.name.clone().into(),
                        i.into(),
                        r.into(),
                        b.params.get("eps").copied().into(),
                        b.params.get("alpha").copied().into(),
                        b.value.into(),
                        (*emp).into(),
                        rep.ratio.into(),
                        b.constant_mode.as_str().into(),
                        b.log_base.as_str().into(),
                        b.notes.clone().into(),
                    ]);
                }
                points.push(point);
                out.absorb("", Ok(p));
            }
            Err(e) => out.failures.push(format!("f{i} r={r}: {e}")),
        }
    }
    let mut main1_constant = None;
    for (name, pairs) in &by_bound {
        match fit_constant(pairs) {
            Ok(c) => {
                if name == "main1" {
                    main1_constant = Some(c.full);
                }
                let ratio = c.full / c.half;
                out.table_mut("constants").push(vec![
                    name.clone().into(),
                    c.full.into(),
                    c.half.into(),
                    c.points.into(),
                    ratio.into(),
                    c.is_stable().into(),
                ]);
                out.checks.push(Check {
                    name: format!("constant {name}"),
                    pass: c.is_stable(),
                    detail: format!("full {:.6e}, half {:.6e}, {} points", c.full, c.half, c.points),
                });
            }
            Err(e) => out.warnings.push(format!("constant {name}: {e}")),
        }
    }
    if let Some(c) = main1_constant.filter(|c| *c > 0.0) {
        let mut outside = 0;
        for pt in &points {
            let f = &fs[pt.f_index];
            for (k, &e) in g.eps.iter().enumerate() {
                match n_eps_window(f, &pt.sr, &pt.stats_f, &pt.stats_s, e, c) {
                    Ok(w) => {
                        let inside = w.contains(pt.n_eps[k]);
                        outside += usize::from(!inside);
                        out.table_mut("window").push(vec![
                            pt.f_index.into(),
                            pt.r.into(),
                            e.into(),
                            pt.n_eps[k].into(),
                            trace_mass(f, &pt.sr).into(),
                            w.lo.into(),
                            w.hi.into(),
                            c.into(),
                            inside.into(),
                        ]);
                    }
                    Err(err) => out.warnings.push(format!("window f{} r={} eps={e}: {err}", pt.f_index, pt.r)),
                }
            }
        }
        out.checks.push(Check {
            name: "window".into(),
            pass: outside == 0,
            detail: format!("{outside} counts outside the predicted window"),
        });
    }
    let ps = [0.25, 0.5, 1.0];
    let trials = schatten_subadditivity(cfg.seed, SUBADDITIVITY_TRIALS, SUBADDITIVITY_MAX_N, &ps)?;
    let mut bad = 0;
    for t in &trials {
        let pass = t.slack() >= -1e-10;
        bad += usize::from(!pass);
        out.table_mut("subadditivity").push(vec![
            t.trial.into(),
            t.n.into(),
            t.p.into(),
            t.lhs.into(),
            t.rhs.into(),
            t.slack().into(),
            pass.into(),
        ]);
    }
    out.checks.push(Check {
        name: "schatten subadditivity".into(),
        pass: bad == 0,
        detail: format!("{bad} of {} comparisons below slack -1e-10", trials.len()),
    });
    Ok(out)
}

/// Halves of an interval or the `2^d` half-side subcubes of a cube.
fn default_components(f: &Domain) -> Result<Vec<Domain>> {
    match f.primitive() {
        Primitive::Interval { a, b } => {
            let m = 0.5 * (a + b);
            Ok(vec![Domain::interval(a, m)?, Domain::interval(m, b)?])
        }
        Primitive::Cube { center, side } => {
            let d = center.len();
            (0..1usize << d)
                .map(|mask| {
                    let c = (0..d)
                        .map(|k| center[k] + if mask >> (d - 1 - k) & 1 == 1 { 0.25 } else { -0.25 } * side)
                        .collect();
                    Domain::cube(c, 0.5 * side)
                })
                .collect()
        }
        _ => Err(Error::Unsupported("default decomposition needs an interval or cube; list domains.components".into())),
    }
}

fn run_synthesis(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = cfg.f_domains()?.into_iter().next().ok_or_else(|| Error::Config(vec!["domains.f is empty".into()]))?;
    let s = cfg.s_domain()?;
    let g = &cfg.grids;
    let comps: Vec<Domain> = if cfg.domains.components.is_empty() {
        default_components(&f)?
    } else {
        cfg.domains.components.iter().map(Domain::try_from).collect::<Result<_>>()?
    };
    let total: f64 = comps.iter().map(Domain::volume).sum();
    if (total - f.volume()).abs() > 1e-9 * f.volume() {
        return Err(Error::Config(vec![format!(
            "domains.components: total volume {total} differs from the domain volume {}",
            f.volume()
        )]));
    }
    let d = f.dim();
    let boxes: Vec<Aabb> = comps.iter().map(Domain::bbox).collect();
    let omega = BandKernel::new(&s)?.bandwidth();
    let cap = cfg.resolution.max_nodes;
    let order = match cfg.resolution.nodes_per_dim {
        Some(n) => {
            if boxes.len() * n.pow(d as u32) > cap {
                return Err(Error::Resolution(format!(
                    "{} nodes exceed the matrix cap {cap}",
                    boxes.len() * n.pow(d as u32)
                )));
            }
            n
        }
        None => {
            let len = boxes.iter().map(Aabb::extent).fold(0.0, f64::max);
            let mut n = default_nodes_per_dim(omega, len, d);
            while n > 1 && boxes.len() * n.pow(d as u32) > cap {
                n -= 1;
            }
            n
        }
    };
    let q = Quadrature::on_boxes(&boxes, order);
    let mut domains = vec![f.clone()];
    domains.extend(comps.iter().cloned());
    let ops = discretize_shared(&domains, &s, &q)?;
    let spectra: Vec<Result<Spectrum>> = ops.par_iter().map(spectrum).collect();
    let spectra: Vec<Spectrum> = spectra.into_iter().collect::<Result<_>>()?;
    let mut out = Outcome::with_schema(&[
        ("synthesis", &["eps", "p", "m_whole", "component_sum", "bound", "slack", "pass"]),
        ("synthesis_components", &["component", "volume", "eps", "p", "plunge_norm"]),
        CHEBY,
        CROSSING,
    ]);
    let mut p = Partial::default();
    let (whole, parts) = spectra.split_first().expect("whole spectrum present");
    let mut violations = 0;
    for &e in &g.eps {
        let rep = crate::bounds::synthesis_check(parts, whole, e)?;
        let pw = rep.bound.params["p"];
        let sum = 0.5 * e.powf(pw) * rep.bound.value;
        let pass = rep.pass == Some(true);
        violations += usize::from(!pass);
        p.row(
            "synthesis",
            vec![
                e.into(),
                pw.into(),
                rep.empirical.into(),
                sum.into(),
                rep.bound.value.into(),
                (rep.bound.value - rep.empirical).into(),
                pass.into(),
            ],
        );
        for (k, (c, spec)) in comps.iter().zip(parts).enumerate() {
            p.row(
                "synthesis_components",
                vec![k.into(), c.volume().into(), e.into(), pw.into(), plunge_norm(spec, pw)?.into()],
            );
        }
    }
    p.check("synthesis".into(), violations == 0, format!("{violations} violations over {} thresholds", g.eps.len()));
    spectrum_checks("whole", whole, &g.eps, &g.p, &mut p)?;
    for (k, spec) in parts.iter().enumerate() {
        spectrum_checks(&format!("component{k}"), spec, &g.eps, &g.p, &mut p)?;
    }
    p.artifacts.push((
        "decomposition.json".into(),
        Artifact::Json(serde_json::json!({
            "whole": DomainSpec::from(&f),
            "components": comps.iter().map(DomainSpec::from).collect::<Vec<_>>(),
            "nodes_per_component_axis": order,
            "n": q.len(),
        })),
    ));
    out.absorb("synthesis", Ok(p));
    Ok(out)
}
