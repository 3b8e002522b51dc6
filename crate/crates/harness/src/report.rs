use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bo_core::acquisition::AcquisitionKind;
use bo_core::benchmarks::log10_distance;
use bo_core::engine::{RunTrace, TraceRecord};
use bo_core::gp::Outcome;
use serde_json::{json, Value};

use crate::campaign::{write_atomic, Archive, RunRecord};
use crate::error::{HarnessError, Result};
use crate::method::Method;
use crate::stats::{comparison_table, distance_summary, evals_to_tolerance, ComparisonTable, SummaryPoint, DEFAULT_ALPHA};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: &str = "bo-harness/manifest/v1";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Header of a per-run CSV for a `dims`-dimensional problem.
pub fn csv_header(dims: usize) -> Vec<String> {
    let mut h = vec!["n".to_string()];
    h.extend((1..=dims).map(|i| format!("x{i}")));
    h.extend(["y", "failure", "f_min", "log10_distance"].map(String::from));
    h.extend((1..=dims).map(|i| format!("xmin{i}")));
    h.push("design".into());
    h
}

/// Per-run CSV: one row per evaluation. Empty cells stand for a failed
/// evaluation's `y` and for the incumbent before the first success.
pub fn trace_to_csv(trace: &RunTrace, f_glob: f64, dims: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row_err = |e: csv::Error| HarnessError::parse("<csv>", e);
    w.write_record(csv_header(dims)).map_err(row_err)?;
    for r in &trace.records {
        let mut row = vec![r.n.to_string()];
        row.extend(r.x.iter().map(|v| num(*v)));
        row.push(opt_num(r.outcome.value()));
        row.push(if r.outcome.is_failure() { "1" } else { "0" }.into());
        row.push(opt_num(r.f_min));
        row.push(opt_num(r.f_min.map(|f| log10_distance(f, f_glob))));
        match &r.x_min {
            Some(x) => row.extend(x.iter().map(|v| num(*v))),
            None => row.extend(std::iter::repeat(String::new()).take(dims)),
        }
        row.push(if r.n <= trace.n_init { "1" } else { "0" }.into());
        w.write_record(&row).map_err(row_err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::parse("<csv>", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

/// Inverse of [`trace_to_csv`]. The truncation flag is not part of the CSV
/// and comes back as `false`.
pub fn trace_from_csv(text: &str) -> Result<RunTrace> {
    let bad = |m: String| HarnessError::parse("<csv>", m);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let dims = header.iter().filter(|h| h.starts_with('x') && !h.starts_with("xmin")).count();
    if header.len() != csv_header(dims).len() {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>().map(Some).map_err(|e| bad(format!("`{s}`: {e}")))
        }
    };
    let mut records = Vec::new();
    let mut n_init = 0;
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let n: usize = row[0].parse().map_err(|_| bad(format!("bad n `{}`", &row[0])))?;
        let x = (1..=dims).map(|i| parse(&row[i]).map(|v| v.unwrap_or(f64::NAN))).collect::<Result<Vec<_>>>()?;
        let y = parse(&row[dims + 1])?;
        let outcome = match (&row[dims + 2], y) {
            ("1", _) => Outcome::Failure,
            (_, Some(v)) => Outcome::Success(v),
            _ => return Err(bad(format!("row {n}: success without y"))),
        };
        let f_min = parse(&row[dims + 3])?;
        let xmin: Vec<Option<f64>> = (0..dims).map(|i| parse(&row[dims + 5 + i])).collect::<Result<_>>()?;
        let x_min = f_min.map(|_| xmin.iter().map(|v| v.unwrap_or(f64::NAN)).collect());
        if &row[2 * dims + 5] == "1" {
            n_init = n;
        }
        records.push(TraceRecord { n, x, outcome, f_min, x_min });
    }
    let last = records.last();
    Ok(RunTrace {
        n_init,
        f_min: last.and_then(|r| r.f_min),
        x_min: last.and_then(|r| r.x_min.clone()),
        records,
        truncated: false,
    })
}

/// Method the tables compare against: ScaledEI when present.
pub fn default_reference(archive: &Archive) -> Method {
    let scaled = Method::Bo(AcquisitionKind::ScaledEi);
    if archive.config.methods.contains(&scaled) {
        scaled
    } else {
        archive.config.methods[0]
    }
}

fn table_csv(table: &ComparisonTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |e: csv::Error| HarnessError::parse("<csv>", e);
    w.write_record(["problem", "reference", "competitor", "code", "p_value", "mean_diff", "pairs"]).map_err(e)?;
    for (i, p) in table.problems.iter().enumerate() {
        for (j, c) in table.competitors.iter().enumerate() {
            let cell = table.cells[i][j];
            w.write_record([
                p.clone(),
                table.reference.to_string(),
                c.to_string(),
                cell.map(|c| c.code.to_string()).unwrap_or_default(),
                opt_num(cell.map(|c| c.p_value)),
                opt_num(cell.map(|c| c.mean_diff)),
                cell.map(|c| c.pairs.to_string()).unwrap_or_default(),
            ])
            .map_err(e)?;
        }
    }
    for (label, pick) in [("Same %", 0), ("Better %", 1), ("Worse %", 2)] {
        for (j, c) in table.competitors.iter().enumerate() {
            let t = table.tallies[j];
            let v = [t.same, t.better, t.worse][pick];
            w.write_record([label.to_string(), table.reference.to_string(), c.to_string(), String::new(), String::new(), num(v), t.cells.to_string()])
                .map_err(e)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| HarnessError::parse("<csv>", e.to_string()))?).map_err(|e| HarnessError::parse("<csv>", e))
}

/// Plain-text rendering in the layout of the comparison tables: codes per
/// problem and competitor, then the Same/Better/Worse rows.
pub fn render_comparison_table(table: &ComparisonTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} vs competitors at n = {} (paired t-test, alpha = {})", table.reference, table.checkpoint, table.alpha);
    let _ = write!(s, "{:<10}", "problem");
    for c in &table.competitors {
        let _ = write!(s, "{:>15}", c.to_string());
    }
    s.push('\n');
    for (i, p) in table.problems.iter().enumerate() {
        let _ = write!(s, "{p:<10}");
        for cell in &table.cells[i] {
            let text = cell.map_or("n/a".to_string(), |c| format!("{:+} (p={:.3})", c.code, c.p_value).replace("+0", "0"));
            let _ = write!(s, "{text:>15}");
        }
        s.push('\n');
    }
    for (label, pick) in [("Same", 0), ("Better", 1), ("Worse", 2)] {
        let _ = write!(s, "{label:<10}");
        for t in &table.tallies {
            let _ = write!(s, "{:>14.0}%", [t.same, t.better, t.worse][pick]);
        }
        s.push('\n');
    }
    for m in &table.missing {
        let _ = writeln!(s, "missing: {m}");
    }
    s
}

/// Convergence plot of mean ± SEM log₁₀ distance versus evaluations, one
/// trace per method.
pub fn convergence_svg(problem: &str, series: &[(Method, Vec<SummaryPoint>)]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const L: f64 = 70.0;
    const R: f64 = 170.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
    let pts = series.iter().flat_map(|(_, s)| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let sem = if p.sem.is_finite() { p.sem } else { 0.0 };
        x0 = x0.min(p.n as f64);
        x1 = x1.max(p.n as f64);
        y0 = y0.min(p.mean - sem);
        y1 = y1.max(p.mean + sem);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |n: f64| L + (n - x0) / (x1 - x0) * (W - L - R);
    let sy = |v: f64| T + (y1 - v) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{problem}</text>"#, (L + W - R) / 2.0);
    let _ = writeln!(s, r#"<rect x="{L}" y="{T}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, W - L - R, H - T - B);
    for k in 0..=5 {
        let v = y0 + (y1 - y0) * k as f64 / 5.0;
        let n = x0 + (x1 - x0) * k as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#, L - 6.0, sy(v) + 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{n:.0}</text>"#, sx(n), H - B + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">function evaluations</text>"#, (L + W - R) / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">log10 distance</text>"#, H / 2.0, H / 2.0);
    for (i, (method, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.n as f64), sy(p.mean))).collect();
        let _ = writeln!(s, r#"<polyline class="trace" data-method="{method}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let every = (pts.len() / 20).max(1);
        for p in pts.iter().skip(every / 2).step_by(every) {
            if !(p.sem > 0.0) {
                continue;
            }
            let x = sx(p.n as f64);
            let _ = writeln!(
                s,
                r#"<line class="errorbar" data-method="{method}" x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                sy(p.mean - p.sem),
                sy(p.mean + p.sem)
            );
        }
        let ly = T + 16.0 * i as f64 + 8.0;
        let _ = writeln!(s, r#"<line x1="{:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, W - R + 12.0, W - R + 36.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{method}</text>"#, W - R + 42.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn run_entry(run: &RunRecord, csv_file: Option<&str>) -> Value {
    let trace = run.ok_trace();
    json!({
        "problem": run.key.problem,
        "method": run.key.method.to_string(),
        "seed": run.key.seed,
        "trace_file": format!("runs/{}.json", run.key.stem()),
        "csv_file": csv_file,
        "evaluations": trace.map(|t| t.evaluations()),
        "failures": trace.map(|t| t.failures()),
        "truncated": trace.map(|t| t.truncated),
        "wall_time_s": run.wall_time_s,
        "f_glob": run.f_glob,
        "final_f_min": trace.and_then(|t| t.f_min),
        "final_log10_distance": trace.and_then(|t| t.f_min).map(|f| log10_distance(f, run.f_glob)),
        "error": run.trace.as_ref().err(),
    })
}

/// Checks a manifest against the layout [`emit_reports`] documents.
pub fn validate_manifest(v: &Value) -> std::result::Result<(), String> {
    let obj = v.as_object().ok_or("manifest is not an object")?;
    if obj.get("schema").and_then(Value::as_str) != Some(MANIFEST_SCHEMA) {
        return Err("schema tag missing or wrong".into());
    }
    let gen = obj.get("generator").and_then(Value::as_object).ok_or("generator missing")?;
    for k in ["name", "version"] {
        gen.get(k).and_then(Value::as_str).ok_or(format!("generator.{k} missing"))?;
    }
    obj.get("config").and_then(Value::as_object).ok_or("config missing")?;
    let seeds = obj.get("seeds").and_then(Value::as_array).ok_or("seeds missing")?;
    if seeds.is_empty() || !seeds.iter().all(Value::is_u64) {
        return Err("seeds must be a nonempty list of integers".into());
    }
    for key in ["tables", "plots"] {
        let list = obj.get(key).and_then(Value::as_array).ok_or(format!("{key} missing"))?;
        if !list.iter().all(Value::is_string) {
            return Err(format!("{key} must list file names"));
        }
    }
    let runs = obj.get("runs").and_then(Value::as_array).ok_or("runs missing")?;
    for (i, r) in runs.iter().enumerate() {
        let r = r.as_object().ok_or(format!("runs[{i}] is not an object"))?;
        let need = |k: &str, ok: fn(&Value) -> bool| -> std::result::Result<(), String> {
            match r.get(k) {
                Some(v) if ok(v) => Ok(()),
                _ => Err(format!("runs[{i}].{k} missing or mistyped")),
            }
        };
        need("problem", Value::is_string)?;
        need("method", Value::is_string)?;
        need("seed", Value::is_u64)?;
        need("trace_file", Value::is_string)?;
        need("f_glob", Value::is_number)?;
        for k in ["csv_file", "error"] {
            need(k, |v| v.is_string() || v.is_null())?;
        }
        for k in ["evaluations", "failures"] {
            need(k, |v| v.is_u64() || v.is_null())?;
        }
        need("truncated", |v| v.is_boolean() || v.is_null())?;
        for k in ["wall_time_s", "final_f_min", "final_log10_distance"] {
            need(k, |v| v.is_number() || v.is_null())?;
        }
        if r["error"].is_null() == r["csv_file"].is_null() {
            return Err(format!("runs[{i}]: exactly one of csv_file and error must be set"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub run_csvs: Vec<PathBuf>,
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

/// Writes per-run CSVs, comparison tables at each checkpoint, distance and
/// evaluations-to-tolerance summaries, one SVG per problem and the manifest.
pub fn emit_reports(archive: &Archive, dir: &Path) -> Result<ReportFiles> {
    if archive.runs.iter().all(|r| r.trace.is_err()) {
        return Err(HarnessError::EmptyArchive);
    }
    let mut files = ReportFiles { manifest: dir.join(MANIFEST_FILE), ..Default::default() };
    let mut entries = Vec::new();
    for run in &archive.runs {
        let csv_rel = run.ok_trace().map(|_| format!("runs/{}.csv", run.key.stem()));
        if let (Some(trace), Some(rel)) = (run.ok_trace(), &csv_rel) {
            let path = dir.join(rel);
            write_text(&path, &trace_to_csv(trace, run.f_glob, run.dims)?)?;
            files.run_csvs.push(path);
        }
        entries.push(run_entry(run, csv_rel.as_deref()));
    }

    let config = &archive.config;
    let problems: Vec<String> = config.problems.iter().map(|p| p.to_ascii_uppercase()).collect();
    let mut rel_tables = Vec::new();
    if config.methods.len() > 1 {
        let reference = default_reference(archive);
        for cp in config.effective_checkpoints() {
            let table = comparison_table(archive, &reference, cp, DEFAULT_ALPHA)?;
            for (name, body) in [(format!("comparison_n{cp}.csv"), table_csv(&table)?), (format!("comparison_n{cp}.txt"), render_comparison_table(&table))] {
                write_text(&dir.join("tables").join(&name), &body)?;
                rel_tables.push(format!("tables/{name}"));
            }
        }
    }

    let e = |e: csv::Error| HarnessError::parse("<csv>", e);
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["problem", "method", "n", "mean", "sem"]).map_err(e)?;
    let mut tol = csv::Writer::from_writer(Vec::new());
    tol.write_record(["problem", "method", "target", "runs", "reached", "censored", "mean_evals", "sem", "mean_evals_censored"]).map_err(e)?;
    let mut rel_plots = Vec::new();
    for p in &problems {
        let mut series = Vec::new();
        for m in &config.methods {
            if let Ok(points) = distance_summary(archive, p, m) {
                for pt in &points {
                    summary.write_record([p.clone(), m.to_string(), pt.n.to_string(), num(pt.mean), num(pt.sem)]).map_err(e)?;
                }
                series.push((*m, points));
            }
        }
        for t in evals_to_tolerance(archive, p, config.tolerance_target) {
            tol.write_record([
                p.clone(),
                t.method.to_string(),
                num(config.tolerance_target),
                t.runs.to_string(),
                t.reached.to_string(),
                t.censored.to_string(),
                opt_num(t.mean_evals),
                opt_num(t.sem),
                num(t.mean_evals_censored),
            ])
            .map_err(e)?;
        }
        if !series.is_empty() {
            let rel = format!("plots/{p}.svg");
            write_text(&dir.join(&rel), &convergence_svg(p, &series))?;
            files.plots.push(dir.join(&rel));
            rel_plots.push(rel);
        }
    }
    for (name, w) in [("distance_summary.csv", summary), ("evals_to_tolerance.csv", tol)] {
        let body = String::from_utf8(w.into_inner().map_err(|e| HarnessError::parse(name, e.to_string()))?).expect("ascii");
        write_text(&dir.join("tables").join(name), &body)?;
        rel_tables.push(format!("tables/{name}"));
    }
    files.tables = rel_tables.iter().map(|r| dir.join(r)).collect();

    let manifest = json!({
        "schema": MANIFEST_SCHEMA,
        "generator": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": serde_json::to_value(config).map_err(|e| HarnessError::parse(&files.manifest, e))?,
        "seeds": config.seeds,
        "runs": entries,
        "tables": rel_tables,
        "plots": rel_plots,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::parse(&files.manifest, e))?;
    write_text(&files.manifest, &text)?;
    Ok(files)
}
