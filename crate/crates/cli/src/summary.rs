//! Post-hoc comparison tables and line plots from a metrics CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::metrics_csv::{format_sig, CsvRow};

/// Per-run values, taken from the `all` row when present.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_id: u64,
    pub label: String,
    pub n: u16,
    pub rate_fps: f64,
    pub mean_aoi_s: f64,
    pub p95_aoi_s: f64,
    pub tracking_error_m: Option<f64>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.into_iter().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Collapses rows into one summary per run, in first-seen order.
pub fn runs(rows: &[CsvRow]) -> Vec<RunSummary> {
    let mut order: Vec<u64> = Vec::new();
    let mut by_run: BTreeMap<u64, Vec<&CsvRow>> = BTreeMap::new();
    for row in rows {
        if !by_run.contains_key(&row.run_id) {
            order.push(row.run_id);
        }
        by_run.entry(row.run_id).or_default().push(row);
    }
    order
        .into_iter()
        .map(|id| {
            let rows = &by_run[&id];
            let first = rows[0];
            let (mean_aoi_s, p95_aoi_s, tracking_error_m) = match rows.iter().find(|r| r.follower.is_none()) {
                Some(all) => (all.mean_aoi_s, all.p95_aoi_s, all.tracking_error_m),
                None => (
                    mean(rows.iter().map(|r| r.mean_aoi_s)).unwrap_or(0.0),
                    rows.iter().map(|r| r.p95_aoi_s).fold(0.0, f64::max),
                    rows.iter().map(|r| r.tracking_error_m).collect::<Option<Vec<_>>>().and_then(mean),
                ),
            };
            RunSummary {
                run_id: id,
                label: first.policy.clone(),
                n: first.n,
                rate_fps: first.rate_fps,
                mean_aoi_s,
                p95_aoi_s,
                tracking_error_m,
            }
        })
        .collect()
}

/// Runs grouped by `(n, rate_fps)`, then by label, keeping replicate order.
#[derive(Debug, Clone)]
pub struct Summary {
    pub labels: Vec<String>,
    /// Label in the ratio denominator.
    pub middleware: Option<String>,
    /// Label in the ratio numerator.
    pub reference: Option<String>,
    pub groups: Vec<Group>,
}

#[derive(Debug, Clone)]
pub struct Group {
    pub n: u16,
    pub rate_fps: f64,
    pub runs: BTreeMap<String, Vec<RunSummary>>,
}

impl Group {
    fn values(&self, label: &str, get: fn(&RunSummary) -> Option<f64>) -> Vec<Option<f64>> {
        self.runs.get(label).map(|rs| rs.iter().map(get).collect()).unwrap_or_default()
    }

    fn mean_of(&self, label: &str, get: fn(&RunSummary) -> Option<f64>) -> Option<f64> {
        self.values(label, get).into_iter().collect::<Option<Vec<_>>>().and_then(mean)
    }

    pub fn replicates(&self) -> usize {
        self.runs.values().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn summarize(rows: &[CsvRow]) -> Summary {
    let runs = runs(rows);
    let mut labels: Vec<String> = Vec::new();
    for r in &runs {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let middleware = labels
        .iter()
        .find(|l| *l == "whittle")
        .or_else(|| labels.iter().find(|l| *l != "baseline"))
        .cloned();
    let reference = labels
        .iter()
        .find(|l| *l == "baseline" && Some(*l) != middleware.as_ref())
        .or_else(|| labels.iter().find(|l| Some(*l) != middleware.as_ref()))
        .cloned();
    let mut groups: Vec<Group> = Vec::new();
    for r in runs {
        let pos = groups.iter().position(|g| g.n == r.n && g.rate_fps == r.rate_fps);
        let g = match pos {
            Some(p) => &mut groups[p],
            None => {
                groups.push(Group { n: r.n, rate_fps: r.rate_fps, runs: BTreeMap::new() });
                groups.last_mut().expect("just pushed")
            }
        };
        g.runs.entry(r.label.clone()).or_default().push(r);
    }
    groups.sort_by(|a, b| a.n.cmp(&b.n).then(a.rate_fps.total_cmp(&b.rate_fps)));
    Summary { labels, middleware, reference, groups }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_else(|| "-".into())
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    match (num, den) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    }
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join("  ")
    };
    let _ = writeln!(out, "{}", line(header));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

impl Summary {
    fn ratio_header(&self) -> Option<String> {
        Some(format!("ratio({}/{})", self.reference.as_ref()?, self.middleware.as_ref()?))
    }

    fn metric_table(&self, out: &mut String, title: &str, get: fn(&RunSummary) -> Option<f64>) {
        let mut header: Vec<String> = vec!["n".into(), "rate_fps".into()];
        header.extend(self.labels.iter().cloned());
        let ratio_header = self.ratio_header();
        header.extend(ratio_header.clone());
        let rows: Vec<Vec<String>> = self
            .groups
            .iter()
            .map(|g| {
                let mut row = vec![g.n.to_string(), format_sig(g.rate_fps)];
                row.extend(self.labels.iter().map(|l| cell(g.mean_of(l, get))));
                if ratio_header.is_some() {
                    let r = ratio(
                        self.reference.as_deref().and_then(|l| g.mean_of(l, get)),
                        self.middleware.as_deref().and_then(|l| g.mean_of(l, get)),
                    );
                    row.push(cell(r));
                }
                row
            })
            .collect();
        let _ = writeln!(out, "# {title}");
        table(out, &header, &rows);
    }

    /// Per-replicate ratios: the k-th run of each label in a group are paired.
    pub fn paired_ratios(&self) -> Vec<(u16, f64, usize, Option<f64>)> {
        let (Some(reference), Some(middleware)) = (&self.reference, &self.middleware) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for g in &self.groups {
            let num = g.values(reference, |r| Some(r.mean_aoi_s));
            let den = g.values(middleware, |r| Some(r.mean_aoi_s));
            for k in 0..g.replicates() {
                let pair = ratio(num.get(k).copied().flatten(), den.get(k).copied().flatten());
                out.push((g.n, g.rate_fps, k, pair));
            }
        }
        out
    }

    /// Mean AoI, p95 AoI and (when present) tracking-error tables, plus the
    /// per-replicate ratio table when two schemes are compared.
    pub fn render_tables(&self) -> String {
        let mut out = String::new();
        self.metric_table(&mut out, "mean AoI (s)", |r| Some(r.mean_aoi_s));
        out.push('\n');
        self.metric_table(&mut out, "p95 AoI (s)", |r| Some(r.p95_aoi_s));
        let tracked = self.groups.iter().any(|g| g.runs.values().flatten().any(|r| r.tracking_error_m.is_some()));
        if tracked {
            out.push('\n');
            self.metric_table(&mut out, "mean tracking error (m)", |r| r.tracking_error_m);
        }
        if let Some(header) = self.ratio_header() {
            let pairs = self.paired_ratios();
            if pairs.iter().any(|(_, _, k, _)| *k > 0) {
                out.push('\n');
                let _ = writeln!(out, "# paired runs, mean AoI {header}");
                let rows: Vec<Vec<String>> = pairs
                    .iter()
                    .map(|(n, rate, k, r)| vec![n.to_string(), format_sig(*rate), k.to_string(), cell(*r)])
                    .collect();
                table(&mut out, &["n".into(), "rate_fps".into(), "replicate".into(), header], &rows);
            }
        }
        out
    }

    /// Mean AoI per label as a line plot against `n`, or against the rate
    /// when `n` never varies. A log axis is used for wide ranges.
    pub fn render_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 60.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

        let by_n = self.groups.iter().map(|g| g.n).collect::<std::collections::BTreeSet<_>>().len() > 1;
        let x_of = |g: &Group| if by_n { g.n as f64 } else { g.rate_fps };
        let mut series: Vec<(&String, Vec<(f64, f64)>)> = Vec::new();
        for label in &self.labels {
            let mut points: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
            for g in &self.groups {
                if let Some(v) = g.mean_of(label, |r| Some(r.mean_aoi_s)) {
                    points.entry(x_of(g).to_bits()).or_insert((x_of(g), Vec::new())).1.push(v);
                }
            }
            let mut pts: Vec<(f64, f64)> =
                points.into_values().map(|(x, vs)| (x, mean(vs).unwrap_or(0.0))).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            series.push((label, pts));
        }
        let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
        let (x_lo, x_hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
        let y_pos: Vec<f64> = all.iter().map(|p| p.1).filter(|y| *y > 0.0).collect();
        let y_hi = all.iter().map(|p| p.1).fold(0.0, f64::max);
        let y_lo = y_pos.iter().copied().fold(f64::INFINITY, f64::min);
        let log = y_lo.is_finite() && y_hi / y_lo > 20.0;
        let (ty_lo, ty_hi) = if log {
            (y_lo.log10().floor(), y_hi.log10().ceil())
        } else {
            (0.0, if y_hi > 0.0 { y_hi * 1.1 } else { 1.0 })
        };
        let sx = |x: f64| {
            if x_hi > x_lo {
                M + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * M)
            } else {
                W / 2.0
            }
        };
        let sy = |y: f64| {
            let t = if log { y.max(y_lo).log10() } else { y };
            H - M - (t - ty_lo) / (ty_hi - ty_lo) * (H - 2.0 * M)
        };

        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#,
            H - M,
            W - M
        );
        let x_name = if by_n { "followers (n)" } else { "generation rate (fps)" };
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x_name}</text>"#, W / 2.0, H - 15.0);
        let y_name = if log { "mean AoI (s, log scale)" } else { "mean AoI (s)" };
        let _ = writeln!(
            out,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_name}</text>"#,
            H / 2.0,
            H / 2.0
        );
        let mut xs: Vec<f64> = all.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for x in xs {
            let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(x), H - M + 16.0, format_sig(x));
        }
        let ticks: Vec<f64> = if log {
            (ty_lo as i32..=ty_hi as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=4).map(|k| ty_hi * k as f64 / 4.0).collect()
        };
        for y in ticks {
            let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, M - 6.0, sy(y) + 4.0, format_sig(y));
        }
        for (k, (label, pts)) in series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
            for (x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(*x), sy(*y));
            }
            let ly = M + 16.0 * k as f64;
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#, W - M - 80.0);
        }
        out.push_str("</svg>\n");
        out
    }
}
