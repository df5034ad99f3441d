//! Static SVG charts rendered from the summary CSVs.
//!
//! Everything is parsed and rendered in memory first; files are written
//! only once every chart succeeded, so a bad input leaves no partial output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::Failure;

pub const TOP_LEVEL_CSV: &str = "top_level.csv";
pub const DEPTH_CSV: &str = "depth_summary.csv";

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, name: &str, path: &Path) -> Result<usize, Failure> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::input(format!("{}: missing column `{name}`", path.display())))
    }
}

fn read_table(path: &Path) -> Result<Table, Failure> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(Failure::input(format!("{} has no data rows", path.display())));
    }
    Ok(Table { header, rows })
}

fn parse_opt(v: &str, path: &Path) -> Result<Option<f64>, Failure> {
    if v.is_empty() {
        return Ok(None);
    }
    v.parse::<f64>()
        .map(Some)
        .map_err(|_| Failure::input(format!("{}: `{v}` is not a number", path.display())))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg_open(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        w / 2.0,
        escape(title)
    )
}

/// Horizontal bars of the mean MCC lag per root topic, annotated with the
/// share of CCAUC ratios above 1.
fn top_level_chart(path: &Path) -> Result<String, Failure> {
    let t = read_table(path)?;
    let (ci, cl, cf) = (
        t.column("root_topic", path)?,
        t.column("mean_mcc_lag", path)?,
        t.column("ccauc_gt1_fraction", path)?,
    );
    let mut bars = Vec::new();
    for row in &t.rows {
        let lag = parse_opt(&row[cl], path)?;
        let frac = parse_opt(&row[cf], path)?;
        bars.push((row[ci].clone(), lag, frac));
    }
    let lim = bars
        .iter()
        .filter_map(|b| b.1)
        .fold(1.0f64, |a, v| a.max(v.abs()))
        .ceil();
    let (left, right, top, bar_h) = (140.0, 120.0, 50.0, 22.0);
    let plot_w = 420.0;
    let width = left + plot_w + right;
    let height = top + bars.len() as f64 * bar_h + 50.0;
    let x_of = |v: f64| left + (v + lim) / (2.0 * lim) * plot_w;
    let mut s = svg_open(width, height, "Mean MCC lag per top-level topic");
    let zero = x_of(0.0);
    for (i, (name, lag, frac)) in bars.iter().enumerate() {
        let y = top + i as f64 * bar_h;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            y + bar_h * 0.65,
            escape(name)
        );
        if let Some(lag) = lag {
            let (x0, x1) = if *lag >= 0.0 { (zero, x_of(*lag)) } else { (x_of(*lag), zero) };
            let _ = writeln!(
                s,
                "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                y + 3.0,
                (x1 - x0).max(0.5),
                bar_h - 6.0,
                PALETTE[0]
            );
        }
        let label = match frac {
            Some(f) => format!("{:.0}% CCAUC>1", f * 100.0),
            None => "no data".into(),
        };
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            left + plot_w + 8.0,
            y + bar_h * 0.65,
            label
        );
    }
    let axis_y = top + bars.len() as f64 * bar_h + 4.0;
    let _ = writeln!(
        s,
        "<line x1=\"{zero:.2}\" y1=\"{top}\" x2=\"{zero:.2}\" y2=\"{axis_y}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"black\"/>",
        left + plot_w
    );
    for v in [-lim, 0.0, lim] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{v}</text>",
            x_of(v),
            axis_y + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">mean MCC lag (years; positive = science leads)</text>",
        left + plot_w / 2.0,
        axis_y + 34.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

type Series = BTreeMap<String, Vec<(f64, f64, Option<f64>)>>;

/// Fraction-versus-depth lines with ±std error bars.
fn depth_chart(title: &str, series: &Series) -> String {
    let (left, top, plot_w, plot_h) = (60.0, 45.0, 460.0, 260.0);
    let width = left + plot_w + 170.0;
    let height = top + plot_h + 55.0;
    let max_depth = series
        .values()
        .flatten()
        .map(|p| p.0)
        .fold(1.0f64, f64::max);
    let x_of = |d: f64| {
        if max_depth <= 1.0 {
            left + plot_w / 2.0
        } else {
            left + (d - 1.0) / (max_depth - 1.0) * plot_w
        }
    };
    let y_of = |v: f64| top + (1.0 - v.clamp(0.0, 1.0)) * plot_h;
    let mut s = svg_open(width, height, title);
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        top + plot_h,
        left + plot_w
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{v}</text>",
            left - 6.0,
            y_of(v) + 4.0
        );
    }
    for d in 1..=max_depth as usize {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{d}</text>",
            x_of(d as f64),
            top + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">depth</text>",
        left + plot_w / 2.0,
        top + plot_h + 36.0
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(d, m, _)| format!("{:.2},{:.2}", x_of(d), y_of(m)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            path.join(" ")
        );
        for &(d, m, sd) in points {
            let (x, y) = (x_of(d), y_of(m));
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
            if let Some(sd) = sd {
                let _ = writeln!(
                    s,
                    "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                    y_of(m - sd),
                    y_of(m + sd)
                );
            }
        }
        let ly = top + 10.0 + i as f64 * 18.0;
        let lx = left + plot_w + 15.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>",
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn depth_series(path: &Path) -> Result<(Series, Series), Failure> {
    let t = read_table(path)?;
    let (cd, cm, cr, cmean, cstd) = (
        t.column("depth", path)?,
        t.column("metric", path)?,
        t.column("representation", path)?,
        t.column("mean", path)?,
        t.column("std", path)?,
    );
    let mut trend = Series::new();
    let mut content = Series::new();
    for row in &t.rows {
        let depth: f64 = row[cd]
            .parse()
            .map_err(|_| Failure::input(format!("{}: bad depth `{}`", path.display(), row[cd])))?;
        let Some(mean) = parse_opt(&row[cmean], path)? else {
            continue;
        };
        let std = parse_opt(&row[cstd], path)?;
        let target = match row[cm].as_str() {
            "ccauc_gt1_fraction" | "granger_sig_fraction" => &mut trend,
            "tr_gt1_fraction" => &mut content,
            other => return Err(Failure::input(format!("{}: unknown metric `{other}`", path.display()))),
        };
        target
            .entry(format!("{} ({})", row[cm], row[cr]))
            .or_default()
            .push((depth, mean, std));
    }
    Ok((trend, content))
}

/// Renders every chart from the CSVs in `from`, then writes them to `out`.
pub fn render(from: &Path, out: &Path) -> Result<Vec<PathBuf>, Failure> {
    let fig5 = top_level_chart(&from.join(TOP_LEVEL_CSV))?;
    let (trend, content) = depth_series(&from.join(DEPTH_CSV))?;
    let mut charts = vec![("fig5_top_level_lag.svg", fig5)];
    if !trend.is_empty() {
        charts.push(("fig6_trend_by_depth.svg", depth_chart("Share of topics by depth: trend", &trend)));
    }
    if !content.is_empty() {
        charts.push(("fig7_content_by_depth.svg", depth_chart("Share of topics with tr > 1 by depth", &content)));
    }
    std::fs::create_dir_all(out).map_err(|e| Failure::input(format!("cannot create {}: {e}", out.display())))?;
    let mut written = Vec::new();
    for (name, svg) in charts {
        let path = out.join(name);
        std::fs::write(&path, svg).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
