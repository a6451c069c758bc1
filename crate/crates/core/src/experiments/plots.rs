//! Self-contained SVG plots: airflow radar, line series and attitude tracking.
//! Output depends only on the input bytes.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::sensing::{read_telemetry_from, TelemetryError, TelemetryRecord};

use super::scenario::write_text;
use super::ExperimentError;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f",
];
const DESIRED_COLOR: &str = "#2ca02c";
const ACTUAL_COLOR: &str = "#1f77b4";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Radar,
    Line,
    Tracking,
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "radar" => Ok(PlotKind::Radar),
            "line" => Ok(PlotKind::Line),
            "tracking" => Ok(PlotKind::Tracking),
            other => Err(format!("unknown plot kind `{other}` (radar|line|tracking)")),
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Plot(format!("{}:{line}: {message}", path.display()))
}

fn parse_number(path: &Path, line: usize, field: &str) -> Result<f64, ExperimentError> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_error(path, line, format!("`{field}` is not a finite number"))),
    }
}

/// Compact fixed-point coordinate.
fn c(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"{extra}/>"#,
            c(x1),
            c(y1),
            c(x2),
            c(y2)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            c(x),
            c(y),
            escape(text)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, closed: bool, extra: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", c(*x), c(*y))).collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            r#"<{tag} points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{extra}/>"#,
            pts.join(" ")
        );
    }

    fn legend(&mut self, x: f64, y: f64, entries: &[(String, String, bool)]) {
        for (i, (label, color, dashed)) in entries.iter().enumerate() {
            let yy = y + 16.0 * i as f64;
            let dash = if *dashed { r#" stroke-dasharray="6,3""# } else { "" };
            self.line(x, yy, x + 24.0, yy, color, &format!(r#" stroke-width="2"{dash}"#));
            self.text(x + 30.0, yy + 4.0, "start", 12, label);
        }
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<title>{t}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            t = escape(title),
            body = self.body
        )
    }
}

/// Round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn draw_axes(&self, svg: &mut Svg, xlabel: &str, ylabel: &str) {
        let grid = r##" stroke-width="0.5""##;
        for t in ticks(self.xr.0, self.xr.1) {
            let x = self.px(t);
            svg.line(x, self.y0, x, self.y0 + self.h, "#dddddd", grid);
            svg.text(x, self.y0 + self.h + 14.0, "middle", 10, &tick_label(t));
        }
        for t in ticks(self.yr.0, self.yr.1) {
            let y = self.py(t);
            svg.line(self.x0, y, self.x0 + self.w, y, "#dddddd", grid);
            svg.text(self.x0 - 6.0, y + 3.0, "end", 10, &tick_label(t));
        }
        let _ = writeln!(
            svg.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            c(self.x0),
            c(self.y0),
            c(self.w),
            c(self.h)
        );
        svg.text(self.x0 + self.w / 2.0, self.y0 + self.h + 30.0, "middle", 12, xlabel);
        let _ = writeln!(
            svg.body,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 {} {})">{}</text>"#,
            c(self.x0 - 40.0),
            c(self.y0 + self.h / 2.0),
            c(self.x0 - 40.0),
            c(self.y0 + self.h / 2.0),
            escape(ylabel)
        );
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        let pad = lo.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// Parses `variant,<axis labels...>` radar data.
pub fn parse_radar(text: &str, path: &Path) -> Result<(Vec<String>, Vec<RadarSeries>), ExperimentError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[0] != "variant" {
        return Err(parse_error(path, 1, "expected header `variant,<at least three axes>`"));
    }
    let axes: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
    let mut series = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(parse_error(
                path,
                i + 1,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let values = fields[1..]
            .iter()
            .map(|f| parse_number(path, i + 1, f))
            .collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| *v < 0.0) {
            return Err(parse_error(path, i + 1, "radar values must be non-negative"));
        }
        series.push(RadarSeries {
            name: fields[0].to_string(),
            values,
        });
    }
    if series.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    Ok((axes, series))
}

/// Vertex positions of one radar series; axis 0 points up, clockwise.
pub fn radar_vertices(values: &[f64], max: f64, cx: f64, cy: f64, radius: f64) -> Vec<(f64, f64)> {
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let angle = -FRAC_PI_2 + TAU * k as f64 / n;
            let r = radius * v / max;
            (cx + r * angle.cos(), cy + r * angle.sin())
        })
        .collect()
}

pub fn render_radar(axes: &[String], series: &[RadarSeries], title: &str) -> String {
    let mut svg = Svg::new(640.0, 520.0);
    let (cx, cy, radius) = (260.0, 270.0, 200.0);
    let max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0, f64::max);
    let max = if max > 0.0 { max } else { 1.0 };
    for ring in 1..=4 {
        let frac = ring as f64 / 4.0;
        let pts = radar_vertices(&vec![max * frac; axes.len()], max, cx, cy, radius);
        svg.polyline(&pts, "#cccccc", true, r#" stroke-dasharray="2,2""#);
        svg.text(cx + 4.0, cy - radius * frac - 2.0, "start", 9, &format!("{:.2}", max * frac));
    }
    let outer = radar_vertices(&vec![max; axes.len()], max, cx, cy, radius);
    let label_pos = radar_vertices(&vec![max * 1.1; axes.len()], max, cx, cy, radius);
    for ((x, y), ((lx, ly), name)) in outer.iter().zip(label_pos.iter().zip(axes)) {
        svg.line(cx, cy, *x, *y, "#999999", "");
        svg.text(*lx, *ly + 4.0, "middle", 12, name);
    }
    let mut legend = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = radar_vertices(&s.values, max, cx, cy, radius);
        svg.polyline(&pts, color, true, "");
        legend.push((s.name.clone(), color.to_string(), false));
    }
    svg.text(cx, 28.0, "middle", 16, title);
    svg.legend(500.0, 60.0, &legend);
    svg.finish(title)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Parses `series,x,y` rows, grouping by series in order of first appearance.
pub fn parse_line_data(text: &str, path: &Path) -> Result<Vec<LineSeries>, ExperimentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "series,x,y" => {}
        Some(_) => return Err(parse_error(path, 1, "expected header `series,x,y`")),
        None => return Err(parse_error(path, 1, "empty file")),
    }
    let mut out: Vec<LineSeries> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_error(path, i + 1, format!("expected 3 fields, found {}", fields.len())));
        }
        let point = (parse_number(path, i + 1, fields[1])?, parse_number(path, i + 1, fields[2])?);
        match out.iter_mut().find(|s| s.name == fields[0]) {
            Some(s) => s.points.push(point),
            None => out.push(LineSeries {
                name: fields[0].to_string(),
                points: vec![point],
            }),
        }
    }
    if out.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    Ok(out)
}

pub fn render_line(series: &[LineSeries], title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut svg = Svg::new(720.0, 460.0);
    let frame = Frame {
        x0: 80.0,
        y0: 50.0,
        w: 480.0,
        h: 340.0,
        xr: padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        yr: padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    frame.draw_axes(&mut svg, xlabel, ylabel);
    let mut legend = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().map(|(x, y)| (frame.px(*x), frame.py(*y))).collect();
        svg.polyline(&pts, color, false, "");
        for (x, y) in &pts {
            let _ = writeln!(svg.body, r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#, c(*x), c(*y));
        }
        legend.push((s.name.clone(), color.to_string(), false));
    }
    svg.text(360.0, 28.0, "middle", 16, title);
    svg.legend(580.0, 60.0, &legend);
    svg.finish(title)
}

/// Desired (green, dashed) and actual roll, pitch and yaw in three stacked
/// panels, in degrees against time.
pub fn render_tracking(log: &[TelemetryRecord], title: &str) -> String {
    let mut svg = Svg::new(760.0, 720.0);
    let names = ["Roll", "Pitch", "Yaw"];
    let t_range = padded_range(log.iter().map(|r| r.time));
    for (axis, name) in names.iter().enumerate() {
        let deg = |v: f64| v.to_degrees();
        let yr = padded_range(
            log.iter()
                .flat_map(|r| [deg(r.rpy_actual[axis]), deg(r.rpy_desired[axis])]),
        );
        let frame = Frame {
            x0: 90.0,
            y0: 50.0 + 220.0 * axis as f64,
            w: 600.0,
            h: 160.0,
            xr: t_range,
            yr,
        };
        frame.draw_axes(&mut svg, if axis == 2 { "time (s)" } else { "" }, &format!("{name} (deg)"));
        let actual: Vec<(f64, f64)> = log
            .iter()
            .map(|r| (frame.px(r.time), frame.py(deg(r.rpy_actual[axis]))))
            .collect();
        let desired: Vec<(f64, f64)> = log
            .iter()
            .map(|r| (frame.px(r.time), frame.py(deg(r.rpy_desired[axis]))))
            .collect();
        svg.polyline(&actual, ACTUAL_COLOR, false, "");
        svg.polyline(&desired, DESIRED_COLOR, false, r#" stroke-dasharray="6,3""#);
        svg.text(frame.x0 + frame.w / 2.0, frame.y0 - 6.0, "middle", 13, name);
    }
    svg.text(380.0, 24.0, "middle", 16, title);
    svg.legend(
        560.0,
        14.0,
        &[
            ("desired".into(), DESIRED_COLOR.into(), true),
            ("actual".into(), ACTUAL_COLOR.into(), false),
        ],
    );
    svg.finish(title)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into())
}

/// Renders one data file into SVG text.
pub fn render_plot(kind: PlotKind, data: &Path) -> Result<String, ExperimentError> {
    let text = std::fs::read_to_string(data)
        .map_err(|e| ExperimentError::Plot(format!("{}: {e}", data.display())))?;
    let title = stem(data);
    Ok(match kind {
        PlotKind::Radar => {
            let (axes, series) = parse_radar(&text, data)?;
            render_radar(&axes, &series, &title)
        }
        PlotKind::Line => {
            let series = parse_line_data(&text, data)?;
            render_line(&series, &title, "x", "y")
        }
        PlotKind::Tracking => {
            let log = read_telemetry_from(text.as_bytes()).map_err(|e| match e {
                TelemetryError::Parse { line, message } => parse_error(data, line as usize, message),
                other => ExperimentError::Plot(format!("{}: {other}", data.display())),
            })?;
            if log.is_empty() {
                return Err(parse_error(data, 2, "no data rows"));
            }
            render_tracking(&log, &title)
        }
    })
}

/// Renders each data file to `<out_dir>/<stem>.svg` and returns the paths.
pub fn emit_plots(kind: PlotKind, data: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for path in data {
        let svg = render_plot(kind, path)?;
        let target = out_dir.join(format!("{}.svg", stem(path)));
        write_text(&target, &svg)?;
        written.push(target);
    }
    Ok(written)
}
