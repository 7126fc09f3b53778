//! Report output: an RFC-4180 CSV of benchmark cells and a standalone SVG
//! line chart of micro-F1 against author count.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::RunReport;

/// The exact CSV column set, in order.
pub const CSV_HEADER: &str = "method,dataset,authors,micro_f1,train_s,predict_ms,seed";

/// A parsed CSV row, mirroring the emitted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    pub authors: usize,
    pub micro_f1: f64,
    pub train_s: f64,
    pub predict_ms: f64,
    pub seed: u64,
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') || raw.contains('\r') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Renders the CSV, one row per report. Failed cells carry NaN scores.
pub fn render_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_field(&r.method));
        out.push(',');
        out.push_str(&csv_field(&r.dataset));
        out.push(',');
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.authors, r.micro_f1, r.train_s, r.predict_ms, r.seed
        ));
    }
    out
}

/// Parses a report CSV back into rows, honoring RFC-4180 quoting. The
/// header line is validated byte for byte.
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut records = split_records(text);
    if records.is_empty() {
        return Err(Error::InvalidParameter("report CSV is empty".into()));
    }
    let header = records.remove(0);
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidParameter(format!(
            "unexpected report header {:?}",
            header.join(",")
        )));
    }
    let mut rows = Vec::with_capacity(records.len());
    for (i, fields) in records.iter().enumerate() {
        if fields.len() != 7 {
            return Err(Error::InvalidParameter(format!(
                "report row {} has {} fields, expected 7",
                i + 2,
                fields.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!("report row {}: bad {what} {s:?}", i + 2))
            })
        };
        rows.push(ReportRow {
            method: fields[0].clone(),
            dataset: fields[1].clone(),
            authors: num(&fields[2], "author count")? as usize,
            micro_f1: num(&fields[3], "micro_f1")?,
            train_s: num(&fields[4], "train_s")?,
            predict_ms: num(&fields[5], "predict_ms")?,
            seed: num(&fields[6], "seed")? as u64,
        });
    }
    Ok(rows)
}

fn split_records(text: &str) -> Vec<Vec<String>> {
    let mut records = Vec::new();
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    let mut any = false;
    while let Some(c) = chars.next() {
        any = true;
        if quoted {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => quoted = false,
                _ => field.push(c),
            }
        } else {
            match c {
                '"' => quoted = true,
                ',' => fields.push(std::mem::take(&mut field)),
                '\r' => {}
                '\n' => {
                    fields.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut fields));
                }
                _ => field.push(c),
            }
        }
    }
    if any && (!field.is_empty() || !fields.is_empty()) {
        fields.push(field);
        records.push(fields);
    }
    records
}

const PLOT_COLORS: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    "#bcbd22",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 46.0;

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a standalone SVG line chart: micro-F1 (y, fixed 0..1) against
/// author count (x), one polyline per method in first-appearance order.
/// Failed cells (NaN) are left out of their line.
pub fn render_svg(reports: &[RunReport]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut counts: Vec<usize> = reports.iter().map(|r| r.authors).collect();
    counts.sort_unstable();
    counts.dedup();
    let (x_min, x_max) = match (counts.first(), counts.last()) {
        (Some(&lo), Some(&hi)) => (lo as f64, hi as f64),
        _ => (0.0, 1.0),
    };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |authors: f64| MARGIN_LEFT + (authors - x_min) / x_span * plot_w;
    let y_of = |f1: f64| MARGIN_TOP + (1.0 - f1) * plot_h;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        b = MARGIN_TOP + plot_h,
        r = MARGIN_LEFT + plot_w
    ));
    // Y ticks at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let f1 = i as f64 / 4.0;
        let y = y_of(f1);
        svg.push_str(&format!(
            "  <line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{x1}\" y2=\"{y:.2}\" stroke=\"#cccccc\"/>\n",
            x0 = MARGIN_LEFT,
            x1 = MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{x}\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"end\" \
             dominant-baseline=\"middle\" font-family=\"sans-serif\">{f1:.2}</text>\n",
            x = MARGIN_LEFT - 8.0
        ));
    }
    // X ticks at each observed author count.
    for &n in &counts {
        let x = x_of(n as f64);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{y1}\" stroke=\"black\"/>\n",
            y0 = MARGIN_TOP + plot_h,
            y1 = MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{y}\" font-size=\"12\" text-anchor=\"middle\" \
             font-family=\"sans-serif\">{n}</text>\n",
            y = MARGIN_TOP + plot_h + 20.0
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{x:.2}\" y=\"{y}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">authors</text>\n",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 8.0
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{y:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 16 {y:.2})\">micro-F1</text>\n",
        y = MARGIN_TOP + plot_h / 2.0
    ));
    // One line per method.
    for (mi, method) in methods.iter().enumerate() {
        let color = PLOT_COLORS[mi % PLOT_COLORS.len()];
        let mut points: Vec<(usize, f64)> = reports
            .iter()
            .filter(|r| r.method == *method && r.micro_f1.is_finite())
            .map(|r| (r.authors, r.micro_f1))
            .collect();
        points.sort_unstable_by_key(|&(n, _)| n);
        let coords: Vec<String> = points
            .iter()
            .map(|&(n, f1)| format!("{:.2},{:.2}", x_of(n as f64), y_of(f1)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
        for &(n, f1) in &points {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                x_of(n as f64),
                y_of(f1)
            ));
        }
        // Legend entry.
        let ly = MARGIN_TOP + 14.0 + mi as f64 * 18.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            lx + 18.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{ly:.2}\" font-size=\"12\" dominant-baseline=\"middle\" \
             font-family=\"sans-serif\">{}</text>\n",
            lx + 24.0,
            xml_escape(method)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the CSV and SVG files for a finished run.
pub fn emit_report(
    reports: &[RunReport],
    csv_path: impl AsRef<Path>,
    svg_path: impl AsRef<Path>,
) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let csv_path = csv_path.as_ref();
    let svg_path = svg_path.as_ref();
    std::fs::write(csv_path, render_csv(reports)).map_err(|e| Error::io(csv_path, e))?;
    std::fs::write(svg_path, render_svg(reports)).map_err(|e| Error::io(svg_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(method: &str, authors: usize, micro: f64) -> RunReport {
        RunReport {
            method: method.into(),
            dataset: "unit".into(),
            authors,
            micro_f1: micro,
            macro_f1: micro,
            train_s: 1.25,
            predict_ms: 40.0,
            seed: 9,
            failed: micro.is_nan(),
            error: None,
            config: serde_json::json!({"method": method}),
        }
    }

    #[test]
    fn header_is_exact() {
        let csv = render_csv(&[report("scap", 5, 0.75)]);
        assert!(csv.starts_with("method,dataset,authors,micro_f1,train_s,predict_ms,seed\n"));
    }

    #[test]
    fn csv_round_trips() {
        let reports = vec![
            report("scap", 5, 0.75),
            report("svm-stems", 5, 2.0 / 3.0),
            report("scap", 10, 0.5),
        ];
        let rows = parse_csv(&render_csv(&reports)).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, r) in rows.iter().zip(&reports) {
            assert_eq!(row.method, r.method);
            assert_eq!(row.dataset, r.dataset);
            assert_eq!(row.authors, r.authors);
            assert_eq!(row.micro_f1, r.micro_f1);
            assert_eq!(row.train_s, r.train_s);
            assert_eq!(row.predict_ms, r.predict_ms);
            assert_eq!(row.seed, r.seed);
        }
    }

    #[test]
    fn awkward_names_are_quoted_and_recovered() {
        let mut r = report("scap", 2, 0.5);
        r.method = "odd,name \"x\"".into();
        r.dataset = "line\nbreak".into();
        let csv = render_csv(&[r.clone()]);
        let rows = parse_csv(&csv).unwrap();
        assert_eq!(rows[0].method, r.method);
        assert_eq!(rows[0].dataset, r.dataset);
    }

    #[test]
    fn failed_cells_render_nan() {
        let csv = render_csv(&[report("scap", 2, f64::NAN)]);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.contains("NaN"), "line was {line}");
        let rows = parse_csv(&csv).unwrap();
        assert!(rows[0].micro_f1.is_nan());
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(parse_csv("a,b,c\n1,2,3\n").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_method_with_all_points() {
        let reports = vec![
            report("scap", 2, 0.9),
            report("svm-stems", 2, 0.8),
            report("scap", 5, 0.7),
            report("svm-stems", 5, 0.6),
            report("scap", 10, 0.5),
            report("svm-stems", 10, 0.4),
        ];
        let svg = render_svg(&reports);
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        for line in svg.lines().filter(|l| l.contains("<polyline")) {
            let points = line.split("points=\"").nth(1).unwrap();
            let points = points.split('"').next().unwrap();
            assert_eq!(points.split_whitespace().count(), 3, "line was {line}");
        }
        assert!(svg.contains(">authors<"));
        assert!(svg.contains(">micro-F1<"));
        assert!(svg.contains(">scap<"));
        assert!(svg.contains(">svm-stems<"));
    }

    #[test]
    fn nan_points_are_dropped_from_lines() {
        let reports = vec![
            report("scap", 2, 0.9),
            report("scap", 5, f64::NAN),
            report("scap", 10, 0.5),
        ];
        let svg = render_svg(&reports);
        let line = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split_whitespace().count(), 2);
    }

    #[test]
    fn emit_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("report.csv");
        let svg = dir.path().join("report.svg");
        emit_report(&[report("scap", 3, 0.5)], &csv, &svg).unwrap();
        assert!(parse_csv(&std::fs::read_to_string(&csv).unwrap()).is_ok());
        let svg_text = std::fs::read_to_string(&svg).unwrap();
        assert!(svg_text.contains("</svg>"));
        assert!(emit_report(&[], &csv, &svg).is_err());
    }
}
