//! SVG plots drawn from CSV files, so archived runs can be re-plotted.
//!
//! Output is a pure function of the input rows: fixed canvas, fixed number
//! formatting, series in first-appearance order.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{MatrixKind, Partition};
use crate::harness::config::Experiment;
use crate::harness::record::{parse_float, read_records, summarize, ExperimentRecord};
use crate::harness::run::{EmbedDump, GridCell, CELL_COLUMNS};
use crate::theory::{pbar_max, pbar_thr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Lines,
    Heatmap,
    Embed,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lines" => Ok(PlotKind::Lines),
            "heatmap" => Ok(PlotKind::Heatmap),
            "embed" => Ok(PlotKind::Embed),
            other => Err(Error::Parse(format!("unknown plot kind '{other}'"))),
        }
    }
}

/// Reads `csv_path`, renders `kind`, writes the SVG to `out`.
pub fn emit_plots(csv_path: &Path, kind: PlotKind, out: &Path) -> Result<PathBuf> {
    let svg = match kind {
        PlotKind::Lines => render_lines(&read_records(File::open(csv_path)?)?)?,
        PlotKind::Heatmap => {
            let (n, pbar, cells) = read_cells(&fs::read_to_string(csv_path)?)?;
            render_heatmap(n, pbar, &cells)?
        }
        PlotKind::Embed => render_embed(&read_embed_dump(&fs::read_to_string(csv_path)?)?)?,
    };
    fs::write(out, svg)?;
    Ok(out.to_path_buf())
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn matrix_color(m: MatrixKind) -> &'static str {
    match m {
        MatrixKind::UnnormalizedLaplacian => PALETTE[0],
        MatrixKind::SymNormalizedLaplacian => PALETTE[1],
        MatrixKind::RwNormalizedLaplacian => PALETTE[2],
        MatrixKind::Adjacency => PALETTE[3],
    }
}

/// Linear map from data range to pixel range.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
            (lo - pad, hi + pad)
        };
        Axis { lo, hi, from, to }
    }

    fn map(&self, x: f64) -> f64 {
        self.from + (x - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(out, "<text x=\"{:.2}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>", W / 2.0, escape(title)).unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, x: &Axis, y: &Axis, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (x.from, x.to, y.to, y.from);
    writeln!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x.lo + t * (x.hi - x.lo);
        let px = x.map(xv);
        writeln!(out, "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", y1 + 16.0, tick(xv)).unwrap();
        let yv = y.lo + t * (y.hi - y.lo);
        let py = y.map(yv);
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x0 - 6.0, py + 4.0, tick(yv)).unwrap();
    }
    writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, y1 + 36.0, escape(xlabel)).unwrap();
    writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 || v == 0.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

/// Mean agreement against `pbar` (vary-pbar), clique size (clique-sweep) or
/// `p` (anything else), one series per matrix and cut. Vary-pbar plots carry
/// two vertical markers: `pbar_thr` solid, `pbar_max` dashed.
pub fn render_lines(records: &[ExperimentRecord]) -> Result<String> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no records to plot".into()))?;
    let experiment = first.experiment;
    let xval = |r: &crate::harness::record::SummaryRow| -> Result<f64> {
        match experiment {
            Experiment::VaryPbar => r.pbar.ok_or_else(|| Error::Schema("vary-pbar row without pbar".into())),
            Experiment::CliqueSweep => r.param.ok_or_else(|| Error::Schema("clique row without param".into())),
            _ => Ok(r.p),
        }
    };
    let rows = summarize(records);
    let mut series: Vec<(MatrixKind, crate::bisection::CutRule, Vec<(f64, f64)>)> = Vec::new();
    for r in &rows {
        let pt = (xval(r)?, r.mean_agreement);
        match series.iter_mut().find(|(m, c, _)| *m == r.matrix && *c == r.cut) {
            Some((_, _, pts)) => pts.push(pt),
            None => series.push((r.matrix, r.cut, vec![pt])),
        }
    }
    for (_, _, pts) in &mut series {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let markers: Vec<(f64, &str)> = if experiment == Experiment::VaryPbar {
        vec![
            (pbar_thr(first.p, first.q), "marker marker-thr"),
            (pbar_max(first.n, first.p, first.q), "marker marker-max"),
        ]
    } else {
        Vec::new()
    };
    let mut xs: Vec<f64> = series.iter().flat_map(|(_, _, p)| p.iter().map(|q| q.0)).collect();
    xs.extend(markers.iter().map(|m| m.0).filter(|x| x.is_finite()));
    let xlo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xhi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ylo = rows.iter().map(|r| r.mean_agreement).fold(0.5, f64::min).min(0.4);
    let x = Axis::new(xlo, xhi, LEFT, W - RIGHT);
    let y = Axis::new(ylo, 1.0, H - BOTTOM, TOP);

    let xlabel = match experiment {
        Experiment::VaryPbar => "pbar",
        Experiment::CliqueSweep => "clique size",
        _ => "p",
    };
    let mut out = String::new();
    header(
        &mut out,
        &format!("{experiment}: mean agreement (n = {}, p = {:.4}, q = {:.4})", first.n, first.p, first.q),
    );
    frame(&mut out, &x, &y, xlabel, "mean agreement");
    for (xm, class) in &markers {
        if !xm.is_finite() {
            continue;
        }
        let px = x.map(*xm);
        let dash = if class.ends_with("max") { " stroke-dasharray=\"6 4\"" } else { "" };
        writeln!(
            out,
            "<line class=\"{class}\" x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"{dash}/>",
            TOP,
            H - BOTTOM
        )
        .unwrap();
    }
    for (i, (m, c, pts)) in series.iter().enumerate() {
        let color = matrix_color(*m);
        let dash = if *c == crate::bisection::CutRule::Sweep { " stroke-dasharray=\"4 3\"" } else { "" };
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(a, b)| format!("{:.2},{:.2}", x.map(*a), y.map(*b))).collect();
            writeln!(
                out,
                "<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
                path.join(" ")
            )
            .unwrap();
        }
        for (a, b) in pts {
            writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", x.map(*a), y.map(*b)).unwrap();
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            lx + 22.0
        )
        .unwrap();
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{} {}</text>", lx + 28.0, ly + 4.0, m.short_name(), c.name()).unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Parses a cells file; returns `(n, pbar, cells)`.
pub fn read_cells(text: &str) -> Result<(usize, f64, Vec<GridCell>)> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CELL_COLUMNS.iter().copied()) {
        return Err(Error::Schema("not a cells file".into()));
    }
    let mut n = 0;
    let mut pbar = f64::NAN;
    let mut cells = Vec::new();
    for row in r.records() {
        let row = row?;
        n = row[0].parse().map_err(|_| Error::Schema(format!("bad n '{}'", &row[0])))?;
        pbar = parse_float(&row[1])?;
        cells.push(GridCell {
            p: parse_float(&row[2])?,
            q: parse_float(&row[3])?,
            valid: &row[4] == "1",
            mean_agreement: parse_float(&row[5])?,
            p_thr: parse_float(&row[6])?,
            p_info: parse_float(&row[7])?,
        });
    }
    if cells.is_empty() {
        return Err(Error::InvalidArgument("no cells to plot".into()));
    }
    Ok((n, pbar, cells))
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn heat_color(a: f64) -> String {
    let t = a.clamp(0.0, 1.0);
    let lerp = |x: f64, y: f64| (x + (y - x) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

/// Agreement heatmap over `(q, p)` with the `p_thr(q)` curve solid and the
/// `p_info(q)` curve dashed.
pub fn render_heatmap(n: usize, pbar: f64, cells: &[GridCell]) -> Result<String> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("no cells to plot".into()));
    }
    let ps = sorted_unique(cells.iter().map(|c| c.p).collect());
    let qs = sorted_unique(cells.iter().map(|c| c.q).collect());
    let half = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]) / 2.0 } else { 0.5 * v[0].abs().max(1e-3) };
    let (hp, hq) = (half(&ps), half(&qs));
    let x = Axis::new(qs[0] - hq, qs[qs.len() - 1] + hq, LEFT, W - RIGHT);
    let y = Axis::new(ps[0] - hp, ps[ps.len() - 1] + hp, H - BOTTOM, TOP);
    let mut out = String::new();
    header(&mut out, &format!("unnormalized L zero-cut agreement (n = {n}, pbar = {pbar:.3})"));
    for c in cells {
        let (x0, x1) = (x.map(c.q - hq), x.map(c.q + hq));
        let (y0, y1) = (y.map(c.p + hp), y.map(c.p - hp));
        writeln!(
            out,
            "<rect class=\"cell\" x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            x1 - x0,
            y1 - y0,
            heat_color(c.mean_agreement)
        )
        .unwrap();
    }
    frame(&mut out, &x, &y, "q", "p");
    let mut by_q: Vec<&GridCell> = Vec::new();
    for q in &qs {
        if let Some(c) = cells.iter().find(|c| c.q == *q) {
            by_q.push(c);
        }
    }
    for (class, dash, value) in [
        ("overlay overlay-thr", "", (|c: &GridCell| c.p_thr) as fn(&GridCell) -> f64),
        ("overlay overlay-info", " stroke-dasharray=\"6 4\"", |c: &GridCell| c.p_info),
    ] {
        let pts: Vec<String> = by_q
            .iter()
            .filter(|c| value(c) <= y.hi)
            .map(|c| format!("{:.2},{:.2}", x.map(c.q), y.map(value(c))))
            .collect();
        if !pts.is_empty() {
            writeln!(
                out,
                "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"white\" stroke-width=\"2\"{dash}/>",
                pts.join(" ")
            )
            .unwrap();
        }
    }
    // Color bar.
    for i in 0..10 {
        let a = i as f64 / 9.0;
        writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"18\" height=\"18\" fill=\"{}\"/>",
            W - RIGHT + 16.0,
            TOP + 18.0 * (9 - i) as f64,
            heat_color(a)
        )
        .unwrap();
    }
    writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">1.0</text>", W - RIGHT + 40.0, TOP + 13.0).unwrap();
    writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">0.0</text>", W - RIGHT + 40.0, TOP + 175.0).unwrap();
    writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">solid: p_thr(q)</text>", W - RIGHT + 16.0, TOP + 210.0).unwrap();
    writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">dashed: p_info(q)</text>", W - RIGHT + 16.0, TOP + 226.0).unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

/// Parses an embedding file written by the embed-dump experiment.
pub fn read_embed_dump(text: &str) -> Result<EmbedDump> {
    let body = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "vertex" || &header[1] != "planted_label" {
        return Err(Error::Schema("not an embedding file".into()));
    }
    let matrices: Vec<MatrixKind> = header
        .iter()
        .skip(2)
        .map(|h| h.parse().map_err(|e: Error| Error::Schema(e.to_string())))
        .collect::<Result<_>>()?;
    let mut labels = Vec::new();
    let mut columns = vec![Vec::new(); matrices.len()];
    for row in r.records() {
        let row = row?;
        if row.len() != header.len() {
            return Err(Error::Schema("ragged embedding row".into()));
        }
        labels.push(row[1].parse::<u8>().map_err(|_| Error::Schema(format!("bad label '{}'", &row[1])))?);
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(parse_float(&row[j + 2])?);
        }
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no embedding rows to plot".into()));
    }
    Ok(EmbedDump {
        planted: Partition::new(labels).map_err(|e| Error::Schema(e.to_string()))?,
        matrices,
        columns,
    })
}

/// One panel per matrix: vertex index against its entry, colored by planted
/// side, with dashed reference lines at `1/√n`, 0 and `-1/√n`.
pub fn render_embed(dump: &EmbedDump) -> Result<String> {
    let n = dump.planted.len();
    if n == 0 || dump.columns.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let r = 1.0 / (n as f64).sqrt();
    let panels = dump.columns.len();
    let mut out = String::new();
    header(&mut out, &format!("second-eigenvector embedding (n = {n})"));
    let panel_w = (W - LEFT - 20.0) / panels as f64;
    for (j, (m, col)) in dump.matrices.iter().zip(&dump.columns).enumerate() {
        let lim = col.iter().fold(r, |a, v| a.max(v.abs())) * 1.1;
        let x0 = LEFT + j as f64 * panel_w;
        let x = Axis::new(0.0, (n - 1).max(1) as f64, x0 + 6.0, x0 + panel_w - 6.0);
        let y = Axis::new(-lim, lim, H - BOTTOM, TOP);
        writeln!(
            out,
            "<rect x=\"{x0:.2}\" y=\"{TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
            panel_w,
            H - BOTTOM - TOP
        )
        .unwrap();
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", x0 + panel_w / 2.0, H - BOTTOM + 18.0, m.short_name()).unwrap();
        for level in [r, 0.0, -r] {
            let py = y.map(level);
            writeln!(
                out,
                "<line class=\"reference\" x1=\"{x0:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"gray\" stroke-dasharray=\"5 4\"/>",
                x0 + panel_w
            )
            .unwrap();
        }
        for (v, val) in col.iter().enumerate() {
            let color = if dump.planted.side(v) == 0 { PALETTE[0] } else { PALETTE[1] };
            writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"{color}\"/>", x.map(v as f64), y.map(*val)).unwrap();
        }
    }
    writeln!(out, "<text x=\"{LEFT:.2}\" y=\"{:.2}\">dashed: 1/sqrt(n), 0, -1/sqrt(n)</text>", H - 8.0).unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}
