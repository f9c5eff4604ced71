//! Rendering of an envelope as CSV, SVG or TikZ.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::CurveKind;
use crate::envelope::{Gap, Segment};
use crate::error::{Error, Result};
use crate::quad::rational_to_f64;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;
/// Samples of the dashed `√(1 − t²)` arc.
const ARC_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlotFormat {
    Csv,
    Svg,
    Tikz,
}

impl PlotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            PlotFormat::Csv => "csv",
            PlotFormat::Svg => "svg",
            PlotFormat::Tikz => "tex",
        }
    }
}

impl FromStr for PlotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(PlotFormat::Csv),
            "svg" => Ok(PlotFormat::Svg),
            "tikz" | "tex" => Ok(PlotFormat::Tikz),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Renders segments and gaps in the named format.
pub fn emit_plot(segments: &[Segment], gaps: &[Gap], format: &str) -> Result<Vec<u8>> {
    Ok(match format.parse::<PlotFormat>()? {
        PlotFormat::Csv => csv_bytes(segments, gaps),
        PlotFormat::Svg => svg(segments, gaps).into_bytes(),
        PlotFormat::Tikz => tikz(segments).into_bytes(),
    })
}

fn num(x: f64) -> String {
    format!("{x:.12}")
}

fn kind_name(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Elliptic => "elliptic",
        CurveKind::Ample => "ample",
    }
}

fn csv_bytes(segments: &[Segment], gaps: &[Gap]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, row: &[String]| w.write_record(row).expect("in-memory write");
    let header = ["t_lo", "t_hi", "eps_lo", "eps_hi", "kind", "class", "ell", "k", "certified"];
    write(&mut w, &header.map(String::from));
    for s in segments {
        let opt = |v: &Option<num_bigint::BigInt>| v.as_ref().map(ToString::to_string).unwrap_or_default();
        write(
            &mut w,
            &[
                num(s.t_lo.to_f64()),
                num(s.t_hi.to_f64()),
                num(s.eps_lo.to_f64()),
                num(s.eps_hi.to_f64()),
                kind_name(s.curve.kind).to_string(),
                s.curve.cls.to_string(),
                opt(&s.curve.ell),
                opt(&s.curve.k),
                s.certified.to_string(),
            ],
        );
    }
    for g in gaps {
        write(&mut w, &["gap".to_string(), num(rational_to_f64(&g.lo)), num(rational_to_f64(&g.hi))]);
    }
    w.into_inner().expect("in-memory flush")
}

fn to_px(t: f64, eps: f64) -> (f64, f64) {
    let x = MARGIN + (t + 1.0) / 2.0 * (WIDTH - 2.0 * MARGIN);
    let y = HEIGHT - MARGIN - eps / 1.1 * (HEIGHT - 2.0 * MARGIN);
    (x, y)
}

fn arc() -> Vec<(f64, f64)> {
    (0..=ARC_SAMPLES)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / ARC_SAMPLES as f64;
            (t, (1.0 - t * t).max(0.0).sqrt())
        })
        .collect()
}

fn svg(segments: &[Segment], gaps: &[Gap]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0) = to_px(-1.0, 0.0);
    let (x1, _) = to_px(1.0, 0.0);
    let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#);
    for g in gaps {
        let (a, _) = to_px(rational_to_f64(&g.lo), 0.0);
        let (b, top) = to_px(rational_to_f64(&g.hi), 1.1);
        let _ = writeln!(
            out,
            r#"<rect x="{a:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="red" fill-opacity="0.2"/>"#,
            (b - a).max(0.5),
            y0 - top
        );
    }
    let pts: Vec<String> = arc()
        .into_iter()
        .map(|(t, e)| {
            let (x, y) = to_px(t, e);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="6,4"/>"#,
        pts.join(" ")
    );
    for s in segments {
        let (xa, ya) = to_px(s.t_lo.to_f64(), s.eps_lo.to_f64());
        let (xb, yb) = to_px(s.t_hi.to_f64(), s.eps_hi.to_f64());
        let colour = if s.certified { "black" } else { "blue" };
        let _ = writeln!(
            out,
            r#"<line x1="{xa:.2}" y1="{ya:.2}" x2="{xb:.2}" y2="{yb:.2}" stroke="{colour}" stroke-width="2"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tikz(segments: &[Segment]) -> String {
    let mut out = String::from("\\begin{tikzpicture}[scale=4]\n");
    let arc: Vec<String> = arc().into_iter().map(|(t, e)| format!("({t:.4},{e:.4})")).collect();
    let _ = writeln!(out, "\\draw[dashed] {};", arc.join(" -- "));
    let _ = writeln!(out, "\\draw[->] (-1.05,0) -- (1.1,0) node[right] {{$t$}};");
    // Consecutive segments sharing an endpoint are joined into one path.
    let mut paths: Vec<Vec<(f64, f64)>> = Vec::new();
    for s in segments {
        let a = (s.t_lo.to_f64(), s.eps_lo.to_f64());
        let b = (s.t_hi.to_f64(), s.eps_hi.to_f64());
        match paths.last_mut() {
            Some(path) if path.last().is_some_and(|&p| p == a) => path.push(b),
            _ => paths.push(vec![a, b]),
        }
    }
    for path in paths {
        let coords: Vec<String> = path.iter().map(|(t, e)| format!("({t:.6},{e:.6})")).collect();
        let _ = writeln!(out, "\\draw[thick] {};", coords.join(" -- "));
    }
    out.push_str("\\end{tikzpicture}\n");
    out
}
