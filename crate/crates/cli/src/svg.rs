//! Minimal native SVG line charts. Figures are for eyeballing only; the
//! CSV is the contract.

/// One named line of (x, y) points.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 54.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Render a log10-y line chart. Y values at or below `y_floor` are clamped.
pub fn log_y_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    y_floor: f64,
) -> Vec<u8> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(x);
            ys.push(y.max(y_floor).log10());
        }
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(1e-300) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0).max(1e-300) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    // Axes.
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n",
        W / 2.0,
        H - 14.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label} (log10)</text>\n",
        H / 2.0,
        H / 2.0
    ));
    // Decade gridlines.
    let mut dec = y0.ceil() as i64;
    while (dec as f64) <= y1 {
        let y = py(dec as f64);
        out.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{y:.2}\" x2=\"{r}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n<text x=\"{lx}\" y=\"{ty:.2}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">1e{dec}</text>\n",
            m = MARGIN,
            r = W - MARGIN,
            lx = MARGIN - 6.0,
            ty = y + 3.0
        ));
        dec += 1;
    }
    // X ticks at the ends.
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"{anchor}\">{x:.2}</text>\n",
            px(x),
            H - MARGIN + 16.0
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y.max(y_floor).log10())))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            W - MARGIN - 180.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_valid_svg_deterministically() {
        let s = vec![Series {
            label: "a".into(),
            points: vec![(1.0, 1e-2), (2.0, 1e-4)],
        }];
        let a = log_y_chart("t", "x", "y", &s, 1e-9);
        let b = log_y_chart("t", "x", "y", &s, 1e-9);
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("polyline"));
        assert!(text.trim_end().ends_with("</svg>"));
    }
}
