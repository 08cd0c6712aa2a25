//! Minimal self-contained SVG line plots for sweep tables. Deliberately
//! tiny: axes, tick labels, one polyline per column, and a legend — enough
//! to eyeball a sweep without pulling in a plotting stack.

use crate::search::SweepTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn fmt2(x: f64) -> String {
    format!("{:.2}", x)
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{:.4}", x);
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{:.2e}", x)
    }
}

/// Renders the table as a line plot, one series per value column. Rows or
/// cells that are NaN are simply skipped.
pub fn render_sweep_svg(table: &SweepTable, title: &str) -> String {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.param).collect();
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    for &x in &xs {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
    }
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for row in &table.rows {
        for &v in &row.values {
            if v.is_finite() {
                ymin = ymin.min(v);
                ymax = ymax.max(v);
            }
        }
    }
    if !(xmin.is_finite() && xmax.is_finite()) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if !(ymin.is_finite() && ymax.is_finite()) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin).abs() < 1e-300 {
        xmax = xmin + 1.0;
    }
    if (ymax - ymin).abs() < 1e-300 {
        ymax = ymin + 1.0;
    }
    // A little headroom.
    let ypad = 0.05 * (ymax - ymin);
    let (ymin, ymax) = (ymin - ypad, ymax + ypad);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = WIDTH,
        h = HEIGHT
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        title
    ));

    // Axes box.
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        fmt2(MARGIN_L),
        fmt2(MARGIN_T),
        fmt2(plot_w),
        fmt2(plot_h)
    ));

    // Ticks: 5 per axis.
    for i in 0..=4 {
        let fx = xmin + (xmax - xmin) * i as f64 / 4.0;
        let fy = ymin + (ymax - ymin) * i as f64 / 4.0;
        s.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"black\"/>\n",
            x = fmt2(px(fx)),
            y0 = fmt2(MARGIN_T + plot_h),
            y1 = fmt2(MARGIN_T + plot_h + 5.0)
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt2(px(fx)),
            fmt2(MARGIN_T + plot_h + 18.0),
            fmt_tick(fx)
        ));
        s.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"black\"/>\n",
            x0 = fmt2(MARGIN_L - 5.0),
            x1 = fmt2(MARGIN_L),
            y = fmt2(py(fy))
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt2(MARGIN_L - 8.0),
            fmt2(py(fy) + 4.0),
            fmt_tick(fy)
        ));
    }

    // Series.
    for (ci, name) in table.columns.iter().enumerate() {
        let color = SERIES_COLORS[ci % SERIES_COLORS.len()];
        let mut points = Vec::new();
        for row in &table.rows {
            let v = row.values[ci];
            if v.is_finite() {
                points.push(format!("{},{}", fmt2(px(row.param)), fmt2(py(v))));
            }
        }
        if points.len() >= 2 {
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                points.join(" "),
                color
            ));
        }
        for p in &points {
            let (x, y) = p.split_once(',').expect("formatted point");
            s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>\n",
                x, y, color
            ));
        }
        // Legend entry.
        let ly = MARGIN_T + 14.0 + 18.0 * ci as f64;
        s.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"{c}\" stroke-width=\"1.5\"/>\n",
            x0 = fmt2(WIDTH - MARGIN_R + 10.0),
            x1 = fmt2(WIDTH - MARGIN_R + 34.0),
            y = fmt2(ly),
            c = color
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt2(WIDTH - MARGIN_R + 40.0),
            fmt2(ly + 4.0),
            name
        ));
    }
    s.push_str("</svg>\n");
    s
}
