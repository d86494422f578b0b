//! Hand-rolled SVG history plots: no raster or plotting dependencies.
//!
//! Two panels per figure — binary cross-entropy and accuracy on the held-out
//! set versus epoch — with one polyline per history and a shared legend.

use thiserror::Error;

use crate::learn::EpochRecord;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot: {0}")]
    Empty(String),
}

/// One labelled history curve.
#[derive(Debug, Clone)]
pub struct HistorySeries {
    pub label: String,
    pub records: Vec<EpochRecord>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_T: f64 = 46.0;
const GAP: f64 = 84.0;

struct Panel {
    x0: f64,
    title: &'static str,
    y_min: f64,
    y_max: f64,
    x_max: f64,
}

impl Panel {
    fn sx(&self, epoch: f64) -> f64 {
        self.x0 + (epoch - 1.0) / (self.x_max - 1.0).max(1.0) * PANEL_W
    }

    fn sy(&self, v: f64) -> f64 {
        MARGIN_T + PANEL_H - (v - self.y_min) / (self.y_max - self.y_min) * PANEL_H
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn draw_panel(
    out: &mut String,
    panel: &Panel,
    series: &[HistorySeries],
    value: impl Fn(&EpochRecord) -> f64,
) {
    let (x0, y0) = (panel.x0, MARGIN_T);
    out.push_str(&format!(
        "<rect x='{x0}' y='{y0}' width='{PANEL_W}' height='{PANEL_H}' fill='none' stroke='#333'/>\n"
    ));
    out.push_str(&format!(
        "<text x='{}' y='{}' text-anchor='middle' font-size='15' font-family='sans-serif'>{}</text>\n",
        x0 + PANEL_W / 2.0,
        y0 - 14.0,
        panel.title
    ));

    // y ticks
    let step = nice_step(panel.y_max - panel.y_min);
    let mut tick = (panel.y_min / step).ceil() * step;
    while tick <= panel.y_max + 1e-12 {
        let y = panel.sy(tick);
        out.push_str(&format!(
            "<line x1='{x0}' y1='{y}' x2='{}' y2='{y}' stroke='#ddd'/>\n",
            x0 + PANEL_W
        ));
        out.push_str(&format!(
            "<text x='{}' y='{}' text-anchor='end' font-size='11' font-family='sans-serif'>{}</text>\n",
            x0 - 6.0,
            y + 4.0,
            fmt(tick)
        ));
        tick += step;
    }
    // x ticks
    let xstep = nice_step(panel.x_max - 1.0).max(1.0);
    let mut tick = xstep;
    while tick <= panel.x_max + 1e-9 {
        let x = panel.sx(tick);
        out.push_str(&format!(
            "<line x1='{x}' y1='{}' x2='{x}' y2='{}' stroke='#333'/>\n",
            y0 + PANEL_H,
            y0 + PANEL_H + 4.0
        ));
        out.push_str(&format!(
            "<text x='{x}' y='{}' text-anchor='middle' font-size='11' font-family='sans-serif'>{}</text>\n",
            y0 + PANEL_H + 17.0,
            fmt(tick)
        ));
        tick += xstep;
    }
    out.push_str(&format!(
        "<text x='{}' y='{}' text-anchor='middle' font-size='12' font-family='sans-serif'>epoch</text>\n",
        x0 + PANEL_W / 2.0,
        y0 + PANEL_H + 34.0
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .records
            .iter()
            .map(|r| format!("{:.2},{:.2}", panel.sx(r.epoch as f64), panel.sy(value(r))))
            .collect();
        out.push_str(&format!(
            "<polyline fill='none' stroke='{color}' stroke-width='1.6' points='{}'/>\n",
            points.join(" ")
        ));
    }
}

/// Renders the two-panel figure. Series are drawn and listed in the given
/// order.
pub fn render_history_svg(series: &[HistorySeries]) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::Empty("no history files".into()));
    }
    for s in series {
        if s.records.is_empty() {
            return Err(PlotError::Empty(format!("history `{}` has no records", s.label)));
        }
    }
    let x_max = series
        .iter()
        .flat_map(|s| s.records.iter().map(|r| r.epoch))
        .max()
        .unwrap() as f64;
    let (mut loss_min, mut loss_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut acc_min, mut acc_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in series.iter().flat_map(|s| &s.records) {
        loss_min = loss_min.min(r.test_loss);
        loss_max = loss_max.max(r.test_loss);
        acc_min = acc_min.min(r.test_acc);
        acc_max = acc_max.max(r.test_acc);
    }
    let pad = |min: f64, max: f64| {
        let span = (max - min).max(1e-6);
        (min - 0.05 * span, max + 0.05 * span)
    };
    let (loss_min, loss_max) = pad(loss_min.min(0.0), loss_max);
    let (acc_min, acc_max) = pad(acc_min, acc_max.max(acc_min + 1e-3));

    let total_w = MARGIN_L + PANEL_W + GAP + PANEL_W + 30.0;
    let total_h = MARGIN_T + PANEL_H + 50.0 + 18.0 * series.len() as f64;
    let mut out = format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{total_w}' height='{total_h}' viewBox='0 0 {total_w} {total_h}'>\n<rect width='100%' height='100%' fill='white'/>\n"
    );

    let loss_panel = Panel {
        x0: MARGIN_L,
        title: "Binary cross-entropy (test)",
        y_min: loss_min,
        y_max: loss_max,
        x_max,
    };
    draw_panel(&mut out, &loss_panel, series, |r| r.test_loss);

    let acc_panel = Panel {
        x0: MARGIN_L + PANEL_W + GAP,
        title: "Accuracy (test)",
        y_min: acc_min,
        y_max: acc_max,
        x_max,
    };
    draw_panel(&mut out, &acc_panel, series, |r| r.test_acc);

    // legend below the panels
    let ly = MARGIN_T + PANEL_H + 46.0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = ly + 18.0 * i as f64;
        out.push_str(&format!(
            "<line x1='{MARGIN_L}' y1='{y}' x2='{}' y2='{y}' stroke='{color}' stroke-width='2'/>\n",
            MARGIN_L + 26.0
        ));
        out.push_str(&format!(
            "<text x='{}' y='{}' font-size='12' font-family='sans-serif'>{}</text>\n",
            MARGIN_L + 32.0,
            y + 4.0,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
