//! Minimal SVG 1.1 emission: curve plots and scalar heatmaps.

/// Render polylines (one per curve) autoscaled into a square viewport.
pub fn curves_svg(curves: &[Vec<(f64, f64)>], width: u32, height: u32) -> String {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in c {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        xmin = -1.0;
        xmax = 1.0;
        ymin = -1.0;
        ymax = 1.0;
    }
    let pad = 0.05 * ((xmax - xmin).max(ymax - ymin).max(1e-9));
    xmin -= pad;
    xmax += pad;
    ymin -= pad;
    ymax += pad;
    let sx = width as f64 / (xmax - xmin);
    let sy = height as f64 / (ymax - ymin);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (i, c) in curves.iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, &(x, y)) in c.iter().enumerate() {
            let px = (x - xmin) * sx;
            let py = height as f64 - (y - ymin) * sy;
            d.push_str(if k == 0 { "M" } else { " L" });
            d.push_str(&format!("{px:.2},{py:.2}"));
        }
        out.push_str(&format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n",
            palette[i % palette.len()]
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale heatmap of a row-major scalar field (row 0 at the bottom).
pub fn heatmap_svg(values: &[Vec<f64>], width: u32, height: u32) -> String {
    let rows = values.len().max(1);
    let cols = values.first().map(|r| r.len()).unwrap_or(1).max(1);
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for r in values {
        for &v in r {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    if !vmin.is_finite() || vmax <= vmin {
        vmin = 0.0;
        vmax = 1.0;
    }
    let cw = width as f64 / cols as f64;
    let ch = height as f64 / rows as f64;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = ((v - vmin) / (vmax - vmin)).clamp(0.0, 1.0);
            let g = (255.0 * (1.0 - t)) as u8;
            let x = j as f64 * cw;
            let y = height as f64 - (i + 1) as f64 * ch;
            out.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},255)\"/>\n",
                cw + 0.5,
                ch + 0.5
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}
