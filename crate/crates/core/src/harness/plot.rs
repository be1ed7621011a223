//! Plot-ready series (raw and smoothed wait per episode) and a minimal SVG
//! line chart, from one or more metrics files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::metrics::{read_metrics, smooth};
use super::HarnessError;

/// Series file name for input `index`, from the directories above the file.
fn series_name(index: usize, path: &Path) -> String {
    let parts: Vec<String> = path
        .parent()
        .into_iter()
        .flat_map(|p| p.components().rev().take(2))
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .filter(|s| !s.is_empty() && s != "." && s != "/")
        .collect();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name: Vec<String> = parts.into_iter().rev().collect();
    name.push(stem);
    let joined: String = name
        .join("_")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:02}_{joined}")
}

pub fn svg_chart(title: &str, raw: &[f64], smoothed: &[f64]) -> String {
    let (w, h, pad) = (800.0, 400.0, 40.0);
    let n = raw.len().max(2) as f64 - 1.0;
    let max = raw.iter().chain(smoothed).cloned().fold(1.0_f64, f64::max);
    let point = |i: usize, v: f64| (pad + (w - 2.0 * pad) * i as f64 / n, h - pad - (h - 2.0 * pad) * v / max);
    let path = |ys: &[f64]| {
        let mut d = String::new();
        for (i, &y) in ys.iter().enumerate() {
            let (px, py) = point(i, y);
            let _ = write!(d, "{}{px:.2},{py:.2} ", if i == 0 { "M" } else { "L" });
        }
        d
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{pad} L{pad},{y} L{x},{y}" stroke="black" fill="none"/>"#,
        y = h - pad,
        x = w - pad
    );
    let _ = writeln!(s, r#"<text x="4" y="{}" font-family="sans-serif" font-size="10">{max:.0}</text>"#, pad + 4.0);
    let _ = writeln!(s, r##"<path d="{}" stroke="#9ecae1" stroke-width="1" fill="none"/>"##, path(raw));
    let _ = writeln!(s, r##"<path d="{}" stroke="#08519c" stroke-width="2" fill="none"/>"##, path(smoothed));
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<name>.csv` (episode, raw, smoothed) and, when `svg` is set,
/// `<name>.svg` into `out_dir` for every input. Returns the series files.
pub fn emit_plot_data(inputs: &[PathBuf], out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>, HarnessError> {
    if inputs.is_empty() {
        return Err(HarnessError::Usage("plot needs at least one metrics file".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (i, input) in inputs.iter().enumerate() {
        let records = read_metrics(input)?;
        let raw: Vec<f64> = records.iter().map(|r| r.omega_t as f64).collect();
        let smoothed = smooth(&raw);
        let name = series_name(i, input);
        let path = out_dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["episode", "raw", "smoothed"])?;
        for (r, (x, s)) in records.iter().zip(raw.iter().zip(&smoothed)) {
            w.write_record([r.episode.to_string(), x.to_string(), s.to_string()])?;
        }
        w.flush()?;
        if svg {
            let svg_path = out_dir.join(format!("{name}.svg"));
            std::fs::write(&svg_path, svg_chart(&input.display().to_string(), &raw, &smoothed))
                .map_err(|e| HarnessError::io(&svg_path, e))?;
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_come_from_parent_dirs() {
        assert_eq!(series_name(3, Path::new("runs/ablation/full/seed0/metrics.csv")), "03_full_seed0_metrics");
        assert_eq!(series_name(0, Path::new("metrics.csv")), "00_metrics");
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_chart("a<b", &[3.0, 1.0, 2.0], &[3.0, 2.98, 2.97]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<path").count(), 3);
    }

    #[test]
    fn empty_input_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plot_data(&[], dir.path(), false), Err(HarnessError::Usage(_))));
    }
}
