//! Output helpers: fixed-precision JSON, atomic file writes, frame images.

use std::io::{BufWriter, Write};
use std::path::Path;

use lcdvf_core::{io, BinaryMask, Contour, MetricsReport, ScalarField, TraceEntry};
use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliResult;

/// Writes every float with exactly six decimals.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            // avoid "-0.000000"
            let v = if value.abs() < 5e-7 { 0.0 } else { value };
            write!(w, "{v:.6}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Compact single-line JSON with six-decimal reals.
pub fn json_line(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn metrics_json(m: &MetricsReport) -> Value {
    json!({
        "iou": m.iou,
        "dice": m.dice,
        "boundf": m.boundf,
        "boundf_per_threshold": m.boundf_per_threshold,
    })
}

pub fn contour_json(c: &Contour) -> Value {
    Value::Array(c.nodes().iter().map(|p| json!([p.u, p.v])).collect())
}

/// Writes `path` through a temporary file in the same directory, renamed
/// into place only after `fill` succeeded.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| crate::error::CliError::from(e).at(dir))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| crate::error::CliError::from(e).at(dir))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> CliResult<()> {
    write_atomic(path, |w| Ok(io::write_mask(w, mask)?))
}

pub fn write_pfm(path: &Path, field: &ScalarField) -> CliResult<()> {
    write_atomic(path, |w| Ok(io::write_pfm(w, field)?))
}

/// Frame image: the mask at gray 100, the snake's raster at 155, both at 255.
pub fn render_frame(mask: &BinaryMask, prediction: &BinaryMask) -> ScalarField {
    let (w, h) = mask.dims();
    ScalarField::from_fn(w, h, |u, v| {
        100.0 * mask.get(u, v) as u8 as f64 + 155.0 * prediction.get(u, v) as u8 as f64
    })
    .expect("frame has the mask's dimensions")
}

pub fn frame_json(iteration: usize, entry: &TraceEntry) -> Value {
    json!({
        "iteration": iteration,
        "energy": entry.energy,
        "mean_displacement": entry.mean_displacement,
        "contour": contour_json(&entry.contour),
    })
}
