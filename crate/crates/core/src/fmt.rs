//! Numeric text formatting shared by the file formats.

/// Format with 17 significant digits (exact f64 round-trip).
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
