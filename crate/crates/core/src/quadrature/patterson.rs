//! Embedded Gauss-Patterson tables, levels 1..=8 (up to 255 points).
//!
//! The data file carries nodes and weights at 30 significant digits,
//! normalized to the uniform probability weight. Nodes shared between levels
//! appear with byte-identical decimal strings, so the parsed doubles are
//! bitwise equal across levels.

use crate::error::CoreError;
use crate::Result;
use once_cell::sync::Lazy;

pub const MAX_PATTERSON_LEVEL: u32 = 8;

const TABLE_TEXT: &str = include_str!("../../data/gauss_patterson.txt");

struct Level {
    points: Vec<f64>,
    weights: Vec<f64>,
}

static TABLES: Lazy<Vec<Level>> = Lazy::new(|| parse(TABLE_TEXT).expect("embedded table is valid"));

fn parse(text: &str) -> Result<Vec<Level>> {
    let mut levels: Vec<Level> = Vec::new();
    let mut current: Option<(usize, Level)> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| CoreError::CacheFormat {
            path: "gauss_patterson.txt".into(),
            line: lineno + 1,
            reason,
        };
        if let Some(rest) = line.strip_prefix("level ") {
            if let Some((_, lvl)) = current.take() {
                levels.push(lvl);
            }
            let mut it = rest.split_whitespace();
            let m: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("missing level number".into()))?;
            let p: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("missing point count".into()))?;
            if m != levels.len() + 1 {
                return Err(bad(format!("expected level {}, found {m}", levels.len() + 1)));
            }
            current = Some((
                p,
                Level {
                    points: Vec::with_capacity(p),
                    weights: Vec::with_capacity(p),
                },
            ));
        } else {
            let (_, lvl) = current
                .as_mut()
                .ok_or_else(|| bad("data before first level header".into()))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("unparseable node".into()))?;
            let w: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("unparseable weight".into()))?;
            lvl.points.push(x);
            lvl.weights.push(w);
        }
    }
    if let Some((p, lvl)) = current.take() {
        if lvl.points.len() != p {
            return Err(CoreError::InvalidParameter(format!(
                "level advertised {p} points, found {}",
                lvl.points.len()
            )));
        }
        levels.push(lvl);
    }
    if levels.len() != MAX_PATTERSON_LEVEL as usize {
        return Err(CoreError::InvalidParameter(format!(
            "expected {MAX_PATTERSON_LEVEL} levels, found {}",
            levels.len()
        )));
    }
    Ok(levels)
}

pub(super) fn rule(m: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    let lvl = &TABLES[(m - 1) as usize];
    // weights renormalized to unit mass; the table is accurate to ~1e-30 so
    // this only trims parse rounding
    let total: f64 = lvl.weights.iter().sum();
    Ok((
        lvl.points.clone(),
        lvl.weights.iter().map(|w| w / total).collect(),
    ))
}
