//! Binary glyph bitmaps stored as rows of `0`/`1` characters.

use std::path::Path;

use crate::{Error, Result};

const BUILTIN: &[(&str, &str)] = &[
    ("I", include_str!("../../assets/glyphs/I.txt")),
    ("7", include_str!("../../assets/glyphs/7.txt")),
    ("L", include_str!("../../assets/glyphs/L.txt")),
    ("T", include_str!("../../assets/glyphs/T.txt")),
    ("O", include_str!("../../assets/glyphs/O.txt")),
    ("X", include_str!("../../assets/glyphs/X.txt")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    pub name: String,
    pub height: usize,
    pub width: usize,
    /// Row-major, each entry 0.0 or 1.0.
    pub pixels: Vec<f64>,
}

impl Glyph {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::Malformed(format!("glyph {name:?} has no rows")));
        }
        let width = rows[0].len();
        let mut pixels = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Malformed(format!(
                    "glyph {name:?} row {r} has {} columns, expected {width}",
                    row.len()
                )));
            }
            for c in row.chars() {
                pixels.push(match c {
                    '0' => 0.0,
                    '1' => 1.0,
                    other => {
                        return Err(Error::Malformed(format!(
                            "glyph {name:?} contains {other:?}; only 0 and 1 allowed"
                        )))
                    }
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            height: rows.len(),
            width,
            pixels,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&name, &text)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::InvalidParam(format!("no built-in glyph {name:?}")))?;
        Self::parse(name, text)
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_8x8_binary() {
        for name in Glyph::builtin_names() {
            let g = Glyph::builtin(name).unwrap();
            assert_eq!((g.height, g.width), (8, 8), "{name}");
            assert!(g.pixels.iter().all(|&p| p == 0.0 || p == 1.0));
            let lit = g.pixels.iter().filter(|&&p| p == 1.0).count();
            assert!(lit > 4 && lit < 60, "{name} is degenerate");
        }
    }

    #[test]
    fn builtins_are_distinct() {
        let gs: Vec<Glyph> = Glyph::builtin_names().map(|n| Glyph::builtin(n).unwrap()).collect();
        for (i, a) in gs.iter().enumerate() {
            for b in &gs[i + 1..] {
                assert_ne!(a.pixels, b.pixels);
            }
        }
    }

    #[test]
    fn parse_rejects_ragged_and_foreign() {
        assert!(Glyph::parse("x", "010\n01\n").is_err());
        assert!(Glyph::parse("x", "012\n").is_err());
        assert!(Glyph::parse("x", "\n\n").is_err());
        assert_eq!(Glyph::parse("x", "01\n10\n").unwrap().pixels, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn unknown_builtin() {
        assert!(Glyph::builtin("?").is_err());
    }
}
