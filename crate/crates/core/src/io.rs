//! Text formats used by the command-line tool.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields bit-identical values.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::coefficients::{CoefIndex, CoefficientField};
use crate::error::{Error, Result};
use crate::estimators::KeepMask;
use crate::tree::DyadicNode;

pub const COEFFICIENT_HEADER: [&str; 3] = ["level", "position", "value"];
pub const MASK_HEADER: [&str; 3] = ["level", "position", "keep"];

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn coefficients_to_csv(field: &CoefficientField) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COEFFICIENT_HEADER)?;
    for (idx, v) in field.iter() {
        w.write_record([idx.level.to_string(), idx.position.to_string(), fmt_f64(v)])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Parses a coefficient CSV. Every slot of levels `-1..J` must appear exactly
/// once, where `J - 1` is the deepest level present.
pub fn coefficients_from_csv(text: &str) -> Result<CoefficientField> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != COEFFICIENT_HEADER {
        return Err(parse_err(format!("expected header level,position,value, got {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let at = |i: usize| rec.get(i).ok_or_else(|| parse_err(format!("row {}: missing column", line + 2)));
        let level: i32 = at(0)?.parse().map_err(|_| parse_err(format!("row {}: bad level", line + 2)))?;
        let position: usize = at(1)?
            .parse()
            .map_err(|_| parse_err(format!("row {}: bad position", line + 2)))?;
        let value: f64 = at(2)?.parse().map_err(|_| parse_err(format!("row {}: bad value", line + 2)))?;
        if level < -1 {
            return Err(parse_err(format!("row {}: level {level} below -1", line + 2)));
        }
        rows.push((CoefIndex::new(level, position), value));
    }
    let max_level = rows.iter().map(|(i, _)| i.level + 1).max().unwrap_or(0) as u32;
    let mut field = CoefficientField::zeros(max_level);
    let mut seen = CoefficientField::zeros(max_level);
    for (idx, v) in rows {
        if seen.get(idx) == Some(1.0) {
            return Err(parse_err(format!("duplicate coefficient ({}, {})", idx.level, idx.position)));
        }
        field.set(idx, v)?;
        seen.set(idx, 1.0)?;
    }
    if let Some((idx, _)) = seen.iter().find(|(_, v)| *v == 0.0) {
        return Err(parse_err(format!("missing coefficient ({}, {})", idx.level, idx.position)));
    }
    Ok(field)
}

pub fn mask_to_csv(mask: &KeepMask) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MASK_HEADER)?;
    for j in 0..mask.cutoff() {
        for (k, &keep) in mask.level(j).iter().enumerate() {
            w.write_record([j.to_string(), k.to_string(), (keep as u8).to_string()])?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn mask_from_csv(text: &str) -> Result<KeepMask> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != MASK_HEADER {
        return Err(parse_err(format!("expected header level,position,keep, got {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(j), Some(k), Some(b)) = (rec.get(0), rec.get(1), rec.get(2)) else {
            return Err(parse_err("mask row with missing columns"));
        };
        let j: u32 = j.parse().map_err(|_| parse_err(format!("bad mask level '{j}'")))?;
        let k: usize = k.parse().map_err(|_| parse_err(format!("bad mask position '{k}'")))?;
        let keep = match b {
            "0" => false,
            "1" => true,
            _ => return Err(parse_err(format!("bad keep flag '{b}'"))),
        };
        rows.push((DyadicNode::new(j, k), keep));
    }
    let cutoff = rows.iter().map(|(n, _)| n.level + 1).max().unwrap_or(0);
    if rows.len() != (1usize << cutoff) - 1 {
        return Err(parse_err(format!("mask with {} rows does not cover levels 0..{cutoff}", rows.len())));
    }
    let mut mask = KeepMask::none(cutoff);
    let mut seen = KeepMask::none(cutoff);
    for (node, keep) in rows {
        if node.position >= 1usize << node.level {
            return Err(parse_err(format!("mask position {} out of range at level {}", node.position, node.level)));
        }
        if seen.is_kept(node) {
            return Err(parse_err(format!("duplicate mask entry ({}, {})", node.level, node.position)));
        }
        seen.set(node, true);
        mask.set(node, keep);
    }
    Ok(mask)
}

/// Whitespace or comma separated samples; `#` starts a comment.
pub fn samples_from_text(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(tok.parse().map_err(|_| parse_err(format!("bad sample '{tok}'")))?);
        }
    }
    Ok(out)
}

pub fn samples_to_text(samples: &[f64]) -> Vec<u8> {
    let mut s = String::new();
    for v in samples {
        s.push_str(&fmt_f64(*v));
        s.push('\n');
    }
    s.into_bytes()
}

/// True when `text` starts with a coefficient CSV header.
pub fn looks_like_coefficients(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.trim().starts_with("level"))
        .unwrap_or(false)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Flat `key = value` configuration. Keys are normalized to use dashes.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(parse_err(format!("config line {}: expected key = value", n + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(parse_err(format!("config line {}: empty key", n + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(parse_err(format!("config line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_csv_layout() {
        let field = CoefficientField::from_levels(vec![0.5], vec![vec![1.0], vec![-0.25, 1e-300]]).unwrap();
        let text = String::from_utf8(coefficients_to_csv(&field).unwrap()).unwrap();
        assert_eq!(
            text,
            "level,position,value\n-1,0,0.5\n0,0,1.0\n1,0,-0.25\n1,1,1e-300\n"
        );
        assert_eq!(coefficients_from_csv(&text).unwrap(), field);
    }

    #[test]
    fn coefficient_csv_rejects_gaps_and_duplicates() {
        assert!(coefficients_from_csv("level,position,value\n-1,0,1\n1,0,1\n1,1,1\n").is_err());
        assert!(coefficients_from_csv("level,position,value\n-1,0,1\n-1,0,2\n").is_err());
        assert!(coefficients_from_csv("lvl,pos,val\n-1,0,1\n").is_err());
        assert!(coefficients_from_csv("level,position,value\n0,1,1\n").is_err());
        assert!(coefficients_from_csv("level,position,value\n-1,0,abc\n").is_err());
    }

    #[test]
    fn rows_in_any_order_are_accepted() {
        let f = coefficients_from_csv("level,position,value\n0,0,2\n-1,0,1\n").unwrap();
        assert_eq!(f.scaling(), &[1.0]);
        assert_eq!(f.level(0), &[2.0]);
    }

    #[test]
    fn mask_csv_round_trip() {
        let mut mask = KeepMask::none(3);
        mask.set(DyadicNode::new(0, 0), true);
        mask.set(DyadicNode::new(2, 3), true);
        let text = String::from_utf8(mask_to_csv(&mask).unwrap()).unwrap();
        assert!(text.starts_with("level,position,keep\n0,0,1\n1,0,0\n"));
        assert_eq!(mask_from_csv(&text).unwrap(), mask);
        assert!(mask_from_csv("level,position,keep\n0,0,2\n").is_err());
    }

    #[test]
    fn samples_and_detection() {
        let s = samples_from_text("# header\n1.5 2\n-3,4e-2\n\n").unwrap();
        assert_eq!(s, vec![1.5, 2.0, -3.0, 0.04]);
        assert_eq!(samples_from_text(std::str::from_utf8(&samples_to_text(&s)).unwrap()).unwrap(), s);
        assert!(looks_like_coefficients("\nlevel,position,value\n"));
        assert!(!looks_like_coefficients("1.0\n2.0\n"));
    }

    #[test]
    fn config_parsing() {
        let c = parse_config("# run\nepsilon = 0.01\nmatched_m=true # inline\n\n").unwrap();
        assert_eq!(c["epsilon"], "0.01");
        assert_eq!(c["matched-m"], "true");
        assert!(parse_config("epsilon 0.01").is_err());
        assert!(parse_config("eta = 1\neta = 2").is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("out.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"bb").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"bb");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
