//! Text dumps of sign functions and PI states.
//!
//! Both formats start with a header line `k n_1 … n_k` and then list every
//! point in linear order (coordinate 1 fastest), one per line:
//!
//! ```text
//! c_1 … c_k : s_1 … s_k d
//! ```
//!
//! For sign functions `s_i ∈ {-1, 0, 1}` and `d ∈ {+1, -1}`; for PI states
//! `s_i ∈ {-1, 0, +1, <=, >=, ?}` and `d ∈ {+, -, ?}`. Fields are separated
//! by single spaces and every line ends with a newline.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::functions::SignFunction;
use crate::lattice::{GridShape, Point};
use crate::pi::{DirSym, PiState, Sym};

/// Largest grid a dump may describe.
pub const MAX_DUMP_POINTS: usize = 1 << 22;

fn header(shape: &GridShape) -> String {
    let mut s = shape.k().to_string();
    for n in shape.extents() {
        write!(s, " {n}").unwrap();
    }
    s.push('\n');
    s
}

fn coords(out: &mut String, x: &Point) {
    for (i, c) in x.coords().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{c}").unwrap();
    }
    out.push_str(" :");
}

pub fn write_instance(f: &SignFunction) -> String {
    let shape = f.shape();
    let mut out = header(shape);
    for (idx, x) in shape.points().enumerate() {
        coords(&mut out, &x);
        let v = f.at(idx);
        for &s in v.signs() {
            write!(out, " {s}").unwrap();
        }
        out.push_str(if v.dir() > 0 { " +1\n" } else { " -1\n" });
    }
    out
}

pub fn write_pi(p: &PiState) -> String {
    let shape = p.shape();
    let mut out = header(shape);
    for (idx, x) in shape.points().enumerate() {
        coords(&mut out, &x);
        for i in 0..shape.k() {
            out.push(' ');
            out.push_str(p.sym_at(idx, i).token());
        }
        out.push(' ');
        out.push_str(p.dir_at(idx).token());
        out.push('\n');
    }
    out
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Splits the text into the shape and the per-point token lists (after the
/// colon), checking that the points appear in linear order.
fn parse_body(text: &str) -> Result<(GridShape, Vec<(usize, Vec<&str>)>)> {
    let mut lines = text.split_inclusive('\n');
    let Some(first) = lines.next() else { return perr(1, "missing header") };
    let Some(first) = first.strip_suffix('\n') else { return perr(1, "header is not newline-terminated") };
    let head: Vec<&str> = first.split(' ').collect();
    let k: usize = match head[0].parse() {
        Ok(k) if (1..=4).contains(&k) => k,
        _ => return perr(1, format!("bad dimension {:?}", head[0])),
    };
    if head.len() != k + 1 {
        return perr(1, format!("expected {k} extents"));
    }
    let mut ext = Vec::with_capacity(k);
    let mut total: usize = 1;
    for t in &head[1..] {
        match t.parse::<u32>() {
            Ok(n) if n >= 1 && n as usize <= MAX_DUMP_POINTS => {
                total = total.saturating_mul(n as usize);
                ext.push(n);
            }
            _ => return perr(1, format!("bad extent {t:?}")),
        }
    }
    if total > MAX_DUMP_POINTS {
        return perr(1, format!("grid of {total} points exceeds the limit of {MAX_DUMP_POINTS}"));
    }
    let shape = GridShape::new(&ext).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    let mut rows = Vec::with_capacity(shape.len());
    for (idx, want) in shape.points().enumerate() {
        let no = idx + 2;
        let Some(raw) = lines.next() else { return perr(no, format!("missing line for point {want}")) };
        let Some(line) = raw.strip_suffix('\n') else { return perr(no, "line is not newline-terminated") };
        let toks: Vec<&str> = line.split(' ').collect();
        if toks.len() != 2 * k + 2 || toks[k] != ":" {
            return perr(no, format!("expected {k} coordinates, ':', {k} symbols and a direction"));
        }
        for (i, t) in toks[..k].iter().enumerate() {
            if t.parse::<u32>().ok() != Some(want[i]) {
                return perr(no, format!("expected point {want}"));
            }
        }
        rows.push((no, toks[k + 1..].to_vec()));
    }
    if let Some(extra) = lines.next() {
        if !extra.is_empty() {
            return perr(shape.len() + 2, "trailing content");
        }
    }
    Ok((shape, rows))
}

/// Parses an instance dump. The table is not checked for monotonicity;
/// see [`SignFunction::validated`].
pub fn parse_instance(text: &str) -> Result<SignFunction> {
    let (shape, rows) = parse_body(text)?;
    let k = shape.k();
    let mut signs = Vec::with_capacity(shape.len() * k);
    let mut dirs = Vec::with_capacity(shape.len());
    for (no, toks) in rows {
        for t in &toks[..k] {
            signs.push(match *t {
                "-1" => -1,
                "0" => 0,
                "1" => 1,
                _ => return perr(no, format!("bad sign {t:?}")),
            });
        }
        dirs.push(match toks[k] {
            "+1" => 1,
            "-1" => -1,
            t => return perr(no, format!("bad direction {t:?}")),
        });
    }
    SignFunction::from_tables(&shape, signs, dirs)
}

/// Parses a PI state dump. No monotonicity or safety check is made.
pub fn parse_pi(text: &str) -> Result<PiState> {
    let (shape, rows) = parse_body(text)?;
    let k = shape.k();
    let mut cells = Vec::with_capacity(shape.len() * k);
    let mut last = Vec::with_capacity(shape.len());
    for (no, toks) in rows {
        for t in &toks[..k] {
            match Sym::from_token(t) {
                Some(s) => cells.push(s),
                None => return perr(no, format!("bad symbol {t:?}")),
            }
        }
        match DirSym::from_token(toks[k]) {
            Some(d) => last.push(d),
            None => return perr(no, format!("bad direction {:?}", toks[k])),
        }
    }
    PiState::from_raw(&shape, cells, last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::attractor;

    #[test]
    fn instance_layout() {
        let g = GridShape::cube(2, 2).unwrap();
        let t = Point::new(&[2, 1]);
        let f = attractor(&g, &t, &[t]);
        let text = write_instance(&f);
        assert_eq!(text, "2 2 2\n1 1 : 1 0 -1\n2 1 : 0 0 +1\n1 2 : 1 -1 -1\n2 2 : 0 -1 +1\n");
        assert_eq!(parse_instance(&text).unwrap(), f);
    }

    #[test]
    fn pi_layout() {
        let g = GridShape::new(&[2]).unwrap();
        let text = write_pi(&PiState::p0(&g));
        assert_eq!(text, "1 2\n1 : >= ?\n2 : <= ?\n");
        assert_eq!(parse_pi(&text).unwrap(), PiState::p0(&g));
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(parse_instance(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("1 2\n1 : 1 +1\n2 : 2 +1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_instance("1 2\n2 : 0 +1\n1 : 0 +1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_pi("1 2\n1 : >= ?\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_pi("5 2 2 2 2 2\n"), Err(Error::Parse { line: 1, .. })));
    }
}
