use super::Mesh;
use crate::{Error, Point, Result};

/// Parses the line-oriented mesh format:
///
/// ```text
/// meshdim 2
/// vertices N
/// x y          (N lines)
/// elements M
/// i j k        (M lines, 0-based vertex indices)
/// ```
///
/// Blank lines and `#` comments are ignored. Faces are derived from the
/// element connectivity.
pub fn load_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };

    let (line, header) = next("`meshdim 2`")?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["meshdim", "2"] => {}
        _ => return Err(parse_error(line, "expected `meshdim 2`")),
    }

    let (line, l) = next("`vertices N`")?;
    let nv = section_count(line, l, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = next("vertex coordinates")?;
        let xy: Vec<f64> = parse_fields(line, l)?;
        if xy.len() != 2 {
            return Err(parse_error(line, "expected two coordinates"));
        }
        vertices.push(Point::new(xy[0], xy[1]));
    }

    let (line, l) = next("`elements M`")?;
    let ne = section_count(line, l, "elements")?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, l) = next("element connectivity")?;
        let ijk: Vec<usize> = parse_fields(line, l)?;
        if ijk.len() != 3 {
            return Err(parse_error(line, "expected three vertex indices"));
        }
        if let Some(&v) = ijk.iter().find(|&&v| v >= nv) {
            return Err(parse_error(line, &format!("vertex index {v} out of range")));
        }
        elements.push([ijk[0], ijk[1], ijk[2]]);
    }

    if let Some((line, _)) = lines.next() {
        return Err(parse_error(line, "trailing content after element section"));
    }
    Mesh::new(vertices, elements)
}

fn parse_error(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn section_count(line: usize, l: &str, keyword: &str) -> Result<usize> {
    let parts: Vec<&str> = l.split_whitespace().collect();
    match parts.as_slice() {
        [k, n] if *k == keyword => n
            .parse()
            .map_err(|_| parse_error(line, &format!("invalid {keyword} count `{n}`"))),
        _ => Err(parse_error(line, &format!("expected `{keyword} <count>`"))),
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, l: &str) -> Result<Vec<T>> {
    l.split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_error(line, &format!("cannot parse `{s}`"))))
        .collect()
}
