//! Readers for TetGen `.node` / `.ele` files and plain-text scalar fields.
//!
//! The parsers work on in-memory text and never panic on malformed input;
//! every failure is reported as a [`MeshError::Parse`] with a 1-based line
//! number, or as a structural error once the two files are combined.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::{MeshError, Point3, TetMesh};

/// Upper bound on speculative preallocation from header counts.
const MAX_PREALLOC: usize = 1 << 20;

/// Contents of a `.node` file.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFile {
    /// Index of the first point (0 or 1); element files refer to points in this base.
    pub first_index: i64,
    pub positions: Vec<Point3>,
    pub attribute_count: usize,
    /// Row-major `positions.len() x attribute_count`.
    pub attributes: Vec<f64>,
}

impl NodeFile {
    pub fn attribute(&self, k: usize) -> Result<Vec<f64>, MeshError> {
        if k >= self.attribute_count {
            return Err(MeshError::MissingAttribute {
                requested: k,
                available: self.attribute_count,
            });
        }
        Ok(self
            .attributes
            .iter()
            .skip(k)
            .step_by(self.attribute_count)
            .copied()
            .collect())
    }
}

/// Contents of an `.ele` file, vertex references as written in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct EleFile {
    pub tets: Vec<[i64; 4]>,
}

/// Where the scalar field comes from when loading TetGen files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSource {
    /// Attribute column `k` (0-based) of the `.node` file.
    Attribute(usize),
    /// Plain-text file with one value per line.
    ValuesFile(PathBuf),
}

/// An already-read scalar field source.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldValues {
    Attribute(usize),
    Values(Vec<f64>),
}

struct Lines<'a> {
    file: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(file: &'a str, text: &'a str) -> Self {
        Lines {
            file,
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-empty line with comments stripped, as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            };
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> MeshError {
        MeshError::Parse {
            file: self.file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn expect_end(&mut self) -> Result<(), MeshError> {
        match self.next_tokens() {
            None => Ok(()),
            Some((line, _)) => Err(self.err(
                line,
                "unexpected content after the declared number of records",
            )),
        }
    }
}

fn parse_count(lines: &Lines, line: usize, tok: &str, what: &str) -> Result<usize, MeshError> {
    tok.parse::<usize>().map_err(|_| {
        lines.err(
            line,
            format!("expected a non-negative integer for {what}, found {tok:?}"),
        )
    })
}

fn parse_index(lines: &Lines, line: usize, tok: &str) -> Result<i64, MeshError> {
    tok.parse::<i64>()
        .map_err(|_| lines.err(line, format!("expected an integer index, found {tok:?}")))
}

fn parse_float(lines: &Lines, line: usize, tok: &str) -> Result<f64, MeshError> {
    tok.parse::<f64>()
        .map_err(|_| lines.err(line, format!("expected a decimal number, found {tok:?}")))
}

/// Parses a TetGen `.node` file: header `<#points> <dim=3> <#attrs> <#markers>`,
/// then `<index> <x> <y> <z> [attrs...] [marker]` per point.
pub fn parse_node(text: &str) -> Result<NodeFile, MeshError> {
    let mut lines = Lines::new(".node", text);
    let (hl, header) = lines
        .next_tokens()
        .ok_or_else(|| lines.err(1, "missing header"))?;
    if header.len() != 4 {
        return Err(lines.err(hl, format!("header needs 4 fields, found {}", header.len())));
    }
    let count = parse_count(&lines, hl, header[0], "point count")?;
    let dim = parse_count(&lines, hl, header[1], "dimension")?;
    if dim != 3 {
        return Err(lines.err(
            hl,
            format!("only 3-dimensional points are supported, found dimension {dim}"),
        ));
    }
    let nattr = parse_count(&lines, hl, header[2], "attribute count")?;
    let nmark = parse_count(&lines, hl, header[3], "boundary marker count")?;
    if nmark > 1 {
        return Err(lines.err(
            hl,
            format!("boundary marker count must be 0 or 1, found {nmark}"),
        ));
    }
    let width = 4usize
        .checked_add(nattr)
        .and_then(|w| w.checked_add(nmark))
        .ok_or_else(|| lines.err(hl, "attribute count too large"))?;

    let mut positions = Vec::with_capacity(count.min(MAX_PREALLOC));
    let mut attributes = Vec::with_capacity(count.saturating_mul(nattr).min(MAX_PREALLOC));
    let mut first_index = 0;
    for i in 0..count {
        let (ln, tok) = lines.next_tokens().ok_or_else(|| {
            lines.err(
                text.lines().count().max(1),
                format!("expected {count} points, found {i}"),
            )
        })?;
        if tok.len() != width {
            return Err(lines.err(
                ln,
                format!("point record needs {width} fields, found {}", tok.len()),
            ));
        }
        let index = parse_index(&lines, ln, tok[0])?;
        if i == 0 {
            if index != 0 && index != 1 {
                return Err(lines.err(
                    ln,
                    format!("point numbering must start at 0 or 1, found {index}"),
                ));
            }
            first_index = index;
        } else if index != first_index + i as i64 {
            return Err(lines.err(
                ln,
                format!(
                    "expected point index {}, found {index}",
                    first_index + i as i64
                ),
            ));
        }
        let mut p = [0.0; 3];
        for (c, t) in p.iter_mut().zip(&tok[1..4]) {
            *c = parse_float(&lines, ln, t)?;
        }
        positions.push(p);
        for t in &tok[4..4 + nattr] {
            attributes.push(parse_float(&lines, ln, t)?);
        }
    }
    lines.expect_end()?;
    Ok(NodeFile {
        first_index,
        positions,
        attribute_count: nattr,
        attributes,
    })
}

/// Parses a TetGen `.ele` file: header `<#tets> <nodes-per-tet=4> <#attrs>`,
/// then `<index> <v1> <v2> <v3> <v4> [attrs...]` per tet.
pub fn parse_ele(text: &str) -> Result<EleFile, MeshError> {
    let mut lines = Lines::new(".ele", text);
    let (hl, header) = lines
        .next_tokens()
        .ok_or_else(|| lines.err(1, "missing header"))?;
    if header.len() != 3 {
        return Err(lines.err(hl, format!("header needs 3 fields, found {}", header.len())));
    }
    let count = parse_count(&lines, hl, header[0], "tet count")?;
    let per = parse_count(&lines, hl, header[1], "nodes per tet")?;
    if per != 4 {
        return Err(lines.err(
            hl,
            format!("only linear tets (4 nodes) are supported, found {per}"),
        ));
    }
    let nattr = parse_count(&lines, hl, header[2], "attribute count")?;
    let width = 5usize
        .checked_add(nattr)
        .ok_or_else(|| lines.err(hl, "attribute count too large"))?;

    let mut tets = Vec::with_capacity(count.min(MAX_PREALLOC));
    let mut first_index = 0;
    for i in 0..count {
        let (ln, tok) = lines.next_tokens().ok_or_else(|| {
            lines.err(
                text.lines().count().max(1),
                format!("expected {count} tets, found {i}"),
            )
        })?;
        if tok.len() != width {
            return Err(lines.err(
                ln,
                format!("tet record needs {width} fields, found {}", tok.len()),
            ));
        }
        let index = parse_index(&lines, ln, tok[0])?;
        if i == 0 {
            first_index = index;
        } else if index != first_index + i as i64 {
            return Err(lines.err(
                ln,
                format!(
                    "expected tet index {}, found {index}",
                    first_index + i as i64
                ),
            ));
        }
        let mut tet = [0i64; 4];
        for (v, t) in tet.iter_mut().zip(&tok[1..5]) {
            *v = parse_index(&lines, ln, t)?;
        }
        for t in &tok[5..] {
            parse_float(&lines, ln, t)?;
        }
        tets.push(tet);
    }
    lines.expect_end()?;
    Ok(EleFile { tets })
}

/// One decimal value per line; blank lines and `#` comments are skipped.
pub fn parse_field_values(text: &str) -> Result<Vec<f64>, MeshError> {
    let mut lines = Lines::new("field", text);
    let mut out = Vec::new();
    while let Some((ln, tok)) = lines.next_tokens() {
        if tok.len() != 1 {
            return Err(lines.err(
                ln,
                format!("expected one value per line, found {}", tok.len()),
            ));
        }
        let v = parse_float(&lines, ln, tok[0])?;
        if !v.is_finite() {
            return Err(lines.err(ln, format!("non-finite value {v}")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Combines parsed `.node` / `.ele` contents and a field into a validated mesh.
pub fn tetgen_mesh(
    node: &NodeFile,
    ele: &EleFile,
    field: &FieldValues,
) -> Result<TetMesh, MeshError> {
    let n = node.positions.len();
    let values = match field {
        FieldValues::Attribute(k) => node.attribute(*k)?,
        FieldValues::Values(v) => {
            if v.len() != n {
                return Err(MeshError::FieldCount {
                    got: v.len(),
                    expected: n,
                });
            }
            v.clone()
        }
    };
    let mut tets = Vec::with_capacity(ele.tets.len());
    for (t, raw) in ele.tets.iter().enumerate() {
        let mut tet = [0u32; 4];
        for (dst, &r) in tet.iter_mut().zip(raw) {
            let local = r - node.first_index;
            if local < 0 || local as usize >= n {
                return Err(MeshError::IndexOutOfRange {
                    tet: t,
                    index: r,
                    count: n,
                });
            }
            *dst = local as u32;
        }
        tets.push(tet);
    }
    TetMesh::new(node.positions.clone(), values, tets)
}

fn read(path: &Path) -> Result<String, MeshError> {
    std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_file_name(err: MeshError, path: &Path) -> MeshError {
    match err {
        MeshError::Parse { line, msg, .. } => MeshError::Parse {
            file: path.display().to_string(),
            line,
            msg,
        },
        e => e,
    }
}

/// Loads a mesh from TetGen `.node` / `.ele` files.
pub fn load_tetgen(
    node_path: &Path,
    ele_path: &Path,
    field: &FieldSource,
) -> Result<TetMesh, MeshError> {
    let node = parse_node(&read(node_path)?).map_err(|e| with_file_name(e, node_path))?;
    let ele = parse_ele(&read(ele_path)?).map_err(|e| with_file_name(e, ele_path))?;
    let field = match field {
        FieldSource::Attribute(k) => FieldValues::Attribute(*k),
        FieldSource::ValuesFile(p) => {
            FieldValues::Values(parse_field_values(&read(p)?).map_err(|e| with_file_name(e, p))?)
        }
    };
    tetgen_mesh(&node, &ele, &field)
}

/// Writes a 1-based `.node` file; with `with_field` the scalar value is
/// attribute 0.
pub fn write_node<W: Write + ?Sized>(
    mesh: &TetMesh,
    with_field: bool,
    out: &mut W,
) -> io::Result<()> {
    writeln!(
        out,
        "{} 3 {} 0",
        mesh.vertex_count(),
        usize::from(with_field)
    )?;
    for (i, p) in mesh.positions().iter().enumerate() {
        write!(out, "{} {} {} {}", i + 1, p[0], p[1], p[2])?;
        if with_field {
            write!(out, " {}", mesh.values()[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes a 1-based `.ele` file.
pub fn write_ele<W: Write + ?Sized>(mesh: &TetMesh, out: &mut W) -> io::Result<()> {
    writeln!(out, "{} 4 0", mesh.tet_count())?;
    for (i, t) in mesh.tets().iter().enumerate() {
        writeln!(
            out,
            "{} {} {} {} {}",
            i + 1,
            t[0] + 1,
            t[1] + 1,
            t[2] + 1,
            t[3] + 1
        )?;
    }
    Ok(())
}

/// Writes one value per line.
pub fn write_field_values<W: Write + ?Sized>(values: &[f64], out: &mut W) -> io::Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}
