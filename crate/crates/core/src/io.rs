//! TSV graph files.
//!
//! Vertex file: `x<TAB>m<TAB>V<TAB>is_boundary`, one vertex per line, in the
//! order that defines the vertex indices. Edge file: `x<TAB>y<TAB>weight`,
//! one line per unordered pair. Blank lines and lines starting with `#` are
//! ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Potential, VertexLabels, WeightedGraph};

fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Vec<String>)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim_end_matches(['\r', '\n']);
            if t.trim().is_empty() || t.trim_start().starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.split('\t').map(|s| s.trim().to_string()).collect())))
            }
        }
    })
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {field:?}"),
    })
}

fn parse_flag(field: &str, line: usize) -> Result<bool> {
    match field.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(Error::Parse {
            line,
            message: format!("invalid boundary flag {field:?}"),
        }),
    }
}

/// Reads a graph and its potential from TSV readers.
pub fn read_graph<E: BufRead, V: BufRead>(edges: E, vertices: V) -> Result<(WeightedGraph, Potential)> {
    let mut names = Vec::new();
    let mut index = HashMap::new();
    let mut measure = Vec::new();
    let mut potential = Vec::new();
    let mut boundary = Vec::new();
    for rec in records(vertices) {
        let (line, f) = rec?;
        if f.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("vertex record needs 4 fields, found {}", f.len()),
            });
        }
        let m = parse_f64(&f[1], line, "measure")?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("vertex {} has non-positive measure {m}", f[0]),
            });
        }
        let v = parse_f64(&f[2], line, "potential")?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("vertex {} has non-finite potential", f[0]),
            });
        }
        if index.insert(f[0].clone(), names.len()).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate vertex {}", f[0]),
            });
        }
        names.push(f[0].clone());
        measure.push(m);
        potential.push(v);
        boundary.push(parse_flag(&f[3], line)?);
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut list = Vec::new();
    for rec in records(edges) {
        let (line, f) = rec?;
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("edge record needs 3 fields, found {}", f.len()),
            });
        }
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown vertex {name:?}"),
            })
        };
        let (x, y) = (lookup(&f[0])?, lookup(&f[1])?);
        let w = parse_f64(&f[2], line, "weight")?;
        if x == y {
            return Err(Error::Parse {
                line,
                message: format!("self-loop at vertex {}", f[0]),
            });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("edge ({}, {}) has invalid weight {}", f[0], f[1], f[2]),
            });
        }
        let key = (x.min(y), x.max(y));
        if let Some(first) = seen.insert(key, line) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate pair ({}, {}), first given on line {first}", f[0], f[1]),
            });
        }
        list.push((x, y, w));
    }
    let n = names.len();
    let graph = WeightedGraph::from_edges(n, list, measure, boundary, VertexLabels::Named(names))?;
    Ok((graph, Potential(potential)))
}

pub fn load_graph(edge_path: &Path, vertex_path: &Path) -> Result<(WeightedGraph, Potential)> {
    let e = BufReader::new(File::open(edge_path)?);
    let v = BufReader::new(File::open(vertex_path)?);
    read_graph(e, v)
}

/// Writes the graph in the format [`read_graph`] accepts.
pub fn write_graph<E: Write, V: Write>(g: &WeightedGraph, potential: &Potential, mut edges: E, mut vertices: V) -> Result<()> {
    if potential.0.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: potential.0.len(),
        });
    }
    let labels = g.labels();
    for x in 0..g.len() {
        writeln!(
            vertices,
            "{}\t{:?}\t{:?}\t{}",
            labels.name(x),
            g.measure()[x],
            potential.0[x],
            u8::from(g.is_boundary(x))
        )?;
    }
    let mut result = Ok(());
    g.for_each_edge(|x, y, w| {
        if result.is_ok() {
            result = writeln!(edges, "{}\t{}\t{:?}", labels.name(x), labels.name(y), w);
        }
    });
    result?;
    Ok(())
}

pub fn save_graph(g: &WeightedGraph, potential: &Potential, edge_path: &Path, vertex_path: &Path) -> Result<()> {
    let mut e = BufWriter::new(File::create(edge_path)?);
    let mut v = BufWriter::new(File::create(vertex_path)?);
    write_graph(g, potential, &mut e, &mut v)?;
    e.flush()?;
    v.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const VERTICES: &str = "a\t1\t0\t1\nb\t2\t0.5\t0\nc\t1\t0\t0\nd\t1\t0\t1\n";

    #[test]
    fn round_trip() {
        let edges = "a\tb\t1\nb\tc\t2.5\nc\td\t1\n";
        let (g, v) = read_graph(edges.as_bytes(), VERTICES.as_bytes()).unwrap();
        let (mut e_out, mut v_out) = (Vec::new(), Vec::new());
        write_graph(&g, &v, &mut e_out, &mut v_out).unwrap();
        let (g2, v2) = read_graph(e_out.as_slice(), v_out.as_slice()).unwrap();
        assert_eq!(g, g2);
        assert_eq!(v, v2);
    }

    #[test]
    fn duplicate_pair_reports_second_record() {
        let edges = "a\tb\t1\nb\tc\t2\nc\tb\t3\nc\td\t1\n";
        match read_graph(edges.as_bytes(), VERTICES.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_measure_names_vertex() {
        let vertices = "a\t1\t0\t1\nb\t0\t0\t0\n";
        match read_graph("a\tb\t1\n".as_bytes(), vertices.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("vertex b"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_weight_rejected() {
        let r = read_graph("a\tb\t-1\nb\tc\t1\nc\td\t1\n".as_bytes(), VERTICES.as_bytes());
        assert!(matches!(r, Err(Error::Parse { line: 1, .. })));
    }
}
