//! Plain-text mesh format.
//!
//! ```text
//! tmesh 1
//! vertices N
//! x y                (17 significant digits)
//! triangles M
//! i j k              (0-based, counter-clockwise)
//! bedges K
//! a b LABEL          (LABEL in {G0, G11, G12})
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::scalar::Real;

use super::{BoundaryEdge, MeshError, Point2, SegmentLabel, TriMesh};

pub fn write_mesh<T: Real>(mesh: &TriMesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let file = File::create(path)?;
    write_mesh_to(mesh, BufWriter::new(file))
}

pub fn write_mesh_to<T: Real>(mesh: &TriMesh<T>, mut out: impl Write) -> Result<(), MeshError> {
    writeln!(out, "tmesh 1")?;
    writeln!(out, "vertices {}", mesh.vertices().len())?;
    for p in mesh.vertices() {
        writeln!(
            out,
            "{:.16e} {:.16e}",
            p.x.to_f64().unwrap(),
            p.y.to_f64().unwrap()
        )?;
    }
    writeln!(out, "triangles {}", mesh.triangles().len())?;
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "bedges {}", mesh.boundary_edges().len())?;
    for e in mesh.boundary_edges() {
        writeln!(out, "{} {} {}", e.a, e.b, e.label.token())?;
    }
    Ok(())
}

pub fn read_mesh<T: Real>(path: impl AsRef<Path>) -> Result<TriMesh<T>, MeshError> {
    let file = File::open(path)?;
    read_mesh_from(BufReader::new(file))
}

pub fn read_mesh_from<T: Real>(input: impl BufRead) -> Result<TriMesh<T>, MeshError> {
    let mut lines = Lines::new(input);

    let header = lines.next_line()?;
    if header.trim() != "tmesh 1" {
        return Err(lines.error("expected header `tmesh 1`"));
    }

    let n_vertices = lines.section_count("vertices")?;
    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let line = lines.next_line()?;
        let mut it = line.split_whitespace();
        let x = lines.parse_f64(it.next(), "x coordinate")?;
        let y = lines.parse_f64(it.next(), "y coordinate")?;
        if it.next().is_some() {
            return Err(lines.error("trailing tokens after vertex coordinates"));
        }
        let (Some(x), Some(y)) = (T::from_f64(x), T::from_f64(y)) else {
            return Err(lines.error("coordinate not representable in target precision"));
        };
        vertices.push(Point2::new(x, y));
    }

    let n_triangles = lines.section_count("triangles")?;
    let mut triangles = Vec::with_capacity(n_triangles);
    for _ in 0..n_triangles {
        let line = lines.next_line()?;
        let mut it = line.split_whitespace();
        let i = lines.parse_usize(it.next(), "vertex index")?;
        let j = lines.parse_usize(it.next(), "vertex index")?;
        let k = lines.parse_usize(it.next(), "vertex index")?;
        if it.next().is_some() {
            return Err(lines.error("trailing tokens after triangle indices"));
        }
        triangles.push([i, j, k]);
    }

    let n_edges = lines.section_count("bedges")?;
    let mut boundary_edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let line = lines.next_line()?;
        let mut it = line.split_whitespace();
        let a = lines.parse_usize(it.next(), "edge endpoint")?;
        let b = lines.parse_usize(it.next(), "edge endpoint")?;
        let token = it
            .next()
            .ok_or_else(|| lines.error("missing segment label"))?;
        let label = SegmentLabel::from_token(token)
            .ok_or_else(|| lines.error(&format!("unknown segment label `{token}`")))?;
        if it.next().is_some() {
            return Err(lines.error("trailing tokens after boundary edge"));
        }
        boundary_edges.push(BoundaryEdge { a, b, label });
    }

    TriMesh::new(vertices, triangles, boundary_edges, None)
}

struct Lines<R> {
    input: R,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn new(input: R) -> Self {
        Lines {
            input,
            line_no: 0,
            buf: String::new(),
        }
    }

    fn error(&self, message: &str) -> MeshError {
        MeshError::Parse {
            line: self.line_no,
            message: message.to_string(),
        }
    }

    fn next_line(&mut self) -> Result<String, MeshError> {
        loop {
            self.buf.clear();
            let read = self.input.read_line(&mut self.buf)?;
            self.line_no += 1;
            if read == 0 {
                return Err(MeshError::Parse {
                    line: self.line_no,
                    message: "unexpected end of file".to_string(),
                });
            }
            if !self.buf.trim().is_empty() {
                return Ok(self.buf.trim_end().to_string());
            }
        }
    }

    fn section_count(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let line = self.next_line()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.error(&format!("expected `{keyword} <count>`")));
        }
        let count = self.parse_usize(it.next(), "count")?;
        if it.next().is_some() {
            return Err(self.error(&format!("trailing tokens after `{keyword}` count")));
        }
        Ok(count)
    }

    fn parse_usize(&self, token: Option<&str>, what: &str) -> Result<usize, MeshError> {
        let token = token.ok_or_else(|| self.error(&format!("missing {what}")))?;
        token
            .parse::<usize>()
            .map_err(|_| self.error(&format!("invalid {what} `{token}`")))
    }

    fn parse_f64(&self, token: Option<&str>, what: &str) -> Result<f64, MeshError> {
        let token = token.ok_or_else(|| self.error(&format!("missing {what}")))?;
        token
            .parse::<f64>()
            .map_err(|_| self.error(&format!("invalid {what} `{token}`")))
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::io::Cursor;

    use crate::mesh::generate_disk_mesh;

    use super::*;

    #[test]
    fn round_trip_preserves_mesh() {
        let mesh = generate_disk_mesh::<f64>(16, PI / 3.0).unwrap();
        let mut buf = Vec::new();
        write_mesh_to(&mesh, &mut buf).unwrap();
        let loaded = read_mesh_from::<f64>(Cursor::new(buf)).unwrap();
        assert_eq!(mesh.vertices(), loaded.vertices());
        assert_eq!(mesh.triangles(), loaded.triangles());
        assert_eq!(mesh.boundary_edges(), loaded.boundary_edges());
        assert_eq!(loaded.theta(), None);
    }

    #[test]
    fn parse_error_reports_line_number() {
        let text = "tmesh 1\nvertices 2\n0 0\nnot-a-number 1\n";
        let err = read_mesh_from::<f64>(Cursor::new(text)).unwrap_err();
        match err {
            MeshError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn clockwise_triangle_in_file_rejected() {
        let text = "tmesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1\nbedges 3\n0 2 G0\n2 1 G0\n1 0 G0\n";
        let err = read_mesh_from::<f64>(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, MeshError::NonPositiveArea { .. }));
    }

    #[test]
    fn stray_boundary_edge_rejected() {
        let text = "tmesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nbedges 3\n0 1 G0\n1 2 G0\n2 0 G11\n";
        let ok = read_mesh_from::<f64>(Cursor::new(text));
        assert!(ok.is_ok());
        let text = "tmesh 1\nvertices 4\n0 0\n1 0\n0 1\n5 5\ntriangles 1\n0 1 2\nbedges 3\n0 1 G0\n1 2 G0\n2 0 G11\n";
        let err = read_mesh_from::<f64>(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, MeshError::OrphanVertex(3)));
    }
}
