//! Triangular meshes with tagged boundary edges.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("triangle {triangle} has area {area:e}, below the degeneracy threshold")]
    Degenerate { triangle: usize, area: f64 },
    #[error("edge ({a}, {b}) is shared by {count} triangles")]
    NonConforming { a: usize, b: usize, count: usize },
    #[error("boundary edge ({a}, {b}) is not an edge of the triangulation")]
    UnknownBoundaryEdge { a: usize, b: usize },
    #[error("vertex index {index} out of range (nv = {nv})")]
    IndexOutOfRange { index: usize, nv: usize },
    #[error("no boundary edges tagged '{0}'")]
    MissingTag(BoundaryTag),
    #[error("inner and outer sets both use the tag '{0}'")]
    SameTag(BoundaryTag),
    #[error("vertex {0} carries both the inner and the outer tag")]
    TagConflict(usize),
    #[error("invalid annulus parameters: {0}")]
    InvalidAnnulus(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Inner,
    Outer,
    Free,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::Inner => "inner",
            BoundaryTag::Outer => "outer",
            BoundaryTag::Free => "free",
        })
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inner" => Ok(BoundaryTag::Inner),
            "outer" => Ok(BoundaryTag::Outer),
            "free" => Ok(BoundaryTag::Free),
            other => Err(format!("unknown boundary tag '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Conforming triangulation of a planar domain, triangles oriented counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    h: f64,
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = [v[t[0]], v[t[1]], v[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

impl Mesh {
    /// Validates and orients the triangulation.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, boundary: Vec<BoundaryEdge>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        let check = |i: usize| if i < nv { Ok(()) } else { Err(MeshError::IndexOutOfRange { index: i, nv }) };
        for t in &triangles {
            t.iter().try_for_each(|&i| check(i))?;
        }
        for e in &boundary {
            check(e.a)?;
            check(e.b)?;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let diag2 = (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2);
        for (k, t) in triangles.iter_mut().enumerate() {
            let area = signed_area(&vertices, *t);
            if !(area.abs() >= 1e-14 * diag2) {
                return Err(MeshError::Degenerate { triangle: k, area: area.abs() });
            }
            if area < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &triangles {
            for k in 0..3 {
                *edges.entry(edge_key(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((&(a, b), &count)) = edges.iter().find(|(_, &c)| c > 2) {
            return Err(MeshError::NonConforming { a, b, count });
        }
        for e in &boundary {
            if !edges.contains_key(&edge_key(e.a, e.b)) {
                return Err(MeshError::UnknownBoundaryEdge { a: e.a, b: e.b });
            }
        }
        let total: f64 = edges
            .keys()
            .map(|&(a, b)| ((vertices[a][0] - vertices[b][0]).powi(2) + (vertices[a][1] - vertices[b][1]).powi(2)).sqrt())
            .sum();
        let h = if edges.is_empty() { 0.0 } else { total / edges.len() as f64 };
        Ok(Self {
            vertices,
            triangles,
            boundary,
            h,
        })
    }

    /// Annulus `r0 < |x| < r1` built from concentric rings about `h` apart.
    pub fn annulus(r0: f64, r1: f64, h: f64) -> Result<Self, MeshError> {
        if !(r0 > 0.0 && r1 > r0 && h > 0.0 && h < r1 - r0) {
            return Err(MeshError::InvalidAnnulus(format!("need 0 < r0 < r1 and 0 < h < r1 - r0 (got {r0}, {r1}, {h})")));
        }
        let rings = ((r1 - r0) / h).ceil() as usize;
        let tau = std::f64::consts::TAU;
        let mut vertices = Vec::new();
        let mut starts = Vec::with_capacity(rings + 1);
        let mut counts = Vec::with_capacity(rings + 1);
        let mut offsets = Vec::with_capacity(rings + 1);
        for j in 0..=rings {
            let r = r0 + (r1 - r0) * j as f64 / rings as f64;
            let n = ((tau * r / h).round() as usize).max(6);
            let offset = if j % 2 == 1 { 0.5 * tau / n as f64 } else { 0.0 };
            starts.push(vertices.len());
            counts.push(n);
            offsets.push(offset);
            for i in 0..n {
                let th = offset + tau * i as f64 / n as f64;
                vertices.push([r * th.cos(), r * th.sin()]);
            }
        }
        let mut triangles = Vec::new();
        for j in 0..rings {
            let (si, ni, oi) = (starts[j], counts[j], offsets[j]);
            let (so, no, oo) = (starts[j + 1], counts[j + 1], offsets[j + 1]);
            let inner_angle = |i: usize| oi + tau * i as f64 / ni as f64;
            let outer_angle = |k: usize| oo + tau * k as f64 / no as f64;
            let (mut i, mut k) = (0, 0);
            while i < ni || k < no {
                let advance_inner = k == no || (i < ni && inner_angle(i + 1) < outer_angle(k + 1));
                if advance_inner {
                    triangles.push([si + i % ni, si + (i + 1) % ni, so + k % no]);
                    i += 1;
                } else {
                    triangles.push([si + i % ni, so + (k + 1) % no, so + k % no]);
                    k += 1;
                }
            }
        }
        let mut boundary = Vec::new();
        for (j, tag) in [(0, BoundaryTag::Inner), (rings, BoundaryTag::Outer)] {
            let (s, n) = (starts[j], counts[j]);
            for i in 0..n {
                boundary.push(BoundaryEdge {
                    a: s + i,
                    b: s + (i + 1) % n,
                    tag,
                });
            }
        }
        Self::new(vertices, triangles, boundary)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Mean edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Vertices on edges carrying `tag`, sorted and deduplicated.
    pub fn tagged_vertices(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary.iter().filter(|e| e.tag == tag).flat_map(|e| [e.a, e.b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Dirichlet data of the capacitor problem: `Some(1)` on inner, `Some(0)` on outer vertices.
    pub fn capacitor_constraints(&self) -> Result<Vec<Option<f64>>, MeshError> {
        self.condenser_constraints(BoundaryTag::Inner, BoundaryTag::Outer)
    }

    /// `Some(1)` on vertices of edges tagged `inner`, `Some(0)` on those tagged `outer`.
    pub fn condenser_constraints(&self, inner: BoundaryTag, outer: BoundaryTag) -> Result<Vec<Option<f64>>, MeshError> {
        if inner == outer {
            return Err(MeshError::SameTag(inner));
        }
        let inner_v = self.tagged_vertices(inner);
        let outer_v = self.tagged_vertices(outer);
        if inner_v.is_empty() {
            return Err(MeshError::MissingTag(inner));
        }
        if outer_v.is_empty() {
            return Err(MeshError::MissingTag(outer));
        }
        let mut fixed = vec![None; self.vertices.len()];
        for &i in &inner_v {
            fixed[i] = Some(1.0);
        }
        for &i in &outer_v {
            if fixed[i].is_some() {
                return Err(MeshError::TagConflict(i));
            }
            fixed[i] = Some(0.0);
        }
        Ok(fixed)
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let two_a = 2.0 * self.area(t);
        [
            [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a],
            [(c[1] - a[1]) / two_a, (a[0] - c[0]) / two_a],
            [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a],
        ]
    }

    /// Piecewise-linear interpolation of `field` at `x`, or `None` outside the mesh.
    pub fn interpolate(&self, field: &[f64], x: [f64; 2]) -> Option<f64> {
        let tol = 1e-12;
        for (k, t) in self.triangles.iter().enumerate() {
            let area = self.area(k);
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let l0 = signed_area(&[x, b, c], [0, 1, 2]) / area;
            let l1 = signed_area(&[a, x, c], [0, 1, 2]) / area;
            let l2 = 1.0 - l0 - l1;
            if l0 >= -tol && l1 >= -tol && l2 >= -tol {
                return Some(l0 * field[t[0]] + l1 * field[t[1]] + l2 * field[t[2]]);
            }
        }
        None
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.vertices.len(), self.triangles.len(), self.boundary.len());
        for v in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e}\n", v[0], v[1]));
        }
        for t in &self.triangles {
            s.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for e in &self.boundary {
            s.push_str(&format!("{} {} {}\n", e.a, e.b, e.tag));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self, MeshError> {
        std::fs::read_to_string(path)?.parse()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn fields<T: FromStr>(line_no: usize, line: &str, count: usize, what: &str) -> Result<Vec<T>, MeshError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != count {
        return Err(parse_err(line_no, format!("expected {count} fields for {what}, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| parse_err(line_no, format!("cannot parse '{p}' in {what}"))))
        .collect()
}

impl FromStr for Mesh {
    type Err = MeshError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file while reading {what}")));
        let (ln, header) = next("header")?;
        let counts: Vec<usize> = fields(ln, header, 3, "header 'nv nt nbe'")?;
        let (nv, nt, nbe) = (counts[0], counts[1], counts[2]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("vertex")?;
            let xy: Vec<f64> = fields(ln, l, 2, "vertex")?;
            if !xy.iter().all(|v| v.is_finite()) {
                return Err(parse_err(ln, "non-finite coordinate"));
            }
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = next("triangle")?;
            let t: Vec<usize> = fields(ln, l, 3, "triangle")?;
            if let Some(&bad) = t.iter().find(|&&i| i >= nv) {
                return Err(parse_err(ln, format!("vertex index {bad} out of range (nv = {nv})")));
            }
            triangles.push([t[0], t[1], t[2]]);
        }
        let mut boundary = Vec::with_capacity(nbe);
        for _ in 0..nbe {
            let (ln, l) = next("boundary edge")?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(ln, format!("expected 'i j tag', found {} fields", parts.len())));
            }
            let idx = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&i| i < nv)
                    .ok_or_else(|| parse_err(ln, format!("invalid vertex index '{s}'")))
            };
            let tag = parts[2].parse::<BoundaryTag>().map_err(|m| parse_err(ln, m))?;
            boundary.push(BoundaryEdge {
                a: idx(parts[0])?,
                b: idx(parts[1])?,
                tag,
            });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing content after the declared boundary edges"));
        }
        Mesh::new(vertices, triangles, boundary)
    }
}
