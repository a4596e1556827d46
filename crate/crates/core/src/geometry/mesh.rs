use std::collections::HashMap;
use std::fmt::Write as _;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::boundary::local_polyline;
use super::domain::point_in_polygon;
use super::{Domain, GeometryError, Point, Result};

/// Minimum interior angle guaranteed on every emitted mesh.
pub const MIN_ANGLE_DEG: f64 = 20.0;
/// Angle handed to the refiner, a little above the guarantee.
const REFINE_ANGLE_DEG: f64 = 22.0;
const SMOOTHING_PASSES: usize = 3;
const SLIVER_AREA: f64 = 1e-10;

/// Conforming triangulation with counterclockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub h: f64,
}

fn tri_area(p: Point, q: Point, r: Point) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn tri_min_angle(p: Point, q: Point, r: Point) -> f64 {
    let pts = [p, q, r];
    let mut min = f64::INFINITY;
    for k in 0..3 {
        let a = pts[k];
        let b = pts[(k + 1) % 3];
        let c = pts[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
        min = min.min(ang);
    }
    min.to_degrees()
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area of triangle `t` (positive for counterclockwise).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.corners(t);
        tri_area(p, q, r)
    }

    pub fn area(&self) -> f64 {
        let mut areas: Vec<f64> = (0..self.triangles.len()).map(|t| self.triangle_area(t)).collect();
        super::integrate::pairwise_sum(&mut areas)
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.worst_triangle().map_or(180.0, |(_, a)| a)
    }

    fn worst_triangle(&self) -> Option<(usize, f64)> {
        (0..self.triangles.len())
            .map(|t| {
                let [p, q, r] = self.corners(t);
                (t, tri_min_angle(p, q, r))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Undirected edges with the number of triangles using each, sorted.
    pub fn edges(&self) -> Vec<([usize; 2], usize)> {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry([a.min(b), a.max(b)]).or_default() += 1;
            }
        }
        let mut e: Vec<_> = count.into_iter().collect();
        e.sort_unstable();
        e
    }

    /// Edges used by exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.edges().into_iter().filter(|e| e.1 == 1).map(|e| e.0).collect()
    }

    /// Check conformity, orientation, area and angle bounds.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(GeometryError::InvalidMesh(s));
        if self.boundary.len() != self.vertices.len() {
            return bad("boundary flag count differs from vertex count".into());
        }
        let nv = self.vertices.len();
        let min_area = 1e-3 * self.h * self.h;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return bad(format!("triangle {t} has an out-of-range vertex"));
            }
            let a = self.triangle_area(t);
            if a <= 0.0 {
                return bad(format!("triangle {t} is not counterclockwise"));
            }
            if a < min_area {
                return bad(format!("triangle {t} area {a:e} below {min_area:e}"));
            }
        }
        let mut used = vec![false; nv];
        for tri in &self.triangles {
            for &i in tri {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return bad(format!("vertex {i} belongs to no triangle"));
        }
        for (e, c) in self.edges() {
            if c > 2 {
                return bad(format!("edge {e:?} shared by {c} triangles"));
            }
            if c == 1 && !(self.boundary[e[0]] && self.boundary[e[1]]) {
                return bad(format!("boundary edge {e:?} joins an unflagged vertex"));
            }
        }
        if let Some((t, a)) = self.worst_triangle() {
            if a < MIN_ANGLE_DEG - 1e-9 {
                return Err(GeometryError::Refinement {
                    triangle: t,
                    angle_deg: a,
                });
            }
        }
        Ok(())
    }

    /// Plain-text form: `mesh v1 nv nt`, vertex lines `x y flag`, then
    /// 0-based triangle lines `i j k`. A trailing `h <value>` line records
    /// the target size.
    pub fn to_text(&self) -> String {
        self.to_text_with_values(None)
    }

    /// As [`Mesh::to_text`] with an extra per-vertex value column.
    pub fn to_text_with_values(&self, values: Option<&[f64]>) -> String {
        let mut s = format!("mesh v1 {} {}\n", self.vertices.len(), self.triangles.len());
        for (i, (p, b)) in self.vertices.iter().zip(&self.boundary).enumerate() {
            let _ = write!(s, "{:.17e} {:.17e} {}", p[0], p[1], u8::from(*b));
            if let Some(v) = values {
                let _ = write!(s, " {:.17e}", v[i]);
            }
            s.push('\n');
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "h {:.17e}", self.h);
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        Ok(Self::from_text_with_values(text)?.0)
    }

    /// Parse a mesh and, when present, the per-vertex value column.
    pub fn from_text_with_values(text: &str) -> Result<(Mesh, Option<Vec<f64>>)> {
        let err = |line: usize, reason: &str| GeometryError::MeshFormat {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let hp: Vec<&str> = head.split_whitespace().collect();
        if hp.len() != 4 || hp[0] != "mesh" || hp[1] != "v1" {
            return Err(err(1, "expected header `mesh v1 nv nt`"));
        }
        let nv: usize = hp[2].parse().map_err(|_| err(1, "bad vertex count"))?;
        let nt: usize = hp[3].parse().map_err(|_| err(1, "bad triangle count"))?;
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        let mut values: Vec<f64> = Vec::new();
        for _ in 0..nv {
            let (i, l) = lines.next().ok_or_else(|| err(0, "missing vertex lines"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 && f.len() != 4 {
                return Err(err(i + 1, "expected `x y flag [value]`"));
            }
            let x: f64 = f[0].parse().map_err(|_| err(i + 1, "bad x"))?;
            let y: f64 = f[1].parse().map_err(|_| err(i + 1, "bad y"))?;
            let b = match f[2] {
                "0" => false,
                "1" => true,
                _ => return Err(err(i + 1, "flag must be 0 or 1")),
            };
            if f.len() == 4 {
                values.push(f[3].parse().map_err(|_| err(i + 1, "bad value"))?);
            }
            vertices.push([x, y]);
            boundary.push(b);
        }
        if !values.is_empty() && values.len() != nv {
            return Err(err(0, "value column present on some vertices only"));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (i, l) = lines.next().ok_or_else(|| err(0, "missing triangle lines"))?;
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(i + 1, "bad triangle index"))?;
            if f.len() != 3 || f.iter().any(|&k| k >= nv) {
                return Err(err(i + 1, "expected three vertex indices below nv"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let mut h = f64::NAN;
        if let Some((i, l)) = lines.next() {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 || f[0] != "h" {
                return Err(err(i + 1, "expected `h value` or end of input"));
            }
            h = f[1].parse().map_err(|_| err(i + 1, "bad h"))?;
        }
        if h.is_nan() {
            h = mean_edge_length(&vertices, &triangles);
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary,
            h,
        };
        Ok((mesh, if values.is_empty() { None } else { Some(values) }))
    }
}

fn mean_edge_length(v: &[Point], t: &[[usize; 3]]) -> f64 {
    let mut s = 0.0;
    let mut n = 0usize;
    for tri in t {
        for k in 0..3 {
            let p = v[tri[k]];
            let q = v[tri[(k + 1) % 3]];
            s += (q[0] - p[0]).hypot(q[1] - p[1]);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Hexagonal lattice points inside `poly` at distance at least `gap` from it.
fn lattice_seeds(poly: &[Point], h: f64, gap: f64) -> Vec<Point> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let dy = 0.5 * 3f64.sqrt() * h;
    let n = poly.len();
    let mut out = Vec::new();
    let j0 = (lo[1] / dy).floor() as i64;
    let j1 = (hi[1] / dy).ceil() as i64;
    for j in j0..=j1 {
        let y = j as f64 * dy;
        let off = if j.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        let i0 = ((lo[0] - off) / h).floor() as i64;
        let i1 = ((hi[0] - off) / h).ceil() as i64;
        for i in i0..=i1 {
            let p = [i as f64 * h + off, y];
            if !point_in_polygon(poly, p) {
                continue;
            }
            if (0..n).all(|k| dist_to_segment(p, poly[k], poly[(k + 1) % n]) >= gap) {
                out.push(p);
            }
        }
    }
    out
}

/// Triangles of `cdt` inside `poly`, compacted, with boundary flags from
/// constraint edges.
fn extract(cdt: &Cdt, poly: &[Point], h: f64) -> Mesh {
    let pos: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut on_constraint = vec![false; pos.len()];
    for e in cdt.undirected_edges() {
        if cdt.is_constraint_edge(e.fix()) {
            for v in e.vertices() {
                on_constraint[v.fix().index()] = true;
            }
        }
    }
    let mut tris = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices().map(|v| v.fix().index());
        let c = [
            (pos[vs[0]][0] + pos[vs[1]][0] + pos[vs[2]][0]) / 3.0,
            (pos[vs[0]][1] + pos[vs[1]][1] + pos[vs[2]][1]) / 3.0,
        ];
        // slivers between nearly collinear boundary points carry no area
        let a = tri_area(pos[vs[0]], pos[vs[1]], pos[vs[2]]);
        if a > SLIVER_AREA * h * h && point_in_polygon(poly, c) {
            tris.push(vs);
        }
    }
    tris.sort_unstable();
    let mut used = vec![false; pos.len()];
    for t in &tris {
        for &i in t {
            used[i] = true;
        }
    }
    let mut map = vec![usize::MAX; pos.len()];
    let mut vertices = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..pos.len() {
        if used[i] {
            map[i] = vertices.len();
            vertices.push(pos[i]);
            boundary.push(on_constraint[i]);
        }
    }
    let triangles = tris.iter().map(|t| t.map(|i| map[i])).collect();
    Mesh {
        vertices,
        triangles,
        boundary,
        h,
    }
}

fn constraint_edges(mesh: &Mesh) -> Vec<[usize; 2]> {
    mesh.boundary_edges()
}

fn build_cdt(points: &[Point], edges: Vec<[usize; 2]>) -> Result<Cdt> {
    let verts: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let n = verts.len();
    let cdt = Cdt::bulk_load_cdt(verts, edges).map_err(|e| GeometryError::Triangulation(format!("{e:?}")))?;
    if cdt.num_vertices() != n {
        return Err(GeometryError::Triangulation("duplicate vertices".into()));
    }
    Ok(cdt)
}

/// One pass of Laplacian smoothing of interior vertices, re-triangulated.
fn smooth(mesh: &Mesh, poly: &[Point]) -> Result<Mesh> {
    let nv = mesh.vertices.len();
    let mut sum = vec![[0.0; 2]; nv];
    let mut cnt = vec![0usize; nv];
    for (e, _) in mesh.edges() {
        for (a, b) in [(e[0], e[1]), (e[1], e[0])] {
            sum[a][0] += mesh.vertices[b][0];
            sum[a][1] += mesh.vertices[b][1];
            cnt[a] += 1;
        }
    }
    let mut moved = mesh.vertices.clone();
    for i in 0..nv {
        if !mesh.boundary[i] && cnt[i] > 0 {
            let p = [sum[i][0] / cnt[i] as f64, sum[i][1] / cnt[i] as f64];
            if point_in_polygon(poly, p) {
                moved[i] = p;
            }
        }
    }
    let cdt = build_cdt(&moved, constraint_edges(mesh))?;
    let mut out = extract(&cdt, poly, mesh.h);
    // vertex order is preserved by the bulk loader; keep flags of the input
    if out.vertices.len() == nv {
        out.boundary = mesh.boundary.clone();
    }
    Ok(out)
}

/// Triangulate the polygonized domain with target edge length `h`.
pub fn triangulate(d: &Domain, h: f64) -> Result<Mesh> {
    triangulate_level(d, h, 0)
}

/// As [`triangulate`] with the boundary polyline refined `level` times.
pub(crate) fn triangulate_level(d: &Domain, h: f64, level: u32) -> Result<Mesh> {
    if !(h.is_finite() && h > 0.0) {
        return Err(GeometryError::Dimension { name: "h", value: h });
    }
    let line = local_polyline(d.shape(), h, level)?;
    let poly = line.points;
    let nb = poly.len();
    let seeds = lattice_seeds(&poly, h, 0.6 * h);
    let mut points = poly.clone();
    points.extend(seeds);
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let mut cdt = build_cdt(&points, edges)?;
    let expected = (points.len() + 16) * 8;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
        .with_max_allowed_area(0.75 * h * h)
        .with_max_additional_vertices(expected)
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    let mut mesh = extract(&cdt, &poly, h);
    if !result.refinement_complete {
        let (t, a) = mesh.worst_triangle().unwrap_or((0, 0.0));
        return Err(GeometryError::Refinement {
            triangle: t,
            angle_deg: a,
        });
    }
    for _ in 0..SMOOTHING_PASSES {
        let candidate = smooth(&mesh, &poly)?;
        let ok = candidate.min_angle_deg() >= MIN_ANGLE_DEG
            && candidate.min_angle_deg() >= mesh.min_angle_deg().min(MIN_ANGLE_DEG + 5.0)
            && (candidate.area() - mesh.area()).abs() <= 1e-12 * mesh.area();
        if !ok {
            break;
        }
        mesh = candidate;
    }
    let pl = d.placement();
    if !pl.is_identity() {
        for p in &mut mesh.vertices {
            *p = pl.apply(*p);
        }
    }
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let d = Domain::square(1.0).unwrap();
        let m = triangulate(&d, 0.25).unwrap();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let vals: Vec<f64> = (0..m.num_vertices()).map(|i| i as f64 * 0.5).collect();
        let (m2, v2) = Mesh::from_text_with_values(&m.to_text_with_values(Some(&vals))).unwrap();
        assert_eq!(m2, m);
        assert_eq!(v2.unwrap(), vals);
    }

    #[test]
    fn malformed_text_names_the_line() {
        let e = Mesh::from_text("mesh v1 1 0\n0 0 2\n").unwrap_err();
        assert!(matches!(e, GeometryError::MeshFormat { line: 2, .. }), "{e:?}");
        assert!(Mesh::from_text("grid v1 1 0").is_err());
    }
}
