//! Conforming triangulations of the benchmark channel (a rectangle with a
//! circular hole) and of plain rectangles, plus the coarse rectangular
//! overlay used for observations.
//!
//! The channel mesh is produced from a structured tensor grid whose levels
//! are aligned with a square box around the cylinder; the box interior is
//! filled with an O-ring of quads between the circle and the box perimeter,
//! so the cylinder boundary has exactly `circle_segments` edges and every
//! cylinder vertex lies on the circle.

use crate::{fnv1a, Error, Real, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Channel length (m).
pub const CHANNEL_LENGTH: Real = 2.2;
/// Channel height (m).
pub const CHANNEL_HEIGHT: Real = 0.41;
/// Cylinder center (m).
pub const CYLINDER_CENTER: Point = [0.2, 0.2];
/// Cylinder radius (m).
pub const CYLINDER_RADIUS: Real = 0.05;
/// Half-side of the structured box enclosing the cylinder.
const BOX_HALF: Real = 0.08;

pub type Point = [Real; 2];

/// Boundary classification of the benchmark domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryMarker {
    Inflow,
    Outflow,
    Wall,
    Cylinder,
}

impl BoundaryMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMarker::Inflow => "inflow",
            BoundaryMarker::Outflow => "outflow",
            BoundaryMarker::Wall => "wall",
            BoundaryMarker::Cylinder => "cylinder",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inflow" => Some(BoundaryMarker::Inflow),
            "outflow" => Some(BoundaryMarker::Outflow),
            "wall" => Some(BoundaryMarker::Wall),
            "cylinder" => Some(BoundaryMarker::Cylinder),
            _ => None,
        }
    }
}

/// Marked boundary edge; vertex order is as constructed (not sorted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub marker: BoundaryMarker,
}

/// Immutable conforming triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Maximum triangle diameter.
    pub h: Real,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> Real {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> Real {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn tri_diameter(a: Point, b: Point, c: Point) -> Real {
    dist(a, b).max(dist(b, c)).max(dist(c, a))
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> Real {
        let [a, b, c] = self.triangle_vertices(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> Real {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [Real::INFINITY; 2];
        let mut hi = [Real::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Undirected edge set with incident-triangle counts.
    fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut inc: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let key = (u.min(v), u.max(v));
                *inc.entry(key).or_insert(0) += 1;
            }
        }
        inc
    }

    /// Check the structural invariants; returns a named violation on failure.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= self.vertices.len() {
                    return Err(Error::Config(format!(
                        "triangle {t} references missing vertex {v}"
                    )));
                }
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Config(format!(
                    "triangle {t} has non-positive area {:e}",
                    self.triangle_area(t)
                )));
            }
        }
        let inc = self.edge_incidence();
        for (e, count) in &inc {
            if *count > 2 {
                return Err(Error::Config(format!(
                    "edge ({},{}) shared by {count} triangles",
                    e.0, e.1
                )));
            }
        }
        let mut marked: HashMap<(usize, usize), usize> = HashMap::new();
        for be in &self.boundary_edges {
            let key = (be.a.min(be.b), be.a.max(be.b));
            *marked.entry(key).or_insert(0) += 1;
        }
        for (e, n) in &marked {
            if *n != 1 {
                return Err(Error::Config(format!(
                    "boundary edge ({},{}) marked {n} times",
                    e.0, e.1
                )));
            }
            match inc.get(e) {
                Some(1) => {}
                Some(c) => {
                    return Err(Error::Config(format!(
                        "marked edge ({},{}) belongs to {c} triangles",
                        e.0, e.1
                    )))
                }
                None => {
                    return Err(Error::Config(format!(
                        "marked edge ({},{}) is not a mesh edge",
                        e.0, e.1
                    )))
                }
            }
        }
        for (e, count) in &inc {
            if *count == 1 && !marked.contains_key(e) {
                return Err(Error::Config(format!(
                    "boundary edge ({},{}) has no marker",
                    e.0, e.1
                )));
            }
        }
        Ok(())
    }

    /// Locate the triangle containing `p` (barycentrically closest triangle).
    /// Returns `(triangle, barycentric)`; `None` when `p` lies clearly outside.
    pub fn find_triangle(&self, p: Point) -> Option<(usize, [Real; 3])> {
        let mut best: Option<(usize, [Real; 3], Real)> = None;
        for t in 0..self.n_triangles() {
            let [a, b, c] = self.triangle_vertices(t);
            let area = signed_area(a, b, c);
            let la = signed_area(p, b, c) / area;
            let lb = signed_area(a, p, c) / area;
            let lc = signed_area(a, b, p) / area;
            let min_bary = la.min(lb).min(lc);
            match &best {
                Some((_, _, m)) if *m >= min_bary => {}
                _ => best = Some((t, [la, lb, lc], min_bary)),
            }
        }
        match best {
            Some((t, bary, m)) if m > -1e-6 => Some((t, bary)),
            _ => None,
        }
    }

    /// Hash of the canonical text serialization; embedded in artifact headers.
    pub fn hash(&self) -> u64 {
        fnv1a(self.to_text().as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.n_vertices(),
            self.n_triangles(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for be in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", be.a, be.b, be.marker.as_str());
        }
        s
    }
}

fn recompute_h(vertices: &[Point], triangles: &[[usize; 3]]) -> Real {
    triangles
        .iter()
        .map(|t| tri_diameter(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
        .fold(0.0, Real::max)
}

/// Uniform partition of `[a, b]` with spacing at most `hmax`.
fn partition(a: Real, b: Real, hmax: Real) -> Vec<Real> {
    let n = (((b - a) / hmax).ceil() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * (i as Real) / (n as Real)).collect()
}

struct GridBuilder {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl GridBuilder {
    fn new() -> Self {
        GridBuilder { vertices: Vec::new(), triangles: Vec::new(), boundary_edges: Vec::new() }
    }

    fn push_vertex(&mut self, p: Point) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    /// Push a triangle, flipping to counterclockwise if needed.
    fn push_tri(&mut self, a: usize, b: usize, c: usize) {
        if signed_area(self.vertices[a], self.vertices[b], self.vertices[c]) > 0.0 {
            self.triangles.push([a, b, c]);
        } else {
            self.triangles.push([a, c, b]);
        }
    }

    fn finish(self) -> Result<Mesh> {
        let h = recompute_h(&self.vertices, &self.triangles);
        let mesh = Mesh {
            vertices: self.vertices,
            triangles: self.triangles,
            boundary_edges: self.boundary_edges,
            h,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Structured triangulation of the rectangle `[0, width] x [0, height]`.
///
/// Markers follow the channel convention: `x = 0` inflow, `x = width`
/// outflow, horizontal sides wall.
pub fn generate_rect_mesh(width: Real, height: Real, target_h: Real) -> Result<Mesh> {
    if !(width > 0.0) || !(height > 0.0) {
        return Err(Error::Config(format!(
            "rect mesh: width/height must be positive, got {width} x {height}"
        )));
    }
    if !(target_h > 0.0) {
        return Err(Error::Config(format!("rect mesh: target_h must be positive, got {target_h}")));
    }
    let xs = partition(0.0, width, target_h);
    let ys = partition(0.0, height, target_h);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let mut g = GridBuilder::new();
    for j in 0..=ny {
        for i in 0..=nx {
            g.push_vertex([xs[i], ys[j]]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    for j in 0..ny {
        for i in 0..nx {
            let (bl, br, tr, tl) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            g.push_tri(bl, br, tr);
            g.push_tri(bl, tr, tl);
        }
    }
    for j in 0..ny {
        g.boundary_edges.push(BoundaryEdge {
            a: id(0, j),
            b: id(0, j + 1),
            marker: BoundaryMarker::Inflow,
        });
        g.boundary_edges.push(BoundaryEdge {
            a: id(nx, j),
            b: id(nx, j + 1),
            marker: BoundaryMarker::Outflow,
        });
    }
    for i in 0..nx {
        g.boundary_edges.push(BoundaryEdge {
            a: id(i, 0),
            b: id(i + 1, 0),
            marker: BoundaryMarker::Wall,
        });
        g.boundary_edges.push(BoundaryEdge {
            a: id(i, ny),
            b: id(i + 1, ny),
            marker: BoundaryMarker::Wall,
        });
    }
    g.finish()
}

/// Conforming mesh of the channel with the cylindrical hole.
///
/// `circle_segments` fixes the number of cylinder boundary edges exactly and
/// must be a multiple of 4 (the O-ring is tied to the four box sides). All
/// cylinder vertices lie on the circle. Realized `h <= 1.5 * target_h`.
pub fn generate_channel_mesh(target_h: Real, circle_segments: usize) -> Result<Mesh> {
    if !(target_h > 0.0) {
        return Err(Error::Config(format!(
            "channel mesh: target_h must be positive, got {target_h}"
        )));
    }
    if circle_segments < 8 {
        return Err(Error::Config(format!(
            "channel mesh: circle_segments must be at least 8, got {circle_segments}"
        )));
    }
    if circle_segments % 4 != 0 {
        return Err(Error::Config(format!(
            "channel mesh: circle_segments must be a multiple of 4, got {circle_segments}"
        )));
    }
    let [cx, cy] = CYLINDER_CENTER;
    let a = BOX_HALF;
    let m = circle_segments / 4;
    let s = 2.0 * a / (m as Real);
    // box spacing must keep triangle diameters within the h bound
    if s * std::f64::consts::SQRT_2 > 1.5 * target_h {
        return Err(Error::Config(format!(
            "channel mesh: circle_segments {circle_segments} too coarse for target_h {target_h} \
             (needs at least {})",
            (8.0 * a * std::f64::consts::SQRT_2 / (1.5 * target_h)).ceil() as usize
        )));
    }

    // tensor levels; box band indices are known by construction
    let mut xs = partition(0.0, cx - a, target_h);
    let ix_lo = xs.len() - 1;
    for k in 1..=m {
        xs.push(cx - a + s * (k as Real));
    }
    let ix_hi = xs.len() - 1;
    xs.extend(partition(cx + a, CHANNEL_LENGTH, target_h).into_iter().skip(1));

    let mut ys = partition(0.0, cy - a, target_h);
    let iy_lo = ys.len() - 1;
    for k in 1..=m {
        ys.push(cy - a + s * (k as Real));
    }
    let iy_hi = ys.len() - 1;
    ys.extend(partition(cy + a, CHANNEL_HEIGHT, target_h).into_iter().skip(1));

    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let mut g = GridBuilder::new();
    let mut vid: Vec<Option<usize>> = vec![None; (nx + 1) * (ny + 1)];
    let strictly_inside_box = |i: usize, j: usize| i > ix_lo && i < ix_hi && j > iy_lo && j < iy_hi;
    for j in 0..=ny {
        for i in 0..=nx {
            if !strictly_inside_box(i, j) {
                vid[j * (nx + 1) + i] = Some(g.push_vertex([xs[i], ys[j]]));
            }
        }
    }
    let id = |vid: &[Option<usize>], i: usize, j: usize| {
        vid[j * (nx + 1) + i].expect("vertex outside the carved box")
    };
    let cell_in_box =
        |i: usize, j: usize| i >= ix_lo && i + 1 <= ix_hi && j >= iy_lo && j + 1 <= iy_hi;
    for j in 0..ny {
        for i in 0..nx {
            if cell_in_box(i, j) {
                continue;
            }
            let (bl, br) = (id(&vid, i, j), id(&vid, i + 1, j));
            let (tr, tl) = (id(&vid, i + 1, j + 1), id(&vid, i, j + 1));
            g.push_tri(bl, br, tr);
            g.push_tri(bl, tr, tl);
        }
    }
    for j in 0..ny {
        g.boundary_edges.push(BoundaryEdge {
            a: id(&vid, 0, j),
            b: id(&vid, 0, j + 1),
            marker: BoundaryMarker::Inflow,
        });
        g.boundary_edges.push(BoundaryEdge {
            a: id(&vid, nx, j),
            b: id(&vid, nx, j + 1),
            marker: BoundaryMarker::Outflow,
        });
    }
    for i in 0..nx {
        g.boundary_edges.push(BoundaryEdge {
            a: id(&vid, i, 0),
            b: id(&vid, i + 1, 0),
            marker: BoundaryMarker::Wall,
        });
        g.boundary_edges.push(BoundaryEdge {
            a: id(&vid, i, ny),
            b: id(&vid, i + 1, ny),
            marker: BoundaryMarker::Wall,
        });
    }

    // O-ring between the circle and the box perimeter. Perimeter nodes are
    // sorted by angle around the cylinder center; each starts a radial line.
    let mut ring: Vec<(Real, usize)> = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let on_perimeter = ((i == ix_lo || i == ix_hi) && (iy_lo..=iy_hi).contains(&j))
                || ((j == iy_lo || j == iy_hi) && (ix_lo..=ix_hi).contains(&i));
            if on_perimeter {
                let v = id(&vid, i, j);
                let p = g.vertices[v];
                ring.push(((p[1] - cy).atan2(p[0] - cx), v));
            }
        }
    }
    ring.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite perimeter angles"));
    let n_ring = ring.len();
    debug_assert_eq!(n_ring, circle_segments);

    let gap_max = a * std::f64::consts::SQRT_2 - CYLINDER_RADIUS;
    let n_r = ((gap_max / s).ceil() as usize).max(2);
    // layers[j][i]: j = 0 on the circle, j = n_r on the box perimeter
    let mut layers: Vec<Vec<usize>> = Vec::with_capacity(n_r + 1);
    for j in 0..=n_r {
        let mut layer = Vec::with_capacity(n_ring);
        for &(theta, outer) in &ring {
            if j == n_r {
                layer.push(outer);
            } else {
                let c = [cx + CYLINDER_RADIUS * theta.cos(), cy + CYLINDER_RADIUS * theta.sin()];
                let q = g.vertices[outer];
                let t = (j as Real) / (n_r as Real);
                layer.push(g.push_vertex([c[0] + t * (q[0] - c[0]), c[1] + t * (q[1] - c[1])]));
            }
        }
        layers.push(layer);
    }
    for j in 0..n_r {
        for i in 0..n_ring {
            let i2 = (i + 1) % n_ring;
            let (a0, b0) = (layers[j][i], layers[j][i2]);
            let (b1, a1) = (layers[j + 1][i2], layers[j + 1][i]);
            g.push_tri(a0, b0, b1);
            g.push_tri(a0, b1, a1);
        }
    }
    for i in 0..n_ring {
        g.boundary_edges.push(BoundaryEdge {
            a: layers[0][i],
            b: layers[0][(i + 1) % n_ring],
            marker: BoundaryMarker::Cylinder,
        });
    }
    g.finish()
}

/// Split every triangle into four via edge midpoints. Boundary markers are
/// inherited edge-by-edge; midpoints of cylinder edges are re-projected onto
/// the circle.
pub fn uniform_refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cyl_edges: std::collections::HashSet<(usize, usize)> = Default::default();
    for be in &mesh.boundary_edges {
        if be.marker == BoundaryMarker::Cylinder {
            cyl_edges.insert((be.a.min(be.b), be.a.max(be.b)));
        }
    }
    let mut mid = |u: usize, v: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (u.min(v), u.max(v));
        if let Some(&m) = midpoint.get(&key) {
            return m;
        }
        let pa = vertices[u];
        let pb = vertices[v];
        let mut p = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        if cyl_edges.contains(&key) {
            let [cx, cy] = CYLINDER_CENTER;
            let d = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt();
            p = [cx + CYLINDER_RADIUS * (p[0] - cx) / d, cy + CYLINDER_RADIUS * (p[1] - cy) / d];
        }
        vertices.push(p);
        let id = vertices.len() - 1;
        midpoint.insert(key, id);
        id
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in &mesh.triangles {
        let mab = mid(a, b, &mut vertices);
        let mbc = mid(b, c, &mut vertices);
        let mca = mid(c, a, &mut vertices);
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let m = mid(be.a, be.b, &mut vertices);
        boundary_edges.push(BoundaryEdge { a: be.a, b: m, marker: be.marker });
        boundary_edges.push(BoundaryEdge { a: m, b: be.b, marker: be.marker });
    }
    let h = recompute_h(&vertices, &triangles);
    Mesh { vertices, triangles, boundary_edges, h }
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh.to_text()).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_mesh(&text, &path.display().to_string())
}

pub fn parse_mesh(text: &str, origin: &str) -> Result<Mesh> {
    let err = |line: usize, msg: String| Error::Parse { path: origin.to_string(), line, msg };
    let mut lines = text.lines().enumerate();
    let (_, header) =
        lines.next().ok_or_else(|| err(1, "empty file, expected `NV NT NE` header".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(err(1, format!("expected `NV NT NE`, got {header:?}")));
    }
    let parse_count =
        |s: &str, what: &str| s.parse::<usize>().map_err(|_| err(1, format!("bad {what} count {s:?}")));
    let nv = parse_count(head[0], "vertex")?;
    let nt = parse_count(head[1], "triangle")?;
    let ne = parse_count(head[2], "edge")?;

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| err(k + 1, format!("missing vertex {k}")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(err(ln + 1, format!("expected `x y`, got {line:?}")));
        }
        let x =
            f[0].parse::<Real>().map_err(|_| err(ln + 1, format!("bad coordinate {:?}", f[0])))?;
        let y =
            f[1].parse::<Real>().map_err(|_| err(ln + 1, format!("bad coordinate {:?}", f[1])))?;
        vertices.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for k in 0..nt {
        let (ln, line) =
            lines.next().ok_or_else(|| err(nv + k + 1, format!("missing triangle {k}")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(ln + 1, format!("expected `i j k`, got {line:?}")));
        }
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(&f) {
            let v = tok.parse::<usize>().map_err(|_| err(ln + 1, format!("bad index {tok:?}")))?;
            if v >= nv {
                return Err(err(ln + 1, format!("triangle references missing vertex {v}")));
            }
            *slot = v;
        }
        triangles.push(tri);
    }
    let mut boundary_edges = Vec::with_capacity(ne);
    for k in 0..ne {
        let (ln, line) =
            lines.next().ok_or_else(|| err(nv + nt + k + 1, format!("missing edge {k}")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(ln + 1, format!("expected `i j marker`, got {line:?}")));
        }
        let a = f[0].parse::<usize>().map_err(|_| err(ln + 1, format!("bad index {:?}", f[0])))?;
        let b = f[1].parse::<usize>().map_err(|_| err(ln + 1, format!("bad index {:?}", f[1])))?;
        if a >= nv || b >= nv {
            return Err(err(ln + 1, format!("edge references missing vertex {}", a.max(b))));
        }
        let marker = BoundaryMarker::parse(f[2])
            .ok_or_else(|| err(ln + 1, format!("unknown marker {:?}", f[2])))?;
        boundary_edges.push(BoundaryEdge { a, b, marker });
    }
    let h = recompute_h(&vertices, &triangles);
    let mesh = Mesh { vertices, triangles, boundary_edges, h };
    mesh.validate().map_err(|e| match e {
        Error::Config(msg) => err(1, msg),
        other => other,
    })?;
    Ok(mesh)
}

/// One retained cell of the coarse observation overlay.
#[derive(Debug, Clone, Copy)]
pub struct OverlayCell {
    pub lo: Point,
    pub hi: Point,
    pub grid_index: (usize, usize),
}

impl OverlayCell {
    pub fn center(&self) -> Point {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }
}

/// Axis-aligned coarse rectangle grid over the mesh bounding box. Cells that
/// contain no mesh vertex (e.g. fully inside the cylinder hole) are dropped.
#[derive(Debug, Clone)]
pub struct CoarseOverlay {
    pub nx: usize,
    pub ny: usize,
    /// Rectangle width (the `H` of the observation operator).
    pub h_x: Real,
    pub h_y: Real,
    pub origin: Point,
    pub cells: Vec<OverlayCell>,
    /// Grid slot -> retained-cell index.
    slot_to_cell: Vec<Option<usize>>,
}

impl CoarseOverlay {
    /// Cell containing the point, honoring the half-open tiling (upper edges
    /// belong to the last row/column).
    pub fn cell_of_point(&self, p: Point) -> Option<usize> {
        let fx = (p[0] - self.origin[0]) / self.h_x;
        let fy = (p[1] - self.origin[1]) / self.h_y;
        if fx < -1e-12 || fy < -1e-12 {
            return None;
        }
        if fx > self.nx as Real + 1e-12 || fy > self.ny as Real + 1e-12 {
            return None;
        }
        let ix = (fx.floor() as isize).clamp(0, self.nx as isize - 1) as usize;
        let iy = (fy.floor() as isize).clamp(0, self.ny as isize - 1) as usize;
        self.slot_to_cell[iy * self.nx + ix]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Overlay from an explicit cell-count pair.
pub fn build_coarse_overlay_counts(mesh: &Mesh, nx: usize, ny: usize) -> Result<CoarseOverlay> {
    if nx == 0 || ny == 0 {
        return Err(Error::Config(format!("overlay counts must be positive, got {nx}x{ny}")));
    }
    let (lo, hi) = mesh.bounding_box();
    let h_x = (hi[0] - lo[0]) / nx as Real;
    let h_y = (hi[1] - lo[1]) / ny as Real;
    let mut hit = vec![false; nx * ny];
    let index_of = |p: Point| -> (usize, usize) {
        let ix = (((p[0] - lo[0]) / h_x).floor() as isize).clamp(0, nx as isize - 1) as usize;
        let iy = (((p[1] - lo[1]) / h_y).floor() as isize).clamp(0, ny as isize - 1) as usize;
        (ix, iy)
    };
    for v in &mesh.vertices {
        let (ix, iy) = index_of(*v);
        hit[iy * nx + ix] = true;
    }
    let mut cells = Vec::new();
    let mut slot_to_cell = vec![None; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            if hit[iy * nx + ix] {
                slot_to_cell[iy * nx + ix] = Some(cells.len());
                cells.push(OverlayCell {
                    lo: [lo[0] + h_x * ix as Real, lo[1] + h_y * iy as Real],
                    hi: [lo[0] + h_x * (ix + 1) as Real, lo[1] + h_y * (iy + 1) as Real],
                    grid_index: (ix, iy),
                });
            }
        }
    }
    Ok(CoarseOverlay { nx, ny, h_x, h_y, origin: lo, cells, slot_to_cell })
}

/// Overlay from the rectangle width `H`; the y-count is `ceil(height / H)`.
pub fn build_coarse_overlay(mesh: &Mesh, h: Real) -> Result<CoarseOverlay> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("overlay width H must be positive, got {h}")));
    }
    let (lo, hi) = mesh.bounding_box();
    let nx = (((hi[0] - lo[0]) / h).ceil() as usize).max(1);
    let ny = (((hi[1] - lo[1]) / h).ceil() as usize).max(1);
    build_coarse_overlay_counts(mesh, nx, ny)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_unit_square_quarter_h() {
        let mesh = generate_rect_mesh(1.0, 1.0, 0.25).unwrap();
        assert_eq!(mesh.n_triangles(), 32);
        assert_eq!(mesh.n_vertices(), 25);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        mesh.validate().unwrap();
    }

    #[test]
    fn rect_two_triangle_square() {
        let mesh = generate_rect_mesh(1.0, 1.0, 1.0).unwrap();
        assert_eq!(mesh.n_triangles(), 2);
        let refined = uniform_refine(&mesh);
        assert_eq!(refined.n_triangles(), 8);
        assert!((refined.h - 0.5 * mesh.h).abs() < 1e-12);
        refined.validate().unwrap();
        let twice = uniform_refine(&refined);
        assert_eq!(twice.n_triangles(), 32);
    }

    #[test]
    fn channel_mesh_invariants() {
        let mesh = generate_channel_mesh(0.05, 32).unwrap();
        mesh.validate().unwrap();
        assert!(mesh.h <= 1.5 * 0.05, "h = {}", mesh.h);
        let n_cyl =
            mesh.boundary_edges.iter().filter(|e| e.marker == BoundaryMarker::Cylinder).count();
        assert_eq!(n_cyl, 32);
        // cylinder polyline is closed: every cylinder vertex has 2 incident cylinder edges
        let mut deg: HashMap<usize, usize> = HashMap::new();
        for e in &mesh.boundary_edges {
            if e.marker == BoundaryMarker::Cylinder {
                *deg.entry(e.a).or_insert(0) += 1;
                *deg.entry(e.b).or_insert(0) += 1;
            }
        }
        assert!(deg.values().all(|&d| d == 2));
        for (&v, _) in &deg {
            let p = mesh.vertices[v];
            let r = ((p[0] - 0.2).powi(2) + (p[1] - 0.2).powi(2)).sqrt();
            assert!((r - 0.05).abs() < 1e-12);
        }
        // area oracle: polygonal hole, 1e-3 relative
        let exact = CHANNEL_LENGTH * CHANNEL_HEIGHT - std::f64::consts::PI * 0.05 * 0.05;
        assert!((mesh.total_area() - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn channel_refine_projects_cylinder_midpoints() {
        let mesh = generate_channel_mesh(0.08, 16).unwrap();
        let refined = uniform_refine(&mesh);
        refined.validate().unwrap();
        assert_eq!(refined.n_triangles(), 4 * mesh.n_triangles());
        let n_cyl =
            refined.boundary_edges.iter().filter(|e| e.marker == BoundaryMarker::Cylinder).count();
        assert_eq!(n_cyl, 32);
        for e in &refined.boundary_edges {
            if e.marker == BoundaryMarker::Cylinder {
                for v in [e.a, e.b] {
                    let p = refined.vertices[v];
                    let r = ((p[0] - 0.2).powi(2) + (p[1] - 0.2).powi(2)).sqrt();
                    assert!((r - 0.05).abs() < 1e-12);
                }
            }
        }
        // refinement shrinks the polygonal-hole area gap
        let exact = CHANNEL_LENGTH * CHANNEL_HEIGHT - std::f64::consts::PI * 0.05 * 0.05;
        let gap0 = (mesh.total_area() - exact).abs();
        let gap1 = (refined.total_area() - exact).abs();
        assert!(gap1 < gap0);
    }

    #[test]
    fn refinement_preserves_markers_edgewise() {
        let mesh = generate_channel_mesh(0.1, 16).unwrap();
        let refined = uniform_refine(&mesh);
        for marker in [
            BoundaryMarker::Inflow,
            BoundaryMarker::Outflow,
            BoundaryMarker::Wall,
            BoundaryMarker::Cylinder,
        ] {
            let n0 = mesh.boundary_edges.iter().filter(|e| e.marker == marker).count();
            let n1 = refined.boundary_edges.iter().filter(|e| e.marker == marker).count();
            assert_eq!(n1, 2 * n0, "{marker:?}");
        }
    }

    #[test]
    fn mesh_text_round_trip() {
        let mesh = generate_channel_mesh(0.08, 16).unwrap();
        let text = mesh.to_text();
        let back = parse_mesh(&text, "mem").unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges, mesh.boundary_edges);
        assert_eq!(back.hash(), mesh.hash());
    }

    #[test]
    fn parse_rejects_bad_files() {
        assert!(matches!(parse_mesh("", "mem"), Err(Error::Parse { line: 1, .. })));
        // triangle referencing a missing vertex
        let text = "3 1 0\n0 0\n1 0\n0 1\n0 1 7\n";
        match parse_mesh(text, "mem") {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("missing vertex 7"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(generate_channel_mesh(0.0, 32).is_err());
        assert!(generate_channel_mesh(0.05, 7).is_err());
        assert!(generate_channel_mesh(0.05, 10).is_err());
        // too few segments for a fine target_h
        assert!(generate_channel_mesh(0.01, 8).is_err());
        assert!(generate_rect_mesh(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn overlay_from_width() {
        let mesh = generate_channel_mesh(0.05, 32).unwrap();
        let ov = build_coarse_overlay(&mesh, CHANNEL_LENGTH / 8.0).unwrap();
        assert_eq!((ov.nx, ov.ny), (8, 2));
        assert_eq!(ov.n_cells(), 16);
        // single cell when H >= length
        let ov1 = build_coarse_overlay(&mesh, 2.2).unwrap();
        assert_eq!((ov1.nx, ov1.ny), (1, 1));
        let square = generate_rect_mesh(1.0, 1.0, 0.25).unwrap();
        let ov2 = build_coarse_overlay(&square, 0.5).unwrap();
        assert_eq!((ov2.nx, ov2.ny), (2, 2));
        assert_eq!(ov2.n_cells(), 4);
    }

    #[test]
    fn overlay_counts_and_point_lookup() {
        let mesh = generate_channel_mesh(0.05, 32).unwrap();
        let ov = build_coarse_overlay_counts(&mesh, 8, 8).unwrap();
        assert_eq!(ov.n_cells(), 64);
        // every vertex maps to exactly one retained cell
        for v in &mesh.vertices {
            assert!(ov.cell_of_point(*v).is_some());
        }
        assert!(ov.cell_of_point([5.0, 0.2]).is_none());
        // half-open tiling: a point on an interior cell edge belongs to the upper cell
        let c = ov.cell_of_point([2.2 / 8.0, 0.2]).unwrap();
        assert_eq!(ov.cells[c].grid_index.0, 1);
    }

    #[test]
    fn find_triangle_locates_points() {
        let mesh = generate_rect_mesh(1.0, 1.0, 0.5).unwrap();
        let (_, bary) = mesh.find_triangle([0.3, 0.3]).unwrap();
        assert!(bary.iter().all(|&b| b > -1e-12));
        assert!(mesh.find_triangle([1.5, 0.5]).is_none());
    }
}
