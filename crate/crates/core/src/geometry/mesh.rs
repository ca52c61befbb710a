//! Triangulated disk meshes.
//!
//! The generator is a structured polar mesh: concentric rings of nodes whose
//! spacing follows `target_h`, stitched ring-to-ring by an angular sweep. The
//! outermost ring is the boundary; its nodes are laid out uniformly and the
//! nodes nearest to each electrode endpoint are snapped onto the endpoint, so
//! every electrode arc is an exact union of boundary edges.
//!
//! # Text format
//!
//! ```text
//! <node count N>
//! x y              (N lines)
//! <triangle count T>
//! i j k            (T lines, zero-based, counterclockwise)
//! <boundary count B>
//! i theta          (B lines, counterclockwise along the boundary)
//! ```
//!
//! Floats are written in Rust's shortest round-trip representation, so a
//! written mesh reads back bit-identically.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::electrodes::{wrap_pi, ElectrodeLayout};

/// Node spacing as a fraction of `target_h`; keeps ring-to-ring diagonals
/// below `1.5 · target_h`.
const SPACING: f64 = 0.7;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary node indices, counterclockwise.
    pub boundary: Vec<usize>,
    /// Angular position of each boundary node, in `[0, 2π)` and increasing.
    pub boundary_theta: Vec<f64>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Boundary edges `(boundary[i], boundary[i+1])`, wrapping at the end.
    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.boundary.len();
        (0..n).map(move |i| (self.boundary[i], self.boundary[(i + 1) % n]))
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Exact structural checks: positive areas, manifold edges, and a single
    /// closed counterclockwise boundary loop matching `boundary`.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a missing node"
                )));
            }
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some(((a, b), c)) = edges.iter().find(|(_, c)| **c > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge ({a}, {b}) shared by {c} triangles"
            )));
        }
        let open: usize = edges.values().filter(|c| **c == 1).count();
        if open != self.boundary.len() {
            return Err(Error::InvalidMesh(format!(
                "{open} open edges but {} boundary nodes",
                self.boundary.len()
            )));
        }
        for (a, b) in self.boundary_edges() {
            if edges.get(&(a.min(b), a.max(b))) != Some(&1) {
                return Err(Error::InvalidMesh(format!(
                    "({a}, {b}) is not a boundary edge"
                )));
            }
        }
        if self.boundary_theta.len() != self.boundary.len() {
            return Err(Error::InvalidMesh(
                "boundary angle list length mismatch".into(),
            ));
        }
        for w in self.boundary_theta.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidMesh("boundary angles not increasing".into()));
            }
        }
        if let (Some(first), Some(last)) = (self.boundary_theta.first(), self.boundary_theta.last())
        {
            if *first < 0.0 || *last >= TAU {
                return Err(Error::InvalidMesh("boundary angles outside [0, 2π)".into()));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{} {}", p[0], p[1]);
        }
        let _ = writeln!(s, "{}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "{}", self.boundary.len());
        for (i, th) in self.boundary.iter().zip(&self.boundary_theta) {
            let _ = writeln!(s, "{i} {th}");
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
        let mut lines = r.lines().filter(|l| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("unexpected end of mesh file ({what})")))?
                .map_err(Error::from)
        };
        let count = |s: String| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad count `{s}`")))
        };
        let fields = |s: &str, k: usize| -> Result<Vec<String>> {
            let v: Vec<String> = s.split_whitespace().map(str::to_owned).collect();
            if v.len() != k {
                return Err(Error::Format(format!("expected {k} fields in `{s}`")));
            }
            Ok(v)
        };
        let pf = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad float `{s}`")))
        };
        let pi = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad index `{s}`")))
        };

        let n = count(next("node count")?)?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let v = fields(&next("node")?, 2)?;
            nodes.push([pf(&v[0])?, pf(&v[1])?]);
        }
        let t = count(next("triangle count")?)?;
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let v = fields(&next("triangle")?, 3)?;
            triangles.push([pi(&v[0])?, pi(&v[1])?, pi(&v[2])?]);
        }
        let b = count(next("boundary count")?)?;
        let mut boundary = Vec::with_capacity(b);
        let mut boundary_theta = Vec::with_capacity(b);
        for _ in 0..b {
            let v = fields(&next("boundary node")?, 2)?;
            boundary.push(pi(&v[0])?);
            boundary_theta.push(pf(&v[1])?);
        }
        let mesh = Mesh {
            nodes,
            triangles,
            boundary,
            boundary_theta,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

pub(crate) fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Builds a conforming triangulation of the disk of the given radius whose
/// boundary nodes include every electrode endpoint.
///
/// When the electrode layout is symmetric under reflection in both axes the
/// mesh is built on the first quadrant and mirrored, so it inherits those
/// symmetries exactly.
pub fn build_disk_mesh(radius: f64, target_h: f64, layout: &ElectrodeLayout) -> Result<Mesh> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    if !(target_h > 0.0 && target_h < radius) {
        return Err(Error::param(
            "target_h",
            format!("must lie in (0, radius), got {target_h}"),
        ));
    }
    layout.validate()?;
    if (layout.radius - radius).abs() > 1e-12 * radius {
        return Err(Error::param(
            "layout",
            format!(
                "electrodes sit on radius {}, mesh radius is {radius}",
                layout.radius
            ),
        ));
    }
    let spacing = SPACING * target_h;
    let ends = endpoints(layout);
    check_resolution(radius, spacing, target_h, layout, &ends)?;

    let mesh = if is_mirror_symmetric(&ends) {
        mirrored_mesh(radius, spacing, &ends)
    } else {
        cyclic_mesh(radius, spacing, &ends)
    };
    mesh.validate()?;
    let longest = mesh.max_edge_length();
    if longest > 1.5 * target_h {
        return Err(Error::Mesh(format!(
            "longest edge {longest} exceeds 1.5 × target_h = {}",
            1.5 * target_h
        )));
    }
    Ok(mesh)
}

/// Electrode endpoints in `[0, 2π)` as `(angle, electrode, is_start)`, sorted.
fn endpoints(layout: &ElectrodeLayout) -> Vec<(f64, usize, bool)> {
    let mut ends: Vec<(f64, usize, bool)> = layout
        .arcs
        .iter()
        .enumerate()
        .flat_map(|(l, arc)| {
            [
                (arc.start.rem_euclid(TAU), l, true),
                (arc.end.rem_euclid(TAU), l, false),
            ]
        })
        .collect();
    ends.sort_by(|a, b| a.0.total_cmp(&b.0));
    ends
}

/// Rejects spacings at which an electrode (or the gap after it) would collapse
/// onto a single node of a uniform boundary discretisation.
fn check_resolution(
    radius: f64,
    spacing: f64,
    target_h: f64,
    layout: &ElectrodeLayout,
    ends: &[(f64, usize, bool)],
) -> Result<()> {
    let count = ((TAU * radius / spacing).ceil() as usize).max(2 * layout.len());
    let step = TAU / count as f64;
    let m = ends.len();
    for i in 0..m {
        let (a, l, is_start) = ends[i];
        let mut b = ends[(i + 1) % m].0;
        if i + 1 == m {
            b += TAU;
        }
        if (b / step).round() <= (a / step).round() {
            let what = if is_start {
                format!("electrode {l}")
            } else {
                format!("the gap after electrode {l}")
            };
            return Err(Error::Mesh(format!(
                "target_h = {target_h} is too coarse: {what} contains no boundary edge"
            )));
        }
    }
    Ok(())
}

fn angle_close(a: f64, b: f64) -> bool {
    wrap_pi(a - b).abs() < 1e-12
}

fn is_mirror_symmetric(ends: &[(f64, usize, bool)]) -> bool {
    let has = |t: f64| ends.iter().any(|e| angle_close(e.0, t));
    ends.iter().all(|e| has(PI - e.0) && has(-e.0))
}

/// Angles from `a` to `b` (exclusive) in pieces no longer than `step`.
///
/// The piece count is a power of two, so halving `step` doubles it for any
/// segment longer than half a step.
fn subdivide(a: f64, b: f64, step: f64, out: &mut Vec<f64>) {
    let pieces = (((b - a) / step).ceil().max(1.0) as usize).next_power_of_two();
    out.extend((0..pieces).map(|j| a + (b - a) * j as f64 / pieces as f64));
}

fn cyclic_mesh(radius: f64, spacing: f64, ends: &[(f64, usize, bool)]) -> Mesh {
    let step = spacing / radius;
    let mut angles = Vec::new();
    for i in 0..ends.len() {
        let a = ends[i].0;
        let b = if i + 1 == ends.len() {
            ends[0].0 + TAU
        } else {
            ends[i + 1].0
        };
        subdivide(a, b, step, &mut angles);
    }
    for a in angles.iter_mut() {
        *a = a.rem_euclid(TAU);
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let rings = (radius / spacing).ceil().max(1.0) as usize;
    let dr = radius / rings as f64;
    let mut nodes = vec![[0.0, 0.0]];
    let mut ring_nodes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(rings);
    for i in 1..rings {
        let rho = i as f64 * dr;
        let n = ((TAU * rho / spacing).ceil() as usize).max(6);
        // Stagger alternate rings by half a step for better-shaped triangles.
        let offset = if i % 2 == 0 {
            0.0
        } else {
            0.5 * TAU / n as f64
        };
        let ring = (0..n)
            .map(|j| {
                let th = offset + TAU * j as f64 / n as f64;
                nodes.push([rho * th.cos(), rho * th.sin()]);
                (nodes.len() - 1, th)
            })
            .collect();
        ring_nodes.push(ring);
    }
    let boundary_start = nodes.len();
    ring_nodes.push(
        angles
            .iter()
            .map(|&th| {
                nodes.push([radius * th.cos(), radius * th.sin()]);
                (nodes.len() - 1, th)
            })
            .collect(),
    );

    let mut triangles = Vec::new();
    let first = &ring_nodes[0];
    for j in 0..first.len() {
        triangles.push([0, first[j].0, first[(j + 1) % first.len()].0]);
    }
    for w in ring_nodes.windows(2) {
        let (inner, outer) = (close_loop(&w[0], w[0][0].1), close_loop(&w[1], w[0][0].1));
        stitch(&inner, &outer, &mut triangles);
    }
    Mesh {
        nodes,
        triangles,
        boundary: (boundary_start..boundary_start + angles.len()).collect(),
        boundary_theta: angles,
    }
}

/// Rotates a cyclic ring to start at the node nearest angle `a0`, unwraps its
/// angles, and repeats the first node one turn later.
fn close_loop(ring: &[(usize, f64)], a0: f64) -> Vec<(usize, f64)> {
    let q = ring.len();
    let j0 = (0..q)
        .min_by(|&x, &y| {
            wrap_pi(ring[x].1 - a0)
                .abs()
                .total_cmp(&wrap_pi(ring[y].1 - a0).abs())
        })
        .unwrap_or(0);
    let b0 = a0 + wrap_pi(ring[j0].1 - a0);
    let mut out: Vec<(usize, f64)> = (0..q)
        .map(|k| {
            let (idx, th) = ring[(j0 + k) % q];
            (idx, b0 + (th - ring[j0].1).rem_euclid(TAU))
        })
        .collect();
    out.push((ring[j0].0, b0 + TAU));
    out
}

/// Triangulates the strip between two node chains running over the same
/// angular interval, inner chain at the smaller radius.
fn stitch<V: Copy>(inner: &[(V, f64)], outer: &[(V, f64)], out: &mut Vec<[V; 3]>) {
    let (p, q) = (inner.len() - 1, outer.len() - 1);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let advance_inner = j == q || (i < p && inner[i + 1].1 <= outer[j + 1].1);
        if advance_inner {
            out.push([inner[i].0, outer[j].0, inner[i + 1].0]);
            i += 1;
        } else {
            out.push([inner[i].0, outer[j].0, outer[j + 1].0]);
            j += 1;
        }
    }
}

/// First-quadrant mesh reflected into the other three quadrants.
fn mirrored_mesh(radius: f64, spacing: f64, ends: &[(f64, usize, bool)]) -> Mesh {
    let quarter = 0.5 * PI;
    let rings = (radius / spacing).ceil().max(1.0) as usize;
    let dr = radius / rings as f64;

    // Quadrant angle lists, each running from 0 to π/2 inclusive.
    let mut radii = Vec::with_capacity(rings);
    let mut quads: Vec<Vec<f64>> = Vec::with_capacity(rings);
    for i in 1..rings {
        let rho = i as f64 * dr;
        let m = (quarter * rho / spacing).ceil().max(1.0) as usize;
        radii.push(rho);
        quads.push((0..=m).map(|j| quarter * j as f64 / m as f64).collect());
    }
    let step = spacing / radius;
    let mut breaks = vec![0.0, quarter];
    breaks.extend(
        ends.iter()
            .map(|e| e.0)
            .filter(|&e| e > 1e-12 && e < quarter - 1e-12),
    );
    breaks.sort_by(f64::total_cmp);
    let mut boundary_quad = Vec::new();
    for w in breaks.windows(2) {
        subdivide(w[0], w[1], step, &mut boundary_quad);
    }
    boundary_quad.push(quarter);
    radii.push(radius);
    quads.push(boundary_quad);

    // Full rings: position p of a ring with quadrant size m (4m nodes).
    let mut nodes = vec![[0.0, 0.0]];
    let mut bases = Vec::with_capacity(quads.len());
    let mut thetas = Vec::new();
    for (rho, quad) in radii.iter().zip(&quads) {
        let m = quad.len() - 1;
        let q1: Vec<[f64; 2]> = quad
            .iter()
            .enumerate()
            .map(|(j, &a)| match j {
                0 => [*rho, 0.0],
                _ if j == m => [0.0, *rho],
                _ => [rho * a.cos(), rho * a.sin()],
            })
            .collect();
        bases.push(nodes.len());
        thetas.clear();
        for j in 0..m {
            nodes.push(q1[j]);
            thetas.push(quad[j]);
        }
        for j in (1..=m).rev() {
            nodes.push([-q1[j][0], q1[j][1]]);
            thetas.push(PI - quad[j]);
        }
        for j in 0..m {
            nodes.push([-q1[j][0], -q1[j][1]]);
            thetas.push(PI + quad[j]);
        }
        for j in (1..=m).rev() {
            nodes.push([q1[j][0], -q1[j][1]]);
            thetas.push(TAU - quad[j]);
        }
    }
    thetas[0] = 0.0;

    // Quadrant triangles over (ring, j) vertices; `None` is the centre.
    type Vtx = Option<(usize, usize)>;
    let mut quad_tris: Vec<[Vtx; 3]> = Vec::new();
    for j in 0..quads[0].len() - 1 {
        quad_tris.push([None, Some((0, j)), Some((0, j + 1))]);
    }
    for r in 0..quads.len() - 1 {
        let chain = |ring: usize| -> Vec<(Vtx, f64)> {
            quads[ring]
                .iter()
                .enumerate()
                .map(|(j, &a)| (Some((ring, j)), a))
                .collect()
        };
        stitch(&chain(r), &chain(r + 1), &mut quad_tris);
    }

    let index = |v: Vtx, reflect: usize| -> usize {
        let Some((r, j)) = v else { return 0 };
        let m = quads[r].len() - 1;
        let pos = match reflect {
            0 => j,
            1 => 2 * m - j,
            2 => 2 * m + j,
            _ => (4 * m - j) % (4 * m),
        };
        bases[r] + pos
    };
    let mut triangles = Vec::with_capacity(4 * quad_tris.len());
    for reflect in 0..4 {
        for t in &quad_tris {
            let [a, b, c] = t.map(|v| index(v, reflect));
            // Single reflections reverse orientation.
            triangles.push(if reflect % 2 == 1 {
                [a, c, b]
            } else {
                [a, b, c]
            });
        }
    }

    let boundary_start = *bases.last().unwrap_or(&0);
    Mesh {
        boundary: (boundary_start..nodes.len()).collect(),
        boundary_theta: thetas,
        nodes,
        triangles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::electrodes::place_electrodes;

    fn endpoints_present(mesh: &Mesh, layout: &ElectrodeLayout) -> bool {
        layout.arcs.iter().all(|arc| {
            [arc.start, arc.end].iter().all(|&e| {
                let e = e.rem_euclid(TAU);
                mesh.boundary_theta
                    .iter()
                    .any(|&t| crate::geometry::electrodes::wrap_pi(t - e).abs() < 1e-12)
            })
        })
    }

    #[test]
    fn coarse_mesh_has_endpoints() {
        let layout = place_electrodes(4, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.5, &layout).unwrap();
        assert!(mesh.boundary.len() >= 4);
        assert!(endpoints_present(&mesh, &layout));
    }

    #[test]
    fn fine_mesh_postconditions() {
        let layout = place_electrodes(16, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.1, &layout).unwrap();
        assert!((0..mesh.triangles.len()).all(|t| mesh.signed_area(t) > 0.0));
        assert!(mesh.max_edge_length() <= 0.15);
        assert!(endpoints_present(&mesh, &layout));
        // boundary nodes sit on the circle
        for &b in &mesh.boundary {
            let p = mesh.nodes[b];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
        let area: f64 = (0..mesh.triangles.len()).map(|t| mesh.signed_area(t)).sum();
        assert!((area - std::f64::consts::PI).abs() < 0.02);
    }

    #[test]
    fn refinement_doubles_boundary() {
        let layout = place_electrodes(16, 0.5, 0.01).unwrap();
        let coarse = build_disk_mesh(1.0, 0.1, &layout).unwrap();
        let fine = build_disk_mesh(1.0, 0.05, &layout).unwrap();
        assert!(fine.boundary.len() >= 2 * coarse.boundary.len());
    }

    #[test]
    fn too_coarse_rejected() {
        let layout = place_electrodes(32, 0.1, 0.01).unwrap();
        let err = build_disk_mesh(1.0, 0.9, &layout).unwrap_err();
        assert!(matches!(err, Error::Mesh(_)), "{err}");
    }

    #[test]
    fn radius_mismatch_rejected() {
        let layout = place_electrodes(8, 0.5, 0.01).unwrap();
        assert!(build_disk_mesh(2.0, 0.2, &layout).is_err());
        assert!(build_disk_mesh(1.0, 1.5, &layout).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let layout = place_electrodes(8, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.2, &layout).unwrap();
        let text = mesh.to_text();
        let back = Mesh::read_text(text.as_bytes()).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn validate_catches_flipped_triangle() {
        let layout = place_electrodes(8, 0.5, 0.01).unwrap();
        let mut mesh = build_disk_mesh(1.0, 0.3, &layout).unwrap();
        mesh.triangles[3].swap(0, 1);
        assert!(matches!(
            mesh.validate(),
            Err(Error::DegenerateTriangle { index: 3, .. })
        ));
    }
}
