//! Incremental Bowyer-Watson Delaunay triangulation driven by staged
//! predicates, with ghost triangles standing in for the outside of the hull.

use std::collections::{HashMap, HashSet};

use super::stats::{CountingPredicate, StageStats};
use crate::expr::Expr;
use crate::fpn::{oracle_sign, Sign};
use crate::predicates::{Builtin, Profile, StagedPredicate};

/// The vertex at infinity.
pub const GHOST: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Tri {
    /// Counter-clockwise; a ghost keeps [`GHOST`] at index 2, and its finite
    /// edge `v[0] → v[1]` has the outside of the hull on its left.
    v: [usize; 3],
    /// `n[i]` is across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }

    fn edge(&self, i: usize) -> (usize, usize) {
        (self.v[(i + 1) % 3], self.v[(i + 2) % 3])
    }
}

/// A finished triangulation with the statistics of the predicates that
/// built it.
#[derive(Clone, Debug)]
pub struct Triangulation {
    /// Distinct input points in insertion order.
    pub points: Vec<[f64; 2]>,
    /// Input points dropped because an equal point came earlier.
    pub duplicates: usize,
    pub orient: StageStats,
    pub incircle: StageStats,
    tris: Vec<Tri>,
}

impl Triangulation {
    /// Real triangles, counter-clockwise, as indices into `points`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .filter(|t| t.alive && !t.is_ghost())
            .map(|t| t.v)
            .collect()
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.iter().filter(|t| t.alive && !t.is_ghost()).count()
    }

    /// Number of hull edges, which equals the number of points on the hull
    /// boundary (collinear boundary points included).
    pub fn hull_size(&self) -> usize {
        self.tris.iter().filter(|t| t.alive && t.is_ghost()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.triangle_count() == 0
    }
}

struct Builder {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    mark: Vec<u64>,
    stamp: u64,
    last: usize,
    orient: CountingPredicate,
    incircle: CountingPredicate,
}

impl Builder {
    fn orient(&mut self, a: usize, b: usize, c: usize) -> Sign {
        let [p, q, r] = [self.pts[a], self.pts[b], self.pts[c]];
        self.orient
            .apply(&[p[0], p[1], q[0], q[1], r[0], r[1]])
            .expect("finite points")
    }

    fn incircle(&mut self, t: [usize; 3], d: usize) -> Sign {
        let [a, b, c, d] = [self.pts[t[0]], self.pts[t[1]], self.pts[t[2]], self.pts[d]];
        self.incircle
            .apply(&[a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1]])
            .expect("finite points")
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        let t = Tri {
            v,
            n: [GHOST; 3],
            alive: true,
        };
        match self.free.pop() {
            Some(k) => {
                self.tris[k] = t;
                k
            }
            None => {
                self.tris.push(t);
                self.mark.push(0);
                self.tris.len() - 1
            }
        }
    }

    /// Links the given triangles to each other across shared edges.
    fn link(&mut self, ids: &[usize]) {
        let mut open: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &t in ids {
            for i in 0..3 {
                let (u, w) = self.tris[t].edge(i);
                if let Some((s, j)) = open.remove(&(w, u)) {
                    self.tris[t].n[i] = s;
                    self.tris[s].n[j] = t;
                } else {
                    open.insert((u, w), (t, i));
                }
            }
        }
    }

    fn conflicts(&mut self, t: usize, p: usize) -> bool {
        let tri = self.tris[t];
        if !tri.is_ghost() {
            return self.incircle(tri.v, p) == Sign::Positive;
        }
        let [a, b, _] = tri.v;
        match self.orient(a, b, p) {
            Sign::Positive => true,
            Sign::Negative => false,
            Sign::Zero => strictly_between(self.pts[a], self.pts[b], self.pts[p]),
        }
    }

    /// A triangle whose circumcircle contains `p`, by a visibility walk
    /// from the last created triangle.
    fn locate(&mut self, p: usize) -> usize {
        let mut t = self.last;
        let mut turn = 0;
        let limit = 4 * self.tris.len() + 16;
        for _ in 0..limit {
            let tri = self.tris[t];
            let mut next = None;
            for r in 0..3 {
                let i = (r + turn) % 3;
                let (u, w) = tri.edge(i);
                if self.orient(u, w, p) == Sign::Negative {
                    next = Some(tri.n[i]);
                    break;
                }
            }
            turn += 1;
            match next {
                None => return t,
                Some(s) if self.tris[s].is_ghost() => return s,
                Some(s) => t = s,
            }
        }
        (0..self.tris.len())
            .find(|&k| self.tris[k].alive && self.conflicts(k, p))
            .expect("some triangle conflicts with a new point")
    }

    fn insert(&mut self, p: usize) {
        let start = self.locate(p);
        self.stamp += 2;
        let (inside, outside) = (self.stamp, self.stamp + 1);
        self.mark[start] = inside;
        let mut stack = vec![start];
        let mut cavity = Vec::new();
        let mut boundary = Vec::new();
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for i in 0..3 {
                let s = self.tris[t].n[i];
                if self.mark[s] == inside {
                    continue;
                }
                if self.mark[s] != outside && self.conflicts(s, p) {
                    self.mark[s] = inside;
                    stack.push(s);
                } else {
                    self.mark[s] = outside;
                    let (u, w) = self.tris[t].edge(i);
                    let j = (0..3).find(|&j| self.tris[s].n[j] == t).unwrap();
                    boundary.push((u, w, s, j));
                }
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        let mut created = Vec::with_capacity(boundary.len());
        for (u, w, s, j) in boundary {
            let v = if u == GHOST {
                [w, p, GHOST]
            } else if w == GHOST {
                [p, u, GHOST]
            } else {
                [u, w, p]
            };
            let t = self.alloc(v);
            let i = v.iter().position(|&x| x == p).unwrap();
            self.tris[t].n[i] = s;
            self.tris[s].n[j] = t;
            created.push(t);
        }
        self.link(&created);
        if let Some(&t) = created.iter().find(|&&t| !self.tris[t].is_ghost()) {
            self.last = t;
        }
    }
}

/// Whether collinear `p` lies strictly inside the segment `ab`.
fn strictly_between(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let k = if a[0] != b[0] { 0 } else { 1 };
    a[k].min(b[k]) < p[k] && p[k] < a[k].max(b[k])
}

/// Drops repeated points (`-0.0` equals `0.0`), keeping first occurrences.
pub fn dedup(points: &[[f64; 2]]) -> (Vec<[f64; 2]>, usize) {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(points.len());
    for &[x, y] in points {
        if seen.insert(((x + 0.0).to_bits(), (y + 0.0).to_bits())) {
            out.push([x, y]);
        }
    }
    let dropped = points.len() - out.len();
    (out, dropped)
}

/// Triangulates `points` in the given order. All orientation and incircle
/// decisions go through the default staged pipelines of `profile`. An
/// all-collinear input gives an empty triangulation.
pub fn triangulate(points: &[[f64; 2]], profile: Profile) -> Triangulation {
    let (pts, duplicates) = dedup(points);
    let orient = CountingPredicate::new(
        Builtin::Orient2d.name(),
        StagedPredicate::default_pipeline(Builtin::Orient2d, profile),
    );
    let incircle = CountingPredicate::new(
        Builtin::Incircle2d.name(),
        StagedPredicate::default_pipeline(Builtin::Incircle2d, profile),
    );
    let mut b = Builder {
        pts,
        tris: Vec::new(),
        free: Vec::new(),
        mark: Vec::new(),
        stamp: 0,
        last: 0,
        orient,
        incircle,
    };
    let n = b.pts.len();
    let mut seed = None;
    if n >= 3 {
        for k in 2..n {
            match b.orient(0, 1, k) {
                Sign::Zero => continue,
                Sign::Positive => seed = Some((k, [0, 1, k])),
                Sign::Negative => seed = Some((k, [1, 0, k])),
            }
            break;
        }
    }
    if let Some((k, v)) = seed {
        let t = b.alloc(v);
        let mut ids = vec![t];
        for i in 0..3 {
            let (u, w) = b.tris[t].edge(i);
            ids.push(b.alloc([w, u, GHOST]));
        }
        b.link(&ids);
        b.last = t;
        for p in (2..n).filter(|&p| p != k) {
            b.insert(p);
        }
    }
    Triangulation {
        points: b.pts,
        duplicates,
        orient: b.orient.stats,
        incircle: b.incircle.stats,
        tris: b.tris,
    }
}

fn oracle_orient(e: &Expr, a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    oracle_sign(e, &[a[0], a[1], b[0], b[1], c[0], c[1]]).expect("finite points")
}

/// Points on the convex hull boundary, collinear ones included, found
/// with a monotone chain on exact orientations and no triangulation.
pub fn hull_size_exact(points: &[[f64; 2]]) -> usize {
    let e = Builtin::Orient2d.expr();
    let (mut pts, _) = dedup(points);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pts.len() < 3 {
        return pts.len();
    }
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && oracle_orient(&e, hull[hull.len() - 2], hull[hull.len() - 1], p) != Sign::Positive
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // Every point is on one line.
        return pts.len();
    }
    let on_edge = pts
        .iter()
        .filter(|p| !hull.contains(p))
        .filter(|&&p| {
            (0..hull.len()).any(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                oracle_orient(&e, a, b, p) == Sign::Zero && strictly_between(a, b, p)
            })
        })
        .count();
    hull.len() + on_edge
}

/// A violation found by [`audit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditViolation {
    /// The triangle is not strictly counter-clockwise.
    Orientation { triangle: [usize; 3] },
    /// `vertex` lies strictly inside the triangle's circumcircle.
    Circumcircle { triangle: [usize; 3], vertex: usize },
}

/// Brute-force check of every (triangle, vertex) pair with the exact
/// incircle oracle, plus exact orientation of every triangle.
pub fn audit(t: &Triangulation) -> Vec<AuditViolation> {
    let orient = Builtin::Orient2d.expr();
    let incircle = Builtin::Incircle2d.expr();
    let mut out = Vec::new();
    for tri in t.triangles() {
        let [a, b, c] = tri.map(|k| t.points[k]);
        if oracle_orient(&orient, a, b, c) != Sign::Positive {
            out.push(AuditViolation::Orientation { triangle: tri });
        }
        let mut x = [a[0], a[1], b[0], b[1], c[0], c[1], 0.0, 0.0];
        for (k, d) in t.points.iter().enumerate() {
            if tri.contains(&k) {
                continue;
            }
            x[6] = d[0];
            x[7] = d[1];
            if oracle_sign(&incircle, &x).expect("finite points") == Sign::Positive {
                out.push(AuditViolation::Circumcircle {
                    triangle: tri,
                    vertex: k,
                });
            }
        }
    }
    out
}
