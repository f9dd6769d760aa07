//! Achievable-payoff frontiers: points and segments in (leader, follower) space.
//!
//! A frontier is the upper envelope of leader value as a function of follower
//! value. Each element remembers how it is realized one level down (its
//! `Origin`), which is all that unrolling needs.
//!
//! Segments are closed. Where the envelope jumps, the segment on the low side
//! keeps its endpoint even though something higher sits at that follower
//! value; every interior point and every isolated point is maximal.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use crate::eval::minimax_follower_value;
use crate::tree::{ActionId, GameTree, NodeId, Owner};
use crate::value::{PayoffPair, Value, ValuePair};

/// How a frontier element is realized at the node that owns it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// The node is a leaf and this is its reward.
    Leaf,
    /// Play the action and aim for the same payoff pair in that child.
    Child(ActionId),
    /// Randomize between two children, aiming for these payoff pairs in each.
    /// `lo` has the smaller follower value.
    Mix {
        lo: Box<(ActionId, ValuePair)>,
        hi: Box<(ActionId, ValuePair)>,
    },
}

impl Origin {
    /// Origin of a point lying on an element with this origin.
    fn at(&self, p: &ValuePair) -> Origin {
        match self {
            Origin::Mix { lo, hi } if lo.1 == *p => Origin::Child(lo.0),
            Origin::Mix { lo, hi } if hi.1 == *p => Origin::Child(hi.0),
            o => o.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrontierPoint {
    pub value: ValuePair,
    pub origin: Origin,
}

/// Segment between two retained points, `lo` having the smaller follower value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrontierSegment {
    pub lo: usize,
    pub hi: usize,
    pub origin: Origin,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Frontier {
    points: Vec<FrontierPoint>,
    segments: Vec<FrontierSegment>,
}

/// Per-action clipping bound; `None` means no bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaThresholds(pub Vec<(ActionId, Option<Value>)>);

impl SigmaThresholds {
    /// Each action's bound is the best threat value among its siblings.
    pub fn from_threats(threats: &[(ActionId, Value)]) -> SigmaThresholds {
        let out = threats
            .iter()
            .enumerate()
            .map(|(i, (a, _))| {
                let s = threats
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (_, v))| v.clone())
                    .max();
                (*a, s)
            })
            .collect();
        SigmaThresholds(out)
    }

    pub fn get(&self, a: ActionId) -> Option<Value> {
        self.0.iter().find(|(b, _)| *b == a).and_then(|(_, s)| s.clone())
    }
}

impl Frontier {
    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    pub fn segments(&self) -> &[FrontierSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points plus segments, the row count of a CSV export.
    pub fn element_count(&self) -> usize {
        self.points.len() + self.segments.len()
    }

    pub fn segment_ends(&self, s: &FrontierSegment) -> (&ValuePair, &ValuePair) {
        (&self.points[s.lo].value, &self.points[s.hi].value)
    }

    /// Points nothing else beats at their follower value: every point except
    /// the dangling low ends of segments under a jump.
    pub fn maximal_points(&self) -> impl Iterator<Item = (usize, &FrontierPoint)> + '_ {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| self.max_leader_at(&p.value.follower).as_ref() == Some(&p.value.leader))
    }

    pub fn min_follower(&self) -> Option<Value> {
        self.points.iter().map(|p| &p.value.follower).min().cloned()
    }

    /// Largest leader value any element reaches at follower value `f`.
    pub fn max_leader_at(&self, f: &Value) -> Option<Value> {
        let pts = self
            .points
            .iter()
            .filter(|p| p.value.follower == *f)
            .map(|p| p.value.leader.clone());
        let segs = self.segments.iter().filter_map(|s| {
            let (a, b) = self.segment_ends(s);
            (a.follower <= *f && *f <= b.follower).then(|| line_at(a, b, f))
        });
        pts.chain(segs).max()
    }

    fn from_pieces(pieces: Vec<Piece>) -> Frontier {
        let mut verts: Vec<Vertex> = Vec::with_capacity(pieces.len() * 2);
        for p in &pieces {
            verts.push(p.lo.clone());
            if !p.is_point() {
                verts.push(p.hi.clone());
            }
        }
        verts.sort_by(|a, b| {
            a.at.follower
                .cmp(&b.at.follower)
                .then(a.at.leader.cmp(&b.at.leader))
                .then(a.origin.cmp(&b.origin))
        });
        verts.dedup_by(|later, first| later.at == first.at);
        let points: Vec<FrontierPoint> = verts
            .into_iter()
            .map(|v| FrontierPoint {
                value: v.at,
                origin: v.origin,
            })
            .collect();
        let find = |v: &ValuePair| {
            points
                .binary_search_by(|p| p.value.follower.cmp(&v.follower).then(p.value.leader.cmp(&v.leader)))
                .expect("segment endpoint is a retained point")
        };
        let mut segments: Vec<FrontierSegment> = pieces
            .iter()
            .filter(|p| !p.is_point())
            .map(|p| FrontierSegment {
                lo: find(&p.lo.at),
                hi: find(&p.hi.at),
                origin: p.origin.clone(),
            })
            .collect();
        segments.sort_by(|a, b| {
            points[a.lo]
                .value
                .follower
                .cmp(&points[b.lo].value.follower)
                .then(a.hi.cmp(&b.hi))
        });
        Frontier { points, segments }
    }

    fn pieces(&self) -> Vec<Piece> {
        let mut used = alloc::vec![false; self.points.len()];
        let mut out = Vec::with_capacity(self.points.len() + self.segments.len());
        for s in &self.segments {
            used[s.lo] = true;
            used[s.hi] = true;
            out.push(Piece {
                lo: Vertex::from(&self.points[s.lo]),
                hi: Vertex::from(&self.points[s.hi]),
                origin: s.origin.clone(),
            });
        }
        for (i, p) in self.points.iter().enumerate() {
            if !used[i] {
                out.push(Piece::point(Vertex::from(p)));
            }
        }
        out
    }

    /// Same geometry, every element now realized through action `a`.
    fn pieces_through(&self, a: ActionId) -> Vec<Piece> {
        let mut ps = self.pieces();
        for p in ps.iter_mut() {
            p.lo.origin = Origin::Child(a);
            p.hi.origin = Origin::Child(a);
            p.origin = Origin::Child(a);
        }
        ps
    }
}

fn line_at(a: &ValuePair, b: &ValuePair, f: &Value) -> Value {
    if a.follower == b.follower {
        return a.leader.clone().max(b.leader.clone());
    }
    if *f == a.follower {
        return a.leader.clone();
    }
    if *f == b.follower {
        return b.leader.clone();
    }
    &a.leader + (&b.leader - &a.leader) * (f - &a.follower) / (&b.follower - &a.follower)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Vertex {
    at: ValuePair,
    origin: Origin,
}

impl From<&FrontierPoint> for Vertex {
    fn from(p: &FrontierPoint) -> Self {
        Vertex {
            at: p.value.clone(),
            origin: p.origin.clone(),
        }
    }
}

/// Working form of an element: a point (`lo == hi`) or a closed segment.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Piece {
    lo: Vertex,
    hi: Vertex,
    origin: Origin,
}

impl Piece {
    fn point(v: Vertex) -> Piece {
        let origin = v.origin.clone();
        Piece {
            lo: v.clone(),
            hi: v,
            origin,
        }
    }

    fn is_point(&self) -> bool {
        self.lo.at.follower == self.hi.at.follower
    }

    fn value_at(&self, f: &Value) -> Value {
        line_at(&self.lo.at, &self.hi.at, f)
    }

    fn vertex_at(&self, f: &Value) -> Vertex {
        if *f == self.lo.at.follower {
            self.lo.clone()
        } else if *f == self.hi.at.follower {
            self.hi.clone()
        } else {
            let at = ValuePair::new(self.value_at(f), f.clone());
            Vertex {
                origin: self.origin.at(&at),
                at,
            }
        }
    }

    fn restrict(&self, l: &Value, r: &Value) -> Piece {
        Piece {
            lo: self.vertex_at(l),
            hi: self.vertex_at(r),
            origin: self.origin.clone(),
        }
    }

    fn clip(&self, bound: &Value) -> Option<Piece> {
        if self.hi.at.follower < *bound {
            None
        } else if self.hi.at.follower == *bound {
            Some(Piece::point(self.hi.clone()))
        } else if self.lo.at.follower >= *bound {
            Some(self.clone())
        } else {
            Some(self.restrict(bound, &self.hi.at.follower))
        }
    }
}

/// Upper envelope of a priority-ordered piece list; earlier pieces win ties.
fn envelope(pieces: &[Piece]) -> Vec<Piece> {
    match pieces.len() {
        0 => Vec::new(),
        1 => alloc::vec![pieces[0].clone()],
        n => {
            let (l, r) = pieces.split_at(n / 2);
            merge(&envelope(l), &envelope(r))
        }
    }
}

/// Scans an envelope (pieces sorted by low end, disjoint interiors) left to right.
struct Scan<'a> {
    pieces: &'a [Piece],
    next: usize,
}

impl<'a> Scan<'a> {
    fn new(pieces: &'a [Piece]) -> Self {
        Scan { pieces, next: 0 }
    }

    /// Indices of pieces whose closed span contains `x`. Calls must use
    /// non-decreasing `x`.
    fn touching(&mut self, x: &Value, out: &mut Vec<usize>) {
        out.clear();
        while self.next < self.pieces.len() && self.pieces[self.next].hi.at.follower < *x {
            self.next += 1;
        }
        let mut i = self.next;
        while i < self.pieces.len() && self.pieces[i].lo.at.follower <= *x {
            if self.pieces[i].hi.at.follower >= *x {
                out.push(i);
            }
            i += 1;
        }
    }

    /// The segment covering the open interval `(x0, x1)`, if any.
    fn covering(&self, x0: &Value, x1: &Value) -> Option<usize> {
        let mut i = self.next;
        while i < self.pieces.len() && self.pieces[i].lo.at.follower <= *x0 {
            let p = &self.pieces[i];
            if !p.is_point() && p.hi.at.follower >= *x1 {
                return Some(i);
            }
            i += 1;
        }
        None
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Src {
    side: u8,
    index: usize,
}

struct Run {
    l: Value,
    r: Value,
    src: Src,
}

fn pick_best(cands: &[Vertex], value: &Value) -> Option<Origin> {
    cands
        .iter()
        .filter(|v| v.at.leader == *value)
        .map(|v| v.origin.clone())
        .min()
}

fn merge(a: &[Piece], b: &[Piece]) -> Vec<Piece> {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    let side = |s: u8| if s == 0 { a } else { b };

    let mut xs: Vec<Value> = a
        .iter()
        .chain(b.iter())
        .flat_map(|p| [p.lo.at.follower.clone(), p.hi.at.follower.clone()])
        .collect();
    xs.sort();
    xs.dedup();

    // Winning source on every elementary interval, split at crossings.
    let mut runs: Vec<Run> = Vec::new();
    {
        let mut sa = Scan::new(a);
        let mut sb = Scan::new(b);
        let mut scratch = Vec::new();
        for w in xs.windows(2) {
            let (x0, x1) = (&w[0], &w[1]);
            sa.touching(x0, &mut scratch);
            sb.touching(x0, &mut scratch);
            let ca = sa.covering(x0, x1);
            let cb = sb.covering(x0, x1);
            let mut push = |l: Value, r: Value, side: u8, index: usize| {
                runs.push(Run {
                    l,
                    r,
                    src: Src { side, index },
                })
            };
            match (ca, cb) {
                (None, None) => {}
                (Some(i), None) => push(x0.clone(), x1.clone(), 0, i),
                (None, Some(j)) => push(x0.clone(), x1.clone(), 1, j),
                (Some(i), Some(j)) => {
                    let d0 = a[i].value_at(x0) - b[j].value_at(x0);
                    let d1 = a[i].value_at(x1) - b[j].value_at(x1);
                    let zero = Value::zero();
                    if d0 >= zero && d1 >= zero {
                        push(x0.clone(), x1.clone(), 0, i);
                    } else if d0 <= zero && d1 <= zero {
                        push(x0.clone(), x1.clone(), 1, j);
                    } else {
                        let c = x0 + (x1 - x0) * &d0 / (&d0 - &d1);
                        if d0 > zero {
                            push(x0.clone(), c.clone(), 0, i);
                            push(c, x1.clone(), 1, j);
                        } else {
                            push(x0.clone(), c.clone(), 1, j);
                            push(c, x1.clone(), 0, i);
                        }
                    }
                }
            }
        }
    }

    // Break values: every interval end plus every crossing.
    let mut stops: Vec<Value> = xs.clone();
    stops.extend(runs.iter().map(|r| r.l.clone()));
    stops.sort();
    stops.dedup();

    let mut out: Vec<Piece> = Vec::new();
    let mut out_src: Vec<Option<Src>> = Vec::new();
    let mut open: Option<usize> = None;
    let mut ri = 0;
    let mut sa = Scan::new(a);
    let mut sb = Scan::new(b);
    let mut touch = Vec::new();
    let mut cands: Vec<Vertex> = Vec::new();
    let mut verts: Vec<Vertex> = Vec::new();

    for x in &stops {
        // Everything either envelope offers at x; `verts` excludes segment interiors.
        cands.clear();
        verts.clear();
        for (s, scan) in [(0u8, &mut sa), (1u8, &mut sb)] {
            scan.touching(x, &mut touch);
            for &i in &touch {
                let p = &side(s)[i];
                let v = p.vertex_at(x);
                if p.is_point() || *x == p.lo.at.follower || *x == p.hi.at.follower {
                    verts.push(v.clone());
                }
                cands.push(v);
            }
        }
        let best = cands.iter().map(|v| &v.at.leader).max().cloned();

        let left = open.filter(|&k| out[k].hi.at.follower == *x);
        let right = runs.get(ri).filter(|r| r.l == *x);
        let lval = left.map(|k| out[k].hi.at.leader.clone());
        let rval = right.map(|r| side(r.src.side)[r.src.index].value_at(x));

        let same_source = match (left, right) {
            (Some(k), Some(r)) => out_src[k] == Some(r.src),
            _ => false,
        };
        let pinned = |v: &Value| verts.iter().any(|w| w.at.leader == *v);

        if let Some(k) = left {
            if let Some(o) = pick_best(&cands, &out[k].hi.at.leader) {
                if o < out[k].hi.origin {
                    out[k].hi.origin = o;
                }
            }
        }

        let mut extend_open = false;
        if same_source && !pinned(lval.as_ref().expect("left present")) {
            extend_open = true;
        }

        let top = lval.into_iter().chain(rval).max();
        let isolated = match (&best, &top) {
            (Some(b), Some(t)) => b > t,
            (Some(_), None) => true,
            _ => false,
        };

        if let Some(r) = right {
            let src = &side(r.src.side)[r.src.index];
            if extend_open {
                let k = left.expect("left present");
                out[k].hi = src.vertex_at(&r.r);
            } else {
                let mut piece = src.restrict(&r.l, &r.r);
                if let Some(o) = pick_best(&cands, &piece.lo.at.leader) {
                    if o < piece.lo.origin {
                        piece.lo.origin = o;
                    }
                }
                out.push(piece);
                out_src.push(Some(r.src));
                open = Some(out.len() - 1);
            }
            ri += 1;
        }

        if isolated {
            let v = best.expect("isolated implies best");
            let origin = pick_best(&cands, &v).expect("best attained");
            let point = Piece::point(Vertex {
                at: ValuePair::new(v, x.clone()),
                origin,
            });
            // Keep pieces ordered by low end: the point goes before a segment starting at x.
            match right {
                Some(_) if !extend_open => {
                    let seg = out.pop().expect("just pushed");
                    let src = out_src.pop().expect("just pushed");
                    out.push(point);
                    out_src.push(None);
                    out.push(seg);
                    out_src.push(src);
                    open = Some(out.len() - 1);
                }
                _ => {
                    out.push(point);
                    out_src.push(None);
                }
            }
        }
    }
    debug_assert_eq!(ri, runs.len());
    out
}

fn finish(pieces: Vec<Piece>) -> Frontier {
    Frontier::from_pieces(pieces)
}

pub fn leaf_frontier(reward: PayoffPair) -> Frontier {
    Frontier {
        points: alloc::vec![FrontierPoint {
            value: ValuePair::from(reward),
            origin: Origin::Leaf,
        }],
        segments: Vec::new(),
    }
}

/// Leader node: every child element, plus every segment joining points of two
/// different children, reduced to the upper envelope.
pub fn merge_leader(children: &[(ActionId, &Frontier)]) -> Frontier {
    let mut pieces: Vec<Piece> = Vec::new();
    for (a, f) in children {
        pieces.extend(f.pieces_through(*a));
    }
    for (i, (a, fa)) in children.iter().enumerate() {
        for (b, fb) in &children[i + 1..] {
            for p in fa.points() {
                for q in fb.points() {
                    let (lo, hi) = match p.value.follower.cmp(&q.value.follower) {
                        Ordering::Less => ((*a, p.value.clone()), (*b, q.value.clone())),
                        Ordering::Greater => ((*b, q.value.clone()), (*a, p.value.clone())),
                        Ordering::Equal => continue,
                    };
                    pieces.push(Piece {
                        lo: Vertex {
                            at: lo.1.clone(),
                            origin: Origin::Child(lo.0),
                        },
                        hi: Vertex {
                            at: hi.1.clone(),
                            origin: Origin::Child(hi.0),
                        },
                        origin: Origin::Mix {
                            lo: Box::new(lo),
                            hi: Box::new(hi),
                        },
                    });
                }
            }
        }
    }
    finish(envelope(&pieces))
}

/// Follower node: each child clipped at its threshold, then the upper envelope.
/// Empty when every child clips away.
pub fn merge_follower(children: &[(ActionId, &Frontier)], sigmas: &SigmaThresholds) -> Frontier {
    let mut pieces: Vec<Piece> = Vec::new();
    for (a, f) in children {
        match sigmas.get(*a) {
            None => pieces.extend(f.pieces_through(*a)),
            Some(s) => pieces.extend(f.pieces_through(*a).iter().filter_map(|p| p.clip(&s))),
        }
    }
    finish(envelope(&pieces))
}

/// Drops everything with follower value below `bound`; segments crossing the
/// bound are cut there.
pub fn clip_frontier(f: &Frontier, bound: Option<Value>) -> Frontier {
    match bound {
        None => f.clone(),
        Some(s) => finish(f.pieces().iter().filter_map(|p| p.clip(&s)).collect()),
    }
}

pub fn prune_envelope(f: &Frontier) -> Frontier {
    finish(envelope(&f.pieces()))
}

/// Thresholds for the children of follower node `node`.
pub fn sigma_thresholds(tree: &GameTree, node: NodeId) -> SigmaThresholds {
    debug_assert_eq!(tree.owner(node), Owner::Follower);
    let threats: Vec<(ActionId, Value)> = tree
        .children(node)
        .iter()
        .map(|e| (e.action, minimax_follower_value(tree, e.child).expect("child exists")))
        .collect();
    SigmaThresholds::from_threats(&threats)
}

/// Builds a frontier from raw elements without any pruning; for tests and
/// callers that want `prune_envelope` on arbitrary input.
pub fn raw_frontier(points: &[(ValuePair, Origin)], segments: &[(ValuePair, ValuePair, Origin)]) -> Frontier {
    let mut pieces: Vec<Piece> = points
        .iter()
        .map(|(v, o)| {
            Piece::point(Vertex {
                at: v.clone(),
                origin: o.clone(),
            })
        })
        .collect();
    for (p, q, o) in segments {
        let (lo, hi) = if p.follower <= q.follower { (p, q) } else { (q, p) };
        pieces.push(Piece {
            lo: Vertex {
                at: lo.clone(),
                origin: o.at(lo),
            },
            hi: Vertex {
                at: hi.clone(),
                origin: o.at(hi),
            },
            origin: o.clone(),
        });
    }
    Frontier::from_pieces(pieces)
}
