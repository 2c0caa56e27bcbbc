//! Finite quivers, paths, loops, augmentation, self-loop decoration, lattice
//! generators and the self-loop insertion/deletion calculus.
//!
//! Path storage convention: a path is the edge list `[e_1, ..., e_k]` with
//! `target(e_a) = source(e_{a+1})`, i.e. edges in traversal order, first edge
//! first. Literature that composes paths right-to-left maps onto this storage
//! by reversing the written word once; this is the single conversion point,
//! and the holonomy product order in `dirac` is fixed against it.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Default cap on loop-enumeration length.
pub const DEFAULT_LOOP_LIMIT: usize = 12;

/// Parameters of the lattice torus quiver `T^d_m` (and `O^d_m` when
/// `self_loops` is set).
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    /// Dimension, `d >= 1`.
    pub d: usize,
    /// Vertices per direction, `m >= 2`.
    pub m: usize,
    /// Add one self-loop per vertex (the quiver `O^d_m`).
    pub self_loops: bool,
    /// Lattice spacing: edge distance on lattice edges.
    pub a: f64,
    /// Self-loop scale: edge distance on self-loops is `a / tau`.
    pub tau: f64,
}

impl LatticeSpec {
    pub fn new(d: usize, m: usize) -> Self {
        LatticeSpec { d, m, self_loops: false, a: 1.0, tau: 1.0 }
    }

    pub fn with_self_loops(mut self) -> Self {
        self.self_loops = true;
        self
    }

    pub fn with_spacing(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.m.pow(self.d as u32)
    }
}

/// Lattice bookkeeping carried by quivers built from a [`LatticeSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeInfo {
    pub spec: LatticeSpec,
    /// Set once the quiver has been augmented (reverse hops available).
    pub augmented: bool,
}

/// A finite directed multigraph. Edge list order is the canonical `EdgeId`
/// order; multi-edges and self-loops are permitted.
#[derive(Clone, Debug)]
pub struct Quiver {
    vertices: usize,
    edges: Vec<(VertexId, VertexId)>,
    /// Graph distance rho per edge; 1.0 unless set.
    distance: Vec<f64>,
    /// For edges added by `augment`: the original edge they reverse.
    parent: Vec<Option<EdgeId>>,
    /// For original edges: the id of their reversed copy, once augmented.
    reversed: Vec<Option<EdgeId>>,
    /// Out-adjacency, each list ascending by edge id.
    out_adj: Vec<Vec<EdgeId>>,
    lattice: Option<LatticeInfo>,
}

impl Quiver {
    pub fn new(vertices: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        for &(s, t) in &edges {
            if s >= vertices || t >= vertices {
                return Err(Error::validation(format!(
                    "edge ({s},{t}) out of range for {vertices} vertices"
                )));
            }
        }
        let n_e = edges.len();
        let mut out_adj = vec![Vec::new(); vertices];
        for (e, &(s, _)) in edges.iter().enumerate() {
            out_adj[s].push(e);
        }
        Ok(Quiver {
            vertices,
            edges,
            distance: vec![1.0; n_e],
            parent: vec![None; n_e],
            reversed: vec![None; n_e],
            out_adj,
            lattice: None,
        })
    }

    /// Sets the edge distance rho. Must be strictly positive everywhere.
    pub fn with_distance(mut self, distance: Vec<f64>) -> Result<Self> {
        if distance.len() != self.edges.len() {
            return Err(Error::validation("distance vector length != edge count"));
        }
        if distance.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::validation("edge distance must be strictly positive"));
        }
        self.distance = distance;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e].0
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[e].1
    }

    pub fn rho(&self, e: EdgeId) -> f64 {
        self.distance[e]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distance
    }

    pub fn is_self_loop(&self, e: EdgeId) -> bool {
        self.edges[e].0 == self.edges[e].1
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v]
    }

    /// Self-loop edges at `v`, ascending.
    pub fn self_loops_at(&self, v: VertexId) -> Vec<EdgeId> {
        self.out_adj[v].iter().copied().filter(|&e| self.is_self_loop(e)).collect()
    }

    /// Parent edge for edges created by [`Quiver::augment`].
    pub fn parent_edge(&self, e: EdgeId) -> Option<EdgeId> {
        self.parent[e]
    }

    /// Reversed copy of an original edge, present after augmentation.
    pub fn reversed_edge(&self, e: EdgeId) -> Option<EdgeId> {
        self.reversed[e]
    }

    pub fn lattice_info(&self) -> Option<&LatticeInfo> {
        self.lattice.as_ref()
    }

    /// True if every vertex is reachable from every other ignoring edge
    /// directions.
    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertices];
        for &(s, t) in &self.edges {
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// The augmented quiver `Q*`: a reversed copy of every non-self-loop edge
    /// is appended after the original edge list. Original edge ids are
    /// preserved as a prefix; each added edge records its parent.
    pub fn augment(&self) -> Quiver {
        let mut q = self.clone();
        let orig = self.edges.len();
        for e in 0..orig {
            let (s, t) = self.edges[e];
            if s != t {
                let id = q.edges.len();
                q.edges.push((t, s));
                q.distance.push(self.distance[e]);
                q.parent.push(Some(e));
                q.reversed.push(None);
                q.reversed[e] = Some(id);
                q.out_adj[t].push(id);
            }
        }
        if let Some(info) = q.lattice.as_mut() {
            info.augmented = true;
        }
        q
    }

    /// The decorated quiver `Q°`: exactly one new self-loop per vertex,
    /// appended after the existing edges in vertex order. `rho` on the new
    /// loops is `a/tau` when lattice metadata is present, else 1.
    pub fn add_self_loops(&self) -> Quiver {
        let mut q = self.clone();
        let rho = match &self.lattice {
            Some(info) => info.spec.a / info.spec.tau,
            None => 1.0,
        };
        for v in 0..self.vertices {
            let id = q.edges.len();
            q.edges.push((v, v));
            q.distance.push(rho);
            q.parent.push(None);
            q.reversed.push(None);
            q.out_adj[v].push(id);
        }
        if let Some(info) = q.lattice.as_mut() {
            info.spec.self_loops = true;
        }
        q
    }

    /// Builds the lattice torus `T^d_m` (or `O^d_m` when `spec.self_loops`).
    ///
    /// Vertices are the tuples of `(Z/mZ)^d` flattened with coordinate 0 as
    /// the least-significant base-`m` digit: `index = sum_i x_i * m^i`.
    /// Lattice edge `v*d + i` goes from `v` to `v + e_i`; self-loops, if
    /// requested, occupy ids `d*m^d + v`.
    pub fn make_torus(spec: &LatticeSpec) -> Result<Quiver> {
        if spec.m < 2 || spec.d < 1 {
            return Err(Error::validation(format!(
                "torus requires m >= 2 and d >= 1, got m={}, d={}",
                spec.m, spec.d
            )));
        }
        if !(spec.a > 0.0) || !(spec.tau > 0.0) {
            return Err(Error::validation("lattice spacing and tau must be positive"));
        }
        let n = spec.vertex_count();
        let mut edges = Vec::with_capacity(n * spec.d);
        let mut dist = Vec::with_capacity(n * spec.d);
        for v in 0..n {
            for i in 0..spec.d {
                edges.push((v, lattice_shift(v, i, 1, spec.m, spec.d)));
                dist.push(spec.a);
            }
        }
        if spec.self_loops {
            for v in 0..n {
                edges.push((v, v));
                dist.push(spec.a / spec.tau);
            }
        }
        let mut q = Quiver::new(n, edges)?.with_distance(dist)?;
        q.lattice = Some(LatticeInfo { spec: spec.clone(), augmented: false });
        Ok(q)
    }

    /// The "shifted by one" cyclic variant on `n = m^2` vertices: vertex `v`
    /// connects to `v+1 (mod n)` and to `v+m (mod n)`, so the right boundary
    /// wraps into the next row. Not a torus; carries no lattice metadata and
    /// is excluded from the closed-form lattice formulas.
    pub fn make_shifted_torus(m: usize) -> Result<Quiver> {
        if m < 2 {
            return Err(Error::validation("shifted torus requires m >= 2"));
        }
        let n = m * m;
        let mut edges = Vec::with_capacity(2 * n);
        for v in 0..n {
            edges.push((v, (v + 1) % n));
            edges.push((v, (v + m) % n));
        }
        Quiver::new(n, edges)
    }

    /// Coordinates of lattice vertex `v`.
    pub fn lattice_coords(&self, v: VertexId) -> Result<Vec<usize>> {
        let info = self.require_lattice()?;
        Ok(vertex_coords(v, info.spec.m, info.spec.d))
    }

    /// Lattice vertex index from coordinates.
    pub fn lattice_vertex(&self, coords: &[usize]) -> Result<VertexId> {
        let info = self.require_lattice()?;
        if coords.len() != info.spec.d {
            return Err(Error::validation("coordinate tuple has wrong length"));
        }
        let mut v = 0;
        for (i, &x) in coords.iter().enumerate() {
            v += (x % info.spec.m) * info.spec.m.pow(i as u32);
        }
        Ok(v)
    }

    /// Neighbour of `v` along signed axis `step` (`+1`-based: `step = ±(axis+1)`).
    pub fn lattice_neighbor(&self, v: VertexId, axis: usize, sign: i8) -> Result<VertexId> {
        let info = self.require_lattice()?;
        if axis >= info.spec.d {
            return Err(Error::validation("axis out of range"));
        }
        Ok(lattice_shift(v, axis, sign as i64, info.spec.m, info.spec.d))
    }

    /// Edge realizing one hop from `v` along `axis` in direction `sign`.
    /// Forward hops use original lattice edges; backward hops use the
    /// reversed copies, hence require the augmented quiver.
    pub fn lattice_step_edge(&self, v: VertexId, axis: usize, sign: i8) -> Result<EdgeId> {
        let info = self.require_lattice()?;
        let (d, m) = (info.spec.d, info.spec.m);
        if axis >= d {
            return Err(Error::validation("axis out of range"));
        }
        if sign > 0 {
            Ok(v * d + axis)
        } else {
            if !info.augmented {
                return Err(Error::validation(
                    "backward lattice hops need the augmented quiver",
                ));
            }
            let u = lattice_shift(v, axis, -1, m, d);
            self.reversed[u * d + axis]
                .ok_or_else(|| Error::validation("missing reversed lattice edge"))
        }
    }

    fn require_lattice(&self) -> Result<&LatticeInfo> {
        self.lattice
            .as_ref()
            .ok_or_else(|| Error::validation("operation requires a lattice-generated quiver"))
    }

    /// All closed paths of length `k` at `base` (or at every vertex when
    /// `base` is `None`), in lexicographic order of the edge sequence; bases
    /// ascend when iterating all vertices. `k = 0` yields nothing: constant
    /// paths are not loops.
    pub fn enumerate_loops(
        &self,
        k: usize,
        base: Option<VertexId>,
        limit: usize,
    ) -> Result<Vec<Path>> {
        if k > limit {
            return Err(Error::resource(format!(
                "loop length {k} exceeds the configured limit {limit}"
            )));
        }
        let mut out = Vec::new();
        if k == 0 {
            return Ok(out);
        }
        let bases: Vec<VertexId> = match base {
            Some(v) => {
                if v >= self.vertices {
                    return Err(Error::validation("base vertex out of range"));
                }
                vec![v]
            }
            None => (0..self.vertices).collect(),
        };
        let mut stack = Vec::with_capacity(k);
        for b in bases {
            self.loops_dfs(b, b, k, &mut stack, &mut out);
        }
        Ok(out)
    }

    fn loops_dfs(
        &self,
        base: VertexId,
        at: VertexId,
        remaining: usize,
        stack: &mut Vec<EdgeId>,
        out: &mut Vec<Path>,
    ) {
        if remaining == 0 {
            if at == base {
                out.push(Path { edges: stack.clone(), base });
            }
            return;
        }
        for &e in &self.out_adj[at] {
            stack.push(e);
            self.loops_dfs(base, self.edges[e].1, remaining - 1, stack, out);
            stack.pop();
        }
    }

    /// All plaquettes `P_{±i,±j}(v)` on an augmented lattice torus: the
    /// length-4 loops stepping `(±i, ±j, ∓i, ∓j)` over ordered pairs of
    /// distinct axes. Count `4d(d−1)`; empty for `d = 1`.
    pub fn plaquettes(&self, v: VertexId) -> Result<Vec<Path>> {
        let info = self.require_lattice()?;
        let d = info.spec.d;
        if d < 2 {
            return Ok(Vec::new());
        }
        if !info.augmented {
            return Err(Error::validation("plaquettes live on the augmented quiver"));
        }
        if info.spec.m < 3 {
            return Err(Error::validation("plaquettes require m >= 3"));
        }
        if v >= self.vertices {
            return Err(Error::validation("vertex out of range"));
        }
        let mut out = Vec::with_capacity(4 * d * (d - 1));
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                for &si in &[1i8, -1] {
                    for &sj in &[1i8, -1] {
                        out.push(self.step_path(v, &[(i, si), (j, sj), (i, -si), (j, -sj)])?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Path obtained by hopping along the given signed axes from `v`.
    pub fn step_path(&self, v: VertexId, steps: &[(usize, i8)]) -> Result<Path> {
        let mut at = v;
        let mut edges = Vec::with_capacity(steps.len());
        for &(axis, sign) in steps {
            let e = self.lattice_step_edge(at, axis, sign)?;
            edges.push(e);
            at = self.target(e);
        }
        Ok(Path { edges, base: v })
    }

    /// JSON form: `{"vertices": n, "edges": [[s,t],...], "distance": {"e": rho}?, "meta": {...}?}`.
    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self.edges.iter().map(|&(s, t)| json!([s, t])).collect();
        let mut obj = serde_json::Map::new();
        obj.insert("vertices".into(), json!(self.vertices));
        obj.insert("edges".into(), json!(edges));
        if self.distance.iter().any(|&r| r != 1.0) {
            let d: BTreeMap<String, f64> = self
                .distance
                .iter()
                .enumerate()
                .filter(|&(_, &r)| r != 1.0)
                .map(|(e, &r)| (e.to_string(), r))
                .collect();
            obj.insert("distance".into(), json!(d));
        }
        let mut meta = serde_json::Map::new();
        if let Some(info) = &self.lattice {
            meta.insert(
                "lattice".into(),
                json!({
                    "d": info.spec.d,
                    "m": info.spec.m,
                    "self_loops": info.spec.self_loops,
                    "a": info.spec.a,
                    "tau": info.spec.tau,
                    "augmented": info.augmented,
                }),
            );
        }
        if self.parent.iter().any(|p| p.is_some()) {
            let parents: BTreeMap<String, usize> = self
                .parent
                .iter()
                .enumerate()
                .filter_map(|(e, p)| p.map(|orig| (e.to_string(), orig)))
                .collect();
            meta.insert("reversed_parents".into(), json!(parents));
        }
        if !meta.is_empty() {
            obj.insert("meta".into(), Value::Object(meta));
        }
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<Quiver> {
        let obj = v.as_object().ok_or_else(|| Error::validation("quiver JSON must be an object"))?;
        let vertices = obj
            .get("vertices")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::validation("missing 'vertices'"))? as usize;
        let edges_v = obj
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("missing 'edges'"))?;
        let mut edges = Vec::with_capacity(edges_v.len());
        for ev in edges_v {
            let pair = ev.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::validation("each edge must be a two-element array [s, t]")
            })?;
            let s = pair[0].as_u64().ok_or_else(|| Error::validation("bad edge source"))? as usize;
            let t = pair[1].as_u64().ok_or_else(|| Error::validation("bad edge target"))? as usize;
            edges.push((s, t));
        }
        let mut q = Quiver::new(vertices, edges)?;
        if let Some(dv) = obj.get("distance") {
            let map = dv
                .as_object()
                .ok_or_else(|| Error::validation("'distance' must be an object"))?;
            let mut dist = vec![1.0; q.edge_count()];
            for (k, val) in map {
                let e: usize = k
                    .parse()
                    .map_err(|_| Error::validation("distance keys must be edge indices"))?;
                if e >= dist.len() {
                    return Err(Error::validation("distance key out of range"));
                }
                dist[e] = val
                    .as_f64()
                    .ok_or_else(|| Error::validation("distance values must be numbers"))?;
            }
            q = q.with_distance(dist)?;
        }
        if let Some(meta) = obj.get("meta").and_then(Value::as_object) {
            if let Some(l) = meta.get("lattice").and_then(Value::as_object) {
                let get = |k: &str| l.get(k).and_then(Value::as_u64);
                let spec = LatticeSpec {
                    d: get("d").ok_or_else(|| Error::validation("lattice meta missing d"))? as usize,
                    m: get("m").ok_or_else(|| Error::validation("lattice meta missing m"))? as usize,
                    self_loops: l.get("self_loops").and_then(Value::as_bool).unwrap_or(false),
                    a: l.get("a").and_then(Value::as_f64).unwrap_or(1.0),
                    tau: l.get("tau").and_then(Value::as_f64).unwrap_or(1.0),
                };
                let augmented = l.get("augmented").and_then(Value::as_bool).unwrap_or(false);
                q.lattice = Some(LatticeInfo { spec, augmented });
            }
            if let Some(p) = meta.get("reversed_parents").and_then(Value::as_object) {
                for (k, val) in p {
                    let e: usize =
                        k.parse().map_err(|_| Error::validation("bad reversed_parents key"))?;
                    let orig = val
                        .as_u64()
                        .ok_or_else(|| Error::validation("bad reversed_parents value"))?
                        as usize;
                    if e >= q.edge_count() || orig >= q.edge_count() {
                        return Err(Error::validation("reversed_parents index out of range"));
                    }
                    q.parent[e] = Some(orig);
                    q.reversed[orig] = Some(e);
                }
            }
        }
        Ok(q)
    }
}

fn vertex_coords(v: VertexId, m: usize, d: usize) -> Vec<usize> {
    let mut coords = Vec::with_capacity(d);
    let mut rest = v;
    for _ in 0..d {
        coords.push(rest % m);
        rest /= m;
    }
    coords
}

fn lattice_shift(v: VertexId, axis: usize, delta: i64, m: usize, d: usize) -> VertexId {
    debug_assert!(axis < d);
    let stride = m.pow(axis as u32);
    let digit = (v / stride) % m;
    let new_digit = (digit as i64 + delta).rem_euclid(m as i64) as usize;
    v - digit * stride + new_digit * stride
}

/// A path: edge list in traversal order, or the constant path `E_base` when
/// the edge list is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    edges: Vec<EdgeId>,
    base: VertexId,
}

impl Path {
    /// Builds a path, validating composability against `q`.
    pub fn new(q: &Quiver, edges: Vec<EdgeId>) -> Result<Path> {
        if edges.is_empty() {
            return Err(Error::validation(
                "empty edge list: use Path::constant for the trivial path",
            ));
        }
        for &e in &edges {
            if e >= q.edge_count() {
                return Err(Error::validation(format!("edge id {e} out of range")));
            }
        }
        for w in edges.windows(2) {
            if q.target(w[0]) != q.source(w[1]) {
                return Err(Error::validation(format!(
                    "edges {} and {} do not compose",
                    w[0], w[1]
                )));
            }
        }
        let base = q.source(edges[0]);
        Ok(Path { edges, base })
    }

    /// The constant (length-0) path `E_v`.
    pub fn constant(v: VertexId) -> Path {
        Path { edges: Vec::new(), base: v }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self, q: &Quiver) -> VertexId {
        if self.edges.is_empty() {
            self.base
        } else {
            q.source(self.edges[0])
        }
    }

    pub fn target(&self, q: &Quiver) -> VertexId {
        if self.edges.is_empty() {
            self.base
        } else {
            q.target(*self.edges.last().unwrap())
        }
    }

    pub fn is_loop(&self, q: &Quiver) -> bool {
        !self.edges.is_empty() && self.source(q) == self.target(q)
    }

    /// Concatenation `self · p` (p first, then self). `None` encodes the zero
    /// element of the path algebra, returned when the paths do not compose.
    pub fn compose(&self, q: &Quiver, p: &Path) -> Option<Path> {
        if p.target(q) != self.source(q) {
            return None;
        }
        if p.is_empty() {
            return Some(self.clone());
        }
        if self.is_empty() {
            return Some(p.clone());
        }
        let mut edges = p.edges.clone();
        edges.extend_from_slice(&self.edges);
        Some(Path { edges, base: p.base })
    }

    /// Cyclic rotation of a loop: the rotation by `r` starts the traversal at
    /// edge `r` of `self`.
    pub fn rotate(&self, q: &Quiver, r: usize) -> Result<Path> {
        if !self.is_loop(q) {
            return Err(Error::validation("rotate requires a loop"));
        }
        let k = self.edges.len();
        let r = r % k;
        let mut edges = Vec::with_capacity(k);
        edges.extend_from_slice(&self.edges[r..]);
        edges.extend_from_slice(&self.edges[..r]);
        Path::new(q, edges)
    }
}

/// Single self-loop insertion `v∨_j(p)`: inserts the (first) added self-loop
/// at `v` before slot `j` (1-based). For a loop of length `k` the slot
/// `j = k+1` appends, which coincides with `j = 1` up to rotation. Returns
/// the trivial path `E_{s(p)}` when the insertion condition fails.
pub fn insert_self_loop(q: &Quiver, p: &Path, j: usize, v: VertexId) -> Path {
    let sentinel = Path::constant(p.source(q));
    let k = p.len();
    if j == 0 || j > k + 1 {
        return sentinel;
    }
    let slot_vertex = if j <= k { q.source(p.edges()[j - 1]) } else { p.target(q) };
    if slot_vertex != v {
        return sentinel;
    }
    let loops = q.self_loops_at(v);
    let Some(&o) = loops.first() else {
        return sentinel;
    };
    let mut edges = Vec::with_capacity(k + 1);
    edges.extend_from_slice(&p.edges()[..j - 1]);
    edges.push(o);
    edges.extend_from_slice(&p.edges()[j - 1..]);
    let base = q.source(edges[0]);
    Path { edges, base }
}

/// Multi-index insertion `v_I∨(p)`: applies single insertions at the strictly
/// increasing 1-based indices `i` left to right. Any failing step collapses
/// the result to the trivial path `E_{s(p)}`.
pub fn insert_self_loops(q: &Quiver, p: &Path, indices: &[usize], vs: &[VertexId]) -> Path {
    if indices.len() != vs.len() {
        return Path::constant(p.source(q));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Path::constant(p.source(q));
    }
    let mut cur = p.clone();
    for (&j, &v) in indices.iter().zip(vs) {
        cur = insert_self_loop(q, &cur, j, v);
        if cur.is_empty() {
            return Path::constant(p.source(q));
        }
    }
    cur
}

/// Single deletion `v∧_j(p)`: removes the `j`-th edge (1-based) when it is a
/// self-loop at `v`; otherwise returns the trivial path `E_{s(p)}`.
pub fn delete_self_loop(q: &Quiver, p: &Path, j: usize, v: VertexId) -> Path {
    let sentinel = Path::constant(p.source(q));
    let k = p.len();
    if j == 0 || j > k || k == 1 {
        return sentinel;
    }
    let e = p.edges()[j - 1];
    if !q.is_self_loop(e) || q.source(e) != v {
        return sentinel;
    }
    let mut edges = Vec::with_capacity(k - 1);
    edges.extend_from_slice(&p.edges()[..j - 1]);
    edges.extend_from_slice(&p.edges()[j..]);
    Path::new(q, edges).unwrap_or(sentinel)
}

/// Multi-index deletion, inverse of [`insert_self_loops`] on its support:
/// removes at the given indices right to left.
pub fn delete_self_loops(q: &Quiver, p: &Path, indices: &[usize], vs: &[VertexId]) -> Path {
    if indices.len() != vs.len() {
        return Path::constant(p.source(q));
    }
    let mut cur = p.clone();
    for (&j, &v) in indices.iter().zip(vs).rev() {
        cur = delete_self_loop(q, &cur, j, v);
        if cur.is_empty() {
            return Path::constant(p.source(q));
        }
    }
    cur
}
