//! Prespectral-triple profiles, Bratteli diagrams and networks, symbolic
//! group profiles, the representation-space dimension bound, and the
//! canonical unitary realization of a Bratteli morphism.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};
use crate::quiver::{Quiver, VertexId};

/// The integer pair of tuples `(n, r)` classifying a prespectral triple:
/// algebra `⊕_j M_{n_j}` acting on `⊕_j r_j · C^{n_j}`.
///
/// Stored sorted ascending by `(n, r)`; all enumeration is canonical under
/// this order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrespectralProfile {
    n: Vec<usize>,
    r: Vec<usize>,
}

impl PrespectralProfile {
    pub fn new(n: Vec<usize>, r: Vec<usize>) -> Result<Self> {
        if n.is_empty() || n.len() != r.len() {
            return Err(Error::validation("profile tuples must be nonempty, equal length"));
        }
        if n.iter().chain(r.iter()).any(|&x| x == 0) {
            return Err(Error::validation("profile entries must be >= 1"));
        }
        let mut pairs: Vec<(usize, usize)> = n.into_iter().zip(r).collect();
        pairs.sort();
        Ok(PrespectralProfile {
            n: pairs.iter().map(|p| p.0).collect(),
            r: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    /// `dim H = Σ r_j n_j`.
    pub fn hilbert_dim(&self) -> usize {
        self.n.iter().zip(&self.r).map(|(n, r)| n * r).sum()
    }

    /// `dim A = Σ n_j²`.
    pub fn algebra_dim(&self) -> usize {
        self.n.iter().map(|n| n * n).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "r": self.r })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| -> Result<Vec<usize>> {
            v.get(k)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::validation(format!("profile missing '{k}'")))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| Error::validation("profile entries must be integers"))
                })
                .collect()
        };
        PrespectralProfile::new(get("n")?, get("r")?)
    }
}

/// Nonnegative integer biadjacency matrix of shape `l_s × l_t`, witnessing a
/// unital *-algebra morphism between profiles when compatible.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BratteliDiagram {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    c: Vec<usize>,
}

impl BratteliDiagram {
    pub fn new(rows: usize, cols: usize, c: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 || c.len() != rows * cols {
            return Err(Error::validation("bad Bratteli diagram shape"));
        }
        Ok(BratteliDiagram { rows, cols, c })
    }

    pub fn from_rows(rows_data: &[Vec<usize>]) -> Result<Self> {
        let rows = rows_data.len();
        let cols = rows_data.first().map(|r| r.len()).unwrap_or(0);
        if rows_data.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("ragged Bratteli diagram"));
        }
        BratteliDiagram::new(rows, cols, rows_data.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.c[i * self.cols + j]
    }

    /// Checks the linking conditions `dst.n = Cᵀ·src.n` and `src.r = C·dst.r`.
    pub fn is_compatible(&self, src: &PrespectralProfile, dst: &PrespectralProfile) -> bool {
        if self.rows != src.len() || self.cols != dst.len() {
            return false;
        }
        for j in 0..self.cols {
            let col: usize = (0..self.rows).map(|i| self.get(i, j) * src.n()[i]).sum();
            if col != dst.n()[j] {
                return false;
            }
        }
        for i in 0..self.rows {
            let row: usize = (0..self.cols).map(|j| self.get(i, j) * dst.r()[j]).sum();
            if row != src.r()[i] {
                return false;
            }
        }
        true
    }

    /// True when the diagram is a permutation matrix.
    pub fn is_permutation(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        (0..self.rows).all(|i| {
            (0..self.cols).map(|j| self.get(i, j)).sum::<usize>() == 1
                && (0..self.cols).map(|j| self.get(j, i)).sum::<usize>() == 1
                && (0..self.cols).all(|j| self.get(i, j) <= 1)
        })
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<usize>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).collect()).collect();
        json!(rows)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows: Vec<Vec<usize>> = v
            .as_array()
            .ok_or_else(|| Error::validation("diagram must be an array of rows"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::validation("diagram row must be an array"))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|u| u as usize)
                            .ok_or_else(|| Error::validation("diagram entries must be integers"))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        BratteliDiagram::from_rows(&rows)
    }
}

/// All diagrams `C` with `dst.n = Cᵀ·src.n` and `src.r = C·dst.r`, in
/// lexicographic (row-major) order. Empty list means the hom-set is empty.
///
/// Column-wise bounded search: column `j` solves `Σ_i C_{i,j} m_i = n_j`;
/// the row condition `Σ_j C_{i,j} r_j = q_i` filters the combinations.
pub fn enumerate_bratteli(
    src: &PrespectralProfile,
    dst: &PrespectralProfile,
) -> Vec<BratteliDiagram> {
    enumerate_bratteli_bounded(src, dst, usize::MAX)
        .expect("unbounded enumeration cannot exceed the budget")
}

/// As [`enumerate_bratteli`], but charging one unit per candidate diagram
/// and failing with a resource error once `budget` is exceeded.
pub fn enumerate_bratteli_bounded(
    src: &PrespectralProfile,
    dst: &PrespectralProfile,
    budget: usize,
) -> Result<Vec<BratteliDiagram>> {
    // Quick necessary condition: q·m = r·n (both equal the Hilbert dimension).
    if src.hilbert_dim() != dst.hilbert_dim() {
        return Ok(Vec::new());
    }
    let (ls, lt) = (src.len(), dst.len());
    // Per-column solutions.
    let mut col_sols: Vec<Vec<Vec<usize>>> = Vec::with_capacity(lt);
    for j in 0..lt {
        let mut sols = Vec::new();
        let mut cur = vec![0usize; ls];
        column_solutions(src.n(), dst.n()[j], 0, &mut cur, &mut sols);
        if sols.is_empty() {
            return Ok(Vec::new());
        }
        col_sols.push(sols);
    }
    // Cartesian product over columns, then row filter.
    let mut work = 0usize;
    let mut out = Vec::new();
    let mut choice = vec![0usize; lt];
    loop {
        work = work.saturating_add(1);
        if work > budget {
            return Err(Error::resource(format!(
                "hom-set enumeration for {:?} -> {:?} exceeded budget {budget}",
                src.n(),
                dst.n()
            )));
        }
        let mut c = vec![0usize; ls * lt];
        for j in 0..lt {
            for i in 0..ls {
                c[i * lt + j] = col_sols[j][choice[j]][i];
            }
        }
        let rows_ok = (0..ls).all(|i| {
            (0..lt).map(|j| c[i * lt + j] * dst.r()[j]).sum::<usize>() == src.r()[i]
        });
        if rows_ok {
            out.push(BratteliDiagram { rows: ls, cols: lt, c });
        }
        // next choice
        let mut j = lt;
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < col_sols[j].len() {
                break;
            }
            choice[j] = 0;
            if j == 0 {
                choice.clear();
                break;
            }
        }
        if choice.is_empty() {
            break;
        }
    }
    out.sort();
    Ok(out)
}

fn column_solutions(
    m: &[usize],
    rem: usize,
    i: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if i == m.len() {
        if rem == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for x in 0..=(rem / m[i]) {
        cur[i] = x;
        column_solutions(m, rem - x * m[i], i + 1, cur, out);
    }
    cur[i] = 0;
}

/// Symbolic description of a unitary/permutation group: the multiset of
/// `U(n)` factor sizes, the order of the permutation part, and the number of
/// connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupProfile {
    /// Sizes `n` of the `U(n)` factors, ascending.
    pub unitary_factors: Vec<usize>,
    /// Order of the permutation part (`|Sym(n, r)|` or a product thereof).
    pub permutation_order: u64,
    /// Number of connected components (= permutation_order for Aut-sets).
    pub component_count: u64,
    /// `Σ n²` over the unitary factors.
    pub real_dimension: u64,
    /// Dimension of the center, one `U(1)` per factor.
    pub center_dimension: u64,
}

impl GroupProfile {
    fn from_factors(mut factors: Vec<usize>, permutation_order: u64) -> Self {
        factors.sort();
        let real_dimension = factors.iter().map(|&n| (n * n) as u64).sum();
        let center_dimension = factors.len() as u64;
        GroupProfile {
            unitary_factors: factors,
            permutation_order,
            component_count: permutation_order,
            real_dimension,
            center_dimension,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self.unitary_factors,
            "permutation_order": self.permutation_order,
            "component_count": self.component_count,
            "real_dimension": self.real_dimension,
            "center_dimension": self.center_dimension,
        })
    }
}

/// `|Sym(n, r)|`: permutations of summands preserving both `n_i` and `r_i`;
/// the product of factorials of the multiplicities of equal `(n, r)` pairs.
pub fn sym_order(x: &PrespectralProfile) -> u64 {
    let mut order: u64 = 1;
    let mut run = 1u64;
    for i in 1..x.len() {
        if x.n()[i] == x.n()[i - 1] && x.r()[i] == x.r()[i - 1] {
            run += 1;
            order *= run;
        } else {
            run = 1;
        }
    }
    order
}

/// Members of `Sym(n, r)` as permutations of summand indices
/// (`sigma[i]` = image of summand `i`).
pub fn sym_elements(x: &PrespectralProfile) -> Vec<Vec<usize>> {
    let l = x.len();
    let mut out = Vec::new();
    let mut cur: Vec<Option<usize>> = vec![None; l];
    let mut used = vec![false; l];
    fn rec(
        x: &PrespectralProfile,
        i: usize,
        cur: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let l = x.len();
        if i == l {
            out.push(cur.iter().map(|o| o.unwrap()).collect());
            return;
        }
        for j in 0..l {
            if !used[j] && x.n()[j] == x.n()[i] && x.r()[j] == x.r()[i] {
                used[j] = true;
                cur[i] = Some(j);
                rec(x, i + 1, cur, used, out);
                used[j] = false;
                cur[i] = None;
            }
        }
    }
    rec(x, 0, &mut cur, &mut used, &mut out);
    out
}

/// Automorphisms of the prespectral triple with profile `x`:
/// `Sym(n,r)` many components of `U(n_1) × … × U(n_l)`.
pub fn automorphism_profile(x: &PrespectralProfile) -> GroupProfile {
    GroupProfile::from_factors(x.n().to_vec(), sym_order(x))
}

/// A Bratteli network over a quiver: a profile per vertex and a compatible
/// diagram per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BratteliNetwork {
    pub profiles: Vec<PrespectralProfile>,
    pub diagrams: Vec<BratteliDiagram>,
}

impl BratteliNetwork {
    pub fn validate(&self, q: &Quiver) -> Result<()> {
        if self.profiles.len() != q.vertex_count() || self.diagrams.len() != q.edge_count() {
            return Err(Error::validation("network shape does not match quiver"));
        }
        for e in 0..q.edge_count() {
            let (s, t) = (q.source(e), q.target(e));
            if !self.diagrams[e].is_compatible(&self.profiles[s], &self.profiles[t]) {
                return Err(Error::validation(format!("diagram on edge {e} incompatible")));
            }
        }
        Ok(())
    }

    pub fn hilbert_dim(&self, v: VertexId) -> usize {
        self.profiles[v].hilbert_dim()
    }

    pub fn to_json(&self) -> Value {
        let profiles: BTreeMap<String, Value> = self
            .profiles
            .iter()
            .enumerate()
            .map(|(v, p)| (v.to_string(), p.to_json()))
            .collect();
        let diagrams: BTreeMap<String, Value> = self
            .diagrams
            .iter()
            .enumerate()
            .map(|(e, d)| (e.to_string(), d.to_json()))
            .collect();
        json!({ "profiles": profiles, "diagrams": diagrams })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let pmap = v
            .get("profiles")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::validation("network missing 'profiles'"))?;
        let dmap = v
            .get("diagrams")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::validation("network missing 'diagrams'"))?;
        let mut profiles = vec![None; pmap.len()];
        for (k, val) in pmap {
            let idx: usize = k.parse().map_err(|_| Error::validation("bad profile key"))?;
            if idx >= profiles.len() {
                return Err(Error::validation("profile keys must be 0..vertex_count"));
            }
            profiles[idx] = Some(PrespectralProfile::from_json(val)?);
        }
        let mut diagrams = vec![None; dmap.len()];
        for (k, val) in dmap {
            let idx: usize = k.parse().map_err(|_| Error::validation("bad diagram key"))?;
            if idx >= diagrams.len() {
                return Err(Error::validation("diagram keys must be 0..edge_count"));
            }
            diagrams[idx] = Some(BratteliDiagram::from_json(val)?);
        }
        Ok(BratteliNetwork {
            profiles: profiles
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::validation("missing profile index"))?,
            diagrams: diagrams
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::validation("missing diagram index"))?,
        })
    }
}

/// All profiles with `hilbert_dim = N`: multisets of pairs `(n, r)` with
/// `Σ n·r = N`, canonical ascending order.
pub fn enumerate_profiles(n_total: usize) -> Vec<PrespectralProfile> {
    let mut out = Vec::new();
    let mut cur: Vec<(usize, usize)> = Vec::new();
    fn rec(rem: usize, min_pair: (usize, usize), cur: &mut Vec<(usize, usize)>, out: &mut Vec<PrespectralProfile>) {
        if rem == 0 {
            if !cur.is_empty() {
                out.push(
                    PrespectralProfile::new(
                        cur.iter().map(|p| p.0).collect(),
                        cur.iter().map(|p| p.1).collect(),
                    )
                    .expect("positive entries"),
                );
            }
            return;
        }
        for n in 1..=rem {
            for r in 1..=(rem / n) {
                if (n, r) < min_pair {
                    continue;
                }
                cur.push((n, r));
                rec(rem - n * r, (n, r), cur, out);
                cur.pop();
            }
        }
    }
    rec(n_total, (0, 0), &mut cur, &mut out);
    out.sort();
    out
}

/// Default node budget for network enumeration.
pub const DEFAULT_NETWORK_BUDGET: usize = 500_000;

/// All Bratteli networks over `q` with common Hilbert dimension `N`:
/// profiles assigned vertex-by-vertex with edge-wise pruning (a labeling with
/// any empty hom-set on an edge is discarded before diagram expansion), then
/// every combination of compatible diagrams per edge.
///
/// The count includes one network per diagram choice, matching the
/// decomposition of the representation space.
pub fn enumerate_networks(q: &Quiver, n: usize, budget: usize) -> Result<Vec<BratteliNetwork>> {
    if n == 0 {
        return Err(Error::validation("Hilbert dimension N must be >= 1"));
    }
    enumerate_networks_over(q, enumerate_profiles(n), budget)
}

/// As [`enumerate_networks`], but over an explicit profile universe (useful
/// when the full universe for `N` is too large to expand).
pub fn enumerate_networks_over(
    q: &Quiver,
    profiles: Vec<PrespectralProfile>,
    budget: usize,
) -> Result<Vec<BratteliNetwork>> {

    struct HomCache {
        profiles: Vec<PrespectralProfile>,
        map: Vec<Option<Vec<BratteliDiagram>>>,
    }

    struct Search<'a> {
        q: &'a Quiver,
        cache: HomCache,
        label: Vec<usize>,
        out: Vec<BratteliNetwork>,
        nodes: usize,
        budget: usize,
    }
    impl Search<'_> {
        fn charge(&mut self, cost: usize) -> Result<()> {
            self.nodes = self.nodes.saturating_add(cost);
            if self.nodes > self.budget {
                Err(Error::resource(format!(
                    "network enumeration exceeded budget {}",
                    self.budget
                )))
            } else {
                Ok(())
            }
        }

        /// Hom-set between labeled profiles; its enumeration work counts
        /// against the search budget.
        fn hom(&mut self, s: usize, t: usize) -> Result<Vec<BratteliDiagram>> {
            let np = self.cache.profiles.len();
            let idx = s * np + t;
            if self.cache.map[idx].is_none() {
                let remaining = self.budget.saturating_sub(self.nodes).max(1);
                let sols = enumerate_bratteli_bounded(
                    &self.cache.profiles[s],
                    &self.cache.profiles[t],
                    remaining,
                )?;
                self.charge(sols.len())?;
                self.cache.map[idx] = Some(sols);
            }
            Ok(self.cache.map[idx].as_ref().unwrap().clone())
        }

        fn assign(&mut self, v: usize) -> Result<()> {
            let nv = self.q.vertex_count();
            if v == nv {
                return self.expand();
            }
            for l in 0..self.cache.profiles.len() {
                self.label[v] = l;
                self.charge(1)?;
                // prune on all edges whose endpoints are both assigned
                let mut ok = true;
                for e in 0..self.q.edge_count() {
                    let (s, t) = (self.q.source(e), self.q.target(e));
                    if s > v || t > v {
                        continue;
                    }
                    let (ls, lt) = (self.label[s], self.label[t]);
                    if self.hom(ls, lt)?.is_empty() {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    self.assign(v + 1)?;
                }
            }
            Ok(())
        }

        fn expand(&mut self) -> Result<()> {
            let ne = self.q.edge_count();
            let per_edge: Vec<Vec<BratteliDiagram>> = (0..ne)
                .map(|e| {
                    let (s, t) = (self.q.source(e), self.q.target(e));
                    self.hom(self.label[s], self.label[t])
                })
                .collect::<Result<_>>()?;
            let total = per_edge.iter().fold(1usize, |acc, d| acc.saturating_mul(d.len()));
            self.charge(total)?;
            let vertex_profiles: Vec<PrespectralProfile> = self
                .label
                .iter()
                .map(|&l| self.cache.profiles[l].clone())
                .collect();
            let mut choice = vec![0usize; ne];
            loop {
                self.out.push(BratteliNetwork {
                    profiles: vertex_profiles.clone(),
                    diagrams: (0..ne).map(|e| per_edge[e][choice[e]].clone()).collect(),
                });
                let mut j = ne;
                let mut done = ne == 0;
                while j > 0 {
                    j -= 1;
                    choice[j] += 1;
                    if choice[j] < per_edge[j].len() {
                        break;
                    }
                    choice[j] = 0;
                    if j == 0 {
                        done = true;
                    }
                }
                if done {
                    break;
                }
            }
            Ok(())
        }
    }

    let np = profiles.len();
    let mut search = Search {
        q,
        cache: HomCache { profiles, map: vec![None; np * np] },
        label: vec![0; q.vertex_count()],
        out: Vec::new(),
        nodes: 0,
        budget,
    };
    search.assign(0)?;
    Ok(search.out)
}

/// The representation-space profile of a network: one `U(n_{t(e),j})` factor
/// per edge and target summand.
pub fn rep_space_profile(q: &Quiver, net: &BratteliNetwork) -> Result<GroupProfile> {
    net.validate(q)?;
    let mut factors = Vec::new();
    for e in 0..q.edge_count() {
        factors.extend_from_slice(net.profiles[q.target(e)].n());
    }
    Ok(GroupProfile::from_factors(factors, 1))
}

/// The gauge-group profile of a network: per vertex `Sym(n_v, r_v) ⋉ U(n_v)`,
/// multiplied over vertices.
pub fn gauge_group_profile(q: &Quiver, net: &BratteliNetwork) -> Result<GroupProfile> {
    net.validate(q)?;
    let mut factors = Vec::new();
    let mut perm_order: u64 = 1;
    for v in 0..q.vertex_count() {
        factors.extend_from_slice(net.profiles[v].n());
        perm_order = perm_order
            .checked_mul(sym_order(&net.profiles[v]))
            .ok_or_else(|| Error::resource("permutation order overflow"))?;
    }
    Ok(GroupProfile::from_factors(factors, perm_order))
}

/// Upper bound `N^{2·#Q1} · ((N²)_N)^{#Q1}` on the real dimension of the
/// restricted representation space, with `(n)_m` the falling factorial.
/// The multiplicative formula degenerates below the additive per-edge
/// dimension `#Q1 · N²` at N = 1, so the bound is clamped from below by it.
pub fn rep_dimension_bound(q: &Quiver, n: usize) -> BigUint {
    let e = q.edge_count() as u32;
    let big_n = BigUint::from(n);
    let mut falling = BigUint::from(1u32);
    let n2 = n * n;
    for i in 0..n {
        falling *= BigUint::from(n2 - i);
    }
    let multiplicative = big_n.pow(2 * e) * falling.pow(e);
    multiplicative.max(BigUint::from(e as usize * n2))
}

/// The canonical unitary realization of a Bratteli morphism
/// `(C, u): (m, q) → (n, r)`.
#[derive(Clone, Debug)]
pub struct MorphismRealization {
    pub src: PrespectralProfile,
    pub dst: PrespectralProfile,
    pub diagram: BratteliDiagram,
    /// `perm[x]` = target Hilbert coordinate receiving source coordinate `x`.
    pub perm: Vec<usize>,
    /// `L = λ_t(u) · P_π`, a `dim H_t × dim H_s` unitary.
    pub l: CMat,
}

impl MorphismRealization {
    /// The permutation matrix `P_π` with `P e_x = e_{π(x)}`.
    pub fn p_pi(&self) -> CMat {
        let n = self.perm.len();
        let mut p = CMat::zeros(n, n);
        for (x, &px) in self.perm.iter().enumerate() {
            p[(px, x)] = C64::new(1.0, 0.0);
        }
        p
    }

    /// The algebra morphism `φ`: source summand blocks to target summand
    /// blocks, each target block the block-diagonal of its column's sources
    /// in nondecreasing matrix size.
    pub fn phi(&self, a: &[CMat]) -> Result<Vec<CMat>> {
        let (src, dst, c) = (&self.src, &self.dst, &self.diagram);
        if a.len() != src.len() {
            return Err(Error::validation("phi: wrong number of summand blocks"));
        }
        for (i, ai) in a.iter().enumerate() {
            if ai.nrows() != src.n()[i] || ai.ncols() != src.n()[i] {
                return Err(Error::validation("phi: block size mismatch"));
            }
        }
        let mut out = Vec::with_capacity(dst.len());
        for j in 0..dst.len() {
            let nj = dst.n()[j];
            let mut b = CMat::zeros(nj, nj);
            let mut off = 0;
            for i in 0..src.len() {
                for _ in 0..c.get(i, j) {
                    let mi = src.n()[i];
                    b.view_mut((off, off), (mi, mi)).copy_from(&a[i]);
                    off += mi;
                }
            }
            debug_assert_eq!(off, nj);
            out.push(b);
        }
        Ok(out)
    }

    /// `λ_s(a)`: each source block `a_i` repeated `q_i` times on `H_s`.
    pub fn lambda_src(&self, a: &[CMat]) -> Result<CMat> {
        lambda(&self.src, a)
    }

    /// `λ_t(b)`: each target block `b_j` repeated `r_j` times on `H_t`.
    pub fn lambda_dst(&self, b: &[CMat]) -> Result<CMat> {
        lambda(&self.dst, b)
    }
}

/// The multiplicity representation `λ` of `⊕_j M_{n_j}` on `⊕_j r_j·C^{n_j}`.
pub fn lambda(profile: &PrespectralProfile, blocks: &[CMat]) -> Result<CMat> {
    if blocks.len() != profile.len() {
        return Err(Error::validation("lambda: wrong number of blocks"));
    }
    let dim = profile.hilbert_dim();
    let mut m = CMat::zeros(dim, dim);
    let mut off = 0;
    for j in 0..profile.len() {
        let nj = profile.n()[j];
        if blocks[j].nrows() != nj || blocks[j].ncols() != nj {
            return Err(Error::validation("lambda: block size mismatch"));
        }
        for _ in 0..profile.r()[j] {
            m.view_mut((off, off), (nj, nj)).copy_from(&blocks[j]);
            off += nj;
        }
    }
    Ok(m)
}

/// Builds the canonical realization of the morphism witnessed by `diag`.
///
/// `u` is one unitary per target summand (sizes `dst.n`), lifted through
/// `λ_t`. The canonical permutation `π` matches source Hilbert coordinates
/// (summand-major, copies in order) to the block-refined target coordinates:
/// within each target block copy, the Bratteli column lays out source
/// summands in nondecreasing size, and each slot consumes the next unused
/// source copy of its summand.
pub fn realize_morphism(
    diag: &BratteliDiagram,
    src: &PrespectralProfile,
    dst: &PrespectralProfile,
    u: &[CMat],
) -> Result<MorphismRealization> {
    if !diag.is_compatible(src, dst) {
        return Err(Error::validation("diagram incompatible with the profiles"));
    }
    if u.len() != dst.len() {
        return Err(Error::validation("need one unitary per target summand"));
    }
    for (j, uj) in u.iter().enumerate() {
        if uj.nrows() != dst.n()[j] || uj.ncols() != dst.n()[j] {
            return Err(Error::validation("unitary block size mismatch"));
        }
    }
    let dim = src.hilbert_dim();
    debug_assert_eq!(dim, dst.hilbert_dim());

    // Source coordinate offsets per (summand, copy).
    let mut src_copy_offsets: Vec<Vec<usize>> = Vec::with_capacity(src.len());
    let mut off = 0;
    for i in 0..src.len() {
        let mut copies = Vec::with_capacity(src.r()[i]);
        for _ in 0..src.r()[i] {
            copies.push(off);
            off += src.n()[i];
        }
        src_copy_offsets.push(copies);
    }

    // Scan target slots in order, consuming source copies.
    let mut perm = vec![0usize; dim];
    let mut consumed = vec![0usize; src.len()];
    let mut t_off = 0;
    for j in 0..dst.len() {
        for _ in 0..dst.r()[j] {
            for i in 0..src.len() {
                for _ in 0..diag.get(i, j) {
                    let s_off = src_copy_offsets[i][consumed[i]];
                    consumed[i] += 1;
                    for x in 0..src.n()[i] {
                        perm[s_off + x] = t_off + x;
                    }
                    t_off += src.n()[i];
                }
            }
        }
    }
    debug_assert_eq!(t_off, dim);

    let mut real = MorphismRealization {
        src: src.clone(),
        dst: dst.clone(),
        diagram: diag.clone(),
        perm,
        l: CMat::zeros(0, 0),
    };
    let lam_u = real.lambda_dst(u)?;
    real.l = lam_u * real.p_pi();
    Ok(real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prof(n: &[usize], r: &[usize]) -> PrespectralProfile {
        PrespectralProfile::new(n.to_vec(), r.to_vec()).unwrap()
    }

    #[test]
    fn worked_hom_example() {
        let src = prof(&[1, 2, 3], &[2, 8, 3]);
        let dst = prof(&[3, 7], &[2, 3]);
        let diags = enumerate_bratteli(&src, &dst);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0], BratteliDiagram::from_rows(&[vec![1, 0], vec![1, 2], vec![0, 1]]).unwrap());
    }

    #[test]
    fn empty_hom_example() {
        let src = prof(&[11], &[1]);
        let dst = prof(&[5, 6], &[1, 1]);
        assert!(enumerate_bratteli(&src, &dst).is_empty());
    }

    #[test]
    fn endomorphisms_are_permutations() {
        let x = prof(&[2, 3], &[1, 1]);
        let diags = enumerate_bratteli(&x, &x);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_permutation());
        assert_eq!(diags[0], BratteliDiagram::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap());

        let y = prof(&[3, 3], &[1, 1]);
        let dy = enumerate_bratteli(&y, &y);
        assert_eq!(dy.len(), 2);
        assert!(dy.iter().all(BratteliDiagram::is_permutation));
    }

    #[test]
    fn automorphism_profile_example() {
        let x = prof(&[2, 2, 4, 4, 5, 5, 5, 5], &[1, 2, 2, 2, 1, 1, 1, 3]);
        let g = automorphism_profile(&x);
        // Sorted pairs: (2,1),(2,2),(4,2),(4,2),(5,1),(5,1),(5,1),(5,3)
        // -> 2! * 3! = 12
        assert_eq!(g.permutation_order, 12);
        assert_eq!(g.component_count, 12);
        assert_eq!(g.unitary_factors, vec![2, 2, 4, 4, 5, 5, 5, 5]);
        assert_eq!(g.real_dimension, 4 + 4 + 16 + 16 + 25 * 4);

        assert_eq!(automorphism_profile(&prof(&[7], &[1])).component_count, 1);
        assert_eq!(automorphism_profile(&prof(&[3, 3], &[1, 1])).component_count, 2);
    }

    #[test]
    fn profiles_for_small_n() {
        let p2 = enumerate_profiles(2);
        assert_eq!(
            p2,
            vec![prof(&[1], &[2]), prof(&[1, 1], &[1, 1]), prof(&[2], &[1])]
        );
        assert_eq!(enumerate_profiles(1), vec![prof(&[1], &[1])]);
        // N=3: {(1,1)x3}, {(1,1),(1,2)}, {(1,1),(2,1)}, {(1,3)}, {(3,1)}
        assert_eq!(enumerate_profiles(3).len(), 5);
    }

    #[test]
    fn networks_on_one_edge_quiver() {
        let q = Quiver::new(2, vec![(0, 1)]).unwrap();
        let nets = enumerate_networks(&q, 2, 100_000).unwrap();
        // brute force over all profile pairs and diagrams
        let profiles = enumerate_profiles(2);
        let mut expected = 0;
        for s in &profiles {
            for t in &profiles {
                expected += enumerate_bratteli(s, t).len();
            }
        }
        assert_eq!(nets.len(), expected);
        assert_eq!(nets.len(), 7);
        for net in &nets {
            net.validate(&q).unwrap();
        }
    }

    #[test]
    fn excluded_labeling_absent() {
        // single edge; N = 11: the labeling ((11),(1)) -> ((5,6),(1,1)) has
        // an empty hom-set, so no network carries it. The full profile
        // universe for N = 11 is too large to expand, so enumerate over the
        // relevant sub-universe.
        let q = Quiver::new(2, vec![(0, 1)]).unwrap();
        let bad_src = prof(&[11], &[1]);
        let bad_dst = prof(&[5, 6], &[1, 1]);
        assert!(enumerate_bratteli(&bad_src, &bad_dst).is_empty());
        let nets = enumerate_networks_over(
            &q,
            vec![bad_src.clone(), bad_dst.clone()],
            500_000,
        )
        .unwrap();
        assert!(nets
            .iter()
            .all(|n| !(n.profiles[0] == bad_src && n.profiles[1] == bad_dst)));
        // but the full-matrix labeling is present
        assert!(nets
            .iter()
            .any(|n| n.profiles[0] == bad_src && n.profiles[1] == bad_src));
    }

    #[test]
    fn torus_full_network() {
        // The full-matrix labeling ((N),(1)) everywhere with C=[1] is always a
        // valid torus network (the unique one containing a full matrix algebra).
        let q = Quiver::make_torus(&crate::quiver::LatticeSpec::new(2, 3)).unwrap();
        let nets = enumerate_networks(&q, 2, 2_000_000).unwrap();
        let full = prof(&[2], &[1]);
        let full_nets: Vec<_> = nets
            .iter()
            .filter(|n| n.profiles.iter().any(|p| *p == full))
            .collect();
        assert_eq!(full_nets.len(), 1);
        assert!(full_nets[0].profiles.iter().all(|p| *p == full));
        for d in &full_nets[0].diagrams {
            assert_eq!((d.rows(), d.cols(), d.get(0, 0)), (1, 1, 1));
        }
    }

    #[test]
    fn rep_space_profile_examples() {
        let q = Quiver::make_torus(&crate::quiver::LatticeSpec::new(2, 3)).unwrap();
        let full = prof(&[2], &[1]);
        let net = BratteliNetwork {
            profiles: vec![full; 9],
            diagrams: vec![BratteliDiagram::from_rows(&[vec![1]]).unwrap(); 18],
        };
        let g = rep_space_profile(&q, &net).unwrap();
        assert_eq!(g.real_dimension, 72);
        assert_eq!(g.unitary_factors.len(), 18);

        let empty = Quiver::new(1, vec![]).unwrap();
        let net1 = BratteliNetwork { profiles: vec![prof(&[3], &[1])], diagrams: vec![] };
        let g1 = rep_space_profile(&empty, &net1).unwrap();
        assert!(g1.unitary_factors.is_empty());
        assert_eq!(g1.real_dimension, 0);
        let gg = gauge_group_profile(&empty, &net1).unwrap();
        assert_eq!(gg.unitary_factors, vec![3]);
        assert_eq!(gg.permutation_order, 1);
    }

    #[test]
    fn dimension_bound_values() {
        let q1 = Quiver::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(rep_dimension_bound(&q1, 1), BigUint::from(1u32));
        assert_eq!(rep_dimension_bound(&q1, 2), BigUint::from(48u32));
        let q3 = Quiver::new(2, vec![(0, 1), (0, 1), (1, 0)]).unwrap();
        assert_eq!(rep_dimension_bound(&q3, 2), BigUint::from(110592u32));
    }

    #[test]
    fn permutation_example_15() {
        let src = prof(&[1, 2], &[3, 6]);
        let dst = prof(&[5], &[3]);
        let diag = BratteliDiagram::from_rows(&[vec![1], vec![2]]).unwrap();
        let u = vec![CMat::identity(5, 5)];
        let real = realize_morphism(&diag, &src, &dst, &u).unwrap();
        // pi = (2,6,4)(3,11,10,9,8,7,5) in 1-based cycle notation
        let mut pi: Vec<usize> = (0..15).collect();
        for cycle in [vec![2usize, 6, 4], vec![3, 11, 10, 9, 8, 7, 5]] {
            for w in 0..cycle.len() {
                pi[cycle[w] - 1] = cycle[(w + 1) % cycle.len()] - 1;
            }
        }
        assert_eq!(real.perm, pi);
        let p = real.p_pi();
        for x in 0..15 {
            for y in 0..15 {
                let expect = if y == pi[x] { 1.0 } else { 0.0 };
                assert_eq!(p[(y, x)].re, expect);
                assert_eq!(p[(y, x)].im, 0.0);
            }
        }
        // with u = id, L = P_pi
        assert_eq!(real.l, p);
    }

    #[test]
    fn realize_identity_trivial() {
        let x = prof(&[4], &[2]);
        let diag = BratteliDiagram::from_rows(&[vec![1]]).unwrap();
        let real = realize_morphism(&diag, &x, &x, &[CMat::identity(4, 4)]).unwrap();
        assert_eq!(real.l, CMat::identity(8, 8));
        let a = vec![CMat::identity(4, 4)];
        assert_eq!(real.phi(&a).unwrap()[0], a[0]);
    }

    #[test]
    fn compatibility_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let src = prof(&[1, 2, 3], &[2, 8, 3]);
        let dst = prof(&[3, 7], &[2, 3]);
        let diag = enumerate_bratteli(&src, &dst).pop().unwrap();
        let u: Vec<CMat> = dst.n().iter().map(|&nj| haar_unitary(nj, &mut rng)).collect();
        let real = realize_morphism(&diag, &src, &dst, &u).unwrap();
        for _ in 0..100 {
            let a: Vec<CMat> = src
                .n()
                .iter()
                .map(|&mi| crate::linalg::random_hermitian(mi, &mut rng))
                .collect();
            // L realizes Ad_u ∘ φ: L λ_s(a) L* = λ_t(u φ(a) u*)
            let conj: Vec<CMat> = real
                .phi(&a)
                .unwrap()
                .iter()
                .zip(&u)
                .map(|(b, uj)| uj * b * uj.adjoint())
                .collect();
            let lhs = real.lambda_dst(&conj).unwrap();
            let ls = real.lambda_src(&a).unwrap();
            let rhs = &real.l * ls * real.l.adjoint();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn hom_nonempty_implies_equal_dims() {
        // property over a small sweep of profiles
        let profiles: Vec<_> = (1..=4).flat_map(enumerate_profiles).collect();
        for s in &profiles {
            for t in &profiles {
                if !enumerate_bratteli(s, t).is_empty() {
                    assert_eq!(s.hilbert_dim(), t.hilbert_dim());
                }
            }
        }
    }
}
