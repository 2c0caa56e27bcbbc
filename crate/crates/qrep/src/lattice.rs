//! Closed-form lattice trace formulas, the D⁶ Weisz–Wohlert decomposition,
//! exact path-counting formulas, coordination sequences, and the discrete
//! plaquette-curvature expansion check.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dirac::{higgs_fields, trace_power_of, ActionPolynomial, SymWeights};
use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, random_hermitian, unitary_log, C64, CMat};
use crate::parallel;
use crate::quiver::{LatticeSpec, Quiver, VertexId};
use crate::repcat::{full_matrix_network, Representation};

// ---------------------------------------------------------------------------
// Exact counting
// ---------------------------------------------------------------------------

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Coordination sequence of the `Z^d` lattice: the number `h_d(k)` of points
/// at L¹-distance exactly `k`, i.e. the `k`-th coefficient of
/// `[(1+z)/(1−z)]^d`:  `h_d(k) = Σ_j C(d,j)·C(k−j+d−1, d−1)`.
pub fn coordination(d: usize, k: usize) -> Result<BigUint> {
    if d < 1 {
        return Err(Error::validation("coordination requires d >= 1"));
    }
    if k == 0 {
        return Ok(BigUint::one());
    }
    let (d, k) = (d as u64, k as u64);
    let mut acc = BigUint::zero();
    for j in 0..=d.min(k) {
        acc += binomial(d, j) * binomial(k - j + d - 1, d - 1);
    }
    Ok(acc)
}

/// Coefficients of `[(1+z)/(1−z)]^d` up to order `k`, by exact series
/// multiplication; independent oracle for `coordination`.
pub fn coordination_series(d: usize, k: usize) -> Vec<BigUint> {
    // (1−z)^{−d} has coefficients C(j+d−1, d−1); multiply by (1+z)^d.
    let inv: Vec<BigUint> = (0..=k as u64)
        .map(|j| binomial(j + d as u64 - 1, d as u64 - 1))
        .collect();
    (0..=k)
        .map(|j| {
            let mut acc = BigUint::zero();
            for i in 0..=j.min(d) {
                acc += binomial(d as u64, i as u64) * &inv[j - i];
            }
            acc
        })
        .collect()
}

/// The number `c_d(k)` of length-`k` loops at a fixed base vertex of the
/// augmented torus `(T^d_m)*` with `m > k`:
/// `c_d(k) = Σ_{μ: ordered d-tuples ≥ 0, Σμ = k/2} k!/∏(μ_j!)²`.
/// Odd `k` gives 0 (no loops of odd length when `m > k`).
pub fn loop_count_lattice(d: usize, k: usize) -> Result<BigUint> {
    if d < 1 {
        return Err(Error::validation("loop_count_lattice requires d >= 1"));
    }
    if k % 2 == 1 {
        return Ok(BigUint::zero());
    }
    let half = k / 2;
    let kfact = factorial(k as u64);
    let mut acc = BigUint::zero();
    let mut mu = vec![0usize; d];
    fn rec(
        mu: &mut Vec<usize>,
        pos: usize,
        left: usize,
        kfact: &BigUint,
        acc: &mut BigUint,
    ) {
        if pos + 1 == mu.len() {
            mu[pos] = left;
            let mut denom = BigUint::one();
            for &m in mu.iter() {
                let f = factorial(m as u64);
                denom *= &f * &f;
            }
            *acc += kfact / denom;
            return;
        }
        for v in 0..=left {
            mu[pos] = v;
            rec(mu, pos + 1, left - v, kfact, acc);
        }
    }
    rec(&mut mu, 0, half, &kfact, &mut acc);
    Ok(acc)
}

/// Graph families with closed-form closed-walk counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkKind {
    /// Complete graph `K_n`.
    Complete(usize),
    /// Complete graph with one self-loop per vertex.
    CompleteSelfLooped(usize),
    /// `G(n, λ, ν)`: `λ` self-loops per vertex, `ν` edges between each pair.
    Uniform { n: usize, lambda: i64, nu: i64 },
}

/// Exact number of closed length-`l` walks:
/// `t_{K_n}(l) = (n−1)^l + (n−1)(−1)^l`, `t_{K°_n}(l) = n^l`, and
/// `t_{G(n,λ,ν)}(l) = [(n−1)ν+λ]^l + (n−1)(λ−ν)^l`.
pub fn closed_walk_count(kind: &WalkKind, l: u32) -> Result<BigInt> {
    let pow = |b: i64, e: u32| BigInt::from(b).pow(e);
    match *kind {
        WalkKind::Complete(n) => {
            if n < 1 {
                return Err(Error::validation("K_n requires n >= 1"));
            }
            let n = n as i64;
            Ok(pow(n - 1, l) + (n - 1) * pow(-1, l))
        }
        WalkKind::CompleteSelfLooped(n) => {
            if n < 1 {
                return Err(Error::validation("K°_n requires n >= 1"));
            }
            Ok(pow(n as i64, l))
        }
        WalkKind::Uniform { n, lambda, nu } => {
            if n < 1 || lambda < 0 || nu < 0 {
                return Err(Error::validation("G(n,λ,ν) requires n >= 1 and λ,ν >= 0"));
            }
            let n = n as i64;
            Ok(pow((n - 1) * nu + lambda, l) + (n - 1) * pow(lambda - nu, l))
        }
    }
}

/// Upper bounds on the closed-walk count of a quiver's underlying graph:
/// `t ≤ n^l·ν^l` (self-looped completion) and
/// `t ≤ [(n−1)ν+λ]^l + (n−1)(λ−ν)^l` (uniform-graph domination).
#[derive(Clone, Debug)]
pub struct WalkBounds {
    pub n: usize,
    pub nu: i64,
    pub lambda: i64,
    pub self_looped_bound: BigInt,
    pub uniform_bound: BigInt,
}

pub fn closed_walk_bounds(q: &Quiver, l: u32) -> WalkBounds {
    let n = q.vertex_count();
    // Underlying-graph multiplicities: ν over unordered distinct pairs,
    // λ over vertices.
    let mut pair: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    let mut loops = vec![0i64; n];
    for &(s, t) in q.edges() {
        if s == t {
            loops[s] += 1;
        } else {
            *pair.entry((s.min(t), s.max(t))).or_insert(0) += 1;
        }
    }
    let nu = pair.values().copied().max().unwrap_or(0);
    let lambda = loops.iter().copied().max().unwrap_or(0);
    let pow = |b: i64, e: u32| BigInt::from(b).pow(e);
    WalkBounds {
        n,
        nu,
        lambda,
        self_looped_bound: pow(n as i64, l) * pow(nu, l),
        uniform_bound: pow((n as i64 - 1) * nu + lambda, l)
            + (n as i64 - 1) * pow(lambda - nu, l),
    }
}

/// Number of closed length-`l` walks on the quiver's underlying graph,
/// exactly, via integer adjacency-matrix powers (the oracle route for the
/// bounds above).
pub fn underlying_walk_count(q: &Quiver, l: u32) -> BigInt {
    let n = q.vertex_count();
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for &(s, t) in q.edges() {
        if s == t {
            adj[s][s] += 1;
        } else {
            adj[s][t] += 1;
            adj[t][s] += 1;
        }
    }
    int_matrix_power_trace(&adj, l)
}

pub(crate) fn int_matrix_power_trace(a: &[Vec<BigInt>], l: u32) -> BigInt {
    let n = a.len();
    if l == 0 {
        return BigInt::from(n);
    }
    let mut acc = a.to_vec();
    for _ in 1..l {
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if acc[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = &acc[i][k] * &a[k][j];
                    next[i][j] += prod;
                }
            }
        }
        acc = next;
    }
    (0..n).map(|i| acc[i][i].clone()).sum()
}

// ---------------------------------------------------------------------------
// Closed-form lattice traces
// ---------------------------------------------------------------------------

/// Term-by-term account of a closed-form lattice trace or action value.
#[derive(Clone, Debug)]
pub struct LatticeTraceReport {
    pub k: usize,
    pub constant_term: f64,
    pub plaquette_sum: f64,
    pub higgs_terms: BTreeMap<String, f64>,
    pub mixed_terms: f64,
    pub total: f64,
}

impl LatticeTraceReport {
    pub fn parts_sum(&self) -> f64 {
        self.constant_term
            + self.plaquette_sum
            + self.higgs_terms.values().sum::<f64>()
            + self.mixed_terms
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "constant_term": self.constant_term,
            "plaquette_sum": self.plaquette_sum,
            "higgs_terms": self.higgs_terms,
            "mixed_terms": self.mixed_terms,
            "total": self.total,
        })
    }
}

struct LatticeRep {
    d: usize,
    m: usize,
    a: f64,
    /// Hilbert dimension per vertex (constant on the connected torus).
    n: usize,
}

fn lattice_rep(rep: &Representation, min_m: usize) -> Result<LatticeRep> {
    let info = rep
        .quiver
        .lattice_info()
        .ok_or_else(|| Error::validation("closed forms require a lattice-generated quiver"))?;
    if info.augmented {
        return Err(Error::validation(
            "closed forms act on the unaugmented lattice representation",
        ));
    }
    let (d, m, a) = (info.spec.d, info.spec.m, info.spec.a);
    if d < 2 || m < min_m {
        return Err(Error::validation(format!(
            "closed form requires d >= 2 and m >= {min_m}, got d={d}, m={m}"
        )));
    }
    let n = rep.hilbert_dim(0);
    Ok(LatticeRep { d, m, a, n })
}

/// Re part of the sum of all plaquette Wilson loops, over all vertices, with
/// the given weights; deterministic reduction order (ascending vertex).
fn plaquette_wilson_sum(sw: &SymWeights) -> Result<f64> {
    let per_vertex: Vec<Result<f64>> = parallel::map_range(sw.quiver.vertex_count(), |v| {
        let mut acc = 0.0;
        for p in sw.quiver.plaquettes(v)? {
            acc += sw.wilson_loop(&p)?.re;
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for r in per_vertex {
        total += r?;
    }
    Ok(total)
}

/// `Σ_v Tr(φ_v^p)`.
fn higgs_power_sum(phis: &[CMat], p: usize) -> f64 {
    phis.iter().map(|phi| trace_power_of(phi, p)).sum()
}

/// `Σ_{lattice edges e} Tr(L_e* φ_{t(e)} L_e φ_{s(e)})` with unit-normalized
/// `L` (the kinetic Higgs hopping term).
fn mixed_hopping_sum(rep: &Representation, phis: &[CMat]) -> f64 {
    let q = &rep.quiver;
    let terms: Vec<f64> = parallel::map_range(q.edge_count(), |e| {
        if q.is_self_loop(e) {
            return 0.0;
        }
        let (s, t) = (q.source(e), q.target(e));
        (rep.l[e].adjoint() * &phis[t] * &rep.l[e] * &phis[s]).trace().re
    });
    terms.iter().sum()
}

/// Closed-form `Tr(D^k)` for `k ∈ {0, 2, 4}` on `T^d_m` or `O^d_m`
/// (`m ≥ 5`, `d ≥ 2`):
///
/// - `Tr(D⁰) = m^d N`;
/// - `Tr(D²) = 2d·m^d N/a² + Σ_v Tr(φ_v²)`;
/// - `Tr(D⁴) = (8d²−2d)·m^d N/a⁴ + Σ_{v,P} Tr hol(P)/a⁴ + Σ_v Tr(φ_v⁴)
///    + (8d/a²)·Σ_v Tr(φ_v²) + (4/a²)·Σ_e Tr(L_e* φ_t L_e φ_s)`.
pub fn lattice_trace_closed_form(rep: &Representation, k: usize) -> Result<LatticeTraceReport> {
    let lr = lattice_rep(rep, 5)?;
    if !matches!(k, 0 | 2 | 4) {
        return Err(Error::validation("closed-form traces cover k in {0, 2, 4}"));
    }
    if lr.m <= k {
        return Err(Error::validation("closed form requires m > k"));
    }
    let sites = (lr.m as f64).powi(lr.d as i32);
    let nd = lr.n as f64;
    let (d, a) = (lr.d as f64, lr.a);
    let has_loops = (0..rep.quiver.edge_count()).any(|e| rep.quiver.is_self_loop(e));
    let phis = if has_loops { higgs_fields(rep) } else { Vec::new() };

    let mut higgs_terms = BTreeMap::new();
    let (constant_term, plaquette_sum, mixed_terms) = match k {
        0 => (sites * nd, 0.0, 0.0),
        2 => {
            if has_loops {
                higgs_terms.insert("phi^2".to_string(), higgs_power_sum(&phis, 2));
            }
            (2.0 * d * sites * nd / (a * a), 0.0, 0.0)
        }
        _ => {
            let sw = SymWeights::from_representation(rep, true);
            let plaq = plaquette_wilson_sum(&sw)?;
            let mixed = if has_loops {
                higgs_terms.insert(
                    "phi^2".to_string(),
                    8.0 * d / (a * a) * higgs_power_sum(&phis, 2),
                );
                higgs_terms.insert("phi^4".to_string(), higgs_power_sum(&phis, 4));
                4.0 / (a * a) * mixed_hopping_sum(rep, &phis)
            } else {
                0.0
            };
            ((8.0 * d * d - 2.0 * d) * sites * nd / a.powi(4), plaq, mixed)
        }
    };

    let mut report = LatticeTraceReport {
        k,
        constant_term,
        plaquette_sum,
        higgs_terms,
        mixed_terms,
        total: 0.0,
    };
    report.total = report.parts_sum();
    Ok(report)
}

/// Closed-form spectral action `Tr f(aD)` on `O^d_m` (or `T^d_m`) at scale
/// `Λ = 1/a`, for even `f` of degree ≤ 4, grouped as:
///
/// `m^d N [f₀ + 2d f₂ + (8d²−2d) f₄]  +  f₄·Σ_{v,P} Tr hol(P)
///  + a²·(f₂ + 8d f₄)·Σ_v Tr(φ_v²) + 4a² f₄·Σ_e Tr(L* φ L φ)
///  + a⁴ f₄·Σ_v Tr(φ_v⁴)`,
///
/// with unit-normalized plaquette holonomies (the `1/a⁴` of the weights
/// cancels against `a⁴` from the scale).
pub fn spectral_action_closed_form(
    rep: &Representation,
    f: &ActionPolynomial,
) -> Result<LatticeTraceReport> {
    let lr = lattice_rep(rep, 5)?;
    let a = lr.a;
    if (f.lambda * a - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "closed-form action requires Λ = 1/a (Λ = {}, a = {a})",
            f.lambda
        )));
    }
    if f.degree() > 4 {
        return Err(Error::validation(
            "closed-form action covers deg f <= 4 (use the generic routes above)",
        ));
    }
    if f.coeff(1) != 0.0 || f.coeff(3) != 0.0 {
        return Err(Error::validation(
            "closed-form action covers even polynomials only",
        ));
    }
    let (f0, f2, f4) = (f.coeff(0), f.coeff(2), f.coeff(4));
    let sites = (lr.m as f64).powi(lr.d as i32);
    let d = lr.d as f64;
    let has_loops = (0..rep.quiver.edge_count()).any(|e| rep.quiver.is_self_loop(e));

    let constant_term = sites * lr.n as f64 * (f0 + 2.0 * d * f2 + (8.0 * d * d - 2.0 * d) * f4);
    let plaquette_sum = if f4 != 0.0 {
        let sw_unit = SymWeights::from_representation(rep, false);
        f4 * plaquette_wilson_sum(&sw_unit)?
    } else {
        0.0
    };

    let mut higgs_terms = BTreeMap::new();
    let mut mixed_terms = 0.0;
    if has_loops {
        let phis = higgs_fields(rep);
        higgs_terms.insert(
            "phi^2".to_string(),
            a * a * (f2 + 8.0 * d * f4) * higgs_power_sum(&phis, 2),
        );
        higgs_terms.insert(
            "phi^4".to_string(),
            a.powi(4) * f4 * higgs_power_sum(&phis, 4),
        );
        mixed_terms = 4.0 * a * a * f4 * mixed_hopping_sum(rep, &phis);
    }

    let mut report = LatticeTraceReport {
        k: f.degree(),
        constant_term,
        plaquette_sum,
        higgs_terms,
        mixed_terms,
        total: 0.0,
    };
    report.total = report.parts_sum();
    Ok(report)
}

// ---------------------------------------------------------------------------
// D⁶ Weisz–Wohlert decomposition
// ---------------------------------------------------------------------------

/// The θ coefficients at dimension `d`:
/// `(θ₀, θ_□, θ_rect_h, θ_rect_v, θ_door, θ_hex)`.
pub fn d6_thetas(d: usize) -> (u64, u64, u64, u64, u64, u64) {
    let du = d as u64;
    (
        4 * (10 * du * du * du - 11 * du * du + 6 * du),
        12 * du,
        1,
        1,
        3,
        1,
    )
}

#[derive(Clone, Debug)]
pub struct D6Decomposition {
    pub d: usize,
    pub theta0: u64,
    pub theta_square: u64,
    pub theta_rect_h: u64,
    pub theta_rect_v: u64,
    pub theta_door: u64,
    pub theta_hex: u64,
    /// θ-weighted per-class holonomy sums; their total reconstructs `Tr(D⁶)`.
    pub class_sums: BTreeMap<String, f64>,
    pub total: f64,
}

impl D6Decomposition {
    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "theta": {
                "trivial": self.theta0,
                "square": self.theta_square,
                "rect_h": self.theta_rect_h,
                "rect_v": self.theta_rect_v,
                "door": self.theta_door,
                "hex": self.theta_hex,
            },
            "class_sums": self.class_sums,
            "total": self.total,
        })
    }
}

/// Path classes of length-6 loops, by cyclically reduced step word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class6 {
    /// Word reduces to the identity: holonomy is `1` for every `L`.
    Trivial,
    /// Word reduces (cyclically) to a plaquette: backtrack insertions
    /// (Type V) and conjugated plaquettes (Type IV).
    Square,
    /// Rectangle word; root step runs along the doubled axis (Type I).
    RectH,
    /// Rectangle word; root step runs along the single axis (Type I).
    RectV,
    /// Three-axis `door` word (Types II_a, II_b).
    Door,
    /// Three-axis `hex` word with antipodal inverse steps (Type III).
    Hex,
}

/// Classify a closed length-6 step sequence `(axis, sign)` by free-group
/// reduction of its link word. Adjacent inverse steps traverse the same
/// lattice link, so axis-level reduction equals site-labeled reduction;
/// cyclic reduction matches trace cyclicity. Returns `None` when the
/// displacement is nonzero (no loop on `T^d_m`, `m > 6`).
fn classify6(steps: &[(usize, i8)], d: usize) -> Option<Class6> {
    let mut pos = vec![0i64; d];
    let mut stack: Vec<(usize, i8)> = Vec::with_capacity(6);
    for &(ax, sign) in steps {
        pos[ax] += sign as i64;
        match stack.last() {
            Some(&(tax, ts)) if tax == ax && ts == -sign => {
                stack.pop();
            }
            _ => stack.push((ax, sign)),
        }
    }
    if pos.iter().any(|&x| x != 0) {
        return None;
    }
    // cyclic reduction: the first and last steps share a link when inverse
    let mut lo = 0usize;
    let mut hi = stack.len();
    while hi - lo >= 2 {
        let (fa, fs) = stack[lo];
        let (la, ls) = stack[hi - 1];
        if fa == la && fs == -ls {
            lo += 1;
            hi -= 1;
        } else {
            break;
        }
    }
    let word = &stack[lo..hi];
    Some(match word.len() {
        0 => Class6::Trivial,
        4 => Class6::Square,
        6 => {
            let mut axes: Vec<usize> = word.iter().map(|&(ax, _)| ax).collect();
            axes.sort_unstable();
            axes.dedup();
            if axes.len() == 2 {
                // doubled axis = the one used four times
                let doubled = if word.iter().filter(|&&(ax, _)| ax == word[0].0).count() == 4 {
                    word[0].0
                } else {
                    *axes.iter().find(|&&ax| ax != word[0].0).unwrap()
                };
                if steps[0].0 == doubled {
                    Class6::RectH
                } else {
                    Class6::RectV
                }
            } else if (0..3).all(|k| word[k].0 == word[k + 3].0 && word[k].1 == -word[k + 3].1) {
                Class6::Hex
            } else {
                Class6::Door
            }
        }
        _ => unreachable!("reduced closed 6-words have length 0, 4 or 6"),
    })
}

/// All zero-displacement length-6 step sequences in dimension `d`, with
/// their class: `c_6(d)` entries.
fn closed6_steps(d: usize) -> Vec<(Vec<(usize, i8)>, Class6)> {
    let signed: Vec<(usize, i8)> = (0..d).flat_map(|ax| [(ax, 1i8), (ax, -1)]).collect();
    let mut out = Vec::new();
    let mut seq = [0usize; 6];
    loop {
        let steps: Vec<(usize, i8)> = seq.iter().map(|&si| signed[si]).collect();
        if let Some(class) = classify6(&steps, d) {
            out.push((steps, class));
        }
        let mut carry = true;
        for slot in seq.iter_mut() {
            if carry {
                *slot += 1;
                if *slot == signed.len() {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    out
}

/// Weisz–Wohlert decomposition of `Tr(D⁶)` on `(T^d_m)*`, `d ≥ 3`, `m > 6`:
/// every length-6 loop is classified by its cyclically reduced link word
/// (trivial / square / rect_h / rect_v / door / hex) and contributes the
/// real part of its unit-weighted Wilson trace to its class sum; the `1/ρ⁶`
/// normalization scales the sums, so `total` reconstructs `Tr(D⁶)` exactly.
///
/// Per-vertex class counts are `trivial = 40d³−24d²+4d` (fully backtracking
/// walks), `square = (12d−6)·4d(d−1)`, `rect = 12d(d−1)`,
/// `door = 24d(d−1)(d−2)`, `hex = 8d(d−1)(d−2)`. The θ coefficients report
/// the per-vertex multiplicities after reassigning shifted and conjugated
/// holonomies to their base vertex by trace cyclicity, which trades
/// `40·C(d,2)` trivial terms per vertex for repeated plaquette bookings:
/// `θ₀ + (θ_rect_h+θ_rect_v+θ_□)·4d(d−1) + (θ_door+θ_hex)·8d(d−1)(d−2)
///  = c_6(d)`.
pub fn d6_decomposition(rep: &Representation) -> Result<D6Decomposition> {
    let lr = lattice_rep(rep, 7)?;
    let (d, m) = (lr.d, lr.m);
    if d < 3 || m <= 6 {
        return Err(Error::validation(format!(
            "d6_decomposition requires d >= 3 and m > 6, got d={d}, m={m}"
        )));
    }
    if (0..rep.quiver.edge_count()).any(|e| rep.quiver.is_self_loop(e)) {
        return Err(Error::validation("d6_decomposition acts on the plain torus"));
    }
    let (theta0, theta_sq, theta_rh, theta_rv, theta_door, theta_hex) = d6_thetas(d);
    let sw = SymWeights::from_representation(rep, false);
    let aug = &sw.quiver;
    let scale = lr.a.powi(-6);
    let closed = closed6_steps(d);

    // Per-vertex sums: [trivial, square, rect_h, rect_v, door, hex].
    let per_vertex: Vec<Result<[f64; 6]>> = parallel::map_range(aug.vertex_count(), |v| {
        let mut acc = [0.0f64; 6];
        for (steps, class) in &closed {
            let idx = *class as usize;
            if *class == Class6::Trivial {
                acc[idx] += lr.n as f64;
            } else {
                acc[idx] += sw.wilson_loop(&aug.step_path(v, steps)?)?.re;
            }
        }
        Ok(acc)
    });
    let mut sums = [0.0f64; 6];
    for r in per_vertex {
        let a = r?;
        for (s, x) in sums.iter_mut().zip(a) {
            *s += x;
        }
    }

    let mut class_sums = BTreeMap::new();
    for (name, s) in ["trivial", "square", "rect_h", "rect_v", "door", "hex"]
        .iter()
        .zip(sums)
    {
        class_sums.insert(name.to_string(), s * scale);
    }
    let total = class_sums.values().sum();

    Ok(D6Decomposition {
        d,
        theta0,
        theta_square: theta_sq,
        theta_rect_h: theta_rh,
        theta_rect_v: theta_rv,
        theta_door,
        theta_hex,
        class_sums,
        total,
    })
}

/// Per-vertex census of length-6 loops on `(T^d_m)*`, `m > 6`, by word class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct D6Census {
    pub total: u64,
    pub trivial: u64,
    pub square: u64,
    pub rect_h: u64,
    pub rect_v: u64,
    pub door: u64,
    pub hex: u64,
}

impl D6Census {
    pub fn parts_sum(&self) -> u64 {
        self.trivial + self.square + self.rect_h + self.rect_v + self.door + self.hex
    }
}

/// Count length-6 loops at one vertex by class; `total` equals `c_6(d)`.
pub fn d6_census(d: usize) -> D6Census {
    let mut c = D6Census {
        total: 0,
        trivial: 0,
        square: 0,
        rect_h: 0,
        rect_v: 0,
        door: 0,
        hex: 0,
    };
    for (_, class) in closed6_steps(d) {
        c.total += 1;
        match class {
            Class6::Trivial => c.trivial += 1,
            Class6::Square => c.square += 1,
            Class6::RectH => c.rect_h += 1,
            Class6::RectV => c.rect_v += 1,
            Class6::Door => c.door += 1,
            Class6::Hex => c.hex += 1,
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Plaquette curvature check
// ---------------------------------------------------------------------------

/// A gauge field on `T^d_m`: one Hermitian `n×n` matrix per (vertex, axis),
/// indexed `v*d + axis`.
#[derive(Clone, Debug)]
pub struct GaugeField {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub a: Vec<CMat>,
}

impl GaugeField {
    /// Smooth trigonometric field: per axis `j`,
    /// `A_j(v) = amp·(H_j + Σ_i [C_{ji} cos θ_i + S_{ji} sin θ_i])` with
    /// `θ_i = 2π·cycles·x_i/m`. The Hermitian amplitudes depend only on the
    /// seed, so the same physical field can be resampled at different
    /// lattice frequencies (`cycles ∝ a` keeps the physical wavelength
    /// fixed over a spacing scan).
    pub fn smooth_trig(
        d: usize,
        m: usize,
        n: usize,
        cycles: usize,
        amplitude: f64,
        seed: u64,
    ) -> Result<GaugeField> {
        if d < 1 || m < 2 || n < 1 {
            return Err(Error::validation("smooth_trig requires d,n >= 1 and m >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h: Vec<CMat> = (0..d).map(|_| random_hermitian(n, &mut rng)).collect();
        let c: Vec<Vec<CMat>> = (0..d)
            .map(|_| (0..d).map(|_| random_hermitian(n, &mut rng)).collect())
            .collect();
        let s: Vec<Vec<CMat>> = (0..d)
            .map(|_| (0..d).map(|_| random_hermitian(n, &mut rng)).collect())
            .collect();
        let q = Quiver::make_torus(&LatticeSpec::new(d, m))?;
        let mut a = Vec::with_capacity(q.vertex_count() * d);
        for v in 0..q.vertex_count() {
            let coords = q.lattice_coords(v)?;
            for j in 0..d {
                let mut aj = h[j].clone();
                for i in 0..d {
                    let th = std::f64::consts::TAU * cycles as f64 * coords[i] as f64 / m as f64;
                    aj += &c[j][i] * C64::from(th.cos()) + &s[j][i] * C64::from(th.sin());
                }
                a.push(aj * C64::from(amplitude));
            }
        }
        Ok(GaugeField { d, m, n, a })
    }

    /// Constant field: the same Hermitian matrix on every link of axis `j`.
    pub fn constant(d: usize, m: usize, per_axis: Vec<CMat>) -> Result<GaugeField> {
        if per_axis.len() != d || per_axis.is_empty() {
            return Err(Error::validation("one matrix per axis required"));
        }
        let n = per_axis[0].nrows();
        let sites = m.pow(d as u32);
        let mut a = Vec::with_capacity(sites * d);
        for _ in 0..sites {
            for j in 0..d {
                a.push(per_axis[j].clone());
            }
        }
        Ok(GaugeField { d, m, n, a })
    }
}

/// The representation `L_j(v) = exp(i a A_j(v))` of `T^d_m` with spacing `a`
/// and the full matrix network of size `n`.
pub fn gauge_field_representation(field: &GaugeField, a: f64) -> Result<Representation> {
    let q = Quiver::make_torus(&LatticeSpec::new(field.d, field.m).with_spacing(a))?;
    let net = full_matrix_network(&q, field.n)?;
    let l: Vec<CMat> = parallel::map_range(q.edge_count(), |e| {
        exp_i_hermitian(&field.a[e], a)
    });
    let rep = Representation { quiver: q, network: net, l };
    rep.validate()?;
    Ok(rep)
}

/// Maximum over plaquettes of `‖log hol(P_ij) − i a² F_ij‖` with
/// `F_ij = Δ_iA_j − Δ_jA_i + i[A_i, A_j]` and forward differences
/// `Δ_iA_j(v) = (A_j(v+e_i) − A_j(v))/a`; the residual is `O(a³)` for
/// smooth fields. Log branch failures (holonomy eigenvalue at −1) are
/// reported with the offending plaquette.
pub fn plaquette_curvature_check(field: &GaugeField, a: f64) -> Result<f64> {
    let q = Quiver::make_torus(&LatticeSpec::new(field.d, field.m).with_spacing(a))?;
    let d = field.d;
    let aj = |v: VertexId, j: usize| &field.a[v * d + j];
    let link = |v: VertexId, j: usize| exp_i_hermitian(aj(v, j), a);
    let residuals: Vec<Result<f64>> = parallel::map_range(q.vertex_count(), |v| {
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let vi = q.lattice_neighbor(v, i, 1)?;
                let vj = q.lattice_neighbor(v, j, 1)?;
                let hol = link(v, i) * link(vi, j) * link(vj, i).adjoint() * link(v, j).adjoint();
                let log = unitary_log(&hol, 1e-6).map_err(|err| {
                    Error::numerical(format!("plaquette (v={v}, axes {i},{j}): {err}"))
                })?;
                let di_aj = (aj(vi, j) - aj(v, j)) / C64::from(a);
                let dj_ai = (aj(vj, i) - aj(v, i)) / C64::from(a);
                let comm = aj(v, i) * aj(v, j) - aj(v, j) * aj(v, i);
                let f = di_aj - dj_ai + comm * C64::new(0.0, 1.0);
                let res = (log - f * C64::new(0.0, a * a)).norm();
                worst = worst.max(res);
            }
        }
        Ok(worst)
    });
    let mut max = 0.0f64;
    for r in residuals {
        max = max.max(r?);
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{dirac, trace_power_matrix};
    use crate::repcat::{random_full_representation, unit_representation};

    #[test]
    fn coordination_examples() {
        let h3: Vec<u64> = (0..8)
            .map(|k| u64::try_from(coordination(3, k).unwrap()).unwrap())
            .collect();
        assert_eq!(h3, vec![1, 6, 18, 38, 66, 102, 146, 198]);
        for k in 1..10 {
            assert_eq!(coordination(1, k).unwrap(), BigUint::from(2u32));
        }
        for d in 1..6 {
            assert_eq!(coordination(d, 0).unwrap(), BigUint::one());
        }
    }

    #[test]
    fn coordination_matches_generating_function() {
        for d in 1..=4 {
            let series = coordination_series(d, 10);
            for (k, coeff) in series.iter().enumerate() {
                assert_eq!(&coordination(d, k).unwrap(), coeff, "d={d}, k={k}");
            }
        }
    }

    #[test]
    fn coordination_matches_bfs_spheres() {
        // BFS over the underlying graph of T^d_m with m > 2k: sphere sizes
        // at distance k equal h_d(k).
        for (d, m, kmax) in [(2usize, 12usize, 5usize), (3, 10, 4)] {
            let q = Quiver::make_torus(&LatticeSpec::new(d, m)).unwrap().augment();
            let mut dist = vec![usize::MAX; q.vertex_count()];
            dist[0] = 0;
            let mut frontier = vec![0usize];
            let mut spheres = vec![1u64];
            while spheres.len() <= kmax {
                let mut next = Vec::new();
                for &v in &frontier {
                    for &e in q.out_edges(v) {
                        let w = q.target(e);
                        if dist[w] == usize::MAX {
                            dist[w] = spheres.len();
                            next.push(w);
                        }
                    }
                }
                spheres.push(next.len() as u64);
                frontier = next;
            }
            for (k, &count) in spheres.iter().enumerate() {
                assert_eq!(
                    coordination(d, k).unwrap(),
                    BigUint::from(count),
                    "d={d}, k={k}"
                );
            }
        }
    }

    #[test]
    fn loop_count_examples() {
        for k in (0..10).step_by(2) {
            assert_eq!(
                loop_count_lattice(1, k).unwrap(),
                binomial(k as u64, k as u64 / 2)
            );
        }
        assert_eq!(loop_count_lattice(2, 4).unwrap(), BigUint::from(36u32));
        for d in 1..=5i64 {
            assert_eq!(
                loop_count_lattice(d as usize, 6).unwrap(),
                BigUint::from((120 * d * d * d - 180 * d * d + 80 * d) as u64)
            );
        }
        assert_eq!(loop_count_lattice(3, 5).unwrap(), BigUint::zero());
    }

    #[test]
    fn loop_count_matches_enumeration() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap().augment();
        let loops = q.enumerate_loops(4, Some(0), 12).unwrap();
        assert_eq!(BigUint::from(loops.len()), loop_count_lattice(2, 4).unwrap());
    }

    #[test]
    fn walk_count_sequences() {
        let k3: Vec<i64> = (1..=9)
            .map(|l| i64::try_from(closed_walk_count(&WalkKind::Complete(3), l).unwrap()).unwrap())
            .collect();
        assert_eq!(k3, vec![0, 6, 6, 18, 30, 66, 126, 258, 510]);
        let k4: Vec<i64> = (1..=8)
            .map(|l| i64::try_from(closed_walk_count(&WalkKind::Complete(4), l).unwrap()).unwrap())
            .collect();
        assert_eq!(k4, vec![0, 12, 24, 84, 240, 732, 2184, 6564]);
        for l in 1..=10 {
            assert_eq!(
                closed_walk_count(&WalkKind::CompleteSelfLooped(5), l).unwrap(),
                BigInt::from(5).pow(l)
            );
        }
    }

    #[test]
    fn walk_counts_match_adjacency_traces() {
        for n in 2..=6usize {
            for l in 0..=10u32 {
                // K_n
                let mut a = vec![vec![BigInt::one(); n]; n];
                for i in 0..n {
                    a[i][i] = BigInt::zero();
                }
                assert_eq!(
                    closed_walk_count(&WalkKind::Complete(n), l).unwrap(),
                    int_matrix_power_trace(&a, l)
                );
                // G(n, 2, 3)
                let mut g = vec![vec![BigInt::from(3); n]; n];
                for i in 0..n {
                    g[i][i] = BigInt::from(2);
                }
                assert_eq!(
                    closed_walk_count(&WalkKind::Uniform { n, lambda: 2, nu: 3 }, l).unwrap(),
                    int_matrix_power_trace(&g, l)
                );
            }
        }
    }

    #[test]
    fn walk_bounds_dominate_exact_counts() {
        let quivers = vec![
            Quiver::make_torus(&LatticeSpec::new(2, 3)).unwrap(),
            Quiver::new(2, vec![(0, 1), (0, 1), (1, 0), (0, 0)]).unwrap(),
            Quiver::new(3, vec![(0, 1), (1, 2), (2, 0), (1, 1), (1, 1)]).unwrap(),
        ];
        for q in &quivers {
            for l in 1..=6u32 {
                let exact = underlying_walk_count(q, l);
                let b = closed_walk_bounds(q, l);
                assert!(exact <= b.uniform_bound, "l={l}: {exact} vs {}", b.uniform_bound);
            }
        }
        // the self-looped bound dominates the self-loop-completed graph
        let q = Quiver::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let qo = q.add_self_loops();
        for l in 1..=6u32 {
            let b = closed_walk_bounds(&q, l);
            assert!(underlying_walk_count(&qo, l) <= b.self_looped_bound);
        }
    }

    #[test]
    fn closed_form_torus_examples() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap();
        let rep = random_full_representation(&q, 2, 50).unwrap();
        let r2 = lattice_trace_closed_form(&rep, 2).unwrap();
        assert_eq!(r2.constant_term, 200.0);
        assert_eq!(r2.total, 200.0);
        assert!(r2.higgs_terms.is_empty());

        // unit weights, k = 4: constant (8·4−4)·25·N, plaquette 8·25·N
        let unit = unit_representation(&q, &full_matrix_network(&q, 1).unwrap()).unwrap();
        let r4 = lattice_trace_closed_form(&unit, 4).unwrap();
        assert!((r4.constant_term - 700.0).abs() < 1e-9);
        assert!((r4.plaquette_sum - 200.0).abs() < 1e-9);
        assert!((r4.total - 900.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_dense_on_o25() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5).with_self_loops()).unwrap();
        let rep = random_full_representation(&q, 2, 51).unwrap();
        let d = dirac(&rep).unwrap();
        for k in [0usize, 2, 4] {
            let report = lattice_trace_closed_form(&rep, k).unwrap();
            let dense = trace_power_matrix(&d, k);
            assert!(
                (report.total - dense).abs() <= 1e-8 * (1.0 + dense.abs()),
                "k={k}: {} vs {dense}",
                report.total
            );
        }
    }

    #[test]
    fn closed_form_action_matches_dense() {
        let a = 0.5;
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5).with_self_loops().with_spacing(a))
            .unwrap();
        let rep = random_full_representation(&q, 2, 52).unwrap();
        let f = ActionPolynomial::new(vec![0.3, 0.0, 1.1, 0.0, 0.7], 1.0 / a).unwrap();
        let report = spectral_action_closed_form(&rep, &f).unwrap();
        let dense = crate::dirac::spectral_action(&rep, &f).unwrap();
        assert!(
            (report.total - dense).abs() <= 1e-8 * (1.0 + dense.abs()),
            "{} vs {dense}",
            report.total
        );

        // f = f0 alone
        let f0 = ActionPolynomial::new(vec![2.5], 1.0 / a).unwrap();
        let r0 = spectral_action_closed_form(&rep, &f0).unwrap();
        assert!((r0.total - 2.5 * 50.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_rejects_bad_hypotheses() {
        let small = Quiver::make_torus(&LatticeSpec::new(2, 3)).unwrap();
        let rep = random_full_representation(&small, 1, 3).unwrap();
        assert!(lattice_trace_closed_form(&rep, 2).is_err());
        let line = Quiver::make_torus(&LatticeSpec::new(1, 7)).unwrap();
        let rep1 = random_full_representation(&line, 1, 3).unwrap();
        assert!(lattice_trace_closed_form(&rep1, 2).is_err());
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap();
        let rep2 = random_full_representation(&q, 1, 3).unwrap();
        assert!(lattice_trace_closed_form(&rep2, 6).is_err());
    }

    #[test]
    fn d6_theta_values() {
        let (t0, sq, rh, rv, door, hex) = d6_thetas(3);
        assert_eq!((t0, sq, rh, rv, door, hex), (756, 36, 1, 1, 3, 1));
        assert_eq!(d6_thetas(4).0, 1952);
        assert_eq!(d6_thetas(4).1, 48);
    }

    #[test]
    fn d6_census_small() {
        // closed forms per class: trivial = fully backtracking walks on the
        // 2d-regular tree, square = (12d-6)·4d(d-1), rect = 12d(d-1),
        // door = 24d(d-1)(d-2), hex = 8d(d-1)(d-2); total = c_6(d).
        for d in 1..=4u64 {
            let c = d6_census(d as usize);
            assert_eq!(BigUint::from(c.total), loop_count_lattice(d as usize, 6).unwrap());
            assert_eq!(c.total, c.parts_sum());
            assert_eq!(c.trivial, 40 * d * d * d - 24 * d * d + 4 * d);
            assert_eq!(c.square, (12 * d - 6) * 4 * d * (d - 1));
            assert_eq!(c.rect_h + c.rect_v, 12 * d * (d - 1));
            assert_eq!(c.door, 24 * d * (d - 1) * (d.saturating_sub(2)));
            assert_eq!(c.hex, 8 * d * (d - 1) * (d.saturating_sub(2)));
        }
        assert_eq!(d6_census(3).trivial, 876);
    }

    #[test]
    fn d6_theta_accounting() {
        // proof's accounting: θ₀ = c_6(d) − (θ_rh+θ_rv+θ_□)·4d(d−1)
        //                              − (θ_door+θ_hex)·8d(d−1)(d−2)
        for d in 3..=6u64 {
            let (t0, sq, rh, rv, door, hex) = d6_thetas(d as usize);
            let booked = (rh + rv + sq) * 4 * d * (d - 1) + (door + hex) * 8 * d * (d - 1) * (d - 2);
            assert_eq!(
                BigUint::from(t0 + booked),
                loop_count_lattice(d as usize, 6).unwrap()
            );
        }
    }

    #[test]
    fn d6_unit_weights_total() {
        let q = Quiver::make_torus(&LatticeSpec::new(3, 7)).unwrap();
        let unit = unit_representation(&q, &full_matrix_network(&q, 1).unwrap()).unwrap();
        let dec = d6_decomposition(&unit).unwrap();
        let expect = 1860.0 * 343.0;
        assert!((dec.total - expect).abs() < 1e-6 * expect);
        assert_eq!(dec.total.round() as i64, 1860 * 343);
    }

    #[test]
    fn d6_matches_dense_trace() {
        let q = Quiver::make_torus(&LatticeSpec::new(3, 7)).unwrap();
        let rep = random_full_representation(&q, 1, 60).unwrap();
        let dec = d6_decomposition(&rep).unwrap();
        let dense = trace_power_matrix(&dirac(&rep).unwrap(), 6);
        assert!(
            (dec.total - dense).abs() <= 1e-7 * (1.0 + dense.abs()),
            "{} vs {dense}",
            dec.total
        );
    }

    #[test]
    fn curvature_abelian_is_roundoff() {
        let field = GaugeField::smooth_trig(2, 8, 1, 1, 0.3, 7).unwrap();
        let res = plaquette_curvature_check(&field, 0.1).unwrap();
        assert!(res < 1e-12, "abelian residual {res}");
    }

    #[test]
    fn curvature_order_at_least_cubic() {
        // fixed physical wavelength: cycles scale with a
        let res_coarse = plaquette_curvature_check(
            &GaugeField::smooth_trig(2, 16, 2, 4, 0.15, 9).unwrap(),
            0.2,
        )
        .unwrap();
        let res_fine = plaquette_curvature_check(
            &GaugeField::smooth_trig(2, 16, 2, 2, 0.15, 9).unwrap(),
            0.1,
        )
        .unwrap();
        assert!(
            res_coarse / res_fine >= 6.0,
            "ratio {} ({res_coarse} / {res_fine})",
            res_coarse / res_fine
        );
    }

    #[test]
    fn gauge_field_representation_is_valid() {
        let field = GaugeField::smooth_trig(2, 4, 2, 1, 0.4, 11).unwrap();
        let rep = gauge_field_representation(&field, 0.3).unwrap();
        assert_eq!(rep.l.len(), 32);
    }
}
