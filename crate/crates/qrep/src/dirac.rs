//! Weight matrices, holonomy and Wilson loops, the Dirac operator
//! `D_Q(L, ρ)`, and dual-route trace / spectral-action evaluation.
//!
//! Holonomy order: for a stored path `[e_1, ..., e_k]` (traversal order) the
//! holonomy is the operator composition `b_{e_k}·…·b_{e_2}·b_{e_1}` — the
//! first edge acts first, so it is the rightmost matrix factor. This is the
//! one fixed order used everywhere; it makes the Wilson-loop sum equal the
//! dense `Tr(D^k)` loop by loop.

use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};
use crate::parallel;
use crate::quiver::{EdgeId, Path, Quiver, VertexId};
use crate::repcat::Representation;

/// Edge weights: one complex matrix per edge, shape
/// `dim H_{t(e)} × dim H_{s(e)}`.
#[derive(Clone, Debug)]
pub struct WeightAssignment {
    pub b: Vec<CMat>,
}

/// The Dirac operator (or any symmetrized weight matrix) as a dense block
/// matrix over `⊕_v H_v`.
#[derive(Clone, Debug)]
pub struct DiracOperator {
    pub matrix: CMat,
    pub dims: Vec<usize>,
    pub offsets: Vec<usize>,
}

impl DiracOperator {
    pub fn total_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hermiticity residual `‖D − D*‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// Assembles the weight matrix `𝒜_Q(b)` (or `𝒜_Q^sym(b)`).
///
/// Blocks follow the operator convention for column vectors: block
/// `(t(e), s(e))` accumulates `b_e`; symmetrization adds `b_e*` to block
/// `(s(e), t(e))` (self-loops accumulate `b + b*` on the diagonal). The
/// symmetrized matrix is self-adjoint; traces agree with the transposed
/// index convention.
pub fn weight_matrix(
    q: &Quiver,
    dims: &[usize],
    w: &WeightAssignment,
    symmetrize: bool,
) -> Result<DiracOperator> {
    if dims.len() != q.vertex_count() || w.b.len() != q.edge_count() {
        return Err(Error::validation("weight assignment shape mismatch"));
    }
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for &d in dims {
        offsets.push(total);
        total += d;
    }
    let mut m = CMat::zeros(total, total);
    for e in 0..q.edge_count() {
        let (s, t) = (q.source(e), q.target(e));
        let be = &w.b[e];
        if be.nrows() != dims[t] || be.ncols() != dims[s] {
            return Err(Error::validation(format!("weight b_{e} has wrong shape")));
        }
        {
            let mut block = m.view_mut((offsets[t], offsets[s]), (dims[t], dims[s]));
            block += be;
        }
        if symmetrize {
            let adj = be.adjoint();
            let mut block = m.view_mut((offsets[s], offsets[t]), (dims[s], dims[t]));
            block += &adj;
        }
    }
    Ok(DiracOperator { matrix: m, dims: dims.to_vec(), offsets })
}

/// Per-vertex Hilbert dimensions of a representation.
pub fn vertex_dims(rep: &Representation) -> Vec<usize> {
    (0..rep.quiver.vertex_count()).map(|v| rep.hilbert_dim(v)).collect()
}

/// The Dirac operator `D_Q(L, ρ) = 𝒜^sym(b)` with `b_e = L_e / ρ(e)`.
pub fn dirac(rep: &Representation) -> Result<DiracOperator> {
    let q = &rep.quiver;
    let b: Vec<CMat> = (0..q.edge_count())
        .map(|e| &rep.l[e] * C64::from(1.0 / q.rho(e)))
        .collect();
    weight_matrix(q, &vertex_dims(rep), &WeightAssignment { b }, true)
}

/// Weights on the augmented quiver `Q*` realizing the symmetrized matrix as
/// path sums: original edges carry `L/ρ` (self-loops `(L+L*)/ρ`, matching
/// their diagonal entry), reversed edges carry `L*/ρ` of their parent.
#[derive(Clone, Debug)]
pub struct SymWeights {
    pub quiver: Quiver,
    pub dims: Vec<usize>,
    pub b: Vec<CMat>,
}

impl SymWeights {
    pub fn from_representation(rep: &Representation, use_rho: bool) -> SymWeights {
        let aug = rep.quiver.augment();
        let dims = vertex_dims(rep);
        let mut b = Vec::with_capacity(aug.edge_count());
        for e in 0..aug.edge_count() {
            let (orig, adjoint) = match aug.parent_edge(e) {
                Some(p) => (p, true),
                None => (e, false),
            };
            let scale = C64::from(if use_rho { 1.0 / rep.quiver.rho(orig) } else { 1.0 });
            let w = if adjoint {
                rep.l[orig].adjoint() * scale
            } else if rep.quiver.is_self_loop(orig) {
                (&rep.l[orig] + rep.l[orig].adjoint()) * scale
            } else {
                &rep.l[orig] * scale
            };
            b.push(w);
        }
        SymWeights { quiver: aug, dims, b }
    }

    /// Holonomy of a path: composition-ordered product of the edge weights
    /// (first edge rightmost). The constant path has vanishing holonomy
    /// (zero matrix).
    pub fn holonomy(&self, p: &Path) -> Result<CMat> {
        holonomy_of(&self.quiver, &self.b, p, &self.dims)
    }

    /// Wilson loop: trace of the holonomy.
    pub fn wilson_loop(&self, p: &Path) -> Result<C64> {
        if !p.is_loop(&self.quiver) && !p.is_empty() {
            return Err(Error::validation("wilson_loop requires a loop"));
        }
        Ok(self.holonomy(p)?.trace())
    }
}

fn holonomy_of(q: &Quiver, b: &[CMat], p: &Path, dims: &[usize]) -> Result<CMat> {
    if p.is_empty() {
        let d = dims[p.source(q)];
        return Ok(CMat::zeros(d, d));
    }
    let mut iter = p.edges().iter();
    let first = *iter.next().unwrap();
    let mut acc = b[first].clone();
    for &e in iter {
        let be = &b[e];
        if be.ncols() != acc.nrows() {
            return Err(Error::validation(
                "holonomy product undefined: unequal block dimensions along the path",
            ));
        }
        acc = be * acc;
    }
    Ok(acc)
}

/// Holonomy of a path inside the representation's own quiver, with weights
/// `L_e/ρ(e)` (no symmetrization: self-loops contribute `L` alone).
pub fn holonomy(rep: &Representation, p: &Path) -> Result<CMat> {
    let q = &rep.quiver;
    let b: Vec<CMat> = (0..q.edge_count())
        .map(|e| &rep.l[e] * C64::from(1.0 / q.rho(e)))
        .collect();
    holonomy_of(q, &b, p, &vertex_dims(rep))
}

/// Wilson loop of a loop in the representation's quiver.
pub fn wilson_loop(rep: &Representation, p: &Path) -> Result<C64> {
    if !p.is_loop(&rep.quiver) && !p.is_empty() {
        return Err(Error::validation("wilson_loop requires a loop"));
    }
    Ok(holonomy(rep, p)?.trace())
}

/// `Tr(D^k)` by dense matrix powers, split as `D^⌊k/2⌋·D^⌈k/2⌉` so at most
/// `⌈k/2⌉` multiplications are needed.
pub fn trace_power_matrix(d: &DiracOperator, k: usize) -> f64 {
    trace_power_of(&d.matrix, k)
}

pub(crate) fn trace_power_of(m: &CMat, k: usize) -> f64 {
    let n = m.nrows();
    match k {
        0 => n as f64,
        1 => m.trace().re,
        _ => {
            let half = k / 2;
            let mut a = m.clone();
            for _ in 1..half {
                a = &a * m;
            }
            let b = if k % 2 == 0 { a.clone() } else { &a * m };
            // Tr(a·b) without forming the product
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += a[(i, j)] * b[(j, i)];
                }
            }
            acc.re
        }
    }
}

/// `Tr(D^k)` as the Wilson-loop sum over all length-`k` loops of `Q*`,
/// parallel over base vertices with a fixed reduction order.
pub fn trace_power_paths(rep: &Representation, k: usize, limit: usize) -> Result<f64> {
    let sw = SymWeights::from_representation(rep, true);
    if k == 0 {
        return Ok(sw.dims.iter().sum::<usize>() as f64);
    }
    if k > limit {
        return Err(Error::resource(format!(
            "loop length {k} exceeds the configured limit {limit}"
        )));
    }
    let per_vertex: Vec<Result<C64>> = parallel::map_range(sw.quiver.vertex_count(), |v| {
        let loops = sw.quiver.enumerate_loops(k, Some(v), limit)?;
        let mut acc = C64::new(0.0, 0.0);
        for p in &loops {
            acc += sw.wilson_loop(p)?;
        }
        Ok(acc)
    });
    let mut total = C64::new(0.0, 0.0);
    for r in per_vertex {
        total += r?;
    }
    Ok(total.re)
}

/// A polynomial `f(x) = Σ_k f_k x^k` with a scale `Λ`, used as
/// `Tr f(D/Λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionPolynomial {
    pub coeffs: Vec<f64>,
    pub lambda: f64,
}

/// Maximum admitted polynomial degree.
pub const MAX_ACTION_DEGREE: usize = 8;

impl ActionPolynomial {
    pub fn new(coeffs: Vec<f64>, lambda: f64) -> Result<Self> {
        if coeffs.len() > MAX_ACTION_DEGREE + 1 {
            return Err(Error::validation(format!(
                "polynomial degree exceeds {MAX_ACTION_DEGREE}"
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::validation("scale Λ must be positive"));
        }
        Ok(ActionPolynomial { coeffs, lambda })
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }
}

/// Spectral action `Tr f(D/Λ) = Σ_k f_k Tr((D/Λ)^k)`, dense route.
pub fn spectral_action(rep: &Representation, f: &ActionPolynomial) -> Result<f64> {
    let d = dirac(rep)?;
    let scaled = &d.matrix * C64::from(1.0 / f.lambda);
    let n = scaled.nrows();
    let mut acc = 0.0;
    let mut power = CMat::identity(n, n);
    for k in 0..f.coeffs.len() {
        if k > 0 {
            power = &power * &scaled;
        }
        let fk = f.coeffs[k];
        if fk != 0.0 {
            acc += fk * power.trace().re;
        }
    }
    Ok(acc)
}

/// The Higgs field at each vertex: `φ_v = Σ_{self-loops o at v} (L_o + L_o*)/ρ(o)`
/// (the zero matrix at vertices without self-loops).
pub fn higgs_fields(rep: &Representation) -> Vec<CMat> {
    let q = &rep.quiver;
    (0..q.vertex_count())
        .map(|v| {
            let dim = rep.hilbert_dim(v);
            let mut phi = CMat::zeros(dim, dim);
            for o in q.self_loops_at(v) {
                phi += (&rep.l[o] + rep.l[o].adjoint()) * C64::from(1.0 / q.rho(o));
            }
            phi
        })
        .collect()
}

/// `Tr(D̊^k)` on a self-looped quiver via the insertion calculus:
/// the trace on the loop-free part, plus all self-loop insertions into
/// shorter loops, plus the pure Higgs powers `Σ_v Tr(φ_v^k)`.
pub fn trace_power_insertion(rep: &Representation, k: usize, limit: usize) -> Result<f64> {
    if k > limit {
        return Err(Error::resource(format!(
            "loop length {k} exceeds the configured limit {limit}"
        )));
    }
    let q = &rep.quiver;
    let dims = vertex_dims(rep);

    // Restriction to the self-loop-free sub-quiver, keeping edge provenance.
    let kept: Vec<EdgeId> = (0..q.edge_count()).filter(|&e| !q.is_self_loop(e)).collect();
    let strip_edges: Vec<(VertexId, VertexId)> =
        kept.iter().map(|&e| (q.source(e), q.target(e))).collect();
    let strip = Quiver::new(q.vertex_count(), strip_edges)?
        .with_distance(kept.iter().map(|&e| q.rho(e)).collect())?;

    if k == 0 {
        return Ok(dims.iter().sum::<usize>() as f64);
    }

    // Dense trace of the stripped Dirac operator.
    let strip_b: Vec<CMat> =
        kept.iter().map(|&e| &rep.l[e] * C64::from(1.0 / q.rho(e))).collect();
    let strip_d = weight_matrix(&strip, &dims, &WeightAssignment { b: strip_b.clone() }, true)?;
    let base = trace_power_matrix(&strip_d, k);

    // Symmetrized weights on the augmented stripped quiver.
    let aug = strip.augment();
    let mut aug_b = Vec::with_capacity(aug.edge_count());
    for e in 0..aug.edge_count() {
        match aug.parent_edge(e) {
            Some(p) => aug_b.push(strip_b[p].adjoint()),
            None => aug_b.push(strip_b[e].clone()),
        }
    }

    let phis = higgs_fields(rep);

    // Middle terms: insert q_ins self-loop factors into loops of length
    // k - q_ins. The vertex labels are forced by the slots, so each (p, I)
    // contributes at most one nontrivial multi-insertion.
    let mut middle = C64::new(0.0, 0.0);
    for q_ins in 1..k {
        let base_len = k - q_ins;
        let index_sets = increasing_tuples(k, q_ins);
        let per_vertex: Vec<Result<C64>> = parallel::map_range(aug.vertex_count(), |v| {
            let loops = aug.enumerate_loops(base_len, Some(v), limit)?;
            let mut acc = C64::new(0.0, 0.0);
            for p in &loops {
                for indices in &index_sets {
                    if let Some(w) = inserted_wilson(&aug, &aug_b, &phis, p, indices)? {
                        acc += w;
                    }
                }
            }
            Ok(acc)
        });
        for r in per_vertex {
            middle += r?;
        }
    }

    // Pure Higgs loops.
    let mut higgs = 0.0;
    for phi in &phis {
        higgs += trace_power_of(phi, k);
    }

    Ok(base + middle.re + higgs)
}

/// All strictly increasing `q`-tuples in `{1, ..., k}`.
fn increasing_tuples(k: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fn rec(k: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for j in start..=k {
            cur.push(j);
            rec(k, q, j + 1, cur, out);
            cur.pop();
        }
    }
    rec(k, q, 1, &mut cur, &mut out);
    out
}

/// Wilson loop of the multi-insertion of Higgs factors into `p` at the given
/// 1-based slots; `None` when some insertion slot is out of range (the
/// trivial-path sentinel, holonomy zero).
fn inserted_wilson(
    aug: &Quiver,
    aug_b: &[CMat],
    phis: &[CMat],
    p: &Path,
    indices: &[usize],
) -> Result<Option<C64>> {
    #[derive(Clone, Copy)]
    enum Item {
        Edge(EdgeId),
        Phi(VertexId),
    }
    let mut items: Vec<Item> = p.edges().iter().map(|&e| Item::Edge(e)).collect();
    for &j in indices {
        if j > items.len() + 1 {
            return Ok(None);
        }
        // vertex at the slot is forced: source of the edge at slot j, or the
        // loop's endpoint when appending
        let v = if j <= items.len() {
            match items[j - 1] {
                Item::Edge(e) => aug.source(e),
                Item::Phi(v) => v,
            }
        } else {
            match *items.last().expect("loop has positive length") {
                Item::Edge(e) => aug.target(e),
                Item::Phi(v) => v,
            }
        };
        items.insert(j - 1, Item::Phi(v));
    }
    // composition order: first item acts first (rightmost factor)
    let mut acc: Option<CMat> = None;
    for item in &items {
        let factor = match *item {
            Item::Edge(e) => &aug_b[e],
            Item::Phi(v) => &phis[v],
        };
        acc = Some(match acc {
            None => factor.clone(),
            Some(a) => factor * a,
        });
    }
    Ok(Some(acc.expect("nonempty item list").trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::LatticeSpec;
    use crate::repcat::{random_full_representation, random_representation, unit_representation};
    use crate::repcat::full_matrix_network;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn c3_weight_matrix_pattern() {
        let q = Quiver::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let b: Vec<CMat> = (0..3)
            .map(|i| CMat::from_element(1, 1, C64::new(i as f64 + 1.0, 0.5)))
            .collect();
        let w = WeightAssignment { b };
        let a = weight_matrix(&q, &[1, 1, 1], &w, false).unwrap();
        let nonzero = a.matrix.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 3);
        let asym = weight_matrix(&q, &[1, 1, 1], &w, true).unwrap();
        assert_eq!(asym.matrix.iter().filter(|z| z.norm() > 0.0).count(), 6);
        assert!(asym.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn jordan_self_loops_dirac() {
        // two self-loops at one vertex: D = (b1 + b1*) + (b2 + b2*)
        let q = Quiver::new(1, vec![(0, 0), (0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b1 = haar_unitary(3, &mut rng);
        let b2 = haar_unitary(3, &mut rng);
        let w = WeightAssignment { b: vec![b1.clone(), b2.clone()] };
        let d = weight_matrix(&q, &[3], &w, true).unwrap();
        let expect = &b1 + b1.adjoint() + &b2 + b2.adjoint();
        assert!((&d.matrix - expect).norm() < 1e-14);
    }

    #[test]
    fn wilson_loop_examples() {
        let q = Quiver::new(2, vec![(0, 1)]).unwrap();
        let net = full_matrix_network(&q, 3).unwrap();
        let rep = random_representation(&q, &net, 8).unwrap();
        let sw = SymWeights::from_representation(&rep, true);
        // constant path: zero
        let ev = Path::constant(0);
        assert_eq!(sw.wilson_loop(&ev).unwrap(), C64::new(0.0, 0.0));
        // [e, ebar]: L L* = I, W = 3
        let p = Path::new(&sw.quiver, vec![0, 1]).unwrap();
        let w = sw.wilson_loop(&p).unwrap();
        assert!((w - C64::from(3.0)).norm() < 1e-12);
        // cyclicity
        let w2 = sw.wilson_loop(&p.rotate(&sw.quiver, 1).unwrap()).unwrap();
        assert!((w - w2).norm() < 1e-12);
    }

    #[test]
    fn unit_weights_wilson_is_dim() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap();
        let net = full_matrix_network(&q, 2).unwrap();
        let rep = unit_representation(&q, &net).unwrap();
        let sw = SymWeights::from_representation(&rep, true);
        for p in sw.quiver.enumerate_loops(4, Some(7), 12).unwrap() {
            let w = sw.wilson_loop(&p).unwrap();
            assert!((w - C64::from(2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dual_route_small() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 3)).unwrap();
        let rep = random_full_representation(&q, 2, 21).unwrap();
        let d = dirac(&rep).unwrap();
        assert!(d.hermiticity_residual() < 1e-12);
        for k in 0..=5 {
            let tm = trace_power_matrix(&d, k);
            let tp = trace_power_paths(&rep, k, 12).unwrap();
            assert!(
                (tm - tp).abs() <= 1e-8 * (1.0 + tm.abs()),
                "k={k}: {tm} vs {tp}"
            );
        }
    }

    #[test]
    fn dual_route_with_rho_and_self_loops() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 3).with_spacing(0.5).with_tau(2.0))
            .unwrap()
            .add_self_loops();
        let rep = random_full_representation(&q, 2, 22).unwrap();
        let d = dirac(&rep).unwrap();
        for k in 0..=4 {
            let tm = trace_power_matrix(&d, k);
            let tp = trace_power_paths(&rep, k, 12).unwrap();
            assert!(
                (tm - tp).abs() <= 1e-8 * (1.0 + tm.abs()),
                "k={k}: {tm} vs {tp}"
            );
        }
    }

    #[test]
    fn torus_trace_constants() {
        // Tr(D^0) = m^d N, Tr(D^2) = 2d m^d N, odd k vanish for m > k
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap();
        let rep = random_full_representation(&q, 2, 30).unwrap();
        let d = dirac(&rep).unwrap();
        assert_eq!(trace_power_matrix(&d, 0), 50.0);
        assert!((trace_power_matrix(&d, 2) - 200.0).abs() < 1e-9);
        assert!(trace_power_matrix(&d, 3).abs() < 1e-10);
    }

    #[test]
    fn spectral_action_examples() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 5)).unwrap();
        let rep = random_full_representation(&q, 2, 31).unwrap();
        let f0 = ActionPolynomial::new(vec![3.0], 1.0).unwrap();
        assert!((spectral_action(&rep, &f0).unwrap() - 150.0).abs() < 1e-10);
        let fx2 = ActionPolynomial::new(vec![0.0, 0.0, 1.0], 1.0).unwrap();
        assert!((spectral_action(&rep, &fx2).unwrap() - 200.0).abs() < 1e-8);
    }

    #[test]
    fn higgs_field_spectrum() {
        let q = Quiver::new(1, vec![(0, 0)]).unwrap();
        let net = full_matrix_network(&q, 4).unwrap();
        let rep = random_representation(&q, &net, 33).unwrap();
        let phis = higgs_fields(&rep);
        let ev = crate::linalg::hermitian_eigenvalues(&phis[0]);
        assert!(ev.iter().all(|&x| (-2.0..=2.0).contains(&x)));

        // L = I gives phi = 2I
        let unit = unit_representation(&q, &net).unwrap();
        let phi = &higgs_fields(&unit)[0];
        assert!((phi - CMat::identity(4, 4) * C64::from(2.0)).norm() < 1e-14);
    }

    #[test]
    fn insertion_route_small() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 3)).unwrap().add_self_loops();
        let rep = random_full_representation(&q, 2, 40).unwrap();
        let d = dirac(&rep).unwrap();
        for k in 0..=4 {
            let ti = trace_power_insertion(&rep, k, 12).unwrap();
            let tm = trace_power_matrix(&d, k);
            assert!(
                (ti - tm).abs() <= 1e-8 * (1.0 + tm.abs()),
                "k={k}: {ti} vs {tm}"
            );
        }
    }

    #[test]
    fn insertion_reduces_to_plain_without_self_loops() {
        let q = Quiver::make_torus(&LatticeSpec::new(2, 3)).unwrap();
        let rep = random_full_representation(&q, 2, 41).unwrap();
        let d = dirac(&rep).unwrap();
        for k in [2usize, 4] {
            let ti = trace_power_insertion(&rep, k, 12).unwrap();
            let tm = trace_power_matrix(&d, k);
            assert!((ti - tm).abs() <= 1e-10 * (1.0 + tm.abs()));
        }
    }
}
