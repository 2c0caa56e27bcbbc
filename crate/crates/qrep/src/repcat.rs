//! Concrete quiver representations (network + one unitary per edge), the
//! gauge-group action on them, and the equivalence functors between
//! representations and path-algebra modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, unitarity_residual, C64, CMat, CVec};
use crate::nct::{
    lambda, realize_morphism, sym_elements, BratteliDiagram, BratteliNetwork, PrespectralProfile,
};
use crate::parallel;
use crate::quiver::{Path, Quiver, VertexId};

pub const UNITARITY_TOL: f64 = 1e-10;

/// A representation: quiver, Bratteli network, and one unitary
/// `L_e : H_{s(e)} → H_{t(e)}` per edge.
#[derive(Clone, Debug)]
pub struct Representation {
    pub quiver: Quiver,
    pub network: BratteliNetwork,
    pub l: Vec<CMat>,
}

impl Representation {
    pub fn hilbert_dim(&self, v: VertexId) -> usize {
        self.network.hilbert_dim(v)
    }

    /// Offsets of the vertex blocks inside `⊕_v H_v`, plus the total.
    pub fn offsets(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.quiver.vertex_count());
        let mut total = 0;
        for v in 0..self.quiver.vertex_count() {
            offsets.push(total);
            total += self.hilbert_dim(v);
        }
        (offsets, total)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate(&self.quiver)?;
        if self.l.len() != self.quiver.edge_count() {
            return Err(Error::validation("one unitary per edge required"));
        }
        for (e, le) in self.l.iter().enumerate() {
            let (s, t) = (self.quiver.source(e), self.quiver.target(e));
            if le.nrows() != self.hilbert_dim(t) || le.ncols() != self.hilbert_dim(s) {
                return Err(Error::validation(format!("L_{e} has wrong shape")));
            }
            let res = unitarity_residual(le);
            if res > UNITARITY_TOL {
                return Err(Error::validation(format!(
                    "L_{e} not unitary (residual {res:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Per-edge Frobenius equality within `tol`.
    pub fn approx_eq(&self, other: &Representation, tol: f64) -> bool {
        self.l.len() == other.l.len()
            && self
                .l
                .iter()
                .zip(&other.l)
                .all(|(a, b)| a.shape() == b.shape() && (a - b).norm() <= tol)
    }

    /// JSON: network plus per-edge matrices as `[[[re,im],...],...]`
    /// (row-major), with optional metadata.
    pub fn to_json(&self) -> Value {
        let mats: Vec<Value> = self.l.iter().map(cmat_to_json).collect();
        json!({
            "quiver": self.quiver.to_json(),
            "network": self.network.to_json(),
            "unitaries": mats,
        })
    }

    pub fn from_json(v: &Value) -> Result<Representation> {
        let quiver = Quiver::from_json(
            v.get("quiver").ok_or_else(|| Error::validation("missing 'quiver'"))?,
        )?;
        let network = BratteliNetwork::from_json(
            v.get("network").ok_or_else(|| Error::validation("missing 'network'"))?,
        )?;
        let mats = v
            .get("unitaries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::validation("missing 'unitaries'"))?;
        let l = mats.iter().map(cmat_from_json).collect::<Result<Vec<_>>>()?;
        let rep = Representation { quiver, network, l };
        rep.validate()?;
        Ok(rep)
    }
}

pub fn cmat_to_json(m: &CMat) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

pub fn cmat_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::validation("matrix must be an array"))?;
    let nrows = rows.len();
    let ncols = rows
        .first()
        .and_then(Value::as_array)
        .map(|r| r.len())
        .ok_or_else(|| Error::validation("matrix must be a nonempty array of rows"))?;
    let mut m = CMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == ncols)
            .ok_or_else(|| Error::validation("ragged matrix"))?;
        for (j, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::validation("matrix entries must be [re, im]"))?;
            let re = pair[0].as_f64().ok_or_else(|| Error::validation("bad matrix entry"))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::validation("bad matrix entry"))?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Haar-random representation of a network: per edge,
/// `L_e = λ_t(u_e)·P_π(C_e)` with `u_e` Haar per target summand.
/// Deterministic under `seed`: edge `e` draws from RNG stream `e`, so the
/// result is identical whether edges are sampled in parallel or not.
pub fn random_representation(q: &Quiver, net: &BratteliNetwork, seed: u64) -> Result<Representation> {
    net.validate(q)?;
    let l_res: Vec<Result<CMat>> = parallel::map_range(q.edge_count(), |e| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(e as u64);
        let (s, t) = (q.source(e), q.target(e));
        let dst = &net.profiles[t];
        let u: Vec<CMat> = dst.n().iter().map(|&nj| haar_unitary(nj, &mut rng)).collect();
        realize_morphism(&net.diagrams[e], &net.profiles[s], dst, &u).map(|r| r.l)
    });
    let l = l_res.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Representation { quiver: q.clone(), network: net.clone(), l })
}

/// Representation with all `u_e` equal to the identity, i.e. `L_e = P_π(C_e)`
/// (the identity matrix on full-matrix networks). Useful for unit-weight
/// cross-checks.
pub fn unit_representation(q: &Quiver, net: &BratteliNetwork) -> Result<Representation> {
    net.validate(q)?;
    let mut l = Vec::with_capacity(q.edge_count());
    for e in 0..q.edge_count() {
        let (s, t) = (q.source(e), q.target(e));
        let dst = &net.profiles[t];
        let u: Vec<CMat> = dst.n().iter().map(|&nj| CMat::identity(nj, nj)).collect();
        l.push(realize_morphism(&net.diagrams[e], &net.profiles[s], dst, &u)?.l);
    }
    Ok(Representation { quiver: q.clone(), network: net.clone(), l })
}

/// A gauge element `(σ, g)`: per vertex a summand permutation in
/// `Sym(n_v, r_v)` (`sigma[v][i]` = image of summand `i`) and per-summand
/// unitaries `g[v][j] ∈ U(n_{v,j})`.
#[derive(Clone, Debug)]
pub struct GaugeElement {
    pub sigma: Vec<Vec<usize>>,
    pub g: Vec<Vec<CMat>>,
}

impl GaugeElement {
    pub fn identity(net: &BratteliNetwork) -> GaugeElement {
        let sigma = net.profiles.iter().map(|p| (0..p.len()).collect()).collect();
        let g = net
            .profiles
            .iter()
            .map(|p| p.n().iter().map(|&nj| CMat::identity(nj, nj)).collect())
            .collect();
        GaugeElement { sigma, g }
    }

    /// Haar-random gauge element; permutations drawn uniformly from
    /// `Sym(n_v, r_v)` when `with_permutations` is set.
    pub fn random(net: &BratteliNetwork, seed: u64, with_permutations: bool) -> GaugeElement {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX); // distinct from representation edge streams
        let mut sigma = Vec::with_capacity(net.profiles.len());
        let mut g = Vec::with_capacity(net.profiles.len());
        for p in &net.profiles {
            if with_permutations {
                let elems = sym_elements(p);
                sigma.push(elems[rng.random_range(0..elems.len())].clone());
            } else {
                sigma.push((0..p.len()).collect());
            }
            g.push(p.n().iter().map(|&nj| haar_unitary(nj, &mut rng)).collect());
        }
        GaugeElement { sigma, g }
    }

    pub fn validate(&self, net: &BratteliNetwork) -> Result<()> {
        if self.sigma.len() != net.profiles.len() || self.g.len() != net.profiles.len() {
            return Err(Error::validation("gauge element has wrong vertex count"));
        }
        for (v, p) in net.profiles.iter().enumerate() {
            let s = &self.sigma[v];
            let l = p.len();
            if s.len() != l {
                return Err(Error::validation("sigma has wrong length"));
            }
            let mut seen = vec![false; l];
            for (i, &si) in s.iter().enumerate() {
                if si >= l || seen[si] {
                    return Err(Error::validation("sigma is not a permutation"));
                }
                seen[si] = true;
                if p.n()[si] != p.n()[i] || p.r()[si] != p.r()[i] {
                    return Err(Error::validation("sigma does not preserve (n, r)"));
                }
            }
            if self.g[v].len() != l {
                return Err(Error::validation("g has wrong number of blocks"));
            }
            for (j, gj) in self.g[v].iter().enumerate() {
                if gj.nrows() != p.n()[j] || gj.ncols() != p.n()[j] {
                    return Err(Error::validation("g block size mismatch"));
                }
                if unitarity_residual(gj) > UNITARITY_TOL {
                    return Err(Error::validation("g block not unitary"));
                }
            }
        }
        Ok(())
    }

    /// Hilbert-level unitary `Υ_v = λ_v(g_v)·P_{σ_v}` implementing the vertex
    /// automorphism.
    pub fn hilbert_unitary(&self, net: &BratteliNetwork, v: VertexId) -> Result<CMat> {
        let p = &net.profiles[v];
        let l = p.len();
        let mut c = vec![0usize; l * l];
        for i in 0..l {
            c[i * l + self.sigma[v][i]] = 1;
        }
        let diag = BratteliDiagram::new(l, l, c)?;
        let ids: Vec<CMat> = p.n().iter().map(|&nj| CMat::identity(nj, nj)).collect();
        let p_sigma = realize_morphism(&diag, p, p, &ids)?.l;
        let lam_g = lambda(p, &self.g[v])?;
        Ok(lam_g * p_sigma)
    }

    /// Semidirect product `self ∘ other` (other first):
    /// `σ = σ_self∘σ_other`, `g_j = g_self[j] · g_other[σ_self⁻¹(j)]`.
    pub fn compose(&self, other: &GaugeElement, net: &BratteliNetwork) -> Result<GaugeElement> {
        self.validate(net)?;
        other.validate(net)?;
        let mut sigma = Vec::with_capacity(self.sigma.len());
        let mut g = Vec::with_capacity(self.g.len());
        for v in 0..self.sigma.len() {
            let l = self.sigma[v].len();
            let comp: Vec<usize> = (0..l).map(|i| self.sigma[v][other.sigma[v][i]]).collect();
            let mut inv_self = vec![0usize; l];
            for (i, &si) in self.sigma[v].iter().enumerate() {
                inv_self[si] = i;
            }
            let gv: Vec<CMat> =
                (0..l).map(|j| &self.g[v][j] * &other.g[v][inv_self[j]]).collect();
            sigma.push(comp);
            g.push(gv);
        }
        Ok(GaugeElement { sigma, g })
    }
}

/// Applies a gauge element: `L'_e = Υ_{t(e)} L_e Υ_{s(e)}*` and
/// `C'_{σ_s(i), σ_t(j)} = C_{i,j}`.
pub fn gauge_transform(rep: &Representation, el: &GaugeElement) -> Result<Representation> {
    el.validate(&rep.network)?;
    let q = &rep.quiver;
    let upsilon: Vec<CMat> = (0..q.vertex_count())
        .map(|v| el.hilbert_unitary(&rep.network, v))
        .collect::<Result<_>>()?;
    let l: Vec<CMat> = parallel::map_range(q.edge_count(), |e| {
        let (s, t) = (q.source(e), q.target(e));
        &upsilon[t] * &rep.l[e] * upsilon[s].adjoint()
    });
    let mut diagrams = Vec::with_capacity(q.edge_count());
    for e in 0..q.edge_count() {
        let (s, t) = (q.source(e), q.target(e));
        let (ss, st) = (&el.sigma[s], &el.sigma[t]);
        let old = &rep.network.diagrams[e];
        let (rows, cols) = (old.rows(), old.cols());
        let mut c = vec![0usize; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                c[ss[i] * cols + st[j]] = old.get(i, j);
            }
        }
        diagrams.push(BratteliDiagram::new(rows, cols, c)?);
    }
    let network = BratteliNetwork { profiles: rep.network.profiles.clone(), diagrams };
    network.validate(q)?;
    Ok(Representation { quiver: q.clone(), network, l })
}

/// A path-algebra module: the direct-sum Hilbert space `⊕_v H_v` with the
/// edge generator actions and the constant-path projections.
#[derive(Clone, Debug)]
pub struct PathModule {
    pub quiver: Quiver,
    pub network: BratteliNetwork,
    pub dims: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
    /// Edge generators embedded as `total × total` maps.
    pub edge_maps: Vec<CMat>,
}

impl PathModule {
    /// The profile of the total prespectral triple `⊕_v X_v`.
    pub fn total_profile(&self) -> PrespectralProfile {
        let mut n = Vec::new();
        let mut r = Vec::new();
        for p in &self.network.profiles {
            n.extend_from_slice(p.n());
            r.extend_from_slice(p.r());
        }
        PrespectralProfile::new(n, r).expect("nonempty profiles")
    }

    /// Projection `E_v` onto the vertex block.
    pub fn project(&self, v: VertexId, x: &CVec) -> CVec {
        let mut out = CVec::zeros(self.total);
        let (o, d) = (self.offsets[v], self.dims[v]);
        out.rows_mut(o, d).copy_from(&x.rows(o, d));
        out
    }

    /// Action of a path: `Φ_{e_k}∘…∘Φ_{e_1}` on the source block, landing in
    /// the target block; constant paths act as projections.
    pub fn act(&self, p: &Path, x: &CVec) -> CVec {
        if p.is_empty() {
            return self.project(p.source(&self.quiver), x);
        }
        let mut cur = self.project(p.source(&self.quiver), x);
        for &e in p.edges() {
            cur = &self.edge_maps[e] * cur;
        }
        cur
    }
}

/// Functor `F`: bundles a representation into a path-algebra module on
/// `⊕_v H_v`.
pub fn to_module(rep: &Representation) -> Result<PathModule> {
    rep.validate()?;
    let q = &rep.quiver;
    let (offsets, total) = rep.offsets();
    let dims: Vec<usize> = (0..q.vertex_count()).map(|v| rep.hilbert_dim(v)).collect();
    let mut edge_maps = Vec::with_capacity(q.edge_count());
    for e in 0..q.edge_count() {
        let (s, t) = (q.source(e), q.target(e));
        let mut m = CMat::zeros(total, total);
        m.view_mut((offsets[t], offsets[s]), (dims[t], dims[s])).copy_from(&rep.l[e]);
        edge_maps.push(m);
    }
    Ok(PathModule {
        quiver: q.clone(),
        network: rep.network.clone(),
        dims,
        offsets,
        total,
        edge_maps,
    })
}

/// Functor `G`: recovers the representation from a module by compressing the
/// edge generators with the constant-path projections.
pub fn to_representation(module: &PathModule, q: &Quiver) -> Result<Representation> {
    if module.dims.len() != q.vertex_count() || module.edge_maps.len() != q.edge_count() {
        return Err(Error::validation("module shape does not match quiver"));
    }
    // projections must resolve the identity
    let sum: usize = module.dims.iter().sum();
    if sum != module.total {
        return Err(Error::validation("projections do not resolve the identity"));
    }
    for v in 0..q.vertex_count() {
        if module.offsets[v] != module.dims[..v].iter().sum::<usize>() {
            return Err(Error::validation("projections do not resolve the identity"));
        }
    }
    let mut l = Vec::with_capacity(q.edge_count());
    for e in 0..q.edge_count() {
        let (s, t) = (q.source(e), q.target(e));
        let block = module.edge_maps[e]
            .view((module.offsets[t], module.offsets[s]), (module.dims[t], module.dims[s]))
            .into_owned();
        l.push(block);
    }
    let rep = Representation { quiver: q.clone(), network: module.network.clone(), l };
    rep.validate()?;
    Ok(rep)
}

/// Builds the unique full-matrix network (`(n,r) = ((N),(1))` at every
/// vertex, `C = [1]` on every edge) for a quiver whose representation carries
/// the full matrix algebra. This is the canonical lattice-gauge-theory
/// network.
pub fn full_matrix_network(q: &Quiver, n: usize) -> Result<BratteliNetwork> {
    if n == 0 {
        return Err(Error::validation("N must be >= 1"));
    }
    let profile = PrespectralProfile::new(vec![n], vec![1])?;
    let diagram = BratteliDiagram::new(1, 1, vec![1])?;
    let net = BratteliNetwork {
        profiles: vec![profile; q.vertex_count()],
        diagrams: vec![diagram; q.edge_count()],
    };
    net.validate(q)?;
    Ok(net)
}

/// Haar representation of the full-matrix network; the standard way to get a
/// lattice gauge configuration.
pub fn random_full_representation(q: &Quiver, n: usize, seed: u64) -> Result<Representation> {
    let net = full_matrix_network(q, n)?;
    random_representation(q, &net, seed)
}
