#![allow(dead_code)]

use cds_core::gf::GfMatrix;
use cds_core::instance::{CdsInstance, EdgeKind};
use cds_core::LinearScheme;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bipartite instance on `A1..A{na}`, `B1..B{nb}`. Each pair is an
/// edge with probability `density`, qualified with probability `q`.
pub fn random_bipartite(r: &mut impl Rng, na: usize, nb: usize, density: f64, q: f64) -> Option<CdsInstance> {
    let mut edges = Vec::new();
    for a in 1..=na {
        for b in 1..=nb {
            if r.gen_bool(density) {
                let kind = if r.gen_bool(q) { EdgeKind::Qualified } else { EdgeKind::Unqualified };
                edges.push((kind, format!("A{a}"), format!("B{b}")));
            }
        }
    }
    if edges.is_empty() {
        return None;
    }
    Some(CdsInstance::from_edges(false, &edges).expect("generated edges are valid"))
}

/// Random general graph on `V1..V{n}`.
pub fn random_general(r: &mut impl Rng, n: usize, density: f64, q: f64) -> Option<CdsInstance> {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if r.gen_bool(density) {
                let kind = if r.gen_bool(q) { EdgeKind::Qualified } else { EdgeKind::Unqualified };
                edges.push((kind, format!("V{i}"), format!("V{j}")));
            }
        }
    }
    if edges.is_empty() {
        return None;
    }
    Some(CdsInstance::from_edges(true, &edges).expect("generated edges are valid"))
}

/// Rejection-samples a feasible, non-degenerate bipartite instance with at
/// most `max_vertices` vertices.
pub fn random_feasible(r: &mut impl Rng, max_vertices: usize) -> CdsInstance {
    loop {
        let na = r.gen_range(1..=max_vertices / 2);
        let nb = r.gen_range(1..=max_vertices - na);
        let density = r.gen_range(0.3..0.9);
        let q = r.gen_range(0.2..0.6);
        let Some(inst) = random_bipartite(r, na, nb, density, q) else { continue };
        if !inst.is_non_degenerate().0 {
            continue;
        }
        if inst.edges_of_kind(EdgeKind::Qualified).next().is_none() {
            continue;
        }
        if inst.half_rate_feasible().expect("non-degenerate").is_feasible() {
            return inst;
        }
    }
}

pub fn random_matrix(r: &mut impl Rng, p: u32, rows: usize, cols: usize) -> GfMatrix {
    let data = (0..rows * cols).map(|_| r.gen_range(0..p)).collect();
    GfMatrix::from_flat(p, rows, cols, data).unwrap()
}

/// Uniformly random linear scheme for `inst`; signal lengths in `1..=max_n`.
pub fn random_scheme(r: &mut impl Rng, inst: &CdsInstance, p: u32, l: usize, lz: usize, max_n: usize) -> LinearScheme {
    let mut sch = LinearScheme::new(p, l, lz).unwrap();
    for v in inst.vertex_ids() {
        let n = r.gen_range(1..=max_n);
        let f = random_matrix(r, p, n, l);
        let h = random_matrix(r, p, n, lz);
        sch.insert_signal(inst.name(v), f, h).unwrap();
    }
    sch
}

/// Integer rank of the joint signal `{S} ∪ names`: the secret contributes
/// the rows `[I_L | 0]`.
pub fn joint_rank(sch: &LinearScheme, with_secret: bool, names: &[&str]) -> usize {
    let (l, lz, p) = (sch.secret_len(), sch.noise_len(), sch.modulus());
    let mut m = GfMatrix::zeros(p, 0, l + lz).unwrap();
    if with_secret {
        let s = GfMatrix::identity(p, l).unwrap().hstack(&GfMatrix::zeros(p, l, lz).unwrap()).unwrap();
        m = m.vstack(&s).unwrap();
    }
    for n in names {
        m = m.vstack(&sch.signal(n).unwrap().augmented()).unwrap();
    }
    m.rank()
}

pub fn random_invertible(r: &mut impl Rng, p: u32, n: usize) -> GfMatrix {
    loop {
        let m = random_matrix(r, p, n, n);
        if m.rank() == n {
            return m;
        }
    }
}

/// Applies a random invertible recombination to every signal and a random
/// change of noise basis; every verification verdict is preserved.
pub fn scramble(r: &mut impl Rng, sch: &LinearScheme) -> LinearScheme {
    let (p, l, lz) = (sch.modulus(), sch.secret_len(), sch.noise_len());
    let basis = random_invertible(r, p, lz);
    let mut out = LinearScheme::new(p, l, lz).unwrap();
    for name in sch.signal_names() {
        let s = sch.signal(name).unwrap();
        let mix = random_invertible(r, p, s.len());
        let f = mix.mul(&s.secret).unwrap();
        let h = mix.mul(&s.noise).unwrap().mul(&basis).unwrap();
        out.insert_signal(name, f, h).unwrap();
    }
    out
}

/// `count` random instance/scheme pairs that pass rank verification, with
/// `p ∈ {2,3}`, `L ≤ 2`, `L_Z ≤ 4`, `N ≤ 3`. About half are uniformly
/// sampled schemes, the rest scrambled synthesized ones. Returns the pairs and
/// how many were uniformly sampled.
pub fn verified_corpus(seed: u64, count: usize) -> (Vec<(CdsInstance, LinearScheme)>, usize) {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut sampled = 0;
    while out.len() < count {
        let (na, nb) = (r.gen_range(1..=2), r.gen_range(1..=3));
        let Some(inst) = random_bipartite(&mut r, na, nb, 0.8, 0.5) else { continue };
        if !inst.is_non_degenerate().0 {
            continue;
        }
        let p = [2, 3][r.gen_range(0..2)];
        let from_random = r.gen_bool(0.5);
        let sch = if from_random {
            let l = r.gen_range(1..=2);
            let lz = r.gen_range(0..=4);
            let n = r.gen_range(1..=3);
            random_scheme(&mut r, &inst, p, l, lz, n)
        } else {
            match cds_core::synthesis::synthesize(&inst, r.gen_bool(0.5)) {
                Ok(s) if s.modulus() <= 3 && s.noise_len() <= 4 => scramble(&mut r, &s),
                _ => continue,
            }
        };
        if cds_core::scheme::verify_linear(&inst, &sch).unwrap().pass {
            sampled += from_random as usize;
            out.push((inst, sch));
        }
    }
    (out, sampled)
}

/// Random schemes within an enumeration budget of `2^16` rows, valid or not.
pub fn oracle_corpus(seed: u64, count: usize) -> Vec<(CdsInstance, LinearScheme)> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (na, nb) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let Some(inst) = random_bipartite(&mut r, na, nb, 0.7, 0.5) else { continue };
        let p = [2, 3, 5][r.gen_range(0..3)];
        let l = r.gen_range(1..=2);
        let lz = r.gen_range(0..=3);
        if (p as u128).pow((l + lz) as u32) > 1 << 16 {
            continue;
        }
        // Half come from scrambled valid schemes so both verdicts are well
        // represented.
        let sch = if r.gen_bool(0.5) {
            random_scheme(&mut r, &inst, p, l, lz, 3)
        } else {
            match cds_core::synthesis::synthesize(&inst, false) {
                Ok(s) if (s.modulus() as u128).pow((s.secret_len() + s.noise_len()) as u32) <= 1 << 16 => {
                    scramble(&mut r, &s)
                }
                _ => continue,
            }
        };
        out.push((inst, sch));
    }
    out
}
