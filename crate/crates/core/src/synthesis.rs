//! Scheme construction.
//!
//! For instances meeting the half-rate condition every signal is a single
//! symbol `s + i·z_m`: `m` indexes the signal's qualified component (each
//! with its own noise symbol) and `i` its unqualified component inside it.
//! Signals joined by an unqualified path are then identical and leak nothing,
//! while the two ends of a qualified edge carry distinct multiples of the same
//! noise symbol and decode `s`.
//!
//! Also home to the two built-in instances and the rate-2/5 scheme for the
//! six-vertex instance that violates the condition.

use crate::error::{CdsError, Result};
use crate::gf::{next_prime_above, GfMatrix};
use crate::instance::{CdsInstance, EdgeKind, Feasibility, VertexId};
use crate::scheme::LinearScheme;

/// Component structure behind a rate-1/2 scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisPlan {
    /// Qualified components; component `m` (0-based) owns noise symbol `z_m`.
    pub components: Vec<ComponentPlan>,
    pub p: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPlan {
    pub vertices: Vec<VertexId>,
    /// Unqualified components; block `i` (0-based) uses coefficient `i + 1`.
    pub unqualified: Vec<Vec<VertexId>>,
}

impl SynthesisPlan {
    pub fn max_unqualified(&self) -> usize {
        self.components.iter().map(|c| c.unqualified.len()).max().unwrap_or(0)
    }

    /// `(component, coefficient)` for a vertex.
    pub fn position(&self, v: VertexId) -> (usize, usize) {
        for (m, c) in self.components.iter().enumerate() {
            for (i, block) in c.unqualified.iter().enumerate() {
                if block.binary_search(&v).is_ok() {
                    return (m, i + 1);
                }
            }
        }
        unreachable!("plan covers every vertex")
    }
}

fn require_feasible(inst: &CdsInstance) -> Result<()> {
    match inst.half_rate_feasible()? {
        Feasibility::Feasible => Ok(()),
        Feasibility::Infeasible { edge, .. } => {
            Err(CdsError::Infeasible(inst.name(edge.0).to_string(), inst.name(edge.1).to_string()))
        }
    }
}

/// Plans the rate-1/2 construction. The prime must exceed every unqualified
/// component count so coefficients `1..=U_m` stay distinct and nonzero.
pub fn plan_half_rate(inst: &CdsInstance) -> Result<SynthesisPlan> {
    require_feasible(inst)?;
    let mut components = Vec::new();
    for block in inst.qualified_components().blocks {
        let unqualified = inst.unqualified_components_within(&block)?.blocks;
        components.push(ComponentPlan { vertices: block, unqualified });
    }
    let mut plan = SynthesisPlan { components, p: 2 };
    plan.p = next_prime_above(plan.max_unqualified() as u32);
    Ok(plan)
}

fn scheme_from_rows(inst: &CdsInstance, p: u32, noise_len: usize, noise_row: impl Fn(VertexId) -> Vec<i64>) -> Result<LinearScheme> {
    let mut sch = LinearScheme::new(p, 1, noise_len)?;
    for v in inst.vertex_ids() {
        let f = GfMatrix::from_rows(p, 1, &[[1]])?;
        let h = GfMatrix::from_rows(p, noise_len, &[noise_row(v)])?;
        sch.insert_signal(inst.name(v), f, h)?;
    }
    Ok(sch)
}

/// Rate-1/2 scheme with one noise symbol per qualified component.
pub fn synthesize_half_rate(inst: &CdsInstance) -> Result<LinearScheme> {
    let plan = plan_half_rate(inst)?;
    let m_total = plan.components.len();
    scheme_from_rows(inst, plan.p, m_total, |v| {
        let (m, i) = plan.position(v);
        let mut row = vec![0i64; m_total];
        row[m] = i as i64;
        row
    })
}

/// Replaces the per-component noise symbols by combinations of two base
/// symbols: `z_1`, `z_2` stay, and `z_j = z_1 + (j − 2)·z_2` for `j ≥ 3`
/// (1-based). Any two components then use linearly independent noise, which
/// is all security across components needs. The prime must also exceed
/// `M − 2` to keep those combinations pairwise independent.
pub fn reduce_randomness(inst: &CdsInstance, sch: &LinearScheme) -> Result<LinearScheme> {
    if *sch != synthesize_half_rate(inst)? {
        return Err(CdsError::InvalidScheme(
            "randomness reduction applies to the synthesized rate-1/2 scheme of this instance".into(),
        ));
    }
    let plan = plan_half_rate(inst)?;
    let m_total = plan.components.len();
    if m_total <= 2 {
        return Ok(sch.clone());
    }
    let p = next_prime_above(plan.max_unqualified().max(m_total - 2) as u32);
    scheme_from_rows(inst, p, 2, |v| {
        let (m, i) = plan.position(v);
        let i = i as i64;
        match m {
            0 => vec![i, 0],
            1 => vec![0, i],
            j => vec![i, i * (j as i64 - 1)],
        }
    })
}

/// Full pipeline for arbitrary instances: vertices with only qualified edges
/// are removed and send the secret itself, the rest gets the rate-1/2 scheme
/// (optionally with reduced randomness).
pub fn synthesize(inst: &CdsInstance, reduce: bool) -> Result<LinearScheme> {
    let (core, eliminated) = inst.normalize_degenerate();
    let base = if core.vertex_count() == 0 {
        LinearScheme::new(2, 1, 0)?
    } else {
        let s = synthesize_half_rate(&core)?;
        if reduce {
            reduce_randomness(&core, &s)?
        } else {
            s
        }
    };
    let mut out = base.clone();
    let p = base.modulus();
    for name in eliminated {
        out.insert_signal(&name, GfMatrix::from_rows(p, 1, &[[1]])?, GfMatrix::zeros(p, 1, base.noise_len())?)?;
    }
    Ok(out)
}

pub fn builtin_fig2_instance() -> CdsInstance {
    use EdgeKind::{Qualified as Q, Unqualified as U};
    CdsInstance::from_edges(
        false,
        &[
            (Q, "A1", "B1"),
            (Q, "B1", "A2"),
            (Q, "A2", "B2"),
            (Q, "B2", "A3"),
            (Q, "A3", "B3"),
            (U, "B2", "A1"),
            (U, "A1", "B3"),
            (U, "B3", "A2"),
            (U, "B1", "A3"),
        ],
    )
    .expect("valid built-in instance")
}

/// Two qualified components: a qualified path on `A1..B3` with four
/// unqualified components, and the single edge `{A4, B4}`.
pub fn builtin_example1_instance() -> CdsInstance {
    use EdgeKind::{Qualified as Q, Unqualified as U};
    CdsInstance::from_edges(
        false,
        &[
            (Q, "A1", "B1"),
            (Q, "B1", "A2"),
            (Q, "A2", "B2"),
            (Q, "B2", "A3"),
            (Q, "A3", "B3"),
            (Q, "A4", "B4"),
            (U, "B1", "A3"),
            (U, "A2", "B3"),
            (U, "A1", "B4"),
            (U, "B3", "A4"),
            (U, "B2", "A4"),
        ],
    )
    .expect("valid built-in instance")
}

/// Vertices of the fig2 qualified path, in path order.
pub const FIG2_PATH: [&str; 6] = ["A1", "B1", "A2", "B2", "A3", "B3"];

const FIG2_NOISE: usize = 9;
const FIG2_WIDTH: usize = 5;

/// Partially assigned secret rows during the search.
type Partial = [[Option<u8>; FIG2_WIDTH]; 6];

/// Secret combinations of the fig2 scheme. Entry `[k][j]` is a bitmask over
/// `(s1, s2, s3, s4)` (bit 0 = `s1`) added to noise bit `z_{(k + j) mod 9}` in
/// bit `j` of the `k`-th signal along [`FIG2_PATH`]. Output of
/// [`search_fig2_secret_rows`].
pub const FIG2_SECRET_ROWS: [[u8; FIG2_WIDTH]; 6] = [
    [0, 0, 0, 0, 0],
    [1, 2, 4, 8, 0],
    [1, 2, 4, 8, 0],
    [0, 0, 1, 1, 0],
    [8, 0, 2, 4, 0],
    [8, 0, 0, 1, 0],
];

/// `(vertex, absolute noise position)` pairs whose secret combinations must
/// agree: the shared noise bits of each unqualified edge. Positions run
/// `k..k+5` for vertex `k` and are reduced mod 9 when indexing noise.
const FIG2_SHARED: [((usize, usize), (usize, usize)); 7] = [
    // {B2, A1}: z3, z4
    ((3, 3), (0, 3)),
    ((3, 4), (0, 4)),
    // {A1, B3}: z0
    ((0, 0), (5, 9)),
    // {B3, A2}: z5, z6
    ((5, 5), (2, 5)),
    ((5, 6), (2, 6)),
    // {B1, A3}: z4, z5
    ((1, 4), (4, 4)),
    ((1, 5), (4, 5)),
];

fn s(i: u8) -> u8 {
    1 << (i - 1)
}

/// Depth-first search for secret combinations satisfying the fig2 design:
/// shared noise bits of unqualified edges carry equal combinations, every
/// qualified edge sees four independent differences on its four shared noise
/// bits, `B1` carries `s4 + z4` and `z5`, and the `{B1, A2}` differences are
/// `(s1+s2, s2+s3, s3+s4, s4)`. Candidates are tried in increasing order, so
/// the result is deterministic.
pub fn search_fig2_secret_rows() -> Option<[[u8; FIG2_WIDTH]; 6]> {
    let fixed = |k: usize, t: usize| -> Option<u8> {
        match (k, t) {
            (1, 4) => Some(s(4)),
            (1, 5) => Some(0),
            _ => None,
        }
    };
    let b1_a2_diff = |t: usize| -> u8 {
        match t {
            2 => s(1) | s(2),
            3 => s(2) | s(3),
            4 => s(3) | s(4),
            _ => s(4),
        }
    };
    let order: Vec<(usize, usize)> =
        (0..6).flat_map(|k| (k..k + FIG2_WIDTH).map(move |t| (k, t))).collect();
    let mut val: Partial = [[None; FIG2_WIDTH]; 6];
    let get = |val: &Partial, k: usize, t: usize| val[k][t - k];

    let consistent = |val: &Partial| -> bool {
        for ((ka, ta), (kb, tb)) in FIG2_SHARED {
            if let (Some(x), Some(y)) = (get(val, ka, ta), get(val, kb, tb)) {
                if x != y {
                    return false;
                }
            }
        }
        for t in 2..=5 {
            if let (Some(x), Some(y)) = (get(val, 1, t), get(val, 2, t)) {
                if x ^ y != b1_a2_diff(t) {
                    return false;
                }
            }
        }
        for k in 0..5 {
            let diffs: Option<Vec<u8>> = (k + 1..k + FIG2_WIDTH)
                .map(|t| Some(get(val, k, t)? ^ get(val, k + 1, t)?))
                .collect();
            if let Some(d) = diffs {
                if gf2_rank(&d) < 4 {
                    return false;
                }
            }
        }
        true
    };

    fn descend(
        i: usize,
        order: &[(usize, usize)],
        val: &mut Partial,
        fixed: &dyn Fn(usize, usize) -> Option<u8>,
        consistent: &dyn Fn(&Partial) -> bool,
    ) -> bool {
        let Some(&(k, t)) = order.get(i) else {
            return true;
        };
        let candidates: Vec<u8> = match fixed(k, t) {
            Some(v) => vec![v],
            None => (0..16).collect(),
        };
        for c in candidates {
            val[k][t - k] = Some(c);
            if consistent(val) && descend(i + 1, order, val, fixed, consistent) {
                return true;
            }
        }
        val[k][t - k] = None;
        false
    }

    if !descend(0, &order, &mut val, &fixed, &consistent) {
        return None;
    }
    let mut out = [[0u8; FIG2_WIDTH]; 6];
    for k in 0..6 {
        for j in 0..FIG2_WIDTH {
            out[k][j] = val[k][j].expect("fully assigned");
        }
    }
    Some(out)
}

fn gf2_rank(rows: &[u8]) -> usize {
    let m: Vec<Vec<i64>> = rows.iter().map(|&r| (0..4).map(|b| (r >> b & 1) as i64).collect()).collect();
    GfMatrix::from_rows(2, 4, &m).expect("GF(2)").rank()
}

/// The rate-2/5 scheme over GF(2): `L = 4`, `L_Z = 9`, `N = 5`. Signal `k`
/// along the qualified path uses the noise window `z_k, …, z_{k+4}` (mod 9),
/// so consecutive signals share four noise bits.
pub fn builtin_fig2_scheme() -> LinearScheme {
    let mut sch = LinearScheme::new(2, 4, FIG2_NOISE).expect("GF(2)");
    for (k, name) in FIG2_PATH.iter().enumerate() {
        let mut f = Vec::with_capacity(FIG2_WIDTH);
        let mut h = Vec::with_capacity(FIG2_WIDTH);
        for j in 0..FIG2_WIDTH {
            let mask = FIG2_SECRET_ROWS[k][j];
            f.push((0..4).map(|b| (mask >> b & 1) as i64).collect::<Vec<_>>());
            let mut row = vec![0i64; FIG2_NOISE];
            row[(k + j) % FIG2_NOISE] = 1;
            h.push(row);
        }
        let f = GfMatrix::from_rows(2, 4, &f).expect("GF(2)");
        let h = GfMatrix::from_rows(2, FIG2_NOISE, &h).expect("GF(2)");
        sch.insert_signal(name, f, h).expect("consistent dimensions");
    }
    sch
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::scheme::{noise_overlap_dim, rate_report, ratio, verify_linear};

    #[test]
    fn search_reproduces_checked_in_rows() {
        assert_eq!(search_fig2_secret_rows(), Some(FIG2_SECRET_ROWS));
    }

    #[test]
    fn fig2_scheme_design_constraints() {
        let rows = FIG2_SECRET_ROWS;
        // B1 carries s4 + z4 and z5; A3 carries the same two bits.
        assert_eq!(rows[1][3], s(4));
        assert_eq!(rows[1][4], 0);
        assert_eq!((rows[4][0], rows[4][1]), (rows[1][3], rows[1][4]));
        // {B1, A2} differences on z2..z5.
        let diffs: Vec<u8> = (2..=5).map(|t| rows[1][t - 1] ^ rows[2][t - 2]).collect();
        assert_eq!(diffs, [s(1) | s(2), s(2) | s(3), s(3) | s(4), s(4)]);
    }

    #[test]
    fn fig2_builtins() {
        let inst = builtin_fig2_instance();
        assert_eq!(inst.vertex_count(), 6);
        assert_eq!(inst.edges_of_kind(EdgeKind::Qualified).count(), 5);
        assert!(!inst.half_rate_feasible().unwrap().is_feasible());

        let sch = builtin_fig2_scheme();
        assert!(verify_linear(&inst, &sch).unwrap().pass);
        assert_eq!(rate_report(&inst, &sch, None).unwrap().rate, ratio(2, 5));
        for e in inst.edges_of_kind(EdgeKind::Qualified) {
            assert_eq!(noise_overlap_dim(&sch, inst.name(e.a), inst.name(e.b)).unwrap(), 4);
        }
        // B3's window wraps around to z0.
        let b3 = sch.signal("B3").unwrap();
        assert_eq!(b3.noise.get(4, 0), 1);
    }

    #[test]
    fn example1_synthesis() {
        let inst = builtin_example1_instance();
        let plan = plan_half_rate(&inst).unwrap();
        assert_eq!(plan.components.len(), 2);
        assert_eq!(plan.max_unqualified(), 4);
        assert_eq!(plan.p, 5);

        let sch = synthesize_half_rate(&inst).unwrap();
        assert_eq!((sch.modulus(), sch.secret_len(), sch.noise_len()), (5, 1, 2));
        assert!(verify_linear(&inst, &sch).unwrap().pass);
        // A2 and B3 share an unqualified component, hence the same signal.
        assert_eq!(sch.signal("A2").unwrap(), sch.signal("B3").unwrap());
        // A4 and B4 sit in the second component: s + z2 and s + 2 z2.
        assert_eq!(sch.signal("A4").unwrap().noise.row(0), [0, 1]);
        assert_eq!(sch.signal("B4").unwrap().noise.row(0), [0, 2]);
    }

    #[test]
    fn small_synthesis_verifies() {
        let inst = parse_instance("cds-instance v1\nq A1 B1\nu A1 B2\nu A2 B1\n").unwrap();
        let plan = plan_half_rate(&inst).unwrap();
        assert_eq!(plan.components.len(), 3);
        let sch = synthesize_half_rate(&inst).unwrap();
        assert!(verify_linear(&inst, &sch).unwrap().pass);
    }

    #[test]
    fn infeasible_and_degenerate_inputs() {
        let err = synthesize_half_rate(&builtin_fig2_instance()).unwrap_err();
        assert_eq!(err, CdsError::Infeasible("B2".into(), "A2".into()));

        let degenerate = parse_instance("cds-instance v1\nq A1 B1\nu A1 B2\n").unwrap();
        assert!(matches!(synthesize_half_rate(&degenerate), Err(CdsError::Degenerate(_))));
        let sch = synthesize(&degenerate, false).unwrap();
        assert_eq!(sch.signal("B1").unwrap().secret.row(0), [1]);
        assert!(sch.signal("B1").unwrap().noise.is_zero());
        assert!(verify_linear(&degenerate, &sch).unwrap().pass);

        let all_qualified = parse_instance("cds-instance v1\nq A1 B1\nq A2 B1\n").unwrap();
        let sch = synthesize(&all_qualified, true).unwrap();
        assert_eq!(sch.noise_len(), 0);
        assert!(verify_linear(&all_qualified, &sch).unwrap().pass);
    }

    fn four_edges() -> CdsInstance {
        parse_instance(
            "cds-instance v1\nq A1 B1\nq A2 B2\nq A3 B3\nq A4 B4\n\
             u A1 B2\nu A2 B3\nu A3 B4\nu A4 B1\n",
        )
        .unwrap()
    }

    #[test]
    fn reduction_with_four_components() {
        let inst = four_edges();
        let sch = synthesize_half_rate(&inst).unwrap();
        assert_eq!((sch.modulus(), sch.noise_len()), (3, 4));
        let red = reduce_randomness(&inst, &sch).unwrap();
        assert_eq!((red.modulus(), red.noise_len()), (3, 2));
        // Components in order {A1,B1}, {A2,B2}, {A3,B3}, {A4,B4}; coefficient 1 for A.
        assert_eq!(red.signal("A1").unwrap().noise.row(0), [1, 0]);
        assert_eq!(red.signal("A2").unwrap().noise.row(0), [0, 1]);
        assert_eq!(red.signal("A3").unwrap().noise.row(0), [1, 1]);
        assert_eq!(red.signal("A4").unwrap().noise.row(0), [1, 2]);
        assert_eq!(red.signal("B4").unwrap().noise.row(0), [2, 1]);
        assert!(verify_linear(&inst, &red).unwrap().pass);
        for name in red.signal_names() {
            assert_eq!(red.signal(name).unwrap().secret, sch.signal(name).unwrap().secret);
        }
    }

    #[test]
    fn reduction_with_two_components_is_identity() {
        let inst = builtin_example1_instance();
        let sch = synthesize_half_rate(&inst).unwrap();
        let red = reduce_randomness(&inst, &sch).unwrap();
        assert_eq!(red, sch);
        let r = rate_report(&inst, &red, None).unwrap();
        assert_eq!(r.randomness_rate, Some(ratio(1, 2)));
        assert_eq!(r.rate, ratio(1, 2));
    }

    #[test]
    fn reduction_rejects_foreign_scheme() {
        let inst = builtin_example1_instance();
        let mut sch = synthesize_half_rate(&inst).unwrap();
        sch.insert_signal("A1", GfMatrix::from_rows(5, 1, &[[2]]).unwrap(), GfMatrix::from_rows(5, 2, &[[1, 0]]).unwrap())
            .unwrap();
        assert!(matches!(reduce_randomness(&inst, &sch), Err(CdsError::InvalidScheme(_))));
    }
}
