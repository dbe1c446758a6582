//! Linear CDS schemes over GF(p) and their rank-based analysis.
//!
//! Each signal is `v = F_v·S + H_v·Z` for a secret `S ∈ GF(p)^L` and common
//! noise `Z ∈ GF(p)^{L_Z}`. With uniform inputs the entropy of any set of
//! signals (and optionally `S`) equals the rank of the stacked precoding
//! matrices, so decodability and security reduce to rank identities:
//!
//! * `{v, u}` reveals `rank([F H]) - rank(H)` symbols of the secret, where
//!   both matrices are stacked over `v` and `u`;
//! * a qualified edge needs all `L` symbols, an unqualified edge needs zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::{CdsError, Result};
use crate::gf::{rowspace_intersection_basis, rowspace_intersection_dim, GfMatrix};
use crate::instance::{natural_cmp, CdsInstance, EdgeKind, VertexId};
use crate::lp::Rational;

/// Precoding matrices of one signal; both have the signal length as row count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalMatrices {
    pub secret: GfMatrix,
    pub noise: GfMatrix,
}

impl SignalMatrices {
    pub fn len(&self) -> usize {
        self.secret.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `[F | H]`.
    pub fn augmented(&self) -> GfMatrix {
        self.secret.hstack(&self.noise).expect("row counts checked on insert")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScheme {
    p: u32,
    secret_len: usize,
    noise_len: usize,
    signals: BTreeMap<String, SignalMatrices>,
}

impl LinearScheme {
    pub fn new(p: u32, secret_len: usize, noise_len: usize) -> Result<Self> {
        GfMatrix::zeros(p, 0, 0)?;
        if secret_len == 0 {
            return Err(CdsError::InvalidScheme("secret length must be at least 1".into()));
        }
        Ok(LinearScheme { p, secret_len, noise_len, signals: BTreeMap::new() })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn secret_len(&self) -> usize {
        self.secret_len
    }

    pub fn noise_len(&self) -> usize {
        self.noise_len
    }

    pub fn insert_signal(&mut self, name: &str, secret: GfMatrix, noise: GfMatrix) -> Result<()> {
        for m in [&secret, &noise] {
            if m.modulus() != self.p {
                return Err(CdsError::FieldMismatch(self.p, m.modulus()));
            }
        }
        if secret.cols() != self.secret_len || noise.cols() != self.noise_len {
            return Err(CdsError::Dimension(format!(
                "signal {name}: expected {} secret and {} noise columns, got {} and {}",
                self.secret_len,
                self.noise_len,
                secret.cols(),
                noise.cols()
            )));
        }
        if secret.rows() != noise.rows() {
            return Err(CdsError::Dimension(format!(
                "signal {name}: F has {} rows but H has {}",
                secret.rows(),
                noise.rows()
            )));
        }
        self.signals.insert(name.to_string(), SignalMatrices { secret, noise });
        Ok(())
    }

    pub fn signal(&self, name: &str) -> Result<&SignalMatrices> {
        self.signals.get(name).ok_or_else(|| CdsError::MissingSignal(name.to_string()))
    }

    /// Signal names in natural order.
    pub fn signal_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.signals.keys().map(String::as_str).collect();
        names.sort_by(|a, b| natural_cmp(a, b));
        names
    }

    pub fn max_signal_len(&self) -> usize {
        self.signals.values().map(SignalMatrices::len).max().unwrap_or(0)
    }

    /// Stacked `[F | H]` and stacked `H` over a set of signals.
    pub fn stacked(&self, names: &[&str]) -> Result<(GfMatrix, GfMatrix)> {
        let mut aug = GfMatrix::zeros(self.p, 0, self.secret_len + self.noise_len)?;
        let mut noise = GfMatrix::zeros(self.p, 0, self.noise_len)?;
        for n in names {
            let s = self.signal(n)?;
            aug = aug.vstack(&s.augmented())?;
            noise = noise.vstack(&s.noise)?;
        }
        Ok((aug, noise))
    }

    /// Secret symbols revealed by the joint view of `names`.
    pub fn information_rank(&self, names: &[&str]) -> Result<usize> {
        let (aug, noise) = self.stacked(names)?;
        Ok(aug.rank() - noise.rank())
    }

    /// Checks that the scheme covers exactly the vertices of `inst`.
    pub fn check_covers(&self, inst: &CdsInstance) -> Result<()> {
        for v in inst.vertex_ids() {
            self.signal(inst.name(v))?;
        }
        for name in self.signals.keys() {
            if inst.id(name).is_none() {
                return Err(CdsError::UnknownSignal(name.clone()));
            }
        }
        Ok(())
    }

    /// Renders the scheme in the line-based file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!(
            "cds-scheme v1\nfield {}\nsecret {}\nnoise {}\n",
            self.p, self.secret_len, self.noise_len
        );
        let join = |xs: &[u32]| xs.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        for name in self.signal_names() {
            let s = &self.signals[name];
            out.push_str(&format!("signal {} {}\n", name, s.len()));
            for r in 0..s.len() {
                let f = join(s.secret.row(r));
                let h = join(s.noise.row(r));
                let sep_f = if f.is_empty() { "" } else { " " };
                let sep_h = if h.is_empty() { "" } else { " " };
                out.push_str(&format!("F:{sep_f}{f} | H:{sep_h}{h}\n"));
            }
        }
        out
    }
}

/// Parses the scheme file format:
///
/// ```text
/// cds-scheme v1
/// field 2
/// secret 1
/// noise 1
/// signal A1 1
/// F: 1 | H: 1
/// ```
pub fn parse_scheme(text: &str) -> Result<LinearScheme> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let syntax = |line: usize, msg: String| CdsError::Syntax { line, msg };
    let mut it = lines.into_iter();
    match it.next() {
        Some((_, "cds-scheme v1")) => {}
        Some((line, _)) => return Err(syntax(line, "expected header `cds-scheme v1`".into())),
        None => return Err(syntax(0, "missing header `cds-scheme v1`".into())),
    }
    let mut header = |key: &str| -> Result<usize> {
        let (line, l) = it.next().ok_or_else(|| syntax(0, format!("missing `{key}` line")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            [k, v] if *k == key => {
                v.parse().map_err(|_| syntax(line, format!("`{key}` expects a number")))
            }
            _ => Err(syntax(line, format!("expected `{key} <n>`"))),
        }
    };
    let p = header("field")?;
    let l = header("secret")?;
    let lz = header("noise")?;
    let p = u32::try_from(p).map_err(|_| CdsError::InvalidModulus(u32::MAX))?;
    let mut sch = LinearScheme::new(p, l, lz)?;

    let parse_digits = |line: usize, s: &str, want: usize, what: &str| -> Result<Vec<u32>> {
        let vals: Vec<u32> = s
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| syntax(line, format!("{what} entries must be non-negative integers")))?;
        if vals.len() != want {
            return Err(syntax(line, format!("{what} needs {want} entries, found {}", vals.len())));
        }
        if let Some(bad) = vals.iter().find(|&&v| v >= p) {
            return Err(syntax(line, format!("{what} entry {bad} is not a residue mod {p}")));
        }
        Ok(vals)
    };

    while let Some((line, l_text)) = it.next() {
        let toks: Vec<&str> = l_text.split_whitespace().collect();
        let (name, n) = match toks.as_slice() {
            ["signal", name, n] => (
                name.to_string(),
                n.parse::<usize>().map_err(|_| syntax(line, "signal length must be a number".into()))?,
            ),
            _ => return Err(syntax(line, "expected `signal <name> <N>`".into())),
        };
        if sch.signals.contains_key(&name) {
            return Err(syntax(line, format!("signal {name} defined twice")));
        }
        let mut f_rows = Vec::with_capacity(n * l);
        let mut h_rows = Vec::with_capacity(n * lz);
        for _ in 0..n {
            let (rl, row) = it
                .next()
                .ok_or_else(|| syntax(line, format!("signal {name} is missing rows")))?;
            let rest = row
                .strip_prefix("F:")
                .ok_or_else(|| syntax(rl, "expected `F: ... | H: ...`".into()))?;
            let (f, h) = rest
                .split_once('|')
                .ok_or_else(|| syntax(rl, "expected `|` between F and H".into()))?;
            let h = h
                .trim()
                .strip_prefix("H:")
                .ok_or_else(|| syntax(rl, "expected `H:` after `|`".into()))?;
            f_rows.extend(parse_digits(rl, f, l, "F")?);
            h_rows.extend(parse_digits(rl, h, lz, "H")?);
        }
        let secret = GfMatrix::from_flat(p, n, l, f_rows)?;
        let noise = GfMatrix::from_flat(p, n, lz, h_rows)?;
        sch.insert_signal(&name, secret, noise)?;
    }
    Ok(sch)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCheck {
    pub name: String,
    /// Security of the signal alone is required only for vertices with an
    /// unqualified edge.
    pub required: bool,
    pub secure: bool,
    pub leakage: usize,
}

impl VertexCheck {
    pub fn passes(&self) -> bool {
        self.secure || !self.required
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCheck {
    pub v: String,
    pub u: String,
    pub kind: EdgeKind,
    /// Secret symbols revealed by the pair.
    pub information: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub secret_len: usize,
    pub vertices: Vec<VertexCheck>,
    pub edges: Vec<EdgeCheck>,
    pub pass: bool,
}

/// Checks decodability of every qualified edge and zero leakage of every
/// unqualified edge and every constrained signal, by rank identities.
pub fn verify_linear(inst: &CdsInstance, sch: &LinearScheme) -> Result<VerificationReport> {
    sch.check_covers(inst)?;
    let mut vertices = Vec::with_capacity(inst.vertex_count());
    for v in inst.vertex_ids() {
        let name = inst.name(v);
        let leakage = sch.information_rank(&[name])?;
        vertices.push(VertexCheck {
            name: name.to_string(),
            required: inst.neighbors(v, EdgeKind::Unqualified).next().is_some(),
            secure: leakage == 0,
            leakage,
        });
    }
    let mut edges = Vec::with_capacity(inst.edges().len());
    for e in inst.edges() {
        let (v, u) = (inst.name(e.a), inst.name(e.b));
        let information = sch.information_rank(&[v, u])?;
        let ok = match e.kind {
            EdgeKind::Qualified => information == sch.secret_len,
            EdgeKind::Unqualified => information == 0,
        };
        edges.push(EdgeCheck { v: v.to_string(), u: u.to_string(), kind: e.kind, information, ok });
    }
    let pass = vertices.iter().all(VertexCheck::passes) && edges.iter().all(|e| e.ok);
    Ok(VerificationReport { secret_len: sch.secret_len, vertices, edges, pass })
}

/// `dim(rowspan(H_v) ∩ rowspan(H_u))`.
pub fn noise_overlap_dim(sch: &LinearScheme, v: &str, u: &str) -> Result<usize> {
    rowspace_intersection_dim(&sch.signal(v)?.noise, &sch.signal(u)?.noise)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalAlignment {
    pub aligned: bool,
    /// `(x, y)` with `x·H_v = y·H_u` but `x·F_v ≠ y·F_u`.
    pub violation: Option<(Vec<u32>, Vec<u32>)>,
}

/// Whenever a combination of `v`'s rows and a combination of `u`'s rows carry
/// the same noise, they must carry the same secret part too; otherwise their
/// difference exposes a nonzero linear function of the secret.
pub fn check_signal_alignment(sch: &LinearScheme, v: &str, u: &str) -> Result<SignalAlignment> {
    let sv = sch.signal(v)?;
    let su = sch.signal(u)?;
    let kernel = sv.noise.vstack(&su.noise.neg())?.left_kernel();
    let nv = sv.len();
    for k in 0..kernel.rows() {
        let row = kernel.row(k);
        let (x, y) = row.split_at(nv);
        if sv.secret.left_apply(x) != su.secret.left_apply(y) {
            return Ok(SignalAlignment { aligned: false, violation: Some((x.to_vec(), y.to_vec())) });
        }
    }
    Ok(SignalAlignment { aligned: true, violation: None })
}

fn check_path(inst: &CdsInstance, sch: &LinearScheme, path: &[VertexId]) -> Result<usize> {
    for w in path.windows(2) {
        if inst.edge_kind(w[0], w[1]).is_none() {
            return Err(CdsError::NotAdjacent(inst.name(w[0]).into(), inst.name(w[1]).into()));
        }
    }
    let mut len = None;
    for &v in path {
        let n = sch.signal(inst.name(v))?.len();
        if *len.get_or_insert(n) != n {
            return Err(CdsError::UnequalSignalLengths);
        }
    }
    Ok(len.unwrap_or(0))
}

/// Lower bound on the dimension shared by every noise space along `path`:
/// `Σ α(consecutive pair) − (pairs − 1)·N`, from `dim(X ∩ Y) ≥ dim X + dim Y − N`
/// applied inside each intermediate signal's noise space.
pub fn path_overlap_lower_bound(inst: &CdsInstance, sch: &LinearScheme, path: &[VertexId]) -> Result<i64> {
    let n = check_path(inst, sch, path)? as i64;
    if path.len() < 2 {
        return Ok(path.first().map_or(0, |_| n));
    }
    let mut sum = 0i64;
    for w in path.windows(2) {
        sum += noise_overlap_dim(sch, inst.name(w[0]), inst.name(w[1]))? as i64;
    }
    let pairs = (path.len() - 1) as i64;
    Ok(sum - (pairs - 1) * n)
}

/// Exact dimension of the intersection of all noise row spaces of `names`.
pub fn common_noise_dim(sch: &LinearScheme, names: &[&str]) -> Result<usize> {
    let Some((first, rest)) = names.split_first() else {
        return Ok(0);
    };
    let mut acc = sch.signal(first)?.noise.row_basis();
    for n in rest {
        acc = rowspace_intersection_basis(&acc, &sch.signal(n)?.noise)?;
    }
    Ok(acc.rows())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAlignment {
    pub vertices: Vec<String>,
    pub lower_bound: i64,
    pub common_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentReport {
    pub secret_len: usize,
    /// `(v, u, α_vu)` per qualified edge.
    pub noise_overlaps: Vec<(String, String, usize)>,
    /// `(v, u, aligned)` per unqualified edge.
    pub signal_alignment: Vec<(String, String, bool)>,
    pub paths: Vec<PathAlignment>,
}

impl AlignmentReport {
    /// Noise overlap of at least `L` on every qualified edge and signal
    /// alignment on every unqualified edge.
    pub fn consistent(&self) -> bool {
        self.noise_overlaps.iter().all(|(_, _, a)| *a >= self.secret_len)
            && self.signal_alignment.iter().all(|(_, _, ok)| *ok)
    }
}

pub fn alignment_report(
    inst: &CdsInstance,
    sch: &LinearScheme,
    paths: &[Vec<VertexId>],
) -> Result<AlignmentReport> {
    sch.check_covers(inst)?;
    let mut noise_overlaps = Vec::new();
    let mut signal_alignment = Vec::new();
    for e in inst.edges() {
        let (v, u) = (inst.name(e.a), inst.name(e.b));
        match e.kind {
            EdgeKind::Qualified => {
                noise_overlaps.push((v.to_string(), u.to_string(), noise_overlap_dim(sch, v, u)?))
            }
            EdgeKind::Unqualified => signal_alignment.push((
                v.to_string(),
                u.to_string(),
                check_signal_alignment(sch, v, u)?.aligned,
            )),
        }
    }
    let mut path_reports = Vec::with_capacity(paths.len());
    for path in paths {
        let names: Vec<&str> = path.iter().map(|&v| inst.name(v)).collect();
        path_reports.push(PathAlignment {
            vertices: names.iter().map(|s| s.to_string()).collect(),
            lower_bound: path_overlap_lower_bound(inst, sch, path)?,
            common_dim: common_noise_dim(sch, &names)?,
        });
    }
    Ok(AlignmentReport {
        secret_len: sch.secret_len,
        noise_overlaps,
        signal_alignment,
        paths: path_reports,
    })
}

/// Qualified components whose qualified edges form one simple path, listed
/// end to end starting from the earlier-named endpoint.
pub fn qualified_chain_paths(inst: &CdsInstance) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    for block in inst.qualified_components().blocks {
        if block.len() < 2 {
            continue;
        }
        let deg = |v: VertexId| inst.neighbors(v, EdgeKind::Qualified).count();
        let edges = inst
            .edges_of_kind(EdgeKind::Qualified)
            .filter(|e| block.binary_search(&e.a).is_ok())
            .count();
        if edges != block.len() - 1 || block.iter().any(|&v| deg(v) > 2) {
            continue;
        }
        let start = *block.iter().find(|&&v| deg(v) == 1).expect("a path has an endpoint");
        let mut path = vec![start];
        let mut prev = None;
        let mut cur = start;
        while let Some(next) = inst.neighbors(cur, EdgeKind::Qualified).find(|&w| Some(w) != prev) {
            path.push(next);
            prev = Some(cur);
            cur = next;
        }
        out.push(path);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateReport {
    /// `L / (2·max N_v)`.
    pub rate: Rational,
    /// `L / L_Z`; absent when the scheme uses no noise.
    pub randomness_rate: Option<Rational>,
    pub lower: Rational,
    pub upper: Rational,
}

pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rates of a verified scheme and the capacity interval they imply.
/// Without a converse the upper end is 1/2, the ceiling for non-degenerate
/// instances.
pub fn rate_report(inst: &CdsInstance, sch: &LinearScheme, converse: Option<Rational>) -> Result<RateReport> {
    if !verify_linear(inst, sch)?.pass {
        return Err(CdsError::Unverified);
    }
    let rate = ratio(sch.secret_len, 2 * sch.max_signal_len().max(1));
    let randomness_rate = (sch.noise_len > 0).then(|| ratio(sch.secret_len, sch.noise_len));
    let upper = converse.unwrap_or_else(|| ratio(1, 2));
    if upper < rate {
        return Err(CdsError::InconsistentBounds(upper.to_string(), rate.to_string()));
    }
    Ok(RateReport { lower: rate.clone(), rate, randomness_rate, upper })
}
