//! Exhaustive ground truth for CDS schemes.
//!
//! A [`SchemeTable`] lists every signal value for every realization of the
//! uniform secret `S` and noise `Z`. Decodability and zero leakage are then
//! decided combinatorially (constant fibers, product-form joint counts) with
//! integer arithmetic only; no rank computation is involved, which is what
//! makes the table an independent check of [`crate::scheme::verify_linear`].

use std::collections::{HashMap, HashSet};

use crate::error::{CdsError, Result};
use crate::instance::{CdsInstance, EdgeKind, VertexId};
use crate::scheme::LinearScheme;

pub const DEFAULT_BUDGET: u128 = 1 << 20;

/// Tolerance for comparing entropies that are not exact integers.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

/// A random variable of the model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Secret,
    Noise,
    Signal(String),
}

impl Var {
    pub fn signal(name: &str) -> Var {
        Var::Signal(name.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct SchemeTable {
    p: u32,
    secret_len: usize,
    noise_len: usize,
    noise_count: u64,
    rows: u64,
    names: Vec<String>,
    lens: Vec<usize>,
    /// Per signal, the base-p packed value for each row. Row `r` holds secret
    /// index `r / p^L_Z` and noise index `r % p^L_Z`.
    values: Vec<Vec<u64>>,
}

fn checked_pow(p: u32, e: usize) -> Option<u128> {
    (p as u128).checked_pow(u32::try_from(e).ok()?)
}

fn digits(mut idx: u64, p: u32, n: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for d in out.iter_mut() {
        *d = (idx % p as u64) as u32;
        idx /= p as u64;
    }
    out
}

fn pack(vals: &[u32], p: u32) -> u64 {
    vals.iter().rev().fold(0u64, |acc, &d| acc * p as u64 + d as u64)
}

impl SchemeTable {
    /// Tabulates an arbitrary (possibly non-linear) scheme. `signal` maps a
    /// signal index, the secret digits and the noise digits to the signal's
    /// digits.
    pub fn from_fn<F>(
        p: u32,
        secret_len: usize,
        noise_len: usize,
        signals: &[(&str, usize)],
        budget: u128,
        signal: F,
    ) -> Result<Self>
    where
        F: Fn(usize, &[u32], &[u32]) -> Vec<u32>,
    {
        if secret_len == 0 {
            return Err(CdsError::InvalidScheme("secret length must be at least 1".into()));
        }
        let needed = checked_pow(p, secret_len + noise_len).unwrap_or(u128::MAX);
        if needed > budget {
            return Err(CdsError::BudgetExceeded { needed, budget });
        }
        for (name, n) in signals {
            if checked_pow(p, *n).is_none_or(|v| v > u64::MAX as u128) {
                return Err(CdsError::Dimension(format!("signal {name} is too long to tabulate")));
            }
        }
        let noise_count = checked_pow(p, noise_len).expect("within budget") as u64;
        let rows = needed as u64;
        let mut values = vec![Vec::with_capacity(rows as usize); signals.len()];
        for r in 0..rows {
            let s = digits(r / noise_count, p, secret_len);
            let z = digits(r % noise_count, p, noise_len);
            for (i, (name, n)) in signals.iter().enumerate() {
                let v = signal(i, &s, &z);
                if v.len() != *n || v.iter().any(|&d| d >= p) {
                    return Err(CdsError::InvalidScheme(format!(
                        "signal {name} produced an invalid value"
                    )));
                }
                values[i].push(pack(&v, p));
            }
        }
        Ok(SchemeTable {
            p,
            secret_len,
            noise_len,
            noise_count,
            rows,
            names: signals.iter().map(|(n, _)| n.to_string()).collect(),
            lens: signals.iter().map(|(_, n)| *n).collect(),
            values,
        })
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

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn signal_len(&self, name: &str) -> Result<usize> {
        Ok(self.lens[self.index(name)?])
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CdsError::MissingSignal(name.to_string()))
    }

    fn secret_of(&self, r: u64) -> u64 {
        r / self.noise_count
    }

    fn column(&self, var: &Var) -> Result<Column<'_>> {
        Ok(match var {
            Var::Secret => Column::Secret,
            Var::Noise => Column::Noise,
            Var::Signal(n) => {
                let i = self.index(n)?;
                Column::Signal(&self.values[i], checked_pow(self.p, self.lens[i]).expect("checked on tabulation"))
            }
        })
    }

    fn radix(&self, c: &Column<'_>) -> u128 {
        match c {
            Column::Secret => (self.rows / self.noise_count) as u128,
            Column::Noise => self.noise_count as u128,
            Column::Signal(_, radix) => *radix,
        }
    }

    /// Row keys packed in mixed radix, or `None` if they do not fit a `u64`.
    /// Also returns the key-space size.
    fn packed(&self, cols: &[Column<'_>]) -> Option<(Vec<u64>, u64)> {
        let mut space: u128 = 1;
        for c in cols {
            space = space.checked_mul(self.radix(c)).filter(|&s| s <= u64::MAX as u128)?;
        }
        let mut keys = vec![0u64; self.rows as usize];
        let mut scale = 1u64;
        for c in cols {
            for (r, k) in keys.iter_mut().enumerate() {
                let r = r as u64;
                let v = match c {
                    Column::Secret => r / self.noise_count,
                    Column::Noise => r % self.noise_count,
                    Column::Signal(v, _) => v[r as usize],
                };
                *k += v * scale;
            }
            scale = scale.wrapping_mul(self.radix(c) as u64);
        }
        Some((keys, space as u64))
    }

    /// Number of rows per distinct joint value of `cols`.
    fn histogram(&self, cols: &[Column<'_>]) -> Vec<u64> {
        match self.packed(cols) {
            Some((keys, space)) if space <= 4 * self.rows => {
                let mut counts = vec![0u64; space as usize];
                for k in keys {
                    counts[k as usize] += 1;
                }
                counts.retain(|&c| c > 0);
                counts
            }
            Some((keys, _)) => {
                let mut counts: HashMap<u64, u64> = HashMap::new();
                for k in keys {
                    *counts.entry(k).or_insert(0) += 1;
                }
                counts.into_values().collect()
            }
            None => {
                let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
                for r in 0..self.rows {
                    *counts.entry(self.key(cols, r)).or_insert(0) += 1;
                }
                counts.into_values().collect()
            }
        }
    }

    fn key(&self, cols: &[Column<'_>], r: u64) -> Vec<u64> {
        cols.iter()
            .map(|c| match c {
                Column::Secret => r / self.noise_count,
                Column::Noise => r % self.noise_count,
                Column::Signal(v, _) => v[r as usize],
            })
            .collect()
    }

    fn signal_columns(&self, names: &[&str]) -> Result<Vec<Column<'_>>> {
        names.iter().map(|n| self.column(&Var::signal(n))).collect()
    }

    /// True iff the secret is a function of the joint value of `names`.
    pub fn is_decodable(&self, names: &[&str]) -> Result<bool> {
        let cols = self.signal_columns(names)?;
        let mut fiber: HashMap<Vec<u64>, u64> = HashMap::new();
        for r in 0..self.rows {
            let s = self.secret_of(r);
            if *fiber.entry(self.key(&cols, r)).or_insert(s) != s {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff the joint value of `names` is independent of the secret:
    /// `count(s, w)·total = count(s)·count(w)` for every `s` and `w`.
    pub fn is_independent(&self, names: &[&str]) -> Result<bool> {
        let cols = self.signal_columns(names)?;
        let mut by_value: HashMap<Vec<u64>, HashMap<u64, u128>> = HashMap::new();
        for r in 0..self.rows {
            *by_value.entry(self.key(&cols, r)).or_default().entry(self.secret_of(r)).or_insert(0) += 1;
        }
        let secrets = self.rows / self.noise_count;
        let total = self.rows as u128;
        let count_s = self.noise_count as u128;
        for per_secret in by_value.values() {
            let count_w: u128 = per_secret.values().sum();
            if per_secret.len() as u64 != secrets {
                return Ok(false);
            }
            if per_secret.values().any(|&c| c * total != count_s * count_w) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Joint entropy, in base-p units, of the selected variables.
    pub fn joint_entropy(&self, subset: &[Var]) -> Result<Entropy> {
        if subset.is_empty() {
            return Err(CdsError::EmptySubset);
        }
        let cols: Vec<Column<'_>> = subset.iter().map(|v| self.column(v)).collect::<Result<_>>()?;
        let mut counts = self.histogram(&cols);
        // Deterministic summation order for the floating-point value.
        counts.sort_unstable();
        Ok(Entropy::from_counts(counts.into_iter(), self.rows, self.p))
    }
}

enum Column<'a> {
    Secret,
    Noise,
    /// Packed values and their range `p^N`.
    Signal(&'a [u64], u128),
}

/// An entropy value. `exact` is set when the distribution is uniform on
/// `p^k` points, in which case the entropy is exactly `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entropy {
    pub value: f64,
    pub exact: Option<u32>,
}

impl Entropy {
    fn from_counts(counts: impl Iterator<Item = u64>, total: u64, p: u32) -> Entropy {
        let counts: Vec<u64> = counts.collect();
        let t = total as f64;
        let ln_p = (p as f64).ln();
        let value = counts
            .iter()
            .map(|&c| {
                let q = c as f64 / t;
                -q * q.ln() / ln_p
            })
            .sum::<f64>();
        let uniform = counts.windows(2).all(|w| w[0] == w[1]);
        let mut exact = None;
        if uniform {
            let mut size = 1u64;
            let mut k = 0u32;
            while size < counts.len() as u64 {
                size = size.saturating_mul(p as u64);
                k += 1;
            }
            if size == counts.len() as u64 {
                exact = Some(k);
            }
        }
        Entropy { value: exact.map_or(value, f64::from), exact }
    }

    pub fn exact(k: u32) -> Entropy {
        Entropy { value: k as f64, exact: Some(k) }
    }

    fn minus(self, other: Entropy) -> Quantity {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => Quantity::Exact(a as i64 - b as i64),
            _ => Quantity::Approx(self.value - other.value),
        }
    }

    fn as_quantity(self) -> Quantity {
        match self.exact {
            Some(k) => Quantity::Exact(k as i64),
            None => Quantity::Approx(self.value),
        }
    }
}

/// Exact integer entropies where available, floats otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Quantity {
    Exact(i64),
    Approx(f64),
}

impl Quantity {
    fn eq_int(self, k: usize) -> bool {
        match self {
            Quantity::Exact(v) => v == k as i64,
            Quantity::Approx(v) => (v - k as f64).abs() <= ENTROPY_TOLERANCE,
        }
    }

    fn le_int(self, k: usize) -> bool {
        match self {
            Quantity::Exact(v) => v <= k as i64,
            Quantity::Approx(v) => v <= k as f64 + ENTROPY_TOLERANCE,
        }
    }

    fn show(self) -> String {
        match self {
            Quantity::Exact(v) => v.to_string(),
            Quantity::Approx(v) => format!("{v:.6}"),
        }
    }
}

/// Tabulates a linear scheme: `v(s, z) = F_v·s + H_v·z`.
pub fn tabulate(sch: &LinearScheme, budget: u128) -> Result<SchemeTable> {
    let names = sch.signal_names();
    let mats: Vec<_> = names.iter().map(|n| sch.signal(n)).collect::<Result<_>>()?;
    let signals: Vec<(&str, usize)> = names.iter().zip(&mats).map(|(n, m)| (*n, m.len())).collect();
    let p = sch.modulus() as u64;
    SchemeTable::from_fn(sch.modulus(), sch.secret_len(), sch.noise_len(), &signals, budget, |i, s, z| {
        let fs = mats[i].secret.apply(s);
        let hz = mats[i].noise.apply(z);
        fs.iter().zip(&hz).map(|(&a, &b)| ((a as u64 + b as u64) % p) as u32).collect()
    })
}

pub fn check_correct(table: &SchemeTable, v: &str, u: &str) -> Result<bool> {
    table.is_decodable(&[v, u])
}

pub fn check_secure(table: &SchemeTable, v: &str, u: &str) -> Result<bool> {
    table.is_independent(&[v, u])
}

pub fn joint_entropy(table: &SchemeTable, subset: &[Var]) -> Result<Entropy> {
    table.joint_entropy(subset)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEdge {
    pub v: String,
    pub u: String,
    pub kind: EdgeKind,
    pub ok: bool,
}

/// Per-edge verdicts of the oracle, in instance edge order.
pub fn oracle_edge_verdicts(inst: &CdsInstance, table: &SchemeTable) -> Result<Vec<OracleEdge>> {
    inst.edges()
        .iter()
        .map(|e| {
            let (v, u) = (inst.name(e.a), inst.name(e.b));
            let ok = match e.kind {
                EdgeKind::Qualified => check_correct(table, v, u)?,
                EdgeKind::Unqualified => check_secure(table, v, u)?,
            };
            Ok(OracleEdge { v: v.to_string(), u: u.to_string(), kind: e.kind, ok })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaResult {
    pub id: u8,
    pub statement: &'static str,
    /// Number of identities evaluated; zero means the lemma is vacuous here.
    pub checked: usize,
    /// Offending variable sets with the observed value.
    pub failures: Vec<(Vec<String>, String)>,
}

impl LemmaResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaAudit {
    pub secret_len: usize,
    pub lemmas: Vec<LemmaResult>,
}

impl LemmaAudit {
    pub fn passed(&self) -> bool {
        self.lemmas.iter().all(LemmaResult::passed)
    }
}

/// Largest qualified component whose subsets are all enumerated for the
/// component-alignment identity; bigger components check singletons, pairs
/// and the whole component.
const SUBSET_LIMIT: usize = 12;

/// Evaluates the entropy identities every rate-1/2 scheme must satisfy:
///
/// 1. `H(v) = H(v | S) = L` for every vertex on a qualified edge;
/// 2. `H(v, u | S) = L` for every qualified edge;
/// 3. `H(V_q | S) = L` for every nonempty subset of a qualified component;
/// 4. `H(v, u) = L` for unqualified edges inside a qualified component;
/// 5. `H(v_1, v_P) ≤ L` for the ends of unqualified paths inside a
///    qualified component.
pub fn lemma_audit(inst: &CdsInstance, table: &SchemeTable, l: usize) -> Result<LemmaAudit> {
    if l != table.secret_len {
        return Err(CdsError::InvalidScheme(format!(
            "audit expects secret length {l}, table has {}",
            table.secret_len
        )));
    }
    for v in inst.vertex_ids() {
        let n = table.signal_len(inst.name(v))?;
        if n != l {
            return Err(CdsError::NotHalfRate { vertex: inst.name(v).to_string(), n, l });
        }
    }
    let h_s = table.joint_entropy(&[Var::Secret])?;
    let ent = |vs: &[VertexId]| -> Result<Entropy> {
        let vars: Vec<Var> = vs.iter().map(|&v| Var::signal(inst.name(v))).collect();
        table.joint_entropy(&vars)
    };
    let cond = |vs: &[VertexId]| -> Result<Quantity> {
        let mut vars: Vec<Var> = vs.iter().map(|&v| Var::signal(inst.name(v))).collect();
        vars.push(Var::Secret);
        Ok(table.joint_entropy(&vars)?.minus(h_s))
    };
    let mut lemmas = Vec::with_capacity(5);

    // 1
    let mut r = LemmaResult { id: 1, statement: "H(v) = H(v|S) = L", checked: 0, failures: vec![] };
    for v in inst.vertex_ids() {
        if inst.neighbors(v, EdgeKind::Qualified).next().is_none() {
            continue;
        }
        r.checked += 1;
        let h = ent(&[v])?.as_quantity();
        let hc = cond(&[v])?;
        if !h.eq_int(l) || !hc.eq_int(l) {
            r.failures.push((inst.names(&[v]), format!("H(v) = {}, H(v|S) = {}", h.show(), hc.show())));
        }
    }
    lemmas.push(r);

    // 2
    let mut r = LemmaResult { id: 2, statement: "H(v,u|S) = L", checked: 0, failures: vec![] };
    for e in inst.edges_of_kind(EdgeKind::Qualified) {
        r.checked += 1;
        let hc = cond(&[e.a, e.b])?;
        if !hc.eq_int(l) {
            r.failures.push((inst.names(&[e.a, e.b]), format!("H(v,u|S) = {}", hc.show())));
        }
    }
    lemmas.push(r);

    let components: Vec<Vec<VertexId>> =
        inst.qualified_components().blocks.into_iter().filter(|b| b.len() > 1).collect();

    // 3
    let mut r = LemmaResult { id: 3, statement: "H(V_q|S) = H(V_Q|S) = L", checked: 0, failures: vec![] };
    for block in &components {
        let subsets: Vec<Vec<VertexId>> = if block.len() <= SUBSET_LIMIT {
            (1u32..(1 << block.len()))
                .map(|mask| {
                    block.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect()
                })
                .collect()
        } else {
            let mut s: Vec<Vec<VertexId>> = block.iter().map(|&v| vec![v]).collect();
            for (i, &a) in block.iter().enumerate() {
                for &b in &block[i + 1..] {
                    s.push(vec![a, b]);
                }
            }
            s.push(block.clone());
            s
        };
        for sub in subsets {
            r.checked += 1;
            let hc = cond(&sub)?;
            if !hc.eq_int(l) {
                r.failures.push((inst.names(&sub), format!("H(V_q|S) = {}", hc.show())));
            }
        }
    }
    lemmas.push(r);

    let same_component = |a: VertexId, b: VertexId| {
        components.iter().any(|c| c.binary_search(&a).is_ok() && c.binary_search(&b).is_ok())
    };

    // 4
    let mut r = LemmaResult { id: 4, statement: "H(v,u) = L", checked: 0, failures: vec![] };
    for e in inst.edges_of_kind(EdgeKind::Unqualified) {
        if !same_component(e.a, e.b) {
            continue;
        }
        r.checked += 1;
        let h = ent(&[e.a, e.b])?.as_quantity();
        if !h.eq_int(l) {
            r.failures.push((inst.names(&[e.a, e.b]), format!("H(v,u) = {}", h.show())));
        }
    }
    lemmas.push(r);

    // 5
    let mut r = LemmaResult { id: 5, statement: "H(v_1,v_P) <= L", checked: 0, failures: vec![] };
    let mut seen = HashSet::new();
    for block in &components {
        let inner = inst.unqualified_components_within(block)?;
        for ub in &inner.blocks {
            for (i, &a) in ub.iter().enumerate() {
                for &b in &ub[i + 1..] {
                    if !seen.insert((a, b)) {
                        continue;
                    }
                    r.checked += 1;
                    let h = ent(&[a, b])?.as_quantity();
                    if !h.le_int(l) {
                        r.failures.push((inst.names(&[a, b]), format!("H(v_1,v_P) = {}", h.show())));
                    }
                }
            }
        }
    }
    lemmas.push(r);

    Ok(LemmaAudit { secret_len: l, lemmas })
}
