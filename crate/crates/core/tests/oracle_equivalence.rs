//! Rank-based verification against exhaustive enumeration.

mod common;

use cds_core::oracle::{oracle_edge_verdicts, tabulate, SchemeTable, Var, DEFAULT_BUDGET};
use cds_core::scheme::verify_linear;
use cds_core::synthesis::{builtin_fig2_instance, builtin_fig2_scheme};
use cds_core::{CdsInstance, LinearScheme};
use common::*;
use rand::Rng;

fn assert_agree(inst: &CdsInstance, sch: &LinearScheme, table: &SchemeTable) -> bool {
    let report = verify_linear(inst, sch).unwrap();
    let oracle = oracle_edge_verdicts(inst, table).unwrap();
    assert_eq!(report.edges.len(), oracle.len());
    for (r, o) in report.edges.iter().zip(&oracle) {
        assert_eq!((&r.v, &r.u), (&o.v, &o.u));
        assert_eq!(r.ok, o.ok, "edge {{{},{}}} disagrees on\n{}", r.v, r.u, sch.to_file_string());
    }
    for v in &report.vertices {
        let independent = table.is_independent(&[v.name.as_str()]).unwrap();
        assert_eq!(v.secure, independent, "vertex {} disagrees", v.name);
        let h = table.joint_entropy(&[Var::Secret, Var::signal(&v.name)]).unwrap();
        let hv = table.joint_entropy(&[Var::signal(&v.name)]).unwrap();
        // I(S; v) = L + H(v) - H(S, v) equals the rank leakage exactly.
        let leak = sch.secret_len() as i64 + hv.exact.unwrap() as i64 - h.exact.unwrap() as i64;
        assert_eq!(leak, v.leakage as i64);
    }
    report.pass
}

#[test]
fn five_hundred_random_schemes() {
    let mut passing = 0;
    for (inst, sch) in oracle_corpus(0x0dd5, 500) {
        let table = tabulate(&sch, DEFAULT_BUDGET).unwrap();
        passing += assert_agree(&inst, &sch, &table) as usize;
    }
    assert!((100..=450).contains(&passing), "corpus too one-sided: {passing} of 500 pass");
}

#[test]
fn fig2_scheme_over_all_realizations() {
    let inst = builtin_fig2_instance();
    let sch = builtin_fig2_scheme();
    let table = tabulate(&sch, DEFAULT_BUDGET).unwrap();
    assert_eq!(table.rows(), 1 << 13);
    assert!(assert_agree(&inst, &sch, &table));
}

#[test]
fn single_corruptions_are_caught_by_both() {
    let inst = builtin_fig2_instance();
    let base = builtin_fig2_scheme();
    let mut r = rng(7);
    for _ in 0..20 {
        let name = base.signal_names()[r.gen_range(0..6)].to_string();
        let s = base.signal(&name).unwrap();
        let mut noise = s.noise.clone();
        let (i, j) = (r.gen_range(0..noise.rows()), r.gen_range(0..noise.cols()));
        noise.set(i, j, 1 - noise.get(i, j));
        let mut bad = LinearScheme::new(2, 4, 9).unwrap();
        for n in base.signal_names() {
            let t = base.signal(n).unwrap();
            if n == name {
                bad.insert_signal(n, t.secret.clone(), noise.clone()).unwrap();
            } else {
                bad.insert_signal(n, t.secret.clone(), t.noise.clone()).unwrap();
            }
        }
        let table = tabulate(&bad, DEFAULT_BUDGET).unwrap();
        assert_agree(&inst, &bad, &table);
    }
}
