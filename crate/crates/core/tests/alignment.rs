//! Noise and signal alignment hold on every verified scheme.

mod common;

use cds_core::scheme::{
    alignment_report, check_signal_alignment, common_noise_dim, noise_overlap_dim, path_overlap_lower_bound,
    qualified_chain_paths, verify_linear,
};
use cds_core::synthesis::{builtin_fig2_instance, builtin_fig2_scheme};
use cds_core::{CdsInstance, EdgeKind, LinearScheme};
use common::*;

fn check_alignment(inst: &CdsInstance, sch: &LinearScheme) {
    let l = sch.secret_len();
    for e in inst.edges() {
        let (v, u) = (inst.name(e.a), inst.name(e.b));
        match e.kind {
            EdgeKind::Qualified => {
                let a = noise_overlap_dim(sch, v, u).unwrap();
                assert!(a >= l, "noise overlap {a} < L = {l} on {{{v},{u}}}\n{}", sch.to_file_string());
            }
            EdgeKind::Unqualified => {
                let s = check_signal_alignment(sch, v, u).unwrap();
                assert!(s.aligned, "{{{v},{u}}} misaligned: {:?}\n{}", s.violation, sch.to_file_string());
            }
        }
    }
    let equal_lengths = sch.signal_names().iter().map(|n| sch.signal(n).unwrap().len()).min()
        == Some(sch.max_signal_len());
    if equal_lengths {
        for path in qualified_chain_paths(inst) {
            let names: Vec<&str> = path.iter().map(|&v| inst.name(v)).collect();
            let bound = path_overlap_lower_bound(inst, sch, &path).unwrap();
            let common = common_noise_dim(sch, &names).unwrap() as i64;
            assert!(bound <= common, "path {names:?}: bound {bound} > common {common}");
        }
    }
}

#[test]
fn fig2_windows() {
    let inst = builtin_fig2_instance();
    let sch = builtin_fig2_scheme();
    let report = alignment_report(&inst, &sch, &[]).unwrap();
    assert_eq!(report.noise_overlaps.len(), 5);
    assert!(report.noise_overlaps.iter().all(|(_, _, a)| *a == 4));
    assert_eq!(report.signal_alignment.len(), 4);
    assert!(report.consistent());
    check_alignment(&inst, &sch);
}

#[test]
fn two_hundred_verified_schemes() {
    let (corpus, sampled) = verified_corpus(0xa11, 200);
    for (inst, sch) in &corpus {
        check_alignment(inst, sch);
    }
    assert!(sampled >= 25, "only {sampled} uniformly sampled schemes verified");
}

#[test]
fn misaligned_pair_is_reported() {
    // A1 = s + z, B1 = z: the unqualified pair leaks s, and the kernel
    // vector (1, 1) exposes it.
    let inst = CdsInstance::from_edges(false, &[(EdgeKind::Unqualified, "A1", "B1")]).unwrap();
    let mut sch = LinearScheme::new(2, 1, 1).unwrap();
    let one = cds_core::GfMatrix::from_rows(2, 1, &[[1]]).unwrap();
    let zero = cds_core::GfMatrix::from_rows(2, 1, &[[0]]).unwrap();
    sch.insert_signal("A1", one.clone(), one.clone()).unwrap();
    sch.insert_signal("B1", zero, one).unwrap();
    assert!(!verify_linear(&inst, &sch).unwrap().pass);
    let s = check_signal_alignment(&sch, "A1", "B1").unwrap();
    assert!(!s.aligned);
    assert_eq!(s.violation, Some((vec![1], vec![1])));
}
