use spreading_core::pwl::check_submultiplicative;
use spreading_core::{build_incomparable_family, q, EncoderState, FiniteLattice, OrliczParams, PwlFunction};

#[test]
fn family_export_reads_back() {
    let fam = build_incomparable_family(2, 1).unwrap();
    fam.verify_log().unwrap();
    let dir = tempfile::tempdir().unwrap();
    fam.export(dir.path()).unwrap();
    for (i, f) in fam.functions().iter().enumerate() {
        let text = std::fs::read_to_string(dir.path().join(format!("S_{}.csv", i + 1))).unwrap();
        assert!(text.starts_with("x,S(x)"));
        let back = PwlFunction::from_csv_str(&text).unwrap();
        assert_eq!(&back, f);
        assert!(check_submultiplicative(&back).is_ok());
    }
    let log: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("requests.json")).unwrap()).unwrap();
    assert_eq!(log.as_array().unwrap().len(), fam.request_log().len());
    for r in log.as_array().unwrap() {
        for key in ["A", "N", "witness_n", "ratio"] {
            assert!(r.get(key).is_some(), "{key} missing in {r}");
        }
    }
}

#[test]
fn encoder_bundle_round_trips() {
    let params = OrliczParams::new(q(1, 2), q(2, 1), q(5, 2)).unwrap();
    let s = EncoderState::run(FiniteLattice::n5(), params, 6).unwrap();
    let back = EncoderState::from_json(&s.to_json()).unwrap();
    assert_eq!(back.to_json(), s.to_json());
    for e in 0..s.lattice().len() {
        assert_eq!(back.pattern(e), s.pattern(e));
    }
    assert!(back.verify_properties().all_pass());
}

#[test]
fn lattice_document_round_trips() {
    let l = FiniteLattice::power_set(3);
    let back = FiniteLattice::parse_json(&l.to_json()).unwrap();
    assert_eq!(back.leq_matrix(), l.leq_matrix());
    assert_eq!(back.names(), l.names());
}
