use periodic_timetable::codec::gene_bounds;
use periodic_timetable::instances::*;
use periodic_timetable::model::{derive_bounds, ConstraintKind, Instance, ValidationError};

fn census(inst: &Instance) -> [usize; 5] {
    let mut out = [0; 5];
    for c in derive_bounds(inst).unwrap() {
        out[c.kind.index()] += 1;
    }
    out
}

const TINY: &str = r#"{
  "period": 60,
  "stations": ["A", "B", "C"],
  "segments": [{"from": "B", "to": "C", "single_track": true}],
  "trains": [
    {"id": "t1", "basic_headway": 2, "route": [
      {"from": "A", "to": "B", "running_lo": 5, "running_hi": 7, "dwell_after_lo": 1, "dwell_after_hi": 2},
      {"from": "B", "to": "C", "running_lo": 4, "running_hi": 4}
    ]},
    {"id": "t2", "basic_headway": 2, "route": [
      {"from": "C", "to": "B", "running_lo": 4, "running_hi": 5}
    ]}
  ],
  "connections": [
    {"feeder_train": "t2", "onward_train": "t1", "station": "B", "conn_lo": 2, "conn_hi": 9}
  ]
}"#;

#[test]
fn tiny_document_parses_with_default_weights() {
    let inst = from_json_str(TINY).unwrap();
    assert_eq!(inst.trains.len(), 2);
    assert_eq!(inst.weights.running, 1000);
    assert_eq!(inst.weights.connection, 1);
    assert_eq!(census(&inst), [3, 1, 0, 2, 1]);
}

#[test]
fn cs1_has_expected_size() {
    let inst = from_json_str(CS1_JSON).unwrap();
    assert_eq!(inst.stations.len(), 10);
    assert_eq!(inst.trains.len(), 8);
    assert_eq!(inst.connections.len(), 7);
    assert_eq!(census(&inst).iter().sum::<usize>(), 65);
    assert_eq!(census(&inst)[ConstraintKind::Connection.index()], 7);
}

#[test]
fn cs1_gene_count_matches_trip_count() {
    let inst = build_cs1();
    let trips: usize = inst.trains.iter().map(|t| t.route.len()).sum();
    assert_eq!(gene_bounds(&inst).len(), 2 * trips);
}

#[test]
fn cs2_has_expected_size() {
    let inst = from_json_str(CS2_JSON).unwrap();
    assert_eq!(inst.stations.len(), CS2_STATIONS);
    assert_eq!(inst.trains.len(), CS2_TRAINS);
    assert_eq!(inst.connections.len(), CS2_CONNECTIONS);
    assert_eq!(census(&inst).iter().sum::<usize>(), CS2_CONSTRAINTS);
    assert!(inst.note.as_deref().unwrap().starts_with("SYNTHETIC"));
}

#[test]
fn bundled_files_match_builders() {
    assert_eq!(from_json_str(CS1_JSON).unwrap(), build_cs1());
    assert_eq!(from_json_str(CS2_JSON).unwrap(), generate_cs2_like(CS2_SEED).unwrap());
    assert_eq!(to_json_string(&build_cs1()), CS1_JSON);
}

#[test]
fn generator_is_deterministic_and_seed_sensitive() {
    let a = generate_cs2_like(7).unwrap();
    assert_eq!(a, generate_cs2_like(7).unwrap());
    assert_ne!(a, generate_cs2_like(8).unwrap());
    assert_eq!(census(&a).iter().sum::<usize>(), CS2_CONSTRAINTS);
}

#[test]
fn save_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cs2.json");
    let inst = generate_cs2_like(CS2_SEED).unwrap();
    save(&inst, &path).unwrap();
    assert_eq!(load(&path).unwrap(), inst);
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load("/nonexistent/instance.json"), Err(LoadError::Io { .. })));
}

#[test]
fn empty_train_list_is_rejected() {
    let text = r#"{"period": 60, "stations": ["A"], "trains": []}"#;
    assert!(matches!(
        from_json_str(text),
        Err(LoadError::Validation(ValidationError::NoTrains))
    ));
}

#[test]
fn inverted_running_window_names_the_trip() {
    let text = TINY.replace(r#""running_lo": 5, "running_hi": 7"#, r#""running_lo": 8, "running_hi": 7"#);
    let err = from_json_str(&text).unwrap_err();
    match &err {
        LoadError::Validation(ValidationError::RunningWindow { train, trip, lo, hi, .. }) => {
            assert_eq!(train.as_str(), "t1");
            assert_eq!((*trip, *lo, *hi), (0, 8, 7));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("A -> B"));
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let text = TINY.replace(r#""basic_headway": 2, "route": [
      {"from": "C""#, r#""basic_headway": 2, "colour": "red", "route": [
      {"from": "C""#);
    assert_ne!(text, TINY);
    let err = from_json_str(&text).unwrap_err();
    assert!(matches!(err, LoadError::Parse { .. }));
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn half_specified_dwell_is_rejected() {
    let text = TINY.replace(r#", "dwell_after_hi": 2"#, "");
    assert!(matches!(
        from_json_str(&text),
        Err(LoadError::IncompleteDwell { trip: 0, .. })
    ));
}

#[test]
fn connection_window_reaching_the_period_is_rejected() {
    let text = TINY.replace(r#""conn_hi": 9"#, r#""conn_hi": 60"#);
    assert!(matches!(
        from_json_str(&text),
        Err(LoadError::Validation(ValidationError::ConnectionWindow { .. }))
    ));
}

#[test]
fn weights_must_rank_hard_above_soft() {
    let text = TINY.replace(
        "\n  ]\n}",
        r#"
  ],
  "weights": {"w_running": 1000, "w_dwell": 1000, "w_headway": 1, "w_single": 100, "w_connection": 1}
}"#,
    );
    assert!(matches!(
        from_json_str(&text),
        Err(LoadError::Validation(ValidationError::WeightOrder))
    ));
}
