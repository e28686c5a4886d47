use std::path::Path;

use proptest::prelude::*;

use stfe2d::diagnostics::DiagRecord;
use stfe2d::io::{
    decode, encode, format_row, load_config, parse_row, read_snapshot, write_snapshot, DiagWriter,
    FileSink,
};
use stfe2d::integrator::Simulator;
use stfe2d::{Error, Field, Grid};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #[test]
    fn snapshot_round_trip_is_bit_exact(
        nx in 3usize..7,
        ny in 3usize..7,
        lx in 0.1f64..10.0,
        t in finite(),
        seed in any::<u64>(),
    ) {
        let g = Grid::new(nx, ny, lx, 1.0).unwrap();
        let mut s = seed;
        let u = Field::from_nodes(g, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f64::from_bits(s >> 2)
        });
        let (v, tt) = decode(&encode(&u, t), Path::new("mem")).unwrap();
        prop_assert_eq!(tt.to_bits(), t.to_bits());
        prop_assert_eq!(v.grid(), u.grid());
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn any_truncation_is_rejected(cut in 1usize..200) {
        let g = Grid::unit_square(5).unwrap();
        let bytes = encode(&Field::constant(g, 2.0), 0.5);
        let cut = cut.min(bytes.len());
        prop_assert!(decode(&bytes[..bytes.len() - cut], Path::new("mem")).is_err());
    }

    #[test]
    fn diag_rows_round_trip(vals in proptest::collection::vec(finite(), 13), stopped in any::<bool>()) {
        let r = DiagRecord {
            t: vals[0], mass: vals[1], u_min: vals[2], u_max: vals[3],
            e_dirichlet: vals[4], e_potential: vals[5], e_curvature: vals[6], e_total: vals[7],
            s_entropy: vals[8], r_value: vals[9], osc_ratio: vals[10],
            dissipation_x: vals[11], dissipation_y: vals[12], stopped,
        };
        let back = parse_row(&format_row(&r)).unwrap();
        let a = [r.t, r.mass, r.u_min, r.u_max, r.e_dirichlet, r.e_potential, r.e_curvature,
                 r.e_total, r.s_entropy, r.r_value, r.osc_ratio, r.dissipation_x, r.dissipation_y];
        let b = [back.t, back.mass, back.u_min, back.u_max, back.e_dirichlet, back.e_potential,
                 back.e_curvature, back.e_total, back.s_entropy, back.r_value, back.osc_ratio,
                 back.dissipation_x, back.dissipation_y];
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x, y);
        }
        prop_assert_eq!(back.stopped, stopped);
    }
}

#[test]
fn snapshot_file_round_trip_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.snap");
    let g = Grid::new(4, 3, 2.0, 1.5).unwrap();
    let u = Field::interpolate(g, |x, y| 1.0 + x * y);
    write_snapshot(&path, &u, 0.25).unwrap();
    let (v, t) = read_snapshot(&path).unwrap();
    assert_eq!((v, t), (u, 0.25));
    let err = read_snapshot(&dir.path().join("missing.snap")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("missing.snap"));
}

#[test]
fn truncated_file_names_byte_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.snap");
    let g = Grid::unit_square(4).unwrap();
    let bytes = encode(&Field::constant(g, 1.0), 0.0);
    std::fs::write(&path, &bytes[..bytes.len() - 20]).unwrap();
    let msg = read_snapshot(&path).unwrap_err().to_string();
    assert!(msg.contains("108") && msg.contains("128") && msg.contains("t.snap"), "{msg}");
}

#[test]
fn writer_emits_header_once() {
    let g = Grid::unit_square(4).unwrap();
    let mat = stfe2d::material::Material::default();
    let r = DiagRecord::new(0.0, &Field::constant(g, 1.0), &mat, false).unwrap();
    let mut w = DiagWriter::new(Vec::new());
    w.append(&r).unwrap();
    let one = String::from_utf8(w.into_inner()).unwrap();
    assert_eq!(one.lines().count(), 2);
    assert!(one.lines().nth(1).unwrap().ends_with(",0"));
}

#[test]
fn file_initial_data_and_grid_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::unit_square(8).unwrap();
    let u = Field::interpolate(g, |x, _| 1.0 + 0.2 * (std::f64::consts::TAU * x).sin());
    write_snapshot(&dir.path().join("u0.snap"), &u, 0.0).unwrap();
    let cfg_path = dir.path().join("c.json");
    std::fs::write(
        &cfg_path,
        r#"{"grid": {"nx": 8, "ny": 8}, "initial": {"kind": "file", "path": "u0.snap"}}"#,
    )
    .unwrap();
    assert_eq!(load_config(&cfg_path).unwrap().initial, u);
    std::fs::write(
        &cfg_path,
        r#"{"grid": {"nx": 16, "ny": 8}, "initial": {"kind": "file", "path": "u0.snap"}}"#,
    )
    .unwrap();
    let err = load_config(&cfg_path).unwrap_err();
    assert!(matches!(&err, Error::Config(v) if v.iter().any(|m| m.contains("grid mismatch"))), "{err}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, "{\"grid\": {\"nx\": 8,").unwrap();
    assert!(matches!(load_config(&p), Err(Error::Parse(_))));
}

#[test]
fn file_sink_writes_numbered_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = stfe2d::io::Config::from_json(
        r#"{"grid": {"nx": 8, "ny": 8}, "noise": {"lambda0": 0},
            "run": {"dt": 1e-9, "t_max": 4e-9, "snapshot_times": [0, 2e-9]}}"#,
        Path::new("."),
    )
    .unwrap();
    let sim = Simulator::new(&cfg.grid, &cfg.run, &cfg.material, &cfg.noise).unwrap();
    let mut sink = FileSink::create(dir.path(), "s").unwrap();
    sim.run(cfg.initial.clone(), &mut sink).unwrap();
    let (diag, snaps) = sink.finish().unwrap();
    let names: Vec<_> = snaps.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, ["s_0000.snap", "s_0001.snap", "s_0002.snap"]);
    let times: Vec<f64> = snaps.iter().map(|p| read_snapshot(p).unwrap().1).collect();
    assert_eq!(times[0], 0.0);
    assert!((times[1] - 2e-9).abs() < 1e-24 && (times[2] - 4e-9).abs() < 1e-24, "{times:?}");
    let text = std::fs::read_to_string(diag).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
}
