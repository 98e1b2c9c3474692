use quaddec::decimate::{decimate, DecimationConfig, Target};
use quaddec::io::{read_obj, read_skin_sidecar, synth, write_obj, write_skin_sidecar};
use quaddec::Error;
use tempfile::TempDir;

#[test]
fn obj_file_round_trip_is_exact() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cube.obj");
    let mut cube = synth::subdivided_cube(4);
    let jittered = cube.positions().iter().map(|p| p * 1.0 / 3.0).collect();
    cube = cube.with_positions(jittered);
    write_obj(&cube, &path).unwrap();
    let back = read_obj(&path).unwrap();
    assert_eq!(back.positions(), cube.positions());
    let arities = |m: &quaddec::mesh::Mesh| m.faces().map(|(_, f)| f.vertices().to_vec()).collect::<Vec<_>>();
    assert_eq!(arities(&back), arities(&cube));
}

#[test]
fn skinned_decimation_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    let (mut mesh, skin) = synth::skinned_cylinder(12, 16, 3).unwrap();
    let (obj, json) = (dir.path().join("c.obj"), dir.path().join("c.json"));
    write_obj(&mesh, &obj).unwrap();
    write_skin_sidecar(&skin, &json).unwrap();

    let mut loaded = read_obj(&obj).unwrap();
    let loaded_skin = read_skin_sidecar(&json).unwrap();
    assert_eq!(loaded_skin, skin);
    loaded_skin.attach(&mut loaded).unwrap();
    skin.attach(&mut mesh).unwrap();
    assert_eq!(loaded.attributes().joints, mesh.attributes().joints);

    let config = DecimationConfig {
        target: Target::Ratio(0.3),
        ..Default::default()
    };
    let out = decimate(&loaded, &config).unwrap().mesh;
    let out_skin = loaded_skin.with_influences_of(&out).unwrap();
    let out_json = dir.path().join("o.json");
    write_skin_sidecar(&out_skin, &out_json).unwrap();
    let back = read_skin_sidecar(&out_json).unwrap();
    assert_eq!(back.influences.len(), out.vertex_count());
    assert_eq!(back, out_skin);
}

#[test]
fn missing_files_report_their_path() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("absent.obj");
    let err = read_obj(&path).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("absent.obj"));
}
