//! The quick examples, run as tests.

mod compose {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/compose.rs"));
}

mod environments {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/environments.rs"));
}

mod gradcheck {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gradcheck.rs"));
}

mod her_relabel {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/her_relabel.rs"));
}

mod bilinear_saddle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bilinear_saddle.rs"));
}

#[test]
fn compose_example_runs() {
    compose::run().unwrap();
}

#[test]
fn environments_example_writes_episodes() {
    let dir = tempfile::tempdir().unwrap();
    environments::run(Some(dir.path().to_path_buf())).unwrap();
    for id in advsac::envs::ENV_IDS {
        assert!(dir.path().join(format!("{id}.csv")).exists());
    }
}

#[test]
fn gradcheck_example_runs() {
    gradcheck::run(3).unwrap();
}

#[test]
fn her_example_runs() {
    her_relabel::run().unwrap();
}

#[test]
fn bilinear_example_approaches_the_saddle() {
    let value = bilinear_saddle::run(40).unwrap();
    assert!(value.abs() < 0.1, "{value}");
}
