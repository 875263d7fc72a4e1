use std::path::Path;

use dvec_cli::config::{load_config, parse_config, FieldExport};
use dvec_core::comm::{AcceptDirection, InvalidBoundPolicy};
use dvec_core::sim::RunMode;

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn parse(src: &str) -> Result<dvec_cli::ExperimentSpec, dvec_cli::ConfigError> {
    parse_config(src, Path::new("case.toml"))
}

const BASE: &str = "[[density]]\nid = \"a\"\npreset = \"bimodal\"\n";

#[test]
fn shipped_full_experiment_config_has_expected_shape() {
    let spec = load_config(&configs().join("paper_experiment.toml")).unwrap();
    let ids: Vec<_> = spec.scenarios.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["a", "b", "c", "d"]);
    assert_eq!(spec.modes, RunMode::ALL.to_vec());
    assert_eq!(spec.seeds, vec![0, 1, 2, 3, 4]);
    assert_eq!(spec.run_count() * spec.iterations(), 900);
    for s in &spec.scenarios {
        assert_eq!(s.config.robots, 7);
        assert_eq!(s.config.domain.grid_resolution(), 100);
        assert_eq!(s.config.accept.direction, AcceptDirection::AtMost);
        assert_eq!(s.config.accept.invalid, InvalidBoundPolicy::Infinite);
    }
}

#[test]
fn shipped_minimal_config_uses_defaults() {
    let spec = load_config(&configs().join("minimal.toml")).unwrap();
    assert_eq!(spec.scenarios.len(), 1);
    let c = &spec.scenarios[0].config;
    assert_eq!((c.robots, c.iterations()), (7, 15));
    assert_eq!(c.accept.threshold, 0.0);
    assert_eq!(c.accept.direction, AcceptDirection::AtLeast);
    assert_eq!(c.accept.invalid, InvalidBoundPolicy::Accept);
    assert_eq!(spec.export_fields, FieldExport::FirstSeed);
}

#[test]
fn unknown_keys_are_rejected_in_every_section() {
    for (section, line) in [("domain", 6), ("robots", 6), ("schedules", 6), ("gp", 6), ("comm", 6), ("oracle", 6), ("experiment", 6)] {
        let src = format!("{BASE}\n[{section}]\nnot_a_key = 1\n");
        let e = parse(&src).unwrap_err();
        assert_eq!(e.location.map(|l| l.0), Some(line), "{section}: {e}");
        assert!(e.message.contains("not_a_key"), "{e}");
    }
    let e = parse(&format!("{BASE}\n[extra]\nx = 1\n")).unwrap_err();
    assert_eq!(e.location.map(|l| l.0), Some(5), "{e}");
}

#[test]
fn invalid_values_point_at_their_line() {
    let cases = [
        ("[schedules]\niterations = 3\ngamma = [0.5, 0.6, 0.1]\n", 7, "gamma"),
        ("[schedules]\niterations = 2\nbeta = [2.0, 1.0]\n", 7, "beta"),
        ("[schedules]\ndt = 2.0\n", 6, "dt"),
        ("[robots]\ncount = 0\n", 6, "count"),
        ("[robots]\nnoise_std = 0.0\n", 6, "noise_std"),
        ("[comm]\ndirection = \"sideways\"\n", 6, "direction"),
        ("[comm]\nthreshold = -1.0\n", 6, "threshold"),
        ("[gp]\ntau_min = 0.5\ntau_max = 0.1\n", 6, "tau"),
        ("[experiment]\nmodes = [\"VEC\", \"central\"]\n", 6, "central"),
        ("[experiment]\nseeds = [1, 1]\n", 6, "duplicates"),
        ("[oracle]\nrestarts = 0\n", 6, "restarts"),
        ("[domain]\nvertices = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]\n", 6, "domain"),
    ];
    for (extra, line, needle) in cases {
        let e = parse(&format!("{BASE}\n{extra}")).unwrap_err();
        assert_eq!(e.location.map(|l| l.0), Some(line), "{extra}: {e}");
        assert!(e.to_string().contains(needle), "{extra}: {e}");
        assert!(e.to_string().starts_with(&format!("case.toml:{line}:")), "{e}");
    }
}

#[test]
fn density_definitions() {
    let e = parse("[[density]]\nid = \"a\"\n").unwrap_err();
    assert!(e.message.contains("preset"), "{e}");
    let e = parse("[[density]]\nid = \"a\"\npreset = \"bimodal\"\ncount = 3\n").unwrap_err();
    assert_eq!(e.location.map(|l| l.0), Some(4), "{e}");
    let e = parse(&format!("{BASE}{BASE}")).unwrap_err();
    assert!(e.message.contains("duplicate"), "{e}");
    let e = parse("[[density]]\nid = \"n\"\ncomponents = [{ weight = -5.0, mean = [0.5, 0.5], std = 0.1 }]\n").unwrap_err();
    assert!(e.message.contains("negative"), "{e}");

    let spec = parse(
        "[[density]]\nid = \"u\"\ncomponents = [{ weight = 1.0, mean = [0.5, 0.5], std = 0.2 }]\noffset = 0.5\n\
         [[density]]\nid = \"r\"\npreset = \"random-bumps\"\ncount = 4\nseed = 9\n",
    )
    .unwrap();
    let u = &spec.scenarios[0].config.density;
    assert_eq!((u.components.len(), u.offset), (1, 0.5));
    assert_eq!(spec.scenarios[1].config.density.components.len(), 4);
}

#[test]
fn schedules_and_experiment_settings() {
    let spec = parse(&format!(
        "{BASE}\n[schedules]\nbeta = [0.0, 1.0, 1.0]\ngamma = [0.0, 0.0, 0.0]\n\n\
         [experiment]\nseed = 42\nseeds = [7, 3]\nmodes = [\"dvec-cc\", \"VEC\"]\nparallelism = 2\nexport_fields = \"none\"\noutput_dir = \"out\"\n"
    ))
    .unwrap();
    assert_eq!(spec.iterations(), 3);
    assert_eq!(spec.modes, vec![RunMode::Centralized, RunMode::ConstrainedExchange]);
    assert_eq!(spec.seeds, vec![7, 3]);
    assert_eq!((spec.experiment_seed, spec.parallelism), (42, 2));
    assert_eq!(spec.export_fields, FieldExport::None);
    assert_eq!(spec.output_dir, Path::new("out"));
    let e = parse(&format!("{BASE}\n[schedules]\niterations = 4\nbeta = [0.0, 1.0]\n")).unwrap_err();
    assert_eq!(e.location.map(|l| l.0), Some(7), "{e}");
}

#[test]
fn missing_file_is_reported() {
    let e = load_config(Path::new("/nonexistent/config.toml")).unwrap_err();
    assert!(e.location.is_none());
    assert!(e.to_string().contains("cannot read"), "{e}");
}
