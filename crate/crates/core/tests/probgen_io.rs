use lassokit::io::{format_matrix_market, format_vector, parse_matrix_market, parse_vector, write_bundle, Manifest};
use lassokit::probgen::{gen_instance, gen_sparse_signal, GeneratorSpec, MatrixKind, SignalDist};
use lassokit::LassoError;
use sha2::{Digest, Sha256};

fn digest(spec: &GeneratorSpec) -> String {
    let inst = gen_instance(spec).unwrap();
    let mut h = Sha256::new();
    h.update(format_matrix_market(&inst.a));
    h.update(format_vector(&inst.b));
    h.update(format_vector(&inst.x0));
    format!("{:x}", h.finalize())
}

#[test]
fn generation_is_deterministic_per_seed() {
    for kind in [MatrixKind::GaussianUnitColumns, MatrixKind::SphereWalk { gamma: 0.1 }] {
        let mut spec = GeneratorSpec::new(20, 40, 5, SignalDist::Gaussian, 17);
        spec.kind = kind;
        spec.noise_fraction = 0.01;
        let first = digest(&spec);
        assert_eq!(first, digest(&spec));
        spec.seed = 18;
        assert_ne!(first, digest(&spec));
    }
}

#[test]
fn streams_are_independent() {
    // changing only the signal law keeps the matrix
    let a = gen_instance(&GeneratorSpec::new(10, 30, 4, SignalDist::PmOne, 5)).unwrap();
    let b = gen_instance(&GeneratorSpec::new(10, 30, 4, SignalDist::Uniform, 5)).unwrap();
    assert_eq!(a.a.data(), b.a.data());
    assert_ne!(a.x0, b.x0);
}

#[test]
fn instance_shape_and_scaling() {
    for dist in [SignalDist::PmOne, SignalDist::Uniform, SignalDist::Gaussian] {
        let mut spec = GeneratorSpec::new(30, 60, 7, dist, 3);
        spec.noise_fraction = 0.05;
        spec.sigma_frac = Some(0.1);
        let inst = gen_instance(&spec).unwrap();
        assert_eq!(inst.x0.iter().filter(|v| **v != 0.0).count(), 7);
        if dist == SignalDist::PmOne {
            assert!(inst.x0.iter().all(|v| *v == 0.0 || v.abs() == 1.0));
        }
        let l1: f64 = inst.x0.iter().map(|v| v.abs()).sum();
        assert!((inst.tau - 0.99 * l1).abs() <= 1e-12 * l1);
        let bn: f64 = inst.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((inst.sigma.unwrap() - 0.1 * bn).abs() <= 1e-12 * bn);
        for j in 0..60 {
            let nj: f64 = inst.a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nj - 1.0).abs() < 1e-12);
        }
        // noise level relative to the clean signal
        let mut clean = vec![0.0; 30];
        for j in 0..60 {
            for i in 0..30 {
                clean[i] += inst.a.get(i, j) * inst.x0[j];
            }
        }
        let noise: f64 = inst.b.iter().zip(&clean).map(|(b, c)| (b - c).powi(2)).sum::<f64>().sqrt();
        let cn: f64 = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((noise / cn - 0.05).abs() < 1e-10);
    }
}

#[test]
fn generator_rejects_bad_specs() {
    assert!(gen_sparse_signal(5, 6, SignalDist::PmOne, 0).is_err());
    let mut spec = GeneratorSpec::new(1, 4, 1, SignalDist::PmOne, 0);
    spec.kind = MatrixKind::SphereWalk { gamma: 0.5 };
    assert!(gen_instance(&spec).is_err());
    let mut spec = GeneratorSpec::new(4, 4, 1, SignalDist::PmOne, 0);
    spec.kind = MatrixKind::SphereWalk { gamma: 2.5 };
    assert!(gen_instance(&spec).is_err());
}

#[test]
fn bundle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = GeneratorSpec::new(12, 24, 3, SignalDist::Uniform, 4);
    spec.noise_fraction = 0.02;
    let inst = gen_instance(&spec).unwrap();
    write_bundle(dir.path(), &inst).unwrap();
    let manifest = Manifest::read(&dir.path().join("manifest.txt")).unwrap();
    assert_eq!(manifest.tau, Some(inst.tau));
    let p = manifest.load().unwrap();
    assert_eq!(p.b, inst.b);
    assert_eq!(p.tau, inst.tau);
    let a = parse_matrix_market(&std::fs::read_to_string(dir.path().join("A.mtx")).unwrap(), "A").unwrap();
    assert_eq!(a.data(), inst.a.data());
    let x0 = parse_vector(&std::fs::read_to_string(dir.path().join("x0.txt")).unwrap(), "x0").unwrap();
    assert_eq!(x0, inst.x0);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["seed"], 4);
    assert_eq!(meta["tau"].as_f64().unwrap(), inst.tau);
}

#[test]
fn sigma_bundle_loads_with_zero_radius() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = GeneratorSpec::new(8, 16, 2, SignalDist::PmOne, 1);
    spec.sigma_frac = Some(0.05);
    let inst = gen_instance(&spec).unwrap();
    write_bundle(dir.path(), &inst).unwrap();
    let manifest = Manifest::read(&dir.path().join("manifest.txt")).unwrap();
    assert_eq!(manifest.sigma, inst.sigma);
    assert_eq!(manifest.tau, None);
    assert_eq!(manifest.load().unwrap().tau, 0.0);
}

#[test]
fn manifest_errors_name_the_key() {
    let base = std::path::Path::new("/data");
    let key_of = |text: &str| match Manifest::parse(text, base) {
        Err(LassoError::Parse { context, .. }) => context,
        other => panic!("expected a parse error, got {other:?}"),
    };
    assert_eq!(key_of("b = b.txt\ntau = 1\n"), "A");
    assert_eq!(key_of("A = a.mtx\ntau = 1\n"), "b");
    assert_eq!(key_of("A = a.mtx\nb = b.txt\ntau = x\n"), "tau");
    assert_eq!(key_of("A = a.mtx\nb = b.txt\ntau = 1\nsigma = 2\n"), "tau");
    assert_eq!(key_of("A = a.mtx\nb = b.txt\ntau = 1\nfoo = 2\n"), "foo");
    assert_eq!(key_of("A = a.mtx\nA = b.mtx\nb = b.txt\ntau = 1\n"), "A");
    let ok = Manifest::parse("# comment\nA = a.mtx\nb = b.txt\nsigma = 0.5\nmu = 0.1\n", base).unwrap();
    assert_eq!(ok.a, base.join("a.mtx"));
    assert_eq!(ok.mu, 0.1);
}
