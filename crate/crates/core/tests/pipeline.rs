//! Data loading, evaluation and their composition on small fixtures.

use std::fs;

use dspnmf::data::{load_csv, synthetic_blobs, write_csv, Dataset, DatasetManifest, LabelColumn, Orientation};
use dspnmf::evaluation::{kfold_cv, kmeans, nmi, KnnConfig, LabelVector};
use dspnmf::solvers::{fit, Algorithm, SolverConfig};
use ndarray::Array2;

#[test]
fn separated_blobs_cluster_perfectly() {
    for seed in 0..5 {
        let d = synthetic_blobs::<f64>(4, 60, 2, 25.0, seed).unwrap();
        let labels = d.labels.clone().unwrap();
        let found = kmeans(&d.x, 2, seed, 10).unwrap();
        assert_eq!(nmi(&found, &labels).unwrap(), 1.0);
    }
    let d = synthetic_blobs::<f64>(5, 200, 4, 30.0, 3).unwrap();
    let found = kmeans(&d.x, 4, 3, 10).unwrap();
    assert_eq!(nmi(&found, d.labels.as_ref().unwrap()).unwrap(), 1.0);
}

#[test]
fn separable_data_classifies_perfectly() {
    let d = synthetic_blobs::<f64>(3, 90, 3, 30.0, 11).unwrap();
    let scores = kfold_cv(&d.x, d.labels.as_ref().unwrap(), 5, 0, &KnnConfig::default()).unwrap();
    assert_eq!(scores, vec![1.0; 5]);
}

#[test]
fn blobs_survive_factorization() {
    // Enough structure that every model's coefficients still separate the clusters.
    let d = synthetic_blobs::<f64>(6, 120, 3, 30.0, 5).unwrap().normalized();
    let labels = d.labels.clone().unwrap();
    for alg in Algorithm::ALL {
        let config = SolverConfig { seed: 1, ..SolverConfig::new(alg, 3) };
        let (pair, _) = fit(&d.x, &config).unwrap();
        let found = kmeans(&pair.h, 3, 0, 10).unwrap();
        assert!(nmi(&found, &labels).unwrap() > 0.9, "{alg}");
    }
}

#[test]
fn csv_write_load_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let x = Array2::from_shape_fn((3, 5), |(i, j)| (i as f64 + 0.1) / (j as f64 + 3.0) * 1e-3 + j as f64);
    let mut d = Dataset::new("rt", x, Some(LabelVector::new(vec![0, 1, 0, 2, 1]))).unwrap();
    d.class_names = Some(vec!["x".into(), "y".into(), "z".into()]);
    for orientation in [Orientation::SamplesAsRows, Orientation::SamplesAsCols] {
        let path = dir.path().join(format!("{orientation}.csv"));
        write_csv(&d, &path, orientation).unwrap();
        let label = match orientation {
            Orientation::SamplesAsRows => LabelColumn::Name("label".into()),
            Orientation::SamplesAsCols => LabelColumn::Index(3),
        };
        let back = load_csv::<f64>(&path, orientation, Some(&label)).unwrap();
        assert_eq!(back.x, d.x, "{orientation}");
        assert_eq!(back.labels, d.labels);
    }
}

#[test]
fn f32_loading_matches_f64() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    fs::write(&path, "0.5,0.25\n0.125,1\n").unwrap();
    let a = load_csv::<f32>(&path, Orientation::SamplesAsRows, None).unwrap();
    let b = load_csv::<f64>(&path, Orientation::SamplesAsRows, None).unwrap();
    assert_eq!(a.x.mapv(f64::from), b.x);
}

#[test]
fn min_class_size_protocol_drops_small_classes() {
    // Class sizes shaped like a hyperspectral scene: a few large, several tiny.
    let sizes = [1000usize, 450, 390, 389, 46, 20];
    let lab: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
    let n = lab.len();
    let d = Dataset::new("scene", Array2::<f64>::zeros((2, n)), Some(LabelVector::new(lab))).unwrap();
    let s = dspnmf::data::stratified_sample(&d, 0.2, 7, Some(390)).unwrap();
    assert_eq!(s.labels.unwrap().class_counts(), vec![200, 90, 78]);
}

#[test]
fn bundled_manifests_load() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    for (name, m, n, k) in [("wine", 13, 178, 3), ("breast_cancer", 30, 569, 2), ("digits", 64, 1797, 10)] {
        let manifest = DatasetManifest::load(format!("{root}/{name}.json")).unwrap();
        let d: Dataset<f64> = manifest.load_dataset().unwrap();
        assert_eq!((d.num_features(), d.num_samples(), d.num_classes()), (m, n, Some(k)), "{name}");
        let x = d.normalized().x;
        assert!(x.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
