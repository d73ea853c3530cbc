use adaptive_oversampling::bench::{
    run_with_workers, DataSource, DatasetConfig, ExperimentConfig, Metric, OutputConfig,
    OutputFormat, SamplerGrid,
};
use adaptive_oversampling::SamplerKind;

fn clover(name: &str, seed: u64) -> DatasetConfig {
    DatasetConfig {
        name: name.into(),
        source: DataSource::Clover {
            majority: 150,
            minority: 30,
            disturbance: 30,
            seed,
        },
    }
}

fn config(samplers: Vec<SamplerGrid>) -> ExperimentConfig {
    ExperimentConfig {
        datasets: vec![clover("c", 1)],
        samplers,
        folds: 3,
        seed: 9,
        metrics: Metric::all(),
        output: None,
        audit: true,
    }
}

fn grid(kind: SamplerKind, k: &[usize]) -> SamplerGrid {
    let mut g = SamplerGrid::new(kind);
    g.k = Some(k.to_vec());
    g
}

#[test]
fn one_row_per_sampler_with_every_metric() {
    let cfg = config(vec![
        SamplerGrid::new(SamplerKind::None),
        grid(SamplerKind::Smote, &[3]),
        grid(SamplerKind::Adasyn, &[3]),
    ]);
    let report = run_with_workers(&cfg, 1).unwrap();
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        for m in Metric::all() {
            let s = row.score(m).unwrap();
            assert_eq!(s.folds.len(), 3);
        }
    }
}

#[test]
fn selected_grid_point_has_best_mean_f1() {
    let cfg = config(vec![grid(SamplerKind::Smote, &[2, 3, 4])]);
    let best = run_with_workers(&cfg, 1).unwrap().rows[0]
        .score(Metric::F1)
        .unwrap()
        .mean;
    for k in [2, 3, 4] {
        let single = run_with_workers(&config(vec![grid(SamplerKind::Smote, &[k])]), 1).unwrap();
        let row = &single.rows[0];
        assert!(row.score(Metric::F1).unwrap().mean <= best);
    }
}

#[test]
fn missing_dataset_is_skipped_not_fatal() {
    let mut cfg = config(vec![SamplerGrid::new(SamplerKind::None)]);
    cfg.datasets.insert(
        0,
        DatasetConfig {
            name: "gone".into(),
            source: DataSource::Keel {
                path: "does/not/exist.dat".into(),
                positive_label: None,
            },
        },
    );
    let report = run_with_workers(&cfg, 1).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].dataset, "c");
}

#[test]
fn reports_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in [1, 1, 3, 3].into_iter().enumerate() {
        let mut cfg = config(vec![
            SamplerGrid::new(SamplerKind::Ros),
            grid(SamplerKind::BorderlineSmote2, &[3, 5]),
        ]);
        cfg.datasets.push(clover("d", 2));
        let path = dir.path().join(format!("r{i}.md"));
        cfg.output = Some(OutputConfig {
            path: path.clone(),
            format: OutputFormat::Markdown,
        });
        run_with_workers(&cfg, workers).unwrap();
        outputs.push(std::fs::read(path).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}
