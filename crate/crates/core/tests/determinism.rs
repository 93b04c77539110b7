use gbl_core::experiments::{run, Experiment, ExperimentConfig};

fn report_json(config: &ExperimentConfig, threads: usize) -> serde_json::Value {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let report = pool.install(|| run(config)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    for experiment in Experiment::ALL {
        let config = ExperimentConfig {
            seed: 11,
            samples: 60,
            ..ExperimentConfig::new(experiment)
        };
        let one = report_json(&config, 1);
        assert_eq!(one, report_json(&config, 3), "{}", experiment.name());
        assert_eq!(one, report_json(&config, 8), "{}", experiment.name());
    }
}
