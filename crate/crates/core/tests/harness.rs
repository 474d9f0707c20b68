use stress_strength::harness::{run_table, ExperimentConfig};

// Takes several minutes on one core: 25 cells of 500 replications, each
// with a full Prior 2 chain.
#[test]
#[ignore]
fn informative_prior_beats_mle_in_most_cells() {
    let mut cfg = ExperimentConfig::from_toml(include_str!("../data/table1.cfg")).unwrap();
    cfg.run_bootstrap = false;
    cfg.priors.retain(|p| p.name == "prior2");
    let results = run_table(&cfg, None).unwrap();
    assert_eq!(results.len(), 25);
    let wins = results
        .iter()
        .filter(|c| c.estimator("Bayes-prior2").unwrap().mse <= c.estimator("MLE").unwrap().mse)
        .count();
    println!("prior 2 MSE at or below MLE in {wins} of 25 cells");
    assert!(wins >= 20, "only {wins} of 25 cells");
}
