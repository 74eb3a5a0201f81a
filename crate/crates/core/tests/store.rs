use nhaas_core::recipes::Runner;
use nhaas_core::store::{curves_to_csv, samples_to_csv, ResultKey, Store};
use nhaas_core::{log_grid, run_sweep, Axis, ModelParams, SweepSpec};

fn spec(seed: u64, n: usize) -> SweepSpec {
    let mut s = SweepSpec::new(ModelParams::new(34, 0.5, 3.0, 0.0), Axis::Eps, log_grid(1e-3, 1e-1, 4), vec![34, 55]);
    s.n_samples = n;
    s.master_seed = seed;
    s
}

fn leftovers(store: &Store) -> usize {
    std::fs::read_dir(store.root())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".tmp-"))
        .count()
}

#[test]
fn cache_hit_is_bit_identical_to_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path());
    let s = spec(11, 6);
    store.put(&s, &run_sweep(&s).unwrap(), true).unwrap();
    let hit = store.get(&s).unwrap().unwrap();
    let fresh = run_sweep(&s).unwrap();
    assert_eq!(curves_to_csv(&hit.curves), curves_to_csv(&fresh.curves));
    assert_eq!(samples_to_csv(&hit.samples.unwrap()), samples_to_csv(&fresh.samples));
    assert_eq!(hit.manifest.total_samples, 2 * 4 * 6);
    assert_eq!(leftovers(&store), 0);
}

#[test]
fn seeds_get_their_own_entries() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path());
    for seed in [1, 2, 3] {
        let s = spec(seed, 3);
        let path = store.put(&s, &run_sweep(&s).unwrap(), false).unwrap();
        assert!(path.ends_with(&ResultKey::for_spec(&s).digest));
    }
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(entries, 3);
    assert!(store.get(&spec(4, 3)).unwrap().is_none());
}

#[test]
fn runner_reuses_and_tolerates_other_sample_counts() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path());
    let runner = Runner {
        store: Some(&store),
        workers: Some(2),
    };
    let quick = runner.sweep(&spec(7, 4)).unwrap();
    assert_eq!(runner.sweep(&spec(7, 4)).unwrap().curves, quick.curves);
    let full = runner.sweep(&spec(7, 8)).unwrap();
    assert_eq!(full.curves, run_sweep(&spec(7, 8)).unwrap().curves);
    assert_eq!(leftovers(&store), 0);
}
