use d2d_core::dp::{dp_solve, dp_solve_with, DpOptions};
use d2d_core::exhaustive::{exhaustive_solve, EnumOptions};
use d2d_core::model::{check_feasible, Counts};
use d2d_core::scenario_gen::{generate, GenConfig};

fn small_cfg(seed: u64, n_d: usize) -> GenConfig {
    GenConfig { counts: Counts { n_uc: 1, n_dc: 1, n_d, m_u: 2, m_d: 2 }, master_seed: seed, ..GenConfig::default() }
}

#[test]
fn dp_matches_exhaustive_on_random_instances() {
    for seed in 0..60u64 {
        let n_d = 1 + (seed % 3) as usize;
        let s = generate(&small_cfg(seed, n_d)).unwrap();
        let dp = dp_solve(&s).unwrap();
        let ex = exhaustive_solve(&s, &EnumOptions::default()).unwrap();
        assert_eq!(dp.feasible, ex.feasible, "seed {seed}");
        if let (Some(a), Some(b)) = (dp.objective, ex.objective) {
            assert!((a - b).abs() <= 1e-9, "seed {seed}: dp {a} exhaustive {b}");
        }
        assert!(check_feasible(&s, &dp.assignment).is_ok() || !dp.feasible);
        let forced = dp_solve_with(&s, &DpOptions { force_d2d_mode_only: true, ..DpOptions::default() }).unwrap();
        let ex_forced =
            exhaustive_solve(&s, &EnumOptions { force_d2d_mode_only: true, ..EnumOptions::default() }).unwrap();
        if let (Some(a), Some(b)) = (forced.objective, ex_forced.objective) {
            assert!((a - b).abs() <= 1e-9, "seed {seed}: forced dp {a} exhaustive {b}");
        }
    }
}
