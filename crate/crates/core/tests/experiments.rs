use std::f64::consts::PI;

use proptest::prelude::*;
use tcm_core::experiments::{
    amplitude_sweep, make_initial_data, Classification, DataKind, InitialDataSpec, Protocol,
};
use tcm_core::model::{RunOptions, Stepping};
use tcm_core::Grid;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rescaling_hits_the_target(
        kind in prop::sample::select(vec![DataKind::TaylorGreen, DataKind::RandomBand, DataKind::SingleMode]),
        target in 1e-6f64..1e3,
        seed in any::<u64>(),
        l in 1.0f64..10.0,
    ) {
        let g = Grid::new(8, l).unwrap();
        let spec = InitialDataSpec {
            kind,
            target_h_half: Some(target),
            seed,
            band: 2,
            ..Default::default()
        };
        let d = make_initial_data(&g, &spec).unwrap();
        let measured = d.state.triple_norm_sq(0.5).sqrt();
        prop_assert!((measured - target).abs() <= 1e-12 * target, "{measured} vs {target}");
        prop_assert!(d.state.div_u_norm() <= 1e-12 * (1.0 + target));
    }
}

#[test]
fn single_mode_size_matches_closed_form() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let spec = InitialDataSpec {
        kind: DataKind::SingleMode,
        amplitude: 2.0,
        target_h_half: None,
        ..Default::default()
    };
    let d = make_initial_data(&g, &spec).unwrap();
    let expect = 2.0 * ((2.0 * PI).powi(3) / 2.0).sqrt();
    assert!((d.h_half - expect).abs() <= 1e-12 * expect);
}

#[test]
fn sweep_is_deterministic_and_small_data_decays() {
    let p = Protocol {
        n: 16,
        run: RunOptions {
            horizon: 0.3,
            sample_every: 0.05,
            stepping: Stepping::Fixed { dt: 1e-2 },
            ..Default::default()
        },
        ..Default::default()
    };
    let a = amplitude_sweep(&p, &[0.0, 1e-3, 1e-2]);
    let b = amplitude_sweep(&p, &[0.0, 1e-3, 1e-2]);
    assert_eq!(a, b);
    for row in &a.rows {
        assert_eq!(row.classification, Classification::Decay, "{row:?}");
        assert!(row.status.is_none());
        assert!(row.laplacian_integral.is_finite());
    }
    assert_eq!(a.rows[0].pi, 0.3);
    assert!(a.rows[2].r > a.rows[1].r);
}
