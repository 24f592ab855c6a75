use std::f64::consts::PI;

use proptest::prelude::*;
use tcm_core::diagnostics::{BmoMode, DiagnosticsRecord};
use tcm_core::experiments::{make_initial_data, DataKind, InitialDataSpec};
use tcm_core::io::{
    decode_checkpoint, encode_checkpoint, load_config, series_to_csv, split_columns,
    write_checkpoint_with_progress, read_checkpoint_full, RunConfig, SERIES_COLUMNS,
};
use tcm_core::model::{run, run_with, ModelParams, RunOptions, Stepping};
use tcm_core::{Grid, SimState};

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(vec![8usize, 16, 32]),
        0.5f64..20.0,
        prop::array::uniform3(1e-3f64..5.0),
        prop::array::uniform2(0.0f64..3.0),
        prop::array::uniform2(1.0f64..6.0),
        any::<bool>(),
        (1e-5f64..1e-2, 0.05f64..1.0, 0.0f64..3.0, 1e-3f64..0.5),
        (
            prop::sample::select(vec![
                DataKind::TaylorGreen,
                DataKind::RandomBand,
                DataKind::SingleMode,
            ]),
            prop::option::of(0.0f64..1.0),
            0u64..1_000_000,
            -3.0f64..0.0,
        ),
        (any::<bool>(), 1e-3f64..10.0, 1.01f64..100.0),
    )
        .prop_map(
            |(n, l, [nu, eta, mu], [s1, s2], [a, b], adaptive, integ, data, diag)| {
                let mut c = RunConfig {
                    n,
                    box_length: l,
                    ..RunConfig::default()
                };
                c.params = ModelParams::new(nu, eta, mu, s1, s2, a, b).unwrap();
                let (dt, safety, horizon, every) = integ;
                c.run.stepping = if adaptive {
                    Stepping::Adaptive {
                        safety,
                        dt_max: dt * 10.0,
                    }
                } else {
                    Stepping::Fixed { dt }
                };
                c.run.horizon = horizon;
                c.run.sample_every = every;
                let (kind, target, seed, slope) = data;
                c.data = InitialDataSpec {
                    kind,
                    target_h_half: target,
                    seed,
                    band: n / 4,
                    slope,
                    amplitude: 0.5,
                };
                let (dyadic, c_pi, growth) = diag;
                c.run.diagnostics.bmo_mode = if dyadic {
                    BmoMode::Dyadic
                } else {
                    BmoMode::Proxy
                };
                c.run.diagnostics.c_pi = c_pi;
                c.growth_factor = growth;
                c
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_is_a_fixed_point(c in config_strategy()) {
        prop_assert!(c.validate().is_ok());
        let text = c.to_toml();
        let d = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&c, &d);
        prop_assert_eq!(text, d.to_toml());
    }

    #[test]
    fn csv_floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let s = tcm_core::io::fmt_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn checkpoint_round_trip_is_bit_exact(seed in any::<u64>(), time in -1e3f64..1e3) {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let spec = InitialDataSpec {
            kind: DataKind::RandomBand,
            seed,
            band: 2,
            ..Default::default()
        };
        let mut s = make_initial_data(&g, &spec).unwrap().state;
        s.time = time;
        let p = ModelParams::default();
        let bytes = encode_checkpoint(&s, &p, None);
        let back = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(encode_checkpoint(&back.state, &back.params, None), bytes);
    }
}

#[test]
fn config_file_with_defaults_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[grid]\nn = 16\n").unwrap();
    let c = load_config(&path).unwrap();
    assert_eq!(c.n, 16);
    assert_eq!(c.params, ModelParams::default());
    assert!(load_config(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn zero_data_series_has_linear_pi() {
    let g = Grid::new(8, 2.0 * PI).unwrap();
    let opts = RunOptions {
        horizon: 0.5,
        sample_every: 0.1,
        stepping: Stepping::Fixed { dt: 0.05 },
        ..Default::default()
    };
    let out = run(&SimState::zeros(&g), &ModelParams::default(), &opts).unwrap();
    let cols = split_columns(&series_to_csv(&out.series, BmoMode::Proxy)).unwrap();
    assert_eq!(cols.names, SERIES_COLUMNS);
    let t = cols.column("time").unwrap();
    let pi = cols.column("pi").unwrap();
    assert_eq!(t.len(), 6);
    for (a, b) in t.iter().zip(&pi) {
        assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
    }
    for name in SERIES_COLUMNS.iter().filter(|c| c.starts_with("l2") || c.contains("triple")) {
        assert!(cols.column(name).unwrap().iter().all(|&x| x == 0.0));
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

fn records_close(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> bool {
    let norms = |r: &DiagnosticsRecord| {
        [r.l2, r.h_half, r.h1, r.h32, r.h2]
            .iter()
            .flat_map(|s| [s.u, s.v, s.theta, s.triple])
            .chain([
                r.time,
                r.lp_alpha_u,
                r.lp_beta_v,
                r.pi,
                r.pi_tilde,
            ])
            .collect::<Vec<f64>>()
    };
    let residuals = |r: &DiagnosticsRecord| [r.energy_residual, r.damping_res_u, r.damping_res_v];
    norms(a).iter().zip(norms(b)).all(|(x, y)| close(*x, y))
        && residuals(a)
            .iter()
            .zip(residuals(b))
            .all(|(x, y)| (x - y).abs() <= 1e-12)
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let spec = InitialDataSpec {
        target_h_half: Some(0.5),
        ..Default::default()
    };
    let s0 = make_initial_data(&g, &spec).unwrap().state;
    let p = ModelParams::default();
    let opts = |horizon| RunOptions {
        horizon,
        sample_every: 0.05,
        stepping: Stepping::Fixed { dt: 1e-2 },
        ..Default::default()
    };
    let full = run(&s0, &p, &opts(0.3)).unwrap();
    let first = run(&s0, &p, &opts(0.15)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.tcms");
    write_checkpoint_with_progress(&first.state, &p, &first.progress, &path).unwrap();
    let ck = read_checkpoint_full(&path).unwrap();
    assert_eq!(ck.progress.as_ref(), Some(&first.progress));
    let second = run_with(&ck.state, &ck.params, &opts(0.3), ck.progress, |_| {
        std::ops::ControlFlow::Continue(())
    })
    .unwrap();

    assert!(full.abort.is_none() && second.abort.is_none());
    assert_eq!(first.series.len(), 4);
    assert_eq!(second.series.len(), 3);
    let stitched: Vec<&DiagnosticsRecord> = first.series.iter().chain(&second.series).collect();
    assert_eq!(stitched.len(), full.series.len());
    for (a, b) in stitched.iter().zip(&full.series) {
        assert!(records_close(a, b), "t = {}: {a:?}\nvs {b:?}", b.time);
    }
}
