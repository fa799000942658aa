use proptest::prelude::*;
use torus_mhd::diagnostics::{energy_report, OrderParams, ReportSettings};
use torus_mhd::io::{
    decode_checkpoint, encode_checkpoint, fmt_float, read_checkpoint, time_series_csv, time_series_header,
    write_checkpoint, RunConfig, Table, KEYS,
};
use torus_mhd::solver::{initial_state, InitialData, SolverConfig, TimeStep};
use torus_mhd::Error;

fn random_state(n: usize, seed: u64) -> torus_mhd::PerturbationState {
    let cfg = SolverConfig {
        n,
        init: InitialData::Random {
            amplitude: 1e-2,
            kmax: 2,
        },
        seed,
        ..SolverConfig::default()
    };
    let mut s = initial_state(&cfg).unwrap();
    s.time = 0.375;
    s
}

#[test]
fn checkpoint_roundtrip_is_exact() {
    let state = random_state(8, 3);
    let bytes = encode_checkpoint(&state);
    assert_eq!(&bytes[..4], b"MHDT");
    let back = decode_checkpoint(&bytes).unwrap();
    assert_eq!(back, state);
    assert_eq!(encode_checkpoint(&back), bytes);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.mhdt");
    write_checkpoint(&path, &state).unwrap();
    assert_eq!(read_checkpoint(&path).unwrap(), state);
}

#[test]
fn malformed_checkpoints_are_rejected() {
    let bytes = encode_checkpoint(&random_state(8, 1));
    let is_checkpoint_error = |b: &[u8]| matches!(decode_checkpoint(b), Err(Error::Checkpoint(_)));

    assert!(is_checkpoint_error(&bytes[..10]));
    assert!(is_checkpoint_error(&bytes[..bytes.len() - 1]));
    let mut longer = bytes.clone();
    longer.push(0);
    assert!(is_checkpoint_error(&longer));

    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(is_checkpoint_error(&magic));

    let mut version = bytes.clone();
    version[4] = 9;
    assert!(is_checkpoint_error(&version));

    let mut grid = bytes.clone();
    grid[8] = 7;
    assert!(decode_checkpoint(&grid).is_err());

    // first coefficient after the header: the k = (-K, -K, -K) mode of `a`
    let mut nan = bytes.clone();
    nan[20..28].copy_from_slice(&f64::NAN.to_le_bytes());
    assert!(is_checkpoint_error(&nan));

    // breaking conjugate symmetry of one coefficient
    let mut skew = bytes.clone();
    skew[20..28].copy_from_slice(&1.0f64.to_le_bytes());
    assert!(is_checkpoint_error(&skew));

    let missing = tempfile::tempdir().unwrap().path().join("absent.mhdt");
    assert!(matches!(read_checkpoint(&missing), Err(Error::Io { .. })));
}

#[test]
fn float_format_round_trips() {
    for x in [0.0, -0.0, 1.0, 0.1, 1e-5, 9.99e-6, 1e16, -3.25e20, f64::MIN_POSITIVE, 1.0 / 3.0] {
        assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
    }
    assert_eq!(fmt_float(0.25), "0.25");
    assert_eq!(fmt_float(1e-7), "1e-7");
    assert_eq!(fmt_float(f64::NAN), "NaN");
}

#[test]
fn default_config_echo_round_trips() {
    let cfg = RunConfig::default();
    let text = cfg.to_text();
    assert_eq!(text.lines().count(), KEYS.len());
    assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
}

#[test]
fn config_parsing_reads_every_kind_of_value() {
    let cfg = RunConfig::parse(
        "# a comment\n\
         grid.n = 16\n\
         time.dt = 0.002   # fixed\n\
         physics.w = 1, 0, 0\n\
         init.kind = magnetic-mode\n\
         init.k = 0 1 0\n\
         init.amplitude = 1e-4\n\
         diagnostics.orders = 2 3 4 5 1.5\n",
    )
    .unwrap();
    assert_eq!(cfg.solver.n, 16);
    assert_eq!(cfg.solver.dt, TimeStep::Fixed(0.002));
    assert_eq!(cfg.solver.w, [1.0, 0.0, 0.0]);
    assert_eq!(
        cfg.solver.init,
        InitialData::MagneticMode {
            k: [0, 1, 0],
            amplitude: 1e-4
        }
    );
    assert_eq!((cfg.orders.l(), cfg.orders.m(), cfg.orders.n(), cfg.orders.d()), (2, 3, 4, 5));
    assert_eq!(cfg.orders.r(), 1.5);
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn config_errors_name_the_line() {
    let cases = [
        "grid.n = 16\ngrid.n = 32\n",
        "grid.n\n",
        "bogus.key = 1\n",
        "grid.n = sixteen\n",
        "physics.w = 1 2\n",
        "init.kind = vortex\n",
    ];
    for text in cases {
        match RunConfig::parse(text) {
            Err(Error::Config(msg)) => assert!(msg.starts_with("line "), "{msg}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
    // a paper-regime request with desk-scale orders is refused
    assert!(RunConfig::parse("diagnostics.regime = paper\n").is_err());
    // whole-config validation: odd grids are invalid
    assert!(RunConfig::parse("grid.n = 15\n").is_err());
}

#[test]
fn overrides_are_key_value_pairs() {
    let mut cfg = RunConfig::default();
    cfg.apply_override("init.seed=42").unwrap();
    cfg.apply_override(" physics.nu = 0.5").unwrap();
    assert_eq!(cfg.solver.seed, 42);
    assert_eq!(cfg.solver.nu, 0.5);
    assert!(cfg.apply_override("init.seed").is_err());
}

#[test]
fn empty_time_series_is_header_only() {
    let orders = [0, 1, 3];
    let csv = time_series_csv(&[], &orders).to_csv();
    assert_eq!(csv, time_series_header(&orders).join(",") + "\n");
    assert!(csv.starts_with("t,E_phys,dissipation,E_0,E_1,E_3,E_N_cfg,X_tilde,cross1,cross2,cross3,X,"));
    assert!(csv.trim_end().ends_with("div_h_L2,rho_min,rho_max"));
}

#[test]
fn time_series_is_deterministic() {
    let solver = SolverConfig {
        n: 8,
        ..SolverConfig::default()
    };
    let settings = ReportSettings::new(&solver, OrderParams::desk());
    let render = || {
        let reports: Vec<_> = (0..3)
            .map(|seed| energy_report(&random_state(8, seed), &settings).unwrap())
            .collect();
        time_series_csv(&reports, &settings.energy_orders).to_csv()
    };
    let first = render();
    assert_eq!(first, render());
    assert_eq!(first.lines().count(), 4);
}

#[test]
fn csv_parse_reads_back_written_tables() {
    let mut t = Table::new(["t", "E"]);
    t.push(vec![0.0, 1.5]);
    t.push(vec![0.1, 1e-20]);
    let back = Table::parse(&t.to_csv()).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.column("E").unwrap(), vec![1.5, 1e-20]);
    assert!(back.column("missing").is_err());
    assert!(Table::parse("a,b\n1\n").is_err());
    assert!(Table::parse("a\nx\n").is_err());
    assert!(Table::parse("").is_err());
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(vec![8usize, 16, 32]),
        prop::option::of(1e-4f64..1e-2),
        0.1f64..20.0,
        0.05f64..3.0,
        prop::array::uniform3(-5.0f64..5.0),
        0u8..4,
        1e-6f64..0.05,
        prop::array::uniform3(-2i64..3),
        any::<u64>(),
        1usize..50,
        1u32..4,
    )
        .prop_map(|(n, dt, t_end, nu, w, kind, amplitude, k, seed, cadence, l)| {
            let mut cfg = RunConfig::default();
            cfg.solver.n = n;
            cfg.solver.dt = dt.map_or(TimeStep::Auto, TimeStep::Fixed);
            cfg.solver.t_end = t_end;
            cfg.solver.nu = nu;
            cfg.solver.w = w;
            let k = if k == [0; 3] { [1, 0, 0] } else { k };
            cfg.solver.init = match kind {
                0 => InitialData::Zero,
                1 => InitialData::Random { amplitude, kmax: 1 },
                2 => InitialData::MagneticMode { k, amplitude },
                _ => InitialData::AcousticMode { k, amplitude },
            };
            cfg.solver.seed = seed;
            cfg.solver.cadence = cadence;
            cfg.orders = OrderParams::relaxed(l, l + 1, l + 2, 3, 1.0).unwrap();
            cfg.delta_star = amplitude;
            cfg.cross_weights = [amplitude, 1.0, nu];
            cfg
        })
}

proptest! {
    #[test]
    fn config_text_round_trips(cfg in arb_config()) {
        let text = cfg.to_text();
        let mut back = RunConfig::default();
        for line in text.lines() {
            back.apply_override(line).unwrap();
        }
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}
