use lancer_cli::commands::sweep::{cells, parse_axis};
use lancer_cli::config::{Overrides, RunConfig};
use proptest::prelude::*;

const FAMILIES: [(&str, &str); 5] = [
    ("shortest_path_lp", "lancer_po"),
    ("multi_knapsack", "two_stage"),
    ("stochastic_sp", "lancer_zero"),
    ("portfolio_qp", "lancer_po"),
    ("portfolio_minlp", "lancer_prior"),
];

proptest! {
    #[test]
    fn resolved_configs_round_trip_with_equal_hash(
        fam in 0usize..5,
        seed in any::<u64>(),
        iters in 1usize..50,
        lr in 1e-5f64..1.0,
    ) {
        let (family, mode) = FAMILIES[fam];
        let ov = Overrides {
            family: Some(family.into()),
            mode: Some(mode.into()),
            seed: Some(seed),
            sets: vec![format!("lancer.outer_iters={iters}"), format!("lancer.lr_w={lr}")],
            ..Default::default()
        };
        let cfg = RunConfig::resolve(None, &ov).unwrap();
        prop_assert_eq!(cfg.lancer.seed, seed);
        prop_assert_eq!(cfg.lancer.lr_w, lr);
        let back = RunConfig::resolve(Some(&cfg.to_json()), &Overrides::default()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn grid_size_is_the_product_of_axis_lengths(a in 1usize..5, b in 1usize..5) {
        let va: Vec<String> = (0..a).map(|i| i.to_string()).collect();
        let vb: Vec<String> = (0..b).map(|i| format!("{}", 0.5 + i as f64)).collect();
        let axes = [
            parse_axis(&format!("lancer.outer_iters={}", va.join(";"))).unwrap(),
            parse_axis(&format!("lancer.lr_w={}", vb.join(";"))).unwrap(),
        ];
        let cs = cells("custom", &axes).unwrap();
        prop_assert_eq!(cs.len(), a * b);
        for (i, c) in cs.iter().enumerate() {
            prop_assert_eq!(c.index, i);
            prop_assert_eq!(&c.sets[0], &format!("lancer.outer_iters={}", i / b));
        }
    }
}
