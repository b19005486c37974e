use proptest::prelude::*;
use rcdstab_core::data::{
    make_synthetic, parse_libsvm_str, Dataset, Example, Generator, Provenance, SyntheticSpec,
};

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..6, 1usize..12).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(prop::collection::vec(-1e6f64..1e6, d), n),
            prop::collection::vec(prop::sample::select(vec![-1.0, 1.0, 0.5, 3.25]), n),
        )
            .prop_map(move |(rows, labels)| {
                let examples = rows
                    .into_iter()
                    .zip(labels)
                    .map(|(x, y)| Example::new(x, y))
                    .collect();
                Dataset::new(examples, d, Provenance::Manual).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip(s in dataset()) {
        let back = parse_libsvm_str(&s.to_libsvm(), Some(s.dim())).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn neighbor_differs_only_at_index(s in dataset(), pick in any::<prop::sample::Index>(), y in -2.0f64..2.0) {
        let i = pick.index(s.len());
        let z = Example::new(vec![0.25; s.dim()], y);
        let t = s.make_neighbor(i, &z).unwrap();
        prop_assert_eq!(t.len(), s.len());
        for k in 0..s.len() {
            if k == i {
                prop_assert_eq!(t.example(k), z.clone());
            } else {
                prop_assert_eq!(t.example(k), s.example(k));
            }
        }
    }

    #[test]
    fn split_partitions_rows(n in 2usize..60, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let s = make_synthetic(&SyntheticSpec::new(n, 3, Generator::GaussianLinearRegression), 7).unwrap();
        if let Ok((train, test)) = s.split(frac, seed) {
            prop_assert_eq!(train.len() + test.len(), n);
            let mut rows: Vec<Vec<u64>> = train.iter().chain(test.iter())
                .map(|(x, y)| x.iter().chain([&y]).map(|v| v.to_bits()).collect())
                .collect();
            let mut orig: Vec<Vec<u64>> = s.iter()
                .map(|(x, y)| x.iter().chain([&y]).map(|v| v.to_bits()).collect())
                .collect();
            rows.sort();
            orig.sort();
            prop_assert_eq!(rows, orig);
        }
    }

    #[test]
    fn synthetic_is_seed_deterministic(seed in any::<u64>(), n in 1usize..30, d in 1usize..6) {
        let spec = SyntheticSpec::new(n, d, Generator::GaussianLogistic);
        let a = make_synthetic(&spec, seed).unwrap();
        let b = make_synthetic(&spec, seed).unwrap();
        prop_assert_eq!(a.features(), b.features());
        prop_assert_eq!(a.labels(), b.labels());
        prop_assert!(a.labels().iter().all(|&y| y == 1.0 || y == -1.0));
    }
}

#[test]
fn malformed_lines_report_line_numbers() {
    let err = parse_libsvm_str("1 1:0.5\n-1 2:1 1:3\n", None).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
    assert!(parse_libsvm_str("", None).is_err());
    assert!(parse_libsvm_str("1 0:1\n", None).is_err());
}
