use evidence_testbed::blockworld::{Color, ContingencyTable, PriorMode, Shape};
use evidence_testbed::RandomStream;

/// Upper 0.1% point of the chi-square distribution with 7 degrees of freedom.
const CHI2_7_999: f64 = 24.322;

#[test]
fn block_frequencies_match_the_table() {
    let table = ContingencyTable::default_table();
    let mut stream = RandomStream::new(11);
    let n = 324_000;
    let mut observed = [[0u64; 3]; 3];
    for _ in 0..n {
        let (s, c) = table.sample_block(&mut stream);
        observed[s.index()][c.index()] += 1;
    }
    let circle_green = observed[Shape::Circle.index()][Color::Green.index()] as f64 / n as f64;
    assert!((circle_green - 96.0 / 324.0).abs() <= 0.005, "{circle_green}");
    assert_eq!(observed[Shape::Square.index()][Color::Green.index()], 0);

    let counts = table.counts();
    let mut chi2 = 0.0;
    for s in 0..3 {
        for c in 0..3 {
            if counts[s][c] == 0 {
                continue;
            }
            let expected = n as f64 * counts[s][c] as f64 / 324.0;
            chi2 += (observed[s][c] as f64 - expected).powi(2) / expected;
        }
    }
    assert!(chi2 < CHI2_7_999, "chi-square {chi2}");
}

#[test]
fn same_seed_same_session() {
    let table = ContingencyTable::default_table();
    let a = table.sample_session(500, &mut RandomStream::new(5));
    let b = table.sample_session(500, &mut RandomStream::new(5));
    let c = table.sample_session(500, &mut RandomStream::new(6));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.first().map(|t| t.index), Some(1));
}

#[test]
fn red_bags_follow_the_red_column() {
    let table = ContingencyTable::default_table();
    let mut stream = RandomStream::new(12);
    let mut shapes = [0u64; 3];
    let mut green_bags = 0;
    while shapes.iter().sum::<u64>() < 100_000 {
        let bag = table.sample_bag(10, PriorMode::Marginal, &mut stream).unwrap();
        match bag.true_color {
            Color::Red => {
                for s in bag.shapes {
                    shapes[s.index()] += 1;
                }
            }
            Color::Green => {
                green_bags += 1;
                assert!(!bag.shapes.contains(&Shape::Square));
            }
            Color::Gold => {}
        }
    }
    assert!(green_bags > 0);
    let total = shapes.iter().sum::<u64>() as f64;
    for (s, expected) in [0.48, 0.16, 0.36].into_iter().enumerate() {
        let f = shapes[s] as f64 / total;
        assert!((f - expected).abs() <= 0.01, "{}: {f}", Shape::ALL[s]);
    }
}

#[test]
fn bag_color_priors() {
    let table = ContingencyTable::default_table();
    let n = 100_000;
    for (mode, expected) in [
        (PriorMode::Uniform, [1.0 / 3.0; 3]),
        (PriorMode::Marginal, [132.0 / 324.0, 100.0 / 324.0, 92.0 / 324.0]),
    ] {
        let mut stream = RandomStream::new(13);
        let mut colors = [0u64; 3];
        for _ in 0..n {
            colors[table.sample_bag(1, mode, &mut stream).unwrap().true_color.index()] += 1;
        }
        for c in 0..3 {
            let f = colors[c] as f64 / n as f64;
            assert!((f - expected[c]).abs() <= 0.01, "{mode:?} {}: {f}", Color::ALL[c]);
        }
    }
}

#[test]
fn empty_bag_is_rejected() {
    let table = ContingencyTable::default_table();
    assert!(table.sample_bag(0, PriorMode::Marginal, &mut RandomStream::new(1)).is_err());
}

#[test]
fn derived_streams_are_independent_of_sibling_use() {
    let root = RandomStream::new(99);
    let mut first = root.derive_path(&[3, 7]);
    let _ = root.derive(3).derive(8).unit();
    let mut again = root.derive_path(&[3, 7]);
    let a: Vec<u64> = (0..10).map(|_| first.below(1000)).collect();
    let b: Vec<u64> = (0..10).map(|_| again.below(1000)).collect();
    assert_eq!(a, b);
}
