use std::fs;
use std::path::{Path, PathBuf};

use cvkan::datasets::{
    gen_circuit, gen_holography, gen_knot_surrogate, gen_symbolic, load_knots, load_knots_with, split_features,
    write_knot_csv, SymbolicFn, Targets, KNOT_SCHEMA, SURROGATE_CLASSES,
};
use cvkan::{ComplexScalar, GridSpec};

fn regression(t: &Targets) -> &cvkan::ComplexBatch {
    match t {
        Targets::Regression(b) => b,
        Targets::Classification { .. } => panic!("expected regression targets"),
    }
}

fn surrogate_csv(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    write_knot_csv(&path, &gen_knot_surrogate(n, seed)).unwrap();
    path
}

/// Rewrites one file with `edit` applied to every line (header is line 0).
fn edited(src: &Path, dst: &Path, edit: impl Fn(usize, &str) -> String) -> PathBuf {
    let text = fs::read_to_string(src).unwrap();
    let out: Vec<String> = text.lines().enumerate().map(|(i, l)| edit(i, l)).collect();
    fs::write(dst, out.join("\n")).unwrap();
    dst.to_path_buf()
}

#[test]
fn square_targets_in_split_real_form() {
    let grid = GridSpec::default();
    let d = gen_symbolic(SymbolicFn::F1, 500, 1, &grid).unwrap();
    let t = regression(&d.targets);
    for s in 0..d.len() {
        let z = d.features.get(s, 0);
        assert!(z.re >= grid.lo && z.re <= grid.hi && z.im >= grid.lo && z.im <= grid.hi);
        let want = ComplexScalar::new(z.re * z.re - z.im * z.im, 2.0 * z.re * z.im);
        assert!((t.get(s, 0) - want).norm() < 1e-12);
    }
    assert_eq!(gen_symbolic(SymbolicFn::F1, 500, 1, &grid).unwrap().features, d.features);
    assert_ne!(gen_symbolic(SymbolicFn::F1, 500, 2, &grid).unwrap().features, d.features);
}

#[test]
fn physical_generators() {
    let grid = GridSpec::default();
    let h = gen_holography(200, 4, &grid).unwrap();
    let t = regression(&h.targets);
    for s in 0..h.len() {
        let r = h.features.row(s);
        let want = r[0] * (r[1] + r[2]).norm_sqr();
        assert!((t.get(s, 0) - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }

    let gen = gen_circuit(300, 4, &grid).unwrap();
    let d = gen.dataset;
    assert_eq!(
        d.feature_names(),
        ["U_G", "R_G", "R_L", "L", "C", "omega"].map(String::from).to_vec()
    );
    for s in 0..d.len() {
        let r = d.features.row(s);
        assert!(r[1..].iter().all(|z| z.im == 0.0));
        let y = regression(&d.targets).get(s, 0);
        assert!(y.norm() <= 1e6);
        // the load voltage satisfies U_G = U·(1 + R_G/R_L − ω²LC + iω(L/R_L + R_G·C))
        let (rg, rl, l, c, w) = (r[1].re, r[2].re, r[3].re, r[4].re, r[5].re);
        let back = y * ComplexScalar::new(1.0 + rg / rl - w * w * l * c, w * (l / rl + rg * c));
        assert!((back - r[0]).norm() <= 1e-9 * (1.0 + y.norm()));
    }
    // real features occupy one split column each
    assert_eq!(split_features(&d.features, &d.feature_meta).unwrap().cols(), 7);
}

#[test]
fn knot_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = surrogate_csv(dir.path(), "knots.csv", 700, 9);
    let grid = GridSpec::default();
    let d = load_knots(&path, &grid).unwrap();
    assert_eq!(d.len(), 700);
    assert_eq!(d.n_features(), KNOT_SCHEMA.real.len() + KNOT_SCHEMA.complex.len());
    let Targets::Classification { classes, labels } = &d.targets else { panic!() };
    assert_eq!(*classes, SURROGATE_CLASSES);
    assert!(labels.iter().all(|&l| l < SURROGATE_CLASSES));
    for m in &d.feature_meta {
        let expect_real = KNOT_SCHEMA.real.contains(&m.name.as_str());
        assert_eq!(m.originally_real, expect_real, "{}", m.name);
    }
    for z in d.features.data() {
        assert!(z.re >= grid.lo && z.re <= grid.hi && z.im >= grid.lo && z.im <= grid.hi);
    }

    let enc = d.encoding.clone().unwrap();
    let again = load_knots_with(&path, &enc).unwrap();
    assert_eq!(again.features, d.features);
}

#[test]
fn knot_loader_rejects_malformed_tables() {
    let dir = tempfile::tempdir().unwrap();
    let good = surrogate_csv(dir.path(), "good.csv", 100, 1);
    let grid = GridSpec::default();

    let no_label = edited(&good, &dir.path().join("a.csv"), |_, l| {
        l.rsplit_once(',').unwrap().0.to_string()
    });
    assert!(load_knots(&no_label, &grid).is_err());

    let missing_column = edited(&good, &dir.path().join("b.csv"), |_, l| {
        l.split_once(',').unwrap().1.to_string()
    });
    assert!(load_knots(&missing_column, &grid).is_err());

    let text_cell = edited(&good, &dir.path().join("c.csv"), |i, l| {
        if i == 5 {
            format!("abc{}", &l[l.find(',').unwrap()..])
        } else {
            l.to_string()
        }
    });
    let err = load_knots(&text_cell, &grid).unwrap_err().to_string();
    assert!(err.contains("line 6"), "{err}");

    let short_row = edited(&good, &dir.path().join("d.csv"), |i, l| {
        if i == 3 {
            l.split_once(',').unwrap().1.to_string()
        } else {
            l.to_string()
        }
    });
    assert!(load_knots(&short_row, &grid).is_err());

    let fractional = edited(&good, &dir.path().join("e.csv"), |i, l| {
        if i == 2 {
            format!("{},0.5", l.rsplit_once(',').unwrap().0)
        } else {
            l.to_string()
        }
    });
    assert!(load_knots(&fractional, &grid).is_err());

    let header_only = edited(&good, &dir.path().join("f.csv"), |_, l| l.to_string());
    fs::write(&header_only, fs::read_to_string(&good).unwrap().lines().next().unwrap()).unwrap();
    assert!(load_knots(&header_only, &grid).is_err());

    // a signature never seen when the encoding was fitted
    let enc = load_knots(&good, &grid).unwrap().encoding.unwrap();
    let unseen = edited(&good, &dir.path().join("g.csv"), |i, l| {
        if i == 1 {
            format!("{},98", l.rsplit_once(',').unwrap().0)
        } else {
            l.to_string()
        }
    });
    let err = load_knots_with(&unseen, &enc).unwrap_err().to_string();
    assert!(err.contains("signature 98"), "{err}");
    assert!(load_knots(&unseen, &grid).is_ok());
}

#[test]
fn constant_channels_map_to_the_grid_center() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = gen_knot_surrogate(50, 2);
    for row in &mut table.rows {
        row[0] = 3.25;
    }
    let path = dir.path().join("flat.csv");
    write_knot_csv(&path, &table).unwrap();
    let grid = GridSpec::new(-1.0, 3.0, 5).unwrap();
    let d = load_knots(&path, &grid).unwrap();
    assert!(d.features.column(0).iter().all(|z| *z == ComplexScalar::new(1.0, 0.0)));
}
