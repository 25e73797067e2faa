use std::path::{Path, PathBuf};

use hlsmm::data::{self, CsvOptions};
use hlsmm::synthetic::{generate, SyntheticSpec};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_synthetic_matches_the_generator() {
    let bundled = data::load_smm1(data_dir().join("synthetic.smm1")).unwrap();
    let (fresh, _) = generate(&SyntheticSpec::default()).unwrap();
    assert_eq!(bundled.samples(), fresh.samples());
}

#[test]
fn wdbc_counts_and_split() {
    let d = data::load_csv(data_dir().join("wdbc.csv"), &CsvOptions::default()).unwrap();
    assert_eq!(d.len(), 569);
    assert_eq!(d.shape(), (1, 30));
    assert_eq!(d.class_counts(), (357, 212));
    let (tr, te) = data::split(&d, 0.7, true, 1).unwrap();
    // round(0.7 · 357) = 250 and round(0.7 · 212) = 148.
    assert_eq!(tr.class_counts(), (250, 148));
    assert_eq!(te.class_counts(), (107, 64));
}

#[test]
fn ionosphere_counts_and_padding() {
    let opts = CsvOptions {
        pad_to: Some(36),
        reshape: Some((6, 6)),
        ..CsvOptions::default()
    };
    let d = data::load_csv(data_dir().join("ionosphere.csv"), &opts).unwrap();
    assert_eq!(d.len(), 351);
    assert_eq!(d.class_counts(), (225, 126));
    for s in d.samples() {
        assert_eq!((s.x[(5, 4)], s.x[(5, 5)]), (0.0, 0.0));
    }
}
