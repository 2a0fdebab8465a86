use std::collections::BTreeMap;

use proptest::prelude::*;

use kfd::dataset::synth::{generate_synthetic, SynthSpec};
use kfd::metrics::*;
use kfd::selector::{local_extrema, KeyframeSet};

fn sorted_set(max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..max, 0..12).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn number_error_antisymmetric(a in 0usize..1000, b in 0usize..1000) {
        prop_assert_eq!(number_error(a, b), -number_error(b, a));
        prop_assert_eq!(number_error(a, b), a as i64 - b as i64);
    }

    #[test]
    fn location_error_symmetric_for_equal_counts(pairs in prop::collection::vec((0usize..500, 0usize..500), 1..12)) {
        let mut p: Vec<usize> = pairs.iter().map(|x| x.0).collect();
        let mut g: Vec<usize> = pairs.iter().map(|x| x.1).collect();
        p.sort_unstable();
        g.sort_unstable();
        prop_assert_eq!(location_error(&p, &g).unwrap(), location_error(&g, &p).unwrap());
    }

    #[test]
    fn location_error_zero_iff_prefixes_agree(p in sorted_set(300), g in sorted_set(300)) {
        prop_assume!(!(p.is_empty() && g.is_empty()));
        let e = location_error(&p, &g).unwrap();
        prop_assert!(e >= 0.0);
        let k = p.len().min(g.len());
        if k == 0 {
            prop_assert!(e.is_infinite());
        } else {
            prop_assert_eq!(e == 0.0, p[..k] == g[..k]);
        }
    }
}

#[test]
fn hand_fixtures() {
    assert_eq!(number_error(5, 3), 2);
    assert_eq!(number_error(3, 3), 0);
    assert_eq!(number_error(0, 4), -4);
    assert_eq!(location_error(&[11, 19], &[10, 20]).unwrap(), 1.0);
    assert_eq!(location_error(&[4, 9], &[4, 9]).unwrap(), 0.0);
    assert_eq!(location_error(&[12, 29], &[10, 20, 30]).unwrap(), 5.5);
}

#[test]
fn perfect_detections_score_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        num_classes: 4,
        videos_per_class: 3,
        seed: 8,
        ..SynthSpec::default()
    };
    let m = generate_synthetic(&spec, dir.path()).unwrap();
    let det: BTreeMap<String, KeyframeSet> = m
        .entries()
        .iter()
        .map(|r| {
            let ext = local_extrema(r.gt_scores.as_ref().unwrap()).unwrap();
            let set = KeyframeSet {
                video_id: r.video_id.clone(),
                indices: ext.iter().map(|e| e.index).collect(),
                kinds: ext.iter().map(|e| e.kind).collect(),
            };
            (r.video_id.clone(), set)
        })
        .collect();
    let rep = evaluate(&det, &m).unwrap();
    assert_eq!(rep.per_video.len(), m.len());
    assert!(rep
        .per_video
        .iter()
        .all(|v| v.number_error == 0 && v.location_error == Some(0.0)));
    assert_eq!(rep.overall.mean_abs_number_error, 0.0);
    assert_eq!(rep.overall.mean_location_error, Some(0.0));
    assert_eq!(rep.overall.unmatched, 0);
    let text = format_report(&rep);
    assert!(text
        .lines()
        .any(|l| l.starts_with("Average accuracy") && l.ends_with("±0.00  ±0.000")));
    assert_eq!(text, format_report(&rep));
}
