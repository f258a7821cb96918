//! Whole-pipeline behavior on the synthetic corpus.

mod common;

use spellkit_core::evalharness::check_lines;
use spellkit_core::{AcceptedCorrection, CheckOptions};

use common::world;

#[test]
fn batch_equals_per_sentence() {
    let w = world();
    let opts = CheckOptions::default();
    let text = w.corrupted.join(". ");
    let batch = w.engine.run_pipeline(&text, &opts).unwrap();
    assert_eq!(batch.sentences.len(), w.corrupted.len());
    let single: Vec<_> = w
        .corrupted
        .iter()
        .enumerate()
        .map(|(i, l)| w.engine.check_line(l, i, &opts).unwrap().unwrap())
        .collect();
    let parallel = check_lines(&w.engine, &w.corrupted, &opts, 4).unwrap();
    for ((b, s), p) in batch.sentences.iter().zip(&single).zip(&parallel) {
        assert_eq!(b.detections, s.detections);
        assert_eq!(b.corrections, s.corrections);
        assert_eq!(b.corrected_text, s.corrected_text);
        assert_eq!(Some(s), p.as_ref());
    }
}

#[test]
fn applying_every_suggestion_reproduces_corrected_text() {
    let w = world();
    let text = w.corrupted[..200].join(". ");
    let resp = w
        .engine
        .run_pipeline(&text, &CheckOptions::default())
        .unwrap();
    let accepted: Vec<AcceptedCorrection> = resp
        .sentences
        .iter()
        .flat_map(|s| {
            s.corrections.iter().filter_map(move |c| {
                c.suggested.clone().map(|r| AcceptedCorrection {
                    sentence_id: s.sentence_id,
                    token_index: c.token_index,
                    replacement: r,
                })
            })
        })
        .collect();
    assert!(!accepted.is_empty());
    assert_eq!(
        w.engine.apply(&text, &accepted).unwrap(),
        resp.corrected_text
    );
    assert_eq!(
        w.engine.apply(&text, &[]).unwrap(),
        w.engine.normalizer().normalize(&text).content
    );
}

#[test]
fn clean_sentences_raise_no_nonword_flags() {
    let w = world();
    let reports = check_lines(&w.engine, &w.clean[..300], &CheckOptions::default(), 4).unwrap();
    let nonword = reports
        .iter()
        .flatten()
        .flat_map(|r| &r.detections)
        .filter(|d| d.error_class == spellkit_core::ErrorClass::NonWord)
        .count();
    assert_eq!(nonword, 0);
}
