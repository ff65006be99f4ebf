use lif_bench::{score_set, toy_fixture};

#[test]
fn fixture_shapes() {
    let f = toy_fixture(20, 4, 1);
    assert_eq!((f.latents.rows(), f.latents.cols()), (20, 4));
    assert_eq!((f.embeddings.rows(), f.embeddings.cols()), (20, 4));
    assert_eq!(f.labels.len(), 20);
    assert!(f.labels.iter().all(|l| l.labels.len() == 19));
}

#[test]
fn score_sets_are_seeded() {
    let a = score_set(10, 50, 3);
    assert_eq!(a.genuine.len(), 10);
    assert_eq!(a.impostor.len(), 50);
    assert_eq!(a, score_set(10, 50, 3));
}
