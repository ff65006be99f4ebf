use lif_core::matrix::{decode_matrix, encode_matrix};
use lif_core::oracle::{all_pair_scores, eer_sweep};
use lif_core::similarity::{dot, labels_from_matrix, labels_to_matrix};
use lif_core::{
    build_scores, eer, generate_dataset, label_all, toy_latents, train_all_boundaries,
    verification_report, BoundarySet, IdentityBoundary, Protocol, SamplingConfig, SamplingMode,
    Side, SvmConfig, ToyConfig, ToyWorld,
};

struct Run {
    world: ToyWorld,
    latents: lif_core::Matrix,
    boundaries: BoundarySet,
}

fn train(m: usize, d: usize, seed: u64) -> Run {
    let world = ToyWorld::new(ToyConfig::new(d, seed)).unwrap();
    let latents = toy_latents(m, d, seed).unwrap();
    let f = world.embed_matrix(&latents).unwrap();
    let (_, labels) = label_all(&f).unwrap();
    let boundaries = train_all_boundaries(
        &latents,
        &labels,
        &SvmConfig {
            seed,
            ..SvmConfig::default()
        },
    )
    .unwrap();
    Run {
        world,
        latents,
        boundaries,
    }
}

#[test]
fn boundaries_align_with_the_hidden_direction() {
    let run = train(120, 6, 1);
    assert_eq!(run.boundaries.failures().count(), 0);
    let u = run.world.direction();
    let aligned = run
        .boundaries
        .trained()
        .filter(|b| dot(&b.normal, u).abs() >= 0.9)
        .count();
    assert!(
        aligned * 10 >= 9 * run.boundaries.len(),
        "{aligned}/120 aligned"
    );
}

#[test]
fn positive_samples_keep_identity_and_negative_samples_lose_it() {
    let run = train(80, 6, 2);
    let refs: Vec<&IdentityBoundary> = run.boundaries.trained().take(5).collect();
    let data = generate_dataset(
        &run.latents,
        &refs,
        &SamplingConfig {
            max_off: 5.0,
            appearances: 6,
            mode: SamplingMode::HalfNormal,
            seed: 3,
        },
    )
    .unwrap();
    assert_eq!(data.latents.rows(), 2 * 5 * 6);

    let e = run.world.embed_matrix(&data.latents).unwrap();
    let reference = run.world.embed_matrix(&run.latents).unwrap();
    for (row, rec) in data.records.iter().enumerate() {
        let b = refs.iter().find(|b| b.reference == rec.reference).unwrap();
        let margin = b.signed_margin(data.latents.row(row))
            - b.signed_margin(run.latents.row(rec.reference));
        match rec.side {
            Side::Positive => assert!(margin >= 0.0),
            Side::Negative => assert!(margin <= 0.0),
        }
        let s = dot(e.row(row), reference.row(rec.reference));
        if rec.side == Side::Negative {
            assert!(s < 0.5, "negative sample too close to its reference: {s}");
        }
    }

    let ids: Vec<usize> = data.records.iter().map(|r| r.identity()).collect();
    let scores = build_scores(&e, &ids, Protocol::AllPairs).unwrap();
    let (g, i) = all_pair_scores(&e, &ids);
    assert_eq!(scores.genuine.len(), g.len());
    assert_eq!(scores.impostor.len(), i.len());
    let report = verification_report(&scores);
    assert!(report.eer < 0.5);
    assert!((report.eer - eer_sweep(&g, &i).0).abs() < 1e-12);
    assert_eq!(report.eer, eer(&scores).eer);
}

#[test]
fn interchange_round_trips_preserve_stage_outputs() {
    let run = train(30, 4, 4);
    let back = BoundarySet::from_matrix(
        &decode_matrix(&encode_matrix(&run.boundaries.to_matrix()).unwrap()).unwrap(),
    )
    .unwrap();
    assert_eq!(back.len(), 30);
    for (a, b) in run.boundaries.trained().zip(back.trained()) {
        assert!(dot(&a.normal, &b.normal) > 1.0 - 1e-6);
    }

    let f = run.world.embed_matrix(&run.latents).unwrap();
    let (_, labels) = label_all(&f).unwrap();
    let packed =
        decode_matrix(&encode_matrix(&labels_to_matrix(&labels).unwrap()).unwrap()).unwrap();
    assert_eq!(labels_from_matrix(&packed).unwrap(), labels);
}

#[test]
fn training_is_reproducible() {
    let a = train(40, 5, 9);
    let b = train(40, 5, 9);
    assert_eq!(a.boundaries.to_matrix(), b.boundaries.to_matrix());
}
