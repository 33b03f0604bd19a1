//! Tree-based VFL integration tests: federated vs centralized equivalence,
//! encrypted vs plaintext structural identity, and learning sanity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vflforge_core::data::{gaussian_blobs, vertical_partition, VerticalSplit};
use vflforge_core::numeric::Matrix;
use vflforge_core::paillier::keygen;
use vflforge_core::tree::{
    encrypted_stat_aggregation, tree_train, EncryptionConfig, TreeKind, TreeParams,
};

fn blob_party_features(
    n: usize,
    f: usize,
    c: usize,
    parties: usize,
    seed: u64,
) -> (Vec<Matrix>, Vec<u32>) {
    let ds = gaussian_blobs(n, f, c, 0.13, None, seed).unwrap();
    let split = VerticalSplit::equal(f, parties).unwrap();
    let views = vertical_partition(&ds, &split).unwrap();
    let features = views.iter().map(|v| v.features.clone()).collect();
    (features, ds.labels.values().to_vec())
}

#[test]
fn federated_rf_equals_centralized_tree_on_pooled_features() {
    // RF with 1 tree and no subsampling == the same algorithm run
    // centralized: pooling the features must not change the tree because
    // candidates are per-feature.
    let (features, labels) = blob_party_features(120, 6, 3, 2, 21);
    let params = TreeParams {
        kind: TreeKind::RandomForest,
        num_trees: 1,
        max_depth: 4,
        rf_subsample: 1.0,
        seed: 3,
        ..TreeParams::default()
    };
    let federated = tree_train(&features, &labels, 3, &params).unwrap();

    let pooled = features[0].hcat(&features[1]).unwrap();
    let centralized = tree_train(&[pooled.clone()], &labels, 3, &params).unwrap();

    let fed_preds = federated.predict(&features);
    let cen_preds = centralized.predict(&[pooled]);
    assert_eq!(fed_preds, cen_preds);
}

#[test]
fn rf_learns_blobs() {
    let (features, labels) = blob_party_features(600, 8, 3, 2, 22);
    let params = TreeParams {
        kind: TreeKind::RandomForest,
        num_trees: 5,
        max_depth: 6,
        seed: 4,
        ..TreeParams::default()
    };
    let model = tree_train(&features, &labels, 3, &params).unwrap();
    let acc = model.accuracy(&features, &labels);
    assert!(acc > 0.92, "RF accuracy {acc}");
}

#[test]
fn xgb_learns_binary_and_multiclass() {
    let (features, labels) = blob_party_features(600, 8, 2, 2, 23);
    let params = TreeParams {
        kind: TreeKind::Xgboost,
        num_trees: 5,
        max_depth: 6,
        learning_rate: 0.003,
        seed: 5,
        ..TreeParams::default()
    };
    let model = tree_train(&features, &labels, 2, &params).unwrap();
    let acc = model.accuracy(&features, &labels);
    assert!(acc > 0.92, "binary XGB accuracy {acc}");

    let (features, labels) = blob_party_features(800, 8, 4, 2, 24);
    let model = tree_train(&features, &labels, 4, &params).unwrap();
    let acc = model.accuracy(&features, &labels);
    assert!(acc > 0.85, "multiclass XGB accuracy {acc}");
}

#[test]
fn encrypted_and_plaintext_training_produce_identical_trees() {
    let (features, labels) = blob_party_features(150, 6, 2, 2, 25);
    for kind in [TreeKind::RandomForest, TreeKind::Xgboost] {
        let params = TreeParams {
            kind,
            num_trees: 2,
            max_depth: 3,
            seed: 6,
            ..TreeParams::default()
        };
        let plain = tree_train(&features, &labels, 2, &params).unwrap();
        let enc_params = TreeParams {
            encryption: Some(EncryptionConfig { key_bits: 512 }),
            ..params
        };
        let encrypted = tree_train(&features, &labels, 2, &enc_params).unwrap();
        assert_eq!(
            encrypted.trees, plain.trees,
            "{kind:?}: encryption changed the tree structure"
        );
    }
}

#[test]
fn encrypted_bucket_sums_match_plaintext_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (pk, sk) = keygen(384, &mut rng).unwrap();
    use num_bigint::BigUint;
    // per-sample stat vectors of dim 2 (non-negative for this check)
    let stats: Vec<Vec<u64>> = (0..12).map(|i| vec![i as u64, (i * 3 % 7) as u64]).collect();
    let enc: Vec<Vec<_>> = stats
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| pk.encrypt(&BigUint::from(v), &mut rng).unwrap())
                .collect()
        })
        .collect();
    let buckets = vec![vec![0, 2, 4], vec![1, 3, 5, 7], vec![]];
    let sums = encrypted_stat_aggregation(&pk, &enc, &buckets).unwrap();
    for (bucket, enc_sum) in buckets.iter().zip(&sums) {
        for d in 0..2 {
            let plain: u64 = bucket.iter().map(|&r| stats[r][d]).sum();
            let decrypted = sk.decrypt(&enc_sum[d]).unwrap();
            assert_eq!(decrypted, BigUint::from(plain), "bucket {bucket:?} dim {d}");
        }
    }
    // empty bucket decrypts to zero
    assert_eq!(sk.decrypt(&sums[2][0]).unwrap(), BigUint::from(0u32));
}

#[test]
fn internal_nodes_reference_owner_features_and_children_partition() {
    use vflforge_core::tree::TreeNode;
    let (features, labels) = blob_party_features(200, 6, 3, 3, 26);
    let params = TreeParams {
        kind: TreeKind::RandomForest,
        num_trees: 3,
        max_depth: 5,
        seed: 7,
        ..TreeParams::default()
    };
    let model = tree_train(&features, &labels, 3, &params).unwrap();
    fn walk(node: &TreeNode, dims: &[usize]) {
        if let TreeNode::Internal {
            owner,
            feature,
            left,
            right,
            ..
        } = node
        {
            assert!(*owner < dims.len());
            assert!(*feature < dims[*owner], "feature must be local to owner");
            walk(left, dims);
            walk(right, dims);
        }
    }
    let dims: Vec<usize> = features.iter().map(|m| m.cols()).collect();
    for (_, tree) in &model.trees {
        walk(tree, &dims);
        assert!(tree.depth() <= 5);
    }
}
