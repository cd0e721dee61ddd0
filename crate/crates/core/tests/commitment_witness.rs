mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wibson_tree::commitment::commit_with;
use wibson_tree::hash::{CountingHasher, Sha256Hasher};
use wibson_tree::predicates::compile_range_membership;
use wibson_tree::witness::verify_with;
use wibson_tree::{
    commit, derive_keys, open, verify, verify_full, Digest, InputWord, Qrobdd, Seed, VerifyError,
    Witness,
};

use common::random_layered;

fn setup(seed: u64, n: usize) -> (Qrobdd, wibson_tree::SeedKeys) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_layered(&mut rng, n, 5, false);
    let mut s = [0u8; 32];
    rng.fill(&mut s);
    (q, derive_keys(&Seed::new(s), n))
}

fn random_input<R: Rng>(rng: &mut R, n: usize) -> InputWord {
    InputWord::from_bits((0..n).map(|_| rng.gen::<bool>()))
}

#[test]
fn age_scenario_opens_and_verifies() {
    let q = compile_range_membership(25, 8).unwrap();
    let keys = derive_keys(&Seed::new([11; 32]), 16);
    let tree = commit(&q, &keys).unwrap();
    let x = InputWord::from_bytes(vec![20, 30], 16).unwrap();
    let w = open(&tree, &keys, &x).unwrap();
    assert_eq!(w.payload(), &[1]);
    assert_eq!(verify(&tree.root_hash(), &x, &w).unwrap(), vec![1]);
    let x = InputWord::from_bytes(vec![26, 30], 16).unwrap();
    let w = open(&tree, &keys, &x).unwrap();
    assert_eq!(verify(&tree.root_hash(), &x, &w).unwrap(), vec![0]);
}

#[test]
fn completeness_sampled_up_to_64_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [13usize, 24, 40, 64] {
        let (q, keys) = setup(n as u64, n);
        let tree = commit(&q, &keys).unwrap();
        let root = tree.root_hash();
        for _ in 0..2500 {
            let x = random_input(&mut rng, n);
            let w = open(&tree, &keys, &x).unwrap();
            assert_eq!(verify(&root, &x, &w).unwrap(), q.evaluate(&x).unwrap());
        }
    }
}

#[test]
fn hash_counts_are_exact() {
    for n in [0usize, 1, 5, 12, 30] {
        let (q, keys) = setup(1000 + n as u64, n);
        let h = CountingHasher::new(Sha256Hasher);
        let tree = commit_with(&h, &q, &keys).unwrap();
        assert_eq!(
            h.calls() as usize,
            q.leaves().len() + 3 * q.internal_count()
        );
        let x = InputWord::from_bits((0..n).map(|i| i % 3 == 0));
        let w = open(&tree, &keys, &x).unwrap();
        h.reset();
        verify_with(&h, &tree.root_hash(), &x, &w).unwrap();
        assert_eq!(h.calls() as usize, 2 * n + 1);
    }
}

#[test]
fn unrevealed_keys_never_appear_in_witness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 24;
    let (q, keys) = setup(5, n);
    let tree = commit(&q, &keys).unwrap();
    for _ in 0..50 {
        let x = random_input(&mut rng, n);
        let bytes = open(&tree, &keys, &x).unwrap().encode();
        for i in 0..n {
            let hidden = keys.side(i, !x.bit(i));
            assert!(
                !bytes.windows(32).any(|win| win == hidden),
                "level {i} leaked"
            );
        }
    }
}

#[test]
fn witnesses_share_keys_only_where_inputs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 32;
    let (q, keys) = setup(6, n);
    let tree = commit(&q, &keys).unwrap();
    for _ in 0..50 {
        let x = random_input(&mut rng, n);
        let y = random_input(&mut rng, n);
        let wx = open(&tree, &keys, &x).unwrap();
        let wy = open(&tree, &keys, &y).unwrap();
        for i in 0..n {
            let same = wx.revealed_keys()[i] == wy.revealed_keys()[i];
            assert_eq!(same, x.bit(i) == y.bit(i));
        }
    }
}

#[test]
fn full_disclosure_checks() {
    let (q, keys) = setup(8, 10);
    let root = commit(&q, &keys).unwrap().root_hash();
    assert!(verify_full(&root, &q, &keys));
    assert!(verify_full(&root, &q.expand().unwrap(), &keys));
    // Change one leaf payload.
    let mut table = q.truth_table().unwrap();
    table[17] = vec![0xee; 5];
    assert!(!verify_full(
        &root,
        &Qrobdd::full_tree(10, &table).unwrap(),
        &keys
    ));
    // Replace one key.
    let mut pairs: Vec<([u8; 32], [u8; 32])> = keys.pairs().map(|(l, r)| (*l, *r)).collect();
    pairs[4].1 = [0x5a; 32];
    let forged = wibson_tree::SeedKeys::from_pairs(pairs);
    assert!(!verify_full(&root, &q, &forged));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_completeness_and_compression_invariance(seed: u64, n in 0usize..=10) {
        let (q, keys) = setup(seed, n);
        let reduced = q.reduce();
        let full = q.expand().unwrap();
        let t_red = commit(&reduced, &keys).unwrap();
        let t_full = commit(&full, &keys).unwrap();
        let t_raw = commit(&q, &keys).unwrap();
        let root = t_red.root_hash();
        prop_assert_eq!(t_full.root_hash(), root);
        prop_assert_eq!(t_raw.root_hash(), root);
        for k in 0..(1u64 << n) {
            let x = InputWord::from_u64(k, n).unwrap();
            let w = open(&t_red, &keys, &x).unwrap();
            prop_assert_eq!(&w, &open(&t_full, &keys, &x).unwrap());
            prop_assert_eq!(w.encode().len(), 8 + 64 * n + w.payload().len());
            prop_assert_eq!(verify(&root, &x, &w).unwrap(), q.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn single_byte_flips_are_rejected(seed: u64, n in 1usize..=20, pos: usize, mask in 1u8..=255) {
        let (q, keys) = setup(seed, n);
        let tree = commit(&q, &keys).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
        let x = random_input(&mut rng, n);
        let mut bytes = open(&tree, &keys, &x).unwrap().encode();
        let pos = pos % bytes.len();
        bytes[pos] ^= mask;
        if let Ok(w) = Witness::decode(&bytes) {
            prop_assert!(verify(&tree.root_hash(), &x, &w).is_err());
        }
    }

    #[test]
    fn wrong_input_is_rejected(seed: u64, n in 1usize..=20, flip: usize) {
        let (q, keys) = setup(seed, n);
        let tree = commit(&q, &keys).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_input(&mut rng, n);
        let w = open(&tree, &keys, &x).unwrap();
        let mut y = x.clone();
        y.flip(flip % n);
        prop_assert_eq!(verify(&tree.root_hash(), &y, &w), Err(VerifyError::Rejected));
    }

    #[test]
    fn witness_codec_roundtrip(n in 0usize..40, payload in proptest::collection::vec(any::<u8>(), 1..=63), fill: u8) {
        let keys: Vec<[u8; 32]> = (0..n).map(|i| [fill.wrapping_add(i as u8); 32]).collect();
        let aux: Vec<Digest> = (0..n).map(|i| Digest([fill ^ i as u8; 32])).collect();
        let w = Witness::new(keys, aux, payload).unwrap();
        let bytes = w.encode();
        prop_assert_eq!(bytes.len(), w.encoded_len());
        prop_assert_eq!(Witness::decode(&bytes).unwrap(), w);
    }
}
