#![allow(dead_code)]

use rand::Rng;
use wibson_tree::{build_layered, Qrobdd};

/// A random layered function: up to `max_states` states per level with random
/// transitions, and final states mapped onto a small pool of payloads so that
/// some subfunctions coincide.
pub fn random_layered<R: Rng>(rng: &mut R, n: usize, max_states: usize, boolean: bool) -> Qrobdd {
    let widths: Vec<usize> = (0..=n).map(|_| rng.gen_range(1..=max_states)).collect();
    let table: Vec<Vec<[usize; 2]>> = (0..n)
        .map(|i| {
            (0..widths[i])
                .map(|_| {
                    [
                        rng.gen_range(0..widths[i + 1]),
                        rng.gen_range(0..widths[i + 1]),
                    ]
                })
                .collect()
        })
        .collect();
    let pool: Vec<Vec<u8>> = if boolean {
        vec![vec![0], vec![1]]
    } else {
        (0..rng.gen_range(1..=4))
            .map(|k| {
                let len = rng.gen_range(1..=63);
                let mut p = vec![0u8; len];
                rng.fill(&mut p[..]);
                p[0] = k as u8;
                p
            })
            .collect()
    };
    let finals: Vec<Vec<u8>> = (0..widths[n])
        .map(|_| pool[rng.gen_range(0..pool.len())].clone())
        .collect();
    build_layered(
        n,
        0usize,
        |i, &s, bit| table[i][s][bit as usize],
        |&s| finals[s].clone(),
    )
    .unwrap()
}

/// Minimal quasi-reduced level sizes, by counting distinct subfunction
/// tables reachable at each level.
pub fn brute_force_level_sizes(n: usize, table: &[Vec<u8>]) -> Vec<usize> {
    (0..n)
        .map(|i| {
            let span = 1usize << (n - i);
            let mut seen = std::collections::HashSet::new();
            for prefix in 0..(1usize << i) {
                seen.insert(table[prefix * span..(prefix + 1) * span].to_vec());
            }
            seen.len()
        })
        .collect()
}
