#![allow(dead_code)]

use icx::model::{Destination, Instance};
use rand::Rng;

/// Messages 3 and 4 interfere together at destination 1 and nowhere
/// conflict, so rate 1/3 works with three subsets.
pub fn aligned_pair() -> Instance {
    Instance::new(
        4,
        vec![
            Destination::new(1, [1, 2], []),
            Destination::new(2, [1, 3], [4]),
            Destination::new(3, [2, 4], [3]),
        ],
    )
}

/// Alignments 1~4 (at destination 2) and then 4 desired at destination 3
/// while 1 interferes there: infeasible at rate 1/3.
pub fn broken_chain() -> Instance {
    Instance::new(
        4,
        vec![
            Destination::new(1, [1, 3], [2, 4]),
            Destination::new(2, [2, 3], []),
            Destination::new(3, [3, 4], [2]),
        ],
    )
}

/// Two messages, the middle destination wants both.
pub fn two_message_groupcast() -> Instance {
    Instance::new(
        2,
        vec![
            Destination::new(1, [1], [2]),
            Destination::new(2, [1, 2], []),
            Destination::new(3, [2], [1]),
        ],
    )
}

/// Destination `k` wants `W_k` and holds its two circular neighbours.
pub fn pentagon() -> Instance {
    let dests = (1..=5)
        .map(|k| Destination::new(k, [k], [(k + 3) % 5 + 1, k % 5 + 1]))
        .collect();
    Instance::new(5, dests)
}

/// Valid instance with `m` messages and `k` destinations, each desiring
/// between `min_wants` and `m` messages and holding a random part of the
/// rest.
pub fn random_instance<R: Rng>(rng: &mut R, m: usize, k: usize, min_wants: usize) -> Instance {
    random_instance_with(rng, m, k, min_wants, 0.5)
}

/// As [`random_instance`], holding each remaining message with probability `p_has`.
pub fn random_instance_with<R: Rng>(rng: &mut R, m: usize, k: usize, min_wants: usize, p_has: f64) -> Instance {
    let dests = (1..=k)
        .map(|id| {
            let want_count = rng.gen_range(min_wants..=m.min(min_wants + 2));
            let mut pool: Vec<usize> = (1..=m).collect();
            let mut wants = Vec::new();
            for _ in 0..want_count {
                wants.push(pool.swap_remove(rng.gen_range(0..pool.len())));
            }
            let has: Vec<usize> = pool.into_iter().filter(|_| rng.gen_bool(p_has)).collect();
            Destination::new(id, wants, has)
        })
        .collect();
    Instance::new(m, dests)
}
