//! Seeded random instances.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Constraint, PreferenceProfile};

/// A uniformly random ordering split into tie-groups: each element after
/// the first joins the previous group with probability `tie_density`.
fn random_list<R: Rng>(rng: &mut R, n: usize, tie_density: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for x in order {
        match groups.last_mut() {
            Some(last) if rng.gen_bool(tie_density) => last.push(x),
            _ => groups.push(alloc::vec![x]),
        }
    }
    groups
}

/// Random complete profile on `n` men and `n` women. `tie_density` 0 gives
/// a strict profile, 1 makes everyone indifferent.
pub fn random_profile<R: Rng>(rng: &mut R, n: usize, tie_density: f64) -> PreferenceProfile {
    let tie_density = tie_density.clamp(0.0, 1.0);
    let men = (0..n).map(|_| random_list(rng, n, tie_density)).collect();
    let women = (0..n).map(|_| random_list(rng, n, tie_density)).collect();
    PreferenceProfile::new(men, women).expect("generated lists are complete")
}

/// Up to `count` distinct regret and (for strict profiles) forbidden-pair
/// constraints. Regret constraints follow one random ordering of the men,
/// so the compiled precedence relation is always acyclic.
pub fn random_constraints<R: Rng>(rng: &mut R, profile: &PreferenceProfile, count: usize) -> Vec<Constraint> {
    let n = profile.n();
    let strict = profile.is_strict();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let regret_possible = n >= 2;
        if regret_possible && (!strict || rng.gen_bool(0.5)) {
            let mut pick = [rng.gen_range(0..n), rng.gen_range(0..n - 1)];
            if pick[1] >= pick[0] {
                pick[1] += 1;
            }
            pick.sort_unstable();
            // Edges run from `b` to `a`, so `b` comes first in the order.
            let c = Constraint::RegretLe {
                a: order[pick[1]],
                b: order[pick[0]],
            };
            if !out.contains(&c) {
                out.push(c);
            }
        } else if strict {
            let c = Constraint::Forbid {
                man: rng.gen_range(0..n),
                woman: rng.gen_range(0..n),
            };
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// A whole instance from one seed.
pub fn generate(n: usize, tie_density: f64, constraint_count: usize, seed: u64) -> (PreferenceProfile, Vec<Constraint>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = random_profile(&mut rng, n, tie_density);
    let constraints = random_constraints(&mut rng, &profile, constraint_count);
    (profile, constraints)
}
