//! Random test networks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::Network;

/// A connected network on `num_vertices ≥ 2` vertices: a random recursive tree
/// plus each remaining pair with probability `density`. Conductances are
/// uniform on `(0, 1]`. The source set is `{0}`; the sink set is a random
/// nonempty set of at most a quarter of the other vertices.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, num_vertices: usize, density: f64) -> Network {
    assert!(num_vertices >= 2);
    let mut edges = Vec::new();
    let conductance = |rng: &mut R| 1.0 - rng.gen::<f64>();
    let mut parent = vec![usize::MAX; num_vertices];
    for v in 1..num_vertices {
        parent[v] = rng.gen_range(0..v);
        edges.push((parent[v], v, conductance(rng)));
    }
    for u in 0..num_vertices {
        for v in u + 1..num_vertices {
            if parent[v] != u && rng.gen_bool(density) {
                edges.push((u, v, conductance(rng)));
            }
        }
    }
    let mut others: Vec<usize> = (1..num_vertices).collect();
    others.shuffle(rng);
    let k = rng.gen_range(1..=(num_vertices / 4).max(1));
    Network::new(num_vertices, edges, [0], others.into_iter().take(k)).expect("random network is valid")
}

/// [`random_network`] with a uniformly drawn vertex count in `min..=max`.
pub fn random_network_between<R: Rng + ?Sized>(rng: &mut R, min: usize, max: usize, density: f64) -> Network {
    let n = rng.gen_range(min.max(2)..=max.max(2));
    random_network(rng, n, density)
}
