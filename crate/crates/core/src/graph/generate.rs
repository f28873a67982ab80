//! Deterministic graph families.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, GraphError};

const BIREGULAR_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    /// `K_{a,b}` with `a` left and `b` right vertices.
    CompleteBipartite { a: usize, b: usize },
    /// `K_{1,k}` whose center is on the left.
    #[serde(rename = "star_center_L")]
    StarCenterLeft { k: usize },
    /// `K_{k,1}` whose center is on the right.
    #[serde(rename = "star_center_R")]
    StarCenterRight { k: usize },
    /// Uniformly-ish random simple graph with every left vertex of degree
    /// `d_left` and every right vertex of degree `d_right`.
    RandomBiregular {
        d_left: usize,
        d_right: usize,
        n_left: usize,
        seed: u64,
    },
    /// Cycle on `n` (even) vertices alternating between the sides.
    EvenCycle { n: usize },
    /// Path on `n` vertices starting on the left.
    Path { n: usize },
}

impl GraphFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CompleteBipartite { .. } => "complete_bipartite",
            Self::StarCenterLeft { .. } => "star_center_L",
            Self::StarCenterRight { .. } => "star_center_R",
            Self::RandomBiregular { .. } => "random_biregular",
            Self::EvenCycle { .. } => "even_cycle",
            Self::Path { .. } => "path",
        }
    }

    pub fn generate(&self) -> Result<BipartiteGraph, GraphError> {
        match *self {
            Self::CompleteBipartite { a, b } => {
                BipartiteGraph::new(a, b, (0..a).flat_map(|u| (0..b).map(move |v| (u, v))))
            }
            Self::StarCenterLeft { k } => BipartiteGraph::new(1, k, (0..k).map(|v| (0, v))),
            Self::StarCenterRight { k } => BipartiteGraph::new(k, 1, (0..k).map(|u| (u, 0))),
            Self::EvenCycle { n } => {
                if n < 4 || n % 2 != 0 {
                    return Err(GraphError::InvalidFamily(format!(
                        "even_cycle needs an even length >= 4, got {n}"
                    )));
                }
                let k = n / 2;
                let edges = (0..k).flat_map(|i| [(i, i), ((i + 1) % k, i)]);
                BipartiteGraph::new(k, k, edges)
            }
            Self::Path { n } => {
                let (nl, nr) = (n.div_ceil(2), n / 2);
                // vertex t sits at index t/2 on side t%2
                let edges = (0..n.saturating_sub(1)).map(|t| {
                    if t % 2 == 0 {
                        (t / 2, t / 2)
                    } else {
                        (t.div_ceil(2), t / 2)
                    }
                });
                BipartiteGraph::new(nl, nr, edges)
            }
            Self::RandomBiregular {
                d_left,
                d_right,
                n_left,
                seed,
            } => random_biregular(d_left, d_right, n_left, seed),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::CompleteBipartite { a, b } => write!(f, "complete_bipartite({a},{b})"),
            Self::StarCenterLeft { k } => write!(f, "star_center_L({k})"),
            Self::StarCenterRight { k } => write!(f, "star_center_R({k})"),
            Self::RandomBiregular {
                d_left,
                d_right,
                n_left,
                seed,
            } => write!(f, "random_biregular({d_left},{d_right},{n_left},{seed})"),
            Self::EvenCycle { n } => write!(f, "even_cycle({n})"),
            Self::Path { n } => write!(f, "path({n})"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = GraphError;

    /// Parses the `Display` form, e.g. `random_biregular(2,4,4,7)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::InvalidFamily(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<u64> = inner
            .split(',')
            .map(|a| a.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let arg = |i: usize| args[i] as usize;
        let family = match (&s[..open], args.len()) {
            ("complete_bipartite", 2) => Self::CompleteBipartite {
                a: arg(0),
                b: arg(1),
            },
            ("star_center_L", 1) => Self::StarCenterLeft { k: arg(0) },
            ("star_center_R", 1) => Self::StarCenterRight { k: arg(0) },
            ("random_biregular", 4) => Self::RandomBiregular {
                d_left: arg(0),
                d_right: arg(1),
                n_left: arg(2),
                seed: args[3],
            },
            ("even_cycle", 1) => Self::EvenCycle { n: arg(0) },
            ("path", 1) => Self::Path { n: arg(0) },
            _ => return Err(bad()),
        };
        Ok(family)
    }
}

/// Sequential randomized construction with restarts: each left vertex picks
/// `d_left` distinct right vertices with probability proportional to their
/// remaining capacity.
fn random_biregular(
    d_left: usize,
    d_right: usize,
    n_left: usize,
    seed: u64,
) -> Result<BipartiteGraph, GraphError> {
    if d_left == 0 || d_right == 0 || !(d_left * n_left).is_multiple_of(d_right) {
        return Err(GraphError::InvalidFamily(format!(
            "random_biregular({d_left},{d_right},{n_left}): d_L * n_L must be a positive multiple of d_R"
        )));
    }
    let n_right = d_left * n_left / d_right;
    if d_left > n_right || d_right > n_left {
        return Err(GraphError::InvalidFamily(format!(
            "random_biregular({d_left},{d_right},{n_left}): degrees exceed the opposite side"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n_left).collect();
    'attempt: for _ in 0..BIREGULAR_ATTEMPTS {
        order.shuffle(&mut rng);
        let mut capacity = vec![d_right; n_right];
        let mut edges = Vec::with_capacity(d_left * n_left);
        for &u in &order {
            let mut picked: Vec<usize> = Vec::with_capacity(d_left);
            for _ in 0..d_left {
                let total: usize = (0..n_right)
                    .filter(|v| !picked.contains(v))
                    .map(|v| capacity[v])
                    .sum();
                if total == 0 {
                    continue 'attempt;
                }
                let mut ticket = rng.gen_range(0..total);
                let v = (0..n_right)
                    .filter(|v| !picked.contains(v))
                    .find(|&v| {
                        if ticket < capacity[v] {
                            true
                        } else {
                            ticket -= capacity[v];
                            false
                        }
                    })
                    .expect("ticket falls inside the total capacity");
                capacity[v] -= 1;
                picked.push(v);
            }
            picked.sort_unstable();
            edges.extend(picked.into_iter().map(|v| (u, v)));
        }
        edges.sort_unstable();
        return BipartiteGraph::new(n_left, n_right, edges);
    }
    Err(GraphError::InvalidFamily(format!(
        "random_biregular({d_left},{d_right},{n_left}): no simple graph found after {BIREGULAR_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_families() {
        let s = GraphFamily::StarCenterLeft { k: 2 }.generate().unwrap();
        assert_eq!((s.n_left(), s.n_right()), (1, 2));

        let c6 = GraphFamily::EvenCycle { n: 6 }.generate().unwrap();
        assert_eq!((c6.n_left(), c6.n_right()), (3, 3));
        let p = c6.degree_profile().unwrap();
        assert_eq!(
            (p.delta_l_min, p.delta_l_max, p.delta_r_min, p.delta_r_max),
            (2, 2, 2, 2)
        );

        let path = GraphFamily::Path { n: 5 }.generate().unwrap();
        assert_eq!(
            (path.n_left(), path.n_right(), path.edges().len()),
            (3, 2, 4)
        );

        assert!(GraphFamily::EvenCycle { n: 5 }.generate().is_err());
    }

    #[test]
    fn biregular_example() {
        let g = GraphFamily::RandomBiregular {
            d_left: 2,
            d_right: 4,
            n_left: 4,
            seed: 1,
        }
        .generate()
        .unwrap();
        let p = g.degree_profile().unwrap();
        assert_eq!(g.n_right(), 2);
        assert_eq!((p.delta_l_max, p.delta_r_min, p.delta_r_max), (2, 4, 4));
    }

    #[test]
    fn inconsistent_biregular_parameters() {
        let f = GraphFamily::RandomBiregular {
            d_left: 3,
            d_right: 4,
            n_left: 5,
            seed: 0,
        };
        assert!(matches!(f.generate(), Err(GraphError::InvalidFamily(_))));
    }

    #[test]
    fn family_names_parse() {
        for f in [
            GraphFamily::CompleteBipartite { a: 2, b: 3 },
            GraphFamily::StarCenterLeft { k: 4 },
            GraphFamily::StarCenterRight { k: 4 },
            GraphFamily::RandomBiregular {
                d_left: 2,
                d_right: 3,
                n_left: 9,
                seed: 11,
            },
            GraphFamily::EvenCycle { n: 8 },
            GraphFamily::Path { n: 7 },
        ] {
            assert_eq!(f.to_string().parse::<GraphFamily>().unwrap(), f);
        }
        assert!("moebius(3)".parse::<GraphFamily>().is_err());
    }

    proptest! {
        #[test]
        fn biregular_degrees_are_exact(d_left in 1usize..4, d_right in 1usize..5, mult in 1usize..4, seed: u64) {
            // n_L chosen so that d_L * n_L is divisible by d_R and both sides fit
            let n_left = d_right * mult.max(d_left);
            let g = GraphFamily::RandomBiregular { d_left, d_right, n_left, seed }.generate().unwrap();
            let p = g.degree_profile().unwrap();
            prop_assert_eq!((p.delta_l_min, p.delta_l_max), (d_left, d_left));
            prop_assert_eq!((p.delta_r_min, p.delta_r_max), (d_right, d_right));
            let again = GraphFamily::RandomBiregular { d_left, d_right, n_left, seed }.generate().unwrap();
            prop_assert_eq!(g, again);
        }
    }
}
