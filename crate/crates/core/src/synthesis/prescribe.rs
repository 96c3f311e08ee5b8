use super::values::TargetSpectrum;
use crate::error::{Error, Result};
use crate::laplacian::{ChoiceFunction, Mode};
use crate::tree::{BallId, BallTree, TreeSpec, WhitneyMap};

/// Output of [`prescribe_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prescription {
    pub tree: BallTree,
    pub w: WhitneyMap,
    pub choice: ChoiceFunction,
    /// The sampled target values every one of which is some `λ(B)`.
    pub grid: Vec<f64>,
}

impl Prescription {
    /// `λ(B) = 1/w(B)` over non-point balls, by ball id.
    pub fn lambdas(&self) -> Vec<f64> {
        self.tree
            .ball_ids()
            .filter(|&b| !self.tree.kind(b).is_point())
            .map(|b| 1.0 / self.w.get(b))
            .collect()
    }
}

/// Longest chain of non-point balls starting at each ball, and the number
/// of non-point balls below and including it.
fn heights_and_capacities(t: &BallTree) -> (Vec<usize>, Vec<usize>) {
    let mut h = vec![0; t.len()];
    let mut cap = vec![0; t.len()];
    for b in t.ball_ids().rev() {
        if t.kind(b).is_point() {
            continue;
        }
        let kids = t.children(b);
        h[b.index()] = 1 + kids.iter().map(|c| h[c.index()]).max().unwrap_or(0);
        cap[b.index()] = 1 + kids.iter().map(|c| cap[c.index()]).sum::<usize>();
    }
    (h, cap)
}

/// Builds `shape` and a Whitney map whose reciprocals all lie in `S` and
/// use every point of the target grid at spacing `2^{-density}` per
/// interval, together with the compact choice function
/// `C(B) = 1/w(B) - 1/w(parent)`.
pub fn prescribe_spectrum(shape: &TreeSpec, s: &TargetSpectrum, density: u32) -> Result<Prescription> {
    if !(1..=24).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density {density} is outside 1..=24"
        )));
    }
    let t = shape.build()?;
    let grid = s.grid(density);
    let (h, cap) = heights_and_capacities(&t);
    let root = t.root();
    if cap[root.index()] < grid.len() {
        return Err(Error::InsufficientBalls(format!(
            "{} non-point balls for {} target values",
            cap[root.index()],
            grid.len()
        )));
    }
    let mut distinct = grid.clone();
    distinct.dedup();
    if distinct.len() < h[root.index()] {
        return Err(Error::InvalidTargetSet(format!(
            "{} distinct target values cannot fill a chain of {} balls",
            distinct.len(),
            h[root.index()]
        )));
    }
    let above = |v: f64| distinct.len() - distinct.partition_point(|&g| g <= v);

    let mut lambda = vec![0.0; t.len()];
    let mut stack: Vec<(BallId, Vec<f64>)> = vec![(root, grid.clone())];
    while let Some((b, pool)) = stack.pop() {
        let floor = t.parent(b).map_or(f64::NEG_INFINITY, |p| lambda[p.index()]);
        let need = h[b.index()] - 1;
        let (lam, rest) = match pool.first() {
            Some(&v) if above(v) >= need => (v, pool[1..].to_vec()),
            _ => {
                let start = distinct.partition_point(|&g| g <= floor);
                let v = distinct[start..]
                    .iter()
                    .copied()
                    .find(|&g| above(g) >= need)
                    .ok_or_else(|| {
                        Error::InvalidTargetSet(format!("no target value above {floor} leaves room for ball {b}"))
                    })?;
                (v, pool)
            }
        };
        lambda[b.index()] = lam;

        // Deal the remaining values round-robin to the non-point children,
        // never beyond what a subtree can hold.
        let kids: Vec<BallId> = t
            .children(b)
            .iter()
            .copied()
            .filter(|&c| !t.kind(c).is_point())
            .collect();
        let mut shares: Vec<Vec<f64>> = vec![Vec::new(); kids.len()];
        let mut values = rest.into_iter();
        'deal: while !kids.is_empty() {
            let mut dealt = false;
            for (i, &c) in kids.iter().enumerate() {
                if shares[i].len() < cap[c.index()] {
                    match values.next() {
                        Some(v) => shares[i].push(v),
                        None => break 'deal,
                    }
                    dealt = true;
                }
            }
            if !dealt {
                break;
            }
        }
        for (c, share) in kids.into_iter().zip(shares).rev() {
            stack.push((c, share));
        }
    }

    let mut w = vec![0.0; t.len()];
    let mut rates = vec![0.0; t.len()];
    for b in t.ball_ids() {
        if t.kind(b).is_point() {
            continue;
        }
        w[b.index()] = 1.0 / lambda[b.index()];
        let outer = t.parent(b).map_or(0.0, |p| 1.0 / w[p.index()]);
        rates[b.index()] = 1.0 / w[b.index()] - outer;
    }
    let w = WhitneyMap::new(&t, w)?;
    let choice = ChoiceFunction::new(&t, rates, 0.0, Mode::Compact)?;
    Ok(Prescription {
        tree: t,
        w,
        choice,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{choice_alpha, lambda_of};

    #[test]
    fn interval_on_binary_shape() {
        let s: TargetSpectrum = "[1,2]".parse().unwrap();
        let p = prescribe_spectrum(&TreeSpec::binary(10), &s, 6).unwrap();
        let lams = p.lambdas();
        assert!(lams.iter().all(|&l| s.contains(l, 1e-12)));
        for g in &p.grid {
            assert!(lams.iter().any(|l| (l - g).abs() <= 1e-12), "{g} unused");
        }
        assert!(s.hausdorff(&lams) <= 2f64.powi(-7));
        for b in p.tree.internal_balls() {
            let l = lambda_of(&p.tree, &p.choice, b).unwrap();
            assert!((l - 1.0 / p.w.get(b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn dyadic_points_recover_alpha_one() {
        let s = TargetSpectrum::new(vec![], (-4..=4).map(|k| 2f64.powi(k)).collect(), true).unwrap();
        let shape = TreeSpec::Padic {
            p: 2,
            k_min: -4,
            k_max: 4,
        };
        let p = prescribe_spectrum(&shape, &s, 1).unwrap();
        let c = choice_alpha(&p.tree, 2, 1.0, Mode::Compact).unwrap();
        for b in p.tree.ball_ids() {
            let want = lambda_of(&p.tree, &c, b).unwrap();
            assert_eq!(1.0 / p.w.get(b), want, "ball {b}");
        }
    }

    #[test]
    fn single_point_cannot_fill_a_chain() {
        let s: TargetSpectrum = "{0} ∪ {5}".parse().unwrap();
        assert!(matches!(
            prescribe_spectrum(&TreeSpec::binary(3), &s, 4),
            Err(Error::InvalidTargetSet(_))
        ));
    }

    #[test]
    fn too_few_balls() {
        let s: TargetSpectrum = "[1,2]".parse().unwrap();
        assert!(matches!(
            prescribe_spectrum(&TreeSpec::binary(3), &s, 8),
            Err(Error::InsufficientBalls(_))
        ));
    }
}
