use rayon::prelude::*;

use super::kraus::KrausChannel;
use crate::error::{Error, Result};

/// Finite family of channels sharing input and output dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundSet {
    members: Vec<KrausChannel>,
    labels: Vec<String>,
}

impl CompoundSet {
    pub fn new(members: Vec<KrausChannel>, labels: Vec<String>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidArgument("compound set needs a member".into()))?;
        if labels.len() != members.len() {
            return Err(Error::InvalidArgument(format!("{} labels for {} members", labels.len(), members.len())));
        }
        for m in &members {
            if m.in_dims() != first.in_dims() || m.out_dims() != first.out_dims() {
                return Err(Error::DimensionMismatch(format!(
                    "member {:?}→{:?} differs from {:?}→{:?}",
                    m.in_dims(),
                    m.out_dims(),
                    first.in_dims(),
                    first.out_dims()
                )));
            }
            if m.is_instrument() {
                return Err(Error::InvalidArgument("compound members must be trace preserving".into()));
            }
        }
        Ok(Self { members, labels })
    }

    /// Members labelled s0, s1, ...
    pub fn from_members(members: Vec<KrausChannel>) -> Result<Self> {
        let labels = (0..members.len()).map(|i| format!("s{i}")).collect();
        Self::new(members, labels)
    }

    pub fn singleton(ch: KrausChannel) -> Self {
        Self { members: vec![ch], labels: vec!["s0".into()] }
    }

    pub fn members(&self) -> &[KrausChannel] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn with_member(&self, ch: KrausChannel, label: impl Into<String>) -> Result<Self> {
        let mut members = self.members.clone();
        let mut labels = self.labels.clone();
        members.push(ch);
        labels.push(label.into());
        Self::new(members, labels)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            members: indices.iter().map(|&i| self.members[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

/// (6/θ)^{2(d_out·d_in)²}, possibly +∞.
pub fn net_cardinality_bound(theta: f64, in_dim: usize, out_dim: usize) -> f64 {
    let e = 2.0 * ((in_dim * out_dim) as f64).powi(2);
    (6.0 / theta).powf(e)
}

/// Pairwise upper diamond bounds, row-major.
pub fn distance_table(set: &CompoundSet) -> Result<Vec<Vec<f64>>> {
    let n = set.len();
    let choi: Vec<_> = set.members.iter().map(|m| m.choi()).collect();
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(0.0)
                    } else {
                        crate::qmatrix::trace_norm_hermitian(&choi[i].matrix().sub(choi[j].matrix()))
                    }
                })
                .collect()
        })
        .collect();
    let mut table: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    // symmetrise exactly
    for i in 0..n {
        for j in (i + 1)..n {
            let v = table[i][j].max(table[j][i]);
            table[i][j] = v;
            table[j][i] = v;
        }
    }
    Ok(table)
}

/// Greedy farthest-point θ-net under the upper diamond bound. Starts from member 0 and
/// repeatedly adds the member farthest from the net until all lie within θ.
pub fn build_net(set: &CompoundSet, theta: f64) -> Result<CompoundSet> {
    Ok(set.subset(&net_indices(set, theta)?))
}

/// Indices of the members chosen by `build_net`, in selection order.
pub fn net_indices(set: &CompoundSet, theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0) {
        return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    let n = set.len();
    let choi: Vec<_> = set.members.iter().map(|m| m.choi()).collect();
    let dist = |i: usize, j: usize| -> Result<f64> {
        if i == j {
            return Ok(0.0);
        }
        crate::qmatrix::trace_norm_hermitian(&choi[i].matrix().sub(choi[j].matrix()))
    };
    let mut chosen = vec![0usize];
    let mut nearest: Vec<f64> = (0..n).map(|i| dist(i, 0)).collect::<Result<_>>()?;
    loop {
        let (far, &gap) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty set");
        if gap <= theta {
            break;
        }
        chosen.push(far);
        for (i, slot) in nearest.iter_mut().enumerate() {
            let d = dist(i, far)?;
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::library;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton_net_is_itself() {
        let set = CompoundSet::singleton(library::dephasing(0.2).unwrap());
        assert_eq!(build_net(&set, 0.1).unwrap(), set);
    }

    #[test]
    fn duplicates_collapse_to_one() {
        let ch = library::dephasing(0.2).unwrap();
        let set = CompoundSet::from_members(vec![ch.clone(), ch.clone(), ch]).unwrap();
        assert_eq!(build_net(&set, 0.01).unwrap().len(), 1);
    }

    #[test]
    fn random_net_covers_by_exhaustive_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let members: Vec<_> = (0..50).map(|_| library::random_channel(4, 4, 2, &mut rng)).collect();
        let set = CompoundSet::from_members(members).unwrap();
        let theta = 0.3;
        let net_idx = net_indices(&set, theta).unwrap();
        let net = build_net(&set, theta).unwrap();
        assert_eq!(net.len(), net_idx.len());
        let table = distance_table(&set).unwrap();
        for i in 0..set.len() {
            let near = net_idx.iter().map(|&j| table[i][j]).fold(f64::INFINITY, f64::min);
            assert!(near <= theta + 1e-12);
        }
        assert!((net.len() as f64) <= net_cardinality_bound(theta, 4, 4).max(1.0));
    }

    #[test]
    fn tiny_theta_keeps_distinct_members() {
        let members = vec![library::dephasing(0.1).unwrap(), library::dephasing(0.2).unwrap(), library::bit_flip(0.3).unwrap()];
        let set = CompoundSet::from_members(members).unwrap();
        assert_eq!(build_net(&set, 1e-9).unwrap().len(), 3);
    }

    #[test]
    fn mismatched_members_rejected() {
        let r = CompoundSet::from_members(vec![library::identity(2), library::identity(3)]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
