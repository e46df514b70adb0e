//! Quantization of discrete distributions and of 2-D samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::DiscreteDistribution;
use crate::divergence::{f_divergence_slices, psi_unchecked};
use crate::error::{check_shape, domain, Error, Result};
use crate::estimators::Histogram;
use crate::family::GeneratorFamily;

/// Default iteration cap for [`kmeans`].
pub const DEFAULT_MAX_ITERS: usize = 100;

/// A surjective map from `k` atoms onto bins `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    m: usize,
}

impl Partition {
    /// Validates that every bin in `0..m` receives at least one atom.
    pub fn new(assignment: Vec<usize>, m: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Input("partition needs at least one atom".into()));
        }
        let mut seen = vec![false; m];
        for (atom, &bin) in assignment.iter().enumerate() {
            if bin >= m {
                return Err(Error::Input(format!("atom {atom} assigned to bin {bin}, but m = {m}")));
            }
            seen[bin] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::Input(format!("bin {empty} is empty")));
        }
        Ok(Self { assignment, m })
    }

    /// Relabels arbitrary bin ids compactly, in increasing id order.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut ids: Vec<usize> = labels.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let assignment = labels.iter().map(|l| ids.binary_search(l).expect("label present")).collect();
        Self::new(assignment, ids.len())
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::new((0..k).collect(), k)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of bins.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of atoms.
    pub fn k(&self) -> usize {
        self.assignment.len()
    }

    /// True when every bin of `self` lies inside a bin of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.k() != coarser.k() {
            return false;
        }
        let mut parent = vec![usize::MAX; self.m];
        for (fine, coarse) in self.assignment.iter().zip(&coarser.assignment) {
            if parent[*fine] == usize::MAX {
                parent[*fine] = *coarse;
            } else if parent[*fine] != *coarse {
                return false;
            }
        }
        true
    }
}

/// Bin masses `P_S(S_i) = sum_{a in S_i} P(a)`.
pub fn quantize_distribution(p: &DiscreteDistribution, s: &Partition) -> Result<DiscreteDistribution> {
    check_shape(s.k(), p.len())?;
    Ok(DiscreteDistribution::from_normalized_unchecked(quantize_masses(p.masses(), s)))
}

pub(crate) fn quantize_masses(p: &[f64], s: &Partition) -> Vec<f64> {
    let mut out = vec![0.0; s.m];
    for (mass, bin) in p.iter().zip(&s.assignment) {
        out[*bin] += mass;
    }
    out
}

/// Contiguous blocks of the original order; the first `k mod m` blocks get
/// one extra atom.
pub fn uniform_partition(k: usize, m: usize) -> Result<Partition> {
    if m == 0 || m > k {
        return domain(format!("need 1 <= m <= k, got m = {m}, k = {k}"));
    }
    let (base, extra) = (k / m, k % m);
    let mut assignment = Vec::with_capacity(k);
    for bin in 0..m {
        let size = base + usize::from(bin < extra);
        assignment.extend(std::iter::repeat_n(bin, size));
    }
    Partition::new(assignment, m)
}

/// Atom order by increasing likelihood ratio `P(a) / Q(a)`, where `Q(a) = 0`
/// counts as `+inf`; ties keep index order. Atoms with `P(a) = Q(a) = 0`
/// are returned separately.
fn ratio_order(p: &[f64], q: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let (mut live, null): (Vec<usize>, Vec<usize>) = (0..p.len()).partition(|&a| p[a] > 0.0 || q[a] > 0.0);
    // p_a / q_a < p_b / q_b  <=>  p_a q_b < p_b q_a  for nonnegative masses.
    live.sort_by(|&a, &b| (p[a] * q[b]).total_cmp(&(p[b] * q[a])));
    (live, null)
}

/// Greedy quantizer maximizing the frontier integral; see
/// [`greedy_partition_for`].
pub fn greedy_partition(p: &DiscreteDistribution, q: &DiscreteDistribution, m: usize) -> Result<Partition> {
    greedy_partition_for(GeneratorFamily::FrontierIntegral, p, q, m)
}

/// Greedy quantizer on the ratio-sorted atoms: starting from a single block,
/// `m - 1` times add the contiguous cut that most increases `D_f(P_S || Q_S)`,
/// preferring the smallest cut position on ties.
///
/// Atoms with `P(a) = Q(a) = 0` carry no mass; they join the first bin, or
/// become singleton bins when fewer than `m` atoms carry mass.
pub fn greedy_partition_for(
    family: GeneratorFamily,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    m: usize,
) -> Result<Partition> {
    family.validate()?;
    check_shape(p.len(), q.len())?;
    let k = p.len();
    if m < 2 || m > k {
        return domain(format!("need 2 <= m <= k, got m = {m}, k = {k}"));
    }
    let (pm, qm) = (p.masses(), q.masses());
    let (order, null) = ratio_order(pm, qm);
    let live_bins = m.min(order.len());
    let cuts = greedy_cuts(family, pm, qm, &order, live_bins);

    let mut assignment = vec![0usize; k];
    let mut bin = 0;
    let mut next_cut = cuts.iter().peekable();
    for (pos, &atom) in order.iter().enumerate() {
        if next_cut.peek() == Some(&&pos) {
            bin += 1;
            next_cut.next();
        }
        assignment[atom] = bin;
    }
    let mut extra = live_bins;
    for &atom in &null {
        if extra < m {
            assignment[atom] = extra;
            extra += 1;
        } else {
            assignment[atom] = 0;
        }
    }
    Partition::new(assignment, m)
}

/// Sorted cut positions (block starts other than 0) chosen greedily.
fn greedy_cuts(family: GeneratorFamily, p: &[f64], q: &[f64], order: &[usize], bins: usize) -> Vec<usize> {
    let len = order.len();
    let mut pre_p = vec![0.0; len + 1];
    let mut pre_q = vec![0.0; len + 1];
    for (i, &a) in order.iter().enumerate() {
        pre_p[i + 1] = pre_p[i] + p[a];
        pre_q[i + 1] = pre_q[i] + q[a];
    }
    let block = |s: usize, e: usize| psi_unchecked(family, pre_p[e] - pre_p[s], pre_q[e] - pre_q[s]);
    let mut cuts: Vec<usize> = Vec::with_capacity(bins.saturating_sub(1));
    for _ in 1..bins {
        let mut best: Option<(f64, usize)> = None;
        let mut start = 0;
        for end in cuts.iter().copied().chain(std::iter::once(len)) {
            let whole = block(start, end);
            for c in start + 1..end {
                let gain = block(start, c) + block(c, end) - whole;
                if best.is_none_or(|(g, pos)| gain > g || (gain == g && c < pos)) {
                    best = Some((gain, c));
                }
            }
            start = end;
        }
        let (_, c) = best.expect("a block with two or more atoms remains");
        let at = cuts.partition_point(|x| *x < c);
        cuts.insert(at, c);
    }
    cuts
}

/// Level-set quantizer from the proof of the quantization bound.
///
/// Atoms with `P(a) <= Q(a)` are placed in `m/2` equal-width levels of
/// `f(P(a)/Q(a))` over `[0, f(0)]`; the others in `m/2` levels of
/// `f*(Q(a)/P(a))` over `[0, f*(0)]`. The top level is closed. Empty bins are
/// dropped, so the result may have fewer than `m` bins.
pub fn oracle_partition(
    family: GeneratorFamily,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    m: usize,
) -> Result<Partition> {
    family.validate()?;
    check_shape(p.len(), q.len())?;
    if m < 2 || !m.is_multiple_of(2) {
        return domain(format!("oracle partition needs an even m >= 2, got {m}"));
    }
    let (f0, fs0) = (family.f(0.0), family.f_star(0.0));
    if !(f0.is_finite() && fs0.is_finite()) {
        return Err(Error::UnsupportedFamily(family.to_string()));
    }
    let levels = m / 2;
    let level = |v: f64, top: f64| -> usize {
        if top <= 0.0 {
            return 0;
        }
        let l = (v.max(0.0) * levels as f64 / top).floor();
        (l as usize).min(levels - 1)
    };
    let labels: Vec<usize> = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(&a, &b)| {
            if a <= b {
                let v = if b == 0.0 { 0.0 } else { family.f(a / b) };
                level(v, f0)
            } else {
                levels + level(family.f_star(b / a), fs0)
            }
        })
        .collect();
    Partition::from_labels(&labels)
}

/// `D_f(P_S || Q_S)`.
pub fn quantized_divergence(
    family: GeneratorFamily,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    s: &Partition,
) -> Result<f64> {
    check_shape(s.k(), p.len())?;
    check_shape(s.k(), q.len())?;
    Ok(f_divergence_slices(family, &quantize_masses(p.masses(), s), &quantize_masses(q.masses(), s)))
}

/// Fitted centroids of a 2-D k-means model.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub centroids: Vec<[f64; 2]>,
    /// Sum of squared distances of the fit points to their centroids.
    pub inertia: f64,
    /// Inertia after each assignment step, starting with the seeding.
    pub inertia_history: Vec<f64>,
    /// Number of Lloyd updates performed.
    pub iterations: usize,
}

impl CentroidModel {
    pub fn m(&self) -> usize {
        self.centroids.len()
    }
}

fn sq_dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Index of the nearest centroid (lowest index on ties) and the squared
/// distance to it.
fn nearest(x: &[f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, sq_dist(x, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_all(points: &[[f64; 2]], centroids: &[[f64; 2]]) -> (Vec<usize>, f64) {
    let pairs: Vec<(usize, f64)> = points.par_iter().map(|x| nearest(x, centroids)).collect();
    let inertia = pairs.iter().map(|p| p.1).sum();
    (pairs.into_iter().map(|p| p.0).collect(), inertia)
}

/// D^2 seeding: the first center uniformly, each next one with probability
/// proportional to the squared distance to the nearest chosen center.
fn seed_centroids(points: &[[f64; 2]], m: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(m);
    centroids.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < m {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx];
        centroids.push(c);
        for (d, x) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(x, &c));
        }
    }
    centroids
}

/// Lloyd's algorithm with D^2 seeding from a ChaCha8 stream seeded by `seed`.
///
/// Stops when an update changes no assignment or after `max_iters` updates.
/// An empty cluster keeps its previous centroid. The result does not depend
/// on the number of worker threads.
pub fn kmeans(points: &[[f64; 2]], m: usize, max_iters: usize, seed: u64) -> Result<CentroidModel> {
    if m == 0 {
        return domain("k-means needs m >= 1");
    }
    if points.len() < m {
        return Err(Error::Input(format!("k-means needs at least m = {m} points, got {}", points.len())));
    }
    if points.iter().any(|x| !(x[0].is_finite() && x[1].is_finite())) {
        return Err(Error::Input("k-means points must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, m, &mut rng);
    let (mut assign, inertia) = assign_all(points, &centroids);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < max_iters {
        let mut sums = vec![[0.0f64; 2]; m];
        let mut counts = vec![0usize; m];
        for (x, &j) in points.iter().zip(&assign) {
            sums[j][0] += x[0];
            sums[j][1] += x[1];
            counts[j] += 1;
        }
        for j in 0..m {
            if counts[j] > 0 {
                let c = counts[j] as f64;
                centroids[j] = [sums[j][0] / c, sums[j][1] / c];
            }
        }
        iterations += 1;
        let (next, inertia) = assign_all(points, &centroids);
        history.push(inertia);
        let changed = next.iter().zip(&assign).any(|(a, b)| a != b);
        assign = next;
        if !changed {
            break;
        }
    }
    Ok(CentroidModel { centroids, inertia: *history.last().expect("nonempty"), inertia_history: history, iterations })
}

/// Tallies nearest-centroid assignments (lowest index on ties) into a
/// histogram over the model's bins.
pub fn assign_to_centroids(points: &[[f64; 2]], model: &CentroidModel) -> Result<Histogram> {
    if model.centroids.is_empty() {
        return Err(Error::Input("model has no centroids".into()));
    }
    let labels: Vec<usize> = points.par_iter().map(|x| nearest(x, &model.centroids).0).collect();
    let mut counts = vec![0u64; model.m()];
    for l in labels {
        counts[l] += 1;
    }
    Histogram::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::frontier_integral_closed;

    fn dist(m: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(m.to_vec()).unwrap()
    }

    #[test]
    fn quantize_sums_bins() {
        let p = dist(&[0.1, 0.2, 0.3, 0.4]);
        let s = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let got = quantize_distribution(&p, &s).unwrap();
        assert!((got.masses()[0] - 0.3).abs() < 1e-15 && (got.masses()[1] - 0.7).abs() < 1e-15);
        let one = Partition::new(vec![0; 4], 1).unwrap();
        assert_eq!(quantize_distribution(&p, &one).unwrap().masses().len(), 1);
        let id = Partition::identity(4).unwrap();
        assert_eq!(quantize_distribution(&p, &id).unwrap(), p);
        assert!(quantize_distribution(&dist(&[1.0]), &s).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2], 3).is_err());
        assert!(Partition::new(vec![0, 3], 3).is_err());
        let p = Partition::from_labels(&[7, 3, 7, 9]).unwrap();
        assert_eq!(p.assignment(), &[1, 0, 1, 2]);
        assert!(Partition::identity(4).unwrap().refines(&p) || p.k() != 4);
        assert!(Partition::identity(4).unwrap().refines(&p));
        assert!(!p.refines(&Partition::identity(4).unwrap()));
    }

    #[test]
    fn uniform_blocks() {
        assert_eq!(uniform_partition(6, 3).unwrap().assignment(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(uniform_partition(5, 2).unwrap().assignment(), &[0, 0, 0, 1, 1]);
        assert_eq!(uniform_partition(4, 4).unwrap(), Partition::identity(4).unwrap());
        assert!(uniform_partition(3, 4).is_err());
        assert!(uniform_partition(3, 0).is_err());
    }

    #[test]
    fn greedy_full_refinement_is_exact() {
        let p = dist(&[0.1, 0.4, 0.2, 0.3]);
        let q = dist(&[0.3, 0.1, 0.4, 0.2]);
        let s = greedy_partition(&p, &q, 4).unwrap();
        let fi = GeneratorFamily::FrontierIntegral;
        let got = quantized_divergence(fi, &p, &q, &s).unwrap();
        let want = frontier_integral_closed(&p, &q).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn greedy_handles_null_and_infinite_ratio_atoms() {
        let p = dist(&[0.5, 0.0, 0.5, 0.0]);
        let q = dist(&[0.0, 0.0, 0.5, 0.5]);
        let s = greedy_partition(&p, &q, 3).unwrap();
        assert_eq!(s.m(), 3);
        // The three live atoms are separated; the null atom joins bin 0.
        let a = s.assignment();
        assert_ne!(a[0], a[2]);
        assert_ne!(a[2], a[3]);
        let s4 = greedy_partition(&p, &q, 4).unwrap();
        assert_eq!(s4.m(), 4);
    }

    #[test]
    fn oracle_identical_pair() {
        let p = dist(&[0.2, 0.3, 0.5]);
        let s = oracle_partition(GeneratorFamily::FrontierIntegral, &p, &p, 4).unwrap();
        assert_eq!(s.m(), 1);
        assert!(oracle_partition(GeneratorFamily::FrontierIntegral, &p, &p, 3).is_err());
        assert!(matches!(oracle_partition(GeneratorFamily::Kl, &p, &p, 4), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn oracle_disjoint_support_levels() {
        let p = dist(&[0.5, 0.5, 0.0]);
        let q = dist(&[0.0, 0.5, 0.5]);
        let s = oracle_partition(GeneratorFamily::FrontierIntegral, &p, &q, 2).unwrap();
        // Atom 1 (equal) and atom 2 (P = 0) share the X1 level; atom 0 is in X2.
        assert_eq!(s.assignment(), &[1, 0, 0]);
    }

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [1.0, 3.0], [5.0, 1.0]];
        let model = kmeans(&pts, 1, 10, 7).unwrap();
        assert_eq!(model.centroids, vec![[2.0, 1.0]]);
        assert!(kmeans(&pts, 5, 10, 7).is_err());
    }

    #[test]
    fn nearest_tie_goes_to_lowest_index() {
        let model = CentroidModel {
            centroids: vec![[-1.0, 0.0], [1.0, 0.0]],
            inertia: 0.0,
            inertia_history: vec![],
            iterations: 0,
        };
        let h = assign_to_centroids(&[[0.0, 0.0], [1.0, 0.0]], &model).unwrap();
        assert_eq!(h.counts(), &[1, 1]);
        let h = assign_to_centroids(&[[0.0, 5.0]], &model).unwrap();
        assert_eq!(h.counts(), &[1, 0]);
    }
}
