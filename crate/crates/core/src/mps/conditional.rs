use super::MatrixProductState;
use crate::error::{Error, Result};
use crate::le::MeasurementStrategy;
use crate::linalg::{CMat, C64, ZERO};

fn mul_opt(a: Option<&CMat>, b: Option<&CMat>) -> Option<CMat> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(x * y),
    }
}

/// `Tr(x y)` without forming the product.
fn trace_of_product(x: &CMat, y: &CMat) -> C64 {
    let mut acc = ZERO;
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            acc += x[(r, c)] * y[(c, r)];
        }
    }
    acc
}

/// Ordered product of leaf matrices with logarithmic single-leaf updates.
#[derive(Clone, Debug)]
struct ProductTree {
    size: usize,
    nodes: Vec<Option<CMat>>,
}

impl ProductTree {
    fn new(leaves: Vec<CMat>) -> Self {
        let size = leaves.len().next_power_of_two().max(1);
        let mut nodes = vec![None; 2 * size];
        for (k, m) in leaves.into_iter().enumerate() {
            nodes[size + k] = Some(m);
        }
        for v in (1..size).rev() {
            nodes[v] = mul_opt(nodes[2 * v].as_ref(), nodes[2 * v + 1].as_ref());
        }
        Self { size, nodes }
    }

    fn product(&self) -> Option<&CMat> {
        self.nodes[1].as_ref()
    }

    fn set(&mut self, k: usize, m: CMat) {
        let mut v = self.size + k;
        self.nodes[v] = Some(m);
        v /= 2;
        while v >= 1 {
            self.nodes[v] = mul_opt(self.nodes[2 * v].as_ref(), self.nodes[2 * v + 1].as_ref());
            v /= 2;
        }
    }

    /// Product with leaf `k` replaced by `m`, leaving the tree unchanged.
    fn peek(&self, k: usize, m: &CMat) -> Option<CMat> {
        let mut v = self.size + k;
        let mut cur = Some(m.clone());
        while v > 1 {
            let sib = self.nodes[v ^ 1].as_ref();
            cur = if v % 2 == 0 { mul_opt(cur.as_ref(), sib) } else { mul_opt(sib, cur.as_ref()) };
            v /= 2;
        }
        cur
    }
}

/// Two-site amplitudes conditioned on outcomes at every other site of an MPS.
///
/// Measured tensors are rotated into their measurement basis once; the three
/// segments between and around the kept sites are held in product trees so
/// that changing one outcome costs `O(D^3 log N)`.
#[derive(Clone, Debug)]
pub struct ConditionalEvaluator {
    swapped: bool,
    kept_tensors: [Vec<CMat>; 2],
    rotated: Vec<Vec<CMat>>,
    measured: Vec<usize>,
    /// (segment, position) of each measured site
    place: Vec<(usize, usize)>,
    trees: [ProductTree; 3],
    outcome: Vec<usize>,
}

impl ConditionalEvaluator {
    /// `outcome[m]` is the outcome at the m-th measured chain site, in chain order.
    pub fn new(mps: &MatrixProductState, n: usize, strategy: &MeasurementStrategy, outcome: &[usize]) -> Result<Self> {
        let dims = mps.site_dims(n)?;
        strategy.check_dims(&dims)?;
        let sites = mps.site_tensors(n)?;
        let (i, j) = strategy.kept();
        let (lo, hi) = (i.min(j), i.max(j));
        let measured = strategy.measured_sites();
        if outcome.len() != measured.len() {
            return Err(Error::DimMismatch(format!("{} outcomes for {} measured sites", outcome.len(), measured.len())));
        }
        let mut rotated = Vec::with_capacity(measured.len());
        let mut place = Vec::with_capacity(measured.len());
        let mut leaves: [Vec<CMat>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (m, &k) in measured.iter().enumerate() {
            let u = strategy.basis(k).expect("measured site");
            let d = dims.dim(k);
            if outcome[m] >= d {
                return Err(Error::DimMismatch(format!("outcome {} at site {k} with dimension {d}", outcome[m])));
            }
            let mats: Vec<CMat> = (0..d)
                .map(|o| (0..d).fold(CMat::zeros(sites[k][0].nrows(), sites[k][0].ncols()), |acc, s| acc + &sites[k][s] * u[(s, o)].conj()))
                .collect();
            let seg = if k < lo {
                0
            } else if k < hi {
                1
            } else {
                2
            };
            place.push((seg, leaves[seg].len()));
            leaves[seg].push(mats[outcome[m]].clone());
            rotated.push(mats);
        }
        let [l0, l1, l2] = leaves;
        Ok(Self {
            swapped: i > j,
            kept_tensors: [sites[lo].clone(), sites[hi].clone()],
            rotated,
            measured,
            place,
            trees: [ProductTree::new(l0), ProductTree::new(l1), ProductTree::new(l2)],
            outcome: outcome.to_vec(),
        })
    }

    pub fn measured_sites(&self) -> &[usize] {
        &self.measured
    }

    pub fn outcome(&self) -> &[usize] {
        &self.outcome
    }

    pub fn local_dim(&self, m: usize) -> usize {
        self.rotated[m].len()
    }

    fn amplitudes_from(&self, p1: Option<&CMat>, p2: Option<&CMat>, p3: Option<&CMat>) -> Vec<C64> {
        let q = mul_opt(p3, p1);
        let [ta, tb] = &self.kept_tensors;
        let (da, db) = (ta.len(), tb.len());
        let mut out = vec![ZERO; da * db];
        for (a, xa) in ta.iter().enumerate() {
            let la = match p2 {
                Some(p) => xa * p,
                None => xa.clone(),
            };
            for (b, xb) in tb.iter().enumerate() {
                let m = &la * xb;
                let amp = match &q {
                    Some(qq) => trace_of_product(&m, qq),
                    None => m.trace(),
                };
                // output index follows the caller's (i, j) order
                let idx = if self.swapped { b * da + a } else { a * db + b };
                out[idx] = amp;
            }
        }
        out
    }

    /// Unnormalized conditional amplitudes, index `s_i * d_j + s_j`.
    pub fn amplitudes(&self) -> Vec<C64> {
        self.amplitudes_from(self.trees[0].product(), self.trees[1].product(), self.trees[2].product())
    }

    /// Amplitudes if measured site `m` had outcome `o` instead.
    pub fn amplitudes_with(&self, m: usize, o: usize) -> Vec<C64> {
        let (seg, pos) = self.place[m];
        let changed = self.trees[seg].peek(pos, &self.rotated[m][o]);
        let mut ps = [self.trees[0].product(), self.trees[1].product(), self.trees[2].product()];
        ps[seg] = changed.as_ref();
        self.amplitudes_from(ps[0], ps[1], ps[2])
    }

    pub fn set(&mut self, m: usize, o: usize) {
        let (seg, pos) = self.place[m];
        self.trees[seg].set(pos, self.rotated[m][o].clone());
        self.outcome[m] = o;
    }
}

/// Unnormalized two-site amplitudes and their weight `<phi|phi>` for one
/// outcome tuple (ordered like the measured sites).
pub fn conditional_state(
    mps: &MatrixProductState,
    n: usize,
    strategy: &MeasurementStrategy,
    outcome: &[usize],
) -> Result<(Vec<C64>, f64)> {
    let ev = ConditionalEvaluator::new(mps, n, strategy, outcome)?;
    let amps = ev.amplitudes();
    let w = amps.iter().map(|z| z.norm_sqr()).sum();
    Ok((amps, w))
}
