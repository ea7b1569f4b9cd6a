//! Finite-alphabet distributions, channels, entropy and mutual information.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admitted product-alphabet size of a single tensor.
pub const MAX_ENTRIES: usize = 4096;
/// Normalization tolerance for distributions and channel slices.
pub const SUM_TOL: f64 = 1e-12;
/// Negative information within this margin is clamped to zero.
pub const MI_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawTensor {
    axes: Vec<(String, usize)>,
    probs: Vec<f64>,
}

fn product_size(axes: &[(String, usize)]) -> Result<usize> {
    let mut n: usize = 1;
    for (name, size) in axes {
        if *size == 0 {
            return Err(Error::InvalidDistribution(format!(
                "axis `{name}` has size 0"
            )));
        }
        n = n.checked_mul(*size).ok_or(Error::TooLarge(usize::MAX))?;
        if n > MAX_ENTRIES {
            return Err(Error::TooLarge(n));
        }
    }
    Ok(n)
}

fn check_unique(axes: &[(String, usize)]) -> Result<()> {
    for (i, (a, _)) in axes.iter().enumerate() {
        if axes[..i].iter().any(|(b, _)| a == b) {
            return Err(Error::DuplicateAxis(a.clone()));
        }
    }
    Ok(())
}

fn strides(axes: &[(String, usize)]) -> Vec<usize> {
    let mut s = vec![1; axes.len()];
    for k in (0..axes.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * axes[k + 1].1;
    }
    s
}

/// Joint probability tensor over named finite alphabets, row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct JointDist {
    axes: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl TryFrom<RawTensor> for JointDist {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        JointDist::new(raw.axes, raw.probs)
    }
}

impl From<JointDist> for RawTensor {
    fn from(d: JointDist) -> Self {
        RawTensor {
            axes: d.axes,
            probs: d.probs,
        }
    }
}

impl JointDist {
    pub fn new(axes: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        check_unique(&axes)?;
        let n = product_size(&axes)?;
        if probs.len() != n {
            return Err(Error::InvalidDistribution(format!(
                "expected {n} probabilities, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} is not a probability"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(JointDist { axes, probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(axes: Vec<(String, usize)>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        JointDist::new(axes, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(axes: Vec<(String, usize)>) -> Result<Self> {
        let n = product_size(&axes)?;
        JointDist::new(axes, vec![1.0 / n as f64; n])
    }

    /// Point mass at the given coordinates.
    pub fn point_mass(axes: Vec<(String, usize)>, at: &[usize]) -> Result<Self> {
        let n = product_size(&axes)?;
        if at.len() != axes.len() || at.iter().zip(&axes).any(|(c, (_, s))| c >= s) {
            return Err(Error::InvalidDistribution(
                "point mass coordinates out of range".into(),
            ));
        }
        let st = strides(&axes);
        let mut probs = vec![0.0; n];
        probs[at.iter().zip(&st).map(|(c, s)| c * s).sum::<usize>()] = 1.0;
        JointDist::new(axes, probs)
    }

    /// Builds a distribution from a base distribution and a deterministic map
    /// of each base outcome to coordinates on new axes.
    pub fn push_forward<F>(base: &JointDist, axes: Vec<(String, usize)>, map: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<usize>,
    {
        check_unique(&axes)?;
        let n = product_size(&axes)?;
        let st = strides(&axes);
        let mut probs = vec![0.0; n];
        let mut coords = vec![0; base.axes.len()];
        for (i, p) in base.probs.iter().enumerate() {
            base.decode(i, &mut coords);
            let out = map(&coords);
            if out.len() != axes.len() || out.iter().zip(&axes).any(|(c, (_, s))| c >= s) {
                return Err(Error::InvalidDistribution(
                    "push-forward coordinates out of range".into(),
                ));
            }
            probs[out.iter().zip(&st).map(|(c, s)| c * s).sum::<usize>()] += p;
        }
        JointDist::new(axes, probs)
    }

    pub fn axes(&self) -> &[(String, usize)] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axis_size(&self, name: &str) -> Result<usize> {
        Ok(self.axes[self.index_of(name)?].1)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Writes the coordinates of flat index `i` into `coords`.
    pub fn decode(&self, mut i: usize, coords: &mut [usize]) {
        for k in (0..self.axes.len()).rev() {
            let s = self.axes[k].1;
            coords[k] = i % s;
            i /= s;
        }
    }

    pub fn prob_at(&self, coords: &[usize]) -> f64 {
        let st = strides(&self.axes);
        self.probs[coords.iter().zip(&st).map(|(c, s)| c * s).sum::<usize>()]
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n)).collect()
    }

    /// Marginal probabilities over the axes at `idx` (kept in axis order).
    fn marginal_probs(&self, idx: &[usize]) -> Vec<f64> {
        let mut keep: Vec<usize> = idx.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let size: usize = keep.iter().map(|&k| self.axes[k].1).product();
        let mut tstride = vec![0usize; self.axes.len()];
        let mut acc = 1;
        for &k in keep.iter().rev() {
            tstride[k] = acc;
            acc *= self.axes[k].1;
        }
        let mut out = vec![0.0; size];
        let mut coords = vec![0usize; self.axes.len()];
        let mut t = 0usize;
        for &p in &self.probs {
            out[t] += p;
            // odometer increment, keeping the target index in sync
            for k in (0..self.axes.len()).rev() {
                coords[k] += 1;
                t += tstride[k];
                if coords[k] < self.axes[k].1 {
                    break;
                }
                t -= tstride[k] * coords[k];
                coords[k] = 0;
            }
        }
        out
    }

    fn entropy_idx(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        -self
            .marginal_probs(idx)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }

    /// Shannon entropy in bits of the listed variables.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        Ok(self.entropy_idx(&self.resolve(vars)?))
    }

    /// Marginal over `keep`, in the original axis order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDist> {
        let mut idx = self.resolve(keep)?;
        idx.sort_unstable();
        idx.dedup();
        let axes: Vec<_> = idx.iter().map(|&k| self.axes[k].clone()).collect();
        let probs = self.marginal_probs(&idx);
        let total: f64 = probs.iter().sum();
        JointDist::new(axes, probs.into_iter().map(|p| p / total).collect())
    }

    /// I(left; right | given) in bits.
    pub fn mutual_information(&self, left: &[&str], right: &[&str], given: &[&str]) -> Result<f64> {
        let l = self.resolve(left)?;
        let r = self.resolve(right)?;
        let g = self.resolve(given)?;
        for (a, b) in [(&l, &r), (&l, &g), (&r, &g)] {
            if let Some(k) = a.iter().find(|k| b.contains(k)) {
                return Err(Error::OverlappingSets(self.axes[*k].0.clone()));
            }
        }
        if l.is_empty() || r.is_empty() {
            return Ok(0.0);
        }
        let cat = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().chain(b).copied().collect() };
        let lg = cat(&l, &g);
        let rg = cat(&r, &g);
        let lrg = cat(&lg, &r);
        let mi = self.entropy_idx(&lg) + self.entropy_idx(&rg)
            - self.entropy_idx(&lrg)
            - self.entropy_idx(&g);
        clamp_information(mi)
    }
}

/// Applies the negative-information tolerance.
pub fn clamp_information(mi: f64) -> Result<f64> {
    if mi < -MI_CLAMP {
        Err(Error::NegativeInformation(mi))
    } else {
        Ok(mi.max(0.0))
    }
}

pub fn marginalize(dist: &JointDist, keep: &[&str]) -> Result<JointDist> {
    dist.marginalize(keep)
}

pub fn mutual_information(
    dist: &JointDist,
    left: &[&str],
    right: &[&str],
    given: &[&str],
) -> Result<f64> {
    dist.mutual_information(left, right, given)
}
/// Output axes with a table indexed `[(x1 * |X2| + x2) * size + o]`.
pub type OutputLaw = (Vec<(String, usize)>, Vec<f64>);

/// Memoryless channel from (X1, X2) to named outputs. Outputs whose names
/// start with `Y` are primary receivers, those starting with `Z` secondary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct DmcChannel {
    x1: usize,
    x2: usize,
    outputs: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl TryFrom<RawTensor> for DmcChannel {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        if raw.axes.len() < 4 || raw.axes[0].0 != "X1" || raw.axes[1].0 != "X2" {
            return Err(Error::InvalidChannel(
                "axes must start with X1, X2 followed by outputs".into(),
            ));
        }
        let mut axes = raw.axes;
        let outputs = axes.split_off(2);
        DmcChannel::new(axes[0].1, axes[1].1, outputs, raw.probs)
    }
}

impl From<DmcChannel> for RawTensor {
    fn from(c: DmcChannel) -> Self {
        let mut axes = vec![("X1".to_string(), c.x1), ("X2".to_string(), c.x2)];
        axes.extend(c.outputs);
        RawTensor {
            axes,
            probs: c.probs,
        }
    }
}

impl DmcChannel {
    pub fn new(
        x1: usize,
        x2: usize,
        outputs: Vec<(String, usize)>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let mut all = vec![("X1".to_string(), x1), ("X2".to_string(), x2)];
        all.extend(outputs.iter().cloned());
        check_unique(&all)?;
        let n = product_size(&all)?;
        if outputs
            .iter()
            .any(|(o, _)| !(o.starts_with('Y') || o.starts_with('Z')))
        {
            return Err(Error::InvalidChannel(
                "output names must start with Y or Z".into(),
            ));
        }
        let chan = DmcChannel {
            x1,
            x2,
            outputs,
            probs,
        };
        if chan.primary().is_empty() || chan.secondary().is_empty() {
            return Err(Error::InvalidChannel(
                "need at least one Y and one Z output".into(),
            ));
        }
        if chan.probs.len() != n {
            return Err(Error::InvalidChannel(format!(
                "expected {n} entries, got {}",
                chan.probs.len()
            )));
        }
        if chan.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidChannel(
                "negative or non-finite transition".into(),
            ));
        }
        for a in 0..x1 {
            for b in 0..x2 {
                let s: f64 = chan.slice(a, b).iter().sum();
                if (s - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "slice ({a},{b}) sums to {s}"
                    )));
                }
            }
        }
        Ok(chan)
    }

    /// Builds a channel from per-input output laws `f(x1, x2) -> P(outputs)`.
    pub fn from_fn<F>(x1: usize, x2: usize, outputs: Vec<(String, usize)>, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Vec<f64>,
    {
        let mut probs = Vec::new();
        for a in 0..x1 {
            for b in 0..x2 {
                probs.extend(f(a, b));
            }
        }
        DmcChannel::new(x1, x2, outputs, probs)
    }

    /// Channel whose outputs are conditionally independent given the inputs;
    /// `laws[k][x1][x2]` is the law of output `k`.
    pub fn product(
        x1: usize,
        x2: usize,
        outputs: Vec<(String, usize)>,
        laws: &[Vec<Vec<Vec<f64>>>],
    ) -> Result<Self> {
        if laws.len() != outputs.len() {
            return Err(Error::InvalidChannel("one law per output required".into()));
        }
        let out_axes = outputs.clone();
        DmcChannel::from_fn(x1, x2, outputs, |a, b| {
            let mut v = vec![1.0];
            for (k, (_, size)) in out_axes.iter().enumerate() {
                let law = &laws[k][a][b];
                let mut next = Vec::with_capacity(v.len() * size);
                for p in &v {
                    for o in 0..*size {
                        next.push(p * law.get(o).copied().unwrap_or(f64::NAN));
                    }
                }
                v = next;
            }
            v
        })
    }

    /// Noiseless channel: each output is a deterministic function of the inputs.
    pub fn deterministic<F>(
        x1: usize,
        x2: usize,
        outputs: Vec<(String, usize)>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(usize, usize) -> Vec<usize>,
    {
        let out_axes = outputs.clone();
        DmcChannel::from_fn(x1, x2, outputs, |a, b| {
            let sym = f(a, b);
            let n: usize = out_axes.iter().map(|(_, s)| s).product();
            let mut v = vec![0.0; n];
            let mut idx = 0;
            for (k, (_, s)) in out_axes.iter().enumerate() {
                idx = idx * s + sym.get(k).copied().unwrap_or(usize::MAX).min(s - 1);
            }
            v[idx] = 1.0;
            v
        })
    }

    /// Each input slice drawn from a symmetric Dirichlet(1) law.
    pub fn random<R: Rng + ?Sized>(
        x1: usize,
        x2: usize,
        outputs: Vec<(String, usize)>,
        rng: &mut R,
    ) -> Result<Self> {
        let n: usize = outputs.iter().map(|(_, s)| s).product();
        let mut probs = Vec::with_capacity(x1 * x2 * n);
        for _ in 0..x1 * x2 {
            probs.extend(sample_dirichlet(rng, n));
        }
        DmcChannel::new(x1, x2, outputs, probs)
    }

    pub fn x1_size(&self) -> usize {
        self.x1
    }

    pub fn x2_size(&self) -> usize {
        self.x2
    }

    pub fn outputs(&self) -> &[(String, usize)] {
        &self.outputs
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Primary receiver names (`Y…`) in declaration order.
    pub fn primary(&self) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(o, _)| o.starts_with('Y'))
            .map(|(o, _)| o.clone())
            .collect()
    }

    /// Secondary receiver names (`Z…`) in declaration order.
    pub fn secondary(&self) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(o, _)| o.starts_with('Z'))
            .map(|(o, _)| o.clone())
            .collect()
    }

    fn out_size(&self) -> usize {
        self.outputs.iter().map(|(_, s)| s).product()
    }

    /// P(outputs | x1, x2) as a row-major slice over the output axes.
    pub fn slice(&self, x1: usize, x2: usize) -> &[f64] {
        let n = self.out_size();
        let start = (x1 * self.x2 + x2) * n;
        &self.probs[start..start + n]
    }

    /// Marginal law of the listed outputs, as `(axes, table)` with the table
    /// indexed `[(x1 * |X2| + x2) * size + o]`.
    pub fn output_law(&self, keep: &[&str]) -> Result<OutputLaw> {
        let mut idx = Vec::new();
        for k in keep {
            let i = self
                .outputs
                .iter()
                .position(|(o, _)| o == k)
                .ok_or_else(|| Error::UnknownVariable(k.to_string()))?;
            if idx.contains(&i) {
                return Err(Error::OverlappingSets(k.to_string()));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        let axes: Vec<_> = idx.iter().map(|&i| self.outputs[i].clone()).collect();
        let mut table = Vec::new();
        for a in 0..self.x1 {
            for b in 0..self.x2 {
                let slice = JointDist {
                    axes: self.outputs.clone(),
                    probs: self.slice(a, b).to_vec(),
                };
                table.extend(slice.marginal_probs(&idx));
            }
        }
        Ok((axes, table))
    }
}

fn compose_table(
    inputs: &JointDist,
    x1: usize,
    x2: usize,
    out_axes: Vec<(String, usize)>,
    table: &[f64],
) -> Result<JointDist> {
    let i1 = inputs.index_of("X1")?;
    let i2 = inputs.index_of("X2")?;
    if inputs.axes[i1].1 != x1 || inputs.axes[i2].1 != x2 {
        return Err(Error::AlphabetMismatch(format!(
            "inputs are {}x{}, channel expects {x1}x{x2}",
            inputs.axes[i1].1, inputs.axes[i2].1
        )));
    }
    let mut axes = inputs.axes.clone();
    axes.extend(out_axes.iter().cloned());
    check_unique(&axes)?;
    product_size(&axes)?;
    let n: usize = out_axes.iter().map(|(_, s)| s).product();
    let mut probs = Vec::with_capacity(inputs.probs.len() * n);
    let mut coords = vec![0; inputs.axes.len()];
    for (i, p) in inputs.probs.iter().enumerate() {
        inputs.decode(i, &mut coords);
        let start = (coords[i1] * x2 + coords[i2]) * n;
        probs.extend(table[start..start + n].iter().map(|w| p * w));
    }
    let total: f64 = probs.iter().sum();
    JointDist::new(axes, probs.into_iter().map(|q| q / total).collect())
}

/// Full joint of the inputs with every channel output appended.
pub fn compose_with_channel(inputs: &JointDist, chan: &DmcChannel) -> Result<JointDist> {
    compose_table(inputs, chan.x1, chan.x2, chan.outputs.clone(), &chan.probs)
}

/// Joint of the inputs with only the listed outputs appended.
pub fn compose_outputs(
    inputs: &JointDist,
    chan: &DmcChannel,
    outputs: &[&str],
) -> Result<JointDist> {
    let (axes, table) = chan.output_law(outputs)?;
    compose_table(inputs, chan.x1, chan.x2, axes, &table)
}

/// Symmetric Dirichlet(1) draw of dimension `n`, strictly positive.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Rng for work item `k` of a seeded stream.
pub fn stream_rng(seed: u64, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(k))
}

/// Strictly positive Dirichlet(1) distribution over the product alphabet.
pub fn sample_input_dist(axes: &[(String, usize)], seed: u64) -> Result<JointDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_dist_with(axes, &mut rng)
}

pub fn sample_dist_with<R: Rng + ?Sized>(
    axes: &[(String, usize)],
    rng: &mut R,
) -> Result<JointDist> {
    check_unique(axes)?;
    let n = product_size(axes)?;
    JointDist::from_weights(axes.to_vec(), sample_dirichlet(rng, n))
}

/// Convenience for building axis lists.
pub fn axes(spec: &[(&str, usize)]) -> Vec<(String, usize)> {
    spec.iter().map(|(n, s)| (n.to_string(), *s)).collect()
}
