//! Output-pruned DIF forward and input/output-pruned DIT inverse transforms.
//!
//! Both plans derive per-stage activity masks once from a [`PruneSpec`]; a
//! butterfly runs only when one of its outputs feeds a kept index and (for
//! the inverse) one of its inputs can be nonzero.

use super::{bit_reverse, factor_two, twiddles, OpCount, SpectralError};
use num_complex::Complex64;
use std::sync::Arc;

/// Which inputs may be nonzero and which outputs are wanted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneSpec {
    size: usize,
    input_nonzero: Vec<usize>,
    output_keep: Vec<usize>,
}

impl PruneSpec {
    /// Sorts and deduplicates both sets; rejects empty sets and stray indices.
    pub fn new(
        size: usize,
        input_nonzero: impl IntoIterator<Item = usize>,
        output_keep: impl IntoIterator<Item = usize>,
    ) -> Result<Self, SpectralError> {
        if size == 0 {
            return Err(SpectralError::Empty);
        }
        let clean = |it: &mut dyn Iterator<Item = usize>, what| -> Result<Vec<usize>, SpectralError> {
            let mut v: Vec<usize> = it.collect();
            v.sort_unstable();
            v.dedup();
            if v.is_empty() {
                return Err(SpectralError::EmptySet(what));
            }
            if let Some(&bad) = v.iter().find(|&&i| i >= size) {
                return Err(SpectralError::IndexOutOfRange { index: bad, size });
            }
            Ok(v)
        };
        let input_nonzero = clean(&mut input_nonzero.into_iter(), "input")?;
        let output_keep = clean(&mut output_keep.into_iter(), "output")?;
        Ok(Self { size, input_nonzero, output_keep })
    }

    /// Every input may be nonzero; only `keep` is computed.
    pub fn keep_outputs(size: usize, keep: impl IntoIterator<Item = usize>) -> Result<Self, SpectralError> {
        Self::new(size, 0..size, keep)
    }

    /// No pruning at all.
    pub fn full(size: usize) -> Result<Self, SpectralError> {
        Self::new(size, 0..size, 0..size)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn input_nonzero(&self) -> &[usize] {
        &self.input_nonzero
    }

    pub fn output_keep(&self) -> &[usize] {
        &self.output_keep
    }
}

/// Reusable output-pruned forward transform.
///
/// For `N = 2^k * m` a length-`m` split with twiddles runs first, then `m`
/// independent radix-2 DIF transforms of length `2^k`; position `b` of
/// block `r` ends up holding bin `m * bitrev(b) + r`. With `m = 1` this is
/// the plain radix-2 DIF graph.
#[derive(Debug, Clone)]
pub struct PrunedDif {
    n: usize,
    k: u32,
    m: usize,
    keep: Vec<usize>,
    /// Positions needed after the length-`m` split.
    split_need: Vec<bool>,
    /// `stage_out[s][i]`: position `i` is needed after radix-2 stage `s`.
    stage_out: Vec<Vec<bool>>,
    count: OpCount,
    tw: Arc<[Complex64]>,
}

impl PrunedDif {
    pub fn new(spec: &PruneSpec) -> Self {
        let n = spec.size;
        let (k, m) = factor_two(n);
        let p = 1usize << k;
        let mut cur = vec![false; n];
        for &f in &spec.output_keep {
            let (r, fp) = (f % m, f / m);
            cur[r * p + bit_reverse(fp, k)] = true;
        }
        let mut count = OpCount::default();
        let mut stage_out = vec![Vec::new(); k as usize];
        for s in (0..k as usize).rev() {
            let len = p >> s;
            let half = len / 2;
            let mut prev = vec![false; n];
            for start in (0..n).step_by(len) {
                for q in 0..half {
                    let (i, j) = (start + q, start + q + half);
                    if cur[i] || cur[j] {
                        prev[i] = true;
                        prev[j] = true;
                        count.butterflies += 1;
                        if cur[j] {
                            count.complex_mults += 1;
                        }
                    }
                }
            }
            stage_out[s] = std::mem::replace(&mut cur, prev);
        }
        if m > 1 {
            count.complex_mults += cur.iter().filter(|&&c| c).count() as u64 * (m as u64 + 1);
        }
        Self { n, k, m, keep: spec.output_keep.clone(), split_need: cur, stage_out, count, tw: twiddles(n) }
    }

    /// Operation count of one call (fixed by the spec).
    pub fn count(&self) -> OpCount {
        self.count
    }

    /// Kept bins, in ascending bin order.
    pub fn run(&self, x: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
        let (n, m, k) = (self.n, self.m, self.k);
        if x.len() != n {
            return Err(SpectralError::LengthMismatch { got: x.len(), size: n });
        }
        let p = 1usize << k;
        let mut buf = if m == 1 {
            x.to_vec()
        } else {
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for r in 0..m {
                for j in 0..p {
                    let pos = r * p + j;
                    if !self.split_need[pos] {
                        continue;
                    }
                    let s: Complex64 = (0..m).map(|l| x[j + l * p] * self.tw[((l * r) % m) * p]).sum();
                    y[pos] = s * self.tw[(j * r) % n];
                }
            }
            y
        };
        for (s, need) in self.stage_out.iter().enumerate() {
            let len = p >> s;
            let half = len / 2;
            let stride = (1usize << s) * m;
            for start in (0..n).step_by(len) {
                for q in 0..half {
                    let (i, j) = (start + q, start + q + half);
                    let (o1, o2) = (need[i], need[j]);
                    if !(o1 || o2) {
                        continue;
                    }
                    let (a, b) = (buf[i], buf[j]);
                    if o1 {
                        buf[i] = a + b;
                    }
                    if o2 {
                        buf[j] = (a - b) * self.tw[q * stride];
                    }
                }
            }
        }
        Ok(self.keep.iter().map(|&f| buf[(f % m) * p + bit_reverse(f / m, k)]).collect())
    }
}

/// Reusable input- and output-pruned inverse transform (scaled by `1/N`).
///
/// The transpose of [`PrunedDif`]: bins `m * f' + r` feed a radix-2 DIT
/// transform of length `2^k` in block `r`, and a final length-`m` merge with
/// twiddles produces each kept time sample.
#[derive(Debug, Clone)]
pub struct PrunedDit {
    n: usize,
    k: u32,
    m: usize,
    keep: Vec<usize>,
    /// `need[s][i]` / `nz[s][i]` describe position `i` after radix-2 stage `s` (0 = loaded input).
    need: Vec<Vec<bool>>,
    nz: Vec<Vec<bool>>,
    count: OpCount,
    tw: Arc<[Complex64]>,
}

impl PrunedDit {
    pub fn new(spec: &PruneSpec) -> Self {
        let n = spec.size;
        let (k, m) = factor_two(n);
        let p = 1usize << k;
        let mut loaded = vec![false; n];
        for &f in &spec.input_nonzero {
            loaded[(f % m) * p + bit_reverse(f / m, k)] = true;
        }
        let mut nz = vec![loaded];
        for s in 1..=k as usize {
            let len = 1usize << s;
            let half = len / 2;
            let prev = &nz[s - 1];
            let mut next = vec![false; n];
            for start in (0..n).step_by(len) {
                for q in 0..half {
                    let (i, j) = (start + q, start + q + half);
                    let v = prev[i] || prev[j];
                    next[i] = v;
                    next[j] = v;
                }
            }
            nz.push(next);
        }

        let mut count = OpCount::default();
        let mut last = vec![false; n];
        for &t in &spec.output_keep {
            for r in 0..m {
                let pos = r * p + t % p;
                if nz[k as usize][pos] {
                    last[pos] = true;
                    if m > 1 {
                        count.complex_mults += 1;
                    }
                }
            }
        }
        let mut need = vec![Vec::new(); k as usize + 1];
        need[k as usize] = last;
        for s in (1..=k as usize).rev() {
            let len = 1usize << s;
            let half = len / 2;
            let mut prev = vec![false; n];
            for start in (0..n).step_by(len) {
                for q in 0..half {
                    let (i, j) = (start + q, start + q + half);
                    let wanted = need[s][i] || need[s][j];
                    let (ne, no) = (nz[s - 1][i], nz[s - 1][j]);
                    if wanted && (ne || no) {
                        count.butterflies += 1;
                        if no {
                            count.complex_mults += 1;
                        }
                        prev[i] = ne;
                        prev[j] = no;
                    }
                }
            }
            need[s - 1] = prev;
        }
        Self { n, k, m, keep: spec.output_keep.clone(), need, nz, count, tw: twiddles(n) }
    }

    pub fn count(&self) -> OpCount {
        self.count
    }

    /// Kept time samples, in ascending index order. Inputs outside the
    /// nonzero set are never read.
    pub fn run(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
        let (n, m, k) = (self.n, self.m, self.k);
        if spectrum.len() != n {
            return Err(SpectralError::LengthMismatch { got: spectrum.len(), size: n });
        }
        let p = 1usize << k;
        let zero = Complex64::new(0.0, 0.0);
        let mut buf = vec![zero; n];
        for r in 0..m {
            for b in 0..p {
                let pos = r * p + b;
                if self.need[0][pos] {
                    buf[pos] = spectrum[m * bit_reverse(b, k) + r];
                }
            }
        }
        for s in 1..=k as usize {
            let len = 1usize << s;
            let half = len / 2;
            let stride = (p / len) * m;
            let (need, nz_in) = (&self.need[s], &self.nz[s - 1]);
            for start in (0..n).step_by(len) {
                for q in 0..half {
                    let (i, j) = (start + q, start + q + half);
                    let (o1, o2) = (need[i], need[j]);
                    if !(o1 || o2) {
                        continue;
                    }
                    let e = if nz_in[i] { buf[i] } else { zero };
                    let o = if nz_in[j] { buf[j] * self.tw[q * stride].conj() } else { zero };
                    if o1 {
                        buf[i] = e + o;
                    }
                    if o2 {
                        buf[j] = e - o;
                    }
                }
            }
        }
        let scale = 1.0 / n as f64;
        let last = &self.need[k as usize];
        Ok(self
            .keep
            .iter()
            .map(|&t| {
                let y: Complex64 = (0..m)
                    .filter(|&r| last[r * p + t % p])
                    .map(|r| {
                        let v = buf[r * p + t % p];
                        if m == 1 {
                            v
                        } else {
                            v * self.tw[(r * t) % n].conj()
                        }
                    })
                    .sum();
                y * scale
            })
            .collect())
    }
}

/// One-shot output-pruned forward transform.
pub fn fft_dif_pruned(x: &[Complex64], spec: &PruneSpec) -> Result<(Vec<Complex64>, OpCount), SpectralError> {
    let plan = PrunedDif::new(spec);
    Ok((plan.run(x)?, plan.count()))
}

/// One-shot pruned inverse transform.
pub fn ifft_dit_pruned(spectrum: &[Complex64], spec: &PruneSpec) -> Result<(Vec<Complex64>, OpCount), SpectralError> {
    let plan = PrunedDit::new(spec);
    Ok((plan.run(spectrum)?, plan.count()))
}
