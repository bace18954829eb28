//! Exact rational Haar orthogonal moments via pair partitions.
//!
//! `E[M_{i1 j1} ... M_{i2r j2r}]` over Haar measure on `O(n)` is the sum of
//! Weingarten values `Wg(m, nn)` over pair partitions `m` pairing equal row
//! indices and `nn` pairing equal column indices. `Wg` is realized here as
//! the exact inverse of the Gram matrix `G[m][nn] = n^{l(m, nn)}`, where
//! `l` counts the components of the union multigraph of the two matchings.
//!
//! `Wg(m, nn)` only depends on the coset type of the pair (the multiset of
//! half component sizes), so instead of inverting the full
//! `(2r-1)!! x (2r-1)!!` Gram matrix we solve the collapsed linear system
//! with one unknown per coset type (at most 5 for `r <= 4`), using
//! fraction-free Bareiss elimination. The full-inverse contract is verified
//! exactly by the `Wg * G = I` tests.

mod solve;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, One, Zero};

use crate::sampling::{derive_stream, haar_orthogonal, Seed};
use crate::{Error, Result};

/// Largest supported pairing order `r` (moments of up to `2r = 8` entries).
pub const MAX_ORDER: usize = 4;

/// A perfect matching of `{0, .., 2r-1}`.
///
/// Stored canonically: each pair `(a, b)` with `a < b`, pairs sorted by
/// first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairPartition {
    pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        let size = pairs.len() * 2;
        let mut seen = vec![false; size];
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for &e in [p.0, p.1].iter() {
                if e >= size || seen[e] {
                    return Err(Error::NotABijection);
                }
                seen[e] = true;
            }
        }
        pairs.sort_unstable();
        Ok(PairPartition { pairs })
    }

    /// Number of matched elements, `2r`.
    pub fn size(&self) -> usize {
        self.pairs.len() * 2
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// All `(2r-1)!!` perfect matchings of `{0, .., size-1}` in a deterministic
/// order: the smallest unmatched element is paired with each larger one in
/// increasing order.
pub fn enumerate_pairings(size: usize) -> Result<Vec<PairPartition>> {
    if size % 2 != 0 {
        return Err(Error::OddPairingSize(size));
    }
    if size / 2 > MAX_ORDER || size == 0 {
        return Err(Error::UnsupportedMomentOrder {
            got: size,
            max: 2 * MAX_ORDER,
        });
    }
    let mut out = Vec::new();
    let mut used = vec![false; size];
    let mut current = Vec::with_capacity(size / 2);
    fn recurse(
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<PairPartition>,
    ) {
        let first = match used.iter().position(|u| !u) {
            Some(f) => f,
            None => {
                out.push(PairPartition {
                    pairs: current.clone(),
                });
                return;
            }
        };
        used[first] = true;
        for second in first + 1..used.len() {
            if used[second] {
                continue;
            }
            used[second] = true;
            current.push((first, second));
            recurse(used, current, out);
            current.pop();
            used[second] = false;
        }
        used[first] = false;
    }
    recurse(&mut used, &mut current, &mut out);
    Ok(out)
}

/// Number of connected components of the multigraph on `{0, .., 2r-1}`
/// whose edges are the pairs of `m` and `nn`.
pub fn loop_count(m: &PairPartition, nn: &PairPartition) -> Result<usize> {
    if m.size() != nn.size() {
        return Err(Error::PairingSizeMismatch(m.size(), nn.size()));
    }
    let size = m.size();
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in m.pairs().iter().chain(nn.pairs()) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    Ok((0..size).filter(|&x| find(&mut parent, x) == x).count())
}

/// Coset type of a pair of matchings: the multiset of half component sizes
/// of their union graph, a partition of `r`, sorted decreasingly.
fn coset_type(m: &PairPartition, nn: &PairPartition) -> Vec<usize> {
    let size = m.size();
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in m.pairs().iter().chain(nn.pairs()) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for x in 0..size {
        let r = find(&mut parent, x);
        *counts.entry(r).or_insert(0) += 1;
    }
    let mut parts: Vec<usize> = counts.values().map(|&c| c / 2).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// Exact Gram matrix `G[m][nn] = n^{l(m, nn)}`, indexed by the pairings of
/// [`enumerate_pairings`].
pub fn gram_matrix(r: usize, n: usize) -> Result<Vec<Vec<BigInt>>> {
    let pairings = enumerate_pairings(2 * r)?;
    let nb = BigInt::from(n);
    let mut g = vec![vec![BigInt::zero(); pairings.len()]; pairings.len()];
    for (i, m) in pairings.iter().enumerate() {
        for (j, nn) in pairings.iter().enumerate().skip(i) {
            let l = loop_count(m, nn)?;
            let v = num::pow::pow(nb.clone(), l);
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    Ok(g)
}

type TypeValues = HashMap<Vec<usize>, BigRational>;

fn cache() -> &'static Mutex<HashMap<(usize, usize), Arc<TypeValues>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TypeValues>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Weingarten value per coset type at order `r` and dimension `n`,
/// memoized per `(r, n)`.
fn weingarten_type_values(r: usize, n: usize) -> Result<Arc<TypeValues>> {
    if r == 0 || r > MAX_ORDER {
        return Err(Error::UnsupportedMomentOrder {
            got: 2 * r,
            max: 2 * MAX_ORDER,
        });
    }
    if n < 2 * r {
        return Err(Error::BelowInvertibilityRegime { n, r });
    }
    if let Some(v) = cache().lock().unwrap().get(&(r, n)) {
        return Ok(v.clone());
    }

    let pairings = enumerate_pairings(2 * r)?;
    let base = &pairings[0];
    // Class label and representative per coset type relative to the base
    // matching. The trivial type {1,..,1} is the class of `base` alone.
    let mut types: Vec<Vec<usize>> = Vec::new();
    let mut class_of: Vec<usize> = Vec::with_capacity(pairings.len());
    let mut representative: Vec<usize> = Vec::new();
    for (idx, p) in pairings.iter().enumerate() {
        let t = coset_type(p, base);
        match types.iter().position(|u| *u == t) {
            Some(k) => class_of.push(k),
            None => {
                types.push(t);
                representative.push(idx);
                class_of.push(types.len() - 1);
            }
        }
    }

    // Collapsed system: one equation per representative m_t,
    //   sum over classes t' of [ sum_{p in t'} n^{l(m_t, p)} ] * w(t')
    //   = 1 if m_t == base else 0.
    let k = types.len();
    let nb = BigInt::from(n);
    let mut system = vec![vec![BigInt::zero(); k]; k];
    let mut rhs = vec![BigInt::zero(); k];
    for (row, &rep) in representative.iter().enumerate() {
        for (idx, p) in pairings.iter().enumerate() {
            let l = loop_count(&pairings[rep], p)?;
            system[row][class_of[idx]] += num::pow::pow(nb.clone(), l);
        }
        if rep == 0 {
            rhs[row] = BigInt::one();
        }
    }
    let solution = solve::bareiss_solve(system, rhs);

    let values: TypeValues = types.into_iter().zip(solution).collect();
    let arc = Arc::new(values);
    cache().lock().unwrap().insert((r, n), arc.clone());
    Ok(arc)
}

/// Exact Weingarten matrix: the inverse of [`gram_matrix`], same indexing.
///
/// Requires the invertibility regime `n >= 2r`.
pub fn weingarten_matrix(r: usize, n: usize) -> Result<Vec<Vec<BigRational>>> {
    let values = weingarten_type_values(r, n)?;
    let pairings = enumerate_pairings(2 * r)?;
    let mut wg = vec![vec![BigRational::zero(); pairings.len()]; pairings.len()];
    for (i, m) in pairings.iter().enumerate() {
        for (j, nn) in pairings.iter().enumerate().skip(i) {
            let v = values[&coset_type(m, nn)].clone();
            wg[i][j] = v.clone();
            wg[j][i] = v;
        }
    }
    Ok(wg)
}

/// A product of matrix entries `M_{rows[t], cols[t]}` whose Haar expectation
/// is requested. Only the equality pattern of the labels matters for the
/// exact value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSpec {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl MomentSpec {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::SpecLengthMismatch {
                rows: rows.len(),
                cols: cols.len(),
            });
        }
        if rows.is_empty() || rows.len() % 2 != 0 {
            return Err(Error::OddPairingSize(rows.len()));
        }
        if rows.len() > 2 * MAX_ORDER {
            return Err(Error::UnsupportedMomentOrder {
                got: rows.len(),
                max: 2 * MAX_ORDER,
            });
        }
        Ok(MomentSpec { rows, cols })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Pairing order `r`, half the number of entries.
    pub fn order(&self) -> usize {
        self.rows.len() / 2
    }
}

/// Matchings that only pair positions carrying equal labels.
fn admissible_pairings(labels: &[usize]) -> Vec<PairPartition> {
    let size = labels.len();
    let mut out = Vec::new();
    let mut used = vec![false; size];
    let mut current = Vec::with_capacity(size / 2);
    fn recurse(
        labels: &[usize],
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<PairPartition>,
    ) {
        let first = match used.iter().position(|u| !u) {
            Some(f) => f,
            None => {
                out.push(PairPartition {
                    pairs: current.clone(),
                });
                return;
            }
        };
        used[first] = true;
        for second in first + 1..labels.len() {
            if used[second] || labels[second] != labels[first] {
                continue;
            }
            used[second] = true;
            current.push((first, second));
            recurse(labels, used, current, out);
            current.pop();
            used[second] = false;
        }
        used[first] = false;
    }
    recurse(labels, &mut used, &mut current, &mut out);
    out
}

fn has_odd_multiplicity(labels: &[usize]) -> bool {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts.values().any(|c| c % 2 != 0)
}

/// Exact value of `E[prod M_{rows[t], cols[t]}]` over Haar measure on `O(n)`.
///
/// Returns zero immediately when any row or column label has odd
/// multiplicity.
pub fn haar_moment(spec: &MomentSpec, n: usize) -> Result<BigRational> {
    let r = spec.order();
    if n < 2 * r {
        return Err(Error::BelowInvertibilityRegime { n, r });
    }
    if has_odd_multiplicity(&spec.rows) || has_odd_multiplicity(&spec.cols) {
        return Ok(BigRational::zero());
    }
    let row_pairings = admissible_pairings(&spec.rows);
    let col_pairings = admissible_pairings(&spec.cols);
    let values = weingarten_type_values(r, n)?;
    let mut total = BigRational::zero();
    for m in &row_pairings {
        for nn in &col_pairings {
            total += values[&coset_type(m, nn)].clone();
        }
    }
    Ok(total)
}

/// Asymptotic exponent `e` with `haar_moment = Theta(n^e)`: the maximum of
/// `l(m, nn) - 2r` over admissible pairs. `None` means the moment is exactly
/// zero at every n (no admissible pairing pair).
pub fn moment_order(spec: &MomentSpec) -> Result<Option<i64>> {
    let r = spec.order() as i64;
    if has_odd_multiplicity(&spec.rows) || has_odd_multiplicity(&spec.cols) {
        return Ok(None);
    }
    let row_pairings = admissible_pairings(&spec.rows);
    let col_pairings = admissible_pairings(&spec.cols);
    let mut best: Option<i64> = None;
    for m in &row_pairings {
        for nn in &col_pairings {
            let l = loop_count(m, nn)? as i64;
            let e = l - 2 * r;
            best = Some(best.map_or(e, |b: i64| b.max(e)));
        }
    }
    Ok(best)
}

/// Monte Carlo estimate `(mean, standard error)` of the entry product over
/// `replicates` Haar draws, the validation bridge to the sampling module.
///
/// Here `rows` and `cols` are actual 0-based indices and must be below `n`.
pub fn monte_carlo_moment(
    spec: &MomentSpec,
    n: usize,
    replicates: usize,
    seed: Seed,
) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::TooFewReplicates {
            need: 2,
            got: replicates,
        });
    }
    for &idx in spec.rows.iter().chain(&spec.cols) {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..replicates {
        let mut stream = derive_stream(seed, i as u64);
        let m = haar_orthogonal(n, &mut stream)?;
        let mut prod = 1.0;
        for (&a, &b) in spec.rows.iter().zip(&spec.cols) {
            prod *= m.get(a, b);
        }
        sum += prod;
        sum_sq += prod * prod;
    }
    let nf = replicates as f64;
    let mean = sum / nf;
    let var = (sum_sq - nf * mean * mean) / (nf - 1.0);
    Ok((mean, (var.max(0.0) / nf).sqrt()))
}

/// Formats an exact rational as "p/q" (or "p" for integers).
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Lossy conversion to f64 for use in floating-point predictions.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Out-of-range num/denom pairs: fall back to a quotient of lossy halves.
        x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
    })
}
