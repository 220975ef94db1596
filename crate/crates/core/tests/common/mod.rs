//! Independent reference computations used by the integration tests. None of
//! these call into the library's numerical code paths.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};

/// Adjusted Rand index from the pair-counting contingency table.
pub fn ari(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut table: HashMap<(u32, u32), f64> = HashMap::new();
    let mut rows: HashMap<u32, f64> = HashMap::new();
    let mut cols: HashMap<u32, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = rows.values().map(|&v| c2(v)).sum();
    let sb: f64 = cols.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn unit_gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Unit vectors around `k` random directions in `d` dimensions. Each point
/// sits at angle `|N(0, sigma^2)|` from its center, in a uniformly random
/// tangent direction. Labels cycle through the centers.
pub fn planted_sphere(n: usize, k: usize, d: usize, sigma: f64, seed: u64) -> (Vec<f64>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k).map(|_| unit_gaussian(&mut rng, d)).collect();
    let mut rows = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        rows.extend(perturb(&mut rng, &centers[i % k], sigma));
        labels.push((i % k) as u32);
    }
    (rows, labels)
}

pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    unit_gaussian(rng, d)
}

/// A unit vector at angle `|N(0, sigma^2)|` from the unit vector `center`.
pub fn perturb(rng: &mut ChaCha8Rng, center: &[f64], sigma: f64) -> Vec<f64> {
    let d = center.len();
    let mut u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let proj: f64 = u.iter().zip(center).map(|(a, b)| a * b).sum();
    u.iter_mut().zip(center).for_each(|(x, ci)| *x -= proj * ci);
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let theta: f64 = Normal::new(0.0, sigma).unwrap().sample(rng).abs();
    center
        .iter()
        .zip(&u)
        .map(|(ci, ui)| theta.cos() * ci + theta.sin() * ui / un)
        .collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric `n x n` row-major matrix.
/// Returns eigenvalues descending with matching unit eigenvectors.
pub fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, vectors)
}

/// Sample covariance (divisor `n - 1`) by the two-pass textbook formula.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![0.0; d * d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= (n - 1) as f64);
    cov
}

/// Angle between the lines spanned by two unit vectors.
pub fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let resid: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| {
            let r = b - dot * a;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    resid.atan2(dot.abs())
}

/// Top words of a topic ranked by count, ties by id, from raw token tallies.
pub fn ranked_words(pairs: &[(u32, u32)], topic: u32, top_n: usize) -> Vec<u32> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &(w, z) in pairs {
        if z == topic {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut v: Vec<(u32, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(top_n).map(|(w, _)| w).collect()
}

/// Internal coherence by scanning every document for every pair.
pub fn brute_internal(docs: &[Vec<u32>], top: &[u32], eps: f64) -> f64 {
    let has = |d: &Vec<u32>, w: u32| d.contains(&w);
    let mut s = 0.0;
    for i in 1..top.len() {
        for j in 0..i {
            let both = docs.iter().filter(|d| has(d, top[i]) && has(d, top[j])).count() as f64;
            let dj = docs.iter().filter(|d| has(d, top[j])).count() as f64;
            s += ((both + eps) / dj).ln();
        }
    }
    s
}

/// Every window of `window` consecutive words (stride 1) in every non-empty
/// document; a shorter document is a single window.
pub fn enumerate_windows(docs: &[Vec<String>], window: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for d in docs.iter().filter(|d| !d.is_empty()) {
        if d.len() <= window {
            out.push(d.clone());
        } else {
            for start in 0..=d.len() - window {
                out.push(d[start..start + window].to_vec());
            }
        }
    }
    out
}

/// External PMI coherence over explicit windows, `None` if fewer than
/// `min_attested` of the top words appear anywhere.
pub fn brute_external(windows: &[Vec<String>], top: &[String], eps: f64, min_attested: usize) -> Option<f64> {
    let n = windows.len() as f64;
    let freq = |w: &String| windows.iter().filter(|win| win.contains(w)).count() as f64;
    let attested: Vec<&String> = top.iter().filter(|w| freq(w) > 0.0).collect();
    if attested.len() < min_attested {
        return None;
    }
    let mut s = 0.0;
    for i in 1..attested.len() {
        for j in 0..i {
            let both = windows
                .iter()
                .filter(|win| win.contains(attested[i]) && win.contains(attested[j]))
                .count() as f64;
            s += ((both / n + eps) / ((freq(attested[i]) / n) * (freq(attested[j]) / n))).ln();
        }
    }
    Some(s)
}

/// `-Σ p ln p` over a topic's word distribution from raw tallies.
pub fn brute_entropy(pairs: &[(u32, u32)], topic: u32) -> f64 {
    let ws: Vec<u32> = pairs.iter().filter(|p| p.1 == topic).map(|p| p.0).collect();
    let n = ws.len() as f64;
    let mut seen: Vec<u32> = ws.clone();
    seen.sort();
    seen.dedup();
    seen.iter()
        .map(|w| {
            let p = ws.iter().filter(|x| *x == w).count() as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `Pr(w|z)` by counting.
pub fn brute_prob(pairs: &[(u32, u32)], w: u32, topic: u32) -> f64 {
    let total = pairs.iter().filter(|p| p.1 == topic).count() as f64;
    pairs.iter().filter(|p| p.1 == topic && p.0 == w).count() as f64 / total
}

pub fn brute_exclusivity(pairs: &[(u32, u32)], w: u32, topic: u32, k: u32) -> f64 {
    let denom: f64 = (0..k)
        .filter(|&z| pairs.iter().any(|p| p.1 == z))
        .map(|z| brute_prob(pairs, w, z))
        .sum();
    brute_prob(pairs, w, topic) / denom
}

/// Spherical k-means objective of a partition: each cluster contributes the
/// norm of its member sum (the best achievable cosine total).
pub fn partition_objective(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    for (p, &l) in points.iter().zip(labels) {
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.iter().map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).sum()
}

/// Best objective over all 2-cluster partitions with both clusters non-empty.
pub fn exhaustive_two_way(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        best = best.max(partition_objective(points, &labels, 2));
    }
    best
}

pub fn dirichlet(rng: &mut ChaCha8Rng, alpha: f64, n: usize) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let mut v: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Greedy one-to-one matching by smallest distance; returns matched distances.
pub fn greedy_match(estimated: &[Vec<f64>], planted: &[Vec<f64>]) -> Vec<f64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, e) in estimated.iter().enumerate() {
        for (j, p) in planted.iter().enumerate() {
            pairs.push((total_variation(e, p), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_e = vec![false; estimated.len()];
    let mut used_p = vec![false; planted.len()];
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        if !used_e[i] && !used_p[j] {
            used_e[i] = true;
            used_p[j] = true;
            out.push(d);
        }
    }
    out
}
