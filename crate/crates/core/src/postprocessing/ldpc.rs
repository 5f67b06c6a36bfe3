//! Sparse parity-check codes used in syndrome mode, and their sum-product decoder.
//!
//! Alice publishes the syndrome `H·a` of her block; Bob runs belief propagation
//! from his own soft information toward a word with that syndrome.
//!
//! Text format: lines starting with `#` are comments, except a header
//! `# n = <block length>`. Every other line is one check node, listing the
//! variable indices it touches separated by spaces.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::{Domain, Stream};

/// Messages are kept away from ±1 in the tanh domain.
const TANH_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeCode {
    block_len: usize,
    checks: Vec<Vec<usize>>,
    // Edge-indexed views of the same graph.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl SyndromeCode {
    pub fn from_checks(block_len: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        if block_len == 0 || checks.is_empty() {
            return Err(Error::Empty("parity-check matrix"));
        }
        let mut check_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); block_len];
        for (c, row) in checks.iter().enumerate() {
            check_start.push(edge_var.len());
            let mut sorted = row.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Dimension(format!("check {c} repeats a variable")));
            }
            for &v in row {
                if v >= block_len {
                    return Err(Error::Dimension(format!("check {c} names variable {v} >= {block_len}")));
                }
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
        }
        check_start.push(edge_var.len());
        Ok(Self {
            block_len,
            checks,
            check_start,
            edge_var,
            var_edges,
        })
    }

    /// Progressive-edge-growth construction with `column_weight` edges per
    /// variable. Ties between equally good checks are broken by a stream
    /// derived from `seed`, so the same arguments always give the same code.
    pub fn peg(block_len: usize, syndrome_len: usize, column_weight: usize, seed: u64) -> Result<Self> {
        Self::peg_with_degrees(&vec![column_weight; block_len], syndrome_len, seed)
    }

    /// PEG construction with a per-variable degree; variables are connected in
    /// the order given, so list low degrees first.
    pub fn peg_with_degrees(degrees: &[usize], syndrome_len: usize, seed: u64) -> Result<Self> {
        let block_len = degrees.len();
        if syndrome_len == 0 || syndrome_len >= block_len {
            return Err(Error::Dimension(format!(
                "syndrome length {syndrome_len} must be in 1..{block_len}"
            )));
        }
        if let Some(&w) = degrees.iter().find(|&&w| w == 0 || w > syndrome_len) {
            return Err(Error::Dimension(format!("column weight {w} for {syndrome_len} checks")));
        }
        let mut rng = Stream::from_seed(seed, Domain::Codes);
        let mut check_vars: Vec<Vec<usize>> = vec![Vec::new(); syndrome_len];
        let mut var_checks: Vec<Vec<usize>> = vec![Vec::new(); block_len];
        let mut seen_check = vec![usize::MAX; syndrome_len];
        let mut seen_var = vec![usize::MAX; block_len];
        let mut stamp = 0usize;

        for (v, &degree) in degrees.iter().enumerate() {
            for k in 0..degree {
                let candidates: Vec<usize> = if k == 0 {
                    (0..syndrome_len).collect()
                } else {
                    stamp += 1;
                    farthest_checks(v, &check_vars, &var_checks, &mut seen_check, &mut seen_var, stamp)
                };
                let allowed = candidates.into_iter().filter(|c| !var_checks[v].contains(c));
                let mut best: Vec<usize> = Vec::new();
                let mut best_degree = usize::MAX;
                for c in allowed {
                    let d = check_vars[c].len();
                    if d < best_degree {
                        best_degree = d;
                        best.clear();
                    }
                    if d == best_degree {
                        best.push(c);
                    }
                }
                let c = best[rng.below(best.len() as u64) as usize];
                check_vars[c].push(v);
                var_checks[v].push(c);
            }
        }
        Self::from_checks(block_len, check_vars)
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn syndrome_len(&self) -> usize {
        self.checks.len()
    }

    /// `1 - syndrome_len / block_len`.
    pub fn rate(&self) -> f64 {
        1.0 - self.syndrome_len() as f64 / self.block_len as f64
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn syndrome(&self, bits: &[bool]) -> Result<Vec<bool>> {
        self.check_len(bits.len())?;
        Ok(self
            .checks
            .iter()
            .map(|row| row.iter().fold(false, |acc, &v| acc ^ bits[v]))
            .collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.block_len {
            return Err(Error::Dimension(format!(
                "block of {len} bits for a code of length {}",
                self.block_len
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# n = {}\n", self.block_len);
        for row in &self.checks {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut block_len = None;
        let mut checks = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("n =") {
                    let n = value.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                    block_len = Some(n);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            checks.push(row);
        }
        let n = match block_len {
            Some(n) => n,
            None => checks.iter().flatten().max().map_or(0, |m| m + 1),
        };
        Self::from_checks(n, checks)
    }

    /// Sum-product decoding toward `target` syndrome.
    ///
    /// `llr[i] = ln P(bit i = 0) / P(bit i = 1)` from the channel. Returns the
    /// decoded word and the number of message-passing iterations used (0 when
    /// the hard decisions already satisfy the syndrome).
    pub fn decode(&self, llr: &[f64], target: &[bool], max_iterations: usize) -> Result<(Vec<bool>, usize)> {
        self.check_len(llr.len())?;
        if target.len() != self.syndrome_len() {
            return Err(Error::Dimension(format!(
                "syndrome of {} bits for {} checks",
                target.len(),
                self.syndrome_len()
            )));
        }
        let mut hard: Vec<bool> = llr.iter().map(|&l| l < 0.0).collect();
        if self.syndrome(&hard)? == target {
            return Ok((hard, 0));
        }

        // Layered schedule: checks are updated one at a time against running
        // posteriors, which converges in roughly half the flooding iterations.
        let mut posterior = llr.to_vec();
        let mut to_var = vec![0.0; self.edge_var.len()];
        let mut incoming = Vec::new();
        let mut suffix = Vec::new();

        for iteration in 1..=max_iterations {
            for (c, &flip) in target.iter().enumerate() {
                let (start, end) = (self.check_start[c], self.check_start[c + 1]);
                let vars = &self.edge_var[start..end];
                incoming.clear();
                incoming.extend(vars.iter().zip(&to_var[start..end]).map(|(&v, m)| posterior[v] - m));
                suffix.clear();
                suffix.resize(incoming.len() + 1, 1.0);
                for i in (0..incoming.len()).rev() {
                    suffix[i] = suffix[i + 1] * (0.5 * incoming[i]).tanh();
                }
                let sign = if flip { -1.0 } else { 1.0 };
                let mut prefix = 1.0;
                for (i, &v) in vars.iter().enumerate() {
                    let others = (prefix * suffix[i + 1]).clamp(-TANH_LIMIT, TANH_LIMIT);
                    let message = sign * 2.0 * others.atanh();
                    to_var[start + i] = message;
                    posterior[v] = incoming[i] + message;
                    prefix *= (0.5 * incoming[i]).tanh();
                }
            }
            for (h, &p) in hard.iter_mut().zip(&posterior) {
                *h = p < 0.0;
            }
            if self.syndrome(&hard)? == target {
                return Ok((hard, iteration));
            }
        }
        Err(Error::DecodingFailure {
            iterations: max_iterations,
        })
    }
}

/// Checks in the complement of `v`'s current neighbourhood tree, or the
/// deepest layer when the tree reaches every check.
fn farthest_checks(
    v: usize,
    check_vars: &[Vec<usize>],
    var_checks: &[Vec<usize>],
    seen_check: &mut [usize],
    seen_var: &mut [usize],
    stamp: usize,
) -> Vec<usize> {
    let total = check_vars.len();
    let mut reached = 0;
    let mut layer: Vec<usize> = Vec::new();
    seen_var[v] = stamp;
    for &c in &var_checks[v] {
        if seen_check[c] != stamp {
            seen_check[c] = stamp;
            reached += 1;
            layer.push(c);
        }
    }
    let mut queue: VecDeque<usize> = VecDeque::new();
    loop {
        let mut next = Vec::new();
        for &c in &layer {
            for &u in &check_vars[c] {
                if seen_var[u] == stamp {
                    continue;
                }
                seen_var[u] = stamp;
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &c in &var_checks[u] {
                if seen_check[c] != stamp {
                    seen_check[c] = stamp;
                    reached += 1;
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            // The tree stopped growing: prefer checks it never reached.
            let unreached: Vec<usize> = (0..total).filter(|&c| seen_check[c] != stamp).collect();
            return if unreached.is_empty() { layer } else { unreached };
        }
        if reached == total {
            return next;
        }
        layer = next;
    }
}

/// Result of one successful syndrome decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub bits: Vec<bool>,
    /// Syndrome bits disclosed; each reveals at most one bit.
    pub leaked_bits: usize,
    pub iterations: usize,
}

/// Corrects Bob's block toward Alice's syndrome.
pub fn ldpc_correct(
    key_b: &[bool],
    llr: &[f64],
    syndrome_a: &[bool],
    code: &SyndromeCode,
    max_iterations: usize,
) -> Result<Correction> {
    if key_b.len() != llr.len() {
        return Err(Error::Dimension(format!("{} bits but {} likelihoods", key_b.len(), llr.len())));
    }
    let (bits, iterations) = code.decode(llr, syndrome_a, max_iterations)?;
    Ok(Correction {
        bits,
        leaked_bits: code.syndrome_len(),
        iterations,
    })
}
