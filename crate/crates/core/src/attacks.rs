//! Exhaustive deception probabilities and incidence-count verification.
//!
//! Incidence between rules and messages is containment throughout: a
//! receiver rule `e_R` accepts `m` iff `e_R ⊆ m`, and `e_R` authenticates what
//! `e_T` encodes iff `e_R ⊆ e_T`. All maxima are taken over the fully
//! materialized sets, as exact rationals, with the first maximizer in
//! canonical order kept as the witness.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::code::{types, CodeInstance};
use crate::enumeration::{count_n_gated, gaussian_binomial, subspaces_between, subspaces_typed, IntervalQuery};
use crate::field::FieldSpec;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::Subspace;
use crate::report::{ser_display, ser_opt_display, Check, Prob};

/// Containment relations between the four sets, as sorted index lists.
#[derive(Clone, Debug)]
pub struct Incidence {
    /// per message: receiver rules inside it
    pub er_in_m: Vec<Vec<u32>>,
    /// per message: transmitter rules inside it
    pub et_in_m: Vec<Vec<u32>>,
    /// per transmitter rule: receiver rules inside it
    pub er_in_et: Vec<Vec<u32>>,
    pub m_over_er: Vec<Vec<u32>>,
    pub m_over_et: Vec<Vec<u32>>,
    pub et_over_er: Vec<Vec<u32>>,
}

/// Indices of `smalls` (sorted, all of dimension `dim`) lying inside `big`.
///
/// Two exact strategies: test every member of `smalls`, or list every
/// `dim`-subspace of `big` above `core` (contained in every member) and look
/// each up. `plan` says which one is cheaper for these dimensions.
fn contained(f: &FieldSpec, smalls: &[Subspace], big: &Subspace, core: &Subspace, plan: Plan) -> Vec<u32> {
    match plan {
        Plan::Scan => smalls
            .iter()
            .enumerate()
            .filter(|(_, x)| x.within(f, big))
            .map(|(i, _)| i as u32)
            .collect(),
        Plan::Interval(dim) => {
            if !core.within(f, big) {
                return Vec::new();
            }
            let q = IntervalQuery::new(core.clone(), big.clone(), dim);
            let mut out: Vec<u32> = subspaces_between(f, &q, Exec::Sequential)
                .expect("core lies inside big")
                .iter()
                .filter_map(|x| smalls.binary_search(x).ok().map(|i| i as u32))
                .collect();
            out.sort_unstable();
            out
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Plan {
    Scan,
    Interval(usize),
}

/// Intersection of all members; `None` for an empty set.
fn common_core(f: &FieldSpec, xs: &[Subspace]) -> Option<Subspace> {
    let mut it = xs.iter();
    let mut core = it.next()?.clone();
    for x in it {
        if core.dim() == 0 {
            break;
        }
        core = core.intersect(f, x).expect("same ambient");
    }
    Some(core)
}

fn plan(f: &FieldSpec, smalls: &[Subspace], core: &Option<Subspace>, big_dim: usize) -> Plan {
    let (Some(core), Some(first)) = (core, smalls.first()) else {
        return Plan::Scan;
    };
    let dim = first.dim();
    if dim > big_dim || smalls.iter().any(|x| x.dim() != dim) {
        return Plan::Scan;
    }
    let candidates = gaussian_binomial(big_dim - core.dim(), dim - core.dim(), f.order());
    if candidates < BigUint::from(smalls.len()) {
        Plan::Interval(dim)
    } else {
        Plan::Scan
    }
}

fn contained_all(
    f: &FieldSpec,
    smalls: &[Subspace],
    bigs: &[Subspace],
    force: Option<Plan>,
    exec: Exec,
) -> Vec<Vec<u32>> {
    let core = common_core(f, smalls);
    let big_dim = bigs.first().map_or(0, Subspace::dim);
    let uniform = bigs.iter().all(|b| b.dim() == big_dim);
    let chosen = match force {
        Some(p) => p,
        None if uniform => plan(f, smalls, &core, big_dim),
        None => Plan::Scan,
    };
    let core = core.unwrap_or_else(|| Subspace::zero(bigs.first().map_or(0, Subspace::ambient)));
    exec.map_slice(bigs, |big| contained(f, smalls, big, &core, chosen))
}

fn invert(lists: &[Vec<u32>], len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); len];
    for (i, l) in lists.iter().enumerate() {
        for &j in l {
            out[j as usize].push(i as u32);
        }
    }
    out
}

impl Incidence {
    /// Exact containment lists, using whichever of a direct scan or an
    /// interval enumeration is cheaper.
    pub fn compute(code: &CodeInstance, exec: Exec) -> Self {
        Self::compute_with(code, None, exec)
    }

    /// Direct containment tests for every (small, big) pair.
    pub fn compute_by_scan(code: &CodeInstance, exec: Exec) -> Self {
        Self::compute_with(code, Some(Plan::Scan), exec)
    }

    fn compute_with(code: &CodeInstance, force: Option<Plan>, exec: Exec) -> Self {
        let f = code.field();
        let er_in_m = contained_all(f, &code.receiver_rules, &code.messages, force, exec);
        let et_in_m = contained_all(f, &code.transmitter_rules, &code.messages, force, exec);
        let er_in_et = contained_all(f, &code.receiver_rules, &code.transmitter_rules, force, exec);
        let m_over_er = invert(&er_in_m, code.receiver_rules.len());
        let m_over_et = invert(&et_in_m, code.transmitter_rules.len());
        let et_over_er = invert(&er_in_et, code.receiver_rules.len());
        Self {
            er_in_m,
            et_in_m,
            er_in_et,
            m_over_er,
            m_over_et,
            et_over_er,
        }
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// For every target reachable from `sources` through `lists`, how many of the
/// sources reach it.
fn tally(sources: &[u32], lists: &[Vec<u32>], len: usize) -> Vec<u32> {
    let mut counts = vec![0u32; len];
    for &s in sources {
        for &t in &lists[s as usize] {
            counts[t as usize] += 1;
        }
    }
    counts
}

/// Index of the first maximum of `counts` over indices accepted by `allowed`.
fn first_max(counts: &[u32], allowed: impl Fn(usize) -> bool) -> Option<(usize, u32)> {
    let mut best: Option<(usize, u32)> = None;
    for (i, &c) in counts.iter().enumerate() {
        if allowed(i) && best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best
}

/// A maximizing configuration. Indices refer to the canonical order of the
/// code's sets; bases are included for readers without the code document.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub numerator: u64,
    pub denominator: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_message: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmitter_rule: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver_rule: Option<usize>,
    /// `dim(s₁ ∩ s₂)` for the source states of the two messages, substitution attacks only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_source_dim: Option<usize>,
    pub bases: BTreeMap<&'static str, Vec<Vec<u32>>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbabilityEntry {
    pub name: &'static str,
    pub value: Option<Prob>,
    /// Why `value` is absent (the defining maximum ranges over an empty set).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub expected: Prob,
    /// `None` when the probability is undefined for this code.
    pub matches: Option<bool>,
    pub witness: Option<Witness>,
}

impl ProbabilityEntry {
    fn new(name: &'static str, expected: Prob, found: std::result::Result<(Prob, Witness), String>) -> Self {
        match found {
            Ok((value, witness)) => Self {
                name,
                value: Some(value),
                reason: None,
                expected,
                matches: Some(value == expected),
                witness: Some(witness),
            },
            Err(reason) => Self {
                name,
                value: None,
                reason: Some(reason),
                expected,
                matches: None,
                witness: None,
            },
        }
    }

    pub fn failed(&self) -> bool {
        self.matches == Some(false)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttackReport {
    pub p_i: ProbabilityEntry,
    pub p_s: ProbabilityEntry,
    pub p_t: ProbabilityEntry,
    pub p_r0: ProbabilityEntry,
    pub p_r1: ProbabilityEntry,
    /// Largest `#{e_R ⊆ m ∩ e_T}` over all `(e_T, m)` with `e_T ⊄ m`.
    pub p_t_max_numerator: Option<u64>,
}

impl AttackReport {
    pub fn entries(&self) -> [&ProbabilityEntry; 5] {
        [&self.p_i, &self.p_s, &self.p_t, &self.p_r0, &self.p_r1]
    }

    /// True when no defined probability disagrees with its expected value.
    pub fn pass(&self) -> bool {
        self.entries().iter().all(|e| !e.failed())
    }
}

/// Keeps the first strictly larger candidate when scanning in canonical order.
fn best_of(cands: Vec<Option<(Prob, Witness)>>) -> Option<(Prob, Witness)> {
    let mut best: Option<(Prob, Witness)> = None;
    for c in cands.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| c.0 > *b) {
            best = Some(c);
        }
    }
    best
}

fn bases(code: &CodeInstance, w: &mut Witness) {
    if let Some(i) = w.message {
        w.bases.insert("message", code.messages[i].to_bits());
    }
    if let Some(i) = w.other_message {
        w.bases.insert("otherMessage", code.messages[i].to_bits());
    }
    if let Some(i) = w.transmitter_rule {
        w.bases.insert("transmitterRule", code.transmitter_rules[i].to_bits());
    }
    if let Some(i) = w.receiver_rule {
        w.bases.insert("receiverRule", code.receiver_rules[i].to_bits());
    }
}

fn shared_source_dim(code: &CodeInstance, a: usize, b: usize) -> usize {
    let f = code.field();
    let s1 = code.source_of(&code.messages[a]);
    let s2 = code.source_of(&code.messages[b]);
    s1.intersect(f, &s2).expect("same ambient").dim()
}

/// `1/q^{2(ν−s)}, 1/q, 1/q, 1/q^{2(ν−s)}, 1/q` in the order I, S, T, R₀, R₁.
pub fn expected_probabilities(code: &CodeInstance) -> [Prob; 5] {
    let q = code.q();
    let big = q.pow(2 * (code.params.nu - code.params.s) as u32);
    let small = Prob::new(1, q);
    [Prob::new(1, big), small, small, Prob::new(1, big), small]
}

pub fn attack_probabilities(code: &CodeInstance, inc: &Incidence, exec: Exec) -> AttackReport {
    let n_m = code.messages.len();
    let n_er = code.receiver_rules.len();
    let [e_i, e_s, e_t, e_r0, e_r1] = expected_probabilities(code);

    // P_I = max_m #{e_R ⊆ m} / |E_R|
    let p_i = if n_er == 0 {
        Err("no receiver rules".to_string())
    } else {
        best_of(
            (0..n_m)
                .map(|m| {
                    let w = Witness {
                        numerator: inc.er_in_m[m].len() as u64,
                        denominator: n_er as u64,
                        message: Some(m),
                        ..Witness::default()
                    };
                    Some((Prob::new(w.numerator, w.denominator), w))
                })
                .collect(),
        )
        .ok_or_else(|| "no messages".to_string())
    };

    // P_S = max_m max_{m'≠m} #{e_R ⊆ m, m'} / #{e_R ⊆ m}
    let p_s = best_of(exec.map(n_m, |m| {
        let den = inc.er_in_m[m].len() as u64;
        if den == 0 {
            return None;
        }
        let counts = tally(&inc.er_in_m[m], &inc.m_over_er, n_m);
        let (other, num) = first_max(&counts, |j| j != m)?;
        let w = Witness {
            numerator: u64::from(num),
            denominator: den,
            message: Some(m),
            other_message: Some(other),
            ..Witness::default()
        };
        Some((Prob::new(w.numerator, den), w))
    }))
    .ok_or_else(|| "no pair of distinct messages with a receiver rule in the first".to_string());

    // P_T = max_{e_T} max_{m: e_T ⊄ m} #{e_R ⊆ m ∩ e_T} / #{e_R ⊆ e_T}
    let pt_cands = exec.map(code.transmitter_rules.len(), |t| {
        let den = inc.er_in_et[t].len() as u64;
        if den == 0 {
            return None;
        }
        let mut excluded = vec![false; n_m];
        for &m in &inc.m_over_et[t] {
            excluded[m as usize] = true;
        }
        let counts = tally(&inc.er_in_et[t], &inc.m_over_er, n_m);
        let (m, num) = first_max(&counts, |j| !excluded[j])?;
        let w = Witness {
            numerator: u64::from(num),
            denominator: den,
            message: Some(m),
            transmitter_rule: Some(t),
            ..Witness::default()
        };
        Some((Prob::new(w.numerator, den), w))
    });
    let p_t_max_numerator = pt_cands.iter().flatten().map(|(_, w)| w.numerator).max();
    let p_t = best_of(pt_cands).ok_or_else(|| "every transmitter rule lies in every message".to_string());

    // P_R0 = max_{e_R} max_m #{e_T ⊆ m, e_R ⊆ e_T} / #{e_T ⊇ e_R}
    let p_r0 = best_of(exec.map(n_er, |r| {
        let den = inc.et_over_er[r].len() as u64;
        if den == 0 {
            return None;
        }
        let counts = tally(&inc.et_over_er[r], &inc.m_over_et, n_m);
        let (m, num) = first_max(&counts, |_| true)?;
        let w = Witness {
            numerator: u64::from(num),
            denominator: den,
            message: Some(m),
            receiver_rule: Some(r),
            ..Witness::default()
        };
        Some((Prob::new(w.numerator, den), w))
    }))
    .ok_or_else(|| "no receiver rule lies in a transmitter rule".to_string());

    // P_R1 = max_{(e_R, m)} max_{m'≠m} #{e_T ⊆ m ∩ m', e_R ⊆ e_T} / #{e_T ⊆ m, e_R ⊆ e_T}
    let p_r1 = best_of(exec.map(n_er, |r| {
        let per_m: Vec<Option<(Prob, Witness)>> = inc.m_over_er[r]
            .iter()
            .map(|&m| {
                let m = m as usize;
                let between = intersect_sorted(&inc.et_in_m[m], &inc.et_over_er[r]);
                if between.is_empty() {
                    return None;
                }
                let counts = tally(&between, &inc.m_over_et, n_m);
                let (other, num) = first_max(&counts, |j| j != m)?;
                let w = Witness {
                    numerator: u64::from(num),
                    denominator: between.len() as u64,
                    message: Some(m),
                    other_message: Some(other),
                    receiver_rule: Some(r),
                    ..Witness::default()
                };
                Some((Prob::new(w.numerator, w.denominator), w))
            })
            .collect();
        best_of(per_m)
    }))
    .ok_or_else(|| "no (receiver rule, message) pair with a distinct second message".to_string());

    let finish = |r: std::result::Result<(Prob, Witness), String>| {
        r.map(|(p, mut w)| {
            if let (Some(a), Some(b)) = (w.message, w.other_message) {
                w.shared_source_dim = Some(shared_source_dim(code, a, b));
            }
            bases(code, &mut w);
            (p, w)
        })
    };
    AttackReport {
        p_i: ProbabilityEntry::new("P_I", e_i, finish(p_i)),
        p_s: ProbabilityEntry::new("P_S", e_s, finish(p_s)),
        p_t: ProbabilityEntry::new("P_T", e_t, finish(p_t)),
        p_r0: ProbabilityEntry::new("P_R0", e_r0, finish(p_r0)),
        p_r1: ProbabilityEntry::new("P_R1", e_r1, finish(p_r1)),
        p_t_max_numerator,
    }
}

/// A count that should be the same for every object of a domain.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Uniformity {
    pub name: &'static str,
    #[serde(serialize_with = "ser_display")]
    pub expected: u64,
    #[serde(serialize_with = "ser_display")]
    pub domain_size: usize,
    #[serde(serialize_with = "ser_opt_display")]
    pub min: Option<u64>,
    #[serde(serialize_with = "ser_opt_display")]
    pub max: Option<u64>,
    pub pass: bool,
    /// count → number of objects, only when the count is not uniform.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<BTreeMap<u64, u64>>,
}

impl Uniformity {
    fn from_counts(name: &'static str, expected: u64, counts: impl IntoIterator<Item = u64>) -> Self {
        let mut hist = BTreeMap::new();
        let mut domain_size = 0;
        for c in counts {
            *hist.entry(c).or_insert(0u64) += 1;
            domain_size += 1;
        }
        let min = hist.keys().next().copied();
        let max = hist.keys().next_back().copied();
        let pass = domain_size > 0 && min == Some(expected) && max == Some(expected);
        Self {
            name,
            expected,
            domain_size,
            min,
            max,
            pass,
            histogram: (!pass).then_some(hist),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IncidenceReport {
    /// transmitter rules per message, `q^{4(s−1)}`
    pub a: Uniformity,
    /// receiver rules per message, `q^{2s}`
    pub b: Uniformity,
    /// receiver rules per transmitter rule, `q²`
    pub c: Uniformity,
    /// transmitter rules per receiver rule, `q^{2(ν−1)}`
    pub d: Uniformity,
    /// transmitter rules between `e_R` and `m`, per `(m, e_R ⊆ m)`, `q^{2(s−1)}`
    pub between: Uniformity,
}

impl IncidenceReport {
    pub fn all(&self) -> [&Uniformity; 5] {
        [&self.a, &self.b, &self.c, &self.d, &self.between]
    }

    pub fn pass(&self) -> bool {
        self.all().iter().all(|u| u.pass)
    }
}

pub fn verify_incidence_counts(code: &CodeInstance, inc: &Incidence, exec: Exec) -> IncidenceReport {
    let q = code.q();
    let (nu, s) = (code.params.nu as u32, code.params.s as u32);
    let len = |v: &Vec<u32>| v.len() as u64;
    let between = exec.map(code.messages.len(), |m| {
        inc.er_in_m[m]
            .iter()
            .map(|&r| intersect_sorted(&inc.et_in_m[m], &inc.et_over_er[r as usize]).len() as u64)
            .collect::<Vec<_>>()
    });
    IncidenceReport {
        a: Uniformity::from_counts("a", q.pow(4 * (s - 1)), inc.et_in_m.iter().map(len)),
        b: Uniformity::from_counts("b", q.pow(2 * s), inc.er_in_m.iter().map(len)),
        c: Uniformity::from_counts("c", q.pow(2), inc.er_in_et.iter().map(len)),
        d: Uniformity::from_counts("d", q.pow(2 * (nu - 1)), inc.et_over_er.iter().map(len)),
        between: Uniformity::from_counts("between", q.pow(2 * (s - 1)), between.into_iter().flatten()),
    }
}

/// Which message pairs the pair lemma visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSampling {
    All,
    /// A uniformly random subset of this many qualifying pairs, drawn with the seed.
    Sample { count: usize, seed: u64 },
}

impl PairSampling {
    /// Every pair up to `320²` candidates, otherwise a fixed-seed sample.
    pub fn default_for(code: &CodeInstance) -> Self {
        if code.messages.len() <= 320 {
            PairSampling::All
        } else {
            PairSampling::Sample {
                count: 50_000,
                seed: 0x5eed,
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairStats {
    #[serde(serialize_with = "ser_display")]
    pub pairs: u64,
    pub dim_intersection: BTreeSet<usize>,
    pub count_er: BTreeSet<u64>,
    pub count_et_per_er: BTreeSet<u64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairFailure {
    pub m1: usize,
    pub m2: usize,
    pub k: usize,
    pub dim_intersection: usize,
    pub count_er: u64,
    pub count_et_per_er: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairLemmaReport {
    pub sampling: String,
    #[serde(serialize_with = "ser_display")]
    pub qualifying_pairs: usize,
    #[serde(serialize_with = "ser_display")]
    pub checked_pairs: usize,
    /// Aggregates keyed by `k = dim(s₁ ∩ s₂)`.
    pub by_k: BTreeMap<usize, PairStats>,
    /// First few counterexamples, if any.
    pub failures: Vec<PairFailure>,
    #[serde(serialize_with = "ser_display")]
    pub failure_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub pass: bool,
}

const MAX_LISTED_FAILURES: usize = 20;

/// For each pair of distinct messages sharing a transmitter rule: with
/// `k = dim(s₁ ∩ s₂)`, require `2 ≤ k ≤ 2s−1`, `dim(m₁ ∩ m₂) = k+2`, exactly
/// `q^k` receiver rules in `m₁ ∩ m₂`, and for each of them exactly `q^{k−2}`
/// transmitter rules between it and `m₁ ∩ m₂`.
pub fn verify_pair_lemma(
    code: &CodeInstance,
    inc: &Incidence,
    sampling: PairSampling,
    exec: Exec,
) -> PairLemmaReport {
    let n = code.messages.len();
    // Partners of each message are recomputed rather than stored: the full pair
    // set is quadratic in |M|.
    let partners = |a: usize| -> Vec<u32> {
        let mut out: Vec<u32> = inc.et_in_m[a]
            .iter()
            .flat_map(|&t| inc.m_over_et[t as usize].iter().copied())
            .filter(|&b| b as usize > a)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let qualifying: usize = exec.map(n, |a| partners(a).len()).into_iter().sum();
    let (keep, sampling_label) = match sampling {
        PairSampling::All => (None, "all".to_string()),
        PairSampling::Sample { count, .. } if count >= qualifying => (None, "all".to_string()),
        PairSampling::Sample { count, seed } => (
            Some((count as f64 / qualifying as f64, seed)),
            format!("Bernoulli sample, target {count} (seed {seed})"),
        ),
    };

    let sources: Vec<Subspace> = exec.map_slice(&code.messages, |m| code.source_of(m));
    let partials = exec.map(n, |a| {
        let mut agg = PairAgg::default();
        // one stream per first message keeps the sample independent of scheduling
        let mut rng = keep.map(|(_, seed)| ChaCha8Rng::seed_from_u64(seed ^ (a as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        for b in partners(a) {
            if let (Some((p, _)), Some(rng)) = (keep, rng.as_mut()) {
                if !rng.gen_bool(p) {
                    continue;
                }
            }
            agg.add(check_pair(code, inc, &sources, a, b as usize));
        }
        agg
    });
    let mut total = PairAgg::default();
    for p in partials {
        total.merge(p);
    }
    let reason = (total.checked == 0).then(|| "no two distinct messages share a transmitter rule".to_string());
    PairLemmaReport {
        sampling: sampling_label,
        qualifying_pairs: qualifying,
        checked_pairs: total.checked,
        pass: reason.is_none() && total.failure_count == 0,
        by_k: total.by_k,
        failures: total.failures,
        failure_count: total.failure_count,
        reason,
    }
}

#[derive(Default)]
struct PairAgg {
    checked: usize,
    by_k: BTreeMap<usize, PairStats>,
    failures: Vec<PairFailure>,
    failure_count: usize,
}

impl PairAgg {
    fn add(&mut self, (ok, r): (bool, PairFailure)) {
        self.checked += 1;
        let st = self.by_k.entry(r.k).or_default();
        st.pairs += 1;
        st.dim_intersection.insert(r.dim_intersection);
        st.count_er.insert(r.count_er);
        st.count_et_per_er.extend(r.count_et_per_er.iter().copied());
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(r);
            }
        }
    }

    fn merge(&mut self, other: PairAgg) {
        self.checked += other.checked;
        for (k, st) in other.by_k {
            let mine = self.by_k.entry(k).or_default();
            mine.pairs += st.pairs;
            mine.dim_intersection.extend(st.dim_intersection);
            mine.count_er.extend(st.count_er);
            mine.count_et_per_er.extend(st.count_et_per_er);
        }
        self.failure_count += other.failure_count;
        let room = MAX_LISTED_FAILURES - self.failures.len();
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

fn check_pair(code: &CodeInstance, inc: &Incidence, sources: &[Subspace], a: usize, b: usize) -> (bool, PairFailure) {
    let f = code.field();
    let q = code.q();
    let s = code.params.s;
    let k = sources[a].intersect(f, &sources[b]).expect("same ambient").dim();
    let meet = code.messages[a].intersect(f, &code.messages[b]).expect("same ambient");
    let ers = intersect_sorted(&inc.er_in_m[a], &inc.er_in_m[b]);
    let ets = intersect_sorted(&inc.et_in_m[a], &inc.et_in_m[b]);
    let per_er: Vec<u64> = ers
        .iter()
        .map(|&r| intersect_sorted(&ets, &inc.et_over_er[r as usize]).len() as u64)
        .collect();
    let ok = (2..=2 * s - 1).contains(&k)
        && meet.dim() == k + 2
        && ers.len() as u64 == q.pow(k as u32)
        && per_er.iter().all(|&c| c == q.pow(k as u32 - 2));
    (
        ok,
        PairFailure {
            m1: a,
            m2: b,
            k,
            dim_intersection: meet.dim(),
            count_er: ers.len() as u64,
            count_et_per_er: per_er,
        },
    )
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParameterReport {
    #[serde(serialize_with = "ser_display")]
    pub n1: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub n2: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub n3: BigUint,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Set sizes against the closed-form parameters, plus the identities and
/// explicit parametrizations that underlie them.
pub fn verify_parameters(code: &CodeInstance, oracle_budget: u64, exec: Exec) -> Result<ParameterReport> {
    let p = &code.params;
    let f = &p.field;
    let q = BigUint::from(code.q());
    let (nu, s, m0, s0) = (p.nu, p.s, p.m0, p.s0);
    let n1 = count_n_gated(2 * s - 2, s - 1, 2 * nu - 2, f, oracle_budget, exec)?;
    let n2 = count_n_gated(m0 - 2 * s, s0 + 1 - s, 2 * (nu - s), f, oracle_budget, exec)?;
    let n3 = count_n_gated(m0 - 2, s0, 2 * nu - 2, f, oracle_budget, exec)?;
    if n3.is_zero() {
        return Err(Error::Consistency("n3 = 0 for validated parameters".into()));
    }
    let product = &n1 * &n2;
    let s_formula = &product / &n3;
    let s_integral = (&product % &n3).is_zero();

    let n_s = BigUint::from(code.sources.len());
    let n_et = BigUint::from(code.transmitter_rules.len());
    let n_er = BigUint::from(code.receiver_rules.len());
    let n_m = BigUint::from(code.messages.len());
    let a = q.pow(4 * (s as u32 - 1));

    let mut checks = vec![
        Check::with_outcome(
            "|S| = n1*n2/n3",
            if s_integral { s_formula.to_string() } else { format!("{product}/{n3}") },
            &n_s,
            s_integral && s_formula == n_s,
        ),
        Check::new("|E_T| = q^(4(nu-1))", q.pow(4 * (nu as u32 - 1)), &n_et),
        Check::new("|E_R| = q^(2nu)", q.pow(2 * nu as u32), &n_er),
        Check::new("|M| = q^(4(nu-s))*|S|", q.pow(4 * (nu - s) as u32) * &s_formula, &n_m),
        Check::new("n1*n2 = n3*|S|", &product, &n3 * &n_s),
        Check::new("|M|*a = |S|*|E_T|", &n_m * &a, &n_s * &n_et),
    ];

    // n1, n2, n3 straight from their defining sandwiches inside the anchor's perp.
    let perp = code.space.perp(&code.anchor)?;
    let direct = |lower: &Subspace, dim: usize, ty, want: &BigUint, name: &str| -> Result<Option<Check>> {
        let size = gaussian_binomial(perp.dim() - lower.dim(), dim - lower.dim(), f.order());
        if size > BigUint::from(oracle_budget) {
            return Ok(None);
        }
        let q = IntervalQuery::new(lower.clone(), perp.clone(), dim).with_type(ty);
        let got = subspaces_typed(&code.space, &q, exec)?.len();
        Ok(Some(Check::new(name, want, got)))
    };
    checks.extend(direct(&code.anchor, 2 * s, types::source(p), &n1, "n1 by enumeration")?);
    if let Some(src) = code.sources.first() {
        checks.extend(direct(src, m0, types::frame(p), &n2, "n2 by enumeration")?);
    }
    checks.extend(direct(&code.anchor, m0, types::frame(p), &n3, "n3 by enumeration")?);

    let et_family = code.parametrized_transmitter_rules()?;
    checks.push(Check::with_outcome(
        "E_T equals its explicit parametrization",
        et_family.len(),
        code.transmitter_rules.len(),
        et_family == code.transmitter_rules,
    ));
    let er_family = code.parametrized_receiver_rules()?;
    checks.push(Check::with_outcome(
        "E_R equals its explicit parametrization",
        er_family.len(),
        code.receiver_rules.len(),
        er_family == code.receiver_rules,
    ));

    let pass = checks.iter().all(|c| c.pass);
    Ok(ParameterReport {
        n1,
        n2,
        n3,
        checks,
        pass,
    })
}
