//! The A²-code: parameter validation, the canonical frame `(ν₀, P₀)`, the four
//! sets `S`, `E_T`, `E_R`, `M`, and the encoding/decoding maps.
//!
//! Everything lives in the δ = 2 pseudo-symplectic space of dimension 2ν+2.
//! The anchor is `⟨ν₀, e_{2ν+1}⟩` with `ν₀ = e_1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enumeration::{subspaces_typed, IntervalQuery};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Fe, FieldSpec};
use crate::geometry::{PsSpace, SubspaceType};
use crate::linalg::Subspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeParams {
    #[serde(skip)]
    pub field: FieldSpec,
    pub nu: usize,
    /// Source states have dimension `2s`.
    pub s: usize,
    pub m0: usize,
    pub s0: usize,
}

impl CodeParams {
    pub fn new(field: FieldSpec, nu: usize, s: usize, m0: usize, s0: usize) -> Self {
        Self {
            field,
            nu,
            s,
            m0,
            s0,
        }
    }

    pub fn q(&self) -> u64 {
        u64::from(self.field.order())
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q={} nu={} s={} m0={} s0={}",
            self.field.order(),
            self.nu,
            self.s,
            self.m0,
            self.s0
        )
    }
}

/// One named constraint failure (or warning) from [`validate_params`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Parameters that passed [`validate_params`]. Warnings flag degenerate but
/// buildable codes.
#[derive(Clone, Debug)]
pub struct ValidatedParams {
    params: CodeParams,
    warnings: Vec<Diagnostic>,
}

impl ValidatedParams {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }
}

pub fn validate_params(p: CodeParams) -> std::result::Result<ValidatedParams, Vec<Diagnostic>> {
    let CodeParams { nu, s, m0, s0, .. } = p;
    let mut errs = Vec::new();
    let mut check = |ok: bool, rule: &'static str, message: String| {
        if !ok {
            errs.push(Diagnostic { rule, message });
        }
    };
    check(nu >= 1, "nu>=1", format!("nu must be at least 1, got {nu}"));
    check(s >= 1, "s>=1", format!("s must be at least 1, got {s}"));
    check(s <= s0 + 1, "s-1<=s0", format!("s-1 <= s0 violated: s={s}, s0={s0}"));
    check(s0 <= nu, "s0<=nu", format!("s0 <= nu violated: s0={s0}, nu={nu}"));
    check(2 * s <= m0, "2s<=m0", format!("2s <= m0 violated: s={s}, m0={m0}"));
    check(2 * s0 <= m0, "2s0<=m0", format!("2s0 <= m0 violated: s0={s0}, m0={m0}"));
    check(
        m0 >= 2 * s0 + 2,
        "derived:m0>=2s0+2",
        format!(
            "derived feasibility m_0 >= 2s_0+2 violated (m0={m0}, s0={s0}); S would be empty: \
             the anchor sits in the radical of P0's form and uses 2 of the m0-2s0 radical dimensions"
        ),
    );
    check(
        m0 <= 2 * nu,
        "derived:m0<=2nu",
        format!("derived feasibility m_0 <= 2nu violated (m0={m0}, nu={nu}); P0 must fit in the anchor's perp"),
    );
    check(
        m0 <= nu + s0 + 1,
        "derived:m0<=nu+s0+1",
        format!(
            "derived feasibility m_0 <= nu+s_0+1 violated (m0={m0}, nu={nu}, s0={s0}); \
             no (m0-2)-dim subspace of rank 2s0 exists in the (2nu-2)-dim symplectic quotient"
        ),
    );
    if !errs.is_empty() {
        return Err(errs);
    }
    let mut warnings = Vec::new();
    if s == 1 {
        warnings.push(Diagnostic {
            rule: "degenerate:s=1",
            message: "s = 1 gives |S| = 1; substitution maxima range over empty sets".into(),
        });
    }
    Ok(ValidatedParams {
        params: p,
        warnings,
    })
}

/// Types of the objects in the construction.
pub mod types {
    use super::*;

    pub fn anchor() -> SubspaceType {
        SubspaceType::new(2, 0, 0, 1).expect("well-formed")
    }

    pub fn frame(p: &CodeParams) -> SubspaceType {
        SubspaceType::new(p.m0, 2 * p.s0, p.s0, 1).expect("validated")
    }

    pub fn source(p: &CodeParams) -> SubspaceType {
        SubspaceType::new(2 * p.s, 2 * (p.s - 1), p.s - 1, 1).expect("validated")
    }

    pub fn transmitter() -> SubspaceType {
        SubspaceType::new(4, 4, 1, 1).expect("well-formed")
    }

    pub fn receiver() -> SubspaceType {
        SubspaceType::new(2, 2, 0, 1).expect("well-formed")
    }

    pub fn message(p: &CodeParams) -> SubspaceType {
        SubspaceType::new(2 * p.s + 2, 2 * p.s + 2, p.s, 1).expect("validated")
    }
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub nu0: Vec<Fe>,
    pub anchor: Subspace,
    pub p0: Subspace,
}

/// `ν₀ = e_1`, anchor `⟨e_1, e_{2ν+1}⟩`, and `P₀` spanned by
/// `e_1, e_{2ν+1}`, the pairs `(e_j, e_{ν+j})` for `j = 2..=s0+1`, then
/// isotropic fillers `e_{s0+2}, e_{s0+3}, …` up to `m0` rows.
pub fn canonical_frame(v: &ValidatedParams) -> Result<Frame> {
    let p = v.params();
    let space = PsSpace::new(p.field, p.nu, 2)?;
    let (nu, s0) = (p.nu, p.s0);
    let nu0 = space.e(1);
    let anchor = Subspace::from_vectors(&p.field, space.n(), &[nu0.clone(), space.distinguished()])?;

    // pairs for j = 2..=s: the s-1 pairs inside a source state; j = s+1..=s0+1: the rest
    let mut rows = vec![space.e(1), space.distinguished()];
    for j in 2..=s0 + 1 {
        rows.push(space.e(j));
        rows.push(space.e(nu + j));
    }
    let mut j = s0 + 2;
    while rows.len() < p.m0 {
        if j > nu {
            return Err(Error::Invalid(format!(
                "ran out of isotropic fillers building P0 with m0={} in nu={nu}",
                p.m0
            )));
        }
        rows.push(space.e(j));
        j += 1;
    }
    let p0 = Subspace::from_vectors(&p.field, space.n(), &rows)?;

    let perp = space.perp(&anchor)?;
    let ty = space.classify(&p0)?;
    if ty != types::frame(p) || !anchor.within(&p.field, &p0) || !p0.within(&p.field, &perp) {
        return Err(Error::Consistency(format!(
            "canonical P0 has type {ty}, expected {}",
            types::frame(p)
        )));
    }
    if space.classify(&anchor)? != types::anchor() {
        return Err(Error::Consistency("anchor has the wrong type".into()));
    }
    Ok(Frame { nu0, anchor, p0 })
}

/// Result of the decoding map: a source state or `reject`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Source(Subspace),
    Reject,
}

/// A fully materialized code. All four sets are sorted canonically.
#[derive(Clone, Debug)]
pub struct CodeInstance {
    pub params: CodeParams,
    pub space: PsSpace,
    pub nu0: Vec<Fe>,
    pub anchor: Subspace,
    pub p0: Subspace,
    pub sources: Vec<Subspace>,
    pub transmitter_rules: Vec<Subspace>,
    pub receiver_rules: Vec<Subspace>,
    pub messages: Vec<Subspace>,
}

pub fn build_code(v: &ValidatedParams, exec: Exec) -> Result<CodeInstance> {
    let p = *v.params();
    let f = p.field;
    let space = PsSpace::new(f, p.nu, 2)?;
    let n = space.n();
    let Frame { nu0, anchor, p0 } = canonical_frame(v)?;

    let sources = subspaces_typed(
        &space,
        &IntervalQuery::new(anchor.clone(), p0.clone(), 2 * p.s).with_type(types::source(&p)),
        exec,
    )?;

    // Type (2,2,0,1) has ε = 1, so every receiver rule already contains e_{2ν+1}.
    let e_top = Subspace::from_vectors(&f, n, &[space.distinguished()])?;
    let receiver_rules = subspaces_typed(
        &space,
        &IntervalQuery::new(e_top, Subspace::full(n), 2).with_type(types::receiver()),
        exec,
    )?;

    let candidates = subspaces_typed(
        &space,
        &IntervalQuery::new(anchor.clone(), Subspace::full(n), 4).with_type(types::transmitter()),
        exec,
    )?;
    let transmitter_rules = exec.filter_slice(candidates, |x| {
        x.intersect(&f, &p0).map(|c| c == anchor).unwrap_or(false)
    });

    // Distinct sources never share a message (m ∩ P₀ recovers the source), so
    // deduplicating per source keeps peak memory near |M| rather than |S|·|E_T|.
    let images = exec.map_slice(&sources, |src| {
        let mut ms = transmitter_rules
            .iter()
            .map(|et| src.sum(&f, et))
            .collect::<Result<Vec<_>>>()?;
        ms.sort_unstable();
        ms.dedup();
        Ok::<_, Error>(ms)
    });
    let mut messages = Vec::with_capacity(sources.len() * transmitter_rules.len());
    for chunk in images {
        messages.extend(chunk?);
    }
    messages.sort_unstable();
    messages.dedup();

    let code = CodeInstance {
        params: p,
        space,
        nu0,
        anchor,
        p0,
        sources,
        transmitter_rules,
        receiver_rules,
        messages,
    };
    code.check_invariants(exec)?;
    Ok(code)
}

impl CodeInstance {
    pub fn field(&self) -> &FieldSpec {
        self.space.field()
    }

    pub fn q(&self) -> u64 {
        self.params.q()
    }

    /// Re-derives every set's defining property; any failure is a construction bug.
    pub fn check_invariants(&self, exec: Exec) -> Result<()> {
        let f = *self.field();
        let p = &self.params;
        let sp = &self.space;
        let fail = |what: &str, x: &Subspace| Error::Consistency(format!("{what} {x} violates its definition"));

        for set in [&self.sources, &self.transmitter_rules, &self.receiver_rules, &self.messages] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Consistency("set is not strictly sorted".into()));
            }
        }
        let bad_source = exec.map_slice(&self.sources, |x| {
            sp.classify(x).ok() != Some(types::source(p))
                || !self.anchor.within(&f, x)
                || !x.within(&f, &self.p0)
        });
        if let Some(i) = bad_source.iter().position(|&b| b) {
            return Err(fail("source state", &self.sources[i]));
        }
        let bad_et = exec.map_slice(&self.transmitter_rules, |x| {
            sp.classify(x).ok() != Some(types::transmitter())
                || x.intersect(&f, &self.p0).ok().as_ref() != Some(&self.anchor)
        });
        if let Some(i) = bad_et.iter().position(|&b| b) {
            return Err(fail("transmitter rule", &self.transmitter_rules[i]));
        }
        let bad_er = exec.map_slice(&self.receiver_rules, |x| {
            sp.classify(x).ok() != Some(types::receiver())
        });
        if let Some(i) = bad_er.iter().position(|&b| b) {
            return Err(fail("receiver rule", &self.receiver_rules[i]));
        }
        let bad_m = exec.map_slice(&self.messages, |m| {
            sp.classify(m).ok() != Some(types::message(p))
                || !self.anchor.within(&f, m)
                || self.source_index(&self.source_of(m)).is_none()
        });
        if let Some(i) = bad_m.iter().position(|&b| b) {
            return Err(fail("message", &self.messages[i]));
        }
        Ok(())
    }

    pub fn source_index(&self, x: &Subspace) -> Option<usize> {
        self.sources.binary_search(x).ok()
    }

    pub fn transmitter_index(&self, x: &Subspace) -> Option<usize> {
        self.transmitter_rules.binary_search(x).ok()
    }

    pub fn receiver_index(&self, x: &Subspace) -> Option<usize> {
        self.receiver_rules.binary_search(x).ok()
    }

    pub fn message_index(&self, x: &Subspace) -> Option<usize> {
        self.messages.binary_search(x).ok()
    }

    /// `m ∩ P₀`, the unique source state inside a message.
    pub fn source_of(&self, m: &Subspace) -> Subspace {
        m.intersect(self.field(), &self.p0)
            .expect("messages share the code's ambient space")
    }

    /// The encoding map `f(s, e_T) = s + e_T`.
    pub fn encode(&self, src: &Subspace, et: &Subspace) -> Result<Subspace> {
        if self.source_index(src).is_none() {
            return Err(Error::Invalid(format!("{src} is not a source state")));
        }
        if self.transmitter_index(et).is_none() {
            return Err(Error::Invalid(format!("{et} is not a transmitter rule")));
        }
        src.sum(self.field(), et)
    }

    /// The decoding map: `m ∩ P₀` when `e_R ⊆ m`, otherwise reject.
    pub fn decode(&self, m: &Subspace, er: &Subspace) -> Result<Decoded> {
        if self.message_index(m).is_none() {
            return Err(Error::Invalid(format!("{m} is not a message")));
        }
        if self.receiver_index(er).is_none() {
            return Err(Error::Invalid(format!("{er} is not a receiver rule")));
        }
        if er.within(self.field(), m) {
            Ok(Decoded::Source(self.source_of(m)))
        } else {
            Ok(Decoded::Reject)
        }
    }

    /// Whether `e_R` authenticates what `e_T` encodes: `e_R ⊆ e_T`.
    pub fn incidence(&self, er: &Subspace, et: &Subspace) -> bool {
        er.within(self.field(), et)
    }

    fn free_coords(&self) -> Vec<usize> {
        // 0-indexed positions 2..=ν and ν+2..=2ν in 1-based terms
        let nu = self.params.nu;
        (1..nu).chain(nu + 1..2 * nu).collect()
    }

    /// Transmitter rules written as the explicit family
    /// `e_1; e_{2ν+1}; (0,R,1,R',0,0); (0,L,0,L',0,1)` with all blocks free.
    pub fn parametrized_transmitter_rules(&self) -> Result<Vec<Subspace>> {
        let f = *self.field();
        let n = self.space.n();
        let nu = self.params.nu;
        let free = self.free_coords();
        let mut out = Vec::new();
        for_each_assignment(f.order(), 2 * free.len(), |digits| {
            let mut u1 = self.space.e(nu + 1);
            let mut u2 = self.space.e(2 * nu + 2);
            for (k, &c) in free.iter().enumerate() {
                u1[c] = Fe(digits[k]);
                u2[c] = Fe(digits[free.len() + k]);
            }
            out.push(Subspace::from_vectors(
                &f,
                n,
                &[self.space.e(1), self.space.distinguished(), u1, u2],
            ));
        });
        let mut out = out.into_iter().collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }

    /// Receiver rules as `e_{2ν+1}; (R_1..R_{2ν}, 0, 1)` with `R` free.
    pub fn parametrized_receiver_rules(&self) -> Result<Vec<Subspace>> {
        let f = *self.field();
        let n = self.space.n();
        let nu = self.params.nu;
        let mut out = Vec::new();
        for_each_assignment(f.order(), 2 * nu, |digits| {
            let mut u = self.space.e(2 * nu + 2);
            for (c, &d) in digits.iter().enumerate() {
                u[c] = Fe(d);
            }
            out.push(Subspace::from_vectors(&f, n, &[self.space.distinguished(), u]));
        });
        let mut out = out.into_iter().collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }

    pub fn to_document(&self) -> CodeDocument {
        let bits = |xs: &[Subspace]| xs.iter().map(Subspace::to_bits).collect();
        CodeDocument {
            schema_version: 1,
            params: ParamsDoc::from(&self.params),
            nu0: self.nu0.iter().map(|x| x.bits()).collect(),
            anchor: self.anchor.to_bits(),
            p0: self.p0.to_bits(),
            sizes: SizesDoc {
                sources: self.sources.len().to_string(),
                transmitter_rules: self.transmitter_rules.len().to_string(),
                receiver_rules: self.receiver_rules.len().to_string(),
                messages: self.messages.len().to_string(),
            },
            sources: bits(&self.sources),
            transmitter_rules: bits(&self.transmitter_rules),
            receiver_rules: bits(&self.receiver_rules),
            messages: bits(&self.messages),
        }
    }
}

/// Calls `visit` with every vector in `{0..q}^len`, last digit slowest.
fn for_each_assignment(q: u32, len: usize, mut visit: impl FnMut(&[u32])) {
    let mut digits = vec![0u32; len];
    loop {
        visit(&digits);
        let mut pos = 0;
        loop {
            if pos == len {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamsDoc {
    pub q_exp: u32,
    pub modulus_bits: u32,
    pub q: String,
    pub nu: usize,
    pub delta: usize,
    pub s: usize,
    pub m0: usize,
    pub s0: usize,
}

impl From<&CodeParams> for ParamsDoc {
    fn from(p: &CodeParams) -> Self {
        Self {
            q_exp: p.field.degree(),
            modulus_bits: p.field.modulus(),
            q: p.field.order().to_string(),
            nu: p.nu,
            delta: 2,
            s: p.s,
            m0: p.m0,
            s0: p.s0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizesDoc {
    pub sources: String,
    pub transmitter_rules: String,
    pub receiver_rules: String,
    pub messages: String,
}

/// Versioned JSON form of a [`CodeInstance`]. Bases are canonical, entries
/// are field elements as integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeDocument {
    pub schema_version: u32,
    pub params: ParamsDoc,
    pub nu0: Vec<u32>,
    pub anchor: Vec<Vec<u32>>,
    pub p0: Vec<Vec<u32>>,
    pub sizes: SizesDoc,
    pub sources: Vec<Vec<Vec<u32>>>,
    pub transmitter_rules: Vec<Vec<Vec<u32>>>,
    pub receiver_rules: Vec<Vec<Vec<u32>>>,
    pub messages: Vec<Vec<Vec<u32>>>,
}
