//! The eight headline criteria, each printed as one PASS/FAIL line.
//! Runs without the libtest harness so the lines always show.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use psauth::attacks::{
    attack_probabilities, verify_incidence_counts, verify_pair_lemma, verify_parameters, Incidence,
    PairSampling,
};
use psauth::code::Decoded;
use psauth::enumeration::{anzahl_gate, count_n, gaussian_binomial, GATE_GRID, DEFAULT_ORACLE_BUDGET};
use psauth::geometry::{classify_gram, PsSpace};
use psauth::report::Prob;
use psauth::{Exec, FieldSpec, Subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn ps_b_reproduction() -> Outcome {
    let start = Instant::now();
    let code = common::ps_b();
    let sizes = [
        code.sources.len(),
        code.transmitter_rules.len(),
        code.receiver_rules.len(),
        code.messages.len(),
    ];
    ensure(sizes == [20, 256, 64, 320], || format!("sizes {sizes:?}"))?;
    let report = verify_parameters(&code, DEFAULT_ORACLE_BUDGET, Exec::default()).map_err(|e| e.to_string())?;
    for c in &report.checks {
        ensure(c.pass, || c.to_string())?;
    }
    let t = within(Duration::from_secs(60), start)?;
    Ok(format!("|S|=20 |E_T|=256 |E_R|=64 |M|=320, formulas agree, {} ms", t.as_millis()))
}

fn ps_b_probabilities() -> Outcome {
    let start = Instant::now();
    let code = common::ps_b();
    let inc = Incidence::compute(&code, Exec::default());
    let r = attack_probabilities(&code, &inc, Exec::default());
    let want = [
        Prob::new(1, 4),
        Prob::new(1, 2),
        Prob::new(1, 2),
        Prob::new(1, 4),
        Prob::new(1, 2),
    ];
    for (e, w) in r.entries().iter().zip(want) {
        ensure(e.value == Some(w), || format!("{} = {:?}, want {w}", e.name, e.value))?;
        ensure(e.expected == w, || format!("{} closed form {} != {w}", e.name, e.expected))?;
    }
    let t = within(Duration::from_secs(120), start)?;
    Ok(format!("(1/4, 1/2, 1/2, 1/4, 1/2) exactly, {} ms", t.as_millis()))
}

fn ps_a_degenerate() -> Outcome {
    let code = common::ps_a();
    let sizes = [
        code.sources.len(),
        code.transmitter_rules.len(),
        code.receiver_rules.len(),
        code.messages.len(),
    ];
    ensure(sizes == [1, 16, 16, 1], || format!("sizes {sizes:?}"))?;
    let inc = Incidence::compute(&code, Exec::default());
    let r = attack_probabilities(&code, &inc, Exec::default());
    let one = Some(Prob::new(1, 1));
    ensure(r.p_i.value == one && r.p_r0.value == one, || {
        format!("pI = {:?}, pR0 = {:?}", r.p_i.value, r.p_r0.value)
    })?;
    Ok("|S|=1 |E_T|=16 |E_R|=16 |M|=1, pI = pR0 = 1".into())
}

fn lemma_uniformity() -> Outcome {
    let code = common::ps_b();
    let inc = Incidence::compute(&code, Exec::default());
    let r = verify_incidence_counts(&code, &inc, Exec::default());
    let want = [16, 16, 4, 16, 4];
    for (u, w) in r.all().iter().zip(want) {
        ensure(u.min == Some(w) && u.max == Some(w), || {
            format!("{}: min {:?} max {:?}, want {w}", u.name, u.min, u.max)
        })?;
    }
    ensure(r.pass(), || "report disagrees with the closed forms".into())?;
    Ok("a=16 b=16 c=4 d=16 between=4, uniform".into())
}

fn pair_lemma() -> Outcome {
    let code = common::ps_b();
    let inc = Incidence::compute(&code, Exec::default());
    let r = verify_pair_lemma(&code, &inc, PairSampling::All, Exec::default());
    ensure(r.checked_pairs == r.qualifying_pairs && r.checked_pairs > 0, || {
        format!("checked {} of {}", r.checked_pairs, r.qualifying_pairs)
    })?;
    ensure(r.failure_count == 0, || format!("{} counterexamples, first {:?}", r.failure_count, r.failures.first()))?;
    let ks: Vec<usize> = r.by_k.keys().copied().collect();
    ensure(ks.iter().all(|k| (2..=3).contains(k)), || format!("k values {ks:?}"))?;
    for (&k, st) in &r.by_k {
        let ok = st.dim_intersection.iter().eq([k + 2].iter())
            && st.count_er.iter().eq([1u64 << k].iter())
            && st.count_et_per_er.iter().eq([1u64 << (k - 2)].iter());
        ensure(ok, || format!("k={k}: {st:?}"))?;
    }
    Ok(format!("{} pairs, k in {ks:?}, no counterexample", r.checked_pairs))
}

fn counting_gate() -> Outcome {
    let r = anzahl_gate(Exec::default()).map_err(|e| e.to_string())?;
    let mut pairs = 0;
    for c in &r.cases {
        ensure(c.closed_form == c.oracle, || {
            format!("N({},{};{}) q={}: {} vs oracle {}", c.m, c.s, c.n, c.q, c.closed_form, c.oracle)
        })?;
        pairs += 1;
    }
    for (e, n) in GATE_GRID {
        let f = FieldSpec::new(e).unwrap();
        for m in 0..=n {
            let mut total = BigUint::from(0u32);
            for s in 0..=m / 2 {
                total += count_n(m, s, n, &f).map_err(|e| e.to_string())?;
            }
            let gb = gaussian_binomial(n, m, f.order());
            ensure(total == gb, || format!("q={} n={n} m={m}: sum {total} vs {gb}", f.order()))?;
        }
    }
    ensure(r.pass, || "gate report not passing".into())?;
    Ok(format!("{pairs} (q, n, m, s) cases agree with the oracle, types partition each Grassmannian"))
}

fn geometry_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for e in [1, 2] {
        let f = FieldSpec::new(e).unwrap();
        for (nu, delta) in [(2, 1), (2, 2), (3, 2)] {
            let space = PsSpace::new(f, nu, delta).unwrap();
            let n = space.n();
            for _ in 0..50 {
                let rows = rng.gen_range(1..=n);
                let p = common::random_subspace(&f, n, rows, &mut rng);
                let ty = space.classify(&p).map_err(|e| e.to_string())?;
                let eps = u8::from(p.contains(&f, &space.distinguished()).unwrap());
                for _ in 0..100 {
                    let t = common::random_invertible(&f, p.dim(), &mut rng);
                    let b = t.mul(&f, p.basis()).unwrap();
                    let g = b.mul(&f, space.form()).unwrap().mul(&f, &b.transpose()).unwrap();
                    let again = classify_gram(&f, &g, eps).map_err(|e| e.to_string())?;
                    ensure(again == ty, || format!("{p}: {ty} became {again} (q={}, nu={nu}, delta={delta})", f.order()))?;
                    ensure(Subspace::span(&f, n, &b).unwrap() == p, || format!("{p} changed under a basis change"))?;
                }
                let perp = space.perp(&p).unwrap();
                ensure(perp.dim() == n - p.dim(), || format!("dim perp({p}) = {}", perp.dim()))?;
                ensure(space.perp(&perp).unwrap() == p, || format!("perp(perp({p})) != itself"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} subspaces x 100 basis changes, perp laws hold"))
}

fn round_trip() -> Outcome {
    let code = common::ps_b();
    let mut n = 0;
    for src in &code.sources {
        for et in &code.transmitter_rules {
            let m = code.encode(src, et).map_err(|e| e.to_string())?;
            for er in code.receiver_rules.iter().filter(|er| code.incidence(er, et)) {
                let got = code.decode(&m, er).map_err(|e| e.to_string())?;
                ensure(got == Decoded::Source(src.clone()), || format!("decode({m}, {er}) = {got:?}"))?;
                n += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut rejects = 0;
    while rejects < 1000 {
        let m = &code.messages[rng.gen_range(0..code.messages.len())];
        let er = &code.receiver_rules[rng.gen_range(0..code.receiver_rules.len())];
        if er.is_subset_of(code.field(), m).unwrap() {
            continue;
        }
        let got = code.decode(m, er).map_err(|e| e.to_string())?;
        ensure(got == Decoded::Reject, || format!("decode({m}, {er}) = {got:?}"))?;
        rejects += 1;
    }
    Ok(format!("{n} round trips, {rejects} rejects"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 PS-B reproduction", ps_b_reproduction),
        ("2 PS-B deception probabilities", ps_b_probabilities),
        ("3 PS-A degenerate check", ps_a_degenerate),
        ("4 incidence-count uniformity", lemma_uniformity),
        ("5 message-pair lemma", pair_lemma),
        ("6 counting gate", counting_gate),
        ("7 geometry properties", geometry_properties),
        ("8 encode/decode round trip", round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
