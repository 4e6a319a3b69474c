//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use foip::arith::{
    build_schedule, chain_eval, round_count, BasePoly, ChainEvaluator, OpKind, PartialAssignment, SymbolicTower,
};
use foip::field::{is_irreducible, smallest_prime_geq, ExtContext, ExtElement, PrimeModulus};
use foip::fo::{Instance, Matrix, PnfFormula, Quantifier, Structure, SymbolId, Var, Vocabulary};
use foip::oracle::model_check;
use foip::protocol::{
    choose_params, modulus_lower_bound, soundness_experiment, three_sigma_margin, trial_seed, verify_transcript,
    ProverStrategy, RunOptions, RunTrace, Session, Transcript, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EDGE: SymbolId = SymbolId(0);

/// Instances over one binary relation `E`: every content for `n ≤ 2`, 200
/// seeded contents for `n = 3`, every prefix with `k ≤ 2` and every matrix
/// of at most four nodes.
struct Family {
    structures: Vec<Structure>,
    formulas: Vec<PnfFormula>,
}

impl Family {
    fn new() -> Self {
        let vocab = Vocabulary::new([("E", 2)], 2).unwrap();
        let mut structures = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0xfa111);
        for n in 1..=3usize {
            let cells = n * n;
            let contents: Vec<u32> = if n <= 2 {
                (0..1u32 << cells).collect()
            } else {
                (0..200).map(|_| rng.gen_range(0..1u32 << cells)).collect()
            };
            for bits in contents {
                let tuples = (0..cells).filter(|c| bits >> c & 1 == 1).map(|c| vec![c / n, c % n]).collect();
                structures.push(Structure::new(n, vocab.clone(), vec![tuples]).unwrap());
            }
        }
        let mut formulas = Vec::new();
        for k in 1..=2 {
            let ms = matrices(k, 4);
            for prefix in prefixes(k) {
                for m in &ms {
                    formulas.push(PnfFormula::new(prefix.clone(), m.clone()).unwrap());
                }
            }
        }
        Self { structures, formulas }
    }

    fn len(&self) -> usize {
        self.structures.len() * self.formulas.len()
    }

    fn instances(&self) -> impl Iterator<Item = Instance> + '_ {
        self.structures
            .iter()
            .flat_map(move |s| self.formulas.iter().map(move |f| Instance::new(s.clone(), f.clone()).unwrap()))
    }
}

fn prefixes(k: usize) -> Vec<Vec<Quantifier>> {
    (0..1u32 << k)
        .map(|b| (0..k).map(|i| if b >> i & 1 == 1 { Quantifier::Forall } else { Quantifier::Exists }).collect())
        .collect()
}

/// All matrices over `x1..xk` with at most `max` nodes.
fn matrices(k: usize, max: usize) -> Vec<Matrix> {
    let mut by_size: Vec<Vec<Matrix>> = vec![Vec::new(); max + 1];
    for i in 1..=k {
        for j in 1..=k {
            by_size[1].push(Matrix::Equal(Var(i), Var(j)));
            by_size[1].push(Matrix::Rel(EDGE, vec![Var(i), Var(j)]));
        }
    }
    for size in 2..=max {
        let mut out: Vec<Matrix> = by_size[size - 1].iter().map(|m| Matrix::not(m.clone())).collect();
        for left in 1..size - 1 {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    out.push(Matrix::and(a.clone(), b.clone()));
                    out.push(Matrix::or(a.clone(), b.clone()));
                }
            }
        }
        by_size[size] = out;
    }
    by_size.concat()
}

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, id: u32, ok: bool, started: Instant, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        let line = format!("C{id} {verdict} {detail} [{:.1}s]", started.elapsed().as_secs_f64());
        println!("{line}");
        self.lines.push((ok, line));
    }
}

fn context(q: u64, seed: u64) -> ExtContext {
    let inst = Instance::new(
        Structure::new(1, Vocabulary::default(), vec![]).unwrap(),
        PnfFormula::new(vec![], Matrix::Const(true)).unwrap(),
    )
    .unwrap();
    choose_params(&inst, seed, q).unwrap().ctx
}

fn main() -> ExitCode {
    let mut report = Report { lines: Vec::new() };
    let family = Family::new();
    println!("family: {} structures x {} sentences = {} instances", family.structures.len(), family.formulas.len(), family.len());

    let q = 5;
    let ctx5 = context(q, 0);
    let mut degrees = DegreeLedger::default();

    // C1: reference evaluation of P_0 against brute force, and the exact
    // classes of matrix polynomials used by C2.
    let started = Instant::now();
    let mut mismatches = 0usize;
    let mut truths = 0usize;
    let mut classes: HashMap<ClassKey, Class> = HashMap::new();
    for (idx, inst) in family.instances().enumerate() {
        assert_eq!(smallest_prime_geq(modulus_lower_bound(&inst)), q);
        let sched = build_schedule(inst.formula().prefix());
        let truth = model_check(&inst);
        truths += truth as usize;
        let top = chain_eval(&inst, &ctx5, &sched, 0, &PartialAssignment::empty(inst.k())).unwrap();
        if top != ctx5.embed(truth as u64).unwrap() {
            mismatches += 1;
        }
        let tower = SymbolicTower::new(&inst, ctx5.modulus(), &sched).expect("family instances are small");
        let key = (inst.structure().universe_size(), inst.formula().prefix().to_vec(), tower.poly(sched.len()).clone());
        let class = classes.entry(key).or_insert_with(|| Class { truth, members: 0, split: false, first: idx });
        class.members += 1;
        class.split |= class.truth != truth;
    }
    report.record(
        1,
        mismatches == 0,
        started,
        format!("P_0 = [A |= phi] on all {} instances ({truths} true): {mismatches} mismatches", family.len()),
    );

    // C2: honest completeness.
    let started = Instant::now();
    let split = classes.values().filter(|c| c.split).count();
    let mut reps: Vec<usize> = classes.values().filter(|c| c.truth).map(|c| c.first).collect();
    reps.sort_unstable();
    let mut rejects = 0usize;
    let mut runs = 0usize;
    let mut next_rep = reps.iter().peekable();
    for (idx, inst) in family.instances().enumerate() {
        let is_rep = next_rep.peek() == Some(&&idx);
        if !is_rep && !model_check(&inst) {
            continue;
        }
        let session = Session::new(&inst, RunOptions::default()).unwrap();
        let seeds = if is_rep {
            next_rep.next();
            0..COMPLETENESS_SEEDS
        } else {
            // Members share their class representative's transcripts.
            idx as u64..idx as u64 + 1
        };
        for seed in seeds {
            let (tr, trace) = session.run(ProverStrategy::Honest, seed).unwrap();
            runs += 1;
            rejects += (tr.verdict() != Verdict::Accept) as usize;
            degrees.observe(&inst, &tr, &trace);
        }
    }
    report.record(
        2,
        rejects == 0 && split == 0,
        started,
        format!(
            "{truths} true instances in {} exact polynomial classes ({split} with mixed truth); \
             {COMPLETENESS_SEEDS} honest seeds per class plus one per instance: {runs} runs, {rejects} rejected",
            reps.len()
        ),
    );

    // C3: soundness ceiling at q = 5.
    let started = Instant::now();
    let picks = false_instances(&family, &classes, SOUNDNESS_INSTANCES);
    let bound = 1.0 / q as f64;
    let ceiling = bound + three_sigma_margin(bound, SOUNDNESS_TRIALS);
    let mut worst = 0.0f64;
    let mut sound = picks.len() >= SOUNDNESS_INSTANCES;
    let mut api_agrees = true;
    let mut total_accepts = 0usize;
    for (n, inst) in picks.iter().enumerate() {
        let session = Session::new(inst, RunOptions::default()).unwrap();
        sound &= session.modulus().get() == q;
        for strategy in [ProverStrategy::RoundFixing, ProverStrategy::RandomConsistent] {
            let master = 1000 + n as u64;
            let mut accepts = 0usize;
            for i in 0..SOUNDNESS_TRIALS as u64 {
                let (tr, trace) = session.run(strategy, trial_seed(master, i)).unwrap();
                accepts += (tr.verdict() == Verdict::Accept) as usize;
                degrees.observe(inst, &tr, &trace);
            }
            if n == 0 {
                let r = soundness_experiment(inst, strategy, SOUNDNESS_TRIALS, master, 0).unwrap();
                api_agrees &= r.accepts == accepts;
            }
            let rate = accepts as f64 / SOUNDNESS_TRIALS as f64;
            worst = worst.max(rate);
            total_accepts += accepts;
            sound &= rate <= ceiling;
        }
    }
    report.record(
        3,
        sound && api_agrees,
        started,
        format!(
            "{} false instances x 2 provers x {SOUNDNESS_TRIALS} trials: pooled rate {:.4}, worst {worst:.4}, ceiling {ceiling:.4}{}",
            picks.len(),
            total_accepts as f64 / (2 * picks.len() * SOUNDNESS_TRIALS) as f64,
            if api_agrees { "" } else { " (experiment API disagrees with direct runs)" }
        ),
    );

    // C4: degree and round-count invariants over the runs of C2 and C3.
    let started = Instant::now();
    let counts: Vec<usize> = (1..=3).map(round_count).collect();
    let ok = degrees.over_bound == 0 && degrees.bad_rounds == 0 && counts == [2, 5, 9];
    report.record(
        4,
        ok,
        started,
        format!(
            "{} honest messages, max degree {} (bound {}), {} over; {} completed transcripts, {} with wrong round count; T(1..3) = {counts:?}",
            degrees.messages, degrees.max_degree, q * q, degrees.over_bound, degrees.completed, degrees.bad_rounds
        ),
    );

    // C5: Reduce positions leave P unchanged on universe points.
    let started = Instant::now();
    let (checked, broken) = reduce_identity(&family, &ctx5);
    report.record(
        5,
        broken == 0 && checked > 0,
        started,
        format!("{checked} Reduce identities over all k <= 2 schedules and universe points: {broken} violated"),
    );

    // C6: field arithmetic.
    let started = Instant::now();
    let (field_checks, field_failures) = field_suite();
    let (quartics, irreducible, disagreements) = irreducibility_suite();
    report.record(
        6,
        field_failures == 0 && disagreements == 0,
        started,
        format!(
            "{field_checks} identities on 10^4 samples for q in {{5,7,11}}: {field_failures} failed; \
             {quartics} monic quartics over GF(2), GF(3) ({irreducible} irreducible): {disagreements} disagree with factor search"
        ),
    );

    // C7: transcript round-trip and tamper detection.
    let started = Instant::now();
    let t = transcript_suite(&family);
    report.record(
        7,
        t.failures == 0 && t.undetected == 0 && t.accepts > 0 && t.rejects > 0,
        started,
        format!(
            "{} runs ({} accept, {} reject): {} not reproduced; {} single-byte coefficient perturbations: \
             {} unparseable, {} flagged by replay, {} caught by the replayed reject verdict alone, {} undetected",
            t.runs, t.accepts, t.rejects, t.failures, t.perturbations, t.unparseable, t.flagged, t.reject_only, t.undetected
        ),
    );

    let failed = report.lines.iter().filter(|l| !l.0).count();
    println!("{} of {} criteria passed", report.lines.len() - failed, report.lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

const COMPLETENESS_SEEDS: u64 = 100;
const SOUNDNESS_INSTANCES: usize = 12;
const SOUNDNESS_TRIALS: usize = 2000;
const TRANSCRIPT_RUNS: u64 = 500;

/// Two instances with the same universe size, prefix and expanded matrix
/// polynomial produce the same transcript for every seed, up to the digest
/// line: the prover reads only the polynomial tower and the verifier only
/// the matrix polynomial.
type ClassKey = (usize, Vec<Quantifier>, BasePoly);

struct Class {
    truth: bool,
    members: usize,
    split: bool,
    first: usize,
}

#[derive(Default)]
struct DegreeLedger {
    messages: usize,
    max_degree: usize,
    over_bound: usize,
    completed: usize,
    bad_rounds: usize,
}

impl DegreeLedger {
    fn observe(&mut self, inst: &Instance, tr: &Transcript, trace: &RunTrace) {
        let q = tr.header.q.get() as usize;
        for &d in &trace.honest_degrees {
            self.messages += 1;
            self.max_degree = self.max_degree.max(d);
            self.over_bound += (d > q * q) as usize;
        }
        if tr.last.matrix.is_some() {
            self.completed += 1;
            self.bad_rounds += (tr.rounds.len() != round_count(inst.k())) as usize;
        }
    }
}

/// False `k = 2` instances from distinct classes, chosen by a seeded walk.
fn false_instances(family: &Family, classes: &HashMap<ClassKey, Class>, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x50);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let q = PrimeModulus::new(5).unwrap();
    while out.len() < count {
        let s = &family.structures[rng.gen_range(0..family.structures.len())];
        let f = &family.formulas[rng.gen_range(0..family.formulas.len())];
        if f.k() != 2 || s.universe_size() < 2 {
            continue;
        }
        let inst = Instance::new(s.clone(), f.clone()).unwrap();
        if model_check(&inst) {
            continue;
        }
        let sched = build_schedule(f.prefix());
        let top = SymbolicTower::new(&inst, q, &sched).unwrap().poly(sched.len()).clone();
        let key: ClassKey = (s.universe_size(), f.prefix().to_vec(), top);
        assert!(!classes[&key].truth);
        if seen.insert(key) {
            out.push(inst);
        }
    }
    out
}

fn reduce_identity(family: &Family, ctx: &ExtContext) -> (usize, usize) {
    let (mut checked, mut broken) = (0, 0);
    for inst in family.instances() {
        let sched = build_schedule(inst.formula().prefix());
        let n = inst.structure().universe_size();
        let mut ev = ChainEvaluator::new(&inst, ctx, &sched);
        ev.eval(0, &PartialAssignment::empty(inst.k())).unwrap();
        for (t, op) in sched.ops().iter().enumerate() {
            if op.kind != OpKind::Reduce {
                continue;
            }
            let free: Vec<Var> = (1..=inst.k()).map(Var).filter(|&v| sched.is_free(t, v)).collect();
            for point in 0..n.pow(free.len() as u32) {
                let mut asg = PartialAssignment::empty(inst.k());
                let mut rest = point;
                for &v in &free {
                    asg.set(v, ctx.base((rest % n) as u64));
                    rest /= n;
                }
                checked += 1;
                broken += (ev.eval(t, &asg).unwrap() != ev.eval(t + 1, &asg).unwrap()) as usize;
            }
        }
    }
    (checked, broken)
}

fn field_suite() -> (usize, usize) {
    let (mut checks, mut failures) = (0, 0);
    let mut check = |ok: bool| {
        checks += 1;
        failures += !ok as usize;
    };
    for q in [5u64, 7, 11] {
        let ctx = context(q, q);
        let order = q.pow(4);
        let mut rng = ChaCha8Rng::seed_from_u64(q * 17);
        for _ in 0..10_000 {
            let (a, b, c) = (ctx.random(&mut rng), ctx.random(&mut rng), ctx.random(&mut rng));
            check(ctx.add(a, b) == ctx.add(b, a));
            check(ctx.mul(a, b) == ctx.mul(b, a));
            check(ctx.add(ctx.add(a, b), c) == ctx.add(a, ctx.add(b, c)));
            check(ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c)));
            check(ctx.mul(a, ctx.add(b, c)) == ctx.add(ctx.mul(a, b), ctx.mul(a, c)));
            check(ctx.add(a, ExtElement::ZERO) == a && ctx.mul(a, ExtElement::ONE) == a);
            check(ctx.add(a, ctx.neg(a)) == ExtElement::ZERO && ctx.sub(ctx.add(a, b), b) == a);
            check(match ctx.inv(a) {
                Ok(i) => ctx.mul(a, i) == ExtElement::ONE,
                Err(_) => a.is_zero(),
            });
            check(ctx.pow(a, order) == a);
            let x = ctx.base(rng.gen_range(1..q));
            check(ctx.pow(x, q - 1) == ExtElement::ONE);
        }
    }
    (checks, failures)
}

fn poly_rem(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
    // g is monic
    let mut r = f.to_vec();
    while r.len() >= g.len() {
        let lead = *r.last().unwrap();
        let shift = r.len() - g.len();
        for (i, &c) in g.iter().enumerate() {
            r[shift + i] = (r[shift + i] + q * q - lead * c % q) % q;
        }
        r.pop();
    }
    r
}

fn irreducibility_suite() -> (usize, usize, usize) {
    let (mut total, mut irreducible, mut disagree) = (0, 0, 0);
    for p in [2u64, 3] {
        let q = PrimeModulus::new(p).unwrap();
        let monic = |deg: usize, idx: u64| -> Vec<u64> {
            let mut c: Vec<u64> = (0..deg).map(|i| idx / p.pow(i as u32) % p).collect();
            c.push(1);
            c
        };
        let factors: Vec<Vec<u64>> =
            (1..=2).flat_map(|d| (0..p.pow(d as u32)).map(move |i| (d, i))).map(|(d, i)| monic(d, i)).collect();
        let mut count = 0;
        for idx in 0..p.pow(4) {
            let f = monic(4, idx);
            let by_search = factors.iter().all(|g| poly_rem(&f, g, p).iter().any(|&c| c != 0));
            let by_rabin = is_irreducible(q, &f).unwrap();
            total += 1;
            count += by_search as usize;
            disagree += (by_search != by_rabin) as usize;
        }
        // Gauss: (p^4 − p^2) / 4 monic irreducible quartics.
        disagree += (count as u64 != (p.pow(4) - p.pow(2)) / 4) as usize;
        irreducible += count;
    }
    (total, irreducible, disagree)
}

#[derive(Default)]
struct TranscriptStats {
    runs: usize,
    accepts: usize,
    rejects: usize,
    failures: usize,
    perturbations: usize,
    unparseable: usize,
    flagged: usize,
    reject_only: usize,
    undetected: usize,
}

fn transcript_suite(family: &Family) -> TranscriptStats {
    let mut st = TranscriptStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a);
    for seed in 0..TRANSCRIPT_RUNS {
        let s = &family.structures[rng.gen_range(0..family.structures.len())];
        let f = &family.formulas[rng.gen_range(0..family.formulas.len())];
        let inst = Instance::new(s.clone(), f.clone()).unwrap();
        let strategy = ProverStrategy::ALL[seed as usize % 3];
        let (tr, _) = Session::new(&inst, RunOptions::default()).unwrap().run(strategy, seed).unwrap();
        st.runs += 1;
        match tr.verdict() {
            Verdict::Accept => st.accepts += 1,
            Verdict::Reject => st.rejects += 1,
        }
        let text = tr.to_string();
        let reproduced = match text.parse::<Transcript>() {
            Ok(back) => {
                back == tr
                    && back.to_string() == text
                    && verify_transcript(&inst, &back).is_ok_and(|v| v.reproduced() && v.verdict == tr.verdict())
            }
            Err(_) => false,
        };
        st.failures += !reproduced as usize;

        for (start, end) in coefficient_spans(&text) {
            for pos in start..end {
                let original = text.as_bytes()[pos];
                if !original.is_ascii_digit() {
                    continue;
                }
                for b in b"0123456789x" {
                    if *b == original {
                        continue;
                    }
                    let mut bytes = text.clone().into_bytes();
                    bytes[pos] = *b;
                    let bad = String::from_utf8(bytes).unwrap();
                    st.perturbations += 1;
                    let Ok(parsed) = bad.parse::<Transcript>() else {
                        st.unparseable += 1;
                        continue;
                    };
                    match verify_transcript(&inst, &parsed) {
                        Err(_) => st.unparseable += 1,
                        Ok(v) if !v.diagnostics.is_empty() || v.verdict != tr.verdict() => st.flagged += 1,
                        Ok(v) if v.verdict == Verdict::Reject => st.reject_only += 1,
                        Ok(_) => st.undetected += 1,
                    }
                }
            }
        }
    }
    st
}

/// Byte ranges of the coefficient lists of every round message.
fn coefficient_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.starts_with("round ") {
            let start = line.find("coeffs=").unwrap() + "coeffs=".len();
            let end = line.find(" check ").unwrap();
            spans.push((offset + start, offset + end));
        }
        offset += line.len();
    }
    spans
}
