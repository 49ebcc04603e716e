//! Acceptance run: one line per criterion, exit status 1 if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use pgog::corpus::{generate_corpus, CorpusInstance, MAX_INDEX};
use pgog::decomp::{induced_gog, InducedDecomposition};
use pgog::gog::{
    euler_characteristic, fundamental_presentation, reduce, validate_gog, validate_morphism, GraphOfGroups,
    ReductionPolicy,
};
use pgog::graph::{graphs_isomorphic, Side};
use pgog::io::{parse_instance, parse_quotient};
use pgog::pgroup::{Elem, GroupLimits};
use pgog::quotient::{eval_word, OpenSubgroupSpec};
use pgog::verify::{audit_decomposition, check_reduction_confluence, partition_diagnostics, PartitionReport};
use pgog::wilkes::{build_chain_gog, build_stage, chain_retraction_morphism, verify_stage};

const CORPUS_SEED: u64 = 0x00c0_ffee;
const CORPUS_SIZE: usize = 200;
const CONFLUENCE_INSTANCES: usize = 50;
const RANDOM_ORDERS: usize = 20;
const CORPUS_BUDGET: Duration = Duration::from_secs(60);
const CONFLUENCE_BUDGET: Duration = Duration::from_secs(30);
const STAGE3_BUDGET: Duration = Duration::from_secs(120);

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

struct Case {
    instance: CorpusInstance,
    decomposition: InducedDecomposition,
    delta: GraphOfGroups,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn rational(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The precondition every corpus instance must meet.
fn well_formed(inst: &CorpusInstance) -> bool {
    let g = inst.gog();
    let phi = &inst.spec.phi;
    let relators_vanish = fundamental_presentation(g, phi.tree(), phi.tree().root())
        .map(|pres| {
            pres.relators
                .iter()
                .all(|r| eval_word(phi, &r.word).is_ok_and(|x| x == phi.target().identity()))
        })
        .unwrap_or(false);
    validate_gog(g).is_valid()
        && g.is_reduced()
        && matches!(g.p(), 2 | 3)
        && inst.spec.normal_in_image
        && inst.spec.index <= MAX_INDEX
        && relators_vanish
}

fn corpus_cases() -> (Result<Vec<Case>, String>, Duration) {
    timed(|| {
        let corpus = generate_corpus(CORPUS_SIZE, CORPUS_SEED);
        corpus
            .into_par_iter()
            .map(|instance| {
                if !well_formed(&instance) {
                    return Err(format!("instance {} is not well formed", instance.index));
                }
                let decomposition =
                    induced_gog(&instance.spec).map_err(|e| format!("instance {}: {e}", instance.index))?;
                let delta = reduce(&decomposition.delta0, ReductionPolicy::Canonical).gog;
                Ok(Case { instance, decomposition, delta })
            })
            .collect()
    })
}

fn lower_bound(cases: &[Case], elapsed: Duration) -> Line {
    let bad: Vec<usize> = cases
        .iter()
        .filter(|c| c.delta.edge_count() < c.instance.gog().edge_count())
        .map(|c| c.instance.index)
        .collect();
    let p2 = cases.iter().filter(|c| c.instance.p() == 2).count();
    let within = elapsed <= CORPUS_BUDGET;
    Line {
        id: 1,
        name: "reduced decomposition has at least as many edges",
        pass: bad.is_empty() && within && cases.len() >= CORPUS_SIZE,
        detail: format!(
            "{} instances ({} at p=2, {} at p=3), violations {:?}, corpus time {:.2?} (limit {:?})",
            cases.len(),
            p2,
            cases.len() - p2,
            bad,
            elapsed,
            CORPUS_BUDGET
        ),
        elapsed,
    }
}

fn strictness(cases: &[Case]) -> Line {
    let (relevant, elapsed) = timed(|| {
        cases
            .iter()
            .filter(|c| {
                c.instance.p() == 3
                    && c.instance.spec.index > 1
                    && !graphs_isomorphic(c.delta.graph(), c.instance.gog().graph())
            })
            .map(|c| (c.instance.index, c.delta.edge_count() > c.instance.gog().edge_count()))
            .collect::<Vec<_>>()
    });
    let bad: Vec<usize> = relevant.iter().filter(|(_, ok)| !ok).map(|(i, _)| *i).collect();
    Line {
        id: 2,
        name: "strict edge growth at p=3 when the graphs differ",
        pass: bad.is_empty() && !relevant.is_empty(),
        detail: format!("{} qualifying instances, violations {:?}", relevant.len(), bad),
        elapsed,
    }
}

fn upper_bounds(cases: &[Case]) -> Line {
    let (bad, elapsed) = timed(|| {
        cases
            .iter()
            .filter(|c| {
                let g = c.instance.gog();
                let d0 = &c.decomposition.delta0;
                let k = c.instance.spec.index;
                d0.edge_count() > k * g.edge_count() || d0.vertex_count() > k * g.vertex_count()
            })
            .map(|c| c.instance.index)
            .collect::<Vec<_>>()
    });
    Line {
        id: 3,
        name: "unreduced decomposition at most index times larger",
        pass: bad.is_empty(),
        detail: format!("{} instances, violations {:?}", cases.len(), bad),
        elapsed,
    }
}

fn confluence(cases: &[Case]) -> Line {
    let (results, elapsed) = timed(|| {
        cases[..CONFLUENCE_INSTANCES]
            .par_iter()
            .map(|c| {
                let r = check_reduction_confluence(&c.decomposition.delta0, RANDOM_ORDERS, c.instance.seed);
                (c.instance.index, r.confluent && r.outcomes.len() == RANDOM_ORDERS + 1)
            })
            .collect::<Vec<_>>()
    });
    let bad: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(i, _)| *i).collect();
    let collapsing = cases[..CONFLUENCE_INSTANCES].iter().filter(|c| !c.decomposition.delta0.is_reduced()).count();
    Line {
        id: 4,
        name: "reduction order does not change vertex and edge counts",
        pass: bad.is_empty() && elapsed <= CONFLUENCE_BUDGET,
        detail: format!(
            "{} instances ({} with fictitious edges) x (canonical + {} random orders), violations {:?}, time limit {:?}",
            results.len(),
            collapsing,
            RANDOM_ORDERS,
            bad,
            CONFLUENCE_BUDGET
        ),
        elapsed,
    }
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Counts of `Q'\P'/R` summed over objects, by brute force over the
/// target group.
fn double_coset_count(spec: &OpenSubgroupSpec, r: &BTreeSet<Elem>) -> usize {
    let t = spec.phi.target();
    let image = spec.phi.image().elements();
    let q = spec.q_image.elements();
    let mut classes: BTreeSet<BTreeSet<Elem>> = BTreeSet::new();
    for &x in image {
        classes.insert(q.iter().flat_map(|&a| r.iter().map(move |&b| t.mul(t.mul(a, x), b))).collect());
    }
    classes.len()
}

struct Worked {
    name: &'static str,
    e_delta: usize,
    group_order: Option<usize>,
    loop_only: bool,
}

fn worked_example(instance: &str, quotient: &str, want: &Worked) -> Result<(), String> {
    let g = Arc::new(parse_instance(&fixture(instance)).map_err(|e| e.to_string())?);
    let spec = parse_quotient(g.clone(), &fixture(quotient)).map_err(|e| e.to_string())?;
    let phi = &spec.phi;

    // oracle: one quotient vertex per double coset Q' x R_v, one quotient
    // edge per double coset Q' x R_e
    let v_oracle: usize = g
        .graph()
        .vertices()
        .map(|v| {
            let f = phi.vmap(v);
            let r = g.vertex_group(v).elements().map(|x| f.apply(x)).collect();
            double_coset_count(&spec, &r)
        })
        .sum();
    let e_oracle: usize = g
        .graph()
        .edges()
        .map(|e| {
            let r = g.edge_group(e.id).elements().map(|x| phi.edge_image(e.id, Side::D0, x)).collect();
            double_coset_count(&spec, &r)
        })
        .sum();

    let d = induced_gog(&spec).map_err(|e| e.to_string())?;
    let delta = reduce(&d.delta0, ReductionPolicy::Canonical).gog;
    let chi_gamma = euler_characteristic(&g);
    let checks = [
        ("vertex count", d.delta0.vertex_count() == v_oracle),
        ("edge count", d.delta0.edge_count() == e_oracle),
        ("euler", euler_characteristic(&d.delta0) == rational(spec.index) * chi_gamma.clone()),
        ("euler after reduction", euler_characteristic(&delta) == rational(spec.index) * chi_gamma),
        ("reduced edges", delta.edge_count() == want.e_delta),
        (
            "loops only",
            !want.loop_only || (delta.vertex_count() == 1 && delta.graph().edges().all(|e| e.is_loop())),
        ),
        (
            "group orders",
            want.group_order.is_none_or(|n| {
                delta.vertex_orders().iter().chain(&delta.edge_orders()).all(|&o| o == n)
            }),
        ),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(format!("{}: {:?}", want.name, failed))
    }
}

fn worked_examples() -> Line {
    let (results, elapsed) = timed(|| {
        [
            (
                "c2amalgam.json",
                "c2q.json",
                Worked { name: "C2*C2", e_delta: 1, group_order: Some(1), loop_only: true },
            ),
            (
                "c3amalgam.json",
                "c3q.json",
                Worked { name: "C3*C3", e_delta: 2, group_order: Some(1), loop_only: true },
            ),
            (
                "c4amalgam.json",
                "c4q.json",
                Worked { name: "C4*_C2 C4", e_delta: 1, group_order: Some(2), loop_only: true },
            ),
        ]
        .iter()
        .map(|(i, q, w)| worked_example(i, q, w))
        .collect::<Vec<_>>()
    });
    let errors: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    Line {
        id: 5,
        name: "worked examples match double coset and euler oracles",
        pass: errors.is_empty(),
        detail: if errors.is_empty() {
            "C2*C2 -> 1 loop, C3*C3 -> 2 loops, C4*_C2 C4 -> 1 loop over C2".into()
        } else {
            errors.join("; ")
        },
        elapsed,
    }
}

fn euler(cases: &[Case]) -> Line {
    let (bad, elapsed) = timed(|| {
        cases
            .iter()
            .filter(|c| {
                euler_characteristic(&c.decomposition.delta0)
                    != rational(c.instance.spec.index) * euler_characteristic(c.instance.gog())
            })
            .map(|c| c.instance.index)
            .collect::<Vec<_>>()
    });
    Line {
        id: 6,
        name: "euler characteristic multiplies by the index",
        pass: bad.is_empty(),
        detail: format!("{} instances, violations {:?}", cases.len(), bad),
        elapsed,
    }
}

fn has_isomorphic_loop(g: &GraphOfGroups) -> bool {
    g.graph()
        .edges()
        .any(|e| e.is_loop() && Side::BOTH.iter().any(|&s| g.boundary(e.id, s).is_isomorphism()))
}

fn partition(cases: &[Case]) -> Line {
    let (reports, elapsed) = timed(|| {
        cases
            .par_iter()
            .filter(|c| c.instance.spec.index == c.instance.p() as usize)
            .map(|c| (c, partition_diagnostics(&c.instance.spec)))
            .collect::<Vec<_>>()
    });
    let mut errors = Vec::new();
    let mut failing: Vec<(&Case, PartitionReport)> = Vec::new();
    for (c, r) in reports.iter() {
        match r {
            Ok(r) if r.holds() => {}
            Ok(r) => failing.push((c, r.clone())),
            Err(e) => errors.push(format!("instance {}: {e}", c.instance.index)),
        }
    }
    let with_loop = failing.iter().filter(|(c, _)| has_isomorphic_loop(c.instance.gog())).count();
    let examples: Vec<String> = failing
        .iter()
        .take(4)
        .map(|(c, r)| format!("#{} bound={} E_gamma={} E_delta={}", c.instance.index, r.bound, r.e_gamma, r.e_delta))
        .collect();
    Line {
        id: 7,
        name: "fixed/moved partition bound lies between the edge counts",
        pass: failing.is_empty() && errors.is_empty() && !reports.is_empty(),
        detail: format!(
            "{} index-p instances, {} violate E_gamma <= bound <= E_delta ({} of them have a loop with an isomorphic boundary) {:?}{}",
            reports.len(),
            failing.len(),
            with_loop,
            examples,
            if errors.is_empty() { String::new() } else { format!(", errors {errors:?}") }
        ),
        elapsed,
    }
}

fn wilkes() -> Line {
    let mut problems = Vec::new();
    let mut stage3 = Duration::ZERO;
    let (_, elapsed) = timed(|| {
        for (n, order) in [(1u32, 16usize), (2, 64), (3, 1024)] {
            let (report, t) = timed(|| build_stage(2, n, &GroupLimits::default()).map(|s| verify_stage(&s)));
            if n == 3 {
                stage3 = t;
            }
            match report {
                Ok(r) if r.order_g == order && r.passed() => {}
                Ok(r) => problems.push(format!(
                    "stage {n}: |G|={} failed {:?}",
                    r.order_g,
                    r.checks.iter().filter(|(_, ok)| !ok).map(|(c, _)| c).collect::<Vec<_>>()
                )),
                Err(e) => problems.push(format!("stage {n}: {e}")),
            }
        }
        let limits = GroupLimits::with_cap(1 << 18);
        let mut edges = Vec::new();
        for m in 2..=4 {
            match build_chain_gog(2, m, &limits) {
                Ok(g) if g.is_reduced() && validate_gog(&g).is_valid() => edges.push(g.edge_count()),
                Ok(_) => problems.push(format!("chain {m} is not a reduced valid graph of groups")),
                Err(e) => problems.push(format!("chain {m}: {e}")),
            }
        }
        if edges != [1, 2, 3] {
            problems.push(format!("chain edge counts {edges:?}"));
        }
        for m in 1..=3 {
            match chain_retraction_morphism(2, m, &limits) {
                Ok(f) => {
                    let r = validate_morphism(&f);
                    if !r.is_valid() {
                        problems.push(format!("retraction {}->{m}: {:?}", m + 1, r.violations));
                    }
                }
                Err(e) => problems.push(format!("retraction {}->{m}: {e}", m + 1)),
            }
        }
    });
    if stage3 > STAGE3_BUDGET {
        problems.push(format!("stage 3 took {stage3:.2?}"));
    }
    Line {
        id: 8,
        name: "tower stages, chains and retractions at p=2",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!(
                "|G_n| = 16, 64, 1024 with all relations and maps checked; chains of 2, 3, 4 stages have 1, 2, 3 edges; retractions valid; stage 3 in {stage3:.2?}"
            )
        } else {
            problems.join("; ")
        },
        elapsed,
    }
}

fn subgroup_decomposition(cases: &[Case]) -> Line {
    let (bad, elapsed) = timed(|| {
        cases
            .par_iter()
            .filter(|c| {
                let a = audit_decomposition(&c.decomposition);
                !(a.connected && a.boundaries_injective && a.two_sided && a.accounting.iter().all(|f| f.ok))
            })
            .map(|c| c.instance.index)
            .collect::<Vec<_>>()
    });
    Line {
        id: 9,
        name: "decomposition connected, injective, two-sided, fibres account for the index",
        pass: bad.is_empty(),
        detail: format!("{} instances, violations {:?}", cases.len(), bad),
        elapsed,
    }
}

fn main() {
    let (cases, corpus_time) = corpus_cases();
    let mut lines = Vec::new();
    match cases {
        Ok(cases) => {
            lines.push(lower_bound(&cases, corpus_time));
            lines.push(strictness(&cases));
            lines.push(upper_bounds(&cases));
            lines.push(confluence(&cases));
            lines.push(worked_examples());
            lines.push(euler(&cases));
            lines.push(partition(&cases));
            lines.push(wilkes());
            lines.push(subgroup_decomposition(&cases));
        }
        Err(e) => {
            println!("corpus could not be built: {e}");
            std::process::exit(1);
        }
    }
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!(
            "criterion {} {} {} ({:.2?}): {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.elapsed,
            l.detail
        );
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("{passed}/{} criteria passed", lines.len());
    if passed != lines.len() {
        std::process::exit(1);
    }
}
