//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measurements (run with `--nocapture` to see them).

use std::time::Instant;

use rainbow_core::chain::parity_partition;
use rainbow_core::extract::{extract_all, ExtractConfig};
use rainbow_core::graph::{maximum_matching, ColouredGraph};
use rainbow_core::intersect::verify_min_max;
use rainbow_core::oracle::{
    exact_max_disjoint, gen_instance, verify_certificate, GenMode, InstanceSpec,
};
use rainbow_core::quotient::QuotientMatroid;
use rainbow_core::Instance;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spread(count: usize, n_max: usize, k_max: usize, salt: u64) -> Vec<InstanceSpec> {
    let mut specs = Vec::with_capacity(count);
    let mut i = 0u64;
    'outer: loop {
        for n in 1..=n_max {
            for k in 0..=k_max {
                specs.push(InstanceSpec {
                    n,
                    k,
                    seed: salt.wrapping_mul(0x9E37_79B9).wrapping_add(i),
                    mode: GenMode::Uniform,
                });
                i += 1;
                if specs.len() == count {
                    break 'outer;
                }
            }
        }
    }
    specs
}

/// Every extraction step keeps the deficit checksum exact: the summed
/// element deficits equal the excess times the remaining budget.
#[test]
fn deficit_checksum() {
    let t0 = Instant::now();
    let mut steps = 0usize;
    for spec in spread(200, 8, 3, 1) {
        let inst = gen_instance(&spec).unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        let k = inst.matroid.corank_excess();
        let n = inst.matroid.rank();
        for report in out.state.reports.iter().filter(|r| r.removed) {
            let expected = k * (n - report.p_before - 1);
            assert_eq!(report.deficit_total, expected, "spec {spec:?}");
            assert_eq!(report.deficit_budget, expected);
            steps += 1;
        }
    }
    println!(
        "acceptance deficit_checksum: PASS ({steps} steps exact, {:.2?})",
        t0.elapsed()
    );
}

/// Exhaustive duality on every generated instance with at most 10 elements:
/// a size-n set is a basis exactly when its complement's image is a basis
/// of the quotient, and the complement rank formula equals the direct rank,
/// for every subset.
#[test]
fn duality_suite() {
    let t0 = Instant::now();
    let mut basis_checks = 0usize;
    let mut rank_checks = 0usize;
    for n in 1..=7usize {
        for k in 0..=3usize.min(10 - n) {
            for seed in 0..3u64 {
                let inst = gen_instance(&InstanceSpec {
                    n,
                    k,
                    seed: 7000 + seed + (n * 16 + k) as u64,
                    mode: GenMode::Uniform,
                })
                .unwrap();
                let m = &inst.matroid;
                let q = QuotientMatroid::for_matroid(m).unwrap();
                let total = m.element_count();
                for mask in 0u32..1 << total {
                    let set: Vec<usize> = (0..total).filter(|&e| mask >> e & 1 == 1).collect();
                    assert_eq!(
                        q.rank_via_complement(&set),
                        m.subset_rank(&set).unwrap(),
                        "rank formula failed on n={n} k={k} seed={seed} set={set:?}"
                    );
                    rank_checks += 1;
                    if set.len() == n {
                        assert!(
                            q.complement_basis_agrees(m, &set).unwrap(),
                            "basis duality failed on n={n} k={k} seed={seed} set={set:?}"
                        );
                        basis_checks += 1;
                    }
                }
            }
        }
    }
    println!(
        "acceptance duality_suite: PASS ({basis_checks} basis checks, {rank_checks} rank checks, {:.2?})",
        t0.elapsed()
    );
}

/// The intersection algorithm's maximum equals the exhaustive min-max
/// bound on 50 instances with at most 12 elements.
#[test]
fn intersection_min_max() {
    let t0 = Instant::now();
    let mut checked = 0usize;
    for spec in spread(50, 8, 3, 3) {
        if spec.n + spec.k > 12 {
            continue;
        }
        let inst = gen_instance(&spec).unwrap();
        let g = ColouredGraph::build(&inst.bases);
        assert!(
            verify_min_max(&g, &inst.matroid).unwrap(),
            "min-max mismatch on {spec:?}"
        );
        checked += 1;
    }
    // an infeasible residual graph must agree on the short value as well
    let inst = Instance::parse("MATROID 2 2\n1011\n0111\nBASES\n1 3\n2 4\n").unwrap();
    let mut g = ColouredGraph::build(&inst.bases);
    let w = rainbow_core::Matching::from_pairs(2, 4, &[(0, 0), (1, 1)]).unwrap();
    g.remove_matching(&w).unwrap();
    assert!(verify_min_max(&g, &inst.matroid).unwrap());
    checked += 1;
    println!(
        "acceptance intersection_min_max: PASS ({checked} instances, {:.2?})",
        t0.elapsed()
    );
}

fn brute_max_matching(adj: &[Vec<usize>], x: usize, used: u32) -> usize {
    if x == adj.len() {
        return 0;
    }
    let mut best = brute_max_matching(adj, x + 1, used);
    for &y in &adj[x] {
        if used >> y & 1 == 0 {
            best = best.max(1 + brute_max_matching(adj, x + 1, used | 1 << y));
        }
    }
    best
}

/// Maximum matchings agree with exhaustive search and attain the
/// deficiency bound, witness included, on 200 random bipartite graphs.
#[test]
fn konig_ore() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..200 {
        let nx = rng.gen_range(1..=6);
        let ny = rng.gen_range(1..=6);
        let p: f64 = rng.gen_range(0.15..0.9);
        let adj: Vec<Vec<usize>> = (0..nx)
            .map(|_| (0..ny).filter(|_| rng.gen_bool(p)).collect())
            .collect();
        let (mm, witness) = maximum_matching(&adj, ny);
        let brute = brute_max_matching(&adj, 0, 0);
        assert_eq!(mm.len(), brute, "case {case}: matching size off");
        let deficiency = |xs: &[usize]| {
            let mut nbrs: Vec<usize> = xs.iter().flat_map(|&x| adj[x].clone()).collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            xs.len().saturating_sub(nbrs.len())
        };
        let mut max_def = 0usize;
        for mask in 0u32..1 << nx {
            let xs: Vec<usize> = (0..nx).filter(|&x| mask >> x & 1 == 1).collect();
            max_def = max_def.max(deficiency(&xs));
        }
        assert_eq!(mm.len(), nx - max_def, "case {case}: deficiency bound off");
        assert_eq!(
            mm.len(),
            nx - deficiency(&witness),
            "case {case}: witness does not attain the bound"
        );
    }
    println!("acceptance konig_ore: PASS (200 graphs, {:.2?})", t0.elapsed());
}

fn is_acyclic(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut indeg = [0usize; 5];
    let mut alive = [false; 5];
    alive[..n].fill(true);
    for &(_, b) in arcs {
        indeg[b] += 1;
    }
    for _ in 0..n {
        let Some(v) = (0..n).find(|&v| alive[v] && indeg[v] == 0) else {
            return false;
        };
        alive[v] = false;
        for &(a, b) in arcs {
            if a == v && alive[b] {
                indeg[b] -= 1;
            }
        }
    }
    true
}

/// Exhaustive over every acyclic digraph on up to 5 labelled vertices and
/// every root: the parity partition is odd exactly at the root.
#[test]
fn parity_partition_exhaustive() {
    let t0 = Instant::now();
    let expected_dags = [1usize, 3, 25, 543, 29281];
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let mut dags = 0usize;
        for mask in 0u64..1 << pairs.len() {
            let arcs: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            if !is_acyclic(n, &arcs) {
                continue;
            }
            dags += 1;
            for root in 0..n {
                let in_x = parity_partition(n, &arcs, root).unwrap();
                for v in 0..n {
                    let sum = usize::from(in_x[v])
                        + arcs.iter().filter(|&&(a, b)| b == v && in_x[a]).count();
                    assert_eq!(
                        sum % 2 == 1,
                        v == root,
                        "n={n} arcs={arcs:?} root={root} v={v}"
                    );
                }
            }
        }
        assert_eq!(dags, expected_dags[n - 1], "acyclic digraph count at n={n}");
    }
    println!(
        "acceptance parity_partition: PASS (29853 digraphs, all roots, {:.2?})",
        t0.elapsed()
    );
}

/// Every exchange attempted across 500 extraction runs passes the direct
/// rank check on the replacement classes; zero failures.
#[test]
fn exchange_soundness() {
    let t0 = Instant::now();
    let mut checks = 0usize;
    let mut rank_failures = 0usize;
    let mut cert_faults = 0usize;
    for spec in spread(500, 8, 3, 5) {
        let inst = gen_instance(&spec).unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        for report in &out.state.reports {
            checks += report.stats.exchange_checks;
            rank_failures += report.stats.exchange_rank_failures;
            cert_faults += report.stats.certificate_faults;
        }
    }
    assert!(checks > 0, "the corpus must exercise exchanges");
    assert_eq!(rank_failures, 0, "an exchange failed its rank check");
    println!(
        "acceptance exchange_soundness: PASS ({checks} exchanges, 0 rank failures, {cert_faults} certificate faults, {:.2?})",
        t0.elapsed()
    );
}

/// 300 small instances against the exact oracle: certificates verify, the
/// extractor never overcounts, zero-excess instances always reach the full
/// count, and excess-one instances stay within two of it at least 90% of
/// the time.
#[test]
fn end_to_end_vs_oracle() {
    let t0 = Instant::now();
    let mut k1_total = 0usize;
    let mut k1_good = 0usize;
    let mut runs = 0usize;
    for spec in spread(300, 5, 2, 7) {
        let inst = gen_instance(&spec).unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        assert!(
            verify_certificate(&inst.matroid, &inst.bases, &out.certificate).unwrap(),
            "certificate rejected on {spec:?}"
        );
        let exact = exact_max_disjoint(&inst.matroid, &inst.bases).unwrap();
        let t = out.certificate.t();
        assert!(t <= exact, "extractor overcounted on {spec:?}");
        if spec.k == 0 {
            assert_eq!(t, spec.n, "zero-excess shortfall on {spec:?}");
        }
        if spec.k == 1 {
            k1_total += 1;
            if t + 2 >= spec.n {
                k1_good += 1;
            }
        }
        runs += 1;
    }
    assert!(runs >= 300);
    assert!(
        k1_good * 10 >= k1_total * 9,
        "excess-one regression: {k1_good}/{k1_total}"
    );
    println!(
        "acceptance end_to_end_vs_oracle: PASS ({runs} runs, k1 {k1_good}/{k1_total}, {:.2?})",
        t0.elapsed()
    );
}

/// Identical instance, seed, and config produce a byte-identical
/// certificate, twice.
#[test]
fn determinism() {
    let t0 = Instant::now();
    for spec in spread(24, 7, 3, 9) {
        let inst = gen_instance(&spec).unwrap();
        let cfg = ExtractConfig {
            seed: spec.seed ^ 0x5555,
            ..Default::default()
        };
        let first = extract_all(&inst.matroid, &inst.bases, &cfg)
            .unwrap()
            .certificate
            .to_text();
        let second = extract_all(&inst.matroid, &inst.bases, &cfg)
            .unwrap()
            .certificate
            .to_text();
        assert_eq!(first, second, "non-deterministic run on {spec:?}");
    }
    println!("acceptance determinism: PASS (24 paired runs, {:.2?})", t0.elapsed());
}
