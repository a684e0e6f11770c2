//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use ncmontel_core::freepoly::{parse, FreePolyMatrix};
use ncmontel_core::gradedfun::{check_nc_axioms, unitary_action};
use ncmontel_core::hereditary::{
    closure_recover, kernel_distance, kernel_from_function, model_cone_element, ClosureMode,
};
use ncmontel_core::linalg::{min_eigenvalue, op_norm};
use ncmontel_core::ncpoints::{direct_sum, metric_distance, ExhaustionGrid, MatrixTuple, SampleRole, SampleSet};
use ncmontel_core::sampling::{self, rng};
use ncmontel_core::uniqueness::{is_uniqueness_set, FunctionClass};
use ncmontel_core::wandering;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn shifting_basis() -> Outcome {
    let start = Instant::now();
    let s = shifting_sequence(10, 16, 0.5);
    let vals = s.at_point(0);
    let mut raw_min = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            raw_min = raw_min.min(op_norm(&(&vals[i] - &vals[j])));
        }
    }
    let expected = 0.5 * 2f64.sqrt();
    let res = wandering::run_default(&s).expect("wandering run");
    let elapsed = start.elapsed();
    let all = res.subsequence == (0..10).collect::<Vec<_>>();
    let pass =
        (raw_min - expected).abs() <= 1e-12 && res.cauchy_residual <= 1e-12 && all && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "raw min distance {raw_min:.16} (want {expected:.16}), cauchy residual {:e}, all indices kept {all}, {elapsed:?}",
            res.cauchy_residual
        ),
    )
}

fn block_containment() -> Outcome {
    let start = Instant::now();
    let (mut containment, mut defect) = (0.0f64, 0.0f64);
    for seed in 0..20 {
        let s = random_sequence(&mut rng(seed), &[1, 2, 2], 32, 10, 1.0);
        let res = wandering::run_default(&s).expect("wandering run");
        containment = containment.max(res.containment_residual);
        defect = defect.max(res.unitarity_defect);
    }
    let elapsed = start.elapsed();
    outcome(
        containment <= 1e-9 && defect <= 1e-10 && elapsed < Duration::from_secs(5),
        format!("max containment {containment:e}, max unitarity defect {defect:e}, {elapsed:?}"),
    )
}

fn nc_axioms() -> Outcome {
    let mut g = rng(303);
    let (mut ds, mut sim, mut errors) = (0.0f64, 0.0f64, 0);
    for case in 0..50 {
        let d = 1 + case % 3;
        let u = random_poly_function(&mut g, d, 2, 3);
        let (n1, n2, n3) = (g.gen_range(1..=3), g.gen_range(1..=3), g.gen_range(1..=4));
        let pair = (sampling::bounded_tuple(&mut g, d, n1, 0.9), sampling::bounded_tuple(&mut g, d, n2, 0.9));
        let s = sampling::similarity(&mut g, n3, 10.0);
        let simcase = (sampling::bounded_tuple(&mut g, d, n3, 0.9), s);
        let r = check_nc_axioms(&u, &[pair], &[simcase], 1e-9);
        ds = ds.max(r.max_direct_sum_residual);
        sim = sim.max(r.max_similarity_residual);
        errors += r.errors().count();
    }
    outcome(
        ds <= 1e-9 && sim <= 1e-9 && errors == 0,
        format!("max direct-sum residual {ds:e}, max similarity residual {sim:e}, evaluation errors {errors}"),
    )
}

fn norm_direct_sum() -> Outcome {
    let mut g = rng(404);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = 1 + case % 3;
        let (j, l) = (g.gen_range(1..=2), g.gen_range(1..=2));
        let delta = sampling::poly_matrix::<f64>(&mut g, d, j, l, 3, 3);
        let (n1, n2) = (g.gen_range(1..=3), g.gen_range(1..=3));
        let lam = sampling::bounded_tuple(&mut g, d, n1, 0.9);
        let mu = sampling::bounded_tuple(&mut g, d, n2, 0.9);
        let joint = op_norm(&delta.evaluate(&direct_sum(&lam, &mu).unwrap()).unwrap());
        let split = op_norm(&delta.evaluate(&lam).unwrap()).max(op_norm(&delta.evaluate(&mu).unwrap()));
        worst = worst.max((joint - split).abs());
    }
    outcome(worst <= 1e-10, format!("max |‖δ(λ⊕μ)‖ - max(‖δ(λ)‖, ‖δ(μ)‖)| = {worst:e}"))
}

fn kernel_invariance() -> Outcome {
    let mut g = rng(505);
    let u = random_poly_function(&mut g, 2, 6, 2);
    let grid = mixed_points(&mut g, 2, &[1, 1, 2, 2, 3], 0.5);
    let base = kernel_from_function(&u);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = sampling::unitary::<f64>(&mut g, 6);
        let moved = kernel_from_function(&unitary_action(&w, &u).unwrap());
        worst = worst.max(kernel_distance(&base, &moved, &grid).unwrap());
    }
    outcome(worst <= 1e-12, format!("max pointwise kernel change {worst:e} over 20 unitaries"))
}

fn cone_closure() -> Outcome {
    let mut g = rng(606);
    let delta: FreePolyMatrix<f64> = parse("[[0.5*x1, 0.3*x2], [0.2*x1*x2, 0.4*x2 + 0.1]]", 2).unwrap();
    let u = random_poly_function(&mut g, 2, 5, 2);
    let mut pts = Vec::new();
    for n in [1, 1, 2, 2, 3] {
        let raw = sampling::tuple::<f64>(&mut g, 2, n);
        pts.push(sampling::scale_into_polyhedron(&delta, &raw, 1e-3).unwrap());
    }
    let grid = SampleSet::new(pts, SampleRole::DenseGrid).unwrap();
    let s = drifting_sequence(&u, &grid, 12, 64);
    let eps = 1e-6 * s.bound();
    let cone_p = closure_recover(&s, &grid, &ClosureMode::ConeP, eps).unwrap();
    let model = closure_recover(&s, &grid, &ClosureMode::ModelCone(delta.clone()), eps).unwrap();
    let element = model_cone_element(&delta, &u).unwrap();
    let floor = grid
        .points()
        .iter()
        .map(|p| min_eigenvalue(&element.evaluate(p, p).unwrap()).unwrap())
        .fold(f64::INFINITY, f64::min);
    outcome(
        cone_p.residual <= 1e-8 && model.residual <= 1e-8 && floor >= -1e-10,
        format!(
            "cone-P residual {:e}, model-cone residual {:e}, min eigenvalue at (λ,λ) {floor:e}",
            cone_p.residual, model.residual
        ),
    )
}

/// Rank by brute force: the largest k with a nonzero k×k minor.
fn brute_force_rank(rows: &[Vec<f64>]) -> usize {
    fn det(m: &[Vec<f64>]) -> f64 {
        match m.len() {
            1 => m[0][0],
            n => (0..n)
                .map(|c| {
                    let minor: Vec<Vec<f64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                        .collect();
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[0][c] * det(&minor)
                })
                .sum(),
        }
    }
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut with: Vec<Vec<usize>> = subsets(n - 1, k - 1)
            .into_iter()
            .map(|mut s| {
                s.push(n - 1);
                s
            })
            .collect();
        with.extend(subsets(n - 1, k));
        with
    }
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    for k in (1..=rows.len().min(cols)).rev() {
        for rs in subsets(rows.len(), k) {
            for cs in subsets(cols, k) {
                let m: Vec<Vec<f64>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c]).collect()).collect();
                if det(&m).abs() > 1e-12 {
                    return k;
                }
            }
        }
    }
    0
}

fn uniqueness_surrogate() -> Outcome {
    let cls = FunctionClass::new(1, 2).unwrap();
    let mut agree = true;
    let mut detail = Vec::new();
    for xs in [vec![0.1, 0.2, 0.3], vec![0.1, 0.2]] {
        let got = is_uniqueness_set(&scalar_set(&xs), &cls, 1e-10).unwrap();
        let vandermonde: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let oracle = brute_force_rank(&vandermonde) == 3;
        agree &= got == oracle;
        detail.push(format!("{xs:?}: {got} (oracle {oracle})"));
    }
    let expected =
        agree && detail[0].starts_with("[0.1, 0.2, 0.3]: true") && detail[1].starts_with("[0.1, 0.2]: false");
    outcome(expected, detail.join(", "))
}

fn metric_sanity() -> Outcome {
    let pts: Vec<MatrixTuple<f64>> =
        [0.1, 0.2, 0.3].iter().map(|&x| MatrixTuple::real_scalars(&[x]).unwrap()).collect();
    let grid = ExhaustionGrid::from_prefixes(pts.clone(), &[1, 2, 3]).unwrap();
    let table = |c: f64| -> Vec<Vec<M>> {
        grid.levels().iter().map(|l| vec![M::from_real(1, 1, &[c]).unwrap(); l.len()]).collect()
    };
    let d = metric_distance(&table(1.0), &table(0.0), &grid).unwrap();

    let mut g = rng(808);
    let wide: Vec<MatrixTuple<f64>> = (0..6).map(|i| sampling::bounded_tuple(&mut g, 2, 1 + i % 2, 0.9)).collect();
    let grid2 = ExhaustionGrid::from_prefixes(wide, &[2, 4, 6]).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let t: Vec<_> = (0..3).map(|_| random_poly_function(&mut g, 2, 2, 2).tabulate_grid(&grid2).unwrap()).collect();
        let dist = |a: usize, b: usize| metric_distance(&t[a], &t[b], &grid2).unwrap();
        worst = worst.max(dist(0, 2) - dist(0, 1) - dist(1, 2));
    }
    outcome(
        (d - 0.4375).abs() <= 1e-12 && worst <= 1e-12,
        format!("constant-difference distance {d:.16}, max triangle excess {worst:e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("shifting-basis demo", shifting_basis),
        ("block containment", block_containment),
        ("nc axioms", nc_axioms),
        ("norm direct-sum law", norm_direct_sum),
        ("kernel unitary invariance", kernel_invariance),
        ("cone closure recovery", cone_closure),
        ("uniqueness surrogate", uniqueness_surrogate),
        ("metric sanity", metric_sanity),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.pass);
        println!("criterion {}: {} [{name}] {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
