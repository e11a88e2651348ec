//! Seeded invariant checks, run end to end by `qcov selftest`.

use serde::Serialize;

use crate::bellwitness::{
    chsh_maximize, chsh_value, classify, horodecki_bound, ppt_test, ChshSettings, Verdict,
};
use crate::correlation::{
    covariance, joint_expectation, local_covariance, mixture_expectation, variance,
};
use crate::counterexamples::{
    position_cov_demo, spin_cov_demo, GaussianProductState, SpinProductState,
};
use crate::error::Result;
use crate::lhv::{dice_exact, quantum_like_embedding, success_projector, DiceSpec};
use crate::linalg::{commutator, kron, CMatrix};
use crate::random::Sampler;
use crate::report::sig15;
use crate::state::{
    embed, partial_transpose_raw, realize, werner, LocalObservable, Side, Split, StateSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub samples: usize,
    /// Largest deviation seen, or the measured quantity for threshold checks.
    #[serde(serialize_with = "sig15")]
    pub worst: f64,
    #[serde(serialize_with = "sig15")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, samples: usize, worst: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: worst <= tolerance,
        samples,
        worst,
        tolerance,
    }
}

fn max_over(n: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    (0..n).try_fold(0.0_f64, |acc, _| Ok(acc.max(f()?)))
}

fn random_split(s: &mut Sampler) -> Split {
    let d1 = 2 + (s.rng().next_u64() % 2) as usize;
    let d2 = 2 + (s.rng().next_u64() % 2) as usize;
    Split::new(d1, d2).expect("small split")
}

/// Smallest p in [lo, hi] at which `flips(p)` holds, to within `tol`.
pub fn bisect(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    flips: impl Fn(f64) -> Result<bool>,
) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if flips(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn run(seed: u64) -> Result<SelftestReport> {
    let mut s = Sampler::new(seed);
    let mut checks = Vec::new();

    let n = 100;
    let worst = max_over(n, || {
        let a = s.hermitian(2);
        let b = s.hermitian(3);
        let c = s.hermitian(2);
        Ok((&kron(&kron(&a, &b), &c) - &kron(&a, &kron(&b, &c))).max_abs())
    })?;
    checks.push(check("kron_associative", n, worst, 1e-12));

    let worst = max_over(n, || {
        let split = random_split(&mut s);
        let m = s.hermitian(split.dim());
        let once = partial_transpose_raw(&m, split, Side::Right)?;
        let twice = partial_transpose_raw(&once, split, Side::Right)?;
        Ok((&twice - &m).max_abs())
    })?;
    checks.push(check("partial_transpose_involution", n, worst, 0.0));

    let worst = max_over(n, || {
        let split = random_split(&mut s);
        let a = embed(&LocalObservable::left(s.hermitian(split.left))?, split)?;
        let b = embed(&LocalObservable::right(s.hermitian(split.right))?, split)?;
        Ok(commutator(&a, &b)?.max_abs())
    })?;
    checks.push(check("local_embeddings_commute", n, worst, 1e-12));

    let worst = max_over(n, || {
        let split = random_split(&mut s);
        let rho = realize(&s.product_spec(split))?;
        let a = LocalObservable::left(s.hermitian(split.left))?;
        let b = LocalObservable::right(s.hermitian(split.right))?;
        Ok(local_covariance(&rho, &a, &b)?.cov.abs())
    })?;
    checks.push(check("product_states_uncorrelated", n, worst, 1e-10));

    let worst = max_over(n, || {
        let split = random_split(&mut s);
        let rho = realize(&s.product_spec(split))?;
        let a = embed(&LocalObservable::left(s.hermitian(split.left))?, split)?;
        let b = embed(&LocalObservable::right(s.hermitian(split.right))?, split)?;
        let [k, nn, m, l] = [0; 4].map(|_| s.uniform(-3.0, 3.0));
        let f = &a.scale_real(k) + &b.scale_real(nn);
        let g = &a.scale_real(m) + &b.scale_real(l);
        let lhs = covariance(&rho, &f, &g)?.cov;
        let rhs = k * m * variance(&rho, &a)? + nn * l * variance(&rho, &b)?;
        Ok((lhs - rhs).abs())
    })?;
    checks.push(check("bilinearity_identity", n, worst, 1e-9));

    let worst = max_over(n, || {
        let split = random_split(&mut s);
        let spec = s.mixture_spec(split, 8);
        let a = LocalObservable::left(s.hermitian(split.left))?;
        let b = LocalObservable::right(s.hermitian(split.right))?;
        Ok((mixture_expectation(&spec, &a, &b)? - joint_expectation(&spec, &a, &b)?).abs())
    })?;
    checks.push(check("mixture_expectation_consistency", n, worst, 1e-10));

    let worst = max_over(n, || {
        let rho = realize(&s.mixture_spec(Split::QUBITS, 8))?;
        let settings = ChshSettings::new(
            s.unit_vector(),
            s.unit_vector(),
            s.unit_vector(),
            s.unit_vector(),
        )?;
        Ok(chsh_value(&rho, &settings)?.value - 2.0)
    })?;
    checks.push(check("mixture_chsh_ceiling", n, worst, 1e-9));

    let m = 20;
    let worst = max_over(m, || {
        let rho = s.bipartite_state(Split::QUBITS);
        Ok((chsh_maximize(&rho)?.value - horodecki_bound(&rho)?).abs())
    })?;
    checks.push(check("maximizer_matches_closed_form", m, worst, 1e-6));

    let werner_rho = |p: f64| realize(&werner(p)?);
    let ppt_flip = bisect(0.0, 1.0, 1e-7, |p| Ok(!ppt_test(&werner_rho(p)?)?.is_ppt))?;
    checks.push(check(
        "werner_ppt_threshold",
        1,
        (ppt_flip - 1.0 / 3.0).abs(),
        1e-6,
    ));
    let chsh_flip = bisect(0.0, 1.0, 1e-7, |p| {
        Ok(horodecki_bound(&werner_rho(p)?)? > 2.0)
    })?;
    checks.push(check(
        "werner_chsh_threshold",
        1,
        (chsh_flip - std::f64::consts::FRAC_1_SQRT_2).abs(),
        1e-6,
    ));
    let half = werner(0.5)?;
    let witnessed =
        classify(&half)?.verdict == Verdict::Entangled && horodecki_bound(&realize(&half)?)? < 2.0;
    checks.push(check(
        "entangled_without_chsh_violation",
        1,
        if witnessed { 0.0 } else { 1.0 },
        0.0,
    ));

    let dice = DiceSpec::two_dice();
    let exact = dice_exact(&dice);
    let moments = exact.exact.as_ref();
    let exact_ok = moments.is_some_and(|m| m.e_a == "5/8" && m.e_b == "5/8" && m.cov == "1/192");
    checks.push(check(
        "dice_exact_moments",
        1,
        if exact_ok { 0.0 } else { 1.0 },
        0.0,
    ));
    let embedded = quantum_like_embedding(&dice)?;
    let rho = realize(&embedded)?;
    let p = success_projector();
    let r = covariance(
        &rho,
        &kron(&p, &CMatrix::identity(2)),
        &kron(&CMatrix::identity(2), &p),
    )?;
    let worst = [
        r.e_a - exact.report.e_a,
        r.e_b - exact.report.e_b,
        r.e_ab - exact.report.e_ab,
    ]
    .iter()
    .map(|d| d.abs())
    .fold(0.0, f64::max);
    checks.push(check("dice_embedding_faithful", 1, worst, 1e-12));
    let verdict = classify(&embedded)?.verdict;
    checks.push(check(
        "dice_embedding_not_entangled",
        1,
        if verdict == Verdict::NonSeparable {
            0.0
        } else {
            1.0
        },
        0.0,
    ));

    let worst = max_over(n, || {
        let st = SpinProductState::new(s.unit_vector(), s.unit_vector())?;
        let r = spin_cov_demo(&st)?;
        let sep = if r.verdict == Verdict::Separable {
            0.0
        } else {
            1.0
        };
        Ok((r.cov - r.closed_form).abs().max(sep))
    })?;
    checks.push(check("spin_closed_form", n, worst, 1e-12));

    let q = 5;
    let worst = max_over(q, || {
        let v1 = s.uniform(0.1, 3.0);
        let v2 = s.uniform(0.1, 3.0);
        let st =
            GaussianProductState::new(s.uniform(-3.0, 3.0), s.uniform(-3.0, 3.0), v1, v2, 512)?;
        Ok(position_cov_demo(&st)?.analytic_error)
    })?;
    checks.push(check("position_identity", q, worst, 1e-6));

    let product = StateSpec::product(s.local_state(2), s.local_state(2));
    let verdict = classify(&product)?.verdict;
    checks.push(check(
        "product_classified_separable",
        1,
        if verdict == Verdict::Separable {
            0.0
        } else {
            1.0
        },
        0.0,
    ));

    Ok(SelftestReport {
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
