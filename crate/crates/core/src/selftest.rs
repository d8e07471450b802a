//! The acceptance suite as a library call, producing a deterministic report.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::FgAbelianGroup;
use crate::character::{burnside_character_table, fs_indicator, DivisionRing};
use crate::dft::DftBridge;
use crate::dual::{
    enumerate_torsion_grouplikes, polar_decompose, probe_characters, DualElement, GrouplikeData, PrimitiveData,
    Verdict, DEFAULT_TRIALS, DEFAULT_WINDOW,
};
use crate::envelope::{
    hopf_law_report, multiplicativity_check, omega_torus_check, FdLieAlgebra, TruncatedTensorU, TruncatedUElement,
    UAlgebra,
};
use crate::error::Result;
use crate::group::{builtin_group, FiniteGroup};
use crate::hopf::{enumerate_grouplike, primitive_space, Field};
use crate::oracle::{central_idempotent_oracle, compare_with_certificate, cyclic_character_count, sigma_fixed_check};
use crate::profinite::{idempotent_pullback_check, induced_algebra_map, subgroup_embedding_check, Tower};
use crate::scalar::{Scalar, C64};
use crate::wedderburn::central_idempotents;

pub const SUITE_GROUPS: [&str; 21] = [
    "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10", "c11", "c12", "d3", "d4", "d5", "d6", "s3", "s4", "q8",
    "c2*c2", "c2*c4", "c2*s3",
];

const CERT_TOL: f64 = 1e-9;
const CRITERION_ONE_BUDGET: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Passed on random probes rather than structurally.
    Probabilistic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Accumulates checks; every numerical assertion carries its residual and tolerance.
#[derive(Debug, Default, Clone)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn passed(&self) -> bool {
        self.0.iter().all(|c| c.status != CheckStatus::Fail)
    }

    fn push(&mut self, name: String, passed: bool, residual: f64, tolerance: f64, observed: Option<Value>, expected: Option<Value>) {
        let status = if passed { CheckStatus::Pass } else { CheckStatus::Fail };
        self.0.push(Check { name, status, residual, tolerance, observed, expected });
    }

    /// `residual < tolerance`, or exactly zero when the tolerance is zero.
    pub fn below(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        let ok = if tolerance == 0.0 { residual == 0.0 } else { residual < tolerance };
        self.push(name.into(), ok, residual, tolerance, None, None);
    }

    pub fn equal<T: Serialize + PartialEq>(&mut self, name: impl Into<String>, observed: T, expected: T) {
        let ok = observed == expected;
        let to_value = |v: &T| serde_json::to_value(v).unwrap_or(Value::Null);
        self.push(
            name.into(),
            ok,
            if ok { 0.0 } else { 1.0 },
            0.0,
            Some(to_value(&observed)),
            Some(to_value(&expected)),
        );
    }

    /// `No` fails; `ProbablyYes` fails only when a structural answer is required.
    pub fn verdict(&mut self, name: impl Into<String>, v: &Verdict, want_structural: bool) {
        let name = name.into();
        let (ok, residual, status) = match v {
            Verdict::StructurallyYes => (true, 0.0, CheckStatus::Pass),
            Verdict::ProbablyYes { residual, .. } => (!want_structural, *residual, CheckStatus::Probabilistic),
            Verdict::No { residual, .. } => (false, *residual, CheckStatus::Fail),
        };
        let status = if ok { status } else { CheckStatus::Fail };
        let observed = serde_json::to_value(v).ok();
        self.0.push(Check { name, status, residual, tolerance: 0.0, observed, expected: None });
    }

    pub fn error(&mut self, name: impl Into<String>, e: &crate::error::Error) {
        self.push(name.into(), false, f64::INFINITY, 0.0, Some(json!(e.to_string())), None);
    }

    /// Records `Err` results as failed checks.
    pub fn run(&mut self, name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(name, &e);
        }
    }
}

fn group(name: &str) -> Result<Arc<FiniteGroup>> {
    builtin_group(name).map(Arc::new)
}

pub const TITLES: [&str; 11] = [
    "block dimensions sum to |G| for the suite groups",
    "R[Q8] = R^4 x H",
    "R[C4] = R x R x C",
    "grouplike enumeration recovers G",
    "DFT bridge for finite abelian groups",
    "polar decomposition over Z^2 + Z/3",
    "grouplikes of finite and free duals",
    "sigma-fixed subspace equals the DFT image of R[G]",
    "enveloping algebra dimensions and Hopf laws",
    "grouplikes in U(L) and the torus diagram",
    "functoriality along towers and subgroups",
];

fn criterion_1(seed: u64, c: &mut Checks) {
    let start = Instant::now();
    for name in SUITE_GROUPS {
        c.run(name, |c| {
            let g = group(name)?;
            let t = burnside_character_table(&g, CERT_TOL, seed)?;
            for field in [Field::R, Field::C] {
                let cert = central_idempotents(&t, field, CERT_TOL)?;
                c.equal(format!("{name}/{field:?}: sum of block dims"), cert.block_dims().iter().sum::<usize>(), g.order());
                c.below(format!("{name}/{field:?}: idempotent residual"), cert.residuals.max(), CERT_TOL);
            }
            Ok(())
        });
    }
    // enforced always, reported as a value only with timings
    let over = start.elapsed() > CRITERION_ONE_BUDGET;
    c.equal("runtime within 30 s", !over, true);
}

fn certificate_vs_oracle(c: &mut Checks, name: &str, g: &Arc<FiniteGroup>, seed: u64) -> Result<()> {
    let t = burnside_character_table(g, CERT_TOL, seed)?;
    let cert = central_idempotents(&t, Field::R, CERT_TOL)?;
    let oracle = central_idempotent_oracle(g, Field::R, seed)?;
    let cmp = compare_with_certificate(&cert, &oracle, CERT_TOL);
    c.equal(format!("{name}: oracle agrees on dims, centers and rings"), cmp.matched, true);
    c.below(format!("{name}: oracle idempotent distance"), cmp.idempotent_distance, CERT_TOL);
    c.below(format!("{name}: certificate residual"), cert.residuals.max(), CERT_TOL);
    Ok(())
}

fn criterion_2(seed: u64, c: &mut Checks) {
    c.run("q8", |c| {
        let g = group("q8")?;
        let t = burnside_character_table(&g, CERT_TOL, seed)?;
        let cert = central_idempotents(&t, Field::R, CERT_TOL)?;
        c.equal("block count", cert.blocks.len(), 5);
        c.equal("block dims", cert.block_dims(), vec![1, 1, 1, 1, 4]);
        c.equal("center dims", cert.center_dims(), vec![1, 1, 1, 1, 1]);
        c.equal("division rings", cert.division_rings(), vec![DivisionRing::R; 4].into_iter().chain([DivisionRing::H]).collect());
        let fs = (0..t.len()).map(|e| fs_indicator(&t, e)).collect::<Result<Vec<i8>>>()?;
        c.equal("Frobenius-Schur indicators", fs, vec![1, 1, 1, 1, -1]);
        let oracle = central_idempotent_oracle(&g, Field::R, seed)?;
        let h = oracle.iter().find(|b| b.division_ring == DivisionRing::H).map(|b| b.signature);
        c.equal("trace-form signature of the quaternion block", h, Some(-2));
        certificate_vs_oracle(c, "q8", &g, seed)
    });
}

fn criterion_3(seed: u64, c: &mut Checks) {
    c.run("c4", |c| {
        let g = group("c4")?;
        let t = burnside_character_table(&g, CERT_TOL, seed)?;
        let cert = central_idempotents(&t, Field::R, CERT_TOL)?;
        c.equal("block dims", cert.block_dims(), vec![1, 1, 2]);
        c.equal("center dims", cert.center_dims(), vec![1, 1, 2]);
        c.equal("division rings", cert.division_rings(), vec![DivisionRing::R, DivisionRing::R, DivisionRing::C]);
        let pair = cert.blocks.iter().find(|b| b.division_ring == DivisionRing::C).map(|b| b.characters.clone());
        let conjugate = pair.as_ref().is_some_and(|p| {
            p.len() == 2 && (0..4).all(|x| (t.value(p[0], x).conj() - t.value(p[1], x)).norm() < CERT_TOL)
        });
        c.equal("complex block comes from a conjugate character pair", conjugate, true);
        certificate_vs_oracle(c, "c4", &g, seed)
    });
}

fn criterion_4(c: &mut Checks) {
    for name in SUITE_GROUPS {
        c.run(name, |c| {
            let g = group(name)?;
            for field in [Field::R, Field::C] {
                let found = enumerate_grouplike(&g, field);
                c.equal(format!("{name}/{field:?}: grouplike count"), found.len(), g.order());
                let supports: Vec<usize> = found
                    .iter()
                    .filter_map(|a| {
                        let nz: Vec<usize> = (0..g.order()).filter(|&x| a.coeff(x) != C64::new(0.0, 0.0)).collect();
                        (nz.len() == 1 && a.coeff(nz[0]) == C64::new(1.0, 0.0)).then(|| nz[0])
                    })
                    .collect();
                c.equal(format!("{name}/{field:?}: grouplikes are the group elements"), supports, (0..g.order()).collect());
                c.equal(format!("{name}/{field:?}: primitive space dimension"), primitive_space(&g, field).len(), 0);
            }
            Ok(())
        });
    }
}

fn criterion_5(seed: u64, c: &mut Checks) {
    for name in ["c2", "c4", "c6", "c2*c2"] {
        c.run(name, |c| {
            let b = DftBridge::new(&group(name)?)?;
            c.below(format!("{name}: convolution to pointwise product"), b.convolution_residual(50, seed), 1e-10);
            c.below(format!("{name}: comultiplication"), b.comultiplication_residual(3, seed), 1e-10);
            c.below(format!("{name}: inverse transform"), b.inverse_residual(), 1e-10);
            Ok(())
        });
    }
}

fn criterion_6(seed: u64, c: &mut Checks) {
    c.run("polar", |c| {
        let dual = FgAbelianGroup::new(2, &[3])?;
        let probes = probe_characters(&dual, 100, DEFAULT_WINDOW, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut coeff_worst: f64 = 0.0;
        let mut unit_exact = 0usize;
        let mut unit_group_part = 0usize;
        for _ in 0..500 {
            let free: Vec<C64> =
                (0..2).map(|_| C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-PI..PI))).collect();
            let g = GrouplikeData::new(&dual, free, vec![rng.gen_range(0..3)])?;
            let back = polar_decompose(&g).reconstruct();
            for (a, b) in g.free_values.iter().zip(&back.free_values) {
                coeff_worst = coeff_worst.max((a - b).norm() / a.norm());
            }
            for chi in &probes {
                let (x, y) = (g.evaluate(&dual, chi), back.evaluate(&dual, chi));
                worst = worst.max((x - y).norm() / x.norm().max(1.0));
            }
            let unit: Vec<C64> = (0..2).map(|_| C64::from_polar(1.0, rng.gen_range(-PI..PI))).collect();
            let u = GrouplikeData::new(&dual, unit.clone(), vec![rng.gen_range(0..3)])?;
            let p = polar_decompose(&u);
            unit_exact += usize::from(p.lie_part.iter().all(|&x| x == 0.0));
            unit_group_part += usize::from(p.group_part.free_values == unit);
        }
        c.below("reconstruction at 100 probes, 500 grouplikes", worst, 1e-12);
        c.below("reconstruction of coordinates", coeff_worst, 1e-12);
        c.equal("unit-circle inputs with lie_part exactly 0", unit_exact, 500);
        c.equal("unit-circle inputs returned unchanged", unit_group_part, 500);
        Ok(())
    });
}

fn criterion_7(seed: u64, c: &mut Checks) {
    for n in 1..=12u64 {
        c.run(&format!("Z/{n}"), |c| {
            let dual = FgAbelianGroup::cyclic(n)?;
            c.equal(format!("Z/{n}: grouplike count"), enumerate_torsion_grouplikes(&dual)?.len(), n as usize);
            c.equal(format!("Z/{n}: root-count oracle"), cyclic_character_count(n as usize), n as usize);
            Ok(())
        });
    }
    c.run("Z", |c| {
        let dual = Arc::new(FgAbelianGroup::free(1));
        for &r in &[0.5, 1.0, 2.0, 3.0] {
            for &theta in &[0.0, 0.3, 1.7, PI] {
                let z = C64::from_polar(r, theta);
                let g = DualElement::grouplike(&dual, GrouplikeData::new(&dual, vec![z], vec![])?)?;
                let v = g.is_grouplike(DEFAULT_TRIALS, 1e-12, seed);
                c.verdict(format!("Z: grouplike r={r} theta={theta:.3}"), &v, true);
                let log = C64::new(r.ln(), theta);
                let e = DualElement::primitive(&dual, PrimitiveData::new(&dual, vec![log], &[])?)?.exp();
                let v = e.is_grouplike(DEFAULT_TRIALS, 1e-12, seed);
                c.verdict(format!("Z: exp of primitive r={r} theta={theta:.3}"), &v, true);
                let lie = polar_decompose(&GrouplikeData::new(&dual, vec![z], vec![])?).lie_part[0];
                c.equal(format!("Z: lie_part nonzero iff r != 1 (r={r})"), lie != 0.0, r != 1.0);
            }
        }
        Ok(())
    });
}

fn criterion_8(c: &mut Checks) {
    for name in ["c4", "c6"] {
        c.run(name, |c| {
            let r = sigma_fixed_check(&group(name)?)?;
            c.equal(format!("{name}: real dimension of the fixed subspace"), r.fixed_real_dim, r.group_order);
            c.equal(format!("{name}: real dimension of the DFT image"), r.image_real_dim, r.group_order);
            c.below(format!("{name}: subspace distance"), r.distance, 1e-10);
            Ok(())
        });
    }
}

type Q = BigRational;

fn criterion_9(seed: u64, c: &mut Checks) {
    const D: usize = 4;
    let ab1 = Arc::new(FdLieAlgebra::<Q>::abelian(1, Field::R));
    let ab2 = Arc::new(FdLieAlgebra::<Q>::abelian(2, Field::R));
    let sl2 = Arc::new(FdLieAlgebra::<Q>::sl2(Field::R));
    for (name, l1) in [("abelian1 x abelian1", &ab1), ("sl2 x abelian1", &sl2)] {
        c.run(name, |c| {
            let r = multiplicativity_check(l1, &ab1, D, 3, seed)?;
            let dims: Vec<usize> = r.degrees.iter().map(|d| d.product_dim).collect();
            let tensor: Vec<usize> = r.degrees.iter().map(|d| d.tensor_dim).collect();
            c.equal(format!("{name}: PBW dims per degree match the tensor count"), dims.clone(), tensor);
            let formula: Vec<usize> = r.degrees.iter().map(|d| d.formula_dim).collect();
            c.equal(format!("{name}: PBW dims per degree match C(n+d-1, d)"), dims, formula);
            c.below(format!("{name}: alpha is multiplicative"), r.alpha_residual, 0.0);
            Ok(())
        });
    }
    for (name, lie) in [("abelian2", &ab2), ("sl2", &sl2)] {
        c.run(name, |c| {
            let u = UAlgebra::new(lie, D);
            let r = hopf_law_report(&u)?;
            c.below(format!("{name}: coassociativity"), r.coassociativity, 0.0);
            c.below(format!("{name}: counit"), r.counit, 0.0);
            c.below(format!("{name}: antipode"), r.antipode, 0.0);
            c.below(format!("{name}: comultiplication from generators"), r.comultiplication_routes, 0.0);
            let prims = u.primitive_space(0.0)?;
            c.equal(format!("{name}: primitive space dimension"), prims.len(), lie.dim());
            let degree_one = prims.iter().all(|p| p.terms().keys().all(|m| m.len() == 1));
            c.equal(format!("{name}: primitives lie in degree 1"), degree_one, true);
            let one = TruncatedUElement::one(D);
            for i in 0..lie.dim() {
                let x = u.generator(i);
                let expected = TruncatedTensorU::outer(&x, &one).add(&TruncatedTensorU::outer(&one, &x));
                c.equal(format!("{name}: generator {i} is primitive"), u.comultiply(&x)? == expected, true);
            }
            Ok(())
        });
    }
}

fn criterion_10(seed: u64, c: &mut Checks) {
    const D: usize = 4;
    c.run("sl2", |c| {
        let u = UAlgebra::new(&Arc::new(FdLieAlgebra::<Q>::sl2(Field::R)), D);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = u.random_lie_element(&mut rng);
        let g = u.exp(&a)?;
        c.below("sl2: exp of a random primitive is grouplike", u.grouplike_residual(&g)?, 0.0);
        let inv = u.exp(&a.scale(&Q::from_i64(-1)))?;
        c.below("sl2: exp(a) exp(-a) = 1", u.multiply(&g, &inv)?.distance(&TruncatedUElement::one(D)), 0.0);
        Ok(())
    });
    c.run("omega", |c| {
        let r = omega_torus_check(D, 200, 1e-10, seed)?;
        c.equal("omega: probes", r.probes, 200);
        c.below("omega: algebra morphism", r.morphism_residual, 1e-10);
        c.equal("omega: primitives to primitives", r.primitives_preserved, true);
        c.below("omega: exp matches the embedded torus point", r.exp_residual, 1e-10);
        Ok(())
    });
}

fn criterion_11(seed: u64, c: &mut Checks) {
    c.run("tower", |c| {
        let tower = Tower::cyclic_prime_power(2, 4)?;
        for field in [Field::R, Field::C] {
            for k in 0..tower.len() - 1 {
                let m = tower.induced(k, field)?;
                let label = format!("Z/{} -> Z/{} {field:?}", m.source().order(), m.target().order());
                c.equal(format!("{label}: surjective"), m.is_surjective(), true);
                c.below(format!("{label}: Hopf morphism on basis"), m.basis_hopf_residuals().max(), 0.0);
            }
            let levels = idempotent_pullback_check(&tower, field, CERT_TOL)?;
            for (k, l) in levels.iter().enumerate() {
                c.below(format!("pullback level {k} {field:?}: residual"), l.residual, CERT_TOL);
                // the pulled-back idempotents pick out disjoint sets of blocks
                // of level k + 1 whose dimensions add up to |G_k|
                let mut covered: Vec<usize> = l.decompositions.iter().flatten().copied().collect();
                let nonempty = l.decompositions.iter().all(|d| !d.is_empty());
                covered.sort_unstable();
                let disjoint = covered.windows(2).all(|w| w[0] < w[1]);
                let next = burnside_character_table(&tower.levels()[k + 1], CERT_TOL, seed)?;
                let dims = central_idempotents(&next, field, CERT_TOL)?.block_dims();
                let covered_dim: usize = covered.iter().map(|&j| dims[j]).sum();
                c.equal(
                    format!("pullback level {k} {field:?}: disjoint nonempty block sets"),
                    (nonempty, disjoint),
                    (true, true),
                );
                c.equal(
                    format!("pullback level {k} {field:?}: covered dimension"),
                    covered_dim,
                    tower.levels()[k].order(),
                );
            }
        }
        Ok(())
    });
    for (name, order) in [("s3", 3usize), ("c4", 2)] {
        c.run(name, |c| {
            let g = group(name)?;
            let x = (0..g.order()).find(|&x| g.element_order(x) == order).expect("element of that order");
            let elements = g.generated_subgroup(&[x]);
            for field in [Field::R, Field::C] {
                let r = subgroup_embedding_check(&g, &elements, field, seed)?;
                let label = format!("C{order} <= {name} {field:?}");
                c.equal(format!("{label}: injective"), (r.injective, r.rank), (true, order));
                c.below(format!("{label}: Hopf morphism on basis"), r.basis_residuals.max(), 0.0);
                let h = Arc::new(crate::profinite::subgroup(&g, &elements)?);
                let m = induced_algebra_map(&h, &g, &elements, field)?;
                c.equal(format!("{label}: image dimension"), m.rank(), h.order());
            }
            Ok(())
        });
    }
}

/// Runs criterion `id` (1 to 11).
pub fn run_criterion(id: u8, seed: u64, timings: bool) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::default();
    match id {
        1 => criterion_1(seed, &mut c),
        2 => criterion_2(seed, &mut c),
        3 => criterion_3(seed, &mut c),
        4 => criterion_4(&mut c),
        5 => criterion_5(seed, &mut c),
        6 => criterion_6(seed, &mut c),
        7 => criterion_7(seed, &mut c),
        8 => criterion_8(&mut c),
        9 => criterion_9(seed, &mut c),
        10 => criterion_10(seed, &mut c),
        11 => criterion_11(seed, &mut c),
        _ => c.equal("known criterion", id, 0),
    }
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    let passed = !c.0.is_empty() && c.0.iter().all(|k| k.status != CheckStatus::Fail);
    CriterionResult { id, title, passed, checks: c.0, elapsed_ms: timings.then(|| start.elapsed().as_millis()) }
}

pub fn run_selftest(seed: u64, timings: bool) -> SelftestReport {
    let criteria: Vec<CriterionResult> = (1..=11).map(|id| run_criterion(id, seed, timings)).collect();
    SelftestReport { seed, passed: criteria.iter().all(|c| c.passed), criteria }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_are_reported() {
        let mut c = Checks::default();
        c.below("small", 1e-12, 1e-10);
        c.below("exact", 1e-300, 0.0);
        c.equal("eq", 3, 4);
        let status: Vec<CheckStatus> = c.0.iter().map(|k| k.status).collect();
        assert_eq!(status, vec![CheckStatus::Pass, CheckStatus::Fail, CheckStatus::Fail]);
        assert!(!run_criterion(12, 0, false).passed);
    }

    #[test]
    fn quick_criteria_pass() {
        for id in [2, 3, 6, 8] {
            let r = run_criterion(id, 7, false);
            assert!(r.passed, "{}", serde_json::to_string_pretty(&r).unwrap());
        }
    }
}
