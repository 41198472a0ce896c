//! Component-level oracles: exact normalization of the component measures and
//! a Monte Carlo check of them against coin-flip structures.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CheckReport;
use crate::components::{ComponentState, ComponentTheory, TypeKind};
use crate::tree::ElemId;

/// For |C| ≤ `max_k`: every non-algebraic 1-type over C has dimension 1 and
/// their measures sum to exactly 1.
pub fn check_normalization(th: &dyn ComponentTheory, max_k: usize) -> CheckReport {
    let mut report = CheckReport::new("normalization", 0);
    for k in 0..=max_k {
        let params: Vec<ElemId> = (0..k as ElemId).collect();
        let mut sum = BigRational::zero();
        for t in th.enumerate_1types(&params) {
            if t.is_algebraic() {
                continue;
            }
            let h = th.dim_meas(&t);
            report.expect_eq(|| format!("{} |C|={k} {:?}", th.id(), t.kind), &1, &h.dim);
            sum += h.meas;
        }
        report.expect_eq(|| format!("{} |C|={k} total", th.id()), &BigRational::one(), &sum);
    }
    report
}

/// Draws `samples` structures on k + 1 elements with every atom a fair coin,
/// reads off the pattern of the last element over the first k, and compares
/// each pattern's frequency with its component measure (tolerance 0.02).
pub fn sampling_oracle_component(th: &dyn ComponentTheory, k: usize, samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("oracle", seed);
    let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for _ in 0..samples {
        let mut st = ComponentState::new();
        let params: Vec<ElemId> = (0..k).map(|_| th.realize_random(&mut st, &mut rng)).collect();
        let x = th.realize_random(&mut st, &mut rng);
        if let TypeKind::Fresh(p) = th.type_of(&st, x, &params).kind {
            *counts.entry(p).or_default() += 1;
        }
    }
    let params: Vec<ElemId> = (0..k as ElemId).collect();
    for t in th.enumerate_1types(&params) {
        let TypeKind::Fresh(p) = &t.kind else { continue };
        let expected = th.dim_meas(&t).meas.to_f64().unwrap_or(f64::NAN);
        let freq = counts.get(p).copied().unwrap_or(0) as f64 / samples.max(1) as f64;
        report.expect(
            (freq - expected).abs() <= 0.02,
            || format!("{} |C|={k} pattern={p:?} samples={samples} seed={seed}", th.id()),
            &format!("{expected:.4} ± 0.02"),
            || format!("{freq:.4}"),
        );
    }
    report
}
