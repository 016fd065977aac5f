//! JSON output of the polynomials and normalisation constants.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mop::MopSystem;
use crate::multi_index::MultiIndex;
use crate::poly::Poly;
use crate::scalar::{Dd, Rational, Scalar};
use crate::weights::{Precision, ScalarMode, WeightSystem};

fn poly_json<F: Scalar>(p: &Poly<F>) -> Value {
    Value::Array(p.coeffs().iter().map(Scalar::to_json).collect())
}

/// Every multi-index `k` with `0 <= k <= n` componentwise, in
/// lexicographic order.
pub fn indices_below(n: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zeros(n.len())];
    for k in 0..n.len() {
        out = out
            .into_iter()
            .flat_map(|base| {
                (0..=n.get(k)).map(move |v| {
                    let mut c = base.components().to_vec();
                    c[k] = v;
                    MultiIndex::new(c)
                })
            })
            .collect();
    }
    out.sort_by(|a, b| a.components().cmp(b.components()));
    out
}

/// `h^{(k)}_j` for every `j <= n`, keyed `"j1,…,jm:k"` with `k` one-based.
pub fn h_table<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex) -> Result<BTreeMap<String, Value>> {
    let mut table = BTreeMap::new();
    for j in indices_below(n) {
        for k in 0..sys.m() {
            let h = sys.h_coeff(&j, k)?;
            table.insert(format!("{j}:{}", k + 1), h.to_json());
        }
    }
    Ok(table)
}

/// `P_n`, the type I polynomials `A^{(k)}_n` and the h-table below `n`.
/// Coefficients are listed from the constant term upwards.
pub fn compute_json<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex) -> Result<Value> {
    if n.len() != sys.m() {
        return Err(Error::InvalidInput(format!(
            "multi-index {n} has {} components, the weight system has {}",
            n.len(),
            sys.m()
        )));
    }
    let p = sys.type2(n)?;
    let q = sys.type1(n)?;
    let a: Vec<Value> = q.a_polys().iter().map(poly_json).collect();
    Ok(json!({
        "index": n.components(),
        "exact": F::EXACT,
        "P": poly_json(&p.poly),
        "A": a,
        "h": h_table(sys, n)?,
        "condition": {
            "type2": p.info.condition,
            "type1": q.info.condition,
        },
    }))
}

/// [`compute_json`] in the field chosen by the weight system.
pub fn compute(ws: &WeightSystem, n: &MultiIndex) -> Result<Value> {
    match ws.mode() {
        ScalarMode::ExactRational => compute_json(&MopSystem::<Rational>::new(ws)?, n),
        ScalarMode::Float(Precision::Double) => compute_json(&MopSystem::<f64>::new(ws)?, n),
        ScalarMode::Float(Precision::Extended) => compute_json(&MopSystem::<Dd>::new(ws)?, n),
    }
}
