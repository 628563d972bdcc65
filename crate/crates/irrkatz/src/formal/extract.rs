//! Recovering formal data from a concrete operator by slope peeling.

use std::collections::BTreeMap;

use crate::scalar::{ParamExpr, Rat};
use crate::weylalg::local::{lower_hull, theta_expand_local};
use crate::weylalg::{exp_twist, localize, prim, DiffOperator, Location, Poly};

use super::{
    factor_order, oshima_check, ExponentialFactor, FormalData, FormalError, LocalFactor, PointData,
    SpectralData,
};

/// Group roots (with multiplicity) into maximal step-1 chains, greedily
/// from the smallest remaining root.
pub fn group_chains(roots: &[(Rat, u32)]) -> Vec<(Rat, u32)> {
    let mut left: BTreeMap<Rat, u32> = BTreeMap::new();
    for (r, k) in roots {
        *left.entry(r.clone()).or_default() += k;
    }
    let mut chains = Vec::new();
    while let Some(start) = left.keys().next().cloned() {
        let mut cur = start.clone();
        let mut len = 0;
        while let Some(k) = left.get_mut(&cur) {
            *k -= 1;
            if *k == 0 {
                left.remove(&cur);
            }
            len += 1;
            cur = &cur + &Rat::one();
        }
        chains.push((start, len));
    }
    chains
}

pub fn extract_formal_data(p: &DiffOperator) -> Result<FormalData, FormalError> {
    let p = prim(p)?;
    let n = p.rank().unwrap();
    if n == 0 {
        return Err(FormalError::Malformed("rank-zero operator".into()));
    }
    let lead = p.leading().num().clone();
    let (roots, complete) = lead.rational_roots();
    if !complete {
        return Err(FormalError::IrrationalSingularPoint(lead.to_string()));
    }
    let mut locations = vec![Location::Inf];
    locations.extend(roots.into_iter().map(|(r, _)| Location::Finite(r)));
    let mut points = Vec::new();
    for loc in locations {
        let factors = extract_point(&p, &loc)?;
        let found: usize = factors.iter().map(LocalFactor::rank).sum();
        if found != n {
            return Err(FormalError::RankMismatch {
                point: loc.to_string(),
                found,
                expected: n,
            });
        }
        points.push(PointData {
            location: loc,
            factors,
        });
    }
    FormalData::new(points)
}

fn extract_point(p: &DiffOperator, loc: &Location) -> Result<Vec<LocalFactor>, FormalError> {
    let local = localize(p, loc);
    let mut out = Vec::new();
    peel(&local, None, &BTreeMap::new(), loc, &mut out)?;
    out.sort_by(|a, b| factor_order(&a.w, &b.w));
    Ok(out)
}

/// Factors of `op` (already twisted by `prefix`) whose remaining exponential
/// part has order below `limit`.
fn peel(
    op: &DiffOperator,
    limit: Option<u32>,
    prefix: &BTreeMap<u32, Rat>,
    loc: &Location,
    out: &mut Vec<LocalFactor>,
) -> Result<(), FormalError> {
    let origin = Location::finite(0);
    let theta = theta_expand_local(op, origin.clone())?;
    let points: Vec<(i64, i64)> = theta
        .terms
        .iter()
        .map(|(&k, pk)| (pk.deg_i64(), k))
        .collect();
    let hull = lower_hull(&points);
    if hull.flat_rank() > 0 {
        let cp = theta.leading();
        let (roots, complete) = cp.rational_roots();
        if !complete {
            return Err(FormalError::NonSplitCharPoly(loc.to_string()));
        }
        let chains: Vec<(ParamExpr, u32)> = group_chains(&roots)
            .into_iter()
            .map(|(l, m)| (ParamExpr::constant(l), m))
            .collect();
        let spectral = SpectralData::new(chains);
        if !oshima_check(&theta, &spectral) {
            return Err(FormalError::OshimaCheckFailed(loc.to_string()));
        }
        out.push(LocalFactor {
            w: global_factor(loc, prefix),
            spectral: spectral.sorted(),
        });
    }
    for (e, slope) in hull.slopes.iter().enumerate() {
        let (v0, v1) = (hull.vertices[e], hull.vertices[e + 1]);
        if !slope.is_integer() {
            return Err(FormalError::RamifiedPoint(loc.to_string()));
        }
        let sigma = slope.to_i64().unwrap() as u32;
        if limit.is_some_and(|k| sigma >= k) {
            continue;
        }
        // edge polynomial from the top coefficients of points on the edge
        let mut edge = vec![Rat::zero(); (v1.0 - v0.0 + 1) as usize];
        for (&k, pk) in &theta.terms {
            let d = pk.deg_i64();
            if d >= v0.0 && d <= v1.0 && k - sigma as i64 * d == v0.1 - sigma as i64 * v0.0 {
                edge[(d - v0.0) as usize] = pk.lc();
            }
        }
        let (roots, complete) = Poly::from_coeffs(edge).rational_roots();
        if !complete {
            return Err(FormalError::NonSplitCharPoly(loc.to_string()));
        }
        for (z, _) in roots {
            let twisted = exp_twist(op, &origin, &BTreeMap::from([(sigma, -&z)]));
            let mut next = prefix.clone();
            next.insert(sigma, z);
            peel(&twisted, Some(sigma), &next, loc, out)?;
        }
    }
    Ok(())
}

/// Local-coordinate factor `Σ v_k x^{−k}` expressed in the stored θ-form.
fn global_factor(loc: &Location, local: &BTreeMap<u32, Rat>) -> ExponentialFactor {
    let coeffs = match loc {
        Location::Finite(_) => local.clone(),
        Location::Inf => local.iter().map(|(k, v)| (*k, -v)).collect(),
    };
    ExponentialFactor::new(loc.clone(), coeffs)
}
