//! Degeneration instances: strata packages, restriction and Gysin maps, the
//! JSON format and load-time validation.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::combinatorics::{letters, popcount, PartitionedAlphabet};
use crate::field::{format_q, i_pow, parse_q, Field, Q, Qi};
use crate::linalg::{Matrix, Subspace};

use super::DegenerationError;

/// A Hodge component of a stratum: columns span `H^{p,q}` inside `H^{p+q}`.
#[derive(Debug, Clone)]
pub struct StratumHodge {
    pub p: i64,
    pub q: i64,
    /// `N x dim` over `Q(i)`, supported on basis vectors of degree `p + q`.
    pub basis: Matrix<Qi>,
}

/// Cohomology of one stratum `D[λ̄]` in a rational basis ordered by degree.
#[derive(Debug, Clone)]
pub struct StratumPackage {
    pub subset: u32,
    /// Complex dimension `n(λ̄)`.
    pub dim: usize,
    /// Degree of each basis vector, nondecreasing.
    pub degrees: Vec<usize>,
    pub hodge: Vec<StratumHodge>,
    /// Cup with the ample class, degree `+2`.
    pub lefschetz: Matrix<Q>,
    pub trace: Vec<Q>,
    /// `cup[a][b] = ∫ e_a ∪ e_b`.
    pub cup: Matrix<Q>,
    /// Weil operator `i^{p-q}` on `H^{p,q}`, rational.
    pub weil: Matrix<Q>,
}

impl StratumPackage {
    pub fn len(&self) -> usize {
        self.degrees.len()
    }
    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
    /// Basis indices of degree `h`.
    pub fn degree_range(&self, h: usize) -> std::ops::Range<usize> {
        let start = self.degrees.iter().position(|&d| d >= h).unwrap_or(self.len());
        let end = self.degrees.iter().position(|&d| d > h).unwrap_or(self.len());
        start..end.max(start)
    }
    pub fn betti(&self, h: usize) -> usize {
        self.degree_range(h).len()
    }
    /// Hodge numbers `(p, q, dim)`.
    pub fn hodge_numbers(&self) -> Vec<(i64, i64, usize)> {
        self.hodge.iter().map(|c| (c.p, c.q, c.basis.cols())).collect()
    }
}

/// A semistable degeneration described by its strata.
#[derive(Debug, Clone)]
pub struct DegenerationInstance {
    pub name: String,
    pub alphabet: PartitionedAlphabet,
    pub dim_x: usize,
    pub strata: BTreeMap<u32, StratumPackage>,
    /// `ρ_{λ̄,λ}: H(D[λ̄]) → H(D[λ̄ ∪ λ])`, keyed by `(λ̄, λ)`.
    pub restrictions: BTreeMap<(u32, usize), Matrix<Q>>,
    /// `γ_{λ̄,λ}: H(D[λ̄ ∪ λ]) → H(D[λ̄])` of degree `+2`, keyed by `(λ̄, λ)`.
    pub gysins: BTreeMap<(u32, usize), Matrix<Q>>,
}

fn schema(msg: impl Into<String>) -> DegenerationError {
    DegenerationError::SchemaError(msg.into())
}

fn parse_scalar(v: &Value) -> Result<Q, DegenerationError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(Q::from_i64)
            .ok_or_else(|| schema(format!("non-integer number {n}; write rationals as \"a/b\""))),
        Value::String(s) => parse_q(s).ok_or_else(|| schema(format!("bad rational {s:?}"))),
        _ => Err(schema(format!("expected a rational, got {v}"))),
    }
}

fn parse_gaussian(v: &Value) -> Result<Qi, DegenerationError> {
    match v {
        Value::Object(o) => {
            let re = o.get("re").map(parse_scalar).transpose()?.unwrap_or_else(Q::zero);
            let im = o.get("im").map(parse_scalar).transpose()?.unwrap_or_else(Q::zero);
            Ok(Qi::new(re, im))
        }
        other => parse_scalar(other).map(|r| Qi::new(r, Q::zero())),
    }
}

fn parse_matrix(v: Option<&Value>, rows: usize, cols: usize, what: &str) -> Result<Matrix<Q>, DegenerationError> {
    let Some(v) = v else {
        return Err(schema(format!("{what}: missing matrix")));
    };
    let arr = v.as_array().ok_or_else(|| schema(format!("{what}: matrix must be a list of rows")))?;
    if arr.len() != rows {
        return Err(schema(format!("{what}: expected {rows} rows, found {}", arr.len())));
    }
    let mut m = Matrix::zeros(rows, cols);
    for (r, row) in arr.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| schema(format!("{what}: row {r} is not a list")))?;
        if row.len() != cols {
            return Err(schema(format!("{what}: row {r} has {} entries, expected {cols}", row.len())));
        }
        for (c, x) in row.iter().enumerate() {
            m.set(r, c, parse_scalar(x)?);
        }
    }
    Ok(m)
}

fn parse_labels(v: Option<&Value>, what: &str) -> Result<Vec<String>, DegenerationError> {
    let arr = v.and_then(|x| x.as_array()).ok_or_else(|| schema(format!("{what}: expected a list of labels")))?;
    arr.iter()
        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| schema(format!("{what}: labels must be strings"))))
        .collect()
}

fn scalar_json(r: &Q) -> Value {
    if r.denom().is_one() {
        match r.numer().to_string().parse::<i64>() {
            Ok(n) => json!(n),
            Err(_) => json!(format_q(r)),
        }
    } else {
        json!(format_q(r))
    }
}

fn gaussian_json(z: &Qi) -> Value {
    if z.im.is_zero() {
        scalar_json(&z.re)
    } else {
        json!({"re": scalar_json(&z.re), "im": scalar_json(&z.im)})
    }
}

fn matrix_json(m: &Matrix<Q>) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array(m.row(r).iter().map(scalar_json).collect())).collect())
}

/// `Σ i^{p-q} π_{p,q}` from a decomposition; `None` if it is not rational.
fn weil_from_hodge(n: usize, hodge: &[StratumHodge]) -> Option<Matrix<Q>> {
    let mut all = Matrix::<Qi>::zeros(n, 0);
    let mut scaled = Matrix::<Qi>::zeros(n, 0);
    for c in hodge {
        all = all.hstack(&c.basis);
        scaled = scaled.hstack(&c.basis.scale(&i_pow(c.p - c.q)));
    }
    let inv = all.inverse()?;
    (&scaled * &inv).try_map(Q::from_qi)
}

impl DegenerationInstance {
    pub fn k(&self) -> usize {
        self.alphabet.k()
    }

    /// Expected dimension `dim X - |λ̄| + k` of a stratum.
    pub fn expected_dim(&self, s: u32) -> i64 {
        self.dim_x as i64 - popcount(s) as i64 + self.k() as i64
    }

    pub fn is_stratum(&self, s: u32) -> bool {
        self.strata.contains_key(&s)
    }

    pub fn stratum_name(&self, s: u32) -> String {
        format!("{{{}}}", self.alphabet.subset_labels(s).join(","))
    }

    /// Parses and validates an instance document.
    pub fn from_json(v: &Value) -> Result<Self, DegenerationError> {
        let inst = Self::parse(v)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_str(s: &str) -> Result<Self, DegenerationError> {
        let v: Value = serde_json::from_str(s).map_err(|e| schema(format!("invalid JSON: {e}")))?;
        Self::from_json(&v)
    }

    fn parse(v: &Value) -> Result<Self, DegenerationError> {
        let o = v.as_object().ok_or_else(|| schema("instance must be an object"))?;
        let name = o.get("name").and_then(|x| x.as_str()).unwrap_or("instance").to_string();
        let k = o.get("k").and_then(|x| x.as_u64()).ok_or_else(|| schema("missing integer field k"))? as usize;
        let dim_x = o.get("dimX").and_then(|x| x.as_u64()).ok_or_else(|| schema("missing integer field dimX"))? as usize;
        let parts_v = o.get("lambda").and_then(|x| x.as_array()).ok_or_else(|| schema("missing list field lambda"))?;
        let parts: Vec<Vec<String>> =
            parts_v.iter().enumerate().map(|(i, p)| parse_labels(Some(p), &format!("lambda[{i}]"))).collect::<Result<_, _>>()?;
        if parts.len() != k {
            return Err(schema(format!("k = {k} but lambda has {} parts", parts.len())));
        }
        let alphabet = PartitionedAlphabet::from_parts(&parts).map_err(|e| schema(e.to_string()))?;
        let strata_v = o.get("strata").and_then(|x| x.as_array()).ok_or_else(|| schema("missing list field strata"))?;
        if strata_v.is_empty() {
            return Err(schema("strata must be nonempty"));
        }
        let mut strata = BTreeMap::new();
        for (i, sv) in strata_v.iter().enumerate() {
            let what = format!("strata[{i}]");
            let so = sv.as_object().ok_or_else(|| schema(format!("{what} must be an object")))?;
            let labels = parse_labels(so.get("subset"), &format!("{what}.subset"))?;
            let subset = alphabet.subset(&labels).ok_or_else(|| schema(format!("{what}: unknown label in {labels:?}")))?;
            if popcount(subset) != labels.len() {
                return Err(schema(format!("{what}: repeated label")));
            }
            let pkg = Self::parse_package(so, subset, &what)?;
            if strata.insert(subset, pkg).is_some() {
                return Err(schema(format!("{what}: stratum listed twice")));
            }
        }
        let mut restrictions = BTreeMap::new();
        for (i, rv) in o.get("restrictions").and_then(|x| x.as_array()).map(|a| a.as_slice()).unwrap_or(&[]).iter().enumerate() {
            let what = format!("restrictions[{i}]");
            let (from, add) = Self::parse_edge(&alphabet, rv, "from", &what)?;
            let (Some(src), Some(tgt)) = (strata.get(&from), strata.get(&(from | (1 << add)))) else {
                return Err(schema(format!("{what}: refers to an unlisted stratum")));
            };
            let m = parse_matrix(rv.get("matrix"), tgt.len(), src.len(), &what)?;
            restrictions.insert((from, add), m);
        }
        let mut gysins = BTreeMap::new();
        for (i, gv) in o.get("gysins").and_then(|x| x.as_array()).map(|a| a.as_slice()).unwrap_or(&[]).iter().enumerate() {
            let what = format!("gysins[{i}]");
            let (to, add) = Self::parse_edge(&alphabet, gv, "to", &what)?;
            let (Some(tgt), Some(src)) = (strata.get(&to), strata.get(&(to | (1 << add)))) else {
                return Err(schema(format!("{what}: refers to an unlisted stratum")));
            };
            let m = parse_matrix(gv.get("matrix"), tgt.len(), src.len(), &what)?;
            gysins.insert((to, add), m);
        }
        Ok(DegenerationInstance { name, alphabet, dim_x, strata, restrictions, gysins })
    }

    fn parse_edge(alphabet: &PartitionedAlphabet, v: &Value, key: &str, what: &str) -> Result<(u32, usize), DegenerationError> {
        let labels = parse_labels(v.get(key), &format!("{what}.{key}"))?;
        let s = alphabet.subset(&labels).ok_or_else(|| schema(format!("{what}: unknown label")))?;
        let add = v.get("add").and_then(|x| x.as_str()).ok_or_else(|| schema(format!("{what}: missing add")))?;
        let l = alphabet.index(add).ok_or_else(|| schema(format!("{what}: unknown label {add:?}")))?;
        if s & (1 << l) != 0 {
            return Err(schema(format!("{what}: added letter already in subset")));
        }
        Ok((s, l))
    }

    fn parse_package(so: &Map<String, Value>, subset: u32, what: &str) -> Result<StratumPackage, DegenerationError> {
        let hv = so.get("hodge").and_then(|x| x.as_array()).ok_or_else(|| schema(format!("{what}: missing hodge numbers")))?;
        let mut numbers: Vec<(i64, i64, usize)> = Vec::new();
        for e in hv {
            let t = e.as_array().filter(|t| t.len() == 3).ok_or_else(|| schema(format!("{what}: hodge entries are [p, q, dim]")))?;
            let p = t[0].as_i64().ok_or_else(|| schema(format!("{what}: bad p")))?;
            let q = t[1].as_i64().ok_or_else(|| schema(format!("{what}: bad q")))?;
            let d = t[2].as_u64().ok_or_else(|| schema(format!("{what}: bad dim")))? as usize;
            if p < 0 || q < 0 {
                return Err(schema(format!("{what}: negative Hodge type")));
            }
            if d > 0 {
                numbers.push((p, q, d));
            }
        }
        let mut by_degree: BTreeMap<usize, usize> = BTreeMap::new();
        for &(p, q, d) in &numbers {
            *by_degree.entry((p + q) as usize).or_default() += d;
        }
        let degrees: Vec<usize> = by_degree.iter().flat_map(|(&h, &d)| std::iter::repeat_n(h, d)).collect();
        let n = degrees.len();
        let top = degrees.last().copied().unwrap_or(0);
        let lefschetz = parse_matrix(so.get("lefschetz"), n, n, &format!("{what}.lefschetz"))?;
        let trace_v = so.get("trace").and_then(|x| x.as_array()).ok_or_else(|| schema(format!("{what}: missing trace")))?;
        if trace_v.len() != n {
            return Err(schema(format!("{what}: trace has wrong length")));
        }
        let trace: Vec<Q> = trace_v.iter().map(parse_scalar).collect::<Result<_, _>>()?;
        let range = |h: usize| -> std::ops::Range<usize> {
            let s = degrees.iter().position(|&d| d >= h).unwrap_or(n);
            let e = degrees.iter().position(|&d| d > h).unwrap_or(n);
            s..e.max(s)
        };
        let cup = match so.get("cup") {
            Some(c) => parse_matrix(Some(c), n, n, &format!("{what}.cup"))?,
            None => {
                // Lefschetz-generated: basis vector of degree 2a is a multiple of L^a e0.
                if range(0).len() != 1 || degrees.iter().any(|&d| d % 2 == 1) || by_degree.values().any(|&d| d != 1) {
                    return Err(schema(format!("{what}: cup is required unless H is spanned by powers of L on H^0 = Q")));
                }
                let mut gens: Vec<Vec<Q>> = vec![{
                    let mut e = vec![Q::zero(); n];
                    e[0] = Q::one();
                    e
                }];
                for a in 1..n {
                    gens.push(lefschetz.mul_vec(&gens[a - 1]));
                }
                let mut factors = Vec::new();
                for (a, g) in gens.iter().enumerate() {
                    let c = g[a].clone();
                    if c.is_zero() || g.iter().enumerate().any(|(i, x)| i != a && !x.is_zero()) {
                        return Err(DegenerationError::HardLefschetzViolation {
                            stratum: format!("{subset:b}"),
                            detail: "L^a e0 does not span degree 2a".into(),
                        });
                    }
                    factors.push(c);
                }
                let tr = |a: usize| -> Q {
                    if a < n {
                        gens[a].iter().zip(&trace).map(|(x, t)| x.clone() * t).sum()
                    } else {
                        Q::zero()
                    }
                };
                let mut m = Matrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        m.set(a, b, tr(a + b) / (factors[a].clone() * &factors[b]));
                    }
                }
                m
            }
        };
        let mut hodge = Vec::new();
        let listed: Vec<(i64, i64, Matrix<Qi>)> = match so.get("hodge_basis") {
            None => Vec::new(),
            Some(hb) => {
                let arr = hb.as_array().ok_or_else(|| schema(format!("{what}: hodge_basis must be a list")))?;
                let mut out = Vec::new();
                for e in arr {
                    let p = e.get("p").and_then(|x| x.as_i64()).ok_or_else(|| schema(format!("{what}: hodge_basis entry needs p")))?;
                    let q = e.get("q").and_then(|x| x.as_i64()).ok_or_else(|| schema(format!("{what}: hodge_basis entry needs q")))?;
                    let vs = e.get("vectors").and_then(|x| x.as_array()).ok_or_else(|| schema(format!("{what}: hodge_basis entry needs vectors")))?;
                    let mut cols = Vec::new();
                    for v in vs {
                        let v = v.as_array().filter(|v| v.len() == n).ok_or_else(|| schema(format!("{what}: hodge vector of wrong length")))?;
                        cols.push(v.iter().map(parse_gaussian).collect::<Result<Vec<_>, _>>()?);
                    }
                    out.push((p, q, Matrix::from_columns(&cols, n)));
                }
                out
            }
        };
        for &(p, q, d) in &numbers {
            let h = (p + q) as usize;
            let basis = match listed.iter().find(|(a, b, _)| *a == p && *b == q) {
                Some((_, _, m)) => m.clone(),
                None => {
                    if numbers.iter().filter(|(a, b, _)| (a + b) as usize == h).count() != 1 {
                        return Err(schema(format!("{what}: degree {h} has several Hodge types; hodge_basis must list ({p},{q})")));
                    }
                    let r = range(h);
                    let mut m = Matrix::<Qi>::zeros(n, r.len());
                    for (c, i) in r.enumerate() {
                        m.set(i, c, Qi::one());
                    }
                    m
                }
            };
            if basis.cols() != d {
                return Err(schema(format!("{what}: H^{{{p},{q}}} has {} vectors, expected {d}", basis.cols())));
            }
            let r = range(h);
            for c in 0..basis.cols() {
                for i in 0..n {
                    if !r.contains(&i) && !basis.get(i, c).is_zero() {
                        return Err(schema(format!("{what}: H^{{{p},{q}}} vector leaves degree {h}")));
                    }
                }
            }
            hodge.push(StratumHodge { p, q, basis });
        }
        let weil = weil_from_hodge(n, &hodge).ok_or_else(|| {
            DegenerationError::HodgeViolation(format!("{what}: Hodge components do not give a rational Weil operator"))
        })?;
        Ok(StratumPackage { subset, dim: top / 2, degrees, hodge, lefschetz, trace, cup, weil })
    }

    /// Checks every load-time invariant.
    pub fn validate(&self) -> Result<(), DegenerationError> {
        if self.strata.is_empty() {
            return Err(schema("strata must be nonempty"));
        }
        for &s in self.strata.keys() {
            let name = self.stratum_name(s);
            if self.alphabet.r(s).contains(&0) {
                return Err(schema(format!("stratum {name} misses a part")));
            }
            for l in letters(s) {
                let smaller = s & !(1 << l);
                if self.alphabet.r(smaller).iter().all(|&x| x > 0) && !self.is_stratum(smaller) {
                    return Err(schema(format!("stratum {name} is listed but {} is not", self.stratum_name(smaller))));
                }
            }
        }
        for (&s, pkg) in &self.strata {
            self.validate_package(s, pkg)?;
        }
        for &s in self.strata.keys() {
            for l in 0..self.alphabet.len() {
                if s & (1 << l) != 0 || !self.is_stratum(s | (1 << l)) {
                    continue;
                }
                let what = format!("{} + {}", self.stratum_name(s), self.alphabet.label(l));
                let rho = self.restrictions.get(&(s, l)).ok_or_else(|| schema(format!("missing restriction {what}")))?;
                let gam = self.gysins.get(&(s, l)).ok_or_else(|| schema(format!("missing Gysin map {what}")))?;
                self.validate_maps(s, l, rho, gam, &what)?;
            }
        }
        self.validate_squares()?;
        Ok(())
    }

    fn validate_package(&self, s: u32, pkg: &StratumPackage) -> Result<(), DegenerationError> {
        let name = self.stratum_name(s);
        let n = pkg.len();
        let expected = self.expected_dim(s);
        if expected < 0 {
            return Err(DegenerationError::PurityViolation(format!("stratum {name} would have negative dimension")));
        }
        let top = 2 * expected as usize;
        if pkg.betti(0) == 0 || pkg.betti(top) == 0 || pkg.degrees.iter().any(|&d| d > top) {
            return Err(DegenerationError::PurityViolation(format!(
                "stratum {name} must have cohomology in degrees 0..={top} with H^0 and H^{top} nonzero"
            )));
        }
        let pkg_dim = pkg.dim;
        // Degree shapes.
        for i in 0..n {
            for j in 0..n {
                if !pkg.lefschetz.get(i, j).is_zero() && pkg.degrees[i] != pkg.degrees[j] + 2 {
                    return Err(schema(format!("stratum {name}: lefschetz does not raise degree by 2")));
                }
                if !pkg.cup.get(i, j).is_zero() && pkg.degrees[i] + pkg.degrees[j] != top {
                    return Err(DegenerationError::PairingViolation(format!("stratum {name}: cup pairs non-complementary degrees")));
                }
                let sign = if (pkg.degrees[i] * pkg.degrees[j]).is_multiple_of(2) { Q::one() } else { -Q::one() };
                if *pkg.cup.get(j, i) != sign * pkg.cup.get(i, j) {
                    return Err(DegenerationError::PairingViolation(format!("stratum {name}: cup is not graded symmetric")));
                }
            }
            if !pkg.trace[i].is_zero() && pkg.degrees[i] != top {
                return Err(schema(format!("stratum {name}: trace outside top degree")));
            }
        }
        if pkg.trace.iter().all(|x| x.is_zero()) {
            return Err(schema(format!("stratum {name}: trace vanishes")));
        }
        for h in 0..=top {
            let (a, b) = (pkg.degree_range(h), pkg.degree_range(top - h));
            let block = pkg.cup.block(a.start, b.start, a.len(), b.len());
            if a.len() != b.len() || block.rank() != a.len() {
                return Err(DegenerationError::PairingViolation(format!("stratum {name}: cup is degenerate on H^{h} x H^{}", top - h)));
            }
        }
        let lt = &pkg.lefschetz.transpose() * &pkg.cup;
        if lt != &pkg.cup * &pkg.lefschetz {
            return Err(DegenerationError::PairingViolation(format!("stratum {name}: L is not self-adjoint for the cup pairing")));
        }
        for i in 1..=pkg_dim {
            let src = pkg.degree_range(pkg_dim - i);
            let tgt = pkg.degree_range(pkg_dim + i);
            let p = pkg.lefschetz.pow(i).block(tgt.start, src.start, tgt.len(), src.len());
            if src.len() != tgt.len() || p.rank() != src.len() {
                return Err(DegenerationError::HardLefschetzViolation { stratum: name.clone(), detail: format!("L^{i} on H^{}", pkg_dim - i) });
            }
        }
        // Hodge structure: conjugation, C commuting with L, type of the cup pairing.
        for c in &pkg.hodge {
            let partner = pkg.hodge.iter().find(|o| o.p == c.q && o.q == c.p);
            let ok = partner.is_some_and(|o| Subspace::from_columns(&o.basis) == Subspace::from_columns(&c.basis.conj()));
            if !ok {
                return Err(DegenerationError::HodgeViolation(format!("stratum {name}: H^{{{},{}}} has no conjugate partner", c.p, c.q)));
            }
        }
        if &pkg.weil * &pkg.lefschetz != &pkg.lefschetz * &pkg.weil {
            return Err(DegenerationError::HodgeViolation(format!("stratum {name}: L is not of Hodge type (1,1)")));
        }
        let cup_qi = pkg.cup.map(|x| x.to_qi());
        for a in &pkg.hodge {
            for b in &pkg.hodge {
                if a.p + b.p != pkg_dim as i64 || a.q + b.q != pkg_dim as i64 {
                    let v = &(&a.basis.transpose() * &cup_qi) * &b.basis;
                    if !v.is_zero() {
                        return Err(DegenerationError::HodgeViolation(format!(
                            "stratum {name}: cup pairs H^{{{},{}}} with H^{{{},{}}}",
                            a.p, a.q, b.p, b.q
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_maps(&self, s: u32, l: usize, rho: &Matrix<Q>, gam: &Matrix<Q>, what: &str) -> Result<(), DegenerationError> {
        let small = &self.strata[&s];
        let big = &self.strata[&(s | (1 << l))];
        for i in 0..big.len() {
            for j in 0..small.len() {
                if !rho.get(i, j).is_zero() && big.degrees[i] != small.degrees[j] {
                    return Err(schema(format!("restriction {what} does not preserve degree")));
                }
            }
        }
        for i in 0..small.len() {
            for j in 0..big.len() {
                if !gam.get(i, j).is_zero() && small.degrees[i] != big.degrees[j] + 2 {
                    return Err(schema(format!("Gysin map {what} does not raise degree by 2")));
                }
            }
        }
        // ∫ γ(α) β = -∫ α ρ(β).
        let lhs = &gam.transpose() * &small.cup;
        let rhs = -&(&big.cup * rho);
        if lhs != rhs {
            return Err(DegenerationError::AdjointnessViolation(what.to_string()));
        }
        let compat = |cond: bool, msg: &str| -> Result<(), DegenerationError> {
            if cond {
                Ok(())
            } else {
                Err(DegenerationError::CompatibilityViolation(format!("{msg} for {what}")))
            }
        };
        compat(rho * &small.lefschetz == &big.lefschetz * rho, "restriction does not commute with L")?;
        compat(gam * &big.lefschetz == &small.lefschetz * gam, "Gysin map does not commute with L")?;
        compat(rho * &small.weil == &big.weil * rho, "restriction is not a morphism of Hodge structures")?;
        compat(gam * &big.weil == &small.weil * gam, "Gysin map is not a morphism of Hodge structures")?;
        Ok(())
    }

    fn rho(&self, s: u32, l: usize) -> &Matrix<Q> {
        &self.restrictions[&(s, l)]
    }
    fn gam(&self, s: u32, l: usize) -> &Matrix<Q> {
        &self.gysins[&(s, l)]
    }

    fn validate_squares(&self) -> Result<(), DegenerationError> {
        let n = self.alphabet.len();
        let fail = |msg: String| Err(DegenerationError::CompatibilityViolation(msg));
        for &s in self.strata.keys() {
            for a in 0..n {
                for b in a + 1..n {
                    let (ea, eb) = (1u32 << a, 1u32 << b);
                    if s & (ea | eb) == 0 && self.is_stratum(s | ea | eb) {
                        let p1 = self.rho(s | ea, b) * self.rho(s, a);
                        let p2 = self.rho(s | eb, a) * self.rho(s, b);
                        if p1 != p2 {
                            return fail(format!("restrictions do not commute on {}", self.stratum_name(s)));
                        }
                        let g1 = self.gam(s, a) * self.gam(s | ea, b);
                        let g2 = self.gam(s, b) * self.gam(s | eb, a);
                        if g1 != g2 {
                            return fail(format!("Gysin maps do not commute into {}", self.stratum_name(s)));
                        }
                    }
                }
            }
            // Restriction by λ ∉ s and Gysin removing μ ∈ s commute.
            for lam in (0..n).filter(|&x| s & (1 << x) == 0) {
                if !self.is_stratum(s | (1 << lam)) {
                    continue;
                }
                for mu in letters(s) {
                    let without = s & !(1 << mu);
                    if !self.is_stratum(without) {
                        continue;
                    }
                    let lhs = self.rho(without, lam) * self.gam(without, mu);
                    let rhs = self.gam(without | (1 << lam), mu) * self.rho(s, lam);
                    if lhs != rhs {
                        return fail(format!("restriction and Gysin map do not commute on {}", self.stratum_name(s)));
                    }
                }
            }
            // Normal relation for each part met at least twice.
            let r = self.alphabet.r(s);
            for i in 0..self.k() {
                if r[i] < 2 {
                    continue;
                }
                let dim = self.strata[&s].len();
                let mut acc = Matrix::<Q>::zeros(dim, dim);
                for lam in letters(self.alphabet.part(i)) {
                    if s & (1 << lam) == 0 {
                        if self.is_stratum(s | (1 << lam)) {
                            acc = &acc + &(self.gam(s, lam) * self.rho(s, lam));
                        }
                    } else {
                        let without = s & !(1 << lam);
                        acc = &acc + &(self.rho(without, lam) * self.gam(without, lam));
                    }
                }
                if !acc.is_zero() {
                    return fail(format!("normal relation fails on {} for part {}", self.stratum_name(s), i + 1));
                }
            }
        }
        Ok(())
    }

    /// Serializes in the instance format.
    pub fn to_json(&self) -> Value {
        let alpha = &self.alphabet;
        let lambda: Vec<Value> = (0..alpha.k()).map(|i| json!(alpha.subset_labels(alpha.part(i)))).collect();
        let strata: Vec<Value> = self
            .strata
            .iter()
            .map(|(&s, p)| {
                let hodge: Vec<Value> = p.hodge_numbers().iter().map(|(a, b, d)| json!([a, b, d])).collect();
                let mut degs: BTreeMap<usize, usize> = BTreeMap::new();
                for (a, b, _) in p.hodge_numbers() {
                    *degs.entry((a + b) as usize).or_default() += 1;
                }
                let needs_basis: BTreeSet<usize> = degs.iter().filter(|(_, &c)| c > 1).map(|(&h, _)| h).collect();
                let mut o = json!({
                    "subset": alpha.subset_labels(s),
                    "hodge": hodge,
                    "lefschetz": matrix_json(&p.lefschetz),
                    "trace": p.trace.iter().map(scalar_json).collect::<Vec<_>>(),
                    "cup": matrix_json(&p.cup),
                });
                if !needs_basis.is_empty() {
                    let hb: Vec<Value> = p
                        .hodge
                        .iter()
                        .filter(|c| needs_basis.contains(&((c.p + c.q) as usize)))
                        .map(|c| {
                            let vs: Vec<Value> =
                                (0..c.basis.cols()).map(|j| Value::Array(c.basis.column(j).iter().map(gaussian_json).collect())).collect();
                            json!({"p": c.p, "q": c.q, "vectors": vs})
                        })
                        .collect();
                    o["hodge_basis"] = Value::Array(hb);
                }
                o
            })
            .collect();
        let edge = |(s, l): &(u32, usize), key: &str, m: &Matrix<Q>| -> Value {
            json!({key: alpha.subset_labels(*s), "add": alpha.label(*l), "matrix": matrix_json(m)})
        };
        json!({
            "name": self.name,
            "k": alpha.k(),
            "lambda": lambda,
            "dimX": self.dim_x,
            "strata": strata,
            "restrictions": self.restrictions.iter().map(|(e, m)| edge(e, "from", m)).collect::<Vec<_>>(),
            "gysins": self.gysins.iter().map(|(e, m)| edge(e, "to", m)).collect::<Vec<_>>(),
        })
    }
}
