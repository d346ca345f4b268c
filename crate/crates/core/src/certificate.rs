//! Loading and verifying semidefinite upper-bound certificates: PSD and
//! characteristic-polynomial checks, slack tables, bounds, rank-1 and
//! eigenvector witnesses, and extremal supports.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use num::{BigInt, BigUint, Zero};
use serde::{Deserialize, Serialize};

use crate::canon::{canonical_fixing, canonical_form, enumerate, CanonicalForm};
use crate::catalog::{lookup, reverse_lookup, t5};
use crate::density::{binomial, density, falling};
use crate::error::{Error, Result};
use crate::exact::{
    char_poly, eigencheck, eval_poly, fmt_rational, format_poly, is_psd, parse_rational, psd_by_sign_rule,
    rank1_mismatch, QuadraticValue, Rational, RationalMatrix,
};
use crate::flag::{
    enumerate_canonical, flag_type, injections, joint_density, named_flag, named_flag_type, q_sigma, Flag, FlagType,
};
use crate::par::{self, Exec};
use crate::tournament::Tournament;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub target: String,
    pub ell: usize,
    pub claimed_bound: String,
    pub blocks: Vec<BlockFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_slack: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockFile {
    #[serde(rename = "type")]
    pub ty: String,
    pub ell_t: usize,
    pub basis: Vec<String>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_poly: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank1: Option<Rank1File>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<Vec<EigenFile>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rank1File {
    pub c: String,
    pub v: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenFile {
    pub v: Vec<QuadraticValue>,
    pub lambda: QuadraticValue,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub ty: FlagType,
    pub ell_t: usize,
    pub basis_names: Vec<String>,
    pub basis: Vec<Flag>,
    pub q: RationalMatrix,
    pub char_poly: Option<Vec<Rational>>,
    pub rank1: Option<(Rational, Vec<Rational>)>,
    pub eigen: Vec<(Vec<QuadraticValue>, QuadraticValue)>,
    expansion: OnceLock<Vec<Expanded>>,
}

// One F ∈ F^σ_ℓ: its unlabelled class, q_σ(F), and p(F_i, F_j; F).
#[derive(Clone, Debug)]
struct Expanded {
    base: CanonicalForm,
    q: Rational,
    pair: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub target_name: String,
    pub target: Tournament,
    pub ell: usize,
    pub claimed_bound: Rational,
    pub blocks: Vec<Block>,
    pub expected_slack: Option<Vec<(String, Rational)>>,
}

// "T5^10" sorts after "T5^9".
fn host_order(name: &str) -> (String, u64) {
    let digits = name.len() - name.bytes().rev().take_while(u8::is_ascii_digit).count();
    (name[..digits].to_string(), name[digits..].parse().unwrap_or(0))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Certificate(msg.into())
}

pub fn load_certificate(path: impl AsRef<Path>) -> Result<Certificate> {
    let text = std::fs::read_to_string(path)?;
    parse_certificate(&text)
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let file: CertificateFile = serde_json::from_str(text)?;
    Certificate::from_file(&file)
}

impl Certificate {
    pub fn from_file(file: &CertificateFile) -> Result<Certificate> {
        let target = lookup(&file.target).map_err(|_| invalid(format!("unknown target {:?}", file.target)))?;
        if target.n() > file.ell {
            return Err(invalid(format!("target of size {} exceeds ℓ = {}", target.n(), file.ell)));
        }
        let blocks = file.blocks.iter().map(|b| Block::from_file(b, file.ell)).collect::<Result<Vec<_>>>()?;
        let expected_slack = file
            .expected_slack
            .as_ref()
            .map(|m| m.iter().map(|(k, v)| Ok((k.clone(), parse_rational(v)?))).collect::<Result<Vec<_>>>())
            .transpose()?
            .map(|mut v| {
                v.sort_by_key(|(k, _)| host_order(k));
                v
            });
        Ok(Certificate {
            target_name: file.target.clone(),
            target,
            ell: file.ell,
            claimed_bound: parse_rational(&file.claimed_bound)?,
            blocks,
            expected_slack,
        })
    }
}

impl Block {
    fn from_file(b: &BlockFile, ell: usize) -> Result<Block> {
        let ty = flag_type(&b.ty).map_err(|_| invalid(format!("unknown type {:?}", b.ty)))?;
        let k = ty.k();
        if 2 * b.ell_t > ell + k {
            return Err(invalid(format!("ℓ_t = {} is inadmissible for ℓ = {ell} and |σ| = {k}", b.ell_t)));
        }
        let mut basis = Vec::with_capacity(b.basis.len());
        for name in &b.basis {
            let f = named_flag(name).map_err(|_| invalid(format!("unknown flag name {name:?}")))?;
            if named_flag_type(name)?.name != ty.name || f.size() != b.ell_t {
                return Err(invalid(format!("flag {name:?} is not a {}-flag of size {}", ty.name, b.ell_t)));
            }
            basis.push(f);
        }
        let forms = basis.iter().map(Flag::canonical).collect::<Result<Vec<_>>>()?;
        let mut sorted = forms.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != forms.len() {
            return Err(invalid(format!("basis for type {} repeats a flag", ty.name)));
        }
        let full = enumerate_canonical(&ty, b.ell_t)?.len();
        if forms.len() != full {
            return Err(invalid(format!("basis for type {} has {} flags, expected {full}", ty.name, forms.len())));
        }
        let q = RationalMatrix::from_strs(&b.q)?;
        if q.rows() != basis.len() || q.cols() != basis.len() {
            return Err(Error::Dimension(format!(
                "Q is {}x{} for a basis of {}",
                q.rows(),
                q.cols(),
                basis.len()
            )));
        }
        if !q.is_symmetric() {
            return Err(Error::Symmetry);
        }
        let char_poly = b
            .char_poly
            .as_ref()
            .map(|c| c.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .transpose()?;
        if let Some(c) = &char_poly {
            if c.len() != basis.len() + 1 {
                return Err(invalid("characteristic polynomial has the wrong degree"));
            }
        }
        let rank1 = match &b.rank1 {
            Some(r) => {
                let v = r.v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
                if v.len() != basis.len() {
                    return Err(Error::Dimension("rank-1 vector length".into()));
                }
                Some((parse_rational(&r.c)?, v))
            }
            None => None,
        };
        let eigen = b.eigen.iter().flatten().map(|e| (e.v.clone(), e.lambda.clone())).collect::<Vec<_>>();
        if eigen.iter().any(|(v, _)| v.len() != basis.len()) {
            return Err(Error::Dimension("eigenvector length".into()));
        }
        Ok(Block {
            ty,
            ell_t: b.ell_t,
            basis_names: b.basis.clone(),
            basis,
            q,
            char_poly,
            rank1,
            eigen,
            expansion: OnceLock::new(),
        })
    }

    fn expansion(&self, ell: usize) -> Result<&[Expanded]> {
        if let Some(e) = self.expansion.get() {
            return Ok(e);
        }
        let dim = self.basis.len();
        let mut out = Vec::new();
        for f in enumerate_canonical(&self.ty, ell)? {
            let mut pair = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    pair.push(joint_density(&[self.basis[i].clone(), self.basis[j].clone()], &f)?);
                }
            }
            out.push(Expanded { base: canonical_form(f.tournament())?, q: q_sigma(&f)?, pair });
        }
        Ok(self.expansion.get_or_init(|| out))
    }

    /// c(Q; T') = Σ_{F ∈ F^σ_ℓ, F|₀ ≅ T'} q_σ(F) Σ_{i,j} Q_ij p(F_i, F_j; F).
    pub fn c_coefficient(&self, ell: usize, host: &Tournament) -> Result<Rational> {
        if host.n() != ell {
            return Err(Error::Size(format!("host of size {} for ℓ = {ell}", host.n())));
        }
        let base = canonical_form(host)?;
        let dim = self.basis.len();
        let mut total = Rational::zero();
        for e in self.expansion(ell)?.iter().filter(|e| e.base == base) {
            let mut inner = Rational::zero();
            for i in 0..dim {
                for j in 0..dim {
                    let p = &e.pair[i * dim + j];
                    if !p.is_zero() {
                        inner += self.q.get(i, j) * p;
                    }
                }
            }
            total += &e.q * inner;
        }
        Ok(total)
    }

    /// Same value by direct counting: over every labelling θ of the host and
    /// every ordered pair of disjoint unlabelled sets, look up the two induced
    /// flags in the basis. Uses no flag enumeration, q_σ or joint densities.
    pub fn c_coefficient_oracle(&self, host: &Tournament) -> Result<Rational> {
        let ell = host.n();
        let k = self.ty.k();
        let m = self.ell_t - k;
        let forms = self.basis.iter().map(Flag::canonical).collect::<Result<Vec<_>>>()?;
        let index = |vs: &[usize]| -> Result<Option<usize>> {
            let c = canonical_fixing(&host.induced(vs)?, k)?.form;
            Ok(forms.iter().position(|f| *f == c))
        };
        let mut total = Rational::zero();
        let mut err = None;
        injections(ell, k, &mut Vec::new(), &mut |theta| {
            if err.is_some() || host.induced(theta).map(|s| s != self.ty.sigma).unwrap_or(true) {
                return;
            }
            let rest: Vec<usize> = (0..ell).filter(|v| !theta.contains(v)).collect();
            for w1 in subsets(&rest, m) {
                let rest2: Vec<usize> = rest.iter().copied().filter(|v| !w1.contains(v)).collect();
                for w2 in subsets(&rest2, m) {
                    let lookup = |w: &[usize]| {
                        let mut vs = theta.to_vec();
                        vs.extend_from_slice(w);
                        index(&vs)
                    };
                    match (lookup(&w1), lookup(&w2)) {
                        (Ok(Some(i)), Ok(Some(j))) => total += self.q.get(i, j),
                        (Err(e), _) | (_, Err(e)) => err = Some(e),
                        _ => {}
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let pairs = binomial((ell - k) as u64, m as u64) * binomial((ell - k - m) as u64, m as u64);
        let den: BigUint = falling(ell as u64, k as u64) * pairs;
        Ok(total / Rational::from_integer(BigInt::from(den)))
    }
}

fn subsets(items: &[usize], m: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, m, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, m, 0, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackEntry {
    pub name: String,
    #[serde(skip)]
    pub host: Tournament,
    #[serde(with = "crate::exact::rational_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackTable {
    pub entries: Vec<SlackEntry>,
}

impl SlackTable {
    pub fn max(&self) -> Option<&Rational> {
        self.entries.iter().map(|e| &e.value).max()
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.value)
    }
}

/// Size-ℓ hosts: T5^1..T5^12 in catalog order when ℓ = 5.
pub fn hosts(ell: usize) -> Result<Vec<(String, Tournament)>> {
    if ell == 5 {
        return Ok((1..=12).map(|i| (format!("T5^{i}"), t5(i))).collect());
    }
    Ok(enumerate(ell)?.iter().map(|t| (reverse_lookup(t).unwrap_or_else(|| t.encode()), t.clone())).collect())
}

/// p(target; T') + Σ_t c(Q_t; T') for every T' ∈ T_ℓ.
pub fn slack_table(cert: &Certificate) -> Result<SlackTable> {
    slack_table_with(cert, Exec::default())
}

pub fn slack_table_with(cert: &Certificate, exec: Exec) -> Result<SlackTable> {
    for b in &cert.blocks {
        b.expansion(cert.ell)?;
    }
    let hosts = hosts(cert.ell)?;
    let values = par::map_slice(exec, &hosts, |(name, host)| -> Result<SlackEntry> {
        let mut v = density(&cert.target, host)?;
        for b in &cert.blocks {
            v += b.c_coefficient(cert.ell, host)?;
        }
        Ok(SlackEntry { name: name.clone(), host: host.clone(), value: v })
    });
    Ok(SlackTable { entries: values.into_iter().collect::<Result<Vec<_>>>()? })
}

/// Hosts whose slack value attains the bound; every other size-ℓ
/// tournament has density zero in an extremal sequence.
pub fn extremal_support(cert: &Certificate) -> Result<Vec<String>> {
    let table = slack_table(cert)?;
    let max = table.max().cloned().unwrap_or_else(Rational::zero);
    Ok(table.entries.iter().filter(|e| e.value == max).map(|e| e.name.clone()).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub charpoly: bool,
    pub tables: bool,
    pub rank1: bool,
    pub eigen: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { charpoly: true, tables: true, rank1: false, eigen: false }
    }
}

impl VerifyOptions {
    pub fn all() -> Self {
        VerifyOptions { charpoly: true, tables: true, rank1: true, eigen: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub target: String,
    #[serde(with = "crate::exact::rational_str")]
    pub claimed_bound: Rational,
    #[serde(with = "crate::exact::rational_str")]
    pub computed_bound: Rational,
    pub checks: Vec<Check>,
    pub slack: SlackTable,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    format!("({})", v.iter().map(fmt_rational).collect::<Vec<_>>().join(", "))
}

fn block_label(cert: &Certificate, b: &Block) -> String {
    format!("Q({},{})", cert.target_name, b.ty.name)
}

pub fn verify(cert: &Certificate) -> Result<VerifyReport> {
    verify_with(cert, VerifyOptions::default())
}

pub fn verify_with(cert: &Certificate, opts: VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for b in &cert.blocks {
        let label = block_label(cert, b);
        let ldl = is_psd(&b.q)?;
        let sign = psd_by_sign_rule(&b.q)?;
        let detail = match (&ldl.witness, ldl.psd == sign) {
            (_, false) => format!("LDLᵀ says {}, sign rule says {}", ldl.psd, sign),
            (Some(w), _) => format!("vᵀQv = {} < 0 for v = {}", b.q.quadratic_form(w)?, fmt_vec(w)),
            (None, _) => format!("{} positive pivots", ldl.pivots.len()),
        };
        checks.push(Check::new(format!("{label} psd"), ldl.psd && sign, detail));
        if opts.charpoly {
            if let Some(expected) = &b.char_poly {
                let got = char_poly(&b.q)?;
                let detail = if got == *expected {
                    format_poly(&got)
                } else {
                    format!("computed {}, expected {}", format_poly(&got), format_poly(expected))
                };
                checks.push(Check::new(format!("{label} char poly"), got == *expected, detail));
            }
        }
    }
    let slack = slack_table(cert)?;
    let computed = slack.max().cloned().unwrap_or_else(Rational::zero);
    let over: Vec<&str> =
        slack.entries.iter().filter(|e| e.value > cert.claimed_bound).map(|e| e.name.as_str()).collect();
    let detail = if over.is_empty() {
        format!("max slack {computed}")
    } else {
        format!("max slack {computed} exceeds {} at {}", cert.claimed_bound, over.join(", "))
    };
    checks.push(Check::new("bound", computed == cert.claimed_bound, detail));
    if opts.tables {
        if let Some(expected) = &cert.expected_slack {
            for (name, want) in expected {
                let got = slack.get(name);
                let ok = got == Some(want);
                let detail = match got {
                    Some(g) => format!("{g} (expected {want})"),
                    None => "host not in table".to_string(),
                };
                checks.push(Check::new(format!("slack {name}"), ok, detail));
            }
        }
    }
    if opts.rank1 {
        checks.extend(verify_rank1(cert)?);
    }
    if opts.eigen {
        checks.extend(verify_eigen(cert)?);
    }
    Ok(VerifyReport {
        target: cert.target_name.clone(),
        claimed_bound: cert.claimed_bound.clone(),
        computed_bound: computed,
        checks,
        slack,
    })
}

/// Q = c·v·vᵀ for every block that declares a rank-1 witness.
pub fn verify_rank1(cert: &Certificate) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for b in &cert.blocks {
        if let Some((c, v)) = &b.rank1 {
            let label = block_label(cert, b);
            let mismatch = rank1_mismatch(&b.q, c, v)?;
            let detail = match mismatch {
                None => format!("{c} · {}{}ᵀ", fmt_vec(v), fmt_vec(v)),
                Some((i, j)) => format!("entry ({i},{j}) is {}, c·v_i·v_j = {}", b.q.get(i, j), c * &v[i] * &v[j]),
            };
            out.push(Check::new(format!("{label} rank-1"), mismatch.is_none(), detail));
        }
    }
    Ok(out)
}

/// Q v = λ v in Q(√d) for every declared eigenpair, and λ is a root of the
/// characteristic polynomial.
pub fn verify_eigen(cert: &Certificate) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for b in &cert.blocks {
        let label = block_label(cert, b);
        for (v, lambda) in &b.eigen {
            let ok = eigencheck(&b.q, v, lambda)?;
            let root = eval_poly(&char_poly(&b.q)?, lambda).is_zero();
            let detail = format!("λ = {lambda}: Qv = λv {ok}, char poly vanishes {root}");
            out.push(Check::new(format!("{label} eigenpair"), ok && root, detail));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_json_is_a_parse_error() {
        assert!(matches!(parse_certificate("{\"target\": \"T5^7\", \"ell\""), Err(Error::Json(_))));
    }

    #[test]
    fn unknown_flag_and_inadmissible_size() {
        let base = r#"{"target":"T5^7","ell":5,"claimed_bound":"5/16","blocks":[BLOCK]}"#;
        let bad_name = r#"{"type":"1","ell_t":3,"basis":["Tr3^{1,L}","C3^1","nope","Tr3^{1,W}"],"Q":[["0","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]]}"#;
        let err = parse_certificate(&base.replace("BLOCK", bad_name)).unwrap_err();
        assert!(err.to_string().contains("unknown flag name"), "{err}");
        let too_big = r#"{"type":"1","ell_t":4,"basis":[],"Q":[]}"#;
        let err = parse_certificate(&base.replace("BLOCK", too_big)).unwrap_err();
        assert!(err.to_string().contains("inadmissible"), "{err}");
    }

    #[test]
    fn zero_matrix_contributes_nothing() {
        let block = r#"{"type":"C3s","ell_t":4,"basis":["R4^{C3s,3}","L4^{C3s}","R4^{C3s,2}","R4^{C3s,1}","R4^{C3s,23}","W4^{C3s}","R4^{C3s,12}","R4^{C3s,13}"],"Q":ZERO}"#;
        let zero = serde_json::to_string(&vec![vec!["0"; 8]; 8]).unwrap();
        let text = format!(r#"{{"target":"T5^7","ell":5,"claimed_bound":"5/16","blocks":[{}]}}"#, block.replace("ZERO", &zero));
        let cert = parse_certificate(&text).unwrap();
        for (_, host) in hosts(5).unwrap() {
            assert!(cert.blocks[0].c_coefficient(5, &host).unwrap().is_zero());
        }
    }
}
