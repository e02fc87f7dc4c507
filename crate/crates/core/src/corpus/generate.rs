//! Seeded instance generators with certification.
//!
//! Inline grammar, used by the command line as well:
//!
//! ```text
//! <kind>:seed=<u64>,n=<n>,dims=<d1>,<d2>,...[,weights=<law>][,theta=<radians>]
//! kind  = generic_frame | riesz_basis | fusion_onb | parseval | dual_pair | perturbation_pair
//!         (aliases: frame, riesz, onb, dual, perturbation)
//! law   = unit | uniform:<a>:<b> | explicit:<w1>:<w2>:...
//! ```
//!
//! Operators are named the same way: `identity`, `zero`, `random:seed=S`,
//! `random_invertible:seed=S`, `rank:r=R,seed=S`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rng::CorpusRng;
use crate::error::{Error, Result};
use crate::frames::{duality_defect, WeightedFamily};
use crate::hilbert::Subspace;
use crate::linalg::{self, CMatrix, TolerancePolicy};

pub const MAX_ATTEMPTS: usize = 16;
/// Generated bases and invertible operators keep `sigma_min / sigma_max` above this.
const CONDITION_GUARD: f64 = 1e-3;
const DUAL_DEFECT_MAX: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    Unit,
    Uniform(f64, f64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    GenericFrame,
    RieszBasis,
    FusionOnb,
    Parseval,
    DualPair,
    PerturbationPair(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub ambient_dim: usize,
    pub subspace_dims: Vec<usize>,
    pub weight_law: WeightLaw,
    pub kind: InstanceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Family(WeightedFamily),
    /// `dual_pair`: (frame, canonical dual). `perturbation_pair`: (V, Z).
    Pair(WeightedFamily, WeightedFamily),
}

impl Generated {
    pub fn first(&self) -> &WeightedFamily {
        match self {
            Generated::Family(f) | Generated::Pair(f, _) => f,
        }
    }

    pub fn second(&self) -> Option<&WeightedFamily> {
        match self {
            Generated::Family(_) => None,
            Generated::Pair(_, g) => Some(g),
        }
    }
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, seed: u64, ambient_dim: usize, subspace_dims: Vec<usize>) -> Self {
        Self {
            seed,
            ambient_dim,
            subspace_dims,
            weight_law: WeightLaw::Unit,
            kind,
        }
    }

    pub fn with_weights(mut self, law: WeightLaw) -> Self {
        self.weight_law = law;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let n = self.ambient_dim;
        let dims = &self.subspace_dims;
        if n == 0 || dims.is_empty() {
            return bad("ambient dimension and subspace list must be nonempty".into());
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > n) {
            return bad(format!("subspace dimension {d} outside 1..={n}"));
        }
        let total: usize = dims.iter().sum();
        match self.kind {
            InstanceKind::RieszBasis | InstanceKind::FusionOnb if total != n => {
                return bad(format!("dimensions sum to {total}, basis kinds need {n}"))
            }
            InstanceKind::GenericFrame | InstanceKind::DualPair | InstanceKind::PerturbationPair(_) | InstanceKind::Parseval
                if total < n =>
            {
                return bad(format!("dimensions sum to {total} < {n}"))
            }
            _ => {}
        }
        if let InstanceKind::PerturbationPair(theta) = self.kind {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
                return bad(format!("theta = {theta} outside [0, pi/2]"));
            }
            if n < 2 && theta != 0.0 {
                return bad("rotation needs n >= 2".into());
            }
        }
        if matches!(self.kind, InstanceKind::FusionOnb | InstanceKind::Parseval) && self.weight_law != WeightLaw::Unit {
            return bad("fusion_onb and parseval fix their own weights; use weights=unit".into());
        }
        if self.kind == InstanceKind::Parseval {
            parseval_groups(dims, n)?;
        }
        match &self.weight_law {
            WeightLaw::Unit => Ok(()),
            WeightLaw::Uniform(a, b) if *a > 0.0 && a <= b && b.is_finite() => Ok(()),
            WeightLaw::Uniform(a, b) => bad(format!("uniform({a}, {b}) needs 0 < a <= b")),
            WeightLaw::Explicit(w) if w.len() != dims.len() => {
                bad(format!("{} weights for {} subspaces", w.len(), dims.len()))
            }
            WeightLaw::Explicit(w) if w.iter().all(|x| *x > 0.0 && x.is_finite()) => Ok(()),
            WeightLaw::Explicit(_) => bad("explicit weights must be positive".into()),
        }
    }
}

/// Splits `dims` into consecutive runs that each sum to `n`.
fn parseval_groups(dims: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut groups = Vec::new();
    let (mut acc, mut len) = (0, 0);
    for &d in dims {
        acc += d;
        len += 1;
        if acc == n {
            groups.push(len);
            acc = 0;
            len = 0;
        } else if acc > n {
            break;
        }
    }
    if acc != 0 || len != 0 || groups.is_empty() {
        return Err(Error::InvalidSpec(
            "parseval dims must split into consecutive runs summing to n".into(),
        ));
    }
    Ok(groups)
}

fn draw_weights(law: &WeightLaw, count: usize, rng: &mut CorpusRng) -> Vec<f64> {
    match law {
        WeightLaw::Unit => vec![1.0; count],
        WeightLaw::Uniform(a, b) => (0..count).map(|_| rng.uniform_in(*a, *b)).collect(),
        WeightLaw::Explicit(w) => w.clone(),
    }
}

fn random_unitary(n: usize, rng: &mut CorpusRng, tol: &TolerancePolicy) -> Result<CMatrix> {
    let q = linalg::orthonormal_basis(&rng.gaussian_matrix(n, n), tol)?;
    if q.ncols() != n {
        return Err(Error::InvalidSpec("rank-deficient Gaussian draw".into()));
    }
    Ok(q)
}

fn column_blocks(m: &CMatrix, dims: &[usize], orthonormal: bool, tol: &TolerancePolicy) -> Result<Vec<Subspace>> {
    let mut start = 0;
    dims.iter()
        .map(|&d| {
            let block = m.columns(start, d).into_owned();
            start += d;
            if orthonormal {
                Subspace::from_orthonormal(block, tol)
            } else {
                Subspace::from_span(&block, tol)
            }
        })
        .collect()
}

fn gaussian_family(spec: &InstanceSpec, rng: &mut CorpusRng, tol: &TolerancePolicy) -> Result<WeightedFamily> {
    let n = spec.ambient_dim;
    let subs = spec
        .subspace_dims
        .iter()
        .map(|&d| Subspace::from_span(&rng.gaussian_matrix(n, d), tol))
        .collect::<Result<Vec<_>>>()?;
    if subs.iter().zip(&spec.subspace_dims).any(|(s, &d)| s.dim() != d) {
        return Err(Error::InvalidSpec("rank-deficient Gaussian draw".into()));
    }
    let weights = draw_weights(&spec.weight_law, subs.len(), rng);
    WeightedFamily::new(subs, weights)
}

/// Unitary rotation by `theta` in the plane spanned by two random orthonormal vectors.
fn plane_rotation(n: usize, theta: f64, rng: &mut CorpusRng, tol: &TolerancePolicy) -> Result<CMatrix> {
    let plane = linalg::orthonormal_basis(&rng.gaussian_matrix(n, 2), tol)?;
    if plane.ncols() != 2 {
        return Err(Error::InvalidSpec("degenerate rotation plane".into()));
    }
    let (a, b) = (plane.column(0), plane.column(1));
    let (s, c) = theta.sin_cos();
    Ok(linalg::identity(n) + (a * a.adjoint() + b * b.adjoint()).scale(c - 1.0) + (b * a.adjoint() - a * b.adjoint()).scale(s))
}

fn attempt(spec: &InstanceSpec, rng: &mut CorpusRng, tol: &TolerancePolicy) -> Result<Generated> {
    let n = spec.ambient_dim;
    let dims = &spec.subspace_dims;
    let fail = |m: &str| Err(Error::InvalidSpec(m.into()));
    match spec.kind {
        InstanceKind::GenericFrame => {
            let w = gaussian_family(spec, rng, tol)?;
            if !w.classify(tol).is_frame {
                return fail("not a frame");
            }
            Ok(Generated::Family(w))
        }
        InstanceKind::RieszBasis => {
            let m = rng.gaussian_matrix(n, n);
            if linalg::sigma_ratio(&m) < CONDITION_GUARD {
                return fail("ill-conditioned basis matrix");
            }
            let subs = column_blocks(&m, dims, false, tol)?;
            let weights = draw_weights(&spec.weight_law, subs.len(), rng);
            let w = WeightedFamily::new(subs, weights)?;
            if !w.classify(tol).is_riesz_basis {
                return fail("not a Riesz basis");
            }
            Ok(Generated::Family(w))
        }
        InstanceKind::FusionOnb => {
            let q = random_unitary(n, rng, tol)?;
            let w = WeightedFamily::new(column_blocks(&q, dims, true, tol)?, vec![1.0; dims.len()])?;
            if !w.classify(tol).is_orthonormal_basis {
                return fail("not orthonormal");
            }
            Ok(Generated::Family(w))
        }
        InstanceKind::Parseval => {
            let groups = parseval_groups(dims, n)?;
            let weight = 1.0 / (groups.len() as f64).sqrt();
            let mut subs = Vec::with_capacity(dims.len());
            let mut start = 0;
            for len in groups {
                let q = random_unitary(n, rng, tol)?;
                subs.extend(column_blocks(&q, &dims[start..start + len], true, tol)?);
                start += len;
            }
            let w = WeightedFamily::new(subs, vec![weight; dims.len()])?;
            if !w.classify(tol).is_parseval {
                return fail("not Parseval");
            }
            Ok(Generated::Family(w))
        }
        InstanceKind::DualPair => {
            let w = gaussian_family(spec, rng, tol)?;
            if !w.classify(tol).is_frame {
                return fail("not a frame");
            }
            let dual = w.canonical_dual(tol)?;
            if duality_defect(&dual, &w, tol)? > DUAL_DEFECT_MAX {
                return fail("canonical dual misses the duality tolerance");
            }
            Ok(Generated::Pair(w, dual))
        }
        InstanceKind::PerturbationPair(theta) => {
            let v = gaussian_family(spec, rng, tol)?;
            let mut rotated = Vec::with_capacity(v.len());
            for sub in v.subspaces() {
                let basis = if theta == 0.0 {
                    sub.basis().clone()
                } else {
                    plane_rotation(n, theta, rng, tol)? * sub.basis()
                };
                rotated.push(Subspace::from_orthonormal(basis, tol)?);
            }
            let z = WeightedFamily::new(rotated, v.weights().to_vec())?;
            if !v.classify(tol).is_frame || !z.classify(tol).is_frame {
                return fail("not a frame");
            }
            Ok(Generated::Pair(v, z))
        }
    }
}

/// Deterministic in `spec`; each failed certification redraws from the same stream.
pub fn generate(spec: &InstanceSpec) -> Result<Generated> {
    spec.validate()?;
    let tol = TolerancePolicy::default();
    let mut rng = CorpusRng::new(spec.seed);
    let mut reason = String::new();
    for _ in 0..MAX_ATTEMPTS {
        match attempt(spec, &mut rng, &tol) {
            Ok(g) => return Ok(g),
            Err(e) => reason = e.to_string(),
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
        reason,
    })
}

/// Named operator on `C^n`; see the module docs for the grammar.
pub fn operator_from_spec(text: &str, n: usize) -> Result<CMatrix> {
    let (name, args) = split_kind(text);
    let args = parse_args(args)?;
    let seed = || -> Result<u64> { args.get_parsed("seed").map(|s| s.unwrap_or(0)) };
    match name {
        "identity" | "I" => Ok(linalg::identity(n)),
        "zero" | "0" => Ok(CMatrix::zeros(n, n)),
        "random" => Ok(CorpusRng::new(seed()?).gaussian_matrix(n, n)),
        "random_invertible" => {
            let mut rng = CorpusRng::new(seed()?);
            for _ in 0..MAX_ATTEMPTS {
                let m = rng.gaussian_matrix(n, n);
                if linalg::sigma_ratio(&m) >= CONDITION_GUARD {
                    return Ok(m);
                }
            }
            Err(Error::GenerationFailed {
                attempts: MAX_ATTEMPTS,
                reason: "ill-conditioned operator".into(),
            })
        }
        "rank" => {
            let r: usize = args
                .get_parsed("r")?
                .ok_or_else(|| Error::InvalidSpec("rank operator needs r=".into()))?;
            if r > n {
                return Err(Error::InvalidSpec(format!("rank {r} exceeds n = {n}")));
            }
            let mut rng = CorpusRng::new(seed()?);
            let a = rng.gaussian_matrix(n, r);
            let b = rng.gaussian_matrix(r, n);
            Ok(a * b)
        }
        other => Err(Error::InvalidSpec(format!("unknown operator '{other}'"))),
    }
}

fn split_kind(text: &str) -> (&str, &str) {
    match text.split_once(':') {
        Some((k, rest)) => (k.trim(), rest),
        None => (text.trim(), ""),
    }
}

struct Args(Vec<(String, Vec<String>)>);

impl Args {
    fn get(&self, key: &str) -> Option<&[String]> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_slice())
    }

    fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some([one]) => one
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidSpec(format!("bad value '{one}' for {key}"))),
            Some(_) => Err(Error::InvalidSpec(format!("{key} takes a single value"))),
        }
    }
}

/// `k=v,k=v1,v2` with bare tokens continuing the previous key.
fn parse_args(text: &str) -> Result<Args> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if out.iter().any(|(e, _)| *e == k) {
                    return Err(Error::InvalidSpec(format!("duplicate key {k}")));
                }
                out.push((k, vec![v.trim().to_string()]));
            }
            None => match out.last_mut() {
                Some((_, vals)) => vals.push(token.to_string()),
                None => return Err(Error::InvalidSpec(format!("value '{token}' without a key"))),
            },
        }
    }
    Ok(Args(out))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad number '{s}'")))
}

impl FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["unit"] => Ok(WeightLaw::Unit),
            ["uniform", a, b] => Ok(WeightLaw::Uniform(parse_f64(a)?, parse_f64(b)?)),
            ["explicit", rest @ ..] if !rest.is_empty() => {
                Ok(WeightLaw::Explicit(rest.iter().map(|x| parse_f64(x)).collect::<Result<_>>()?))
            }
            _ => Err(Error::InvalidSpec(format!("unknown weight law '{s}'"))),
        }
    }
}

impl fmt::Display for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLaw::Unit => write!(f, "unit"),
            WeightLaw::Uniform(a, b) => write!(f, "uniform:{a:?}:{b:?}"),
            WeightLaw::Explicit(w) => {
                write!(f, "explicit")?;
                w.iter().try_for_each(|x| write!(f, ":{x:?}"))
            }
        }
    }
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::GenericFrame => "generic_frame",
            InstanceKind::RieszBasis => "riesz_basis",
            InstanceKind::FusionOnb => "fusion_onb",
            InstanceKind::Parseval => "parseval",
            InstanceKind::DualPair => "dual_pair",
            InstanceKind::PerturbationPair(_) => "perturbation_pair",
        }
    }
}

impl FromStr for InstanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = split_kind(s);
        let args = parse_args(rest)?;
        let known = ["seed", "n", "dims", "weights", "theta"];
        if let Some((k, _)) = args.0.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::InvalidSpec(format!("unknown key '{k}'")));
        }
        let theta: Option<f64> = args.get_parsed("theta")?;
        let kind = match kind {
            "generic_frame" | "frame" => InstanceKind::GenericFrame,
            "riesz_basis" | "riesz" => InstanceKind::RieszBasis,
            "fusion_onb" | "onb" => InstanceKind::FusionOnb,
            "parseval" => InstanceKind::Parseval,
            "dual_pair" | "dual" => InstanceKind::DualPair,
            "perturbation_pair" | "perturbation" => InstanceKind::PerturbationPair(theta.unwrap_or(0.0)),
            other => return Err(Error::InvalidSpec(format!("unknown kind '{other}'"))),
        };
        if theta.is_some() && !matches!(kind, InstanceKind::PerturbationPair(_)) {
            return Err(Error::InvalidSpec("theta only applies to perturbation_pair".into()));
        }
        let seed = args.get_parsed("seed")?.unwrap_or(0);
        let ambient_dim = args
            .get_parsed("n")?
            .ok_or_else(|| Error::InvalidSpec("missing n=".into()))?;
        let subspace_dims = args
            .get("dims")
            .ok_or_else(|| Error::InvalidSpec("missing dims=".into()))?
            .iter()
            .map(|d| d.parse().map_err(|_| Error::InvalidSpec(format!("bad dimension '{d}'"))))
            .collect::<Result<Vec<usize>>>()?;
        let weight_law = match args.get("weights") {
            None => WeightLaw::Unit,
            Some([law]) => law.parse()?,
            Some(_) => return Err(Error::InvalidSpec("weights takes a single law".into())),
        };
        let spec = InstanceSpec {
            seed,
            ambient_dim,
            subspace_dims,
            weight_law,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.subspace_dims.iter().map(|d| d.to_string()).collect();
        write!(
            f,
            "{}:seed={},n={},dims={},weights={}",
            self.kind.name(),
            self.seed,
            self.ambient_dim,
            dims.join(","),
            self.weight_law
        )?;
        if let InstanceKind::PerturbationPair(theta) = self.kind {
            write!(f, ",theta={theta:?}")?;
        }
        Ok(())
    }
}
