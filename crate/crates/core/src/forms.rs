//! Products of minors: the unsymmetrized forms `F` whose symmetrizations are
//! highest weight vectors of `S_{π_1}A_1 ⊗ … ⊗ S_{π_k}A_k` inside
//! `S^d(A_1 ⊗ … ⊗ A_k)*`.
//!
//! Slots and covector indices are 0-based in memory and 1-based in JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schur::label_key;
use crate::symgroup::Partition;

/// `(α_1 ∧ … ∧ α_s)(a_{slots[0]}, …, a_{slots[s-1]})`: the determinant of
/// the `s × s` matrix whose `(i, j)` entry is coordinate `covectors[i]` of
/// the vector in slot `slots[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinorGroup {
    pub covectors: Vec<usize>,
    pub slots: Vec<usize>,
}

impl MinorGroup {
    pub fn leading(slots: Vec<usize>) -> Self {
        Self {
            covectors: (0..slots.len()).collect(),
            slots,
        }
    }

    pub fn size(&self) -> usize {
        self.slots.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorProductForm {
    degree: usize,
    dims: Vec<usize>,
    partitions: Vec<Partition>,
    factors: Vec<Vec<MinorGroup>>,
}

impl MinorProductForm {
    pub fn new(dims: Vec<usize>, partitions: Vec<Partition>, factors: Vec<Vec<MinorGroup>>) -> Result<Self> {
        let k = dims.len();
        if partitions.len() != k || factors.len() != k {
            return Err(Error::Argument(format!(
                "form needs {k} partitions and factor specs, got {} and {}",
                partitions.len(),
                factors.len()
            )));
        }
        let d = partitions[0].size();
        for (i, (p, groups)) in partitions.iter().zip(&factors).enumerate() {
            if p.size() != d {
                return Err(Error::Argument("partitions of different sizes".into()));
            }
            if p.len() > dims[i] {
                return Err(Error::Argument(format!(
                    "partition {p} longer than factor dimension {}",
                    dims[i]
                )));
            }
            let mut seen = vec![false; d];
            for g in groups {
                if g.covectors != (0..g.size()).collect::<Vec<_>>() {
                    return Err(Error::Argument(format!(
                        "factor {i}: covectors of a size-{} group must be the leading ones",
                        g.size()
                    )));
                }
                for &s in &g.slots {
                    if s >= d || seen[s] {
                        return Err(Error::Argument(format!(
                            "factor {i}: slot {} repeated or out of range",
                            s + 1
                        )));
                    }
                    seen[s] = true;
                }
            }
            if seen.iter().any(|&x| !x) {
                return Err(Error::Argument(format!("factor {i}: not every slot is covered")));
            }
            let mut sizes: Vec<u32> = groups.iter().map(|g| g.size() as u32).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            if sizes != p.conjugate().parts() {
                return Err(Error::Argument(format!(
                    "factor {i}: group sizes {sizes:?} do not realize the columns of {p}"
                )));
            }
        }
        Ok(Self {
            degree: d,
            dims,
            partitions,
            factors,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn factors(&self) -> &[Vec<MinorGroup>] {
        &self.factors
    }

    pub fn label_key(&self) -> String {
        label_key(&self.partitions)
    }

    /// Same form evaluated in smaller (or larger) factor dimensions.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.partitions.clone(), self.factors.clone())
    }

    /// All groups of all factors as `(factor, group)` pairs.
    pub fn groups(&self) -> impl Iterator<Item = (usize, &MinorGroup)> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(f, gs)| gs.iter().map(move |g| (f, g)))
    }
}

/// Algorithm 2's `F`: factor `i` realizes `F_{A_i}` on the slots
/// `τ_i(1), …, τ_i(d)`. `F_A` consumes positions left to right:
/// `p_1 − p_2` single covectors, then `p_2 − p_3` two-fold wedges, and so on.
/// Each `taus[i]` is a 0-based permutation with `taus[i][j] = τ_i(j)`.
pub fn build_form(partitions: &[Partition], taus: &[Vec<usize>], dims: &[usize]) -> Result<MinorProductForm> {
    let k = partitions.len();
    if taus.len() != k || dims.len() != k {
        return Err(Error::Argument("partitions, taus and dims differ in length".into()));
    }
    let d = partitions[0].size();
    let mut factors = Vec::with_capacity(k);
    for (i, (p, tau)) in partitions.iter().zip(taus).enumerate() {
        if p.len() > dims[i] {
            return Err(Error::Argument(format!(
                "partition {p} has length {} > dim {}",
                p.len(),
                dims[i]
            )));
        }
        check_permutation(tau, d)?;
        let parts = p.parts();
        let mut groups = Vec::new();
        let mut pos = 0;
        for s in 1..=parts.len() {
            let next = parts.get(s).copied().unwrap_or(0);
            for _ in 0..(parts[s - 1] - next) {
                groups.push(MinorGroup::leading(tau[pos..pos + s].to_vec()));
                pos += s;
            }
        }
        factors.push(groups);
    }
    MinorProductForm::new(dims.to_vec(), partitions.to_vec(), factors)
}

pub fn check_permutation(tau: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if tau.len() != d {
        return Err(Error::Argument(format!(
            "permutation of length {} for degree {d}",
            tau.len()
        )));
    }
    for &t in tau {
        if t >= d || seen[t] {
            return Err(Error::Argument(format!("{tau:?} is not a permutation")));
        }
        seen[t] = true;
    }
    Ok(())
}

/// Vertices are slots; `i ~ j` iff no minor group of any factor contains
/// both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotGraph {
    pub n: usize,
    adj: Vec<Vec<bool>>,
}

impl SlotGraph {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    /// Edges `(i, j)` with `i < j`, 0-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn triangle_free(&self) -> bool {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.adj[i][j] {
                    continue;
                }
                if (j + 1..self.n).any(|l| self.adj[i][l] && self.adj[j][l]) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn slot_graph(form: &MinorProductForm) -> SlotGraph {
    let n = form.degree();
    let mut adj = vec![vec![true; n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        row[i] = false;
    }
    for (_, g) in form.groups() {
        for &a in &g.slots {
            for &b in &g.slots {
                adj[a][b] = false;
            }
        }
    }
    SlotGraph { n, adj }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub covectors: Vec<usize>,
    pub slots: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormJson {
    pub degree: usize,
    pub dims: Vec<usize>,
    pub partitions: Vec<Partition>,
    pub factors: Vec<Vec<GroupJson>>,
}

impl From<&MinorProductForm> for FormJson {
    fn from(f: &MinorProductForm) -> Self {
        FormJson {
            degree: f.degree,
            dims: f.dims.clone(),
            partitions: f.partitions.clone(),
            factors: f
                .factors
                .iter()
                .map(|gs| {
                    gs.iter()
                        .map(|g| GroupJson {
                            covectors: g.covectors.iter().map(|c| c + 1).collect(),
                            slots: g.slots.iter().map(|s| s + 1).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<FormJson> for MinorProductForm {
    type Error = Error;

    fn try_from(j: FormJson) -> Result<Self> {
        let dec = |v: Vec<usize>| -> Result<Vec<usize>> {
            v.into_iter()
                .map(|x| {
                    x.checked_sub(1)
                        .ok_or_else(|| Error::Argument("indices in form files are 1-based".into()))
                })
                .collect()
        };
        let factors = j
            .factors
            .into_iter()
            .map(|gs| {
                gs.into_iter()
                    .map(|g| {
                        Ok(MinorGroup {
                            covectors: dec(g.covectors)?,
                            slots: dec(g.slots)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let form = MinorProductForm::new(j.dims, j.partitions, factors)?;
        if form.degree != j.degree {
            return Err(Error::Argument(format!(
                "declared degree {} but partitions have size {}",
                j.degree, form.degree
            )));
        }
        Ok(form)
    }
}

// ---------------------------------------------------------------------------
// Catalog

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub label: String,
    pub dims: Vec<usize>,
    pub description: &'static str,
}

pub const CATALOG_NAMES: [&str; 8] = [
    "ex-211-211-211",
    "ex-211-211-211-identity",
    "deg6-222",
    "deg9-333",
    "ex-321-321-3111",
    "deg8-5111-2222-2222",
    "deg8-3311-2222-2222",
    "deg12-3333",
];

/// `(covector count, 1-based slots)` shorthand used by the tables below.
type Spec<'a> = &'a [(usize, &'a [usize])];

fn from_spec(dims: &[usize], parts: &[&str], spec: &[Spec]) -> MinorProductForm {
    let partitions: Vec<Partition> = parts.iter().map(|p| p.parse().unwrap()).collect();
    let factors = spec
        .iter()
        .map(|groups| {
            groups
                .iter()
                .map(|&(s, slots)| {
                    debug_assert_eq!(s, slots.len());
                    MinorGroup::leading(slots.iter().map(|x| x - 1).collect())
                })
                .collect()
        })
        .collect();
    MinorProductForm::new(dims.to_vec(), partitions, factors).expect("catalog form is well formed")
}

/// 1-based one-line permutation to the slot list `τ(1), …, τ(d)` it induces
/// under the position pattern `pattern` (1-based positions).
fn apply(tau: &[usize], positions: &[usize]) -> Vec<usize> {
    positions.iter().map(|&p| tau[p - 1]).collect()
}

fn ex_321_321_3111() -> Vec<MinorProductForm> {
    let taus: [[usize; 6]; 4] = [
        [3, 4, 5, 1, 2, 6],
        [3, 4, 5, 1, 2, 6],
        [3, 4, 5, 1, 2, 6],
        [3, 4, 6, 1, 2, 5],
    ];
    let mus: [[usize; 6]; 4] = [
        [1, 4, 5, 6, 2, 3],
        [2, 3, 5, 6, 1, 4],
        [2, 3, 4, 5, 1, 6],
        [2, 3, 4, 5, 1, 6],
    ];
    taus.iter()
        .zip(&mus)
        .map(|(tau, mu)| {
            let b3 = apply(tau, &[1, 2, 3]);
            let b2 = apply(tau, &[4, 5]);
            let b1 = apply(tau, &[6]);
            let c4 = apply(mu, &[1, 2, 3, 4]);
            let c1a = apply(mu, &[5]);
            let c1b = apply(mu, &[6]);
            from_spec(
                &[3, 3, 4],
                &["321", "321", "3111"],
                &[
                    &[(3, &[1, 2, 3]), (2, &[5, 6]), (1, &[4])],
                    &[(3, &b3), (2, &b2), (1, &b1)],
                    &[(4, &c4), (1, &c1a), (1, &c1b)],
                ],
            )
        })
        .collect()
}

/// Forms of a named catalog entry.
pub fn catalog(name: &str) -> Result<(Vec<MinorProductForm>, CatalogEntry)> {
    let (forms, description): (Vec<MinorProductForm>, &'static str) = match name {
        "ex-211-211-211" => (
            vec![from_spec(
                &[3, 3, 3],
                &["211", "211", "211"],
                &[
                    &[(1, &[1]), (3, &[2, 3, 4])],
                    &[(1, &[2]), (3, &[1, 3, 4])],
                    &[(1, &[3]), (3, &[1, 2, 4])],
                ],
            )],
            "quartic in I(σ3) for 3x3x3 tensors",
        ),
        "ex-211-211-211-identity" => (
            vec![from_spec(
                &[3, 3, 3],
                &["211", "211", "211"],
                &[
                    &[(1, &[1]), (3, &[2, 3, 4])],
                    &[(1, &[1]), (3, &[2, 3, 4])],
                    &[(1, &[1]), (3, &[2, 3, 4])],
                ],
            )],
            "all permutations trivial; symmetrizes to zero",
        ),
        "deg6-222" => (
            vec![from_spec(
                &[3, 3, 3],
                &["222", "222", "222"],
                &[
                    &[(3, &[1, 2, 3]), (3, &[4, 5, 6])],
                    &[(3, &[1, 2, 4]), (3, &[3, 5, 6])],
                    &[(3, &[1, 3, 5]), (3, &[2, 4, 6])],
                ],
            )],
            "sextic of S222^3; does not vanish on σ4 of 3x3x3",
        ),
        "deg9-333" => (
            vec![from_spec(
                &[3, 3, 3],
                &["333", "333", "333"],
                &[
                    &[(3, &[1, 2, 3]), (3, &[4, 5, 6]), (3, &[7, 8, 9])],
                    &[(3, &[2, 3, 4]), (3, &[5, 6, 7]), (3, &[1, 8, 9])],
                    &[(3, &[3, 4, 5]), (3, &[6, 7, 8]), (3, &[1, 2, 9])],
                ],
            )],
            "degree-9 equation of the hypersurface σ4 of 3x3x3",
        ),
        "ex-321-321-3111" => (
            ex_321_321_3111(),
            "basis of the four highest weight vectors of S321 S321 S3111",
        ),
        "deg8-5111-2222-2222" => (
            vec![from_spec(
                &[4, 4, 4],
                &["5111", "2222", "2222"],
                &[
                    &[(1, &[1]), (1, &[2]), (1, &[5]), (1, &[6]), (4, &[3, 4, 7, 8])],
                    &[(4, &[1, 2, 3, 8]), (4, &[4, 5, 6, 7])],
                    &[(4, &[1, 2, 3, 4]), (4, &[5, 6, 7, 8])],
                ],
            )],
            "octic vanishing on σ5 of 4x4x4",
        ),
        "deg8-3311-2222-2222" => (
            vec![from_spec(
                &[4, 4, 4],
                &["3311", "2222", "2222"],
                &[
                    &[(2, &[1, 3]), (2, &[5, 7]), (4, &[2, 4, 6, 8])],
                    &[(4, &[1, 2, 5, 6]), (4, &[3, 4, 7, 8])],
                    &[(4, &[1, 2, 3, 4]), (4, &[5, 6, 7, 8])],
                ],
            )],
            "octic vanishing on σ5 of 4x4x4",
        ),
        "deg12-3333" => (
            vec![from_spec(
                &[4, 4, 4],
                &["3333", "3333", "3333"],
                &[
                    &[(4, &[1, 2, 3, 4]), (4, &[5, 6, 7, 8]), (4, &[9, 10, 11, 12])],
                    &[(4, &[1, 2, 5, 6]), (4, &[3, 7, 9, 10]), (4, &[4, 8, 11, 12])],
                    &[(4, &[1, 7, 9, 12]), (4, &[3, 5, 8, 10]), (4, &[2, 4, 6, 11])],
                ],
            )],
            "degree-12 form of S3333^3; not in the ideal of σ6 of 4x4x4",
        ),
        other => return Err(Error::Lookup(format!("no catalog form named {other:?}"))),
    };
    let entry = CatalogEntry {
        name: CATALOG_NAMES.iter().find(|n| **n == name).copied().unwrap(),
        label: forms[0].label_key(),
        dims: forms[0].dims().to_vec(),
        description,
    };
    Ok((forms, entry))
}
