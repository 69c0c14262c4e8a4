//! Hamiltonians as sums of Pauli strings, applied matrix-free.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::{BondType, Lattice, LatticeKind};
use crate::state::{StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'x' | 'X' => Some(Axis::X),
            'y' | 'Y' => Some(Axis::Y),
            'z' | 'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Real coefficient times a tensor product of single-site Paulis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coefficient: f64,
    /// `(site, axis)` sorted by site, each site at most once.
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn new(coefficient: f64, factors: &[(usize, Axis)]) -> Result<PauliString> {
        if !coefficient.is_finite() {
            return Err(Error::Config(format!("non-finite coefficient {coefficient}")));
        }
        let mut f = factors.to_vec();
        f.sort_by_key(|&(s, _)| s);
        if f.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("Pauli string repeats a site".into()));
        }
        Ok(PauliString { coefficient, factors: f })
    }

    /// Unit-coefficient single-site Pauli.
    pub fn single(site: usize, axis: Axis) -> PauliString {
        PauliString { coefficient: 1.0, factors: vec![(site, axis)] }
    }

    pub fn pair(coefficient: f64, a: (usize, Axis), b: (usize, Axis)) -> PauliString {
        PauliString::new(coefficient, &[a, b]).expect("pair on distinct sites")
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors.iter().find(|&&(s, _)| s == site).map(|&(_, a)| a)
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|&(s, _)| s)
    }

    pub fn scaled(&self, s: f64) -> PauliString {
        PauliString { coefficient: self.coefficient * s, factors: self.factors.clone() }
    }

    fn masks(&self) -> (usize, usize, u32) {
        let (mut flip, mut phase, mut ny) = (0usize, 0usize, 0u32);
        for &(s, a) in &self.factors {
            let bit = 1usize << s;
            match a {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
                Axis::Z => phase |= bit,
            }
        }
        (flip, phase, ny)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.coefficient)?;
        for (s, a) in &self.factors {
            write!(f, " {a}{s}")?;
        }
        Ok(())
    }
}

fn i_pow(n: u32) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Pauli sum compiled for repeated matrix-free application.
///
/// Terms sharing a bit-flip pattern are grouped, so each output amplitude is
/// gathered from one input amplitude per group; the gather form makes the
/// parallel path race-free.
#[derive(Debug, Clone)]
pub struct PauliOperator {
    n_sites: usize,
    groups: Vec<FlipGroup>,
    real: bool,
}

#[derive(Debug, Clone)]
struct FlipGroup {
    flip: usize,
    /// `(coefficient * i^ny, phase mask)`.
    terms: Vec<(C64, usize)>,
}

impl PauliOperator {
    pub fn new(n_sites: usize, strings: &[PauliString]) -> PauliOperator {
        let mut by_flip: HashMap<usize, usize> = HashMap::new();
        let mut groups: Vec<FlipGroup> = Vec::new();
        let mut real = true;
        for p in strings {
            let (flip, phase, ny) = p.masks();
            real &= ny % 2 == 0;
            let c = i_pow(ny) * p.coefficient;
            let g = *by_flip.entry(flip).or_insert_with(|| {
                groups.push(FlipGroup { flip, terms: Vec::new() });
                groups.len() - 1
            });
            groups[g].terms.push((c, phase));
        }
        PauliOperator { n_sites, groups, real }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// True when every matrix element in the computational basis is real.
    pub fn is_real(&self) -> bool {
        self.real
    }

    #[inline]
    fn element(&self, j: usize, psi: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for g in &self.groups {
            let b = j ^ g.flip;
            let mut s = C64::new(0.0, 0.0);
            for &(c, phase) in &g.terms {
                if (b & phase).count_ones() % 2 == 0 {
                    s += c;
                } else {
                    s -= c;
                }
            }
            acc += s * psi[b];
        }
        acc
    }

    /// `out = H psi`.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64], exec: Exec) -> Result<()> {
        let dim = self.dim();
        if psi.len() != dim {
            return Err(Error::Dimension { expected: dim, got: psi.len() });
        }
        if out.len() != dim {
            return Err(Error::Dimension { expected: dim, got: out.len() });
        }
        exec.fill(out, |j| self.element(j, psi));
        Ok(())
    }

    pub fn apply_vec(&self, psi: &[C64], exec: Exec) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply_into(psi, &mut out, exec)?;
        Ok(out)
    }

    /// `<psi|H|psi>` for a normalized `psi`.
    pub fn expectation(&self, psi: &[C64], exec: Exec) -> Result<C64> {
        let dim = self.dim();
        if psi.len() != dim {
            return Err(Error::Dimension { expected: dim, got: psi.len() });
        }
        Ok(exec.fold_range(
            dim,
            || C64::new(0.0, 0.0),
            |acc, j| acc + psi[j].conj() * self.element(j, psi),
            |a, b| a + b,
        ))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for g in &self.groups {
            for b in 0..dim {
                let row = b ^ g.flip;
                for &(c, phase) in &g.terms {
                    let v = if (b & phase).count_ones() % 2 == 0 { c } else { -c };
                    m[(row, b)] += v;
                }
            }
        }
        m
    }

    /// Real part of the dense matrix; exact when [`is_real`](Self::is_real).
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        self.to_dense().map(|c| c.re)
    }
}

/// Model name plus its parameter record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLabel {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

/// A Hamiltonian as a list of Pauli strings.
///
/// `pinning` holds unit-strength symmetry-breaking selectors; the ground
/// state solver scales them by its pinning strength and adds them only when
/// its policy asks for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTerms {
    pub label: ModelLabel,
    pub n_sites: usize,
    pub terms: Vec<PauliString>,
    pub pinning: Vec<PauliString>,
    pub lattice: Lattice,
    /// Non-fatal notes (for instance negative bond strengths).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn label(name: &str, params: &[(&str, f64)]) -> ModelLabel {
    ModelLabel {
        name: name.to_string(),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    }
}

fn check_finite(params: &[(&str, f64)]) -> Result<()> {
    for (k, v) in params {
        if !v.is_finite() {
            return Err(Error::Config(format!("parameter {k} is not finite")));
        }
    }
    Ok(())
}

impl ModelTerms {
    /// 1D transverse-field Ising chain: `-sum zz - h sum x`.
    pub fn tfim_1d(lattice: &Lattice, h: f64) -> Result<ModelTerms> {
        if lattice.kind != LatticeKind::Chain {
            return Err(Error::Mismatch("tfim-1d needs a chain".into()));
        }
        check_finite(&[("h", h)])?;
        let n = lattice.n_sites;
        let mut terms: Vec<_> = lattice
            .bonds
            .iter()
            .map(|b| PauliString::pair(-1.0, (b.i, Axis::Z), (b.j, Axis::Z)))
            .collect();
        terms.extend((0..n).map(|i| PauliString::single(i, Axis::X).scaled(-h)));
        terms.retain(|t| t.coefficient != 0.0);
        Ok(ModelTerms {
            label: label("tfim-1d", &[("h", h)]),
            n_sites: n,
            terms,
            pinning: uniform_field(n, Axis::Z),
            lattice: lattice.clone(),
            warnings: Vec::new(),
        })
    }

    /// XZX cluster-Ising chain with open sums:
    /// `-g0 sum z_i - g1 sum x_i x_{i+1} - g2 sum x_i z_{i+1} x_{i+2}`.
    pub fn cluster_ising(lattice: &Lattice, g0: f64, g1: f64, g2: f64) -> Result<ModelTerms> {
        if lattice.kind != LatticeKind::Chain {
            return Err(Error::Mismatch("cluster-ising needs a chain".into()));
        }
        let n = lattice.n_sites;
        if n < 3 {
            return Err(Error::InvalidSize(format!("cluster-ising needs L >= 3, got {n}")));
        }
        check_finite(&[("g0", g0), ("g1", g1), ("g2", g2)])?;
        let mut terms = Vec::new();
        if g0 != 0.0 {
            terms.extend((0..n).map(|i| PauliString::single(i, Axis::Z).scaled(-g0)));
        }
        if g1 != 0.0 {
            terms.extend(
                lattice
                    .bonds
                    .iter()
                    .map(|b| PauliString::pair(-g1, (b.i, Axis::X), (b.j, Axis::X))),
            );
        }
        if g2 != 0.0 {
            let triples = if lattice.boundary == crate::lattice::Boundary::Periodic { n } else { n - 2 };
            for i in 0..triples {
                terms.push(PauliString::new(
                    -g2,
                    &[(i, Axis::X), ((i + 1) % n, Axis::Z), ((i + 2) % n, Axis::X)],
                )?);
            }
        }
        Ok(ModelTerms {
            label: label("cluster-ising", &[("g0", g0), ("g1", g1), ("g2", g2)]),
            n_sites: n,
            terms,
            pinning: uniform_field(n, Axis::X),
            lattice: lattice.clone(),
            warnings: Vec::new(),
        })
    }

    /// Bond-alternating XXZ chain. Bond `(i, i+1)` with 0-based `i` has
    /// strength `1 + (-1)^(i+1) delta`, i.e. the sign is taken from the
    /// 1-based position of its first site; the first bond is `1 - delta`.
    pub fn xxz_alternating(lattice: &Lattice, delta: f64, anisotropy: f64) -> Result<ModelTerms> {
        if lattice.kind != LatticeKind::Chain {
            return Err(Error::Mismatch("xxz-alternating needs a chain".into()));
        }
        check_finite(&[("delta", delta), ("Delta", anisotropy)])?;
        let n = lattice.n_sites;
        let mut warnings = Vec::new();
        if delta.abs() > 1.0 {
            warnings.push(format!("|delta| = {} > 1 gives negative bond strengths", delta.abs()));
        }
        let mut terms = Vec::with_capacity(3 * lattice.bonds.len());
        for b in &lattice.bonds {
            let strength = match b.kind {
                BondType::Even | BondType::Odd => alternating_strength(b.kind, delta),
                _ => return Err(Error::Mismatch("xxz-alternating needs parity-typed bonds".into())),
            };
            terms.push(PauliString::pair(strength, (b.i, Axis::X), (b.j, Axis::X)));
            terms.push(PauliString::pair(strength, (b.i, Axis::Y), (b.j, Axis::Y)));
            terms.push(PauliString::pair(strength * anisotropy, (b.i, Axis::Z), (b.j, Axis::Z)));
        }
        terms.retain(|t| t.coefficient != 0.0);
        let pinning = (0..n)
            .map(|i| PauliString::single(i, Axis::Z).scaled(if i % 2 == 0 { -1.0 } else { 1.0 }))
            .collect();
        Ok(ModelTerms {
            label: label("xxz-alternating", &[("delta", delta), ("Delta", anisotropy)]),
            n_sites: n,
            terms,
            pinning,
            lattice: lattice.clone(),
            warnings,
        })
    }

    /// 2D transverse-field Ising model on a square lattice.
    pub fn tfim_2d(lattice: &Lattice, h: f64) -> Result<ModelTerms> {
        if lattice.kind != LatticeKind::Square {
            return Err(Error::Mismatch(format!(
                "tfim-2d needs a square lattice, got {:?}",
                lattice.kind
            )));
        }
        let mut m = Self::tfim_like(lattice, h)?;
        m.label = label("tfim-2d", &[("h", h)]);
        Ok(m)
    }

    fn tfim_like(lattice: &Lattice, h: f64) -> Result<ModelTerms> {
        check_finite(&[("h", h)])?;
        let n = lattice.n_sites;
        let mut terms: Vec<_> = lattice
            .bonds
            .iter()
            .map(|b| PauliString::pair(-1.0, (b.i, Axis::Z), (b.j, Axis::Z)))
            .collect();
        terms.extend((0..n).map(|i| PauliString::single(i, Axis::X).scaled(-h)));
        terms.retain(|t| t.coefficient != 0.0);
        Ok(ModelTerms {
            label: label("tfim", &[("h", h)]),
            n_sites: n,
            terms,
            pinning: uniform_field(n, Axis::Z),
            lattice: lattice.clone(),
            warnings: Vec::new(),
        })
    }

    /// Kitaev honeycomb model: `-J_a sigma^a_i sigma^a_j` on every `a`-type bond.
    ///
    /// No pinning selector is attached; the ground-state degeneracies of this
    /// model are not tied to a local order parameter.
    pub fn kitaev(lattice: &Lattice, jx: f64, jy: f64, jz: f64) -> Result<ModelTerms> {
        if lattice.kind != LatticeKind::Honeycomb {
            return Err(Error::Mismatch(format!(
                "kitaev needs a honeycomb lattice, got {:?}",
                lattice.kind
            )));
        }
        check_finite(&[("Jx", jx), ("Jy", jy), ("Jz", jz)])?;
        let terms = lattice
            .bonds
            .iter()
            .filter(|b| bond_coupling(b.kind, jx, jy, jz) != 0.0)
            .map(|b| {
                let (axis, j) = match b.kind {
                    BondType::X => (Axis::X, jx),
                    BondType::Y => (Axis::Y, jy),
                    _ => (Axis::Z, jz),
                };
                PauliString::pair(-j, (b.i, axis), (b.j, axis))
            })
            .collect();
        Ok(ModelTerms {
            label: label("kitaev", &[("Jx", jx), ("Jy", jy), ("Jz", jz)]),
            n_sites: lattice.n_sites,
            terms,
            pinning: Vec::new(),
            lattice: lattice.clone(),
            warnings: Vec::new(),
        })
    }

    pub fn operator(&self) -> PauliOperator {
        PauliOperator::new(self.n_sites, &self.terms)
    }

    /// Hamiltonian plus the pinning strings scaled by `strength`.
    pub fn pinned_operator(&self, strength: f64) -> PauliOperator {
        let mut all = self.terms.clone();
        all.extend(self.pinning.iter().map(|p| p.scaled(strength)));
        PauliOperator::new(self.n_sites, &all)
    }

    /// `H psi` without materializing `H`.
    pub fn apply(&self, psi: &StateVector) -> Result<Vec<C64>> {
        if psi.n_sites() != self.n_sites {
            return Err(Error::Dimension { expected: 1 << self.n_sites, got: psi.dim() });
        }
        self.operator().apply_vec(psi.amplitudes(), Exec::default())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Strength `1 + (-1)^i delta` of a chain bond with 1-based parity `kind`.
pub fn alternating_strength(kind: BondType, delta: f64) -> f64 {
    match kind {
        BondType::Even => 1.0 + delta,
        _ => 1.0 - delta,
    }
}

fn bond_coupling(kind: BondType, jx: f64, jy: f64, jz: f64) -> f64 {
    match kind {
        BondType::X => jx,
        BondType::Y => jy,
        _ => jz,
    }
}

fn uniform_field(n: usize, axis: Axis) -> Vec<PauliString> {
    (0..n).map(|i| PauliString::single(i, axis).scaled(-1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    fn chain(n: usize) -> Lattice {
        Lattice::chain(n, Boundary::Open).unwrap()
    }

    #[test]
    fn term_counts() {
        assert_eq!(ModelTerms::tfim_1d(&chain(2), 0.0).unwrap().terms.len(), 1);
        assert_eq!(ModelTerms::tfim_1d(&chain(2), 1.0).unwrap().terms.len(), 3);
        assert_eq!(ModelTerms::tfim_1d(&chain(200), 1.0).unwrap().terms.len(), 399);
        assert_eq!(ModelTerms::cluster_ising(&chain(12), 0.0, 0.0, 4.0).unwrap().terms.len(), 10);
        assert_eq!(ModelTerms::xxz_alternating(&chain(200), 0.2, 2.5).unwrap().terms.len(), 3 * 199);
        let sq = Lattice::square(3, 3, Boundary::Open).unwrap();
        assert_eq!(ModelTerms::tfim_2d(&sq, 3.04).unwrap().terms.len(), 12 + 9);
        let hc = Lattice::honeycomb(2, 2, Boundary::Periodic).unwrap();
        let k = ModelTerms::kitaev(&hc, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_eq!(k.terms.len(), 12);
    }

    #[test]
    fn xxz_alternation_arithmetic() {
        let l = chain(4);
        let strengths: Vec<f64> = l.bonds.iter().map(|b| alternating_strength(b.kind, 1.0)).collect();
        assert_eq!(strengths, vec![0.0, 2.0, 0.0]);
        // Zero-strength bonds and the Delta = 0 zz terms drop out.
        let m = ModelTerms::xxz_alternating(&l, 1.0, 0.0).unwrap();
        assert_eq!(m.terms.len(), 2);
        assert!(m.terms.iter().all(|t| t.coefficient == 2.0 && t.factors()[0].0 == 1));
        let flagged = ModelTerms::xxz_alternating(&chain(4), 1.5, 1.0).unwrap();
        assert_eq!(flagged.warnings.len(), 1);
    }

    #[test]
    fn lattice_kind_mismatch() {
        let sq = Lattice::square(2, 2, Boundary::Open).unwrap();
        assert!(matches!(ModelTerms::kitaev(&sq, 1.0, 1.0, 1.0), Err(Error::Mismatch(_))));
        assert!(matches!(ModelTerms::tfim_2d(&chain(4), 1.0), Err(Error::Mismatch(_))));
        assert!(matches!(
            ModelTerms::cluster_ising(&chain(2), 1.0, 1.0, 1.0),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn pauli_string_rejects_repeated_site() {
        assert!(PauliString::new(1.0, &[(0, Axis::X), (0, Axis::Z)]).is_err());
        assert!(PauliString::new(f64::NAN, &[(0, Axis::X)]).is_err());
    }

    #[test]
    fn apply_simple_cases() {
        let m = ModelTerms::tfim_1d(&chain(2), 0.0).unwrap();
        let up = StateVector::basis(2, 0);
        let out = m.apply(&up).unwrap();
        assert_eq!(out[0], C64::new(-1.0, 0.0));
        assert!(out[1..].iter().all(|c| c.norm() == 0.0));

        let h = 0.7;
        let field = PauliOperator::new(1, &[PauliString::single(0, Axis::X).scaled(-h)]);
        let out = field.apply_vec(StateVector::basis(1, 0).amplitudes(), Exec::Sequential).unwrap();
        assert_eq!(out, vec![C64::new(0.0, 0.0), C64::new(-h, 0.0)]);

        // sigma^y |up> = i |down>
        let y = PauliOperator::new(1, &[PauliString::single(0, Axis::Y)]);
        let out = y.apply_vec(StateVector::basis(1, 0).amplitudes(), Exec::Sequential).unwrap();
        assert_eq!(out[1], C64::new(0.0, 1.0));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let m = ModelTerms::tfim_1d(&chain(3), 1.0).unwrap();
        assert!(matches!(m.apply(&StateVector::basis(2, 0)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn realness() {
        let hc = Lattice::honeycomb(1, 1, Boundary::Open).unwrap();
        assert!(ModelTerms::kitaev(&hc, 1.0, 1.0, 1.0).unwrap().operator().is_real());
        assert!(!PauliOperator::new(1, &[PauliString::single(0, Axis::Y)]).is_real());
    }
}
