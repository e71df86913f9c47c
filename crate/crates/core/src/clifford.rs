//! Two-qubit Clifford conjugation actions.
//!
//! An action is stored as the signed images of the four symplectic
//! generators `X1, Z1, X2, Z2`. The image of an arbitrary Pauli follows by
//! multiplying generator images, so phases are tracked exactly.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::pauli::{coord_bit, pair_to_vec, symplectic_product, vec_to_pair, PauliSymbol, SignedPauli};
use crate::permutation::PairPermutation;

/// Conjugation action `P ↦ C P C†` on the signed two-qubit Pauli group.
///
/// `symplectic[c]` is the packed `(x1, z1, x2, z2)` image of generator `e_c`
/// (column `c` of the symplectic matrix). Bit `3 - c` of `signs` is set when
/// that image carries a minus sign relative to its Hermitian representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CliffordElement {
    pub symplectic: [u8; 4],
    pub signs: u8,
}

impl CliffordElement {
    pub fn identity() -> Self {
        CliffordElement {
            symplectic: [coord_bit(0), coord_bit(1), coord_bit(2), coord_bit(3)],
            signs: 0,
        }
    }

    /// Builds an element from the signed images of `X1, Z1, X2, Z2`.
    /// Returns `None` if the images are not Hermitian or break the commutation relations.
    pub fn from_images(images: [SignedPauli; 4]) -> Option<Self> {
        let mut symplectic = [0u8; 4];
        let mut signs = 0u8;
        for (c, img) in images.iter().enumerate() {
            symplectic[c] = img.vec & 0xF;
            if img.hermitian_sign()? {
                signs |= coord_bit(c);
            }
        }
        let el = CliffordElement { symplectic, signs };
        el.is_symplectic().then_some(el)
    }

    /// Single-qubit action on `qubit` (0 or 1) given the images of `X` and `Z`,
    /// each as (symbol, negative sign).
    pub fn local(qubit: usize, x_img: (PauliSymbol, bool), z_img: (PauliSymbol, bool)) -> Option<Self> {
        assert!(qubit < 2);
        let place = |s: PauliSymbol| {
            if qubit == 0 {
                pair_to_vec((s, PauliSymbol::I))
            } else {
                pair_to_vec((PauliSymbol::I, s))
            }
        };
        let signed = |(s, neg): (PauliSymbol, bool)| {
            let p = SignedPauli::hermitian(place(s));
            if neg {
                p.negated()
            } else {
                p
            }
        };
        let mut images = [
            SignedPauli::hermitian(coord_bit(0)),
            SignedPauli::hermitian(coord_bit(1)),
            SignedPauli::hermitian(coord_bit(2)),
            SignedPauli::hermitian(coord_bit(3)),
        ];
        images[2 * qubit] = signed(x_img);
        images[2 * qubit + 1] = signed(z_img);
        Self::from_images(images)
    }

    /// `MᵀΩM = Ω` over GF(2).
    pub fn is_symplectic(&self) -> bool {
        (0..4).all(|i| {
            (0..4).all(|j| {
                let omega = u8::from(i / 2 == j / 2 && i != j);
                symplectic_product(self.symplectic[i], self.symplectic[j]) == omega
            })
        })
    }

    #[inline]
    fn generator_image(&self, c: usize) -> SignedPauli {
        let p = SignedPauli::hermitian(self.symplectic[c]);
        if self.signs & coord_bit(c) != 0 {
            p.negated()
        } else {
            p
        }
    }

    /// Image of an arbitrary (possibly non-Hermitian) signed Pauli.
    pub fn conjugate_signed(&self, p: SignedPauli) -> SignedPauli {
        // p = i^phase X1^x1 Z1^z1 X2^x2 Z2^z2 and the generator order matches.
        let mut acc = SignedPauli {
            vec: 0,
            phase: p.phase & 3,
        };
        for c in 0..4 {
            if p.vec & coord_bit(c) != 0 {
                acc = acc.mul(self.generator_image(c));
            }
        }
        acc
    }

    /// Image of the Hermitian Pauli `σ_u ⊗ σ_v`, with `true` meaning a minus sign.
    pub fn conjugate(&self, p: (PauliSymbol, PauliSymbol)) -> ((PauliSymbol, PauliSymbol), bool) {
        let img = self.conjugate_signed(SignedPauli::hermitian(pair_to_vec(p)));
        let neg = img
            .hermitian_sign()
            .expect("Clifford image of a Hermitian Pauli is Hermitian");
        (vec_to_pair(img.vec), neg)
    }

    /// `self ∘ other`: conjugate by `other` first, then by `self`.
    pub fn compose(&self, other: &CliffordElement) -> CliffordElement {
        let mut symplectic = [0u8; 4];
        let mut signs = 0u8;
        for c in 0..4 {
            let img = self.conjugate_signed(other.generator_image(c));
            symplectic[c] = img.vec;
            if img.hermitian_sign().expect("Hermitian image") {
                signs |= coord_bit(c);
            }
        }
        CliffordElement { symplectic, signs }
    }

    /// Forgets signs.
    pub fn gamma(&self) -> PairPermutation {
        PairPermutation::from_fn(|u, v| {
            let src = pair_to_vec((u, v));
            let mut dst = 0u8;
            for c in 0..4 {
                if src & coord_bit(c) != 0 {
                    dst ^= self.symplectic[c];
                }
            }
            vec_to_pair(dst)
        })
    }

    /// Flat 8-bit view used for tables: four image nibbles then signs.
    pub fn to_bits(&self) -> [u8; 5] {
        [
            self.symplectic[0],
            self.symplectic[1],
            self.symplectic[2],
            self.symplectic[3],
            self.signs,
        ]
    }
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["X1", "Z1", "X2", "Z2"];
        let mut parts = Vec::with_capacity(4);
        for (c, name) in names.iter().enumerate() {
            let (u, v) = vec_to_pair(self.symplectic[c]);
            let sign = if self.signs & coord_bit(c) != 0 { "-" } else { "+" };
            parts.push(format!("{name}->{sign}{u}{v}"));
        }
        write!(f, "Clifford[{}]", parts.join(" "))
    }
}

/// `Γ` of a Clifford action.
pub fn gamma_of(c: &CliffordElement) -> PairPermutation {
    c.gamma()
}

/// See [`CliffordElement::conjugate`].
pub fn conjugate(c: &CliffordElement, p: (PauliSymbol, PauliSymbol)) -> ((PauliSymbol, PauliSymbol), bool) {
    c.conjugate(p)
}

pub mod generators {
    //! Standard generators and the square-root gates.

    use super::*;

    fn single(qubit: usize, x: (PauliSymbol, bool), z: (PauliSymbol, bool)) -> CliffordElement {
        CliffordElement::local(qubit, x, z).expect("valid single-qubit action")
    }

    pub fn hadamard(qubit: usize) -> CliffordElement {
        single(qubit, (PauliSymbol::Z, false), (PauliSymbol::X, false))
    }

    /// `S = diag(1, i)`: `X ↦ Y`.
    pub fn phase(qubit: usize) -> CliffordElement {
        single(qubit, (PauliSymbol::Y, false), (PauliSymbol::Z, false))
    }

    /// `√X ∝ 1 + iX`: `Z ↦ Y`.
    pub fn sqrt_x(qubit: usize) -> CliffordElement {
        single(qubit, (PauliSymbol::X, false), (PauliSymbol::Y, false))
    }

    /// `√Y ∝ 1 + iY`: `X ↦ Z`, `Z ↦ -X`.
    pub fn sqrt_y(qubit: usize) -> CliffordElement {
        single(qubit, (PauliSymbol::Z, false), (PauliSymbol::X, true))
    }

    /// `√Z ∝ 1 + iZ`: `X ↦ -Y`.
    pub fn sqrt_z(qubit: usize) -> CliffordElement {
        single(qubit, (PauliSymbol::Y, true), (PauliSymbol::Z, false))
    }

    fn two(images: [(PauliSymbol, PauliSymbol); 4]) -> CliffordElement {
        CliffordElement::from_images(images.map(|p| SignedPauli::hermitian(pair_to_vec(p))))
            .expect("valid two-qubit action")
    }

    /// Control on qubit 1, target qubit 2.
    pub fn cnot12() -> CliffordElement {
        use PauliSymbol as P;
        two([(P::X, P::X), (P::Z, P::I), (P::I, P::X), (P::Z, P::Z)])
    }

    /// Control on qubit 2, target qubit 1.
    pub fn cnot21() -> CliffordElement {
        use PauliSymbol as P;
        two([(P::X, P::I), (P::Z, P::Z), (P::X, P::X), (P::I, P::Z)])
    }

    pub fn swap() -> CliffordElement {
        use PauliSymbol as P;
        two([(P::I, P::X), (P::I, P::Z), (P::X, P::I), (P::Z, P::I)])
    }
}

fn closure(gens: &[CliffordElement]) -> Vec<CliffordElement> {
    let id = CliffordElement::identity();
    let mut seen: HashSet<CliffordElement> = HashSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(el) = queue.pop_front() {
        for g in gens {
            let next = g.compose(&el);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    let mut all: Vec<_> = seen.into_iter().collect();
    all.sort_unstable();
    all
}

/// All 11520 two-qubit actions in canonical order.
pub fn enumerate_clifford_actions() -> Vec<CliffordElement> {
    use generators::*;
    closure(&[hadamard(0), phase(0), hadamard(1), phase(1), cnot12()])
}

/// The 24 single-qubit actions on qubit `qubit`, embedded in the two-qubit group.
pub fn enumerate_single_qubit_actions(qubit: usize) -> Vec<CliffordElement> {
    use generators::*;
    closure(&[hadamard(qubit), phase(qubit)])
}

/// The 576 local actions `C₁ ⊗ C₂`.
pub fn local_group() -> Vec<CliffordElement> {
    let q0 = enumerate_single_qubit_actions(0);
    let q1 = enumerate_single_qubit_actions(1);
    let mut all: Vec<_> = q0
        .iter()
        .flat_map(|a| q1.iter().map(move |b| a.compose(b)))
        .collect();
    all.sort_unstable();
    all
}

/// A named channel-combining gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    Identity,
    Swap,
    /// `L_{i,j} = (C₁ ⊗ C₂)·CNOT₂₁`, indices in `1..=3`.
    L(u8, u8),
    /// `R_{i,j} = S·L_{i,j}`.
    R(u8, u8),
}

impl Gate {
    pub fn element(self) -> CliffordElement {
        use generators::*;
        match self {
            Gate::Identity => CliffordElement::identity(),
            Gate::Swap => swap(),
            Gate::L(i, j) => {
                let c1 = match i {
                    1 => CliffordElement::identity(),
                    2 => sqrt_z(0),
                    3 => sqrt_y(0),
                    _ => unreachable!("L index out of range"),
                };
                let c2 = match j {
                    1 => CliffordElement::identity(),
                    2 => sqrt_x(1),
                    3 => sqrt_y(1),
                    _ => unreachable!("L index out of range"),
                };
                c1.compose(&c2).compose(&cnot21())
            }
            Gate::R(i, j) => swap().compose(&Gate::L(i, j).element()),
        }
    }

    pub fn gamma(self) -> PairPermutation {
        self.element().gamma()
    }

    pub fn name(self) -> String {
        match self {
            Gate::Identity => "I".to_string(),
            Gate::Swap => "S".to_string(),
            Gate::L(i, j) => format!("L{i}{j}"),
            Gate::R(i, j) => format!("R{i}{j}"),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Gate {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoreError::UnknownGate(s.to_string());
        match s {
            "I" => return Ok(Gate::Identity),
            "S" => return Ok(Gate::Swap),
            _ => {}
        }
        let b = s.as_bytes();
        if b.len() != 3 {
            return Err(bad());
        }
        let digit = |c: u8| (b'1'..=b'3').contains(&c).then(|| c - b'0');
        let (i, j) = (digit(b[1]).ok_or_else(bad)?, digit(b[2]).ok_or_else(bad)?);
        match b[0] {
            b'L' => Ok(Gate::L(i, j)),
            b'R' => Ok(Gate::R(i, j)),
            _ => Err(bad()),
        }
    }
}

/// Gate families used for randomized polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateSet {
    L,
    R,
    S3,
    All20,
}

impl GateSet {
    pub fn gates(self) -> Vec<Gate> {
        let grid = |f: fn(u8, u8) -> Gate| -> Vec<Gate> {
            (1..=3).flat_map(|i| (1..=3).map(move |j| f(i, j))).collect()
        };
        match self {
            GateSet::L => grid(Gate::L),
            GateSet::R => grid(Gate::R),
            GateSet::S3 => vec![Gate::L(1, 3), Gate::L(2, 2), Gate::L(3, 1)],
            GateSet::All20 => {
                let mut v = vec![Gate::Identity, Gate::Swap];
                v.extend(grid(Gate::L));
                v.extend(grid(Gate::R));
                v
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateSet::L => "L",
            GateSet::R => "R",
            GateSet::S3 => "S3",
            GateSet::All20 => "all20",
        }
    }
}

impl FromStr for GateSet {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(GateSet::L),
            "R" => Ok(GateSet::R),
            "S3" => Ok(GateSet::S3),
            "all20" => Ok(GateSet::All20),
            _ => Err(CoreError::UnknownGateSet(s.to_string())),
        }
    }
}

/// Built-in elements of `𝓛`, `𝓡` and the three-gate subset.
pub struct BuiltinSets {
    pub l: Vec<CliffordElement>,
    pub r: Vec<CliffordElement>,
    pub s3: Vec<CliffordElement>,
}

pub fn builtin_sets() -> BuiltinSets {
    let els = |set: GateSet| set.gates().into_iter().map(Gate::element).collect();
    BuiltinSets {
        l: els(GateSet::L),
        r: els(GateSet::R),
        s3: els(GateSet::S3),
    }
}

/// Partition of the full group into left cosets of the local group.
#[derive(Clone, Debug)]
pub struct CosetClassification {
    /// Cells in canonical order (by smallest member); members sorted.
    pub classes: Vec<Vec<CliffordElement>>,
    /// The built-in gate lying in each cell.
    pub representatives: Vec<CliffordElement>,
    pub representative_gates: Vec<Gate>,
    class_of: HashMap<CliffordElement, usize>,
}

impl CosetClassification {
    pub fn class_of(&self, c: &CliffordElement) -> Option<usize> {
        self.class_of.get(c).copied()
    }
}

/// Splits `all` into cells `{C'·(C₁⊗C₂)}` and matches each with a built-in gate.
pub fn classify_cosets(all: &[CliffordElement]) -> Result<CosetClassification> {
    let local = local_group();
    let mut class_of: HashMap<CliffordElement, usize> = HashMap::with_capacity(all.len());
    let mut classes: Vec<Vec<CliffordElement>> = Vec::new();
    // `all` is assumed canonical, so cells come out ordered by smallest member.
    let mut sorted = all.to_vec();
    sorted.sort_unstable();
    for el in &sorted {
        if class_of.contains_key(el) {
            continue;
        }
        let id = classes.len();
        let mut cell: Vec<CliffordElement> = local.iter().map(|k| el.compose(k)).collect();
        cell.sort_unstable();
        cell.dedup();
        for m in &cell {
            class_of.insert(*m, id);
        }
        classes.push(cell);
    }
    if class_of.len() != sorted.len() {
        return Err(CoreError::Transversal(
            "coset members fall outside the supplied enumeration".into(),
        ));
    }

    let mut rep: Vec<Option<Gate>> = vec![None; classes.len()];
    for g in GateSet::All20.gates() {
        let id = *class_of
            .get(&g.element())
            .ok_or_else(|| CoreError::Transversal(format!("{g} not in enumeration")))?;
        if let Some(prev) = rep[id] {
            return Err(CoreError::Transversal(format!("{prev} and {g} share class {id}")));
        }
        rep[id] = Some(g);
    }
    let representative_gates: Vec<Gate> = rep
        .into_iter()
        .enumerate()
        .map(|(id, g)| g.ok_or_else(|| CoreError::Transversal(format!("class {id} has no built-in gate"))))
        .collect::<Result<_>>()?;
    Ok(CosetClassification {
        classes,
        representatives: representative_gates.iter().map(|g| g.element()).collect(),
        representative_gates,
        class_of,
    })
}
