//! `ker g / im f` for `A --f--> B --g--> C` with `g ∘ f = 0`.
//!
//! `B` is presented as `Z^n / R_B`. The kernel of `g` lifts to the lattice
//! `Z ⊆ Z^n` of vectors `x` with `G x ∈ im R_C`; the subgroup to quotient by
//! lifts to `N = im F + im R_B ⊆ Z`. A basis `W` of `Z` comes from the Smith
//! form of a generating set, `N` is written in `W`-coordinates, and a second
//! Smith form of that coordinate matrix yields the invariant factors of
//! `Z / N` together with the change of basis used to send elements of `B`
//! to class coordinates.

use num_integer::Integer as _;
use num_traits::{One, Zero};

use super::{smith_normal_form, FgAbGroup, GroupError, GroupHom, IntMatrix, Integer};

/// The group `ker g / im f` with enough data to name classes.
#[derive(Clone, Debug)]
pub struct Subquotient {
    group: FgAbGroup,
    /// Generator count of the ambient group `B`.
    ambient: FgAbGroup,
    /// First `r` rows of the left transform of the kernel lattice.
    coord_rows: IntMatrix,
    /// Full left transform, to test lattice membership.
    coord_full: IntMatrix,
    /// Diagonal of the kernel lattice basis.
    scale: Vec<Integer>,
    /// Change of basis on `W`-coordinates.
    class_basis: IntMatrix,
    /// Indices of `class_basis` rows that survive (factor != 1).
    kept: Vec<usize>,
    /// Representatives in `Z^n` of each generator of `group`.
    reps: Vec<Vec<Integer>>,
    /// Generators of `Z` and of `N`, as lifts in `Z^n`.
    kernel_gens: Vec<Vec<Integer>>,
    image_gens: Vec<Vec<Integer>>,
}

impl Subquotient {
    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn ambient(&self) -> &FgAbGroup {
        &self.ambient
    }

    /// Lifts in `Z^n` of the canonical generators of the subquotient.
    pub fn representatives(&self) -> &[Vec<Integer>] {
        &self.reps
    }

    fn in_kernel_lattice(&self, x: &[Integer]) -> bool {
        let y = self.coord_full.mul_vec(x);
        y.iter().enumerate().all(|(i, v)| match self.scale.get(i) {
            Some(d) => (v % d).is_zero(),
            None => v.is_zero(),
        })
    }

    /// Whether `x` (a lift in `Z^n`) lies in the kernel of `g`.
    pub fn contains(&self, x: &[Integer]) -> bool {
        self.in_kernel_lattice(x)
    }

    /// Class of a kernel element in canonical coordinates; `None` if `x`
    /// is not in the kernel.
    pub fn class_of(&self, x: &[Integer]) -> Option<Vec<Integer>> {
        if !self.in_kernel_lattice(x) {
            return None;
        }
        Some(self.class_of_cycle(x))
    }

    fn class_of_cycle(&self, x: &[Integer]) -> Vec<Integer> {
        let y: Vec<Integer> = self.coord_rows.mul_vec(x).iter().zip(&self.scale).map(|(v, d)| v / d).collect();
        let h = self.class_basis.mul_vec(&y);
        let mut out: Vec<Integer> = self.kept.iter().map(|&i| h[i].clone()).collect();
        self.group.reduce(&mut out);
        out
    }
}

pub fn subquotient(g: &GroupHom, f: &GroupHom) -> Result<Subquotient, GroupError> {
    let b = g.domain().clone();
    if f.codomain() != &b {
        return Err(GroupError::IncompatibleShapes(format!("im f lives in {} but g starts at {}", f.codomain(), b)));
    }
    let gf = g.matrix().mul(f.matrix());
    for j in 0..gf.cols() {
        if !g.codomain().is_zero_element(&gf.column(j)) {
            return Err(GroupError::CompositionNotZero { column: j });
        }
    }
    let n = b.ngens();

    // Lifted kernel of g.
    let rel_c = g.codomain().relations();
    let stacked = g.matrix().hstack(&rel_c);
    let snf = smith_normal_form(&stacked);
    let mut kernel_gens: Vec<Vec<Integer>> =
        (snf.rank..stacked.cols()).map(|j| (0..n).map(|i| snf.v[(i, j)].clone()).collect()).collect();
    let rel_b = b.relations();
    for j in 0..rel_b.cols() {
        kernel_gens.push(rel_b.column(j));
    }
    kernel_gens.retain(|c| c.iter().any(|x| !x.is_zero()));

    // Basis of the kernel lattice: W = U^{-1}[:, :r] diag(d).
    let zmat = IntMatrix::from_columns(n, &kernel_gens);
    let zs = smith_normal_form(&zmat);
    let r = zs.rank;
    let scale = zs.invariant_factors();
    let coord_rows = zs.u.submatrix(0..r, 0..n);

    let mut image_gens: Vec<Vec<Integer>> = (0..f.matrix().cols()).map(|j| f.matrix().column(j)).collect();
    for j in 0..rel_b.cols() {
        image_gens.push(rel_b.column(j));
    }
    image_gens.retain(|c| c.iter().any(|x| !x.is_zero()));

    // N in W-coordinates.
    let coords: Vec<Vec<Integer>> = image_gens
        .iter()
        .map(|x| {
            let y = coord_rows.mul_vec(x);
            y.iter().zip(&scale).map(|(v, d)| v / d).collect()
        })
        .collect();
    let ymat = IntMatrix::from_columns(r, &coords);
    let ys = smith_normal_form(&ymat);
    let mut factors_all: Vec<Integer> = ys.invariant_factors();
    factors_all.resize(r, Integer::zero());
    let kept: Vec<usize> = (0..r).filter(|&i| !factors_all[i].is_one()).collect();
    let factors: Vec<u64> = kept
        .iter()
        .map(|&i| {
            let d = &factors_all[i];
            u64::try_from(d.clone()).expect("invariant factor fits u64")
        })
        .collect();
    let group = FgAbGroup::new(factors).expect("factors are 0 or >= 2");

    // Representative of generator i: W * P^{-1} e_i.
    let basis_cols: Vec<Vec<Integer>> =
        (0..r).map(|k| (0..n).map(|i| &zs.u_inv[(i, k)] * &scale[k]).collect()).collect();
    let w = IntMatrix::from_columns(n, &basis_cols);
    let reps = kept
        .iter()
        .map(|&i| {
            let e: Vec<Integer> = (0..r).map(|k| ys.u_inv[(k, i)].clone()).collect();
            let mut x = w.mul_vec(&e);
            reduce_lift(&b, &mut x);
            x
        })
        .collect();

    Ok(Subquotient {
        group,
        ambient: b,
        coord_rows,
        coord_full: zs.u,
        scale,
        class_basis: ys.u,
        kept,
        reps,
        kernel_gens,
        image_gens,
    })
}

fn reduce_lift(b: &FgAbGroup, x: &mut [Integer]) {
    for (v, &d) in x.iter_mut().zip(b.factors()) {
        if d != 0 {
            *v = v.mod_floor(&Integer::from(d));
        }
    }
}

/// The map `ker g / im f -> ker g' / im f'` induced by `h : B -> B'`.
pub fn induced_map(h: &GroupHom, src: &Subquotient, dst: &Subquotient) -> Result<GroupHom, GroupError> {
    if h.domain() != src.ambient() || h.codomain() != dst.ambient() {
        return Err(GroupError::IncompatibleShapes(format!(
            "map {} -> {} between subquotients of {} and {}",
            h.domain(),
            h.codomain(),
            src.ambient(),
            dst.ambient()
        )));
    }
    for (i, z) in src.kernel_gens.iter().enumerate() {
        if !dst.in_kernel_lattice(&h.matrix().mul_vec(z)) {
            return Err(GroupError::DoesNotPreserveKernel(i));
        }
    }
    for (i, x) in src.image_gens.iter().enumerate() {
        let c = dst.class_of(&h.matrix().mul_vec(x)).ok_or(GroupError::DoesNotPreserveKernel(i))?;
        if c.iter().any(|v| !v.is_zero()) {
            return Err(GroupError::DoesNotPreserveImage(i));
        }
    }
    Ok(induced_map_unchecked(h, src, dst))
}

/// `induced_map` for a component of a verified cochain map, which preserves
/// cycles and boundaries by construction.
pub(crate) fn induced_map_unchecked(h: &GroupHom, src: &Subquotient, dst: &Subquotient) -> GroupHom {
    let cols: Vec<Vec<Integer>> = src.reps.iter().map(|x| dst.class_of_cycle(&h.matrix().mul_vec(x))).collect();
    GroupHom::new(src.group.clone(), dst.group.clone(), IntMatrix::from_columns(dst.group.ngens(), &cols))
        .expect("class coordinates are reduced")
}
