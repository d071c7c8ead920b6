//! The divisible core of a lattice under an endomorphism: the intersection
//! of all iterated images `m^k(L)`, k >= 0. Naive iteration never terminates
//! when the chain keeps shrinking (doubling on `Z` is the smallest example),
//! so this is computed in closed form instead.
//!
//! The computation splits the endomorphism along its characteristic
//! polynomial. Writing `chi = g * h` where `g` collects the irreducible
//! factors whose constant term is a unit and `h` the rest, the intersection
//! of the chain `m^k(Z^n)` is exactly the saturated kernel of `g(m)` once
//! the image rank has stabilized: on that kernel the map acts with
//! determinant of absolute value 1 and loses nothing, everywhere else some
//! prime keeps dividing deeper and deeper. A starting lattice other than
//! `Z^n` only adds a finite correction, handled by following its orbit
//! inside the kernel until the orbit closes up.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{kernel, restrict_map, IntMatrix, Lattice};

/// Characteristic polynomial, coefficients in ascending degree order, monic
/// of degree `n`. Computed by the Faddeev-LeVerrier recurrence; all the
/// divisions are exact.
pub fn charpoly(m: &IntMatrix) -> Vec<BigInt> {
    assert_eq!(m.rows(), m.cols(), "characteristic polynomial of non-square matrix");
    let n = m.rows();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut mk = IntMatrix::zeros(n, n);
    for k in 1..=n {
        let mut t = m.mul(&mk);
        for i in 0..n {
            let x = t.get(i, i) + &c[n - k + 1];
            t.set(i, i, x);
        }
        mk = t;
        let prod = m.mul(&mk);
        let tr: BigInt = (0..n).map(|i| prod.get(i, i).clone()).sum();
        let (q, r) = tr.div_rem(&BigInt::from(k as u64));
        debug_assert!(r.is_zero(), "Faddeev-LeVerrier trace division must be exact");
        c[n - k] = -q;
    }
    c
}

fn poly_eval(p: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let v = &out[i + j] + x * y;
            out[i + j] = v;
        }
    }
    out
}

/// Exact division by a monic polynomial; `None` if the remainder is nonzero.
fn poly_div_exact(p: &[BigInt], g: &[BigInt]) -> Option<Vec<BigInt>> {
    debug_assert!(g.last().map(|c| c.is_one()).unwrap_or(false), "divisor must be monic");
    if p.len() < g.len() {
        return None;
    }
    let dg = g.len() - 1;
    let mut rem = p.to_vec();
    let mut q = vec![BigInt::zero(); p.len() - dg];
    for k in (0..q.len()).rev() {
        let c = rem[k + dg].clone();
        if !c.is_zero() {
            for (t, gt) in g.iter().enumerate() {
                let x = &rem[k + t] - &c * gt;
                rem[k + t] = x;
            }
        }
        q[k] = c;
    }
    if rem.iter().all(Zero::is_zero) {
        Some(q)
    } else {
        None
    }
}

fn eval_at_matrix(p: &[BigInt], m: &IntMatrix) -> IntMatrix {
    let n = m.rows();
    let mut acc = IntMatrix::zeros(n, n);
    for c in p.iter().rev() {
        acc = m.mul(&acc);
        for i in 0..n {
            let x = acc.get(i, i) + c;
            acc.set(i, i, x);
        }
    }
    acc
}

/// All divisors of a positive integer, each in both signs, ordered
/// `1, -1, 2, -2, ...` for deterministic searches.
fn signed_divisors(n: &BigUint) -> Vec<BigInt> {
    assert!(!n.is_zero());
    let mut pos: Vec<BigUint> = Vec::new();
    if let Ok(small) = u64::try_from(n) {
        let mut d = 1u64;
        while d.saturating_mul(d) <= small {
            if small % d == 0 {
                pos.push(BigUint::from(d));
                pos.push(BigUint::from(small / d));
            }
            d += 1;
        }
    } else {
        let mut d = BigUint::one();
        while &d * &d <= *n {
            if (n % &d).is_zero() {
                pos.push(d.clone());
                pos.push(n / &d);
            }
            d += 1u32;
        }
    }
    pos.sort();
    pos.dedup();
    let mut out = Vec::with_capacity(pos.len() * 2);
    for d in pos {
        out.push(BigInt::from(d.clone()));
        out.push(-BigInt::from(d));
    }
    out
}

/// Small exact rational, used only for Kronecker interpolation.
#[derive(Clone)]
struct Frac {
    num: BigInt,
    den: BigInt, // > 0
}

impl Frac {
    fn new(num: BigInt, den: BigInt) -> Frac {
        assert!(!den.is_zero());
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g.is_one() || num.is_zero() {
            if num.is_zero() {
                return Frac { num, den: BigInt::one() };
            }
            Frac { num, den }
        } else {
            Frac { num: num / &g, den: den / g }
        }
    }

    fn zero() -> Frac {
        Frac { num: BigInt::zero(), den: BigInt::one() }
    }

    fn add(&self, o: &Frac) -> Frac {
        Frac::new(&self.num * &o.den + &o.num * &self.den, &self.den * &o.den)
    }

    fn to_int(&self) -> Option<BigInt> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }
}

/// Lagrange interpolation through integer points; `None` when the result is
/// not an integer polynomial.
fn interpolate(points: &[(BigInt, BigInt)]) -> Option<Vec<BigInt>> {
    let n = points.len();
    let mut acc = vec![Frac::zero(); n];
    for i in 0..n {
        let mut base = vec![BigInt::one()];
        let mut denom = BigInt::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if j != i {
                base = poly_mul(&base, &[-xj.clone(), BigInt::one()]);
                denom *= &points[i].0 - xj;
            }
        }
        for (k, c) in base.iter().enumerate() {
            let term = Frac::new(c * &points[i].1, denom.clone());
            acc[k] = acc[k].add(&term);
        }
    }
    let mut out = Vec::with_capacity(n);
    for f in &acc {
        out.push(f.to_int()?);
    }
    while out.len() > 1 && out.last().unwrap().is_zero() {
        out.pop();
    }
    Some(out)
}

/// Finds a nontrivial monic factorization of a rootless polynomial by the
/// Kronecker method: a degree-t factor is pinned down by its values at t+1
/// points, and each value must divide the value of the whole polynomial.
/// Complete for the polynomial sizes arising from small matrices.
fn kronecker_split(p: &[BigInt]) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let deg = p.len() - 1;
    if deg < 4 {
        return None; // a rootless cubic or quadratic is irreducible
    }
    for t in 2..=deg / 2 {
        let points: Vec<BigInt> = {
            let mut pts = vec![BigInt::zero()];
            let mut k = 1i64;
            while pts.len() < t + 1 {
                pts.push(BigInt::from(k));
                if pts.len() < t + 1 {
                    pts.push(BigInt::from(-k));
                }
                k += 1;
            }
            pts
        };
        let value_divisors: Vec<Vec<BigInt>> = points
            .iter()
            .map(|x| signed_divisors(poly_eval(p, x).magnitude()))
            .collect();
        // odometer over all divisor choices
        let mut choice = vec![0usize; t + 1];
        loop {
            let sample: Vec<(BigInt, BigInt)> = (0..=t)
                .map(|i| (points[i].clone(), value_divisors[i][choice[i]].clone()))
                .collect();
            if let Some(mut cand) = interpolate(&sample) {
                if cand.len() == t + 1 && cand.last().unwrap().magnitude().is_one() {
                    if cand.last().unwrap().is_negative() {
                        for c in cand.iter_mut() {
                            *c = -c.clone();
                        }
                    }
                    if let Some(q) = poly_div_exact(p, &cand) {
                        return Some((cand, q));
                    }
                }
            }
            let mut i = 0;
            loop {
                if i > t {
                    break;
                }
                choice[i] += 1;
                if choice[i] < value_divisors[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i > t {
                break;
            }
        }
    }
    None
}

/// Monic irreducible factors over the integers, with multiplicity, in a
/// deterministic order (by degree, then coefficients).
pub fn factor_monic(p: &[BigInt]) -> Vec<Vec<BigInt>> {
    assert!(
        p.last().map(|c| c.is_one()).unwrap_or(false),
        "factor_monic expects a monic polynomial"
    );
    let mut work = p.to_vec();
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    while work.len() > 1 && work[0].is_zero() {
        out.push(vec![BigInt::zero(), BigInt::one()]);
        work.remove(0);
    }
    'roots: loop {
        if work.len() <= 2 {
            break;
        }
        for d in signed_divisors(work[0].magnitude()) {
            if poly_eval(&work, &d).is_zero() {
                let lin = vec![-d, BigInt::one()];
                work = poly_div_exact(&work, &lin).expect("root must divide");
                out.push(lin);
                continue 'roots;
            }
        }
        break;
    }
    fn split_rec(p: Vec<BigInt>, out: &mut Vec<Vec<BigInt>>) {
        if p.len() <= 1 {
            return;
        }
        if p.len() == 2 {
            out.push(p);
            return;
        }
        match kronecker_split(&p) {
            Some((f, g)) => {
                split_rec(f, out);
                split_rec(g, out);
            }
            None => out.push(p),
        }
    }
    split_rec(work, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Product of the irreducible factors of `p` (with multiplicity) whose
/// constant term is a unit; `[1]` when there are none. Skips factoring
/// entirely when the constant term of `p` is already a unit, since then
/// every factor qualifies.
fn unit_part(p: &[BigInt]) -> Vec<BigInt> {
    let mut w = p.to_vec();
    while w.len() > 1 && w[0].is_zero() {
        w.remove(0);
    }
    if w.len() <= 1 {
        return vec![BigInt::one()];
    }
    if w[0].magnitude().is_one() {
        return w;
    }
    let mut acc = vec![BigInt::one()];
    for f in factor_monic(&w) {
        if f[0].magnitude().is_one() {
            acc = poly_mul(&acc, &f);
        }
    }
    acc
}

/// The largest sublattice of `Z^n` on which `a` acts by a map of
/// determinant plus or minus 1: the saturated kernel of the unit part of
/// the characteristic polynomial. For nonsingular `a` this equals the
/// intersection of all `a^k(Z^n)`.
pub fn unit_kernel(a: &IntMatrix) -> Lattice {
    let p = charpoly(a);
    let g = unit_part(&p);
    if g.len() == 1 {
        return Lattice::zero(a.rows());
    }
    let gm = eval_at_matrix(&g, a);
    Lattice::from_matrix_columns(&kernel(&gm))
}

/// Intersection of the iterated images `m^k(l)` over all k >= 0, in closed
/// form. Exact for every starting lattice, including rank-deficient ones
/// whose span drifts under `m`.
pub fn divisible_core(m: &IntMatrix, l: &Lattice) -> Lattice {
    assert_eq!(m.rows(), m.cols(), "divisible core of non-square matrix");
    assert_eq!(m.rows(), l.ambient(), "ambient dimension mismatch");
    let n = l.ambient();
    if l.rank() == 0 || n == 0 {
        return l.clone();
    }

    // iterate the full ambient image until its rank stabilizes; past that
    // point everything happens inside one saturated invariant sublattice on
    // which the map is nonsingular
    let mut chain = vec![Lattice::full(n)];
    loop {
        let nxt = chain.last().unwrap().image(m);
        if nxt.rank() == chain.last().unwrap().rank() {
            break;
        }
        chain.push(nxt);
    }
    let k1 = chain.len() - 1;
    let mut p = l.clone();
    let mut head = Lattice::full(n);
    for _ in 0..k1 {
        head = head.intersect(&p);
        p = p.image(m);
    }
    let w = chain[k1].saturate();
    if w.rank() == 0 {
        return Lattice::zero(n);
    }
    let a = restrict_map(m, &w).expect("saturated stable image must be invariant");
    let lp_cols: Vec<Vec<BigInt>> = (0..p.rank())
        .map(|j| {
            w.coordinates(&p.basis().column(j))
                .expect("handoff lattice must lie inside the stable image")
        })
        .collect();
    let lp = Lattice::from_generators(w.rank(), &lp_cols);

    // anything in every iterated image lives in the unit kernel of the
    // restricted map
    let k_unit = unit_kernel(&a);
    if k_unit.rank() == 0 {
        return Lattice::zero(n);
    }
    let mut psi = lp.intersect(&k_unit);

    // peel away the part of the orbit whose rational span drifts off to
    // infinity; what survives spans an invariant subspace
    loop {
        if psi.rank() == 0 {
            return Lattice::zero(n);
        }
        let mut t = psi.saturate();
        loop {
            let nt = t.intersect(&t.image(&a)).saturate();
            if nt == t {
                break;
            }
            t = nt;
        }
        psi = psi.intersect(&t);
        if psi.saturate() == t {
            break;
        }
    }

    // inside the invariant span the map is unimodular, so the orbit of psi
    // closes into a cycle; intersect every distinct state
    let mut seen = vec![psi.clone()];
    let mut acc = psi.clone();
    let mut cur = psi.image(&a);
    let mut guard = 0usize;
    while !seen.contains(&cur) {
        acc = acc.intersect(&cur);
        seen.push(cur.clone());
        cur = cur.image(&a);
        guard += 1;
        assert!(guard < 100_000, "divisible core orbit failed to close");
    }

    let gens: Vec<Vec<BigInt>> =
        (0..acc.rank()).map(|j| w.basis().mul_vec(&acc.basis().column(j))).collect();
    head.intersect(&Lattice::from_generators(n, &gens))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[i64]) -> Vec<BigInt> {
        cs.iter().map(|&c| BigInt::from(c)).collect()
    }

    fn lat(ambient: usize, gens: &[&[i64]]) -> Lattice {
        let gens: Vec<Vec<BigInt>> =
            gens.iter().map(|g| g.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Lattice::from_generators(ambient, &gens)
    }

    #[test]
    fn charpoly_examples() {
        assert_eq!(charpoly(&IntMatrix::from_rows(&[&[5]])), poly(&[-5, 1]));
        assert_eq!(charpoly(&IntMatrix::identity(2)), poly(&[1, -2, 1]));
        // companion matrix of x^3 - 2x + 7
        let c = IntMatrix::from_rows(&[&[0, 0, -7], &[1, 0, 2], &[0, 1, 0]]);
        assert_eq!(charpoly(&c), poly(&[7, -2, 0, 1]));
        // rotation by a quarter turn
        let r = IntMatrix::from_rows(&[&[0, -1], &[1, 0]]);
        assert_eq!(charpoly(&r), poly(&[1, 0, 1]));
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor_monic(&poly(&[-1, 0, 1])), vec![poly(&[-1, 1]), poly(&[1, 1])]);
        // x^2 - x - 4 has no rational roots
        assert_eq!(factor_monic(&poly(&[-4, -1, 1])), vec![poly(&[-4, -1, 1])]);
        // (x^2 + 1)(x - 2)
        assert_eq!(
            factor_monic(&poly(&[-2, 1, -2, 1])),
            vec![poly(&[-2, 1]), poly(&[1, 0, 1])]
        );
        // x^4 - 1
        assert_eq!(
            factor_monic(&poly(&[-1, 0, 0, 0, 1])),
            vec![poly(&[-1, 1]), poly(&[1, 1]), poly(&[1, 0, 1])]
        );
        // (x^2 + x + 1)^2, a square of an irreducible quadratic
        let sq = poly_mul(&poly(&[1, 1, 1]), &poly(&[1, 1, 1]));
        assert_eq!(factor_monic(&sq), vec![poly(&[1, 1, 1]), poly(&[1, 1, 1])]);
        // x^2 * (x - 3), sorted by coefficients within equal degree
        assert_eq!(
            factor_monic(&poly(&[0, 0, -3, 1])),
            vec![poly(&[-3, 1]), poly(&[0, 1]), poly(&[0, 1])]
        );
        // product of two non-monic-root quadratics
        let prod = poly_mul(&poly(&[1, 3, 1]), &poly(&[2, 0, 1]));
        let mut fs = factor_monic(&prod);
        fs.sort();
        assert_eq!(fs, vec![poly(&[1, 3, 1]), poly(&[2, 0, 1])]);
    }

    #[test]
    fn unit_kernel_examples() {
        // doubling map keeps dividing: nothing survives
        assert_eq!(unit_kernel(&IntMatrix::from_rows(&[&[2]])), Lattice::zero(1));
        // identity keeps everything
        assert_eq!(unit_kernel(&IntMatrix::identity(3)), Lattice::full(3));
        // diag(2, 1): only the second axis survives
        assert_eq!(
            unit_kernel(&IntMatrix::from_rows(&[&[2, 0], &[0, 1]])),
            lat(2, &[&[0, 1]])
        );
        // quarter turn is invertible over the integers
        assert_eq!(
            unit_kernel(&IntMatrix::from_rows(&[&[0, -1], &[1, 0]])),
            Lattice::full(2)
        );
        // x^2 - x - 4: irreducible with non-unit constant term, even though
        // one eigenvalue is a 2-adic unit
        assert_eq!(
            unit_kernel(&IntMatrix::from_rows(&[&[0, 4], &[1, 1]])),
            Lattice::zero(2)
        );
        // shear: (x - 1)^2, the full multiplicity matters
        assert_eq!(
            unit_kernel(&IntMatrix::from_rows(&[&[1, 1], &[0, 1]])),
            Lattice::full(2)
        );
        // triangular mix of unit and non-unit eigenvalues
        assert_eq!(
            unit_kernel(&IntMatrix::from_rows(&[&[1, 1], &[0, 2]])),
            lat(2, &[&[1, 0]])
        );
    }

    #[test]
    fn divisible_core_named_cases() {
        let z = Lattice::full(1);
        assert_eq!(divisible_core(&IntMatrix::from_rows(&[&[2]]), &z), Lattice::zero(1));
        assert_eq!(divisible_core(&IntMatrix::from_rows(&[&[1]]), &z), z);
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[-1]]), &lat(1, &[&[3]])),
            lat(1, &[&[3]])
        );
        let z2 = Lattice::full(2);
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[2, 0], &[0, 1]]), &z2),
            lat(2, &[&[0, 1]])
        );
        // quarter turn applied to Z x 2Z: the orbit has length two and the
        // intersection is 2Z x 2Z
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[0, -1], &[1, 0]]), &lat(2, &[&[1, 0], &[0, 2]])),
            lat(2, &[&[2, 0], &[0, 2]])
        );
        // shear on 2Z x Z: parity of both coordinates is forced
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[1, 1], &[0, 1]]), &lat(2, &[&[2, 0], &[0, 1]])),
            lat(2, &[&[2, 0], &[0, 2]])
        );
        // drifting rank-one start collapses to zero
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[1, 1], &[0, 1]]), &lat(2, &[&[0, 1]])),
            Lattice::zero(2)
        );
        // rank-one start on a fixed axis survives unchanged
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[1, 1], &[0, 2]]), &z2),
            lat(2, &[&[1, 0]])
        );
        // nilpotent block kills everything
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[0, 1], &[0, 0]]), &z2),
            Lattice::zero(2)
        );
        // 2-adic unit eigenvalue of an irreducible non-unit quadratic does
        // not generate a divisible subgroup
        assert_eq!(
            divisible_core(&IntMatrix::from_rows(&[&[0, 4], &[1, 1]]), &z2),
            Lattice::zero(2)
        );
    }

    #[test]
    fn divisible_core_is_inside_every_iterate() {
        let cases: Vec<(IntMatrix, Lattice)> = vec![
            (IntMatrix::from_rows(&[&[2, 1], &[0, 3]]), Lattice::full(2)),
            (IntMatrix::from_rows(&[&[0, -1], &[1, 0]]), lat(2, &[&[1, 0], &[0, 6]])),
            (IntMatrix::from_rows(&[&[1, 2], &[0, 1]]), lat(2, &[&[3, 0], &[0, 1]])),
            (IntMatrix::from_rows(&[&[6, 0], &[0, 1]]), lat(2, &[&[2, 0], &[0, 4]])),
            (IntMatrix::from_rows(&[&[1, 0], &[4, 1]]), lat(2, &[&[2, 2]])),
        ];
        for (m, l) in cases {
            let d = divisible_core(&m, &l);
            let mut it = l.clone();
            for _ in 0..12 {
                assert!(
                    it.contains(&d),
                    "core escapes an iterate: m={m:?} l={l:?} d={d:?} it={it:?}"
                );
                it = it.image(&m);
            }
            // the core reproduces itself
            let img = d.image(&m);
            let back = divisible_core(&m, &img);
            assert!(d.contains(&back) || back.contains(&d));
        }
    }

    #[test]
    fn divisible_core_fixed_by_unimodular_orbits() {
        // for a unimodular map the core is the intersection of the finite
        // orbit of the lattice, checked directly
        let m = IntMatrix::from_rows(&[&[0, -1], &[1, 1]]); // order six
        let l = lat(2, &[&[1, 0], &[0, 4]]);
        let mut acc = l.clone();
        let mut cur = l.image(&m);
        for _ in 0..6 {
            acc = acc.intersect(&cur);
            cur = cur.image(&m);
        }
        assert_eq!(divisible_core(&m, &l), acc);
    }
}
