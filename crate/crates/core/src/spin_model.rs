//! Spin operators, engineered fields and the local terms of the chain
//! Hamiltonian.
//!
//! Sites are indexed `0..N+2`: `0` is the sender, `1..=N` the bus and
//! `N + 1` the receiver. The Hamiltonian is
//!
//! ```text
//! H = -Ω0 Σ_bus (S+_i S-_{i+1} + h.c.) - Ωz Σ_bus Sz_i Sz_{i+1}
//!     - ω0 (S+_s S-_1 + S+_r S-_N + h.c.) - ωz (Sz_s Sz_1 + Sz_r Sz_N)
//!     - Σ_i B_i Sz_i
//! ```

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// A spin quantum number `S`, stored as the integer `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin {
    two_s: u32,
}

impl Spin {
    pub fn from_twice(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin { two_s })
    }

    /// Accepts any positive multiple of one half.
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 || twice > 1e6 {
            return Err(Error::InvalidSpin(s));
        }
        Spin::from_twice(twice.round() as u32)
    }

    pub fn twice(self) -> u32 {
        self.two_s
    }

    pub fn value(self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Number of local levels, `2S + 1`.
    pub fn levels(self) -> usize {
        self.two_s as usize + 1
    }

    /// `<n-1| S+ |n>` in the boson-number basis.
    pub fn raise_element(self, n: usize) -> f64 {
        let two_s = self.two_s as usize;
        if n == 0 || n > two_s {
            return 0.0;
        }
        ((n * (two_s - n + 1)) as f64).sqrt()
    }

    /// `<n+1| S- |n>` in the boson-number basis.
    pub fn lower_element(self, n: usize) -> f64 {
        self.raise_element(n + 1)
    }

    /// `Sz` eigenvalue of local level `n`.
    pub fn sz(self, n: usize) -> f64 {
        self.value() - n as f64
    }
}

/// All physical constants of the chain. Energies are in units of the bus
/// xy coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    /// Bus length `N`.
    pub bus_sites: usize,
    pub spin: Spin,
    /// Qudit dimension `d`.
    pub levels: usize,
    /// Bus xy coupling `Ω0`.
    pub bus_xy: f64,
    /// Bus z coupling `Ωz`.
    pub bus_z: f64,
    /// Register-bus xy coupling `ω0`.
    pub reg_xy: f64,
    /// Register-bus z coupling `ωz`.
    pub reg_z: f64,
    /// Field offset `h`, only used for `N = 1`.
    pub field_offset: f64,
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.bus_sites == 0 {
            return Err(Error::InvalidParams("bus length must be at least 1".into()));
        }
        if self.levels < 2 {
            return Err(Error::InvalidParams(format!("qudit dimension must be at least 2, got {}", self.levels)));
        }
        if self.levels > self.spin.levels() {
            return Err(Error::LevelsExceedLadder { levels: self.levels, ladder: self.spin.levels() });
        }
        let named = [
            ("bus_xy", self.bus_xy),
            ("bus_z", self.bus_z),
            ("reg_xy", self.reg_xy),
            ("reg_z", self.reg_z),
            ("field_offset", self.field_offset),
        ];
        for (name, value) in named {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be finite and non-negative, got {value}")));
            }
        }
        if self.bus_xy <= 0.0 {
            return Err(Error::InvalidParams("bus_xy sets the energy unit and must be positive".into()));
        }
        Ok(())
    }

    /// Total number of sites, `N + 2`.
    pub fn sites(&self) -> usize {
        self.bus_sites + 2
    }

    pub fn receiver(&self) -> usize {
        self.bus_sites + 1
    }
}

/// Static Zeeman fields on every site.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub sender: f64,
    pub receiver: f64,
    pub bus: Vec<f64>,
}

impl FieldProfile {
    /// Fields in site order `(s, 1..N, r)`.
    pub fn site_fields(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bus.len() + 2);
        out.push(self.sender);
        out.extend_from_slice(&self.bus);
        out.push(self.receiver);
        out
    }
}

/// Engineered field profile that puts registers and every bus site at the
/// same single-magnon energy.
pub fn field_profile(p: &ChainParams) -> Result<FieldProfile> {
    p.validate()?;
    let n = p.bus_sites;
    if n.is_multiple_of(2) {
        return Err(Error::EvenBusLength(n));
    }
    let s = p.spin.value();
    if n == 1 {
        let reg = p.reg_z * s + p.field_offset;
        return Ok(FieldProfile { sender: reg, receiver: reg, bus: alloc::vec![p.field_offset] });
    }
    let mut bus = alloc::vec![p.reg_z * s; n];
    bus[0] = p.bus_z * s;
    bus[n - 1] = p.bus_z * s;
    let reg = 2.0 * p.bus_z * s;
    Ok(FieldProfile { sender: reg, receiver: reg, bus })
}

/// Ladder operators in the boson-number basis (index `n` ↔ `m = S - n`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub dim: usize,
    pub raise: DMatrix<C64>,
    pub lower: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let dim = spin.levels();
    let mut raise = DMatrix::zeros(dim, dim);
    let mut sz = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        sz[(n, n)] = C64::new(spin.sz(n), 0.0);
        if n >= 1 {
            raise[(n - 1, n)] = C64::new(spin.raise_element(n), 0.0);
        }
    }
    let lower = raise.adjoint();
    SpinOperators { dim, raise, lower, sz }
}

/// One local term of the Hamiltonian. Amplitudes carry the overall sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `amp · (S+_a S-_b + S-_a S+_b)`
    Hop { a: usize, b: usize, amp: f64 },
    /// `amp · Sz_a Sz_b`
    Ising { a: usize, b: usize, amp: f64 },
    /// `amp · Sz_site`
    Zeeman { site: usize, amp: f64 },
}

impl Term {
    pub fn max_site(&self) -> usize {
        match *self {
            Term::Hop { a, b, .. } | Term::Ising { a, b, .. } => a.max(b),
            Term::Zeeman { site, .. } => site,
        }
    }

    pub fn touches(&self, site: usize) -> bool {
        match *self {
            Term::Hop { a, b, .. } | Term::Ising { a, b, .. } => a == site || b == site,
            Term::Zeeman { site: s, .. } => s == site,
        }
    }

    /// The same term with every site index moved by `-offset`.
    pub fn shifted(&self, offset: usize) -> Term {
        match *self {
            Term::Hop { a, b, amp } => Term::Hop { a: a - offset, b: b - offset, amp },
            Term::Ising { a, b, amp } => Term::Ising { a: a - offset, b: b - offset, amp },
            Term::Zeeman { site, amp } => Term::Zeeman { site: site - offset, amp },
        }
    }
}

/// Local terms of the full chain Hamiltonian. No global matrix is formed.
pub fn build_hamiltonian_terms(p: &ChainParams, f: &FieldProfile) -> Result<Vec<Term>> {
    p.validate()?;
    if f.bus.len() != p.bus_sites {
        return Err(Error::DimensionMismatch { expected: p.bus_sites, found: f.bus.len() });
    }
    let n = p.bus_sites;
    let r = p.receiver();
    let mut terms = Vec::with_capacity(4 * n + 6);
    terms.push(Term::Hop { a: 0, b: 1, amp: -p.reg_xy });
    for i in 1..n {
        terms.push(Term::Hop { a: i, b: i + 1, amp: -p.bus_xy });
    }
    terms.push(Term::Hop { a: n, b: r, amp: -p.reg_xy });

    terms.push(Term::Ising { a: 0, b: 1, amp: -p.reg_z });
    for i in 1..n {
        terms.push(Term::Ising { a: i, b: i + 1, amp: -p.bus_z });
    }
    terms.push(Term::Ising { a: n, b: r, amp: -p.reg_z });

    for (site, b) in f.site_fields().into_iter().enumerate() {
        terms.push(Term::Zeeman { site, amp: -b });
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, s: f64, d: usize) -> ChainParams {
        ChainParams {
            bus_sites: n,
            spin: Spin::new(s).unwrap(),
            levels: d,
            bus_xy: 1.0,
            bus_z: 1.0,
            reg_xy: 0.1,
            reg_z: 0.5,
            field_offset: 0.0,
        }
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_rejects_non_half_integers() {
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(f64::NAN).is_err());
        assert_eq!(Spin::new(1.5).unwrap().twice(), 3);
    }

    #[test]
    fn spin_half_matrices() {
        let ops = spin_operators(Spin::new(0.5).unwrap());
        assert_eq!(ops.sz[(0, 0)].re, 0.5);
        assert_eq!(ops.sz[(1, 1)].re, -0.5);
        assert_eq!(ops.raise[(0, 1)].re, 1.0);
        assert_eq!(ops.raise.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn spin_one_superdiagonal() {
        let ops = spin_operators(Spin::new(1.0).unwrap());
        let r2 = 2f64.sqrt();
        assert!((ops.raise[(0, 1)].re - r2).abs() < 1e-15);
        assert!((ops.raise[(1, 2)].re - r2).abs() < 1e-15);
    }

    #[test]
    fn ladder_algebra_holds() {
        for two_s in 1..=20 {
            let ops = spin_operators(Spin::from_twice(two_s).unwrap());
            let comm = &ops.raise * &ops.lower - &ops.lower * &ops.raise;
            assert!(max_abs(&(comm - &ops.sz * C64::new(2.0, 0.0))) < 1e-12, "[S+,S-] for 2S={two_s}");
            let comm_z = &ops.sz * &ops.raise - &ops.raise * &ops.sz;
            assert!(max_abs(&(comm_z - &ops.raise)) < 1e-12, "[Sz,S+] for 2S={two_s}");
            assert_eq!(ops.lower, ops.raise.adjoint());
        }
    }

    #[test]
    fn field_profile_three_sites() {
        let mut p = params(3, 2.0, 2);
        p.reg_z = 0.5;
        let f = field_profile(&p).unwrap();
        assert_eq!(f.sender, 4.0);
        assert_eq!(f.receiver, 4.0);
        assert_eq!(f.bus, alloc::vec![2.0, 1.0, 2.0]);
        assert_eq!(f, field_profile(&p).unwrap());
    }

    #[test]
    fn field_profile_single_bus_site() {
        let mut p = params(1, 3.0, 2);
        p.reg_z = 0.1;
        p.field_offset = 0.3;
        let f = field_profile(&p).unwrap();
        assert!((f.sender - 0.6).abs() < 1e-15);
        assert!((f.receiver - 0.6).abs() < 1e-15);
        assert_eq!(f.bus, alloc::vec![0.3]);
    }

    #[test]
    fn field_profile_zero_interior() {
        let mut p = params(5, 1.0, 2);
        p.reg_z = 0.0;
        let f = field_profile(&p).unwrap();
        assert_eq!(&f.bus[1..4], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn even_bus_rejected() {
        let err = field_profile(&params(2, 1.0, 2)).unwrap_err();
        assert_eq!(err, Error::EvenBusLength(2));
        assert!(alloc::string::ToString::to_string(&err).contains("odd"));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(params(3, 1.0, 4).validate(), Err(Error::LevelsExceedLadder { .. })));
        let mut p = params(3, 1.0, 2);
        p.bus_z = -1.0;
        assert!(p.validate().is_err());
        p.bus_z = 1.0;
        p.bus_xy = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn term_counts() {
        let p = params(3, 1.0, 2);
        let terms = build_hamiltonian_terms(&p, &field_profile(&p).unwrap()).unwrap();
        let hops = terms.iter().filter(|t| matches!(t, Term::Hop { .. })).count();
        let ising = terms.iter().filter(|t| matches!(t, Term::Ising { .. })).count();
        let zeeman = terms.iter().filter(|t| matches!(t, Term::Zeeman { .. })).count();
        assert_eq!((hops, ising, zeeman), (4, 4, 5));
    }

    #[test]
    fn zero_register_xy_gives_zero_register_hopping() {
        let mut p = params(3, 1.0, 2);
        p.reg_xy = 0.0;
        let terms = build_hamiltonian_terms(&p, &field_profile(&p).unwrap()).unwrap();
        for t in &terms {
            if let Term::Hop { a, b, amp } = *t {
                if a == 0 || b == 4 {
                    assert_eq!(amp, 0.0);
                }
            }
        }
    }
}
