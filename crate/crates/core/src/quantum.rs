//! Exact two-qubit realization of the square: Pauli observables, projectors,
//! source ensembles, depolarizing noise, correlations and noise thresholds.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::correlation::{evaluate, CorrelationPoint, Inequality};
use crate::exactgeom::{rat, ratio, Rational};
use crate::scenario::{CellGrid, Context, DeterministicAssignment, Scenario};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantumError {
    #[error("operator is not a traceless involution")]
    NotBalancedInvolution,
    #[error("depolarizing strength {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("cannot parse {0:?} as a rational number")]
    BadRational(String),
}

/// `re + i im` over the rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { re: &self.re * k, im: &self.im * k }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::real(Rational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::real(Rational::one())
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}i", self.re, sign, self.im.abs())
            }
        }
    }
}

type Mat2 = [[GaussianRational; 2]; 2];

fn mat2(entries: [[(i64, i64); 2]; 2]) -> Mat2 {
    entries.map(|row| row.map(|(re, im)| GaussianRational::new(rat(re), rat(im))))
}

pub fn pauli_i() -> Mat2 {
    mat2([[(1, 0), (0, 0)], [(0, 0), (1, 0)]])
}

pub fn pauli_x() -> Mat2 {
    mat2([[(0, 0), (1, 0)], [(1, 0), (0, 0)]])
}

pub fn pauli_y() -> Mat2 {
    mat2([[(0, 0), (0, -1)], [(0, 1), (0, 0)]])
}

pub fn pauli_z() -> Mat2 {
    mat2([[(1, 0), (0, 0)], [(0, 0), (-1, 0)]])
}

/// Two-qubit operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operator4 {
    entries: [[GaussianRational; 4]; 4],
}

impl Operator4 {
    pub fn zero() -> Self {
        Self { entries: std::array::from_fn(|_| std::array::from_fn(|_| GaussianRational::zero())) }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..4 {
            m.entries[k][k] = GaussianRational::one();
        }
        m
    }

    pub fn kron(a: &Mat2, b: &Mat2) -> Self {
        Self { entries: std::array::from_fn(|r| std::array::from_fn(|c| &a[r / 2][c / 2] * &b[r % 2][c % 2])) }
    }

    pub fn entry(&self, r: usize, c: usize) -> &GaussianRational {
        &self.entries[r][c]
    }

    pub fn diagonal_of(values: [Rational; 4]) -> Self {
        let mut m = Self::zero();
        for (k, v) in values.into_iter().enumerate() {
            m.entries[k][k] = GaussianRational::real(v);
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: std::array::from_fn(|r| {
                std::array::from_fn(|c| self.entries[r][c].clone() + other.entries[r][c].clone())
            }),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { entries: std::array::from_fn(|r| std::array::from_fn(|c| self.entries[r][c].scale(k))) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            entries: std::array::from_fn(|r| {
                std::array::from_fn(|c| {
                    (0..4).fold(GaussianRational::zero(), |acc, k| acc + &self.entries[r][k] * &other.entries[k][c])
                })
            }),
        }
    }

    pub fn trace(&self) -> GaussianRational {
        (0..4).fold(GaussianRational::zero(), |acc, k| acc + self.entries[k][k].clone())
    }

    pub fn dagger(&self) -> Self {
        Self { entries: std::array::from_fn(|r| std::array::from_fn(|c| self.entries[c][r].conj())) }
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.dagger()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul(other) == other.mul(self)
    }

    /// Rank over the Gaussian rationals, by elimination.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<GaussianRational>> = self.entries.iter().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for c in 0..4 {
            let Some(p) = (rank..4).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            let piv = m[rank][c].clone();
            let norm = &piv.re * &piv.re + &piv.im * &piv.im;
            // 1/piv = conj(piv)/|piv|^2
            let inv = piv.conj().scale(&(Rational::one() / norm));
            for r in 0..4 {
                if r != rank && !m[r][c].is_zero() {
                    let f = &m[r][c] * &inv;
                    for k in 0..4 {
                        let t = &f * &m[rank][k];
                        m[r][k] = m[r][k].clone() - t;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Display for Operator4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let parts: Vec<String> = row.iter().map(|e| format!("{e:>6}")).collect();
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// The nine observables, row-major.
pub fn build_pm_square() -> CellGrid<Operator4> {
    let (i, x, y, z) = (pauli_i(), pauli_x(), pauli_y(), pauli_z());
    let k = Operator4::kron;
    CellGrid::new(
        3,
        3,
        vec![
            k(&x, &i),
            k(&i, &x),
            k(&x, &x),
            k(&i, &z),
            k(&z, &i),
            k(&z, &z),
            k(&x, &z),
            k(&z, &x),
            k(&y, &y),
        ],
    )
    .expect("nine observables")
}

/// `(1 + obs)/2` and `(1 - obs)/2`.
pub fn projectors(obs: &Operator4) -> Result<(Operator4, Operator4), QuantumError> {
    if obs.mul(obs) != Operator4::identity() || !obs.trace().is_zero() {
        return Err(QuantumError::NotBalancedInvolution);
    }
    let half = ratio(1, 2);
    let id = Operator4::identity();
    Ok((id.add(obs).scale(&half), id.sub(obs).scale(&half)))
}

/// Source states `rho^+-` = projector / 2.
pub fn source_states(obs: &Operator4) -> Result<(Operator4, Operator4), QuantumError> {
    let (p, m) = projectors(obs)?;
    let half = ratio(1, 2);
    Ok((p.scale(&half), m.scale(&half)))
}

/// Rank-one joint eigenprojectors of a context, in the order
/// `(a, b) = (+,+), (+,-), (-,+), (-,-)`.
pub fn simulating_projectors(square: &CellGrid<Operator4>, context: &Context) -> Vec<((i8, i8), Operator4)> {
    let [first, second, third] = context.cells.map(|c| square.get(c));
    let quarter = ratio(1, 4);
    [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)]
        .into_iter()
        .map(|(a, b)| {
            let op = Operator4::identity()
                .add(&first.scale(&rat(a.into())))
                .add(&second.scale(&rat(b.into())))
                .add(&third.scale(&rat((context.parity * a * b).into())))
                .scale(&quarter);
            ((a, b), op)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DepolarizingStrength {
    r: Rational,
    r_squared: Rational,
}

impl DepolarizingStrength {
    pub fn new(r: Rational) -> Result<Self, QuantumError> {
        if r.is_negative() || r > Rational::one() {
            return Err(QuantumError::OutOfRange(r.to_string()));
        }
        let r_squared = &r * &r;
        Ok(Self { r, r_squared })
    }

    /// Parses `p/q`, an integer, or a decimal.
    pub fn parse(text: &str) -> Result<Self, QuantumError> {
        let r = crate::exactgeom::parse_rational(text).ok_or_else(|| QuantumError::BadRational(text.to_string()))?;
        Self::new(r)
    }

    pub fn ideal() -> Self {
        Self::new(Rational::one()).expect("1 is in range")
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn r_squared(&self) -> &Rational {
        &self.r_squared
    }
}

impl TryFrom<String> for DepolarizingStrength {
    type Error = QuantumError;

    fn try_from(text: String) -> Result<Self, Self::Error> {
        Self::parse(&text)
    }
}

impl From<DepolarizingStrength> for String {
    fn from(r: DepolarizingStrength) -> Self {
        r.r.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    ObservableEffect,
    State,
}

/// `r op + (1 - r) tr(op)/4 * 1`. The channel is self-dual, so effects and
/// states use the same formula.
pub fn depolarize(op: &Operator4, r: &DepolarizingStrength, _kind: OperatorKind) -> Operator4 {
    let one = Rational::one();
    let tr = op.trace();
    let mixing = (&one - r.r()) * ratio(1, 4);
    let mut out = op.scale(r.r());
    for k in 0..4 {
        out.entries[k][k] = out.entries[k][k].clone() + tr.scale(&mixing);
    }
    out
}

/// Born-rule joint distribution of outcome `m` and source label `s` for a
/// cell: the source picks `s` with probability 1/2 and prepares `rho^s`.
/// Entries are indexed `[m == -1][s == -1]`.
pub fn joint_distribution(
    obs: &Operator4,
    measurement: &DepolarizingStrength,
    source: &DepolarizingStrength,
) -> Result<[[Rational; 2]; 2], QuantumError> {
    let (pp, pm) = projectors(obs)?;
    let (rp, rm) = source_states(obs)?;
    let effects = [
        depolarize(&pp, measurement, OperatorKind::ObservableEffect),
        depolarize(&pm, measurement, OperatorKind::ObservableEffect),
    ];
    let states = [depolarize(&rp, source, OperatorKind::State), depolarize(&rm, source, OperatorKind::State)];
    let half = ratio(1, 2);
    Ok(std::array::from_fn(|mi| {
        std::array::from_fn(|si| {
            let t = effects[mi].mul(&states[si]).trace();
            debug_assert!(t.is_real());
            &half * &t.re
        })
    }))
}

/// `omega_ij = sum m s pr(m, s)` for every cell, with separate strengths.
pub fn correlations_with(
    measurement: &DepolarizingStrength,
    source: &DepolarizingStrength,
) -> Result<CorrelationPoint, QuantumError> {
    let square = build_pm_square();
    let values = square
        .values()
        .iter()
        .map(|obs| {
            let pr = joint_distribution(obs, measurement, source)?;
            Ok(&pr[0][0] - &pr[0][1] - &pr[1][0] + &pr[1][1])
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    Ok(CellGrid::new(3, 3, values).expect("nine cells"))
}

/// Equal noise on sources and measurements.
pub fn correlations(r: &DepolarizingStrength) -> Result<CorrelationPoint, QuantumError> {
    correlations_with(r, r)
}

/// Threshold on `r^2` above which the uniform correlation `omega = r^2`
/// violates `ineq`; `None` when it never does.
pub fn noise_threshold(ineq: &Inequality) -> Option<Rational> {
    let s: i64 = ineq.flat_alpha().iter().sum();
    (s > ineq.beta).then(|| ratio(ineq.beta, s))
}

fn render_scaled(scaled: &num_bigint::BigInt, places: usize) -> String {
    let scale = num_bigint::BigInt::from(10u32).pow(places as u32);
    let (int, frac) = (scaled / &scale, scaled % &scale);
    if places == 0 {
        return int.to_string();
    }
    format!("{int}.{:0>width$}", frac.to_string(), width = places)
}

/// Nonnegative rational rounded to `places` decimals (half up).
pub fn decimal(value: &Rational, places: usize) -> String {
    let scale = Rational::from_integer(num_bigint::BigInt::from(10u32).pow(places as u32));
    let scaled = (value * scale + ratio(1, 2)).floor().to_integer();
    render_scaled(&scaled, places)
}

/// `sqrt(value)` rounded to `places` decimals (half up), using integer
/// square roots only.
pub fn sqrt_decimal(value: &Rational, places: usize) -> String {
    let y = value * Rational::from_integer(num_bigint::BigInt::from(10u32).pow(2 * places as u32));
    let t = y.floor().to_integer().sqrt();
    let tr = Rational::from_integer(t.clone());
    let half_up = &tr * &tr + &tr + ratio(1, 4);
    let rounded = if y >= half_up { t + 1 } else { t };
    render_scaled(&rounded, places)
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub inequality: Inequality,
    #[serde_as(as = "DisplayFromStr")]
    pub r2: Rational,
    pub r2_decimal: String,
    pub r_decimal: String,
}

pub fn threshold_report(ineqs: &[Inequality]) -> Vec<Threshold> {
    ineqs
        .iter()
        .filter_map(|i| {
            noise_threshold(i).map(|r2| Threshold {
                inequality: i.clone(),
                r2_decimal: decimal(&r2, 5),
                r_decimal: sqrt_decimal(&r2, 5),
                r2,
            })
        })
        .collect()
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: Inequality,
    #[serde_as(as = "DisplayFromStr")]
    pub value: Rational,
}

pub fn violations(ineqs: &[Inequality], point: &CorrelationPoint) -> Vec<Violation> {
    ineqs
        .iter()
        .filter_map(|i| {
            let (value, violated) = evaluate(i, point);
            violated.then(|| Violation { inequality: i.clone(), value })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CabelloSource {
    /// Every context product equals its parity.
    CompatibilityIdentities,
    Deterministic(DeterministicAssignment),
}

/// Signed sum of the six context products, each weighted by its parity.
pub fn cabello_r(scenario: &Scenario, source: &CabelloSource) -> Rational {
    let total: i64 = scenario
        .contexts
        .iter()
        .map(|ctx| {
            let product = match source {
                CabelloSource::CompatibilityIdentities => ctx.parity,
                CabelloSource::Deterministic(d) => d.product(ctx),
            };
            i64::from(ctx.parity * product)
        })
        .sum();
    rat(total)
}
