//! Scalar reverse-mode differentiation.
//!
//! A [`Tape`] records every elementary operation applied to [`Var`]s together
//! with the local partial derivatives, so a single reverse sweep yields the
//! gradient of a scalar output with respect to all inputs. Complex quantities
//! are carried as pairs of real channels.
//!
//! Model code that needs to run both on plain `f64` and on the tape is written
//! against the [`Real`] trait.

use std::cell::{Cell, RefCell};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{CvkanError, Result};

#[derive(Debug, Clone, Copy)]
struct Node {
    op: &'static str,
    parents: [(usize, f64); 2],
    arity: u8,
}

/// Record of a forward computation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    failure: Cell<Option<(&'static str, usize)>>,
}

/// A value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: usize,
    value: f64,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var(#{}: {})", self.index, self.value)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A leaf (input or constant).
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push("leaf", value, &[])
    }

    fn push(&self, op: &'static str, value: f64, parents: &[(usize, f64)]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.len();
        let finite = value.is_finite() && parents.iter().all(|(_, d)| d.is_finite());
        if !finite && self.failure.get().is_none() {
            self.failure.set(Some((op, index)));
        }
        let mut slots = [(0, 0.0); 2];
        slots[..parents.len()].copy_from_slice(parents);
        nodes.push(Node {
            op,
            parents: slots,
            arity: parents.len() as u8,
        });
        Var {
            tape: self,
            index,
            value,
        }
    }

    /// First operation that produced a non-finite value or partial, if any.
    pub fn failure(&self) -> Option<(&'static str, usize)> {
        self.failure.get()
    }

    /// Adjoints of every node with respect to `output`.
    pub fn backward(&self, output: Var<'_>) -> Result<Vec<f64>> {
        if let Some((op, node)) = self.failure() {
            return Err(CvkanError::Gradient { op, node });
        }
        let nodes = self.nodes.borrow();
        let mut adjoint = vec![0.0f64; nodes.len()];
        adjoint[output.index] = 1.0;
        for i in (0..=output.index).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            if !a.is_finite() {
                return Err(CvkanError::Gradient {
                    op: node.op,
                    node: i,
                });
            }
            for &(p, d) in &node.parents[..node.arity as usize] {
                adjoint[p] += a * d;
            }
        }
        Ok(adjoint)
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    fn unary(self, op: &'static str, value: f64, d: f64) -> Self {
        self.tape.push(op, value, &[(self.index, d)])
    }

    fn binary(self, other: Self, op: &'static str, value: f64, da: f64, db: f64) -> Self {
        debug_assert!(std::ptr::eq(self.tape, other.tape), "vars from different tapes");
        self.tape
            .push(op, value, &[(self.index, da), (other.index, db)])
    }
}

/// Scalar field abstraction shared by `f64` and [`Var`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant living in the same context as `self`.
    fn lift(&self, value: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sigmoid(self) -> Self;

    fn square(self) -> Self {
        self * self
    }

    fn silu(self) -> Self {
        self * self.sigmoid()
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Real for f64 {
    fn lift(&self, value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }
}

impl<'t> Real for Var<'t> {
    fn lift(&self, value: f64) -> Self {
        self.tape.var(value)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary("exp", e, e)
    }
    fn ln(self) -> Self {
        self.unary("ln", self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.unary("sqrt", s, 0.5 / s)
    }
    fn sigmoid(self) -> Self {
        let s = sigmoid(self.value);
        self.unary("sigmoid", s, s * (1.0 - s))
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, "add", self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, "sub", self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, "mul", self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, "div", q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary("neg", -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        self.unary("add_const", self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self.unary("sub_const", self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.unary("mul_const", self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.unary("div_const", self.value / rhs, 1.0 / rhs)
    }
}

/// Gradient of `loss_fn` at `params`.
///
/// `loss_fn` receives the tape and one leaf per parameter and must return the
/// scalar loss built from them.
pub fn grad<F>(loss_fn: F, params: &[f64]) -> Result<Vec<f64>>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let leaves: Vec<Var<'_>> = params.iter().map(|&p| tape.var(p)).collect();
    let loss = loss_fn(&tape, &leaves);
    let adjoint = tape.backward(loss)?;
    Ok(leaves.iter().map(|v| adjoint[v.index]).collect())
}
