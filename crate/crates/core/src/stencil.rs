//! Finite-difference operators on phase-space fields.
//!
//! p and ω use fourth-order centered differences with fourth-order one-sided
//! closures at the edges (second order below five points). x is periodic
//! with a second-order centered difference. Mixed and higher derivatives are
//! compositions of the first-derivative operators.

use rayon::prelude::*;

use crate::phase_space::{PhaseField, PhaseGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    P,
    Omega,
    X,
}

#[derive(Clone, Debug)]
pub struct DerivativeStencil {
    n_p: usize,
    n_omega: usize,
    n_x: usize,
    dp: f64,
    domega: f64,
    dx: f64,
}

/// First-derivative weights for node `j` of a non-periodic line of `n`
/// points: returns (offset of the first weight relative to j, weights).
fn open_weights(j: usize, n: usize) -> (isize, &'static [f64], f64) {
    const C4: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const L0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const L1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    const R1: [f64; 5] = [-1.0, 6.0, -18.0, 10.0, 3.0];
    const R0: [f64; 5] = [3.0, -16.0, 36.0, -48.0, 25.0];
    const C2: [f64; 3] = [-1.0, 0.0, 1.0];
    const L2: [f64; 3] = [-3.0, 4.0, -1.0];
    const R2: [f64; 3] = [1.0, -4.0, 3.0];
    const F1: [f64; 2] = [-1.0, 1.0];
    if n >= 5 {
        match j {
            0 => (0, &L0, 12.0),
            1 => (-1, &L1, 12.0),
            _ if j == n - 2 => (-3, &R1, 12.0),
            _ if j == n - 1 => (-4, &R0, 12.0),
            _ => (-2, &C4, 12.0),
        }
    } else if n >= 3 {
        match j {
            0 => (0, &L2, 2.0),
            _ if j == n - 1 => (-2, &R2, 2.0),
            _ => (-1, &C2, 2.0),
        }
    } else if j == 0 {
        (0, &F1, 1.0)
    } else {
        (-1, &F1, 1.0)
    }
}

impl DerivativeStencil {
    pub fn new(grid: &PhaseGrid) -> Self {
        DerivativeStencil {
            n_p: grid.n_p,
            n_omega: grid.n_omega,
            n_x: grid.n_x,
            dp: grid.dp,
            domega: grid.domega,
            dx: grid.dx,
        }
    }

    pub fn derivative(&self, f: &PhaseField, axis: Axis) -> PhaseField {
        assert!(
            f.n_p == self.n_p && f.n_omega == self.n_omega && f.n_x == self.n_x,
            "field does not match stencil grid"
        );
        let (n, stride, h) = match axis {
            Axis::P => (self.n_p, self.n_omega * self.n_x, self.dp),
            Axis::Omega => (self.n_omega, self.n_x, self.domega),
            Axis::X => (self.n_x, 1, self.dx),
        };
        let src = &f.data;
        let data = (0..src.len())
            .into_par_iter()
            .map(|i| {
                let j = (i / stride) % n;
                if axis == Axis::X {
                    let base = i - j;
                    let up = base + (j + 1) % n;
                    let down = base + (j + n - 1) % n;
                    (src[up] - src[down]) / (2.0 * h)
                } else {
                    let (off, w, denom) = open_weights(j, n);
                    let start = (i as isize + off * stride as isize) as usize;
                    let mut acc = 0.0;
                    for (k, c) in w.iter().enumerate() {
                        if *c != 0.0 {
                            acc += c * src[start + k * stride];
                        }
                    }
                    acc / (denom * h)
                }
            })
            .collect();
        PhaseField { data, ..f.clone_shape() }
    }

    pub fn d_p(&self, f: &PhaseField) -> PhaseField {
        self.derivative(f, Axis::P)
    }

    pub fn d_omega(&self, f: &PhaseField) -> PhaseField {
        self.derivative(f, Axis::Omega)
    }

    pub fn d_x(&self, f: &PhaseField) -> PhaseField {
        self.derivative(f, Axis::X)
    }
}

impl PhaseField {
    fn clone_shape(&self) -> PhaseField {
        PhaseField {
            n_p: self.n_p,
            n_omega: self.n_omega,
            n_x: self.n_x,
            data: Vec::new(),
        }
    }
}

/// `[A, B] = ∂A/∂x ∂B/∂p − ∂A/∂p ∂B/∂x`.
pub fn poisson_bracket(a: &PhaseField, b: &PhaseField, st: &DerivativeStencil) -> PhaseField {
    let (ax, ap) = (st.d_x(a), st.d_p(a));
    let (bx, bp) = (st.d_x(b), st.d_p(b));
    let lhs = ax.mul(&bp);
    let rhs = ap.mul(&bx);
    lhs.sub(&rhs)
}

/// Every derivative of a distribution that the expanded collision operator,
/// the quantum correction and the force terms consume.
#[derive(Clone, Debug)]
pub struct DerivativeSet {
    pub f: PhaseField,
    pub fp: PhaseField,
    pub fw: PhaseField,
    pub fpp: PhaseField,
    pub fpw: PhaseField,
    pub fww: PhaseField,
    pub fppw: PhaseField,
    pub fppp: PhaseField,
    pub fpppw: PhaseField,
    pub fwwp: PhaseField,
    pub fx: PhaseField,
    pub fxp: PhaseField,
    pub fxw: PhaseField,
    pub fxpw: PhaseField,
    pub fwwx: PhaseField,
    pub fppx: PhaseField,
    pub fppwx: PhaseField,
}

impl DerivativeSet {
    /// `fx` overrides the periodic x stencil when an exact x-gradient is
    /// known (the local-equilibrium seed is not periodic in x).
    pub fn new(f: &PhaseField, st: &DerivativeStencil, fx: Option<PhaseField>) -> Self {
        let fp = st.d_p(f);
        let fw = st.d_omega(f);
        let fpp = st.d_p(&fp);
        let fpw = st.d_omega(&fp);
        let fww = st.d_omega(&fw);
        let fppw = st.d_omega(&fpp);
        let fppp = st.d_p(&fpp);
        let fpppw = st.d_omega(&fppp);
        let fwwp = st.d_p(&fww);
        let fx = fx.unwrap_or_else(|| st.d_x(f));
        let fxp = st.d_p(&fx);
        let fxw = st.d_omega(&fx);
        let fxpw = st.d_omega(&fxp);
        let fwwx = st.d_omega(&fxw);
        let fppx = st.d_p(&fxp);
        let fppwx = st.d_omega(&fppx);
        DerivativeSet {
            f: f.clone(),
            fp,
            fw,
            fpp,
            fpw,
            fww,
            fppw,
            fppp,
            fpppw,
            fwwp,
            fx,
            fxp,
            fxw,
            fxpw,
            fwwx,
            fppx,
            fppwx,
        }
    }
}
