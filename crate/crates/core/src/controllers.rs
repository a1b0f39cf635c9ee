//! Homogeneous relative-measurement controllers.
//!
//! A controller is five maps over the local view of a vehicle: the windows
//! `e_{k-m1..=k+m2}` and `edot_{k-m1..=k+m2}`, the incoming channel signals,
//! its memory, `N` and `t`. The same maps run at every vehicle; only the
//! window contents differ. Window slots that fall outside `1..=N` are marked
//! absent, never zero-filled.
//!
//! Timing: all vehicles are evaluated on the frozen pre-step state. Signals
//! produced by `g1`/`g2` at step `n` arrive as `c_plus`/`c_minus` at step
//! `n + 1`, one hop per step.

use std::fmt;
use std::sync::Arc;

use crate::chain::{ChainState, StepInput};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spacing-error windows around one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodWindow<T> {
    m1: usize,
    m2: usize,
    e: Vec<Option<T>>,
    edot: Vec<Option<T>>,
}

impl<T: Scalar> NeighborhoodWindow<T> {
    /// Window of vehicle `k` given `e`, `edot` indexed so that `e[i] = e_{i+1}`.
    pub fn gather(e: &[T], edot: &[T], k: usize, m1: usize, m2: usize) -> Self {
        let n = e.len();
        let lo = k as isize - m1 as isize;
        let slot = |src: &[T], j: isize| -> Option<T> {
            (j >= 1 && j as usize <= n).then(|| src[j as usize - 1].clone())
        };
        let e_win = (0..=(m1 + m2) as isize).map(|i| slot(e, lo + i)).collect();
        let edot_win = (0..=(m1 + m2) as isize)
            .map(|i| slot(edot, lo + i))
            .collect();
        Self {
            m1,
            m2,
            e: e_win,
            edot: edot_win,
        }
    }

    /// Window with explicit slots; `e` and `edot` must have length `m1 + m2 + 1`.
    pub fn from_slots(m1: usize, m2: usize, e: Vec<Option<T>>, edot: Vec<Option<T>>) -> Result<Self> {
        for (what, seq) in [("e_window", &e), ("edot_window", &edot)] {
            if seq.len() != m1 + m2 + 1 {
                return Err(Error::Dimension {
                    what,
                    expected: m1 + m2 + 1,
                    found: seq.len(),
                });
            }
        }
        Ok(Self { m1, m2, e, edot })
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    fn index(&self, offset: isize) -> Option<usize> {
        let i = offset + self.m1 as isize;
        (offset >= -(self.m1 as isize) && offset <= self.m2 as isize).then_some(i as usize)
    }

    /// `e_{k+offset}`; `None` when absent or outside the window.
    pub fn e(&self, offset: isize) -> Option<&T> {
        self.index(offset).and_then(|i| self.e[i].as_ref())
    }

    pub fn edot(&self, offset: isize) -> Option<&T> {
        self.index(offset).and_then(|i| self.edot[i].as_ref())
    }

    /// `true` for slots outside the chain, in window order `k-m1..=k+m2`.
    pub fn absent_mask(&self) -> Vec<bool> {
        self.e.iter().map(Option::is_none).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.e.iter().all(Option::is_some)
    }

    pub fn e_slots(&self) -> &[Option<T>] {
        &self.e
    }

    pub fn edot_slots(&self) -> &[Option<T>] {
        &self.edot
    }
}

/// One term of a window-linear law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    E(isize),
    Edot(isize),
}

/// A window after boundary adaptation: only present slots remain addressable,
/// and the original absent mask is kept for controllers that want it.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveWindow<T> {
    present: Vec<(isize, T, T)>,
    absent_mask: Vec<bool>,
}

impl<T: Scalar> EffectiveWindow<T> {
    pub fn e(&self, offset: isize) -> Option<&T> {
        self.present
            .iter()
            .find(|(o, _, _)| *o == offset)
            .map(|(_, e, _)| e)
    }

    pub fn edot(&self, offset: isize) -> Option<&T> {
        self.present
            .iter()
            .find(|(o, _, _)| *o == offset)
            .map(|(_, _, d)| d)
    }

    pub fn absent_mask(&self) -> &[bool] {
        &self.absent_mask
    }

    pub fn is_interior(&self) -> bool {
        self.absent_mask.iter().all(|a| !a)
    }

    /// `sum coeff * term` over the terms whose slot is present; terms on absent
    /// slots are dropped.
    pub fn sum(&self, terms: &[(Term, T)]) -> T {
        terms.iter().fold(T::zero(), |acc, (term, coeff)| {
            let value = match *term {
                Term::E(o) => self.e(o),
                Term::Edot(o) => self.edot(o),
            };
            match value {
                Some(v) => acc + coeff.clone() * v.clone(),
                None => acc,
            }
        })
    }
}

/// Removes absent slots from the window. Built-in laws evaluate their sums on
/// the result, so every term on a missing neighbour disappears; user maps see
/// the same effective window together with the absent mask and decide for
/// themselves.
pub fn boundary_adapt<T: Scalar>(window: &NeighborhoodWindow<T>) -> EffectiveWindow<T> {
    let present = (0..window.len())
        .filter_map(|i| {
            let offset = i as isize - window.m1 as isize;
            match (&window.e[i], &window.edot[i]) {
                (Some(e), Some(d)) => Some((offset, e.clone(), d.clone())),
                _ => None,
            }
        })
        .collect();
    EffectiveWindow {
        present,
        absent_mask: window.absent_mask(),
    }
}

/// Everything a vehicle's controller may read.
#[derive(Debug)]
pub struct LocalView<'a, T> {
    pub window: &'a EffectiveWindow<T>,
    pub c_plus: &'a [T],
    pub c_minus: &'a [T],
    pub xi: &'a [T],
    pub chain_size: usize,
    pub t: &'a T,
}

pub type ScalarMap<T> = Arc<dyn Fn(&LocalView<'_, T>) -> T + Send + Sync>;
pub type VectorMap<T> = Arc<dyn Fn(&LocalView<'_, T>) -> Vec<T> + Send + Sync>;

/// A homogeneous control law: radii, memory and channel sizes, and the maps
/// `f1`, `f2` (integrated control), `g1`, `g2` (forward/backward signals) and
/// `h` (memory update).
#[derive(Clone)]
pub struct ControllerDefinition<T> {
    name: String,
    m1: usize,
    m2: usize,
    n_xi: usize,
    n_c: usize,
    f1: ScalarMap<T>,
    f2: ScalarMap<T>,
    g1: VectorMap<T>,
    g2: VectorMap<T>,
    h: VectorMap<T>,
}

impl<T> fmt::Debug for ControllerDefinition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControllerDefinition")
            .field("name", &self.name)
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("n_xi", &self.n_xi)
            .field("n_c", &self.n_c)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ControllerDefinition<T> {
    /// A controller with the given radii whose maps all return zero. Use the
    /// `with_*` methods to install real maps.
    pub fn new(name: impl Into<String>, m1: usize, m2: usize) -> Self {
        Self {
            name: name.into(),
            m1,
            m2,
            n_xi: 0,
            n_c: 0,
            f1: Arc::new(|_| T::zero()),
            f2: Arc::new(|_| T::zero()),
            g1: Arc::new(|_| Vec::new()),
            g2: Arc::new(|_| Vec::new()),
            h: Arc::new(|_| Vec::new()),
        }
    }

    /// Independent once- and twice-integrated control maps.
    pub fn with_control(mut self, f1: ScalarMap<T>, f2: ScalarMap<T>) -> Self {
        self.f1 = f1;
        self.f2 = f2;
        self
    }

    /// Sample-and-hold actuation of a force law `f`: `u1 = f dt`, `u2 = f dt^2 / 2`.
    pub fn with_sample_and_hold<F>(self, dt: T, force: F) -> Self
    where
        F: Fn(&LocalView<'_, T>) -> T + Send + Sync + 'static,
    {
        let force = Arc::new(force);
        let f_once = Arc::clone(&force);
        let dt1 = dt.clone();
        let dt2 = dt.clone() * dt * T::half();
        self.with_control(
            Arc::new(move |view| f_once(view) * dt1.clone()),
            Arc::new(move |view| force(view) * dt2.clone()),
        )
    }

    pub fn with_channels(mut self, n_c: usize, g1: VectorMap<T>, g2: VectorMap<T>) -> Self {
        self.n_c = n_c;
        self.g1 = g1;
        self.g2 = g2;
        self
    }

    pub fn with_memory(mut self, n_xi: usize, h: VectorMap<T>) -> Self {
        self.n_xi = n_xi;
        self.h = h;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn n_xi(&self) -> usize {
        self.n_xi
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Evaluates all five maps on one local view.
    pub fn evaluate(&self, view: &LocalView<'_, T>) -> Result<VehicleOutput<T>> {
        let out = VehicleOutput {
            u1: (self.f1)(view),
            u2: (self.f2)(view),
            g1: (self.g1)(view),
            g2: (self.g2)(view),
            h: (self.h)(view),
        };
        for (what, len, expected) in [
            ("g1 output", out.g1.len(), self.n_c),
            ("g2 output", out.g2.len(), self.n_c),
            ("h output", out.h.len(), self.n_xi),
        ] {
            if len != expected {
                return Err(Error::Dimension {
                    what,
                    expected,
                    found: len,
                });
            }
        }
        Ok(out)
    }

    fn check_state(&self, state: &ChainState<T>) -> Result<()> {
        for k in 0..state.vehicles() {
            for (what, len, expected) in [
                ("xi", state.xi[k].len(), self.n_xi),
                ("c_plus", state.c_plus[k].len(), self.n_c),
                ("c_minus", state.c_minus[k].len(), self.n_c),
            ] {
                if len != expected {
                    return Err(Error::Dimension {
                        what,
                        expected,
                        found: len,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Outputs of one vehicle's controller at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleOutput<T> {
    pub u1: T,
    pub u2: T,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
    pub h: Vec<T>,
}

/// Chain-wide controller outputs for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutputs<T> {
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    /// Signals to deliver at the next step.
    pub next_c_plus: Vec<Vec<T>>,
    pub next_c_minus: Vec<Vec<T>>,
    pub next_xi: Vec<Vec<T>>,
}

impl<T: Scalar> ControlOutputs<T> {
    /// Step input combining these controls with the given disturbances.
    pub fn into_step_input(self, d1: Vec<T>, d2: Vec<T>) -> (StepInput<T>, ControllerState<T>) {
        (
            StepInput {
                u1: self.u1,
                u2: self.u2,
                d1,
                d2,
            },
            ControllerState {
                xi: self.next_xi,
                c_plus: self.next_c_plus,
                c_minus: self.next_c_minus,
            },
        )
    }
}

/// Memory and channel contents for the next step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState<T> {
    pub xi: Vec<Vec<T>>,
    pub c_plus: Vec<Vec<T>>,
    pub c_minus: Vec<Vec<T>>,
}

/// Per-vehicle outputs on the frozen state, before channel routing.
pub fn evaluate_vehicles<T: Scalar>(
    controller: &ControllerDefinition<T>,
    state: &ChainState<T>,
    dt: &T,
) -> Result<Vec<VehicleOutput<T>>> {
    controller.check_state(state)?;
    let (e, edot) = state.spacing_errors();
    let t = state.time(dt);
    let chain_size = state.chain_size();
    (0..state.vehicles())
        .map(|k| {
            let window = NeighborhoodWindow::gather(&e, &edot, k, controller.m1, controller.m2);
            let effective = boundary_adapt(&window);
            let view = LocalView {
                window: &effective,
                c_plus: &state.c_plus[k],
                c_minus: &state.c_minus[k],
                xi: &state.xi[k],
                chain_size,
                t: &t,
            };
            controller.evaluate(&view)
        })
        .collect()
}

/// Evaluates every vehicle on the frozen state and routes channel signals one
/// hop: vehicle `k`'s `g1` becomes `c_plus` of `k + 1`, its `g2` becomes
/// `c_minus` of `k - 1`. Ends of the chain receive zero vectors.
pub fn evaluate_chain<T: Scalar>(
    controller: &ControllerDefinition<T>,
    state: &ChainState<T>,
    dt: &T,
) -> Result<ControlOutputs<T>> {
    let outputs = evaluate_vehicles(controller, state, dt)?;
    let m = outputs.len();
    let zero_signal = vec![T::zero(); controller.n_c];
    let mut next_c_plus = vec![zero_signal.clone(); m];
    let mut next_c_minus = vec![zero_signal; m];
    let mut u1 = Vec::with_capacity(m);
    let mut u2 = Vec::with_capacity(m);
    let mut next_xi = Vec::with_capacity(m);
    for (k, out) in outputs.into_iter().enumerate() {
        if k + 1 < m {
            next_c_plus[k + 1] = out.g1;
        }
        if k >= 1 {
            next_c_minus[k - 1] = out.g2;
        }
        u1.push(out.u1);
        u2.push(out.u2);
        next_xi.push(out.h);
    }
    Ok(ControlOutputs {
        u1,
        u2,
        next_c_plus,
        next_c_minus,
        next_xi,
    })
}

/// All maps return zero. Declares `m1 = m2 = 1` so it shares the Lemma window
/// of the other built-ins.
pub fn zero_controller<T: Scalar>() -> ControllerDefinition<T> {
    ControllerDefinition::new("zero", 1, 1)
}

/// Bidirectional PD with symmetric position gain and asymmetric velocity gains:
/// `f = b1 (v_{k-1} - v_k) + b2 (v_{k+1} - v_k) + a (x_{k-1} - x_k) + a (x_{k+1} - x_k)`,
/// i.e. `b1 edot_k - b2 edot_{k+1} + a e_k - a e_{k+1}`, held over each step.
pub fn pd_asymmetric<T: Scalar>(a: T, b1: T, b2: T, dt: T) -> ControllerDefinition<T> {
    let terms = vec![
        (Term::Edot(0), b1),
        (Term::Edot(1), -b2),
        (Term::E(0), a.clone()),
        (Term::E(1), -a),
    ];
    ControllerDefinition::new("pd-asymmetric", 1, 1)
        .with_sample_and_hold(dt, move |view| view.window.sum(&terms))
}

/// [`pd_asymmetric`] with `b1 = b2 = b`.
pub fn pd_symmetric<T: Scalar>(a: T, b: T, dt: T) -> ControllerDefinition<T> {
    let mut c = pd_asymmetric(a, b.clone(), b, dt);
    c.name = "pd-symmetric".into();
    c
}

/// Saturated law with one-hop communication and a leaky memory:
/// `g1 = e_k`, `g2 = e_{k+1}`, `h = (xi + e_k) / 2`,
/// `f = clamp(kappa (e_k - e_{k+1} + c_plus - c_minus + xi), -sat, sat)`.
pub fn nonlinear_comm_controller<T: Scalar>(kappa: T, sat_limit: T, dt: T) -> ControllerDefinition<T> {
    let lo = -sat_limit.clone();
    let hi = sat_limit;
    let spacing = vec![(Term::E(0), T::one()), (Term::E(1), -T::one())];
    let forward = vec![(Term::E(0), T::one())];
    let backward = vec![(Term::E(1), T::one())];
    let memory_in = vec![(Term::E(0), T::half())];
    ControllerDefinition::new("nonlinear-comm", 1, 1)
        .with_channels(
            1,
            Arc::new(move |view| vec![view.window.sum(&forward)]),
            Arc::new(move |view| vec![view.window.sum(&backward)]),
        )
        .with_memory(
            1,
            Arc::new(move |view| vec![view.xi[0].clone() * T::half() + view.window.sum(&memory_in)]),
        )
        .with_sample_and_hold(dt, move |view| {
            let drive = view.window.sum(&spacing) + view.c_plus[0].clone() - view.c_minus[0].clone()
                + view.xi[0].clone();
            (kappa.clone() * drive).clamp_to(&lo, &hi)
        })
}
