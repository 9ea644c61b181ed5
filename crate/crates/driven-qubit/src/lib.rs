//! Simulation toolkit for a classically driven two-level system coupled to an
//! Ohmic bosonic bath.
//!
//! Two solvers are provided side by side: the perturbative Lindblad master
//! equation (with and without the bath-induced energy shift of the qubit
//! frequency) and the numerically exact stochastic Liouville equation with
//! dissipation (SLED), in which the bath enters through a colored Gaussian
//! noise process plus deterministic friction terms.  On top of the solvers sit
//! closed-form steady-state analytics, pump-probe spectroscopy with sideband
//! fitting, and a semiclassical model of dispersive readout through a
//! far-detuned resonator.
//!
//! Internally every frequency-like quantity is an angular frequency in rad/ns,
//! every time is in ns, and ħ = k_B = 1.

pub mod algebra;
pub mod bath;
pub mod fit;
pub mod noise;
pub mod propagate;
pub mod readout;
pub mod spectroscopy;
pub mod steady;

mod quad;
