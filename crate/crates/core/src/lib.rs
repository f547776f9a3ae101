//! Ground states of QUBO and Ising spin-glass problems by driving a matrix
//! product state from a transverse-field Hamiltonian to the problem
//! Hamiltonian, with two-site DMRG sweeps at every step.
//!
//! Layering, bottom up: [`tensor`] (dense labeled tensors), [`mps`] and
//! [`mpo`] (tensor trains), [`dmrg`] (sweeps), [`ising`] (QUBO and Ising
//! models), [`drive`] (the driving schedule). [`sudoku`] and [`maxcut`]
//! build models from puzzles and graphs; [`oracle`] gives exact answers for
//! small instances.

pub mod dmrg;
pub mod drive;
pub mod ising;
pub mod maxcut;
pub mod mpo;
pub mod mps;
pub mod oracle;
pub mod sudoku;
pub mod tensor;
