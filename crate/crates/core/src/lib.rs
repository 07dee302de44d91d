pub mod automata;
pub mod env;
pub mod learner;
pub mod ltl;
pub mod mdp;
pub mod product;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod verifier;
