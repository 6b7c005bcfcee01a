"""Recurrent neural quantum states in Euclidean, Poincare-ball and Lorentz geometry,
trained by variational Monte Carlo on open Heisenberg J1-J2-J3 chains."""

__version__ = "0.1.0"
