"""sproclab: a finite-dimensional verification lab for robust Lagrangian
certificate procedures over families of perturbation functions."""

__version__ = "0.1.0"
