"""Jet-group calculus, homogeneity and projective equivalence for
higher-order ODE systems on R^m."""
