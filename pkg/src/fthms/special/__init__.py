"""Bessel/Hankel functions and the Helmholtz fundamental solution."""
