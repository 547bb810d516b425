"""Frequency-domain boundary integral solvers for closed curves and open arcs."""
