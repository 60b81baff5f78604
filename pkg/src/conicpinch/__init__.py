"""Curvature pinching of conic 2-spheres: closed forms, solvers, construction, diagnostics."""
