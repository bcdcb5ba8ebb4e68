"""curvcert: numerical verification of positive Ricci curvature for
Riemannian submersions, canonical variations, warped products and
Ricci-soliton data."""

__version__ = "0.1.0"
