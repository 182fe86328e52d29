"""
Unfitted finite elements (SBM, CutFEM) and POD-Galerkin reduced-order models
"""
