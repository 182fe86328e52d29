"""
Geometry modules: level sets, SBM surrogate boundaries, CutFEM classification
"""

from src.geometry.level_set import Box, Circle, Ellipse, LevelSet, closest_point, phi_eval, phi_grad
from src.geometry.surrogate import SurrogateGeometry, build_surrogate
from src.geometry.cut_cell import CutClassification, classify_cut

__all__ = [
    'Box', 'Circle', 'Ellipse', 'LevelSet', 'closest_point', 'phi_eval', 'phi_grad',
    'SurrogateGeometry', 'build_surrogate', 'CutClassification', 'classify_cut',
]
