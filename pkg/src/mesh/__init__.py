"""
Background mesh modules for the unfitted ROM toolkit
"""

from src.mesh.background_mesh import BackgroundMesh, build_structured_mesh

__all__ = ['BackgroundMesh', 'build_structured_mesh']
