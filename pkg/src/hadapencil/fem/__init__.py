"""Piecewise-linear finite elements for the Dirichlet Laplacian on mapped meshes."""
from .assemble import InvertedElementError, assemble, element_matrices, prolong
from .eigs import ConvergenceError, EigResult, FactorizationError, lowest_eigs, m_gram
from .postprocess import boundary_edges, recovered_gradients, rellich_flux
from .mesh import Mesh, MeshError, disk_mesh, mesh_domain, read_mesh, square_mesh, write_mesh

__all__ = [
    "ConvergenceError",
    "EigResult",
    "FactorizationError",
    "InvertedElementError",
    "Mesh",
    "MeshError",
    "assemble",
    "boundary_edges",
    "disk_mesh",
    "element_matrices",
    "lowest_eigs",
    "m_gram",
    "mesh_domain",
    "prolong",
    "read_mesh",
    "recovered_gradients",
    "rellich_flux",
    "square_mesh",
    "write_mesh",
]
