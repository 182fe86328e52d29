"""
Test script for the structured background mesh
Run: python test_mesh.py   (or pytest test_mesh.py)
"""
import sys
import traceback

import numpy as np
import pytest

from src.mesh.background_mesh import build_structured_mesh, mesh_summary
from src.utils.errors import InvalidArgumentError


def test_minimal_grid_counts():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 1, 1)
    assert mesh.n_vertices == 4
    assert mesh.n_triangles == 2
    assert mesh.n_facets == 5


def test_count_formulas():
    mesh = build_structured_mesh((-2.0, 2.0, -1.0, 1.0), 40, 20)
    assert mesh.n_vertices == 861
    assert mesh.n_triangles == 1600
    # Euler relation of a disk
    assert mesh.n_vertices - mesh.n_facets + mesh.n_triangles == 1


def test_areas_partition_the_rectangle():
    mesh = build_structured_mesh((-2.0, 2.0, -1.0, 1.0), 13, 7)
    assert np.all(mesh.areas > 0.0)
    assert abs(mesh.areas.sum() - 8.0) < 1e-12 * 8.0


def test_h_is_max_edge():
    mesh = build_structured_mesh((0.0, 2.0, 0.0, 1.0), 4, 2)
    assert mesh.h == pytest.approx(np.hypot(0.5, 0.5))
    assert mesh.h == pytest.approx(mesh.edge_lengths().max())


def test_facet_incidence():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 3, 2)
    boundary = mesh.facet_triangles[:, 1] < 0
    assert boundary.sum() == 2 * (3 + 2)
    assert np.all(mesh.facet_triangles[~boundary, 1] >= 0)
    assert np.unique(mesh.facets, axis=0).shape[0] == mesh.n_facets
    for t in range(mesh.n_triangles):
        for f in mesh.triangle_facets[t]:
            assert t in mesh.facet_triangles[f]


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        build_structured_mesh((0.0, 1.0, 0.0, 1.0), 0, 1)
    with pytest.raises(InvalidArgumentError):
        build_structured_mesh((1.0, 0.0, 0.0, 1.0), 2, 2)


def test_deterministic_construction():
    a = build_structured_mesh((-1.0, 1.0, -1.0, 1.0), 5, 4)
    b = build_structured_mesh((-1.0, 1.0, -1.0, 1.0), 5, 4)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.facets, b.facets)
    assert np.array_equal(a.vertices, b.vertices)


def test_facet_normals():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 1, 1)
    # lower triangle (v00, v10, v11): its bottom facet is (0, 1)
    bottom = int(np.flatnonzero((mesh.facets == [0, 1]).all(axis=1))[0])
    assert np.allclose(mesh.facet_normal(bottom, 0), [0.0, -1.0])

    interior = int(np.flatnonzero(mesh.facet_triangles[:, 1] >= 0)[0])
    t0, t1 = mesh.facet_triangles[interior]
    n0 = mesh.facet_normal(interior, t0)
    n1 = mesh.facet_normal(interior, t1)
    assert abs(np.linalg.norm(n0) - 1.0) < 1e-14
    assert np.allclose(n0, -n1)

    with pytest.raises(InvalidArgumentError):
        mesh.facet_normal(bottom, 1)


def test_locate_and_interpolation():
    mesh = build_structured_mesh((-1.0, 1.0, -1.0, 1.0), 4, 4)
    pts = np.array([[0.1, -0.3], [-0.77, 0.9], [1.0, 1.0], [2.0, 0.0]])
    tri, bary = mesh.locate(pts)
    assert tri[-1] == -1
    assert np.allclose(bary[:3].sum(axis=1), 1.0)
    assert np.all(bary[:3] >= -1e-12)

    # P1 interpolation reproduces linear fields exactly
    f = 3.0 * mesh.vertices[:, 0] - 2.0 * mesh.vertices[:, 1] + 0.5
    vals = mesh.interpolation_matrix(pts) @ f
    expected = 3.0 * pts[:3, 0] - 2.0 * pts[:3, 1] + 0.5
    assert np.allclose(vals[:3], expected)
    assert vals[3] == 0.0


def test_stiffness_and_mass():
    mesh = build_structured_mesh((0.0, 2.0, 0.0, 1.0), 6, 3)
    K = mesh.stiffness_matrix()
    ones = np.ones(mesh.n_vertices)
    assert np.abs(K @ ones).max() < 1e-12
    assert abs(K - K.T).max() < 1e-12
    assert ones @ (mesh.mass_matrix() @ ones) == pytest.approx(2.0)
    assert mesh.mass_matrix(lumped=True).diagonal().sum() == pytest.approx(2.0)


def test_side_masks_and_summary():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 3, 2)
    assert mesh.side_vertex_mask('left').sum() == 3
    assert mesh.side_facets('bottom').size == 3
    summary = mesh_summary(mesh)
    assert summary['triangles'] == 12


def test_dump(tmp_path):
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 2, 2)
    path = mesh.write_dump(tmp_path / 'mesh.txt')
    text = path.read_text()
    assert text.startswith("# nodes 9\n")
    assert "# elements 8" in text


if __name__ == "__main__":
    import inspect
    import tempfile
    from pathlib import Path

    print("=" * 70)
    print("Testing Background Mesh")
    print("=" * 70)

    failures = 0
    checks = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith('test_')]
    for i, (name, fn) in enumerate(checks, 1):
        print(f"\n{i}. {name}...")
        try:
            if 'tmp_path' in inspect.signature(fn).parameters:
                with tempfile.TemporaryDirectory() as tmp:
                    fn(Path(tmp))
            else:
                fn()
            print("✅ PASS")
        except Exception as e:
            failures += 1
            print(f"❌ FAIL: {e}")
            traceback.print_exc()

    print("\n" + "=" * 70)
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    print("=" * 70)
    sys.exit(1 if failures else 0)
