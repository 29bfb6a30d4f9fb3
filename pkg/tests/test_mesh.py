import numpy as np
import pytest

from hctvem.mesh import (MAX_LEVEL, MeshError, export_mesh,
                         gen_irregular8_mesh, gen_uniform_mesh,
                         generate_mesh, macro_split, split_hct)


class TestUniformFamily:
    @pytest.mark.parametrize("level", [1, 2, 3, 4])
    def test_counts(self, level):
        n = 2 ** (level - 1)
        m = gen_uniform_mesh(level)
        assert m.num_vertices == (n + 1) ** 2
        assert m.num_triangles == 2 * n * n

    def test_all_triangles_ccw_and_cover_unit_square(self):
        m = gen_uniform_mesh(3)
        areas = m.signed_areas()
        assert np.all(areas > 0)
        assert np.isclose(areas.sum(), 1.0)

    def test_h_max_halves_per_level(self):
        h = [gen_uniform_mesh(l).h_max for l in (1, 2, 3)]
        assert np.allclose(h, [h[0], h[0] / 2, h[0] / 4])


class TestIrregular8Family:
    def test_level_1_is_the_8_triangle_pattern(self):
        m = gen_irregular8_mesh(1)
        assert m.num_triangles == 8
        assert m.num_vertices == 9

    def test_level_2_tiles_and_deduplicates(self):
        m = gen_irregular8_mesh(2)
        assert m.num_triangles == 32
        # 4 tiles x 9 vertices minus shared tile-boundary vertices
        assert m.num_vertices == 25

    def test_all_triangles_ccw_and_cover_unit_square(self):
        m = gen_irregular8_mesh(2)
        areas = m.signed_areas()
        assert np.all(areas > 0)
        assert np.isclose(areas.sum(), 1.0)

    def test_contains_noncongruent_shapes(self):
        m = gen_irregular8_mesh(1)
        areas = np.round(m.signed_areas(), 12)
        assert len(set(areas)) > 1


class TestTopology:
    @pytest.mark.parametrize("family", ["uniform", "irregular8"])
    def test_edge_triangle_consistency(self, family):
        m = generate_mesh(family, 2)
        # every interior edge is shared by exactly two triangles
        interior = ~m.boundary_edge
        assert np.all(m.edge_tris[interior, 1] >= 0)
        assert np.all(m.edge_tris[m.boundary_edge, 1] == -1)
        # tri_edges round trip: each triangle lists its own edges
        for t in range(m.num_triangles):
            tri = set(m.triangles[t])
            for e in m.tri_edges[t]:
                assert set(m.edges[e]) <= tri

    def test_boundary_vertices_on_square_boundary(self):
        m = generate_mesh("irregular8", 2)
        v = m.vertices[m.boundary_vertex]
        on_edge = (np.isclose(v, 0.0) | np.isclose(v, 1.0)).any(axis=1)
        assert on_edge.all()
        inner = m.vertices[~m.boundary_vertex]
        assert np.all((inner > 0) & (inner < 1))


class TestMacroSplit:
    def test_split_preserves_area_and_orientation(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.2], [0.3, 0.8]])
        ms = macro_split(coords)
        assert np.allclose(ms.barycenter, coords.mean(axis=0))
        areas = []
        for sub in ms.sub_triangles:
            d1, d2 = sub[1] - sub[0], sub[2] - sub[0]
            areas.append(0.5 * (d1[0] * d2[1] - d1[1] * d2[0]))
        areas = np.array(areas)
        assert np.all(areas > 0)
        d1, d2 = coords[1] - coords[0], coords[2] - coords[0]
        assert np.isclose(areas.sum(), 0.5 * (d1[0] * d2[1] - d1[1] * d2[0]))

    def test_split_hct_uses_mesh_triangle(self):
        m = gen_uniform_mesh(1)
        ms = split_hct(m, 0)
        assert ms.parent == 0
        assert np.allclose(ms.barycenter, m.triangle_coords(0).mean(axis=0))


class TestValidationAndExport:
    @pytest.mark.parametrize("bad", [0, -1, MAX_LEVEL + 1, 1.5, "2"])
    def test_bad_levels_rejected(self, bad):
        with pytest.raises(MeshError):
            gen_uniform_mesh(bad)

    def test_unknown_family_rejected(self):
        with pytest.raises(MeshError):
            generate_mesh("hexagonal", 1)

    def test_export_roundtrip_header(self, tmp_path):
        m = gen_irregular8_mesh(1)
        path = tmp_path / "mesh.txt"
        export_mesh(m, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "vertices 9 triangles 8"
        assert len(lines) == 1 + 9 + 8
        verts = np.array([[float(t) for t in ln.split()]
                          for ln in lines[1:10]])
        assert np.allclose(verts, m.vertices)
