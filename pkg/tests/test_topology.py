import numpy as np
import pytest
from scipy.stats import spearmanr

from cqie.errors import InfeasibleError, InvalidArgumentError
from cqie.topology import (Topology, TopologyKind, average_connectivity,
                           build_individual, build_pegasus,
                           build_random_regular, build_square_lattice,
                           read_edge_list, remove_random_nodes, sample_patch,
                           write_edge_list)


class TestIndividual:
    @pytest.mark.parametrize("n", [1, 324, 5612])
    def test_sizes(self, n):
        t = build_individual(n)
        assert t.n == n
        assert t.edges == ()
        assert t.kind == TopologyKind.INDIVIDUAL

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgumentError):
            build_individual(0)


class TestSquareLattice:
    @pytest.mark.parametrize("L,expected_edges", [(1, 0), (10, 180), (18, 612)])
    def test_open_edge_counts(self, L, expected_edges):
        t = build_square_lattice(L, periodic=False)
        assert t.n == L * L
        assert t.n_edges == expected_edges == 2 * L * (L - 1)

    def test_periodic_edge_count_and_degree(self):
        t = build_square_lattice(5, periodic=True)
        assert t.n_edges == 2 * 25
        assert set(t.degrees()) == {4}

    def test_open_degrees(self):
        t = build_square_lattice(6, periodic=False)
        assert set(t.degrees()) <= {2, 3, 4}
        # interior sites have degree 4
        assert t.degree(1 * 6 + 1) == 4

    def test_periodic_needs_l3(self):
        with pytest.raises(InvalidArgumentError):
            build_square_lattice(2, periodic=True)


class TestPegasus:
    def test_untrimmed_node_count(self):
        assert build_pegasus(2, trimmed=False).n == 48 == 24 * 2 * 1

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_node_formulas(self, m):
        assert build_pegasus(m, trimmed=False).n == 24 * m * (m - 1)
        assert build_pegasus(m, trimmed=True).n == 8 * (3 * m - 1) * (m - 1)

    def test_p16_trimmed_is_the_5640_fabric(self):
        assert build_pegasus(16, trimmed=True).n == 5640

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_max_degree(self, m):
        assert max(build_pegasus(m, trimmed=True).degrees()) <= 15

    def test_m1_rejected(self):
        with pytest.raises(InvalidArgumentError):
            build_pegasus(1)

    def test_fabric_connectivity_matches_hardware_patches(self):
        # The hardware patch sizes 40, 262, ..., 5612 are sub-fabrics of
        # increasing m (minus a few dead qubits); their quoted couplers
        # per qubit match the ideal fabrics closely, exactly at m=2.
        quoted = {2: 4.1, 4: 6.02672, 8: 6.81075, 16: 7.14326}
        for m, c in quoted.items():
            t = build_pegasus(m, trimmed=True)
            assert t.n_edges / t.n == pytest.approx(c, abs=0.06)
        t2 = build_pegasus(2, trimmed=True)
        assert t2.n_edges / t2.n == pytest.approx(4.1, abs=1e-12)


@pytest.fixture(scope="module")
def p16():
    return build_pegasus(16, trimmed=True)


class TestSamplePatch:
    def test_identity_case(self, p16):
        patch = sample_patch(p16, p16.n, seed=3)
        assert patch.n == p16.n
        assert patch.edges == p16.edges

    def test_determinism(self, p16):
        a = sample_patch(p16, 262, seed=9)
        b = sample_patch(p16, 262, seed=9)
        assert a == b
        assert a.parent_nodes == b.parent_nodes

    def test_262_patch_coupler_density(self, p16):
        # couplers per qubit of a compact 262-node patch, compared with
        # the hardware's 6.02672 for its 262-qubit patch
        patch = sample_patch(p16, 262, seed=1)
        assert patch.n_edges / patch.n == pytest.approx(6.03, abs=0.5)

    def test_connectivity_monotone_in_size_on_average(self, p16):
        sizes = [40, 120, 260, 600, 1200]
        mean_conn = []
        for n in sizes:
            vals = [average_connectivity(sample_patch(p16, n, seed=s))
                    for s in range(20)]
            mean_conn.append(np.mean(vals))
        rho, _ = spearmanr(sizes, mean_conn)
        assert rho > 0

    def test_patches_are_connected(self, p16):
        import networkx as nx
        patch = sample_patch(p16, 100, seed=4)
        g = nx.Graph([(i, j) for i, j, _ in patch.edges])
        g.add_nodes_from(range(patch.n))
        assert nx.is_connected(g)

    def test_too_large_rejected(self, p16):
        with pytest.raises(InvalidArgumentError):
            sample_patch(p16, p16.n + 1, seed=0)

    def test_disconnected_parent_infeasible(self):
        two = Topology(n=4, edges=((0, 1, 1.0), (2, 3, 1.0)),
                       kind=TopologyKind.CUSTOM)
        with pytest.raises(InfeasibleError):
            sample_patch(two, 3, seed=0)


class TestAverageConnectivity:
    def test_triangle(self):
        tri = Topology(n=3, edges=((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)),
                       kind=TopologyKind.CUSTOM)
        assert average_connectivity(tri) == 2.0

    def test_individual(self):
        assert average_connectivity(build_individual(7)) == 0.0

    def test_lattice(self):
        assert average_connectivity(build_square_lattice(10)) == 3.6


class TestInvariants:
    def test_adjacency_symmetry(self, p16):
        rng = np.random.default_rng(0)
        for i in rng.integers(0, p16.n, size=50):
            for j in p16.neighbors(int(i)):
                assert int(i) in p16.neighbors(int(j))

    def test_validation_rejects_bad_edges(self):
        with pytest.raises(InvalidArgumentError):
            Topology(n=3, edges=((1, 1, 1.0),), kind=TopologyKind.CUSTOM)
        with pytest.raises(InvalidArgumentError):
            Topology(n=3, edges=((0, 1, 1.0), (0, 1, 2.0)),
                     kind=TopologyKind.CUSTOM)
        with pytest.raises(InvalidArgumentError):
            Topology(n=2, edges=((0, 2, 1.0),), kind=TopologyKind.CUSTOM)

    def test_random_regular_degree(self):
        t = build_random_regular(64, 12, seed=5)
        assert set(t.degrees()) == {12}
        assert t == build_random_regular(64, 12, seed=5)

    def test_remove_random_nodes(self, p16):
        working = remove_random_nodes(p16, 28, seed=17)
        assert working.n == 5612
        assert max(working.degrees()) <= 15


class TestEdgeListIO:
    def test_round_trip(self, tmp_path):
        t = build_square_lattice(4)
        path = tmp_path / "lattice.edges"
        write_edge_list(t, path)
        back = read_edge_list(path)
        assert back.n == t.n
        assert back.edges == t.edges
        assert back.kind == t.kind

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("0 1 1.0\n")
        with pytest.raises(InvalidArgumentError):
            read_edge_list(path)
