"""Tests for composite Gauss-Legendre quadrature."""

import numpy as np
import pytest

from isothermal_collapse.exceptions import QuadratureFailure
from isothermal_collapse.quadrature import (
    bisect_panels,
    composite,
    gauss_legendre,
    graded_edges,
    merge_edges,
    panel_nodes,
    refined,
)


class TestGaussLegendre:
    def test_exact_for_polynomials(self):
        x, w = gauss_legendre(5)
        assert np.sum(w) == pytest.approx(2.0)
        assert np.sum(w * x**8) == pytest.approx(2.0 / 9.0)

    def test_cached_and_read_only(self):
        x, _ = gauss_legendre(4)
        assert gauss_legendre(4)[0] is x
        with pytest.raises(ValueError):
            x[0] = 0.0


class TestComposite:
    def test_panel_nodes_shape(self):
        nodes, weights = panel_nodes(np.array([0.0, 1.0, 3.0]), 4)
        assert nodes.shape == (2, 4)
        assert np.sum(weights) == pytest.approx(3.0)

    def test_broadcast_edges(self):
        edges = np.array([[0.0, 1.0, 2.0], [0.0, 0.5, 1.0]])
        _, weights = panel_nodes(edges, 3)
        assert np.sum(weights, axis=(-2, -1)) == pytest.approx([2.0, 1.0])

    def test_smooth_integral(self):
        assert composite(np.sin, np.linspace(0.0, np.pi, 5)) == pytest.approx(2.0, abs=1e-12)

    def test_zero_length_panel(self):
        assert composite(np.exp, [0.0, 0.0, 1.0]) == pytest.approx(np.e - 1.0)


class TestRefined:
    def test_converges(self):
        value, error = refined(np.exp, [0.0, 1.0], 1e-12)
        assert value == pytest.approx(np.e - 1.0, rel=1e-12)
        assert error <= 1e-12 * value

    def test_failure_on_singular_integrand(self):
        with pytest.raises(QuadratureFailure):
            refined(lambda x: 1.0 / np.sqrt(x), [0.0, 1.0], 1e-14, max_levels=2)

    def test_no_levels(self):
        with pytest.raises(QuadratureFailure):
            refined(np.exp, [0.0, 1.0], 1e-12, max_levels=0)


class TestEdges:
    def test_bisect(self):
        assert np.array_equal(bisect_panels(np.array([0.0, 1.0, 3.0])), [0.0, 0.5, 1.0, 2.0, 3.0])

    def test_graded_ratio(self):
        edges = graded_edges(1e-3, 1.0, ratio=1.5)
        assert edges[0] == pytest.approx(1e-3)
        assert edges[-1] == pytest.approx(1.0)
        assert np.max(edges[1:] / edges[:-1]) <= 1.5 + 1e-12

    def test_graded_degenerate(self):
        assert np.array_equal(graded_edges(0.0, 1.0), [0.0, 1.0])

    def test_merge(self):
        assert np.array_equal(merge_edges([0.0, 1.0], 0.5, np.array([1.0, 2.0])), [0.0, 0.5, 1.0, 2.0])
