import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import airy_series, gamma_stirling
from ricsolve import Grid, airy, miura_invert, miura_singular_scan, sample, schrodinger_solve, series_terms
from ricsolve.apps import AI0, AIP0, BI0, BIP0, GAMMA_1_3, GAMMA_2_3, MIURA_BUFFER, miura_matrix
from ricsolve.errors import RicsolveError
from ricsolve.gridfn import constant, identity, ones, zeros


class TestAiryConstants:
    def test_gamma_literals(self):
        assert GAMMA_1_3 == pytest.approx(gamma_stirling(1 / 3), rel=1e-13)
        assert GAMMA_2_3 == pytest.approx(gamma_stirling(2 / 3), rel=1e-13)
        # reflection formula ties the two together
        assert GAMMA_1_3 * GAMMA_2_3 == pytest.approx(2 * math.pi / math.sqrt(3), rel=1e-15)

    def test_origin_values(self):
        assert AI0 == pytest.approx(0.355028053887817239, abs=1e-16)
        assert AIP0 == pytest.approx(-0.258819403792806798, abs=1e-16)
        assert BI0 == pytest.approx(0.614926627446000736, abs=1e-15)
        assert BIP0 == pytest.approx(0.448288357353826357, abs=1e-15)


class TestAiry:
    @pytest.fixture(scope="class")
    @staticmethod
    def table():
        return airy(Grid.adjusted(-5.0, 2.0, 2000), tol=1e-12)

    def test_origin(self, table):
        o = table.at(0.0)
        assert (o.u1, o.u2) == (1, 0)
        assert o.Ai == pytest.approx(AI0, abs=1e-15) and o.Bi == pytest.approx(BI0, abs=1e-15)

    def test_ai_of_one(self, table):
        assert table.at(1.0).Ai.real == pytest.approx(0.1352924163128814, abs=1e-10)

    @pytest.mark.parametrize("x", [-4.0, -1.0, 0.5, 2.0])
    def test_power_series_oracle(self, table, x):
        k = int(np.argmin(np.abs(table.grid.nodes - x)))
        u1, u2 = airy_series(float(table.grid.nodes[k]))
        assert table[k].u1 == pytest.approx(u1, abs=1e-9) and table[k].u2 == pytest.approx(u2, abs=1e-9)

    def test_wronskian(self, table):
        assert np.max(np.abs(table.wronskian() - 1 / math.pi)) < 1e-9

    def test_sequence_protocol(self, table):
        assert len(table) == table.grid.n_nodes
        assert len(table[:3]) == 3 and table[0].x == -5.0
        assert next(iter(table)).x == -5.0

    def test_series_formulas(self):
        g = Grid(-1.0, 1.0, 400)
        x, one = identity(g), ones(g)
        tab = airy(g, tol=1e-15)
        even = 1 + sum(t.values for t in series_terms(x, one, 40)[1::2])
        odd = sum(t.values for t in series_terms(one, x, 40)[0::2])
        np.testing.assert_allclose(tab.u1, even, atol=1e-14)
        np.testing.assert_allclose(tab.u2, odd, atol=1e-14)

    def test_save(self, tmp_path):
        airy(Grid(-1.0, 1.0, 20)).save(tmp_path / "a.csv")
        assert (tmp_path / "a.csv").read_text().startswith("x,Ai,Bi,u1,u2")


class TestSchrodinger:
    @pytest.mark.parametrize(
        "lam, y0, yp0, ref",
        [(1.0, 0.0, 1.0, np.sin), (1.0, 1.0, 0.0, np.cos), (-1.0, 1.0, 0.0, np.cosh), (-1.0, 0.0, 1.0, np.sinh)],
    )
    def test_free_reductions(self, grid, lam, y0, yp0, ref):
        y, _ = schrodinger_solve(zeros(grid), lam, y0, yp0)
        np.testing.assert_allclose(y.values, ref(grid.nodes), atol=1e-11)

    def test_airy_potential(self):
        g = Grid(-2.0, 2.0, 1000)
        tab = airy(g)
        y, yp = schrodinger_solve(identity(g), 0.0, 1.0, 0.0)
        np.testing.assert_allclose(y.values, tab.u1, atol=1e-12)
        np.testing.assert_allclose(yp.values, tab.u1p, atol=1e-12)

    @settings(max_examples=10, deadline=None)
    @given(lam=st.floats(-3, 3), a=st.floats(-1, 1))
    def test_energy_shift(self, lam, a):
        # a constant potential only shifts the spectral parameter
        g = Grid(-1.0, 1.0, 200)
        y1, _ = schrodinger_solve(constant(a, g), lam, 1.0, 0.3)
        y2, _ = schrodinger_solve(zeros(g), lam - a, 1.0, 0.3)
        np.testing.assert_allclose(y1.values, y2.values, atol=1e-12)


class TestMiura:
    def test_fixed_point(self):
        g = Grid(-3.0, 3.0, 600)
        res = miura_invert(ones(g), 1.0)
        np.testing.assert_allclose(res.alpha.values, 1.0, atol=1e-12)
        assert res.reconstruction_error() < 1e-10

    def test_tanh(self):
        g = Grid(-3.0, 3.0, 1200)
        res = miura_invert(ones(g), 0.0)
        np.testing.assert_allclose(res.alpha.values, np.tanh(g.nodes), atol=1e-11)
        assert res.classification == "standard"
        assert res.reconstruction_error() < 1e-4

    def test_free_pole(self):
        g = Grid(-2.0, 2.0, 800)
        res = miura_invert(zeros(g), 1.0)
        assert res.classification == "projective"
        assert res.alpha.infinity_nodes == [g.index_of(-1.0)]
        k = g.index_of(-1.0)
        assert not res.valid[k - MIURA_BUFFER : k + MIURA_BUFFER + 1].any()
        assert res.valid[k + MIURA_BUFFER + 1]
        # the stencil error grows like h^2 |alpha|^4 next to the pole
        err = np.abs(res.q_reconstructed.values)[res.valid][1:-1]
        a2 = np.abs(res.alpha.values[res.valid][1:-1]) ** 2
        assert np.max(err / (1 + a2) ** 2) < 50 * g.h**2
        assert np.max(err[np.abs(g.nodes[res.valid][1:-1] + 1) > 0.5]) < 1e-3
        finite = ~res.alpha.is_inf
        np.testing.assert_allclose(res.alpha.values[finite], 1 / (g.nodes[finite] + 1), rtol=1e-9)

    def test_complex_potential_rejected(self, small_grid):
        with pytest.raises(RicsolveError):
            miura_invert(constant(1 + 1j, small_grid), 0.0)

    def test_save(self, tmp_path):
        g = Grid(-2.0, 2.0, 100)
        miura_invert(zeros(g), 1.0).save(tmp_path / "m.csv")
        header = (tmp_path / "m.csv").read_text().splitlines()[0]
        assert header == "x,alpha_re,alpha_im,is_infinity,q,q_reconstructed,valid"


class TestSingularScan:
    def test_constant_potential(self):
        g = Grid(-3.0, 3.0, 1200)
        scan = miura_singular_scan(ones(g), [-2, -1.5, -1, 0, 1, 2])
        cls = dict(scan.entries)
        assert cls[-2] == cls[-1.5] == cls[2] == "projective"
        assert cls[-1] == cls[0] == cls[1] == "standard"
        assert scan.contiguous
        # the exact standard set on [-3, 3] is |y0| <= coth 3
        lo, hi = scan.endpoints
        assert lo == pytest.approx(-1 / math.tanh(3), abs=1e-4)
        assert hi == pytest.approx(1 / math.tanh(3), abs=1e-4)

    def test_zero_potential(self, small_grid):
        scan = miura_singular_scan(zeros(small_grid), [0.0])
        assert scan.entries == [(0.0, "standard")] and scan.contiguous

    @settings(max_examples=8, deadline=None)
    @given(a=st.floats(-1, 1), b=st.floats(0, 1))
    def test_contiguity_for_real_potentials(self, a, b):
        g = Grid(-2.0, 2.0, 400)
        q = sample(lambda x: a * np.cos(2 * x) + b * x**2 - 0.5, g)
        scan = miura_singular_scan(q, np.linspace(-3, 3, 25), refine_steps=0)
        assert scan.contiguous
