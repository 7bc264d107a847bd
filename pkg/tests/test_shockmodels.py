from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from copula_asym import copulas as cop
from copula_asym import shockmodels as shock
from copula_asym.shockmodels import PiecewiseUniformDist as PU

S2 = math.sqrt(2.0)
N = 100_000


def _segments(d):
    return [tuple(s) for s in d.segments]


class TestDistribution:
    def test_cdf_and_ppf(self):
        d = PU(((0, 1, 0.25), (2, 4, 0.75)))
        assert d.cdf(0.5) == pytest.approx(0.125)
        assert d.cdf(1.5) == pytest.approx(0.25)
        assert d.cdf(3.0) == pytest.approx(0.625)
        u = np.linspace(0, 0.999, 50)
        assert np.allclose(d.cdf(d.ppf(u)), u, atol=1e-15)

    def test_zero_weight_dropped(self):
        d = PU(((0, 1, 1.0), (2, 3, 0.0)))
        assert len(d.segments) == 1

    @pytest.mark.parametrize("segs", [((0, 1, 0.5),), ((0, 2, 0.5), (1, 3, 0.5)),
                                      ((1, 0, 1.0),), ()])
    def test_invalid(self, segs):
        with pytest.raises(ValueError):
            PU(segs)

    @given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=5))
    def test_cdf_axioms(self, ws):
        w = np.array(ws) / sum(ws)
        d = PU(tuple((2 * i, 2 * i + 1, wi) for i, wi in enumerate(w)))
        t = np.linspace(-1, 2 * len(ws) + 1, 999)
        f = d.cdf(t)
        assert f[0] == 0 and f[-1] == pytest.approx(1, abs=1e-12)
        assert np.all(np.diff(f) >= -1e-15)

    def test_prob_le(self):
        a = PU(((0, 1, 1.0),))
        assert shock.prob_le(a, a) == pytest.approx(0.5, abs=1e-15)
        assert shock.prob_le(a, PU(((1, 2, 1.0),))) == 1.0


class TestBuild:
    def test_marshall_layout(self):
        s = shock.build_spec("MarshallCmu", mu=2 / 3)
        assert _segments(s.dist_X) == [(0, 1, 2 / 3), (2, 3, pytest.approx(1 / 3))]
        assert _segments(s.dist_Y) == [(0, 1, 1.0)]
        assert _segments(s.dist_Z) == [(1, 2, 1.0)]
        assert s.coupling == "max_max" and isinstance(s.target, cop.Cmu)

    def test_dmu_layout(self):
        s = shock.build_spec("MaxminDmu", mu=0.5)
        assert _segments(s.dist_X) == [(0, 1, 1.0)]
        assert _segments(s.dist_Z) == [(1, 2, 1.0)]
        assert _segments(s.dist_Y) == [(0, 1, 0.5), (2, 3, 0.5)]
        assert s.coupling == "max_min"

    def test_rmm_layout(self):
        s = shock.build_spec("RmmElammu", lam=S2 / 2, mu=1.0)
        assert [x[:2] for x in _segments(s.dist_Z)] == [(0, 1), (2, 3)]
        assert s.dist_Z.weights == pytest.approx([S2 / 2, 1 - S2 / 2])
        assert _segments(s.dist_X) == [(1, 2, 1.0)]
        assert len(s.dist_Y.segments) == 1  # mu = 1 drops a block
        assert s.coupling == "reflected"

    @pytest.mark.parametrize("kind,kw", [("MarshallCmu", {"mu": 1.0}), ("MaxminDmu", {}),
                                         ("RmmElammu", {"mu": 0.5}), ("MarshallCmu", {"mu": 0.5, "lam": 0.2}),
                                         ("Gumbel", {"mu": 0.5})])
    def test_invalid(self, kind, kw):
        with pytest.raises(ValueError):
            shock.build_spec(kind, **kw)

    def test_json(self):
        doc = json.loads(json.dumps(shock.build_spec("MaxminCmu", mu=0.4).to_dict()))
        assert doc["coupling"] == "max_min" and doc["target"]["kind"] == "cmu"


class TestVerify:
    @pytest.mark.parametrize("kind,kw", shock.default_settings())
    def test_default_settings_pass(self, kind, kw):
        rep = shock.verify_spec(shock.build_spec(kind, **kw))
        assert rep.passed, [c for c in rep.checks if not c.passed]

    def test_marshall_ordering_probability(self):
        s = shock.build_spec("MarshallCmu", mu=2 / 3)
        assert shock.prob_le(s.dist_X, s.dist_Z) == pytest.approx(2 / 3, abs=1e-15)
        assert shock.prob_le(s.dist_Y, s.dist_Z) == 1.0

    def test_maxmin_cmu_fv_is_fz(self):
        s = shock.build_spec("MaxminCmu", mu=0.3)
        t = np.linspace(-1, 5, 2001)
        assert np.max(np.abs(s.cdf_V(t) - s.dist_Z.cdf(t))) <= 1e-15

    @given(st.sampled_from(shock.KINDS), st.floats(0.02, 0.98), st.floats(0.02, 1.0))
    def test_random_parameters_pass(self, kind, mu, lam):
        kw = {"mu": mu, "lam": lam} if kind == "RmmElammu" else {"mu": mu}
        assert shock.verify_spec(shock.build_spec(kind, **kw)).passed

    def test_detects_broken_spec(self):
        s = shock.build_spec("MarshallCmu", mu=0.5)
        bad = shock.ShockModelSpec(s.kind, s.params, s.dist_X, PU(((1, 2, 1.0),)), s.dist_Z,
                                   s.coupling, s.target)
        assert not shock.verify_spec(bad).passed


class TestSampling:
    def test_n_zero(self):
        with pytest.raises(ValueError):
            shock.sample(shock.build_spec("MarshallCmu", mu=0.5), 0, 1)

    def test_deterministic(self):
        s = shock.build_spec("RmmElammu", lam=0.5, mu=0.5)
        a, b = shock.sample(s, 1000, 9), shock.sample(s, 1000, 9)
        assert np.array_equal(a.u, b.u) and np.array_equal(a.cv, b.cv)

    def test_marshall_support_ordering(self):
        s = shock.build_spec("MarshallCmu", mu=0.4)
        w = shock.rng_stream(11).random((10_000, 3))
        y, z = s.dist_Y.ppf(w[:, 1]), s.dist_Z.ppf(w[:, 2])
        assert np.min(z - y) >= 0

    @pytest.mark.parametrize("kind,kw", shock.default_settings()[::2])
    def test_uniform_marginals(self, kind, kw):
        smp = shock.sample(shock.build_spec(kind, **kw), N, 17)
        for col in (smp.cu, smp.cv):
            assert stats.kstest(col, "uniform").statistic <= 1.63 / math.sqrt(N)

    def test_reflected_ranks_reverse(self):
        s = shock.build_spec("RmmElammu", lam=0.6, mu=0.4)
        smp = shock.sample(s, 5000, 3)
        w = shock.rng_stream(3).random((5000, 3))
        low = np.minimum(s.dist_Y.ppf(w[:, 1]), s.dist_Z.ppf(w[:, 2]))
        assert np.array_equal(stats.rankdata(smp.v), len(low) + 1 - stats.rankdata(low))

    def test_c23_sup_distance(self):
        s = shock.build_spec("MarshallCmu", mu=2 / 3)
        lattice, bound = shock.empirical_sup_distance(s, N, 42)
        assert lattice <= bound <= 0.01

    def test_c23_empirical_asymmetry(self):
        s = shock.build_spec("MarshallCmu", mu=2 / 3)
        e = cop.Empirical(shock.sample(s, N, 42).shock_points)
        assert abs(e(4 / 9, 2 / 3) - e(2 / 3, 4 / 9)) == pytest.approx(4 / 27, abs=0.015)

    def test_copula_scale_matches_ranks(self):
        # analytic marginals and ranks give the same empirical copula
        s = shock.build_spec("MaxminDmu", mu=0.6)
        smp = shock.sample(s, 2000, 5)
        a = cop.Empirical(smp.shock_points).on_lattice(50)
        b = cop.Empirical(smp.copula_points).on_lattice(50)
        assert np.array_equal(a, b)
