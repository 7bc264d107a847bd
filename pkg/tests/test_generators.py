from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from copula_asym import generators as gen
from copula_asym.generators import Generator, GeneratorClass, GeneratorClassError

seeds = st.integers(0, 2 ** 31 - 1)


def _grid():
    return np.linspace(0.0, 1.0, 1001)


class TestEvaluation:
    def test_marshall_f_mu(self):
        f = gen.marshall_f_mu(2 / 3)
        assert gen.eval_generator(f, 0.5) == pytest.approx(2 / 3, abs=1e-15)
        assert gen.eval_generator(f, 0.0) == 0.0
        assert gen.eval_generator(f, 0.9) == pytest.approx(0.9, abs=1e-15)

    def test_last_knot_readback(self):
        g = Generator(((0.0, 0.0), (0.3, 0.7), (1.0, 1.0)))
        assert gen.eval_generator(g, 1.0) == 1.0

    def test_jump_at_zero(self):
        g = gen.jump_at_zero()
        assert gen.eval_generator(g, 0.0) == 0.0
        assert gen.eval_generator(g, 1e-300) == 1.0

    def test_limit_resolves_to_right_limit(self):
        g = Generator(((0.0, 0.4), (1.0, 1.0)))
        assert g(0.0) == 0.4

    def test_value_at_one_override(self):
        g = Generator(((0.0, 0.0), (1.0, 0.5)), "limit", 0.25)
        assert g(1.0) == 0.25 and g(0.999999) == pytest.approx(0.5, abs=1e-6)

    def test_first_knot_inside(self):
        g = Generator(((0.5, 1.0), (1.0, 1.0)), 0.0)
        assert g(0.25) == pytest.approx(0.5)

    def test_vectorized(self):
        g = gen.identity()
        x = np.array([[0.1, 0.2], [0.3, 0.4]])
        assert np.array_equal(g(x), x)

    def test_domain(self):
        with pytest.raises(ValueError):
            gen.eval_generator(gen.identity(), 1.5)

    @pytest.mark.parametrize("knots,v0", [
        ((), "limit"),
        (((0.5, 1.0),), "limit"),
        (((0.0, 0.0), (0.5, 0.5)), "limit"),
        (((0.0, 0.0), (0.5, 0.5), (0.5, 0.6), (1.0, 1.0)), "limit"),
    ])
    def test_bad_knots(self, knots, v0):
        with pytest.raises(ValueError):
            Generator(knots, v0)


class TestFstar:
    def test_marshall_f_mu(self):
        assert gen.eval_fstar(gen.marshall_f_mu(2 / 3), 1 / 3) == pytest.approx(2.0, rel=1e-15)

    @given(st.floats(1e-6, 1.0))
    def test_identity(self, x):
        assert gen.eval_fstar(gen.identity(), x) == pytest.approx(1.0, rel=1e-15)

    def test_jump_is_infinite_at_zero(self):
        assert gen.eval_fstar(gen.jump_at_zero(), 0.0) == math.inf

    def test_slope_at_zero(self):
        assert gen.eval_fstar(gen.identity(), 0.0) == 1.0


class TestValidation:
    def test_flambda_in_script_f(self):
        assert gen.validate_class(gen.script_f_lambda(0.5), GeneratorClass.ScriptF).passed

    def test_identity_not_script_f(self):
        rep = gen.validate_class(gen.identity(), GeneratorClass.ScriptF)
        assert not rep.passed
        assert rep.violations

    def test_gmu_in_script_f(self):
        assert gen.validate_class(gen.script_f_mu(0.5), GeneratorClass.ScriptF).passed

    def test_jump_is_marshall(self):
        assert gen.validate_class(gen.jump_at_zero(), GeneratorClass.MarshallFG).passed

    def test_marshall_needs_zero_at_zero(self):
        g = Generator(((0.0, 0.5), (1.0, 1.0)))
        assert not gen.validate_class(g, "MarshallFG").passed

    def test_fstar_increase_caught_between_knots(self):
        # f(x)/x rises on (0.5, 1): nondecreasing f but not in the class
        g = Generator(((0.0, 0.0), (0.5, 0.1), (1.0, 1.0)))
        rep = gen.validate_class(g, GeneratorClass.MarshallFG)
        assert not rep.passed

    def test_report_consistency(self):
        rep = gen.validate_class(gen.identity(), GeneratorClass.MaxminPsi)
        assert rep.passed == (len(rep.violations) == 0)

    @pytest.mark.parametrize("cls", list(GeneratorClass))
    def test_random_generators_validate(self, cls):
        for seed in range(150):
            g = gen.random_generator(cls, seed)
            rep = gen.validate_class(g, cls)
            assert rep.passed, (seed, rep.violations[:2])

    @given(seeds)
    def test_marshall_class_properties(self, seed):
        g = gen.random_generator(GeneratorClass.MarshallFG, seed)
        xs = g.xs
        vals = g(xs)
        assert np.all(np.diff(vals) >= -1e-12)
        pos = xs[xs > 0]
        mids = 0.5 * (pos[1:] + pos[:-1])
        t = np.sort(np.concatenate([pos, mids]))
        assert np.all(np.diff(g(t) / t) <= 1e-12)

    @given(seeds)
    def test_script_f_upper_bound(self, seed):
        g = gen.random_generator(GeneratorClass.ScriptF, seed)
        v = g(g.xs)
        assert np.all(v >= -1e-12)
        assert np.all(v <= 1.0 - g.xs + 1e-12)


class TestConversions:
    def test_identity_pair_gives_zero(self):
        f, g = gen.phi_psi_to_fg(gen.identity(), gen.identity())
        t = _grid()
        assert np.max(np.abs(f(t))) == 0.0
        assert np.max(np.abs(g(t))) <= 1e-16

    def test_phi_of_cmu(self):
        # phi(t) = t + f(t) with f = script_f_mu(mu): phi = mu on (0, mu], t after
        mu = 2 / 3
        phi = Generator(((0.0, mu), (mu, mu), (1.0, 1.0)), 0.0)
        f, _ = gen.phi_psi_to_fg(phi, gen.identity())
        t = _grid()[1:]
        oracle = np.where(t <= mu, mu - t, 0.0)
        assert np.max(np.abs(f(t) - oracle)) <= 1e-15
        assert f(0.0) == 0.0

    def test_psi_of_dmu(self):
        # psi(t) = t - g(1 - t) with g(x) = max(0, 1/2 - x) for x > 0
        mu = 0.5
        t = _grid()
        lo = 1.0 - mu
        psi_vals = np.where(t < lo, t, t - (t - lo))
        psi = Generator(tuple(zip([0.0, lo, 1.0], [0.0, lo, lo])), "limit", 1.0)
        assert np.allclose(psi(t[:-1]), psi_vals[:-1], atol=1e-15)
        _, g = gen.phi_psi_to_fg(gen.identity(), psi)
        x = t[1:]
        assert np.max(np.abs(g(x) - np.maximum(0.0, mu - x))) <= 1e-15

    def test_rejects_invalid(self):
        with pytest.raises(GeneratorClassError):
            gen.fg_to_phi_psi(gen.identity(), gen.zero())

    @given(seeds, seeds)
    def test_round_trip(self, s1, s2):
        f = gen.random_generator(GeneratorClass.ScriptF, s1)
        g = gen.random_generator(GeneratorClass.ScriptF, s2)
        phi, psi = gen.fg_to_phi_psi(f, g)
        assert gen.validate_class(phi, GeneratorClass.MaxminPhi).passed
        assert gen.validate_class(psi, GeneratorClass.MaxminPsi).passed
        f2, g2 = gen.phi_psi_to_fg(phi, psi)
        for a, b in ((f, f2), (g, g2)):
            pts = np.unique(np.concatenate([a.xs, b.xs, [0.0, 1.0]]))
            assert np.max(np.abs(a(pts) - b(pts))) <= 1e-15

    @given(seeds, seeds)
    def test_fg_validate_after_conversion(self, s1, s2):
        phi = gen.random_generator(GeneratorClass.MaxminPhi, s1)
        psi = gen.random_generator(GeneratorClass.MaxminPsi, s2)
        f, g = gen.phi_psi_to_fg(phi, psi)
        assert gen.validate_class(f, GeneratorClass.ScriptF).passed
        assert gen.validate_class(g, GeneratorClass.ScriptF).passed


class TestSerialization:
    @given(seeds, st.sampled_from(list(GeneratorClass)))
    def test_json_round_trip(self, seed, cls):
        g = gen.random_generator(cls, seed)
        doc = json.loads(json.dumps(g.to_dict()))
        h = Generator.from_dict(doc)
        pts = np.concatenate([g.xs, _grid()])
        ref = g(pts)
        assert np.all(np.abs(h(pts) - ref) <= 1e-15 * np.maximum(1.0, np.abs(ref)))

    def test_document_shape(self):
        doc = gen.jump_at_zero().to_dict()
        assert doc["value_at_zero"] == 0.0
        assert doc["knots"][-1] == [1.0, 1.0]
        assert "value_at_one" not in doc

    def test_limit_flag(self):
        doc = {"value_at_zero": "limit", "knots": [[0, 0.2], [1, 1]]}
        assert Generator.from_dict(doc)(0.0) == 0.2

    def test_missing_knots(self):
        with pytest.raises(ValueError):
            Generator.from_dict({"value_at_zero": 0})
