import numpy as np
import pytest

from ecomplex.capability import (
    DEFAULT_GRID,
    CapabilityParams,
    CapabilityWorld,
    SweepConfig,
    derive_matrix,
    ensemble_statistics,
    run_sweep,
    sample_world,
)
from ecomplex.errors import InputError
from oracles import subset_matrix


def world(held, required):
    held = np.array(held, bool)
    required = np.array(required, bool)
    params = CapabilityParams(held.shape[0], required.shape[0], held.shape[1], 0.5, 0.5)
    return CapabilityWorld(held, required, params, 0)


class TestSampleWorld:
    def test_r_one(self):
        w = sample_world(CapabilityParams(5, 7, 4, r=1.0, q=0.3), 1)
        assert w.country_capabilities.all()

    def test_q_zero(self):
        w = sample_world(CapabilityParams(5, 7, 4, r=0.5, q=0.0), 1)
        assert not w.product_requirements.any()

    def test_deterministic(self):
        p = CapabilityParams(10, 20, 8)
        a, b = sample_world(p, 42), sample_world(p, 42)
        np.testing.assert_array_equal(a.country_capabilities, b.country_capabilities)
        np.testing.assert_array_equal(a.product_requirements, b.product_requirements)
        c = sample_world(p, 43)
        assert not np.array_equal(a.country_capabilities, c.country_capabilities)

    def test_binary_and_shape(self):
        w = sample_world(CapabilityParams(6, 9, 5), 0)
        assert w.country_capabilities.dtype == bool
        assert w.country_capabilities.shape == (6, 5)
        assert w.product_requirements.shape == (9, 5)

    @pytest.mark.parametrize("kw", [{"r": 1.5}, {"q": -0.1}, {"n_countries": 0}, {"n_capabilities": 2.5}])
    def test_invalid_params(self, kw):
        with pytest.raises(InputError):
            CapabilityParams(**kw)

    def test_default_density_in_band(self):
        for r in DEFAULT_GRID["r"]:
            for q in DEFAULT_GRID["q"]:
                assert 0.05 <= CapabilityParams(r=r, q=q).expected_density <= 0.5 + 0.05


class TestDeriveMatrix:
    def test_empty_requirement_made_everywhere(self):
        m = derive_matrix(world([[0, 0], [1, 0]], [[0, 0]]))
        assert m.adjacency[:, 0].all()

    def test_full_country_makes_everything(self):
        m = derive_matrix(world([[1, 1, 1], [0, 0, 0]], [[1, 0, 0], [1, 1, 1], [0, 1, 0]]))
        assert m.adjacency[0].all()

    def test_hand_subset(self):
        # C_A = {a1}, C_B = {a1, a2}, Pi_p = {a2}
        m = derive_matrix(world([[1, 0], [1, 1]], [[0, 1]]))
        assert m.adjacency[:, 0].tolist() == [False, True]

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            held = rng.random((6, 5)) < 0.6
            req = rng.random((7, 5)) < 0.3
            m = derive_matrix(world(held, req))
            assert m.adjacency.astype(int).tolist() == subset_matrix(held.tolist(), req.tolist())

    def test_adding_capability_keeps_edges(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            held = rng.random((8, 6)) < 0.5
            req = rng.random((10, 6)) < 0.3
            before = derive_matrix(world(held, req)).edges
            c, a = rng.integers(8), rng.integers(6)
            held[c, a] = True
            assert before <= derive_matrix(world(held, req)).edges

    def test_removing_requirement_keeps_edges(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            held = rng.random((8, 6)) < 0.5
            req = rng.random((10, 6)) < 0.3
            before = derive_matrix(world(held, req)).edges
            p, a = rng.integers(10), rng.integers(6)
            req[p, a] = False
            assert before <= derive_matrix(world(held, req)).edges


class TestEnsemble:
    def test_q_zero_degenerate(self):
        res = ensemble_statistics(CapabilityParams(10, 20, 5, r=0.5, q=0.0), 3, 0)
        assert res.degenerate
        assert np.isnan(res.pearson_k0_k1)

    def test_r_one_degenerate(self):
        res = ensemble_statistics(CapabilityParams(10, 20, 5, r=1.0, q=0.3), 3, 0)
        assert res.degenerate_replicates == [0, 1, 2]

    def test_no_edges_replicate(self):
        res = ensemble_statistics(CapabilityParams(5, 5, 40, r=0.0, q=1.0), 2, 0)
        assert [r.degenerate for r in res.replicates] == ["no edges", "no edges"]
        assert res.n_excluded_countries == 10

    def test_zero_product_countries_excluded(self):
        res = ensemble_statistics(CapabilityParams(30, 40, 20, r=0.3, q=0.2), 2, 0)
        for rep in res.replicates:
            assert len(rep.k_c0) + rep.n_excluded == 30
            assert np.all(rep.k_c0 > 0)

    def test_bad_replicates(self):
        with pytest.raises(InputError):
            ensemble_statistics(CapabilityParams(), 0, 0)

    def test_order_independent(self):
        p = CapabilityParams(40, 100, 20, 0.7, 0.08)
        serial = ensemble_statistics(p, 6, 9)
        threaded = ensemble_statistics(p, 6, 9, n_jobs=3)
        assert list(serial.rows()) == list(threaded.rows())
        # replicate i only depends on (seed, i)
        fewer = ensemble_statistics(p, 3, 9)
        assert list(fewer.rows()) == [r for r in serial.rows() if r[0] < 3]

    def test_default_signs_and_frozen_values(self):
        res = ensemble_statistics(CapabilityParams(), 20, 0)
        assert res.pearson_k0_k1 < 0
        assert res.spearman_cap_k0 > 0
        assert res.spearman_cap_k1 < 0
        # calibration run, seed 0
        assert res.pearson_k0_k1 == pytest.approx(-0.8438538550790841, abs=1e-9)
        assert res.spearman_cap_k0 == pytest.approx(0.973425195716418, abs=1e-9)
        assert res.spearman_cap_k1 == pytest.approx(-0.8697275001155067, abs=1e-9)


class TestSweepConfig:
    def test_defaults(self):
        cfg = SweepConfig()
        assert len(cfg.cells()) == 9
        assert cfg.replicates == 20

    def test_from_dict_rejects_bad_probability(self):
        with pytest.raises(InputError):
            SweepConfig.from_dict({"grid": {"r": [0.5, 1.2]}})

    @pytest.mark.parametrize(
        "bad",
        [{"grid": {"zeta": [1]}}, {"replicates": 0}, {"seed": -1}, {"extra": 1}, {"grid": {"r": []}}],
    )
    def test_from_dict_rejects(self, bad):
        with pytest.raises(InputError):
            SweepConfig.from_dict(bad)

    def test_round_trip(self):
        cfg = SweepConfig.from_dict({"grid": {"q": [0.1, 0.2]}, "replicates": 2, "seed": 5,
                                     "base": {"n_countries": 10, "n_products": 30, "n_capabilities": 8}})
        again = SweepConfig.from_dict(cfg.to_dict())
        assert again.cells() == cfg.cells()

    def test_micro_sweep(self):
        cfg = SweepConfig.from_dict({"grid": {"r": [0.7]}, "replicates": 1,
                                     "base": {"n_countries": 10, "n_products": 30, "n_capabilities": 8}})
        (res,) = run_sweep(cfg)
        assert len(res.replicates) == 1
