from dataclasses import replace

import numpy as np
import pytest

import hgsp.pipeline as pipeline
from hgsp.errors import BatchError, ConfigError
from hgsp.pipeline import (
    PipelineConfig,
    extract_batch,
    extract_features,
    feature_count,
    feature_names,
    format_config,
    parse_config,
)
from hgsp.signal_core import SpatiotemporalSignal
from hgsp.topology import TopologyEmbedding

SMALL = PipelineConfig(bands_hz=(0, 20, 60, 200), n_windows=2, n_coarse=10, lag2=3)


def count_by_enumeration(cfg):
    """Tally features by walking the three levels, independent of the formula."""
    n = 0
    n += 11                                  # level 0 on raw data
    for _ in range(cfg.n_bands):
        n += 11                              # level 1, whole band
        for _ in range(cfg.n_windows):
            n += 11                          # level 1, each window
    for _ in range(cfg.n_bands):
        n += 11                              # level 2 topology
        n += cfg.n_graph_bands               # band energies
        n += 3                               # min / max / mean eigenvalue
        n += 2 * cfg.n_scales * cfg.z        # wavelet coefficients
        n += 1                               # quadratic form
    return n


class TestNamesAndCount:
    def test_default_count(self, eeg_like):
        cfg = PipelineConfig()
        assert count_by_enumeration(cfg) == 795
        assert feature_count(cfg) == 795
        fv = extract_features(eeg_like, cfg)
        assert len(fv.names) == len(fv.values) == 795

    @pytest.mark.parametrize("cfg", [
        SMALL,
        replace(SMALL, n_windows=5, n_graph_bands=2, n_scales=3, z=1),
        replace(SMALL, bands_hz=(0, 200)),
    ])
    def test_formula(self, cfg, eeg_like):
        assert feature_count(cfg) == count_by_enumeration(cfg)
        assert len(extract_features(eeg_like, cfg).values) == feature_count(cfg)

    def test_names_unique_and_scheme(self):
        names = feature_names(PipelineConfig())
        assert len(set(names)) == len(names)
        assert names[0] == "L0.raw.full.density"
        assert "L1.b3.w2.local_efficiency" in names
        assert "L2.b8.full.sgwt.t4.max3" in names
        assert names[-1] == "L2.b8.full.quadratic_form"
        for n in names:
            level, group, scope = n.split(".")[:3]
            assert level in ("L0", "L1", "L2")
            assert group == "raw" or group.startswith("b")
            assert scope == "full" or scope.startswith("w")


class TestExtract:
    def test_finite_and_deterministic(self, eeg_like):
        a = extract_features(eeg_like, SMALL)
        b = extract_features(eeg_like, SMALL)
        assert np.isfinite(a.values).all()
        assert a.values.tobytes() == b.values.tobytes()

    def test_zero_signal(self):
        x = SpatiotemporalSignal(np.zeros((4, 400)), 400.0)
        fv = extract_features(x, PipelineConfig()).as_dict()
        empty = dict(zip(TopologyEmbedding.names(), (0.0, 0.0, 4.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)))
        for name, value in fv.items():
            metric = name.split(".", 3)[3]
            if metric in empty:
                assert value == empty[metric], name
            else:
                assert value == 0.0, name

    def test_channel_permutation(self, eeg_like):
        perm = [2, 0, 3, 1]
        a = extract_features(eeg_like, SMALL).as_dict()
        b = extract_features(eeg_like.with_data(eeg_like.data[perm]), SMALL).as_dict()
        for name in a:
            if ".sgwt." in name:
                # eigenvector signs follow the first non-zero component, which moves
                assert abs(b[name]) == pytest.approx(abs(a[name]), rel=1e-7, abs=1e-9), name
            else:
                assert b[name] == pytest.approx(a[name], rel=1e-9, abs=1e-12), name

    def test_positive_scaling(self, eeg_like):
        a = extract_features(eeg_like, SMALL).as_dict()
        b = extract_features(eeg_like.with_data(eeg_like.data * 4.0), SMALL).as_dict()
        topo = set(TopologyEmbedding.names()) - {"avg_weight"}
        for name in a:
            metric = name.split(".", 3)[3]
            if metric in topo:
                assert b[name] == a[name], name
            elif metric == "avg_weight":
                assert b[name] == pytest.approx(16 * a[name], rel=1e-12)

    def test_fixed_kappa_scale_dependence(self, eeg_like):
        cfg = replace(SMALL, kappa=0.5)
        a = extract_features(eeg_like, cfg).as_dict()
        b = extract_features(eeg_like.with_data(eeg_like.data * 0.01), cfg).as_dict()
        assert b["L0.raw.full.density"] < a["L0.raw.full.density"]

    def test_config_checked_against_signal(self, eeg_like):
        with pytest.raises(ConfigError) as err:
            extract_features(eeg_like, replace(SMALL, n_windows=3))
        assert err.value.field == "n_windows"

    def test_overlapping_windows(self, eeg_like):
        fv = extract_features(eeg_like, replace(SMALL, stride=50))
        assert np.isfinite(fv.values).all()


class TestBatch:
    def test_identical_rows(self, eeg_like):
        res = extract_batch([eeg_like, eeg_like], SMALL)
        assert res.features.shape == (2, feature_count(SMALL))
        assert res.features[0].tobytes() == res.features[1].tobytes()

    def test_matches_sequential_any_jobs(self, eeg_like):
        rng = np.random.default_rng(0)
        samples = [eeg_like.with_data(rng.standard_normal((4, 400))) for _ in range(5)]
        seq = np.vstack([extract_features(s, SMALL).values for s in samples])
        for jobs in (1, 3):
            res = extract_batch(samples, SMALL, jobs=jobs)
            assert res.features.tobytes() == seq.tobytes()
            assert res.indices == (0, 1, 2, 3, 4)

    def test_empty(self):
        res = extract_batch([], SMALL)
        assert res.features.shape == (0, feature_count(SMALL))
        assert res.errors == {}

    def test_partial_and_total_failure(self, eeg_like, monkeypatch):
        real = pipeline.extract_features
        bad = eeg_like.with_data(eeg_like.data + 1.0)

        def flaky(x, cfg):
            if x is bad:
                raise RuntimeError("boom")
            return real(x, cfg)

        monkeypatch.setattr(pipeline, "extract_features", flaky)
        res = extract_batch([eeg_like, bad, eeg_like], SMALL)
        assert res.indices == (0, 2)
        assert list(res.errors) == [1] and "boom" in res.errors[1]
        with pytest.raises(BatchError) as err:
            extract_batch([bad, bad], SMALL)
        assert set(err.value.errors) == {0, 1}

    def test_mixed_shapes(self, eeg_like):
        with pytest.raises(ValueError):
            extract_batch([eeg_like, eeg_like.with_data(eeg_like.data[:3])], SMALL)


class TestConfig:
    def test_round_trip(self):
        cfg = replace(SMALL, kappa=0.25, stride=7)
        assert parse_config(format_config(cfg)) == cfg
        assert parse_config(format_config(PipelineConfig())) == PipelineConfig()

    def test_parse(self):
        cfg = parse_config("# comment\nn_windows = 8  # eight\nbands_hz = 0, 10, 50\nkappa = auto\n")
        assert cfg.n_windows == 8
        assert cfg.bands_hz == (0.0, 10.0, 50.0)
        assert cfg.kappa is None

    @pytest.mark.parametrize("text,field", [
        ("bogus = 1", "bogus"),
        ("n_windows = four", "n_windows"),
        ("n_windows = 0", "n_windows"),
        ("lag2 = 20", "lag2"),
        ("bands_hz = 5, 3", "bands_hz"),
        ("kappa = -1", "kappa"),
    ])
    def test_errors_name_field(self, text, field):
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert err.value.field == field

    def test_check_signal(self):
        cfg = PipelineConfig()
        cfg.check_signal(8, 400)
        with pytest.raises(ConfigError, match="n_windows"):
            cfg.check_signal(8, 402)
        with pytest.raises(ConfigError, match="n_coarse"):
            cfg.check_signal(8, 16)
