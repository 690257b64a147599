import numpy as np
import pytest

from oodeval import (
    GenerationError,
    InputError,
    ParseError,
    ScoreSet,
    SuiteSpec,
    SynthSpec,
    auroc,
    downsample_set,
    gaussian_auroc,
    gen_score_set,
    gen_suite,
    gen_val_scores,
    plan_suite,
    ratio_size_sweep,
    splitmix64,
)
from oodeval.synth import read_manifest, write_manifest


def spec_for(gap, sd=0.05, n=5000, seed=0, family="gaussian"):
    return SynthSpec(
        id="t", family=family,
        mu_ind=0.5 + gap / 2, sigma_ind=sd,
        mu_ood=0.5 - gap / 2, sigma_ood=sd,
        n_ind=n, n_ood=n, seed=seed,
    )


class TestGenScoreSet:
    def test_zero_gap_auroc_half(self):
        s = gen_score_set(spec_for(0.0))
        assert auroc(s) == pytest.approx(0.5, abs=0.02)

    def test_matches_closed_form_auroc(self):
        for gap in (0.05, 0.1, 0.2):
            spec = spec_for(gap, n=10000, seed=3)
            s = gen_score_set(spec)
            expected = gaussian_auroc(spec.mu_ind, spec.sigma_ind, spec.mu_ood, spec.sigma_ood)
            assert auroc(s) == pytest.approx(expected, abs=0.01)

    def test_logit_family_keeps_auroc_and_range(self):
        spec = SynthSpec(
            id="t", family="logit_normal", mu_ind=1.5, sigma_ind=1.0,
            mu_ood=0.0, sigma_ood=1.0, n_ind=10000, n_ood=10000, seed=4,
        )
        s = gen_score_set(spec)
        assert np.all((s.scores > 0.0) & (s.scores < 1.0))
        expected = gaussian_auroc(1.5, 1.0, 0.0, 1.0)
        assert auroc(s) == pytest.approx(expected, abs=0.01)

    def test_same_seed_bit_identical(self):
        a = gen_score_set(spec_for(0.1, seed=9))
        b = gen_score_set(spec_for(0.1, seed=9))
        assert np.array_equal(a.scores, b.scores)
        assert np.array_equal(a.labels, b.labels)

    def test_spec_validation(self):
        with pytest.raises(InputError):
            SynthSpec(id="x", family="gaussian", mu_ind=1, sigma_ind=0,
                      mu_ood=0, sigma_ood=1, n_ind=10, n_ood=10, seed=0)
        with pytest.raises(InputError):
            SynthSpec(id="x", family="beta", mu_ind=1, sigma_ind=1,
                      mu_ood=0, sigma_ood=1, n_ind=10, n_ood=10, seed=0)


class TestGenSuite:
    def test_default_counts_ids_and_span(self):
        spec = SuiteSpec(seed=0, n_ind=800, n_ood=800)
        train, test = gen_suite(spec)
        assert len(train) == 150 and len(test) == 50
        assert set(train.ids).isdisjoint(test.ids)
        aurocs = [auroc(s) for s in train] + [auroc(s) for s in test]
        # realized span within +/-0.03 of the target interval
        assert min(aurocs) <= 0.58 and min(aurocs) >= 0.52
        assert max(aurocs) >= 0.97

    def test_degenerate_unit_span_fully_separated(self):
        spec = SuiteSpec(seed=1, span=(1.0, 1.0), n_train=6, n_test=2,
                         n_ind=500, n_ood=500)
        train, test = gen_suite(spec)
        for s in list(train) + list(test):
            assert auroc(s) == 1.0

    def test_fixed_seed_reproducible(self):
        spec = SuiteSpec(seed=7, n_train=5, n_test=2, n_ind=200, n_ood=200)
        a_train, _ = gen_suite(spec)
        b_train, _ = gen_suite(spec)
        for x, y in zip(a_train, b_train):
            assert x.id == y.id and np.array_equal(x.scores, y.scores)

    def test_unsatisfiable_span_rejected(self):
        with pytest.raises(GenerationError):
            SuiteSpec(span=(0.4, 0.9))
        with pytest.raises(GenerationError):
            SuiteSpec(span=(0.9, 0.8))
        with pytest.raises(GenerationError):
            SuiteSpec(span=(0.6, 1.2))


class TestSplitmix:
    def test_deterministic_and_spread(self):
        a = [splitmix64(0, i) for i in range(100)]
        b = [splitmix64(0, i) for i in range(100)]
        assert a == b
        assert len(set(a)) == 100
        assert [splitmix64(1, i) for i in range(10)] != a[:10]


class TestDownsample:
    def test_membership_only(self):
        rng = np.random.default_rng(5)
        s = ScoreSet.from_parts(rng.normal(1, 0.1, 100), rng.normal(0, 0.1, 100), id="d")
        small = downsample_set(s, 30, 10, seed=11)
        assert small.n == 40
        assert int(small.labels.sum()) == 30
        pool = set(zip(s.scores.tolist(), s.labels.tolist()))
        assert all((v, l) in pool for v, l in zip(small.scores, small.labels))

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        s = ScoreSet.from_parts(rng.normal(1, 0.1, 50), rng.normal(0, 0.1, 50), id="d")
        a = downsample_set(s, 10, 10, seed=3)
        b = downsample_set(s, 10, 10, seed=3)
        assert np.array_equal(a.scores, b.scores)


class TestRatioSizeSweep:
    def base(self, **kw):
        kw.setdefault("n_train", 8)
        kw.setdefault("n_test", 2)
        kw.setdefault("n_ind", 5000)
        kw.setdefault("n_ood", 5000)
        kw.setdefault("count_jitter", 0.0)
        return SuiteSpec(seed=2, **kw)

    def test_full_ratio_and_size_identity(self):
        spec = self.base()
        cells = ratio_size_sweep(spec, ratios=["1:1"], sizes=[10000])
        base_train, _ = gen_suite(spec)
        for key in ("ratio=1:1", "size=10000"):
            for a, b in zip(cells[key], base_train):
                assert np.array_equal(np.sort(a.scores), np.sort(b.scores))

    def test_hundred_to_one_counts(self):
        cells = ratio_size_sweep(self.base(), ratios=["100:1"])
        for s in cells["ratio=100:1"]:
            assert int(s.labels.sum()) == 5000
            assert int((~s.labels).sum()) == 50

    def test_size_splits_evenly(self):
        cells = ratio_size_sweep(self.base(), sizes=[50])
        for s in cells["size=50"]:
            assert int(s.labels.sum()) == 25 and s.n == 50

    def test_varied_mode_ranges(self):
        spec = self.base()
        cells = ratio_size_sweep(spec, varied=True, varied_low=100)
        rows = [r for r in plan_suite(spec) if r[1] == "train"]
        for s, (set_spec, _) in zip(cells["varied"], rows):
            n_ind = int(s.labels.sum())
            n_ood = int((~s.labels).sum())
            assert 100 <= n_ind <= set_spec.n_ind
            assert 100 <= n_ood <= set_spec.n_ood

    def test_too_small_requests_rejected(self):
        with pytest.raises(InputError):
            ratio_size_sweep(self.base(), ratios=["10000:1"])
        with pytest.raises(InputError):
            ratio_size_sweep(self.base(), sizes=[3])
        with pytest.raises(InputError):
            ratio_size_sweep(self.base(n_ind=50, n_ood=50), varied=True)

    def test_needs_balanced_base(self):
        with pytest.raises(InputError):
            ratio_size_sweep(self.base(n_ood=400), ratios=["1:1"])


class TestManifest:
    def test_roundtrip(self, tmp_path):
        spec = SuiteSpec(seed=3, n_train=4, n_test=2, n_ind=50, n_ood=60)
        rows = plan_suite(spec)
        path = tmp_path / "manifest.csv"
        write_manifest(path, rows)
        back = read_manifest(path)
        assert back == rows

    def test_bad_header(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("id,family\n")
        with pytest.raises(ParseError):
            read_manifest(p)

    def test_duplicate_id(self, tmp_path):
        spec = SuiteSpec(seed=3, n_train=2, n_test=0, n_ind=50, n_ood=50)
        rows = plan_suite(spec)
        rows = [rows[0], rows[0]]
        p = tmp_path / "m.csv"
        write_manifest(p, rows)
        with pytest.raises(ParseError):
            read_manifest(p)

    def test_val_scores_are_ind_only(self):
        spec = SuiteSpec(seed=4, n_ind=100, n_ood=100)
        val = gen_val_scores(spec, 500)
        assert val.n == 500
        assert val.labels.all()
