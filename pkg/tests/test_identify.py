import numpy as np
import pytest

from whitenmf.identify import (INDETERMINATE, build_model, evaluate,
                               identify, rectify, transductive_whiten)
from whitenmf.signals import (BenchmarkSpec, Ensemble, Signal,
                              synth_benchmark)
from whitenmf.snmf import DegenerateAtomError, SolverConfig
from whitenmf.whitening import whiten


@pytest.fixture(scope="module")
def benchmark():
    spec = BenchmarkSpec()
    train, test = synth_benchmark(spec)
    model = build_model(train)
    return spec, train, test, model


def make_ensemble(rows, labels, dt=1.0):
    return Ensemble([Signal(id=f"s{i}", label=lab, samples=row, dt=dt)
                     for i, (row, lab) in enumerate(zip(rows, labels))])


class TestRectify:
    def test_nonnegative_passthrough(self):
        e = make_ensemble([[1.0, 2.0], [0.5, 0.0]], ["a", "b"])
        assert np.array_equal(rectify(e), [[1.0, 0.5], [2.0, 0.0]])

    def test_absolute_value(self):
        e = make_ensemble([[-1.0, 2.0, -3.0]], ["a"])
        assert np.array_equal(rectify(e).ravel(), [1.0, 2.0, 3.0])

    def test_even(self):
        e = make_ensemble([[-1.0, 2.0, -3.0]], ["a"])
        neg = make_ensemble([[1.0, -2.0, 3.0]], ["a"])
        assert np.array_equal(rectify(e), rectify(neg))


class TestBuildModel:
    def test_benchmark_model(self, benchmark):
        _, train, _, model = benchmark
        assert model.dictionary.n_atoms == 12
        assert model.dictionary.atom_labels == train.labels
        norms = np.linalg.norm(model.dictionary.matrix, axis=0)
        assert np.allclose(norms, 1.0, atol=1e-10)

    def test_two_references(self):
        rng = np.random.default_rng(0)
        e = make_ensemble(rng.standard_normal((2, 64)), ["a", "b"])
        model = build_model(e)
        assert model.dictionary.n_atoms == 2

    def test_zero_reference_degenerate(self):
        rng = np.random.default_rng(1)
        rows = rng.standard_normal((3, 64))
        rows[1] = 0.0
        e = make_ensemble(rows, ["a", "b", "c"])
        with pytest.raises(DegenerateAtomError):
            build_model(e)

    def test_requires_two_signals(self):
        e = make_ensemble([[1.0, 2.0, 3.0]], ["a"])
        with pytest.raises(ValueError):
            build_model(e)


class TestTransductiveWhiten:
    def test_reference_copy_matches_itself(self, benchmark):
        _, train, _, model = benchmark
        wrefs = whiten(train, model.whitening)
        for i in (0, 3, 11):
            wq = transductive_whiten(train.signals[i], model)
            corrs = [abs(np.corrcoef(wq.samples, r.samples)[0, 1])
                     for r in wrefs.signals]
            assert int(np.argmax(corrs)) == i

    def test_zero_query_finite(self, benchmark):
        _, train, _, model = benchmark
        q = Signal(id="zero", label="", samples=np.zeros(train.n),
                   dt=train.dt)
        out = transductive_whiten(q, model)
        assert np.all(np.isfinite(out.samples))

    def test_deterministic(self, benchmark):
        _, _, test, model = benchmark
        a = transductive_whiten(test.signals[0], model)
        b = transductive_whiten(test.signals[0], model)
        assert np.array_equal(a.samples, b.samples)

    def test_length_mismatch(self, benchmark):
        _, train, _, model = benchmark
        q = Signal(id="short", label="", samples=np.ones(10), dt=train.dt)
        with pytest.raises(ValueError, match="short"):
            transductive_whiten(q, model)


class TestIdentify:
    def test_reference_fed_back(self, benchmark):
        _, train, _, model = benchmark
        for s in train.signals:
            assert identify(s, model).winner == s.label

    def test_held_out_instances(self, benchmark):
        _, _, test, model = benchmark
        for s in test.signals:
            assert identify(s, model, use_whitening=True).winner == s.label

    def test_single_atom_dictionary(self):
        rng = np.random.default_rng(2)
        refs = make_ensemble(rng.standard_normal((2, 64)), ["only", "only"])
        model = build_model(refs)
        q = Signal(id="q", label="", samples=rng.standard_normal(64), dt=1.0)
        result = identify(q, model)
        assert result.winner == "only"
        assert result.margin == 1.0

    def test_indeterminate_zero_query_unwhitened(self, benchmark):
        _, train, _, model = benchmark
        q = Signal(id="z", label="", samples=np.zeros(train.n), dt=train.dt)
        result = identify(q, model, use_whitening=False)
        assert result.winner == INDETERMINATE
        assert result.margin == 0.0

    def test_deterministic(self, benchmark):
        _, _, test, model = benchmark
        r1 = identify(test.signals[5], model)
        r2 = identify(test.signals[5], model)
        assert r1.winner == r2.winner
        assert r1.margin == r2.margin
        assert r1.scores == r2.scores

    def test_winner_scale_invariant(self, benchmark):
        _, _, test, model = benchmark
        for c in (0.5, 2.0, 10.0):
            for s in test.signals[:4]:
                scaled = Signal(id=s.id, label=s.label,
                                samples=c * s.samples, dt=s.dt)
                assert identify(scaled, model).winner == \
                    identify(s, model).winner

    def test_label_permutation_equivariance(self, benchmark):
        spec, train, test, model = benchmark
        perm = np.random.default_rng(3).permutation(train.d)
        shuffled = Ensemble([train.signals[i] for i in perm])
        model_p = build_model(shuffled)
        q = test.signals[7]
        r = identify(q, model)
        rp = identify(q, model_p)
        assert r.winner == rp.winner
        assert r.scores == pytest.approx(rp.scores, rel=1e-8)


class TestEvaluate:
    def test_references_self_consistent(self, benchmark):
        _, train, _, model = benchmark
        report = evaluate(train, model, use_whitening=True)
        assert report.accuracy == 1.0

    def test_whitened_at_least_unwhitened(self, benchmark):
        _, _, test, model = benchmark
        aw = evaluate(test, model, use_whitening=True).accuracy
        au = evaluate(test, model, use_whitening=False).accuracy
        assert aw >= au

    def test_unknown_label(self, benchmark):
        _, train, _, model = benchmark
        bad = Ensemble([Signal(id="q", label="alien",
                               samples=train.signals[0].samples,
                               dt=train.dt)])
        with pytest.raises(ValueError, match="alien"):
            evaluate(bad, model)

    def test_single_class_single_row(self, benchmark):
        _, _, test, model = benchmark
        sub = Ensemble([s for s in test.signals if s.label == "mine_d"])
        report = evaluate(sub, model)
        row_sums = report.confusion.sum(axis=1)
        assert np.count_nonzero(row_sums) == 1

    def test_confusion_shape_and_total(self, benchmark):
        _, _, test, model = benchmark
        report = evaluate(test, model)
        assert report.labels[-1] == INDETERMINATE
        assert report.confusion.shape == (13, 13)
        assert report.confusion.sum() == test.d
