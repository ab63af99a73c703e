import numpy as np
import pytest

from sqnn.errors import ShapeError
from sqnn.estimator import SqnnClassifier


def separable_data(n=60, seed=0):
    # flattened 2x2 images: class "a" bright on the left, "b" bright on the
    # right; brightness stays below 0.5 so the encoded features sin(pi*x)
    # remain monotone in pixel value
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 0.1, (n, 4))
    y = np.where(rng.random(n) < 0.5, "a", "b")
    X[y == "a", 0] += 0.4
    X[y == "a", 2] += 0.4
    X[y == "b", 1] += 0.4
    X[y == "b", 3] += 0.4
    return np.clip(X, 0, 1), y


class TestFitPredict:
    def test_learns_separable_toy(self):
        X, y = separable_data()
        clf = SqnnClassifier(image_shape=(2, 2), blocks=2, learning_rate=0.3, epochs=12, batch_size=20, seed=4)
        clf.fit(X, y)
        assert clf.score(X, y) >= 0.9
        assert set(clf.predict(X)) <= {"a", "b"}

    def test_sqnn_variant_runs(self):
        X, y = separable_data(40)
        clf = SqnnClassifier(
            image_shape=(2, 2), extractor_capacities=[2, 2], blocks=1,
            learning_rate=0.3, epochs=6, batch_size=20, seed=5,
        )
        clf.fit(X, y)
        assert 0.0 <= clf.score(X, y) <= 1.0
        assert clf.decision_function(X).shape == (40,)

    def test_decision_function_bounded(self):
        X, y = separable_data(30)
        clf = SqnnClassifier(image_shape=(2, 2), epochs=2, seed=1).fit(X, y)
        scores = clf.decision_function(X)
        assert np.all(np.abs(scores) <= 1 + 1e-12)

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            SqnnClassifier().predict(np.zeros((2, 16)))

    def test_wrong_feature_count(self):
        X, y = separable_data(20)
        clf = SqnnClassifier(image_shape=(2, 2), epochs=1).fit(X, y)
        with pytest.raises(ShapeError):
            clf.predict(np.zeros((3, 9)))

    def test_needs_two_classes(self):
        X, _ = separable_data(10)
        with pytest.raises(ValueError):
            SqnnClassifier(image_shape=(2, 2), epochs=1).fit(X, np.zeros(10))

    def test_same_seed_reproduces(self):
        X, y = separable_data(30)
        a = SqnnClassifier(image_shape=(2, 2), epochs=3, seed=9).fit(X, y)
        b = SqnnClassifier(image_shape=(2, 2), epochs=3, seed=9).fit(X, y)
        assert np.array_equal(a.decision_function(X), b.decision_function(X))

    def test_explicit_validation_set(self):
        X, y = separable_data(40)
        X_val, y_val = separable_data(12, seed=3)
        clf = SqnnClassifier(image_shape=(2, 2), epochs=4, seed=2)
        clf.fit(X, y, X_val=X_val, y_val=y_val)
        assert len(clf.history_) == 4
        assert 0.0 <= clf.best_accuracy_ <= 1.0


class TestRealData:
    def test_digit_pair_classification(self, mnist_dir):
        from sqnn.dataset import downscale_set, load_split

        train = downscale_set(load_split(mnist_dir, "train"), (4, 4)).subset(800)
        test = downscale_set(load_split(mnist_dir, "test"), (4, 4)).subset(300)
        clf = SqnnClassifier(
            image_shape=(4, 4), extractor_capacities=[4, 4, 4, 4], blocks=3,
            learning_rate=0.5, batch_size=8, epochs=5, seed=0,
        )
        clf.fit(train.images.reshape(len(train), -1), train.labels,
                X_val=test.images.reshape(len(test), -1), y_val=test.labels)
        assert clf.score(test.images.reshape(len(test), -1), test.labels) >= 0.9


class TestSklearnProtocol:
    def test_get_set_params_round_trip(self):
        clf = SqnnClassifier(epochs=7, learning_rate=0.05)
        params = clf.get_params()
        assert params["epochs"] == 7
        clf.set_params(epochs=3)
        assert clf.get_params()["epochs"] == 3

    def test_clone_compatible(self):
        sklearn = pytest.importorskip("sklearn")
        from sklearn.base import clone

        clf = SqnnClassifier(image_shape=(2, 2), epochs=2, seed=3)
        cloned = clone(clf)
        assert cloned.get_params() == clf.get_params()

    def test_works_in_pipeline(self):
        pytest.importorskip("sklearn")
        from sklearn.pipeline import Pipeline

        X, y = separable_data(30)
        pipe = Pipeline([("clf", SqnnClassifier(image_shape=(2, 2), epochs=2, seed=2))])
        pipe.fit(X, y)
        assert pipe.predict(X).shape == (30,)
