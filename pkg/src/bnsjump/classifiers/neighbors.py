"""Distance-based learners: k-nearest neighbors and a labeled k-means."""

from __future__ import annotations

import numpy as np

from ..seeding import substream


def _sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, |A| x |B|."""
    d2 = (A**2).sum(axis=1)[:, None] + (B**2).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d2, 0.0)


class KNearestClassifier:
    """Majority vote among the k nearest training rows (Euclidean)."""

    def __init__(self, k: int = 5):
        self.k = k
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNearestClassifier":
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=int)
        return self

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        k = min(self.k, len(self.y))
        d2 = _sq_distances(np.asarray(X, dtype=float), self.X)
        nearest = np.argpartition(d2, k - 1, axis=1)[:, :k]
        return self.y[nearest].mean(axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_score(X) > 0.5).astype(int)


class KMeansLabeler:
    """Lloyd k-means whose clusters inherit the majority training label.

    Runs ``restarts`` seeded initializations and keeps the lowest-inertia
    run (earliest restart wins ties); prediction assigns the label of the
    nearest centroid.
    """

    def __init__(self, k: int = 2, iterations: int = 100, restarts: int = 10):
        self.k = k
        self.iterations = iterations
        self.restarts = restarts
        self.centroids: np.ndarray | None = None
        self.cluster_labels: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, seed=0) -> "KMeansLabeler":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        n = len(X)
        k = min(self.k, n)
        best_inertia = np.inf
        best_centroids = None
        for r in range(self.restarts):
            rng = substream(seed, r)
            centroids = X[rng.choice(n, k, replace=False)].copy()
            assign = None
            for _ in range(self.iterations):
                new_assign = np.argmin(_sq_distances(X, centroids), axis=1)
                if assign is not None and np.array_equal(new_assign, assign):
                    break
                assign = new_assign
                for c in range(k):
                    members = X[assign == c]
                    if len(members):
                        centroids[c] = members.mean(axis=0)
            inertia = float(_sq_distances(X, centroids).min(axis=1).sum())
            if inertia < best_inertia - 1e-12:
                best_inertia = inertia
                best_centroids = centroids.copy()
        self.centroids = best_centroids
        assign = np.argmin(_sq_distances(X, self.centroids), axis=1)
        overall = 1 if 2 * int(y.sum()) > n else 0
        labels = np.empty(k, dtype=int)
        for c in range(k):
            members = y[assign == c]
            if len(members) == 0:
                labels[c] = overall
            else:
                ones = int(members.sum())
                labels[c] = 1 if 2 * ones > len(members) else 0
        self.cluster_labels = labels
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        assign = np.argmin(_sq_distances(np.asarray(X, dtype=float), self.centroids), axis=1)
        return self.cluster_labels[assign]
