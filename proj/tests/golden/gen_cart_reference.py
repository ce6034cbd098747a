# Regenerates cart_reference.json from scikit-learn (run once, output committed).
# Datasets where some node has two equally good splits are skipped: sklearn
# breaks such ties through its random feature order.
import json, os
import numpy as np
import sklearn
from sklearn.tree import DecisionTreeClassifier


def gini_sum(y):
    if len(y) == 0:
        return 0.0
    p = y.mean()
    return len(y) * (1 - p * p - (1 - p) ** 2)


def has_tie(clf, X, y):
    t = clf.tree_
    paths = clf.decision_path(X).toarray().astype(bool)
    for node in range(t.node_count):
        if t.children_left[node] == -1:
            continue
        rows = paths[:, node]
        Xs, ys = X[rows], y[rows]
        gains = []
        for j in range(X.shape[1]):
            vals = np.unique(Xs[:, j])
            for a, b in zip(vals[:-1], vals[1:]):
                left = Xs[:, j] <= (a + b) / 2
                if min(left.sum(), (~left).sum()) < clf.min_samples_leaf:
                    continue
                gains.append(gini_sum(ys) - gini_sum(ys[left]) - gini_sum(ys[~left]))
        gains.sort(reverse=True)
        if len(gains) > 1 and gains[0] - gains[1] < 1e-9:
            return True
    return False


rng = np.random.default_rng(20240607)
cases = []
while len(cases) < 16:
    n, p = 80, 3
    X = rng.random((n, p)).round(6)
    z = (X[:, 0] + 0.6 * X[:, 1] > 0.8) ^ (X[:, 2] < 0.3)
    flip = rng.random(n) < 0.15
    y = (z ^ flip).astype(int)
    fits = [DecisionTreeClassifier(max_depth=3, min_samples_leaf=leaf, random_state=0).fit(X, y) for leaf in (1, 5)]
    if any(has_tie(clf, X, y) for clf in fits):
        continue
    for leaf, clf in zip((1, 5), fits):
        t = clf.tree_
        cases.append({"X": X.tolist(), "y": y.tolist(), "max_depth": 3, "min_samples_leaf": leaf,
                      "root_feature": int(t.feature[0]), "root_threshold": float(t.threshold[0]),
                      "predictions": clf.predict(X).tolist()})

with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), "cart_reference.json"), "w") as f:
    json.dump({"generator": "sklearn DecisionTreeClassifier " + sklearn.__version__, "cases": cases}, f)
