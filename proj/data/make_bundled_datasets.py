#!/usr/bin/env python3
"""Regenerate the bundled CSV datasets.

wine.csv, iris.csv and cancer.csv are verbatim exports of the scikit-learn
copies of the UCI Wine, Iris and Breast Cancer Wisconsin (diagnostic) data.

parkinsons.csv, drug.csv and irrigation.csv are seeded synthetic stand-ins
for the UCI Parkinsons voice dataset and the Kaggle drug-classification and
irrigation-pump datasets, which are not redistributed here. The stand-ins
reproduce the published structure of the originals: row and feature counts
(195x22, 200x5, 200x2), class balances, and the number of standardized
principal components needed to explain 95% of the variance (8, 5, 2).

Running this script rewrites the CSVs in place; every generator is seeded,
so the output is reproducible byte for byte.
"""

import csv
import math
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def write_csv(name, header, rows):
    path = os.path.join(HERE, name)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows x {len(header)} cols)")


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return int(x)
    return repr(float(x))


def encode_first_appearance(column):
    seen = {}
    out = []
    for v in column:
        if v not in seen:
            seen[v] = len(seen)
        out.append(seen[v])
    return np.array(out, dtype=float)


def pca95_components(X):
    """Components needed for 95% variance after per-column z-scoring."""
    Xc = X - X.mean(axis=0)
    sd = Xc.std(axis=0)
    sd[sd == 0] = 1.0
    Xs = Xc / sd
    cov = Xs.T @ Xs / (len(Xs) - 1)
    ev = np.sort(np.linalg.eigvalsh(cov))[::-1]
    ratios = ev / ev.sum()
    return int(np.searchsorted(np.cumsum(ratios), 0.95) + 1)


def export_sklearn():
    from sklearn.datasets import load_breast_cancer, load_iris, load_wine

    for name, loader in (("wine", load_wine), ("iris", load_iris),
                         ("cancer", load_breast_cancer)):
        ds = loader()
        header = [c.replace(" ", "_") for c in ds.feature_names] + ["target"]
        rows = [[fmt(v) for v in x] + [int(y)] for x, y in zip(ds.data, ds.target)]
        write_csv(f"{name}.csv", header, rows)


def make_parkinsons(seed=20240517):
    """195 voice-measure rows, 22 numeric features, binary status (147/48).

    Feature matrix is drawn from a fixed covariance whose standardized
    spectrum is calibrated so that 8 principal components explain 95% of the
    variance. Labels follow a noisy threshold on the two leading components.
    """
    n, m = 195, 22
    rng = np.random.default_rng(seed)
    # target spectrum for the correlation matrix: 8 dominant directions
    head = np.array([6.6, 4.4, 3.1, 2.2, 1.7, 1.4, 1.06, 0.66])
    tail = np.full(m - len(head), (m - head.sum()) / (m - len(head)))
    lam = np.concatenate([head, tail])
    q, _ = np.linalg.qr(rng.normal(size=(m, m)))
    X = rng.normal(size=(n, m)) @ np.diag(np.sqrt(lam)) @ q.T

    # ranking statistic on the two leading directions + noise -> 147 positives
    score = X @ q[:, 0] + 0.5 * (X @ q[:, 1]) + rng.normal(0, 0.8, n)
    order = np.argsort(score)[::-1]
    y = np.zeros(n, dtype=int)
    y[order[:147]] = 1

    # map to plausible voice-measure scales (positive, column-specific)
    scales = rng.uniform(0.5, 40.0, m)
    offsets = rng.uniform(50.0, 200.0, m)
    X = X * scales + offsets

    k = pca95_components(X)
    assert k == 8, f"parkinsons stand-in calibration drifted: {k} components"

    header = [f"voice_{i + 1:02d}" for i in range(m)] + ["status"]
    rows = [[fmt(v) for v in x] + [int(t)] for x, t in zip(X, y)]
    write_csv("parkinsons.csv", header, rows)


def make_drug(seed=20240518):
    """200 rows with the classic Age/Sex/BP/Cholesterol/Na_to_K schema."""
    n = 200
    rng = np.random.default_rng(seed)
    age = rng.integers(15, 75, n)
    sex = rng.choice(["F", "M"], n)
    bp = rng.choice(["HIGH", "LOW", "NORMAL"], n, p=[0.38, 0.32, 0.30])
    chol = rng.choice(["HIGH", "NORMAL"], n)
    # skewed towards low ratios, as in the original measurements
    na_to_k = np.round(6.2 + 32.0 * rng.beta(1.1, 2.6, n), 3)

    def label(i):
        if na_to_k[i] > 15.0:
            return "DrugY"
        if bp[i] == "HIGH":
            return "drugA" if age[i] < 50 else "drugB"
        if bp[i] == "LOW":
            return "drugC" if chol[i] == "HIGH" else "drugX"
        return "drugX"

    drugs = [label(i) for i in range(n)]

    feats = np.column_stack([
        age.astype(float),
        encode_first_appearance(sex),
        encode_first_appearance(bp),
        encode_first_appearance(chol),
        na_to_k,
    ])
    k = pca95_components(feats)
    assert k == 5, f"drug stand-in calibration drifted: {k} components"

    header = ["Age", "Sex", "BP", "Cholesterol", "Na_to_K", "Drug"]
    rows = [
        [int(age[i]), sex[i], bp[i], chol[i], fmt(na_to_k[i]), drugs[i]]
        for i in range(n)
    ]
    write_csv("drug.csv", header, rows)


def make_irrigation(seed=20240519):
    """200 rows of (soil moisture, temperature) with a binary pump label."""
    n = 200
    rng = np.random.default_rng(seed)
    moisture = np.round(rng.uniform(300.0, 800.0, n), 1)
    temp = np.round(rng.uniform(10.0, 45.0, n), 1)
    # pump on when soil is dry, with temperature nudging the threshold
    thresh = 550.0 + 2.0 * (temp - 27.5) + rng.normal(0, 25.0, n)
    pump = (moisture < thresh).astype(int)

    feats = np.column_stack([moisture, temp])
    k = pca95_components(feats)
    assert k == 2, f"irrigation stand-in calibration drifted: {k} components"

    header = ["moisture", "temperature", "pump"]
    rows = [[fmt(moisture[i]), fmt(temp[i]), int(pump[i])] for i in range(n)]
    write_csv("irrigation.csv", header, rows)


def main():
    export_sklearn()
    make_parkinsons()
    make_drug()
    make_irrigation()


if __name__ == "__main__":
    main()
