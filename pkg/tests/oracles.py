"""Independent reference implementations used only by the tests.

These are written from the definitions with plain loops and share no code
with the package, so agreement is evidence rather than tautology.
"""

import itertools
import math

import numpy as np


def confusion_loops(true, pred, k):
    cm = [[0] * k for _ in range(k)]
    for t, p in zip(true, pred):
        cm[int(t)][int(p)] += 1
    return np.array(cm)


def f1_from_pr(cm):
    """Per-class F1 from precision and recall, classes absent everywhere dropped."""
    k = len(cm)
    scores = []
    for c in range(k):
        tp = cm[c][c]
        fp = sum(cm[r][c] for r in range(k)) - tp
        fn = sum(cm[c][r] for r in range(k)) - tp
        if tp + fp + fn == 0:
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(0.0 if precision + recall == 0
                      else 2 * precision * recall / (precision + recall))
    return scores


def macro_f1_loops(cm):
    s = f1_from_pr(cm)
    return sum(s) / len(s)


def accuracy_loops(cm):
    k = len(cm)
    return sum(cm[i][i] for i in range(k)) / sum(cm[i][j] for i in range(k) for j in range(k))


def alpha_ref(f, s, w=0.7):
    return w * f + (1 - w) * (1 - s)


ACT = {
    "RELU": lambda x: x if x > 0 else 0.0,
    "SIG": lambda x: 1 / (1 + math.exp(-x)),
    "TANH": math.tanh,
    "ELU": lambda x: x if x > 0 else math.exp(x) - 1,
}


def conv_same_loops(x, w, b):
    """Direct 3x3 zero-padded convolution of one image ``(C, H, W)``."""
    c_in, h, wd = x.shape
    c_out = w.shape[0]
    out = np.zeros((c_out, h, wd))
    for o in range(c_out):
        for i in range(h):
            for j in range(wd):
                acc = b[o]
                for c in range(c_in):
                    for di in range(3):
                        for dj in range(3):
                            ii, jj = i + di - 1, j + dj - 1
                            if 0 <= ii < h and 0 <= jj < wd:
                                acc += w[o, c, di, dj] * x[c, ii, jj]
                out[o, i, j] = acc
    return out


def pool_loops(x):
    c, h, w = x.shape
    out = np.zeros((c, h // 2, w // 2))
    for k in range(c):
        for i in range(h // 2):
            for j in range(w // 2):
                out[k, i, j] = max(x[k, 2 * i + a, 2 * j + b] for a in (0, 1) for b in (0, 1))
    return out


def forward_loops(params, genome, image, pool_after):
    """Class probabilities for one image, computed layer by layer with loops."""
    x = np.asarray(image, dtype=np.float64)
    for i, gene in enumerate(genome):
        z = conv_same_loops(x, params[f"conv{i}.weight"].astype(np.float64),
                            params[f"conv{i}.bias"].astype(np.float64))
        f = ACT[gene]
        x = np.vectorize(f)(z)
        if pool_after[i]:
            x = pool_loops(x)
    feat = x.mean(axis=(1, 2))
    logits = params["dense.weight"].astype(np.float64) @ feat + params["dense.bias"]
    m = max(logits)
    e = [math.exp(v - m) for v in logits]
    return np.array([v / sum(e) for v in e])


def param_count_by_hand(n, base=16, cap=128, in_ch=3, classes=10):
    total, prev = 0, in_ch
    for i in range(n):
        out = min(base * 2 ** (i // 2), cap)
        total += out * prev * 9 + out
        prev = out
    return total + prev * classes + classes


def brute_force_optimum(n, functions, fitness):
    best = -math.inf
    for genes in itertools.product(functions, repeat=n):
        best = max(best, fitness(genes))
    return best
