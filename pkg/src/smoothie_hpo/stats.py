"""Task metrics and the rank-based win/tie/loss protocol.

Binary metrics come from the confusion counts a (true negatives),
b (false negatives), c (false positives), d (true positives).  Groups of
repeated runs are compared with a Kruskal-Wallis gate followed by pairwise
Mann-Whitney U-tests against the best-median treatment, with
Benjamini-Hochberg correction.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

# metrics where lower is better
MINIMIZED_METRICS = {"pf"}

METRIC_NAMES = ("accuracy", "recall", "precision", "f1", "pf")

# exact Mann-Whitney enumeration up to this pooled size
EXACT_MWU_LIMIT = 12


def metric_direction(metric: str) -> str:
    return "min" if metric in MINIMIZED_METRICS else "max"


@dataclass(frozen=True)
class Confusion:
    a: int  # true negatives
    b: int  # false negatives
    c: int  # false positives
    d: int  # true positives

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("confusion counts must be >= 0")


def confusion_binary(y_true, y_pred, positive: int = 1) -> Confusion:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    pos_t = y_true == positive
    pos_p = y_pred == positive
    return Confusion(
        a=int((~pos_t & ~pos_p).sum()),
        b=int((pos_t & ~pos_p).sum()),
        c=int((~pos_t & pos_p).sum()),
        d=int((pos_t & pos_p).sum()),
    )


def _safe_div(num, den):
    return (num / den, False) if den else (0.0, True)


def metrics(conf: Confusion) -> dict:
    """accuracy, recall, precision, f1 and false alarm from one confusion.

    Zero-denominator metrics report 0.0 and are listed under "degenerate".
    """
    a, b, c, d = conf.a, conf.b, conf.c, conf.d
    degenerate = []
    accuracy, bad = _safe_div(a + d, a + b + c + d)
    if bad:
        degenerate.append("accuracy")
    recall, bad = _safe_div(d, b + d)
    if bad:
        degenerate.append("recall")
    precision, bad = _safe_div(d, c + d)
    if bad:
        degenerate.append("precision")
    f1, bad = _safe_div(2.0 * recall * precision, recall + precision)
    if bad:
        degenerate.append("f1")
    pf, bad = _safe_div(c, a + c)
    if bad:
        degenerate.append("pf")
    return {"accuracy": accuracy, "recall": recall, "precision": precision,
            "f1": f1, "pf": pf, "degenerate": degenerate}


def classification_metrics(y_true, y_pred, k: int, positive: int = 1) -> dict:
    """Binary metrics directly for k=2; macro one-vs-rest above that."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if k == 2:
        out = metrics(confusion_binary(y_true, y_pred, positive=positive))
        out.pop("degenerate")
        return out
    acc = float((y_true == y_pred).mean())
    sums = {name: 0.0 for name in METRIC_NAMES if name != "accuracy"}
    for c in range(k):
        vals = metrics(confusion_binary(y_true, y_pred, positive=c))
        for name in sums:
            sums[name] += vals[name]
    out = {name: val / k for name, val in sums.items()}
    out["accuracy"] = acc
    return out


def normalized_regret(p_t: float, p_20: float) -> float:
    """1 - p_t / p_20; negative values beat the anchor."""
    if p_20 == 0:
        raise ValueError("anchor performance must be nonzero")
    return 1.0 - p_t / p_20


def normalized_score(perf: float, random_mean: float, optimum: float) -> float:
    """Performance as a 0-100 position between random search and the optimum."""
    if optimum == random_mean:
        raise ValueError("optimum must differ from the random-search mean")
    return 100.0 * (perf - random_mean) / (optimum - random_mean)


def _rank_with_ties(pooled: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks (1-based) and tie-group sizes."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled))
    ties = []
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        ranks[order[i:j + 1]] = avg
        ties.append(j - i + 1)
        i = j + 1
    return ranks, np.asarray(ties, dtype=np.float64)


def _chi2_sf(x: float, df: int) -> float:
    return float(gammaincc(df / 2.0, x / 2.0))


def kruskal_wallis(groups: list) -> dict:
    """Rank H statistic with tie correction; chi-square p with g-1 df."""
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise ValueError("need at least two non-empty groups")
    pooled = np.concatenate(groups)
    N = len(pooled)
    ranks, ties = _rank_with_ties(pooled)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + len(g)]
        h += r.sum() ** 2 / len(g)
        start += len(g)
    h = 12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)
    correction = 1.0 - (ties ** 3 - ties).sum() / (N ** 3 - N)
    if correction == 0.0:
        # every observation identical: no rank separation by definition
        return {"H": 0.0, "p": 1.0}
    h /= correction
    return {"H": h, "p": _chi2_sf(h, len(groups) - 1)}


def _u_statistic(x: np.ndarray, y: np.ndarray) -> float:
    gt = (x[:, None] > y[None, :]).sum()
    eq = (x[:, None] == y[None, :]).sum()
    return float(gt) + 0.5 * float(eq)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney(x, y) -> dict:
    """Two-sided Mann-Whitney U for x against y.

    Exact enumeration over all rank assignments when the pooled size is at
    most EXACT_MWU_LIMIT, else a tie-corrected normal approximation with
    continuity correction.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be non-empty")
    n1, n2 = len(x), len(y)
    u = _u_statistic(x, y)
    center = n1 * n2 / 2.0

    if n1 + n2 <= EXACT_MWU_LIMIT:
        pooled = np.concatenate([x, y])
        total = 0
        hits = 0
        dev = abs(u - center)
        for picks in itertools.combinations(range(n1 + n2), n1):
            mask = np.zeros(n1 + n2, dtype=bool)
            mask[list(picks)] = True
            u_perm = _u_statistic(pooled[mask], pooled[~mask])
            total += 1
            if abs(u_perm - center) >= dev - 1e-12:
                hits += 1
        return {"U": u, "p": hits / total, "method": "exact"}

    pooled = np.concatenate([x, y])
    _, ties = _rank_with_ties(pooled)
    N = n1 + n2
    var = n1 * n2 / 12.0 * ((N + 1) - (ties ** 3 - ties).sum() / (N * (N - 1)))
    if var <= 0:
        return {"U": u, "p": 1.0, "method": "normal"}
    # continuity correction pulls the statistic half a step toward center
    z = (abs(u - center) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    return {"U": u, "p": min(1.0, 2.0 * _normal_sf(z)), "method": "normal"}


def bh_adjust(pvals) -> list:
    """Benjamini-Hochberg step-up adjusted p-values, in the input order."""
    p = np.asarray(pvals, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m / rank)
        adjusted[idx] = running
    return adjusted.tolist()


def rank_treatments(results: dict, alpha: float = 0.05,
                    direction: str = "max") -> dict:
    """Statistical ranking of treatments from repeated measurements.

    Kruskal-Wallis gates everything: without overall significance all
    treatments tie.  Otherwise each treatment is tested pairwise against
    the best-median one (BH-corrected); those not significantly different
    join the best set.  A lone best-set member wins (strictly better rank
    and better median); members of a shared best set tie; the rest lose.
    """
    if len(results) < 2:
        raise ValueError("need at least two treatments")
    if direction not in ("max", "min"):
        raise ValueError("direction must be 'max' or 'min'")
    names = sorted(results)
    groups = [np.asarray(results[name], dtype=np.float64) for name in names]
    kw = kruskal_wallis(groups)

    medians = {name: float(np.median(results[name])) for name in names}
    if kw["p"] >= alpha:
        outcomes = {name: "tie" for name in names}
        return {"best_set": set(names), "outcomes": outcomes, "wins": 0,
                "ties": len(names), "losses": 0, "kw": kw,
                "medians": medians, "pairwise": {}}

    sign = 1.0 if direction == "max" else -1.0
    anchor = min(names, key=lambda nm: (-sign * medians[nm], nm))
    others = [nm for nm in names if nm != anchor]
    raw = [mann_whitney(results[nm], results[anchor])["p"] for nm in others]
    adjusted = bh_adjust(raw)
    pairwise = {nm: {"p_raw": pr, "p_adj": pa}
                for nm, pr, pa in zip(others, raw, adjusted)}

    best_set = {anchor}
    for nm, pa in zip(others, adjusted):
        if pa >= alpha:
            best_set.add(nm)
    outcomes = {}
    for nm in names:
        if nm not in best_set:
            outcomes[nm] = "loss"
        elif len(best_set) == 1:
            outcomes[nm] = "win"
        else:
            outcomes[nm] = "tie"
    counts = {o: sum(1 for v in outcomes.values() if v == o)
              for o in ("win", "tie", "loss")}
    return {"best_set": best_set, "outcomes": outcomes,
            "wins": counts["win"], "ties": counts["tie"],
            "losses": counts["loss"], "kw": kw, "medians": medians,
            "pairwise": pairwise}
