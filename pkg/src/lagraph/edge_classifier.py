"""Same-label edge classifier.

Scores a node pair with a learned projection followed by a small MLP over
symmetric pair features: the elementwise absolute difference, sum, and
product of the two projected embeddings. Trained with class-weighted binary
cross-entropy by mini-batch gradient descent; all gradients are derived and
implemented here by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .graph import Graph, NodeTable, two_hop_candidates

ONE_HOP, TWO_HOP, SAMPLED = 0, 1, 2


@dataclass(frozen=True)
class PairSet:
    """Node pairs with same-label targets.

    ``labels`` is 1 where the endpoints share a class. ``provenance`` tags
    each pair as ONE_HOP, TWO_HOP, or SAMPLED.
    """

    u: np.ndarray
    v: np.ndarray
    labels: np.ndarray
    provenance: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        prov = np.asarray(self.provenance, dtype=np.int8)
        if not (u.shape == v.shape == labels.shape == prov.shape):
            raise ValueError("pair arrays must share one shape")
        if np.any(u == v):
            raise ValueError("self pairs are not allowed")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("pair labels must be 0 or 1")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "provenance", prov)

    def __len__(self) -> int:
        return int(self.u.shape[0])


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for edge classifier training."""

    proj_dim: int = 64
    hidden_widths: tuple[int, ...] = (32,)
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 100
    batch_size: int = 256
    seed: int = 0
    class_weighting: str = "balanced"  # or "none"
    include_two_hop: bool = True
    num_sampled: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if self.proj_dim < 1:
            raise ValueError("proj_dim must be >= 1")
        if self.num_sampled < 0:
            raise ValueError("num_sampled must be >= 0")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be >= 1")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.class_weighting not in ("balanced", "none"):
            raise ValueError("class_weighting must be 'balanced' or 'none'")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")


@dataclass
class EdgeClassifier:
    """Trained pair scorer: projection matrix plus MLP layers.

    ``layers`` lists ``(W, b)`` pairs; every layer but the last is followed
    by ReLU, the last maps to a single logit.
    """

    proj: np.ndarray
    layers: list[tuple[np.ndarray, np.ndarray]]
    threshold: float = 0.5
    final_loss: float = float("nan")
    loss_history: np.ndarray = field(default_factory=lambda: np.zeros(0))


def pair_features(e_u: np.ndarray, e_v: np.ndarray) -> np.ndarray:
    """Symmetric features of an embedding pair: |u-v| ++ (u+v) ++ (u*v).

    Accepts single vectors or batches of matching shape; the output is
    invariant under swapping the two arguments.
    """
    e_u = np.asarray(e_u, dtype=np.float64)
    e_v = np.asarray(e_v, dtype=np.float64)
    if e_u.shape != e_v.shape:
        raise ValueError("embedding shapes must match")
    return np.concatenate([np.abs(e_u - e_v), e_u + e_v, e_u * e_v], axis=-1)


def build_pairs(g: Graph, t: NodeTable, cfg: TrainConfig) -> PairSet:
    """Training pairs among train-split nodes.

    Takes every non-self edge with both endpoints in train, plus (when
    ``cfg.include_two_hop``) every train-train pair at distance exactly two.
    With ``cfg.num_sampled`` > 0, augments them with up to that many uniformly
    sampled train-train pairs not already present (fewer when the pool runs
    out). Each unordered pair appears once; labels compare node classes.
    """
    train = t.split_mask("train") & t.known_mask()
    edges = g.edge_array()
    mask = (edges[:, 0] < edges[:, 1]) & train[edges[:, 0]] & train[edges[:, 1]]
    one_hop = edges[mask]
    us, vs, prov = [one_hop[:, 0]], [one_hop[:, 1]], [np.full(one_hop.shape[0], ONE_HOP, dtype=np.int8)]
    if cfg.include_two_hop:
        for v in np.flatnonzero(train):
            cand = two_hop_candidates(g, int(v))
            cand = cand[(cand > v) & train[cand]]
            if cand.size:
                us.append(np.full(cand.shape[0], v, dtype=np.int64))
                vs.append(cand)
                prov.append(np.full(cand.shape[0], TWO_HOP, dtype=np.int8))
    u = np.concatenate(us)
    v = np.concatenate(vs)
    if cfg.num_sampled > 0:
        su, sv = _sample_pairs(np.flatnonzero(train), u, v, cfg.num_sampled, cfg.seed)
        if su.size:
            u = np.concatenate([u, su])
            v = np.concatenate([v, sv])
            prov.append(np.full(su.shape[0], SAMPLED, dtype=np.int8))
    if u.size == 0:
        raise ValueError("no eligible training pairs (need train-train edges)")
    labels = (t.labels[u] == t.labels[v]).astype(np.int64)
    return PairSet(u=u, v=v, labels=labels, provenance=np.concatenate(prov))


def _sample_pairs(train_ids: np.ndarray, used_u: np.ndarray, used_v: np.ndarray,
                  count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform unordered train-train pairs, excluding self and ``used`` pairs."""
    n_train = train_ids.size
    total = n_train * (n_train - 1) // 2
    pos = {int(i): k for k, i in enumerate(train_ids)}
    used = {(pos[int(a)], pos[int(b)]) for a, b in zip(used_u, used_v)
            if int(a) in pos and int(b) in pos}
    budget = min(count, total - len(used))
    rng = np.random.default_rng(seed + 2)
    chosen: list[tuple[int, int]] = []
    seen = set(used)
    # rejection rounds; each draws a batch so the common case needs one pass
    while len(chosen) < budget:
        draw = rng.integers(0, n_train, size=(2 * (budget - len(chosen)) + 8, 2))
        for a, b in draw:
            if a == b:
                continue
            key = (int(min(a, b)), int(max(a, b)))
            if key in seen:
                continue
            seen.add(key)
            chosen.append(key)
            if len(chosen) == budget:
                break
    if not chosen:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    idx = np.asarray(chosen, dtype=np.int64)
    return train_ids[idx[:, 0]], train_ids[idx[:, 1]]


def holdout_pairs(g: Graph, t: NodeTable, include_two_hop: bool = True) -> PairSet:
    """Labeled pairs at distance <= 2 with at least one non-train endpoint."""
    known = t.known_mask()
    train = t.split_mask("train")
    edges = g.edge_array()
    mask = (edges[:, 0] < edges[:, 1]) & known[edges[:, 0]] & known[edges[:, 1]]
    mask &= ~(train[edges[:, 0]] & train[edges[:, 1]])
    one_hop = edges[mask]
    us, vs, prov = [one_hop[:, 0]], [one_hop[:, 1]], [np.full(one_hop.shape[0], ONE_HOP, dtype=np.int8)]
    if include_two_hop:
        for v in range(g.num_nodes):
            if not known[v]:
                continue
            cand = two_hop_candidates(g, v)
            cand = cand[(cand > v) & known[cand]]
            if not train[v]:
                keep = cand
            else:
                keep = cand[~train[cand]]
            if keep.size:
                us.append(np.full(keep.shape[0], v, dtype=np.int64))
                vs.append(keep)
                prov.append(np.full(keep.shape[0], TWO_HOP, dtype=np.int8))
    u = np.concatenate(us)
    v = np.concatenate(vs)
    if u.size == 0:
        raise ValueError("no eligible held-out pairs")
    labels = (t.labels[u] == t.labels[v]).astype(np.int64)
    return PairSet(u=u, v=v, labels=labels, provenance=np.concatenate(prov))


def init_classifier(feature_dim: int, cfg: TrainConfig) -> EdgeClassifier:
    """Seeded init: every matrix is uniform on +-1/sqrt(fan_in), biases zero."""
    rng = np.random.default_rng(cfg.seed)

    def uniform(fan_in, shape):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    proj = uniform(feature_dim, (feature_dim, cfg.proj_dim))
    widths = [3 * cfg.proj_dim, *cfg.hidden_widths, 1]
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        layers.append((uniform(fan_in, (fan_in, fan_out)), np.zeros(fan_out)))
    return EdgeClassifier(proj=proj, layers=layers, threshold=cfg.threshold)


def _forward(clf: EdgeClassifier, xu: np.ndarray, xv: np.ndarray):
    eu = xu @ clf.proj
    ev = xv @ clf.proj
    diff = eu - ev
    z = np.concatenate([np.abs(diff), eu + ev, eu * ev], axis=1)
    h = z
    pre_acts = []
    hiddens = [z]
    for W, b in clf.layers[:-1]:
        s = h @ W + b
        pre_acts.append(s)
        h = np.maximum(s, 0.0)
        hiddens.append(h)
    W_out, b_out = clf.layers[-1]
    logits = (h @ W_out + b_out)[:, 0]
    cache = (eu, ev, np.sign(diff), pre_acts, hiddens)
    return logits, cache


def pair_weights(pairset: PairSet, class_weighting: str) -> np.ndarray:
    """Per-pair loss weights; 'balanced' equalizes the two class masses."""
    n = len(pairset)
    w = np.ones(n)
    if class_weighting == "balanced":
        pos = int(pairset.labels.sum())
        neg = n - pos
        if pos == 0 or neg == 0:
            raise ValueError("balanced weighting needs both pair classes present")
        w = np.where(pairset.labels == 1, n / (2.0 * pos), n / (2.0 * neg))
    return w


def loss_and_grad(clf: EdgeClassifier, features: np.ndarray, pairset: PairSet,
                  weights: np.ndarray, idx: np.ndarray | None = None):
    """Weighted BCE over the (sub)batch and its gradient in every parameter.

    Returns ``(loss, grad_proj, grad_layers)`` where ``grad_layers`` mirrors
    ``clf.layers``. The loss is the weighted mean over the selected pairs.
    """
    if idx is None:
        idx = np.arange(len(pairset))
    u = pairset.u[idx]
    v = pairset.v[idx]
    y = pairset.labels[idx].astype(np.float64)
    w = weights[idx]
    xu = features[u]
    xv = features[v]
    logits, (eu, ev, sgn, pre_acts, hiddens) = _forward(clf, xu, xv)
    batch = float(idx.shape[0])
    # bce via logits: softplus(o) - y*o
    loss = float(np.mean(w * (np.logaddexp(0.0, logits) - y * logits)))
    probs = 1.0 / (1.0 + np.exp(-logits))
    delta = (w * (probs - y) / batch)[:, None]

    grad_layers: list[tuple[np.ndarray, np.ndarray]] = [None] * len(clf.layers)
    W_out, _ = clf.layers[-1]
    grad_layers[-1] = (hiddens[-1].T @ delta, delta.sum(axis=0))
    gh = delta @ W_out.T
    for i in range(len(clf.layers) - 2, -1, -1):
        gs = gh * (pre_acts[i] > 0.0)
        grad_layers[i] = (hiddens[i].T @ gs, gs.sum(axis=0))
        gh = gs @ clf.layers[i][0].T
    p = clf.proj.shape[1]
    g_abs, g_sum, g_prod = gh[:, :p], gh[:, p:2 * p], gh[:, 2 * p:]
    g_eu = g_abs * sgn + g_sum + g_prod * ev
    g_ev = -g_abs * sgn + g_sum + g_prod * eu
    grad_proj = xu.T @ g_eu + xv.T @ g_ev
    return loss, grad_proj, grad_layers


def train(pairset: PairSet, features: np.ndarray, cfg: TrainConfig = TrainConfig()) -> EdgeClassifier:
    """Fit the classifier on a pair set over the given node features.

    Mini-batch gradient descent with optional momentum; per-epoch order is
    drawn from the seeded generator, so identical configs reproduce the
    trained parameters bit for bit. Raises on a single-class pair set and
    aborts with diagnostics if the loss goes non-finite.
    """
    if len(pairset) == 0:
        raise ValueError("empty pair set")
    if np.unique(pairset.labels).shape[0] < 2:
        raise ValueError("pair set holds a single class; cannot train a discriminator")
    features = np.asarray(features, dtype=np.float64)
    clf = init_classifier(features.shape[1], cfg)
    weights = pair_weights(pairset, cfg.class_weighting)
    rng = np.random.default_rng(cfg.seed + 1)
    n = len(pairset)
    batch = min(cfg.batch_size, n)

    vel_proj = np.zeros_like(clf.proj)
    vel_layers = [(np.zeros_like(W), np.zeros_like(b)) for W, b in clf.layers]
    history = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch):
            idx = perm[start:start + batch]
            loss, g_proj, g_layers = loss_and_grad(clf, features, pairset, weights, idx)
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch offset {start} (lr={cfg.learning_rate})")
            vel_proj = cfg.momentum * vel_proj - cfg.learning_rate * g_proj
            clf.proj = clf.proj + vel_proj
            new_layers = []
            new_vel = []
            for (W, b), (gW, gb), (vW, vb) in zip(clf.layers, g_layers, vel_layers):
                vW = cfg.momentum * vW - cfg.learning_rate * gW
                vb = cfg.momentum * vb - cfg.learning_rate * gb
                new_layers.append((W + vW, b + vb))
                new_vel.append((vW, vb))
            clf.layers = new_layers
            vel_layers = new_vel
        epoch_loss, _, _ = loss_and_grad(clf, features, pairset, weights)
        history.append(epoch_loss)
    if history:
        clf.final_loss = history[-1]
    else:
        clf.final_loss, _, _ = loss_and_grad(clf, features, pairset, weights)
    clf.loss_history = np.asarray(history)
    return clf


def score(clf: EdgeClassifier, e_u: np.ndarray, e_v: np.ndarray):
    """Probability that the pair is same-label; symmetric in its arguments."""
    e_u = np.asarray(e_u, dtype=np.float64)
    e_v = np.asarray(e_v, dtype=np.float64)
    single = e_u.ndim == 1
    xu = np.atleast_2d(e_u)
    xv = np.atleast_2d(e_v)
    logits, _ = _forward(clf, xu, xv)
    probs = 1.0 / (1.0 + np.exp(-logits))
    return float(probs[0]) if single else probs


def score_pairs(clf: EdgeClassifier, features: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return score(clf, features[np.asarray(u)], features[np.asarray(v)])


def make_scorer(clf: EdgeClassifier, features: np.ndarray):
    """Adapt a classifier to the vectorized pair-scorer callable."""
    features = np.asarray(features, dtype=np.float64)

    def scorer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.atleast_1d(score_pairs(clf, features, u, v))

    return scorer


@dataclass(frozen=True)
class ClassifierQuality:
    """Confusion-derived rates at a fixed threshold.

    ``p`` is the true positive rate, ``q`` the false positive rate, and
    ``p_pre`` the precision among predicted positives. Undefined cells are
    NaN, never silent zeros; raw counts are always present.
    """

    p: float
    q: float
    p_pre: float
    base_rate: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def quality_from_counts(tp: int, fp: int, fn: int, tn: int) -> ClassifierQuality:
    pos = tp + fn
    neg = fp + tn
    pred_pos = tp + fp
    total = pos + neg
    p = tp / pos if pos else float("nan")
    q = fp / neg if neg else float("nan")
    p_pre = tp / pred_pos if pred_pos else float("nan")
    base = pos / total if total else float("nan")
    return ClassifierQuality(p=p, q=q, p_pre=p_pre, base_rate=base, tp=tp, fp=fp, fn=fn, tn=tn)


def evaluate_quality(clf: EdgeClassifier, labeled_pairs: PairSet, features: np.ndarray,
                     threshold: float | None = None) -> ClassifierQuality:
    """Confusion rates of the classifier on labeled pairs."""
    thr = clf.threshold if threshold is None else threshold
    scores = score_pairs(clf, features, labeled_pairs.u, labeled_pairs.v)
    pred = scores >= thr
    truth = labeled_pairs.labels == 1
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    tn = int(np.count_nonzero(~pred & ~truth))
    return quality_from_counts(tp, fp, fn, tn)


def save_classifier(clf: EdgeClassifier, path) -> None:
    arrays = {"proj": clf.proj}
    for i, (W, b) in enumerate(clf.layers):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
    meta = {"num_layers": len(clf.layers), "threshold": clf.threshold, "final_loss": clf.final_loss}
    save_checkpoint(path, "edge-classifier", arrays, meta)


def load_classifier(path) -> EdgeClassifier:
    arrays, meta = load_checkpoint(path, "edge-classifier")
    layers = [(arrays[f"W{i}"], arrays[f"b{i}"]) for i in range(int(meta["num_layers"]))]
    return EdgeClassifier(proj=arrays["proj"], layers=layers,
                          threshold=float(meta["threshold"]), final_loss=float(meta["final_loss"]))
