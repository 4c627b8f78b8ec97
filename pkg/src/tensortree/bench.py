"""Synthetic model generation, recovery diagnostics, and benchmark harnesses.

Models follow the protocol used throughout the experiments: observation
tables start from (rectangular) identity matrices, hidden-to-hidden tables
start from independence, and every column is perturbed by adding iid
Uniform[0, mu] noise and renormalizing.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .builder import build_tree
from .exceptions import ModelError
from .metrics import robinson_foulds
from .model import (LatentTree, TreeParameters, empirical_pairwise,
                    empirical_quartet_tensor, exact_quartet_distribution,
                    pairwise_distribution, quartet_tree, sample)
from .nj import INFINITE_SENTINEL, additive_distance, distance_matrix, neighbor_join
from .resolvers import (PAIR_KEYS, resolve_nuclear, resolve_oracle,
                        resolve_spectral_k)
from .tensors import (JointTensor4, QuartetRelation, kronecker, nuclear_norm,
                      spectral, unfold)

# ---------------------------------------------------------------------------
# CPT generation
# ---------------------------------------------------------------------------


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def identity_base(rows: int, cols: int) -> np.ndarray:
    """First ``cols`` columns of the rows x rows identity (zero-padded rows)."""
    if cols > rows:
        raise ValueError(f"identity base needs rows >= cols, got {rows} x {cols}")
    return np.eye(rows)[:, :cols].copy()


def uniform_base(rows: int, cols: int) -> np.ndarray:
    """Columns all equal to the uniform distribution (independence base)."""
    return np.full((rows, cols), 1.0 / rows)


def perturb_stochastic(base: np.ndarray, mu: float, seed) -> np.ndarray:
    """Add iid Uniform[0, mu] noise to every entry and renormalize columns."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    base = np.asarray(base, dtype=float)
    if mu == 0:
        return base.copy()
    rng = _as_rng(seed)
    noisy = base + rng.uniform(0.0, mu, size=base.shape)
    return noisy / noisy.sum(axis=0, keepdims=True)


def perturbed_cpt(rows: int, cols: int, mu: float, seed) -> np.ndarray:
    """Identity-based column-stochastic table with Uniform[0, mu] perturbation."""
    return perturb_stochastic(identity_base(rows, cols), mu, seed)


def perturbed_marginal(k: int, mu: float, seed) -> np.ndarray:
    """Uniform probability vector with Uniform[0, mu] perturbation."""
    return perturb_stochastic(uniform_base(k, 1), mu, seed)[:, 0]


# ---------------------------------------------------------------------------
# Single-edge quartet models (hidden cardinalities may differ)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuartetModel:
    """Four observed variables hanging pairwise off two adjacent hidden nodes.

    The true pairing is always {{1,2},{3,4}}: variables 1 and 2 attach to the
    first hidden node, 3 and 4 to the second.
    """

    joint_hidden: np.ndarray  # (k_h, k_g), sums to 1
    obs_cpts: tuple  # four tables: two n x k_h, two n x k_g

    @property
    def k_h(self) -> int:
        return self.joint_hidden.shape[0]

    @property
    def k_g(self) -> int:
        return self.joint_hidden.shape[1]

    @property
    def n(self) -> int:
        return self.obs_cpts[0].shape[0]

    @property
    def true_relation(self) -> QuartetRelation:
        return QuartetRelation.PAIR_12_34

    def hidden_marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.joint_hidden.sum(axis=1), self.joint_hidden.sum(axis=0)

    def exact_tensor(self) -> JointTensor4:
        p1, p2, p3, p4 = self.obs_cpts
        values = np.einsum("ah,bh,hg,cg,dg->abcd", p1, p2, self.joint_hidden, p3, p4)
        return JointTensor4(values / values.sum(), kind="exact")

    def pairwise_tables(self) -> dict:
        """All six exact pairwise tables, keyed by (i, j) with 1 <= i < j <= 4."""
        t = self.exact_tensor().values
        axes = {1: 0, 2: 1, 3: 2, 4: 3}
        out = {}
        for i, j in PAIR_KEYS:
            keep = (axes[i], axes[j])
            drop = tuple(a for a in range(4) if a not in keep)
            out[(i, j)] = t.sum(axis=drop)
        return out

    def as_tree(self) -> LatentTree:
        """Parameterized 4-leaf tree; requires equal hidden cardinalities."""
        if self.k_h != self.k_g:
            raise ModelError("tree parameterization needs equal hidden cardinalities")
        p_h, _ = self.hidden_marginals()
        cond = np.zeros((self.k_g, self.k_h))
        np.divide(self.joint_hidden.T, p_h[None, :], out=cond, where=p_h[None, :] > 0)
        tree = quartet_tree([0, 1, 2, 3], QuartetRelation.PAIR_12_34)
        h, g = tree.neighbors(0)[0], tree.neighbors(2)[0]
        params = TreeParameters(
            n=self.n, k=self.k_h, root=h, root_marginal=p_h,
            cpts={(h, 0): self.obs_cpts[0], (h, 1): self.obs_cpts[1],
                  (h, g): cond,
                  (g, 2): self.obs_cpts[2], (g, 3): self.obs_cpts[3]})
        return LatentTree({u: tree.neighbors(u) for u in tree.nodes()},
                          tree.leaf_names, params=params)


def random_quartet_model(k_h: int, k_g: int, n: int, mu: float, seed) -> QuartetModel:
    """Perturbed-identity observations over a perturbed-independent hidden edge."""
    rng = _as_rng(seed)
    p_h = perturbed_marginal(k_h, mu, rng)
    g_given_h = perturb_stochastic(uniform_base(k_g, k_h), mu, rng)
    joint = (g_given_h * p_h[None, :]).T
    obs = (perturbed_cpt(n, k_h, mu, rng), perturbed_cpt(n, k_h, mu, rng),
           perturbed_cpt(n, k_g, mu, rng), perturbed_cpt(n, k_g, mu, rng))
    return QuartetModel(joint_hidden=joint, obs_cpts=obs)


def with_dependence_scaled(model: QuartetModel, scale: float) -> QuartetModel:
    """Shrink the hidden-edge deviation from independence by ``scale`` in [0, 1]."""
    if not 0.0 <= scale <= 1.0:
        raise ValueError(f"scale must lie in [0, 1], got {scale}")
    p_h, p_g = model.hidden_marginals()
    independent = np.outer(p_h, p_g)
    joint = independent + scale * (model.joint_hidden - independent)
    return replace(model, joint_hidden=joint)


def dependence_limited_model(k_h: int, k_g: int, n: int, mu: float, seed,
                             safety: float = 0.9) -> QuartetModel:
    """A random quartet model rescaled so the hidden-edge deviation stays below
    the population-correctness threshold of the nuclear test."""
    model = random_quartet_model(k_h, k_g, n, mu, seed)
    diag = diagnostics(model)
    limit = safety * diag.theta_min / (diag.k ** 2 + diag.k)
    if diag.delta > limit > 0:
        model = with_dependence_scaled(model, limit / diag.delta)
    return model


# ---------------------------------------------------------------------------
# Tree-structured models
# ---------------------------------------------------------------------------


def random_topology(d: int, beta: float, seed) -> LatentTree:
    """Binary latent tree over d leaves grown by recursive group splitting.

    Each group of size g >= 4 splits into sizes clamp(round(beta*g), 2, g-2)
    and the rest; size-3 groups split 1/2; size-2 groups terminate.  A hidden
    node joins the two parts of every split.
    """
    if d < 4:
        raise ValueError(f"need d >= 4, got {d}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    rng = _as_rng(seed)
    adj: dict[int, list[int]] = {i: [] for i in range(d)}
    next_hidden = [d]

    def grow(group):
        if len(group) == 1:
            return group[0]
        group = list(rng.permutation(group))
        g = len(group)
        if g == 2:
            s = 1
        elif g == 3:
            s = 1
        else:
            s = int(min(max(round(beta * g), 2), g - 2))
        left = grow(group[:s])
        right = grow(group[s:])
        h = next_hidden[0]
        next_hidden[0] += 1
        adj[h] = [left, right]
        adj[left].append(h)
        adj[right].append(h)
        return h

    root = grow(list(range(d)))
    a, b = adj.pop(root)
    adj[a] = [x if x != root else b for x in adj[a]]
    adj[b] = [x if x != root else a for x in adj[b]]
    return LatentTree(adj, {i: f"X{i}" for i in range(d)})


def parameterize(tree: LatentTree, n: int, k: int, mu: float, seed,
                 hidden_base: str = "independent") -> LatentTree:
    """Attach CPTs: perturbed identity for leaf edges, perturbed hidden edges,
    rooted at the lowest-id hidden node.

    ``hidden_base`` selects the base table for hidden-to-hidden edges:
    ``"independent"`` (uniform columns; dependence scales with mu and vanishes
    at mu=0) or ``"identity"`` (strongly dependent chains, useful when samples
    must carry enough signal to recover deep trees).
    """
    if k > n:
        raise ValueError(f"need k <= n, got k={k}, n={n}")
    if hidden_base not in ("independent", "identity"):
        raise ValueError(f"unknown hidden_base {hidden_base!r}")
    rng = _as_rng(seed)
    root = min(tree.hidden)
    cpts = {}
    seen = {root}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for v in tree.neighbors(u):
            if v in seen:
                continue
            seen.add(v)
            if tree.is_leaf(v):
                cpts[(u, v)] = perturbed_cpt(n, k, mu, rng)
            elif hidden_base == "identity":
                cpts[(u, v)] = perturbed_cpt(k, k, mu, rng)
            else:
                cpts[(u, v)] = perturb_stochastic(uniform_base(k, k), mu, rng)
            queue.append(v)
    params = TreeParameters(n=n, k=k, root=root,
                            root_marginal=perturbed_marginal(k, mu, rng), cpts=cpts)
    return LatentTree({u: tree.neighbors(u) for u in tree.nodes()},
                      tree.leaf_names, params=params)


def random_tree_model(d: int, beta: float, n: int, k: int, mu: float, seed,
                      hidden_base: str = "independent") -> LatentTree:
    rng = _as_rng(seed)
    return parameterize(random_topology(d, beta, rng), n, k, mu, rng,
                        hidden_base=hidden_base)


# ---------------------------------------------------------------------------
# Recovery diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryDiagnostics:
    """Population quantities governing when the nuclear quartet test succeeds.

    ``theta_min``: smallest excess of the wrong-grouping nuclear norms over the
    correct one in the independent-hidden surrogate.  ``gamma_min``: smallest
    entry of any hidden-node marginal.  ``alpha_min``: smallest nuclear-norm
    score gap of the actual population unfoldings.  ``delta``: largest
    Frobenius deviation of a hidden-edge joint from independence.
    """

    theta_min: float
    gamma_min: float
    alpha_min: float
    delta: float
    k: int
    d: int
    margins_preserved_ok: bool  # per-edge deviations have zero row/column sums
    edge_bound_ok: bool         # delta <= theta_min / (k^2 + k)
    combined_bound_ok: bool     # delta <= min(theta_min / (k^2 + k), gamma_min)
    builder_call_constant: float = 4.0

    def quartet_success_bound(self, m: int) -> float:
        """Lower bound on the single-test success probability at m samples."""
        return 1.0 - 8.0 * math.exp(-m * self.alpha_min ** 2 / 32.0)

    def tree_success_bound(self, m: int) -> float:
        """Lower bound on whole-tree recovery probability at m samples."""
        factor = self.builder_call_constant * self.d * math.log2(self.d)
        return 1.0 - 8.0 * factor * math.exp(-m * self.alpha_min ** 2 / 32.0)


def _surrogate_gaps(p12: np.ndarray, p34: np.ndarray) -> float:
    """Excess dependence of the wrong groupings, from pairwise tables only."""
    correct = float(np.linalg.norm(kronecker(p34, p12)))
    wrong_b = nuclear_norm(kronecker(p34, p12))
    wrong_c = nuclear_norm(kronecker(p34.T, p12))
    return min(wrong_b - correct, wrong_c - correct)


def _score_gap(tensor: JointTensor4, correct: QuartetRelation) -> float:
    norms = {rel: spectral(unfold(tensor, rel)).nuclear_norm
             for rel in QuartetRelation}
    others = [norms[rel] for rel in QuartetRelation if rel != correct]
    return min(o - norms[correct] for o in others)


def diagnostics(model, max_quartets: int | None = None, seed=0) -> RecoveryDiagnostics:
    """Recovery diagnostics of a single-edge quartet model or a parameterized
    latent tree.  ``max_quartets`` subsamples the quartet set for large trees."""
    if isinstance(model, QuartetModel):
        return _diagnostics_quartet(model)
    if isinstance(model, LatentTree):
        return _diagnostics_tree(model, max_quartets, seed)
    raise TypeError(f"unsupported model type {type(model)!r}")


def _margin_flags(deltas) -> bool:
    return all(max(np.max(np.abs(dl.sum(axis=0))), np.max(np.abs(dl.sum(axis=1))))
               <= 1e-10 for dl in deltas)


def _assemble(theta_min, gamma_min, alpha_min, deltas, k, d) -> RecoveryDiagnostics:
    delta = max(float(np.linalg.norm(dl)) for dl in deltas)
    edge_ok = delta <= theta_min / (k ** 2 + k)
    return RecoveryDiagnostics(
        theta_min=float(theta_min), gamma_min=float(gamma_min),
        alpha_min=float(alpha_min), delta=delta, k=int(k), d=int(d),
        margins_preserved_ok=_margin_flags(deltas),
        edge_bound_ok=edge_ok,
        combined_bound_ok=edge_ok and delta <= gamma_min)


def _diagnostics_quartet(model: QuartetModel) -> RecoveryDiagnostics:
    p_h, p_g = model.hidden_marginals()
    delta = model.joint_hidden - np.outer(p_h, p_g)
    pairs = model.pairwise_tables()
    theta = _surrogate_gaps(pairs[(1, 2)], pairs[(3, 4)])
    alpha = _score_gap(model.exact_tensor(), model.true_relation)
    k = max(model.k_h, model.k_g)
    return _assemble(theta, min(p_h.min(), p_g.min()), alpha, [delta], k, 4)


def _diagnostics_tree(tree: LatentTree, max_quartets, seed) -> RecoveryDiagnostics:
    params = tree.params
    if params is None:
        raise ModelError("tree is not parameterized")
    deltas = []
    for u, v in tree.edges():
        if tree.is_leaf(u) or tree.is_leaf(v):
            continue
        joint = tree.edge_joint(u, v)
        deltas.append(joint - np.outer(tree.node_marginal(u), tree.node_marginal(v)))
    gamma_min = min(float(tree.node_marginal(h).min()) for h in tree.hidden)
    quartets = list(itertools.combinations(tree.leaves, 4))
    if max_quartets is not None and len(quartets) > max_quartets:
        rng = _as_rng(seed)
        idx = rng.choice(len(quartets), size=max_quartets, replace=False)
        quartets = [quartets[i] for i in sorted(idx)]
    theta_min = math.inf
    alpha_min = math.inf
    for q in quartets:
        rel = resolve_oracle(tree, q)
        (g1, g2) = rel.groups
        ordered = (q[g1[0] - 1], q[g1[1] - 1], q[g2[0] - 1], q[g2[1] - 1])
        p12 = pairwise_distribution(tree, ordered[0], ordered[1])
        p34 = pairwise_distribution(tree, ordered[2], ordered[3])
        theta_min = min(theta_min, _surrogate_gaps(p12, p34))
        tensor = exact_quartet_distribution(tree, ordered)
        alpha_min = min(alpha_min, _score_gap(tensor, QuartetRelation.PAIR_12_34))
    return _assemble(theta_min, gamma_min, alpha_min, deltas, params.k, tree.d)


# ---------------------------------------------------------------------------
# Experiment configuration and result tables
# ---------------------------------------------------------------------------


def parse_method(name: str) -> tuple[str, int | None]:
    """Parse a method name: tensor | spectral@K | nj | oracle."""
    name = name.strip()
    if name in ("tensor", "nj", "oracle"):
        return (name, None)
    if name.startswith("spectral@"):
        try:
            k = int(name.split("@", 1)[1])
        except ValueError:
            raise ValueError(f"malformed method {name!r}") from None
        if k < 1:
            raise ValueError(f"spectral rank must be >= 1, got {k}")
        return ("spectral", k)
    raise ValueError(f"unknown method {name!r}")


def _validate_methods(methods, n):
    for name in methods:
        kind, k = parse_method(name)
        if kind == "spectral" and k > n:
            raise ValueError(f"method {name!r} needs k <= n = {n}")


@dataclass(frozen=True)
class QuartetExperimentConfig:
    k_h: int
    k_g: int
    n: int
    mu: float
    sample_grid: tuple
    trials: int
    methods: tuple
    seed: int = 0

    def __post_init__(self):
        if not (2 <= self.k_h <= self.n and 2 <= self.k_g <= self.n):
            raise ValueError("hidden cardinalities must lie in 2..n")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if not self.sample_grid or any(m < 1 for m in self.sample_grid):
            raise ValueError("sample grid must be nonempty positive counts")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        _validate_methods(self.methods, self.n)


@dataclass(frozen=True)
class TreeExperimentConfig:
    d: int
    beta: float
    k_range: tuple
    n: int
    mu: float
    sample_grid: tuple
    trials: int
    methods: tuple
    seed: int = 0
    hidden_base: str = "independent"

    def __post_init__(self):
        if self.hidden_base not in ("independent", "identity"):
            raise ValueError(f"unknown hidden_base {self.hidden_base!r}")
        if self.d < 4:
            raise ValueError("d must be >= 4")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        lo, hi = self.k_range
        if not (2 <= lo <= hi <= self.n):
            raise ValueError("k range must satisfy 2 <= lo <= hi <= n")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if not self.sample_grid or any(m < 1 for m in self.sample_grid):
            raise ValueError("sample grid must be nonempty positive counts")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        _validate_methods(self.methods, self.n)


RESULT_COLUMNS = ("method", "m", "trial", "outcome", "elapsed_ms")


@dataclass
class ResultTable:
    """Per-trial benchmark outcomes with deterministic ordering."""

    rows: list = field(default_factory=list)

    def add(self, method, m, trial, outcome, elapsed_ms):
        self.rows.append((str(method), int(m), int(trial), float(outcome),
                          float(elapsed_ms)))

    def summarize(self) -> dict:
        """(method, m) -> (mean outcome, standard error, count), NaNs dropped."""
        groups: dict = {}
        for method, m, _trial, outcome, _ms in self.rows:
            groups.setdefault((method, m), []).append(outcome)
        out = {}
        for key, vals in groups.items():
            arr = np.asarray(vals, dtype=float)
            arr = arr[~np.isnan(arr)]
            se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
            out[key] = (float(arr.mean()) if len(arr) else math.nan, se, len(arr))
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(RESULT_COLUMNS) + "\n")
            for method, m, trial, outcome, ms in self.rows:
                fh.write(f"{method},{m},{trial},{outcome:.10g},{ms:.3f}\n")


# ---------------------------------------------------------------------------
# Benchmark runners
# ---------------------------------------------------------------------------


def _nj_quartet_relation(pairs, marginals) -> QuartetRelation:
    """Quartet pairing minimizing the summed within-pair additive distances."""
    def dist(i, j):
        key = (i, j) if i < j else (j, i)
        table = pairs[key] if i < j else pairs[key].T
        val = additive_distance(table, marginals[i], marginals[j])
        return INFINITE_SENTINEL if math.isinf(val) else val

    scores = [dist(1, 2) + dist(3, 4), dist(1, 3) + dist(2, 4),
              dist(1, 4) + dist(2, 3)]
    return QuartetRelation(int(np.argmin(np.round(scores, 12))) + 1)


def _tensor_pairwise(tensor: JointTensor4) -> dict:
    axes = {1: 0, 2: 1, 3: 2, 4: 3}
    out = {}
    for i, j in PAIR_KEYS:
        drop = tuple(a for a in range(4) if a not in (axes[i], axes[j]))
        out[(i, j)] = tensor.values.sum(axis=drop)
    return out


def _quartet_trial(cfg: QuartetExperimentConfig, trial: int) -> list:
    model = random_quartet_model(cfg.k_h, cfg.k_g, cfg.n, cfg.mu,
                                 np.random.default_rng([cfg.seed, 1, trial]))
    p_flat = model.exact_tensor().values.ravel()
    p_flat = p_flat / p_flat.sum()
    n = cfg.n
    rows = []
    for mi, m in enumerate(cfg.sample_grid):
        rng = np.random.default_rng([cfg.seed, 2, trial, mi])
        counts = rng.multinomial(m, p_flat).reshape(n, n, n, n)
        emp = JointTensor4(counts / m, kind="empirical")
        pairs = None
        marginals = None
        for name in cfg.methods:
            kind, k = parse_method(name)
            t0 = time.perf_counter()
            try:
                if kind == "tensor":
                    rel = resolve_nuclear(emp).relation
                elif kind == "oracle":
                    rel = model.true_relation
                else:
                    if pairs is None:
                        pairs = _tensor_pairwise(emp)
                        marginals = {1: pairs[(1, 2)].sum(axis=1),
                                     2: pairs[(1, 2)].sum(axis=0),
                                     3: pairs[(3, 4)].sum(axis=1),
                                     4: pairs[(3, 4)].sum(axis=0)}
                    if kind == "spectral":
                        rel = resolve_spectral_k(pairs, k).relation
                    else:
                        rel = _nj_quartet_relation(pairs, marginals)
                outcome = 1.0 if rel == model.true_relation else 0.0
            except Exception:
                outcome = math.nan
            elapsed = (time.perf_counter() - t0) * 1000.0
            rows.append((name, m, trial, outcome, elapsed))
    return rows


def _tree_trial(cfg: TreeExperimentConfig, trial: int) -> list:
    rng = np.random.default_rng([cfg.seed, 1, trial])
    k = int(rng.integers(cfg.k_range[0], cfg.k_range[1] + 1))
    truth = random_tree_model(cfg.d, cfg.beta, cfg.n, k, cfg.mu, rng,
                              hidden_base=cfg.hidden_base)
    leaf_ids = truth.leaves
    rows = []
    for mi, m in enumerate(cfg.sample_grid):
        samples = sample(truth, m, np.random.default_rng([cfg.seed, 2, trial, mi]))
        for name in cfg.methods:
            kind, sk = parse_method(name)
            t0 = time.perf_counter()
            try:
                learned = _build_with_method(kind, sk, truth, samples, leaf_ids,
                                             build_seed=[cfg.seed, 3, trial, mi])
                outcome = float(robinson_foulds(learned, truth))
            except Exception:
                outcome = math.nan
            elapsed = (time.perf_counter() - t0) * 1000.0
            rows.append((name, m, trial, outcome, elapsed))
    return rows


def _build_with_method(kind, spectral_k, truth, samples, leaf_ids, build_seed):
    names = dict(truth.leaf_names)
    if kind == "oracle":
        resolver = lambda a, b, c, d: resolve_oracle(truth, (a, b, c, d))
        tree, _ = build_tree(resolver, leaf_ids, seed=build_seed, names=names)
        return tree
    if kind == "tensor":
        def resolver(a, b, c, d):
            return resolve_nuclear(empirical_quartet_tensor(samples, (a, b, c, d)))
        tree, _ = build_tree(resolver, leaf_ids, seed=build_seed, names=names)
        return tree
    if kind == "spectral":
        def resolver(a, b, c, d):
            ids = (a, b, c, d)
            pairs = {(i, j): empirical_pairwise(samples, ids[i - 1], ids[j - 1])
                     for i, j in PAIR_KEYS}
            return resolve_spectral_k(pairs, spectral_k)
        tree, _ = build_tree(resolver, leaf_ids, seed=build_seed, names=names)
        return tree
    if kind == "nj":
        d = len(leaf_ids)
        tables = {(i, j): empirical_pairwise(samples, i, j)
                  for i in range(d) for j in range(i + 1, d)}
        marginals = [empirical_pairwise(samples, i, (i + 1) % d).sum(axis=1)
                     for i in range(d)]
        dist = distance_matrix(tables, marginals)
        return neighbor_join(dist, [names[i] for i in leaf_ids])
    raise ValueError(f"unknown method kind {kind!r}")


def _run(cfg, trial_fn, jobs: int) -> ResultTable:
    table = ResultTable()
    if jobs <= 1:
        chunks = [trial_fn(cfg, t) for t in range(cfg.trials)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(trial_fn, [cfg] * cfg.trials, range(cfg.trials)))
    for chunk in chunks:  # chunks arrive in trial order: deterministic merge
        for row in chunk:
            table.add(*row)
    return table


def run_quartet_experiment(cfg: QuartetExperimentConfig, jobs: int = 1) -> ResultTable:
    """Success/failure of each method at recovering the true quartet pairing."""
    return _run(cfg, _quartet_trial, jobs)


def run_tree_experiment(cfg: TreeExperimentConfig, jobs: int = 1) -> ResultTable:
    """Robinson-Foulds error of each method at recovering random latent trees."""
    return _run(cfg, _tree_trial, jobs)
