"""GraphSAGE, GCN and MLP node classifiers over a shared layer stack."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import layers as L

KINDS = ("GS", "GCN", "MLP")

_PRESETS = {
    "gs3": ("GS", (32, 64, 128), (32,)),
    "gs4": ("GS", (32, 64, 128, 256), (128, 32)),
    "gs5": ("GS", (32, 64, 128, 256, 512), (256, 128, 32)),
    "gcn": ("GCN", (32, 64, 128), (32,)),
    "mlp": ("MLP", (), (32, 64, 128, 32)),
}


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    conv_widths: tuple[int, ...]
    linear_widths: tuple[int, ...]  # hidden widths; a final layer maps to num_classes
    in_dim: int
    num_classes: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "MLP" and self.conv_widths:
            raise ValueError("an MLP has no convolution layers")
        if self.in_dim <= 0 or self.num_classes < 2:
            raise ValueError("in_dim must be positive and num_classes at least 2")
        object.__setattr__(self, "conv_widths", tuple(int(w) for w in self.conv_widths))
        object.__setattr__(self, "linear_widths", tuple(int(w) for w in self.linear_widths))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_widths"] = list(self.conv_widths)
        d["linear_widths"] = list(self.linear_widths)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(d["kind"], tuple(d["conv_widths"]), tuple(d["linear_widths"]),
                   int(d["in_dim"]), int(d["num_classes"]))

    def layer_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        prev = self.in_dim
        for i, w in enumerate(self.conv_widths):
            if self.kind == "GS":
                shapes[f"conv{i}.W_self"] = (prev, w)
                shapes[f"conv{i}.W_neigh"] = (prev, w)
            else:
                shapes[f"conv{i}.W"] = (prev, w)
            shapes[f"conv{i}.b"] = (w,)
            prev = w
        widths = list(self.linear_widths) + [self.num_classes]
        for i, w in enumerate(widths):
            shapes[f"lin{i}.W"] = (prev, w)
            shapes[f"lin{i}.b"] = (w,)
            prev = w
        return shapes


def preset(name: str, in_dim: int, num_classes: int) -> ModelConfig:
    try:
        kind, conv, lin = _PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}") from None
    return ModelConfig(kind, conv, lin, in_dim, num_classes)


def preset_names() -> list[str]:
    return list(_PRESETS)


def init_params(cfg: ModelConfig, seed: int = 0) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases, drawn in layer order from one generator."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in cfg.layer_shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-limit, limit, size=shape)
    return params


@dataclass
class GraphBatch:
    """Node features plus the graph operators one forward pass needs."""

    x: np.ndarray
    edges: np.ndarray
    labels: np.ndarray | None = None
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.x)

    def op(self, kind: str):
        if kind not in self._ops:
            build = L.mean_operator if kind == "GS" else L.gcn_operator
            self._ops[kind] = build(self.num_nodes, self.edges)
        return self._ops[kind]


def disjoint_union(graphs) -> GraphBatch:
    """Stack graphs into one block-diagonal graph (edge indices offset)."""
    xs, es, ys = [], [], []
    offset = 0
    for g in graphs:
        xs.append(np.asarray(g.features, dtype=np.float64))
        e = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
        es.append(e + offset)
        if getattr(g, "labels", None) is not None:
            ys.append(np.asarray(g.labels, dtype=np.int64))
        offset += len(xs[-1])
    labels = np.concatenate(ys) if ys and len(ys) == len(xs) else None
    return GraphBatch(np.vstack(xs), np.vstack(es) if es else np.zeros((0, 2), np.int64), labels)


def as_batch(g) -> GraphBatch:
    return g if isinstance(g, GraphBatch) else disjoint_union([g])


@dataclass
class Model:
    config: ModelConfig
    params: dict[str, np.ndarray]
    # fixed input standardisation, fitted on training nodes; identity by default
    input_shift: np.ndarray | None = None
    input_scale: np.ndarray | None = None

    def __post_init__(self):
        d = self.config.in_dim
        if self.input_shift is None:
            self.input_shift = np.zeros(d)
        if self.input_scale is None:
            self.input_scale = np.ones(d)
        shapes = self.config.layer_shapes()
        if set(shapes) != set(self.params):
            raise ValueError("parameter names do not match the model configuration")
        for k, s in shapes.items():
            if tuple(self.params[k].shape) != s:
                raise ValueError(f"parameter {k} has shape {self.params[k].shape}, expected {s}")

    @classmethod
    def create(cls, cfg: ModelConfig, seed: int = 0) -> "Model":
        return cls(cfg, init_params(cfg, seed))

    def prepare(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.config.in_dim:
            raise ValueError(f"feature dimension {x.shape[-1]} does not match model input {self.config.in_dim}")
        return (x - self.input_shift) / self.input_scale

    def forward(self, batch, params=None):
        """Logits for every node, plus the caches ``backward`` needs."""
        p = self.params if params is None else params
        cfg = self.config
        batch = as_batch(batch)
        h = self.prepare(batch.x)
        caches = []
        for i in range(len(cfg.conv_widths)):
            if cfg.kind == "GS":
                h, c = L.sage_forward(h, batch.op("GS"), p[f"conv{i}.W_self"], p[f"conv{i}.W_neigh"],
                                      p[f"conv{i}.b"])
            else:
                h, c = L.gcn_forward(h, batch.op("GCN"), p[f"conv{i}.W"], p[f"conv{i}.b"])
            caches.append((f"conv{i}", c))
        n_lin = len(cfg.linear_widths) + 1
        for i in range(n_lin):
            h, c = L.linear_forward(h, p[f"lin{i}.W"], p[f"lin{i}.b"], act=i < n_lin - 1)
            caches.append((f"lin{i}", c))
        return h, caches

    def backward(self, caches, dlogits) -> dict[str, np.ndarray]:
        if not caches:
            raise ValueError("missing forward cache")
        grads = {}
        d = dlogits
        for name, c in reversed(caches):
            if name.startswith("lin"):
                d, g = L.linear_backward(d, c)
            elif self.config.kind == "GS":
                d, g = L.sage_backward(d, c)
            else:
                d, g = L.gcn_backward(d, c)
            for k, v in g.items():
                grads[f"{name}.{k}"] = v
        return grads

    def loss_and_grads(self, batch, params=None):
        batch = as_batch(batch)
        if batch.labels is None:
            raise ValueError("batch has no labels")
        logits, caches = self.forward(batch, params)
        loss, dlogits = L.softmax_cross_entropy(logits, batch.labels)
        return loss, self.backward(caches, dlogits)

    def predict(self, g) -> np.ndarray:
        """Arg-max class per node (``np.argmax`` takes the first, i.e. lowest, of tied maxima)."""
        logits, _ = self.forward(g)
        return np.argmax(logits, axis=1)

    def predict_proba(self, g) -> np.ndarray:
        return L.softmax(self.forward(g)[0])
