"""Reader for the offloading benchmark dataset files.

A dataset is a line-delimited file of JSON records (see the generator
package's README): nodes with `[type, data_size, workload, freq, w]`
features and positions, edges `(u, s)` with the five-feature vector
`[j_loc, j_tr, j_exe, lam, mu]`, an optional padded slot tensor, the
label solution and its cost.  This module turns records into per-slot
arrays of fixed width (one slot per server per user) and batches of
equally-shaped graphs.
"""

import json
from dataclasses import dataclass

import numpy as np
import torch

SLOT_DIM = 6          # [flag, j_loc, j_tr, j_exe, lam, mu]
NODE_RAW_DIM = 4      # [type, data_size, freq, w]


class DatasetFormatError(ValueError):
    pass


@dataclass
class GraphRecord:
    """One instance as fixed-width arrays.

    Slot arrays have shape (n_users, n_servers); users appear in node
    order after the servers (HAP first, then ground servers).
    """

    index: int
    n_servers: int
    n_users: int
    node_raw: np.ndarray      # (N, 4) [type, data_size, freq, w]
    node_pos: np.ndarray      # (N, 2) normalized to [0, 1]
    slot_feat: np.ndarray     # (U, S, 6)
    slot_edge: np.ndarray     # (U, S) original edge index, -1 virtual
    label_x: np.ndarray       # (U, S) {0,1}
    label_y: np.ndarray       # (U, S)
    label_cost: float

    @property
    def flags(self) -> np.ndarray:
        return self.slot_feat[:, :, 0]


def _slots_from_edges(doc, n_servers, n_users, penalty):
    feat = np.zeros((n_users, n_servers, SLOT_DIM))
    feat[:, :, 1:4] = penalty
    edge_index = np.full((n_users, n_servers), -1, dtype=np.int64)
    for k, e in enumerate(doc["edges"]):
        row = e["u"] - n_servers
        feat[row, e["s"]] = (1.0, e["j_loc"], e["j_tr"], e["j_exe"],
                             float(e["lam"]), e["mu"])
        edge_index[row, e["s"]] = k
    return feat, edge_index


def parse_record(line: bytes, area_hint: float = 1000.0) -> GraphRecord:
    doc = json.loads(line)
    if "schema_version" not in doc or "edges" not in doc:
        raise DatasetFormatError("not a dataset record")
    nodes = doc["nodes"]
    n_servers = sum(1 for n in nodes if n["type"] in (0, 1))
    n_users = len(nodes) - n_servers
    node_raw = np.array([[n["type"], n["data_size"], n["freq"], n["w"]]
                         for n in nodes])
    area = area_hint
    if doc.get("params"):
        area = float(doc["params"].get("area_size", area_hint))
    node_pos = np.array([[n["x"] / area, n["y"] / area] for n in nodes])

    if "padded" in doc:
        pad = doc["padded"]
        slot_feat = np.asarray(pad["features"], dtype=float)
        slot_edge = np.asarray(pad["edge_index"], dtype=np.int64)
    else:
        penalty = (max(e["j_loc"] for e in doc["edges"]),
                   max(e["j_tr"] for e in doc["edges"]),
                   max(e["j_exe"] for e in doc["edges"]))
        slot_feat, slot_edge = _slots_from_edges(doc, n_servers, n_users,
                                                 penalty)

    label_x = np.zeros((n_users, n_servers))
    label_y = np.zeros((n_users, n_servers))
    for row in range(n_users):
        for s in range(n_servers):
            k = slot_edge[row, s]
            if k >= 0:
                label_x[row, s] = doc["label_x"][k]
                label_y[row, s] = doc["label_y"][k]
    return GraphRecord(doc.get("index", -1), n_servers, n_users, node_raw,
                       node_pos, slot_feat, slot_edge, label_x, label_y,
                       float(doc["label_cost"]))


def load_dataset(path: str) -> list:
    records = []
    with open(path, "rb") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(parse_record(line))
    if not records:
        raise DatasetFormatError(f"no records in {path}")
    shapes = {(r.n_users, r.n_servers) for r in records}
    if len(shapes) != 1:
        raise DatasetFormatError(
            f"mixed graph shapes {sorted(shapes)} in one dataset")
    return records


@dataclass
class FeatureStats:
    """Standardization statistics frozen at training time.

    The three cost columns of the slot features and the data-size /
    frequency node columns span many orders of magnitude and get a
    log1p before standardization.
    """

    slot_mean: np.ndarray
    slot_std: np.ndarray
    node_mean: np.ndarray
    node_std: np.ndarray

    def to_dict(self):
        return {k: getattr(self, k).tolist()
                for k in ("slot_mean", "slot_std", "node_mean", "node_std")}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: np.asarray(v) for k, v in d.items()})


def _slot_transform(slot_feat):
    out = slot_feat.copy()
    out[..., 1:4] = np.log1p(out[..., 1:4])
    return out


def _node_transform(node_raw):
    out = node_raw.copy()
    out[..., 1] = np.log1p(out[..., 1])
    out[..., 2] = np.log1p(out[..., 2])
    return out


def compute_stats(records) -> FeatureStats:
    slots = np.concatenate([_slot_transform(r.slot_feat).reshape(-1, SLOT_DIM)
                            for r in records])
    nodes = np.concatenate([_node_transform(r.node_raw) for r in records])
    return FeatureStats(slots.mean(axis=0),
                        np.maximum(slots.std(axis=0), 1e-6),
                        nodes.mean(axis=0),
                        np.maximum(nodes.std(axis=0), 1e-6))


@dataclass
class GraphBatch:
    """Stacked tensors for equally-shaped graphs.

    ``costs`` keeps the raw (unnormalized) [j_loc, j_tr, j_exe] columns
    for decoding and objective evaluation; ``slot_in`` is the
    standardized model input.
    """

    node_in: torch.Tensor    # (B, N, 7) one-hot type + normalized features
    node_pos: torch.Tensor   # (B, N, 2)
    slot_in: torch.Tensor    # (B, U, S, 6) normalized slot features
    flags: torch.Tensor      # (B, U, S)
    mu: torch.Tensor         # (B, U, S) raw minimum ratios
    lam: torch.Tensor        # (B, U, S) raw local-feasibility flags
    costs: torch.Tensor      # (B, U, S, 3) raw cost features
    label_x: torch.Tensor    # (B, U, S)
    label_y: torch.Tensor    # (B, U, S)

    @property
    def batch_size(self) -> int:
        return self.node_in.shape[0]

    @property
    def n_servers(self) -> int:
        return self.slot_in.shape[2]


def make_batch(records, stats: FeatureStats) -> GraphBatch:
    node_in = []
    for r in records:
        raw = (_node_transform(r.node_raw) - stats.node_mean) \
            / stats.node_std
        onehot = np.eye(4)[r.node_raw[:, 0].astype(int)]
        node_in.append(np.concatenate([onehot, raw[:, 1:]], axis=1))
    slot_in = [(_slot_transform(r.slot_feat) - stats.slot_mean)
               / stats.slot_std for r in records]
    t = lambda arrays: torch.tensor(np.stack(arrays), dtype=torch.float32)
    t64 = lambda arrays: torch.tensor(np.stack(arrays), dtype=torch.float64)
    # mu/lam/costs feed decoding and feasibility checks, never the net,
    # and stay in double so clamping at mu is bit-exact
    return GraphBatch(
        node_in=t(node_in),
        node_pos=t([r.node_pos for r in records]),
        slot_in=t(slot_in),
        flags=t([r.flags for r in records]),
        mu=t64([r.slot_feat[:, :, 5] for r in records]),
        lam=t64([r.slot_feat[:, :, 4] for r in records]),
        costs=t64([r.slot_feat[:, :, 1:4] for r in records]),
        label_x=t([r.label_x for r in records]),
        label_y=t([r.label_y for r in records]),
    )


def slice_batch(batch: GraphBatch, idx) -> GraphBatch:
    """Minibatch view over precomputed full-dataset tensors."""
    return GraphBatch(**{name: getattr(batch, name)[idx]
                         for name in ("node_in", "node_pos", "slot_in",
                                      "flags", "mu", "lam", "costs",
                                      "label_x", "label_y")})
