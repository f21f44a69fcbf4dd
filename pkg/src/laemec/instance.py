"""Scenario sampling, virtual-graph construction, edge padding and
dataset-record serialization.

A scenario is one snapshot of the three-layer network: one HAP, a set of
ground servers and a set of ground/aerial users placed in a square area.
The virtual graph keeps one node per device and one edge per possible
offloading link (every user reaches the HAP; ground servers only within
their coverage radius).  Edge features are the three weighted costs plus
the deadline pair (lambda, mu).
"""

import json
import math
from dataclasses import dataclass, field, asdict
from enum import IntEnum

import numpy as np

from .channel import (ChannelParams, Position3D, link_geometry, link_gain,
                      link_kind, link_rate)
from .cost import (Task, UserCompute, ServerCompute, local_cost,
                   transmission_cost, execution_cost, deadline_params)

SCHEMA_VERSION = 1


class GenerationError(RuntimeError):
    """No feasible scenario found within the attempt budget."""


class RecordParseError(ValueError):
    """Malformed serialized record; carries the byte offset when known."""

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message)
        self.offset = offset


class RecordVersionError(ValueError):
    """Serialized record uses an unknown schema version."""


class NodeType(IntEnum):
    HAP = 0
    GS = 1
    AU = 2
    GU = 3


SERVER_TYPES = (NodeType.HAP, NodeType.GS)
USER_TYPES = (NodeType.AU, NodeType.GU)


@dataclass(frozen=True)
class Node:
    """One device with its feature vector and position.

    ``data_size``/``workload``/``delay_weight`` are zero for servers.
    """

    index: int
    node_type: NodeType
    position: Position3D
    data_size: float     # bits
    workload: float      # FLOPs
    compute_freq: float  # FLOPs/s
    delay_weight: float

    @property
    def is_server(self) -> bool:
        return self.node_type in SERVER_TYPES


@dataclass(frozen=True)
class EdgeFeature:
    j_loc: float
    j_tr: float
    j_exe: float
    lam: int
    mu: float


@dataclass(frozen=True)
class Edge:
    user: int
    server: int
    feature: EdgeFeature


@dataclass(frozen=True)
class SystemParams:
    """All tunables of scenario generation and cost evaluation."""

    channel: ChannelParams = field(default_factory=ChannelParams)
    gu_tx_power: float = 0.2        # [W]
    au_tx_power: float = 0.15       # [W]
    gs_freq: float = 1.2e10         # [FLOPs/s]
    hap_freq: float = 0.5e10        # [FLOPs/s]
    gs_active_power: float = 120.0  # [W]
    hap_active_power: float = 30.0  # [W]
    chip_energy_factor: float = 1.2e10
    deadline: float = 2.0           # [s]
    cycles_per_bit: float = 1000.0  # FLOPs per transmitted bit
    workload_mean: float = 4.5e9
    workload_sigma: float = 2.5e9
    workload_bounds: tuple = (1.2e9, 7e9)
    user_freq_mean: float = 3e6
    user_freq_sigma: float = 1.1e7
    user_freq_bounds: tuple = (2e6, 6.5e6)
    delay_weight_bounds: tuple = (0.3, 0.7)
    area_size: float = 1000.0        # side of the ground square [m]
    gs_coverage_radius: float = 500.0  # [m]
    au_altitude: float = 200.0       # [m]
    hap_altitude: float = 20000.0    # [m]
    feasibility_attempts: int = 100

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("workload_bounds", "user_freq_bounds",
                    "delay_weight_bounds"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        d = dict(d)
        d["channel"] = ChannelParams(**d["channel"])
        for key in ("workload_bounds", "user_freq_bounds",
                    "delay_weight_bounds"):
            d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class Scenario:
    """Sampled geometry and tasks, before edge features are computed."""

    nodes: tuple
    candidate_pairs: tuple  # (user_index, server_index) pairs
    n_gs: int
    n_gu: int
    n_au: int
    params: SystemParams
    seed: int


class ProblemInstance:
    """The virtual graph: typed nodes, user->server edges and features.

    Node order is HAP, then ground servers, then ground users, then
    aerial users; edges are sorted by (user, server).
    """

    def __init__(self, nodes, edges, n_gs, n_gu, n_au, params=None, seed=0):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.n_gs = n_gs
        self.n_gu = n_gu
        self.n_au = n_au
        self.params = params
        self.seed = seed
        self._validate()
        self.user_edges = {u: [] for u in self.users}
        self.server_edges = {s: [] for s in self.servers}
        for k, e in enumerate(self.edges):
            self.user_edges[e.user].append(k)
            self.server_edges[e.server].append(k)

    @property
    def n_servers(self) -> int:
        return self.n_gs + 1

    @property
    def n_users(self) -> int:
        return self.n_gu + self.n_au

    @property
    def servers(self) -> range:
        return range(self.n_servers)

    @property
    def users(self) -> range:
        return range(self.n_servers, self.n_servers + self.n_users)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def scale_tag(self) -> str:
        return format_scale_tag((self.n_gs, self.n_gu, self.n_au))

    def _validate(self):
        if len(self.nodes) != self.n_servers + self.n_users:
            raise ValueError("node count does not match the declared scale")
        seen = set()
        edge_users = set()
        for e in self.edges:
            if e.user not in self.users or e.server not in self.servers:
                raise ValueError(f"edge ({e.user},{e.server}) does not join a "
                                 "user to a server")
            if (e.user, e.server) in seen:
                raise ValueError(f"duplicate edge ({e.user},{e.server})")
            seen.add((e.user, e.server))
            edge_users.add(e.user)
        if edge_users != set(self.users):
            raise ValueError("every user must have at least one edge")

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges
                and (self.n_gs, self.n_gu, self.n_au)
                == (other.n_gs, other.n_gu, other.n_au)
                and self.params == other.params and self.seed == other.seed)


@dataclass
class PaddedGraph:
    """Fixed-width per-user edge slots for model input.

    ``features`` has shape (n_users, n_servers, 6) with columns
    [flag, j_loc, j_tr, j_exe, lam, mu]; virtual slots carry flag 0,
    the penalty costs and zeros for (lam, mu).  ``edge_index`` maps a
    slot back to the instance edge index, -1 for virtual slots.
    """

    features: np.ndarray
    edge_index: np.ndarray
    penalty: tuple

    def __eq__(self, other):
        if not isinstance(other, PaddedGraph):
            return NotImplemented
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.edge_index, other.edge_index)
                and self.penalty == other.penalty)


def parse_scale_tag(tag: str) -> tuple:
    """'gs2_gu4_au2' -> (2, 4, 2)."""
    parts = tag.split("_")
    if (len(parts) != 3 or not parts[0].startswith("gs")
            or not parts[1].startswith("gu") or not parts[2].startswith("au")):
        raise ValueError(f"malformed scale tag {tag!r}")
    try:
        return (int(parts[0][2:]), int(parts[1][2:]), int(parts[2][2:]))
    except ValueError as exc:
        raise ValueError(f"malformed scale tag {tag!r}") from exc


def format_scale_tag(scale) -> str:
    return f"gs{scale[0]}_gu{scale[1]}_au{scale[2]}"


def record_seed(master_seed: int, index: int) -> int:
    """Per-record seed, a stable hash of (master_seed, index)."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# scenario sampling
# ---------------------------------------------------------------------------


def _truncated_normal(rng, mean, sigma, bounds):
    low, high = bounds
    while True:
        x = rng.normal(mean, sigma)
        if low <= x <= high:
            return x


def _draw_scenario(scale, params: SystemParams, rng, seed: int) -> Scenario:
    n_gs, n_gu, n_au = scale
    area = params.area_size
    nodes = []
    nodes.append(Node(0, NodeType.HAP,
                      Position3D(area / 2, area / 2, params.hap_altitude),
                      0.0, 0.0, params.hap_freq, 0.0))
    for i in range(n_gs):
        x, y = rng.uniform(0, area), rng.uniform(0, area)
        nodes.append(Node(1 + i, NodeType.GS, Position3D(x, y, 0.0),
                          0.0, 0.0, params.gs_freq, 0.0))
    user_types = [NodeType.GU] * n_gu + [NodeType.AU] * n_au
    for offset, ntype in enumerate(user_types):
        x, y = rng.uniform(0, area), rng.uniform(0, area)
        z = params.au_altitude if ntype is NodeType.AU else 0.0
        workload = _truncated_normal(rng, params.workload_mean,
                                     params.workload_sigma,
                                     params.workload_bounds)
        freq = _truncated_normal(rng, params.user_freq_mean,
                                 params.user_freq_sigma,
                                 params.user_freq_bounds)
        w = rng.uniform(*params.delay_weight_bounds)
        nodes.append(Node(1 + n_gs + offset, ntype, Position3D(x, y, z),
                          workload / params.cycles_per_bit, workload,
                          freq, w))
    pairs = []
    for user in nodes[1 + n_gs:]:
        pairs.append((user.index, 0))  # HAP covers the whole area
        for server in nodes[1:1 + n_gs]:
            d, _ = link_geometry(user.position, server.position)
            if d <= params.gs_coverage_radius:
                pairs.append((user.index, server.index))
    pairs.sort()
    return Scenario(tuple(nodes), tuple(pairs), n_gs, n_gu, n_au, params, seed)


def build_virtual_graph(scenario: Scenario) -> ProblemInstance:
    """Compute all edge features of a sampled scenario."""
    params = scenario.params
    edges = []
    for user_idx, server_idx in scenario.candidate_pairs:
        user = scenario.nodes[user_idx]
        server = scenario.nodes[server_idx]
        task = Task(user.workload, user.data_size, params.deadline,
                    user.delay_weight)
        dev = UserCompute(user.compute_freq, params.chip_energy_factor,
                          params.au_tx_power if user.node_type is NodeType.AU
                          else params.gu_tx_power)
        srv = ServerCompute(server.compute_freq,
                            params.hap_active_power
                            if server.node_type is NodeType.HAP
                            else params.gs_active_power)
        distance, elevation = link_geometry(user.position, server.position)
        kind = link_kind(user.node_type is NodeType.AU,
                         server.node_type is NodeType.HAP)
        gain = link_gain(kind, distance, elevation, params.channel)
        rate = link_rate(params.channel, dev.tx_power, gain)
        lam, mu = deadline_params(task, dev, rate, srv)
        feat = EdgeFeature(local_cost(task, dev).weighted,
                           transmission_cost(task, rate, dev).weighted,
                           execution_cost(task, srv, task.delay_weight).weighted,
                           lam, mu)
        edges.append(Edge(user_idx, server_idx, feat))
    return ProblemInstance(scenario.nodes, edges, scenario.n_gs,
                           scenario.n_gu, scenario.n_au, params,
                           scenario.seed)


def has_feasible_assignment(instance: ProblemInstance,
                            node_budget: int = 100_000) -> bool:
    """Whether some full assignment satisfies C3-C5.

    Users whose local execution meets the deadline can always stay
    local, so only deadline-forced users constrain feasibility; for
    those an exact search over server choices is run (capacity mu-sums
    at most 1 per server).  Search effort is capped by ``node_budget``;
    hitting the cap counts as infeasible.
    """
    forced = []
    for u in instance.users:
        ks = instance.user_edges[u]
        if instance.edges[ks[0]].feature.lam == 1:
            continue
        options = [(instance.edges[k].feature.mu, instance.edges[k].server)
                   for k in ks if instance.edges[k].feature.mu > 0]
        if not options:
            return False
        forced.append(sorted(options))
    # largest minimum demand first makes pruning effective
    forced.sort(key=lambda opts: -opts[0][0])
    load = {s: 0.0 for s in instance.servers}
    budget = [node_budget]

    def dfs(i: int) -> bool:
        if i == len(forced):
            return True
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        for mu, s in forced[i]:
            if load[s] + mu <= 1.0 + 1e-12:
                load[s] += mu
                if dfs(i + 1):
                    return True
                load[s] -= mu
        return False

    return dfs(0)


def sample_scenario(scale, params: SystemParams = None,
                    seed: int = 0) -> ProblemInstance:
    """Sample one feasible problem instance.

    ``scale`` is (ground servers, ground users, aerial users), all at
    least 1; one HAP is always present.  The instance is resampled from
    the same stream until a feasible full assignment exists, so the
    result is a pure function of (scale, params, seed).
    """
    if params is None:
        params = SystemParams()
    n_gs, n_gu, n_au = scale
    if min(n_gs, n_gu, n_au) < 1:
        raise ValueError(f"scale components must be >= 1, got {scale}")
    rng = np.random.default_rng(seed)
    for _ in range(params.feasibility_attempts):
        scenario = _draw_scenario(scale, params, rng, seed)
        inst = build_virtual_graph(scenario)
        if has_feasible_assignment(inst):
            return inst
    raise GenerationError(
        f"no feasible instance for scale {format_scale_tag(scale)} "
        f"(seed {seed}) within {params.feasibility_attempts} attempts; "
        "consider enlarging gs_coverage_radius or relaxing the deadline")


# ---------------------------------------------------------------------------
# edge padding
# ---------------------------------------------------------------------------


def pad_edges(instance: ProblemInstance, penalty=None) -> PaddedGraph:
    """Pad every user to a fixed width of one slot per server.

    Real edges land at their server's slot; missing connections become
    virtual slots with flag 0, penalty costs and zero (lam, mu).  When
    ``penalty`` is not given the instance's own cost maxima are used;
    dataset pipelines pass the frozen dataset-wide maxima instead.
    """
    if penalty is None:
        penalty = (max(e.feature.j_loc for e in instance.edges),
                   max(e.feature.j_tr for e in instance.edges),
                   max(e.feature.j_exe for e in instance.edges))
    n_u, n_s = instance.n_users, instance.n_servers
    features = np.zeros((n_u, n_s, 6))
    features[:, :, 1:4] = penalty
    edge_index = np.full((n_u, n_s), -1, dtype=np.int64)
    for k, e in enumerate(instance.edges):
        row = e.user - instance.n_servers
        f = e.feature
        features[row, e.server] = (1.0, f.j_loc, f.j_tr, f.j_exe,
                                   float(f.lam), f.mu)
        edge_index[row, e.server] = k
    return PaddedGraph(features, edge_index, tuple(float(p) for p in penalty))


# ---------------------------------------------------------------------------
# record serialization
# ---------------------------------------------------------------------------


@dataclass
class DatasetRecord:
    """One (instance, label) pair plus generation provenance."""

    scale_tag: str
    index: int
    master_seed: int
    seed: int
    instance: ProblemInstance
    label_x: tuple
    label_y: tuple
    label_cost: float
    labeler: str
    padded: PaddedGraph = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if len(self.label_x) != self.instance.n_edges \
                or len(self.label_y) != self.instance.n_edges:
            raise ValueError("label length does not match the edge count")


def _node_to_dict(n: Node) -> dict:
    return {"i": n.index, "type": int(n.node_type), "x": n.position.x,
            "y": n.position.y, "z": n.position.z, "data_size": n.data_size,
            "workload": n.workload, "freq": n.compute_freq,
            "w": n.delay_weight}


def _node_from_dict(d: dict) -> Node:
    return Node(d["i"], NodeType(d["type"]),
                Position3D(d["x"], d["y"], d["z"]), d["data_size"],
                d["workload"], d["freq"], d["w"])


def serialize_record(record: DatasetRecord) -> bytes:
    """One UTF-8 JSON line (without trailing newline)."""
    inst = record.instance
    doc = {
        "schema_version": record.schema_version,
        "scale_tag": record.scale_tag,
        "index": record.index,
        "master_seed": record.master_seed,
        "seed": record.seed,
        "nodes": [_node_to_dict(n) for n in inst.nodes],
        "edges": [{"u": e.user, "s": e.server, "j_loc": e.feature.j_loc,
                   "j_tr": e.feature.j_tr, "j_exe": e.feature.j_exe,
                   "lam": e.feature.lam, "mu": e.feature.mu}
                  for e in inst.edges],
        "params": None if inst.params is None else inst.params.to_dict(),
        "label_x": list(record.label_x),
        "label_y": list(record.label_y),
        "label_cost": record.label_cost,
        "labeler": record.labeler,
    }
    if record.padded is not None:
        doc["padded"] = {"penalty": list(record.padded.penalty),
                         "features": record.padded.features.tolist(),
                         "edge_index": record.padded.edge_index.tolist()}
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def deserialize_record(data: bytes) -> DatasetRecord:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        offset = getattr(exc, "pos", -1)
        raise RecordParseError(f"malformed record: {exc}", offset) from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise RecordParseError("record is not a schema-tagged object")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise RecordVersionError(
            f"unsupported schema version {doc['schema_version']!r}, "
            f"expected {SCHEMA_VERSION}")
    try:
        nodes = [_node_from_dict(d) for d in doc["nodes"]]
        edges = [Edge(d["u"], d["s"],
                      EdgeFeature(d["j_loc"], d["j_tr"], d["j_exe"],
                                  d["lam"], d["mu"]))
                 for d in doc["edges"]]
        n_gs, n_gu, n_au = parse_scale_tag(doc["scale_tag"])
        params = (None if doc.get("params") is None
                  else SystemParams.from_dict(doc["params"]))
        inst = ProblemInstance(nodes, edges, n_gs, n_gu, n_au, params,
                               doc["seed"])
        padded = None
        if "padded" in doc:
            padded = PaddedGraph(np.asarray(doc["padded"]["features"]),
                                 np.asarray(doc["padded"]["edge_index"],
                                            dtype=np.int64),
                                 tuple(doc["padded"]["penalty"]))
        return DatasetRecord(doc["scale_tag"], doc["index"],
                             doc["master_seed"], doc["seed"], inst,
                             tuple(doc["label_x"]), tuple(doc["label_y"]),
                             doc["label_cost"], doc["labeler"], padded)
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordParseError(f"invalid record contents: {exc}") from exc
