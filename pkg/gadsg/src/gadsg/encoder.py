"""Gated multi-head graph-attention encoder over padded offloading graphs.

The graph is bipartite with fixed width: every user owns one slot per
server (flag 0 marks padding).  Each layer gates every slot by its pair
of endpoint states and the slot features, scores slots per attention
head, normalizes over the valid slots of each endpoint, aggregates
messages in both directions and updates the slot state in a closed loop
with the node states.  Virtual slots contribute exactly nothing: their
gate carries a multiplicative flag and the attention numerator is
masked before normalization.
"""

import math
from dataclasses import dataclass

import torch
import torch.nn as nn

NODE_IN_DIM = 7  # one-hot type (4) + data size, frequency, delay weight
EDGE_IN_DIM = 9  # 6 slot features + 2 offloading one-hot + 1 ratio


@dataclass
class EncoderConfig:
    n_layers: int = 10
    hidden_dim: int = 256
    num_heads: int = 4
    activation: str = "relu"
    norm: str = "layer"          # "layer" or "none"
    posenc_dim: int = None       # defaults to hidden_dim

    def __post_init__(self):
        if self.hidden_dim % self.num_heads != 0:
            raise ValueError("hidden_dim must be divisible by num_heads")
        if self.posenc_dim is None:
            self.posenc_dim = self.hidden_dim
        if self.posenc_dim % 4 != 0:
            raise ValueError("posenc_dim must be divisible by 4")

    def to_dict(self):
        return {"n_layers": self.n_layers, "hidden_dim": self.hidden_dim,
                "num_heads": self.num_heads, "activation": self.activation,
                "norm": self.norm, "posenc_dim": self.posenc_dim}


def sinusoidal_position_encoding(pos: torch.Tensor, dim: int,
                                 scale: float = 100.0) -> torch.Tensor:
    """2D sinusoidal encoding of normalized (x, y) positions."""
    half = dim // 2
    quarter = half // 2
    freqs = torch.exp(-math.log(10000.0)
                      * torch.arange(quarter, dtype=pos.dtype,
                                     device=pos.device) / quarter)
    out = []
    for axis in (0, 1):
        angles = pos[..., axis:axis + 1] * scale * freqs
        out.append(torch.sin(angles))
        out.append(torch.cos(angles))
    return torch.cat(out, dim=-1)


def timestep_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0)
                      * torch.arange(half, dtype=torch.float32,
                                     device=t.device) / half)
    angles = t.float().unsqueeze(-1) * freqs
    return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)


class AttentionLayer(nn.Module):
    """One round of gated bidirectional attention plus edge update."""

    def __init__(self, dim: int, heads: int, norm: str, eps: float = 1e-8):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.eps = eps
        self.gate_u = nn.Linear(dim, dim)       # W1
        self.gate_s = nn.Linear(dim, dim)       # W2
        self.gate_e = nn.Linear(dim, dim)       # W3
        self.shared = nn.Linear(dim, dim, bias=False)       # W
        self.attn_vec = nn.Parameter(torch.randn(heads, self.head_dim)
                                     / math.sqrt(self.head_dim))
        self.edge_gate = nn.Linear(dim, heads)  # W_g, one scalar per head
        self.out = nn.Linear(dim, dim)          # W_attn
        self.edge_u = nn.Linear(dim, dim)       # A
        self.edge_s = nn.Linear(dim, dim)       # B
        self.edge_e = nn.Linear(dim, dim)       # C
        if norm == "layer":
            self.norm_u = nn.LayerNorm(dim)
            self.norm_s = nn.LayerNorm(dim)
            self.norm_e = nn.LayerNorm(dim)
        else:
            self.norm_u = self.norm_s = self.norm_e = nn.Identity()

    def _split(self, x):
        return x.view(*x.shape[:-1], self.heads, self.head_dim)

    def gates(self, h_users, h_servers, h_edges, flags):
        """Per-slot gate vector; exactly zero on virtual slots."""
        gate = torch.sigmoid(self.gate_u(h_users.unsqueeze(2))
                             + self.gate_s(h_servers.unsqueeze(1))
                             + self.gate_e(h_edges))
        return gate * flags.unsqueeze(-1)

    def forward(self, h_users, h_servers, h_edges, flags, mean_pool=False):
        """h_users (B,U,d), h_servers (B,S,d), h_edges (B,U,S,d),
        flags (B,U,S); returns updated (h_users, h_servers, h_edges)."""
        hu = h_users.unsqueeze(2)    # (B,U,1,d)
        hs = h_servers.unsqueeze(1)  # (B,1,S,d)

        gate = self.gates(h_users, h_servers, h_edges, flags)

        pair = torch.tanh(self.shared(hu) + self.shared(hs))
        scores = (self._split(pair) * self.attn_vec).sum(-1)       # (B,U,S,H)
        head_gate = torch.sigmoid(self.edge_gate(h_edges))         # (B,U,S,H)
        logits = scores * head_gate

        msg_to_user = self._aggregate(logits, flags, gate * hs, dim=2,
                                      mean_pool=mean_pool)
        msg_to_server = self._aggregate(logits, flags, gate * hu, dim=1,
                                        mean_pool=mean_pool)

        h_users = self.norm_u(torch.relu(h_users + self.out(msg_to_user)))
        h_servers = self.norm_s(torch.relu(h_servers
                                           + self.out(msg_to_server)))
        h_edges = self.norm_e(torch.relu(
            self.edge_u(h_users.unsqueeze(2))
            + self.edge_s(h_servers.unsqueeze(1)) + self.edge_e(h_edges)))
        return h_users, h_servers, h_edges

    def attention_weights(self, logits, flags, dim):
        """Flag-masked, eps-stabilized softmax along ``dim``."""
        mask = flags.unsqueeze(-1)
        rowmax = logits.masked_fill(mask == 0, -1e30) \
            .amax(dim=dim, keepdim=True)
        # clamp keeps all-virtual rows (rowmax -1e30) from overflowing exp
        shifted = (logits - rowmax).clamp(min=-60.0, max=30.0)
        num = torch.exp(shifted) * mask
        den = num.sum(dim=dim, keepdim=True) + self.eps
        return num / den

    def _aggregate(self, logits, flags, values, dim, mean_pool):
        if mean_pool:
            mask = flags.unsqueeze(-1)
            weights = mask / (mask.sum(dim=dim, keepdim=True) + self.eps)
            return (weights * values).sum(dim=dim)
        alpha = self.attention_weights(logits, flags, dim)   # (B,U,S,H)
        v = self._split(values)                              # (B,U,S,H,hd)
        pooled = (alpha.unsqueeze(-1) * v).sum(dim=dim)
        return pooled.flatten(-2)


class GraphEncoder(nn.Module):
    """Embeds a padded graph plus a noisy solution and predicts, per
    slot, two offloading logits and one continuous-noise estimate."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.config = config
        d = config.hidden_dim
        self.node_embed = nn.Linear(NODE_IN_DIM, d)
        self.edge_embed = nn.Linear(EDGE_IN_DIM, d)
        self.pos_proj = nn.Linear(config.posenc_dim, d)
        self.time_mlp = nn.Sequential(nn.Linear(d, d), nn.ReLU(),
                                      nn.Linear(d, d))
        self.layers = nn.ModuleList(
            AttentionLayer(d, config.num_heads, config.norm)
            for _ in range(config.n_layers))
        self.head = nn.Sequential(nn.Linear(3 * d, d), nn.ReLU(),
                                  nn.Linear(d, 3))

    def forward(self, batch, x_t, y_t, t, mean_pool=False):
        """batch: GraphBatch; x_t (B,U,S) classes; y_t (B,U,S) reals;
        t (B,) integer steps.  Returns (logits (B,U,S,2), eps (B,U,S))."""
        n_servers = batch.n_servers
        d = self.config.hidden_dim
        nodes = self.node_embed(batch.node_in) + self.pos_proj(
            sinusoidal_position_encoding(batch.node_pos,
                                         self.config.posenc_dim))
        dtype = self.node_embed.weight.dtype
        t_emb = self.time_mlp(timestep_embedding(t, d).to(dtype))  # (B,d)
        nodes = nodes + t_emb.unsqueeze(1)
        h_servers = nodes[:, :n_servers]
        h_users = nodes[:, n_servers:]

        onehot = torch.stack([1.0 - x_t, x_t], dim=-1)
        edge_in = torch.cat([batch.slot_in, onehot, y_t.unsqueeze(-1)],
                            dim=-1)
        h_edges = self.edge_embed(edge_in) + t_emb.unsqueeze(1).unsqueeze(1)

        flags = batch.flags
        for layer in self.layers:
            h_users, h_servers, h_edges = layer(h_users, h_servers, h_edges,
                                                flags, mean_pool=mean_pool)
        pair = torch.cat([h_users.unsqueeze(2).expand_as(h_edges),
                          h_servers.unsqueeze(1).expand_as(h_edges),
                          h_edges], dim=-1)
        out = self.head(pair)
        return out[..., :2], out[..., 2]
