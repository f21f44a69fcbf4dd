"""Hybrid discrete/continuous diffusion over offloading graphs.

Training noises the label solution (classes through the categorical
chain, ratios through the Gaussian chain), feeds the noisy pair plus
the padded graph to the attention encoder and optimizes cross-entropy
on the offloading logits plus MSE on the noise estimate, both
restricted to real edges.  Sampling runs the reverse chains over a
strided timestep subsequence and projects the decoded pair onto the
constraint set.
"""

import math
from dataclasses import dataclass

import numpy as np
import torch

from .data import (FeatureStats, GraphBatch, compute_stats, make_batch,
                   slice_batch)
from .encoder import EncoderConfig, GraphEncoder
from .evaluate import solution_cost, user_local_cost
from .schedule import (NoiseSchedule, discrete_posterior, forward_continuous,
                       forward_discrete, sample_classes)

CHECKPOINT_SCHEMA_VERSION = 1


class GADSG:
    """Encoder + schedule + feature statistics, with train/sample ops.

    ``mean_pool=True`` replaces attention aggregation with mean pooling
    over valid slots (the attention-off ablation).
    """

    def __init__(self, config: EncoderConfig, schedule: NoiseSchedule,
                 stats: FeatureStats, mean_pool: bool = False):
        self.config = config
        self.schedule = schedule
        self.stats = stats
        self.mean_pool = mean_pool
        self.net = GraphEncoder(config)

    # ------------------------------------------------------------------
    # training
    # ------------------------------------------------------------------

    def train_step(self, batch: GraphBatch, optimizer,
                   generator: torch.Generator,
                   discrete_mode: str = "noised"):
        """One optimizer update; returns (total, ce, mse) floats.

        ``discrete_mode="passthrough"`` feeds the clean one-hot label
        instead of a noised sample (the training pseudocode's literal
        form); the default noises it through the categorical chain.
        """
        self.net.train()
        bsz = batch.batch_size
        t = torch.randint(1, self.schedule.n_steps + 1, (bsz,),
                          generator=generator)
        noise = torch.randn(batch.label_y.shape, generator=generator)
        y_t = forward_continuous(batch.label_y, t, self.schedule, noise)
        if discrete_mode == "noised":
            x_t = forward_discrete(batch.label_x, t, self.schedule,
                                   generator)
        elif discrete_mode == "passthrough":
            x_t = batch.label_x
        else:
            raise ValueError(f"unknown discrete_mode {discrete_mode!r}")

        logits, eps_hat = self.net(batch, x_t, y_t, t,
                                   mean_pool=self.mean_pool)
        valid = batch.flags > 0
        ce = torch.nn.functional.cross_entropy(
            logits[valid], batch.label_x[valid].long())
        mse = torch.mean((eps_hat[valid] - noise[valid]) ** 2)
        loss = ce + mse
        if not torch.isfinite(loss):
            raise RuntimeError(f"non-finite loss (ce={ce}, mse={mse})")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        return (float(loss.detach()), float(ce.detach()),
                float(mse.detach()))

    # ------------------------------------------------------------------
    # sampling
    # ------------------------------------------------------------------

    def _timesteps(self, inference_steps: int):
        T = self.schedule.n_steps
        steps = min(inference_steps, T)
        ts = np.unique(np.linspace(T, 0, steps + 1).round().astype(int))
        return list(ts[::-1])  # descending, ends at 0

    @torch.no_grad()
    def denoise(self, batch: GraphBatch, inference_steps: int,
                generator: torch.Generator):
        """Reverse both chains; returns (x0_probs (B,U,S,2), y0 (B,U,S))."""
        self.net.eval()
        shape = batch.flags.shape
        y_t = torch.randn(shape, generator=generator)
        x_t = (torch.rand(shape, generator=generator) < 0.5).float()
        ts = self._timesteps(inference_steps)
        probs = None
        for t, t_prev in zip(ts[:-1], ts[1:]):
            t_vec = torch.full((shape[0],), t, dtype=torch.long)
            logits, eps_hat = self.net(batch, x_t, y_t, t_vec,
                                       mean_pool=self.mean_pool)
            x0_probs = torch.softmax(logits, dim=-1)
            probs = discrete_posterior(x_t, x0_probs, t, self.schedule,
                                       t_prev)
            if t_prev > 0:
                x_t = sample_classes(probs, generator).float()
            abar_t = self.schedule.alpha_bar_at(t)
            abar_prev = self.schedule.alpha_bar_at(t_prev)
            alpha_seg = abar_t / abar_prev
            mean = (y_t - (1.0 - alpha_seg) / math.sqrt(1.0 - abar_t)
                    * eps_hat) / math.sqrt(alpha_seg)
            if t_prev > 0:
                mean = mean + math.sqrt(1.0 - abar_prev) \
                    * torch.randn(shape, generator=generator)
            y_t = mean
        return probs, y_t

    def sample(self, batch: GraphBatch, inference_steps: int = 5,
               generator: torch.Generator = None, best_of: int = 1):
        """Feasible solutions for every graph in the batch.

        Draws ``best_of`` independent chains and keeps, per graph, the
        cheapest projected solution.  Returns (x, y, costs) numpy arrays
        of shapes (B,U,S), (B,U,S), (B,).
        """
        if generator is None:
            generator = torch.Generator().manual_seed(0)
        bsz = batch.batch_size
        best_x = best_y = None
        best_cost = np.full(bsz, np.inf)
        flags = batch.flags.numpy()
        mu = batch.mu.numpy()
        lam = batch.lam.numpy()
        costs = batch.costs.numpy()
        for _ in range(max(1, best_of)):
            probs, y0 = self.denoise(batch, inference_steps, generator)
            cls = probs.argmax(dim=-1).numpy()
            y0 = y0.numpy().astype(np.float64)
            for b in range(bsz):
                x_sol, y_sol = project_solution(flags[b], mu[b], lam[b],
                                                costs[b], cls[b], y0[b])
                c = solution_cost(flags[b], costs[b], x_sol, y_sol)
                if c < best_cost[b]:
                    best_cost[b] = c
                    if best_x is None:
                        best_x = np.zeros((bsz,) + x_sol.shape)
                        best_y = np.zeros((bsz,) + y_sol.shape)
                    best_x[b] = x_sol
                    best_y[b] = y_sol
        return best_x, best_y, best_cost


# ----------------------------------------------------------------------
# decoding: argmax + repair + clamp/rescale projection
# ----------------------------------------------------------------------


def _marginal(costs, mu, y_hat, u, s) -> float:
    y = min(1.0, max(mu[u, s], y_hat[u, s]))
    return float(costs[u, s, 1]) + float(costs[u, s, 2]) / y


def _feasible_slots(flags, mu, u):
    return [s for s in range(flags.shape[1])
            if flags[u, s] > 0 and mu[u, s] > 0]


def _dfs_assignment(flags, mu, lam, users):
    """Exact feasibility fallback: any assignment with per-server
    minimum-ratio sums at most 1; deadline-feasible users stay local."""
    forced = []
    for u in users:
        real = np.flatnonzero(flags[u] > 0)
        if lam[u, real[0]] == 1:
            continue
        forced.append(u)
    forced.sort(key=lambda u: -min(mu[u, s]
                                   for s in _feasible_slots(flags, mu, u)))
    load = np.zeros(flags.shape[1])
    out = {}

    def dfs(i):
        if i == len(forced):
            return True
        u = forced[i]
        slots = sorted(_feasible_slots(flags, mu, u),
                       key=lambda s: mu[u, s])
        for s in slots:
            if load[s] + mu[u, s] <= 1.0 + 1e-9:
                load[s] += mu[u, s]
                out[u] = s
                if dfs(i + 1):
                    return True
                load[s] -= mu[u, s]
                del out[u]
        return False

    if not dfs(0):
        raise RuntimeError("record admits no feasible assignment")
    return out


def project_solution(flags, mu, lam, costs, cls, y_hat):
    """Project a decoded (class, ratio) pair onto the constraint set.

    Per user: keep the cheapest selected feasible slot (clearing the
    rest), fall back to the best single feasible choice when a
    deadline-forced user selected nothing usable.  Servers whose
    minimum-ratio sums overflow hand off their costliest-to-keep tasks;
    ratios are clamped to [mu, 1] and rescaled per server.
    """
    U, S = flags.shape
    chosen = {}
    for u in range(U):
        cands = [s for s in np.flatnonzero(cls[u] > 0)
                 if flags[u, s] > 0 and mu[u, s] > 0]
        if cands:
            chosen[u] = min(cands, key=lambda s: (_marginal(costs, mu,
                                                            y_hat, u, s), s))
            continue
        real = np.flatnonzero(flags[u] > 0)
        if lam[u, real[0]] == 1:
            continue  # local
        slots = _feasible_slots(flags, mu, u)
        if not slots:
            raise RuntimeError(f"user {u} has no deadline-feasible slot")
        chosen[u] = min(slots, key=lambda s: (_marginal(costs, mu, y_hat,
                                                        u, s), s))

    # capacity repair on the minimum-ratio budget
    for _ in range(U * S + 1):
        load = np.zeros(S)
        for u, s in chosen.items():
            load[s] += mu[u, s]
        over = [s for s in range(S) if load[s] > 1.0 + 1e-9]
        if not over:
            break
        s_over = max(over, key=lambda s: load[s])
        moves = []
        for u in [u for u, s in chosen.items() if s == s_over]:
            real = np.flatnonzero(flags[u] > 0)
            if lam[u, real[0]] == 1:
                moves.append((user_local_cost(flags, costs, u)
                              - _marginal(costs, mu, y_hat, u, s_over),
                              u, None))
            for s2 in _feasible_slots(flags, mu, u):
                if s2 != s_over and load[s2] + mu[u, s2] <= 1.0 + 1e-9:
                    moves.append((_marginal(costs, mu, y_hat, u, s2)
                                  - _marginal(costs, mu, y_hat, u, s_over),
                                  u, s2))
        if not moves:
            forced = _dfs_assignment(flags, mu, lam, range(U))
            chosen = dict(forced)
            break
        _, u, target = min(moves, key=lambda m: (m[0], m[1]))
        if target is None:
            del chosen[u]
        else:
            chosen[u] = target

    x = np.zeros((U, S))
    y = np.zeros((U, S))
    for u, s in chosen.items():
        x[u, s] = 1.0
        y[u, s] = min(1.0, max(mu[u, s], y_hat[u, s]))
    for s in range(S):
        sel = np.flatnonzero(x[:, s] > 0)
        if len(sel) == 0:
            continue
        sy = float(y[sel, s].sum())
        if sy > 1.0:
            smu = float(mu[sel, s].sum())
            scale = (1.0 - smu) / (sy - smu) if sy > smu else 0.0
            y[sel, s] = mu[sel, s] + (y[sel, s] - mu[sel, s]) * scale
        elif sy < 1.0:
            # the cost only falls with larger ratios and every label
            # saturates its used servers, so scale the model's
            # proportions up to the capacity (capping at 1 per task)
            for _ in range(len(sel)):
                free = np.flatnonzero((x[:, s] > 0) & (y[:, s] < 1.0))
                if len(free) == 0:
                    break
                headroom = 1.0 - y[x[:, s] > 0, s].sum()
                if headroom <= 1e-12:
                    break
                factor = 1.0 + headroom / y[free, s].sum()
                y[free, s] = np.minimum(1.0, y[free, s] * factor)
    return x, y


# ----------------------------------------------------------------------
# checkpoints
# ----------------------------------------------------------------------


def save_checkpoint(path: str, model: GADSG, meta: dict = None):
    torch.save({
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "encoder_config": model.config.to_dict(),
        "schedule": model.schedule.to_dict(),
        "stats": model.stats.to_dict(),
        "mean_pool": model.mean_pool,
        "state_dict": model.net.state_dict(),
        "meta": meta or {},
    }, path)


def load_checkpoint(path: str) -> GADSG:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise ValueError(
            f"unsupported checkpoint schema {blob.get('schema_version')!r}")
    model = GADSG(EncoderConfig(**blob["encoder_config"]),
                  NoiseSchedule.from_dict(blob["schedule"]),
                  FeatureStats.from_dict(blob["stats"]),
                  mean_pool=blob["mean_pool"])
    model.net.load_state_dict(blob["state_dict"])
    return model


# ----------------------------------------------------------------------
# training loop
# ----------------------------------------------------------------------


def train_model(records, config: EncoderConfig = None,
                schedule: NoiseSchedule = None, epochs: int = 50,
                batch_size: int = 128, lr: float = 1e-4, seed: int = 0,
                mean_pool: bool = False, discrete_mode: str = "noised",
                log_fn=None):
    """Train a fresh model on parsed records; returns (model, losses)."""
    if config is None:
        config = EncoderConfig()
    if schedule is None:
        schedule = NoiseSchedule.linear()
    stats = compute_stats(records)
    model = GADSG(config, schedule, stats, mean_pool=mean_pool)
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed + 1)
    optimizer = torch.optim.Adam(model.net.parameters(), lr=lr)
    full = make_batch(records, stats)
    order_rng = np.random.default_rng(seed + 2)
    losses = []
    n = len(records)
    for epoch in range(epochs):
        idx = order_rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, batch_size):
            sel = torch.from_numpy(idx[start:start + batch_size].copy())
            loss, ce, mse = model.train_step(slice_batch(full, sel),
                                             optimizer, generator,
                                             discrete_mode=discrete_mode)
            epoch_losses.append(loss)
        losses.append(float(np.mean(epoch_losses)))
        if log_fn:
            log_fn(epoch, losses[-1])
    return model, losses


def evaluate_records(model: GADSG, records, best_of: int = 4,
                     inference_steps: int = 5, seed: int = 0,
                     chunk: int = 512):
    """Sample every record and compare against its label cost.

    Returns (costs, references, feasible_flags, solutions) where
    solutions holds (x, y) slot arrays per record.
    """
    from .evaluate import solution_feasible

    full = make_batch(records, model.stats)
    generator = torch.Generator().manual_seed(seed)
    costs, feasible, solutions = [], [], []
    for start in range(0, len(records), chunk):
        idx = torch.arange(start, min(len(records), start + chunk))
        part = slice_batch(full, idx)
        x, y, c = model.sample(part, inference_steps=inference_steps,
                               generator=generator, best_of=best_of)
        flags = part.flags.numpy()
        mu = part.mu.numpy()
        lam = part.lam.numpy()
        for b in range(len(idx)):
            costs.append(float(c[b]))
            feasible.append(solution_feasible(flags[b], mu[b], lam[b],
                                              x[b], y[b]))
            solutions.append((x[b], y[b]))
    references = [r.label_cost for r in records]
    return costs, references, feasible, solutions
