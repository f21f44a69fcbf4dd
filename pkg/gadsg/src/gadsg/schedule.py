"""Noise schedules and the two forward/reverse diffusion chains.

The discrete chain mixes the two offloading classes through symmetric
2x2 transition matrices [[1-b, b], [b, 1-b]]; cumulative products stay
in that family, so a schedule is fully described by the per-step betas,
the cumulative alpha products (continuous chain) and the cumulative
mixing probabilities (discrete chain).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import torch


@dataclass
class NoiseSchedule:
    """Betas with the derived cumulative quantities of both chains.

    ``alpha_bar[t-1]`` is the product of (1-beta) up to step t;
    ``mix_bar[t-1]`` the off-diagonal entry of the cumulative discrete
    transition matrix.  Index 0 corresponds to diffusion step t=1.
    """

    betas: np.ndarray
    alphas: np.ndarray = field(init=False)
    alpha_bar: np.ndarray = field(init=False)
    mix_bar: np.ndarray = field(init=False)

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        if ((self.betas < 0) | (self.betas >= 1)).any():
            raise ValueError("betas must lie in [0, 1)")
        self.alphas = 1.0 - self.betas
        self.alpha_bar = np.cumprod(self.alphas)
        # cumulative mixing: (1 - 2*mix_bar_t) = prod(1 - 2*beta_s)
        self.mix_bar = 0.5 * (1.0 - np.cumprod(1.0 - 2.0 * self.betas))

    @property
    def n_steps(self) -> int:
        return len(self.betas)

    @classmethod
    def linear(cls, n_steps: int = 200, beta_start: float = 1e-4,
               beta_end: float = 0.1) -> "NoiseSchedule":
        """Linear betas; the default end point is the classic 1000-step
        range rescaled to the step count so the chains actually reach
        (near-)uniform / unit-variance noise at t = T."""
        return cls(np.linspace(beta_start, beta_end, n_steps))

    def alpha_bar_at(self, t: int) -> float:
        """Cumulative alpha product; t=0 means the clean state."""
        return 1.0 if t == 0 else float(self.alpha_bar[t - 1])

    def mix_bar_at(self, t: int) -> float:
        return 0.0 if t == 0 else float(self.mix_bar[t - 1])

    def segment_mix(self, t_from: int, t_to: int) -> float:
        """Off-diagonal mixing of the transition from t_from to t_to."""
        num = 1.0 - 2.0 * self.mix_bar_at(t_to)
        den = 1.0 - 2.0 * self.mix_bar_at(t_from)
        return 0.5 * (1.0 - num / den)

    def to_dict(self):
        return {"betas": self.betas.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["betas"]))


def forward_discrete(x0_class: torch.Tensor, t: torch.Tensor,
                     schedule: NoiseSchedule,
                     generator: torch.Generator = None) -> torch.Tensor:
    """Sample the noisy class at step t given clean classes in {0, 1}.

    ``t`` broadcasts against ``x0_class`` (per-graph steps are the
    usual case); flipping happens with the cumulative mixing
    probability of step t.
    """
    mix = torch.tensor(
        np.concatenate([[0.0], schedule.mix_bar]),
        dtype=torch.float32)[t]
    while mix.dim() < x0_class.dim():
        mix = mix.unsqueeze(-1)
    flip = torch.rand(x0_class.shape, generator=generator) \
        < mix.expand(x0_class.shape)
    return torch.where(flip, 1.0 - x0_class, x0_class)


def forward_continuous(y0: torch.Tensor, t: torch.Tensor,
                       schedule: NoiseSchedule,
                       noise: torch.Tensor) -> torch.Tensor:
    """Closed-form marginal y_t = sqrt(abar)*y0 + sqrt(1-abar)*noise."""
    abar = torch.tensor(
        np.concatenate([[1.0], schedule.alpha_bar]),
        dtype=torch.float32)[t]
    while abar.dim() < y0.dim():
        abar = abar.unsqueeze(-1)
    abar = abar.expand(y0.shape)
    return torch.sqrt(abar) * y0 + torch.sqrt(1.0 - abar) * noise


def discrete_posterior(x_t: torch.Tensor, x0_probs: torch.Tensor, t: int,
                       schedule: NoiseSchedule, t_prev: int = None,
                       eps: float = 1e-12) -> torch.Tensor:
    """Distribution of the state at ``t_prev`` given x_t and a belief
    over the clean state.

    ``x_t`` holds classes in {0,1} (any shape); ``x0_probs`` adds a
    trailing class axis.  ``t_prev`` defaults to t-1; larger strides
    use the cumulative segment transition.  Rows are eps-regularized,
    so degenerate combinations still return a valid distribution.
    """
    if t_prev is None:
        t_prev = t - 1
    if not 0 <= t_prev < t:
        raise ValueError(f"need 0 <= t_prev < t, got {t_prev}, {t}")
    b_seg = schedule.segment_mix(t_prev, t)
    b_prev = schedule.mix_bar_at(t_prev)

    # per clean-class-hypothesis posterior, then mixture over the
    # belief; double precision keeps the rows valid to ~1e-16, and the
    # belief is renormalized so single-precision softmax dust cannot
    # leak into the output rows
    x_t = x_t.double()
    x0_probs = x0_probs.double()
    x0_probs = x0_probs / x0_probs.sum(dim=-1, keepdim=True).clamp(min=eps)
    classes = torch.arange(2.0, dtype=x_t.dtype, device=x_t.device)
    cand = classes.view(*([1] * x_t.dim()), 2)
    match_seg = (cand == x_t.unsqueeze(-1)).double()
    q_seg = b_seg + (1.0 - 2.0 * b_seg) * match_seg
    out = torch.zeros_like(x0_probs)
    for a in (0.0, 1.0):
        q_prev = b_prev + (1.0 - 2.0 * b_prev) * (cand == a).double()
        unnorm = q_seg * q_prev + eps
        norm = unnorm / unnorm.sum(dim=-1, keepdim=True)
        weight = x0_probs[..., int(a)].unsqueeze(-1)
        out = out + weight * norm
    return out


def sample_classes(probs: torch.Tensor,
                   generator: torch.Generator = None) -> torch.Tensor:
    """Draw {0,1} classes from per-slot probability rows."""
    u = torch.rand(probs.shape[:-1], generator=generator)
    return (u < probs[..., 1]).to(probs.dtype)
