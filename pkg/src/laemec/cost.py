"""Weighted delay/energy costs of local execution, transmission and
full-load server execution, plus the per-task deadline parameters.

Workloads are in FLOPs, data sizes in bits.  A task's weighted cost is
the literal convex combination w*T + (1-w)*E with no unit rescaling
between seconds and joules.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Task:
    """One user task.

    ``workload`` is the total compute demand in FLOPs (data size times
    cycles per bit), ``data_size`` the transmitted bits, ``deadline``
    the maximum tolerable delay in seconds and ``delay_weight`` the
    delay-vs-energy weight w in [0, 1].
    """

    workload: float
    data_size: float
    deadline: float
    delay_weight: float

    def __post_init__(self):
        if self.workload <= 0 or self.data_size <= 0 or self.deadline <= 0:
            raise ValueError("workload, data_size and deadline must be positive")
        if not 0.0 <= self.delay_weight <= 1.0:
            raise ValueError(f"delay_weight must be in [0,1], got {self.delay_weight}")


@dataclass(frozen=True)
class UserCompute:
    """User device: local frequency [FLOPs/s], chip energy factor
    [J*s^2/FLOP^3] and transmit power [W]."""

    local_freq: float
    chip_energy_factor: float
    tx_power: float

    def __post_init__(self):
        if min(self.local_freq, self.chip_energy_factor, self.tx_power) <= 0:
            raise ValueError("all user compute parameters must be positive")


@dataclass(frozen=True)
class ServerCompute:
    """Server: total frequency [FLOPs/s] and fixed active power [W]."""

    total_freq: float
    active_power: float

    def __post_init__(self):
        if self.total_freq <= 0 or self.active_power <= 0:
            raise ValueError("server parameters must be positive")


@dataclass(frozen=True)
class CostTriple:
    """Delay [s], energy [J] and their weighted combination."""

    delay: float
    energy: float
    weighted: float


def _triple(delay: float, energy: float, w: float) -> CostTriple:
    return CostTriple(delay, energy, w * delay + (1.0 - w) * energy)


def local_cost(task: Task, user: UserCompute) -> CostTriple:
    """Cost of executing the task on the user device itself."""
    delay = task.workload / user.local_freq
    energy = user.chip_energy_factor * user.local_freq ** 3 * delay
    return _triple(delay, energy, task.delay_weight)


def transmission_cost(task: Task, rate: float, user: UserCompute) -> CostTriple:
    """Cost of uploading the task data over a link of the given rate."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    delay = task.data_size / rate
    energy = user.tx_power * delay
    return _triple(delay, energy, task.delay_weight)


def execution_cost(task: Task, server: ServerCompute, w: float) -> CostTriple:
    """Cost of executing the task at the server under full allocation."""
    delay = task.workload / server.total_freq
    energy = server.active_power * delay
    return _triple(delay, energy, w)


def deadline_params(task: Task, user: UserCompute, rate: float,
                    server: ServerCompute) -> tuple[int, float]:
    """Deadline indicator and minimum allocation ratio of one link.

    Returns ``(lam, mu)`` where ``lam`` is 1 iff local execution meets
    the deadline, and ``mu`` is the smallest server allocation ratio
    for which upload plus remote execution still meets it (0 when even
    full allocation cannot).
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    lam = 1 if task.workload / user.local_freq <= task.deadline else 0
    t_tr = task.data_size / rate
    if t_tr + task.workload / server.total_freq > task.deadline:
        mu = 0.0
    else:
        mu = task.workload / ((task.deadline - t_tr) * server.total_freq)
    return lam, mu
