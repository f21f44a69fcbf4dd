"""Shared fixtures built on the synthetic-instance helpers."""

import pytest

from synth_instances import build_instance, feat


@pytest.fixture
def two_server_instance():
    """Four users, HAP + 2 ground servers, mixed feasibility."""
    return build_instance(2, [
        [(0, feat(j_loc=50.0, mu=0.5)), (1, feat(j_tr=0.5, j_exe=8.0))],
        [(0, feat(mu=0.4)), (2, feat(j_tr=0.2, j_exe=12.0, mu=0.3))],
        [(1, feat(j_exe=9.0, mu=0.25)), (2, feat(j_tr=2.0, j_exe=7.0))],
        [(0, feat(lam=1, mu=0.3))],
    ])
