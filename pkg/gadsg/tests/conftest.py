"""Fixtures: datasets are produced through the generator package's CLI
(the only interface this package consumes)."""

import pytest
import torch

from gadsg.data import compute_stats, load_dataset, make_batch
from gadsg.model import GADSG
from gadsg.schedule import NoiseSchedule

from gadsg_test_utils import TINY_CONFIG, generate_dataset


@pytest.fixture(scope="session")
def small_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    return {
        "train": generate_dataset(str(root / "train.jsonl"), "gs2_gu4_au2",
                                  256, 901, "mcmf"),
        "test": generate_dataset(str(root / "test.jsonl"), "gs2_gu4_au2",
                                 64, 902, "oracle"),
    }


@pytest.fixture(scope="session")
def small_records(small_data):
    return load_dataset(small_data["train"])


@pytest.fixture(scope="session")
def test_records(small_data):
    return load_dataset(small_data["test"])


@pytest.fixture
def tiny_model(small_records):
    torch.manual_seed(0)
    return GADSG(TINY_CONFIG, NoiseSchedule.linear(50),
                 compute_stats(small_records))


@pytest.fixture
def small_batch(small_records, tiny_model):
    return make_batch(small_records[:8], tiny_model.stats)
