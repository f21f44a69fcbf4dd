"""gadsg: graph-attention diffusion solution generator for low-altitude
MEC offloading datasets."""

from .data import FeatureStats, GraphBatch, load_dataset, make_batch
from .encoder import EncoderConfig, GraphEncoder
from .model import (GADSG, evaluate_records, load_checkpoint,
                    project_solution, save_checkpoint, train_model)
from .schedule import (NoiseSchedule, discrete_posterior, forward_continuous,
                       forward_discrete)

__version__ = "0.1.0"
