from .graph import BlockGraph, backward, build_graph, forward, run_sequence, sequence_loss
from .loss import weighted_euclidean
from .modelio import ModelFile, read_model, write_model
from .normalize import TargetNormalizer, variance_weights
from .quantize import QuantizedWeights, dequantize, quantize
from .saliency import tap_ranges, tap_saliency
from .topology import BlockSpec, EdgeSpec, GraphSpec, parse_topology
from .train import Sequence, TrainingSchedule, TrainResult, train

__all__ = [
    "BlockGraph", "BlockSpec", "EdgeSpec", "GraphSpec", "ModelFile", "QuantizedWeights",
    "Sequence", "TargetNormalizer", "TrainResult", "TrainingSchedule", "backward",
    "build_graph", "dequantize", "forward", "parse_topology", "quantize", "read_model",
    "run_sequence", "sequence_loss", "tap_ranges", "tap_saliency", "train",
    "variance_weights", "weighted_euclidean", "write_model",
]
