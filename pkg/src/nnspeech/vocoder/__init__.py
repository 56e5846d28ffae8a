from .afrm import read_afrm, write_afrm
from .coder import AcousticFrame, VocoderConfig, analyze, synthesize
from .lpc import LpcModel, autocorrelate, levinson_durbin, lpc_to_lsf, lsf_to_lpc
from .pitch import estimate_f0, estimate_voicing_boundary

__all__ = [
    "AcousticFrame", "LpcModel", "VocoderConfig", "analyze", "autocorrelate",
    "estimate_f0", "estimate_voicing_boundary", "levinson_durbin", "lpc_to_lsf",
    "lsf_to_lpc", "read_afrm", "synthesize", "write_afrm",
]
