"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can report
failures as a single parsable line.
"""


class NNSpeechError(Exception):
    code = "E_GENERIC"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def line(self):
        return f"{self.code}: {self}"


class LabelParseError(NNSpeechError):
    code = "E_PARSE"

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message, lineno=lineno)
        self.lineno = lineno


class StructureError(NNSpeechError):
    code = "E_STRUCTURE"


class InventoryError(NNSpeechError):
    code = "E_INVENTORY"

    def __init__(self, label):
        super().__init__(f"unknown phone {label!r}")
        self.label = label


class EncodingError(NNSpeechError):
    code = "E_ENCODING"


class AudioFormatError(NNSpeechError):
    code = "E_FORMAT"


class NumericalError(NNSpeechError):
    """Degenerate numerics, e.g. a reflection coefficient with magnitude >= 1."""

    code = "E_NUMERIC"

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"stage {stage}: {message}"
        super().__init__(message, stage=stage)
        self.stage = stage


class FrameError(NNSpeechError):
    code = "E_FRAME"

    def __init__(self, message, frame_index=None):
        if frame_index is not None:
            message = f"frame {frame_index}: {message}"
        super().__init__(message, frame_index=frame_index)
        self.frame_index = frame_index


class GraphBuildError(NNSpeechError):
    code = "E_BUILD"


class GraphRuntimeError(NNSpeechError):
    code = "E_GRAPH"


class ModelFileError(NNSpeechError):
    code = "E_MODEL"


class DigestMismatchError(ModelFileError):
    code = "E_DIGEST"


class ConfigError(NNSpeechError):
    code = "E_CONFIG"


class CorpusError(NNSpeechError):
    """Accumulated per-file problems found while loading a corpus."""

    code = "E_CORPUS"

    def __init__(self, problems):
        self.problems = list(problems)
        if self.problems:
            head = "; ".join(f"{path}: {msg}" for path, msg in self.problems[:3])
            more = len(self.problems) - 3
            message = f"{len(self.problems)} corpus problem(s): {head}"
            if more > 0:
                message += f" (+{more} more)"
        else:
            message = "corpus is empty"
        super().__init__(message)
