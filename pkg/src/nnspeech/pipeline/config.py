"""Project configuration: one INI file layered over the packaged defaults."""

import configparser
import os
from dataclasses import dataclass, fields, replace
from importlib import resources

from ..acoustic_model import PhoneticNetConfig
from ..duration_model import DurationNetConfig
from ..encoding.context import EncodingConfig
from ..encoding.taps import default_tap_schedule
from ..errors import ConfigError
from ..netgraph.train import TrainingSchedule
from ..vocoder.coder import VocoderConfig


@dataclass(frozen=True)
class ProjectConfig:
    vocoder: VocoderConfig
    encoding: EncodingConfig
    duration_net: DurationNetConfig
    phonetic_net: PhoneticNetConfig
    duration_schedule: TrainingSchedule
    acoustic_schedule: TrainingSchedule
    acoustic_weights: tuple = None
    max_bytes: int = 102400
    duration_model: str = ""
    acoustic_model: str = ""

    @property
    def sample_rate(self):
        return self.vocoder.sample_rate

    def with_seed(self, seed):
        """Override every seed (nets, schedules) with one value."""
        return replace(
            self,
            duration_net=replace(self.duration_net, seed=seed),
            phonetic_net=replace(self.phonetic_net, seed=seed + 1),
            duration_schedule=replace(self.duration_schedule, seed=seed),
            acoustic_schedule=replace(self.acoustic_schedule, seed=seed + 1),
        )


def _default_text():
    return resources.files("nnspeech").joinpath("data").joinpath("default.ini").read_text()


def _typed(section, cls, renames=None):
    """Build dataclass ``cls`` from an INI section, converting by field type."""
    renames = renames or {}
    kwargs = {}
    for f in fields(cls):
        key = renames.get(f.name, f.name)
        if key not in section:
            continue
        raw = section[key]
        try:
            if f.type in (int, "int"):
                kwargs[f.name] = int(raw)
            elif f.type in (float, "float"):
                kwargs[f.name] = float(raw)
            elif f.type in (bool, "bool"):
                kwargs[f.name] = section.getboolean(key)
            else:
                continue
        except ValueError:
            raise ConfigError(f"[{section.name}] {key}: cannot parse {raw!r}") from None
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section.name}]: {exc}") from None


def load_config(path=None):
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(_default_text())
    base = None
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file {path} does not exist")
        try:
            with open(path) as f:
                parser.read_file(f)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = os.path.dirname(os.path.abspath(path))

    vocoder = _typed(parser["vocoder"], VocoderConfig, {"order": "lpc_order"})
    vocoder = replace(vocoder, sample_rate=parser["audio"].getint("sample_rate"))
    enc_sec = parser["encoding"]
    window_ms = enc_sec.getfloat("tdnn_window_ms")
    frame_ms = vocoder.frame_ms
    if window_ms % frame_ms:
        raise ConfigError(f"frame_ms={frame_ms} does not divide tdnn_window_ms={window_ms}")
    encoding = EncodingConfig(
        context_k=enc_sec.getint("context_k"),
        saturation=enc_sec.getint("saturation"),
        frame_len=vocoder.hop,
        distance_unit_frames=enc_sec.getint("distance_unit_frames"),
        taps=default_tap_schedule(window_ms, frame_ms),
    )
    dur_net = _typed(parser["duration_net"], DurationNetConfig)
    dur_net = replace(dur_net, context_k=encoding.context_k)
    ph_net = _typed(parser["phonetic_net"], PhoneticNetConfig)
    d_sched = _typed(parser["train.duration"], TrainingSchedule)
    a_sched = _typed(parser["train.acoustic"], TrainingSchedule)

    raw_w = parser["loss"].get("acoustic_weights", "").strip()
    weights = None
    if raw_w:
        try:
            weights = tuple(float(x) for x in raw_w.split(","))
        except ValueError:
            raise ConfigError(f"[loss] acoustic_weights: cannot parse {raw_w!r}") from None
        if len(weights) != vocoder.n_params or min(weights) < 0:
            raise ConfigError(f"[loss] acoustic_weights needs {vocoder.n_params} non-negative values")

    paths = {}
    for key in ("duration_model", "acoustic_model"):
        value = parser["paths"].get(key, "").strip()
        if value:
            if base and not os.path.isabs(value):
                value = os.path.join(base, value)
            if not os.path.exists(value):
                raise ConfigError(f"[paths] {key}: {value} does not exist")
        paths[key] = value
    return ProjectConfig(vocoder, encoding, dur_net, ph_net, d_sched, a_sched, weights,
                         parser["budget"].getint("max_bytes"), **paths)
