"""The work behind each CLI subcommand; every function returns a small result dict."""

import csv
import json
import logging
import os

import numpy as np

from ..acoustic_model import AcousticModel, acoustic_targets, predict_frames, train_acoustic_model
from ..corpus.frames import natural_frame_counts
from ..corpus.synthetic import generate_synthetic_corpus
from ..duration_model import (DurationModel, durations_to_frames, format_durations,
                              predict_durations, train_duration_model)
from ..errors import CorpusError, ModelFileError, NNSpeechError
from ..netgraph.modelio import read_model, write_model
from ..netgraph.quantize import quantize
from ..vocoder.afrm import write_afrm
from ..vocoder.coder import analyze, synthesize
from .config import load_config
from .corpus_io import load_corpus, read_labels, write_corpus
from .spectrogram import render, spectrogram_db, write_pgm
from .wavio import read_wav, write_wav

log = logging.getLogger("nnspeech")


def cmd_analyze(audio_path, out_path, config=None):
    config = config or load_config()
    samples = read_wav(audio_path, config.sample_rate)
    frames = analyze(samples, config.vocoder)
    write_afrm(out_path, frames, config.sample_rate, config.vocoder.order)
    log.info("%s: %d frames", audio_path, len(frames))
    return {"frames": len(frames)}


def _write_history(path, history):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "loss"])
        for i, loss in enumerate(history):
            w.writerow([i, repr(float(loss))])


def _epoch_logger(e, mode, loss):
    log.info("epoch %d (%s): loss %.6g", e, mode, loss)


def cmd_train(corpus_dir, target, out_path, config=None):
    """Train one network on a corpus; writes the model, ``.loss.csv`` and ``.report.json``."""
    config = config or load_config()
    utterances = load_corpus(corpus_dir, config.sample_rate)
    if target == "duration":
        model, history, report = train_duration_model(
            utterances, config.duration_net, config.duration_schedule, config.encoding,
            log=_epoch_logger)
    elif target == "acoustic":
        problems, targets = [], []
        for utt in utterances:
            try:
                targets.append(acoustic_targets(utt, config.vocoder))
            except NNSpeechError as exc:
                problems.append((utt.name, exc.line()))
        if problems:
            raise CorpusError(problems)
        model, history, report = train_acoustic_model(
            utterances, config.phonetic_net, config.acoustic_schedule, config.encoding,
            config.vocoder, targets, config.acoustic_weights, log=_epoch_logger)
    else:
        raise NNSpeechError(f"unknown training target {target!r}")
    model.save(out_path)
    stem = os.path.splitext(out_path)[0]
    _write_history(stem + ".loss.csv", history)
    report = dict(report, target=target, epochs=len(history),
                  history_final=float(history[-1]) if history else None)
    if target == "duration":
        report["beats_baseline"] = report["rms_log_error"] < report["baseline_rms_log_error"]
    else:
        report["beats_baseline"] = report["final_loss"] < report["baseline_loss"]
    with open(stem + ".report.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    return report


def _load_models(config, duration_path, acoustic_path, natural):
    acoustic_path = acoustic_path or config.acoustic_model
    duration_path = duration_path or config.duration_model
    if not acoustic_path:
        raise ModelFileError("an acoustic model is required")
    if not os.path.isfile(acoustic_path):
        raise ModelFileError(f"acoustic model {acoustic_path} not found")
    acoustic = AcousticModel.load(acoustic_path, config.encoding, config.vocoder)
    duration = None
    if not natural:
        if not duration_path:
            raise ModelFileError("a duration model is required unless --natural-durations is given")
        if not os.path.isfile(duration_path):
            raise ModelFileError(f"duration model {duration_path} not found")
        duration = DurationModel.load(duration_path, config.encoding)
    return duration, acoustic


def cmd_synth(labels_path, out_path, duration_model=None, acoustic_model=None,
              natural_durations=False, config=None, durations_out=None):
    """Waveform from ``stem.phn``/``stem.syn`` labels."""
    config = config or load_config()
    segments, syntax = read_labels(labels_path)
    duration, acoustic = _load_models(config, duration_model, acoustic_model, natural_durations)
    hop = config.vocoder.hop
    if natural_durations:
        counts = natural_frame_counts(segments, hop)
    else:
        counts = durations_to_frames(predict_durations(segments, syntax, duration),
                                     config.vocoder.frame_ms / 1000.0)
    if durations_out:
        with open(durations_out, "w") as f:
            f.write(format_durations(segments, [c * config.vocoder.frame_ms / 1000.0 for c in counts]))
    frames = predict_frames(segments, syntax, counts, acoustic)
    wave = synthesize(frames, config.vocoder) if frames else np.zeros(0)
    write_wav(out_path, wave, config.sample_rate)
    return {"frames": len(frames), "samples": int(len(wave))}


def cmd_spectrogram(audio_path, out_path, config=None):
    config = config or load_config()
    samples = read_wav(audio_path, config.sample_rate)
    image = render(spectrogram_db(samples))
    write_pgm(out_path, image)
    return {"rows": image.shape[0], "columns": image.shape[1]}


def quantized_size(path):
    model = read_model(path)
    return (model.quantized or quantize(model.graph)).nbytes()


def cmd_quantize(model_in, model_out, config=None, partners=()):
    """Write the 8-bit deployment model and report its size (joint with ``partners``)."""
    config = config or load_config()
    model = read_model(model_in)
    q = model.quantized or quantize(model.graph)
    write_model(model_out, model.graph, model.meta, quantized=True, qweights=q)
    size = q.nbytes()
    joint = size + sum(quantized_size(p) for p in partners)
    over = joint >= config.max_bytes
    return {"bytes": size, "joint_bytes": joint, "budget": config.max_bytes, "over_budget": over}


def cmd_gen_corpus(out_dir, n_utterances, seed=0, config=None):
    config = config or load_config()
    utterances = generate_synthetic_corpus(seed, n_utterances, config=config.vocoder)
    write_corpus(out_dir, utterances)
    return {"utterances": len(utterances),
            "seconds": sum(u.n_samples for u in utterances) / config.sample_rate}
