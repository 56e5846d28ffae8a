"""Command line entry point.

    nnspeech analyze speech.wav speech.afrm
    nnspeech gen-corpus corpus/ -n 200 --seed 3
    nnspeech train corpus/ duration dur.nnbg
    nnspeech train corpus/ acoustic ac.nnbg
    nnspeech synth labels.phn out.wav --duration-model dur.nnbg --acoustic-model ac.nnbg
    nnspeech spectrogram out.wav out.pgm
    nnspeech quantize ac.nnbg ac8.nnbg --with dur8.nnbg

Failures print one ``error: CODE: message`` line to stderr and exit nonzero.
"""

import argparse
import logging
import sys

from ..errors import NNSpeechError
from . import commands
from .config import load_config


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file layered over the defaults")
    common.add_argument("--seed", type=int, help="override every seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="nnspeech", description="neural parametric speech synthesis")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="WAV -> AFRM coder parameters")
    a.add_argument("audio")
    a.add_argument("out")

    t = sub.add_parser("train", parents=[common], help="train the duration or acoustic network")
    t.add_argument("corpus")
    t.add_argument("target", choices=["duration", "acoustic"])
    t.add_argument("out")

    s = sub.add_parser("synth", parents=[common], help="labels -> WAV")
    s.add_argument("labels", help="stem.phn (stem.syn is read alongside)")
    s.add_argument("out")
    s.add_argument("--duration-model")
    s.add_argument("--acoustic-model")
    s.add_argument("--natural-durations", action="store_true",
                   help="take segment durations from the labels")
    s.add_argument("--durations-out", metavar="PATH", help="also write the durations used")

    g = sub.add_parser("spectrogram", parents=[common], help="WAV -> PGM spectrogram")
    g.add_argument("audio")
    g.add_argument("out")

    q = sub.add_parser("quantize", parents=[common], help="8-bit deployment model")
    q.add_argument("model")
    q.add_argument("out")
    q.add_argument("--with", dest="partners", action="append", default=[], metavar="MODEL",
                   help="count this model toward the joint size budget")

    c = sub.add_parser("gen-corpus", parents=[common], help="write a synthetic rulebook corpus")
    c.add_argument("out")
    c.add_argument("-n", "--utterances", type=int, default=20)
    return p


def run(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.command == "analyze":
        r = commands.cmd_analyze(args.audio, args.out, config)
        print(f"{args.out}: {r['frames']} frames")
    elif args.command == "train":
        r = commands.cmd_train(args.corpus, args.target, args.out, config)
        print(f"{args.out}: final loss {r['history_final']:.6g}; "
              f"beats mean-predictor baseline: {'yes' if r['beats_baseline'] else 'no'}")
    elif args.command == "synth":
        r = commands.cmd_synth(args.labels, args.out, args.duration_model, args.acoustic_model,
                               args.natural_durations, config, args.durations_out)
        print(f"{args.out}: {r['frames']} frames, {r['samples']} samples")
    elif args.command == "spectrogram":
        r = commands.cmd_spectrogram(args.audio, args.out, config)
        print(f"{args.out}: {r['columns']}x{r['rows']}")
    elif args.command == "quantize":
        r = commands.cmd_quantize(args.model, args.out, config, args.partners)
        print(f"{args.out}: {r['bytes']} bytes of 8-bit weights; joint {r['joint_bytes']} bytes "
              f"(budget {r['budget']})")
        if r["over_budget"]:
            print(f"warning: joint size {r['joint_bytes']} bytes is not under the "
                  f"{r['budget']}-byte budget", file=sys.stderr)
    elif args.command == "gen-corpus":
        r = commands.cmd_gen_corpus(args.out, args.utterances,
                                    args.seed if args.seed is not None else 0, config)
        print(f"{args.out}: {r['utterances']} utterances, {r['seconds']:.1f} s")
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return run(args)
    except NNSpeechError as exc:
        print(f"error: {exc.line()}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: E_IO: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
