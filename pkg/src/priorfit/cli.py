"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure. Heavy modules are imported only after argument parsing so that
``--threads`` can pin the BLAS thread environment first. Every JSON
report embeds the fully resolved configuration, defaults included, so a
successful run is reproducible from its own output.
"""

import argparse
import json
import os
import sys


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _log(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _write_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap internal BLAS parallelism (default 1, deterministic)")


def _add_train_flags(parser):
    parser.add_argument("--task", required=True, choices=["regression", "classification"])
    parser.add_argument("--embeddings", required=True, help="input .pfeb file")
    parser.add_argument("--captions", required=True, help="caption manifest JSON")
    parser.add_argument("--prior", required=True, help="prior JSON file")
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--epochs", type=int, default=70)
    parser.add_argument("--batch", type=int, default=128)
    parser.add_argument("--accum", type=int, default=1,
                        help="batches pooled per optimizer step")
    parser.add_argument("--warmup", type=int, default=0,
                        help="anchor-only initialization epochs")
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--lr-decay", type=float, default=0.3)
    parser.add_argument("--lr-period", type=int, default=10)
    parser.add_argument("--weight-decay", type=float, default=1e-4)
    parser.add_argument("--hidden", type=int, nargs="+", default=[256])


def _build_parser():
    parser = _Parser(prog="priorfit",
                     description="Adapt zero-shot embedding predictions to a label prior.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth",
                       help="generate a synthetic fixture")
    p.add_argument("--spec", required=True, help="synth spec JSON file")
    p.add_argument("--out-embeddings", required=True)
    p.add_argument("--out-captions", required=True, help="caption manifest path")
    p.add_argument("--out-prior", required=True)
    _add_common(p)

    p = sub.add_parser("zeroshot",
                       help="nearest-caption labels for a dataset")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--captions", required=True)
    p.add_argument("--out", required=True, help="output CSV ('-' for stdout)")
    _add_common(p)

    p = sub.add_parser("select-prompt",
                       help="rank candidate prompts against the prior")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--candidates", required=True,
                   help="JSON list of {template, captions} pairs")
    p.add_argument("--prior", required=True)
    p.add_argument("--out", required=True, help="ranking JSON ('-' for stdout)")
    _add_common(p)

    p = sub.add_parser("train", help="train an adapter")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="model .pfad path")
    p.add_argument("--report", default=None, help="training report JSON ('-' for stdout)")
    _add_common(p)

    p = sub.add_parser("eval",
                       help="score a model on a labelled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True, help=".pfeb with labels")
    p.add_argument("--captions", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", required=True, help="report JSON ('-' for stdout)")
    _add_common(p)

    p = sub.add_parser("sweep",
                       help="robustness or alpha ablation table")
    p.add_argument("--kind", required=True, choices=["robustness", "alpha"])
    p.add_argument("--grid", required=True,
                   help='JSON file: {"priors": [...]} or {"alphas": [...]}')
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="table JSON ('-' for stdout)")
    _add_common(p)

    return parser


def _resolved(args, keys):
    return {key: getattr(args, key) for key in keys}


def _train_config(args):
    from .trainer import TrainConfig

    return TrainConfig(
        task=args.task,
        alpha=args.alpha,
        epochs=args.epochs,
        batch_size=args.batch,
        accumulate_batches=args.accum,
        warmup_epochs=args.warmup,
        base_lr=args.lr,
        lr_decay=args.lr_decay,
        lr_decay_period=args.lr_period,
        weight_decay=args.weight_decay,
        hidden=tuple(args.hidden),
        seed=args.seed,
    )


def _cmd_synth(args):
    from . import synth
    from .dataio import write_captions, write_embeddings
    from .errors import DataError
    from .priors import save_prior

    with open(args.spec, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.spec}: not valid JSON: {exc}") from None
    spec = synth.spec_from_dict(obj)
    dataset, captions, prior = synth.generate(spec)
    write_embeddings(dataset, args.out_embeddings)
    write_captions(captions, args.out_captions)
    save_prior(prior, args.out_prior)
    _log(args, f"wrote {dataset.n} x {dataset.d} embeddings, "
               f"{captions.m} captions, prior -> {args.out_prior}")
    _log(args, "config: " + json.dumps({"spec": spec.to_dict()}))
    return 0


def _cmd_zeroshot(args):
    from .dataio import read_captions, read_embeddings
    from .zeroshot import assign

    dataset = read_embeddings(args.embeddings)
    captions = read_captions(args.captions)
    result = assign(dataset, captions)
    fh, close = _open_out(args.out)
    try:
        fh.write("id,assigned_index,hard_label\n")
        for i in range(dataset.n):
            sample_id = dataset.ids[i] if dataset.ids is not None else str(i)
            fh.write(f"{sample_id},{result.assigned_index[i]},{result.hard_labels[i]:g}\n")
    finally:
        if close:
            fh.close()
    _log(args, "config: " + json.dumps(_resolved(args, ["embeddings", "captions", "out"])))
    return 0


def _cmd_select_prompt(args):
    import numpy as np

    from .dataio import read_captions, read_embeddings
    from .errors import DataError
    from .priors import load_prior
    from .promptselect import PromptCandidate, rank_prompts

    dataset = read_embeddings(args.embeddings)
    prior = load_prior(args.prior)
    with open(args.candidates, encoding="utf-8") as fh:
        try:
            listing = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.candidates}: not valid JSON: {exc}") from None
    if not isinstance(listing, list):
        raise DataError(f"{args.candidates}: expected a JSON list of candidates")
    base = os.path.dirname(os.path.abspath(args.candidates))
    candidates = []
    for entry in listing:
        manifest = entry["captions"]
        if not os.path.isabs(manifest):
            manifest = os.path.join(base, manifest)
        candidates.append(PromptCandidate(template=entry["template"],
                                          captions=read_captions(manifest)))
    ranking = rank_prompts(dataset, candidates, prior, np.random.default_rng(args.seed))
    out = {"config": _resolved(args, ["embeddings", "candidates", "prior", "seed"])}
    out.update(ranking.to_dict())
    _write_json(out, args.out)
    _log(args, f"best prompt: {ranking.best.template!r} "
               f"(distance {ranking.best.distance:.4f})")
    return 0


def _cmd_train(args):
    from .adapter import save_adapter
    from .dataio import read_captions, read_embeddings
    from .priors import load_prior
    from .trainer import train
    from .zeroshot import assign

    dataset = read_embeddings(args.embeddings)
    captions = read_captions(args.captions)
    prior = load_prior(args.prior)
    config = _train_config(args)
    zs = assign(dataset, captions)
    model, report = train(dataset, captions, prior, zs, config)
    save_adapter(model, args.out)
    _log(args, f"trained {config.epochs} epochs; model -> {args.out}")
    if args.report is not None:
        payload = {"config": config.to_dict()}
        payload.update(report.to_dict())
        _write_json(payload, args.report)
    _log(args, "config: " + json.dumps(config.to_dict()))
    return 0


def _cmd_eval(args):
    from .adapter import load_adapter
    from .dataio import read_captions, read_embeddings
    from .evaluate import evaluate_model
    from .priors import load_prior

    model = load_adapter(args.model)
    dataset = read_embeddings(args.embeddings)
    captions = read_captions(args.captions)
    prior = load_prior(args.prior)
    report = evaluate_model(model, dataset, captions, prior)
    payload = {"config": _resolved(args, ["model", "embeddings", "captions", "prior"])}
    payload.update(report.to_dict())
    _write_json(payload, args.out)
    _log(args, f"{report.metric}: {report.value:.4f} on {report.n} samples")
    return 0


def _cmd_sweep(args):
    from .dataio import read_captions, read_embeddings
    from .errors import DataError
    from .evaluate import alpha_sweep, robustness_sweep
    from .priors import load_prior, prior_from_dict
    from .zeroshot import assign

    dataset = read_embeddings(args.embeddings)
    captions = read_captions(args.captions)
    prior = load_prior(args.prior)
    config = _train_config(args)
    zs = assign(dataset, captions)
    with open(args.grid, encoding="utf-8") as fh:
        try:
            grid = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.grid}: not valid JSON: {exc}") from None
    if args.kind == "robustness":
        if "priors" not in grid:
            raise DataError(f"{args.grid}: robustness grid needs a 'priors' list")
        priors = [
            (json.dumps(obj, sort_keys=True), prior_from_dict(obj)) for obj in grid["priors"]
        ]
        rows = robustness_sweep(dataset, captions, zs, priors, config)
    else:
        if "alphas" not in grid:
            raise DataError(f"{args.grid}: alpha grid needs an 'alphas' list")
        rows = alpha_sweep(dataset, captions, zs, prior, grid["alphas"], config)
    payload = {
        "config": {**config.to_dict(), "kind": args.kind, "grid": grid},
        "rows": [row.to_dict() for row in rows],
    }
    _write_json(payload, args.out)
    for row in rows:
        _log(args, f"{row.label}: {row.value if row.error is None else 'FAILED ' + row.error}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "zeroshot": _cmd_zeroshot,
    "select-prompt": _cmd_select_prompt,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def _set_thread_env(threads):
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"priorfit: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    _set_thread_env(args.threads)

    from .errors import ConfigError, DataError, NumericalError

    try:
        return _COMMANDS[args.command](args)
    except (DataError, ConfigError) as exc:
        print(f"priorfit: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"priorfit: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"priorfit: numerical failure: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"priorfit: error: missing key {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
