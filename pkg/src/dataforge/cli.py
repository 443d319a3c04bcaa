"""Batch command-line surface.

Every subcommand is a pure function of (inputs, flags, seed): two runs
with identical arguments produce byte-identical outputs, whatever
FORGE_THREADS says. Exit codes: 0 success, 1 validation/usage error,
2 I/O error. Reports go to stdout or --out; artifacts go to dedicated
flags; --figure renders a PNG next to the report where supported.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import report as report_mod
from .actions import (
    AUTOREGRESSIVE,
    PAD_REPEAT_LAST,
    PADDING_POLICIES,
    PARALLEL,
    LatencyModel,
    chunk_trajectory,
    decode_latency,
    jitter,
    load_trajectory,
)
from .bpe import load_tokenizer, save_tokenizer, train_bpe
from .efficiency import compare_efficiency, encoding_efficiency
from .errors import ValidationError
from .extend import (
    FilterRules,
    load_tokenizer_or_vocab,
    merge_vocabularies,
    plan_embedding_extension,
    save_plan,
)
from .manifest import load_manifest, verify_manifest
from .mixture import (
    MixtureSampler,
    alias_reconstructed_weights,
    build_alias_table,
    load_mixture_spec,
)
from .schedule import epoch_plan, write_index_stream
from .staging import assemble_staged_mixture, load_stage_specs


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(args, command: str, config: dict, items: list) -> None:
    rows = report_mod.build_rows(command, config, items)
    _emit(report_mod.render(rows, args.report), args.out)


def _read_corpus(paths: list[str]) -> list[str]:
    docs: list[str] = []
    for p in paths:
        with open(p, "r", encoding="utf-8") as f:
            docs.extend(line.rstrip("\n") for line in f)
    return docs


# -- subcommand handlers ------------------------------------------------------


def cmd_train_bpe(args) -> None:
    specials = [s for s in args.specials.split(",") if s] if args.specials else []
    corpus = _read_corpus(args.corpus)
    tok = train_bpe(
        corpus,
        args.vocab_size,
        specials,
        min_pair_frequency=args.min_pair_frequency,
    )
    save_tokenizer(tok, args.out_vocab, args.out_merges)
    _report(
        args,
        "train-bpe",
        {
            "corpus": ",".join(args.corpus),
            "vocab_size": args.vocab_size,
            "specials": args.specials,
            "min_pair_frequency": args.min_pair_frequency,
            "seed": args.seed,
            "out_vocab": args.out_vocab,
            "out_merges": args.out_merges,
        },
        [
            ("documents", len(corpus)),
            ("final_vocab_size", len(tok.vocab)),
            ("merge_rules", len(tok.merges)),
        ],
    )


def cmd_encode(args) -> None:
    tok = load_tokenizer(args.vocab, args.merges)
    if args.stdin_jsonl:
        out = sys.stdout
        for line in sys.stdin:
            line = line.strip("\n")
            if not line:
                continue
            text = json.loads(line)
            if not isinstance(text, str):
                raise ValidationError("each input line must be a JSON string")
            out.write(json.dumps(tok.encode(text), separators=(",", ":")) + "\n")
            out.flush()
        return
    if args.text is not None:
        text = args.text
    elif args.input:
        text = Path(args.input).read_text(encoding="utf-8")
    else:
        raise ValidationError("encode needs --text, --input, or --stdin-jsonl")
    ids = tok.encode(text)
    _emit(" ".join(str(i) for i in ids) + "\n", args.out)


def cmd_decode(args) -> None:
    tok = load_tokenizer(args.vocab, args.merges)
    if args.stdin_jsonl:
        out = sys.stdout
        for line in sys.stdin:
            line = line.strip("\n")
            if not line:
                continue
            ids = json.loads(line)
            result = tok.decode(ids)
            out.write(
                json.dumps(
                    {"text": result.text, "lossy": result.lossy},
                    separators=(",", ":"),
                    ensure_ascii=False,
                )
                + "\n"
            )
            out.flush()
        return
    if args.ids is None:
        raise ValidationError("decode needs --ids or --stdin-jsonl")
    ids = [int(tok_id) for tok_id in args.ids.split()]
    result = tok.decode(ids)
    if result.lossy:
        print("warning: invalid UTF-8 replaced with U+FFFD", file=sys.stderr)
    _emit(result.text + "\n", args.out)


def cmd_merge_vocab(args) -> None:
    base = load_tokenizer(args.base_vocab, args.base_merges)
    extensions = []
    names = []
    for spec in args.ext:
        if ":" in spec:
            vocab_path, merges_path = spec.split(":", 1)
            extensions.append(load_tokenizer_or_vocab(vocab_path, merges_path))
        else:
            vocab_path = spec
            extensions.append(load_tokenizer_or_vocab(spec, None))
        names.append(Path(vocab_path).name)
    filters = FilterRules(
        min_frequency=args.min_frequency,
        allowed_scripts=frozenset(
            s for s in (args.allowed_scripts or "").split(",") if s
        ),
        allow_list=frozenset(_read_corpus([args.allow_file]) if args.allow_file else ()),
        deny_list=frozenset(_read_corpus([args.deny_file]) if args.deny_file else ()),
    )
    merged, rep = merge_vocabularies(
        base,
        extensions,
        filters,
        source_names=names,
        target_size=args.target_size,
        target_tolerance=args.target_tolerance,
    )
    save_tokenizer(merged, args.out_vocab, args.out_merges)
    _report(
        args,
        "merge-vocab",
        {
            "base_vocab": args.base_vocab,
            "base_merges": args.base_merges,
            "ext": ",".join(args.ext),
            "min_frequency": args.min_frequency,
            "allowed_scripts": args.allowed_scripts or "",
            "target_size": args.target_size,
            "out_vocab": args.out_vocab,
            "out_merges": args.out_merges,
        },
        rep.to_items(),
    )


def cmd_plan_embed(args) -> None:
    base = load_tokenizer(args.base_vocab, args.base_merges)
    merged = load_tokenizer_or_vocab(args.merged_vocab, None)
    plan = plan_embedding_extension(base, merged)
    save_plan(args.out_plan, plan)
    by_strategy: dict[str, int] = {}
    for e in plan.entries:
        by_strategy[e.strategy] = by_strategy.get(e.strategy, 0) + 1
    items = [
        ("base_size", plan.base_size),
        ("new_tokens", len(plan.entries)),
    ]
    items += [(f"strategy.{k}", v) for k, v in sorted(by_strategy.items())]
    _report(
        args,
        "plan-embed",
        {
            "base_vocab": args.base_vocab,
            "base_merges": args.base_merges,
            "merged_vocab": args.merged_vocab,
            "out_plan": args.out_plan,
        },
        items,
    )


def cmd_eval_efficiency(args) -> None:
    tok = load_tokenizer(args.vocab, args.merges)
    corpus = _read_corpus(args.corpus)
    config = {
        "vocab": args.vocab,
        "merges": args.merges,
        "corpus": ",".join(args.corpus),
        "ext_vocab": args.ext_vocab or "",
        "ext_merges": args.ext_merges or "",
        "figure": args.figure or "",
    }
    if args.ext_vocab:
        extended = load_tokenizer(args.ext_vocab, args.ext_merges)
        cmp = compare_efficiency(tok, extended, corpus)
        items = [(f"base.{k}", v) for k, v in cmp.base.to_items()]
        items += [(f"extended.{k}", v) for k, v in cmp.extended.to_items()]
        items.append(("improvement_ratio", cmp.improvement_ratio))
        if args.figure:
            from .figures import efficiency_figure

            efficiency_figure(
                args.figure,
                ["base", "extended"],
                [cmp.base.tokens_per_char, cmp.extended.tokens_per_char],
                [cmp.base.fallback_fraction, cmp.extended.fallback_fraction],
            )
            items.append(("figure", args.figure))
    else:
        rep = encoding_efficiency(tok, corpus)
        items = list(rep.to_items())
        if args.figure:
            from .figures import efficiency_figure

            efficiency_figure(
                args.figure, ["base"], [rep.tokens_per_char], [rep.fallback_fraction]
            )
            items.append(("figure", args.figure))
    _report(args, "eval-efficiency", config, items)


def cmd_mixture_validate(args) -> None:
    spec = load_mixture_spec(args.spec)
    prob, alias = build_alias_table(spec.raw_weights)
    rebuilt = alias_reconstructed_weights(prob, alias)
    alias_err = max(
        abs(got - want) for got, want in zip(rebuilt, spec.normalized_weights)
    )
    items: list = [
        ("entries", len(spec)),
        ("raw_sum", spec.raw_sum),
        ("alias_max_error", alias_err),
    ]
    for name, w in zip(spec.names, spec.normalized_weights):
        items.append((f"weight.{name}", w))
    config = {
        "spec": args.spec,
        "stages": args.stages or "",
        "manifests": ",".join(args.manifest or []),
    }
    if args.stages:
        stages = load_stage_specs(args.stages)
        manifests = {}
        for mpath in args.manifest or []:
            m = load_manifest(mpath)
            manifests[m.name] = m
        plan = assemble_staged_mixture(stages, manifests)
        items.append(("stage_warnings", len(plan.warnings)))
        for i, w in enumerate(plan.warnings):
            items.append(
                (
                    f"warning.{i}",
                    f"{w.stage}:{w.kind}:{w.subject}:declared={w.declared}:"
                    f"actual={w.actual}:delta={w.delta}",
                )
            )
    if args.verify_shards:
        for mpath in args.manifest or []:
            m = load_manifest(mpath)
            rep = verify_manifest(m, base_dir=Path(mpath).parent)
            items.append((f"verify.{m.name}.ok", rep.ok))
            for c in rep.failures:
                items.append((f"verify.{m.name}.{c.path}", f"{c.failure}:{c.detail}"))
    _report(args, "mixture-validate", config, items)


def cmd_mixture_sample(args) -> None:
    if args.seed is None:
        raise ValidationError("--seed is required for sampling")
    spec = load_mixture_spec(args.spec)
    sampler = MixtureSampler(spec, args.seed)
    if args.skip:
        sampler.skip(args.skip)
    if args.emit == "draws":
        out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
        try:
            remaining = args.draws
            while remaining > 0:
                batch = min(remaining, 65536)
                for name in sampler.draw(batch):
                    out.write(name + "\n")
                remaining -= batch
            out.flush()
        finally:
            if args.out:
                out.close()
        return
    counts = np.zeros(len(spec), dtype=np.int64)
    remaining = args.draws
    while remaining > 0:
        batch = min(remaining, 1 << 20)
        counts += np.bincount(sampler.draw_indices(batch), minlength=len(spec))
        remaining -= batch
    items: list = [("draws", args.draws), ("raw_sum", spec.raw_sum)]
    observed = counts / max(args.draws, 1)
    for i, name in enumerate(spec.names):
        items.append((f"weight.{name}", spec.normalized_weights[i]))
        items.append((f"freq.{name}", float(observed[i])))
    if args.figure:
        from .figures import mixture_frequency_figure

        mixture_frequency_figure(
            args.figure, spec.names, spec.normalized_weights, observed.tolist()
        )
        items.append(("figure", args.figure))
    _report(
        args,
        "mixture-sample",
        {
            "spec": args.spec,
            "draws": args.draws,
            "seed": args.seed,
            "skip": args.skip,
            "emit": args.emit,
            "figure": args.figure or "",
        },
        items,
    )


def cmd_epoch_plan(args) -> None:
    if args.seed is None:
        raise ValidationError("--seed is required for epoch planning")
    plan = epoch_plan(args.records, args.epochs, args.seed)
    write_index_stream(args.out_stream, plan)
    import hashlib

    digest = hashlib.sha256(np.asarray(plan, dtype="<i8").tobytes()).hexdigest()
    _report(
        args,
        "epoch-plan",
        {
            "records": args.records,
            "epochs": args.epochs,
            "seed": args.seed,
            "out_stream": args.out_stream,
        },
        [
            ("indices", len(plan)),
            ("stream_sha256", digest),
        ],
    )


def cmd_chunk(args) -> None:
    traj = load_trajectory(args.traj)
    chunks = chunk_trajectory(traj, args.k, args.stride, args.padding)
    if args.out_chunks:
        import struct

        with open(args.out_chunks, "wb") as f:
            f.write(b"#chnk-v1")
            f.write(
                struct.pack("<QQQd", len(chunks), args.k, traj.dims, traj.dt)
            )
            for c in chunks:
                f.write(struct.pack("<Q", c.origin))
                f.write(c.chunk.astype("<f8").tobytes(order="C"))
    stride = args.stride if args.stride is not None else args.k
    padded = max(0, chunks[-1].origin + args.k - traj.length)
    _report(
        args,
        "chunk",
        {
            "traj": args.traj,
            "k": args.k,
            "stride": stride,
            "padding": args.padding,
            "out_chunks": args.out_chunks or "",
        },
        [
            ("timesteps", traj.length),
            ("dims", traj.dims),
            ("chunks", len(chunks)),
            ("padded_steps", padded),
        ],
    )


def cmd_jitter(args) -> None:
    traj = load_trajectory(args.traj)
    value = jitter(traj)
    _report(
        args,
        "jitter",
        {"traj": args.traj},
        [
            ("timesteps", traj.length),
            ("dims", traj.dims),
            ("jitter", value),
        ],
    )


def cmd_latency(args) -> None:
    model = LatencyModel(
        cost_per_token=args.cost_per_token, parallel_overhead=args.overhead
    )
    ar = decode_latency(model, args.k, args.d, AUTOREGRESSIVE)
    par = decode_latency(model, args.k, args.d, PARALLEL)
    items = [
        ("autoregressive_seconds", ar),
        ("parallel_seconds", par),
        ("autoregressive_per_step", ar / args.k),
        ("parallel_per_step", par / args.k),
        ("speedup", ar / par),
    ]
    if args.figure:
        from .figures import latency_figure

        ks = list(range(1, max(args.k, 8) + 1))
        latency_figure(
            args.figure,
            ks,
            [decode_latency(model, k, args.d, AUTOREGRESSIVE) for k in ks],
            [decode_latency(model, k, args.d, PARALLEL) for k in ks],
        )
        items.append(("figure", args.figure))
    _report(
        args,
        "latency",
        {
            "cost_per_token": args.cost_per_token,
            "overhead": args.overhead,
            "k": args.k,
            "d": args.d,
            "figure": args.figure or "",
        },
        items,
    )


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dataforge",
        description="Deterministic BPE, vocabulary-extension, mixture-sampling, "
        "and action-chunk pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--report", choices=report_mod.FORMATS, default=report_mod.STRUCTURED)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="64-bit run seed")

    p = sub.add_parser("train-bpe", help="train a byte-fallback BPE tokenizer")
    p.add_argument("--corpus", action="append", required=True, help="text file, one document per line")
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--specials", default="<pad>,<bos>,<eos>,<unk>")
    p.add_argument("--min-pair-frequency", type=int, default=2)
    p.add_argument("--out-vocab", required=True)
    p.add_argument("--out-merges", required=True)
    common(p)
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("encode", help="encode text to token ids")
    p.add_argument("--vocab", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--text")
    p.add_argument("--input", help="file whose entire content is encoded")
    p.add_argument("--stdin-jsonl", action="store_true", help="read JSON strings per line, emit id arrays per line")
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode token ids to text")
    p.add_argument("--vocab", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--ids", help="space-separated token ids")
    p.add_argument("--stdin-jsonl", action="store_true", help="read id arrays per line, emit {text,lossy} per line")
    common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("merge-vocab", help="merge extension vocabularies into a base")
    p.add_argument("--base-vocab", required=True)
    p.add_argument("--base-merges", required=True)
    p.add_argument("--ext", action="append", required=True, metavar="VOCAB[:MERGES]")
    p.add_argument("--min-frequency", type=int, default=0)
    p.add_argument("--allowed-scripts", help="comma-separated script whitelist")
    p.add_argument("--allow-file", help="one always-kept token per line")
    p.add_argument("--deny-file", help="one always-dropped token per line")
    p.add_argument("--target-size", type=int, default=None)
    p.add_argument("--target-tolerance", type=float, default=0.05)
    p.add_argument("--out-vocab", required=True)
    p.add_argument("--out-merges", required=True)
    common(p)
    p.set_defaults(func=cmd_merge_vocab)

    p = sub.add_parser("plan-embed", help="emit an embedding-extension plan")
    p.add_argument("--base-vocab", required=True)
    p.add_argument("--base-merges", required=True)
    p.add_argument("--merged-vocab", required=True)
    p.add_argument("--out-plan", required=True)
    common(p)
    p.set_defaults(func=cmd_plan_embed)

    p = sub.add_parser("eval-efficiency", help="tokens-per-char efficiency report")
    p.add_argument("--vocab", required=True)
    p.add_argument("--merges", required=True)
    p.add_argument("--ext-vocab", help="extended tokenizer to compare against")
    p.add_argument("--ext-merges")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--figure", help="render a comparison figure to this path")
    common(p)
    p.set_defaults(func=cmd_eval_efficiency)

    p = sub.add_parser("mixture-validate", help="validate a mixture spec (and staged plan)")
    p.add_argument("--spec", required=True)
    p.add_argument("--stages", help="stage spec file")
    p.add_argument("--manifest", action="append", help="manifest file (repeatable)")
    p.add_argument("--verify-shards", action="store_true")
    common(p)
    p.set_defaults(func=cmd_mixture_validate)

    p = sub.add_parser("mixture-sample", help="draw datasets from a weighted mixture")
    p.add_argument("--spec", required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--skip", type=int, default=0, help="advance past this many draws first")
    p.add_argument("--emit", choices=("report", "draws"), default="report")
    p.add_argument("--figure", help="render expected-vs-observed frequencies")
    common(p)
    p.set_defaults(func=cmd_mixture_sample)

    p = sub.add_parser("epoch-plan", help="write a deterministic shuffled index stream")
    p.add_argument("--records", type=int, required=True)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--out-stream", required=True, help="binary little-endian int64 output")
    common(p)
    p.set_defaults(func=cmd_epoch_plan)

    p = sub.add_parser("chunk", help="cut a trajectory into action chunks")
    p.add_argument("--traj", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--padding", choices=PADDING_POLICIES, default=PAD_REPEAT_LAST)
    p.add_argument("--out-chunks", help="binary chunk output")
    common(p)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("jitter", help="second-difference jitter of a trajectory")
    p.add_argument("--traj", required=True)
    common(p)
    p.set_defaults(func=cmd_jitter)

    p = sub.add_parser("latency", help="chunk decode latency model")
    p.add_argument("--cost-per-token", type=float, required=True)
    p.add_argument("--overhead", type=float, default=1.0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--figure", help="render latency-vs-K curves")
    common(p)
    p.set_defaults(func=cmd_latency)

    return parser


def main(argv: list[str] | None = None) -> int:
    # byte-identical text I/O regardless of the host locale
    for stream in (sys.stdin, sys.stdout):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; the contract is 1
        return 0 if exc.code == 0 else 1
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
