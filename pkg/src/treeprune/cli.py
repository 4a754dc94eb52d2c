"""Command-line surface: LM training, simplification, back-translation,
evaluation, controllability sweeps, and token-importance analysis.

Configuration precedence is flags > config file (--config, flat key=value
lines) > built-in defaults, so the base configuration (alpha=2, tau=0.95,
lambda=0.5, beam=5) runs with zero flags. Exit codes: 0 success, 1 partial
per-item failures, 2 configuration or I/O errors.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .analysis import aggregate_profile, format_profile, write_profile_csv
from .backtranslate import (
    BackTranslator,
    DictionaryClient,
    HttpTranslationClient,
    IdentityClient,
)
from .decoder import DecoderConfig, simplify_corpus
from .errors import TreepruneError
from .fluency import PosKneserNeyLM, read_pos_corpus
from .metrics import EvalInstance, evaluate_corpus, read_parallel_files
from .similarity import HashingBackend, HttpEmbeddingBackend, WordVectorBackend
from .treebank import read_conllu

ENV_EMBED_URL = "TREEPRUNE_EMBED_URL"
ENV_MT_URL = "TREEPRUNE_MT_URL"
ENV_MT_KEY = "TREEPRUNE_MT_KEY"

DEFAULTS = {
    "alpha": 2.0,
    "tau": 0.95,
    "lambda": 0.5,
    "beam": 5,
    "backend": "hash",
    "vectors": None,
    "embed_url": None,
    "lm": None,
    "bt": "off",
    "pivot": "de",
    "source_language": "en",
    "separator_policy": "strip",
    "bt_dict": None,
    "jobs": 1,
}


def _fail(message: str, code: int = 2):
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot read config file {path}: {exc}")
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            _fail(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(flags: dict, config_path: str | None) -> dict:
    """flags > config file > defaults; only known keys are accepted."""
    merged = dict(DEFAULTS)
    if config_path:
        file_values = _load_config_file(config_path)
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            _fail(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, raw in file_values.items():
            default = DEFAULTS[key]
            try:
                if key in ("alpha", "tau", "lambda"):
                    merged[key] = float(raw)
                elif key in ("beam", "jobs"):
                    merged[key] = int(raw)
                else:
                    merged[key] = raw
            except ValueError:
                _fail(f"bad value for {key}: {raw!r}")
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return merged


def _decoder_config(opts: dict) -> DecoderConfig:
    try:
        return DecoderConfig(
            alpha=opts["alpha"],
            tau=opts["tau"],
            lambda_ratio=opts["lambda"],
            beam_size=opts["beam"],
        )
    except ValueError as exc:
        _fail(str(exc))


def _build_backend(opts: dict):
    name = opts["backend"]
    if name == "hash":
        return HashingBackend()
    if name == "wordvec":
        if not opts.get("vectors"):
            _fail("--backend wordvec requires --vectors PATH")
        try:
            return WordVectorBackend.from_file(opts["vectors"])
        except (OSError, ValueError) as exc:
            _fail(f"cannot load vectors from {opts['vectors']}: {exc}")
    if name == "http":
        url = opts.get("embed_url") or os.environ.get(ENV_EMBED_URL)
        if not url:
            _fail(f"--backend http requires --embed-url or ${ENV_EMBED_URL}")
        return HttpEmbeddingBackend(url)
    _fail(f"unknown backend {name!r} (choose hash, wordvec, or http)")


def _build_backtranslator(opts: dict) -> BackTranslator | None:
    mode = opts["bt"]
    if mode == "off":
        return None
    if mode == "identity":
        client = IdentityClient()
    elif mode == "dict":
        if not opts.get("bt_dict"):
            _fail("--bt dict requires --bt-dict PATH")
        try:
            client = DictionaryClient.from_file(
                opts["bt_dict"], source=opts["source_language"], pivot=opts["pivot"]
            )
        except (OSError, TreepruneError) as exc:
            _fail(f"cannot load dictionary {opts['bt_dict']}: {exc}")
    elif mode == "http":
        url = os.environ.get(ENV_MT_URL)
        if not url:
            _fail(f"--bt http requires ${ENV_MT_URL}")
        client = HttpTranslationClient(url, api_key=os.environ.get(ENV_MT_KEY))
    else:
        _fail(f"unknown back-translation mode {mode!r} (off, identity, dict, http)")
    try:
        return BackTranslator(
            client=client,
            source_language=opts["source_language"],
            pivot_language=opts["pivot"],
            separator_policy=opts["separator_policy"],
        ).fit()
    except TreepruneError as exc:
        _fail(str(exc))


def _read_sentences(path: str):
    try:
        sentences = read_conllu(path)
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}")
    except TreepruneError as exc:
        _fail(f"{path}: {exc}")
    if not sentences:
        _fail(f"{path} contains no sentences")
    return sentences


def _load_or_train_lm(opts: dict, sentences) -> tuple[PosKneserNeyLM, str]:
    if opts.get("lm"):
        try:
            return PosKneserNeyLM.load(opts["lm"]), f"loaded:{opts['lm']}"
        except OSError as exc:
            _fail(f"cannot read LM {opts['lm']}: {exc}")
        except TreepruneError as exc:
            _fail(str(exc))
    # fallback: train on the input corpus's own tag sequences
    lm = PosKneserNeyLM().fit([list(s.pos_tags()) for s in sentences])
    return lm, "trained-on-input"


_shared_options = [
    click.option("--alpha", type=float, default=None, help="Fluency weight."),
    click.option("--tau", type=float, default=None, help="Similarity threshold."),
    click.option("--lambda", "lambda_", type=float, default=None,
                 help="Minimum output/input length ratio."),
    click.option("--beam", type=int, default=None, help="Beam size."),
    click.option("--backend", type=str, default=None,
                 help="Embedding backend: hash, wordvec, or http."),
    click.option("--vectors", type=str, default=None, help="Word-vector file."),
    click.option("--embed-url", "embed_url", type=str, default=None,
                 help="Embedding service base URL."),
    click.option("--config", "config_path", type=str, default=None,
                 help="key=value config file."),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
def main():
    """Unsupervised sentence simplification over dependency trees."""


@main.command("train-lm")
@click.argument("pos_corpus", type=str)
@click.argument("out", type=str)
@click.option("--order", type=int, default=4, show_default=True)
@click.option("--discount", type=float, default=0.75, show_default=True)
def cmd_train_lm(pos_corpus: str, out: str, order: int, discount: float):
    """Train the POS n-gram model on one tag sequence per line."""
    try:
        sequences = read_pos_corpus(pos_corpus)
    except OSError as exc:
        _fail(f"cannot read {pos_corpus}: {exc}")
    try:
        lm = PosKneserNeyLM(order=order, discount=discount).fit(sequences)
        lm.save(out)
    except (TreepruneError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"tagset ({len(lm.tagset_)}): {' '.join(lm.tagset_)}")
    for m, size in lm.ngram_table_sizes().items():
        click.echo(f"{m}-gram types: {size}")
    if lm.unknown_tags_:
        click.echo(f"tags mapped to UNK: {lm.unknown_tags_}")
    click.echo(f"saved model to {out}")


@main.command("simplify")
@click.argument("conllu", type=str)
@click.argument("out", type=str)
@_with_options(_shared_options)
@click.option("--lm", type=str, default=None, help="Saved LM path (default: train on input).")
@click.option("--bt", type=str, default=None, help="Phase 2: off, identity, dict, or http.")
@click.option("--pivot", type=str, default=None, help="Pivot language code.")
@click.option("--source-language", "source_language", type=str, default=None)
@click.option("--separator-policy", "separator_policy", type=str, default=None,
              help="strip (separators become commas) or keep.")
@click.option("--bt-dict", "bt_dict", type=str, default=None, help="Dictionary TSV for --bt dict.")
@click.option("--jobs", type=int, default=None, help="Concurrent sentences.")
def cmd_simplify(conllu, out, alpha, tau, lambda_, beam, backend, vectors,
                 embed_url, config_path, lm, bt, pivot, source_language,
                 separator_policy, bt_dict, jobs):
    """Simplify a CoNLL-U corpus; writes one line per sentence plus a
    line-aligned .meta.jsonl sidecar."""
    opts = _resolve(
        {
            "alpha": alpha, "tau": tau, "lambda": lambda_, "beam": beam,
            "backend": backend, "vectors": vectors, "embed_url": embed_url,
            "lm": lm, "bt": bt, "pivot": pivot,
            "source_language": source_language,
            "separator_policy": separator_policy, "bt_dict": bt_dict,
            "jobs": jobs,
        },
        config_path,
    )
    cfg = _decoder_config(opts)
    sentences = _read_sentences(conllu)
    emb = _build_backend(opts)
    model, lm_source = _load_or_train_lm(opts, sentences)
    translator = _build_backtranslator(opts)

    results, errors = simplify_corpus(cfg, sentences, model, emb, jobs=opts["jobs"])
    error_by_index = {e.index: e.message for e in errors}

    lines: list[str] = []
    records: list[dict] = []
    for i, sent in enumerate(sentences):
        res = results[i]
        if res is None:
            lines.append(sent.text)
            records.append({"line": i + 1, "error": error_by_index.get(i, "unknown")})
            continue
        record = {
            "line": i + 1,
            "surface": res.surface,
            "sim": res.score.sim,
            "flu": res.score.flu,
            "depth": res.score.depth,
            "total": res.score.total,
            "reason": res.reason,
            "hypotheses_scored": res.hypotheses_scored,
            "chunks_created": res.chunks_created,
            "chunk_work": list(res.chunk_work),
            "selected": list(res.selected),
            "lm": lm_source,
        }
        text = res.surface
        if translator is not None:
            outcome = translator.batch_round_trip([res.surface])[0]
            record["bt_status"] = outcome.status
            if outcome.status == "ok":
                text = outcome.text
                record["bt_text"] = outcome.text
            else:
                record["bt_error"] = outcome.error
                error_by_index.setdefault(i, outcome.error or "back-translation failed")
        lines.append(text)
        records.append(record)

    try:
        Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        sidecar = Path(str(out) + ".meta.jsonl")
        sidecar.write_text(
            "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        _fail(f"cannot write output: {exc}")
    click.echo(f"wrote {len(lines)} lines to {out} (sidecar {sidecar})")
    if error_by_index:
        click.echo(f"{len(error_by_index)} sentence(s) failed; see sidecar", err=True)
        raise SystemExit(1)


@main.command("evaluate")
@click.argument("orig", type=str)
@click.argument("sys_output", type=str)
@click.argument("refs", type=str, nargs=-1)
@click.option("--backend", type=str, default=None)
@click.option("--vectors", type=str, default=None)
@click.option("--embed-url", "embed_url", type=str, default=None)
@click.option("--config", "config_path", type=str, default=None)
@click.option("--no-sim", is_flag=True, help="Skip the embedding-based SIM column.")
@click.option("--out", type=str, default=None, help="Report JSON path (default: SYS.metrics.json).")
def cmd_evaluate(orig, sys_output, refs, backend, vectors, embed_url,
                 config_path, no_sim, out):
    """Evaluate line-aligned orig/system files against optional references."""
    opts = _resolve(
        {"backend": backend, "vectors": vectors, "embed_url": embed_url}, config_path
    )
    try:
        instances = read_parallel_files(orig, sys_output, refs)
    except OSError as exc:
        _fail(f"cannot read inputs: {exc}")
    except TreepruneError as exc:
        _fail(str(exc))
    emb = None if no_sim else _build_backend(opts)
    try:
        report = evaluate_corpus(instances, backend=emb)
    except TreepruneError as exc:
        _fail(str(exc))
    click.echo(report.format_table())
    out = out or f"{sys_output}.metrics.json"
    try:
        Path(out).write_text(report.to_json() + "\n", encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot write report: {exc}")
    click.echo(f"wrote report to {out}")


@main.command("sweep")
@click.argument("conllu", type=str)
@click.argument("out", type=str)
@_with_options(_shared_options)
@click.option("--lm", type=str, default=None)
@click.option("--taus", type=str, default="0.70,0.80,0.90,0.95", show_default=True,
              help="Comma-separated tau grid.")
@click.option("--lambdas", type=str, default="0.5", show_default=True,
              help="Comma-separated lambda grid.")
@click.option("--refs", type=str, multiple=True,
              help="Reference file(s), line-aligned with the corpus, for SARI.")
@click.option("--jobs", type=int, default=None)
def cmd_sweep(conllu, out, alpha, tau, lambda_, beam, backend, vectors, embed_url,
              config_path, lm, taus, lambdas, refs, jobs):
    """Run the (tau, lambda) controllability grid and report CR/%D/SARI/SIM."""
    opts = _resolve(
        {
            "alpha": alpha, "tau": tau, "lambda": lambda_, "beam": beam,
            "backend": backend, "vectors": vectors, "embed_url": embed_url,
            "lm": lm, "jobs": jobs,
        },
        config_path,
    )
    try:
        tau_grid = [float(v) for v in taus.split(",") if v.strip()]
        lambda_grid = [float(v) for v in lambdas.split(",") if v.strip()]
    except ValueError:
        _fail(f"bad grid values: taus={taus!r} lambdas={lambdas!r}")
    if not tau_grid or not lambda_grid:
        _fail("tau and lambda grids must be non-empty")
    sentences = _read_sentences(conllu)
    ref_lines: list[list[str]] = []
    for path in refs:
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            _fail(f"cannot read {path}: {exc}")
        if len(lines) != len(sentences):
            _fail(f"{path} has {len(lines)} lines, corpus has {len(sentences)}")
        ref_lines.append(lines)
    emb = _build_backend(opts)
    model, _ = _load_or_train_lm(opts, sentences)

    rows = []
    for lam in lambda_grid:
        for t in tau_grid:
            cfg = _decoder_config({**opts, "tau": t, "lambda": lam})
            results, errors = simplify_corpus(cfg, sentences, model, emb, jobs=opts["jobs"])
            if errors:
                _fail(f"sweep cell tau={t} lambda={lam}: {errors[0].message}")
            instances = [
                EvalInstance(
                    original=sent.text,
                    system_output=res.surface,
                    references=tuple(lines[i] for lines in ref_lines),
                )
                for i, (sent, res) in enumerate(zip(sentences, results))
            ]
            report = evaluate_corpus(instances, backend=emb)
            rows.append(
                {
                    "tau": t,
                    "lambda": lam,
                    "cr": report.cr,
                    "deletions": report.deletions,
                    "sari": report.sari,
                    "sim": report.sim,
                }
            )

    header = f"{'tau':>6} {'lambda':>7} {'CR':>8} {'%D':>8} {'SARI':>8} {'SIM':>8}"
    click.echo(header)
    for row in rows:
        sari_cell = "n/a" if row["sari"] is None else f"{row['sari']:.2f}"
        click.echo(
            f"{row['tau']:>6.2f} {row['lambda']:>7.2f} {row['cr']:>8.4f} "
            f"{row['deletions']:>8.4f} {sari_cell:>8} {row['sim']:>8.4f}"
        )
    try:
        Path(out).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot write {out}: {exc}")
    click.echo(f"wrote grid to {out}")


@main.command("analyze")
@click.argument("conllu", type=str)
@click.argument("out", type=str)
@_with_options(_shared_options)
@click.option("--csv", "csv_path", type=str, default=None,
              help="Also write a delimiter-separated dump for plotting.")
def cmd_analyze(conllu, out, alpha, tau, lambda_, beam, backend, vectors,
                embed_url, config_path, csv_path):
    """Leave-one-out importance profile of a CoNLL-U corpus."""
    opts = _resolve(
        {"backend": backend, "vectors": vectors, "embed_url": embed_url}, config_path
    )
    sentences = _read_sentences(conllu)
    emb = _build_backend(opts)
    try:
        profile = aggregate_profile(sentences, emb)
    except (TreepruneError, ValueError) as exc:
        _fail(str(exc))
    text = format_profile(profile)
    try:
        Path(out).write_text(text + "\n", encoding="utf-8")
        if csv_path:
            write_profile_csv(profile, csv_path)
    except OSError as exc:
        _fail(f"cannot write output: {exc}")
    click.echo(text)
    click.echo(f"wrote profile to {out}")


if __name__ == "__main__":
    main()
