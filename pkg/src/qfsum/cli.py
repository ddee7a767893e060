"""Command-line entry point: summarize, tune, featurize, rouge."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import be as be_mod
from .corpus import load_cluster, load_stopwords, Lexicon
from .lexrank import lexrank_scores
from .lexsim import Thesaurus
from .rankers import N_FEATURES, load_weights, save_weights, write_features_tsv
from .rouge import RougeConfig, evaluate, read_summary_dirs
from .summarizer import RANKERS, PipelineConfig, Resources, featurize, run_system, tune

log = logging.getLogger("qfsum")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with pipeline settings; flags override it")
    p.add_argument("--system", choices=["LEX", "LEXSEM", "SYN", "COS", "SYS1", "SYS2", "ALL", "BASE"])
    p.add_argument("--ranker", choices=RANKERS)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--d", type=float, help="LexRank relevance bias")
    p.add_argument("--eps", type=float, help="LexRank convergence threshold")
    p.add_argument("--redundancy", type=float, help="BE overlap threshold R")
    p.add_argument("--budget", type=int, help="summary length in words")
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--dep-thesaurus", type=Path)
    p.add_argument("--prox-thesaurus", type=Path)
    p.add_argument("--stopwords", type=Path)


def _config(args: argparse.Namespace, **extra) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config is not None:
        cfg = PipelineConfig.from_dict(json.loads(args.config.read_text(encoding="utf-8")))
    flags = {k: getattr(args, k, None) for k in
             ("system", "ranker", "k", "seed", "tol", "max_iter", "d", "eps", "redundancy", "budget")}
    return cfg.updated(**flags, **extra)


def _resources(args: argparse.Namespace) -> Resources:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else load_stopwords()
    return Resources(
        lexicon=Lexicon.from_jsonl(args.lexicon) if args.lexicon else Lexicon(),
        dep_thesaurus=Thesaurus.from_jsonl(args.dep_thesaurus) if args.dep_thesaurus else None,
        prox_thesaurus=Thesaurus.from_jsonl(args.prox_thesaurus) if args.prox_thesaurus else None,
        stopwords=stopwords,
    )


def cmd_summarize(args: argparse.Namespace) -> int:
    cfg = _config(args)
    res = _resources(args)
    weights = load_weights(args.weights) if args.weights else None
    args.out.mkdir(parents=True, exist_ok=True)
    for manifest in args.manifest:
        cluster = load_cluster(manifest, res.stopwords)
        if args.be_dump:
            pool = [b for s in cluster.sentences for b in be_mod.extract_bes(s, res.stopwords)]
            be_mod.write_be_dump(args.be_dump, be_mod.rank_bes(pool))
        if args.matrix_dump:
            lexrank_scores(cluster.sentences, list(cluster.query), cfg.d, cfg.eps, cfg.lexrank_max_iter,
                           matrix_dump=args.matrix_dump)
        draft = run_system(cluster, cfg, weights, res)
        (args.out / f"{cluster.topic_id}.txt").write_text(draft.text, encoding="utf-8")
        log.info("%s: %d sentences, %d words", cluster.topic_id, len(draft.sentences), draft.word_count)
    return 0


def _references(root: Path) -> dict[str, list[str]]:
    refs = {}
    for topic_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        texts = [p.read_text(encoding="utf-8") for p in sorted(topic_dir.glob("*.txt"))]
        if texts:
            refs[topic_dir.name] = texts
    return refs


def cmd_tune(args: argparse.Namespace) -> int:
    cfg = _config(args, step=args.step, init_weight=args.init, max_climb=args.max_climb)
    res = _resources(args)
    clusters = [load_cluster(m, res.stopwords) for m in args.train_manifests]
    result = tune(clusters, _references(args.references), cfg, res)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_weights(args.out, result.weights)
    log.info("feedback %.6f -> %.6f after %d evaluations", result.initial_score, result.score, result.evaluations)
    return 0


def cmd_featurize(args: argparse.Namespace) -> int:
    cfg = _config(args)
    res = _resources(args)
    cluster = load_cluster(args.manifest, res.stopwords)
    fm = featurize(cluster, res, cfg)
    matrix = fm.raw if args.raw else fm.normalized
    assert matrix.shape[1] == N_FEATURES
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_features_tsv(args.out, fm.ids, matrix)
    if fm.unavailable:
        log.warning("annotation missing; zero columns: %s", ", ".join(fm.unavailable))
    return 0


def cmd_rouge(args: argparse.Namespace) -> int:
    cfg = RougeConfig.from_json(args.config) if args.config else RougeConfig()
    cands, refs = read_summary_dirs(args.candidates, args.references)
    report = evaluate(cands, refs, cfg)
    text = report.to_json() + "\n"
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfsum", description="Query-focused multi-document summarization")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="write one summary per cluster manifest")
    p.add_argument("--manifest", type=Path, nargs="+", required=True)
    p.add_argument("--weights", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--be-dump", type=Path, help="write the ranked BE table (TSV)")
    p.add_argument("--matrix-dump", type=Path, help="write the LexRank transition matrix (TSV)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("tune", help="learn feature weights by coordinate hill climbing")
    p.add_argument("--train-manifests", type=Path, nargs="+", required=True)
    p.add_argument("--references", type=Path, required=True, help="directory of <topic>/<ref-id>.txt")
    p.add_argument("--step", type=float)
    p.add_argument("--init", type=float)
    p.add_argument("--init-weight", dest="init", type=float)
    p.add_argument("--max-climb", type=float)
    p.add_argument("--out", type=Path, required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("featurize", help="write the 18-column feature matrix")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--raw", action="store_true", help="skip column-max normalization")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("rouge", help="score candidate summaries against references")
    p.add_argument("--candidates", type=Path, required=True, help="directory of <topic>.txt")
    p.add_argument("--references", type=Path, required=True, help="directory of <topic>/<ref-id>.txt")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_rouge)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
