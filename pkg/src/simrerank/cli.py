"""Command-line interface.

Subcommands: rerank (distances or embeddings in, re-ranked distances and
rankings out), eval (multi-shot trial evaluation), sweep (parameter grids),
synth (write a generated dataset). Outputs are byte-reproducible for fixed
flags and seed; SIM_THREADS only changes how many workers compute, never
any output byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import matrixio
from .distance import pairwise_l2, self_distances, unit_normalize
from .evaluation import multi_shot_trials
from .matrixio import FormatError
from .pipeline import VARIANTS, run_sim, run_variant
from .synthetic import SynthConfig, generate
from .types import DistanceMatrix, Modality, SimParams, ValidationError


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.01,
                   help="gallery edge scale in [0,1] (default 0.01)")
    p.add_argument("--bigk", type=int, default=9,
                   help="number of cheapest paths averaged (default 9)")
    p.add_argument("--alpha", type=float, default=0.3,
                   help="blend weight of the graph distance in [0,1] (default 0.3)")
    p.add_argument("--kq", type=int, default=10,
                   help="cross-modality neighbor count (default 10, this tool's choice)")
    p.add_argument("--kg", type=int, default=10,
                   help="intra-modality reciprocal neighbor count (default 10, this tool's choice)")
    p.add_argument("--prune-k", type=int, default=None,
                   help="gallery adjacency size (default: same as --bigk)")
    p.add_argument("--expand-reciprocal", action="store_true",
                   help="apply half-k expansion to the reciprocal sets")
    p.add_argument("--normalize", action="store_true",
                   help="unit-L2 normalize embeddings at ingestion")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dqg", help="query-gallery distance matrix (SIMM or CSV)")
    p.add_argument("--dgg", help="gallery-gallery distance matrix (SIMM or CSV)")
    p.add_argument("--query-emb", help="query embeddings matrix")
    p.add_argument("--gallery-emb", help="gallery embeddings matrix")
    p.add_argument("--registry-q", help="query registry sidecar")
    p.add_argument("--registry-g", help="gallery registry sidecar")


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synth", action="store_true",
                   help="generate a synthetic dataset instead of reading files")
    p.add_argument("--synth-identities", type=int, default=40)
    p.add_argument("--synth-images", type=int, default=10)
    p.add_argument("--synth-dim", type=int, default=32)
    p.add_argument("--synth-spread", type=float, default=1.0)
    p.add_argument("--synth-offset", type=float, default=6.0)


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=10,
                   help="number of sampled-gallery trials (default 10)")
    p.add_argument("--shot", type=int, default=10,
                   help="gallery images sampled per identity (default 10)")
    p.add_argument("--full-gallery", action="store_true",
                   help="single trial over the full gallery, no sampling")
    p.add_argument("--max-rank", type=int, default=20)
    p.add_argument("--variant", choices=VARIANTS, default="sim")


def _params(args: argparse.Namespace) -> SimParams:
    return SimParams(
        lam=args.lam,
        big_k=args.bigk,
        alpha=args.alpha,
        k_q=args.kq,
        k_g=args.kg,
        prune_k=args.prune_k,
        expand_reciprocal=args.expand_reciprocal,
    )


def _synth_config(args: argparse.Namespace) -> SynthConfig:
    return SynthConfig(
        n_identities=args.synth_identities,
        images_per_identity=args.synth_images,
        dim=args.synth_dim,
        cluster_spread=args.synth_spread,
        modality_offset=args.synth_offset,
        seed=args.seed,
    )


def _load_distances(args: argparse.Namespace) -> tuple[DistanceMatrix, DistanceMatrix]:
    """Distance matrices from --dqg/--dgg or computed from embeddings."""
    if args.dqg or args.dgg:
        if not (args.dqg and args.dgg):
            raise ValidationError("--dqg and --dgg must be supplied together")
        dqg_values = matrixio.load_matrix(args.dqg)
        dgg_values = matrixio.load_matrix(args.dgg)
        if args.registry_g:
            gallery = matrixio.read_registry(args.registry_g)
        else:
            gallery = matrixio.placeholder_registry(dgg_values.shape[0], Modality.RGB)
        if args.registry_q:
            queries = matrixio.read_registry(args.registry_q)
        else:
            queries = matrixio.placeholder_registry(dqg_values.shape[0], Modality.IR)
        if dgg_values.shape[0] != dqg_values.shape[1]:
            raise ValidationError(
                f"--dqg has {dqg_values.shape[1]} columns but --dgg is "
                f"{dgg_values.shape[0]} square"
            )
        dgg = DistanceMatrix.from_square(dgg_values, gallery)
        dqg = DistanceMatrix(queries, gallery, dqg_values)
        return dqg, dgg
    if args.query_emb and args.gallery_emb:
        query, gallery = _load_embedding_pair(args)
        return pairwise_l2(query, gallery), self_distances(gallery)
    raise ValidationError("supply --dqg/--dgg or --query-emb/--gallery-emb")


def _load_embedding_pair(args: argparse.Namespace):
    query = matrixio.load_embeddings(args.query_emb, args.registry_q, Modality.IR)
    gallery = matrixio.load_embeddings(args.gallery_emb, args.registry_g, Modality.RGB)
    if args.normalize:
        query = unit_normalize(query)
        gallery = unit_normalize(gallery)
    return query, gallery


def _eval_dataset(args: argparse.Namespace):
    if args.synth:
        return generate(_synth_config(args))
    if not (args.query_emb and args.gallery_emb):
        raise ValidationError(
            "evaluation needs --synth or --query-emb/--gallery-emb with registries"
        )
    if not (args.registry_q and args.registry_g):
        raise ValidationError("evaluation needs --registry-q and --registry-g")
    return _load_embedding_pair(args)


def _cmd_rerank(args: argparse.Namespace) -> int:
    dqg, dgg = _load_distances(args)
    result = run_sim(dqg, dgg, _params(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrixio.write_matrix(out / "d_sim.simm", result.d_sim)
    matrixio.write_rankings(out / "rankings.txt", result.rankings)
    print(f"wrote {out / 'd_sim.simm'} and {out / 'rankings.txt'}")
    return 0


def _run_eval(args: argparse.Namespace, params: SimParams):
    query, gallery = _eval_dataset(args)
    return multi_shot_trials(
        query,
        gallery,
        params,
        variant=args.variant,
        trials=args.trials,
        shot=args.shot,
        seed=args.seed,
        max_rank=args.max_rank,
        full_gallery=args.full_gallery,
    )


def _cmd_eval(args: argparse.Namespace) -> int:
    report = _run_eval(args, _params(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrixio.write_report(out / "report.txt", report)
    sys.stdout.write(matrixio.format_report(report))
    return 0


def _parse_grid(raw: str | None, flag: str) -> list[float]:
    if raw is None:
        return []
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{flag}: expected a comma-separated number list")


def _grid_params(args: argparse.Namespace, **override) -> SimParams:
    # prune_k passes through unresolved so it can track a swept bigK
    kw = dict(
        lam=args.lam, big_k=args.bigk, alpha=args.alpha, k_q=args.kq,
        k_g=args.kg, prune_k=args.prune_k,
        expand_reciprocal=args.expand_reciprocal,
    )
    kw.update(override)
    return SimParams(**kw)


def _cmd_sweep(args: argparse.Namespace) -> int:
    grid: list[tuple[str, float, SimParams]] = []
    for value in _parse_grid(args.grid_lambda, "--grid-lambda"):
        grid.append(("lambda", value, _grid_params(args, lam=value)))
    for value in _parse_grid(args.grid_alpha, "--grid-alpha"):
        grid.append(("alpha", value, _grid_params(args, alpha=value)))
    for value in _parse_grid(args.grid_bigk, "--grid-bigk"):
        grid.append(("bigK", value, _grid_params(args, big_k=int(value))))
    if not grid:
        raise ValidationError("empty sweep grid: pass at least one --grid-* flag")
    query, gallery = _eval_dataset(args)
    rows = []
    for param, value, p in grid:
        report = multi_shot_trials(
            query, gallery, p,
            variant=args.variant, trials=args.trials, shot=args.shot,
            seed=args.seed, max_rank=args.max_rank, full_gallery=args.full_gallery,
        )
        rank1 = float(report.cmc[0]) if len(report.cmc) else 0.0
        rows.append((param, value, report.map, rank1))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrixio.write_sweep_csv(out / "sweep.csv", rows)
    sys.stdout.write("param,value,map,rank1\n")
    for param, value, map_, rank1 in rows:
        sys.stdout.write(f"{param},{value:g},{map_:.6f},{rank1:.6f}\n")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    query, gallery = generate(_synth_config(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrixio.write_matrix(out / "query_emb.simm", query.vectors)
    matrixio.write_matrix(out / "gallery_emb.simm", gallery.vectors)
    matrixio.write_registry(out / "registry_q.txt", query.samples)
    matrixio.write_registry(out / "registry_g.txt", gallery.samples)
    print(f"wrote dataset under {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simrerank",
        description="Cross-modality retrieval re-ranking and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rerank_p = sub.add_parser("rerank", help="re-rank queries against a gallery")
    _add_data_flags(rerank_p)
    _add_param_flags(rerank_p)
    rerank_p.add_argument("--seed", type=int, default=0)
    rerank_p.add_argument("--out-dir", default=".")
    rerank_p.set_defaults(fn=_cmd_rerank)

    eval_p = sub.add_parser("eval", help="multi-shot trial evaluation")
    _add_data_flags(eval_p)
    _add_param_flags(eval_p)
    _add_synth_flags(eval_p)
    _add_eval_flags(eval_p)
    eval_p.add_argument("--seed", type=int, default=0)
    eval_p.add_argument("--out-dir", default=".")
    eval_p.set_defaults(fn=_cmd_eval)

    sweep_p = sub.add_parser("sweep", help="evaluate a parameter grid")
    _add_data_flags(sweep_p)
    _add_param_flags(sweep_p)
    _add_synth_flags(sweep_p)
    _add_eval_flags(sweep_p)
    sweep_p.add_argument("--grid-lambda", help="comma list of lambda values")
    sweep_p.add_argument("--grid-alpha", help="comma list of alpha values")
    sweep_p.add_argument("--grid-bigk", help="comma list of bigK values")
    sweep_p.add_argument("--seed", type=int, default=0)
    sweep_p.add_argument("--out-dir", default=".")
    sweep_p.set_defaults(fn=_cmd_sweep)

    synth_p = sub.add_parser("synth", help="write a generated dataset")
    _add_synth_flags(synth_p)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--out-dir", default=".")
    synth_p.set_defaults(fn=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (FormatError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
