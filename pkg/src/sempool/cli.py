"""Command-line surface tying the pipeline together.

Commands:

    sempool pool build      lexicon -> prompt manifest for the extractor
    sempool select          mine negatives from candidate/ID embedding files
    sempool score           per-image group-softmax scores -> CSV
    sempool eval            AUROC / FPR@TPR over score CSVs -> CSV
    sempool theory sweep    ratio sweep (closed form + Monte Carlo) -> CSV
    sempool theory validate run the numeric oracle suite; nonzero on failure

Exit codes: 0 success, 1 validation failure, 2 bad input.  All outputs are
deterministic for a fixed seed; files are written atomically.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio, metrics, pool, scoring, selection, theory
from .errors import SempoolError

__all__ = ["main", "build_parser"]


def _load_run_config(args) -> fileio.RunConfig:
    path = getattr(args, "config", None) or os.environ.get(fileio.CONFIG_ENV_VAR)
    return fileio.load_config(path)


# --------------------------------------------------------------------------
# pool build
# --------------------------------------------------------------------------

def _cmd_pool_build(args) -> int:
    config = _load_run_config(args).with_overrides(
        lexicon=args.lexicon, superclasses=args.superclasses
    )
    if config.lexicon is None:
        raise SempoolError("pool build requires --lexicon (or a config value)")
    lexicon = pool.load_lexicon(config.lexicon)
    superclasses = (
        pool.load_superclasses(config.superclasses)
        if config.superclasses
        else pool.DEFAULT_SUPERCLASSES
    )
    templates = pool.PromptTemplateSet(
        original_prefixes=config.original_prefixes or pool.DEFAULT_ORIGINAL_PREFIXES,
        conjugated_prefixes=config.conjugated_prefixes or pool.DEFAULT_CONJUGATED_PREFIXES,
    )

    if args.kind == "original":
        combined = pool.build_original_pool(lexicon)
    elif args.kind == "conjugated":
        combined = pool.build_conjugated_pool(lexicon, superclasses)
    else:
        combined = pool.build_original_pool(lexicon).merged_with(
            pool.build_conjugated_pool(lexicon, superclasses)
        )

    records = [
        {
            "label": candidate.text,
            "kind": candidate.kind,
            "prompts": pool.expand_prompts(candidate, templates),
        }
        for candidate in combined.candidates
    ]
    fileio.write_jsonl(args.out, records)
    print(f"wrote {len(records)} candidate prompt records to {args.out}")
    return 0


# --------------------------------------------------------------------------
# select / score / eval
# --------------------------------------------------------------------------

def _cmd_select(args) -> int:
    config = _load_run_config(args).with_overrides(
        ratio=args.ratio, percentile=args.percentile, group_count=args.groups
    )
    candidates = fileio.ensemble_matrix(fileio.read_embeddings(args.candidates))
    id_matrix = fileio.ensemble_matrix(fileio.read_embeddings(args.id_labels))
    result = selection.select_negatives(
        candidates,
        id_matrix,
        ratio=config.ratio,
        percentile=config.percentile,
        group_count=config.group_count,
    )
    fileio.write_jsonl(
        args.out,
        [
            {
                "ratio": result.ratio,
                "selected": list(result.selected),
                "distances": list(result.distances),
                "groups": [list(g) for g in result.groups],
            }
        ],
    )
    print(f"selected {len(result.selected)} of {candidates.count} candidates -> {args.out}")
    return 0


def _load_selection(path: str) -> selection.SelectionResult:
    record = fileio.read_jsonl(path)[0]
    return selection.SelectionResult(
        selected=tuple(record["selected"]),
        distances=tuple(record["distances"]),
        ratio=float(record["ratio"]),
        groups=tuple(tuple(g) for g in record["groups"]),
    )


def _cmd_score(args) -> int:
    config = _load_run_config(args).with_overrides(temperature=args.temperature)
    images = fileio.read_embeddings(args.images)
    id_matrix = fileio.ensemble_matrix(fileio.read_embeddings(args.id_labels))
    negatives = fileio.ensemble_matrix(fileio.read_embeddings(args.negatives))
    sel = _load_selection(args.selection)

    neg_rows = negatives.vectors[np.asarray(sel.selected, dtype=np.int64)]
    neg_matrix = selection.EmbeddingMatrix.from_rows(
        neg_rows, [negatives.manifest[i].label for i in sel.selected]
    )
    position = {idx: k for k, idx in enumerate(sel.selected)}
    groups = tuple(tuple(position[i] for i in group) for group in sel.groups)

    scores = scoring.score_images(
        images, id_matrix, neg_matrix, groups, temperature=config.temperature
    )
    fileio.write_csv(
        args.out,
        ["index", "label", "score"],
        (
            (rec.index, rec.label, float(score))
            for rec, score in zip(images.manifest, scores)
        ),
    )
    print(f"scored {images.count} images -> {args.out}")
    return 0


def _read_score_csv(path: str) -> list[float]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    col = header.index("score")
    return [float(line.split(",")[col]) for line in lines[1:] if line.strip()]


def _cmd_eval(args) -> int:
    config = _load_run_config(args).with_overrides(tpr=args.tpr)
    id_scores = _read_score_csv(args.id_scores)
    rows = []
    for ood_path in args.ood_scores:
        ood = _read_score_csv(ood_path)
        rows.append(
            (
                Path(ood_path).stem,
                metrics.auroc(id_scores, ood),
                metrics.fpr_at_tpr(id_scores, ood, config.tpr),
                config.tpr,
            )
        )
    fileio.write_csv(args.out, ["dataset", "auroc", "fpr_at_tpr", "tpr"], rows)
    for name, auc, fpr, tpr in rows:
        print(f"{name}: AUROC={auc:.4f} FPR@{tpr:g}={fpr:.4f}")
    return 0


# --------------------------------------------------------------------------
# theory sweep / validate
# --------------------------------------------------------------------------

def _cmd_theory_sweep(args) -> int:
    out_dist = theory.BetaParams(alpha=args.beta_alpha, beta=args.beta_beta)
    model, affinity = theory.make_ramp_model(
        pool_size=args.pool_size,
        floor=args.base_rate,
        out_dist=out_dist,
        seed=args.seed,
    )
    steps = int(round(1.0 / args.step))
    ratios = [round((k + 1) * args.step, 10) for k in range(steps)]
    points = theory.selection_sweep(
        model, affinity, ratios, tpr=args.tpr, trials=args.trials, seed=args.seed
    )
    fileio.write_csv(
        args.out,
        ["ratio", "closed_fpr", "mc_fpr"],
        ((p.ratio, p.closed_fpr, p.mc_fpr) for p in points),
    )
    ramp = theory.ActivationRamp.linear(args.base_rate, out_dist.mean)
    predicted = theory.find_critical_ratio(ramp)
    best = min(points, key=lambda p: p.closed_fpr)
    print(f"predicted critical ratio r0 = {predicted:.9f}")
    print(f"grid argmin ratio = {best.ratio:g} (closed-form FPR {best.closed_fpr:.3e})")
    print(f"wrote {len(points)} sweep rows to {args.out}")
    return 0


def _check(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def _cmd_theory_validate(args) -> int:
    rng = np.random.default_rng(args.seed)
    all_ok = True

    probs = rng.uniform(0.05, 0.5, size=500)
    pmf = theory.poisson_binomial_pmf(probs)
    err = abs(float(pmf.sum()) - 1.0)
    all_ok &= _check("pmf normalization", err <= 1e-12, f"|sum - 1| = {err:.2e}")

    worst_gap = max(
        theory.clt_convergence_gap(rng.uniform(0.05, 0.5, size=2000)) for _ in range(3)
    )
    all_ok &= _check(
        "normal-limit gap (m=2000)", worst_gap <= 0.01, f"max gap = {worst_gap:.5f}"
    )

    ys = np.linspace(-0.999999, 0.999999, 20001)
    round_trip = max(abs(theory.erf(theory.erfinv(float(y))) - float(y)) for y in ys)
    all_ok &= _check(
        "erf/erfinv round trip", round_trip <= 1e-12, f"max |erf(erfinv(y)) - y| = {round_trip:.2e}"
    )

    ramp = theory.ActivationRamp.linear(0.0, 0.3)
    out_variance, pool_size = 0.01, 10_000
    worst_rel = 0.0
    step = 1e-6
    for ratio in np.linspace(0.02, 0.998, 25):
        ratio = float(ratio)
        analytic = theory.fpr_curve_slope(ratio, ramp, out_variance, pool_size)
        hi = theory.fpr_curve_point(ratio + step, ramp, out_variance, pool_size).fpr
        lo = theory.fpr_curve_point(ratio - step, ramp, out_variance, pool_size).fpr
        numeric = (hi - lo) / (2.0 * step)
        worst_rel = max(worst_rel, abs(analytic - numeric) / max(1.0, abs(analytic)))
    all_ok &= _check(
        "curve derivative vs finite difference", worst_rel <= 1e-4,
        f"max rel err = {worst_rel:.2e}",
    )

    r0 = theory.find_critical_ratio(ramp)
    print(f"r0 = {r0:.9f}")
    all_ok &= _check(
        "critical ratio (linear ramp)", abs(r0 - 1.0 / 3.0) <= 1e-9,
        f"|r0 - 1/3| = {abs(r0 - 1.0 / 3.0):.2e}",
    )
    quad = theory.ActivationRamp.quadratic_concave(0.0, 0.3)
    r0q = theory.find_critical_ratio(quad)
    all_ok &= _check(
        "critical ratio (concave ramp)", abs(r0q - 0.2) <= 1e-9,
        f"|r0 - 0.2| = {abs(r0q - 0.2):.2e}",
    )

    model = theory.ActivationModel(
        in_probs=rng.uniform(0.05, 0.2, size=300),
        out_probs=rng.uniform(0.2, 0.5, size=300),
    )
    sel = list(range(300))
    closed = theory.closed_form_fpr(model.in_stats(sel), model.out_stats(sel), 300, 0.5)
    mc = theory.monte_carlo_fpr(model, sel, 0.5, trials=50_000, seed=args.seed)
    gap = abs(closed - mc)
    all_ok &= _check(
        "closed form vs Monte Carlo", gap <= 0.01, f"|closed - mc| = {gap:.4f}"
    )

    return 0 if all_ok else 1


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sempool", description=__doc__)
    parser.add_argument(
        "--config",
        help=f"config file (key=value); defaults to ${fileio.CONFIG_ENV_VAR} if set",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    pool_parser = sub.add_parser("pool", help="semantic pool construction")
    pool_sub = pool_parser.add_subparsers(dest="command", required=True)
    build = pool_sub.add_parser("build", help="emit the prompt manifest for the extractor")
    build.add_argument("--lexicon", help="word<TAB>pos lexicon file")
    build.add_argument("--superclasses", help="one superclass name per line")
    build.add_argument(
        "--kind", choices=["original", "conjugated", "both"], default="both"
    )
    build.add_argument("--out", required=True)
    build.set_defaults(func=_cmd_pool_build)

    sel = sub.add_parser("select", help="mine negative labels from embeddings")
    sel.add_argument("--candidates", required=True, help="candidate embedding file")
    sel.add_argument("--id-labels", required=True, help="ID label embedding file")
    sel.add_argument("--ratio", type=float)
    sel.add_argument("--percentile", type=float)
    sel.add_argument("--groups", type=int)
    sel.add_argument("--out", required=True)
    sel.set_defaults(func=_cmd_select)

    score = sub.add_parser("score", help="group-softmax scores for an image set")
    score.add_argument("--images", required=True)
    score.add_argument("--id-labels", required=True)
    score.add_argument("--negatives", required=True, help="candidate embedding file")
    score.add_argument("--selection", required=True, help="output of `sempool select`")
    score.add_argument("--temperature", type=float)
    score.add_argument("--out", required=True)
    score.set_defaults(func=_cmd_score)

    ev = sub.add_parser("eval", help="AUROC / FPR@TPR over score CSVs")
    ev.add_argument("--id-scores", required=True)
    ev.add_argument("--ood-scores", required=True, nargs="+")
    ev.add_argument("--tpr", type=float)
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=_cmd_eval)

    theory_parser = sub.add_parser("theory", help="statistical-model tools")
    theory_sub = theory_parser.add_subparsers(dest="command", required=True)
    sweep = theory_sub.add_parser("sweep", help="ratio sweep on a synthetic model")
    sweep.add_argument("--pool-size", type=int, default=5000)
    sweep.add_argument("--base-rate", type=float, default=0.01,
                       help="ID-activation rate of the most dissimilar label")
    sweep.add_argument("--beta-alpha", type=float, default=3.0)
    sweep.add_argument("--beta-beta", type=float, default=7.0)
    sweep.add_argument("--step", type=float, default=0.02)
    sweep.add_argument("--tpr", type=float, default=0.5)
    sweep.add_argument("--trials", type=int, default=theory.MIN_TRIALS)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(func=_cmd_theory_sweep)

    validate = theory_sub.add_parser("validate", help="run the numeric oracle suite")
    validate.add_argument("--seed", type=int, default=0)
    validate.set_defaults(func=_cmd_theory_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SempoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
