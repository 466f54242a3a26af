"""Command-line entry point for reproducible desk-scale experiments.

Subcommands: gen-data, certify, attack-proj, attack-bb, rs-curve,
sphere, cube, concentration. Every command reads/writes plain CSV
(floats serialized with repr so reruns are byte-identical), drops a
manifest.json with the resolved configuration and per-output sha256
checksums, and optionally renders an SVG plot of its curve table.
Datasets and dictionaries travel as CSV with a `label,x0,...` header;
certify can also ingest IDX image/label pairs.

Exit codes: 0 success, 1 runtime failure (solver, I/O while writing),
2 usage error (bad flags, malformed or empty inputs). A --config file
is a flat JSON object mirroring the long-form flags; explicit flags
override it.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import (
    CubeExampleParams,
    SphereExampleParams,
    cube_empirical_risk,
    cube_risk_bound,
    empirical_concentration_curve,
    sphere_risk_curve,
)
from .attacks import AttackConfig, boundary_attack, pgd_in_certificate
from .bpdn import DEFAULT_TAU, DEFAULT_TOL
from .certificate import to_json as certificate_to_json
from .classifier import AggregationRule, predict_dual, score_nearest_subspace
from .data import (
    IMAGE_SIDE,
    Dictionary,
    LabeledDataset,
    SubspaceModel,
    build_dictionary,
    generate_uos,
    load_idx_images,
)
from .errors import ArgumentError, ModelError, ParseError, PolycertError
from .numerics import spawn_seeds
from .smoothing import SmoothingConfig, certified_accuracy_curve, make_dual_base, smooth_predict

_RULES = {
    "majority": AggregationRule.MAJORITY,
    "unanimous": AggregationRule.UNANIMOUS_OR_ABSTAIN,
}


@dataclass
class ExperimentConfig:
    """Resolved parameters of one command invocation.

    ``params`` is a flat JSON-serializable mapping (what the manifest
    snapshots); loading the same mapping back through --config
    reproduces the run.
    """

    command: str
    params: dict

    def to_json(self) -> str:
        return json.dumps(
            {"command": self.command, "params": self.params}, sort_keys=True
        )


def _config_snapshot(args) -> ExperimentConfig:
    skip = {"func", "config", "command"}
    params = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        params[key] = str(value) if isinstance(value, Path) else value
    return ExperimentConfig(args.command, params)


class _RunWriter:
    """Collects outputs and writes the manifest atomically at the end."""

    def __init__(self, args):
        self.out_dir = Path(args.out)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = _config_snapshot(args)
        self.outputs: dict[str, str] = {}
        self.started = time.perf_counter()

    def path(self, name: str) -> Path:
        full = self.out_dir / name
        full.parent.mkdir(parents=True, exist_ok=True)
        return full

    def record(self, name: str) -> None:
        digest = hashlib.sha256(self.path(name).read_bytes()).hexdigest()
        self.outputs[name] = digest

    def write_csv(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self.record(name)

    def write_text(self, name: str, text: str) -> None:
        self.path(name).write_text(text)
        self.record(name)

    def finish(self) -> None:
        manifest = {
            "command": self.config.command,
            "config": self.config.params,
            "outputs": self.outputs,
            "timings": {"total_s": time.perf_counter() - self.started},
        }
        tmp = self.out_dir / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, sort_keys=True, indent=1))
        os.replace(tmp, self.out_dir / "manifest.json")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_float_grid(text: str) -> list[float]:
    try:
        grid = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ArgumentError(f"bad grid value: {exc}") from None
    if not grid:
        raise ArgumentError("grid is empty")
    return grid


def _parse_int_grid(text: str) -> list[int]:
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ArgumentError(f"bad grid value: {exc}") from None
    if not grid:
        raise ArgumentError("grid is empty")
    return grid


def _require_file(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ArgumentError(f"input file not found: {p}")
    return p


def _read_points_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if not header or header[0] != "label":
            raise ParseError(f"{path}: expected a 'label,x0,...' header")
        dim = len(header) - 1
        if dim < 1:
            raise ParseError(f"{path}: no coordinate columns")
        labels = []
        coords = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(row)}"
                )
            try:
                labels.append(int(row[0]))
                coords.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    points = (
        np.array(coords, dtype=float).T if coords else np.zeros((dim, 0))
    )
    return points, np.array(labels, dtype=np.int64)


def read_dataset_csv(path) -> LabeledDataset:
    points, labels = _read_points_csv(_require_file(path))
    return LabeledDataset(points, labels)


def read_dictionary_csv(path) -> Dictionary:
    if not path:
        raise ArgumentError("--dict is required")
    points, labels = _read_points_csv(_require_file(path))
    if points.shape[1] == 0:
        raise ArgumentError(f"dictionary is empty: {path}")
    return Dictionary(points, labels)


def dataset_rows(dataset: LabeledDataset):
    for i in range(dataset.count):
        yield [int(dataset.labels[i])] + [float(v) for v in dataset.point(i)]


def _dataset_header(dim: int) -> list[str]:
    return ["label"] + [f"x{i}" for i in range(dim)]


def _load_dataset(args) -> LabeledDataset:
    if getattr(args, "idx_images", None):
        if not getattr(args, "idx_labels", None):
            raise ArgumentError("--idx-images requires --idx-labels")
        ds = load_idx_images(
            _require_file(args.idx_images), _require_file(args.idx_labels),
            side=args.image_side,
        )
    else:
        if not args.data:
            raise ArgumentError("--data is required")
        ds = read_dataset_csv(args.data)
    if ds.count == 0:
        raise ArgumentError("dataset has no points")
    if args.limit and args.limit > 0:
        ds = ds.subset(range(min(args.limit, ds.count)))
    return ds


def _map_indexed(fn, count: int, workers: int) -> list:
    """fn(i) for i in range(count), results in input order."""
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _subspaces_from_dictionary(dictionary: Dictionary, sub_dim: int):
    """Per-class orthonormal bases via SVD of each class's atoms.

    Returns the model plus the sorted class ids (prediction index k
    maps to class_ids[k-1]).
    """
    class_ids = sorted(int(k) for k in np.unique(dictionary.labels))
    bases = []
    for k in class_ids:
        atoms = dictionary.S[:, dictionary.labels == k]
        rank = min(sub_dim, atoms.shape[1], dictionary.dim - 1)
        U, _, _ = np.linalg.svd(atoms, full_matrices=False)
        bases.append(U[:, :rank])
    return SubspaceModel(bases, 0.0), class_ids


def _nearest_label_fn(model: SubspaceModel, class_ids):
    def label(z):
        scores = score_nearest_subspace(model, z)
        return class_ids[int(np.argmax(scores))]

    return label


def _maybe_plot(args, run: _RunWriter, name: str, series, xlabel: str, ylabel: str):
    if not getattr(args, "plot", False):
        return
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "polycert"
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for xs, ys, label in series:
        ax.plot(xs, ys, marker="o", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(run.path(name), format="svg", metadata={"Date": None})
    plt.close(fig)
    run.record(name)


def cmd_gen_data(args) -> int:
    run = _RunWriter(args)
    data_seed, pick_seed = spawn_seeds(args.seed, 2)
    # dictionary atoms must lie near the same subspaces as the evaluation
    # points, so draw one dataset and split it into disjoint halves
    per_pool = args.dict_size if args.dict_size else 0
    total = args.per_class + per_pool
    full, _ = generate_uos(
        args.dim, args.classes, args.subspace_dim, total, args.gamma, data_seed
    )
    eval_idx, pool_idx = [], []
    for k in range(args.classes):
        start = k * total
        eval_idx.extend(range(start, start + args.per_class))
        pool_idx.extend(range(start + args.per_class, start + total))
    dataset = full.subset(eval_idx)
    run.write_csv("points.csv", _dataset_header(dataset.dim), dataset_rows(dataset))
    if args.dict_size:
        dictionary = build_dictionary(
            full.subset(pool_idx), args.dict_size, pick_seed,
            balanced=args.balanced,
        )
        atoms = LabeledDataset(dictionary.S, dictionary.labels)
        run.write_csv(
            "dictionary.csv", _dataset_header(atoms.dim), dataset_rows(atoms)
        )
    run.finish()
    print(f"wrote {dataset.count} points in dimension {dataset.dim} to {run.out_dir}")
    return 0


def cmd_certify(args) -> int:
    run = _RunWriter(args)
    dataset = _load_dataset(args)
    dictionary = read_dictionary_csv(args.dict)
    rule = _RULES[args.rule]

    def work(i):
        try:
            return predict_dual(
                dictionary, dataset.point(i), args.lam, rule=rule,
                tol=args.tol, tau=args.tau,
            )
        except ModelError:
            # degenerate active set: the label is still well defined,
            # only the certificate is refused
            return predict_dual(
                dictionary, dataset.point(i), args.lam, rule=rule,
                tol=args.tol, tau=args.tau, with_certificate=False,
            )

    results = _map_indexed(work, dataset.count, args.workers)

    rows = []
    correct = 0
    abstained = 0
    active_total = 0
    for i, (pred, cert) in enumerate(results):
        truth = int(dataset.labels[i])
        cert_name = ""
        if cert is not None:
            cert_name = f"certificates/point_{i:05d}.json"
            run.write_text(cert_name, certificate_to_json(cert))
        rows.append(
            [i, truth, pred.label, int(pred.label is None),
             pred.active_size, cert_name]
        )
        correct += pred.label == truth
        abstained += pred.label is None
        active_total += pred.active_size
    n = dataset.count
    run.write_csv(
        "predictions.csv",
        ["index", "true_label", "predicted", "abstain", "active_size", "certificate"],
        rows,
    )
    run.write_csv(
        "summary.csv",
        ["n_points", "clean_accuracy", "abstain_rate", "mean_active_size"],
        [[n, correct / n, abstained / n, active_total / n]],
    )
    run.finish()
    print(f"certified {n} points: accuracy {correct / n:.4f}, "
          f"abstain {abstained / n:.4f}")
    return 0


def _make_target(args, dictionary, point_seed):
    kind = args.target
    if kind == "dual":
        base = make_dual_base(dictionary, args.lam)
        return base, None
    model, class_ids = _subspaces_from_dictionary(dictionary, args.subspace_dim)
    base = _nearest_label_fn(model, class_ids)
    if kind == "nearest":
        consecutive = class_ids == list(range(1, len(class_ids) + 1))
        scores = (lambda z: score_nearest_subspace(model, z)) if consecutive else None
        return base, scores
    # smoothed variants: a fixed noise seed per attacked point keeps the
    # target a deterministic function during that point's attack
    inner = make_dual_base(dictionary, args.lam) if kind == "smoothed-dual" else base
    cfg = SmoothingConfig(
        sigma=args.smooth_sigma, n0=args.smooth_n0, n=args.smooth_n0,
        confidence=0.999, seed=point_seed,
    )
    return (lambda z: smooth_predict(inner, z, cfg)), None


def cmd_attack_proj(args) -> int:
    run = _RunWriter(args)
    dataset = _load_dataset(args)
    dictionary = read_dictionary_csv(args.dict)
    grid = args.eps_grid
    point_seeds = spawn_seeds(args.seed, dataset.count)

    dual_base = make_dual_base(dictionary, args.lam)

    def work(i):
        x = dataset.point(i)
        truth = int(dataset.labels[i])
        target, scores = _make_target(args, dictionary, point_seeds[i])
        dual_ok = dual_base(x) == truth
        try:
            _, cert = predict_dual(dictionary, x, args.lam, tol=args.tol, tau=args.tau)
        except ModelError:
            cert = None
        attack_seeds = spawn_seeds(point_seeds[i], len(grid))
        flags = []
        transcripts = []
        for j, eps in enumerate(grid):
            if cert is None:
                flags.append(target(x) == truth)
                continue
            res = pgd_in_certificate(
                target, x, truth, cert,
                AttackConfig(epsilon=eps, steps=args.steps,
                             step_size=args.step_size, seed=attack_seeds[j]),
                scores=scores,
            )
            flags.append(not res.success)
            for step, l2, label in res.steps:
                transcripts.append([eps, i, step, l2, label])
        return dual_ok, flags, transcripts

    results = _map_indexed(work, dataset.count, args.workers)
    n = dataset.count
    dual_acc = sum(r[0] for r in results) / n
    rows = []
    for j, eps in enumerate(grid):
        robust = sum(r[1][j] for r in results) / n
        rows.append([eps, robust, dual_acc, n])
    run.write_csv(
        "attack_proj.csv",
        ["epsilon", "robust_accuracy", "dual_clean_accuracy", "n_points"],
        rows,
    )
    run.write_csv(
        "transcripts_proj.csv",
        ["epsilon", "point", "step", "l2", "label"],
        [t for r in results for t in r[2]],
    )
    _maybe_plot(
        args, run, "attack_proj.svg",
        [(grid, [r[1] for r in rows], "attacked target"),
         (grid, [r[2] for r in rows], "dual classifier")],
        "epsilon", "robust accuracy",
    )
    run.finish()
    print(f"projection attack on {n} points across {len(grid)} budgets")
    return 0


def cmd_attack_bb(args) -> int:
    run = _RunWriter(args)
    dataset = _load_dataset(args)
    dictionary = read_dictionary_csv(args.dict)
    grid = args.eps_grid
    point_seeds = spawn_seeds(args.seed, dataset.count)

    def work(i):
        x = dataset.point(i)
        truth = int(dataset.labels[i])
        target, _ = _make_target(args, dictionary, point_seeds[i])
        clean = target(x)
        res = boundary_attack(
            target, x, truth,
            AttackConfig(epsilon=max(grid), steps=args.steps,
                         step_size=args.step_size, seed=point_seeds[i]),
            init_draws=args.init_draws,
        )
        return truth, clean, res

    results = _map_indexed(work, dataset.count, args.workers)
    n = dataset.count

    point_rows = []
    transcripts = []
    for i, (truth, clean, res) in enumerate(results):
        point_rows.append([i, truth, clean, int(res.success), res.final_l2])
        for step, l2, label in res.steps:
            transcripts.append([i, step, l2, label])
    run.write_csv(
        "boundary.csv",
        ["point", "true_label", "clean_predicted", "success", "final_l2"],
        point_rows,
    )
    run.write_csv(
        "transcripts_bb.csv", ["point", "step", "l2", "label"], transcripts
    )

    rows = []
    for eps in grid:
        at_risk = sum(
            1 for truth, clean, res in results
            if clean != truth or (res.success and res.final_l2 <= eps + 1e-9)
        )
        rows.append([eps, 1.0 - at_risk / n, n])
    run.write_csv(
        "attack_bb.csv", ["epsilon", "robust_accuracy", "n_points"], rows
    )
    _maybe_plot(
        args, run, "attack_bb.svg",
        [(grid, [r[1] for r in rows], "robust accuracy")],
        "epsilon", "robust accuracy",
    )
    run.finish()
    print(f"boundary attack on {n} points across {len(grid)} budgets")
    return 0


def cmd_rs_curve(args) -> int:
    run = _RunWriter(args)
    dataset = _load_dataset(args)
    dictionary = read_dictionary_csv(args.dict)
    base = make_dual_base(dictionary, args.lam, rule=_RULES[args.rule])
    cfg = SmoothingConfig(
        sigma=args.sigma, n0=args.n0, n=args.n,
        confidence=args.confidence, seed=args.seed,
    )
    curve = certified_accuracy_curve(base, dataset, cfg, args.eps_grid)
    rows = [
        [eps, acc, dataset.count, args.sigma, args.confidence]
        for eps, acc in curve
    ]
    run.write_csv(
        "rs_curve.csv",
        ["epsilon", "certified_accuracy", "n_points", "sigma", "confidence"],
        rows,
    )
    _maybe_plot(
        args, run, "rs_curve.svg",
        [([r[0] for r in rows], [r[1] for r in rows], "certified accuracy")],
        "radius", "certified accuracy",
    )
    run.finish()
    print(f"smoothing curve over {len(rows)} radii on {dataset.count} points")
    return 0


def cmd_sphere(args) -> int:
    run = _RunWriter(args)
    params = SphereExampleParams(n=args.n, theta0=args.theta0, psi=args.psi)
    grid = args.eps_grid if args.eps_grid is not None else [
        i * np.pi / 64.0 for i in range(65)
    ]
    curve = sphere_risk_curve(params, grid)
    rows = [[eps, risk, args.n, args.theta0, args.psi] for eps, risk in curve]
    run.write_csv(
        "sphere.csv", ["epsilon", "risk", "n", "theta0", "psi"], rows
    )
    _maybe_plot(
        args, run, "sphere.svg",
        [([r[0] for r in rows], [r[1] for r in rows], "robust risk")],
        "epsilon", "robust risk",
    )
    run.finish()
    print(f"sphere risk curve with {len(rows)} budgets (n={args.n})")
    return 0


def cmd_cube(args) -> int:
    run = _RunWriter(args)
    per_class = max(1, args.samples // 2)
    row_seeds = spawn_seeds(args.seed, len(args.eps_grid))
    rows = []
    for j, eps in enumerate(args.eps_grid):
        params = CubeExampleParams(n=args.n, alpha=args.alpha, epsilon=eps)
        empirical = cube_empirical_risk(params, per_class=per_class, seed=row_seeds[j])
        rows.append(
            [eps, empirical, cube_risk_bound(params), args.n, args.alpha,
             2 * per_class]
        )
    run.write_csv(
        "cube.csv",
        ["epsilon", "empirical_risk", "risk_bound", "n", "alpha", "samples"],
        rows,
    )
    _maybe_plot(
        args, run, "cube.svg",
        [([r[0] for r in rows], [r[1] for r in rows], "empirical"),
         ([r[0] for r in rows], [r[2] for r in rows], "bound")],
        "epsilon", "robust risk",
    )
    run.finish()
    print(f"cube example over {len(rows)} budgets (alpha={args.alpha})")
    return 0


def cmd_concentration(args) -> int:
    run = _RunWriter(args)
    dataset = _load_dataset(args)
    rows = empirical_concentration_curve(
        dataset, args.m_grid, within_class=args.within_class
    )
    run.write_csv("concentration.csv", ["m", "epsilon", "mass"], rows)
    _maybe_plot(
        args, run, "concentration.svg",
        [([r[0] for r in rows], [r[1] for r in rows], "separation"),
         ([r[0] for r in rows], [r[2] for r in rows], "mass kept")],
        "points per class", "value",
    )
    run.finish()
    print(f"concentration curve over {len(rows)} selection sizes")
    return 0


def _add_common(p, data=False, dictionary=False):
    p.add_argument("--config", help="flat JSON file mirroring the flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="polycert-out", help="output directory")
    if data:
        p.add_argument("--data", help="dataset CSV (label,x0,... header)")
        p.add_argument("--idx-images", help="IDX image file (alternative to --data)")
        p.add_argument("--idx-labels", help="IDX label file")
        p.add_argument("--image-side", type=int, default=IMAGE_SIDE,
                       help="resize IDX images to this side length")
        p.add_argument("--limit", type=int, default=0,
                       help="use only the first N points (0 = all)")
    if dictionary:
        p.add_argument("--dict", help="dictionary CSV")
        p.add_argument("--lambda", dest="lam", type=float, default=2.0)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--tau", type=float, default=DEFAULT_TAU)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polycert",
        description="certified robustness experiments for sparse-dictionary classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic subspace dataset")
    _add_common(p)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--subspace-dim", type=int, default=2)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--dict-size", type=int, default=0,
                   help="also emit a dictionary with this many atoms")
    p.add_argument("--balanced", action="store_true",
                   help="per-class quotas for dictionary atoms")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("certify", help="predict and certify every dataset point")
    _add_common(p, data=True, dictionary=True)
    p.add_argument("--rule", choices=sorted(_RULES), default="majority")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("attack-proj",
                       help="projected attack restricted to certificates")
    _add_common(p, data=True, dictionary=True)
    p.add_argument("--eps-grid", type=_parse_float_grid,
                   default=[0.0, 0.02, 0.05, 0.1, 0.2])
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--target",
                   choices=["dual", "nearest", "smoothed-dual", "smoothed-nearest"],
                   default="dual")
    p.add_argument("--subspace-dim", type=int, default=2)
    p.add_argument("--smooth-sigma", type=float, default=0.02)
    p.add_argument("--smooth-n0", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_attack_proj)

    p = sub.add_parser("attack-bb", help="decision-based boundary attack")
    _add_common(p, data=True, dictionary=True)
    p.add_argument("--eps-grid", type=_parse_float_grid,
                   default=[0.0, 0.05, 0.1, 0.2, 0.4])
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--init-draws", type=int, default=200)
    p.add_argument("--target",
                   choices=["dual", "nearest", "smoothed-dual", "smoothed-nearest"],
                   default="dual")
    p.add_argument("--subspace-dim", type=int, default=2)
    p.add_argument("--smooth-sigma", type=float, default=0.02)
    p.add_argument("--smooth-n0", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_attack_bb)

    p = sub.add_parser("rs-curve", help="randomized-smoothing certified accuracy")
    _add_common(p, data=True, dictionary=True)
    p.add_argument("--rule", choices=sorted(_RULES), default="majority")
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--n0", type=int, default=100)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--confidence", type=float, default=0.999)
    p.add_argument("--eps-grid", type=_parse_float_grid,
                   default=[0.0, 0.005, 0.01, 0.02, 0.03, 0.05])
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_rs_curve)

    p = sub.add_parser("sphere", help="closed-form sphere example risk curve")
    _add_common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--theta0", type=float, default=0.1)
    p.add_argument("--psi", choices=["constant", "exp"], default="constant")
    p.add_argument("--eps-grid", type=_parse_float_grid, default=None)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sphere)

    p = sub.add_parser("cube", help="cube example: sampled risk vs bound")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--eps-grid", type=_parse_float_grid,
                   default=[0.0, 0.02, 0.05])
    p.add_argument("--samples", type=int, default=10_000,
                   help="total Monte-Carlo samples per budget")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("concentration",
                       help="greedy empirical concentration curve")
    _add_common(p, data=True)
    p.add_argument("--m-grid", type=_parse_int_grid, default=[1, 2, 5, 10, 20])
    p.add_argument("--within-class", action="store_true")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_concentration)

    return parser


_CONFIG_KEY_ALIASES = {"lambda": "lam"}


def _suppress_defaults(parser) -> None:
    # private argparse attrs; turns the parser into one whose parse
    # result contains only flags explicitly present on the command line
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                _suppress_defaults(sub)
        else:
            action.default = argparse.SUPPRESS
    parser._defaults.clear()


def _apply_config_file(argv, args):
    """Merge a flat JSON config under the explicit command-line flags."""
    path = _require_file(args.config)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}", byte_offset=exc.pos) from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: config must be a flat JSON object")
    explicit_parser = build_parser()
    _suppress_defaults(explicit_parser)
    explicit = vars(explicit_parser.parse_args(argv))
    known = vars(args)
    for key, value in raw.items():
        dest = _CONFIG_KEY_ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if dest not in known or dest in ("config", "command", "func"):
            raise ArgumentError(f"unknown config key: {key}")
        if dest == "eps_grid":
            value = (_parse_float_grid(value) if isinstance(value, str)
                     else [float(v) for v in value])
        if dest == "m_grid":
            value = (_parse_int_grid(value) if isinstance(value, str)
                     else [int(v) for v in value])
        if dest not in explicit:
            setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if getattr(args, "config", None):
            args = _apply_config_file(argv, args)
        return args.func(args)
    except (ArgumentError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PolycertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
