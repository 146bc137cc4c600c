"""Command-line driver for the assignment flow.

Subcommands cover the bundled scenarios: supervised labeling with
vector priors, inpainting via uninformative distance rows, patch
dictionary labeling with optional template adaptation, the rectangle
selection task with assignment-dependent distances, and unsupervised
self-assignment against a color-cube codebook.  `gen` writes the
synthetic preset inputs.

Every run emits a trace CSV (iter,entropy,objective; one row per
iteration plus the initialization row) and a manifest JSON that fully
determines the run.  Exit codes: 0 converged, 1 malformed input,
2 iteration cap reached.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import core, features, mapping, pnm, presets
from .core import FlowConfig, FlowResult
from .features import FeatureImage, PriorSet
from .grid import GridGraph, gaussian_patch_weights

__all__ = ["main"]


class InputError(Exception):
    """Malformed or inconsistent user input (exit code 1)."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _window_radius(side: int) -> int:
    if side < 1 or side % 2 == 0:
        raise InputError(f"window side length must be odd and positive, got {side}")
    return (side - 1) // 2


def _load_feature_image(path, mask_path=None) -> FeatureImage:
    try:
        img = pnm.read_pnm(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read image {path}: {exc}")
    values = img.astype(float) / 255.0
    mask = None
    if mask_path is not None:
        try:
            mask = features.load_mask_pgm(mask_path)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read mask {mask_path}: {exc}")
        if mask.shape != values.shape[:2]:
            raise InputError(
                f"mask shape {mask.shape} does not match image {values.shape[:2]}"
            )
    return FeatureImage(values, mask=mask)


def _load_priors_csv(path) -> PriorSet:
    try:
        return features.load_priors_csv(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read priors {path}: {exc}")


def _write_trace(path, trace) -> None:
    with open(path, "w") as fh:
        fh.write("iter,entropy,objective\n")
        for row in trace:
            fh.write(f"{row.iteration},{_fmt(row.entropy)},{_fmt(row.objective)}\n")


def _write_manifest(path, command, parameters, inputs, outputs, result: FlowResult) -> None:
    # output paths are recorded relative to the manifest so that runs into
    # different directories stay byte-identical
    doc = {
        "command": command,
        "parameters": parameters,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "outputs": {k: Path(v).name for k, v in outputs.items()},
        "iterations": result.iterations,
        "final_entropy": result.trace[-1].entropy,
        "final_objective": result.trace[-1].objective,
        "converged": result.converged,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _label_image(label: np.ndarray, n_labels: int, shape) -> np.ndarray:
    if n_labels > 1:
        scaled = np.round(label * 255.0 / (n_labels - 1))
    else:
        scaled = np.zeros_like(label, dtype=float)
    return scaled.astype(np.uint8).reshape(shape)


def _to_u8(values: np.ndarray) -> np.ndarray:
    return np.round(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def _flow_config(args, bypass=False) -> FlowConfig:
    return FlowConfig(
        rho=args.rho,
        entropy_tol=args.entropy_tol,
        max_iterations=args.max_iter,
        mean_mode={"approx": "approximate", "exact": "exact"}[args.mean],
        bypass_averaging=bypass,
    )


def _common_parameters(args, window=True) -> dict:
    params = {
        "rho": args.rho,
        "entropy_tol": args.entropy_tol,
        "max_iterations": args.max_iter,
        "mean_mode": args.mean,
    }
    if window:
        params["window"] = args.window
    return params


def _exit_code(result: FlowResult) -> int:
    return 0 if result.converged else 2


def cmd_label(args) -> int:
    img = _load_feature_image(args.image, getattr(args, "mask", None))
    priors = _load_priors_csv(args.priors)
    if priors.items.shape[1] != img.dim:
        raise InputError(
            f"priors have dimension {priors.items.shape[1]}, image has {img.dim}"
        )
    radius = _window_radius(args.window)
    g = GridGraph(img.height, img.width, radius)
    D = features.build_distance_matrix(img, priors, rho=args.rho)
    cfg = _flow_config(args)
    result = core.run_flow(D, g, cfg)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u = mapping.vector_assignment(result.assignment, priors)
    synthesis = mapping.LabeledOutput(
        assigned=u,
        label_map=core.labels(result.assignment),
        residual=mapping.decompose(img, u),
    )
    shape = (img.height, img.width, img.dim) if img.dim > 1 else (img.height, img.width)
    assigned_name = "assigned.ppm" if img.dim == 3 else "assigned.pgm"
    pnm.write_pnm(out / assigned_name, _to_u8(synthesis.assigned.reshape(shape)))
    pnm.write_pgm(
        out / "labels.pgm",
        _label_image(synthesis.label_map, priors.n_items, (img.height, img.width)),
    )
    _write_trace(out / "trace.csv", result.trace)

    inputs = {"image": args.image, "priors": args.priors}
    if getattr(args, "mask", None):
        inputs["mask"] = args.mask
    outputs = {
        "assigned": out / assigned_name,
        "labels": out / "labels.pgm",
        "trace": out / "trace.csv",
    }
    _write_manifest(
        out / "manifest.json",
        args.command,
        _common_parameters(args),
        inputs,
        outputs,
        result,
    )
    return _exit_code(result)


def cmd_inpaint(args) -> int:
    if args.mask is None:
        raise InputError("inpaint requires --mask")
    return cmd_label(args)


def cmd_patch_label(args) -> int:
    img = _load_feature_image(args.image)
    if img.dim != 1:
        raise InputError("patch labeling expects a grayscale PGM image")
    try:
        priors = features.load_patch_priors_json(args.dict)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read dictionary {args.dict}: {exc}")

    radius = int(np.max(np.abs(priors.offsets)))
    support = gaussian_patch_weights(radius)
    if support.offsets.shape != priors.offsets.shape or np.any(
        support.offsets != priors.offsets
    ):
        raise InputError(
            "dictionary offsets must form the full square patch support"
        )
    if args.patch is not None and args.patch != 2 * radius + 1:
        raise InputError(
            f"--patch {args.patch} does not match the dictionary "
            f"({2 * radius + 1}x{2 * radius + 1} patches)"
        )
    if args.adapt == "fingerprint" and (args.f_dark is None or args.f_bright is None):
        raise InputError("fingerprint adaptation requires --f-dark and --f-bright")

    g = GridGraph(img.height, img.width, _window_radius(args.window))
    try:
        D = features.patch_distance_matrix(
            img,
            priors,
            rho=args.rho,
            adapt=args.adapt,
            f_dark=args.f_dark,
            f_bright=args.f_bright,
        )
    except ValueError as exc:
        raise InputError(str(exc))
    cfg = _flow_config(args)
    result = core.run_flow(D, g, cfg)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u = mapping.patch_assignment(result.assignment, priors, g, support)
    synthesis = mapping.LabeledOutput(
        assigned=u,
        label_map=core.labels(result.assignment),
        residual=mapping.decompose(img, u),
    )
    v = synthesis.residual[:, 0]
    pnm.write_pgm(out / "assigned.pgm", _to_u8(u.reshape(img.height, img.width)))
    vmin, vmax = float(v.min()), float(v.max())
    if vmax > vmin:
        vshow = (v - vmin) / (vmax - vmin)
    else:
        vshow = np.full_like(v, 0.5)
    pnm.write_pgm(out / "residual.pgm", _to_u8(vshow.reshape(img.height, img.width)))
    n_out = D.shape[1]
    pnm.write_pgm(
        out / "labels.pgm",
        _label_image(synthesis.label_map, n_out, (img.height, img.width)),
    )
    _write_trace(out / "trace.csv", result.trace)

    params = _common_parameters(args)
    params.update(
        {
            "adapt": args.adapt,
            "patch": 2 * radius + 1,
            "f_dark": args.f_dark,
            "f_bright": args.f_bright,
            "residual_range": [vmin, vmax],
        }
    )
    _write_manifest(
        out / "manifest.json",
        "patch-label",
        params,
        {"image": args.image, "dictionary": args.dict},
        {
            "assigned": out / "assigned.pgm",
            "residual": out / "residual.pgm",
            "labels": out / "labels.pgm",
            "trace": out / "trace.csv",
        },
        result,
    )
    return _exit_code(result)


def _rect_svg(scn, label, path) -> None:
    n = scn.n_orientations
    extent_x = (scn.grid.width) * (scn.centers[1, 0] - scn.centers[0, 0]) if scn.grid.width > 1 else 2.0
    extent_y = extent_x / scn.grid.width * scn.grid.height
    scale = 60.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{extent_x * scale:.0f}" height="{extent_y * scale:.0f}" '
        f'viewBox="0 0 {extent_x:.3f} {extent_y:.3f}">',
        f'<rect width="{extent_x:.3f}" height="{extent_y:.3f}" fill="white"/>',
    ]
    for x, y in scn.points:
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="0.03" fill="#888"/>')
    for i, k in scn.foreground:
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in scn.corners(i, k))
        parts.append(
            f'<polygon points="{pts}" fill="none" stroke="#2a8" stroke-width="0.04"/>'
        )
    for i, lab in enumerate(label):
        if lab >= n:
            continue
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in scn.corners(i, int(lab)))
        parts.append(
            f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="0.02"/>'
        )
    parts.append("</svg>\n")
    Path(path).write_text("\n".join(parts))


def cmd_rectangles(args) -> int:
    scn = features.generate_rectangle_scenario(
        seed=args.seed,
        grid_shape=(args.grid, args.grid),
        n_orientations=args.orientations,
        fg_count=args.fg_count,
        bg_count=args.bg_count,
        fg_points=args.fg_points,
        bg_points=args.bg_points,
        lam=args.lam,
        sigma=args.sigma,
        rho=args.rho,
    )
    cfg = FlowConfig(
        rho=args.rho,
        entropy_tol=args.entropy_tol,
        max_iterations=args.max_iter,
        bypass_averaging=True,
    )
    result = core.run_flow(
        lambda W: features.rectangle_adaptive_distance(scn, W),
        scn.grid,
        cfg,
        n_labels=scn.n_labels,
    )
    lab = core.labels(result.assignment)
    n_conflicts = features.selected_intersections(scn, lab)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    selected = {
        "intersecting_pairs": n_conflicts,
        "none_label": scn.n_orientations,
        "foreground_truth": [[int(i), int(k)] for i, k in scn.foreground],
        "selected": [
            {
                "location": i,
                "center": [float(scn.centers[i, 0]), float(scn.centers[i, 1])],
                "label": int(lab[i]),
            }
            for i in range(scn.grid.n_nodes)
        ],
    }
    with open(out / "selected.json", "w") as fh:
        json.dump(selected, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _rect_svg(scn, lab, out / "overlay.svg")
    _write_trace(out / "trace.csv", result.trace)
    params = {
        "seed": args.seed,
        "grid": args.grid,
        "orientations": args.orientations,
        "fg_count": args.fg_count,
        "bg_count": args.bg_count,
        "fg_points": args.fg_points,
        "bg_points": args.bg_points,
        "lambda": args.lam,
        "sigma": args.sigma,
        "rho": args.rho,
        "entropy_tol": args.entropy_tol,
        "max_iterations": args.max_iter,
    }
    _write_manifest(
        out / "manifest.json",
        "rectangles",
        params,
        {},
        {
            "selected": out / "selected.json",
            "overlay": out / "overlay.svg",
            "trace": out / "trace.csv",
        },
        result,
    )
    print(f"selected rectangles with {n_conflicts} intersecting pairs")
    return _exit_code(result)


def cmd_selfassign(args) -> int:
    img = _load_feature_image(args.image)
    if img.dim != 3:
        raise InputError("self-assignment expects a color PPM image")
    priors = features.color_cube_priors(args.steps)
    g = GridGraph(img.height, img.width, _window_radius(args.window))
    D = features.build_distance_matrix(img, priors, rho=args.rho)
    cfg = _flow_config(args)
    result = core.run_flow(D, g, cfg)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u = mapping.vector_assignment(result.assignment, priors)
    pnm.write_ppm(out / "assigned.ppm", _to_u8(u.reshape(img.height, img.width, 3)))
    lab = core.labels(result.assignment)
    counts = np.bincount(lab, minlength=priors.n_items)
    with open(out / "frequencies.csv", "w") as fh:
        fh.write("label,frequency\n")
        for j in range(priors.n_items):
            fh.write(f"{j},{_fmt(counts[j] / lab.size)}\n")
    _write_trace(out / "trace.csv", result.trace)
    params = _common_parameters(args)
    params["steps"] = args.steps
    _write_manifest(
        out / "manifest.json",
        "selfassign",
        params,
        {"image": args.image},
        {
            "assigned": out / "assigned.ppm",
            "frequencies": out / "frequencies.csv",
            "trace": out / "trace.csv",
        },
        result,
    )
    return _exit_code(result)


def cmd_gen(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset == "colors31":
        clean, noisy, palette, truth = presets.color_instance(
            args.size, args.size, noise_fraction=args.noise_fraction, seed=args.seed
        )
        pnm.write_ppm(out / "truth.ppm", clean)
        pnm.write_ppm(out / "noisy.ppm", noisy)
        features.save_priors_csv(
            out / "priors.csv", PriorSet(palette.astype(float) / 255.0)
        )
        pnm.write_pgm(out / "truth-labels.pgm", _label_image(truth.ravel(), 31, truth.shape))
    elif args.preset == "triplepoint":
        img, priors, _, mask = presets.triple_point_instance(args.size, args.size / 4.8)
        shown = img.values.copy()
        shown[mask] = 0.5
        pnm.write_ppm(out / "image.ppm", _to_u8(shown))
        pnm.write_pgm(out / "mask.pgm", np.where(mask, 0, 255).astype(np.uint8))
        features.save_priors_csv(out / "priors.csv", priors)
    elif args.preset == "noise":
        pnm.write_ppm(
            out / "noise.ppm",
            _to_u8(presets.uniform_noise_image(args.size, args.size, seed=args.seed)),
        )
    elif args.preset == "edges":
        img = presets.step_edge_image(args.size, args.size, seed=args.seed)
        pnm.write_pgm(out / "edges.pgm", _to_u8(img))
        features.save_patch_priors_json(
            out / "edges-dict.json", presets.step_edge_dictionary(1)
        )
    elif args.preset == "ridges":
        img = presets.ridge_image(args.size, args.size, seed=args.seed)
        pnm.write_pgm(out / "ridges.pgm", _to_u8(img))
        features.save_patch_priors_json(
            out / "ridges-dict.json", presets.oriented_ridge_dictionary(1)
        )
    else:
        raise InputError(f"unknown preset {args.preset!r}")
    return 0


def _add_flow_flags(p, rho=0.1, window=5):
    p.add_argument("--rho", type=float, default=rho, help="distance scale (selectivity)")
    p.add_argument(
        "--window", type=int, default=window, help="averaging window side length (odd)"
    )
    p.add_argument("--entropy-tol", type=float, default=1e-3, dest="entropy_tol")
    p.add_argument("--max-iter", type=int, default=1000, dest="max_iter")
    p.add_argument("--mean", choices=("approx", "exact"), default="approx")
    p.add_argument("--out-dir", default="out", dest="out_dir")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="assignflow",
        description="Image labeling by geometric assignment flows.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="assign vector priors to an image")
    p.add_argument("--image", required=True, help="input PPM/PGM")
    p.add_argument("--priors", required=True, help="prior vectors, CSV")
    p.add_argument("--mask", default=None, help=argparse.SUPPRESS)
    _add_flow_flags(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("inpaint", help="label an image with missing pixels")
    p.add_argument("--image", required=True)
    p.add_argument("--priors", required=True)
    p.add_argument("--mask", required=True, help="PGM mask, 0 = missing")
    _add_flow_flags(p, rho=1.0, window=3)
    p.set_defaults(func=cmd_inpaint)

    p = sub.add_parser("patch-label", help="assign a patch dictionary to an image")
    p.add_argument("--image", required=True, help="grayscale PGM")
    p.add_argument("--dict", required=True, help="patch dictionary JSON")
    p.add_argument(
        "--adapt", choices=("none", "two-value", "fingerprint"), default="none"
    )
    p.add_argument(
        "--patch",
        type=int,
        default=None,
        help="patch side length (odd); must match the dictionary when given",
    )
    p.add_argument("--f-dark", type=float, default=None, dest="f_dark")
    p.add_argument("--f-bright", type=float, default=None, dest="f_bright")
    _add_flow_flags(p, rho=0.02)
    p.set_defaults(func=cmd_patch_label)

    p = sub.add_parser("rectangles", help="select non-intersecting rectangles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=10, help="centroid grid side")
    p.add_argument("--orientations", type=int, default=6)
    p.add_argument("--fg-count", type=int, default=14, dest="fg_count")
    p.add_argument("--bg-count", type=int, default=30, dest="bg_count")
    p.add_argument("--fg-points", type=int, default=100, dest="fg_points")
    p.add_argument("--bg-points", type=int, default=20, dest="bg_points")
    p.add_argument("--lambda", type=float, default=0.2, dest="lam")
    p.add_argument("--sigma", type=float, default=0.03)
    p.add_argument("--rho", type=float, default=0.02)
    p.add_argument("--entropy-tol", type=float, default=1e-3, dest="entropy_tol")
    p.add_argument("--max-iter", type=int, default=1000, dest="max_iter")
    p.add_argument("--out-dir", default="out", dest="out_dir")
    p.set_defaults(func=cmd_rectangles)

    p = sub.add_parser("selfassign", help="assign an image to a color-cube codebook")
    p.add_argument("--image", required=True)
    p.add_argument("--steps", type=int, default=6, help="color cube steps per axis")
    _add_flow_flags(p, rho=0.01, window=7)
    p.set_defaults(func=cmd_selfassign)

    p = sub.add_parser("gen", help="write synthetic preset inputs")
    p.add_argument("preset", choices=("colors31", "triplepoint", "noise", "edges", "ridges"))
    p.add_argument("--out-dir", default="out", dest="out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument(
        "--noise-fraction", type=float, default=0.2, dest="noise_fraction"
    )
    p.set_defaults(func=cmd_gen)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
