"""Regenerate the golden regression outputs under tests/golden/.

Run from the repository root after an intentional behavior change:

    python tests/make_goldens.py

The goldens pin the bundled synthetic preset outputs (patch labeling on
the stripe and ridge images, rectangle selection) byte for byte.
"""

from pathlib import Path

from assignflow.cli import main

GOLDEN = Path(__file__).parent / "golden"

RUNS = {
    "edges": [
        ["gen", "edges", "--size", "20"],
        [
            "patch-label",
            "--image",
            "{dir}/edges.pgm",
            "--dict",
            "{dir}/edges-dict.json",
            "--adapt",
            "two-value",
            "--rho",
            "0.05",
            "--window",
            "3",
        ],
    ],
    "ridges": [
        ["gen", "ridges", "--size", "24"],
        [
            "patch-label",
            "--image",
            "{dir}/ridges.pgm",
            "--dict",
            "{dir}/ridges-dict.json",
            "--adapt",
            "fingerprint",
            "--f-dark",
            "0.25",
            "--f-bright",
            "0.75",
            "--rho",
            "0.05",
            "--window",
            "3",
        ],
    ],
    "rectangles": [
        None,
        ["rectangles", "--seed", "0"],
    ],
}


def run_preset(name: str, base: Path) -> None:
    gen_cmd, run_cmd = RUNS[name]
    out = base / name
    out.mkdir(parents=True, exist_ok=True)
    if gen_cmd is not None:
        code = main([*gen_cmd, "--out-dir", str(out)])
        assert code == 0, f"gen failed for {name}"
    cmd = [arg.format(dir=out) for arg in run_cmd]
    code = main([*cmd, "--out-dir", str(out)])
    assert code == 0, f"run failed for {name} (exit {code})"


if __name__ == "__main__":
    for name in RUNS:
        run_preset(name, GOLDEN)
        print(f"regenerated golden/{name}")
