"""Golden report cases: ``python tests/golden_cases.py`` regenerates tests/golden/."""

from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DEMOS = ROOT / "demos"
GOLDEN = Path(__file__).resolve().parent / "golden"

CASES = {
    "analyze_tripled_matrix": ["analyze", "tripled_matrix.json"],
    "certify_tripled_matrix": ["certify", "tripled_matrix.json", "--lambda", "0.7"],
    "solve_linear_system": ["solve", "linear_system.json", "--trace-every", "10"],
    "solve_tripled": ["solve", "tripled.json", "--trace-every", "5"],
}

VOLATILE_PREFIXES = ('  "wall_time":', '  "artifact_version":')


def argv(name, out):
    cmd, demo, *rest = CASES[name]
    return [cmd, str(DEMOS / demo), *rest, "--out", str(out)]


def stable_text(text: str) -> str:
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith(VOLATILE_PREFIXES))


if __name__ == "__main__":
    import contextlib
    import io

    from fixpoint.cli import main

    GOLDEN.mkdir(exist_ok=True)
    for name in CASES:
        with contextlib.redirect_stdout(io.StringIO()):
            code = main(argv(name, GOLDEN / f"{name}.json"))
        print(f"{name}: exit {code}")
