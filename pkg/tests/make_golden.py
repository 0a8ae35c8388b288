"""Regenerate the CLI golden outputs in tests/golden.

Each case is ``(name, argv, exit_code)``; paths in ``argv`` are relative to
tests/fixtures. Run ``python tests/make_golden.py`` after an intentional
change of CLI output.
"""

import contextlib
import io as _io
import json
from pathlib import Path

from povmlab.cli import main

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
GOLDEN = TESTS / "golden"

CASES = [
    ("validate_trine", ["validate", "--input", "trine.json"], 0),
    ("validate_state", ["validate", "--input", "state.json"], 0),
    ("classify_sharp", ["classify", "--input", "sharp_qubit.json"], 0),
    ("classify_trine", ["classify", "--input", "trine.json"], 0),
    ("classify_uniform", ["classify", "--input", "classical_uniform.json"], 0),
    ("classify_dirac", ["classify", "--input", "dirac_scalar.json"], 0),
    ("classify_random", ["classify", "--input", "random_povm.json"], 0),
    ("integrate_trine", ["integrate", "--input", "trine.json", "--qrv", "qrv_trine.json"], 0),
    ("probabilities_trine", ["probabilities", "--input", "trine.json", "--state", "state.json", "--event", "t0,t1"], 0),
    ("sample_trine", ["sample", "--input", "trine.json", "--shots", "500", "--seed", "11"], 0),
    ("rn_principal", ["rn", "principal", "--input", "random_povm.json"], 0),
    ("rn_non_principal", ["rn", "non-principal", "--input", "random_povm.json", "--base", "random_povm.json"], 0),
    ("discretize_catalog", ["discretize", "--catalog", "linear-qubit", "--samples", "257", "--bins", "8"], 0),
    ("discretize_input", ["discretize", "--input", "density_linear_qubit.json", "--bins", "4"], 0),
    ("transform_gamma", ["transform", "gamma", "--input", "trine.json"], 0),
    ("transform_omega", ["transform", "omega", "--input", "ucp_trine.json"], 0),
    ("transform_gamma_c", ["transform", "gamma-c", "--input", "sharp_qubit.json"], 0),
    ("transform_verify_ucp", ["transform", "verify-ucp", "--input", "ucp_trine.json"], 0),
    ("combine_cstar", ["combine", "cstar", "--coeffs", "coeffs_half.json", "--povm", "trine.json", "--povm", "sharp_qubit.json"], 0),
    ("combine_classical", ["combine", "classical", "--weights", "0.25,0.75", "--povm", "trine.json", "--povm", "sharp_qubit.json"], 0),
    ("decompose_extremal", ["decompose", "extremal", "--input", "classical_uniform.json"], 0),
    ("decompose_sharp", ["decompose", "sharp-coarsening", "--input", "trine.json"], 0),
    ("equivalent_self", ["equivalent", "--input", "random_povm.json", "--other", "random_povm.json", "--seed", "3"], 0),
    ("equivalent_no", ["equivalent", "--input", "trine.json", "--other", "sharp_qubit.json"], 0),
    ("equivalent_undetermined", ["equivalent", "--input", "classical_uniform.json", "--other", "classical_uniform.json"], 3),
    ("coarsen_verify_ok", ["coarsen-verify", "--input", "trine.json", "--coeffs", "coeffs_half.json", "--povm", "trine.json", "--povm", "trine.json"], 0),
    ("coarsen_verify_fail", ["coarsen-verify", "--input", "sharp_qubit.json", "--coeffs", "coeffs_half.json", "--povm", "trine.json", "--povm", "trine.json"], 2),
    ("jensen_povm", ["jensen", "povm", "--input", "trine.json", "--qrv", "qrv_trine.json", "--function", "inverse"], 0),
    ("jensen_hp", ["jensen", "hansen-pedersen", "--coeffs", "coeffs_half.json", "--ys", "ys.json", "--function", "square"], 0),
]


def resolve(argv):
    """Turn fixture-relative paths into absolute ones."""
    out = []
    for a in argv:
        p = FIXTURES / a
        out.append(str(p) if a.endswith(".json") and p.exists() else a)
    return out


def run(argv):
    """Run the CLI in-process; returns (exit code, stdout text)."""
    buf = _io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(_io.StringIO()):
        code = main(resolve(argv))
    return code, buf.getvalue()


def main_():
    GOLDEN.mkdir(exist_ok=True)
    for name, argv, expected in CASES:
        code, text = run(argv)
        if code != expected:
            raise SystemExit(f"{name}: exit {code}, expected {expected}")
        json.loads(text)
        (GOLDEN / f"{name}.json").write_text(text, encoding="utf-8")
    print(f"wrote {len(CASES)} golden outputs to {GOLDEN}")


if __name__ == "__main__":
    main_()
