import contextlib
import io
import os
from fractions import Fraction
from pathlib import Path

import pytest

from conekit.cli import main, parse_divisor
from conekit.qlattice import NamedDivisor

GOLDEN_DIR = Path(__file__).parent / "golden"

GOLDEN_CASES = [
    ("km_surface_d5_check", ["km-surface", "--d", "5", "--check"]),
    ("km_surface_d3_md", ["km-surface", "--d", "3", "--format", "md"]),
    ("contract_pullback", ["contract", "--d", "5", "--pullback", "E_1^T"]),
    (
        "contract_tables",
        ["contract", "--d", "5", "--discrepancies", "--classify", "--picard-rank"],
    ),
    ("cohom_532", ["cohom", "--d", "5", "--q1", "3", "--q2", "2"]),
    (
        "cohom_subtract_csv",
        ["cohom", "--d", "5", "--q1", "3", "--q2", "1", "--n", "1",
         "--subtract", "E_5", "--format", "csv"],
    ),
    ("cone_curve", ["cone", "--d", "5", "--q", "3", "--ledger", "curve"]),
    ("cone_sections", ["cone", "--d", "5", "--q", "3", "--ledger", "sections"]),
    ("cone_resolution", ["cone", "--d", "5", "--q", "3", "--ledger", "resolution"]),
    (
        "cone_resolution_md",
        ["cone", "--d", "5", "--q", "3", "--ledger", "resolution", "--format", "md"],
    ),
    ("cone_picard", ["cone", "--d", "5", "--q", "3", "--ledger", "picard"]),
    ("cone_adjunction", ["cone", "--d", "5", "--q", "3", "--ledger", "adjunction"]),
    (
        "kvv_schedule",
        ["kvv-schedule", "--e", "1,2", "--delta", "0,0", "--target", "3"],
    ),
    ("verify_plt_53", ["verify", "plt", "--d", "5", "--q", "3"]),
    ("verify_plt_53_md", ["verify", "plt", "--d", "5", "--q", "3", "--format", "md"]),
    ("verify_fano_2", ["verify", "fano", "--q", "2"]),
    ("sweep_csv", ["sweep", "--d-min", "3", "--d-max", "5"]),
    ("sweep_csv_full", ["sweep", "--d-min", "3", "--d-max", "12"]),
    ("sweep_json", ["sweep", "--d-min", "3", "--d-max", "4", "--format", "json"]),
]


def run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.mark.parametrize("name,argv", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_cli_output_matches_golden_and_is_stable(name, argv):
    code1, out1 = run_cli(argv)
    code2, out2 = run_cli(argv)
    assert code1 == code2 == 0
    assert out1.encode() == out2.encode()
    golden = GOLDEN_DIR / f"{name}.txt"
    if os.environ.get("REGEN_GOLDEN"):
        golden.write_bytes(out1.encode())
    assert golden.read_bytes() == out1.encode()


def test_verify_exit_codes():
    code, _ = run_cli(["verify", "plt", "--d", "5", "--q", "3"])
    assert code == 0
    code, _ = run_cli(["verify", "fano", "--q", "1"])
    assert code == 0


def test_usage_error_exit_code_from_preconditions():
    code, _ = run_cli(["verify", "plt", "--d", "4", "--q", "3"])
    assert code == 2
    code, _ = run_cli(["km-surface", "--d", "2"])
    assert code == 2
    code, _ = run_cli(["cone", "--d", "6", "--q", "4"])  # unit-fraction failure
    assert code == 2


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as err:
        run_cli(["verify", "plt", "--d", "5"])
    assert err.value.code == 2


def test_sweep_out_writes_file(tmp_path):
    out = tmp_path / "sweep.csv"
    code, text = run_cli(["sweep", "--d-min", "3", "--d-max", "4", "--out", str(out)])
    assert code == 0
    assert text == ""
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "d,q1,q2,ample,h1,kvv_violation"
    assert len(lines) == 1 + 10 + 15


def test_parse_divisor():
    assert parse_divisor("E_1+E_2-E_4") == NamedDivisor.of(
        {"E_1": 1, "E_2": 1, "E_4": -1}
    )
    assert parse_divisor("2*E_1") == NamedDivisor.of({"E_1": 2})
    assert parse_divisor("1/2*l_3-Gamma") == NamedDivisor.of(
        {"l_3": Fraction(1, 2), "Gamma": -1}
    )
    assert parse_divisor("E_1^T") == NamedDivisor.of({"E_1": 1})
    assert parse_divisor("0").is_zero()
    with pytest.raises(ValueError):
        parse_divisor("E_1++")
