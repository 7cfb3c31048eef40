from pathlib import Path
import csv
import json
import sys

PROJECT_ROOT = Path(__file__).resolve().parents[2]
PACKAGE_ROOT = PROJECT_ROOT / "QueryLab"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.insert(0, str(PACKAGE_ROOT))

from querylab import __main__, cli
from querylab.games import load_game, load_profile, parse_game


def test_build_parser_solve_defaults():
    parser = __main__.build_parser()
    args = parser.parse_args(["solve", "--algo", "bbm", "--k", "8"])
    assert args.command == "solve"
    assert args.eps == 0.1
    assert args.budget is None
    assert args.rounds_constant == 16.0
    assert isinstance(args.out, __main__.Path)
    assert args.ledger_out is None


def test_build_parser_bench_and_adversary_options(tmp_path):
    parser = __main__.build_parser()
    bench = parser.parse_args(
        ["bench", "--algo", "mwu", "--trials", "5", "--workers", "2", "--timing", "--out", str(tmp_path / "t.csv")]
    )
    assert bench.trials == 5 and bench.workers == 2 and bench.timing is True
    assert bench.out == tmp_path / "t.csv"

    adversary = parser.parse_args(["adversary", "--algo", "ks", "--adversary", "zeros"])
    assert adversary.k == 64
    assert adversary.out == __main__.DEFAULT_ARTIFACT_DIRECTORY


def test_generate_writes_game_file(tmp_path, capsys):
    target = tmp_path / "gk.txt"
    code = __main__.main(["generate", "--generator", "gk", "--k", "6", "--seed", "3", "--out", str(target)])

    assert code == 0
    game, hidden = parse_game(target.read_text(encoding="utf-8"))
    assert game.k == 6 and hidden is not None
    assert "Game written:" in capsys.readouterr().out


def test_solve_writes_profile_and_ledger(tmp_path, capsys):
    game_path = tmp_path / "game.txt"
    __main__.main(["generate", "--k", "4", "--seed", "1", "--out", str(game_path)])
    profile_path = tmp_path / "profile.txt"
    ledger_path = tmp_path / "ledger.csv"

    code = __main__.main(
        [
            "solve",
            "--algo",
            "bbm",
            "--generator",
            str(game_path),
            "--eps",
            "0.5",
            "--seed",
            "2",
            "--out",
            str(profile_path),
            "--ledger-out",
            str(ledger_path),
        ]
    )

    assert code == 0
    profile = load_profile(profile_path)
    assert profile.k == load_game(game_path).k
    with ledger_path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        assert reader.fieldnames == ["row", "col", "a", "b", "order"]
        first = next(reader)
    assert first["order"] == "1"
    output = capsys.readouterr().out
    assert "Profile written:" in output
    assert "Query ledger exported:" in output


def test_solve_with_tiny_budget_reports_failure(tmp_path, capsys):
    code = __main__.main(
        [
            "solve",
            "--algo",
            "bbm",
            "--k",
            "6",
            "--eps",
            "0.3",
            "--budget",
            "5",
            "--out",
            str(tmp_path / "profile.txt"),
        ]
    )
    assert code == 1
    assert (tmp_path / "profile.txt").exists()
    assert "budget-exhausted" in capsys.readouterr().out


def test_invalid_input_exits_with_code_two(tmp_path, capsys):
    code = __main__.main(
        ["solve", "--algo", "bbm", "--k", "4", "--eps", "1.5", "--out", str(tmp_path / "p.txt")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err
    assert not (tmp_path / "p.txt").exists()

    code = __main__.main(
        ["solve", "--algo", "mwu", "--k", "4", "--generator", "uniform", "--out", str(tmp_path / "p.txt")]
    )
    assert code == 2


def test_missing_game_file_exits_with_code_two(tmp_path, capsys):
    code = __main__.main(
        ["verify", "--game", str(tmp_path / "missing.txt"), "--profile", str(tmp_path / "p.txt")]
    )
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_verify_prints_regrets(tmp_path, capsys):
    game_path = tmp_path / "pennies.txt"
    game_path.write_text("k 2 range 0 1\n1 0\n0 1\n\n0 1\n1 0\n", encoding="utf-8")
    profile_path = tmp_path / "profile.txt"
    profile_path.write_text("0.5 0.5\n0.5 0.5\n", encoding="utf-8")

    code = __main__.main(
        ["verify", "--game", str(game_path), "--profile", str(profile_path), "--eps", "0.01"]
    )

    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["row_regret"] == 0.0
    assert payload["is_eps_ne"] is True
    assert payload["is_eps_wsne"] is True


def test_bench_writes_csv(tmp_path, capsys):
    target = tmp_path / "trials.csv"
    code = __main__.main(
        [
            "bench",
            "--algo",
            "mwu",
            "--generator",
            "zero-sum",
            "--k",
            "5",
            "--eps",
            "0.5",
            "--trials",
            "3",
            "--out",
            str(target),
        ]
    )

    assert code == 0
    lines = target.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4
    assert "Experiment finished:" in capsys.readouterr().out


def test_adversary_refutation_exits_with_code_one(tmp_path, capsys):
    code = __main__.main(
        [
            "adversary",
            "--algo",
            "uniform-sampler",
            "--adversary",
            "zeros",
            "--k",
            "10",
            "--eps",
            "0.99",
            "--out",
            str(tmp_path),
        ]
    )

    assert code == 1
    output = capsys.readouterr().out
    assert "Claim refuted:" in output
    assert list(tmp_path.glob("zeros-uniform-sampler-k10-seed0-witness.txt"))


def test_cli_wrapper_delegates(tmp_path):
    target = tmp_path / "game.txt"
    assert cli.main(["generate", "--k", "3", "--out", str(target)]) == 0
    assert load_game(target).k == 3
