"""FastAPI application exposing the solvers and the exact verifier."""
from __future__ import annotations

from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from .experiments import (
    ALGORITHMS,
    GENERATORS,
    generate_game,
    resolve_algorithm,
    run_algorithm,
    verify_claim,
)
from .games import (
    SIGNED_RANGE,
    UNIT_RANGE,
    BimatrixGame,
    MixedProfile,
    exact_regret,
    is_eps_ne,
    is_eps_wsne,
)
from .oracle import MatrixOracle, PayoffOracle, budgeted

MAX_SOLVE_K = 200

app = FastAPI(title="Payoff Query Lab API")


class VerifyRequest(BaseModel):
    row_payoffs: List[List[float]]
    col_payoffs: List[List[float]]
    row_strategy: List[float]
    col_strategy: List[float]
    signed: bool = False
    eps: float = 0.0


@app.get("/algorithms")
def get_algorithms() -> List[Dict[str, object]]:
    """Return every registered algorithm with its claim."""

    return [spec.to_dict() for spec in ALGORITHMS.values()]


@app.post("/verify")
def post_verify(request: VerifyRequest) -> Dict[str, object]:
    """Exact regrets and eps verdicts for a game and a profile."""

    try:
        game = BimatrixGame(
            request.row_payoffs,
            request.col_payoffs,
            SIGNED_RANGE if request.signed else UNIT_RANGE,
        )
        profile = MixedProfile(request.row_strategy, request.col_strategy)
        report = exact_regret(game, profile)
        verdicts = {
            "is_eps_ne": is_eps_ne(game, profile, request.eps),
            "is_eps_wsne": is_eps_wsne(game, profile, request.eps),
        }
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc

    return {"report": report.to_dict(), "eps": request.eps, **verdicts}


@app.get("/solve")
def get_solve(
    algorithm: str = Query(..., description="Algorithm identifier, e.g. bbm"),
    generator: str = Query("uniform", description="Game generator"),
    k: int = Query(10, ge=2, le=MAX_SOLVE_K, description="Strategies per player."),
    eps: float = Query(0.2, gt=0.0, le=1.0, description="Target accuracy."),
    seed: int = Query(0, ge=0, description="Seed for the game and the algorithm."),
    budget: Optional[int] = Query(None, ge=0, description="Optional hard query budget."),
):
    """Generate a game, run one algorithm on it and verify the result exactly."""

    if generator not in GENERATORS:
        raise HTTPException(status_code=400, detail=f"Unknown generator {generator!r}.")
    try:
        spec = resolve_algorithm(algorithm)
        spec.check_eps(eps)
        if generator not in spec.generators:
            raise ValueError(f"algorithm {spec.name!r} does not accept generator {generator!r}")
        game = generate_game(generator, k, seed)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc

    matrix_oracle = MatrixOracle(game, keep_log=False)
    oracle: PayoffOracle = matrix_oracle if budget is None else budgeted(matrix_oracle, budget)
    profile, branch, completed = run_algorithm(spec, oracle, k, eps, seed)

    check = verify_claim(spec, game, profile, eps)
    return {
        "algorithm": spec.name,
        "branch": branch,
        "completed": completed,
        "queries": matrix_oracle.ledger.total_count,
        "level": check.level,
        "verified": check.verified,
        "report": check.report.to_dict(),
        "profile": profile.to_dict(),
    }
