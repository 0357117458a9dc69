"""Command runner behind main.py: one function per subcommand."""
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import yaml
from pydantic import ValidationError

from ..data import (
    ResponseMatrix,
    aggregate,
    read_json,
    read_response_matrix_json,
    read_responses_csv,
    write_json,
    write_responses_csv,
)
from ..estimation import StartPolicy, fit
from ..schemas import ModelGridSchema, ModelSpecSchema, ParameterSetSchema, TruthSchema, resolve_structure
from ..selection import class_item, information_table, merge_table, suggest_cut, test_dim, to_dot
from ..simulation import SimulationPlan, simulate
from ..utils import config, get_logger
from ..utils.errors import LcirtError, SpecValidationError

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

COMMANDS = ("aggregate", "fit", "test-dim", "cluster", "grid", "simulate")
FORMATS = ("json", "text", "dot")


@dataclass
class RunConfig:
    """Everything one CLI invocation needs; 1-based item numbers throughout."""
    command: str
    input: Optional[Path] = None
    output: Optional[Path] = None
    fmt: str = "json"
    spec: Optional[ModelSpecSchema] = None
    start: int = 0
    n_random: Optional[int] = None
    seed: Optional[int] = None
    params: Optional[Path] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    threads: Optional[int] = None
    missing_code: Optional[int] = None
    header: Optional[bool] = None
    multi0: Optional[list] = None
    multi1: Optional[list] = None
    alpha: Optional[float] = None
    grid: Optional[Path] = None
    truth: Optional[Path] = None
    n: Optional[int] = None
    missing_rate: Optional[float] = None
    truth_output: Optional[Path] = None
    progress: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SpecValidationError(f"Unknown command {self.command!r}; use one of {', '.join(COMMANDS)}")
        if self.fmt not in FORMATS:
            raise SpecValidationError(f"Unknown format {self.fmt!r}; use json, text or dot")
        if self.fmt == "dot" and self.command != "cluster":
            raise SpecValidationError("DOT output is only available for cluster")


def _stamp(payload: dict) -> dict:
    return {"created_at": datetime.now(timezone.utc).isoformat(), **payload}


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text + "\n")
    else:
        Path(output).write_text(text + "\n")
        logger.info(f"Wrote {output}")


def _emit_json(payload: dict, output: Optional[Path]) -> None:
    text = write_json(_stamp(payload), None)
    _emit(text, output)


def _require(value, name: str):
    if value is None:
        raise SpecValidationError(f"--{name} is required for this command")
    return value


def load_data(cfg: RunConfig) -> ResponseMatrix:
    """Aggregated data from a response CSV or an aggregated JSON file."""
    path = Path(_require(cfg.input, "input"))
    if path.suffix.lower() == ".json":
        return read_response_matrix_json(path)
    return aggregate(read_responses_csv(path, missing_code=cfg.missing_code, header=cfg.header))


def _policy(cfg: RunConfig, spec) -> StartPolicy:
    params = None
    if cfg.params is not None:
        params = ParameterSetSchema.model_validate(read_json(cfg.params)).to_params(spec)
    return StartPolicy.from_mode(cfg.start, n_random=cfg.n_random, seed=cfg.seed, params=params)


def _groups(structure, r: int):
    return None if structure is None else resolve_structure(structure, r)


def run_aggregate(cfg: RunConfig) -> int:
    data = load_data(cfg)
    logger.info(f"{data.n} units, {data.m} distinct patterns, categories {list(data.cats)}")
    _emit_json(data.to_dict(), cfg.output)
    return EXIT_OK


def run_fit(cfg: RunConfig) -> int:
    data = load_data(cfg)
    spec = _require(cfg.spec, "k").to_spec(data.cats)
    result = fit(spec, data, _policy(cfg, spec), tol=cfg.tol, max_iter=cfg.max_iter, threads=cfg.threads)
    if cfg.fmt == "text":
        _emit(result.summary(), cfg.output)
    else:
        logger.info("\n" + result.summary())
        _emit_json(result.to_dict(), cfg.output)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def run_test_dim(cfg: RunConfig) -> int:
    data = load_data(cfg)
    schema = _require(cfg.spec, "k")
    r = len(data.cats)
    base = schema.to_spec(data.cats)
    multi1 = _groups(cfg.multi1, r) if cfg.multi1 is not None else base.multi
    result = test_dim(
        data, base.k, base.link, base.disc, base.difl,
        multi0=_groups(cfg.multi0, r),
        multi1=multi1,
        policy=_policy(cfg, base),
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        threads=cfg.threads,
    )
    if cfg.fmt == "text":
        _emit(result.summary(), cfg.output)
    else:
        logger.info("\n" + result.summary())
        _emit_json(result.to_dict(), cfg.output)
    converged = result.fit0.converged and result.fit1.converged
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def run_cluster(cfg: RunConfig) -> int:
    data = load_data(cfg)
    base = _require(cfg.spec, "k").to_spec(data.cats)
    trace = class_item(
        data, base.k, base.link, base.disc, base.difl,
        policy=_policy(cfg, base),
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        threads=cfg.threads,
        progress=cfg.progress,
    )
    s_hat = suggest_cut(trace, cfg.alpha)
    alpha = config.alpha if cfg.alpha is None else cfg.alpha
    if cfg.fmt == "dot":
        _emit(to_dot(trace), cfg.output)
    elif cfg.fmt == "text":
        _emit(merge_table(trace, details=True) + f"\n\nSuggested dimensions (alpha={alpha}): {s_hat}", cfg.output)
    else:
        _emit_json({**trace.to_dict(), "alpha": alpha, "suggested_dimensions": s_hat}, cfg.output)
    return EXIT_OK if all(trace.converged) else EXIT_NOT_CONVERGED


def _read_document(path: Path) -> dict:
    with open(path, "r") as f:
        if Path(path).suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(f) or {}
        return json.load(f)


def run_grid(cfg: RunConfig) -> int:
    data = load_data(cfg)
    grid = ModelGridSchema.model_validate(_read_document(_require(cfg.grid, "grid")))
    fits = []
    for spec in grid.to_specs(data.cats):
        fits.append(fit(spec, data, _policy(cfg, spec), tol=cfg.tol, max_iter=cfg.max_iter, threads=cfg.threads))
    table = information_table(fits)
    if cfg.fmt == "text":
        _emit(table.to_string(index=False), cfg.output)
    else:
        _emit_json({"n": data.n, "models": table.to_dict(orient="records")}, cfg.output)
    return EXIT_OK if all(f.converged for f in fits) else EXIT_NOT_CONVERGED


def run_simulate(cfg: RunConfig) -> int:
    truth = TruthSchema.model_validate(read_json(_require(cfg.truth, "truth")))
    spec = truth.to_spec()
    plan = SimulationPlan(
        spec=spec,
        params=truth.to_params(),
        n=_require(cfg.n if cfg.n is not None else truth.n, "n"),
        seed=cfg.seed if cfg.seed is not None else (truth.seed or 0),
        missing_rate=cfg.missing_rate if cfg.missing_rate is not None else truth.missing_rate,
        missing_code=config.missing_code if cfg.missing_code is None else cfg.missing_code,
    )
    simulated = simulate(plan, threads=cfg.threads)
    output = Path(_require(cfg.output, "output"))
    write_responses_csv(simulated.responses, output)
    truth_path = cfg.truth_output or output.with_suffix(".truth.json")
    write_json(_stamp(simulated.truth(plan)), truth_path)
    logger.info(f"Wrote truth to {truth_path}")
    return EXIT_OK


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "aggregate": run_aggregate,
    "fit": run_fit,
    "test-dim": run_test_dim,
    "cluster": run_cluster,
    "grid": run_grid,
    "simulate": run_simulate,
}


def run(cfg: RunConfig) -> int:
    """
    Execute one subcommand.

    Returns:
        0 on success, 2 on invalid input, 3 when a fit did not converge
        (artifacts are still written)
    """
    try:
        return HANDLERS[cfg.command](cfg)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "document"
        logger.error(f"Invalid field {where}: {first['msg']}")
        return EXIT_INVALID
    except (LcirtError, FileNotFoundError, json.JSONDecodeError, yaml.YAMLError) as e:
        logger.error(str(e))
        return EXIT_INVALID
