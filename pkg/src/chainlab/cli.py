"""Command-line surface: config ingestion, dispatch, report persistence.

Configuration may come from a JSON file (--config) and/or flags; flags
override file fields, which override defaults.  Reports are written
atomically (temp file, then rename) and are byte-identical across runs
for identical inputs.

Exit codes: 0 success, 1 a required case check failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, fields

from .actions import build_action
from .cases import case_heisenberg, case_not_virtually_homogeneous, case_split_ext_example
from .chains import heis_diag, split_diag, truncated_kernel, weak_regularity_probe
from .groups import GroupModel, model_from_name
from .growth import ball_series, degree_estimate, default_radius_cap, lcs_ranks


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "split-ext"
    rank: int | None = None
    family: str | None = None
    p: int | None = None
    q: int | None = None
    third_base: int = 3
    a: int | None = None
    b: int | None = None
    c: int | None = None
    depth: int = 4
    rmax: int | None = None
    box: int = 30
    out: str | None = None
    csv: str | None = None
    seed: int = 20160608

    def group_model(self) -> GroupModel:
        try:
            return model_from_name(self.model, self.rank)
        except ValueError as e:
            raise ConfigError(f"group.model: {e}") from None

    def chain(self, depth_margin: int = 1):
        if self.family in (None, "split-diag"):
            self._need("chain.p", self.p)
            self._need("chain.q", self.q)
            try:
                return split_diag(self.p, self.q, self.third_base, max_depth=self.depth + depth_margin)
            except ValueError as e:
                raise ConfigError(f"chain: {e}") from None
        if self.family == "heis-diag":
            self._need("chain.p", self.p)
            self._need("chain.q", self.q)
            try:
                return heis_diag(self.p, self.q, max_depth=self.depth + depth_margin)
            except ValueError as e:
                raise ConfigError(f"chain: {e}") from None
        raise ConfigError(f"chain.family: unknown family {self.family!r}")

    @staticmethod
    def _need(path: str, value):
        if value is None:
            raise ConfigError(f"{path}: required field is missing")


_SCHEMA = {
    "group": {"model", "rank"},
    "chain": {"family", "p", "q", "third_base", "a", "b", "c"},
    "depth": None,
    "rmax": None,
    "box": None,
    "out": None,
    "csv": None,
    "seed": None,
}

_INT_FIELDS = {"rank", "p", "q", "third_base", "a", "b", "c", "depth", "rmax", "box", "seed"}


def parse_config(text: str) -> RunConfig:
    """Validated RunConfig from a JSON document; unknown keys are rejected
    with a path-qualified message."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    cfg = RunConfig()
    for key, value in doc.items():
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown key")
        if _SCHEMA[key] is None:
            _assign(cfg, key, value, key)
        else:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object")
            for sub, sval in value.items():
                if sub not in _SCHEMA[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                _assign(cfg, sub, sval, f"{key}.{sub}")
    _validate(cfg)
    return cfg


def _assign(cfg: RunConfig, field_name: str, value, path: str) -> None:
    if field_name in _INT_FIELDS:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer")
    setattr(cfg, field_name, value)


def _validate(cfg: RunConfig) -> None:
    if cfg.model == "free-abelian" and (cfg.rank is None or cfg.rank < 1):
        raise ConfigError("group.rank: rank >= 1 required for the free-abelian model")
    if cfg.p is not None and cfg.q is not None and cfg.p == cfg.q:
        raise ConfigError("chain: p and q must be distinct primes")
    if cfg.depth < 0:
        raise ConfigError("depth: must be nonnegative")
    if cfg.box < 1:
        raise ConfigError("box: must be positive")


def atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".chainlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_bytes(obj: dict) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _emit(cfg: RunConfig, payload: dict, summary: str) -> None:
    if cfg.out:
        atomic_write(cfg.out, report_bytes(payload))
        summary += f" -> {cfg.out}"
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(summary)


# -- command handlers ----------------------------------------------------


def cmd_chain_classify(cfg: RunConfig) -> int:
    chain = cfg.chain()
    report = weak_regularity_probe(chain, cfg.depth)
    _emit(cfg, report.to_json_dict(), f"chain classify: verdict={report.verdict} depth={cfg.depth}")
    return 0


def cmd_chain_kernel(cfg: RunConfig) -> int:
    chain = cfg.chain()
    members = truncated_kernel(chain, cfg.depth, cfg.box)
    payload = {
        "chain": chain.describe(),
        "depth": cfg.depth,
        "box": cfg.box,
        "members": [list(g.coords) for g in members],
        "trivial": len(members) == 1,
    }
    _emit(cfg, payload, f"chain kernel: {len(members)} member(s) in box {cfg.box}")
    return 0


def cmd_action_levels(cfg: RunConfig) -> int:
    chain = cfg.chain()
    action = build_action(chain, cfg.depth)
    payload = action.to_json_dict()
    _emit(cfg, payload, f"action levels: sizes={action.sizes()}")
    return 0


def cmd_growth_ball(cfg: RunConfig) -> int:
    model = cfg.group_model()
    rmax = cfg.rmax if cfg.rmax is not None else default_radius_cap(model)
    series = ball_series(model, rmax)
    if cfg.csv:
        atomic_write(cfg.csv, series.to_csv().encode())
    _emit(cfg, series.to_json_dict(), f"growth ball: |B({rmax})| = {series.entries[-1][1]}")
    return 0


def cmd_growth_degree(cfg: RunConfig) -> int:
    model = cfg.group_model()
    rmax = cfg.rmax if cfg.rmax is not None else default_radius_cap(model)
    series = ball_series(model, rmax)
    est = degree_estimate(series)
    payload = {"series": series.to_json_dict(), "estimate": est.to_json_dict()}
    _emit(cfg, payload, f"growth degree: slope={est.slope:.3f} doubling={est.doubling:.3f}")
    return 0


def cmd_growth_bass(cfg: RunConfig) -> int:
    model = cfg.group_model()
    report = lcs_ranks(model)
    summary = (
        f"growth bass: ranks={report.ranks} degree={report.bass_degree}"
        if report.nilpotent
        else f"growth bass: {report.note}"
    )
    _emit(cfg, report.to_json_dict(), summary)
    return 0


def _finish_case(cfg: RunConfig, report) -> int:
    _emit(cfg, report.to_json_dict(), f"case {report.case}: {'pass' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def cmd_case_splitext(cfg: RunConfig) -> int:
    RunConfig._need("chain.p", cfg.p)
    RunConfig._need("chain.q", cfg.q)
    return _finish_case(cfg, case_split_ext_example(cfg.p, cfg.q, cfg.depth))


def cmd_case_heisenberg(cfg: RunConfig) -> int:
    RunConfig._need("chain.p", cfg.p)
    RunConfig._need("chain.q", cfg.q)
    return _finish_case(cfg, case_heisenberg(cfg.p, cfg.q, cfg.depth))


def cmd_case_notvh(cfg: RunConfig) -> int:
    for name in ("p", "q", "a", "b", "c"):
        RunConfig._need(f"chain.{name}", getattr(cfg, name))
    return _finish_case(
        cfg, case_not_virtually_homogeneous(cfg.p, cfg.q, cfg.a, cfg.b, cfg.c, cfg.depth)
    )


_COMMANDS = {
    ("chain", "classify"): cmd_chain_classify,
    ("chain", "kernel"): cmd_chain_kernel,
    ("action", "levels"): cmd_action_levels,
    ("growth", "ball"): cmd_growth_ball,
    ("growth", "degree"): cmd_growth_degree,
    ("growth", "bass"): cmd_growth_bass,
    ("case", "splitext"): cmd_case_splitext,
    ("case", "heisenberg"): cmd_case_heisenberg,
    ("case", "notvh"): cmd_case_notvh,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainlab",
        description="exact computations with group chains: cosets, regularity, actions, growth",
    )
    sub = parser.add_subparsers(dest="group_cmd", required=True)

    def add(group: str, name: str, help_text: str):
        if group not in add.groups:
            gp = sub.add_parser(group)
            add.groups[group] = gp.add_subparsers(dest="sub_cmd", required=True)
        p = add.groups[group].add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--model", choices=["free-abelian", "heisenberg", "split-ext"])
        p.add_argument("--rank", type=int)
        p.add_argument("--family", choices=["heis-diag", "split-diag"])
        p.add_argument("--p", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--third-base", type=int, dest="third_base")
        p.add_argument("--a", type=int)
        p.add_argument("--b", type=int)
        p.add_argument("--c", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--rmax", type=int)
        p.add_argument("--box", type=int)
        p.add_argument("--out", help="report file (written atomically)")
        p.add_argument("--csv", help="also write a radius,count CSV (growth ball)")
        p.add_argument("--seed", type=int, help="seed recorded for sampled runs")
        return p

    add.groups = {}
    add("chain", "classify", "regularity verdict for a chain at a depth")
    add("chain", "kernel", "box-truncated kernel members of a chain")
    add("action", "levels", "coset tables, transitivity and generator cycles per level")
    add("growth", "ball", "exact word-ball sizes")
    add("growth", "degree", "growth degree estimators from ball sizes")
    add("growth", "bass", "lower-central-series ranks and growth degree")
    add("case", "splitext", "split-extension diagonal chain case study")
    add("case", "heisenberg", "Heisenberg diagonal chain case study")
    add("case", "notvh", "Heisenberg chain inside a finite cover")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = RunConfig()
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
    # defaults for family by command family flow are handled per command
    _validate(cfg)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        handler = _COMMANDS[(args.group_cmd, args.sub_cmd)]
        return handler(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
