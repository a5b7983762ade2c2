"""Command-line entry point.

Subcommands: simulate (path CSV export), oracle (moment-table CSV),
branching (JSON-lines runs), regime (classification as JSON), verify
(regime verification report; exit code reflects the verdict), figure
(reference 1000-step sample paths straddling the critical angle).

Configuration is a JSON file; ``--set key=value`` overrides (dotted keys
descend into nested objects), ``--seed``/``--n``/``--paths`` are shorthands,
and the ``SPIRAL_ERW_SEED`` environment variable overrides everything.
Every output file embeds the effective-config hash and seed.  Exit codes:
0 success, 1 failed verification, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from spiral_erw import branching, oracle, stats, walk
from spiral_erw.angle import AngleLaw, DegenerateLawError, classify_regime

DEFAULT_CONFIG = {
    "law": {"type": "uniform", "lo": 0.0, "hi": 2.0 * math.pi},
    "n": 1000,
    "paths": 1,
    "seed": 0,
    "alpha": 1e-3,
    "tolerances": {},
}

_FMT = "%.17g"


class ConfigError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_nested(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into non-object config key {k!r}")
    node[keys[-1]] = value


def load_config(args) -> dict:
    """Effective configuration: defaults < file < CLI overrides < env seed."""
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if args.config is not None:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(file_cfg)
    if args.n is not None:
        cfg["n"] = args.n
    if args.paths is not None:
        cfg["paths"] = args.paths
    if args.seed is not None:
        cfg["seed"] = args.seed
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        _set_nested(cfg, key, _parse_value(value))
    env_seed = os.environ.get("SPIRAL_ERW_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"SPIRAL_ERW_SEED must be an integer, got {env_seed!r}") from exc
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _law(cfg: dict) -> AngleLaw:
    try:
        return AngleLaw.from_config(cfg["law"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid law configuration: {exc}") from exc


def _int_field(cfg: dict, key: str) -> int:
    try:
        value = int(cfg[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config field {key!r} must be an integer") from exc
    return value


def _header(cfg: dict) -> list[str]:
    return [f"# config_sha256={config_hash(cfg)}", f"# seed={cfg['seed']}"]


def _write_csv(path: Path, cfg: dict, columns: str, rows) -> None:
    with open(path, "w") as fh:
        for line in _header(cfg):
            fh.write(line + "\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(",".join(_FMT % x if isinstance(x, float) else str(x) for x in row) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    n, paths, seed = _int_field(cfg, "n"), _int_field(cfg, "paths"), _int_field(cfg, "seed")
    out = _out_dir(args)
    if cfg["law"].get("type") == "lattice":
        params = tuple(float(cfg["law"][k]) for k in ("p", "q", "r", "s"))
        rows = []
        for pid in range(paths):
            lp = walk.lattice_simulate(params, n, seed, path_index=pid)
            rows.extend(
                (pid, m + 1, int(x), int(y)) for m, (x, y) in enumerate(lp.positions)
            )
        _write_csv(out / "paths.csv", cfg, "path_id,n,x,y", rows)
    else:
        law = _law(cfg)
        rows = []
        for pid in range(paths):
            p = walk.simulate_path(law, n, seed, path_index=pid)
            rows.extend(
                (pid, m + 1, float(z.real), float(z.imag)) for m, z in enumerate(p.positions)
            )
        _write_csv(out / "paths.csv", cfg, "path_id,n,re,im", rows)
    print(f"wrote {out / 'paths.csv'}")
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args)
    law = _law(cfg)
    n = _int_field(cfg, "n")
    table = oracle.build_moment_table(law, n)
    rows = (
        (
            m + 1,
            float(table.a_seq[m].real),
            float(table.a_seq[m].imag),
            float(table.u_seq[m].real if np.iscomplexobj(table.u_seq) else table.u_seq[m]),
            float(table.q_seq[m].real),
            float(table.q_seq[m].imag),
            float(table.v_seq[m]),
        )
        for m in range(n)
    )
    out = _out_dir(args)
    _write_csv(out / "moments.csv", cfg, "n,re_a,im_a,u,re_q,im_q,v", rows)
    print(f"wrote {out / 'moments.csv'}")
    return 0


def cmd_branching(args) -> int:
    cfg = load_config(args)
    law = _law(cfg)
    n, paths, seed = _int_field(cfg, "n"), _int_field(cfg, "paths"), _int_field(cfg, "seed")
    superdiffusive = classify_regime(law).regime == "superdiffusive"
    out = _out_dir(args)
    target = out / "runs.jsonl"
    with open(target, "w") as fh:
        fh.write(json.dumps({"config_sha256": config_hash(cfg), "seed": seed}) + "\n")
        for pid in range(paths):
            run = branching.simulate_branching(law, n, seed, path_index=pid)
            tau_n = float(run.birth_times[-1])
            z1 = complex(np.sum(run.phases))
            record = {
                "n": n,
                "tau_n": tau_n,
                "z1_re": z1.real,
                "z1_im": z1.imag,
                "w_re": None,
                "w_im": None,
                "e": None,
            }
            if superdiffusive and n >= branching.MIN_LIMIT_HORIZON:
                est = branching.estimate_limits(run)
                record.update(w_re=est.w_hat.real, w_im=est.w_hat.imag, e=est.e_hat)
            fh.write(json.dumps(record) + "\n")
    print(f"wrote {target}")
    return 0


def cmd_regime(args) -> int:
    cfg = load_config(args)
    law = _law(cfg)
    regime = classify_regime(law)
    print(
        json.dumps(
            {
                "regime": regime.regime,
                "phi1": [regime.phi1.real, regime.phi1.imag],
                "sigma_squared": regime.sigma_squared,
            }
        )
    )
    return 0


_VERIFIERS = {
    "diffusive": stats.verify_diffusive,
    "critical": stats.verify_critical,
    "superdiffusive": stats.verify_superdiffusive,
}


def cmd_verify(args) -> int:
    cfg = load_config(args)
    law = _law(cfg)
    regime = cfg.get("regime") or classify_regime(law).regime
    if regime not in _VERIFIERS:
        raise ConfigError(f"unknown regime {regime!r}")
    config = stats.CampaignConfig(
        law=law,
        n=_int_field(cfg, "n"),
        paths=_int_field(cfg, "paths"),
        seed=_int_field(cfg, "seed"),
        tolerances=dict(cfg.get("tolerances") or {}),
        alpha=float(cfg.get("alpha", 1e-3)),
    )
    report = _VERIFIERS[regime](config)
    out = _out_dir(args)
    payload = report.to_json()
    payload["config_sha256"] = config_hash(cfg)
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    with open(out / "report.csv", "w") as fh:
        for line in _header(cfg):
            fh.write(line + "\n")
        fh.write(report.summary_csv())
    for c in report.criteria:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.criterion}: "
              f"estimate={c.estimate:.6g} target={c.target:.6g}")
    print(f"verification {'passed' if report.passed else 'FAILED'} "
          f"({out / 'report.json'})")
    return 0 if report.passed else 1


FIGURE_THETAS = (
    ("figure_a", math.pi / 3 - 0.1),
    ("figure_b", math.pi / 3),
    ("figure_c", math.pi / 3 + 0.1),
)


def cmd_figure(args) -> int:
    cfg = load_config(args)
    seed = _int_field(cfg, "seed")
    out = _out_dir(args)
    for name, theta in FIGURE_THETAS:
        law = AngleLaw.constant(theta)
        path = walk.simulate_path(law, 1000, seed)
        rows = ((m + 1, float(z.real), float(z.imag)) for m, z in enumerate(path.positions))
        local = dict(cfg, law={"type": "constant", "theta": theta}, n=1000, paths=1)
        _write_csv(out / f"{name}.csv", local, "n,re,im", rows)
        print(f"wrote {out / f'{name}.csv'} (theta={theta:.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiral-erw",
        description="Planar rotated elephant random walk: simulate, compute, verify.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    handlers = {
        "simulate": cmd_simulate,
        "oracle": cmd_oracle,
        "branching": cmd_branching,
        "regime": cmd_regime,
        "verify": cmd_verify,
        "figure": cmd_figure,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--paths", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config entry; dotted keys descend (law.theta=0.5)",
        )
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, DegenerateLawError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
