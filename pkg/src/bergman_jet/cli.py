"""Command line entry point: ``bergman-jet <metric|extend|sweep|lemmas> --config c.json --out dir``.

Exit codes: 0 pass, 2 configuration, 3 range, 4 conditioning, 5 check failure.
Outputs carry the schema version and a fingerprint of the canonical config;
they contain no timestamps, so equal configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import lemma_lab as lab
from .bergman import BasisTruncation, dual_norm_sweep, functional_moments
from .errors import BergmanJetError, ConfigError
from .extension import ExtensionProblem, verify_optimal_bound
from .geometry import DomainSpec, ModelGeometry, SubmanifoldSpec
from .jet_metric import JetSection, metric_shell, section_norm
from .polynomial import Poly
from .quadrature import QuadratureConfig
from .weights import GreenSpec, Model, WeightSpec

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_CONFIG, EXIT_RANGE, EXIT_CONDITIONING, EXIT_CHECK = 0, 2, 3, 4, 5


def load_schema():
    text = resources.files("bergman_jet").joinpath("schema/config.schema.json").read_text("utf-8")
    return json.loads(text)


def fingerprint(config):
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def load_config(path):
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(config, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from exc
    return config


# -- config -> objects ---------------------------------------------------------

def grid(spec):
    if isinstance(spec, list):
        return [float(v) for v in spec]
    start, stop, step = spec["start"], spec["stop"], spec["step"]
    count = int(round((stop - start) / step))
    return [start + i * step for i in range(count + 1)]


def _params(spec):
    return {k: v for k, v in spec.items() if k != "kind"}


def build_model(config) -> Model:
    g = config["geometry"]
    d = g["domain"]
    dom = DomainSpec(d["kind"], d["n"], tuple(d.get("radii", ())),
                     tuple(tuple(tuple(side) for side in r) for r in d.get("extents", ())))
    geom = ModelGeometry(dom, SubmanifoldSpec(g["k"]))
    w = config["weights"]
    gamma = w.get("gamma", {"kind": "zero"})
    phi = w.get("phi", {"kind": "zero"})
    model = Model(geom, GreenSpec(g["k"], gamma["kind"], _params(gamma)),
                  WeightSpec(phi["kind"], _params(phi)), w["p"])
    model.check_negative(seed=config["seed"])
    return model


def build_cfg(config) -> QuadratureConfig:
    return QuadratureConfig(**config.get("quadrature", {}), seed=config["seed"])


def build_jet(config, model, key="jet"):
    if key not in config:
        raise ConfigError(f"config needs a {key!r} entry for this command")
    return JetSection(Poly.from_json(model.n, config[key]), model.k)


def base_point(config, model):
    m = model.n - model.k
    pts = config.get("base_point")
    if pts is None:
        return (0j,) * m
    return model.geometry.base_point([complex(a, b) for a, b in pts])


# -- output ------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def _header(config):
    return {"schema_version": SCHEMA_VERSION, "fingerprint": fingerprint(config)}


def write_json(path, config, payload):
    doc = {"schema": _header(config), **payload}
    text = json.dumps(doc, sort_keys=True, indent=2, default=_jsonable)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _cell(v):
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, default=_jsonable)
    return "" if v is None else str(v)


def write_csv(path, config, columns, rows):
    buf = io.StringIO()
    h = _header(config)
    buf.write(f"# schema_version={h['schema_version']} fingerprint={h['fingerprint']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _scoreboard_rows(reports, extra=()):
    return [(*extra, r.name, r.status, r.witness, r.margin) for r in reports]


# -- commands ----------------------------------------------------------------

def cmd_metric(config, out: Path):
    model = build_model(config)
    cfg = build_cfg(config)
    jet = build_jet(config, model)
    x = base_point(config, model)
    shell = config.get("shell", {})
    fx = jet.at(x)
    mv = metric_shell(fx, fx, model, shell.get("t_schedule", [-20.0, -25.0, -30.0]), cfg,
                      shell.get("tolerance", 1e-4))
    payload = {"metric": mv.to_json(), "base_point": [[z.real, z.imag] for z in x],
               "section_norm2": section_norm(jet, model, cfg) if not jet.is_zero() else 0.0,
               "verdict": "PASS" if mv.agree else "FAIL"}
    write_json(out / "metric.json", config, payload)
    return EXIT_OK if mv.agree else EXIT_CHECK


def cmd_extend(config, out: Path):
    model = build_model(config)
    cfg = build_cfg(config)
    jet = build_jet(config, model)
    N = config.get("truncation", {}).get("N")
    prob = ExtensionProblem.build(jet, model, N)
    res = verify_optimal_bound(prob, cfg, config.get("extension", {}).get("tolerance", 5e-3))
    write_json(out / "extension.json", config, {"extension": res.to_json()})
    return EXIT_OK if res.verdict else EXIT_CHECK


def cmd_sweep(config, out: Path):
    model = build_model(config)
    cfg = build_cfg(config)
    jet = build_jet(config, model)
    if jet.is_zero():
        raise ConfigError("sweep needs a nonzero jet")
    fam = config["weights"].get("family", {})
    qs = fam.get("q", [2.0, 3.0, 5.0])
    s_grid = grid(fam.get("s_grid", {"start": -20.0, "stop": 0.0, "step": 0.5}))
    opts = config.get("sweep", {})
    tol = opts.get("tolerance", 1e-5)
    trunc = BasisTruncation.for_model(model, config.get("truncation", {}).get("N"))
    xi = functional_moments(jet, trunc, model, cfg)
    J = section_norm(jet, model, cfg)
    rows, board, reports = [], [], []
    tables = {}
    for q in qs:
        tab = dual_norm_sweep(xi, model, trunc, s_grid, q, cfg)
        tables[q] = tab
        for (s, v), e in zip(tab.rows, tab.scaled()):
            rows.append((s, float(q), v, float(e)))
        group = []
        if len(tab.rows) >= 3:
            group.append(lab.check_log_convexity(tab, tol))
        if len(tab.rows) >= 2:
            group.append(lab.check_increasing_es(tab, tol))
        reports += group
        board += _scoreboard_rows(group, (float(q),))
    q_top = max(qs)
    if q_top > 1:
        r = lab.check_limit_bound(tables[q_top], J, tol=opts.get("limit_tolerance", 1e-4))
        reports.append(r)
        board += _scoreboard_rows([r], (float(q_top),))
    write_csv(out / "sweep.csv", config, ["s", "q", "norm", "es_norm"], rows)
    write_csv(out / "scoreboard.csv", config, ["q", "check", "status", "witness", "margin"], board)
    write_json(out / "sweep.json", config,
               {"jet_norm2": J, "reports": [r.to_json() for r in reports]})
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def _one_d(spec):
    return lab.OneDFunction(spec["kind"], _params(spec))


def run_battery_entry(entry, config, cfg):
    kind = entry["check"]
    if kind == "default":
        return lab.default_battery(cfg)
    if kind == "kernel":
        return [lab.check_kernel_limit(_one_d(entry["F"]), entry.get("C", 1.0), entry["q"],
                                       grid(entry.get("s_grid", [-20.0])), entry.get("tol", 1e-3))]
    if kind == "averaging":
        g = [10.0 ** -e for e in range(1, 7)]
        return [lab.check_averaging_inequality(_one_d(entry["P"]), grid(entry.get("u_grid", g)),
                                               grid(entry.get("s_grid", g)), entry.get("tol", 1e-9))]
    model = build_model(config)
    h = Poly.from_json(model.n, entry["h"]) if "h" in entry else \
        build_jet(config, model).poly
    if kind == "compare":
        return [lab.check_compare_lemma(h, model, entry.get("s", -1.0),
                                        entry.get("t_schedule", [-20.0, -25.0, -30.0]),
                                        entry.get("C"), cfg)]
    jet_norm2 = entry.get("jet_norm2")
    if jet_norm2 is None:
        jet_norm2 = section_norm(build_jet(config, model), model, cfg)
    return [lab.check_decomposition(h, model, entry.get("q", 3.0),
                                    grid(entry.get("s_grid", [-20.0, -10.0, -5.0])),
                                    jet_norm2, cfg, entry.get("tol", 1e-6))]


def cmd_lemmas(config, out: Path):
    battery = config.get("lemmas", {}).get("battery", [])
    if not battery:
        raise ConfigError("lemma battery is empty")
    cfg = build_cfg(config)
    reports = []
    for entry in battery:
        reports += run_battery_entry(entry, config, cfg)
    write_csv(out / "lemmas.csv", config, ["check", "status", "witness", "margin"],
              _scoreboard_rows(reports))
    write_json(out / "lemmas.json", config, {"reports": [r.to_json() for r in reports]})
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


COMMANDS = {"metric": cmd_metric, "extend": cmd_extend, "sweep": cmd_sweep, "lemmas": cmd_lemmas}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="bergman-jet",
                                 description="Weighted L2 jet extension experiments.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    try:
        config = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[args.command](config, out)
    except BergmanJetError as exc:
        print(f"bergman-jet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code in (2, 3, 4) else EXIT_CHECK
    print(f"bergman-jet {args.command}: {'PASS' if code == EXIT_OK else 'FAIL'}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
