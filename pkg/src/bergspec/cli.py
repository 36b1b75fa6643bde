"""Command-line frontend: ``bergspec {gamma,matrix,verify,spectrum,decompose}``.

Settings come from an optional JSON config file (``--config``) with flags
taking precedence. Reports are deterministic JSON (schema
``bergspec_report_v1``) or a flat CSV projection.

Exit codes: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 quadrature failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bergman import WeightedSpaceParams
from .decomposition import split, verify_norm_factorization, verify_scalar_blocks, verify_weight_shift
from .gamma import METHODS, build_gamma_sequence
from .lattice import Partition, enumerate_multi_indices
from .oracle import (
    BallQuadrature,
    compare_gamma,
    diagonality_report,
    quadrature_for_symbol,
    toeplitz_matrix_bruteforce,
)
from .quadrature import QuadratureError
from .spectral import (
    commutator_norm_vs_matrix,
    compactness_classify,
    diagonal_from_gamma,
    equivariance_residual,
    joint_spectrum,
    random_block_unitary,
    representation_matrix,
)
from .symbols import PolynomialInRho, SymbolClass, SymbolSpec, parse_symbol, profile_arity

SCHEMA = "bergspec_report_v1"
EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_QUADRATURE = 0, 1, 2, 3
SUITES = ("diagonality", "gamma-match", "commutativity", "equivariance", "decomposition", "norm-change")
COMMANDS = ("gamma", "matrix", "verify", "spectrum", "decompose")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: Optional[int] = None
    lam: float = 0.0
    partition: Optional[str] = None
    symbol: Optional[str] = None
    symbol_b: Optional[str] = None
    cap: int = 4
    mode: str = "tensor"
    nodes: Optional[int] = None
    radial_nodes: Optional[int] = None
    seed: int = 0
    samples: int = 200_000
    tol: Optional[float] = None
    method: str = "auto"
    format: str = "json"
    out: Optional[str] = None
    suite: list = field(default_factory=list)
    window: int = 4
    n_prime: Optional[int] = None
    unitaries: int = 5

    def validate(self) -> "RunConfig":
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.mode not in ("tensor", "mc"):
            raise ConfigError(f"mode must be tensor or mc, got {self.mode!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not isinstance(self.cap, int) or self.cap < 0:
            raise ConfigError(f"cap must be a non-negative integer, got {self.cap!r}")
        if self.window < 1:
            raise ConfigError("window must be positive")
        if self.samples < 1 or self.unitaries < 1:
            raise ConfigError("samples and unitaries must be positive")
        bad = [s for s in self.suite if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; choose from {list(SUITES)}")
        try:
            k = self.partition_obj()
            if k is not None and self.n is not None and k.n != self.n:
                raise ConfigError(f"partition {k} does not sum to n={self.n}")
            WeightedSpaceParams(self.dimension(), self.lam)
            self.symbol_obj()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def partition_obj(self) -> Optional[Partition]:
        if self.partition is None:
            return None
        return Partition.parse(self.partition)

    def dimension(self) -> int:
        k = self.partition_obj()
        if self.n is not None:
            return self.n
        if k is not None:
            return k.n
        raise ConfigError("need --n or --partition")

    def symbol_obj(self, text: Optional[str] = None) -> Optional[SymbolSpec]:
        text = text or self.symbol
        if text is None:
            return None
        return parse_symbol(text, self.partition_obj(), self.dimension())

    def spectrum_partition(self) -> Partition:
        a = self.symbol_obj()
        if a is not None:
            return a.partition
        return self.partition_obj() or Partition.minimal(self.dimension())

    def quadrature(self, a: SymbolSpec) -> BallQuadrature:
        if self.mode == "mc":
            return BallQuadrature.monte_carlo(a.n, self.samples, self.seed)
        if a.n > 3:
            raise ConfigError("tensor mode supports n <= 3; use --mode mc")
        q = quadrature_for_symbol(a, self.cap)
        if self.radial_nodes:
            q = BallQuadrature.tensor(a.n, self.cap, radial_nodes=self.radial_nodes, order=q.order)
        return q

    def tolerance(self, default: float) -> float:
        return self.tol if self.tol is not None else default

    def meta(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d.pop("out")
        return d


_FLAG_TO_FIELD = {
    "n": "n", "lam": "lam", "partition": "partition", "symbol": "symbol", "symbol_b": "symbol_b",
    "cap": "cap", "mode": "mode", "nodes": "nodes", "radial_nodes": "radial_nodes", "seed": "seed",
    "samples": "samples", "tol": "tol", "method": "method", "format": "format", "out": "out",
    "suite": "suite", "window": "window", "n_prime": "n_prime", "unitaries": "unitaries",
}
_FILE_ALIASES = {"lambda": "lam", "N": "cap", "symbol2": "symbol_b"}


def _normalize_file(data: dict) -> dict:
    out = {}
    for key, val in data.items():
        key = _FILE_ALIASES.get(key, key).replace("-", "_")
        if key not in _FLAG_TO_FIELD.values():
            raise ConfigError(f"unknown config key {key!r}")
        if key == "partition" and isinstance(val, list):
            val = ",".join(str(v) for v in val)
        if key == "suite" and isinstance(val, str):
            val = [s for s in val.split(",") if s]
        out[key] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update(_normalize_file(data))
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    if isinstance(values.get("suite"), str):
        values["suite"] = [s for s in values["suite"].split(",") if s]
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# report helpers

def _atoms(gs) -> list:
    return [{"s": list(s), "gamma": float(gs[s]), "multiplicity": gs.multiplicity(s)} for s in gs.labels()]


def _report(command: str, cfg: RunConfig, **body) -> dict:
    return {"schema": SCHEMA, "command": command, "meta": cfg.meta(), **body}


def _need_symbol(cfg: RunConfig) -> SymbolSpec:
    a = cfg.symbol_obj()
    if a is None:
        raise ConfigError("this command needs --symbol")
    return a


def cmd_gamma(cfg: RunConfig):
    a = _need_symbol(cfg)
    gs = build_gamma_sequence(a, cfg.lam, cfg.cap, method=cfg.method, nodes=cfg.nodes)
    rep = _report("gamma", cfg, atoms=_atoms(gs))
    rep["meta"].update(partition_blocks=list(gs.partition.blocks), symbol_class=a.cls.value,
                       alpha_dprime_independent=gs.alpha_dprime_independent)
    rows = [[" ".join(map(str, x["s"])), repr(x["gamma"]), x["multiplicity"]] for x in rep["atoms"]]
    return EXIT_OK, rep, (["s", "gamma", "multiplicity"], rows)


def cmd_matrix(cfg: RunConfig):
    a = _need_symbol(cfg)
    q = cfg.quadrature(a)
    M = toeplitz_matrix_bruteforce(a, cfg.lam, cfg.cap, q)
    E = M.entries
    rep = _report("matrix", cfg, basis=[list(b) for b in M.basis],
                  real=E.real.tolist(), imag=E.imag.tolist(), quadrature=M.quadrature)
    rows = []
    for i, bi in enumerate(M.basis):
        for j, bj in enumerate(M.basis):
            rows.append([" ".join(map(str, bi)), " ".join(map(str, bj)), repr(float(E[i, j].real)), repr(float(E[i, j].imag))])
    return EXIT_OK, rep, (["row", "col", "re", "im"], rows)


def _default_partner(a: SymbolSpec) -> SymbolSpec:
    arity = profile_arity(a.cls, a.partition)
    exps = (1.0,) + (0.0,) * (arity - 1)
    return SymbolSpec(a.cls, a.partition, PolynomialInRho({tuple(int(e) for e in exps): 1.0, (0,) * arity: 0.5}, arity=arity))


def _suite_result(name: str, passed: bool, tol: float, **measured) -> dict:
    return {"check": name, "passed": bool(passed), "tolerance": tol, **measured}


def _run_check(name: str, cfg: RunConfig, a: SymbolSpec) -> dict:
    lam, N = cfg.lam, cfg.cap
    if name in ("diagonality", "gamma-match"):
        q = cfg.quadrature(a)
        tol = cfg.tolerance(q.default_tol())
        M = toeplitz_matrix_bruteforce(a, lam, N, q)
        if name == "diagonality":
            rep = diagonality_report(M, a.partition, tol)
            return _suite_result(name, rep.passed, tol, off_fiber_max=rep.off_fiber_max,
                                 within_fiber_max=rep.within_fiber_max)
        gs = build_gamma_sequence(a, lam, N, method=cfg.method, nodes=cfg.nodes)
        cmp = compare_gamma(M, gs, tol)
        return _suite_result(name, cmp.passed, tol, max_deviation=cmp.max_deviation,
                             worst_label=list(cmp.worst_label) if cmp.worst_label else None)
    if name == "commutativity":
        b = cfg.symbol_obj(cfg.symbol_b) if cfg.symbol_b else _default_partner(a)
        if b.partition != a.partition:
            raise ConfigError("commutativity needs both symbols on the same partition")
        q = cfg.quadrature(a) if cfg.mode == "mc" else None
        if q is None and a.n > 3:
            raise ConfigError("tensor mode supports n <= 3; use --mode mc")
        tol = cfg.tolerance(1e-8 if cfg.mode == "tensor" else 5 * BallQuadrature.monte_carlo(a.n, cfg.samples).default_tol())
        c = commutator_norm_vs_matrix(a, b, lam, N, q)
        return _suite_result(name, c < tol, tol, commutator_max=c, partner=b.describe())
    if name == "equivariance":
        tol = cfg.tolerance(1e-9)
        T = diagonal_from_gamma(build_gamma_sequence(a, lam, N, method=cfg.method, nodes=cfg.nodes))
        rng = np.random.default_rng(cfg.seed)
        worst_diag, worst_oracle = 0.0, 0.0
        M = None
        if a.n <= 3 or cfg.mode == "mc":
            M = toeplitz_matrix_bruteforce(a, lam, N, cfg.quadrature(a)).entries
        for _ in range(cfg.unitaries):
            U = random_block_unitary(a.partition, rng)
            worst_diag = max(worst_diag, equivariance_residual(T, U, a.partition))
            if M is not None:
                R = representation_matrix(U, a.partition, lam, N)
                worst_oracle = max(worst_oracle, float(np.max(np.abs(M @ R - R @ M))))
        oracle_tol = tol if cfg.mode == "tensor" else 5 * cfg.quadrature(a).default_tol()
        return _suite_result(name, worst_diag < tol and worst_oracle < oracle_tol, tol,
                             diagonal_residual=worst_diag, oracle_residual=worst_oracle, unitaries=cfg.unitaries)
    if name == "decomposition":
        tol = cfg.tolerance(1e-9)
        if a.cls is SymbolClass.WEIGHTED:
            rep = verify_scalar_blocks(a, lam, N, tol, method=cfg.method, oracle=a.n <= 3 and cfg.mode == "tensor")
            return _suite_result(name, rep.passed, tol, identity="scalar_blocks", max_deviation=rep.max_deviation,
                                 beta_only_spread=rep.extra["beta_only_spread"],
                                 reduced_gamma_deviation=rep.extra["reduced_gamma_deviation"],
                                 oracle_deviation=rep.extra.get("oracle_deviation"))
        if a.cls is SymbolClass.DEGENERATE:
            b = SymbolSpec.quasi_radial(a.reduced_partition, a.profile)
            rep = verify_weight_shift(b, a.partition.blocks[-1], lam, N, tol, method=cfg.method)
            return _suite_result(name, rep.passed, tol, identity="weight_shift", max_deviation=rep.max_deviation,
                                 worst=list(rep.worst) if rep.worst else None)
        raise ConfigError("the decomposition suite needs a weighted or degenerate symbol")
    if name == "norm-change":
        tol = cfg.tolerance(1e-9)
        n = a.n
        if n < 2 or n > 3:
            raise ConfigError("norm-change needs 2 <= n <= 3")
        n_prime = cfg.n_prime or 1
        rep = verify_norm_factorization(n, n_prime, lam, N, tol)
        return _suite_result(name, rep.passed, tol, max_deviation=rep.max_deviation,
                             closed_form_vs_oracle=rep.extra["closed_form_vs_oracle"], n_prime=n_prime)
    raise ConfigError(f"unknown suite {name!r}")


def cmd_verify(cfg: RunConfig):
    a = _need_symbol(cfg)
    if not cfg.suite:
        raise ConfigError("verify needs a non-empty --suite")
    checks = [_run_check(name, cfg, a) for name in cfg.suite]
    ok = all(c["passed"] for c in checks)
    rep = _report("verify", cfg, checks=checks, passed=ok)
    keys = sorted({k for c in checks for k in c})
    rows = [[json.dumps(c.get(k)) if not isinstance(c.get(k), str) else c[k] for k in keys] for c in checks]
    return (EXIT_OK if ok else EXIT_CHECK), rep, (keys, rows)


def cmd_spectrum(cfg: RunConfig):
    k = cfg.spectrum_partition()
    js = joint_spectrum(k, cfg.cap)
    body = {"partition_blocks": list(k.blocks),
            "atoms": [{"s": list(s), "multiplicity": d} for s, d in js.atoms]}
    a = cfg.symbol_obj()
    if a is not None:
        gs = build_gamma_sequence(a, cfg.lam, cfg.cap, method=cfg.method, nodes=cfg.nodes)
        for atom, g in zip(body["atoms"], _atoms(gs)):
            atom["gamma"] = g["gamma"]
        try:
            body["compactness"] = compactness_classify(gs, cfg.window).to_dict()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    rep = _report("spectrum", cfg, **body)
    header = ["s", "multiplicity"] + (["gamma"] if a is not None else [])
    rows = [[" ".join(map(str, x["s"])), x["multiplicity"]] + ([repr(x["gamma"])] if a is not None else [])
            for x in body["atoms"]]
    return EXIT_OK, rep, (header, rows)


def cmd_decompose(cfg: RunConfig):
    a = cfg.symbol_obj()
    n = cfg.dimension()
    if a is not None and a.cls in (SymbolClass.WEIGHTED, SymbolClass.DEGENERATE):
        k_prime = a.reduced_partition if a.cls is SymbolClass.WEIGHTED else None
        n_prime = a.reduced_partition.n if a.cls is SymbolClass.WEIGHTED else a.partition.blocks[-1]
    else:
        n_prime = cfg.n_prime or 1
        k_prime = None
    if not 1 <= n_prime < n:
        raise ConfigError(f"n_prime must lie in [1, {n - 1}]")
    if k_prime is None:
        k_prime = Partition.minimal(n_prime)
    n_dprime = n - n_prime
    if a is not None and a.cls is SymbolClass.DEGENERATE:
        # coordinates are ordered (z'', z'); z' is the last block
        splits = []
        for alpha in enumerate_multi_indices(n, cfg.cap):
            sp = split(alpha[n_dprime:] + alpha[:n_dprime], k_prime, n_dprime, cfg.lam)
            splits.append(sp)
    else:
        splits = [split(alpha, k_prime, n_dprime, cfg.lam) for alpha in enumerate_multi_indices(n, cfg.cap)]
    table = [{"alpha_prime": list(s.alpha_prime), "alpha_dprime": list(s.alpha_dprime),
              "beta": list(s.beta), "shifted_lambda": s.shifted_lambda} for s in splits]
    body = {"n_prime": n_prime, "n_dprime": n_dprime, "k_prime": list(k_prime.blocks), "splits": table}
    code = EXIT_OK
    if a is not None and a.cls in (SymbolClass.WEIGHTED, SymbolClass.DEGENERATE):
        check = _run_check("decomposition", cfg, a)
        body["identity"] = check
        code = EXIT_OK if check["passed"] else EXIT_CHECK
    rep = _report("decompose", cfg, **body)
    rows = [[" ".join(map(str, t["alpha_prime"])), " ".join(map(str, t["alpha_dprime"])),
             " ".join(map(str, t["beta"])), repr(t["shifted_lambda"])] for t in table]
    return code, rep, (["alpha_prime", "alpha_dprime", "beta", "shifted_lambda"], rows)


HANDLERS = {"gamma": cmd_gamma, "matrix": cmd_matrix, "verify": cmd_verify,
            "spectrum": cmd_spectrum, "decompose": cmd_decompose}


def render(rep: dict, table, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rep, sort_keys=True, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header, rows = table
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--partition", help="block sizes, e.g. 2,1")
    p.add_argument("--symbol", help="class:profile, e.g. radial:poly:1,-1 or quasi:mono:1,0")
    p.add_argument("--symbol-b", dest="symbol_b", help="partner symbol for the commutativity suite")
    p.add_argument("--cap", type=int, help="degree cap N")
    p.add_argument("--mode", choices=("tensor", "mc"))
    p.add_argument("--nodes", type=int, help="simplex quadrature nodes per axis")
    p.add_argument("--radial-nodes", dest="radial_nodes", type=int, help="oracle radial nodes per axis")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out")
    p.add_argument("--suite", help="comma-separated: " + ",".join(SUITES))
    p.add_argument("--window", type=int)
    p.add_argument("--n-prime", dest="n_prime", type=int)
    p.add_argument("--unitaries", type=int, help="random block unitaries for the equivariance suite")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        code, rep, table = HANDLERS[args.command](cfg)
    except QuadratureError as exc:
        print(f"quadrature failure at label {exc.label}: coarse={exc.coarse!r} fine={exc.fine!r}: {exc}",
              file=sys.stderr)
        return EXIT_QUADRATURE
    except (ConfigError, ValueError, OverflowError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(rep, table, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
