"""Command-line entry point.

Every command is deterministic given its flags (including --seed).  With
--out-dir the result is written atomically next to a manifest that lists
the sha256 of every artifact; otherwise it goes to stdout.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from . import __version__
from .exactalg import ConfigurationError, ConsistencyError, ExactAlgebraError, TruncatedSeries

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class VerificationFailure(Exception):
    def __init__(self, report: Any):
        super().__init__(str(report))
        self.report = report


@dataclass
class RunConfig:
    genus: int = 1
    order: Fraction = Fraction(1)
    cutoff: int | None = None
    mode: str = "evaluated"
    seed: int = 0
    params: str | None = None
    out_dir: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.genus < 1:
            raise ConfigurationError("--genus must be positive")
        if self.order < 0 or (2 * self.order).denominator != 1:
            raise ConfigurationError("--order must be a nonnegative half-integer")
        if self.cutoff is not None and self.cutoff < int(self.order):
            raise ConfigurationError("--cutoff must be at least the order")
        if self.mode not in ("evaluated", "symbolic"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")

    def to_json(self) -> dict:
        return {"genus": self.genus, "order": str(self.order), "cutoff": self.cutoff, "mode": self.mode,
                "seed": self.seed, "params": self.params, "format": self.fmt}


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    checks: dict[str, bool] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {"command": self.command, "config": self.config, "version": self.version,
                "checks": self.checks, "artifacts": self.artifacts, "wall_time": round(self.wall_time, 3)}


# ---------------------------------------------------------------------------
# output


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def atomic_write(path: Path, data: str) -> str:
    """Write via a temp file in the same directory and rename; returns the sha256."""
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(raw).hexdigest()


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, json.dumps(obj) if not isinstance(obj, str) else obj)]


def render(obj: Any, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(obj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(obj):
        w.writerow([k, v])
    return buf.getvalue()


def emit(cfg: RunConfig, manifest: RunManifest, name: str, obj: Any) -> None:
    text = render(obj, cfg.fmt)
    if cfg.out_dir is None:
        sys.stdout.write(text)
        return
    fname = f"{name}.{cfg.fmt}"
    manifest.artifacts[fname] = atomic_write(Path(cfg.out_dir) / fname, text)


# ---------------------------------------------------------------------------
# config helpers


def _load_json(path: str | None, what: str) -> Any:
    if path is None:
        raise ConfigurationError(f"{what} file is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {what} file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{what} file {path!r} is not valid JSON: {exc}") from exc


def _voa(cfg: RunConfig, rank: int = 1):
    from .voa import HeisenbergVOA

    L = cfg.cutoff if cfg.cutoff is not None else int(cfg.order)
    return HeisenbergVOA(rank=rank, cutoff=max(L, 1) + 4)


def _parse_states(text: str | None, voa) -> list:
    if not text:
        return []
    return [voa.state(t.strip()) for t in text.split(";") if t.strip()]


def _insertion_states(args, voa) -> list:
    """States from --insertions (JSON list of state strings) or --states ("a;b")."""
    if getattr(args, "insertions", None):
        raw = _load_json(args.insertions, "insertions")
        if isinstance(raw, dict):
            raw = raw.get("states", raw.get("insertions"))
        if not isinstance(raw, list):
            raise ConfigurationError("insertions must be a JSON list of states")
        out = []
        for item in raw:
            text = item.get("state") if isinstance(item, dict) else item
            if not isinstance(text, str):
                raise ConfigurationError(f"bad insertion {item!r}")
            out.append(voa.state(text))
        return out
    return _parse_states(args.states, voa)


def _context(cfg: RunConfig, voa, coords: Sequence[str]):
    from .characters.genus_g import CharacterContext, handle_names, random_point, symbolic_context, w_name

    if cfg.mode == "symbolic":
        return symbolic_context(voa, cfg.genus, cfg.order, coords, cfg.cutoff)
    rng = random.Random(cfg.seed)
    names = handle_names(cfg.genus) + list(coords)
    point = random_point(names, rng)
    if cfg.params is not None:
        params = _schottky_params(cfg)
        if params.genus != cfg.genus:
            raise ConfigurationError(f"params genus {params.genus} != --genus {cfg.genus}")
        centres = {w_name(a): params.w[a] for a in params.indices}
        if any(point[c] == v for c in coords for v in centres.values()):
            raise ConfigurationError("a random insertion point hit a centre; change --seed")
        point.update(centres)
    return CharacterContext(voa, cfg.genus, cfg.order, point, cfg.cutoff)


def _schottky_params(cfg: RunConfig):
    from .schottky import SchottkyParams

    return SchottkyParams.from_json(_load_json(cfg.params, "params"))


def _series_json(series: TruncatedSeries) -> dict:
    return series.to_json()


# ---------------------------------------------------------------------------
# commands


def cmd_schottky_check(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import schottky as sk

    params = _schottky_params(cfg)
    rng = random.Random(cfg.seed)
    checks: dict[str, bool] = {}
    jordan, pair = sk.jordan_condition(params)
    checks["jordan"] = jordan
    inverse_ok = sewing_ok = fixed_ok = True
    for a in range(1, params.genus + 1):
        g = sk.generator_map(params, a)
        inverse_ok &= (g @ sk.generator_map(params, -a)).is_identity()
        forbidden = {params.w[a], params.w[-a]}
        if params.W is not None:
            forbidden |= {params.W[a], params.W[-a]}
            fixed_ok &= g(params.W[a]) == params.W[a] and g(params.W[-a]) == params.W[-a]
        for _ in range(20):
            z = Fraction(rng.randint(-200, 200), rng.randint(1, 9))
            if z in forbidden:
                continue
            zp = g(z)
            sewing_ok &= sk.sewing_check_rho(params, a, z, zp)
            if params.W is not None and zp not in forbidden:
                sewing_ok &= sk.sewing_check(params, a, z, zp)
    checks.update(inverse=inverse_ok, sewing=sewing_ok, fixed_points=fixed_ok)
    manifest.checks.update(checks)
    emit(cfg, manifest, "schottky_check", {"params": params.to_json(), "checks": checks,
                                            "jordan_violation": list(pair) if pair else None})
    return all(checks.values())


def cmd_schottky_orbit(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import schottky as sk

    gamma = sk.MobiusMap.parse(args.gamma)
    params = _schottky_params(cfg)
    out = sk.sl2_action(gamma, params)
    emit(cfg, manifest, "schottky_orbit", {"gamma": gamma.to_list(), "params": out.to_json()})
    return True


def cmd_schottky_words(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import schottky as sk

    words = sk.enumerate_words(cfg.genus, args.max_len)
    counts = [sum(1 for w in words if len(w) == k) for k in range(args.max_len + 1)]
    ok = all(counts[k] == sk.word_count(cfg.genus, k) for k in range(args.max_len + 1))
    manifest.checks["word_count"] = ok
    payload: dict[str, Any] = {"genus": cfg.genus, "counts": counts, "count_formula": ok}
    if args.list:
        payload["words"] = [str(w) for w in words]
    emit(cfg, manifest, "schottky_words", payload)
    return ok


def cmd_zhu_kernel(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from .characters.genus_g import handle_names, random_point
    from .zhukernel import KernelConfig, ZhuKernel, handle_indices, kernel_summary

    f_coeffs: tuple = ()
    if args.f_coeffs:
        raw = _load_json(args.f_coeffs, "f coefficients")
        try:
            f_coeffs = tuple({int(e): Fraction(str(c)) for e, c in f.items()} for f in raw)
        except (AttributeError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed f coefficients: {exc}") from exc
    kcfg = KernelConfig(cfg.genus, args.weight, cfg.order, args.mode_cutoff, f_coeffs)
    rng = random.Random(cfg.seed)
    point = random_point(handle_names(cfg.genus) + ["x", "y"], rng)
    if cfg.params is not None:
        params = _schottky_params(cfg)
        centres = {a: params.w[a] for a in params.indices}
    else:
        centres = {a: point[n] for a, n in zip(handle_indices(cfg.genus), handle_names(cfg.genus))}
    kernel = ZhuKernel(kcfg, centres)
    tele = kernel.telescoping_exact()
    manifest.checks["telescoping"] = tele
    out = kernel_summary(kernel, point["x"], point["y"])
    out["telescoping_exact"] = tele
    out["x"], out["y"] = str(point["x"]), str(point["y"])
    emit(cfg, manifest, "zhu_kernel", out)
    return tele


def cmd_char_partition(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from .characters.genus_g import genus_g_partition

    voa = _voa(cfg, args.rank)
    ctx = _context(cfg, voa, [])
    series = genus_g_partition(ctx)
    out = {"genus": cfg.genus, "order": str(cfg.order), "rank": args.rank, "series": _series_json(series),
           "hash": series.content_hash()}
    if cfg.mode == "evaluated":
        out["point"] = {k: str(v) for k, v in sorted(ctx.point.items())}
    emit(cfg, manifest, "partition", out)
    return True


def _coords(n: int) -> list[str]:
    return [f"y{i}" for i in range(1, n + 1)]


def cmd_char_npoint(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from .characters.genus_g import genus_g_npoint

    voa = _voa(cfg)
    states = _insertion_states(args, voa)
    coords = _coords(len(states))
    ctx = _context(cfg, voa, coords)
    res = genus_g_npoint(ctx, list(zip(states, coords)))
    out = res.to_json()
    out["hash"] = res.value.content_hash()
    emit(cfg, manifest, "npoint", out)
    return True


def cmd_char_verify_zhu(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from .characters.zhu import verify_reduction

    voa = _voa(cfg)
    u = voa.state(args.u)
    states = _insertion_states(args, voa)
    coords = _coords(len(states))
    ctx = _context(cfg, voa, coords + ["x"])
    rep = verify_reduction(ctx, u, "x", list(zip(states, coords)))
    manifest.checks["zhu_recursion"] = rep.equal
    out = {"equal": rep.equal, "summary": rep.summary(), "lhs": rep.lhs.value.to_json(),
           "rhs": rep.rhs.value.to_json()}
    if rep.first_discrepancy is not None:
        out["first_discrepancy"] = [str(e) for e in rep.first_discrepancy]
    emit(cfg, manifest, "verify_zhu", out)
    if not rep.equal:
        raise VerificationFailure(rep.summary())
    return True


def _cluster_seed(cfg: RunConfig, args):
    from . import cluster as cl

    B = cl.ExchangeMatrix.from_json(_load_json(args.B, "exchange matrix"))
    return cl.initial_seed(B, args.coefficients)


def cmd_cluster_mutate(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import cluster as cl

    seed = _cluster_seed(cfg, args)
    word = cl.parse_word(args.word)
    final = cl.mutate_word(seed, word)
    back = cl.mutate_word(final, reversed(word))
    ok = back == seed
    manifest.checks["involution"] = ok
    emit(cfg, manifest, "cluster_mutate", {"word": list(word), "seed": final.to_json(), "reverse_restores": ok})
    return ok


def cmd_cluster_enumerate(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import cluster as cl

    summary = cl.enumerate_clusters(_cluster_seed(cfg, args), args.max_depth, args.cap, args.order_kind)
    emit(cfg, manifest, "cluster_enumerate", summary.to_json())
    return True


def cmd_cluster_laurent(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import cluster as cl

    cert = cl.laurent_check(_cluster_seed(cfg, args), cl.parse_word(args.word))
    manifest.checks["laurent"] = cert.laurent
    emit(cfg, manifest, "cluster_laurent", cert.to_json())
    return cert.laurent


def _vseed(args):
    from . import vcluster as vc

    return vc.seed_from_json(_load_json(args.seed_file, "seed"))


def cmd_vcluster_mutate(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import vcluster as vc

    seed = _vseed(args)
    spec = vc.spec_from_json(_load_json(args.spec, "spec"), seed.ctx.voa)
    seed = vc.VSeed(vc.extend_point(seed.ctx, "x", vc.fresh_value(seed.ctx)), seed.states, seed.coords, seed.character)
    new_states = vc.mutate_states(seed, spec)
    ops = vc.mutate_operators(seed, spec)
    ch = vc.mutate_character(seed, spec, "x")
    consistent = spec.F != spec.G or tuple(o.state for o in ops) == new_states
    manifest.checks["layers_consistent"] = consistent
    out = {"states": [s.to_json() for s in new_states],
           "operators": [{"state": o.state.to_json(), "coord": o.coord} for o in ops],
           "character": ch.to_json(), "character_hash": ch.value.content_hash(),
           "x": str(seed.ctx.point["x"])}
    emit(cfg, manifest, "vcluster_mutate", out)
    return consistent


def cmd_vcluster_involution(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from . import vcluster as vc

    seed = _vseed(args)
    rep = vc.vacuum_involution_check(seed, args.xi)
    manifest.checks["vacuum_involution"] = rep.ok
    emit(cfg, manifest, "vcluster_involution", rep.to_json())
    return rep.ok


def cmd_verify_all(cfg: RunConfig, args, manifest: RunManifest) -> bool:
    from .characters.genus_g import random_context
    from .characters.zhu import verify_reduction
    from .vcluster import make_seed, vacuum_involution_check
    from .voa import HeisenbergVOA, axiom_suite

    if cfg.mode != "evaluated":
        raise ConfigurationError("verify-all runs in evaluated mode")
    rng = random.Random(cfg.seed)
    voa = _voa(cfg)
    a = voa.state("a(-1)|0>")
    w = voa.omega
    results: dict[str, Any] = {}
    rec_ok = True
    for u in (a, w):
        for vs in ((), (a,), (w,), (a, w)):
            coords = _coords(len(vs))
            ctx = random_context(voa, cfg.genus, cfg.order, coords + ["x"], rng, cfg.cutoff)
            rep = verify_reduction(ctx, u, "x", list(zip(vs, coords)))
            rec_ok &= rep.equal
            results[f"recursion u={u} v={list(map(str, vs))}"] = rep.summary()
    inv_ok = True
    for vs in ((), (a,), (a, w)):
        coords = _coords(len(vs))
        ctx = random_context(voa, cfg.genus, min(cfg.order, 1), coords, rng)
        for xi in (1, -1):
            inv_ok &= vacuum_involution_check(make_seed(ctx, vs, coords), xi).ok
    axioms = axiom_suite(HeisenbergVOA(cutoff=8))
    ax_ok = not any(axioms.values())
    manifest.checks.update(recursion=rec_ok, involution=inv_ok, axioms=ax_ok)
    results["axioms"] = {k: len(v) for k, v in axioms.items()}
    emit(cfg, manifest, "verify_all", {"checks": dict(manifest.checks), "details": results})
    return rec_ok and inv_ok and ax_ok


# ---------------------------------------------------------------------------
# parser


def _common(rng_seed: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--genus", type=int, default=1)
    p.add_argument("--order", type=Fraction, default=Fraction(1))
    p.add_argument("--cutoff", type=int, default=None, help="weight cutoff L for basis sums")
    p.add_argument("--params", default=None, help="Schottky parameter JSON file")
    if rng_seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed for evaluation points")
    p.add_argument("--mode", choices=("evaluated", "symbolic"), default="evaluated")
    p.add_argument("--symbolic", dest="mode", action="store_const", const="symbolic")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    # vcluster seeds carry their own points, so --seed names the seed file there
    seedless = _common(rng_seed=False)
    parser = argparse.ArgumentParser(prog="vocluster", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True)

    def leaf(sub, name: str, fn: Callable, help: str, parent=common):
        p = sub.add_parser(name, parents=[parent], help=help)
        p.set_defaults(func=fn)
        return p

    sk = top.add_parser("schottky", help="Schottky parameters").add_subparsers(dest="cmd", required=True)
    leaf(sk, "check", cmd_schottky_check, "sewing, fixed-point and Jordan checks")
    p = leaf(sk, "orbit", cmd_schottky_orbit, "apply an SL2 map to the parameters")
    p.add_argument("--gamma", required=True, help="a,b,c,d with ad - bc = 1")
    p = leaf(sk, "words", cmd_schottky_words, "enumerate reduced words")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--list", action="store_true", help="include the words themselves")

    zk = top.add_parser("zhu", help="reduction kernel").add_subparsers(dest="cmd", required=True)
    p = leaf(zk, "kernel", cmd_zhu_kernel, "kernel data at random points")
    p.add_argument("--weight", type=int, default=1, help="weight p of the quasiprimary")
    p.add_argument("--mode-cutoff", type=int, default=None)
    p.add_argument("--f-coeffs", default=None, help="JSON list of Laurent polynomials {exp: coeff}")

    ch = top.add_parser("char", help="genus-g characters").add_subparsers(dest="cmd", required=True)
    p = leaf(ch, "partition", cmd_char_partition, "partition function series")
    p.add_argument("--rank", type=int, default=1)
    for name, fn, hlp in (("npoint", cmd_char_npoint, "n-point function series"),
                          ("verify-zhu", cmd_char_verify_zhu, "brute force vs reduction formula")):
        p = leaf(ch, name, fn, hlp)
        p.add_argument("--states", default="", help="states separated by ';'")
        p.add_argument("--insertions", default=None, help="JSON list of states")
        if name == "verify-zhu":
            p.add_argument("--u", default="a(-1)|0>")

    cl = top.add_parser("cluster", help="classical cluster algebras").add_subparsers(dest="cmd", required=True)
    for name, fn, hlp in (("mutate", cmd_cluster_mutate, "mutate along a word"),
                          ("enumerate", cmd_cluster_enumerate, "exchange graph closure"),
                          ("laurent", cmd_cluster_laurent, "Laurent certificate")):
        p = leaf(cl, name, fn, hlp)
        p.add_argument("--B", required=True, help="JSON integer matrix")
        p.add_argument("--coefficients", default="trivial", choices=("trivial", "principal"))
        if name != "enumerate":
            p.add_argument("--word", default="")
        else:
            p.add_argument("--cap", type=int, default=500)
            p.add_argument("--max-depth", type=int, default=None)
            p.add_argument("--order-kind", choices=("bfs", "dfs"), default="bfs")

    vc = top.add_parser("vcluster", help="vertex operator cluster seeds").add_subparsers(dest="cmd", required=True)
    p = leaf(vc, "mutate", cmd_vcluster_mutate, "mutate a seed", seedless)
    p.add_argument("--seed", dest="seed_file", required=True, help="seed JSON file")
    p.add_argument("--spec", required=True)
    p = leaf(vc, "involution", cmd_vcluster_involution, "vacuum involution check", seedless)
    p.add_argument("--seed", dest="seed_file", required=True, help="seed JSON file")
    p.add_argument("--xi", type=int, default=1, choices=(1, -1))

    start = top.add_parser("verify-all", parents=[common], help="recursion, involution and axiom suites")
    start.set_defaults(func=cmd_verify_all)
    return parser


def _command_name(args) -> str:
    return " ".join(x for x in (args.group, getattr(args, "cmd", None)) if x)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        cfg = RunConfig(args.genus, args.order, args.cutoff, args.mode, getattr(args, "seed", 0),
                        args.params, args.out_dir, args.fmt)
        manifest = RunManifest(_command_name(args), cfg.to_json())
        ok = args.func(cfg, args, manifest)
        code = EXIT_OK if ok else EXIT_FAIL
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        code = EXIT_FAIL
        manifest.checks.setdefault("verification", False)
    except ConsistencyError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigurationError, ExactAlgebraError, ValueError, TypeError) as exc:
        # ExactAlgebraError subclasses that reach here come from the inputs
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out_dir is not None:
        manifest.wall_time = time.perf_counter() - t0
        atomic_write(Path(cfg.out_dir) / "manifest.json", canonical_json(manifest.to_json()))
    return code


if __name__ == "__main__":
    sys.exit(main())
