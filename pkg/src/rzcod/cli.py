"""Command-line front end: ``rzcod {generate,verify,analyze,tables,simulate,export}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import analysis
from .combinatorics import nonzero_columns, partition_classes
from .construction import ConstructionRoute, MAX_A, build_g, build_h, build_q, signed_row_match
from .design import DesignMatrix, SignedMatrix, is_restricted, is_scod
from .formats import (
    ParseError,
    design_to_json,
    design_to_text,
    load_design,
    render_gram,
    signed_to_text,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VERIFY = 4
EXIT_CONFIG = 5

OUT_DIR_ENV = "RZCOD_OUT_DIR"


class UsageError(Exception):
    pass


class ConfigError(Exception):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _positive_a(text: str) -> int:
    try:
        a = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid a {text!r}") from None
    if not 1 <= a <= MAX_A:
        raise argparse.ArgumentTypeError(f"a must be in 1..{MAX_A}")
    return a


def _design_for(a: int, family: str, route: str) -> DesignMatrix:
    if family == "g":
        return build_g(a)
    return build_h(a, ConstructionRoute(route if route != "all" else "premultiply"))


def _render(design: DesignMatrix, fmt: str) -> str:
    return design_to_json(design) if fmt == "json" else design_to_text(design)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _default_out(name: str) -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / name


# ---------------------------------------------------------------------------
# generate / export


def cmd_generate(args: argparse.Namespace) -> int:
    _write(_render(_design_for(args.a, args.family, args.route), args.format), args.out)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    ext = "json" if args.format == "json" else "txt"
    if args.input:
        design = load_design(Path(args.input).read_text())
        text = _render(design, args.format)
        name = f"{Path(args.input).stem}.{ext}"
    elif args.a is None:
        raise UsageError("export needs --a or --input")
    elif args.object == "design":
        text = _render(_design_for(args.a, args.family, args.route), args.format)
        route = f"_{args.route}" if args.family == "h" else ""
        name = f"{args.family}_a{args.a}{route}.{ext}"
    else:
        if args.format == "json":
            raise UsageError("signed matrices export as text only")
        from .construction import hadamard_blockdiag, partition_permutation

        builders = {"q": build_q, "perm": partition_permutation, "hadamard": hadamard_blockdiag}
        m: SignedMatrix = builders[args.object](args.a)
        text = signed_to_text(m)
        name = f"{args.object}_a{args.a}.txt"
    out = Path(args.out) if args.out else _default_out(name)
    _write(text, str(out))
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _infer_a(design: DesignMatrix) -> int | None:
    n = design.n
    if n & (n - 1) or n < 2:
        return None
    a = n.bit_length() - 1
    return a if design.k == a + 1 else None


def _support_kind(design: DesignMatrix, a: int) -> str | None:
    """``"g"`` if rows match the N-sets, ``"h"`` if each row is the union over a coset, else None."""
    mask = design.nonzero_mask()
    supports = [frozenset(int(c) for c in mask[i].nonzero()[0]) for i in range(design.n)]
    n_sets = [frozenset(nonzero_columns(a, i)) for i in range(design.n)]
    if supports == n_sets:
        return "g"
    unions = {frozenset().union(*(n_sets[r] for r in cls)) for cls in partition_classes(a)}
    if all(s in unions for s in supports):
        return "h"
    return None


def verify_design(design: DesignMatrix, family: str | None = None, a: int | None = None) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    rep = is_scod(design)
    detail = "G^H G = (|x_1|^2+...+|x_k|^2) I" if rep.ok else (
        f"Gram cell {rep.cell} = {render_gram(rep.form)}")
    checks.append(("orthogonality", rep.ok, detail))
    restricted = is_restricted(design)
    checks.append(("restricted", restricted, "entries are single unit terms" if restricted else "entry outside {±x, ±jx}"))
    a = a if a is not None else _infer_a(design)
    fz = analysis.zero_fraction(design)
    if a is None:
        checks.append(("row-support", True, "SKIP: n is not 2^a with k = a + 1"))
        checks.append(("zero-fraction", True, f"SKIP: measured {analysis.render_fraction(fz)}"))
        return checks
    kind = _support_kind(design, a)
    if family is not None and kind is not None and kind != family:
        # with a trivial span the two patterns coincide
        kind = family if len(partition_classes(a)) == design.n else None
    checks.append(("row-support", kind is not None,
                   f"rows follow the {'N-set' if kind == 'g' else 'coset-union'} pattern" if kind
                   else "row supports match neither the N-sets nor coset unions"))
    fam = family or kind or "h"
    expected = analysis.zero_fraction_formula(a, fam)
    checks.append(("zero-fraction", fz == expected,
                   f"{analysis.render_fraction(fz)} (formula for {fam.upper()}_{a}: {analysis.render_fraction(expected)})"))
    return checks


def _route_checks(a: int) -> list[tuple[str, bool, str]]:
    pre = build_h(a, "premultiply")
    rec = build_h(a, "recursive")
    part = build_h(a, "partition")
    out = [("routes premultiply=recursive", pre == rec, "entry-for-entry")]
    match = signed_row_match(part, pre)
    out.append(("routes partition~premultiply", match is not None, "equal up to signed row permutation"))
    out.append(("partition orthogonality", bool(is_scod(part)), "exact Gram check of the partition route"))
    return out


def cmd_verify(args: argparse.Namespace) -> int:
    if args.input:
        design = load_design(Path(args.input).read_text())
        checks = verify_design(design)
    elif args.a is not None:
        design = _design_for(args.a, args.family, args.route)
        checks = verify_design(design, args.family, args.a)
        if args.family == "h" and args.route == "all":
            checks += _route_checks(args.a)
    else:
        raise UsageError("verify needs --a or --input")
    ok = True
    for name, passed, detail in checks:
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# analyze / tables


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.input:
        design = load_design(Path(args.input).read_text())
        fam, a = "", _infer_a(design) or 0
    elif args.a is not None:
        design = _design_for(args.a, args.family, args.route)
        fam, a = args.family, args.a
    else:
        raise UsageError("analyze needs --a or --input")
    sig = analysis.signaling_complexity(design, args.constellation_size)
    try:
        metrics = analysis.design_metrics(design, fam, a, args.constellation_size)
        rows = [metrics]
    except ValueError:
        rows = []
    if args.format == "json":
        doc = json.loads(analysis.metrics_to_json(rows)) if rows else []
        payload = {
            "metrics": doc,
            "papr_per_antenna": [analysis.render_fraction(p) for p in analysis.papr_per_antenna(design)],
            "max_levels": int(sig.max_levels),
            "signaling_class": sig.signaling_class,
        }
        _write(json.dumps(payload, indent=1) + "\n", args.out)
        return EXIT_OK
    text = analysis.metrics_to_text(rows) if rows else "non-uniform support; per-antenna PAPR:\n" + " ".join(
        analysis.render_fraction(p) for p in analysis.papr_per_antenna(design)) + "\n"
    text += f"signaling: {sig.signaling_class}, max levels {sig.max_levels} for M={args.constellation_size}\n"
    _write(text, args.out)
    return EXIT_OK


def _braces(xs) -> str:
    return "{" + ", ".join(str(x) for x in xs) + "}"


def _tables_text() -> str:
    from .channel_sim import constellation

    lines = ["Table I: M_a, M'_a and d", "a  d  M_a              M'_a"]
    for a, (m, mp, d) in analysis.table_i().items():
        lines.append(f"{a:<2} {d:<2} {_braces(m):<16} {_braces(mp)}")
    lines += ["", "Table II: per-antenna peak/average power (constant modulus) and P0",
              "antennas  constellation  papr(G)  P0(G)   papr(H)  P0(H)   measured(G/H)"]
    for (n, const), ((pg, zg), (ph, zh)) in analysis.table_ii().items():
        a = n.bit_length() - 1
        pts = constellation(const).points
        mg, mh = (float(analysis.measure_papr(d, pts, codewords=2000, seed=0).max()) for d in (build_g(a), build_h(a)))
        lines.append(f"{n:<9} {const:<14} {float(pg):<8.4g} {float(zg):<7.4g} {float(ph):<8.4g} {float(zh):<7.4g} "
                     f"{mg:.4g}/{mh:.4g}")
    lines.append("16-QAM uses the constellation peak factor 9/5; reference prints 11.52/5.76 and 19.2/4.8 "
                 "(same G/H ratios)")
    lines += ["", "Table III: zero fractions", "a   f_z(H_a)  f_z(G_a)"]
    rows = analysis.metrics_table(range(3, 17))
    for g, h in zip(rows[0::2], rows[1::2]):
        lines.append(f"{g.a:<3} {str(h.zero_fraction):<9} {g.zero_fraction}")
    return "\n".join(lines) + "\n"


def _tables_json() -> str:
    doc = {
        "table_i": [{"a": a, "d": d, "m_a": list(m), "m_a_prime": list(mp)} for a, (m, mp, d) in analysis.table_i().items()],
        "table_ii": [
            {"antennas": n, "constellation": c, "papr_g": analysis.render_fraction(pg), "p0_g": analysis.render_fraction(zg),
             "papr_h": analysis.render_fraction(ph), "p0_h": analysis.render_fraction(zh)}
            for (n, c), ((pg, zg), (ph, zh)) in analysis.table_ii().items()
        ],
        "table_iii": json.loads(analysis.metrics_to_json(analysis.metrics_table(range(3, 17)))),
    }
    return json.dumps(doc, indent=1) + "\n"


def tables_self_check() -> list[str]:
    """Mismatches between the computed tables and the printed reference values."""
    problems = []
    for a, row in analysis.TABLE_I.items():
        if analysis.table_i([a])[a] != row:
            problems.append(f"Table I a={a}")
    for key, ((pg, zg), (ph, zh)) in analysis.table_ii().items():
        (rpg, rzg), (rph, rzh) = analysis.TABLE_II[key]
        if key[1] == "QPSK" and (round(float(pg), 2) != rpg or round(float(ph), 2) != rph):
            problems.append(f"Table II PAPR {key}")
        if key[1] != "QPSK" and round(rpg / rph, 6) != float(pg / ph):
            problems.append(f"Table II 16-QAM ratio {key}")
        if float(zg) != rzg or float(zh) != rzh:
            problems.append(f"Table II P0 {key}")
    rows = analysis.metrics_table(range(3, 17))
    for g, h in zip(rows[0::2], rows[1::2]):
        if (h.zero_fraction, g.zero_fraction) != analysis.TABLE_III[g.a]:
            problems.append(f"Table III a={g.a}")
    return problems


def cmd_tables(args: argparse.Namespace) -> int:
    _write(_tables_json() if args.format == "json" else _tables_text(), args.out)
    if args.self_check:
        problems = tables_self_check()
        for p in problems:
            print(f"FAIL  {p}", file=sys.stderr)
        if problems:
            return EXIT_VERIFY
        print("self-check: all table values match", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

_CONFIG_KEYS = {"name", "constellation", "power_mode", "snr_db", "rx_antennas", "trials_per_point",
                "target_errors", "rng_seed", "batch_size", "designs", "check"}
_REQUIRED = ("constellation", "power_mode", "snr_db", "designs")


def load_config(ref: str) -> dict:
    """Read a JSON config from a path, or a bundled one by name (e.g. ``peak_a3``)."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    else:
        bundled = resources.files("rzcod") / "configs" / f"{ref.removesuffix('.json')}.json"
        if not bundled.is_file():
            raise ConfigError([f"no config file or bundled config named {ref!r}"])
        text = bundled.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc.msg} (line {exc.lineno})"]) from None
    validate_config(cfg)
    cfg.setdefault("name", path.stem)
    return cfg


def validate_config(cfg: object) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(["config must be a JSON object"])
    problems = [f"missing field {k!r}" for k in _REQUIRED if k not in cfg]
    problems += [f"unknown field {k!r}" for k in cfg if k not in _CONFIG_KEYS]
    if "constellation" in cfg and str(cfg["constellation"]).upper() not in ("QPSK", "QAM16", "16QAM"):
        problems.append("constellation must be QPSK or QAM16")
    if "power_mode" in cfg and cfg["power_mode"] not in ("average", "peak"):
        problems.append("power_mode must be 'average' or 'peak'")
    grid = cfg.get("snr_db")
    if "snr_db" in cfg and (not isinstance(grid, list) or not grid
                            or not all(isinstance(s, (int, float)) for s in grid)
                            or any(b <= a for a, b in zip(grid, grid[1:]))):
        problems.append("snr_db must be a non-empty strictly increasing list of numbers")
    for key in ("rx_antennas", "trials_per_point", "target_errors", "batch_size"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 1):
            problems.append(f"{key} must be a positive integer")
    if "rng_seed" in cfg and (not isinstance(cfg["rng_seed"], int) or cfg["rng_seed"] < 0):
        problems.append("rng_seed must be a non-negative integer")
    designs = cfg.get("designs")
    if "designs" in cfg:
        if not isinstance(designs, list) or not designs:
            problems.append("designs must be a non-empty list")
        else:
            for i, d in enumerate(designs):
                if not isinstance(d, dict) or d.get("family") not in ("g", "h", "yuen"):
                    problems.append(f"designs[{i}].family must be g, h or yuen")
                elif d["family"] != "yuen" and not (isinstance(d.get("a"), int) and 1 <= d["a"] <= 8):
                    problems.append(f"designs[{i}].a must be an integer in 1..8")
    check = cfg.get("check")
    if check is not None:
        if not isinstance(check, dict) or check.get("kind") not in ("overlap", "shift"):
            problems.append("check.kind must be 'overlap' or 'shift'")
        elif check["kind"] == "shift" and not all(k in check for k in ("target_ser", "expected_db", "tolerance_db")):
            problems.append("shift check needs target_ser, expected_db and tolerance_db")
        if isinstance(designs, list) and len(designs) < 2:
            problems.append("a check compares the first two designs; list at least two")
    if problems:
        raise ConfigError(problems)


def _config_design(spec: dict) -> tuple[str, DesignMatrix]:
    if spec["family"] == "yuen":
        from .reference import g_yuen

        return "yuen8", g_yuen()
    route = spec.get("route", "premultiply")
    tag = f"{spec['family']}{spec['a']}"
    return tag, _design_for(spec["a"], spec["family"], route)


def run_config(cfg: dict, seed: int | None = None, workers: int = 1):
    """Run every design in a validated config; returns ``[(design_id, curve), ...]``."""
    from .channel_sim import SimConfig, constellation, run_campaign

    const = constellation(cfg["constellation"])
    results = []
    for stream, spec in enumerate(cfg["designs"]):
        tag, design = _config_design(spec)
        sim = SimConfig(
            design=design,
            constellation=const,
            snr_db_grid=tuple(cfg["snr_db"]),
            power_mode=cfg["power_mode"],
            rx_antennas=cfg.get("rx_antennas", 1),
            trials_per_point=cfg.get("trials_per_point", 200_000),
            rng_seed=cfg.get("rng_seed", 0) if seed is None else seed,
            target_errors=cfg.get("target_errors", 200),
            batch_size=cfg.get("batch_size", 2000),
            stream=stream,
            design_id=tag,
        )
        results.append((tag, run_campaign(sim, workers=workers)))
    return results


def evaluate_check(cfg: dict, results) -> tuple[bool, str] | None:
    from .channel_sim import curves_overlap, snr_at_ser

    check = cfg.get("check")
    if not check:
        return None
    (t1, c1), (t2, c2) = results[0], results[1]
    if check["kind"] == "overlap":
        flags = curves_overlap(c1, c2)
        return all(flags), f"{t1} vs {t2}: 95% intervals overlap at {sum(flags)}/{len(flags)} points"
    try:
        shift = snr_at_ser(c1, check["target_ser"]) - snr_at_ser(c2, check["target_ser"])
    except ValueError as exc:
        return False, f"shift not measurable: {exc}"
    ok = abs(shift - check["expected_db"]) <= check["tolerance_db"]
    return ok, (f"{t1} minus {t2} at SER {check['target_ser']:g}: {shift:.2f} dB "
                f"(expected {check['expected_db']:.2f} +/- {check['tolerance_db']})")


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    results = run_config(cfg, args.seed, args.workers)
    records = []
    print(f"{'design':<8} {'mode':<8} {'snr_db':>7} {'ser':>11} {'errors':>7} {'symbols':>9} {'ci95':>10}")
    for tag, curve in results:
        for e in curve:
            rec = {"design_id": tag, "power_mode": cfg["power_mode"], "constellation": cfg["constellation"], **asdict(e)}
            records.append(rec)
            print(f"{tag:<8} {cfg['power_mode']:<8} {e.snr_db:>7.2f} {e.ser:>11.4e} {e.symbol_errors:>7} "
                  f"{e.symbols_sent:>9} {e.ci95_halfwidth:>10.3e}")
    out = Path(args.out) if args.out else _default_out(f"{cfg['name']}.jsonl")
    _write("".join(json.dumps(r) + "\n" for r in records), str(out))
    verdict = evaluate_check(cfg, results)
    if verdict is not None:
        print(f"{'PASS' if verdict[0] else 'FAIL'}  {verdict[1]}")
        if not verdict[0]:
            return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rzcod", description="Reduced-zero complex orthogonal designs")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def design_flags(p: argparse.ArgumentParser, need_a: bool = False) -> None:
        p.add_argument("--a", type=_positive_a, required=need_a, help=f"design order, n = 2^a (1..{MAX_A})")
        p.add_argument("--family", choices=("g", "h"), default="h")
        p.add_argument("--route", choices=[r.value for r in ConstructionRoute] + ["all"], default="premultiply")

    p = sub.add_parser("generate", help="print a constructed design")
    design_flags(p, need_a=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="check orthogonality, restrictedness, supports and zero fraction")
    design_flags(p)
    p.add_argument("--input", help="design file (text or JSON)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="zero fraction, PAPR and signaling complexity")
    design_flags(p)
    p.add_argument("--input")
    p.add_argument("--constellation-size", type=int, default=4)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tables", help="reproduce the M_a, PAPR and zero-fraction tables")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--self-check", action="store_true", help="exit non-zero if any value differs from the reference")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("simulate", help="run an SER campaign from a JSON config")
    p.add_argument("--config", required=True, help="config path or bundled name (fig1_desk, peak_a3, peak_a5)")
    p.add_argument("--seed", type=int, help="override the config's rng_seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help=f"records file (default ${OUT_DIR_ENV}/<name>.jsonl)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export", help="write a design or premultiplier to a file")
    design_flags(p)
    p.add_argument("--object", choices=("design", "q", "perm", "hadamard"), default="design")
    p.add_argument("--input", help="convert an existing design file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help=f"output path (default under ${OUT_DIR_ENV})")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
