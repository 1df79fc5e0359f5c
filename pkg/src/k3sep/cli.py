"""Command-line entry point: ``k3sep <subcommand> ...``.

Exit status: 0 for success or a conclusive verdict, 1 for a negative or
inconclusive result, 2 for usage and data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from .ball import DEFAULT_PRECISION, Ball
from .errors import K3SepError, ParseError
from .io import read_json, write_json
from .lattice import LatticeData, discriminant, is_multiple_of_h, load_lattice, save_lattice
from .mp_series import mp_degree_upper
from .nl_bounds import deg_bound_closed, deg_bound_ledger, delta_to_dg, hilbert_dims
from .polyring import to_records, to_string
from .reduction import build_Q12, division_map_from_json, save_division_map
from .tower import EXACT, UP, TowerReal, _format

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2

TEST_BANNER = "mode: TEST (c supplied on the command line; verdicts carry no guarantee)"


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict
    precision: int
    order: Optional[int]
    test_mode: bool
    fmt: str
    extra: dict = field(default_factory=dict)


class UsageError(Exception):
    pass


class Output:
    """Collects lines so the test-mode banner is always emitted first."""

    def __init__(self, cfg: RunConfig, stream=None):
        self.cfg = cfg
        self.stream = stream or sys.stdout
        self.lines: List[str] = []

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def flush(self) -> None:
        if self.cfg.test_mode and self.cfg.fmt == "text":
            self.stream.write(TEST_BANNER + "\n")
        for ln in self.lines:
            self.stream.write(ln + "\n")

    def emit_json(self, payload: dict) -> None:
        payload = dict(payload, test_mode=self.cfg.test_mode)
        self.lines.append(json.dumps(payload, sort_keys=True))


def _tower_value(t: TowerReal, digits: int = 17) -> str:
    """Decimal text of the stored value, rounded in the tower's own direction."""
    return _format(t.value, digits, t.direction)


def _tower_json(t: TowerReal) -> dict:
    return {"level": t.level, "value": _tower_value(t), "rounding": t.direction}



def _ball_short(b: Ball) -> str:
    im = float(b.im)
    sign = "-" if im < 0 else "+"
    return f"{float(b.re):.6g} {sign} {abs(im):.6g} i  (radius {float(b.rad):.3g})"


def _parse_gamma(args, L: LatticeData) -> tuple:
    if args.gamma is not None:
        try:
            g = tuple(int(x) for x in args.gamma.replace(" ", "").split(","))
        except ValueError:
            raise UsageError("--gamma expects comma-separated integers") from None
    else:
        data = read_json(args.gamma_file)
        if not isinstance(data, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
            raise ParseError("class file must hold a list of integers", str(args.gamma_file))
        g = tuple(data)
    if len(g) != L.rank:
        raise UsageError(f"gamma needs {L.rank} coordinates, got {len(g)}")
    return g


def _test_log2c(args) -> Optional[Fraction]:
    if args.log2_c is not None and not args.test_mode:
        raise UsageError("--log2-c is only accepted together with --test-mode")
    if args.test_mode:
        if args.log2_c is None:
            raise UsageError("--test-mode needs --log2-c")
        try:
            return Fraction(args.log2_c)
        except ValueError:
            raise UsageError("--log2-c expects a rational number") from None
    return None


def _load_division(args, f):
    if getattr(args, "division", None):
        Q = division_map_from_json(read_json(args.division), source=str(args.division))
        if Q.f != f:
            raise ParseError("division map belongs to a different quartic", str(args.division))
        return Q
    return build_Q12(f)


def _height(args, f):
    from .pipeline import weil_height_rational
    if args.height is not None:
        try:
            return Fraction(args.height)
        except ValueError:
            raise UsageError("--height expects a rational number") from None
    return weil_height_rational(f)[1]


# ---------------------------------------------------------------------------
# subcommands

def cmd_smoothness(cfg: RunConfig, args, out: Output) -> int:
    from .errors import SingularSurface
    from .pipeline import load_quartic
    f = load_quartic(args.quartic)
    try:
        Q = build_Q12(f)
    except SingularSurface as exc:
        if cfg.fmt == "json":
            out.emit_json({"smooth": False, "monomial": list(exc.monomial) if exc.monomial else None})
        else:
            out.line(f"SINGULAR: {exc}")
        return EXIT_NEGATIVE
    if args.save_division:
        save_division_map(Q, args.save_division)
    norm = f"{Q.norm.numerator}/{Q.norm.denominator}"
    if cfg.fmt == "json":
        out.emit_json({"smooth": True, "norm_Q12": norm})
    else:
        out.line(f"SMOOTH  ||Q12|| = {norm} (~{float(Q.norm):.6g})")
        out.line(f"f = {to_string(f)}")
    return EXIT_OK


def _render_constants(consts, out: Output) -> None:
    out.line(f"C_lemma  >= {float(consts.C_lemma):.12g}  (rounded down)")
    out.line(f"Gamma    <= {float(consts.Gamma_up):.12g}  (rounded up)")
    out.line(f"C_f      <= {float(consts.C_f):.12g}  (rounded up)")
    out.line(f"eps_f    >= {float(consts.eps_f):.12g}  (rounded down)")
    out.line(f"c: {consts.c.render(name='c')}")
    out.line(f"D = {consts.field_degree}, H <= {float(consts.height_H):.12g}, precision = {consts.precision} bits")


def cmd_constants(cfg: RunConfig, args, out: Output) -> int:
    from .pipeline import assemble_constants, constants_to_json, input_digest, load_period_data
    log2c = _test_log2c(args)
    P = load_period_data(args.quartic, args.lattice, args.periods, cfg.precision)
    Q = _load_division(args, P.f)
    H = _height(args, P.f)
    consts = assemble_constants(P, args.field_degree, H, cfg.precision, Q, test_log2_c=log2c)
    data = constants_to_json(consts)
    data["provenance"]["inputs_sha256"] = input_digest(args.quartic, args.lattice, args.periods)
    if args.output:
        write_json(data, args.output)
    if cfg.fmt == "json":
        out.emit_json(data)
    else:
        _render_constants(consts, out)
        if args.output:
            out.line(f"written to {args.output}")
    return EXIT_OK


def _obtain_constants(cfg: RunConfig, args, P):
    from .pipeline import assemble_constants, constants_from_json, input_digest
    if args.constants:
        if args.log2_c is not None:
            raise UsageError("--log2-c cannot be combined with --constants")
        consts = constants_from_json(read_json(args.constants), source=str(args.constants))
        want = consts.provenance.get("inputs_sha256")
        if want and want != input_digest(args.quartic, args.lattice, args.periods):
            raise ParseError("constants cache was computed from different inputs", str(args.constants))
        if consts.test_mode and not cfg.test_mode:
            raise UsageError("the constants cache is in test mode; pass --test-mode to use it")
        return consts
    log2c = _test_log2c(args)
    Q = _load_division(args, P.f)
    return assemble_constants(P, args.field_degree, _height(args, P.f), cfg.precision, Q, test_log2_c=log2c)


def cmd_decide(cfg: RunConfig, args, out: Output) -> int:
    from .pipeline import Verdict, decide, load_period_data
    L = load_lattice(args.lattice)
    g = _parse_gamma(args, L)
    delta = discriminant(g, L)
    if is_multiple_of_h(g, L)[0]:
        # no period data needed
        if cfg.fmt == "json":
            out.emit_json({"verdict": Verdict.IN_PICARD.value, "reason": "hyperplane class", "delta": delta})
        else:
            out.line(f"{Verdict.IN_PICARD.value} (hyperplane class)")
            out.line(f"Delta = {delta}")
        return EXIT_OK
    if not (args.quartic and args.periods):
        raise UsageError("--quartic and --periods are required unless gamma is a multiple of h")
    P = load_period_data(args.quartic, args.lattice, args.periods, cfg.precision)
    consts = _obtain_constants(cfg, args, P)
    dec = decide(g, P, consts)
    if cfg.fmt == "json":
        payload = {"verdict": dec.verdict.value, "reason": dec.reason, "delta": dec.delta}
        if dec.pairing is not None:
            payload["pairing"] = dec.pairing.to_json()
        if dec.required_bits is not None:
            payload["required_bits"] = _tower_json(dec.required_bits)
        out.emit_json(payload)
    else:
        out.line(f"{dec.verdict.value} ({dec.reason})")
        out.line(f"Delta = {dec.delta}")
        if dec.pairing is not None:
            out.line(f"gamma.omega in {_ball_short(dec.pairing)}")
        if dec.required_bits is not None:
            out.line("required precision: " + dec.required_bits.render(name="log2(1/eps)"))
    if dec.verdict in (Verdict.IN_PICARD, Verdict.NOT_IN_PICARD):
        return EXIT_OK
    return EXIT_NEGATIVE


def _nl_rows(deltas: Sequence[int], order: Optional[int], prec: int):
    rows = []
    for delta in deltas:
        dg = delta_to_dg(delta)
        if dg is None:
            rows.append({"delta": delta, "empty": True})
            continue
        dims = hilbert_dims(dg)
        ledger = deg_bound_ledger(dg, prec)
        if ledger.level == 0:
            ledger = ledger.to_level(1, UP, prec)
        closed = deg_bound_closed(delta, UP, prec)
        mp = mp_degree_upper(delta, max(order or delta, delta))
        rows.append({"delta": delta, "empty": False, "d": dg.d, "g": dg.g, "r": dims.r,
                     "N": dims.exponent, "ledger": ledger, "closed": closed, "mp": mp})
    return rows


def cmd_nl_bound(cfg: RunConfig, args, out: Output) -> int:
    if args.delta is not None:
        deltas = [args.delta]
    else:
        lo, hi = args.range
        if lo < 1 or hi < lo:
            raise UsageError("--range needs 1 <= LO <= HI")
        deltas = list(range(lo, hi + 1))
    if any(d < 1 for d in deltas):
        raise UsageError("Delta must be positive")
    rows = _nl_rows(deltas, cfg.order, cfg.precision)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "d", "g", "r", "N", "ledger_log2_deg_level", "ledger_log2_deg",
                    "closed_log2_deg_level", "closed_log2_deg", "mp_degree"])
        for row in rows:
            if row["empty"]:
                w.writerow([row["delta"], "", "", "", "", "", "", "", "", 0])
                continue
            w.writerow([row["delta"], row["d"], row["g"], row["r"], row["N"],
                         row["ledger"].level, _tower_value(row["ledger"]),
                         row["closed"].level, _tower_value(row["closed"]), row["mp"]])
        for ln in buf.getvalue().rstrip("\n").split("\n"):
            out.line(ln)
    elif cfg.fmt == "json":
        payload = []
        for row in rows:
            item = {"delta": row["delta"], "empty": row["empty"]}
            if not row["empty"]:
                item.update(d=row["d"], g=row["g"], r=row["r"], N=row["N"], mp_degree=row["mp"],
                            ledger_deg=_tower_json(row["ledger"]), closed_deg=_tower_json(row["closed"]))
            payload.append(item)
        out.emit_json({"rows": payload})
    else:
        for row in rows:
            if row["empty"]:
                out.line(f"Delta = {row['delta']}: NL_Delta is empty (Delta mod 8 not in {{0, 1, 4}})")
                continue
            out.line(f"Delta = {row['delta']}  (d, g) = ({row['d']}, {row['g']})  r = {row['r']}  N = {row['N']}")
            out.line("  ledger: " + row["ledger"].render(name="deg"))
            out.line("  closed: " + row["closed"].render(name="deg"))
            out.line(f"  theta-series bound: deg <= {row['mp']}")
    return EXIT_OK


def cmd_mp_degree(cfg: RunConfig, args, out: Output) -> int:
    from .lattice import is_admissible_delta
    delta = args.delta
    if delta < 1:
        raise UsageError("Delta must be positive")
    order = max(cfg.order or delta, delta)
    coeff = mp_degree_upper(delta, order)
    adm = is_admissible_delta(delta)
    if cfg.fmt == "json":
        out.emit_json({"delta": delta, "order": order, "coefficient": coeff, "admissible": adm})
    else:
        out.line(f"[q^{delta}] (Theta - Psi) = {coeff}  (series truncated at order {order})")
        out.line("admissible: " + ("yes" if adm else "no (Delta mod 8 not in {0, 1, 4}, NL_Delta is empty)"))
    return EXIT_OK


def _parse_theta(entry, k: int, source: str):
    if isinstance(entry, int) and not isinstance(entry, bool):
        return entry
    if isinstance(entry, dict) and set(entry) == {"level", "value"}:
        lvl, v = entry["level"], entry["value"]
        if lvl in (1, 2) and isinstance(v, int) and not isinstance(v, bool) and v >= 0:
            return TowerReal(lvl, v, EXACT)
    raise ParseError(f"entry {k}: expected a positive integer or {{\"level\": 1|2, \"value\": k}}", source)


def cmd_liouville(cfg: RunConfig, args, out: Output) -> int:
    from .errors import ChainViolation
    from .pipeline import liouville_growth_check, liouville_partial_sum
    data = read_json(args.thetas)
    if not isinstance(data, list) or not data:
        raise ParseError("expected a non-empty list", str(args.thetas))
    thetas = [_parse_theta(e, k, str(args.thetas)) for k, e in enumerate(data)]
    check = liouville_growth_check(thetas, growth=not args.divisibility_only)
    partial = None
    if all(isinstance(t, int) for t in thetas):
        try:
            partial = liouville_partial_sum(thetas)
        except ChainViolation:
            partial = None
    if cfg.fmt == "json":
        payload = {"ok": check.ok, "index": check.index, "reason": check.reason}
        if partial is not None:
            payload["partial_sum"] = {"u": partial.u, "theta_k": partial.theta_k}
        out.emit_json(payload)
    else:
        out.line(check.render())
        if partial is not None:
            out.line(f"l_k = {partial.u}/{partial.theta_k}  (u_k <= 2 theta_k)")
    return EXIT_OK if check.ok else EXIT_NEGATIVE


def cmd_synth(cfg: RunConfig, args, out: Output) -> int:
    from .pipeline import save_period_matrix
    from .synthetic import full_fixture, random_class, random_planted_class
    from .lattice import standard_k3_lattice
    rng = random.Random(args.seed)
    L = standard_k3_lattice()
    planted = random_planted_class(L, rng)
    fx = full_fixture(rng, planted=[planted], prec=cfg.precision)
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    write_json(to_records(fx.period.f), d / "quartic.json")
    save_lattice(L, d / "lattice.json")
    save_period_matrix(fx.period.A, d / "periods.json", fx.period.labels)
    other = random_class(rng, L)
    write_json(list(planted), d / "planted.json")
    write_json(list(other), d / "random.json")
    write_json(list(L.h), d / "h.json")
    if cfg.fmt == "json":
        out.emit_json({"directory": str(d), "planted": list(planted), "random": list(other)})
    else:
        out.line(f"wrote quartic.json, lattice.json, periods.json, planted.json, random.json, h.json to {d}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, formats=("text", "json")) -> None:
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="working precision in bits")
    p.add_argument("--order", type=int, default=None, help="truncation order for series")
    p.add_argument("--test-mode", action="store_true", help="accept a user-supplied c (no guarantee)")
    p.add_argument("--format", dest="fmt", choices=formats, default="text")


def _period_inputs(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--quartic", required=required, help="quartic polynomial file")
    p.add_argument("--lattice", required=True, help="lattice file (Gram matrix and h)")
    p.add_argument("--periods", required=required, help="period matrix file")
    p.add_argument("--division", help="saved division map, skips recomputing Q12")
    p.add_argument("--field-degree", type=int, default=1, help="degree D of the coefficient field")
    p.add_argument("--height", default=None, help="Weil height H (default: computed for rational f)")
    p.add_argument("--log2-c", default=None, help="log2 of the test-mode constant c")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k3sep", description="Certified Picard-membership tests for quartic surfaces.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("smoothness", help="build the degree-12 division map or report a singular quartic")
    p.add_argument("quartic")
    p.add_argument("--save-division", help="write the division map to this file")
    _common(p)
    p.set_defaults(func=cmd_smoothness)

    p = sub.add_parser("constants", help="compute and cache the separation constants")
    _period_inputs(p, True)
    p.add_argument("--output", "-o", help="constants cache file")
    _common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("decide", help="decide whether a lattice class is algebraic")
    _period_inputs(p, False)
    p.add_argument("--constants", help="constants cache written by 'constants'")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--gamma", help="comma-separated coordinates")
    g.add_argument("--gamma-file", help="JSON list of coordinates")
    _common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("nl-bound", help="degree bounds for Noether-Lefschetz loci")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", type=int)
    g.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    _common(p, ("text", "csv", "json"))
    p.set_defaults(func=cmd_nl_bound)

    p = sub.add_parser("mp-degree", help="theta-series degree bound for one Delta")
    p.add_argument("--delta", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_mp_degree)

    p = sub.add_parser("liouville", help="check a divisor chain theta_0 | theta_1 | ...")
    p.add_argument("thetas", help="JSON list of ints or {\"level\": 1|2, \"value\": k} descriptors")
    p.add_argument("--divisibility-only", action="store_true", help="skip the growth condition")
    _common(p)
    p.set_defaults(func=cmd_liouville)

    p = sub.add_parser("synth", help="write a synthetic Fermat fixture with a planted class")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    cfg = RunConfig(args.subcommand, {k: v for k, v in vars(args).items() if k not in ("func",)},
                    args.precision, args.order, args.test_mode, args.fmt)
    out = Output(cfg)
    try:
        if cfg.precision < 64:
            raise UsageError("--precision must be at least 64 bits")
        if cfg.order is not None and cfg.order < 0:
            raise UsageError("--order must be non-negative")
        code = args.func(cfg, args, out)
    except UsageError as exc:
        sys.stderr.write(f"k3sep {cfg.subcommand}: {exc}\n")
        return EXIT_ERROR
    except (K3SepError, OverflowError) as exc:
        sys.stderr.write(f"k3sep {cfg.subcommand}: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
