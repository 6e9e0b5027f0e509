"""Command-line entry point.

Every command writes one JSON document (stdout or --out) that embeds the
canonical configuration and the package version. Exit codes: 0 success,
1 malformed input, 2 degenerate input (ties, rational dependence, failed
preconditions), 3 precision exhausted, 4 search exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import analyze, directions_svg, signature_sequence
from .construct.lift import dimension_lift
from .construct.psi import PsiError, PsiFunction, SingularSchedule
from .construct.singular import (
    AdmissibilityFailure,
    DepthOverflow,
    HorizonError,
    determinant_witness,
    singular_build,
    verify_singularity,
)
from .construct.steer import (
    FSTAR_TARGETS,
    IlluminationViolated,
    SearchExhausted,
    ZeroSlack,
    constant_signature_demo,
    steer,
)
from .enumerate import ApproxSequence, RationalDependence, best_linear_form, best_simultaneous
from .exactreal import (
    DEFAULT_MAX_BITS,
    HalfIntegerTie,
    PrecisionExhausted,
    ScalarParseError,
    enclose,
    format_scalar,
    is_exact,
    parse_scalar,
)
from .norms import Norm, NormError, TieAtOptimum

PRECISION_ENV = "BESTAPPROX_MAX_BITS"
EXIT_PARSE, EXIT_DEGENERATE, EXIT_PRECISION, EXIT_SEARCH = 1, 2, 3, 4
SCHEMA_VERSION = 1  # docs/schemas/<command>.v<N>.json

COMMANDS = ("ba-lf", "bsa", "analyze", "singular", "lift", "steer", "demo-fstar", "report")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _default_bits() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_MAX_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise ConfigError(f"{PRECISION_ENV}={raw!r} is not an integer") from None
    if bits < 16:
        raise ConfigError(f"{PRECISION_ENV} must be >= 16")
    return bits


def _targets(items: Sequence[str] | None) -> list:
    out = []
    for item in items or []:
        out += [parse_scalar(part) for part in item.split(";") if part.strip()]
    if not out:
        raise ConfigError("at least one --target is required")
    return out


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a rational number: {text!r}") from None


def _vector(text: str) -> list[Fraction]:
    return [_fraction(v) for v in text.split(",")]


def _bits_list(text: str) -> list[list[int]]:
    """``1,0;1,1`` -> [[1, 0], [1, 1]] (one group per step)."""
    try:
        return [[int(b) for b in grp.split(",")] for grp in text.split(";") if grp]
    except ValueError:
        raise ConfigError(f"bad lambda bits {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bestapprox", description="Exact best Diophantine approximations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="JSON output path (default stdout)")
        sp.add_argument("--max-bits", type=int, default=None,
                        help=f"precision cap in bits (default ${PRECISION_ENV} or {DEFAULT_MAX_BITS})")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = common(sub.add_parser("ba-lf", help="linear-form best approximations"))
    sp.add_argument("--target", action="append", help="scalar (repeat, or separate with ';')")
    sp.add_argument("--up-to-M", type=int, required=True)
    sp.add_argument("--method", choices=("lattice", "shell"), default="lattice")
    sp.add_argument("--csv")

    sp = common(sub.add_parser("bsa", help="best simultaneous approximations"))
    sp.add_argument("--target", action="append")
    sp.add_argument("--norm", default="sup")
    sp.add_argument("--up-to-p", type=int, required=True)
    sp.add_argument("--method", choices=("auto", "scan", "lattice"), default="auto")
    sp.add_argument("--csv")

    sp = common(sub.add_parser("analyze", help="structural diagnostics of an enumerated sequence"))
    sp.add_argument("--target", action="append")
    sp.add_argument("--norm", default="sup")
    sp.add_argument("--up-to-p", type=int)
    sp.add_argument("--up-to-M", type=int, help="analyse the linear-form sequence instead")
    sp.add_argument("--delta", default="1/100")
    sp.add_argument("--eps", default="1/10")
    sp.add_argument("--burn-in", type=int, default=1)
    sp.add_argument("--svg")

    sp = common(sub.add_parser("singular", help="build and verify a psi-singular certificate"))
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--psi", default="power:3")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--p0", type=int, default=2)
    sp.add_argument("--sigma", help="schedule constant (default: calibrated)")
    sp.add_argument("--lambda-bits", default="")
    sp.add_argument("--enumerate-up-to", type=int, default=0)

    sp = common(sub.add_parser("lift", help="dimension-lift experiment on a singular pair"))
    sp.add_argument("--psi", default="exp:9/40")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--p0", type=int, default=2)
    sp.add_argument("--epsilon", default="1/8")
    sp.add_argument("--samples", type=int, default=5)
    sp.add_argument("--horizon", type=int, default=4000)
    sp.add_argument("--min-tail", type=int, default=5)

    sp = common(sub.add_parser("steer", help="steer b.s.a. directions towards targets"))
    sp.add_argument("--norm", default="poly:fstar")
    sp.add_argument("--direction", action="append", help="target direction x,y (repeat; cycled)")
    sp.add_argument("--tol", default="1/8")
    sp.add_argument("--count", type=int, default=3)
    sp.add_argument("--budget", type=int, default=400)

    sp = common(sub.add_parser("demo-fstar", help="constant (+,+) signatures under f*"))
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--budget", type=int, default=400)
    sp.add_argument("--svg")

    sp = common(sub.add_parser("report", help="summarise JSON outputs of other commands as CSV"))
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--csv")
    return p


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        return {"command": self.command, **self.options}

    def argv(self) -> list[str]:
        """Arguments that parse back to this configuration."""
        out = [self.command]
        for k, v in self.options.items():
            if k == "inputs":
                continue
            flag = "--" + k.replace("_", "-")
            if v is None or v == "" or v is False:
                continue
            if isinstance(v, list):
                out += [f"{flag}={item}" for item in v]
            else:
                # the = form keeps values such as -1,0 from reading as flags
                out.append(f"{flag}={v}")
        return out + list(self.options.get("inputs", []))


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse and canonicalise: scalars, norms and rationals get their normal text form."""
    ns = build_parser().parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k != "command"}
    if opts.get("max_bits") is None:
        opts["max_bits"] = _default_bits()
    elif opts["max_bits"] < 16:
        raise ConfigError("--max-bits must be >= 16")
    if "target" in opts:
        opts["target"] = [format_scalar(x) for x in _targets(opts["target"])]
    if "norm" in opts:
        try:
            opts["norm"] = str(Norm.parse(opts["norm"], len(opts.get("target") or []) or 2))
        except NormError as exc:
            raise ConfigError(str(exc)) from None
    for key in ("delta", "eps", "tol", "epsilon", "sigma"):
        if opts.get(key) is not None:
            opts[key] = str(_fraction(opts[key]))
    if "psi" in opts:
        try:
            opts["psi"] = PsiFunction.parse(opts["psi"]).describe()
        except PsiError as exc:
            raise ConfigError(str(exc)) from None
    if opts.get("direction") is not None:
        opts["direction"] = [",".join(str(v) for v in _vector(d)) for d in opts["direction"]]
    if ns.command == "analyze" and (opts.get("up_to_p") is None) == (opts.get("up_to_M") is None):
        raise ConfigError("analyze needs exactly one of --up-to-p and --up-to-M")
    for key in ("up_to_p", "up_to_M", "depth", "count", "samples", "horizon", "budget"):
        if opts.get(key) is not None and opts[key] < (0 if key == "count" else 1):
            raise ConfigError(f"--{key.replace('_', '-')} must be positive")
    return RunConfig(ns.command, opts)


# --- serialisation ------------------------------------------------------------


def _num(x):
    """Exact text for exact values, an enclosure pair otherwise."""
    if is_exact(x):
        return format_scalar(x)
    e = enclose(x, 64)
    return {"lo": format_scalar(e.lo), "hi": format_scalar(e.hi)}


def _bounds(x) -> tuple[str, str]:
    if is_exact(x):
        return format_scalar(x), format_scalar(x)
    e = enclose(x, 64)
    return format_scalar(e.lo), format_scalar(e.hi)


def sequence_json(seq: ApproxSequence) -> dict:
    entries = []
    for e in seq.entries:
        if seq.is_linear_form:
            lo, hi = _bounds(e.zeta)
            entries.append({"nu": e.nu, "m": list(e.m), "M": e.M, "zeta_lo": lo, "zeta_hi": hi})
        else:
            lo, hi = _bounds(e.D)
            entries.append({"nu": e.nu, "p": e.p, "a": list(e.a), "D_lo": lo, "D_hi": hi,
                            "xi": [_num(v) for v in e.xi], "Xi": None if e.Xi is None else [_num(v) for v in e.Xi]})
    return {"target": [format_scalar(x) for x in seq.target], "norm": str(seq.norm), "bound": seq.enumeration_bound,
            "exhaustive": seq.exhaustive, "final_exact": seq.final_exact, "entries": entries}


def sequence_csv(seq: ApproxSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if seq.is_linear_form:
        w.writerow(["nu", "M", "m", "zeta"])
        for e in seq.entries:
            w.writerow([e.nu, e.M, " ".join(map(str, e.m)), float(e.zeta)])
    else:
        w.writerow(["nu", "p", "a", "D", "signature"])
        sigs = signature_sequence(seq)
        for e, s in zip(seq.entries, sigs):
            w.writerow([e.nu, e.p, " ".join(map(str, e.a)), float(enclose(e.D, 64).mid), str(s)])
    return buf.getvalue()


def _write(path: str | None, text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        Path(path).write_text(text)


# --- commands ---------------------------------------------------------------


def _precision(cfg: RunConfig) -> Fraction:
    return Fraction(1, 2 ** cfg.options["max_bits"])


def _cmd_ba_lf(cfg, side):
    o = cfg.options
    alpha = [parse_scalar(t) for t in o["target"]]
    seq = best_linear_form(alpha, o["up_to_M"], _precision(cfg), method=o["method"])
    if o.get("csv"):
        side.append((o["csv"], sequence_csv(seq)))
    return {"sequence": sequence_json(seq)}


def _norm(o, dim):
    return Norm.parse(o["norm"], dim)


def _cmd_bsa(cfg, side):
    o = cfg.options
    alpha = [parse_scalar(t) for t in o["target"]]
    seq = best_simultaneous(alpha, _norm(o, len(alpha)), o["up_to_p"], _precision(cfg), method=o["method"])
    if o.get("csv"):
        side.append((o["csv"], sequence_csv(seq)))
    return {"sequence": sequence_json(seq)}


def _cmd_analyze(cfg, side):
    o = cfg.options
    alpha = [parse_scalar(t) for t in o["target"]]
    prec = _precision(cfg)
    if o.get("up_to_M"):
        seq = best_linear_form(alpha, o["up_to_M"], prec)
        f = None
    else:
        f = _norm(o, len(alpha))
        seq = best_simultaneous(alpha, f, o["up_to_p"], prec)
    rep = analyze(seq, f, Fraction(o["delta"]), Fraction(o["eps"]), o["burn_in"], prec)
    if o.get("svg"):
        if f is None or f.dim != 2:
            raise ConfigError("--svg needs a 2-D simultaneous target")
        side.append((o["svg"], directions_svg(seq, f)))
    return {"sequence": sequence_json(seq), "analysis": rep}


def _cmd_singular(cfg, side):
    o = cfg.options
    psi = PsiFunction.parse(o["psi"])
    sched = SingularSchedule(o["r"], Fraction(o["sigma"])) if o.get("sigma") else None
    cert = singular_build(o["r"], psi, sched, _bits_list(o["lambda_bits"]), o["depth"], o["p0"])
    val = cert.validate()
    out = {"certificate": cert.to_json(),
           "validation": {"ok": val.ok, "failures": val.failures(), "checks": len(val.checks),
                          "step_ratios": [[format_scalar(r.lo), format_scalar(r.hi)] for r in val.step_ratios]}}
    if cert.depth >= cert.r:
        ws = []
        for nu in range(cert.depth - cert.r + 1):
            w = determinant_witness(cert, nu)
            ws.append({"nu": nu, "n": w.n, "zeta": [format_scalar(w.zeta.lo), format_scalar(w.zeta.hi)],
                       "band": [format_scalar(w.band.lo), format_scalar(w.band.hi)], "in_band": w.in_band,
                       "nonzero": w.nonzero, "cofactor_ok": w.cofactor_ok})
        out["witnesses"] = ws
        rep = verify_singularity(cert, enumerate_up_to=o["enumerate_up_to"])
        out["singularity"] = {
            "ok": rep.ok,
            "certified_ranges": [list(r) for r in rep.certified_ranges()],
            "checks": [{"T": T, "witness": nu, "ok": ok} for T, nu, ok in rep.checks],
            "records": rep.records,
        }
    return out


def _cmd_lift(cfg, side):
    o = cfg.options
    cert = singular_build(2, PsiFunction.parse(o["psi"]), depth=o["depth"], p0=o["p0"])
    rep = dimension_lift(cert, Fraction(o["epsilon"]), o["seed"], o["samples"], o["horizon"], min_tail=o["min_tail"])
    return {"certificate": cert.to_json(), "lift": rep.to_json()}


def _cmd_steer(cfg, side):
    o = cfg.options
    f = Norm.parse(o["norm"], 2)
    dirs = [_vector(d) for d in o["direction"]] if o.get("direction") else FSTAR_TARGETS
    st = steer(f, dirs, Fraction(o["tol"]), o["count"], o["budget"])
    return {"trace": st.trace(), "signatures": [str(s) for s in signature_sequence(st.sequence)]}


def _cmd_demo(cfg, side):
    o = cfg.options
    res = constant_signature_demo(o["count"], budget=o["budget"])
    out = res.to_json()
    out["verification"] = {"fstar_constant": res.constant, "count": o["count"],
                           "sup_nonconstant": res.sup_nonconstant}
    if o.get("svg"):
        side.append((o["svg"], directions_svg(res.sequence, Norm.fstar())))
    return out


def _cmd_report(cfg, side):
    o = cfg.options
    rows = []
    for path in o["inputs"]:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        cmd = doc.get("config", {}).get("command", "?")
        rows.append({"file": path, "command": cmd, "version": doc.get("version"), "summary": _summary(doc)})
    if o.get("csv"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["file", "command", "version", "summary"])
        for r in rows:
            w.writerow([r["file"], r["command"], r["version"], r["summary"]])
        side.append((o["csv"], buf.getvalue()))
    return {"reports": rows}


def _summary(doc: dict) -> str:
    if "sequence" in doc:
        s = doc["sequence"]
        return f"{len(s['entries'])} entries up to {s['bound']}"
    if "validation" in doc:
        return f"certificate valid={doc['validation']['ok']} singular={doc.get('singularity', {}).get('ok')}"
    if "lift" in doc:
        return f"{doc['lift']['passes']} of {len(doc['lift']['samples'])} samples passed"
    if "verification" in doc:
        return f"constant={doc['verification']['fstar_constant']}"
    if "trace" in doc:
        return f"{len(doc['trace']['steps'])} steering steps"
    return "unknown document"


_HANDLERS = {"ba-lf": _cmd_ba_lf, "bsa": _cmd_bsa, "analyze": _cmd_analyze, "singular": _cmd_singular,
             "lift": _cmd_lift, "steer": _cmd_steer, "demo-fstar": _cmd_demo, "report": _cmd_report}


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(argv)
    except (ConfigError, ScalarParseError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    side: list[tuple[str, str]] = []
    doc = {"schema": f"{cfg.command}.v{SCHEMA_VERSION}", "version": __version__, "config": cfg.canonical()}
    code = 0
    try:
        doc.update(_HANDLERS[cfg.command](cfg, side))
    except (ConfigError, ScalarParseError, NormError, PsiError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except RationalDependence as exc:
        doc["error"] = {"kind": "RationalDependence", "message": str(exc), "witness": list(exc.witness)}
        code = EXIT_DEGENERATE
    except (TieAtOptimum, HalfIntegerTie, ZeroSlack, IlluminationViolated, AdmissibilityFailure,
            HorizonError, ValueError) as exc:
        doc["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        code = EXIT_DEGENERATE
    except (PrecisionExhausted, DepthOverflow) as exc:
        doc["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        code = EXIT_PRECISION
    except SearchExhausted as exc:
        doc["error"] = {"kind": "SearchExhausted", "message": str(exc)}
        if exc.state is not None:
            doc["partial"] = exc.state.trace()
        code = EXIT_SEARCH
    for path, text in side:
        Path(path).write_text(text)
    _write(cfg.options.get("out"), json.dumps(doc, indent=2) + "\n", stdout)
    if code:
        stderr.write(f"error: {doc['error']['kind']}: {doc['error']['message']}\n")
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
