"""``nvscope`` command line: run experiments, analyze traces, handle sequence text.

Exit codes: 0 success, 1 failed check, 2 invalid input (config, CSV or
sequence text), 3 simulation error, 4 analysis error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time

import numpy as np

from .. import __version__
from ..analysis import (
    DipError,
    FitError,
    InversionError,
    SpectrumError,
    fit_damped_sinusoid,
    hyperfine_from_correlation,
    localize,
    nspin_curve,
    reconstruct_frequency,
    spectrum,
)
from ..sequence import Block, ParameterError, ParseError, format_sequence, parse_sequence
from ..simulator import SimulationError, resolve_threads
from ..spin import DomainError
from . import config as cfgmod
from .experiments import RUNNERS
from .io import CsvFormatError, atomic_write, dumps, read_csv, write_csv

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SIM, EXIT_ANALYSIS = 0, 1, 2, 3, 4

ANALYSIS_ERRORS = (FitError, InversionError, SpectrumError, DipError)


class CliError(Exception):
    def __init__(self, code, kind, message, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _fail(err: CliError) -> int:
    payload = {"error": err.kind, "message": str(err), **err.extra}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return err.code


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _plot_svg(path, outcome, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "nvscope", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, values in outcome.columns.items():
            ax.plot(outcome.axis, values, ".-", ms=3, lw=0.8, label=name)
        ax.set_xlabel(outcome.xlabel or outcome.axis_name)
        ax.set_title(title)
        if len(outcome.columns) > 1:
            ax.legend()
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    atomic_write(path, buf.getvalue())


def cmd_run(args) -> int:
    try:
        cfg = cfgmod.load(args.config)
    except cfgmod.ConfigError as exc:
        raise CliError(EXIT_INPUT, "config", str(exc), path=exc.path)
    if args.seed is not None:
        cfg.setdefault("system", {}).setdefault("readout", {})["seed"] = args.seed
    threads = resolve_threads(args.threads)
    out = cfg.get("output", {})
    out_dir = args.out or out.get("dir") or "."
    formats = out.get("formats", ["json", "csv", "svg"])
    try:
        system = cfgmod.build_system(cfg)
        readout = cfgmod.build_readout(cfg)
        options = cfgmod.build_options(cfg)
    except cfgmod.ConfigError as exc:
        raise CliError(EXIT_INPUT, "config", str(exc), path=exc.path)
    except (DomainError, ValueError) as exc:
        raise CliError(EXIT_INPUT, "config", str(exc), path="/system")
    exp = cfg["experiment"]
    t_start = time.perf_counter()
    try:
        outcome = RUNNERS[exp["type"]](system, exp, readout, options, threads)
    except ANALYSIS_ERRORS as exc:
        raise CliError(EXIT_ANALYSIS, "analysis", str(exc))
    except (SimulationError, ParameterError, DomainError, ValueError, np.linalg.LinAlgError) as exc:
        raise CliError(EXIT_SIM, "simulation", str(exc))
    wall = time.perf_counter() - t_start
    record = {
        "fingerprint": cfgmod.fingerprint(cfg),
        "version": __version__,
        "experiment": exp["type"],
        "axis": {"name": outcome.axis_name, "values": outcome.axis},
        "values": outcome.columns,
        "derived": outcome.derived,
    }
    if "json" in formats:
        atomic_write(os.path.join(out_dir, "results.json"), dumps(record))
        # wall time lives apart so that results.json stays byte-stable
        atomic_write(os.path.join(out_dir, "timing.json"),
                     dumps({"wall_time_s": wall, "threads": threads}))
    if "csv" in formats:
        write_csv(os.path.join(out_dir, "trace.csv"), [outcome.axis_name, *outcome.columns],
                  [outcome.axis, *outcome.columns.values()])
    if "svg" in formats:
        _plot_svg(os.path.join(out_dir, "plot.svg"), outcome, exp["type"])
    summary = {k: v for k, v in outcome.derived.items() if np.ndim(v) == 0}
    sys.stdout.write(dumps({"out": out_dir, "experiment": exp["type"], "derived": summary}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _trace(path, column=None):
    try:
        header, data = read_csv(path)
    except CsvFormatError as exc:
        raise CliError(EXIT_INPUT, "csv", str(exc), line=exc.line)
    except OSError as exc:
        raise CliError(EXIT_INPUT, "csv", f"cannot read {path}: {exc}")
    k = 1
    if column is not None:
        if column not in header:
            raise CliError(EXIT_INPUT, "csv", f"no column {column!r} in header {header}")
        k = header.index(column)
    return header[0], data[:, 0], data[:, k]


def _peaks(t, y, zone, fs):
    step = t[1] - t[0] if len(t) > 1 else float("nan")
    if fs is not None and abs(1.0 / step - fs) > 1e-6 * fs:
        raise CliError(EXIT_INPUT, "csv",
                       f"sample rate from the time axis ({1.0 / step} MHz) differs from --fs {fs}")
    sp = spectrum(y, t, zone_hint=zone)
    return sp, sp.peaks()


def cmd_analyze(args) -> int:
    axis_name, x, y = _trace(args.csv, args.column)
    result = {"kind": args.kind, "input": os.path.basename(args.csv), "axis": axis_name}
    try:
        if args.kind == "nspin":
            if args.block_duration is None:
                raise CliError(EXIT_INPUT, "usage", "--block-duration is required for nspin")
            fit = nspin_curve(y, args.block_duration, args.contrast)
            result.update(N_spin_sat=fit.N_spin_sat, t_c_us=fit.t_c, P0_sat=fit.P0_sat,
                          N_spin=fit.n_spin)
        elif args.kind == "fit":
            fit = fit_damped_sinusoid(y, x[1] - x[0], args.components, t0=x[0],
                                      decay=not args.no_decay)
            comps = []
            for c in fit.components:
                f = c.freq
                if args.zone:
                    f = float(reconstruct_frequency(f, 1.0 / (x[1] - x[0]), args.zone))
                comps.append({"freq_MHz": f, "amp": c.amp, "phase_rad": c.phase,
                              "decay_per_us": c.decay})
            result.update(components=sorted(comps, key=lambda c: c["freq_MHz"]),
                          offset=fit.offset, residual_norm=fit.residual_norm)
        else:
            sp, peaks = _peaks(x, y, args.zone, args.fs)
            result.update(sample_rate_MHz=sp.sample_rate, nyquist_zone=sp.nyquist_zone,
                          peaks_MHz=peaks)
            if args.kind in ("invert", "localize"):
                if args.f_osc is None or args.tau is None:
                    raise CliError(EXIT_INPUT, "usage", "--f-osc and --tau are required")
                if len(peaks) < 2:
                    raise InversionError(f"need two spectral lines, found {len(peaks)}")
                ref = args.f_h if args.f_h is not None else max(peaks)
                f0, f1 = sorted(peaks, key=lambda f: abs(f - ref))[:2]
                est = hyperfine_from_correlation(f0, f1, args.f_osc, args.tau, args.f_h)
                result.update(f0_MHz=f0, f1_MHz=f1, A_par_kHz=est.A_par, A_perp_kHz=est.A_perp,
                              closed_form_kHz=est.closed_form)
                if args.kind == "localize":
                    loc = localize(est, provenance={"trace": os.path.basename(args.csv),
                                                    "peaks_MHz": list(peaks)})
                    result.update(r_nm=loc.r, theta_deg=loc.theta, chain=loc.chain)
    except ANALYSIS_ERRORS as exc:
        raise CliError(EXIT_ANALYSIS, "analysis", str(exc))
    except ValueError as exc:
        raise CliError(EXIT_ANALYSIS, "analysis", str(exc))
    text = dumps(result)
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# seq
# ---------------------------------------------------------------------------

def _macros(elements):
    for e in elements:
        if isinstance(e, Block):
            if e.macro is not None:
                yield e.macro
            yield from _macros(e.body)


def _check(program, f_h, tol):
    lines, ok = [], True
    seen = set()
    for macro in _macros(program.elements):
        if macro in seen:
            continue
        seen.add(macro)
        name, _, arg = macro.partition(" ")
        value = float(arg.split("=", 1)[1])
        if name in ("PolY", "PolX"):
            period = 2 * value
            line = f"{name}: 2*tau_pol = {period!r} us, equivalent frequency {3 / period!r} MHz"
            if f_h is not None:
                target = 3.0 / f_h
                rel = abs(period - target) / target
                passed = rel <= tol
                ok &= passed
                line += (f"; commensurate 3/f_H = {target!r} us, relative deviation {rel:.3g}"
                         f" -> {'PASS' if passed else 'FAIL'}")
            lines.append(line)
        else:
            lines.append(f"{name}: tau = {value!r} us, filter frequency (2 tau)^-1 = "
                         f"{1 / (2 * value)!r} MHz, sensing time {int(name[5:]) * value!r} us")
    return lines, ok


def cmd_seq(args) -> int:
    if args.file and args.file != "-":
        try:
            with open(args.file) as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(EXIT_INPUT, "io", str(exc))
    else:
        text = sys.stdin.read()
    try:
        program = parse_sequence(text)
    except ParseError as exc:
        raise CliError(EXIT_INPUT, "parse", str(exc), line=exc.line, column=exc.column,
                       token=exc.token)
    canon = format_sequence(program)
    if args.action == "format":
        sys.stdout.write(canon + "\n")
        return EXIT_OK
    summary = (f"# pi={program.n_pi} pi/2={program.n_half_pi} readouts={program.n_readouts} "
               f"duration_us={program.duration!r}")
    if args.action == "parse":
        sys.stdout.write(canon + "\n" + summary + "\n")
        return EXIT_OK
    lines, ok = _check(program, args.f_h, args.tol)
    sys.stdout.write("\n".join([summary, *lines, "PASS" if ok else "FAIL"]) + "\n")
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nvscope", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nvscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the experiment described by a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="readout noise seed (overrides the config)")
    r.add_argument("--threads", type=int, help="sweep worker threads (default $NVSCOPE_THREADS or 1)")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="analyze a trace CSV")
    a.add_argument("csv")
    a.add_argument("--kind", required=True,
                   choices=["spectrum", "fit", "invert", "localize", "nspin"])
    a.add_argument("--zone", type=int, help="Nyquist zone of the sampled signal")
    a.add_argument("--fs", type=float, help="sample rate in MHz (checked against the axis)")
    a.add_argument("--column", help="value column (default: second column)")
    a.add_argument("--components", type=int, default=1, choices=[1, 2])
    a.add_argument("--no-decay", action="store_true", help="fit undamped sinusoids")
    a.add_argument("--f-osc", type=float, help="coherent-driving frequency, kHz")
    a.add_argument("--tau", type=float, help="pulse spacing of the f_osc measurement, us")
    a.add_argument("--f-h", type=float, help="nominal Larmor frequency, MHz (picks f0)")
    a.add_argument("--block-duration", type=float, help="transfer block duration, us")
    a.add_argument("--contrast", type=float, default=1.0)
    a.add_argument("--out", help="also write the JSON result to this file")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("seq", help="parse, format or check pulse-sequence text")
    s.add_argument("action", choices=["parse", "format", "check"])
    s.add_argument("file", nargs="?", help="input file (default stdin)")
    s.add_argument("--f-h", type=float, help="target Larmor frequency for the PulsePol check, MHz")
    s.add_argument("--tol", type=float, default=1e-3, help="relative tolerance of the check")
    s.set_defaults(func=cmd_seq)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        return _fail(err)


if __name__ == "__main__":
    sys.exit(main())
