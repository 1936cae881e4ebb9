"""Command line front end.

Subcommands::

    nmd synth       --signal xp --n 1024 --noise 0.1 --seed 7 --out xp.csv
    nmd decompose   --input xp.csv --out-dir run/ [--lambda ... --energy-threshold ...]
    nmd spectrum    --input xp.csv --out spec.csv
    nmd spectrum    --input run/decomposition.csv --out-dir run/spectra
    nmd extrapolate --input run/model.json --horizon 0.25 --out ext.csv
    nmd eval        --input run/decomposition.csv [--meta run/decomposition.json]

Exit statuses: 0 success, 2 usage, 3 input error, 4 training divergence,
5 clustering degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .clustering import ClusterConfig
from .errors import NMDError
from .fnn import (DEFAULT_HIDDEN_AMP, DEFAULT_HIDDEN_RES, DEFAULT_UNIT_CAP, extrapolate,
                  load_model, write_checkpoint)
from .metrics import evaluate
from .pipeline import (DecomposeConfig, decompose, decomposition_metadata,
                       read_decomposition_csv, write_decomposition_csv, write_metadata)
from .signal import CLOSED_FORMS, read_signal_csv, synthesize, write_signal_csv
from .spectral import magnitude_spectrum, write_spectrum_csv
from .trainer import L1_MODES, TrainConfig, write_history_csv

USAGE_STATUS = 2
IO_STATUS = 3

DECOMPOSITION_CSV = "decomposition.csv"
DECOMPOSITION_META = "decomposition.json"
METRICS_JSON = "metrics.json"
CHECKPOINT_JSON = "model.json"
HISTORY_CSV = "loss_history.csv"


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None = None
    out: Path | None = None
    out_dir: Path | None = None
    meta: Path | None = None
    signal: str | None = None
    n: int = 1024
    noise: float = 0.0
    seed: int = 0
    layout: str | None = None
    zero_mean: bool = False
    horizon: float = 0.25
    step: float | None = None
    decompose: DecomposeConfig = field(default_factory=DecomposeConfig)


# ----------------------------------------------------------------------------
# Argument parsing


def _ranged(kind, lo=None, hi=None, lo_open=False, hi_open=False):
    """argparse type accepting ``kind`` values inside the given bounds."""

    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}") from None
        if value != value:
            raise argparse.ArgumentTypeError("NaN is not allowed")
        bad_lo = lo is not None and (value <= lo if lo_open else value < lo)
        bad_hi = hi is not None and (value >= hi if hi_open else value > hi)
        if bad_lo or bad_hi:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            lo_s = "-inf" if lo is None else f"{lo:g}"
            hi_s = "inf" if hi is None else f"{hi:g}"
            raise argparse.ArgumentTypeError(f"{text} is outside {left}{lo_s}, {hi_s}{right}")
        return value

    return parse


_positive = _ranged(float, 0, lo_open=True)
_nonnegative = _ranged(float, 0)
_open_unit = _ranged(float, 0, 1, lo_open=True, hi_open=True)
_count = _ranged(int, 1)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    train, cluster = TrainConfig(), ClusterConfig()
    g = p.add_argument_group("training")
    g.add_argument("--lambda", dest="lam", type=_nonnegative, default=train.lam,
                   help="L1 weight on the amplitude network (default %(default)g)")
    g.add_argument("--lr", type=_positive, default=train.learning_rate,
                   help="learning rate (default %(default)g)")
    g.add_argument("--momentum", type=_ranged(float, 0, 1, hi_open=True), default=train.momentum,
                   help="Nesterov momentum in [0, 1) (default %(default)g)")
    g.add_argument("--epochs", type=_ranged(int, 0), default=train.max_epochs,
                   help="maximum epochs; 0 keeps the initial model (default %(default)d)")
    g.add_argument("--stop-tol", type=_nonnegative, default=train.stop_rel_improvement,
                   help="early-stop relative improvement (default %(default)g)")
    g.add_argument("--stop-window", type=_count, default=train.stop_window,
                   help="early-stop window in epochs (default %(default)d)")
    g.add_argument("--l1-mode", choices=L1_MODES, default=train.l1_mode)
    g.add_argument("--unit-cap", type=_count, default=DEFAULT_UNIT_CAP,
                   help="maximum number of sinusoid units (default %(default)d)")
    g.add_argument("--hidden-amp", type=_count, default=DEFAULT_HIDDEN_AMP)
    g.add_argument("--hidden-res", type=_count, default=DEFAULT_HIDDEN_RES)
    g = p.add_argument_group("clustering")
    g.add_argument("--energy-threshold", type=_open_unit, default=cluster.energy_threshold,
                   help="primary energy share P in (0, 1) (default %(default)g)")
    g.add_argument("--radius", type=_positive, default=cluster.radius,
                   help="circle radius r in frequency units (default %(default)g)")
    g.add_argument("--merge-threshold", type=_ranged(float, 0, 1, lo_open=True),
                   default=cluster.merge_threshold,
                   help="overlap share above which circles merge (default %(default)g)")


def _add_synth_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--signal", choices=sorted(CLOSED_FORMS), required=required,
                   help="built-in test signal")
    p.add_argument("--n", type=_ranged(int, 16), default=1024, help="sample count (default 1024)")
    p.add_argument("--noise", type=_nonnegative, default=0.0, help="Gaussian noise sigma")
    p.add_argument("--seed", type=_ranged(int, 0), default=0,
                   help="seed for noise and weight initialization")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmd", description="Neural mode decomposition of time series.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="write a built-in test signal to CSV")
    _add_synth_flags(p, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("decompose", help="train, cluster and write the IMFs")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="signal CSV (value or time,value)")
    src.add_argument("--signal", choices=sorted(CLOSED_FORMS), help="decompose a built-in signal")
    p.add_argument("--n", type=_ranged(int, 16), default=1024)
    p.add_argument("--noise", type=_nonnegative, default=0.0)
    p.add_argument("--seed", type=_ranged(int, 0), default=0)
    p.add_argument("--layout", choices=("value", "time-value"), default=None,
                   help="CSV layout; detected from the column count by default")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_model_flags(p)

    p = sub.add_parser("spectrum", help="magnitude spectrum of a signal or of each IMF")
    p.add_argument("--input", type=Path, required=True,
                   help="signal CSV or decomposition CSV")
    p.add_argument("--out", type=Path, help="output CSV for a signal input")
    p.add_argument("--out-dir", type=Path, help="output directory for a decomposition input")
    p.add_argument("--layout", choices=("value", "time-value"), default=None)
    p.add_argument("--zero-mean", action="store_true", help="subtract the mean first")

    p = sub.add_parser("extrapolate", help="run a checkpoint past its training window")
    p.add_argument("--input", type=Path, required=True, help="model checkpoint (model.json)")
    p.add_argument("--horizon", type=_positive, default=0.25,
                   help="extra time as a fraction of the training span (default %(default)g)")
    p.add_argument("--step", type=_positive, default=None,
                   help="step as a fraction of the span (default: the training sample step)")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="recompute metrics from a decomposition CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--meta", type=Path, default=None,
                   help="decomposition.json supplying dominant frequencies")
    p.add_argument("--out", type=Path, default=None, help="write metrics JSON here instead of stdout")
    return parser


def parse_args(argv=None) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`; usage errors exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "spectrum" and (ns.out is None) == (ns.out_dir is None):
        parser.error("spectrum: give exactly one of --out (signal) or --out-dir (decomposition)")
    kwargs = {k: getattr(ns, k) for k in ("input", "out", "out_dir", "meta", "signal", "n", "noise",
                                          "seed", "layout", "zero_mean", "horizon", "step")
              if hasattr(ns, k)}
    if ns.command == "decompose":
        kwargs["decompose"] = DecomposeConfig(
            train=TrainConfig(learning_rate=ns.lr, momentum=ns.momentum, max_epochs=ns.epochs,
                              lam=ns.lam, stop_rel_improvement=ns.stop_tol,
                              stop_window=ns.stop_window, seed=ns.seed, l1_mode=ns.l1_mode),
            cluster=ClusterConfig(ns.energy_threshold, ns.radius, ns.merge_threshold),
            hidden_amp=ns.hidden_amp,
            hidden_res=ns.hidden_res,
            unit_cap=ns.unit_cap,
        )
    return RunConfig(command=ns.command, **kwargs)


# ----------------------------------------------------------------------------
# Commands


class _UsageError(Exception):
    """Flag combination that only the command itself can detect."""


class _InputProblem(Exception):
    pass


class _Outputs:
    """Tracks files written by a command so a failure can remove them."""

    def __init__(self):
        self.files: list[Path] = []
        self.dirs: list[Path] = []

    def directory(self, path: Path) -> Path:
        missing = []
        p = path
        while not p.exists():
            missing.append(p)
            p = p.parent
        path.mkdir(parents=True, exist_ok=True)
        self.dirs.extend(reversed(missing))
        return path

    def file(self, path: Path) -> Path:
        self.files.append(path)
        return path

    def remove(self) -> None:
        for f in self.files:
            try:
                f.unlink()
            except FileNotFoundError:
                pass
        for d in reversed(self.dirs):
            try:
                d.rmdir()
            except OSError:
                pass


def _synth(cfg: RunConfig, out: _Outputs) -> None:
    sig = synthesize(cfg.signal, cfg.n, cfg.noise, cfg.seed)
    write_signal_csv(out.file(cfg.out), sig)
    print(f"wrote {len(sig)} samples of {cfg.signal} to {cfg.out}")


def _decompose(cfg: RunConfig, out: _Outputs) -> None:
    if cfg.input is not None:
        sig = read_signal_csv(cfg.input, cfg.layout)
    else:
        sig = synthesize(cfg.signal, cfg.n, cfg.noise, cfg.seed)
    run = decompose(sig, cfg.decompose)
    d = out.directory(cfg.out_dir)
    write_decomposition_csv(out.file(d / DECOMPOSITION_CSV), run)
    write_metadata(out.file(d / DECOMPOSITION_META), decomposition_metadata(run, cfg.decompose))
    out.file(d / METRICS_JSON).write_text(run.metrics.to_json() + "\n", encoding="utf-8")
    write_checkpoint(out.file(d / CHECKPOINT_JSON), run.model, run.norm, len(sig))
    write_history_csv(out.file(d / HISTORY_CSV), run.report)
    freqs = ", ".join(f"{f:.4g}" for f in run.result.dominant_frequencies)
    print(f"{run.imfs.shape[0]} IMFs (dominant frequencies: {freqs}); "
          f"MAE {run.metrics.mae:.3g}, IO {run.metrics.io:.3g}, "
          f"{run.report.epochs_run} epochs; outputs in {d}")


def _is_decomposition(path: Path) -> bool:
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().strip().split(",")
    return len(head) >= 4 and head[0] == "t" and head[-3:] == ["residual", "reconstruction", "original"]


def _spectrum(cfg: RunConfig, out: _Outputs) -> None:
    if _is_decomposition(cfg.input):
        if cfg.out_dir is None:
            raise _UsageError("--out-dir is required for a decomposition input")
        table = read_decomposition_csv(cfg.input)
        d = out.directory(cfg.out_dir)
        for i, imf in enumerate(table.imfs, start=1):
            write_spectrum_csv(out.file(d / f"imf{i}_spectrum.csv"), magnitude_spectrum(imf, cfg.zero_mean))
        print(f"wrote {table.imfs.shape[0]} IMF spectra to {d}")
    else:
        if cfg.out is None:
            raise _UsageError("--out is required for a signal input")
        sig = read_signal_csv(cfg.input, cfg.layout)
        spec = magnitude_spectrum(sig.values, cfg.zero_mean)
        write_spectrum_csv(out.file(cfg.out), spec)
        print(f"peak at bin {spec.peak():g}; wrote {cfg.out}")


def _extrapolate(cfg: RunConfig, out: _Outputs) -> None:
    text = cfg.input.read_text(encoding="utf-8")
    model, norm = load_model(text)
    if norm is None:
        raise _InputProblem(f"{cfg.input}: checkpoint has no normalization record")
    step = cfg.step
    if step is None:
        samples = json.loads(text).get("samples")
        if not samples or samples < 2:
            raise _UsageError("--step is required: checkpoint does not record its sample count")
        step = 1.0 / (samples - 1)
    sig = extrapolate(model, norm, cfg.horizon, step)
    write_signal_csv(out.file(cfg.out), sig)
    print(f"wrote {len(sig)} extrapolated samples to {cfg.out}")


def _eval(cfg: RunConfig, out: _Outputs) -> None:
    table = read_decomposition_csv(cfg.input)
    dominant = ()
    if cfg.meta is not None:
        dominant = json.loads(cfg.meta.read_text(encoding="utf-8")).get("dominant_frequencies", ())
    text = evaluate(table.components, table.original, dominant).to_json() + "\n"
    if cfg.out is not None:
        out.file(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


COMMANDS = {
    "synth": _synth,
    "decompose": _decompose,
    "spectrum": _spectrum,
    "extrapolate": _extrapolate,
    "eval": _eval,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    outputs = _Outputs()
    try:
        COMMANDS[config.command](config, outputs)
    except _UsageError as exc:
        status, message = USAGE_STATUS, str(exc)
    except _InputProblem as exc:
        status, message = IO_STATUS, str(exc)
    except NMDError as exc:
        status, message = exc.exit_status, str(exc)
    except (OSError, json.JSONDecodeError) as exc:
        status, message = IO_STATUS, str(exc)
    else:
        return 0
    outputs.remove()
    print(f"nmd {config.command}: error: {message}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
