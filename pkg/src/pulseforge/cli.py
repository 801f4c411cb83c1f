"""Command-line entry point.

Every subcommand reads an optional JSON config (``--config``), lets a few
flags override it, writes its artifacts to ``--out`` and finishes with a
``manifest.json`` naming the command, the config digest, the seed and the
files produced. Exit codes: 0 success, 2 invalid input, 3 numerical
failure or non-convergence, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ScatteringStats, brick_scattering
from .errors import ConfigError, ConvergenceWarning, NumericalError
from .gabor import OrthoDesignConfig, design_orthogonal, sir_self
from .linksim import LinkConfig, run_link
from .numerology import (ChannelCharacteristics, Numerology, derive_cp_ofdm_numerology,
                         derive_tf_localized_numerology)
from .pulses import (PrototypeFilter, WindowSpec, cp_ofdm_pair, cross_ambiguity, gaussian_pulse,
                     load_pulse, rect_pulse, save_pulse, wofdm_pulse, zp_ofdm_pair)
from .sinr_engine import (SinrConfig, SinrGrid, joint_design, max_sinr_receiver, sinr_contour,
                          sinr_discrete)
from .spectrum import PaModel, apply_pa, estimate_psd, guard_overhead, guard_subcarriers
from .transceiver import SymbolGrid, complexity_count, modulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

COMMANDS = ("numerology", "design", "contour", "psd", "guards", "simulate", "complexity",
            "ambiguity")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class Run:
    """Collects outputs of one command and writes the manifest."""

    def __init__(self, command: str, config: dict, args):
        self.command = command
        self.config = config
        self.seed = args.seed
        self.out = Path(args.out)
        self.outputs: list[str] = []
        canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
        self.digest = hashlib.sha256(canonical.encode()).hexdigest()
        self.out.mkdir(parents=True, exist_ok=True)

    @property
    def tag(self) -> str:
        return f"manifest.json sha256:{self.digest[:16]}"

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def write_json(self, name: str, data: dict) -> dict:
        data = {**data, "manifest": self.tag}
        self.path(name).write_text(json.dumps(data, indent=2, default=_jsonable) + "\n")
        return data

    def write_csv(self, name: str, header: str, rows) -> None:
        lines = [f"# {self.tag}", header]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        self.path(name).write_text("\n".join(lines) + "\n")

    def write_pulse(self, name: str, p: PrototypeFilter) -> None:
        csv, sidecar = save_pulse(self.path(name), p)
        text = csv.read_text()
        csv.write_text(f"# {self.tag}\n" + text)
        self.outputs.append(sidecar.name)

    def finish(self) -> None:
        manifest = {"command": self.command, "config_digest": self.digest,
                    "tool_version": __version__, "seed": self.seed,
                    "config": self.config, "outputs": self.outputs}
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_jsonable) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")


def _numerology(cfg: dict) -> Numerology:
    _require(cfg, "M", "N")
    return Numerology(cfg["M"], cfg["N"], cfg.get("Ts", 1.0))


def _pulse(spec, num: Numerology, role: str) -> PrototypeFilter:
    """Pulse from a CSV path or a builtin description."""
    if spec is None:
        raise ConfigError(f"missing {role} pulse")
    if isinstance(spec, str):
        return load_pulse(spec, normalize=True)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{role} pulse must be a path or an object with 'kind'")
    kind = spec["kind"].lower()
    if kind == "file":
        return load_pulse(spec["path"], normalize=True)
    if kind == "rect":
        p = rect_pulse(int(spec.get("length", num.N)), num.Ts)
    elif kind in ("cp_tx", "cp_rx"):
        p = cp_ofdm_pair(num)[kind == "cp_rx"]
    elif kind in ("zp_tx", "zp_rx"):
        p = zp_ofdm_pair(num, int(spec.get("n_zp", num.N - num.M)))[kind == "zp_rx"]
    elif kind == "gaussian":
        length = int(spec.get("length", 2 * num.N))
        p = gaussian_pulse(float(spec.get("alpha", 1.0)), length, num.Ts,
                           scale=spec.get("scale", length / 8))
    elif kind == "wofdm":
        w = WindowSpec(spec.get("window", "HANNING"), int(spec["N0"]), float(spec.get("beta", 0.0)))
        p = wofdm_pulse(num, w, spec.get("design_length"))
    else:
        raise ConfigError(f"unknown pulse kind {spec['kind']!r}")
    if spec.get("pad_to"):
        p = p.padded(int(spec["pad_to"]))
    return p


def _channel(cfg: dict) -> ScatteringStats | None:
    ch = cfg.get("channel")
    if ch is None:
        return None
    if isinstance(ch, str):
        return ScatteringStats.load(ch)
    if "paths" in ch:
        return ScatteringStats.from_dict(ch)
    grid = tuple(ch.get("grid", (8, 8)))
    return brick_scattering(ch.get("tau_max", 0), ch.get("nu_max", 0.0), grid)


def _sinr_cfg(cfg: dict) -> SinrConfig:
    return SinrConfig.from_db(cfg.get("noise_db"), n_range=cfg.get("n_range"),
                              grid=tuple(cfg.get("grid", (8, 8))))


def _threads(args) -> int:
    n = args.threads or os.environ.get("PULSEFORGE_THREADS") or 1
    try:
        n = int(n)
    except ValueError:
        raise ConfigError(f"thread count must be an integer, got {n!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


# --- subcommands ----------------------------------------------------------


def cmd_numerology(cfg: dict, args, run: Run) -> int:
    mode = cfg.get("mode", "cp")
    chars = ChannelCharacteristics(float(cfg.get("tau_max", 0.0)), float(cfg.get("nu_max", 0.0)))
    if mode == "cp":
        _require(cfg, "F", "Ts")
        num = derive_cp_ofdm_numerology(chars, float(cfg["F"]), float(cfg["Ts"]),
                                        float(cfg.get("tf_cap", 2.0)))
        out = num.to_dict()
    elif mode == "tf":
        _require(cfg, "TF", "Ts")
        num, q = derive_tf_localized_numerology(chars, float(cfg["TF"]), float(cfg["Ts"]))
        out = {**num.to_dict(), "ratio_error": q.ratio_error, "tf_error": q.tf_error}
    else:
        raise ConfigError(f"mode must be 'cp' or 'tf', got {mode!r}")
    print(json.dumps(run.write_json("numerology.json", out)))
    return EXIT_OK


def cmd_design_orth(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    K = float(cfg.get("K", 2))
    w = cfg.get("window")
    spec = None
    if w is not None:
        spec = WindowSpec(w.get("kind", "RECT"), int(round(K * num.N)), float(w.get("beta", 0.0)))
    oc = OrthoDesignConfig(alpha=float(cfg.get("alpha", 1.0)), epsilon=float(cfg.get("epsilon", 1e-4)),
                           max_iters=int(cfg.get("max_iters", 50)), window=spec, K=K,
                           working_length=cfg.get("working_length"), scale=cfg.get("scale"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        res = design_orthogonal(oc, num)
    run.write_pulse("pulse.csv", res.pulse)
    report = run.write_json("report.json", res.report())
    print(json.dumps({k: report[k] for k in ("iterations", "sir_self_dB", "converged")}))
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def cmd_design_maxsinr(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    g = _pulse(cfg.get("tx"), num, "tx")
    stats = _channel(cfg) or brick_scattering(0, 0, (1, 1))
    L = int(cfg.get("L", g.length))
    sol = max_sinr_receiver(g, num, stats, _sinr_cfg(cfg), L)
    run.write_pulse("gamma.csv", sol.gamma_max)
    rep = run.write_json("report.json", {"zeta_max_dB": sol.zeta_max_db, "iterations": 1,
                                         "regularized": sol.regularized, "residual": sol.residual})
    print(json.dumps({"zeta_max_dB": rep["zeta_max_dB"]}))
    return EXIT_OK


def cmd_design_joint(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    stats = _channel(cfg) or brick_scattering(0, 0, (1, 1))
    L = int(cfg.get("L", 2 * num.N))
    g0 = cfg.get("g0") or {"kind": "gaussian", "alpha": 1 / 16, "length": L}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        res = joint_design(_pulse(g0, num, "g0"), num, stats, _sinr_cfg(cfg), L,
                           float(cfg.get("epsilon", 1e-4)), int(cfg.get("max_iters", 50)))
    run.write_pulse("g.csv", res.g)
    run.write_pulse("gamma.csv", res.gamma)
    rep = run.write_json("report.json", res.report())
    print(json.dumps({"zeta_max_dB": rep["zeta_max_dB"], "iterations": rep["iterations"]}))
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def cmd_contour(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    _require(cfg, "tau_points", "nu_points")
    g = _pulse(cfg.get("tx"), num, "tx")
    gamma = _pulse(cfg.get("rx", cfg.get("tx")), num, "rx")
    sc = _sinr_cfg(cfg)
    taus, nus = cfg["tau_points"], cfg["nu_points"]
    n = _threads(args)
    if n == 1:
        grid = sinr_contour(g, gamma, num, sc, taus, nus)
    else:
        # grid points are independent; split rows across workers
        rows = [[t] for t in taus]
        with ThreadPoolExecutor(n) as pool:
            parts = list(pool.map(lambda r: sinr_contour(g, gamma, num, sc, r, nus), rows))
        grid = SinrGrid(np.asarray(taus, float), np.asarray(nus, float),
                        np.vstack([p.values for p in parts]))
    run.write_csv("contour.csv", "tau,nu,sinr_dB", grid.rows())
    print(json.dumps({"points": int(grid.values.size), "max_dB": float(grid.values.max()),
                      "min_dB": float(grid.values.min())}))
    return EXIT_OK


def _psd_estimate(cfg: dict, args):
    num = _numerology(cfg)
    g = _pulse(cfg.get("tx"), num, "tx")
    n_active = int(cfg.get("active", num.M))
    if not 1 <= n_active <= num.M:
        raise ConfigError("active subcarrier count must lie in [1, M]")
    active = np.arange(-(n_active // 2), n_active - n_active // 2) % num.M
    n_sym = int(cfg.get("n_symbols", 16))
    n_frames = int(cfg.get("n_frames", 4))
    rng = np.random.default_rng(args.seed)
    qpsk = (rng.choice([-1.0, 1.0], (n_frames, n_active, n_sym))
            + 1j * rng.choice([-1.0, 1.0], (n_frames, n_active, n_sym))) / np.sqrt(2)
    sig = modulate(SymbolGrid(qpsk, active), g, num)
    pa = cfg.get("pa")
    if pa:
        sig = apply_pa(sig, PaModel(pa.get("kind", "RAPP"), float(pa.get("p", 2.0)),
                                    float(pa.get("backoff_db", 6.0))))
    seg = int(cfg.get("segment", 8 * num.M))
    psd = estimate_psd(sig, seg, float(cfg.get("overlap", 0.5)), cfg.get("taper", "hann"), active)
    return num, psd, n_active


def cmd_psd(cfg: dict, args, run: Run) -> int:
    num, psd, _ = _psd_estimate(cfg, args)
    run.write_csv("psd.csv", "freq_Hz,psd_dBcHz", zip(psd.freq_axis, psd.psd))
    print(json.dumps({"bins": int(psd.freq_axis.size), "band_Hz": list(psd.band)}))
    return EXIT_OK


def cmd_guards(cfg: dict, args, run: Run) -> int:
    num, psd, n_active = _psd_estimate(cfg, args)
    guards = guard_subcarriers(psd, num, float(cfg.get("mask_level", -50.0)))
    occupied = int(cfg.get("occupied", n_active))
    out = {"guards_single_side": guards,
           "overhead_percent": None if guards is None else guard_overhead(guards, occupied)}
    print(json.dumps(run.write_json("guards.json", out)))
    return EXIT_OK if guards is not None else EXIT_NUMERICAL


def cmd_simulate(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    g = _pulse(cfg.get("tx"), num, "tx")
    gamma = _pulse(cfg.get("rx", cfg.get("tx")), num, "rx")
    lc = LinkConfig(cfg.get("constellation", "QPSK"), cfg.get("snr_db", 30.0),
                    int(cfg.get("n_frames", 1000)), args.seed, cfg.get("n_symbols"))
    rep = run_link(g, gamma, num, _channel(cfg), lc)
    out = rep.to_dict()
    stats = _channel(cfg)
    if stats is not None and cfg.get("snr_db") is not None:
        out["predicted_sinr_dB"] = sinr_discrete(g, gamma, num, stats,
                                                 SinrConfig.from_db(-float(cfg["snr_db"])))
    print(json.dumps(run.write_json("report.json", out)))
    return EXIT_OK


def cmd_complexity(cfg: dict, args, run: Run) -> int:
    _require(cfg, "M", "TF")
    M = int(cfg["M"])
    N = int(np.ceil(M * float(cfg["TF"]) - 1e-9))
    K = cfg.get("K", "cp")
    K = None if str(K).lower() == "cp" else float(K)
    rep = complexity_count(Numerology(M, N), K, bool(cfg.get("flat_top", False)))
    print(json.dumps(run.write_json("complexity.json", {**rep.to_dict(), "N": N})))
    return EXIT_OK


def cmd_ambiguity(cfg: dict, args, run: Run) -> int:
    num = _numerology(cfg)
    _require(cfg, "tau_points", "nu_points")
    g = _pulse(cfg.get("tx"), num, "tx")
    gamma = _pulse(cfg.get("rx", cfg.get("tx")), num, "rx")
    taus = np.asarray(cfg["tau_points"])
    nus = np.asarray(cfg["nu_points"], dtype=float)
    A = cross_ambiguity(g, gamma, taus, nus)
    rows = ((int(t), v, A[i, j].real, A[i, j].imag, abs(A[i, j]))
            for i, t in enumerate(taus) for j, v in enumerate(nus))
    run.write_csv("ambiguity.csv", "tau,nu,re,im,abs", rows)
    print(json.dumps({"points": int(A.size), "max_abs": float(np.abs(A).max()),
                      "sir_self_dB": sir_self(g, gamma, num) if num.N >= num.M else None}))
    return EXIT_OK


DESIGNS = {"orth": cmd_design_orth, "maxsinr": cmd_design_maxsinr, "joint": cmd_design_joint}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    common.add_argument("--threads", type=int, help="worker threads (env PULSEFORGE_THREADS)")

    p = _Parser(prog="pulseforge", description="Pulse-shaped OFDM waveform design toolkit.")
    p.add_argument("--version", action="version", version=f"pulseforge {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")

    n = sub.add_parser("numerology", parents=[common], help="derive a lattice from channel limits")
    n.add_argument("--mode", choices=["cp", "tf"])
    n.add_argument("--tau-max", dest="tau_max", type=float, help="max excess delay (s)")
    n.add_argument("--nu-max", dest="nu_max", type=float, help="max Doppler (Hz)")
    n.add_argument("--F", type=float, help="subcarrier spacing (Hz), cp mode")
    n.add_argument("--Ts", type=float, help="sampling period (s)")
    n.add_argument("--TF", type=float, help="lattice density, tf mode")
    n.add_argument("--tf-cap", dest="tf_cap", type=float)

    d = sub.add_parser("design", parents=[common], help="pulse design (orth | maxsinr | joint)")
    d.add_argument("method", choices=sorted(DESIGNS))

    for name, text in (("contour", "SINR over a delay/Doppler grid"),
                       ("psd", "power spectral density of a random frame"),
                       ("guards", "guard subcarriers against a spectral mask"),
                       ("simulate", "Monte-Carlo link simulation"),
                       ("ambiguity", "cross-ambiguity grid of a pulse pair")):
        sub.add_parser(name, parents=[common], help=text)

    c = sub.add_parser("complexity", parents=[common], help="multiplication count per symbol")
    c.add_argument("--M", type=int)
    c.add_argument("--TF", type=float)
    c.add_argument("--K", help="overlapping factor or 'cp'")
    c.add_argument("--flat-top", dest="flat_top", action="store_true")
    return p


OVERRIDES = ("mode", "tau_max", "nu_max", "F", "Ts", "TF", "tf_cap", "M", "K", "flat_top")

HANDLERS = {"numerology": cmd_numerology, "contour": cmd_contour, "psd": cmd_psd,
            "guards": cmd_guards, "simulate": cmd_simulate, "complexity": cmd_complexity,
            "ambiguity": cmd_ambiguity}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or (argv[0] not in COMMANDS and not argv[0].startswith("-")):
        parser.print_usage(sys.stderr)
        if argv:
            print(f"pulseforge: unknown command {argv[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load_config(args.config)
        # flags override config keys and are part of the digest
        for key in OVERRIDES:
            val = getattr(args, key, None)
            if val is not None and val is not False:
                cfg[key] = val
        name = args.command if args.command != "design" else f"design {args.method}"
        handler = DESIGNS[args.method] if args.command == "design" else HANDLERS[args.command]
        run = Run(name, cfg, args)
        code = handler(cfg, args, run)
        run.finish()
        return code
    except NumericalError as exc:
        print(f"pulseforge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"pulseforge: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
