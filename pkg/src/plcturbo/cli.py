"""Command-line front end: BER sweeps with early stopping, EXIT chart
generation, and channel dumps, all reproducible from (config, master seed).

All parallelism lives here.  Work items (frames, EXIT grid points) are
seeded through the fixed ``derive_seed`` rule by item index, and early
stopping advances in fixed-size batches, so every output is byte-identical
across runs and worker counts.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, channel as channel_mod, config as config_mod
from . import exit_chart, noise as noise_mod, siso, trellis as trellis_mod
from .config import ConfigDict
from .errors import ConfigError, NumericalDegeneracyError
from .noise import derive_seed
from .system import TurboSystem
from .trellis import BinaryPolynomial

VERSION_STRING = f"plcturbo-{__version__}"

DEGENERACY_LIMIT = 100  # skipped frames before the run is declared failed


@dataclass(frozen=True)
class BerPoint:
    """One SNR point of a Monte-Carlo sweep."""

    snr_db: float
    frames_run: int
    bits_run: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    wall_seconds: float
    master_seed: int


# ---------------------------------------------------------------------------
# worker-pool plumbing: per-process state built once in the initializer

_WORKER: dict = {}


def _init_ber_worker(cfg: ConfigDict, snr_db: float, noiseless: bool):
    mode = cfg.get("system", {}).get("mode", "turbo")
    _WORKER["mode"] = mode
    _WORKER["noiseless"] = noiseless
    if mode == "turbo":
        _WORKER["system"] = TurboSystem(config_mod.build_system(cfg, snr_db))
    elif mode == "uncoded":
        _WORKER["n_info"] = int(cfg.get("frame", {}).get("n_info", "100000"))
        _WORKER["noise"] = config_mod.build_noise(cfg, snr_db)
    else:
        raise ConfigError(f"unknown system mode {mode!r}")


def _ber_frame_task(frame_seed: int):
    """Run one frame; returns (bit_errors, bits, frame_error, degenerate)."""
    if _WORKER["mode"] == "uncoded":
        n = _WORKER["n_info"]
        bits = np.random.default_rng(derive_seed(frame_seed, 0)).integers(0, 2, n)
        z = noise_mod.sample(_WORKER["noise"], derive_seed(frame_seed, 1), n)
        y = trellis_mod.bit_to_symbol(bits) + z
        errors = int(np.sum((y < 0).astype(np.int64) != bits))
        return errors, n, errors > 0, False
    system: TurboSystem = _WORKER["system"]
    try:
        if _WORKER["noiseless"]:
            u = np.random.default_rng(derive_seed(frame_seed, 0)).integers(
                0, 2, system.cfg.n_info
            )
            tx = system.transmit(u, derive_seed(frame_seed, 1), noiseless=True)
            rx = system.receive(tx.y)
            errors = int(np.sum(rx.decoded != u))
        else:
            result = system.run_frame(frame_seed)
            errors = result.bit_errors
        return errors, system.cfg.n_info, errors > 0, False
    except NumericalDegeneracyError:
        return 0, 0, False, True


def _map_batch(pool, task, args):
    if pool is None:
        return [task(a) for a in args]
    return pool.map(task, args)


def run_ber_sweep(
    cfg: ConfigDict,
    snr_list: list[float],
    master_seed: int,
    workers: int = 1,
) -> tuple[list[BerPoint], int]:
    """One BerPoint per SNR; deterministic in (cfg, snr list, master seed).

    Stops a point once ``min_errors`` bit errors or ``max_bits`` simulated
    bits are reached, advancing in fixed-size frame batches so the set of
    simulated frames never depends on the worker count.  Returns the points
    and the count of frames skipped for numerical degeneracy.
    """
    sweep = cfg.get("sweep", {})
    min_errors = int(sweep.get("min_errors", "200"))
    max_bits = int(float(sweep.get("max_bits", "100000000")))
    batch = int(sweep.get("batch_frames", "16"))
    noiseless = cfg.get("noise", {}).get("noiseless", "false").lower() in ("1", "true")

    points = []
    skipped_total = 0
    for si, snr_db in enumerate(snr_list):
        t0 = time.perf_counter()
        ctx = multiprocessing.get_context("fork")
        pool = None
        if workers > 1:
            pool = ctx.Pool(workers, _init_ber_worker, (cfg, snr_db, noiseless))
        _init_ber_worker(cfg, snr_db, noiseless)  # also serve from this process
        try:
            frames = bits = bit_errors = frame_errors = 0
            next_index = 0
            while bit_errors < min_errors and bits < max_bits:
                seeds = [
                    derive_seed(master_seed, si, next_index + j) for j in range(batch)
                ]
                next_index += batch
                for errs, nbits, ferr, degenerate in _map_batch(
                    pool, _ber_frame_task, seeds
                ):
                    if degenerate:
                        skipped_total += 1
                        continue
                    frames += 1
                    bits += nbits
                    bit_errors += errs
                    frame_errors += int(ferr)
        finally:
            if pool is not None:
                pool.close()
                pool.join()
        points.append(
            BerPoint(
                snr_db=snr_db,
                frames_run=frames,
                bits_run=bits,
                bit_errors=bit_errors,
                frame_errors=frame_errors,
                ber=bit_errors / bits if bits else 0.0,
                fer=frame_errors / frames if frames else 0.0,
                wall_seconds=time.perf_counter() - t0,
                master_seed=master_seed,
            )
        )
    return points, skipped_total


# ---------------------------------------------------------------------------
# EXIT charts


def _init_exit_worker(cfg: ConfigDict, snr_db: float, precoders: list[str], samples: int):
    noise = config_mod.build_noise(cfg, snr_db)
    disc = config_mod.build_channel(cfg)
    metric_name = cfg.get("system", {}).get("metric", "mixture")
    if metric_name == "mixture":
        metric = siso.MixtureMetric(noise)
    else:
        metric = siso.GaussianMetric(noise_mod.effective_variance(noise))
    _WORKER["noise"] = noise
    _WORKER["metric"] = metric
    _WORKER["samples"] = samples
    _WORKER["inner"] = [
        trellis_mod.build_precoded_isi_trellis(BinaryPolynomial.parse(p), disc)
        for p in precoders
    ]
    ff = BinaryPolynomial.parse(config_mod._get(cfg, "code", "feedforward"))
    fb = BinaryPolynomial.parse(config_mod._get(cfg, "code", "feedback"))
    _WORKER["outer"] = trellis_mod.build_rsc_trellis(ff, fb)


def _exit_point_task(item):
    """(curve index or -1 for outer, i_a, point seed) -> measured I_E."""
    ci, i_a, seed = item
    if ci < 0:
        return exit_chart.outer_exit_point(_WORKER["outer"], i_a, _WORKER["samples"], seed)
    return exit_chart.inner_exit_point(
        _WORKER["inner"][ci], _WORKER["noise"], _WORKER["metric"], i_a, _WORKER["samples"], seed
    )


def run_exit(
    cfg: ConfigDict,
    snr_db: float,
    precoders: list[str],
    master_seed: int,
    workers: int = 1,
) -> tuple[list[exit_chart.ExitCurve], exit_chart.ExitCurve, list[dict]]:
    """Inner curves for each precoder, the outer curve, tunnel verdicts.

    Grid points are independent work items with per-point seeds, so the
    curves are identical for any worker count.
    """
    exit_cfg = cfg.get("exit", {})
    step = float(exit_cfg.get("grid_step", "0.05"))
    samples = int(float(exit_cfg.get("samples_per_point", "200000")))
    grid = exit_chart.default_grid(step)

    items = []
    for ci in range(len(precoders)):
        curve_seed = derive_seed(master_seed, 1000 + ci)
        items += [(ci, i_a, derive_seed(curve_seed, pi)) for pi, i_a in enumerate(grid)]
    outer_seed = derive_seed(master_seed, 2000)
    items += [(-1, i_a, derive_seed(outer_seed, pi)) for pi, i_a in enumerate(grid)]

    pool = None
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        pool = ctx.Pool(workers, _init_exit_worker, (cfg, snr_db, precoders, samples))
    _init_exit_worker(cfg, snr_db, precoders, samples)
    try:
        values = _map_batch(pool, _exit_point_task, items)
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    inner_curves = []
    for ci, text in enumerate(precoders):
        vals = values[ci * grid.size : (ci + 1) * grid.size]
        inner_curves.append(
            exit_chart.ExitCurve(
                i_a=grid,
                i_e=np.array(vals),
                label=str(BinaryPolynomial.parse(text)),
                snr_db=snr_db,
            )
        )
    outer = exit_chart.ExitCurve(
        i_a=grid, i_e=np.array(values[len(precoders) * grid.size :]), label="outer"
    )
    verdicts = []
    for curve in inner_curves:
        report = exit_chart.tunnel_check(curve, outer)
        verdicts.append(
            {
                "label": curve.label,
                "open": report.open_tunnel,
                "pinch_i_a": report.pinch_i_a,
                "min_gap": report.min_gap,
            }
        )
    return inner_curves, outer, verdicts


# ---------------------------------------------------------------------------
# output writers


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: list[str], rows: list[tuple]):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_ber_csv(path, points: list[BerPoint]):
    # wall_seconds deliberately left to the manifest: the CSV must be
    # byte-identical across reruns with the same seed
    write_csv(
        path,
        ["snr_db", "frames_run", "bits_run", "bit_errors", "frame_errors", "ber", "fer", "master_seed"],
        [
            (p.snr_db, p.frames_run, p.bits_run, p.bit_errors, p.frame_errors, p.ber, p.fer, p.master_seed)
            for p in points
        ],
    )


def _safe_label(label: str) -> str:
    return label.replace("+", "p").replace("^", "").replace(" ", "")


def write_exit_outputs(out_dir, inner_curves, outer, verdicts):
    import os

    files = []
    for curve in inner_curves + [outer]:
        name = f"exit_{_safe_label(curve.label)}.csv"
        write_csv(
            os.path.join(out_dir, name),
            ["i_a", "i_e", "label", "snr_db"],
            [
                (float(a), float(e), curve.label, curve.snr_db if curve.snr_db is not None else "")
                for a, e in zip(curve.i_a, curve.i_e)
            ],
        )
        files.append(name)
    write_csv(
        os.path.join(out_dir, "tunnel_report.csv"),
        ["label", "verdict", "pinch_i_a", "min_gap"],
        [
            (
                v["label"],
                "open" if v["open"] else "pinched",
                "" if v["pinch_i_a"] is None else v["pinch_i_a"],
                v["min_gap"],
            )
            for v in verdicts
        ],
    )
    files.append("tunnel_report.csv")
    # gnuplot layout: inner curves as-is, outer on swapped axes
    lines = [
        "set datafile separator ','",
        "set xlabel 'I_A equalizer / I_E decoder'",
        "set ylabel 'I_E equalizer / I_A decoder'",
        "set xrange [0:1]",
        "set yrange [0:1]",
        "set key bottom right",
        "plot \\",
    ]
    for curve in inner_curves:
        name = f"exit_{_safe_label(curve.label)}.csv"
        lines.append(f"  '{name}' every ::1 using 1:2 with lines title '{curve.label}', \\")
    lines.append(
        f"  'exit_{_safe_label(outer.label)}.csv' every ::1 using 2:1 with lines title 'outer code'"
    )
    gp = os.path.join(out_dir, "fig5_layout.gp")
    with open(gp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    files.append("fig5_layout.gp")
    return files


def dump_channel(cfg: ConfigDict, out_dir: str) -> dict:
    """Write taps plus frequency/impulse response tables for plotting."""
    import os

    params = config_mod.build_multipath(cfg)
    pulse = config_mod.build_pulse(cfg)
    disc = config_mod.build_channel(cfg)

    write_csv(
        os.path.join(out_dir, "channel_taps.csv"),
        ["k", "tap"],
        [(k, float(t)) for k, t in enumerate(disc.taps)],
    )
    freqs = np.linspace(0.0, 20e6, 2001)[1:]
    resp = channel_mod.frequency_response(params, freqs)
    write_csv(
        os.path.join(out_dir, "frequency_response.csv"),
        ["f_hz", "magnitude", "phase_rad"],
        [(float(f), float(abs(h)), float(np.angle(h))) for f, h in zip(freqs, resp)],
    )
    grid = channel_mod.default_time_grid(params, pulse)
    ch = channel_mod.equivalent_impulse_response(params, pulse, grid)
    write_csv(
        os.path.join(out_dir, "impulse_response.csv"),
        ["t_s", "ch"],
        [(float(t), float(v)) for t, v in zip(grid, ch)],
    )
    return {"taps": [float(t) for t in disc.taps]}


def write_manifest(out_dir, command, cfg, extra):
    import os

    manifest = {
        "version": VERSION_STRING,
        "command": command,
        "config": cfg,
        **extra,
    }
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# argument parsing and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plcturbo",
        description="Precoded turbo equalization experiments for power-line channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file overriding the preset")
        p.add_argument("--preset", help="built-in experiment preset name")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--workers", type=int, default=1, help="worker process count")
        p.add_argument("--out", default=".", help="output directory")

    ber = sub.add_parser("ber", help="Monte-Carlo BER sweep")
    common(ber)
    ber.add_argument("--snr", help="SNR grid a:b:step in dB, or comma list")

    ex = sub.add_parser("exit", help="EXIT curves and tunnel verdicts")
    common(ex)
    ex.add_argument("--snr", help="operating SNR in dB (single value)")
    ex.add_argument("--precoders", help="semicolon-separated precoder polynomials")

    dump = sub.add_parser("dump-channel", help="dump taps and response tables")
    common(dump)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    import os

    try:
        os.makedirs(args.out, exist_ok=True)
        preset = args.preset
        if args.command == "dump-channel" and preset in config_mod.CHANNEL_PRESETS:
            cfg = config_mod._merge(
                config_mod._VVF_CHANNEL, {"channel": {"preset": preset}}
            )
            if preset == "identity":
                cfg["channel"] = {"preset": "identity"}
                cfg["discretize"]["num_taps"] = "1"
        else:
            cfg = config_mod.load_config(args.config, preset)

        if args.command == "dump-channel":
            t0 = time.perf_counter()
            info = dump_channel(cfg, args.out)
            write_manifest(
                args.out,
                "dump-channel",
                cfg,
                {"taps": info["taps"], "wall_seconds": time.perf_counter() - t0},
            )
            print("taps:", " ".join(f"{t:+.4f}" for t in info["taps"]))
            return 0

        master_seed = args.seed
        if master_seed is None:
            master_seed = int(cfg.get("seeds", {}).get("master", "1"))

        if args.command == "ber":
            snr_spec = args.snr or cfg.get("sweep", {}).get("snr_db")
            if not snr_spec:
                raise ConfigError("no SNR grid: pass --snr or set [sweep] snr_db")
            snr_list = config_mod.parse_snr_spec(snr_spec)
            t0 = time.perf_counter()
            points, skipped = run_ber_sweep(cfg, snr_list, master_seed, args.workers)
            write_ber_csv(os.path.join(args.out, "ber.csv"), points)
            write_manifest(
                args.out,
                "ber",
                cfg,
                {
                    "master_seed": master_seed,
                    "workers": args.workers,
                    "snr_list": snr_list,
                    "degenerate_frames_skipped": skipped,
                    "wall_seconds": time.perf_counter() - t0,
                    "point_wall_seconds": [p.wall_seconds for p in points],
                },
            )
            for p in points:
                print(
                    f"snr {p.snr_db:+6.2f} dB  ber {p.ber:.3e}  fer {p.fer:.3e}  "
                    f"({p.bit_errors} errors / {p.bits_run} bits)"
                )
            if skipped > DEGENERACY_LIMIT:
                print(f"error: {skipped} frames skipped for numerical degeneracy", file=sys.stderr)
                return 3
            return 0

        if args.command == "exit":
            snr_spec = args.snr or cfg.get("exit", {}).get("snr_db")
            if snr_spec is None:
                raise ConfigError("no SNR: pass --snr or set [exit] snr_db")
            snr_db = float(snr_spec)
            pre_spec = args.precoders
            if pre_spec is None:
                pre_spec = cfg.get("exit", {}).get("precoders", "")
            precoders = [p.strip() for p in pre_spec.split(";") if p.strip()]
            t0 = time.perf_counter()
            inner_curves, outer, verdicts = run_exit(
                cfg, snr_db, precoders, master_seed, args.workers
            )
            files = write_exit_outputs(args.out, inner_curves, outer, verdicts)
            write_manifest(
                args.out,
                "exit",
                cfg,
                {
                    "master_seed": master_seed,
                    "snr_db": snr_db,
                    "precoders": precoders,
                    "verdicts": verdicts,
                    "files": files,
                    "wall_seconds": time.perf_counter() - t0,
                },
            )
            for v in verdicts:
                state = "open" if v["open"] else f"pinched at I_A={v['pinch_i_a']:.2f}"
                print(f"precoder {v['label']:12s} tunnel {state}")
            if not precoders:
                print("tunnel verdict: n/a (no precoder candidates)")
            return 0

        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
