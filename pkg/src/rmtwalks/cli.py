"""Experiment driver: ``rmtwalks run <config.json> [--out DIR] [--seed N] [--threads K]``.

A config is one JSON object with an ``experiment`` name and a ``process``
payload (the fields of :class:`ProcessConfig`).  Trials run on a thread pool
and are reduced in trial-index order, so outputs are byte-identical for a
given config and seed regardless of the thread count.

Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 capacity error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import clocks, combinat, empirics, spectra
from .ensemble import ProcessConfig, build_process
from .errors import CapacityError, NumericError, RmtWalksError, ValidationError
from .figures import figure_esd
from .patterns import LinkKind
from .specfn import (NoClosedFormError, check_alpha, inverse_subordinator_moment,
                     mittag_leffler_3p, reference_law_for, reference_pdf)
from .walks import ROLE_CLOCK, random_stream

EXPERIMENTS = ("esd", "moments", "word-limits", "process", "clocks", "star-moments")
PROCESS_FIELDS = ("kind", "n", "grid", "step_law", "alpha", "rho", "clock", "scaling",
                  "trials", "seed", "lam")


def parse_process(payload: dict, seed=None) -> ProcessConfig:
    if not isinstance(payload, dict):
        raise ValidationError("'process' must be an object", field="process")
    unknown = set(payload) - set(PROCESS_FIELDS)
    if unknown:
        raise ValidationError(f"unknown process field(s): {sorted(unknown)}", field=sorted(unknown)[0])
    for key in ("kind", "n"):
        if key not in payload:
            raise ValidationError(f"process.{key} is required", field=key)
    kw = dict(payload)
    if seed is not None:
        kw["seed"] = seed
    try:
        return ProcessConfig(**kw)
    except RmtWalksError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed process field: {exc}", field="process") from exc


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}", field="config") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}", field="config") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object", field="config")
    if cfg.get("experiment") not in EXPERIMENTS:
        raise ValidationError(f"experiment must be one of {EXPERIMENTS}", field="experiment")
    return cfg


def map_trials(fn, trials: int, threads: int) -> list:
    """Run ``fn(trial)`` for every trial; results come back in trial order."""
    if threads <= 1:
        return [fn(k) for k in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _num(x) -> str:
    return "" if x is None else repr(float(x))


class Runner:
    def __init__(self, cfg: dict, out: Path, seed=None, threads: int = 1):
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.threads = max(1, int(threads))
        self.files: list[Path] = []

    def process(self, **override) -> ProcessConfig:
        payload = dict(self.cfg.get("process") or {})
        payload.update(override)
        return parse_process(payload, self.seed)

    def emit(self, name: str) -> Path:
        path = self.out / name
        self.files.append(path)
        return path

    def validate(self):
        """Check every field an experiment needs before any sampling starts."""
        exp = self.cfg["experiment"]
        if exp in ("esd", "moments", "process", "star-moments"):
            base = self.process()
        if exp == "esd":
            if not base.kind.symmetric:
                raise ValidationError("esd experiments need a symmetric link kind", field="kind")
            for a in self.cfg.get("alphas", [base.alpha]):
                self._esd_config(base, a)
        elif exp == "moments":
            orders = self.cfg.get("orders", [2, 4])
            if not orders or any(int(l) != l or l < 1 for l in orders):
                raise ValidationError("orders must be positive integers", field="orders")
        elif exp == "word-limits":
            m = self.cfg.get("m", 2)
            if int(m) != m or not 1 <= m <= 3:
                raise ValidationError("m must lie in 1..3", field="m")
            for k in self.cfg.get("kinds", ["Wigner"]):
                LinkKind.parse(k)
        elif exp == "process":
            if base.kind not in (LinkKind.SYMMETRIC_CIRCULANT, LinkKind.CIRCULANT):
                raise ValidationError("process experiments need SymmetricCirculant or Circulant",
                                      field="kind")
            if int(self.cfg.get("paths", 1000)) < 2:
                raise ValidationError("paths must be at least 2", field="paths")
            for s, t in self.cfg.get("pairs", []):
                if s not in base.grid.points or t not in base.grid.points:
                    raise ValidationError(f"pair ({s}, {t}) is not on the grid", field="pairs")
        elif exp == "star-moments":
            if base.kind not in (LinkKind.CIRCULANT, LinkKind.ELLIPTIC_IID):
                raise ValidationError("star-moments need Circulant or EllipticIID", field="kind")
            if base.trials < 2:
                raise ValidationError("star-moments need at least 2 trials", field="trials")
        elif exp == "clocks":
            self._clock_params()
            if int(self.cfg.get("paths", 10000)) < 2:
                raise ValidationError("paths must be at least 2", field="paths")

    def _esd_config(self, base: ProcessConfig, alpha: float) -> ProcessConfig:
        # an alpha series shares one clock type so that all members use the same scaling
        clock = base.clock
        if min(self.cfg.get("alphas", [alpha])) < 1.0 and clock == "deterministic":
            clock = "fpp_shared"
        scaling = "stopped" if clock != "deterministic" else base.scaling
        return base.with_(alpha=float(alpha), clock=clock, scaling=scaling)

    # experiments

    def run_esd(self):
        base = self.process()
        t = float(self.cfg.get("t", base.grid[-1]))
        series, summary = [], []
        for a in self.cfg.get("alphas", [base.alpha]):
            config = self._esd_config(base, a)
            spectra_list = map_trials(
                lambda k: spectra.spectrum(build_process(config, trial=k).at(t)),
                config.trials, self.threads)
            pooled = np.sort(np.concatenate([s.eigenvalues for s in spectra_list]))
            label = f"alpha={config.alpha:g}"
            series.append((label, pooled))
            _write_csv(self.emit(f"esd_alpha{config.alpha:g}.csv"), ["index", "eigenvalue"],
                       ([k, repr(float(v))] for k, v in enumerate(pooled)))
            heights, edges = spectra.fd_histogram(pooled)
            _write_csv(self.emit(f"hist_alpha{config.alpha:g}.csv"),
                       ["bin_left", "bin_right", "density"],
                       ([repr(float(a0)), repr(float(b0)), repr(float(h))]
                        for a0, b0, h in zip(edges[:-1], edges[1:], heights)))
            ks = ""
            if config.alpha == 1.0:
                try:
                    law = reference_law_for(config.kind)
                    ks = repr(float(np.mean([spectra.ks_distance(s, (law, t)) for s in spectra_list])))
                except NoClosedFormError:
                    pass
            summary.append([config.alpha, config.trials, repr(float(np.max(np.abs(pooled)))), ks])
        _write_csv(self.emit("esd_summary.csv"), ["alpha", "trials", "width", "mean_ks"], summary)
        density = None
        try:
            law = reference_law_for(base.kind)
            density = lambda x: reference_pdf(law, t, x)  # noqa: E731
        except NoClosedFormError:
            pass
        self.emit("esd.svg").write_text(
            figure_esd(series, density, title=f"{base.kind.value}, n={base.n}, t={t:g}"))

    def run_moments(self):
        config = self.process()
        orders = [int(l) for l in self.cfg.get("orders", [2, 4])]
        t = float(self.cfg.get("t", config.grid[-1]))
        samples = map_trials(
            lambda k: [spectra.spectrum(build_process(config, trial=k).at(t)).moment(l)
                       for l in orders],
            config.trials, self.threads)
        samples = np.real(np.asarray(samples))
        est = [spectra.MomentEstimate.from_samples(l, samples[:, j], time=t, alpha=config.alpha,
                                                   theory=spectra.theory_moment(config, l, t))
               for j, l in enumerate(orders)]
        spectra.write_moments_csv(self.emit("moments.csv"), est)

    def run_word_limits(self):
        m = int(self.cfg.get("m", 2))
        t = float(self.cfg.get("t", 1.0))
        samples = tuple(self.cfg.get("samples", (8, 16, 24)))
        rows = []
        for k in self.cfg.get("kinds", ["Wigner"]):
            res = combinat.limit_moment_combinatorial(LinkKind.parse(k), m, t, samples)
            for word, ratios in res.ratios.items():
                ext = combinat.extrapolate(samples[-2], ratios[-2], samples[-1], ratios[-1])
                for n, r in zip(samples, ratios):
                    rows.append([res.kind, word, n, round(r * n ** (1 + m)), repr(r), repr(ext)])
        _write_csv(self.emit("words.csv"),
                   ["kind", "word", "n", "count", "ratio", "extrapolated"], rows)

    def run_process(self):
        config = self.process()
        paths = int(self.cfg.get("paths", 1000))
        pairs = [tuple(p) for p in self.cfg.get("pairs", [])]
        if config.kind is LinkKind.CIRCULANT:
            sample = empirics.sample_Z(config, paths)
        elif config.clock == "fpp_shared":
            sample = empirics.sample_Y_alpha(config, paths)
        else:
            sample = empirics.sample_Y(config, paths)
        keep = int(self.cfg.get("paths_out", min(paths, 100)))
        head = empirics.PathSample(sample.grid, sample.values[:keep], sample.index[:keep])
        empirics.write_paths_csv(self.emit("paths.csv"), head)
        stats = empirics.fdd_stats(sample, pairs)
        theory = {}
        for s, t in pairs:
            lo = min(s, t)
            cov = inverse_subordinator_moment(1, lo, config.alpha) if lo > 0 else 0.0
            theory[(s, t, "cov")] = cov
            if config.kind is LinkKind.CIRCULANT:
                theory[(s, t, "re_im")] = 0.0
            elif config.alpha == 1.0:
                hi = max(s, t)
                theory[(s, t, "m22")] = lo * hi + 2 * lo * lo
        empirics.write_fdd_csv(self.emit("fdd.csv"), stats, theory)

    def _clock_params(self):
        payload = self.cfg.get("process") or {}
        alpha = check_alpha(float(payload.get("alpha", 1.0)))
        lam = float(payload.get("lam", 1.0))
        if lam <= 0:
            raise ValidationError("lambda must be positive", field="lam")
        t = float(self.cfg.get("t", 1.0))
        if t <= 0:
            raise ValidationError("t must be positive", field="t")
        return alpha, lam, t

    def run_clocks(self):
        alpha, lam, t = self._clock_params()
        paths = int(self.cfg.get("paths", 10000))
        rng = random_stream(self._seed(), 0, ROLE_CLOCK)
        ell = clocks.inverse_values(alpha, [t], rng, size=paths).values[:, 0]
        fpp = clocks.sample_fpp(alpha, lam, [t], rng, size=paths).counts[:, 0]
        rows = []
        for l in (1, 2, 3):
            vals = ell ** l
            rows.append([f"E L^{l}", repr(float(vals.mean())),
                         repr(float(vals.std(ddof=1) / math.sqrt(paths))),
                         repr(inverse_subordinator_moment(l, t, alpha))])
        p0 = float(np.mean(fpp == 0))
        rows.append(["P(N=0)", repr(p0), repr(math.sqrt(p0 * (1 - p0) / paths)),
                     repr(mittag_leffler_3p(alpha, 1.0, 1.0, -lam * t ** alpha))])
        for k in range(1, 6):
            pk = float(np.mean(fpp == k))
            rows.append([f"P(N={k})", repr(pk), repr(math.sqrt(pk * (1 - pk) / paths)),
                         repr(clocks.fpp_pmf(alpha, lam, t, k))])
        _write_csv(self.emit("clocks.csv"), ["statistic", "estimate", "stderr", "theory"], rows)

    def run_star_moments(self):
        config = self.process()
        t = float(self.cfg.get("t", config.grid[-1]))

        def one(k):
            c = build_process(config, trial=k).at(t)
            return [spectra.trace_of_monomial([c, c], [False, True]),
                    spectra.trace_of_monomial([c, c]),
                    spectra.trace_of_monomial([c, c, c, c], [False, True, False, True])]

        vals = np.asarray(map_trials(one, config.trials, self.threads), dtype=complex)
        names = ["C C^T", "C C", "(C C^T)^2"]
        if config.kind is LinkKind.CIRCULANT:
            theory = [t, 0.0, 2 * t * t]
        else:
            rho = 0.0 if config.rho is None else config.rho
            theory = [t, rho * t, 2 * t * t]
        rows = []
        for j, name in enumerate(names):
            col = vals[:, j].real
            rows.append([name, repr(float(col.mean())),
                         repr(float(col.std(ddof=1) / math.sqrt(col.size))), _num(theory[j])])
        _write_csv(self.emit("star.csv"), ["monomial", "estimate", "stderr", "theory"], rows)

    def run(self) -> dict:
        self.validate()
        self.out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        getattr(self, "run_" + self.cfg["experiment"].replace("-", "_"))()
        elapsed = int(round(1000 * (time.perf_counter() - start)))
        outputs = [{"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}
                   for p in self.files]
        content = hashlib.sha256("".join(f"{o['file']}:{o['sha256']}\n" for o in outputs)
                                 .encode()).hexdigest()
        manifest = {"config": self.cfg, "seed": self._seed(), "outputs": outputs,
                    "elapsed_ms": elapsed, "content_hash": content}
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest

    def _seed(self):
        if self.seed is not None:
            return self.seed
        return (self.cfg.get("process") or {}).get("seed", 0)


def run(config_path, out=None, seed=None, threads=None) -> dict:
    cfg = load_config(config_path)
    out = Path(out or cfg.get("output") or "rmtwalks-out")
    if threads is None:
        threads = int(os.environ.get("RMTWALKS_THREADS", "1"))
    return Runner(cfg, out, seed, threads).run()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rmtwalks", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        manifest = run(args.config, args.out, args.seed, args.threads)
    except ValidationError as exc:
        field = f" [{exc.field}]" if exc.field else ""
        print(f"validation error{field}: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except RmtWalksError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"content_hash": manifest["content_hash"],
                      "outputs": [o["file"] for o in manifest["outputs"]]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
