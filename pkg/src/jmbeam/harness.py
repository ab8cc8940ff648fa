"""Experiment driver: deterministic seeding, sweep/convergence protocols,
and CSV/JSON outputs.

Noise power is fixed at one, so SNR in dB maps to the power budget as
p_t = 10**(snr_db/10). Each (alpha, snr, channel) cell owns an RNG
substream derived from the master seed; the scheme is deliberately not
part of the key, so all schemes see identical channel draws and Monte
Carlo samples (paired comparison). The true channel is only ever used
for evaluation, never inside an optimizer.
"""

import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .ao import INIT_SCHEMES, AoParams, run_ao
from .baselines import jmb_zf_svd_wf, zf_wf
from .channel import (
    CsitConfig,
    MonteCarloSample,
    complex_gaussian,
    draw_sample,
    error_variance,
    make_draw,
    substream,
)
from .errors import ConfigError, JmbeamError
from .receivers import sum_rate

__all__ = [
    "SCHEMES",
    "SIGMA_N2",
    "ExperimentConfig",
    "EsrRecord",
    "cell_seed",
    "run_single",
    "run_sweep",
    "run_convergence",
    "write_esr_csv",
    "write_detail_csv",
]

SCHEMES = ("JMB-AWSMSE", "BC-AWSMSE", "JMB-ZF-SVD", "ZF-WF")

SIGMA_N2 = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description, loadable from a single JSON object.

    Unknown keys are rejected rather than ignored; a silently dropped
    typo ("n_channel") would corrupt a long sweep.
    """

    n_t: int = 2
    k: int = 2
    alphas: tuple = (0.6,)
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    m: int = 200
    n_channels: int = 20
    schemes: tuple = SCHEMES
    init_scheme: str = "zf-svd"
    epsilon_r: float = 1e-3
    n_max: int = 200
    solver_tol: float = 1e-8
    solver_max_iter: int = 100
    master_seed: int = 12345
    threads: int = 1
    cap_sigma_e2: bool = True

    def __post_init__(self):
        def bad(msg):
            raise ConfigError(msg)

        for name in ("n_t", "k", "m", "n_channels", "n_max", "solver_max_iter",
                     "threads"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                bad(f"{name} must be a positive integer, got {v!r}")
        if self.k > self.n_t:
            bad(f"k={self.k} exceeds n_t={self.n_t}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            bad(f"master_seed must be a nonnegative integer")
        if len(self.alphas) == 0 or any(
            not (isinstance(a, (int, float)) and 0.0 <= a <= 1.0) for a in self.alphas
        ):
            bad(f"alphas must be a nonempty list of values in [0, 1]")
        if len(self.snr_db) == 0 or any(
            not (isinstance(s, (int, float)) and math.isfinite(s)) for s in self.snr_db
        ):
            bad(f"snr_db must be a nonempty list of finite values")
        if len(self.schemes) == 0:
            bad("schemes must be nonempty")
        for s in self.schemes:
            if s not in SCHEMES:
                bad(f"unknown scheme {s!r}; valid: {', '.join(SCHEMES)}")
        if self.init_scheme not in INIT_SCHEMES:
            bad(f"unknown init_scheme {self.init_scheme!r}")
        if not (isinstance(self.epsilon_r, float) and self.epsilon_r > 0):
            bad(f"epsilon_r must be a positive float")
        if not (isinstance(self.solver_tol, float) and self.solver_tol > 0):
            bad(f"solver_tol must be a positive float")
        if not isinstance(self.cap_sigma_e2, bool):
            bad("cap_sigma_e2 must be a boolean")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kw = dict(d)
        for name in ("alphas", "snr_db", "schemes"):
            if name in kw:
                if not isinstance(kw[name], (list, tuple)):
                    raise ConfigError(f"{name} must be a list")
                kw[name] = tuple(kw[name])
        for name in ("epsilon_r", "solver_tol"):
            if name in kw and isinstance(kw[name], int) and not isinstance(kw[name], bool):
                kw[name] = float(kw[name])
        if "alphas" in kw:
            kw["alphas"] = tuple(float(a) for a in kw["alphas"])
        if "snr_db" in kw:
            kw["snr_db"] = tuple(float(s) for s in kw["snr_db"])
        return cls(**kw)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as f:
                doc = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}")
        return cls.from_dict(doc)

    def paper_scale(self):
        """Full-size protocol: M=1000 conditional draws, 100 channels."""
        return replace(self, m=1000, n_channels=100)

    def to_dict(self):
        d = asdict(self)
        for name in ("alphas", "snr_db", "schemes"):
            d[name] = list(d[name])
        return d

    def ao_params(self, init_scheme=None):
        return AoParams(
            epsilon_r=self.epsilon_r,
            n_max=self.n_max,
            solver_tol=self.solver_tol,
            solver_max_iter=self.solver_max_iter,
            init_scheme=init_scheme or self.init_scheme,
        )


@dataclass(frozen=True)
class EsrRecord:
    """One sweep cell: ergodic sum rate and its standard error over the
    channels that completed (std_err = sample std / sqrt(n))."""

    scheme: str
    alpha: float
    snr_db: float
    esr: float
    std_err: float
    n_channels: int
    m: int
    seed: int
    wall_time: float = 0.0


def cell_seed(master_seed, alpha, snr_db, channel):
    """Derived seed for one (alpha, snr, channel) cell.

    Keys on the parameter values (alpha at 1e-6 resolution, snr at 0.01
    dB) rather than grid positions, so refining a grid never reshuffles
    existing cells. The leading 2 in the spawn key keeps these streams
    disjoint from the purpose streams 0 and 1 used under the same seed.
    """
    a = int(round(float(alpha) * 1_000_000))
    s = int(round((float(snr_db) + 1000.0) * 100))
    ch = int(channel)
    if a < 0 or s < 0 or ch < 0:
        raise ValueError("cell key components must be nonnegative")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(2, a, s, ch))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def snr_to_pt(snr_db):
    return 10.0 ** (float(snr_db) / 10.0) * SIGMA_N2


def run_single(cfg, scheme, snr_db, alpha, seed):
    """Draw one channel, optimize under partial CSI, evaluate on truth.

    Returns (precoder, sum_rate_on_true_channel, trace_or_None). The
    trace is only produced by the alternating-optimization schemes.
    """
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    p_t = snr_to_pt(snr_db)
    csit = CsitConfig(
        n_t=cfg.n_t,
        k=cfg.k,
        alpha=float(alpha),
        p_t=p_t,
        sigma_n2=SIGMA_N2,
        cap_sigma_e2=cfg.cap_sigma_e2,
    )
    draw = make_draw(substream(seed, 0), csit)
    sample = draw_sample(substream(seed, 1), draw.h_est, draw.sigma_e2, cfg.m)

    trace = None
    if scheme == "JMB-AWSMSE":
        p, trace = run_ao(draw.h_est, sample, csit, cfg.ao_params(), common=True)
    elif scheme == "BC-AWSMSE":
        p, trace = run_ao(draw.h_est, sample, csit, cfg.ao_params(), common=False)
    elif scheme == "JMB-ZF-SVD":
        p = jmb_zf_svd_wf(draw.h_est, p_t, float(alpha), SIGMA_N2)
    else:
        p = zf_wf(draw.h_est, p_t, SIGMA_N2)

    sr = sum_rate(draw.h_true, p, SIGMA_N2)
    return p, float(sr), trace


def _channel_task(cfg, alpha, snr_db, channel):
    """All schemes on one paired channel draw; failures stay local."""
    seed = cell_seed(cfg.master_seed, alpha, snr_db, channel)
    t0 = time.perf_counter()
    out = []
    for scheme in cfg.schemes:
        try:
            _, sr, _ = run_single(cfg, scheme, snr_db, alpha, seed)
            out.append((scheme, sr, ""))
        except JmbeamError as e:
            out.append((scheme, math.nan, f"{type(e).__name__}: {e}"))
    return out, time.perf_counter() - t0


def _task_star(args):
    return _channel_task(*args)


def _reduce(cfg, tasks, results):
    """Ordered aggregation of completed channel tasks into records."""
    srs = {}
    durs = {}
    failures = []
    details = []
    for (alpha, snr_db, channel), (outcomes, dur) in zip(tasks, results):
        durs[(alpha, snr_db)] = durs.get((alpha, snr_db), 0.0) + dur
        for scheme, sr, err in outcomes:
            if err:
                failures.append(
                    {"scheme": scheme, "alpha": alpha, "snr_db": snr_db,
                     "channel": channel, "error": err}
                )
            else:
                srs.setdefault((scheme, alpha, snr_db), []).append(sr)
                details.append((scheme, float(alpha), float(snr_db), channel, sr))

    records = []
    for scheme in cfg.schemes:
        for alpha in cfg.alphas:
            for snr_db in cfg.snr_db:
                vals = srs.get((scheme, alpha, snr_db), [])
                n = len(vals)
                if n == 0:
                    continue
                arr = np.asarray(vals)
                esr = float(arr.mean())
                se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
                records.append(
                    EsrRecord(
                        scheme=scheme,
                        alpha=float(alpha),
                        snr_db=float(snr_db),
                        esr=esr,
                        std_err=se,
                        n_channels=n,
                        m=cfg.m,
                        seed=cfg.master_seed,
                        wall_time=durs.get((alpha, snr_db), 0.0),
                    )
                )
    return records, failures, details


def write_esr_csv(path, records):
    """Fixed-column CSV; floats via repr for lossless round-trip."""
    with open(path, "w") as f:
        f.write("scheme,alpha,snr_db,esr,std_err,n_channels,m,seed\n")
        for r in records:
            f.write(
                f"{r.scheme},{r.alpha!r},{r.snr_db!r},{r.esr!r},"
                f"{r.std_err!r},{r.n_channels},{r.m},{r.seed}\n"
            )


def _write_meta(path, cfg, extra):
    from importlib.metadata import PackageNotFoundError, version

    try:
        pkg_version = version("jmbeam")
    except PackageNotFoundError:
        pkg_version = "unknown"
    meta = {
        "config": cfg.to_dict(),
        "sigma_n2": SIGMA_N2,
        "error_model": "variance p_t**-alpha, capped at 1"
        if cfg.cap_sigma_e2
        else "variance p_t**-alpha, uncapped",
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "jmbeam": pkg_version,
        },
    }
    meta.update(extra)
    with open(path, "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def write_detail_csv(path, details):
    """Per-channel sum rates: one row per (scheme, cell, channel).

    Schemes share channels within a cell, so paired comparisons (e.g.
    the standard error of a per-channel scheme difference) can be read
    straight off this file.
    """
    with open(path, "w") as f:
        f.write("scheme,alpha,snr_db,channel,sr\n")
        for scheme, alpha, snr_db, ch, sr in details:
            f.write(f"{scheme},{alpha!r},{snr_db!r},{ch},{sr!r}\n")


def run_sweep(cfg, out_dir=None):
    """Evaluate every scheme on the (alpha, snr) grid over paired channels.

    Writes esr.csv, sr_detail.csv and meta.json into out_dir when given.
    On interrupt, whatever channel tasks already completed are reduced
    and flushed before the interrupt propagates.
    """
    tasks = [
        (alpha, snr_db, ch)
        for alpha in cfg.alphas
        for snr_db in cfg.snr_db
        for ch in range(cfg.n_channels)
    ]
    results = []
    interrupted = False
    t0 = time.perf_counter()
    try:
        if cfg.threads <= 1:
            for t in tasks:
                results.append(_channel_task(cfg, *t))
        else:
            with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
                for r in ex.map(_task_star, [(cfg,) + t for t in tasks]):
                    results.append(r)
    except KeyboardInterrupt:
        interrupted = True
    wall = time.perf_counter() - t0

    records, failures, details = _reduce(cfg, tasks, results)
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        write_esr_csv(os.path.join(out_dir, "esr.csv"), records)
        write_detail_csv(os.path.join(out_dir, "sr_detail.csv"), details)
        _write_meta(
            os.path.join(out_dir, "meta.json"),
            cfg,
            {
                "kind": "sweep",
                "wall_time_s": wall,
                "interrupted": interrupted,
                "failures": failures,
                "tasks_completed": len(results),
                "tasks_total": len(tasks),
            },
        )
    if interrupted:
        raise KeyboardInterrupt
    return records


def _fmt_snr(snr_db):
    return "%g" % float(snr_db)


def run_convergence(cfg, snrs=None, inits=None, out_dir=None):
    """Optimization traces on one fixed channel across SNRs and starts.

    The true channel and the raw (unit-variance) error draws are fixed
    once; per SNR only the error scale changes, so every trace sees the
    same underlying randomness. Returns {(snr_db, init): AoTrace} and
    writes one trace_<snr>_<init>.csv per pair when out_dir is given.
    """
    snrs = list(cfg.snr_db) if snrs is None else [float(s) for s in snrs]
    inits = list(INIT_SCHEMES) if inits is None else list(inits)
    alpha = float(cfg.alphas[0])

    rng_h = substream(cfg.master_seed, 0)
    h_raw = complex_gaussian(rng_h, (cfg.n_t, cfg.k), 1.0)
    e_raw = complex_gaussian(rng_h, (cfg.n_t, cfg.k), 1.0)
    rng_s = substream(cfg.master_seed, 1)
    w_raw = complex_gaussian(rng_s, (cfg.m, cfg.n_t, cfg.k), 1.0)

    t0 = time.perf_counter()
    traces = {}
    for snr_db in snrs:
        p_t = snr_to_pt(snr_db)
        sig_e2 = error_variance(p_t, alpha, cap=cfg.cap_sigma_e2)
        scale = math.sqrt(sig_e2)
        h_err = scale * e_raw
        h_est = h_raw - h_err
        sample = MonteCarloSample(realizations=h_est[None, :, :] + scale * w_raw)
        csit = CsitConfig(
            n_t=cfg.n_t, k=cfg.k, alpha=alpha, p_t=p_t,
            sigma_n2=SIGMA_N2, cap_sigma_e2=cfg.cap_sigma_e2,
        )
        for init in inits:
            _, trace = run_ao(h_est, sample, csit, cfg.ao_params(init), common=True)
            traces[(snr_db, init)] = trace

    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        for (snr_db, init), trace in traces.items():
            trace.to_csv(os.path.join(out_dir, f"trace_{_fmt_snr(snr_db)}_{init}.csv"))
        _write_meta(
            os.path.join(out_dir, "meta.json"),
            cfg,
            {
                "kind": "convergence",
                "snrs": snrs,
                "inits": inits,
                "alpha": alpha,
                "wall_time_s": time.perf_counter() - t0,
            },
        )
    return traces
