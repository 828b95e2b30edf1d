"""Config-driven experiment runners that write tidy, reproducible CSV files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import stats

from . import fhrr, graph, nn
from . import oscillator as osc
from .backends import OscillatorBackend, PhaseBackend
from .errors import ConfigError
from .resonator import FactorProblem, resonator_factor

EXPERIMENTS = ("op-error", "graph", "resonator", "nn")
OPS = ("similarity", "bundle", "bind", "unbind")


@dataclass
class OscOptions:
    b: float = -0.2
    omega: float = 2 * np.pi
    cycles: int = 10
    drive: float = 1.0
    mode: str = "reencode"


@dataclass
class OpErrorConfig:
    experiment: str = "op-error"
    op: str = "similarity"
    grid: int = 32
    periods: int = 10
    hist_bins: int = 41
    seeds: Any = 1
    backend: str = "both"
    osc: OscOptions = field(default_factory=OscOptions)
    tolerances: dict = field(default_factory=lambda: {"mean_abs_error": 0.01, "sign_test_p": 0.01, "zero_tol": 1e-9})
    out: str | None = None


@dataclass
class GraphConfig:
    experiment: str = "graph"
    dim: int = 1024
    n_nodes: int = 25
    p_list: list = field(default_factory=lambda: [0.02, 0.05, 0.1, 0.2, 0.4])
    seeds: Any = 20
    backend: str = "both"
    osc: OscOptions = field(default_factory=OscOptions)
    tolerances: dict = field(default_factory=lambda: {"auroc_lowest_p_min": 0.9, "u_test_alpha": 0.05})
    out: str | None = None


@dataclass
class ResonatorConfig:
    experiment: str = "resonator"
    dim: int = 1024
    F: int = 3
    K: int = 20
    trials: int = 256
    max_iter: int = 20
    early_exit: bool = False
    readout: str = "abs"
    seeds: Any = 1
    backend: str = "both"
    osc: OscOptions = field(default_factory=OscOptions)
    tolerances: dict = field(
        default_factory=lambda: {
            "phase_accuracy_min": 0.95,
            "backend_gap_max": 0.03,
            "reconstruction_min": 0.8,
            "non_factor_max": 0.2,
        }
    )
    out: str | None = None


@dataclass
class NNConfig:
    experiment: str = "nn"
    dim: int = 8
    n_classes: int = 3
    n_train: int = 600
    n_test: int = 300
    sigma: float = 0.5
    hidden: int = 64
    lr: float = 0.05
    epochs: int = 200
    seeds: Any = 10
    backend: str = "both"
    osc: OscOptions = field(default_factory=OscOptions)
    tolerances: dict = field(
        default_factory=lambda: {
            "train_accuracy_min": 0.9,
            "test_accuracy_min": 0.85,
            "seed_fraction_min": 0.9,
            "agreement_min": 0.95,
        }
    )
    out: str | None = None


CONFIG_TYPES = {
    "op-error": OpErrorConfig,
    "graph": GraphConfig,
    "resonator": ResonatorConfig,
    "nn": NNConfig,
}


# --- config handling --------------------------------------------------------


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key == "osc":
            value = _build(OscOptions, value, f"{where}.osc")
        elif key == "tolerances":
            if not isinstance(value, dict):
                raise ConfigError(f"{where}.tolerances: expected an object")
            default = names[key].default_factory()
            extra = sorted(set(value) - set(default))
            if extra:
                raise ConfigError(f"{where}.tolerances: unknown key(s) {extra}")
            value = {**default, **value}
        kwargs[key] = value
    return cls(**kwargs)


def load_config(data: dict | str | Path, experiment: str | None = None):
    if isinstance(data, (str, Path)):
        try:
            data = json.loads(Path(data).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    data = dict(data)
    name = data.setdefault("experiment", experiment)
    if experiment is not None and name != experiment:
        raise ConfigError(f"config is for {name!r}, not {experiment!r}")
    if name not in CONFIG_TYPES:
        raise ConfigError(f"unknown experiment {name!r}")
    cfg = _build(CONFIG_TYPES[name], data, name)
    validate(cfg)
    return cfg


def validate(cfg) -> None:
    if cfg.backend not in ("phase", "osc", "both"):
        raise ConfigError(f"backend must be phase, osc or both, not {cfg.backend!r}")
    seed_list(cfg)
    o = cfg.osc
    if o.mode not in ("reencode", "chained"):
        raise ConfigError(f"osc.mode must be reencode or chained, not {o.mode!r}")
    if o.cycles < 1:
        raise ConfigError("osc.cycles must be >= 1")
    try:
        osc.OscillatorParams.with_periods(o.cycles, o.b, o.omega)
    except ValueError as exc:
        raise ConfigError(f"osc: {exc}") from exc
    if isinstance(cfg, OpErrorConfig):
        if cfg.op not in OPS:
            raise ConfigError(f"op must be one of {OPS}, not {cfg.op!r}")
        if cfg.grid < 8:
            raise ConfigError("grid resolution must be >= 8")
        if cfg.periods < 1:
            raise ConfigError("periods must be >= 1")
    elif isinstance(cfg, GraphConfig):
        if not cfg.p_list:
            raise ConfigError("p_list must not be empty")
        for p in cfg.p_list:
            if not 0 < p <= 1:
                raise ConfigError(f"edge probability {p} must lie in (0, 1]")
        if cfg.n_nodes < 2 or cfg.dim < 64:
            raise ConfigError("need n_nodes >= 2 and dim >= 64")
    elif isinstance(cfg, ResonatorConfig):
        if cfg.F < 2 or cfg.K < 1 or cfg.trials < 1 or cfg.max_iter < 1:
            raise ConfigError("need F >= 2, K >= 1, trials >= 1, max_iter >= 1")
        if cfg.readout not in ("abs", "signed"):
            raise ConfigError("readout must be abs or signed")
    elif isinstance(cfg, NNConfig):
        if cfg.n_classes < 2 or cfg.hidden < 1 or cfg.epochs < 0 or cfg.lr < 0:
            raise ConfigError("invalid network/training sizes")


def seed_list(cfg) -> list[int]:
    seeds = cfg.seeds
    if isinstance(seeds, bool):
        raise ConfigError("seeds must be an int count or a list of ints")
    if isinstance(seeds, int):
        if seeds < 1:
            raise ConfigError("seed count must be >= 1")
        return list(range(seeds))
    if isinstance(seeds, list) and seeds and all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        return list(seeds)
    raise ConfigError("seeds must be an int count or a non-empty list of ints")


def config_hash(cfg) -> str:
    blob = json.dumps(dataclasses.asdict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def backends_for(cfg) -> list:
    o = cfg.osc
    params = osc.OscillatorParams.with_periods(o.cycles, o.b, o.omega)
    make = {
        "phase": PhaseBackend,
        "osc": lambda: OscillatorBackend(params, o.cycles, o.mode, o.drive),
    }
    names = ["phase", "osc"] if cfg.backend == "both" else [cfg.backend]
    return [make[n]() for n in names]


# --- output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(cfg, header: list[str], rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# config_sha256={config_hash(cfg)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


@dataclass
class RunResult:
    files: dict  # name -> csv text
    checks: list  # (name, passed, detail)
    blobs: dict = field(default_factory=dict)  # name -> bytes

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def write(self, out: str | Path) -> list[Path]:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            path = out if name == "main" else out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}")
            path.write_text(text)
            written.append(path)
        for name, data in self.blobs.items():
            path = out.with_name(f"{out.stem}_{name}")
            path.write_bytes(data)
            written.append(path)
        return written


def _map(fn, jobs):
    workers = max(1, int(os.environ.get("HDOSC_THREADS", "1") or 1))
    if workers == 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# --- op-error -------------------------------------------------------------------


def _grid(resolution: int):
    g = np.arange(resolution) * (2 * np.pi / resolution)
    a, b = np.meshgrid(g, g, indexing="ij")
    return fhrr.wrap(a.ravel()), fhrr.wrap(b.ravel())


def op_errors(op: str, a, b, za, zb, zref) -> np.ndarray:
    """Oscillator-minus-phase error per grid element (similarity units or radians)."""
    if op == "similarity":
        u = np.abs(za / np.abs(za) + zb / np.abs(zb)) / 2
        return np.cos(2 * np.arccos(np.clip(u, 0, 1))) - np.cos(a - b)
    if op == "bundle":
        got = osc.decode_states((za + zb) / 2, zref)
        want = fhrr.from_complex(fhrr.to_complex(a) + fhrr.to_complex(b))
    elif op == "bind":
        got = osc.decode_states(osc.bind_states(za, zb, zref), zref)
        want = fhrr.bind(a, b)
    elif op == "unbind":
        got = osc.decode_states(osc.unbind_states(za, zb, zref), zref)
        want = fhrr.unbind(a, b)
    else:
        raise ConfigError(f"unknown op {op!r}")
    return fhrr.wrap(got - want)


def run_op_error(cfg: OpErrorConfig) -> RunResult:
    o = cfg.osc
    params = osc.OscillatorParams.with_periods(cfg.periods, o.b, o.omega)
    a, b = _grid(cfg.grid)
    if cfg.op == "bundle":
        # exact antiphase pairs have no bundle in the phase backend
        keep = np.abs(fhrr.to_complex(a) + fhrr.to_complex(b)) > 1e-9
        a, b = a[keep], b[keep]
    bank = osc.OscillatorBank.zeros(a.size, params)
    times = params.period * np.arange(1, cfg.periods + 1)
    za = osc.state_at(bank, osc.encode_spikes(a, params, cfg.periods, o.drive), times)
    zb = osc.state_at(bank, osc.encode_spikes(b, params, cfg.periods, o.drive), times)
    ref = osc.state_at(osc.OscillatorBank(np.ones(1), params), None, times)[:, 0]

    qs = [5, 25, 50, 75, 95]
    rows, final = [], None
    for k, t in enumerate(times):
        err = op_errors(cfg.op, a, b, za[k], zb[k], ref[k])
        rows.append([cfg.op, t, k + 1, np.mean(np.abs(err)), *np.percentile(err, qs), err.size])
        final = err
    main = csv_text(cfg, ["op", "t", "period", "mean_abs_error", *[f"q{q:02d}" for q in qs], "n"], rows)

    span = max(float(np.max(np.abs(final))), 1e-300)
    counts, edges = np.histogram(final, bins=cfg.hist_bins, range=(-span, span))
    hist = csv_text(cfg, ["bin_left", "bin_right", "count"], [[edges[i], edges[i + 1], c] for i, c in enumerate(counts)])

    means = [r[3] for r in rows]
    # errors at arg-reconstruction precision are ties, not signs
    nonzero = final[np.abs(final) > cfg.tolerances["zero_tol"]]
    pos = int(np.sum(nonzero > 0))
    sign_p = float(stats.binomtest(pos, nonzero.size, 0.5).pvalue) if nonzero.size else 1.0
    tol = cfg.tolerances
    slack = 1e-12 + 1e-9 * max(means)
    checks = [
        (f"{cfg.op}: final mean |error| {means[-1]:.3g} < {tol['mean_abs_error']}", means[-1] < tol["mean_abs_error"], means[-1]),
        (
            f"{cfg.op}: sign test p={sign_p:.3g} > {tol['sign_test_p']} (median {np.median(final):.3g})",
            sign_p > tol["sign_test_p"],
            sign_p,
        ),
        (
            f"{cfg.op}: mean |error| non-increasing after period 1",
            all(m2 <= m1 + slack for m1, m2 in zip(means[:-1], means[1:])),
            means,
        ),
    ]
    return RunResult({"main": main, "hist": hist}, checks)


# --- graph ------------------------------------------------------------------------


def _graph_job(job):
    cfg, p, seed = job
    g_rng, s_rng = fhrr.spawn([seed, int(round(p * 1_000_000))], 2)
    g = graph.gen_erdos_renyi(cfg.n_nodes, p, g_rng)
    redraws = 0
    while not g.edges or len(g.edges) == cfg.n_nodes * (cfg.n_nodes - 1) // 2:
        if p == 1.0:
            raise ConfigError("p=1 yields only complete graphs; AUROC undefined")
        redraws += 1
        g = graph.gen_erdos_renyi(cfg.n_nodes, p, g_rng)
    rows = []
    for be in backends_for(cfg):
        code = graph.compress_edges(g, cfg.dim, fhrr.spawn([seed, int(round(p * 1_000_000)), 1], 1)[0], be)
        score = graph.graph_auroc(g, graph.predict_edges(code, be))
        rows.append([seed, p, be.name, len(g.edges), redraws, score])
    return rows


def run_graph(cfg: GraphConfig) -> RunResult:
    jobs = [(cfg, p, s) for p in cfg.p_list for s in seed_list(cfg)]
    rows = [r for chunk in _map(_graph_job, jobs) for r in chunk]
    rows.sort(key=lambda r: (r[2], r[1], r[0]))
    main = csv_text(cfg, ["seed", "p", "backend", "n_edges", "redraws", "auroc"], rows)

    names = sorted({r[2] for r in rows}, key=["phase", "osc"].index)
    means = {n: [float(np.mean([r[5] for r in rows if r[2] == n and r[1] == p])) for p in cfg.p_list] for n in names}
    summary_rows, checks = [], []
    order = np.argsort(cfg.p_list)
    for n in names:
        seq = [means[n][i] for i in order]
        checks.append((f"graph[{n}]: mean AUROC non-increasing in p", all(y <= x + 1e-12 for x, y in zip(seq[:-1], seq[1:])), seq))
        low = seq[0]
        thr = cfg.tolerances["auroc_lowest_p_min"]
        checks.append((f"graph[{n}]: AUROC at lowest p {low:.4f} > {thr}", low > thr, low))
    if len(names) == 2:
        for p in [*cfg.p_list, "all"]:
            sel = [r for r in rows if p == "all" or r[1] == p]
            x = [r[5] for r in sel if r[2] == "phase"]
            y = [r[5] for r in sel if r[2] == "osc"]
            res = stats.mannwhitneyu(x, y, alternative="two-sided")
            summary_rows.append([p, np.mean(x), np.mean(y), float(res.statistic), float(res.pvalue)])
        pooled = summary_rows[-1]
        alpha = cfg.tolerances["u_test_alpha"]
        checks.append((f"graph: backend U-test p={pooled[4]:.3g} > {alpha} (U={pooled[3]:.0f})", pooled[4] > alpha, pooled[4]))
    files = {"main": main}
    if summary_rows:
        files["summary"] = csv_text(cfg, ["p", "mean_auroc_phase", "mean_auroc_osc", "U", "p_value"], summary_rows)
    return RunResult(files, checks)


# --- resonator --------------------------------------------------------------------


def _resonator_job(job):
    cfg, seed, trial = job
    problem = FactorProblem.random(cfg.F, cfg.K, cfg.dim, [seed, trial])
    out = []
    for be in backends_for(cfg):
        r = resonator_factor(
            problem.composite,
            problem.factor_sets,
            cfg.max_iter,
            be,
            truth=problem.truth,
            early_exit=cfg.early_exit,
            readout=cfg.readout,
        )
        out.append((seed, trial, be.name, r, problem.truth))
    return out


def _padded(trace, length):
    # an early-exited trial keeps its final values for the remaining iterations
    return list(trace) + [trace[-1]] * (length - len(trace))


def run_resonator(cfg: ResonatorConfig) -> RunResult:
    jobs = [(cfg, s, t) for s in seed_list(cfg) for t in range(cfg.trials)]
    results = [r for chunk in _map(_resonator_job, jobs) for r in chunk]
    names = [be.name for be in backends_for(cfg)]
    results.sort(key=lambda r: (names.index(r[2]), r[0], r[1]))
    rows = []
    for seed, trial, name, r, truth in results:
        rows.append([seed, trial, name, int(r.indices == list(truth)), r.iterations, " ".join(map(str, r.indices))])
    main = csv_text(cfg, ["seed", "trial", "backend", "correct", "iterations", "indices"], rows)

    trace_rows, acc, final = [], {}, {}
    for name in names:
        mine = [r for _, _, n, r, _ in results if n == name]
        rec = np.array([_padded(r.reconstruction, cfg.max_iter) for r in mine])
        fac = np.array([_padded(r.factor, cfg.max_iter) for r in mine])
        non = np.array([_padded(r.non_factor, cfg.max_iter) for r in mine])
        for i in range(cfg.max_iter):
            trace_rows.append([name, i + 1, rec[:, i].mean(), fac[:, i].mean(), non[:, i].mean()])
        acc[name] = float(np.mean([row[3] for row in rows if row[2] == name]))
        final[name] = (rec[:, -1].mean(), non[:, -1].mean())
    trace = csv_text(cfg, ["backend", "iteration", "reconstruction", "factor", "non_factor"], trace_rows)

    tol = cfg.tolerances
    checks = []
    if "phase" in acc:
        checks.append((f"resonator[phase]: accuracy {acc['phase']:.3f} >= {tol['phase_accuracy_min']}", acc["phase"] >= tol["phase_accuracy_min"], acc["phase"]))
    if len(acc) == 2:
        gap = abs(acc["osc"] - acc["phase"])
        checks.append((f"resonator: backend accuracy gap {gap:.3f} <= {tol['backend_gap_max']}", gap <= tol["backend_gap_max"], gap))
    for name, (rec, non) in final.items():
        checks.append((f"resonator[{name}]: final reconstruction similarity {rec:.3f} > {tol['reconstruction_min']}", rec > tol["reconstruction_min"], rec))
        checks.append((f"resonator[{name}]: final non-factor similarity {non:.3f} < {tol['non_factor_max']}", non < tol["non_factor_max"], non))
    return RunResult({"main": main, "trace": trace}, checks)


# --- nn ------------------------------------------------------------------------------


def _nn_job(job):
    cfg, seed = job
    data_rng, init_rng = fhrr.spawn(seed, 2)
    (xt, yt), (xs, ys) = nn.synthetic_task(cfg.n_train, cfg.n_test, cfg.dim, cfg.n_classes, cfg.sigma, data_rng)
    tc = nn.TrainConfig(hidden=cfg.hidden, lr=cfg.lr, epochs=cfg.epochs)
    res = nn.train(xt, yt, cfg.n_classes, tc, init_rng)
    evals = []
    ref_pred = nn.forward_classes(xs, res.w1, res.w2)
    for be in backends_for(cfg):
        pred = nn.forward_classes(xs, res.w1, res.w2, be)
        train_acc = float(np.mean(nn.forward_classes(xt, res.w1, res.w2, be) == yt))
        evals.append([seed, be.name, train_acc, float(np.mean(pred == ys)), float(np.mean(pred == ref_pred))])
    curve = [[seed, e, res.loss[e], res.accuracy[e]] for e in range(len(res.loss))]
    header = {"seed": seed, "hyperparams": dataclasses.asdict(tc), "dim": cfg.dim, "n_classes": cfg.n_classes}
    return seed, curve, evals, (res.w1, res.w2, header)


def run_nn(cfg: NNConfig) -> RunResult:
    out = sorted(_map(_nn_job, [(cfg, s) for s in seed_list(cfg)]), key=lambda r: r[0])
    curve = [row for _, c, _, _ in out for row in c]
    evals = [row for _, _, e, _ in out for row in e]
    files = {
        "main": csv_text(cfg, ["seed", "backend", "train_accuracy", "test_accuracy", "agreement_with_phase"], evals),
        "curve": csv_text(cfg, ["seed", "epoch", "loss", "train_accuracy"], curve),
    }
    blobs = {f"seed{seed}.weights": nn.weights_to_bytes(*w) for seed, _, _, w in out}

    tol = cfg.tolerances
    checks = []
    for name in sorted({e[1] for e in evals}, key=["phase", "osc"].index):
        mine = [e for e in evals if e[1] == name]
        good = np.mean([e[2] >= tol["train_accuracy_min"] and e[3] >= tol["test_accuracy_min"] for e in mine])
        checks.append(
            (
                f"nn[{name}]: seeds reaching train>={tol['train_accuracy_min']} and test>={tol['test_accuracy_min']}: {good:.2f} >= {tol['seed_fraction_min']}",
                good >= tol["seed_fraction_min"],
                good,
            )
        )
        if name == "osc":
            agree = float(np.mean([e[4] for e in mine]))
            checks.append((f"nn: phase/osc class agreement {agree:.3f} >= {tol['agreement_min']}", agree >= tol["agreement_min"], agree))
    return RunResult(files, checks, blobs)


RUNNERS = {"op-error": run_op_error, "graph": run_graph, "resonator": run_resonator, "nn": run_nn}


def run(cfg) -> RunResult:
    return RUNNERS[cfg.experiment](cfg)
