"""Run configuration, scan orchestration, decay fitting, and emission.

Verbs:

* ``scan``             run the configured measurement suites over the
                       (beta, region-pair) grid and emit CSV/JSON/SVG plus a
                       manifest;
* ``fit``              least-squares exponential decay fit of one quantity
                       from previously emitted records;
* ``emit``             re-emit output files from a records JSON;
* ``lr-fit``           fit the commutator-growth envelope only;
* ``validate-config``  schema-check a run configuration.

Every flag can also be supplied through an environment variable prefixed
``GIBBSLAB_`` (``GIBBSLAB_OUT``, ``GIBBSLAB_SEED``, ``GIBBSLAB_SUITES``,
``GIBBSLAB_MAX_DIM``, ``GIBBSLAB_CONFIG``, ``GIBBSLAB_FORMATS``); explicit
flags win over the environment.

Determinism contract: records are sorted by key, floats are printed with 17
significant digits, files use LF line endings, manifests carry no
timestamps, so a fixed config and seed reproduce byte-identical outputs.
Exit status is 0 when every pass flag is true, 1 on any failed record,
suite error, or runtime error, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from . import bp
from . import coherence as co
from . import entangle as en
from . import hilbert as hb
from . import kernels as kr
from . import lr
from . import model as md
from . import qcorr
from .thermal import SpectralModel

ENV_PREFIX = "GIBBSLAB_"
PASS_REL_TOL = 1e-9
PASS_ABS_TOL = 1e-12
DECAY_FLOOR = 1e-12
SUITES = ("qc", "skew", "fisher", "ppt", "bp", "lr")
FORMATS = ("csv", "json", "svg")
CSV_COLUMNS = ("model_hash", "n", "beta", "A", "B", "R",
               "quantity", "value", "bound", "pass")


def _fmt(x: float) -> str:
    """17-significant-digit decimal text; round-trips any float64."""
    return "%.17g" % float(x)


def _hash12(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":"),
                         default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def record_passes(value: float, bound: float) -> bool:
    """The pass rule, recomputable from a row alone."""
    if not math.isfinite(value):
        return False
    return value <= bound * (1.0 + PASS_REL_TOL) + PASS_ABS_TOL


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """One scan campaign; round-trips through JSON identically."""

    model_name: str
    model_n: int
    model_params: dict = field(default_factory=dict)
    betas: list = field(default_factory=lambda: [1.0])
    observables: dict = field(default_factory=lambda: {"a": "z", "b": "z"})
    pairs: list = field(default_factory=list)
    alphas: list = field(default_factory=lambda: [0.5])
    suites: list = field(default_factory=lambda: list(SUITES))
    bp_options: dict = field(default_factory=dict)
    lr_options: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "runs/scan"
    max_dim: int = 4096
    workers: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = {"name": d.pop("model_name"), "n": d.pop("model_n"),
                      "params": d.pop("model_params")}
        d["bp"] = d.pop("bp_options")
        d["lr"] = d.pop("lr_options")
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        issues = validate_config_dict(data)
        if issues:
            raise ValueError("invalid config: " + "; ".join(issues))
        model = data["model"]
        return cls(model_name=model["name"], model_n=int(model["n"]),
                   model_params=dict(model.get("params", {})),
                   betas=[float(b) for b in data["betas"]],
                   observables=dict(data.get("observables",
                                             {"a": "z", "b": "z"})),
                   pairs=[{"a": [int(s) for s in p["a"]],
                           "b": [int(s) for s in p["b"]]}
                          for p in data.get("pairs", [])],
                   alphas=[float(a) for a in data.get("alphas", [0.5])],
                   suites=list(data.get("suites", list(SUITES))),
                   bp_options=dict(data.get("bp", {})),
                   lr_options=dict(data.get("lr", {})),
                   seed=int(data.get("seed", 0)),
                   out=str(data.get("out", "runs/scan")),
                   max_dim=int(data.get("max_dim", 4096)),
                   workers=int(data.get("workers", 1)))


def validate_config_dict(data) -> list:
    """Schema issues in a raw config dict; empty means valid."""
    issues = []
    if not isinstance(data, dict):
        return ["config must be a JSON object"]
    model = data.get("model")
    if not isinstance(model, dict):
        issues.append("missing 'model' object")
    else:
        if model.get("name") not in md.MODEL_BUILDERS:
            issues.append("model.name must be one of %s"
                          % sorted(md.MODEL_BUILDERS))
        if not isinstance(model.get("n"), int) or model.get("n", 0) < 2:
            issues.append("model.n must be an integer >= 2")
        if not isinstance(model.get("params", {}), dict):
            issues.append("model.params must be an object")
    betas = data.get("betas")
    if (not isinstance(betas, list) or not betas
            or any(not isinstance(b, (int, float)) or b <= 0 for b in betas)):
        issues.append("betas must be a non-empty list of positive numbers")
    for key, val in data.get("observables", {}).items():
        if key not in ("a", "b") or val not in ("x", "y", "z"):
            issues.append("observables entries must map 'a'/'b' to x|y|z")
    pairs = data.get("pairs", [])
    if not isinstance(pairs, list):
        issues.append("pairs must be a list")
    else:
        for i, p in enumerate(pairs):
            if (not isinstance(p, dict) or "a" not in p or "b" not in p
                    or not isinstance(p["a"], list)
                    or not isinstance(p["b"], list)
                    or not p["a"] or not p["b"]):
                issues.append("pairs[%d] must be {'a': [sites], 'b': [sites]}"
                              % i)
            elif set(p["a"]) & set(p["b"]):
                issues.append("pairs[%d] regions overlap" % i)
    alphas = data.get("alphas", [0.5])
    if (not isinstance(alphas, list)
            or any(not isinstance(a, (int, float)) or not 0 <= a <= 1
                   for a in alphas)):
        issues.append("alphas must be numbers in [0, 1]")
    unknown = set(data.get("suites", [])) - set(SUITES)
    if unknown:
        issues.append("unknown suites %s; have %s"
                      % (sorted(unknown), list(SUITES)))
    for key in ("seed", "max_dim", "workers"):
        if key in data and (not isinstance(data[key], int) or data[key] < 0):
            issues.append("%s must be a non-negative integer" % key)
    if "workers" in data and isinstance(data["workers"], int) \
            and data["workers"] < 1:
        issues.append("workers must be >= 1")
    return issues


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class ScanRecord:
    """One measured quantity with the bound it is checked against."""

    model_hash: str
    n: int
    beta: float
    region_a: str
    region_b: str
    dist: float
    quantity: str
    value: float
    bound: float
    inputs_hash: str
    passed: bool

    def key(self):
        return (self.model_hash, self.n, self.beta, self.quantity,
                self.dist, self.region_a, self.region_b)

    def to_json_dict(self) -> dict:
        return {"model_hash": self.model_hash, "n": self.n,
                "beta": self.beta, "A": self.region_a, "B": self.region_b,
                "R": self.dist, "quantity": self.quantity,
                "value": self.value, "bound": self.bound,
                "inputs_hash": self.inputs_hash, "pass": self.passed}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ScanRecord":
        return cls(model_hash=d["model_hash"], n=int(d["n"]),
                   beta=float(d["beta"]), region_a=d["A"], region_b=d["B"],
                   dist=float(d["R"]), quantity=d["quantity"],
                   value=float(d["value"]), bound=float(d["bound"]),
                   inputs_hash=d.get("inputs_hash", ""),
                   passed=bool(d["pass"]))


def region_label(sites) -> str:
    if isinstance(sites, str):
        return sites
    return "+".join(str(s) for s in sorted(sites))


def _make_record(model_hash, n, beta, region_a, region_b, dist, quantity,
                 value, bound, inputs) -> ScanRecord:
    value, bound = float(value), float(bound)
    return ScanRecord(model_hash=model_hash, n=n, beta=beta,
                      region_a=region_label(region_a),
                      region_b=region_label(region_b), dist=float(dist),
                      quantity=quantity, value=value, bound=bound,
                      inputs_hash=_hash12(inputs),
                      passed=record_passes(value, bound))


# ---------------------------------------------------------------------------
# the scan
# ---------------------------------------------------------------------------

def _constants_for(ham, growth, beta: float) -> kr.BoundConstants:
    return kr.BoundConstants(beta=beta, growth=growth,
                             g=ham.interaction_strength, k=ham.locality,
                             d0=ham.space.d0,
                             gamma=ham.lattice.growth_constant)


def _constants_summary(bc: kr.BoundConstants) -> dict:
    return {"xi": bc.xi, "xi_skew": bc.xi_skew, "c_pair": bc.c_pair,
            "c_skew": bc.c_skew, "c_skew_extensive": bc.c_skew_extensive,
            "c_window": bc.c_window, "c_chain": bc.c_chain}


def run_scan(config: RunConfig):
    """Execute the configured suites; returns ``(records, manifest)``.

    Scan points are independent tasks run on a bounded worker pool; records
    are sorted by key afterwards, so the output does not depend on
    completion order.  A task failure becomes a failed record plus a
    manifest error entry, and the run continues.
    """
    ham = md.build_model(config.model_name, config.model_n,
                         **config.model_params)
    space = ham.space
    if space.dim > config.max_dim:
        raise ValueError("model dimension %d exceeds the cap %d"
                         % (space.dim, config.max_dim))
    spec = SpectralModel.from_hamiltonian(ham)

    lr_opts = dict(config.lr_options)
    pinned = lr_opts.get("pinned")
    source = int(lr_opts.get("source", 0))
    which = str(lr_opts.get("which", "z"))
    samples = []
    if pinned:
        fit = lr.GrowthFit(prefactor=float(pinned["prefactor"]),
                           decay_rate=float(pinned["decay_rate"]),
                           exponent_velocity=float(
                               pinned["exponent_velocity"]),
                           slack=float(pinned.get("slack", math.nan)),
                           used=0, censored=0, dropped=0,
                           no_propagation=False)
    else:
        samples, v_rough = lr.sample_growth(
            ham, source=source, which=which,
            time_points=int(lr_opts.get("time_points", 10)), spec=spec)
        fit = lr.fit_growth(samples, v_rough=v_rough)
    growth = fit.growth
    model_hash = ham.model_hash
    n = space.n
    gibbs_cache = {}

    def gibbs_mat(beta):
        if beta not in gibbs_cache:
            gibbs_cache[beta] = spec.gibbs(beta).mat
        return gibbs_cache[beta]

    def need_growth():
        if growth is None:
            raise RuntimeError("no propagation detected; cannot build "
                               "bound constants")
        return growth

    def pair_ops(pair):
        op_a = md.region_observable(space, config.observables.get("a", "z"),
                                    pair["a"])
        op_b = md.region_observable(space, config.observables.get("b", "z"),
                                    pair["b"])
        return op_a, op_b

    def qc_task(beta, pair):
        bc = _constants_for(ham, need_growth(), beta)
        op_a, op_b = pair_ops(pair)
        res = qcorr.certificate(spec, ham.lattice, beta, op_a, op_b)
        dist = ham.lattice.distance(pair["a"], pair["b"])
        b_a = len(ham.lattice.boundary(pair["a"]))
        b_b = len(ham.lattice.boundary(pair["b"]))
        sites_ab = len(pair["a"]) + len(pair["b"])
        bound = kr.pair_correlation_rhs(bc, b_a, b_b, sites_ab, dist)
        inputs = {"c_pair": bc.c_pair, "xi": bc.xi, "boundary_a": b_a,
                  "boundary_b": b_b, "sites_ab": sites_ab, "dist": dist}
        return [_make_record(model_hash, n, beta, pair["a"], pair["b"], dist,
                             "qc_certificate", res.average, bound, inputs)]

    def skew_task(beta, pair, alpha):
        bc = _constants_for(ham, need_growth(), beta)
        op_a, op_b = pair_ops(pair)
        val = abs(co.skew_correlation(spec, beta, op_a, op_b, alpha))
        dist = ham.lattice.distance(pair["a"], pair["b"])
        b_a = len(ham.lattice.boundary(pair["a"]))
        b_b = len(ham.lattice.boundary(pair["b"]))
        bound = kr.skew_clustering_rhs(bc, b_a, b_b, dist)
        inputs = {"c_skew": bc.c_skew, "xi_skew": bc.xi_skew,
                  "boundary_a": b_a, "boundary_b": b_b, "dist": dist,
                  "alpha": alpha}
        return [_make_record(model_hash, n, beta, pair["a"], pair["b"], dist,
                             "skew_alpha_%g" % alpha, val, bound, inputs)]

    def fisher_task(beta):
        bc = _constants_for(ham, need_growth(), beta)
        total = md.extensive_observable(space,
                                        config.observables.get("a", "z"))
        skew = co.skew_information(spec, beta, total, 0.5)
        fisher = co.fisher_information(spec, beta, total)
        inputs = {"c_skew_extensive": bc.c_skew_extensive,
                  "xi_skew": bc.xi_skew, "n": n}
        return [
            _make_record(model_hash, n, beta, "all", "all", 0.0,
                         "skew_extensive", skew,
                         kr.skew_extensive_rhs(bc, n), inputs),
            _make_record(model_hash, n, beta, "all", "all", 0.0,
                         "fisher_extensive", fisher,
                         kr.fisher_extensive_rhs(bc, n), inputs),
        ]

    def ppt_task(beta, pair):
        keep = sorted(pair["a"]) + sorted(pair["b"])
        if keep != sorted(keep):
            raise RuntimeError("ppt suite needs region A left of region B")
        rho_ab = hb.partial_trace(space, gibbs_mat(beta), keep)
        d_a = space.d0 ** len(pair["a"])
        d_b = space.d0 ** len(pair["b"])
        eps = en.covariance_scale(rho_ab, d_a, d_b)
        deficit = en.transpose_deficit(rho_ab, d_a, d_b)
        excess = en.negativity_excess(rho_ab, d_a, d_b)
        dist = ham.lattice.distance(pair["a"], pair["b"])
        inputs = {"epsilon": eps, "d_a": d_a, "d_b": d_b,
                  "note": "epsilon is a lower estimate; one-sided check"}
        return [
            _make_record(model_hash, n, beta, pair["a"], pair["b"], dist,
                         "ppt_deficit", deficit,
                         4.0 * eps * min(d_a, d_b), inputs),
            _make_record(model_hash, n, beta, pair["a"], pair["b"], dist,
                         "negativity_excess", excess,
                         kr.negativity_rhs(eps, min(d_a, d_b), d_a * d_b),
                         inputs),
        ]

    def bp_task(beta):
        opts = dict(config.bp_options)
        left = int(opts.get("left_size", n // 2))
        buffer = int(opts.get("buffer", max(1, ham.locality - 1)))
        bc = _constants_for(ham, need_growth(), beta)
        res = bp.ppt_mixture(ham, beta, left, constants=bc,
                             dist=2.0 * buffer, buffer=buffer,
                             tau_steps=int(opts.get("tau_steps", 8)))
        region_a = list(range(left))
        region_b = list(range(left, n))
        inputs = {"c_chain": bc.c_chain, "xi": bc.xi, "buffer": buffer,
                  "mix_weight": res.mix_weight, "dim_ab": space.dim}
        return [
            _make_record(model_hash, n, beta, region_a, region_b,
                         2.0 * buffer, "bp_mixing", res.relative_entropy,
                         res.rhs, inputs),
            _make_record(model_hash, n, beta, region_a, region_b,
                         2.0 * buffer, "bp_transpose_deficit",
                         res.transpose_deficit, 1e-9,
                         {"certification_tol": 1e-9}),
        ]

    def lr_task():
        if fit.no_propagation:
            raise RuntimeError("no propagation detected in the sampling "
                               "window")
        out = []
        by_dist = {}
        for s in samples:
            cur = by_dist.get(s.distance)
            if cur is None or s.value > cur.value:
                by_dist[s.distance] = s
        for dist in sorted(by_dist):
            s = by_dist[dist]
            bound = (s.size * fit.prefactor
                     * math.expm1(fit.exponent_velocity * s.time)
                     * math.exp(-fit.decay_rate * s.distance))
            inputs = {"prefactor": fit.prefactor,
                      "decay_rate": fit.decay_rate,
                      "exponent_velocity": fit.exponent_velocity,
                      "time": s.time}
            out.append(_make_record(model_hash, n, 0.0, [source],
                                    "r%g" % dist, dist, "lr_sample_max",
                                    s.value, bound, inputs))
        return out

    tasks = []
    for suite in config.suites:
        if suite == "qc":
            tasks += [(lambda b=b, p=p: qc_task(b, p))
                      for b in config.betas for p in config.pairs]
        elif suite == "skew":
            tasks += [(lambda b=b, p=p, a=a: skew_task(b, p, a))
                      for b in config.betas for p in config.pairs
                      for a in config.alphas]
        elif suite == "fisher":
            tasks += [(lambda b=b: fisher_task(b)) for b in config.betas]
        elif suite == "ppt":
            tasks += [(lambda b=b, p=p: ppt_task(b, p))
                      for b in config.betas for p in config.pairs]
        elif suite == "bp":
            tasks += [(lambda b=b: bp_task(b))
                      for b in config.betas if b <= bp.FLOW_BETA_CAP]
        elif suite == "lr":
            tasks.append(lr_task)

    records, errors = [], []

    def run_one(task):
        try:
            return task(), None
        except Exception as exc:  # recorded, the run continues
            return [], "%s: %s" % (type(exc).__name__, exc)

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        for out, err in pool.map(run_one, tasks):
            records.extend(out)
            if err is not None:
                errors.append(err)
    records.sort(key=lambda r: r.key())

    manifest = {
        "format": "gibbslab-manifest/1",
        "package": "gibbslab %s" % __version__,
        "conventions": {
            "site_ordering": "site0_leftmost_kron_factor",
            "entropy_units": "nats",
            "csv_sig_digits": 17,
            "pass_rule": "value <= bound*(1+%g)+%g" % (PASS_REL_TOL,
                                                       PASS_ABS_TOL),
        },
        "model": {"name": config.model_name, "n": n,
                  "params": config.model_params, "hash": model_hash,
                  "interaction_strength": ham.interaction_strength,
                  "locality": ham.locality, "d0": space.d0,
                  "gamma": ham.lattice.growth_constant},
        "lr_fit": {"prefactor": fit.prefactor,
                   "decay_rate": fit.decay_rate,
                   "exponent_velocity": fit.exponent_velocity,
                   "slack": fit.slack, "used": fit.used,
                   "censored": fit.censored, "dropped": fit.dropped,
                   "no_propagation": fit.no_propagation,
                   "pinned": bool(pinned)},
        "constants": {
            _fmt(beta): _constants_summary(
                _constants_for(ham, growth, beta))
            for beta in config.betas
        } if growth is not None else {},
        "config": config.to_dict(),
        "record_count": len(records),
        "errors": errors,
    }
    return records, manifest


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def csv_text(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join([
            r.model_hash, str(r.n), _fmt(r.beta), r.region_a, r.region_b,
            _fmt(r.dist), r.quantity, _fmt(r.value), _fmt(r.bound),
            "true" if r.passed else "false"]))
    return "\n".join(lines) + "\n"


def json_text(records) -> str:
    return json.dumps([r.to_json_dict() for r in records], indent=2,
                      sort_keys=True) + "\n"


def manifest_text(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


_SVG_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                "#8c564b", "#17becf", "#7f7f7f")


def svg_text(records) -> str:
    """Semilog decay plot: one ``<polyline>`` per quantity, bound overlay
    as a dashed ``<path>``; self-contained, no external assets.

    When several betas contribute at one distance, the plotted value is the
    largest measurement and the overlay the smallest bound, i.e. the
    envelope of the scan.
    """
    width, height = 720, 440
    mleft, mright, mtop, mbot = 70, 20, 20, 50
    series = {}
    for r in records:
        if math.isfinite(r.value) and r.value > 0:
            pts = series.setdefault(r.quantity, {})
            val, bnd = pts.get(r.dist, (0.0, math.inf))
            pts[r.dist] = (max(val, r.value),
                           min(bnd, r.bound if math.isfinite(r.bound)
                               and r.bound > 0 else math.inf))
    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<svg xmlns="http://www.w3.org/2000/svg" width="%d" '
             'height="%d" viewBox="0 0 %d %d">' % (width, height, width,
                                                   height),
             '<rect width="%d" height="%d" fill="white"/>' % (width, height)]
    if series:
        xs = sorted({d for pts in series.values() for d in pts})
        logs = [math.log10(v) for pts in series.values()
                for v, b in pts.values()] + \
               [math.log10(b) for pts in series.values()
                for v, b in pts.values() if math.isfinite(b) and b > 0]
        lo = math.floor(min(logs)) - 0.2
        hi = math.ceil(max(logs)) + 0.2
        x0, x1 = min(xs), max(xs)
        span = (x1 - x0) or 1.0

        def sx(d):
            return mleft + (d - x0) / span * (width - mleft - mright)

        def sy(val):
            frac = (math.log10(val) - lo) / (hi - lo)
            return height - mbot - frac * (height - mtop - mbot)

        for tick in range(int(math.ceil(lo)), int(math.floor(hi)) + 1):
            y = sy(10.0 ** tick)
            parts.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" '
                         'stroke="#dddddd"/>' % (mleft, y, width - mright, y))
            parts.append('<text x="%d" y="%.2f" font-size="11" '
                         'text-anchor="end" fill="#444444">1e%d</text>'
                         % (mleft - 6, y + 4, tick))
        for d in xs:
            parts.append('<text x="%.2f" y="%d" font-size="11" '
                         'text-anchor="middle" fill="#444444">%g</text>'
                         % (sx(d), height - mbot + 18, d))
        parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" '
                     'stroke="#000000"/>' % (mleft, height - mbot,
                                             width - mright, height - mbot))
        parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" '
                     'stroke="#000000"/>' % (mleft, mtop, mleft,
                                             height - mbot))
        parts.append('<text x="%d" y="%d" font-size="12" '
                     'text-anchor="middle">distance</text>'
                     % ((mleft + width - mright) // 2, height - 12))
        for idx, quantity in enumerate(sorted(series)):
            color = _SVG_PALETTE[idx % len(_SVG_PALETTE)]
            pts = series[quantity]
            data = " ".join("%.2f,%.2f" % (sx(d), sy(v))
                            for d, (v, _) in sorted(pts.items()))
            parts.append('<polyline points="%s" fill="none" stroke="%s" '
                         'stroke-width="1.5"/>' % (data, color))
            bound_pts = [(d, b) for d, (_, b) in sorted(pts.items())
                         if math.isfinite(b) and b > 0]
            if bound_pts:
                path = "M" + "L".join("%.2f %.2f" % (sx(d), sy(b))
                                      for d, b in bound_pts)
                parts.append('<path d="%s" fill="none" stroke="%s" '
                             'stroke-width="1" stroke-dasharray="5,3"/>'
                             % (path, color))
            parts.append('<text x="%d" y="%d" font-size="11" fill="%s">'
                         '%s</text>' % (width - mright - 180,
                                        mtop + 14 * (idx + 1), color,
                                        quantity))
    else:
        parts.append('<text x="%d" y="%d" font-size="12" '
                     'text-anchor="middle">no finite positive records'
                     '</text>' % (width // 2, height // 2))
    parts.append('</svg>')
    return "\n".join(parts) + "\n"


def emit_outputs(records, formats, out_dir: str, manifest: dict | None = None):
    """Write the requested output files; returns the written paths."""
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError("unknown formats %s; have %s"
                         % (sorted(unknown), list(FORMATS)))
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name, text):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        written.append(path)

    if "csv" in formats:
        put("records.csv", csv_text(records))
    if "json" in formats:
        put("records.json", json_text(records))
    if "svg" in formats:
        put("decay.svg", svg_text(records))
    if manifest is not None:
        put("manifest.json", manifest_text(manifest))
    return written


# ---------------------------------------------------------------------------
# decay fitting on records
# ---------------------------------------------------------------------------

def fit_decay(records, quantity: str, beta: float | None = None,
              floor: float = DECAY_FLOOR) -> dict:
    """Least squares on ``(R, ln value)`` for one quantity.

    Floor-censored points are excluded and counted; needs at least four
    distinct distances above the floor.
    """
    chosen = [r for r in records
              if r.quantity == quantity
              and (beta is None or r.beta == beta)]
    kept = [(r.dist, r.value) for r in chosen
            if math.isfinite(r.value) and r.value > floor]
    censored = len(chosen) - len(kept)
    if len({d for d, _ in kept}) < 4:
        raise ValueError("need values above %g at >= 4 distances; have %d "
                         "(%d censored)" % (floor, len({d for d, _ in kept}),
                                            censored))
    xs = np.array([d for d, _ in kept])
    ys = np.log([v for _, v in kept])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    total = ys - ys.mean()
    r_squared = 1.0 - float(resid @ resid) / float(total @ total) \
        if float(total @ total) > 0 else 1.0
    xi = -1.0 / slope if slope < 0 else math.inf
    return {"xi_measured": float(xi), "intercept": float(intercept),
            "r_squared": r_squared, "points": len(kept),
            "censored": censored}


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _env(name: str):
    return os.environ.get(ENV_PREFIX + name)


def _load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


def _load_records(path: str):
    with open(path) as fh:
        return [ScanRecord.from_json_dict(d) for d in json.load(fh)]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbslab",
        description="Thermal-state correlation scans on exactly "
                    "diagonalizable spin chains.",
        epilog="Flags fall back to GIBBSLAB_CONFIG, GIBBSLAB_OUT, "
               "GIBBSLAB_SEED, GIBBSLAB_SUITES, GIBBSLAB_MAX_DIM and "
               "GIBBSLAB_FORMATS when omitted.")
    sub = parser.add_subparsers(dest="verb", required=True)

    scan = sub.add_parser("scan", help="run the configured suites and emit "
                                       "records plus a manifest")
    scan.add_argument("--config", help="run config JSON path")
    scan.add_argument("--out", help="output directory (overrides config)")
    scan.add_argument("--seed", type=int, help="seed recorded in the "
                                               "manifest (overrides config)")
    scan.add_argument("--suites", help="comma-separated suite subset")
    scan.add_argument("--max-dim", type=int, help="hard dimension cap")
    scan.add_argument("--formats", help="comma-separated subset of csv,json,"
                                        "svg (default all)")

    fit = sub.add_parser("fit", help="exponential decay fit of one quantity "
                                     "from emitted records")
    fit.add_argument("--records", required=True, help="records.json path")
    fit.add_argument("--quantity", required=True)
    fit.add_argument("--beta", type=float, help="restrict to one beta")

    emit = sub.add_parser("emit", help="re-emit output files from a records "
                                       "JSON")
    emit.add_argument("--records", required=True, help="records.json path")
    emit.add_argument("--out", help="output directory")
    emit.add_argument("--formats", help="comma-separated subset of csv,json,"
                                        "svg (default all)")

    lrf = sub.add_parser("lr-fit", help="fit the commutator-growth envelope "
                                        "only")
    lrf.add_argument("--config", help="run config JSON path")

    val = sub.add_parser("validate-config", help="schema-check a run config")
    val.add_argument("--config", help="run config JSON path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.verb in ("scan", "lr-fit", "validate-config"):
        config_path = args.config or _env("CONFIG")
        if not config_path:
            print("error: --config (or GIBBSLAB_CONFIG) is required",
                  file=sys.stderr)
            return 2

    if args.verb == "validate-config":
        with open(config_path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                print("invalid JSON: %s" % exc, file=sys.stderr)
                return 1
        issues = validate_config_dict(data)
        if issues:
            for issue in issues:
                print(issue, file=sys.stderr)
            return 1
        print("ok")
        return 0

    if args.verb == "lr-fit":
        config = _load_config(config_path)
        ham = md.build_model(config.model_name, config.model_n,
                             **config.model_params)
        opts = config.lr_options
        fit = lr.growth_from_model(
            ham, source=int(opts.get("source", 0)),
            which=str(opts.get("which", "z")),
            time_points=int(opts.get("time_points", 10)))
        print(json.dumps({
            "prefactor": fit.prefactor, "decay_rate": fit.decay_rate,
            "exponent_velocity": fit.exponent_velocity, "slack": fit.slack,
            "used": fit.used, "censored": fit.censored,
            "dropped": fit.dropped, "no_propagation": fit.no_propagation,
        }, indent=2, sort_keys=True))
        return 0

    if args.verb == "scan":
        config = _load_config(config_path)
        out = args.out or _env("OUT") or config.out
        seed = args.seed if args.seed is not None else \
            (int(_env("SEED")) if _env("SEED") else config.seed)
        suites = (args.suites or _env("SUITES") or None)
        max_dim = args.max_dim if args.max_dim is not None else \
            (int(_env("MAX_DIM")) if _env("MAX_DIM") else config.max_dim)
        formats = (args.formats or _env("FORMATS") or ",".join(FORMATS))
        config.out, config.seed, config.max_dim = out, seed, max_dim
        if suites:
            config.suites = [s for s in suites.split(",") if s]
            bad = set(config.suites) - set(SUITES)
            if bad:
                print("error: unknown suites %s" % sorted(bad),
                      file=sys.stderr)
                return 2
        records, manifest = run_scan(config)
        manifest["seed"] = config.seed
        written = emit_outputs(records, [f for f in formats.split(",") if f],
                               config.out, manifest=manifest)
        for path in written:
            print(path)
        failed = sum(1 for r in records if not r.passed)
        print("records: %d  failed: %d  errors: %d"
              % (len(records), failed, len(manifest["errors"])))
        return 0 if failed == 0 and not manifest["errors"] else 1

    if args.verb == "fit":
        records = _load_records(args.records)
        result = fit_decay(records, args.quantity, beta=args.beta)
        print(json.dumps(result, indent=2, sort_keys=True))
        return 0

    if args.verb == "emit":
        records = _load_records(args.records)
        out = args.out or _env("OUT") or "."
        formats = (args.formats or _env("FORMATS") or ",".join(FORMATS))
        for path in emit_outputs(records,
                                 [f for f in formats.split(",") if f], out):
            print(path)
        return 0

    raise AssertionError("unhandled verb %r" % args.verb)


if __name__ == "__main__":
    sys.exit(main())
