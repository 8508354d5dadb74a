"""Command-line front end.

Every subcommand reads its settings from flags and, optionally, a JSON
file given with ``--config`` (flags win).  Outputs are JSON, CSV and
PPM/PGM files that carry the effective configuration, the tool version and
the residual diagnostics of the run.  Output bytes depend only on the
configuration: thread count, output paths and figure paths are not
recorded, and nothing time-dependent is written.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DimensionReport,
    ExponentDistribution,
    beta_E,
    count_non_normal,
    dh_lower_bound,
    hoeffding_bound,
    legendre_check,
    normality_classify,
    periodic_average_beta,
    periodic_betas,
    ruelle_dimension_from_betas,
)
from .boettcher import eqG_residual, bottcher_G, eval_phi_ray, functional_residual, phi_series
from .errors import NumericalError
from .geometry import (
    all_points,
    assemble,
    brick,
    diameter,
    hausdorff_one_sided,
    julia_oracle,
    polylines_csv,
    raster,
    render_mandelbrot,
    write_image,
)
from .polymap import (
    ExternalAngle,
    count_points,
    expected_J_count,
    landing_chain,
    landing_point,
    make_param,
    periodic_points_on_J,
)
from .transseries import build_model, coefficient_table, dyadic_model, eval_model, self_similarity_residual

log = logging.getLogger("juliats")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULTS = {
    "lambda": "0.5",
    "angle": "0/1",
    "order": 4096,
    "n_max": 64,
    "k_max": 8,
    "period": None,
    "n": 10,
    "depth": 12,
    "width": 512,
    "height": 512,
    "window": None,
    "seed": 0,
    "oracle_points": 100000,
    "u_half_width": 0.05,
    "samples": 257,
    "method": "bricks",
    "mandelbrot": False,
    "max_iter": 200,
    "gain": 1.0,
    "bits": None,
    "m": 1,
    "epsilon": 0.5,
    "N": 12,
    "table": False,
}

# keys that never enter output files (they must not change output bytes)
UNRECORDED = {"threads", "out", "csv", "figure", "config", "verbose"}

MANDELBROT_WINDOW = (-2.5, 1.0, -1.75, 1.75)


# --- parsing ------------------------------------------------------------------

def parse_complex(text) -> complex:
    """``a``, ``bi``, ``a+bi`` or ``a-bi`` with ``.`` as decimal point; numbers pass through."""
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex number")
    if s[-1] in "ij":
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        cut = max((i for i, ch in enumerate(body) if ch in "+-" and i > 0 and body[i - 1] not in "eE"),
                  default=0)
        re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return complex(float(re_part) if re_part else 0.0, float(im_part))
    return complex(float(s), 0.0)


def parse_angle(text) -> ExternalAngle:
    try:
        return ExternalAngle.of(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle {text!r}: expected p/q") from exc


def parse_window(text):
    if text is None:
        return None
    vals = text if isinstance(text, (list, tuple)) else str(text).split(",")
    if len(vals) != 4:
        raise ValueError("window needs four numbers re_min,re_max,im_min,im_max")
    w = tuple(float(v) for v in vals)
    if not (w[1] > w[0] and w[3] > w[2]):
        raise ValueError("window must satisfy re_min < re_max and im_min < im_max")
    return w


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with settings; flags override it")
    p.add_argument("--lambda", dest="lambda", default=S, help="parameter, e.g. 0.5, -1.25, 0.3+0.2i")
    p.add_argument("--order", type=int, default=S, help="order K of the Böttcher series (default 4096)")
    p.add_argument("--threads", type=int, default=S, help="worker threads (default: all cores)")
    p.add_argument("--out", default=S, help="output path (stdout for JSON when omitted)")
    p.add_argument("-v", "--verbose", action="store_true", default=S)


def _add_model(p):
    S = argparse.SUPPRESS
    p.add_argument("--angle", default=S, help="external angle p/q (default 0/1)")
    p.add_argument("--n-max", dest="n_max", type=int, default=S, help="order of the normal form")
    p.add_argument("--k-max", dest="k_max", type=int, default=S, help="largest Fourier mode kept")


def build_parser():
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="juliats", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"juliats {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boettcher", help="Laurent coefficients of the Böttcher map")
    _add_common(p)

    p = sub.add_parser("periodic", help="landing point of an angle, or all cycles of a period")
    _add_common(p)
    p.add_argument("--angle", default=S)
    p.add_argument("--period", type=int, default=S, help="list all repelling cycles with period dividing n")

    p = sub.add_parser("transseries", help="local model at the landing point of an angle")
    _add_common(p)
    _add_model(p)
    p.add_argument("--table", action="store_true", default=S, help="include the coefficient table")

    p = sub.add_parser("brick", help="brick at an angle and its assembled copies (CSV)")
    _add_common(p)
    _add_model(p)
    p.add_argument("--depth", type=int, default=S, help="levels of inverse branches (default 12)")
    p.add_argument("--u-half-width", dest="u_half_width", type=float, default=S)
    p.add_argument("--samples", type=int, default=S, help="odd number of brick samples")
    p.add_argument("--oracle-points", dest="oracle_points", type=int, default=S,
                   help="inverse-iteration points for the fidelity check (0 to skip)")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--figure", default=S, help="also write a PNG figure")

    p = sub.add_parser("render", help="raster image of the Julia set or the Mandelbrot set")
    _add_common(p)
    _add_model(p)
    p.add_argument("--method", choices=("bricks", "oracle"), default=S)
    p.add_argument("--mandelbrot", action="store_true", default=S, help="escape-time Mandelbrot image")
    p.add_argument("--depth", type=int, default=S)
    p.add_argument("--width", type=int, default=S)
    p.add_argument("--height", type=int, default=S)
    p.add_argument("--window", default=S, help="re_min,re_max,im_min,im_max (use --window=...)")
    p.add_argument("--oracle-points", dest="oracle_points", type=int, default=S)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--gain", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--figure", default=S)

    p = sub.add_parser("dimension", help="beta_E, Ruelle dimension and exponent distribution")
    _add_common(p)
    p.add_argument("--n", type=int, default=S, help="period of the periodic-point sums (default 10)")
    p.add_argument("--csv", default=S, help="write the exponent distribution as CSV")
    p.add_argument("--figure", default=S)

    p = sub.add_parser("normality", help="classify a bit string or count non-normal strings")
    p.add_argument("--config", default=S)
    p.add_argument("--bits", default=S, help="binary string to classify")
    p.add_argument("--m", type=int, default=S, help="block length (default 1)")
    p.add_argument("--epsilon", type=float, default=S, help="tolerance (default 0.5)")
    p.add_argument("--N", dest="N", type=int, default=S, help="count for block counts 1..N")
    p.add_argument("--out", default=S)
    p.add_argument("-v", "--verbose", action="store_true", default=S)

    p = sub.add_parser("verify", help="run the invariant suite and write its artifacts")
    _add_common(p)
    p.add_argument("--n", type=int, default=S, help="period of the periodic-point checks (default 10)")
    p.add_argument("--depth", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    return parser


def resolve_config(ns):
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = dict(DEFAULTS)
    given = vars(ns)
    if "config" in given:
        with open(given["config"], encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in data.items()})
    cfg.update(given)
    cfg.setdefault("threads", os.cpu_count() or 1)
    if int(cfg["threads"]) < 1:
        raise ValueError("--threads must be positive")
    cfg["threads"] = int(cfg["threads"])
    return cfg


def recorded_config(cfg, keys):
    """The part of the configuration that is echoed into output files, normalized."""
    out = {}
    for k in keys:
        v = cfg.get(k)
        if k == "lambda":
            z = parse_complex(v)
            v = [z.real, z.imag]
        elif k == "angle":
            v = str(parse_angle(v))
        elif k == "window":
            v = None if v is None else list(parse_window(v))
        out[k] = v
    return out


# --- output helpers ---------------------------------------------------------

def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item() if not np.iscomplexobj(o) else [float(o.real), float(o.imag)]
    if isinstance(o, np.ndarray):
        return o.tolist() if not np.iscomplexobj(o) else [[float(z.real), float(z.imag)] for z in o.ravel()]
    if isinstance(o, (ExternalAngle, Fraction)):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def envelope(command, config, result, residuals):
    return {
        "tool": "juliats",
        "version": __version__,
        "command": command,
        "config": config,
        "residuals": residuals,
        "result": result,
    }


def comment_header(command, config, residuals):
    """Metadata for CSV and image headers, one JSON document on one line."""
    meta = {"tool": "juliats", "version": __version__, "command": command,
            "config": config, "residuals": residuals}
    return json.dumps(meta, sort_keys=True, default=_json_default)


def emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _param(cfg):
    return make_param(parse_complex(cfg["lambda"]))


def _series(cfg, param):
    K = int(cfg["order"])
    if K < 8:
        raise ValueError("--order must be at least 8")
    return phi_series(param, K)


def _model(cfg, param, series, angle=None):
    angle = parse_angle(cfg["angle"] if angle is None else angle)
    base = angle
    while base.dyadic_exponent:
        base = base.doubled()
    model = build_model(param, base, n_max=int(cfg["n_max"]), k_max=int(cfg["k_max"]), series=series)
    return angle, model


# --- subcommands --------------------------------------------------------------

def cmd_boettcher(cfg):
    param = _param(cfg)
    K = int(cfg["order"])
    G = bottcher_G(param, K + 2)
    series = phi_series(param, K)
    residuals = {
        "G_equation": eqG_residual(G, param.lam),
        "functional_r0.5": functional_residual(param, series, 0.5, 256),
    }
    result = {
        "lowest_index": series.lowest_index,
        "order": series.order,
        "coeffs": series.coeffs,
        "G_coeffs": G.taylor()[: K + 1],
        "param": param.to_json(),
    }
    config = recorded_config(cfg, ["lambda", "order"])
    emit(dumps(envelope("boettcher", config, result, residuals)), cfg.get("out"))
    return EXIT_OK


def cmd_periodic(cfg):
    param = _param(cfg)
    series = _series(cfg, param)
    if cfg.get("period") is not None:
        n = int(cfg["period"])
        if not 1 <= n <= 16:
            raise ValueError("--period must lie in 1..16")
        orbits = periodic_points_on_J(param, n, series, threads=cfg["threads"])
        result = {"period": n, "count": count_points(orbits), "expected": expected_J_count(param, n),
                  "orbits": [o.to_json() for o in orbits]}
        residuals = {"landing_max": max((o.residual for o in orbits), default=0.0)}
        config = recorded_config(cfg, ["lambda", "order", "period"])
    else:
        angle = parse_angle(cfg["angle"])
        if angle.dyadic_exponent:
            angles, pts = landing_chain(param, angle, series)
            result = {"angle": str(angle), "preperiodic": True,
                      "chain": [{"angle": str(a), "point": z} for a, z in zip(angles, pts)]}
            residuals = {}
        else:
            orbit = landing_point(param, angle, series)
            result = orbit.to_json()
            result["b_real"] = orbit.b.real
            result["b_imag"] = orbit.b.imag
            residuals = {"landing": orbit.residual}
        config = recorded_config(cfg, ["lambda", "order", "angle"])
    emit(dumps(envelope("periodic", config, result, residuals)), cfg.get("out"))
    return EXIT_OK


def cmd_transseries(cfg):
    param = _param(cfg)
    series = _series(cfg, param)
    angle, model = _model(cfg, param, series)
    result = model.to_json()
    residuals = dict(model.residuals)
    residuals["self_similarity"] = self_similarity_residual(model)
    s = np.array([1e-1, 1e-2, 1e-3])
    if angle.dyadic_exponent:
        ev = dyadic_model(param, angle, model, series)
        got = ev(s)
        result["dyadic"] = {"angle": str(angle), "chain": list(ev.chain),
                            "derivative_to_base": ev.derivative_to_base()}
    else:
        got = eval_model(model, s)
    ref = eval_phi_ray(param, series, angle, s)
    residuals["oracle_s"] = [float(v) for v in s]
    residuals["oracle_error"] = [float(v) for v in np.abs(got - ref)]
    if cfg.get("table"):
        tab = coefficient_table(model)
        result["coefficient_table"] = {"k_max": tab.k_max, "values": tab.values,
                                       "decay": tab.decay_report()}
    config = recorded_config(cfg, ["lambda", "order", "angle", "n_max", "k_max", "table"])
    emit(dumps(envelope("transseries", config, result, residuals)), cfg.get("out"))
    return EXIT_OK


def _assembled(cfg, param, series, cumulative=False):
    angle, model = _model(cfg, param, series)
    if angle.dyadic_exponent:
        raise ValueError("bricks are built at periodic angles")
    b = brick(model, float(cfg["u_half_width"]), int(cfg["samples"]))
    lines = assemble(param, b, int(cfg["depth"]), threads=cfg["threads"], cumulative=cumulative)
    return model, b, lines


def _fidelity(param, lines, n_points, seed):
    pts = all_points(lines)
    oracle = julia_oracle(param, n_points, seed=seed)
    d = hausdorff_one_sided(pts, oracle.points)
    diam = diameter(oracle.points)
    return d, diam, oracle


def cmd_brick(cfg):
    param = _param(cfg)
    series = _series(cfg, param)
    model, b, lines = _assembled(cfg, param, series)
    residuals = {"conjugacy": model.residuals["conjugacy"], "periodicity": model.residuals["periodicity"],
                 "brick_max_step": b.max_step}
    oracle = None
    if int(cfg["oracle_points"]) > 0:
        d, diam, oracle = _fidelity(param, lines, int(cfg["oracle_points"]), int(cfg["seed"]))
        residuals["hausdorff_to_oracle"] = d
        residuals["hausdorff_over_diameter"] = d / diam
    config = recorded_config(cfg, ["lambda", "order", "angle", "n_max", "k_max", "depth",
                                   "u_half_width", "samples", "oracle_points", "seed"])
    summary = {"copies": len(lines), "points": int(sum(len(l) for l in lines)),
               "L": model.L, "b": model.b, "brick": b.points}
    text = polylines_csv(lines, comment_header("brick", config, residuals))
    if cfg.get("out") is not None:
        emit(text, cfg["out"])
        sys.stdout.write(dumps(envelope("brick", config, summary, residuals)))
    else:
        sys.stdout.write(text)
    if cfg.get("figure"):
        from .plotting import brick_figure

        brick_figure(cfg["figure"], lines, oracle.points if oracle is not None else None,
                     title=f"lambda={cfg['lambda']}, angle {model.orbit.angle}", highlight=b)
    return EXIT_OK


def cmd_render(cfg):
    window = parse_window(cfg.get("window"))
    width, height = int(cfg["width"]), int(cfg["height"])
    if width < 1 or height < 1:
        raise ValueError("width and height must be positive")
    residuals = {}
    if cfg.get("mandelbrot"):
        image = render_mandelbrot(window or MANDELBROT_WINDOW, width, height, int(cfg["max_iter"]))
        keys = ["width", "height", "window", "max_iter", "mandelbrot"]
        title = "Mandelbrot set (z^2 + c)"
    else:
        param = _param(cfg)
        if cfg["method"] == "bricks":
            series = _series(cfg, param)
            # every depth up to the requested one: finer copies fill the gaps between coarser ones
            model, b, lines = _assembled(cfg, param, series, cumulative=True)
            inputs = lines
            residuals = {"conjugacy": model.residuals["conjugacy"],
                         "periodicity": model.residuals["periodicity"]}
            keys = ["lambda", "order", "angle", "n_max", "k_max", "depth", "method",
                    "width", "height", "window", "gain"]
        else:
            inputs = [julia_oracle(param, int(cfg["oracle_points"]), seed=int(cfg["seed"]))]
            keys = ["lambda", "method", "oracle_points", "seed", "width", "height", "window", "gain"]
        image = raster(inputs, width, height, window, threads=cfg["threads"], gain=float(cfg["gain"]))
        title = f"lambda={cfg['lambda']}"
    config = recorded_config(cfg, keys)
    config["window_used"] = list(image.window)
    out = cfg.get("out") or "julia.ppm"
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_image(image, out, comment_header("render", config, residuals))
    if cfg.get("figure"):
        from .plotting import raster_figure

        raster_figure(cfg["figure"], image, title=title)
    return EXIT_OK


def dimension_report(param, series, n, threads=1):
    beta, winding, im = beta_E(param, series)
    lower = dh_lower_bound(beta)
    orbits = periodic_points_on_J(param, n, series, threads=threads)
    betas = periodic_betas(orbits)
    D = ruelle_dimension_from_betas(betas, n)
    dist = ExponentDistribution(n, betas)
    report = DimensionReport(
        beta_E=beta, winding=winding, bE_imag_mod_winding=im, lower_bound=lower,
        ruelle_D=D, ruelle_period=n, legendre=legendre_check(dist, D),
        periodic_mean_beta=periodic_average_beta(orbits),
        diagnostics={
            "points_found": count_points(orbits),
            "points_expected": expected_J_count(param, n),
            "legendre_target": -1.0,
            "legendre_note": "max_s(-D s - Phi_n(s)) tends to -1 as n grows; "
                             "the tolerance 0.1 at n = 10 is an engineering choice",
        },
    )
    return report, dist, orbits


def cmd_dimension(cfg):
    param = _param(cfg)
    series = _series(cfg, param)
    n = int(cfg["n"])
    if not 1 <= n <= 16:
        raise ValueError("--n must lie in 1..16")
    report, dist, _ = dimension_report(param, series, n, cfg["threads"])
    residuals = {"legendre_plus_one": report.legendre + 1.0,
                 "count_mismatch": report.diagnostics["points_expected"] - report.diagnostics["points_found"]}
    config = recorded_config(cfg, ["lambda", "order", "n"])
    result = report.to_json()
    result["distribution"] = dist.to_json()
    emit(dumps(envelope("dimension", config, result, residuals)), cfg.get("out"))
    if cfg.get("csv"):
        emit(dist.to_csv(comments=comment_header("dimension", config, residuals)), cfg["csv"])
    if cfg.get("figure"):
        from .plotting import distribution_figure

        distribution_figure(cfg["figure"], dist, report.ruelle_D)
    return EXIT_OK


def cmd_normality(cfg):
    m = int(cfg["m"])
    eps = float(cfg["epsilon"])
    if m < 1 or not eps > 0:
        raise ValueError("need m >= 1 and epsilon > 0")
    if cfg.get("bits") is not None:
        ok, freqs = normality_classify(cfg["bits"], m, eps)
        result = {"normal": ok, "frequencies": freqs}
        config = recorded_config(cfg, ["bits", "m", "epsilon"])
    else:
        N_top = int(cfg["N"])
        if not 1 <= N_top or N_top * m > 64:
            raise ValueError("need 1 <= N and N m <= 64")
        rows = []
        for N in range(1, N_top + 1):
            bad = count_non_normal(N, m, eps)
            frac = bad / 2 ** (N * m)
            bound = hoeffding_bound(N, m, eps)
            rows.append({"N": N, "non_normal": bad, "fraction": frac, "bound": bound,
                         "within_bound": frac <= bound})
        result = {"rows": rows, "all_within_bound": all(r["within_bound"] for r in rows)}
        config = recorded_config(cfg, ["N", "m", "epsilon"])
    emit(dumps(envelope("normality", config, result, {})), cfg.get("out"))
    return EXIT_OK


# --- verification suite -------------------------------------------------------

class _Table:
    def __init__(self):
        self.rows = []

    def add(self, name, value, tolerance, passed, counted=True):
        self.rows.append({"check": name, "value": value, "tolerance": tolerance,
                          "status": ("PASS" if passed else "FAIL") if counted else "INFO"})

    @property
    def ok(self):
        return all(r["status"] != "FAIL" for r in self.rows)

    def render(self):
        lines = [f"{'check':<34} {'value':>14} {'tolerance':>14}  status"]
        for r in self.rows:
            v, t = r["value"], r["tolerance"]
            vs = f"{v:.6g}" if isinstance(v, float) else str(v)
            ts = f"{t:.3g}" if isinstance(t, float) else str(t)
            lines.append(f"{r['check']:<34} {vs:>14} {ts:>14}  {r['status']}")
        return "\n".join(lines) + "\n"


def cmd_verify(cfg):
    param = _param(cfg)
    out = Path(cfg.get("out") or "verify_out")
    out.mkdir(parents=True, exist_ok=True)
    threads = cfg["threads"]
    n = int(cfg["n"])
    config = recorded_config(cfg, ["lambda", "order", "n", "depth", "seed", "n_max", "k_max"])
    table = _Table()
    artifacts = {}

    def write(name, text):
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        artifacts[name] = len(text.encode("utf-8"))

    # Böttcher map
    s64 = phi_series(param, 64)
    r = functional_residual(param, s64, 0.5, 256)
    table.add("boettcher_residual_K64", r, 1e-9, r <= 1e-9)
    series = _series(cfg, param)
    G = bottcher_G(param, 66)
    table.add("G_equation_K64", eqG_residual(G, param.lam), 1e-10, eqG_residual(G, param.lam) <= 1e-10)
    write("boettcher.json", dumps(envelope("verify/boettcher", config,
                                           {"lowest_index": s64.lowest_index, "coeffs": s64.coeffs},
                                           {"functional_r0.5": r})))

    # transseries models
    models = {}
    for text in ("0/1", "1/3"):
        angle, model = _model(cfg, param, series, text)
        models[text] = model
        tag = text.replace("/", "_")
        res = dict(model.residuals)
        res["self_similarity"] = self_similarity_residual(model)
        s = np.array([1e-1, 1e-2, 1e-3])
        err = np.abs(eval_model(model, s) - eval_phi_ray(param, series, angle, s))
        res["oracle_error"] = [float(e) for e in err]
        table.add(f"conjugacy[{text}]", res["conjugacy"], 1e-9, res["conjugacy"] <= 1e-9)
        table.add(f"periodicity[{text}]", res["periodicity"], 1e-6, res["periodicity"] <= 1e-6)
        table.add(f"self_similarity[{text}]", res["self_similarity"], 1e-6, res["self_similarity"] <= 1e-6)
        table.add(f"model_vs_phi_s1e-3[{text}]", float(err[-1]), 1e-6, err[-1] <= 1e-6)
        table.add(f"fourier_decay_C_half_strip[{text}]", res["fourier_decay_C_half_strip"], 1e3,
                  res["fourier_decay_C_half_strip"] <= 1e3)
        write(f"model_{tag}.json", dumps(envelope("verify/transseries", config, model.to_json(), res)))

    # dimension
    report, dist, orbits = dimension_report(param, series, n, threads)
    beta = report.beta_E
    table.add("beta_E_at_least_half", beta, 0.5, beta >= 0.5)
    found, expected = report.diagnostics["points_found"], report.diagnostics["points_expected"]
    table.add(f"periodic_point_count_n{n}", found, expected, found == expected)
    gap = report.ruelle_D - (1 / beta - 0.02)
    table.add(f"ruelle_D_n{n}_vs_1/beta_E", report.ruelle_D, 1 / beta - 0.02, gap >= 0)
    table.add(f"legendre_plus_one_n{n}", abs(report.legendre + 1), 0.1, abs(report.legendre + 1) <= 0.1,
              counted=False)
    write("dimension.json", dumps(envelope("verify/dimension", config, report.to_json(),
                                           {"legendre_plus_one": report.legendre + 1})))
    write("distribution.csv", dist.to_csv(comments=comment_header("verify/dimension", config, {})))

    # bricks
    bcfg = dict(cfg, angle="0/1", u_half_width=0.05, samples=257, depth=cfg["depth"])
    model = models["0/1"]
    b = brick(model)
    lines = assemble(param, b, int(bcfg["depth"]), threads=threads)
    d, diam, _ = _fidelity(param, lines, 100000, int(cfg["seed"]))
    table.add(f"brick_hausdorff_depth{bcfg['depth']}", d / diam, 2e-2, d / diam <= 2e-2)
    write("brick.csv", polylines_csv([b], comment_header("verify/brick", config, {"hausdorff_over_diameter": d / diam})))
    image = raster(lines, 256, 256, threads=threads)
    write_image(image, out / "assembled.ppm", comment_header("verify/render", config, {}))
    artifacts["assembled.ppm"] = (out / "assembled.ppm").stat().st_size

    # normality counts against the Hoeffding bound
    worst = 0.0
    for m in (1, 2):
        for eps in (0.25, 0.5):
            for N in range(1, 13 if m == 1 else 7):
                frac = count_non_normal(N, m, eps) / 2 ** (N * m)
                worst = max(worst, frac / hoeffding_bound(N, m, eps))
    table.add("hoeffding_worst_ratio", worst, 1.0, worst <= 1.0)

    text = table.render()
    summary = {"rows": table.rows, "passed": table.ok, "artifacts": dict(sorted(artifacts.items()))}
    write("report.json", dumps(envelope("verify", config, summary, {})))
    sys.stdout.write(text)
    sys.stdout.write(f"verify: {'PASS' if table.ok else 'FAIL'}\n")
    return EXIT_OK if table.ok else EXIT_FAIL


COMMANDS = {
    "boettcher": cmd_boettcher,
    "periodic": cmd_periodic,
    "transseries": cmd_transseries,
    "brick": cmd_brick,
    "render": cmd_render,
    "dimension": cmd_dimension,
    "normality": cmd_normality,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    command = ns.command
    del ns.command
    try:
        cfg = resolve_config(ns)
        logging.basicConfig(level=logging.DEBUG if cfg.get("verbose") else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        unknown = set(cfg) - set(DEFAULTS) - UNRECORDED
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return COMMANDS[command](cfg)
    except NumericalError as exc:
        print(f"juliats: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"juliats: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
