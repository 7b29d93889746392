"""Command-line front end: solve, verify, and the infinite-energy demo.

Exit codes are a stable contract: 0 success, 1 verify failures, 2 bad
configuration, 3 incompatible Neumann data, 4 numerical failure.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Bie2dError,
    ConfigError,
    IncompatibleData,
    InvalidGeometry,
)
from .geometry import CurveSpec, build_mesh, locate_points, topology_of
from .operators import operator_set
from .distributions import dist_normal_derivative, pair_from_dict
from .solvers import (
    dirichlet_exterior,
    dirichlet_exterior_via_decomposition,
    dirichlet_interior,
    dirichlet_interior_via_decomposition,
    neumann_exterior,
    neumann_interior,
)
from .verify import DEFAULT_SEED, run_verify

PROBLEMS = (
    "dirichlet-int",
    "dirichlet-ext",
    "neumann-int",
    "neumann-ext",
    "verify",
    "demo-hadamard",
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_INCOMPATIBLE = 3
EXIT_NUMERICAL = 4


@dataclass
class RunConfig:
    """Validated run description assembled from the config file and CLI flags."""

    config_path: str | None = None
    components: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    problem: str | None = None
    data: str | None = None
    n_override: int | None = None
    out_dir: str | None = None
    tol: float = 1e-7
    tol_overrides: dict = field(default_factory=dict)
    alpha: float | None = None
    seed: int = DEFAULT_SEED

    def validate(self):
        if self.problem is not None and self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.data is not None:
            kind = self.data.split(":", 1)[0]
            if kind == "hadamard" and self.problem not in (
                "neumann-int",
                "dirichlet-int",
                None,
            ):
                raise ConfigError(
                    f"data spec 'hadamard' is only valid with neumann-int or "
                    f"dirichlet-int, not {self.problem!r}"
                )
        return self

    def node_counts(self):
        if self.n_override is not None:
            return [self.n_override] * len(self.components)
        return list(self.nodes)

    def build_mesh(self):
        try:
            return build_mesh(self.components, self.node_counts())
        except InvalidGeometry as exc:
            raise ConfigError(str(exc)) from exc


def _curve_from_dict(idx, entry):
    if not isinstance(entry, dict):
        raise ConfigError(f"components[{idx}] is not an object")
    kind = entry.get("kind")
    if kind not in ("circle", "ellipse", "fourier"):
        raise ConfigError(f"components[{idx}].kind: unknown kind {kind!r}")
    orientation = entry.get("orientation", "positive")
    if orientation not in ("positive", "negative"):
        raise ConfigError(
            f"components[{idx}].orientation: got {orientation!r}, "
            "expected 'positive' or 'negative'"
        )
    center = tuple(entry.get("center", (0.0, 0.0)))
    try:
        if kind == "circle":
            spec = CurveSpec(
                "circle",
                center=center,
                radius=float(entry["radius"]),
                orientation=orientation,
            )
        elif kind == "ellipse":
            spec = CurveSpec(
                "ellipse",
                center=center,
                axes=tuple(entry["axes"]),
                orientation=orientation,
            )
        else:
            spec = CurveSpec(
                "fourier",
                center=center,
                cos_x=tuple(entry.get("cos_x", ())),
                sin_x=tuple(entry.get("sin_x", ())),
                cos_y=tuple(entry.get("cos_y", ())),
                sin_y=tuple(entry.get("sin_y", ())),
                orientation=orientation,
            )
    except KeyError as exc:
        raise ConfigError(f"components[{idx}]: missing field {exc}") from exc
    except (TypeError, ValueError, InvalidGeometry) as exc:
        raise ConfigError(f"components[{idx}]: {exc}") from exc
    nodes = int(entry.get("nodes", 128))
    return spec, nodes


def load_config(path, **overrides):
    """Parse a domain config file into a RunConfig; CLI flags override it."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON (line {exc.lineno}, col {exc.colno})"
        ) from exc
    if "components" not in raw or not raw["components"]:
        raise ConfigError("config needs a nonempty 'components' list")
    comps, nodes = [], []
    for idx, entry in enumerate(raw["components"]):
        spec, nc = _curve_from_dict(idx, entry)
        comps.append(spec)
        nodes.append(nc)
    cfg = RunConfig(
        config_path=path,
        components=comps,
        nodes=nodes,
        problem=raw.get("problem"),
        data=raw.get("data"),
        out_dir=raw.get("out"),
        tol=float(raw.get("tol", 1e-7)),
        tol_overrides=dict(raw.get("tol_overrides", {})),
        alpha=raw.get("alpha"),  # metadata only, never used in computation
        seed=int(raw.get("seed", DEFAULT_SEED)),
    )
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def build_data(cfg, mesh):
    """Materialize the data spec as a grid function or pair distribution."""
    if cfg.data is None:
        raise ConfigError("this problem needs a --data specification")
    name, _, arg = cfg.data.partition(":")
    if name == "constant":
        try:
            value = float(arg) if arg else 1.0
        except ValueError as exc:
            raise ConfigError(f"constant data needs a number, got {arg!r}") from exc
        return np.full(mesh.n, value)
    if name == "fourier":
        try:
            k = int(arg) if arg else 1
        except ValueError as exc:
            raise ConfigError(f"fourier data needs a mode index, got {arg!r}") from exc
        return np.cos(k * mesh.t)
    if name == "indicator":
        try:
            j = int(arg) if arg else 0
        except ValueError as exc:
            raise ConfigError(f"indicator data needs a curve index, got {arg!r}") from exc
        if not 0 <= j < mesh.n_components:
            raise ConfigError(f"indicator curve index {j} out of range")
        out = np.zeros(mesh.n)
        out[mesh.component_slice(j)] = 1.0
        return out
    if name == "hadamard":
        try:
            terms = int(arg) if arg else 4
        except ValueError as exc:
            raise ConfigError(f"hadamard data needs a term count, got {arg!r}") from exc
        _require_resolution(terms, min(mesh.n_per_comp))
        trace = hadamard_trace(mesh.t, terms)
        if cfg.problem == "dirichlet-int":
            return trace
        return dist_normal_derivative(mesh, trace, "plus")
    if name == "csv":
        try:
            values = np.loadtxt(arg, delimiter=",", ndmin=1)
        except OSError as exc:
            raise ConfigError(f"cannot read data file {arg}: {exc}") from exc
        if values.shape != (mesh.n,):
            raise ConfigError(
                f"data file has {values.shape[0]} samples, mesh has {mesh.n} nodes"
            )
        return values
    if name == "pairjson":
        try:
            with open(arg) as fh:
                return pair_from_dict(mesh, json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read pair file {arg}: {exc}") from exc
    raise ConfigError(f"unknown data spec {cfg.data!r}")


def hadamard_trace(t, terms):
    """Lacunary trace sum_{k=1..K} k^-2 cos(2^k t)."""
    out = np.zeros_like(t)
    for k in range(1, terms + 1):
        out += k**-2.0 * np.cos(2.0**k * t)
    return out


def _require_resolution(terms, n):
    needed = 8 * 2**terms
    if n < needed:
        raise ConfigError(
            f"hadamard data with {terms} terms needs at least {needed} nodes, got {n}"
        )


@dataclass
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int = 41
    ny: int = 41

    def points(self):
        xs = np.linspace(self.xmin, self.xmax, self.nx)
        ys = np.linspace(self.ymin, self.ymax, self.ny)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=-1)


def default_grid(mesh, margin=0.75):
    lo = np.min(mesh.x, axis=0) - margin
    hi = np.max(mesh.x, axis=0) + margin
    return GridSpec(lo[0], hi[0], lo[1], hi[1])


def write_field_csv(fld, grid, path):
    """Evaluate a field on a grid and write x,y,u rows (17 significant digits).

    Points outside the field's region or inside the near-boundary band get
    an empty value cell.
    """
    pts = grid.points()
    mesh = fld.mesh
    locs = locate_points(mesh, topology_of(mesh), pts)
    usable = np.array([loc.kind == fld.region for loc in locs])
    values = np.full(pts.shape[0], np.nan)
    if usable.any():
        values[usable] = fld.eval_unchecked(pts[usable])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "u"])
        for (px, py), ok, val in zip(pts, usable, values):
            writer.writerow(
                ["%.17g" % px, "%.17g" % py, "%.17g" % val if ok else ""]
            )


def read_field_csv(path):
    """Read back a field CSV; empty cells become NaN."""
    xs, ys, us = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
            us.append(float(row[2]) if row[2] else np.nan)
    return np.array(xs), np.array(ys), np.array(us)


_SOLVERS = {
    "dirichlet-int": dirichlet_interior,
    "dirichlet-ext": dirichlet_exterior,
    "neumann-int": neumann_interior,
    "neumann-ext": neumann_exterior,
}


def cmd_solve(cfg, out_prefix="solve"):
    """Run one boundary value problem; write report JSON and field CSV."""
    if cfg.problem not in _SOLVERS:
        raise ConfigError(f"problem {cfg.problem!r} is not a solve problem")
    mesh = cfg.build_mesh()
    data = build_data(cfg, mesh)
    report = _SOLVERS[cfg.problem](mesh, data)
    if cfg.problem == "dirichlet-int":
        cross = dirichlet_interior_via_decomposition(mesh, np.asarray(data, dtype=float))
        probe = _cross_check_probe(mesh, report.field)
        if probe is not None:
            diff = abs(
                report.field.eval_unchecked(probe[None, :])[0]
                - cross.field.eval_unchecked(probe[None, :])[0]
            )
            report.residuals["cross_solver"] = diff
    elif cfg.problem == "dirichlet-ext":
        cross = dirichlet_exterior_via_decomposition(mesh, np.asarray(data, dtype=float))
        probe = _cross_check_probe(mesh, report.field)
        if probe is not None:
            diff = abs(
                report.field.eval_unchecked(probe[None, :])[0]
                - cross.field.eval_unchecked(probe[None, :])[0]
            )
            report.residuals["cross_solver"] = diff
    out_dir = cfg.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, f"{out_prefix}_report.json")
    csv_path = os.path.join(out_dir, f"{out_prefix}_field.csv")
    with open(json_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_field_csv(report.field, default_grid(mesh), csv_path)
    print(f"report: {json_path}")
    print(f"field:  {csv_path}")
    worst = max(report.residuals.values(), default=0.0)
    print(f"max residual: {worst:.3e}")
    return EXIT_OK


def _cross_check_probe(mesh, fld):
    from .verify import probe_points

    pts = probe_points(mesh, fld.region, count=1)
    return pts[0] if len(pts) else None


def cmd_verify(cfg, negative_control=False):
    """Run the identity suite; one row per check and geometry."""
    meshes = None
    if cfg is not None and cfg.components:
        n = cfg.n_override
        counts = cfg.node_counts()
        meshes = {"config": build_mesh(cfg.components, counts)}
        n_report = n or max(counts)
    else:
        n_report = (cfg.n_override if cfg else None) or 256
    report = run_verify(
        meshes=meshes,
        n=n_report,
        seed=cfg.seed if cfg else DEFAULT_SEED,
        tol_overrides=cfg.tol_overrides if cfg else None,
        negative_control=negative_control,
    )
    out_dir = (cfg.out_dir if cfg else None) or "."
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "verify_report.json")
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for row in report.rows:
        flag = "PASS" if row.passed else "FAIL"
        print(
            f"{flag} {row.geometry:10s} {row.name:24s} "
            f"residual={row.residual:.3e} tol={row.tol:.1e}"
        )
    print(f"report: {path}")
    print("overall:", "PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def cmd_demo_hadamard(terms, n, out_dir="."):
    """Neumann solve of the lacunary trace plus its divergent energy table.

    Builds the trace g_K, takes its distributional normal derivative,
    solves the interior Neumann problem with it, and reports the recovery
    error against the analytic partial sum on the r = 1/2 ring together
    with the Dirichlet energies of the partial sums (closed form pi
    sum 2^k / k^4, and the same number recomputed through the discrete
    Dirichlet-to-Neumann pairing).
    """
    _require_resolution(terms, n)
    mesh = build_mesh([CurveSpec("circle", radius=1.0)], [n])
    ops = operator_set(mesh)
    trace = hadamard_trace(mesh.t, terms)
    tau = dist_normal_derivative(mesh, trace, "plus")
    report = neumann_interior(mesh, tau)

    theta = 2.0 * np.pi * np.arange(max(64, 4 * 2**terms)) / max(64, 4 * 2**terms)
    ring = 0.5 * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    u_ring = report.field.eval_unchecked(ring)
    exact = np.zeros_like(theta)
    for k in range(1, terms + 1):
        exact += k**-2.0 * 0.5 ** (2.0**k) * np.cos(2.0**k * theta)
    shift = float(np.mean(u_ring - exact))
    recovery = float(np.max(np.abs(u_ring - exact - shift)))

    rows = []
    closed_total = disc_total = 0.0
    for k in range(1, terms + 1):
        closed = np.pi * 2.0**k / k**4.0
        mode = k**-2.0 * np.cos(2.0**k * mesh.t)
        disc = float(np.dot(mesh.weights * mode, ops.S_plus @ mode))
        closed_total += closed
        disc_total += disc
        rows.append(
            {
                "k": k,
                "energy_closed_form": closed,
                "energy_partial_sum": closed_total,
                "energy_discrete_partial_sum": disc_total,
            }
        )

    out = {
        "terms": terms,
        "n": n,
        "recovery_sup_error_at_half_radius": recovery,
        "additive_constant": shift,
        "energy_table": rows,
        "neumann_residuals": {k: float(v) for k, v in report.residuals.items()},
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "hadamard_report.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(out_dir, "hadamard_energy.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "energy_closed_form", "energy_partial_sum",
                         "energy_discrete_partial_sum"])
        for row in rows:
            writer.writerow(
                ["%d" % row["k"]]
                + ["%.17g" % row[c] for c in
                   ("energy_closed_form", "energy_partial_sum",
                    "energy_discrete_partial_sum")]
            )
    print(f"recovery sup error at r=1/2: {recovery:.3e}")
    print("energy partial sums:", ", ".join("%.6f" % r["energy_partial_sum"] for r in rows))
    print(f"report: {path}")
    return EXIT_OK, out


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bie2d",
        description="2-D layer-potential toolkit: boundary value problems and identity checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a boundary value problem")
    ps.add_argument("--config", required=True, help="domain config JSON")
    ps.add_argument("--problem", required=True, choices=sorted(_SOLVERS))
    ps.add_argument("--data", required=True,
                    help="constant:C | fourier:K | indicator:J | hadamard:K | csv:PATH | pairjson:PATH")
    ps.add_argument("--n", type=int, default=None, help="override all node counts")
    ps.add_argument("--out", default=None, help="output directory")

    pv = sub.add_parser("verify", help="run the identity suite")
    pv.add_argument("--config", default=None,
                    help="domain config JSON (default: disk, ellipse, annulus)")
    pv.add_argument("--n", type=int, default=None, help="nodes per component")
    pv.add_argument("--out", default=None, help="output directory")
    pv.add_argument("--negative-control", action="store_true",
                    help=argparse.SUPPRESS)

    pd = sub.add_parser("demo-hadamard", help="infinite-energy Neumann demo")
    pd.add_argument("--terms", type=int, required=True, help="number of lacunary modes")
    pd.add_argument("--n", type=int, default=256, help="mesh nodes")
    pd.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            cfg = load_config(
                args.config, problem=args.problem, data=args.data,
                n_override=args.n, out_dir=args.out,
            )
            return cmd_solve(cfg)
        if args.command == "verify":
            cfg = None
            if args.config:
                cfg = load_config(args.config, n_override=args.n, out_dir=args.out)
            elif args.n or args.out:
                cfg = RunConfig(n_override=args.n, out_dir=args.out)
            return cmd_verify(cfg, negative_control=args.negative_control)
        if args.command == "demo-hadamard":
            code, _ = cmd_demo_hadamard(args.terms, args.n, args.out or ".")
            return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IncompatibleData as exc:
        print(f"incompatible data: {exc}", file=sys.stderr)
        for i, val in enumerate(exc.pairings):
            print(f"  component pairing [{i}] = {val:.12e}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except Bie2dError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
