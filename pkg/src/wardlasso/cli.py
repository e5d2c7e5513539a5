"""Command-line interface: ``wardlasso {simulate,fit,eval,sweep,ablation,replay}``.

Every command that draws random numbers requires ``--seed``. Each run
writes a JSON manifest listing its parameters and the SHA-256 digest of
every input and output file; ``replay`` re-runs a manifest and checks that
the outputs come out identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    METHODS,
    ablation_experiment,
    method_scores,
    select_parameters,
    sweep_experiment,
)
from .io import (
    read_csv,
    read_index_set,
    read_matrix,
    read_vector,
    write_binary,
    write_csv,
    write_index_set,
    write_vector,
)
from .metrics import pr_and_roc
from .randomization import ClusterSource
from .synthetic import SimSpec, binarize_target, generate_dataset


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list
    params: dict
    seed: int | None
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    duration_s: float = 0.0

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


class _Run:
    """Collects inputs and outputs of one command, then writes its manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.start = time.perf_counter()

    def input(self, path):
        path = Path(path)
        self.inputs.append(path)
        return path

    def output(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(path)
        return path

    def finish(self, manifest_path):
        params = {k: v for k, v in vars(self.args).items() if k != "func"}
        for p in self.outputs:
            if not p.is_file():
                raise RuntimeError(f"declared output {p} was not written")
        m = RunManifest(
            command=self.args.command,
            argv=self.argv,
            params=params,
            seed=params.get("seed"),
            inputs={str(p): sha256(p) for p in self.inputs},
            outputs={str(p): sha256(p) for p in self.outputs},
            duration_s=time.perf_counter() - self.start,
        )
        m.write(manifest_path)
        return m


# -- argument helpers -------------------------------------------------------

def _dims(text):
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 32x64, got {text!r}")
    return (r, c)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _methods(text):
    out = [m for m in text.split(",") if m]
    for m in out:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {m!r}; choose from {METHODS}")
    return out


def _add_spec_flags(p, defaults=SimSpec()):
    p.add_argument("--n", type=int, default=defaults.n)
    p.add_argument("--k", type=int, default=defaults.k)
    p.add_argument("--dims", type=_dims, default=defaults.dims, help="grid shape, e.g. 32x64")
    p.add_argument("--beta-min", type=float, default=defaults.beta_min)
    p.add_argument("--evr", type=float, default=defaults.evr,
                   help="fraction of the target variance explained by the signal")


def _spec_from(args, **over):
    kw = dict(dims=args.dims, n=args.n, k=args.k, beta_min=args.beta_min, evr=args.evr,
              seed=args.seed)
    kw.update(over)
    return SimSpec(**kw)


# -- commands ---------------------------------------------------------------

def cmd_simulate(args, run):
    spec = _spec_from(args, c=args.c, sigma=args.sigma)
    X, y, truth, _ = generate_dataset(spec)
    out = Path(args.out)
    write_binary(run.output(out / "X.bin"), X)
    if args.binarize:
        y = binarize_target(y)
    write_csv(run.output(out / "y.csv"), y[:, None])
    write_vector(run.output(out / "beta.csv"), truth.beta, "beta")
    write_index_set(run.output(out / "support.csv"), truth.support)
    sidecar = dict(spec.to_dict(), p=spec.p, cluster_size=truth.cluster_size,
                   smoothing=truth.smoothing, binarized=bool(args.binarize))
    run.output(out / "simspec.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return out / "manifest.json"


def _load_data(args, run):
    dims = args.dims
    if args.data is not None:
        src = Path(args.data)
        if src.is_dir():
            X = read_matrix(run.input(src / "X.bin"))
            y = read_csv(run.input(src / "y.csv"))
            spec_path = src / "simspec.json"
            if dims is None and spec_path.is_file():
                dims = tuple(json.loads(run.input(spec_path).read_text())["dims"])
        else:
            X, y = read_csv(run.input(src), has_target=True)
    else:
        if args.X is None or args.y is None:
            raise ValueError("give either --data or both --X and --y")
        X = read_matrix(run.input(args.X))
        y = read_csv(run.input(args.y))
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 2:
        if y.shape[1] != 1:
            raise ValueError(f"target file must have one column, got {y.shape[1]}")
        y = y[:, 0]
    if args.simspec is not None and dims is None:
        dims = tuple(json.loads(run.input(args.simspec).read_text())["dims"])
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} values")
    if dims is not None and dims[0] * dims[1] != X.shape[1]:
        raise ValueError(f"dims {dims[0]}x{dims[1]} do not match p={X.shape[1]}")
    if args.loss == "logistic" and args.binarize:
        y = binarize_target(y)
    return X, y, dims


def cmd_fit(args, run):
    X, y, dims = _load_data(args, run)
    method = args.method
    if method == "randomized-ward-lasso" and dims is None:
        raise ValueError("randomized-ward-lasso needs --dims or --simspec")
    out = Path(args.out)
    stem = out.with_suffix("")
    if args.cv:
        params, report = select_parameters(method, X, y, dims, seed=args.seed,
                                           n_folds=args.folds, loss=args.loss)
        if report is not None:
            run.output(stem.with_name(stem.name + ".cv.json")).write_text(report.to_json() + "\n")
    else:
        params = {}
        if method != "f-test":
            if args.lam is None:
                raise ValueError(f"{method} needs --lambda (or --cv)")
            params["lam"] = args.lam
        if method == "enet":
            params["rho"] = args.rho
        if method == "randomized-ward-lasso":
            if args.q is None:
                raise ValueError("randomized-ward-lasso needs --q (or --cv)")
            params["n_clusters"] = args.q
    scores = method_scores(method, X, y, params, dims, seed=args.seed, n_resampling=args.l,
                           n_jobs=args.jobs, source=ClusterSource(args.source),
                           loss=args.loss, alpha=args.alpha, pi=args.pi)
    write_vector(run.output(out), scores, "score")
    args.selected_params = {k: (v.item() if isinstance(v, np.generic) else v)
                            for k, v in params.items()}
    return Path(args.manifest) if args.manifest else stem.with_name(stem.name + ".manifest.json")


def _read_truth(path, p):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if header == ["feature"]:
        support = read_index_set(path)
        if support.size and (support.min() < 0 or support.max() >= p):
            raise ValueError(f"support indices in {path} fall outside 0..{p - 1}")
        return support
    _, beta = read_vector(path)
    if beta.shape[0] != p:
        raise ValueError(f"scores have p={p} but {path} has p={beta.shape[0]}")
    return beta != 0


def cmd_eval(args, run):
    _, scores = read_vector(run.input(args.scores))
    truth = _read_truth(run.input(args.truth), scores.shape[0])
    curve = pr_and_roc(scores, truth)
    print(f"auc_pr={curve.auc_pr!r} auc_roc={curve.auc_roc!r}")
    if args.out:
        out = run.output(args.out)
        out.write_text(json.dumps({"auc_pr": curve.auc_pr, "auc_roc": curve.auc_roc}) + "\n")
        return Path(args.manifest) if args.manifest else out.with_suffix(".manifest.json")
    return Path(args.manifest) if args.manifest else None


def cmd_sweep(args, run):
    template = _spec_from(args, c=args.c[0], sigma=0.0)
    result = sweep_experiment(template, args.c, args.sigma, methods=args.methods,
                              n_seeds=args.seeds, n_resampling=args.l, seed=args.seed,
                              n_jobs=args.jobs, n_folds=args.folds)
    out = Path(args.out)
    run.output(out / "sweep.csv").write_text(result.to_csv())
    run.output(out / "sweep.json").write_text(result.to_json() + "\n")
    if args.svg:
        from .plotting import sweep_svg

        sweep_svg(result, run.output(args.svg))
    return out / "manifest.json"


def cmd_ablation(args, run):
    spec = _spec_from(args, c=args.c, sigma=args.sigma)
    params = None
    if (args.lam is None) != (args.q is None):
        raise ValueError("give both --lambda and --q, or neither to cross-validate")
    if args.lam is not None:
        params = {"lam": args.lam, "n_clusters": args.q}
    results, params = ablation_experiment(spec, n_seeds=args.seeds, n_resampling=args.l,
                                          params=params, seed=args.seed, n_jobs=args.jobs,
                                          n_folds=args.folds)
    out = Path(args.out)
    payload = {"params": {k: float(v) for k, v in params.items()}, "modes": results}
    run.output(out / "ablation.json").write_text(json.dumps(payload, indent=2) + "\n")
    for mode, r in results.items():
        print(f"{mode}: auc_roc={r['mean']:.4f} +/- {r['se']:.4f}")
    return out / "manifest.json"


def cmd_replay(args, run):
    manifest = json.loads(run.input(args.manifest).read_text())
    expected = manifest["outputs"]
    code = main(manifest["argv"])
    if code != 0:
        return code
    bad = [p for p, d in expected.items() if not Path(p).is_file() or sha256(p) != d]
    for p in bad:
        print(f"mismatch: {p}", file=sys.stderr)
    print("replay: " + ("identical" if not bad else f"{len(bad)} output(s) differ"))
    return 1 if bad else 0


# -- parser -----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="wardlasso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    _add_spec_flags(p)
    p.add_argument("--c", type=int, default=SimSpec().c, help="cluster (patch) size")
    p.add_argument("--sigma", type=float, default=SimSpec().sigma, help="smoothing width")
    p.add_argument("--binarize", action="store_true", help="median-split y into -1/+1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="sim")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="compute per-feature scores")
    p.add_argument("method", choices=METHODS)
    p.add_argument("--data", help="simulate output directory, or CSV with a final target column")
    p.add_argument("--X", help="design matrix (binary or CSV)")
    p.add_argument("--y", help="target CSV, one value per row")
    p.add_argument("--simspec", help="JSON sidecar providing the grid shape")
    p.add_argument("--dims", type=_dims, default=None)
    p.add_argument("--loss", choices=("square", "logistic"), default="square")
    p.add_argument("--binarize", action="store_true",
                   help="median-split a continuous target before a logistic fit")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--rho", type=float, default=0.5, help="l1 share of the enet penalty")
    p.add_argument("--q", type=int, default=None, help="number of clusters")
    p.add_argument("--l", type=int, default=200, help="number of resamplings")
    p.add_argument("--alpha", type=float, default=0.5, help="rescaling strength")
    p.add_argument("--pi", type=float, default=0.75, help="subsample fraction")
    p.add_argument("--source", choices=[s.value for s in ClusterSource],
                   default=ClusterSource.RANDOMIZED.value)
    p.add_argument("--cv", action="store_true", help="cross-validate the parameters")
    p.add_argument("--folds", type=int, default=6)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="scores.csv")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="PR and ROC AUC of a scores file")
    p.add_argument("--scores", required=True)
    p.add_argument("--truth", required=True, help="beta.csv or support.csv")
    p.add_argument("--out", default=None, help="optional JSON with both AUCs")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="recovery over cluster size x smoothing")
    _add_spec_flags(p)
    p.add_argument("--c", type=_int_list, default=[8, 16, 32])
    p.add_argument("--sigma", type=_float_list, default=[0.0, 1.0, 2.0])
    p.add_argument("--methods", type=_methods, default=list(METHODS))
    p.add_argument("--seeds", type=int, default=5, help="datasets per cell")
    p.add_argument("--l", type=int, default=200)
    p.add_argument("--folds", type=int, default=6)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep")
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablation", help="compare cluster sources")
    _add_spec_flags(p)
    p.add_argument("--c", type=int, default=16)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--l", type=int, default=200)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--folds", type=int, default=6)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="ablation")
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    run = _Run(args, argv)
    try:
        res = args.func(args, run)
        if isinstance(res, int):
            return res
        if res is not None:
            run.finish(res)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"wardlasso {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
