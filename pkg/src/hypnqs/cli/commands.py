"""Implementations of the CLI subcommands."""
import os
import sys
import time
from pathlib import Path

from .._accel import backend
from ..config import load_config, preset
from ..errors import ConfigError, NumericalAbort, SizeGuardError
from ..grad import param_count
from ..hamiltonian import HeisenbergSpec
from ..io import JsonLines, load_checkpoint, read_json, save_checkpoint, write_json
from ..oracle import DENSE_MAX_N, ed_ground
from ..vmc import _INIT, infer, rng_for, train
from ..wavefunction import WavefunctionModel
from . import plot

OUTPUT_ROOT_ENV = "HYPNQS_OUTPUT_ROOT"
SWEEP_KEYS = {"r_max": "model.r_max", "l_max": "model.l_max", "lr_hyperbolic": "train.lr_hyperbolic"}


def output_root():
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def run_name(cfg):
    s = cfg.system
    return (f"{cfg.model.variant}_n{s.n}_j2-{s.j2:g}_j3-{s.j3:g}"
            f"_h{cfg.model.hidden}_s{cfg.train.seed}")


def _experiment(args):
    cfg = load_config(args.config) if args.config else preset(args.preset, getattr(args, "variant", None))
    over = {}
    if args.config and getattr(args, "variant", None):
        over["model.variant"] = args.variant
    for name, key in (("seed", "train.seed"), ("epochs", "train.epochs"),
                      ("j2", "system.j2"), ("j3", "system.j3")):
        val = getattr(args, name, None)
        if val is not None:
            over[key] = val
    return cfg.with_overrides(**over) if over else cfg


def _resolve_dir(cfg, out):
    if out:
        return Path(out)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return output_root() / run_name(cfg)


def run_experiment(cfg, run_dir, log=None):
    """Train, checkpoint and evaluate one configuration; returns the result dict."""
    run_dir = Path(run_dir)
    if (run_dir / "metrics.jsonl").exists():
        raise ConfigError(f"{run_dir} already holds a run; choose another output directory")
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / "config.json", cfg.to_dict())

    spec = cfg.system
    tc = cfg.train
    model = WavefunctionModel.initialize(cfg.model, rng_for(tc.seed, _INIT))
    meta = {"seed": tc.seed, "workers": 1}
    t0 = time.perf_counter()
    result = {"status": "running", "param_count": param_count(cfg.model.variant, cfg.model.hidden),
              "backend": backend(), "workers": 1}

    with JsonLines(run_dir / "metrics.jsonl") as metrics, JsonLines(run_dir / "timing.jsonl") as timing:
        def on_epoch(rec):
            metrics.write(rec)
            timing.write({"epoch": rec["epoch"], "wall_time": time.perf_counter() - t0})
            if log and rec["epoch"] % 50 == 0:
                e = rec["energy"]
                log(f"epoch {rec['epoch']:5d}  E = {e if e is None else f'{e:.6f}'}"
                    f"  lr = {rec['lr_euclidean']:.2e}")

        def on_checkpoint(params, rec):
            save_checkpoint(run_dir / "checkpoint_best", model.with_params(params), spec,
                            epoch=rec["epoch"], energy=rec["energy"], variance=rec["variance"], **meta)

        try:
            tr = train(spec, model, tc, on_epoch, on_checkpoint)
        except NumericalAbort as exc:
            result.update(status="aborted", message=str(exc), wall_time=time.perf_counter() - t0)
            write_json(run_dir / "result.json", result)
            raise

    save_checkpoint(run_dir / "checkpoint_last", model.with_params(tr.last_params), spec,
                    epoch=tr.epochs_run - 1, **meta)
    if tr.best_epoch < 0:
        # no epoch met the variance tolerance; fall back to the final parameters
        save_checkpoint(run_dir / "checkpoint_best", model.with_params(tr.best_params), spec,
                        epoch=tr.epochs_run - 1, energy=None, fallback=True, **meta)
    best = model.with_params(tr.best_params)
    mean, err = infer(spec, best, tc.eval_samples, tc.seed)
    result.update(
        status="ok", energy=mean, std_error=err, samples=tc.eval_samples,
        best_epoch=tr.best_epoch, best_train_energy=tr.best_energy, epochs_run=tr.epochs_run,
        stop_reason=tr.stop_reason, lr_decays=tr.decays, wall_time=time.perf_counter() - t0,
    )
    ref = cfg.reference_energy()
    if ref is None and spec.n <= DENSE_MAX_N:
        ref = ed_ground(spec).energy
        result["reference"] = "exact diagonalization"
    elif ref is not None:
        result["reference"] = "DMRG (literature)"
    if ref is not None:
        result["reference_energy"] = ref
        result["relative_error"] = abs(mean - ref) / abs(ref)
    write_json(run_dir / "result.json", result)
    return result


def _printer(args):
    return None if getattr(args, "quiet", False) else (lambda s: print(s, flush=True))


def cmd_train(args):
    cfg = _experiment(args)
    run_dir = _resolve_dir(cfg, args.out)
    res = run_experiment(cfg, run_dir, _printer(args))
    print(f"E = {res['energy']:.6f} +/- {res['std_error']:.6f}  ({res['samples']} samples)")
    if "relative_error" in res:
        print(f"reference {res['reference_energy']:.6f}, relative error {res['relative_error']:.4%}")
    print(f"run directory: {run_dir}")
    return 0


def cmd_ed(args):
    try:
        spec = HeisenbergSpec(args.n, args.j1, args.j2, args.j3)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = ed_ground(spec, args.method)
    print(f"E0 = {res.energy:.10f}")
    print(f"method = {res.method}, residual = {res.residual:.2e}")
    if args.dump:
        res.ground_vector.astype("<f8").tofile(args.dump)
        print(f"ground vector ({res.ground_vector.size} values) written to {args.dump}")
    return 0


def _checkpoint_dir(path):
    path = Path(path)
    if (path / "manifest.json").is_file():
        return path
    if (path / "checkpoint_best" / "manifest.json").is_file():
        return path / "checkpoint_best"
    raise ConfigError(f"{path} is neither a checkpoint nor a run directory")


def cmd_evaluate(args):
    ckpt = _checkpoint_dir(args.checkpoint)
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    model, spec, manifest = load_checkpoint(ckpt)
    mean, err = infer(spec, model, args.samples, args.seed)
    out = Path(args.out) if args.out else ckpt.parent / "result.json"
    doc = read_json(out) if out.is_file() else {}
    doc.setdefault("evaluations", []).append({
        "checkpoint": ckpt.name, "epoch": manifest.get("epoch"), "samples": args.samples,
        "seed": args.seed, "energy": mean, "std_error": err,
    })
    write_json(out, doc)
    print(f"E = {mean:.6f} +/- {err:.6f}  ({args.samples} samples)")
    return 0


def _parse_values(param, text):
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if param == "l_max" and tok.lower() in ("inf", "none", "null"):
            vals.append(None)
            continue
        try:
            vals.append(float(tok))
        except ValueError:
            raise ConfigError(f"bad value {tok!r} for --values") from None
    if not vals:
        raise ConfigError("--values is empty")
    return vals


def cmd_sweep(args):
    base = _experiment(args)
    values = _parse_values(args.param, args.values)
    root = Path(args.out) if args.out else output_root() / f"sweep_{run_name(base)}_{args.param}"
    root.mkdir(parents=True, exist_ok=True)
    key = SWEEP_KEYS[args.param]
    rows = []
    for v in values:
        label = "inf" if v is None else f"{v:g}"
        child = root / f"{args.param}={label}"
        row = {"value": v, "run": child.name}
        try:
            res = run_experiment(base.with_overrides(**{key: v}), child, _printer(args))
            row.update(status="ok", energy=res["energy"], std_error=res["std_error"])
        except (ConfigError, NumericalAbort, SizeGuardError) as exc:
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
        print(f"{args.param} = {label}: {row.get('energy', row.get('error'))}", flush=True)
    ok = sorted((r for r in rows if r["status"] == "ok"), key=lambda r: r["energy"])
    for rank, r in enumerate(ok, start=1):
        r["rank"] = rank
    write_json(root / "summary.json", {"param": args.param, "runs": rows})
    lines = [f"{'rank':>4}  {args.param:>14}  {'energy':>12}  {'std_error':>10}"]
    for r in ok:
        v = "inf" if r["value"] is None else f"{r['value']:g}"
        lines.append(f"{r['rank']:>4}  {v:>14}  {r['energy']:>12.6f}  {r['std_error']:>10.6f}")
    for r in rows:
        if r["status"] != "ok":
            lines.append(f"{'-':>4}  {r['value']!s:>14}  failed: {r['error']}")
    table = "\n".join(lines) + "\n"
    (root / "summary.txt").write_text(table)
    sys.stdout.write(table)
    return 0


def cmd_plot(args):
    for r in args.runs:
        if not Path(r).is_dir():
            print(f"warning: {r} is not a directory", file=sys.stderr)
    runs = [r for r in args.runs if Path(r).is_dir()]
    svg = plot.render(runs, args.style, args.title, args.zoom)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0

