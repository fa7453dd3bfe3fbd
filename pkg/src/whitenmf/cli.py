"""Command-line surface: synth | fit | identify | eval | diagnose."""

from __future__ import annotations

import functools
import json
import os
import sys

import click
import numpy as np

from .identify import build_model, evaluate
from .identify import identify as identify_signal
from .model_io import load_model, save_model
from .signals import (BenchmarkSpec, Ensemble, load_ensemble,
                      mean_template_correlation, save_ensemble,
                      synth_benchmark)
from .snmf import SolverConfig
from .whitening import (METHODS, cross_correlation, diagonality,
                        estimate_moments, whiten)


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    return wrapper


def _write_matrix(path, matrix):
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _solver_options(fn):
    fn = click.option("--beta", default=1.0, show_default=True,
                      help="beta-divergence exponent")(fn)
    fn = click.option("--lambda", "sparsity", default=0.1, show_default=True,
                      help="sparsity weight on the activations")(fn)
    fn = click.option("--max-iters", default=500, show_default=True)(fn)
    fn = click.option("--tol", default=1e-6, show_default=True,
                      help="relative objective-change stopping tolerance")(fn)
    return fn


@click.group()
def main():
    """Whitening-preprocessed sparse NMF for buried-object identification."""


@main.command()
@click.option("--classes", default=12, show_default=True)
@click.option("--per-class", default=2, show_default=True,
              help="traces per class; one goes to train, the rest to test")
@click.option("--rho", default=0.95, show_default=True,
              help="target cross-correlation between class templates")
@click.option("--noise", default=0.01, show_default=True)
@click.option("--bounce", default=5.0, show_default=True,
              help="ground-bounce amplitude")
@click.option("--seed", default=1234, show_default=True)
@click.option("--out-dir", default=".", show_default=True,
              type=click.Path(file_okay=False))
@_fail_on_error
def synth(classes, per_class, rho, noise, bounce, seed, out_dir):
    """Generate train/test benchmark ensembles as CSV."""
    try:
        spec = BenchmarkSpec(n_classes=classes, traces_per_class=per_class,
                             similarity=rho, noise_sigma=noise,
                             ground_bounce_amplitude=bounce, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    train, test = synth_benchmark(spec)
    os.makedirs(out_dir, exist_ok=True)
    train_path = os.path.join(out_dir, "train.csv")
    test_path = os.path.join(out_dir, "test.csv")
    save_ensemble(train, train_path)
    save_ensemble(test, test_path)
    click.echo(f"seed: {seed}")
    click.echo(f"classes: {classes}  train: {train.d}  test: {test.d}")
    click.echo("mean template correlation: "
               f"{mean_template_correlation(spec):.4f}")
    click.echo(f"wrote {train_path} and {test_path}")


@main.command()
@click.argument("train", type=click.Path(exists=True, dir_okay=False))
@click.argument("model_out", type=click.Path(dir_okay=False))
@click.option("--method", default="zca", show_default=True,
              type=click.Choice(METHODS))
@click.option("--eig-floor", default=1e-10, show_default=True)
@_solver_options
@_fail_on_error
def fit(train, model_out, method, eig_floor, beta, sparsity, max_iters, tol):
    """Fit an identification model on a labeled reference ensemble."""
    refs = load_ensemble(train)
    solver = SolverConfig(beta=beta, sparsity=sparsity,
                          max_iters=max_iters, rel_tol=tol)
    model = build_model(refs, method, solver, eig_floor)
    save_model(model, model_out)
    before = diagonality(model.whitening.moments.cov)
    after = diagonality(
        estimate_moments(whiten(refs, model.whitening)).cov)
    click.echo(f"atoms: {model.dictionary.n_atoms}")
    click.echo(f"diagonality before: {before:.6g}  after: {after:.6g}")
    click.echo(f"wrote {model_out}")


@main.command("identify")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("queries", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-whiten", is_flag=True,
              help="skip whitening (ablation arm)")
@click.option("--json", "as_json", is_flag=True,
              help="emit one JSON object per query")
@_fail_on_error
def identify_cmd(model_path, queries, no_whiten, as_json):
    """Identify every query signal in a CSV against the model dictionary."""
    model = load_model(model_path)
    ensemble = load_ensemble(queries)
    for s in ensemble.signals:
        result = identify_signal(s, model, use_whitening=not no_whiten)
        top3 = sorted(result.scores.items(),
                      key=lambda kv: (-kv[1], kv[0]))[:3]
        if as_json:
            click.echo(json.dumps({
                "id": s.id, "winner": result.winner,
                "margin": result.margin,
                "top3": [{"label": lab, "score": val} for lab, val in top3],
            }))
        else:
            shown = "  ".join(f"{lab}={val:.6g}" for lab, val in top3)
            click.echo(f"{s.id}\t{result.winner}\t"
                       f"margin={result.margin:.6f}\t{shown}")


@main.command("eval")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("test", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-whiten", is_flag=True)
@click.option("--confusion-out", default="confusion.csv", show_default=True,
              type=click.Path(dir_okay=False))
@_fail_on_error
def eval_cmd(model_path, test, no_whiten, confusion_out):
    """Evaluate the model on a labeled test ensemble."""
    model = load_model(model_path)
    ensemble = load_ensemble(test)
    report = evaluate(ensemble, model, use_whitening=not no_whiten)
    with open(confusion_out, "w", encoding="utf-8") as fh:
        fh.write("true\\pred," + ",".join(report.labels) + "\n")
        for lab, row in zip(report.labels, report.confusion):
            fh.write(lab + "," + ",".join(str(v) for v in row) + "\n")
    click.echo(f"accuracy: {report.accuracy:.6f}")
    click.echo(f"wrote {confusion_out}")


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@_fail_on_error
def diagnose(model_path, out_dir):
    """Export covariance-before/after and cross-correlation matrices."""
    model = load_model(model_path)
    refs = model.references
    whitened = whiten(refs, model.whitening)
    cov_before = model.whitening.moments.cov
    cov_after = estimate_moments(whitened).cov
    os.makedirs(out_dir, exist_ok=True)
    _write_matrix(os.path.join(out_dir, "cov_before.csv"), cov_before)
    _write_matrix(os.path.join(out_dir, "cov_after.csv"), cov_after)
    _write_matrix(os.path.join(out_dir, "crosscorr.csv"),
                  cross_correlation(refs, whitened))
    click.echo(f"diagonality before: {diagonality(cov_before):.6g}  "
               f"after: {diagonality(cov_after):.6g}")
    click.echo(f"wrote cov_before.csv, cov_after.csv, crosscorr.csv "
               f"in {out_dir}")


if __name__ == "__main__":
    main()
