"""Command-line surface.

Model specs use a mini-grammar: ``uniform:N``, ``zipf:ALPHA:N``,
``list:PATH`` (one UTF-8 password per line).  Every output embeds the
fully resolved run configuration (including the auto-generated seed),
and ``--config FILE`` re-runs a previous output bit-identically.

Exit codes: 0 success, 2 usage/domain error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import flatness as fl
from . import games, models, successnum
from .core import build_ratio_spectrum, verify_ratio_identity
from .errors import DomainError, HoneymetricsError, NumericalError

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def parse_model_spec(spec: str, role: str):
    """Build a PasswordModel from a spec string."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "uniform" and len(parts) == 2:
            return models.uniform_model(int(parts[1]), label=spec)
        if kind == "zipf" and len(parts) == 3:
            return models.zipf_model(float(parts[1]), int(parts[2]), label=spec)
        if kind == "list" and len(parts) >= 2:
            corpus = models.Corpus.from_file(":".join(parts[1:]))
            return models.train_list_model(corpus, label=spec)
    except ValueError as exc:
        raise DomainError(f"bad {role} model spec {spec!r}: {exc}") from exc
    raise DomainError(
        f"bad {role} model spec {spec!r}; expected uniform:N, zipf:ALPHA:N or list:PATH"
    )


def resolve_model_pair(p_spec: str, q_spec: str):
    """Parse P and Q, aligning vocabularies when both are list models."""
    P = parse_model_spec(p_spec, "--p")
    Q = parse_model_spec(q_spec, "--q")
    if P.vocab is not None and Q.vocab is not None:
        union = list(dict.fromkeys(P.vocab + Q.vocab))
        P = _reindex(P, union)
        Q = _reindex(Q, union)
    elif (P.vocab is None) != (Q.vocab is None):
        raise DomainError(
            "cannot mix an index-based model with a corpus-trained model: "
            "their password spaces are incomparable"
        )
    if P.n != Q.n:
        raise DomainError(f"P and Q must share a space: {P.n} vs {Q.n}")
    return P, Q


def _reindex(model, union):
    from .core import PasswordModel

    pos = {pw: i for i, pw in enumerate(union)}
    pmf = np.zeros(len(union))
    for pw, p in zip(model.vocab, model.pmf_array()):
        pmf[pos[pw]] = p
    return PasswordModel(len(union), pmf, label=model.label, vocab=tuple(union))


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy % (2 ** 63))


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def write_output(path: str | None, fmt: str, config: dict, columns: dict[str, list]):
    """Emit a column table as CSV (with a config comment) or JSON."""
    config = {k: _jsonable(v) for k, v in config.items()}
    if fmt == "json":
        payload = {"config": config,
                   "columns": {k: [_jsonable(x) for x in v] for k, v in columns.items()}}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        names = list(columns)
        lines = ["# config: " + json.dumps(config), ",".join(names)]
        for row in zip(*columns.values()):
            lines.append(",".join(_format_cell(x) for x in row))
        text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _format_cell(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def load_embedded_config(path: str) -> dict:
    """Recover the config from a previous CSV or JSON output."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return json.loads(text)["config"]
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
    raise DomainError(f"no embedded config found in {path}")


def _add_common(p: argparse.ArgumentParser, need_pair: bool = True):
    if need_pair:
        p.add_argument("--p", help="true password model spec")
        p.add_argument("--q", help="honeyword model spec")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (auto when omitted)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for Monte Carlo chunks (default: cores)")
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tolerance", type=float, default=fl.DEFAULT_QUAD_TOL,
                   help="quadrature absolute tolerance")
    p.add_argument("--config", default=None,
                   help="load flags from a previous output file (explicit flags win)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="honeymetrics",
                                 description="Honeyword security metrics: "
                                             "flatness and success-number curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("flatness", help="flatness curve epsilon(i)")
    _add_common(f)
    f.add_argument("--k", type=int, default=None, help="sweetwords per account")
    f.add_argument("--i", type=int, default=None, help="largest guess index (default k)")
    f.add_argument("--example", choices=("linear",), default=None,
                   help="use a named continuous example instead of --p/--q")
    f.add_argument("--simulate", action="store_true", help="add Monte Carlo columns")
    f.add_argument("--trials", type=int, default=1_000_000)
    f.add_argument("--brute-force", action="store_true", dest="brute_force",
                   help="add exact enumeration columns (tiny instances only)")

    s = sub.add_parser("success-number", help="success-number curve lambda_U(i)")
    _add_common(s)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--users", type=int, default=None, help="number of accounts U")
    s.add_argument("--t", type=int, default=20, help="largest failure threshold")
    s.add_argument("--samples", type=int, default=1_000_000, help="w-sample size N")
    s.add_argument("--simulate", action="store_true", help="add game-simulation columns")
    s.add_argument("--trials", type=int, default=1000, help="simulated games")
    s.add_argument("--delta-approx", action="store_true", dest="delta_approx",
                   help="add the sharp-kernel approximation column")

    r = sub.add_parser("ratio-stats", help="spectrum statistics (M, b) and comparison")
    _add_common(r)
    r.add_argument("--q2", action="append", default=[],
                   help="additional honeyword candidates to rank (repeatable)")
    r.add_argument("--k", type=int, default=20, help="k used for the epsilon(1) tiebreak")

    m = sub.add_parser("missing-mass", help="generator-unreachable password mass")
    _add_common(m, need_pair=False)
    kind = m.add_mutually_exclusive_group(required=False)
    kind.add_argument("--uniform", action="store_true")
    kind.add_argument("--zipf", action="store_true")
    kind.add_argument("--corpus", default=None, help="measure a trained list model")
    m.add_argument("--p", help="true model (required with --corpus)")
    m.add_argument("--n", type=int, default=None, help="password space size")
    m.add_argument("--s", type=int, default=None, help="training sample size |S|")
    m.add_argument("--alpha", type=float, default=0.9)
    m.add_argument("--simulate", action="store_true")
    m.add_argument("--trials", type=int, default=20, help="simulation repetitions")
    return ap


def _apply_config(args, parser_defaults):
    if not args.config:
        return args
    saved = load_embedded_config(args.config)
    for key, value in saved.items():
        if key in ("command",):
            continue
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)
    return args


def cmd_flatness(args) -> int:
    if args.example:
        model = models.linear_example()
        k = args.k or 20
        i_max = args.i or k
        curve = fl.flatness_continuous(model, k, i_max, tol=args.tolerance)
        p_label = q_label = f"example:{args.example}"
    else:
        if not (args.p and args.q and args.k):
            raise DomainError("flatness needs --p, --q and --k (or --example)")
        P, Q = resolve_model_pair(args.p, args.q)
        k = args.k
        i_max = args.i or k
        spec = build_ratio_spectrum(P, Q)
        curve = fl.flatness_discrete(spec, k, i_max)
        p_label, q_label = args.p, args.q

    seed = resolve_seed(args.seed)
    config = {"command": "flatness", "p": p_label, "q": q_label, "k": k, "i": i_max,
              "seed": seed, "trials": args.trials, "simulate": args.simulate,
              "brute_force": args.brute_force, "example": args.example,
              "tolerance": args.tolerance, "format": args.format,
              "threads": args.threads or os.cpu_count()}
    columns = {"i": curve.indices.tolist(),
               "epsilon": curve.values.tolist(),
               "method": [curve.method] * i_max}
    if args.simulate:
        if args.example:
            raise DomainError("--simulate needs discrete models, not --example")
        mc = games.monte_carlo_flatness(P, Q, k, i_max, trials=args.trials,
                                        seed=seed, threads=args.threads)
        columns["epsilon_mc"] = mc.values.tolist()
        columns["stderr_mc"] = mc.meta["stderr"].tolist()
    if args.brute_force:
        if args.example:
            raise DomainError("--brute-force needs discrete models, not --example")
        bf = games.brute_force_flatness(P, Q, k, i_max)
        columns["epsilon_bf"] = bf.values.tolist()
    write_output(args.out, args.format, config, columns)
    return 0


def cmd_success_number(args) -> int:
    if not (args.p and args.q and args.k and args.users):
        raise DomainError("success-number needs --p, --q, --k and --users")
    if args.users < 1:
        raise DomainError("--users must be >= 1")
    P, Q = resolve_model_pair(args.p, args.q)
    seed = resolve_seed(args.seed)
    U, t_max = args.users, min(args.t, args.users)
    sample = successnum.sample_w(P, Q, args.k, args.samples, seed, threads=args.threads)
    curve = successnum.lambda_curve(sample, U, t_max)

    config = {"command": "success-number", "p": args.p, "q": args.q, "k": args.k,
              "users": U, "t": t_max, "samples": args.samples, "seed": seed,
              "trials": args.trials, "simulate": args.simulate,
              "delta_approx": args.delta_approx, "format": args.format,
              "threads": args.threads or os.cpu_count()}
    columns = {"i": curve.indices.tolist(),
               "lambda": curve.values.tolist(),
               "method": [curve.method] * t_max,
               "U": [U] * t_max, "N": [args.samples] * t_max, "seed": [seed] * t_max}
    if args.delta_approx:
        table = successnum.phi_table(sample)
        delta = successnum.lambda_delta_approx(table, U, t_max)
        columns["lambda_delta"] = delta.values.tolist()
    if args.simulate:
        mc = games.monte_carlo_sn(P, Q, args.k, U, t_max, games=args.trials,
                                  seed=seed, threads=args.threads)
        columns["lambda_sim"] = mc.values.tolist()
        columns["stderr_sim"] = mc.meta["stderr"].tolist()
    write_output(args.out, args.format, config, columns)
    return 0


def cmd_ratio_stats(args) -> int:
    if not (args.p and args.q):
        raise DomainError("ratio-stats needs --p and --q")
    P, _ = resolve_model_pair(args.p, args.q)
    candidates = [args.q] + list(args.q2)
    rows = []
    for q_spec in candidates:
        P_i, Q_i = resolve_model_pair(args.p, q_spec)
        spec = build_ratio_spectrum(P_i, Q_i)
        report = verify_ratio_identity(spec)
        eps1 = fl.theorem_epsilon1_discrete(spec, args.k)
        rows.append({"q": q_spec, "M": spec.M, "b": spec.b,
                     "groups": spec.group_count,
                     "identity_deviation": report.max_rel_deviation,
                     "epsilon1": eps1})
    # Smaller (M, b) is the better generator; epsilon(1) breaks ties.
    rows.sort(key=lambda r: (r["M"], r["b"], r["epsilon1"]))
    config = {"command": "ratio-stats", "p": args.p, "q": args.q,
              "q2": list(args.q2), "k": args.k, "format": args.format}
    columns = {key: [r[key] for r in rows] for key in rows[0]}
    write_output(args.out, args.format, config, columns)
    return 0


def cmd_missing_mass(args) -> int:
    seed = resolve_seed(args.seed)
    if sum((bool(args.uniform), bool(args.zipf), args.corpus is not None)) != 1:
        raise DomainError("choose exactly one of --uniform, --zipf, --corpus")
    if args.corpus:
        if not args.p:
            raise DomainError("--corpus needs --p for the ground-truth model")
        P, Q = resolve_model_pair(args.p, f"list:{args.corpus}")
        spec = build_ratio_spectrum(P, Q)
        config = {"command": "missing-mass", "corpus": args.corpus, "p": args.p,
                  "seed": seed, "format": args.format}
        write_output(args.out, args.format, config, {"b_empirical": [spec.b]})
        return 0

    if args.n is None or args.s is None:
        raise DomainError("missing-mass needs --n and --s")
    if args.uniform:
        est = fl.uniform_missing_mass(args.n, args.s)
        model = models.uniform_model(args.n)
    else:
        est = fl.zipf_missing_mass(args.alpha, args.n, args.s)
        model = models.zipf_model(args.alpha, args.n)
    config = {"command": "missing-mass",
              "uniform": bool(args.uniform), "zipf": bool(args.zipf),
              "n": args.n, "s": args.s,
              "alpha": args.alpha if args.zipf else None,
              "seed": seed, "trials": args.trials, "simulate": args.simulate,
              "format": args.format}
    columns = {"direct": [est.direct], "approx": [est.approx],
               "series_terms": [est.terms_used if est.terms_used is not None else ""]}
    if args.simulate:
        reps = np.empty(args.trials)
        pmf = model.pmf_array()
        for rep in range(args.trials):
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence(seed, spawn_key=(rep,))))
            drawn = models.sample(model, rng, args.s)
            seen = np.zeros(args.n, dtype=bool)
            seen[drawn] = True
            reps[rep] = pmf[~seen].sum()
        columns["simulated_mean"] = [float(reps.mean())]
        columns["simulated_sigma"] = [float(reps.std(ddof=1) / np.sqrt(args.trials))]
    write_output(args.out, args.format, config, columns)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {a.dest: a.default for a in parser._subparsers._group_actions[0]
                .choices[args.command]._actions}
    try:
        args = _apply_config(args, defaults)
        if args.command == "flatness":
            return cmd_flatness(args)
        if args.command == "success-number":
            return cmd_success_number(args)
        if args.command == "ratio-stats":
            return cmd_ratio_stats(args)
        if args.command == "missing-mass":
            return cmd_missing_mass(args)
        raise DomainError(f"unknown command {args.command!r}")
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, HoneymetricsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
