"""Command-line front end over the state/ensemble file formats.

Reports are deterministic text: one record per line, fixed key order,
floats at 12 significant digits; `--json` switches to one JSON object per
line with the same keys.  Exit codes: 0 success, 2 validation errors,
3 tolerance violations (the residual is printed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import bell, bosons_n, distinguishable, fermions_n, identical2, measure
from .core import (
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    ToleranceError,
    Tolerances,
    basis_vector,
    load_ensemble,
    load_state,
    save_state,
)

_BOUND = 2.0
_TSIRELSON = 2.0 * math.sqrt(2.0)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _emit(records: list[list[tuple[str, object]]], as_json: bool) -> None:
    for record in records:
        if as_json:
            obj = {}
            for key, value in record:
                if isinstance(value, (list, tuple)):
                    obj[key] = list(value)
                else:
                    obj[key] = value
            print(json.dumps(obj))
        else:
            print(" ".join(f"{key}={_fmt(value)}" for key, value in record))


def _parse_cut(text: str, n_slots: int) -> list[int]:
    """Cut syntax '1,2|3' with 1-based particle numbers; the right side is
    optional and defaults to the complement."""
    left_text = text.split("|")[0]
    try:
        left = [int(tok) - 1 for tok in left_text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"cut '{text}' is not a particle-number list") from None
    if "|" in text and text.split("|")[1].strip():
        right = [int(tok) - 1 for tok in text.split("|")[1].split(",") if tok.strip()]
        if sorted(left + right) != list(range(n_slots)):
            raise InvalidInputError(f"cut '{text}' does not partition particles 1..{n_slots}")
    return left


def _parse_indices(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"'{text}' is not a comma-separated index list") from None


def _index_projector(indices: Sequence[int], d: int) -> np.ndarray:
    proj = np.zeros((d, d), dtype=complex)
    for i in indices:
        if not 0 <= i < d:
            raise InvalidInputError(f"basis index {i} is outside dimension {d}")
        proj[i, i] = 1.0
    return proj


def _cmd_schmidt(args, tol) -> list[list[tuple[str, object]]]:
    psi = load_state(args.state, tol, args.normalize)
    cut = _parse_cut(args.cut, psi.n_slots)
    dec = distinguishable.schmidt_decompose(psi, cut, tol)
    return [[("rank", dec.rank), ("coeffs", [float(c) for c in dec.coeffs])]]


def _cmd_classify(args, tol) -> list[list[tuple[str, object]]]:
    psi = load_state(args.state, tol, args.normalize)
    cut = _parse_cut(args.cut, psi.n_slots)
    side1 = distinguishable.classify(psi, cut, tol)
    other = [i for i in range(psi.n_slots) if i not in cut]
    side2 = distinguishable.classify(psi, other, tol)
    return [
        [
            ("kind", side1.kind.value),
            ("maximal", side1.maximal),
            ("range_dim", side1.range_dim),
            ("kind_side2", side2.kind.value),
            ("range_dim_side2", side2.range_dim),
        ]
    ]


def _cmd_split(args, tol) -> list[list[tuple[str, object]]]:
    psi = load_state(args.state, tol, args.normalize)
    result = distinguishable.split_non_entangled(psi, args.m, tol)
    record: list[tuple[str, object]] = [("separable", result.separable)]
    if result.separable:
        if args.out_left:
            save_state(result.left_state, args.out_left)
            record.append(("left_written", args.out_left))
        if args.out_right:
            save_state(result.right_state, args.out_right)
            record.append(("right_written", args.out_right))
    return [record]


def _cmd_pair(args, tol) -> list[list[tuple[str, object]]]:
    psi = load_state(args.state, tol, args.normalize)
    decision = identical2.decide_pair(psi, tol)
    record: list[tuple[str, object]] = [
        ("sector", psi.sector.value),
        ("non_entangled", decision.non_entangled),
        ("form", decision.form.kind.value),
        ("coeffs", [float(c) for c in decision.form.coeffs]),
        ("oblique", decision.oblique),
    ]
    if decision.witness_traces is not None:
        record.append(("witness_traces", [float(t) for t in decision.witness_traces]))
    if decision.non_entangled and psi.sector is Sector.BOSONIC:
        record.append(("unique_pair", identical2.boson_uniqueness_check(psi, tol)))
    records = [record]
    if args.unsharp_search:
        rank, _ = identical2.greedy_unsharp_search(psi, tol)
        records.append(
            [("unsharp_rank", rank), ("search", "greedy-spectral-non-exhaustive")]
        )
    return records


def _cmd_subset(args, tol) -> list[list[tuple[str, object]]]:
    psi = load_state(args.state, tol, args.normalize)
    candidate = load_state(args.pi, tol, args.normalize)
    if psi.sector is Sector.FERMIONIC:
        result = fermions_n.verify_split(psi, candidate, tol)
        record: list[tuple[str, object]] = [
            ("value", result.value),
            ("holds", result.holds),
            ("recovered", result.phi is not None),
        ]
        if result.phi is not None:
            record.append(("fidelity", result.fidelity))
            if args.out_partner:
                save_state(result.phi, args.out_partner)
                record.append(("partner_written", args.out_partner))
        return [record]
    if psi.sector is Sector.BOSONIC:
        report = bosons_n.boson_split_report(psi, candidate, tol)
        record = [("kind", report.kind.value), ("value", report.value)]
        if report.lam is not None and args.out_partner:
            save_state(report.lam, args.out_partner)
            record.append(("partner_written", args.out_partner))
        return [record]
    raise InvalidInputError("subset analysis applies to identical-particle sectors")


def _cmd_assemble(args, tol) -> list[list[tuple[str, object]]]:
    first = load_state(args.first, tol, args.normalize)
    second = load_state(args.second, tol, args.normalize)
    if first.sector is Sector.FERMIONIC:
        split = fermions_n.assemble_split(first, second, tol)
        state, norm, case = split.assembled, 1.0, "different_properties"
    elif first.sector is Sector.BOSONIC:
        assembly = bosons_n.assemble_boson_split(first, second, tol)
        state, norm, case = assembly.state, assembly.norm, assembly.case.value
    else:
        raise InvalidInputError("assembly applies to identical-particle sectors")
    record: list[tuple[str, object]] = [
        ("slots", state.n_slots),
        ("norm", float(norm)),
        ("case", case),
    ]
    if args.out:
        save_state(state, args.out)
        record.append(("written", args.out))
    return [record]


def _cmd_local_fact(args, tol) -> list[list[tuple[str, object]]]:
    pi = load_state(args.pi, tol, args.normalize)
    phi = load_state(args.phi, tol, args.normalize)
    split = fermions_n.assemble_split(pi, phi, tol)
    d = pi.dims[0]
    if pi.n_slots != 1 or phi.n_slots != 1:
        raise InvalidInputError("the CLI covers the two-particle local-factorizability check")
    p = _index_projector(_parse_indices(args.p_idx), d)
    q = _index_projector(_parse_indices(args.q_idx), d)
    result = fermions_n.local_factorizability(split, p, q, strict=not args.allow_cross, tol=tol)
    return [
        [
            ("joint", result.joint),
            ("marg1", result.marg1),
            ("marg2", result.marg2),
            ("factorizes", result.factorizes),
        ]
    ]


def _load_chsh_system(path: str, tol: Tolerances, auto_normalize: bool):
    text = json.loads(open(path, encoding="utf-8").read())
    if isinstance(text, dict) and "entries" in text:
        return load_ensemble(path, tol, auto_normalize)
    return load_state(path, tol, auto_normalize)


def _cmd_chsh(args, tol) -> list[list[tuple[str, object]]]:
    system = _load_chsh_system(args.system, tol, args.normalize)
    angles = [math.radians(float(tok)) for tok in args.angles.split(",")]
    if len(angles) != 4:
        raise InvalidInputError("--angles needs four comma-separated degrees")
    settings = bell.ChshSettings(*(bell.spin_observable(t) for t in angles))
    value = bell.chsh_value(system, settings, tol)
    kind = "ensemble" if not isinstance(system, PureState) else "state"
    return [
        [
            ("system", kind),
            ("s", value),
            ("bound", _BOUND),
            ("within_bound", abs(value) <= _BOUND + tol.eq_tol),
        ]
    ]


def _cmd_equiv(args, tol) -> list[list[tuple[str, object]]]:
    e1 = load_ensemble(args.first, tol, args.normalize)
    e2 = load_ensemble(args.second, tol, args.normalize)
    report = bell.ensemble_equivalence(e1, e2, tol)
    return [[("equivalent", report.equivalent), ("max_abs_diff", report.max_abs_diff)]]


def _demo_ghz(args, tol) -> list[list[tuple[str, object]]]:
    axis = args.measure
    sigma = {"z": np.diag([1.0, -1.0]), "x": np.array([[0.0, 1.0], [1.0, 0.0]])}
    if axis not in sigma:
        raise InvalidInputError(f"--measure must be z or x, got '{axis}'")
    ghz = measure.ghz_state()
    records = []
    for outcome in measure.measure(ghz, 2, sigma[axis].astype(complex), tol):
        pair = measure.remainder_state(outcome.collapsed, measured_slot=2, tol=tol)
        rank = distinguishable.schmidt_decompose(pair, [0], tol).rank
        records.append(
            [
                ("outcome", outcome.label),
                ("p", outcome.probability),
                ("remainder", "product" if rank == 1 else "entangled"),
                ("schmidt_rank", rank),
            ]
        )
    return records


def _demo_boson_bins(args, tol) -> list[list[tuple[str, object]]]:
    d = args.bins
    n1, n2 = args.d1, args.d2
    if n1 + n2 > d:
        raise InvalidInputError("bin sets exceed the number of bins")
    demo = bosons_n.bin_measurement_demo(d, list(range(n1)), list(range(n1, n1 + n2)), tol)
    return [
        [
            ("conditional", demo.conditional),
            ("unconditional", demo.unconditional),
            ("collapse_p", demo.collapse_probability),
        ]
    ]


def _demo_outcome_dep(args, tol) -> list[list[tuple[str, object]]]:
    records = []
    for branch in measure.outcome_dependent_entanglement_demo(tol):
        records.append(
            [
                ("outcome", branch.label),
                ("p", branch.probability),
                ("schmidt_rank", branch.schmidt_rank),
                ("kind", branch.kind),
            ]
        )
    return records


def _demo_approx_orth(args, tol) -> list[list[tuple[str, object]]]:
    eps = [float(tok) for tok in args.eps.split(",") if tok.strip()]
    rows = fermions_n.approx_orthogonality_report(eps, entangled=args.entangled, tol=tol)
    records = []
    for row in rows:
        record: list[tuple[str, object]] = [("eps", row.eps)]
        if not args.entangled:
            record.append(("residual", row.residual))
        record.append(("deficit", row.deficit))
        records.append(record)
    return records


def _demo_tsirelson(args, tol) -> list[list[tuple[str, object]]]:
    demo = bell.tsirelson_demo()
    return [
        [
            ("s", demo.value),
            ("target", _TSIRELSON),
            ("gap", abs(demo.value - _TSIRELSON)),
        ]
    ]


_DEMOS = {
    "ghz": _demo_ghz,
    "boson-bins": _demo_boson_bins,
    "outcome-dep": _demo_outcome_dep,
    "approx-orth": _demo_approx_orth,
    "tsirelson": _demo_tsirelson,
}


def _cmd_demo(args, tol) -> list[list[tuple[str, object]]]:
    return _DEMOS[args.which](args, tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entprop",
        description="Entanglement and objective-property analysis for small composite systems.",
    )
    parser.add_argument("--tol", type=float, default=1e-9, help="equality tolerance")
    parser.add_argument("--rank-tol", type=float, default=1e-9, help="relative rank cutoff")
    parser.add_argument("--json", action="store_true", help="machine-readable reports")
    parser.add_argument(
        "--normalize", action="store_true", help="auto-normalize states read from files"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("schmidt", help="biorthonormal decomposition across a cut")
    p.add_argument("state")
    p.add_argument("--cut", required=True, help="e.g. '1|2' or '1,2|3' (1-based)")
    p.set_defaults(func=_cmd_schmidt)

    p = sub.add_parser("classify", help="entanglement trichotomy for a cut")
    p.add_argument("state")
    p.add_argument("--cut", required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("split", help="first-M-slots factorization test")
    p.add_argument("state")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out-left")
    p.add_argument("--out-right")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("pair", help="two identical particles: decision and canonical form")
    p.add_argument("state")
    p.add_argument("--unsharp-search", action="store_true")
    p.set_defaults(func=_cmd_pair)

    p = sub.add_parser("subset", help="subset property check against a candidate state")
    p.add_argument("state")
    p.add_argument("--pi", required=True, help="candidate subset state file")
    p.add_argument("--out-partner")
    p.set_defaults(func=_cmd_subset)

    p = sub.add_parser("assemble", help="(anti)symmetrized normalized product of two factors")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("local-fact", help="joint vs product probabilities on a pair split")
    p.add_argument("pi")
    p.add_argument("phi")
    p.add_argument("--p-idx", required=True, help="basis indices of P, e.g. '0'")
    p.add_argument("--q-idx", required=True, help="basis indices of Q, e.g. '2'")
    p.add_argument("--allow-cross", action="store_true")
    p.set_defaults(func=_cmd_local_fact)

    p = sub.add_parser("chsh", help="CHSH value of an ensemble or state file")
    p.add_argument("system")
    p.add_argument("--angles", default="0,90,45,135", help="four x-z plane angles in degrees")
    p.set_defaults(func=_cmd_chsh)

    p = sub.add_parser("equiv", help="statistical-operator equivalence of two ensembles")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("demo", help="built-in worked examples")
    p.add_argument("which", choices=sorted(_DEMOS))
    p.add_argument("--measure", default="z", help="ghz: spin axis (z or x)")
    p.add_argument("--bins", type=int, default=10, help="boson-bins: bin count")
    p.add_argument("--d1", type=int, default=2, help="boson-bins: |delta1|")
    p.add_argument("--d2", type=int, default=3, help="boson-bins: |delta2|")
    p.add_argument("--eps", default="0.1,0.01,0.001", help="approx-orth: overlap list")
    p.add_argument("--entangled", action="store_true", help="approx-orth: entangled family")
    p.set_defaults(func=_cmd_demo)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerances(eq_tol=args.tol, rank_tol=args.rank_tol)
        records = args.func(args, tol)
    except ToleranceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return 3
    except (InvalidInputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(records, args.json)
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
