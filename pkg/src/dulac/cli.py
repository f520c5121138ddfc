"""Command-line front end.

Line-oriented system files go in; deterministic ` | `-delimited text (or
JSON with exact rationals carried as strings) comes out.  Exit codes:
0 success, 2 a verification check failed, 1 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dulac import numerics
from dulac.algebra import (
    ExactMatrix,
    GaussianRational,
    PolyVectorField,
    ScalarPoly,
    bargman_inner,
    gr,
    iter_multiindices,
    lie_poisson,
)
from dulac.convergence import convergence_report
from dulac.normalform import (
    NormalFormResult,
    complexify,
    normalize,
    realify,
    verify_normal_form,
)
from dulac.resonance import (
    DEFAULT_DEGREE_CAP,
    Spectrum,
    enumerate_resonances,
    invariance_basis,
    resonance_report,
)
from dulac.symmetry import (
    FiniteGroup,
    group_equivariance_residual,
    joint_centralizer,
    molien_coefficients,
    gradient_property_check,
    symmetric_invariants,
)
from dulac.unfold import asymptotic_linearization, build_unfolding, verify_unfolding

Rows = List[List[str]]


class InputError(Exception):
    """Anything wrong with what the user handed us; becomes exit 1."""


# ---------------------------------------------------------------------------
# rationals on the wire: the canonical a/b or a/b+c/di syntax that
# str(GaussianRational) emits, so files and JSON round-trip exactly


def parse_rational(token: str) -> GaussianRational:
    try:
        return GaussianRational.parse(token)
    except ValueError as e:
        raise InputError(str(e))


def _poly_text(p: ScalarPoly, var: str = "x") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mu, c in p.sorted_terms():
        cs = str(c)
        if "+" in cs[1:] or "-" in cs[1:]:
            cs = f"({cs})"
        body = "*".join(
            f"{var}{k + 1}" + (f"^{e}" if e > 1 else "")
            for k, e in enumerate(mu)
            if e
        )
        parts.append(f"{cs}*{body}" if body else cs)
    return " + ".join(parts)


def _matrix_text(m: ExactMatrix) -> str:
    return "[" + "; ".join(
        " ".join(str(c) for c in row) for row in m.entries
    ) + "]"


def _exp_text(mu: Sequence[int]) -> str:
    return "(" + ",".join(str(e) for e in mu) + ")"


# ---------------------------------------------------------------------------
# system files


@dataclass(frozen=True)
class SystemOptions:
    blocks: Tuple[Tuple[int, int, Fraction, Fraction], ...]  # (i, j, a, b) 0-based
    group_generators: Tuple[ExactMatrix, ...]
    group_elements: Tuple[ExactMatrix, ...]


def parse_system(text: str) -> Tuple[PolyVectorField, Spectrum, SystemOptions]:
    """Parse the line-oriented grammar; every error carries its line number.

    The returned field lives in file coordinates and always includes the
    declared linear part; for `block` declarations the spectrum is the
    complex one the rotation blocks diagonalize to (a ± bi).
    """
    dim: Optional[int] = None
    eigenvalues: Dict[int, GaussianRational] = {}
    term_acc: Dict[Tuple[int, Tuple[int, ...]], GaussianRational] = {}
    linear_lines: List[Tuple[int, int, Tuple[int, ...], GaussianRational]] = []
    blocks: List[Tuple[int, int, Fraction, Fraction]] = []
    gens: List[ExactMatrix] = []
    elems: List[ExactMatrix] = []

    def fail(lineno: int, msg: str) -> None:
        raise InputError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "dim":
            if dim is not None:
                fail(lineno, "duplicate dim line")
            if len(tok) != 2 or not tok[1].isdigit() or int(tok[1]) < 1:
                fail(lineno, "dim needs one positive integer")
            dim = int(tok[1])
            continue
        if dim is None:
            fail(lineno, "dim must come first")
        if kind == "eigenvalue":
            if len(tok) != 3:
                fail(lineno, "eigenvalue needs an index and a rational")
            if not tok[1].isdigit() or not 1 <= int(tok[1]) <= dim:
                fail(lineno, f"component {tok[1]} out of range 1..{dim}")
            idx = int(tok[1]) - 1
            if idx in eigenvalues:
                fail(lineno, f"duplicate eigenvalue for coordinate {idx + 1}")
            try:
                eigenvalues[idx] = parse_rational(tok[2])
            except InputError as e:
                fail(lineno, str(e))
        elif kind == "term":
            if len(tok) != dim + 3:
                fail(lineno, f"term needs component, {dim} exponents, coefficient")
            if not tok[1].isdigit() or not 1 <= int(tok[1]) <= dim:
                fail(lineno, f"component {tok[1]} out of range 1..{dim}")
            comp = int(tok[1]) - 1
            try:
                mu = tuple(int(t) for t in tok[2:-1])
            except ValueError:
                fail(lineno, "exponents must be integers")
            if any(e < 0 for e in mu):
                fail(lineno, "exponents must be non-negative")
            try:
                coeff = parse_rational(tok[-1])
            except InputError as e:
                fail(lineno, str(e))
            if sum(mu) == 1:
                linear_lines.append((lineno, comp, mu, coeff))
            else:
                key = (comp, mu)
                term_acc[key] = term_acc.get(key, gr(0)) + coeff
        elif kind == "block":
            if len(tok) != 6 or tok[3] != "rotation":
                fail(lineno, "block syntax: block <i> <j> rotation <a> <b>")
            if not (tok[1].isdigit() and tok[2].isdigit()):
                fail(lineno, "block indices must be integers")
            i, j = int(tok[1]) - 1, int(tok[2]) - 1
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                fail(lineno, "block indices out of range or equal")
            try:
                a, b = parse_rational(tok[4]), parse_rational(tok[5])
            except InputError as e:
                fail(lineno, str(e))
            if a.im != 0 or b.im != 0:
                fail(lineno, "block entries must be real rationals")
            blocks.append((i, j, a.re, b.re))
        elif kind == "group":
            if len(tok) < 2 or tok[1] not in ("generator", "element"):
                fail(lineno, "group lines are 'group generator ...' or 'group element ...'")
            vals = tok[2:]
            if len(vals) != dim * dim:
                fail(lineno, f"group matrix needs {dim * dim} row-major entries")
            try:
                entries = [parse_rational(v) for v in vals]
            except InputError as e:
                fail(lineno, str(e))
            m = ExactMatrix(
                [entries[r * dim : (r + 1) * dim] for r in range(dim)]
            )
            (gens if tok[1] == "generator" else elems).append(m)
        else:
            fail(lineno, f"unknown line kind {kind!r}")

    if dim is None:
        raise InputError("missing dim line")
    covered: Dict[int, Tuple[int, int, Fraction, Fraction]] = {}
    for blk in blocks:
        i, j, _, _ = blk
        for k in (i, j):
            if k in covered:
                raise InputError(f"coordinate {k + 1} appears in two blocks")
            covered[k] = blk
    for k in covered:
        if k in eigenvalues:
            raise InputError(
                f"coordinate {k + 1} has both a block and an eigenvalue line"
            )
    missing = [k + 1 for k in range(dim) if k not in covered and k not in eigenvalues]
    if missing:
        raise InputError(f"missing eigenvalue for coordinate {missing[0]}")

    lam: List[GaussianRational] = [gr(0)] * dim
    linear = [[gr(0)] * dim for _ in range(dim)]
    for k, ev in eigenvalues.items():
        lam[k] = ev
        linear[k][k] = ev
    for i, j, a, b in blocks:
        lam[i] = GaussianRational(a, b)
        lam[j] = GaussianRational(a, -b)
        linear[i][i] = gr(a)
        linear[i][j] = gr(-b)
        linear[j][i] = gr(b)
        linear[j][j] = gr(a)
    spectrum = Spectrum(tuple(lam))

    if linear_lines:
        stated = [[gr(0)] * dim for _ in range(dim)]
        for _, comp, mu, coeff in linear_lines:
            col = mu.index(1)
            stated[comp][col] = stated[comp][col] + coeff
        if stated != linear:
            raise InputError(
                f"line {linear_lines[0][0]}: explicit linear terms disagree "
                "with the declared eigenvalues/blocks"
            )

    entries = [
        (comp, mu, c) for (comp, mu), c in term_acc.items() if not c.is_zero()
    ]
    field = PolyVectorField.from_terms(dim, entries) + PolyVectorField.linear(
        ExactMatrix(linear)
    )
    return field, spectrum, SystemOptions(tuple(blocks), tuple(gens), tuple(elems))


def serialize_system(
    field: PolyVectorField, spectrum: Spectrum, options: SystemOptions
) -> str:
    """Canonical form: declared linear data, then nonlinear terms in
    graded-lex order; parse∘serialize is the identity on canonical files."""
    n = field.dim
    lines = [f"dim {n}"]
    block_coords = set()
    for i, j, a, b in options.blocks:
        block_coords.update((i, j))
        lines.append(
            f"block {i + 1} {j + 1} rotation {str(gr(a))} {str(gr(b))}"
        )
    for k in range(n):
        if k not in block_coords:
            lines.append(f"eigenvalue {k + 1} {spectrum.eigenvalues[k]}")
    linear = [[gr(0)] * n for _ in range(n)]
    for k in range(n):
        if k not in block_coords:
            linear[k][k] = spectrum.eigenvalues[k]
    for i, j, a, b in options.blocks:
        linear[i][i] = gr(a)
        linear[i][j] = gr(-b)
        linear[j][i] = gr(b)
        linear[j][j] = gr(a)
    tail = field - PolyVectorField.linear(ExactMatrix(linear))
    for i, mu, c in tail.terms():
        exps = " ".join(str(e) for e in mu)
        lines.append(f"term {i + 1} {exps} {c}")
    for m in options.group_generators:
        vals = " ".join(str(c) for row in m.entries for c in row)
        lines.append(f"group generator {vals}")
    for m in options.group_elements:
        vals = " ".join(str(c) for row in m.entries for c in row)
        lines.append(f"group element {vals}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# loading and shared report scaffolding


@dataclass
class Loaded:
    path: str
    field: PolyVectorField  # file coordinates
    spectrum: Spectrum  # diagonal (complex) eigenvalues
    options: SystemOptions
    work_field: PolyVectorField  # diagonal coordinates
    cmap: Optional[object]  # complexification map when blocks are present


def _load(args: argparse.Namespace) -> Loaded:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {args.file}: {e.strerror}")
    field, spectrum, options = parse_system(text)
    work, cmap = field, None
    if options.blocks:
        layout: List[Tuple] = [("pair", i, j) for i, j, _, _ in options.blocks]
        paired = {k for blk in options.blocks for k in blk[:2]}
        layout.extend(("real", k) for k in range(field.dim) if k not in paired)
        try:
            work, cmap = complexify(field, layout)
        except ValueError as e:
            raise InputError(str(e))
    return Loaded(args.file, field, spectrum, options, work, cmap)


def _header(loaded: Loaded, command: str) -> Tuple[dict, Rows]:
    rows: Rows = [["command", command], ["file", os.path.basename(loaded.path)]]
    rows.append(["dim", str(loaded.spectrum.dim)])
    for k, ev in enumerate(loaded.spectrum.eigenvalues):
        rows.append(["eigenvalue", str(k + 1), str(ev)])
    data = {
        "command": command,
        "file": os.path.basename(loaded.path),
        "dim": loaded.spectrum.dim,
        "eigenvalues": [str(ev) for ev in loaded.spectrum.eigenvalues],
        "complexified": bool(loaded.options.blocks),
    }
    if loaded.options.blocks:
        rows.append(["coordinates", "complexified from real rotation blocks"])
    return data, rows


def _group_of(loaded: Loaded) -> Optional[FiniteGroup]:
    opts = loaded.options
    if not opts.group_generators and not opts.group_elements:
        return None
    try:
        if opts.group_generators:
            return FiniteGroup.generate(
                list(opts.group_generators) + list(opts.group_elements)
            )
        return FiniteGroup(list(opts.group_elements))
    except ValueError as e:
        raise InputError(f"group data: {e}")


def _field_rows(tag: str, f: PolyVectorField) -> Rows:
    return [
        [tag, f"component {i + 1}", _exp_text(mu), str(c)]
        for i, mu, c in f.terms()
    ]


def _field_json(f: PolyVectorField) -> List[dict]:
    return [
        {"component": i + 1, "exponent": list(mu), "coefficient": str(c)}
        for i, mu, c in f.terms()
    ]


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "analyze")
    rep = resonance_report(loaded.spectrum, args.order, args.hilbert_cap)
    rows.append(["max-degree", str(args.order)])
    sporadic = set(rep.sporadic)
    for r in rep.resonances:
        kind = "sporadic" if r in sporadic else "reducible"
        rows.append(
            ["resonance", f"degree {r.degree}", f"component {r.component + 1}",
             _exp_text(r.exponent), kind]
        )
    for g in rep.invariance_basis.generators:
        rows.append(["invariance-generator", _exp_text(g)])
    complete = rep.invariance_basis.complete
    finitely = "unknown" if not complete else (
        "true" if not rep.invariance_basis.generators else "false"
    )
    rows.append(["invariance-basis",
                 f"generators {len(rep.invariance_basis.generators)}",
                 "complete" if complete else "incomplete (raise --hilbert-cap)"])
    rows.append(["sporadic-count", str(len(rep.sporadic))])
    rows.append(["reducible-count", str(len(rep.reducible))])
    rows.append(["uniqueness", "ok" if rep.uniqueness_ok else "ambiguous"])
    for d in rep.uniqueness_diagnostics:
        rows.append(["uniqueness-note", d])
    rows.append(["finitely-resonant", finitely])
    data.update({
        "max_degree": args.order,
        "resonances": [
            {"degree": r.degree, "component": r.component + 1,
             "exponent": list(r.exponent),
             "kind": "sporadic" if r in sporadic else "reducible"}
            for r in rep.resonances
        ],
        "invariance_generators": [list(g) for g in rep.invariance_basis.generators],
        "basis_complete": complete,
        "uniqueness_ok": rep.uniqueness_ok,
        "finitely_resonant": finitely,
    })
    return 0, data, rows


def _normalized(loaded: Loaded, order: int) -> NormalFormResult:
    try:
        return normalize(loaded.work_field, loaded.spectrum, order)
    except ValueError as e:
        raise InputError(f"cannot normalize: {e}")


def cmd_normalize(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "normalize")
    nf = _normalized(loaded, args.order)
    check = verify_normal_form(nf)
    rows.append(["order", str(args.order)])
    rows.extend(_field_rows("normal-form", nf.normal_form))
    if nf.transform.is_zero():
        rows.append(["transform", "identity"])
    else:
        rows.extend(_field_rows("transform", nf.transform))
    data["order"] = args.order
    data["normal_form"] = _field_json(nf.normal_form)
    data["transform"] = _field_json(nf.transform)
    if loaded.cmap is not None:
        real_nf, real_tr = realify(nf, loaded.cmap)
        rows.extend(_field_rows("real-normal-form", real_nf))
        data["real_normal_form"] = _field_json(real_nf)
        data["real_transform"] = _field_json(real_tr)
    ok = check.ok
    rows.append(["verified", "true" if ok else "false"])
    data["verified"] = ok
    return (0 if ok else 2), data, rows


def _unfolded(loaded: Loaded, args):
    nf = _normalized(loaded, args.order)
    rep = resonance_report(loaded.spectrum, args.order, args.hilbert_cap)
    try:
        u = build_unfolding(nf, rep)
    except (ValueError, RuntimeError) as e:
        raise InputError(f"cannot unfold: {e}")
    return nf, u


def _poly_matrix_rows(tag: str, m, var: str) -> Rows:
    rows: Rows = []
    for i, row in enumerate(m):
        for j, p in enumerate(row):
            if not p.is_zero():
                rows.append([tag, f"{i + 1} {j + 1}", _poly_text(p, var)])
    return rows


def _poly_matrix_json(m, var: str) -> List[List[str]]:
    return [[_poly_text(p, var) for p in row] for row in m]


def cmd_unfold(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "unfold")
    nf, u = _unfolded(loaded, args)
    rows.append(["order", str(args.order)])
    for a, gpoly in enumerate(u.ident_phi.generators):
        if u.ident_phi.exponents is not None:
            rows.append(["invariant", f"phi{a + 1}",
                         "monomial " + _exp_text(u.ident_phi.exponents[a])])
        else:
            rows.append(["invariant", f"phi{a + 1}", _poly_text(gpoly)])
    for k in range(u.ident_w.s):
        rows.append(["auxiliary", f"w{k + 1}",
                     f"component {u.ident_w.components[k] + 1}",
                     "monomial " + _exp_text(u.ident_w.exponents[k])])
    rows.extend(_poly_matrix_rows("F", u.F, "phi"))
    rows.extend(_poly_matrix_rows("B", u.B, "phi"))
    rows.extend(_poly_matrix_rows("G", u.G, "phi"))
    if not u.d_is_zero():
        rows.extend(_poly_matrix_rows("D", u.D, "phi"))
        rows.append(["display-form", "false (x-coupling block D is nonzero)"])
    else:
        rows.append(["display-form", "true"])
    for a, hp in enumerate(u.h):
        rows.append(["h", f"phi{a + 1}", _poly_text(hp, "phi")])
    check = verify_unfolding(u, nf.normal_form)
    rows.append(["verified", "true" if check.ok else "false"])
    for offender in check.offenders:
        rows.append(["verification-offender", str(offender)])
    data.update({
        "order": args.order,
        "invariants": [
            list(e) for e in (u.ident_phi.exponents or ())
        ] or [_poly_text(g) for g in u.ident_phi.generators],
        "auxiliaries": [
            {"component": c + 1, "exponent": list(e)}
            for c, e in zip(u.ident_w.components, u.ident_w.exponents)
        ],
        "F": _poly_matrix_json(u.F, "phi"),
        "B": _poly_matrix_json(u.B, "phi"),
        "G": _poly_matrix_json(u.G, "phi"),
        "D": _poly_matrix_json(u.D, "phi"),
        "h": [_poly_text(hp, "phi") for hp in u.h],
        "display_form": u.d_is_zero(),
        "verified": check.ok,
    })
    return (0 if check.ok else 2), data, rows


def cmd_asymptotic(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "asymptotic")
    _, u = _unfolded(loaded, args)
    try:
        regimes = asymptotic_linearization(u)
    except ValueError as e:
        raise InputError(f"asymptotic analysis: {e}")
    reg_json = []
    for k, reg in enumerate(regimes):
        if reg.phi_star is not None:
            where = "phi* (" + ", ".join(str(c) for c in reg.phi_star) + ")"
        elif reg.interval is not None:
            lo, hi = reg.interval
            where = f"interval ({lo}, {hi}]"
        else:
            where = "-"
        row = ["regime", str(k + 1), where, reg.stability]
        if reg.frozen_F is not None:
            row.append("F " + _matrix_text(reg.frozen_F))
        if reg.frozen_G is not None:
            row.append("G " + _matrix_text(reg.frozen_G))
        rows.append(row)
        reg_json.append({
            "phi_star": [str(c) for c in reg.phi_star] if reg.phi_star is not None else None,
            "interval": [str(reg.interval[0]), str(reg.interval[1])] if reg.interval else None,
            "stability": reg.stability,
            "frozen_F": [[str(c) for c in row_] for row_ in reg.frozen_F.entries] if reg.frozen_F else None,
            "frozen_G": [[str(c) for c in row_] for row_ in reg.frozen_G.entries] if reg.frozen_G else None,
        })
    if not regimes:
        rows.append(["regime", "none found"])
    data["regimes"] = reg_json
    return 0, data, rows


def cmd_symmetry(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "symmetry")
    # Stay in file coordinates so the linear part and any group matrices
    # live in the same chart; the dimensions are conjugation-invariant.
    a = loaded.field.linear_part()
    cent = joint_centralizer([a])
    rows.append(["centralizer-dim", str(len(cent))])
    data["centralizer_dim"] = len(cent)
    group = _group_of(loaded)
    if group is None:
        rows.append(["group", "none supplied"])
        data["group"] = None
        return 0, data, rows
    order = len(group.elements)
    rows.append(["group-order", str(order)])
    joint = joint_centralizer([a] + list(group.elements))
    rows.append(["joint-centralizer-dim", str(len(joint))])
    residual = group_equivariance_residual(loaded.field, group)
    equivariant = residual.is_zero()
    rows.append(["field-equivariant", "true" if equivariant else "false"])
    basis = invariance_basis(loaded.spectrum, args.hilbert_cap)
    inv_group = group
    if loaded.cmap is not None:
        # The invariance basis lives in diagonal coordinates; move the
        # group action there before intersecting.
        fw, bw = loaded.cmap.forward, loaded.cmap.backward
        inv_group = FiniteGroup([fw @ g @ bw for g in group.elements])
    sym_inv = symmetric_invariants(inv_group, basis, args.order)
    for p in sym_inv:
        rows.append(["symmetric-invariant", _poly_text(p)])
    data.update({
        "group_order": order,
        "joint_centralizer_dim": len(joint),
        "field_equivariant": equivariant,
        "symmetric_invariants": [_poly_text(p) for p in sym_inv],
    })
    k_basis = joint_centralizer(list(group.elements))
    try:
        g_rows = gradient_property_check(group, args.order, k_basis)
    except ValueError as e:
        rows.append(["gradient-property", f"not applicable ({e})"])
        data["gradient_property"] = None
    else:
        gp_json = []
        for row in g_rows:
            rows.append([
                "gradient", f"degree {row.degree}", f"c1 {row.c1}",
                f"s*c0(n+1) {row.s_times_c0_next}",
                "counting ok" if row.counting_ok else "counting fails",
                f"span {row.gradient_span_dim}",
                "rank ok" if row.rank_ok else "rank fails",
            ])
            gp_json.append({
                "degree": row.degree, "c1": row.c1,
                "s_times_c0_next": row.s_times_c0_next,
                "counting_ok": row.counting_ok,
                "gradient_span_dim": row.gradient_span_dim,
                "rank_ok": row.rank_ok,
            })
        data["gradient_property"] = gp_json
    return 0, data, rows


def cmd_molien(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "molien")
    group = _group_of(loaded)
    if group is None:
        raise InputError("molien needs group lines in the system file")
    rows.append(["group-order", str(len(group.elements))])
    table = molien_coefficients(group, args.order)
    for nn in range(args.order + 1):
        rows.append(["molien", f"degree {nn}",
                     f"invariants {table.c0[nn]}", f"equivariants {table.c1[nn]}"])
    rows.append(["s", str(table.s)])
    data.update({
        "group_order": len(group.elements),
        "c0": list(table.c0),
        "c1": list(table.c1),
        "s": table.s,
    })
    return 0, data, rows


def cmd_convergence(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "convergence")
    nf = _normalized(loaded, args.order)
    rep = convergence_report(nf, omega_kmax=args.omega_kmax)
    rows.append(["order", str(args.order)])
    rows.append(["poincare-domain", "true" if rep.poincare_domain else "false"])
    rows.append(["condition-alpha",
                 _poly_text(rep.condition_alpha) if rep.condition_alpha is not None
                 else "absent"])
    for e in rep.omega_partial:
        rows.append(["omega", f"k {e.k}", f"omega-sq {e.omega_sq}",
                     f"term(float) {e.term + 0.0:.6g}",
                     f"sum(float) {e.cumulative + 0.0:.6g}"])
    rows.append(["lattice-bound", f"1/{rep.lattice_denominator}"])
    for adv in rep.advisories:
        rows.append(["advisory", adv.topic, adv.status, adv.detail])
    data.update({
        "order": args.order,
        "poincare_domain": rep.poincare_domain,
        "condition_alpha": _poly_text(rep.condition_alpha)
        if rep.condition_alpha is not None else None,
        "omega": [
            {"k": e.k, "omega_sq": str(e.omega_sq), "term": e.term,
             "cumulative": e.cumulative}
            for e in rep.omega_partial
        ],
        "lattice_denominator": rep.lattice_denominator,
        "advisories": [
            {"topic": a.topic, "status": a.status, "detail": a.detail}
            for a in rep.advisories
        ],
    })
    return 0, data, rows


def _parse_x0(args, dim: int) -> List[float]:
    if args.x0 is None:
        return [0.1] * dim
    try:
        vals = [float(v) for v in args.x0.split(",")]
    except ValueError:
        raise InputError(f"bad --x0 value {args.x0!r}")
    if len(vals) != dim:
        raise InputError(f"--x0 needs {dim} comma-separated values")
    return vals


def _plot_path(args, name: str) -> Optional[str]:
    if not args.plot_dir:
        return None
    os.makedirs(args.plot_dir, exist_ok=True)
    return os.path.join(args.plot_dir, name)


def cmd_simulate(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "simulate")
    x0 = _parse_x0(args, loaded.field.dim)
    horizon = args.horizon if args.horizon is not None else 10.0
    dt = args.dt if args.dt is not None else 0.01
    try:
        traj = numerics.integrate(loaded.field, x0, horizon, dt)
    except ValueError as e:
        raise InputError(f"cannot integrate: {e}")
    rows.append(["x0(float)", " ".join(repr(v) for v in x0)])
    rows.append(["horizon(float)", repr(horizon), "dt(float)", repr(dt)])
    rows.append(["diverged", "true" if traj.diverged else "false"])
    stride = max(1, (len(traj.times) - 1) // 10)
    for k in range(0, len(traj.times), stride):
        rows.append(["sample(float)", f"t {traj.times[k]:.6g}",
                     " ".join(f"{v:.10g}" for v in traj.states[k])])
    rows.append(["final(float)", " ".join(f"{v:.10g}" for v in traj.final)])
    data.update({
        "x0": x0, "horizon": horizon, "dt": dt,
        "diverged": traj.diverged,
        "final": [float(v) for v in traj.final],
    })
    path = _plot_path(args, "simulate.png")
    if path:
        numerics.render_trajectory(traj, path)
        rows.append(["plot", path])
        data["plot"] = path
    return 0, data, rows


def cmd_scaling(args) -> Tuple[int, dict, Rows]:
    loaded = _load(args)
    data, rows = _header(loaded, "scaling")
    nf = _normalized(loaded, args.order)
    if loaded.cmap is not None:
        real_nf, real_tr = realify(nf, loaded.cmap)
        shim = NormalFormResult(
            original=loaded.field, spectrum=loaded.spectrum, order=args.order,
            steps=(), normal_form=real_nf, transform=real_tr,
        )
    else:
        shim = nf
    try:
        eps = [float(v) for v in args.eps_list.split(",")]
    except ValueError:
        raise InputError(f"bad --eps-list value {args.eps_list!r}")
    horizon = args.horizon if args.horizon is not None else 0.75
    dt = args.dt if args.dt is not None else 1e-3
    try:
        fit = numerics.truncation_scaling(loaded.field, shim, eps, horizon, dt)
    except ValueError as e:
        raise InputError(f"cannot run scaling: {e}")
    rows.append(["order", str(args.order)])
    rows.append(["status", fit.status])
    if fit.slope is not None:
        rows.append(["slope(float)", f"{fit.slope:.4f}"])
    for e, err in fit.samples:
        rows.append(["sample(float)", f"eps {e:.6g}", f"error {err:.6g}"])
    for e in fit.excluded:
        rows.append(["excluded(float)", f"eps {e:.6g}", "diverged"])
    data.update({
        "order": args.order, "status": fit.status, "slope": fit.slope,
        "samples": [{"eps": e, "error": err} for e, err in fit.samples],
        "excluded": list(fit.excluded),
    })
    path = _plot_path(args, "scaling.png")
    if path:
        numerics.render_scaling(fit, path)
        rows.append(["plot", path])
        data["plot"] = path
    return 0, data, rows


# ---------------------------------------------------------------------------
# selftest: the randomized exact property suite


def _random_spectrum(rng: random.Random, n: int) -> Spectrum:
    while True:
        if rng.random() < 0.5:
            evs = [gr(rng.randint(-3, 3)) for _ in range(n)]
        else:
            evs = [
                GaussianRational(
                    Fraction(rng.randint(-2, 2), rng.choice((1, 2))),
                    Fraction(rng.randint(-2, 2), rng.choice((1, 2))),
                )
                for _ in range(n)
            ]
        if any(not e.is_zero() for e in evs):
            return Spectrum(tuple(evs))


def _random_terms(
    rng: random.Random, n: int, count: int, dmin: int = 2, dmax: int = 4
) -> List[Tuple[int, Tuple[int, ...], GaussianRational]]:
    out = []
    for _ in range(count):
        deg = rng.randint(dmin, dmax)
        mu = [0] * n
        for _ in range(deg):
            mu[rng.randrange(n)] += 1
        coeff = GaussianRational(
            Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-2, 2))
        )
        if coeff.is_zero():
            coeff = gr(1)
        out.append((rng.randrange(n), tuple(mu), coeff))
    return out


def _random_field(rng: random.Random, n: int, count: int) -> PolyVectorField:
    return PolyVectorField.from_terms(n, _random_terms(rng, n, count))


def _brute_resonances(s: Spectrum, max_degree: int):
    found = set()
    for deg in range(2, max_degree + 1):
        for mu in iter_multiindices(s.dim, deg):
            lam = s.dot(mu)
            for i, lam_i in enumerate(s.eigenvalues):
                if lam == lam_i:
                    found.add((i, mu))
    return found


def cmd_selftest(args) -> Tuple[int, dict, Rows]:
    rng = random.Random(args.seed)
    cases = args.cases
    failures: Dict[str, int] = {}

    def record(name: str, ok: bool) -> None:
        if not ok:
            failures[name] = failures.get(name, 0) + 1

    for _ in range(cases):
        n = rng.randint(1, 3)
        s = _random_spectrum(rng, n)
        f = _random_field(rng, n, 3)
        g = _random_field(rng, n, 3)
        h = _random_field(rng, n, 2)

        record("lie-poisson-antisymmetry",
               lie_poisson(f, g) == (PolyVectorField.zero(n) - lie_poisson(g, f)))
        jac = (
            lie_poisson(f, lie_poisson(g, h))
            + lie_poisson(g, lie_poisson(h, f))
            + lie_poisson(h, lie_poisson(f, g))
        )
        record("jacobi-identity", jac.is_zero())

        deg = rng.randint(2, 4)
        u = PolyVectorField.from_terms(n, _random_terms(rng, n, 2, deg, deg))
        v = PolyVectorField.from_terms(n, _random_terms(rng, n, 2, deg, deg))
        a_mat = s.matrix()
        a_field = PolyVectorField.linear(a_mat)
        a_dag = PolyVectorField.linear(a_mat.conjugate_transpose())
        lhs = bargman_inner(lie_poisson(a_field, u), v)
        rhs = bargman_inner(u, lie_poisson(a_dag, v))
        record("bargman-adjointness", lhs == rhs)

        full = a_field + _random_field(rng, n, 2)
        nf = normalize(full, s, 4)
        tail = nf.normal_form - a_field
        record("normalized-tail-equivariance",
               lie_poisson(a_field, tail).is_zero())
        again = normalize(nf.normal_form, s, 4)
        record("normalize-idempotence",
               again.transform.is_zero()
               and again.normal_form == nf.normal_form)

        module = {(r.component, r.exponent)
                  for r in enumerate_resonances(s, 4)}
        record("resonance-bruteforce-agreement",
               module == _brute_resonances(s, 4))

    names = [
        "lie-poisson-antisymmetry", "jacobi-identity", "bargman-adjointness",
        "normalized-tail-equivariance", "normalize-idempotence",
        "resonance-bruteforce-agreement",
    ]
    rows: Rows = [["command", "selftest"], ["seed", str(args.seed)],
                  ["cases", str(cases)]]
    data = {"command": "selftest", "seed": args.seed, "cases": cases,
            "properties": {}}
    all_ok = True
    for name in names:
        bad = failures.get(name, 0)
        ok = bad == 0
        all_ok = all_ok and ok
        rows.append(["property", name, "pass" if ok else f"FAIL ({bad} cases)"])
        data["properties"][name] = {"ok": ok, "failures": bad}
    rows.append(["result", "pass" if all_ok else "fail"])
    data["result"] = "pass" if all_ok else "fail"
    return (0 if all_ok else 2), data, rows


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's 2
        raise InputError(message)


_FILE_COMMANDS: Dict[str, Callable] = {
    "analyze": cmd_analyze,
    "normalize": cmd_normalize,
    "unfold": cmd_unfold,
    "asymptotic": cmd_asymptotic,
    "symmetry": cmd_symmetry,
    "molien": cmd_molien,
    "convergence": cmd_convergence,
    "simulate": cmd_simulate,
    "scaling": cmd_scaling,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="dulac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _Parser(add_help=False)
    common.add_argument("--order", type=int, default=5)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--omega-kmax", type=int, default=4)
    common.add_argument("--hilbert-cap", type=int, default=DEFAULT_DEGREE_CAP)
    common.add_argument("--eps-list", default="0.02,0.04,0.08,0.16")
    common.add_argument("--horizon", type=float, default=None)
    common.add_argument("--dt", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--x0", default=None)
    common.add_argument("--plot-dir", default=None)
    common.add_argument("--cases", type=int, default=200)
    for name in _FILE_COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file")
    sub.add_parser("selftest", parents=[common])
    return parser


def run(argv: Sequence[str]) -> Tuple[int, str]:
    """Execute one command; returns (exit code, report text)."""
    try:
        args = _build_parser().parse_args(list(argv))
        if args.command == "selftest":
            code, data, rows = cmd_selftest(args)
        else:
            code, data, rows = _FILE_COMMANDS[args.command](args)
    except InputError as e:
        return 1, f"error: {e}"
    if args.format == "json":
        return code, json.dumps(data, indent=2, sort_keys=True)
    return code, "\n".join(" | ".join(row) for row in rows)


def main() -> None:
    import sys

    code, text = run(sys.argv[1:])
    print(text)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
