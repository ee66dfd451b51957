"""Lower the symbolic superstructure plus fitted surrogates into a MILP."""

from __future__ import annotations

from ..case import CaseStudy, Side
from ..pwl.grids import SimplexModel
from ..pwl.hyperplane import HyperplaneModel, PlaneSense
from ..superstructure import SymbolicModel, sym_q, sym_z
from .logenc import LogSimplexEncoding, branching_node_sets, expected_binary_count
from .model import MilpModel


class MissingFitError(KeyError):
    pass


def encode_log_simplices(
    model: MilpModel,
    fit: SimplexModel,
    x_vars: list,
    f_var,
    enc_id: str,
    gate: str | None = None,
    gate_x_big_m: float | None = None,
) -> LogSimplexEncoding:
    """Add the node-weight selection system tying x and f to the surrogate.

    ``x_vars`` and ``f_var`` are either variable names or linear-expression
    term lists ``[(name, coef), ...]``.  Without a gate the links are
    equalities.  With a gate binary the x link is relaxed two-sidedly and
    the f link one-sidedly (f >= surrogate) whenever the gate is off.
    """
    if len(x_vars) != fit.dims:
        raise ValueError(f"{enc_id}: got {len(x_vars)} x variables for a {fit.dims}-D surrogate")
    coords = fit.node_coords()
    values = fit.node_values
    n_nodes = fit.n_nodes

    lam = tuple(model.add_var(f"lam[{enc_id},{n}]", 0.0, 1.0) for n in range(n_nodes))
    linking: list[str] = []

    name = f"enc[{enc_id}]:sum"
    model.add_row(name, [(l, 1.0) for l in lam], "==", 1.0)
    linking.append(name)

    for d in range(fit.dims):
        terms = [(lam[n], float(coords[n, d])) for n in range(n_nodes)]
        x_terms = _as_terms(x_vars[d])
        if gate is None:
            name = f"enc[{enc_id}]:x{d}"
            model.add_row(name, terms + [(v, -c) for v, c in x_terms], "==", 0.0)
            linking.append(name)
        else:
            big_m = gate_x_big_m if gate_x_big_m is not None else float(coords[:, d].max())
            up = f"enc[{enc_id}]:x{d}hi"
            model.add_row(up, terms + [(v, -c) for v, c in x_terms] + [(gate, big_m)], "<=", big_m)
            lo = f"enc[{enc_id}]:x{d}lo"
            model.add_row(lo, [(v, c) for v, c in x_terms] + [(l, -float(coords[n, d])) for n, l in enumerate(lam)] + [(gate, big_m)], "<=", big_m)
            linking.extend([up, lo])

    f_terms = _as_terms(f_var)
    val_terms = [(lam[n], float(values[n])) for n in range(n_nodes)]
    if gate is None:
        name = f"enc[{enc_id}]:f"
        model.add_row(name, val_terms + [(v, -c) for v, c in f_terms], "==", 0.0)
        linking.append(name)
    else:
        big_m = max(0.0, float(values.max()))
        name = f"enc[{enc_id}]:f"
        model.add_row(name, val_terms + [(v, -c) for v, c in f_terms] + [(gate, big_m)], "<=", big_m)
        linking.append(name)

    binaries: list[str] = []
    selection: list[str] = []
    for label, ones, zeros in branching_node_sets(fit):
        y = model.add_var(f"y[{enc_id},{label}]", 0.0, 1.0, binary=True)
        binaries.append(y)
        r1 = f"enc[{enc_id}]:br[{label},1]"
        model.add_row(r1, [(lam[n], 1.0) for n in ones] + [(y, -1.0)], "<=", 0.0)
        r0 = f"enc[{enc_id}]:br[{label},0]"
        model.add_row(r0, [(lam[n], 1.0) for n in zeros] + [(y, 1.0)], "<=", 1.0)
        selection.extend([r1, r0])

    enc = LogSimplexEncoding(
        enc_id=enc_id,
        simplex_count=fit.simplex_count,
        binaries=tuple(binaries),
        lambda_names=lam,
        selection_rows=tuple(selection),
        linking_rows=tuple(linking),
    )
    assert enc.n_binaries == expected_binary_count(fit)
    assert enc.n_selection_rows == 2 * enc.n_binaries
    model.metadata.setdefault("encodings", {})[enc_id] = {
        "simplices": enc.simplex_count,
        "binaries": enc.n_binaries,
        "selection_rows": enc.n_selection_rows,
    }
    return enc


def encode_hyperplane_area(
    model: MilpModel,
    fit: HyperplaneModel,
    lmtd_var: str,
    q_var: str,
    ared_var: str,
    gate: str,
    enc_id: str,
    dt_domain: tuple[float, float],
    q_max: float,
) -> None:
    """One >= row per plane, big-M gated, plus the z-cap on the area.

    Every plane is affine, so its largest value over the sampling box sits
    at a box corner; that corner value is the per-row big-M.
    """
    if fit.sense is not PlaneSense.MAX_OF_PLANES:
        raise ValueError(f"{enc_id}: stream areas need a max-of-planes surrogate")
    domain = [dt_domain, (0.0, q_max)]
    cap = max(0.0, fit.corner_max(domain))
    for idx, plane in enumerate(fit.planes):
        a0, a_l, a_q = (float(c) for c in plane)
        corners = [a0 + a_l * l + a_q * q for l in dt_domain for q in (0.0, q_max)]
        big_m = max(0.0, max(corners))
        # ared >= a0 + a_l*lmtd + a_q*q - M(1-z)
        model.add_row(
            f"enc[{enc_id}]:plane[{idx}]",
            [(ared_var, 1.0), (lmtd_var, -a_l), (q_var, -a_q), (gate, -big_m)],
            ">=",
            a0 - big_m,
        )
    model.add_row(f"enc[{enc_id}]:cap", [(ared_var, 1.0), (gate, -cap)], "<=", 0.0)
    model.metadata.setdefault("area_rows", {})[enc_id] = {"planes": fit.n_planes, "cap": cap}


def _as_terms(expr) -> list[tuple[str, float]]:
    if isinstance(expr, str):
        return [(expr, 1.0)]
    return [(v, float(c)) for v, c in expr]


def lower_case_to_milp(case: CaseStudy, symbolic: SymbolicModel, fits) -> MilpModel:
    """Build the complete MILP from the symbolic relations and fit library."""
    model = MilpModel(name=case.name)
    model.metadata["case"] = case.name
    model.metadata["symbols"] = {}

    for decl in symbolic.catalog.decls.values():
        model.add_var(decl.name, decl.lb, decl.ub, decl.binary)
        model.metadata["symbols"][decl.name] = decl.name

    for row in symbolic.rows:
        model.add_row(row.name, list(row.terms), row.sense, row.rhs)

    for tag in symbolic.lmtd_tags:
        fit = fits.lmtd(tag.hot_id, tag.cold_id)
        encode_log_simplices(model, fit, [tag.dt1, tag.dt2], tag.lmtd, enc_id=_enc_id(tag.name))

    for tag in symbolic.bilinear_tags:
        fit = fits.balance(tag.stream_id, tag.kind)
        dt_expr = [(tag.t_hi, 1.0), (tag.t_lo, -1.0)]
        f_expr = list(tag.duty_terms) if tag.duty_terms else []
        encode_log_simplices(model, fit, [tag.flow_symbol, dt_expr], f_expr, enc_id=_enc_id(tag.name))

    for tag in symbolic.stream_area_tags:
        simplex_fit = fits.stream_area_simplex(tag.hot_id, tag.cold_id)
        if simplex_fit is not None:
            # two-sided interpolant: exact zero on the q = 0 edge, so the
            # gated-off state (q forced to 0) needs no big-M relaxation
            encode_log_simplices(
                model, simplex_fit, [tag.lmtd, tag.q], tag.ared, enc_id=_enc_id(tag.name),
            )
            cap = max(0.0, float(simplex_fit.node_values.max()))
            model.add_row(f"enc[{_enc_id(tag.name)}]:cap", [(tag.ared, 1.0), (tag.gate, -cap)], "<=", 0.0)
        else:
            fit = fits.stream_area(tag.hot_id, tag.cold_id)
            encode_hyperplane_area(
                model, fit, tag.lmtd, tag.q, tag.ared, tag.gate,
                enc_id=_enc_id(tag.name), dt_domain=tag.dt_domain, q_max=tag.q_max,
            )

    for tag in symbolic.utility_area_tags:
        fit = fits.utility_area(tag.stream_id, tag.utility_id)
        encode_log_simplices(
            model, fit, [tag.q], tag.ared, enc_id=_enc_id(tag.name),
            gate=tag.gate, gate_x_big_m=tag.q_range[1],
        )

    _build_objective(case, symbolic, model)
    _ledger(symbolic, model)
    return model


def _enc_id(tag_name: str) -> str:
    return tag_name.removeprefix("enc:")


def _build_objective(case: CaseStudy, symbolic: SymbolicModel, model: MilpModel):
    c_f = case.costs.c_f
    c_v = case.costs.c_v
    # conventional utility operating cost
    for (i_id, u_id) in symbolic.usable_cold_utilities:
        model.add_objective(f"qcu[{i_id},{u_id}]", case.utility(u_id).cost)
    for (j_id, u_id) in symbolic.usable_hot_utilities:
        model.add_objective(f"qhu[{j_id},{u_id}]", case.utility(u_id).cost)
    # utility-stream operating cost through the per-stream cost vector
    for (i_id, j_id) in symbolic.allowed_pairs:
        hot, cold = case.stream(i_id), case.stream(j_id)
        coef = case.cost_vector(hot) + case.cost_vector(cold)
        if coef:
            for k in range(1, case.n_match_stages + 1):
                model.add_objective(sym_q(i_id, j_id, k), coef)
    # step-fixed and variable investment cost
    for name, var in model.variables.items():
        if var.binary and c_f and not name.startswith("y["):
            model.add_objective(name, c_f)
        if name.startswith(("ared[", "aredcu[", "aredhu[")):
            model.add_objective(name, c_v)


def _ledger(symbolic: SymbolicModel, model: MilpModel):
    existence = len([n for n in model.variables if n.startswith(("z[", "zcu[", "zhu["))])
    enc_binaries = sum(e["binaries"] for e in model.metadata.get("encodings", {}).values())
    model.metadata["binary_ledger"] = {
        "existence": existence,
        "encodings": enc_binaries,
        "total": existence + enc_binaries,
    }
    assert model.n_binaries == existence + enc_binaries, "binary bookkeeping out of balance"
