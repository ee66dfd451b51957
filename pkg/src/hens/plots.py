"""Deterministic SVG rendering: stream plots and solver convergence plots.

Hand-assembled SVG keeps output byte-stable for golden-file comparison.
Streams run as horizontal lanes (hot red, cold blue) across stage columns;
match exchangers are paired circles joined by a vertical line, utility
exchangers are free-standing circles at the stream ends.
"""

from __future__ import annotations

import math

from .case import CaseStudy, Side
from .network import HenDesign
from .solve.adapter import ConvergenceTrace

LANE_HEIGHT = 80
WIDTH = 1200
MARGIN_X = 110
HOT_COLOR = "#c62828"
COLD_COLOR = "#1565c0"
HEX_FILL = "#cccccc"
UTIL_FILL = "#888888"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _svg_header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">',
        f"<title>{title}</title>",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def render_stream_plot(case: CaseStudy, design: HenDesign) -> str:
    """One lane per stream plus one per conventional utility row."""
    lanes: list[tuple[str, str]] = []  # (id, kind)
    for s in case.hot_streams:
        lanes.append((s.id, "hot"))
    for s in case.cold_streams:
        lanes.append((s.id, "cold"))
    for u in case.utilities:
        lanes.append((u.id, "utility-hot" if u.side is Side.HOT else "utility-cold"))
    height = LANE_HEIGHT * len(lanes) + 60
    n_stages = case.n_match_stages
    col_w = (WIDTH - 2 * MARGIN_X) / (n_stages + 1)
    lane_y = {lane_id: 60 + LANE_HEIGHT * i for i, (lane_id, _) in enumerate(lanes)}

    currency = case.costs.currency_label
    out = _svg_header(WIDTH, height, f"{design.case_name}: TAC = {_fmt(design.tac_exact)} {currency}/yr")
    out.append(
        f'<text x="{MARGIN_X}" y="28" font-size="16">{design.case_name}'
        f"  TAC = {_fmt(design.tac_exact)} {currency}/yr</text>"
    )
    for k in range(1, n_stages + 1):
        x = MARGIN_X + (k - 0.5) * col_w + col_w / 2
        out.append(f'<text x="{_fmt(x)}" y="46" fill="#666" text-anchor="middle">k={k}</text>')

    def x_of_position(pos: int) -> float:
        # temperature position 1..n_stages+2 maps left to right
        return MARGIN_X + (pos - 1) * col_w

    def x_of_stage(k: int) -> float:
        return MARGIN_X + (k - 0.5) * col_w

    for lane_id, kind in lanes:
        y = lane_y[lane_id]
        color = HOT_COLOR if kind in ("hot", "utility-hot") else COLD_COLOR
        dash = ' stroke-dasharray="6 4"' if kind.startswith("utility") else ""
        out.append(
            f'<line x1="{MARGIN_X}" y1="{y}" x2="{WIDTH - MARGIN_X}" y2="{y}" '
            f'stroke="{color}" stroke-width="3"{dash}/>'
        )
        out.append(f'<text x="10" y="{y + 4}" fill="{color}">{lane_id}</text>')
        if kind in ("hot", "cold"):
            temps = design.stage_temperatures.get(lane_id, [])
            for pos, t in enumerate(temps, start=1):
                x = x_of_position(pos)
                out.append(
                    f'<text x="{_fmt(x)}" y="{y - 10}" fill="#444" text-anchor="middle">{t:.1f}</text>'
                )

    # splits: several exchangers of one stream in one stage fan out around the column
    slot_count: dict[tuple[str, int], int] = {}
    for m in design.matches:
        slot_count[(m.hot_id, m.stage)] = slot_count.get((m.hot_id, m.stage), 0) + 1
        slot_count[(m.cold_id, m.stage)] = slot_count.get((m.cold_id, m.stage), 0) + 1
    slot_used: dict[tuple[str, int], int] = {}

    def slot_x(stream_id: str, k: int) -> float:
        n = slot_count[(stream_id, k)]
        i = slot_used.get((stream_id, k), 0)
        slot_used[(stream_id, k)] = i + 1
        spread = col_w * 0.55
        return x_of_stage(k) + (0 if n == 1 else (i - (n - 1) / 2) * spread / max(n - 1, 1))

    for m in sorted(design.matches, key=lambda m: (m.stage, m.hot_id, m.cold_id)):
        y1, y2 = lane_y[m.hot_id], lane_y[m.cold_id]
        x1, x2 = slot_x(m.hot_id, m.stage), slot_x(m.cold_id, m.stage)
        out.append(f'<line x1="{_fmt(x1)}" y1="{y1}" x2="{_fmt(x2)}" y2="{y2}" stroke="#555" stroke-width="1.5"/>')
        for x, y in ((x1, y1), (x2, y2)):
            out.append(f'<circle cx="{_fmt(x)}" cy="{y}" r="10" fill="{HEX_FILL}" stroke="#555"/>')
        label_y = (y1 + y2) / 2
        out.append(
            f'<text x="{_fmt((x1 + x2) / 2 + 14)}" y="{_fmt(label_y)}" fill="#333">{m.duty:.1f} kW</text>'
        )

    for p in sorted(design.utility_placements, key=lambda p: (p.stream_id, p.utility_id)):
        y = lane_y[p.stream_id]
        yu = lane_y[p.utility_id]
        x = x_of_stage(n_stages) + col_w * 0.38 if p.side == "cu" else x_of_stage(1) - col_w * 0.38
        out.append(f'<circle cx="{_fmt(x)}" cy="{y}" r="10" fill="{UTIL_FILL}" stroke="#333"/>')
        out.append(f'<circle cx="{_fmt(x)}" cy="{yu}" r="10" fill="{UTIL_FILL}" stroke="#333"/>')
        out.append(
            f'<text x="{_fmt(x + 14)}" y="{y + 4}" fill="#333">{p.utility_id}: {p.duty:.1f} kW</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_convergence(trace: ConvergenceTrace, title: str = "convergence") -> str:
    """Incumbent and bound against log time, final gap annotated."""
    if not trace.points:
        raise ValueError("cannot render an empty convergence trace")
    width, height = 900, 420
    m_left, m_right, m_top, m_bottom = 80, 30, 40, 50
    pts = trace.points
    t_lo = max(min(p.time_s for p in pts), 1e-3)
    t_hi = max(max(p.time_s for p in pts), t_lo * 1.01)
    finite_vals = [v for p in pts for v in (p.incumbent, p.bound) if math.isfinite(v)]
    v_lo, v_hi = min(finite_vals), max(finite_vals)
    if v_hi <= v_lo:
        v_hi = v_lo + 1.0
    pad = 0.05 * (v_hi - v_lo)
    v_lo, v_hi = v_lo - pad, v_hi + pad

    def x_of(t: float) -> float:
        lt = math.log10(max(t, t_lo))
        return m_left + (lt - math.log10(t_lo)) / (math.log10(t_hi) - math.log10(t_lo) + 1e-12) * (
            width - m_left - m_right
        )

    def y_of(v: float) -> float:
        return height - m_bottom - (v - v_lo) / (v_hi - v_lo) * (height - m_top - m_bottom)

    out = _svg_header(width, height, title)
    out.append(f'<text x="{m_left}" y="24" font-size="15">{title}</text>')
    out.append(
        f'<line x1="{m_left}" y1="{height - m_bottom}" x2="{width - m_right}" y2="{height - m_bottom}" stroke="#333"/>'
    )
    out.append(f'<line x1="{m_left}" y1="{m_top}" x2="{m_left}" y2="{height - m_bottom}" stroke="#333"/>')
    out.append(
        f'<text x="{(width) / 2}" y="{height - 14}" text-anchor="middle" fill="#333">time / s (log)</text>'
    )
    for series, color in (("incumbent", "#c62828"), ("bound", "#1565c0")):
        coords = [
            (x_of(p.time_s), y_of(p.incumbent if series == "incumbent" else p.bound))
            for p in pts
            if math.isfinite(p.incumbent if series == "incumbent" else p.bound)
        ]
        if len(coords) == 1:
            x, y = coords[0]
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{color}"/>')
        elif coords:
            path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{width - m_right - 150}" y="{m_top + (20 if series == "incumbent" else 40)}" '
            f'fill="{color}">{series}</text>'
        )
    final_gap = pts[-1].gap_pct
    gap_text = f"final gap = {final_gap:.4f}%" if math.isfinite(final_gap) else "final gap = inf"
    out.append(f'<text x="{m_left + 10}" y="{m_top + 20}" fill="#333">{gap_text}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
