"""Self-contained SVG figures from run directories.

Styles:
  dots     final energy of each run with a standard-error bar
  curves   per-epoch energy from metrics.jsonl plus the best-checkpoint envelope
  ranking  horizontal bars sorted by final energy, lowest first
"""
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from ..io import read_json, read_jsonl

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=20, top=40, bottom=70)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
STYLES = ("dots", "curves", "ranking")


@dataclass
class RunData:
    label: str
    energy: float | None = None
    std_error: float | None = None
    epochs: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    best: list = field(default_factory=list)   # (epoch, energy) at each checkpoint


def load_run(path):
    path = Path(path)
    label = path.name
    run = RunData(label)
    cfg = path / "config.json"
    if cfg.is_file():
        label = read_json(cfg)["model"]["variant"]
        run.label = label
    res = path / "result.json"
    if res.is_file():
        r = read_json(res)
        run.energy = r.get("energy")
        run.std_error = r.get("std_error")
    else:
        warnings.warn(f"{path}: no result.json", stacklevel=2)
    met = path / "metrics.jsonl"
    if met.is_file():
        for rec in read_jsonl(met):
            if rec.get("energy") is None:
                continue
            run.epochs.append(rec["epoch"])
            run.energies.append(rec["energy"])
            if rec.get("checkpoint"):
                run.best.append((rec["epoch"], rec["energy"]))
    else:
        warnings.warn(f"{path}: no metrics.jsonl", stacklevel=2)
    return run


def _dedupe_labels(runs, paths):
    seen = {}
    for r in runs:
        seen[r.label] = seen.get(r.label, 0) + 1
    for r, p in zip(runs, paths):
        if seen[r.label] > 1:
            r.label = f"{r.label} ({Path(p).name})"


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".") if abs(v) < 1e6 else f"{v:.3g}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    t = math.ceil(lo / step) * step
    out = []
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


class Canvas:
    def __init__(self, title, width=WIDTH, height=HEIGHT):
        self.w, self.h = width, height
        self.items = []
        self.title = title

    def add(self, s):
        self.items.append(s)

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                 f'stroke="{stroke}" stroke-width="{width:g}"{d}/>')

    def text(self, x, y, s, size=12, anchor="middle", rotate=None):
        r = f' transform="rotate({rotate} {x:.2f} {y:.2f})"' if rotate else ""
        self.add(f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
                 f'font-family="sans-serif"{r}>{escape(str(s))}</text>')

    def polyline(self, pts, stroke, width=1.2):
        p = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.add(f'<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="{width:g}"/>')

    def circle(self, x, y, r, fill):
        self.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:g}" fill="{fill}"/>')

    def rect(self, x, y, w, h, fill, opacity=1.0):
        self.add(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}" '
                 f'fill-opacity="{opacity:g}"/>')

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">\n<rect width="100%" height="100%" fill="#fff"/>\n')
        self.text(self.w / 2, 24, self.title, size=15)
        return head + "\n".join(self.items) + "\n</svg>\n"


class Axes:
    """Linear map from data coordinates into a pixel box, with tick labels."""

    def __init__(self, canvas, box, xlim, ylim):
        self.c = canvas
        self.x0, self.y0, self.x1, self.y1 = box
        self.xlim, self.ylim = xlim, ylim

    def px(self, x):
        a, b = self.xlim
        return self.x0 + (x - a) / ((b - a) or 1.0) * (self.x1 - self.x0)

    def py(self, y):
        a, b = self.ylim
        return self.y1 - (y - a) / ((b - a) or 1.0) * (self.y1 - self.y0)

    def frame(self, xticks=True, yticks=True, size=11):
        c = self.c
        c.line(self.x0, self.y1, self.x1, self.y1)
        c.line(self.x0, self.y0, self.x0, self.y1)
        if yticks:
            for t in _ticks(*self.ylim):
                y = self.py(t)
                c.line(self.x0 - 4, y, self.x0, y)
                c.line(self.x0, y, self.x1, y, stroke="#ddd", width=0.6)
                c.text(self.x0 - 7, y + 4, _fmt(t), size=size, anchor="end")
        if xticks:
            for t in _ticks(*self.xlim):
                x = self.px(t)
                c.line(x, self.y1, x, self.y1 + 4)
                c.text(x, self.y1 + 17, _fmt(t), size=size)


def _pad(lo, hi, frac=0.08):
    span = hi - lo
    if span <= 0:
        span = max(abs(lo), 1.0) * 0.02
    return lo - frac * span, hi + frac * span


def _box():
    return (MARGIN["left"], MARGIN["top"], WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"])


def plot_dots(runs, title):
    c = Canvas(title)
    have = [r for r in runs if r.energy is not None]
    if not have:
        return c.render()
    lo = min(r.energy - (r.std_error or 0.0) for r in have)
    hi = max(r.energy + (r.std_error or 0.0) for r in have)
    ax = Axes(c, _box(), (-0.5, len(have) - 0.5), _pad(lo, hi))
    ax.frame(xticks=False)
    for i, r in enumerate(have):
        color = PALETTE[i % len(PALETTE)]
        x = ax.px(i)
        err = r.std_error or 0.0
        c.line(x, ax.py(r.energy - err), x, ax.py(r.energy + err), stroke=color, width=1.5)
        c.line(x - 6, ax.py(r.energy - err), x + 6, ax.py(r.energy - err), stroke=color, width=1.5)
        c.line(x - 6, ax.py(r.energy + err), x + 6, ax.py(r.energy + err), stroke=color, width=1.5)
        c.circle(x, ax.py(r.energy), 4, color)
        c.text(x, ax.y1 + 18, r.label, size=11)
    c.text(18, (ax.y0 + ax.y1) / 2, "E", size=13, rotate=-90)
    return c.render()


def _running_best(run):
    out = []
    best = math.inf
    for ep, e in run.best:
        best = min(best, e)
        out.append((ep, best))
    return out


def plot_curves(runs, title, zoom=0):
    c = Canvas(title)
    have = [r for r in runs if r.epochs]
    if not have:
        return c.render()
    xmax = max(max(r.epochs) for r in have)
    lo = min(min(r.energies) for r in have)
    hi = max(max(r.energies) for r in have)
    ax = Axes(c, _box(), (0, max(xmax, 1)), _pad(lo, hi, 0.04))
    ax.frame()
    for i, r in enumerate(have):
        color = PALETTE[i % len(PALETTE)]
        c.polyline([(ax.px(e), ax.py(v)) for e, v in zip(r.epochs, r.energies)], color, 0.8)
        env = _running_best(r)
        if env:
            # step function through the checkpointed best energies
            pts = []
            for k, (ep, e) in enumerate(env):
                if k:
                    pts.append((ax.px(ep), ax.py(env[k - 1][1])))
                pts.append((ax.px(ep), ax.py(e)))
            pts.append((ax.px(r.epochs[-1]), ax.py(env[-1][1])))
            c.add('<g class="best-envelope">')
            c.polyline(pts, color, 2.2)
            c.add("</g>")
        c.rect(ax.x1 - 190, ax.y0 + 8 + 18 * i, 12, 12, color)
        c.text(ax.x1 - 172, ax.y0 + 18 + 18 * i, r.label, size=11, anchor="start")
    c.text((ax.x0 + ax.x1) / 2, HEIGHT - 20, "epoch", size=13)
    c.text(18, (ax.y0 + ax.y1) / 2, "E", size=13, rotate=-90)
    if zoom > 0:
        _inset(c, have, zoom, xmax)
    return c.render()


def _inset(c, runs, last, xmax):
    start = max(0, xmax - last)
    sel = [[(e, v) for e, v in zip(r.epochs, r.energies) if e >= start] for r in runs]
    vals = [v for s in sel for _, v in s]
    if not vals:
        return
    box = (WIDTH - 330, HEIGHT - 240, WIDTH - 40, HEIGHT - 110)
    c.rect(box[0] - 40, box[1] - 10, box[2] - box[0] + 50, box[3] - box[1] + 35, "#fff", 0.9)
    ax = Axes(c, box, (start, max(xmax, start + 1)), _pad(min(vals), max(vals), 0.05))
    ax.frame(size=9)
    for i, s in enumerate(sel):
        if s:
            c.polyline([(ax.px(e), ax.py(v)) for e, v in s], PALETTE[i % len(PALETTE)], 0.8)


def plot_ranking(runs, title):
    c = Canvas(title)
    have = sorted((r for r in runs if r.energy is not None), key=lambda r: r.energy)
    if not have:
        return c.render()
    left = 170
    box = (left, MARGIN["top"], WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"])
    lo = min(r.energy for r in have)
    hi = max(r.energy for r in have)
    ax = Axes(c, box, _pad(lo, hi, 0.15), (0, len(have)))
    ax.frame(yticks=False)
    h = (ax.y1 - ax.y0) / len(have)
    for i, r in enumerate(have):
        y = ax.y0 + i * h + 0.15 * h
        x = ax.px(r.energy)
        c.rect(min(x, ax.x1), y, abs(ax.x1 - x), 0.7 * h, PALETTE[i % len(PALETTE)], 0.85)
        c.text(left - 8, y + 0.45 * h, f"{i + 1}. {r.label}", size=11, anchor="end")
        c.text(x + 4, y + 0.45 * h, f"{r.energy:.4f}", size=10, anchor="start")
    c.text((ax.x0 + ax.x1) / 2, HEIGHT - 20, "E (lower is better)", size=13)
    return c.render()


def render(paths, style="dots", title=None, zoom=0):
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}")
    runs = [load_run(p) for p in paths]
    _dedupe_labels(runs, paths)
    title = title or {"dots": "Final energies", "curves": "Training curves",
                      "ranking": "Ranking by final energy"}[style]
    if style == "dots":
        return plot_dots(runs, title)
    if style == "curves":
        return plot_curves(runs, title, zoom)
    return plot_ranking(runs, title)
