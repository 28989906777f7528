"""f451 Labs SLEEC CLI UI module.

Terminal rendering for the 'f451_sleec' command: diagnostics, obligation
sets, simulation traces, and bench summaries with latency sparklines.
None of this is a full TUI; every 'show_*' method prints once and
returns.

Output goes through a rich 'Console', which tests can point at a
'StringIO' buffer. Machine-readable output (e.g. '--json') never passes
through here.

Dependencies:
 - rich - tables, rules, and progress bars
 - sparklines - latency history as sparklines
 - termcolor - adds colors to sparklines
"""

from __future__ import annotations

from rich import box
from rich.console import Console
from rich.progress import BarColumn, Progress, TaskProgressColumn, TextColumn
from rich.table import Table
from rich.text import Text

from sparklines import sparklines

from .common import make_logo
from .diagnostics import Severity
from .stats import compute_stats

__all__ = [
    'ConsoleUI',
    'Logo',
    'latency_sparkline',
    'prep_sparkline_data',
]


# fmt: off
# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
APP_2COL_MIN_WIDTH = 80     # Min width (in chars) for fancy logo
SPARK_MAX_WIDTH = 40        # Max number of sparkline columns

VAL_BLANK_STR = '--'        # Use for 'blank' data

COLOR_DEF = 'grey50'        # Default color
COLOR_OK = 'green'
COLOR_WARN = 'yellow'
COLOR_ERROR = 'red'

SEVERITY_COLORS = {
    Severity.ERROR: COLOR_ERROR,
    Severity.WARNING: COLOR_WARN,
    Severity.INFO: COLOR_DEF,
}

STAT_COLUMNS = ('mean', 'p50', 'p75', 'p99', 'max', 'std', 'skewness', 'bowley')
# fmt: on


# =========================================================
#    H E L P E R   C L A S S E S   &   F U N C T I O N S
# =========================================================
class Logo:
    """Render fancy logo."""

    def __init__(self, width, namePlain, nameRender, verNum):
        self._render = make_logo(width, nameRender, f'v{verNum}')
        self._plain = f'{namePlain} - v{verNum}'

    @property
    def rows(self):
        return max(self._render.count('\n'), 1) if self._render else 1

    @property
    def plain(self):
        return self._plain

    def __rich__(self):
        return Text(str(self._render) if self._render else self._plain, end='')

    def __str__(self):
        return self._plain


def _fmt(val, digits=3):
    if val is None:
        return VAL_BLANK_STR
    if isinstance(val, float):
        return f'{val:,.{digits}f}'
    return str(val)


def prep_sparkline_data(samples, width=SPARK_MAX_WIDTH):
    """Squeeze samples into at most 'width' buckets.

    Each bucket holds the mean of consecutive samples, so a long run
    still fits in one table cell. Order is kept.
    """
    data = list(samples)
    if len(data) <= width:
        return data
    size = len(data) / width
    buckets = []
    for i in range(width):
        chunk = data[int(i * size):int((i + 1) * size)] or [data[-1]]
        buckets.append(sum(chunk) / len(chunk))
    return buckets


def latency_sparkline(samples, stats=None, width=SPARK_MAX_WIDTH):
    """Single-line sparkline for latency samples.

    With 'stats', bars below p75 are green and bars above p99 are red.
    The 'sparklines' library emits ANSI codes (through 'termcolor')
    for these, which we turn back into a rich 'Text'.
    """
    data = prep_sparkline_data(samples, width)
    if not data:
        return Text(VAL_BLANK_STR)

    emph = None
    if stats is not None:
        emph = [
            f'{COLOR_OK}:lt:{stats.p75}',
            f'{COLOR_ERROR}:gt:{stats.p99}',
        ]
    return Text.from_ansi(sparklines(data, emph=emph, num_lines=1, minimum=0)[-1])


# =========================================================
#                     M A I N   C L A S S
# =========================================================
class ConsoleUI:
    def __init__(self, console=None):
        self._console = console if console is not None else Console()

    @property
    def console(self):
        """Provide hook to Rich 'console'"""
        return self._console

    @property
    def is_wide(self):
        return self._console.size.width >= APP_2COL_MIN_WIDTH

    def print(self, *args, **kwargs):
        self._console.print(*args, **kwargs)

    def rule(self, *args, **kwargs):
        """Wrapper for Rich 'rule' function"""
        self._console.rule(*args, **kwargs)

    def show_logo(self, appNameLong, appNameShort, appVer):
        logo = Logo(self._console.size.width, appNameLong, appNameShort, appVer)
        self._console.print(logo if self.is_wide else Text(logo.plain))

    def show_diagnostics(self, diagnostics, sourceName):
        """Print one table row per diagnostic, errors first."""
        if not diagnostics:
            self._console.print(Text(f'{sourceName}: no findings', style=COLOR_OK))
            return

        table = Table(title=sourceName, box=box.SIMPLE_HEAD, expand=False)
        table.add_column('Severity', no_wrap=True)
        table.add_column('Code', no_wrap=True)
        table.add_column('Location', no_wrap=True)
        table.add_column('Line', justify='right')
        table.add_column('Message')

        order = {Severity.ERROR: 0, Severity.WARNING: 1, Severity.INFO: 2}
        for d in sorted(diagnostics, key=lambda d: order[d.severity]):
            message = d.message
            if d.witness is not None:
                message += '  [' + ', '.join(f'{k}={v!r}' for k, v in d.witness) + ']'
            table.add_row(
                Text(d.severity.value, style=SEVERITY_COLORS[d.severity]),
                d.code,
                d.location,
                _fmt(d.line),
                Text(message),
            )
        self._console.print(table)

    def show_obligations(self, obligations, title='Obligations'):
        status = obligations.status
        if obligations.is_respectful:
            self._console.print(Text(f'{title}: {status}', style=COLOR_OK))
            return

        table = Table(title=f'{title}: {status}', box=box.SIMPLE_HEAD)
        table.add_column('Capability', style='bold')
        table.add_column('Modifier')
        table.add_column('Fallback')
        table.add_column('Provenance')
        for d in obligations.directives:
            if d.modifier is None:
                modifier, fallback = VAL_BLANK_STR, VAL_BLANK_STR
            else:
                kind = 'after' if d.is_after else 'within'
                duration = d.modifier.duration
                modifier = f'{kind} {duration.amount} {duration.unit.name.lower()}'
                fallback = d.modifier.fallback if d.is_within else VAL_BLANK_STR
            provenance = ', '.join(f'{r}[{c}]' for r, c in d.provenance)
            table.add_row(d.capability, modifier, fallback, provenance)
        self._console.print(table)

    def show_trace(self, trace):
        """Random simulation summary; only offending steps are listed."""
        bad = trace.violations
        style = COLOR_OK if not bad else COLOR_ERROR
        self._console.print(
            Text(
                f'Simulated {len(trace.steps)} step(s) with seed {trace.seed}: {len(bad)} violation(s)',
                style=style,
            )
        )
        for s in bad:
            what = s.error or ', '.join(s.violations)
            values = ', '.join(f'{k}={v!r}' for k, v in sorted(s.snapshot.values.items()))
            self._console.print(Text(f'  step {s.index}: {what}  [{values}]', style=COLOR_ERROR))

    def show_suite(self, result):
        """Match count plus per-stage latency table with sparklines."""
        style = COLOR_OK if result.all_matched else COLOR_ERROR
        self._console.print(
            Text(
                f'{result.transport}: {result.matches}/{result.total} case(s) matched', style=style
            )
        )
        if result.mismatches:
            shown = ', '.join(result.mismatches[:10])
            more = f' (+{len(result.mismatches) - 10} more)' if len(result.mismatches) > 10 else ''
            self._console.print(Text(f'  mismatches: {shown}{more}', style=COLOR_ERROR))
        if not result.records:
            return

        table = Table(title='Latency (ms)', box=box.SQUARE_DOUBLE_HEAD, show_lines=False)
        table.add_column('Stage', no_wrap=True)
        for col in STAT_COLUMNS:
            table.add_column(col, justify='right', no_wrap=True)
        table.add_column('History', min_width=12, no_wrap=True, overflow='crop')

        for stage, stats in result.stage_stats().items():
            samples = result.stage_samples(stage)
            table.add_row(
                stage,
                *[_fmt(stats[col]) for col in STAT_COLUMNS],
                latency_sparkline(samples, compute_stats(samples)),
            )
        self._console.print(table)

    def show_fits(self, fits):
        if not fits:
            self._console.print(
                Text('No regression fits (not enough grid points)', style=COLOR_WARN)
            )
            return
        best = max(fits, key=lambda f: f.r2)
        table = Table(title='Latency vs. clauses', box=box.SIMPLE_HEAD)
        table.add_column('Model')
        table.add_column('Params')
        table.add_column('R²', justify='right')
        for f in fits:
            params = ', '.join(f'{k}={v:.4g}' for k, v in f.params.items())
            style = 'bold' if f is best else None
            table.add_row(Text(f.model, style=style), params, _fmt(f.r2, 4))
        self._console.print(table)

    def show_grid(self, points):
        """Mean server latency (ms) as an r x c table."""
        rows = sorted({p.spec.r for p in points})
        cols = sorted({p.spec.c for p in points})
        cells = {(p.spec.r, p.spec.c): p for p in points}

        table = Table(title='Mean server latency (ms), rules x clauses/rule', box=box.SIMPLE_HEAD)
        table.add_column('r \\ c', justify='right')
        for c in cols:
            table.add_column(str(c), justify='right')
        for r in rows:
            cellText = []
            for c in cols:
                p = cells.get((r, c))
                if p is None:
                    cellText.append(Text(VAL_BLANK_STR))
                else:
                    style = COLOR_OK if p.result.all_matched else COLOR_ERROR
                    cellText.append(Text(_fmt(p.server_mean_ms), style=style))
            table.add_row(str(r), *cellText)
        self._console.print(table)

    def progress(self):
        """Rich 'Progress' bar for long bench runs (use as context manager)."""
        return Progress(
            TextColumn('[progress.description]{task.description}'),
            BarColumn(),
            TaskProgressColumn(),
            console=self._console,
            transient=True,
        )
