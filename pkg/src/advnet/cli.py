"""Command-line front end: capacities, bounds, strategy checks and the summary table.

Exit codes: 0 success, 1 bad input, 2 budget exceeded, 3 invariant violated
(including a strategy that fails verification).
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import click

from . import bounds as bd
from . import catalog as cat
from .channel import symbolic_rate
from .netcore import (
    AdvnetError,
    BudgetExceeded,
    EdgeCut,
    Instance,
    NetworkError,
    Scenario,
    load_description,
)
from .search import BadParameter, SearchBudget, general_2level_lower_bound, max_over_network_codes

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3

EXACT = "EXACT"
STRATEGY_BOUND = "STRATEGY+BOUND"
LOWER_ONLY = "LOWER-ONLY"
CONDITIONAL = "CONDITIONAL"
SKIPPED = "SKIPPED"


class InvariantViolation(AdvnetError):
    pass


@dataclass
class RunConfig:
    command: str
    builtin: str | None = None
    spec: str | None = None
    q: int | None = None
    i: int | None = None
    t: int | None = None
    scenario: str | None = None
    fmt: str = "text"
    budget: SearchBudget = field(default_factory=SearchBudget)
    code_mode: str = "same"

    def validate(self) -> None:
        if (self.builtin is None) == (self.spec is None):
            raise click.UsageError("give exactly one of --builtin or --spec")
        if self.q is not None and self.q < 2:
            raise click.UsageError("--q must be >= 2")
        if self.i is not None and self.i < 1:
            raise click.UsageError("--i must be >= 1")
        if self.t is not None and self.t < 0:
            raise click.UsageError("--t must be >= 0")


@dataclass
class Loaded:
    inst: Instance
    kind: str | None = None
    param: int | None = None
    budget_overridden: bool = False


def load(cfg: RunConfig) -> Loaded:
    cfg.validate()
    if cfg.builtin is not None:
        kind, param = cat.parse_builtin(cfg.builtin)
        inst = cat.build_network(kind, param, q=cfg.q or 2, rounds=cfg.i or 1, scenario=cfg.scenario or "fixed")
        loaded = Loaded(inst, kind, param)
    else:
        net, adv, alphabet = load_description(cfg.spec)
        changes: dict[str, Any] = {}
        if cfg.i is not None:
            changes["rounds"] = cfg.i
        if cfg.scenario is not None:
            changes["scenario"] = Scenario.parse(cfg.scenario)
        adv = adv.with_(**changes) if changes else adv
        loaded = Loaded(Instance(net, adv, cfg.q or alphabet.size, cfg.spec))
    if cfg.t is not None and cfg.t != loaded.inst.adv.budget:
        inst = loaded.inst
        loaded.inst = Instance(inst.net, inst.adv.with_(budget=cfg.t).check_against(inst.net), inst.q, inst.label)
        loaded.budget_overridden = True
    return loaded


# -- output -----------------------------------------------------------------------------


def fmt_rate(size: int | None, q: int, i: int) -> tuple[str, str]:
    """(symbolic, six-decimal) renderings of log_q(size)/i."""
    if size is None:
        return "", ""
    if size == 0:
        return symbolic_rate(0, q, i), "-inf"
    return symbolic_rate(size, q, i), f"{math.log(size, q) / i:.6f}"


def emit(rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(rows, indent=2))
        return
    if not rows:
        return
    cols = list(rows[0])
    for r in rows[1:]:
        cols += [c for c in r if c not in cols]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: _cell(r.get(c)) for c in cols})
        click.echo(buf.getvalue(), nl=False)
        return
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(cols)]
    click.echo("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
    for row in cells:
        click.echo("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def parse_rows(text: str, fmt: str) -> list[dict]:
    """Read back CSV or JSON output; size columns come back as integers."""
    if fmt == "json":
        return json.loads(text)
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        for k, v in r.items():
            if k == "size" or k.endswith("_size") or k in ("q", "i", "t", "upper"):
                r[k] = int(v) if v not in ("", None) else None
    return rows


# -- core computations (shared by the commands and the table) ---------------------------


def best_upper_bound(inst: Instance, budget: SearchBudget, achieved: int | None = None) -> tuple[int, str] | None:
    """Smallest proven code-size bound among the closed-form double-cut and
    the multishot cut-set bound.  The cut-set sweep is skipped once the first
    bound already meets ``achieved``."""
    found = []
    try:
        rep = bd.analytic_double_cut_bound(inst.net, inst.adv, inst.q)
        found.append((rep.code_size, "double-cut-set"))
        if achieved is not None and rep.code_size <= achieved:
            return found[0]
    except BadParameter:
        pass
    try:
        rep = bd.multishot_cut_set_bound(inst.net, inst.adv, inst.q, budget)
        found.append((rep.code_size, "cut-set"))
    except BudgetExceeded:
        pass
    return min(found) if found else None


def strategy_cell(kind: str, param: int | None, q: int, i: int, scenario: Scenario,
                  budget: SearchBudget) -> dict:
    """Verified strategy size plus the best proven upper bound, with its tag."""
    s = cat.catalog_strategy(kind, param, q, i, scenario)
    rep = cat.verify_strategy(s)
    if not rep.passed:
        raise InvariantViolation(f"strategy {s.name} failed verification: collision {rep.collision}")
    inst = Instance(s.net, s.adv, q, s.name)
    upper = best_upper_bound(inst, budget, achieved=rep.size)
    if upper is None:
        return {"size": rep.size, "mode": LOWER_ONLY, "via": "strategy", "upper": None}
    ub, via = upper
    if ub < rep.size:
        raise InvariantViolation(f"verified code of size {rep.size} beats the proven bound {ub}")
    mode = EXACT if ub == rep.size else STRATEGY_BOUND
    return {"size": rep.size, "mode": mode, "via": f"strategy+{via}", "upper": ub}


def exhaustive_cell(inst: Instance, cfg: RunConfig) -> tuple[dict, Any]:
    method = "codes" if cfg.code_mode == "block" else "enumerate"
    res = max_over_network_codes(inst.net, inst.adv, inst.q, budget=cfg.budget, mode=cfg.code_mode, method=method)
    return {"size": res.size, "mode": EXACT, "via": f"exhaustive:{res.mode}", "upper": res.size}, res


# -- commands ---------------------------------------------------------------------------


def cmd_capacity(cfg: RunConfig, exhaustive: bool = False) -> int:
    ld = load(cfg)
    inst = ld.inst
    q, i = inst.q, inst.adv.rounds
    use_strategy = not exhaustive and ld.kind is not None and not ld.budget_overridden
    witness = ""
    if use_strategy:
        cell = catalog_cell(ld.kind, ld.param, q, i, inst.adv.scenario, cfg.budget, skip_over_budget=False)
    else:
        cell, res = exhaustive_cell(inst, cfg)
        witness = " ".join("".join(map(str, w)) for w in res.witness)
    sym, dec = fmt_rate(cell["size"], q, i)
    row = {"network": inst.label, "q": q, "i": i, "t": inst.adv.budget, "scenario": inst.adv.scenario.value,
           "size": cell["size"], "upper": cell.get("upper"), "rate": sym, "rate_value": dec,
           "mode": cell["mode"], "via": cell["via"]}
    if witness:
        row["witness"] = witness
    emit([row], cfg.fmt)
    return EXIT_OK


def _cut(spec: str, terminal: str) -> EdgeCut:
    edges = frozenset(e.strip() for e in spec.split(",") if e.strip())
    if not edges:
        raise click.UsageError("empty cut")
    return EdgeCut(edges, terminal)


def cmd_bound(cfg: RunConfig, which: str, cut1: str | None = None, cut2: str | None = None,
              terminal: str | None = None, bound_mode: str = "analytic") -> int:
    ld = load(cfg)
    inst = ld.inst
    net, adv, q = inst.net, inst.adv, inst.q
    if which == "singleton":
        rep = bd.singleton_cut_set_bound(net, adv)
        witness = rep.witness.sorted_ids(net)
    elif which == "generalized":
        profile = bd.TwoLevelProfile.of(net)
        rep = bd.generalized_network_singleton_bound(profile, adv.budget)
        witness = tuple(f"V{k}" for k in sorted(rep.witness))
    elif which == "multishot-cut":
        rep = bd.multishot_cut_set_bound(net, adv, q, cfg.budget)
        witness = rep.witness.sorted_ids(net)
    else:
        if cut1 or cut2:
            if not (cut1 and cut2):
                raise click.UsageError("give both --cut1 and --cut2")
            T = terminal or (net.terminals[0] if len(net.terminals) == 1 else None)
            if T is None:
                raise click.UsageError("--terminal is required on networks with several terminals")
            rep = bd.double_cut_set_bound(net, adv, _cut(cut1, T), _cut(cut2, T), q, mode=bound_mode,
                                          budget=cfg.budget, code_mode=cfg.code_mode)
        elif bound_mode == "analytic":
            rep = bd.analytic_double_cut_bound(net, adv, q)
        else:
            raise click.UsageError("exhaustive double-cut bounds need --cut1 and --cut2")
        witness = tuple(" ".join(c) for c in rep.witness)
        witness = f"{{{witness[0]}}} -> {{{witness[1]}}}"
    if rep.code_size is not None:
        sym, dec = fmt_rate(rep.code_size, q, adv.rounds)
    else:
        sym, dec = str(rep.value), f"{float(rep.value):.6f}"
    row = {"network": inst.label, "bound": which, "q": q, "i": adv.rounds, "t": adv.budget,
           "scenario": adv.scenario.value, "size": rep.code_size, "value": sym, "value_decimal": dec,
           "witness": witness, "mode": LOWER_ONLY if rep.mode == "catalog" else EXACT, "method": rep.mode}
    emit([row], cfg.fmt)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, sabotage: str | None = None) -> int:
    ld = load(cfg)
    if ld.kind is None:
        raise click.UsageError("verify needs a --builtin network with a constructed strategy")
    inst = ld.inst
    s = cat.catalog_strategy(ld.kind, ld.param, inst.q, inst.adv.rounds, inst.adv.scenario)
    if ld.budget_overridden:
        s = s.with_adversary(inst.adv)
    if sabotage:
        s = cat.sabotaged(s, sabotage)
    rep = cat.verify_strategy(s)
    row = {"strategy": s.name, "q": rep.q, "i": rep.rounds, "t": s.adv.budget, "scenario": s.adv.scenario.value,
           "size": rep.size, "claimed_size": rep.claimed_size, "unambiguous": rep.unambiguous,
           "decoder_correct": rep.decoder_correct, "observations": rep.observations,
           "result": "PASS" if rep.passed else "FAIL"}
    if rep.collision:
        w1, w2, T, y = rep.collision
        row["collision"] = f"{_word(w1)} and {_word(w2)} both give {_word(y)} at {T}"
    if rep.decoder_failure:
        w, T, y, got = rep.decoder_failure
        row["decoder_failure"] = f"{_word(w)} observed as {_word(y)} at {T} decoded to {_word(got) if got else None}"
    emit([row], cfg.fmt)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def _word(w) -> str:
    return "".join(map(str, w)) if all(isinstance(x, int) and x < 10 for x in w) else str(w)


TABLE_ROWS: tuple[tuple[str, str, int | None], ...] = (
    ("Diamond", "diamond", None),
    ("Mirrored", "mirrored", None),
    ("A2", "A", 2),
    ("B1", "B", 1),
    ("B2", "B", 2),
    ("C2", "C", 2),
    ("D1", "D", 1),
    ("E1", "E", 1),
    ("E2", "E", 2),
    ("Butterfly", "butterfly", None),
)


def table_rows(q: int, rounds: Sequence[int], budget: SearchBudget) -> list[dict]:
    rows = []
    for i in rounds:
        for label, kind, param in TABLE_ROWS:
            row: dict[str, Any] = {"network": label, "q": q, "i": i}
            for tag, sc in (("A1", Scenario.FIXED), ("A2", Scenario.FREE)):
                cell = catalog_cell(kind, param, q, i, sc, budget)
                sym, dec = fmt_rate(cell.get("size"), q, i)
                if cell["mode"] == CONDITIONAL and cell.get("size") is not None:
                    sym = f">= {sym}"
                row[f"{tag}_size"] = cell.get("size")
                row[f"{tag}_rate"] = sym or cell.get("note", "")
                row[f"{tag}_rate_value"] = dec
                row[f"{tag}_mode"] = cell["mode"]
            rows.append(row)
    return rows


def catalog_cell(kind: str, param: int | None, q: int, i: int, sc: Scenario, budget: SearchBudget,
                 skip_over_budget: bool = True) -> dict:
    """Entry for a catalog network; over-budget entries become SKIPPED or raise."""
    try:
        if kind in ("A", "B"):
            if sc is Scenario.FREE:
                return {"size": None, "mode": CONDITIONAL, "via": "no known value", "note": "unknown"}
            a, b = cat.family_profile(kind, param)
            lb = general_2level_lower_bound(bd.TwoLevelProfile(a, b), q, i, a=param, b=1)
            return {"size": lb.size, "mode": CONDITIONAL, "via": "assumes a one-shot pair reserving 1 vector"}
        if kind == "E" and param >= 2:
            # needs a one-shot pair that reserves one source vector; none is constructed
            size = q**i - 1 if sc is Scenario.FIXED else (q - 1) ** i
            return {"size": size, "mode": CONDITIONAL, "via": "assumes a one-shot pair reserving 1 vector"}
        return strategy_cell(kind, param, q, i, sc, budget)
    except (BudgetExceeded, cat.ScaleExceeded):
        if not skip_over_budget:
            raise
        return {"size": None, "mode": SKIPPED, "via": "budget", "note": "budget"}


def cmd_table(q: int, rounds: Sequence[int], fmt: str, budget: SearchBudget) -> int:
    if q < 2 or any(i < 1 for i in rounds):
        raise click.UsageError("need q >= 2 and every i >= 1")
    emit(table_rows(q, rounds, budget), fmt)
    return EXIT_OK


# -- click wiring -----------------------------------------------------------------------


def _common(fn: Callable) -> Callable:
    opts = [
        click.option("--builtin", help="diamond, mirrored, butterfly, butterfly-prose, or a family such as C2, E1"),
        click.option("--spec", type=click.Path(dir_okay=False), help="JSON network description"),
        click.option("--q", type=int, help="alphabet size"),
        click.option("--i", "rounds", type=int, help="number of network uses"),
        click.option("--t", type=int, help="override the adversary budget"),
        click.option("--scenario", type=click.Choice(["fixed", "free"]), help="fixed or free attacked edges"),
        click.option("--format", "fmt", type=click.Choice(["text", "csv", "json"]), default="text"),
        click.option("--budget-domain", type=int, default=SearchBudget.max_domain),
        click.option("--budget-codes", type=int, default=SearchBudget.max_network_codes),
        click.option("--per-round-codes", is_flag=True, help="let the network code change every round"),
        click.option("--block-codes", is_flag=True, help="let nodes act on whole histories"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(command: str, kw: dict) -> RunConfig:
    if kw["per_round_codes"] and kw["block_codes"]:
        raise click.UsageError("--per-round-codes and --block-codes are exclusive")
    mode = "per_round" if kw["per_round_codes"] else "block" if kw["block_codes"] else "same"
    budget = SearchBudget(max_domain=kw["budget_domain"], max_network_codes=kw["budget_codes"])
    return RunConfig(command, kw["builtin"], kw["spec"], kw["q"], kw["rounds"], kw["t"], kw["scenario"],
                     kw["fmt"], budget, mode)


@click.group()
def cli() -> None:
    """Zero-error capacities of networks with an edge-restricted adversary."""


@cli.command()
@_common
@click.option("--exhaustive", is_flag=True, help="search every network code instead of using the catalog strategy")
def capacity(exhaustive: bool, **kw) -> int:
    """Code size and rate, tagged with how they were established."""
    return cmd_capacity(_config("capacity", kw), exhaustive)


@cli.command()
@click.argument("which", type=click.Choice(["singleton", "generalized", "multishot-cut", "double-cut"]))
@_common
@click.option("--cut1", help="comma-separated edges of the first cut")
@click.option("--cut2", help="comma-separated edges of the second cut")
@click.option("--terminal")
@click.option("--bound-mode", type=click.Choice(["analytic", "exhaustive"]), default="analytic")
def bound(which: str, cut1, cut2, terminal, bound_mode, **kw) -> int:
    """Upper bound with its witness."""
    return cmd_bound(_config("bound", kw), which, cut1, cut2, terminal, bound_mode)


@cli.command()
@_common
@click.option("--sabotage", metavar="NODE", help="replace NODE by a blind copy of its first input")
def verify(sabotage, **kw) -> int:
    """Check a catalog strategy for unambiguity and correct decoding."""
    return cmd_verify(_config("verify", kw), sabotage)


@cli.command()
@click.option("--q", type=int, default=3)
@click.option("--i", "rounds", type=int, multiple=True, default=(1, 2), show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "csv", "json"]), default="text")
@click.option("--budget-domain", type=int, default=SearchBudget.max_domain)
@click.option("--budget-codes", type=int, default=SearchBudget.max_network_codes)
def table(q, rounds, fmt, budget_domain, budget_codes) -> int:
    """Multishot capacity table over the catalog networks."""
    return cmd_table(q, rounds, fmt, SearchBudget(max_domain=budget_domain, max_network_codes=budget_codes))


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (click.UsageError, click.BadParameter) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except (BudgetExceeded, cat.ScaleExceeded) as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        click.echo(f"invariant violated: {exc}", err=True)
        return EXIT_INVARIANT
    except (NetworkError, BadParameter, bd.NotTwoLevel, bd.NotThreeLevel, cat.BadReservedSet,
            OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except AssertionError as exc:
        click.echo(f"invariant violated: {exc}", err=True)
        return EXIT_INVARIANT
    return rv if isinstance(rv, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
