"""Worst-upstream risk propagation over dep edges.

Each skill's risk blends its own local risk with the worst risk among the
skills feeding it:

    R'(s) = (1 - alpha) * r_loc(s) + alpha * max_{p in parents(s)} R(p)

Skills without parents use their own local risk as the incoming term, which
pins roots at r_loc exactly.  Updates are synchronous.  The map is an
alpha-contraction in the sup norm (max is 1-Lipschitz), so the fixed point
is unique and iteration converges geometrically from any start.

The stop threshold is eps scaled by min(1, (1-alpha)/alpha): successive
change below that bound puts the iterate within eps of the fixed point, so
two runs from different starts land within 2*eps of each other.
"""

from __future__ import annotations

from dataclasses import dataclass

from skillops.contract import ConfigInvalid, Library, SkillOpsError
from skillops.hseg import Hseg

__all__ = [
    "CgpdConfig",
    "MissingRiskEntry",
    "PropagationResult",
    "propagate",
    "trigger_set",
]


class MissingRiskEntry(SkillOpsError):
    pass


@dataclass(frozen=True)
class CgpdConfig:
    alpha: float = 0.5
    eps: float = 1e-9
    max_iters: int = 64
    tau: float = 0.5

    def validate(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigInvalid(f"alpha must be in [0, 1), got {self.alpha}")
        if self.eps <= 0.0:
            raise ConfigInvalid(f"eps must be positive, got {self.eps}")
        if self.max_iters < 1:
            raise ConfigInvalid(f"max_iters must be at least 1, got {self.max_iters}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigInvalid(f"tau must be in [0, 1], got {self.tau}")


@dataclass(frozen=True)
class PropagationResult:
    risk: dict[str, float]
    iterations_used: int
    converged: bool


def _check_cover(values: dict[str, float], nodes, what: str) -> None:
    for node in nodes:
        if node not in values:
            raise MissingRiskEntry(f"{what} has no entry for {node}")
        v = values[node]
        if not 0.0 <= v <= 1.0:
            raise ConfigInvalid(f"{what}[{node}] = {v!r} outside [0, 1]")


def propagate(
    g: Hseg,
    r_loc: dict[str, float],
    cfg: CgpdConfig = CgpdConfig(),
    initial: dict[str, float] | None = None,
) -> PropagationResult:
    """Iterate to the risk fixed point.

    r_loc must cover every node.  initial defaults to r_loc; it exists so
    convergence from different starts can be compared.  Group maxima are
    shared across skills with the same artifact signature, keeping each
    sweep near-linear on clone-heavy graphs.
    """
    cfg.validate()
    ids = sorted(g.nodes)
    _check_cover(r_loc, ids, "r_loc")
    if initial is not None:
        _check_cover(initial, ids, "initial")
    r = {s: (initial or r_loc)[s] for s in ids}
    if not ids:
        return PropagationResult(risk={}, iterations_used=0, converged=True)

    alpha = cfg.alpha
    threshold = cfg.eps * min(1.0, (1.0 - alpha) / alpha) if alpha > 0 else cfg.eps
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iters + 1):
        stats: dict[frozenset, tuple[str | None, float, float]] = {}
        for a_sig, members in g._a_groups.items():
            best_id, best, second = None, float("-inf"), float("-inf")
            for m in members:
                v = r[m]
                if v > best:
                    best_id, second, best = m, best, v
                elif v > second:
                    second = v
            stats[a_sig] = (best_id, best, second)
        delta = 0.0
        nxt = {}
        for s in ids:
            incoming = None
            for a_sig in g._parent_sigs[g.precondition_sets[s]]:
                best_id, best, second = stats[a_sig]
                if best_id == s:
                    if len(g._a_groups[a_sig]) == 1:
                        continue
                    v = second
                else:
                    v = best
                if incoming is None or v > incoming:
                    incoming = v
            if incoming is None:
                incoming = r_loc[s]
            value = (1.0 - alpha) * r_loc[s] + alpha * incoming
            change = abs(value - r[s])
            if change > delta:
                delta = change
            nxt[s] = value
        r = nxt
        if delta < threshold:
            converged = True
            break
    return PropagationResult(risk=r, iterations_used=iterations, converged=converged)


def trigger_set(
    g: Hseg, risk: dict[str, float], lib: Library, tau: float = 0.5
) -> frozenset[str]:
    """Skills whose propagated risk exceeds tau while lacking any validator;
    these are the validator-insertion triggers."""
    flagged = set()
    for s in lib.skills:
        if s.id not in risk:
            raise MissingRiskEntry(s.id)
        if risk[s.id] > tau and not s.checklist:
            flagged.add(s.id)
    return frozenset(flagged)
